//! Key–value configuration files.
//!
//! Format: one `key = value` pair per line, `#` comments, blank lines
//! ignored. Unknown keys are rejected. All rates are in units of g₀ and all
//! times in units of 1/g₀ (g₀ = 1 internally).
//!
//! ```text
//! epsilon = 0.25
//! g = 10.0
//! t_f = 20.0
//! n_max = 1
//! dt = 0.005            # default t_f/4000
//! kappa = 0.0
//! gamma = 0.0
//! branching = per_channel      # or total_split
//! input_amplitudes = 0.5 0.5 0.5 0.5   # complex, e.g. 0.5+0.1i
//! sign_initial = + + +
//! sign_target = + + -
//! step3_amplitude = exact_lambda       # or paper_literal
//! sample_every = 10
//! out_dir = .
//! ```

use anyhow::{anyhow, bail, Context};
use num_complex::Complex64;
use std::path::{Path, PathBuf};
use zenoswap_core::dynamics::{Branching, NoiseModel};
use zenoswap_core::protocol::{ProtocolConfig, Step3Amplitude};

#[derive(Debug, Clone)]
pub struct FileConfig {
    pub protocol: ProtocolConfig,
    pub out_dir: PathBuf,
}

pub fn load(path: &Path) -> anyhow::Result<FileConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    parse(&text).with_context(|| format!("invalid config file {}", path.display()))
}

pub fn parse(text: &str) -> anyhow::Result<FileConfig> {
    let mut cfg = ProtocolConfig::default();
    let mut out_dir = PathBuf::from(".");
    let mut dt_explicit = false;
    let mut sample_explicit = false;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected 'key = value'", lineno + 1))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "epsilon" => cfg.epsilon = num(key, value)?,
            "g" => cfg.g = num(key, value)?,
            "t_f" => cfg.t_f = num(key, value)?,
            "n_max" => cfg.n_max = int(key, value)?,
            "dt" => {
                cfg.dt = num(key, value)?;
                dt_explicit = true;
            }
            "kappa" => cfg.noise = NoiseModel { kappa: num(key, value)?, ..cfg.noise },
            "gamma" => cfg.noise = NoiseModel { gamma: num(key, value)?, ..cfg.noise },
            "branching" => {
                cfg.noise.branching = match value {
                    "per_channel" => Branching::PerChannel,
                    "total_split" => Branching::TotalSplit,
                    other => bail!("unknown branching '{other}'"),
                }
            }
            "input_amplitudes" => {
                let amps: Vec<Complex64> = value
                    .split_whitespace()
                    .map(parse_complex)
                    .collect::<anyhow::Result<_>>()?;
                if amps.len() != 4 {
                    bail!("input_amplitudes needs 4 entries, got {}", amps.len());
                }
                cfg.input_amplitudes = [amps[0], amps[1], amps[2], amps[3]];
            }
            "sign_initial" => {
                let signs = parse_signs(value)?;
                for (i, s) in signs.iter().enumerate() {
                    cfg.sign_config.steps[i].0 = *s;
                }
            }
            "sign_target" => {
                let signs = parse_signs(value)?;
                for (i, s) in signs.iter().enumerate() {
                    cfg.sign_config.steps[i].1 = *s;
                }
            }
            "step3_amplitude" => {
                cfg.step3_amplitude = match value {
                    "exact_lambda" => Step3Amplitude::ExactLambda,
                    "paper_literal" => Step3Amplitude::PaperLiteral,
                    other => bail!("unknown step3_amplitude '{other}'"),
                }
            }
            "sample_every" => {
                cfg.sample_every = int(key, value)?;
                sample_explicit = true;
            }
            "out_dir" => out_dir = PathBuf::from(value),
            other => bail!("unknown key '{other}'"),
        }
    }

    if !dt_explicit {
        cfg.dt = cfg.t_f / 4000.0;
    }
    if !sample_explicit {
        cfg.sample_every = 10;
    }
    cfg.validate().map_err(|e| anyhow!("{e}"))?;
    Ok(FileConfig { protocol: cfg, out_dir })
}

fn num(key: &str, value: &str) -> anyhow::Result<f64> {
    value.parse().with_context(|| format!("key '{key}': expected a number, got '{value}'"))
}

fn int(key: &str, value: &str) -> anyhow::Result<usize> {
    value.parse().with_context(|| format!("key '{key}': expected an integer, got '{value}'"))
}

fn parse_signs(value: &str) -> anyhow::Result<[f64; 3]> {
    let toks: Vec<&str> = value.split_whitespace().collect();
    if toks.len() != 3 {
        bail!("sign lists need 3 entries (steps 1-3), got {}", toks.len());
    }
    let mut out = [1.0; 3];
    for (i, t) in toks.iter().enumerate() {
        out[i] = match *t {
            "+" | "+1" | "1" => 1.0,
            "-" | "-1" => -1.0,
            other => bail!("sign entries must be +/-, got '{other}'"),
        };
    }
    Ok(out)
}

/// `a`, `a+bi`, `a-bi`, or `bi`.
fn parse_complex(tok: &str) -> anyhow::Result<Complex64> {
    let s = tok.trim();
    if let Some(imag) = s.strip_suffix('i') {
        // split on the last +/- that is not a leading sign or exponent sign
        let bytes = imag.as_bytes();
        for k in (1..bytes.len()).rev() {
            let c = bytes[k] as char;
            if (c == '+' || c == '-') && !matches!(bytes[k - 1] as char, 'e' | 'E') {
                let re: f64 = imag[..k].parse().context("bad real part")?;
                let im_str = &imag[k..];
                let im: f64 = if im_str == "+" || im_str == "-" {
                    format!("{im_str}1").parse()?
                } else {
                    im_str.parse().context("bad imaginary part")?
                };
                return Ok(Complex64::new(re, im));
            }
        }
        let im: f64 = if imag.is_empty() { 1.0 } else { imag.parse().context("bad imaginary part")? };
        return Ok(Complex64::new(0.0, im));
    }
    Ok(Complex64::new(s.parse().context("bad real number")?, 0.0))
}

/// One-line record of every resolved setting, for CSV provenance comments.
pub fn describe(cfg: &ProtocolConfig, extra: &str) -> String {
    let amps = cfg
        .input_amplitudes
        .iter()
        .map(|a| format!("{:+.6}{:+.6}i", a.re, a.im))
        .collect::<Vec<_>>()
        .join(" ");
    let signs = cfg
        .sign_config
        .steps
        .iter()
        .map(|(a, b)| format!("({:+},{:+})", *a as i8, *b as i8))
        .collect::<Vec<_>>()
        .join(" ");
    format!(
        "config: epsilon={} g={} t_f={} n_max={} dt={} kappa={} gamma={} branching={} \
         amplitudes=[{}] signs=[{}] step3={:?} sample_every={} {}",
        cfg.epsilon,
        cfg.g,
        cfg.t_f,
        cfg.n_max,
        cfg.dt,
        cfg.noise.kappa,
        cfg.noise.gamma,
        cfg.noise.branching.label(),
        amps,
        signs,
        cfg.step3_amplitude,
        cfg.sample_every,
        extra,
    )
}
