//! `zenoswap` — simulate and verify the three-step cavity-QED SWAP protocol.
//!
//! Subcommands: `run` (propagate and export populations), `pulses` (export
//! the Rabi-frequency schedule), `sweep` (fidelity over a κ/γ grid),
//! `check` (named verification suites). Exit codes: 0 success, 1
//! operational error, 2 verification failure.

mod config;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use zenoswap_core::checks;
use zenoswap_core::dynamics::{trajectory_csv, Step};
use zenoswap_core::hilbert::{AtomLevel, BasisState};
use zenoswap_core::protocol::{run_protocol, sweep, sweep_csv, RunMode};

#[derive(Parser)]
#[command(name = "zenoswap", version, about = "Cavity-QED SWAP protocol simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate the protocol and export population trajectories as CSV.
    Run {
        /// Configuration file (key = value lines).
        #[arg(long)]
        config: PathBuf,
        /// Input state: 00, 01, 10, 11, or "superposition" for the
        /// configured amplitudes.
        #[arg(long, default_value = "superposition")]
        initial: String,
        /// Force master-equation propagation with the configured noise.
        #[arg(long, conflicts_with = "closed")]
        open: bool,
        /// Force closed-system (Schrödinger) propagation.
        #[arg(long)]
        closed: bool,
        /// Output CSV path (default: <out_dir>/run.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export the six Rabi-frequency envelopes over the three steps.
    Pulses {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path (default: <out_dir>/pulses.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Master-equation fidelity over a (κ, γ) grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Gamma range as start:stop:count (inclusive).
        #[arg(long)]
        gamma: String,
        /// Kappa values as a comma-separated list.
        #[arg(long)]
        kappa: String,
        /// Output CSV path (default: <out_dir>/sweep.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named verification suite and print measured values.
    Check {
        #[arg(long)]
        config: PathBuf,
        /// One of: invariant, zeno, odes, gate, convergence.
        #[arg(long)]
        which: String,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
        Err(e) => {
            // --help / --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Run { config, initial, open, closed, out } => {
            cmd_run(&config, &initial, open, closed, out.as_deref())
        }
        Command::Pulses { config, out } => cmd_pulses(&config, out.as_deref()),
        Command::Sweep { config, gamma, kappa, out } => {
            cmd_sweep(&config, &gamma, &kappa, out.as_deref())
        }
        Command::Check { config, which } => cmd_check(&config, &which),
    }
}

fn resolve_out(fc: &config::FileConfig, out: Option<&Path>, default_name: &str) -> PathBuf {
    out.map(Path::to_path_buf).unwrap_or_else(|| fc.out_dir.join(default_name))
}

/// Populations exported by `run`: the qubit sector, both shelving states,
/// and the |aa⟩ state the step-3 drive populates from |00⟩.
fn run_labels() -> Vec<BasisState> {
    use AtomLevel::*;
    [(G0, G0), (G0, G1), (G1, G0), (G1, G1), (G1, Ga), (Ga, G1), (Ga, Ga)]
        .into_iter()
        .map(|(a, b)| BasisState::new(a, b, 0))
        .collect()
}

fn cmd_run(
    config_path: &Path,
    initial: &str,
    open: bool,
    closed: bool,
    out: Option<&Path>,
) -> anyhow::Result<ExitCode> {
    let mut fc = config::load(config_path)?;
    match initial {
        "superposition" => {}
        "00" | "01" | "10" | "11" => {
            let mut amps = [num_complex::Complex64::new(0.0, 0.0); 4];
            let idx = match initial {
                "00" => 0,
                "01" => 1,
                "10" => 2,
                _ => 3,
            };
            amps[idx] = num_complex::Complex64::new(1.0, 0.0);
            fc.protocol.input_amplitudes = amps;
        }
        other => bail!("unknown --initial '{other}' (expected 00|01|10|11|superposition)"),
    }

    let mode = if closed {
        RunMode::Closed
    } else if open || !fc.protocol.noise.is_closed() {
        RunMode::Open
    } else {
        RunMode::Closed
    };
    let mode_name = match mode {
        RunMode::Closed => "closed",
        RunMode::Open => "open",
    };

    let outcome = run_protocol(&fc.protocol, mode).map_err(|e| anyhow!("{e}"))?;
    let comment =
        config::describe(&fc.protocol, &format!("command=run initial={initial} mode={mode_name}"));
    let csv = trajectory_csv(&outcome.trajectory, &run_labels(), &[comment])
        .map_err(|e| anyhow!("{e}"))?;
    let path = resolve_out(&fc, out, "run.csv");
    std::fs::write(&path, csv).with_context(|| format!("cannot write {}", path.display()))?;
    println!("final fidelity vs exact SWAP: {:.9}", outcome.fidelity);
    println!("trajectory written to {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_pulses(config_path: &Path, out: Option<&Path>) -> anyhow::Result<ExitCode> {
    let fc = config::load(config_path)?;
    let cfg = &fc.protocol;
    let t_f = cfg.t_f;
    let p12 = cfg.step_pulses(Step::One).map_err(|e| anyhow!("{e}"))?;
    let p3 = cfg.step_pulses(Step::Three).map_err(|e| anyhow!("{e}"))?;

    let mut csv = String::new();
    csv.push_str(&format!("# {}\n", config::describe(cfg, "command=pulses")));
    csv.push_str("t,omega_0A,omega_aB,omega_0B,omega_aA,omega_a_prime,omega_0_prime\n");
    let stride = cfg.dt * cfg.sample_every.max(1) as f64;
    let n = (3.0 * t_f / stride).round() as usize;
    for k in 0..=n {
        let t = (k as f64 * stride).min(3.0 * t_f);
        // envelopes are nonzero only inside their own step; step
        // boundaries are inclusive so the sin legs show their peak at the
        // step end and the cos legs theirs at the step start
        let in1 = t <= t_f;
        let in2 = (t_f..=2.0 * t_f).contains(&t);
        let in3 = t >= 2.0 * t_f;
        let row = [
            if in1 { p12.omega_initial_leg(t) } else { 0.0 },
            if in1 { p12.omega_target_leg(t) } else { 0.0 },
            if in2 { p12.omega_initial_leg(t - t_f) } else { 0.0 },
            if in2 { p12.omega_target_leg(t - t_f) } else { 0.0 },
            if in3 { p3.omega_initial_leg(t - 2.0 * t_f) } else { 0.0 },
            if in3 { p3.omega_target_leg(t - 2.0 * t_f) } else { 0.0 },
        ];
        csv.push_str(&format!(
            "{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e}\n",
            t, row[0], row[1], row[2], row[3], row[4], row[5]
        ));
    }
    let path = resolve_out(&fc, out, "pulses.csv");
    std::fs::write(&path, csv).with_context(|| format!("cannot write {}", path.display()))?;
    println!("pulse schedule written to {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn parse_range(spec: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        bail!("range must be start:stop:count, got '{spec}'");
    }
    let start: f64 = parts[0].parse().context("bad range start")?;
    let stop: f64 = parts[1].parse().context("bad range stop")?;
    let count: usize = parts[2].parse().context("bad range count")?;
    if count == 0 {
        bail!("range count must be positive");
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    Ok((0..count).map(|k| start + (stop - start) * k as f64 / (count - 1) as f64).collect())
}

fn parse_list(spec: &str) -> anyhow::Result<Vec<f64>> {
    spec.split(',')
        .map(|t| t.trim().parse::<f64>().with_context(|| format!("bad list entry '{t}'")))
        .collect()
}

fn cmd_sweep(
    config_path: &Path,
    gamma_spec: &str,
    kappa_spec: &str,
    out: Option<&Path>,
) -> anyhow::Result<ExitCode> {
    let fc = config::load(config_path)?;
    let mut gammas = parse_range(gamma_spec)?;
    let mut kappas = parse_list(kappa_spec)?;
    gammas.sort_by(f64::total_cmp);
    kappas.sort_by(f64::total_cmp);

    let mut cfg = fc.protocol.clone();
    cfg.sample_every = usize::MAX;
    let points = sweep(&cfg, &gammas, &kappas).map_err(|e| anyhow!("{e}"))?;
    let comment = config::describe(
        &fc.protocol,
        &format!("command=sweep gamma={gamma_spec} kappa={kappa_spec}"),
    );
    let csv = sweep_csv(&points, &[comment]);
    let path = resolve_out(&fc, out, "sweep.csv");
    std::fs::write(&path, csv).with_context(|| format!("cannot write {}", path.display()))?;

    let worst = points.iter().map(|p| p.fidelity).fold(f64::INFINITY, f64::min);
    println!("worst-case fidelity over grid: {worst:.9}");
    println!("sweep written to {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_check(config_path: &Path, which: &str) -> anyhow::Result<ExitCode> {
    let fc = config::load(config_path)?;
    let report = checks::run_suite(which, &fc.protocol).map_err(|e| anyhow!("{e}"))?;
    print!("{}", report.render());
    if report.all_pass() {
        println!("{}: all checks passed", report.suite);
        Ok(ExitCode::SUCCESS)
    } else {
        println!("{}: some checks FAILED", report.suite);
        Ok(ExitCode::from(2))
    }
}
