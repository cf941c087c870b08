//! Named verification suites with measured values against fixed thresholds.
//!
//! Each suite returns a [`CheckReport`] so callers (the CLI `check`
//! subcommand and the acceptance tests) can print one line per assertion
//! and decide on an exit code. Thresholds live here, next to the checks
//! that use them.

use crate::dynamics::{Branching, NoiseModel, Step};
use crate::error::Result;
use crate::hilbert::{AtomLevel, BasisState};
use crate::invariant;
use crate::linalg::CVector;
use crate::protocol::{
    calibration_report, extract_gate, run_protocol, ProtocolConfig, RunMode,
};
use crate::pulses::{self, ProtocolAngles};
use crate::zeno;
use std::f64::consts::SQRT_2;

/// Comparison direction for a check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    /// measured < threshold
    Below,
    /// measured ≥ threshold
    AtLeast,
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub cmp: Comparison,
    pub pass: bool,
    pub notes: Vec<String>,
}

impl CheckResult {
    fn new(name: impl Into<String>, measured: f64, threshold: f64, cmp: Comparison) -> Self {
        let pass = match cmp {
            Comparison::Below => measured < threshold,
            Comparison::AtLeast => measured >= threshold,
        };
        Self { name: name.into(), measured, threshold, cmp, pass, notes: Vec::new() }
    }

    fn with_notes(mut self, notes: Vec<String>) -> Self {
        self.notes = notes;
        self
    }

    pub fn render(&self) -> String {
        let op = match self.cmp {
            Comparison::Below => "<",
            Comparison::AtLeast => ">=",
        };
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        format!(
            "[{verdict}] {}: measured {:.6e} (required {op} {:.6e})",
            self.name, self.measured, self.threshold
        )
    }
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub suite: String,
    pub results: Vec<CheckResult>,
}

impl CheckReport {
    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }

    pub fn render(&self) -> String {
        let mut out = format!("== {} ==\n", self.suite);
        for r in &self.results {
            out.push_str(&r.render());
            out.push('\n');
            for n in &r.notes {
                out.push_str("       ");
                out.push_str(n);
                out.push('\n');
            }
        }
        out
    }
}

/// Auxiliary-angle equations: the protocol pulses must invert them to
/// machine precision everywhere on the step.
pub fn check_odes(config: &ProtocolConfig) -> Result<CheckReport> {
    let angles = ProtocolAngles::new(config.epsilon, config.t_f);
    let p = pulses::protocol_pulses(config.epsilon, config.t_f, 1.0 / SQRT_2)?;
    let grid = 1000;
    let mut worst_nu = 0.0f64;
    let mut worst_beta = 0.0f64;
    let mut worst_inverse = 0.0f64;
    for k in 0..grid {
        let t = config.t_f * k as f64 / (grid - 1) as f64;
        let (r_nu, r_beta) = pulses::angle_ode_residual(&angles, &p, t);
        worst_nu = worst_nu.max(r_nu.abs());
        worst_beta = worst_beta.max(r_beta.abs());
        let (oi, ot) = pulses::inverse_engineer(&angles, t)?;
        worst_inverse = worst_inverse
            .max((oi - p.omega_initial_leg(t)).abs())
            .max((ot - p.omega_target_leg(t)).abs());
    }

    let closed = pulses::lr_phase(config.epsilon)?;
    let quad = pulses::lr_phase_quadrature(config.epsilon, config.t_f, 4001)?;
    let mut quad_pair = [quad[1], quad[2]];
    quad_pair.sort_by(f64::total_cmp);
    let phase_err = (quad_pair[0] - closed.alpha_minus)
        .abs()
        .max((quad_pair[1] - closed.alpha_plus).abs())
        .max(quad[0].abs());

    Ok(CheckReport {
        suite: "odes".into(),
        results: vec![
            CheckResult::new("angle ODE residual r_nu (grid max)", worst_nu, 1e-12, Comparison::Below),
            CheckResult::new("angle ODE residual r_beta (grid max)", worst_beta, 1e-12, Comparison::Below),
            CheckResult::new(
                "inverse-engineered pulses vs protocol pulses (grid max)",
                worst_inverse,
                1e-12,
                Comparison::Below,
            ),
            CheckResult::new(
                "Lewis-Riesenfeld phase: quadrature vs closed form",
                phase_err,
                1e-6,
                Comparison::Below,
            )
            .with_notes(vec![format!(
                "closed ±{:.8}; quadrature ({:+.8}, {:+.8}, {:+.8})",
                closed.alpha_plus, quad[0], quad[1], quad[2]
            )]),
        ],
    })
}

/// Invariant equation and closed-form transfer.
pub fn check_invariant(config: &ProtocolConfig) -> Result<CheckReport> {
    let chi = 1.0;
    let angles = ProtocolAngles::new(config.epsilon, config.t_f);
    let p = pulses::protocol_pulses(config.epsilon, config.t_f, 1.0 / SQRT_2)?;
    let grid = 1000;
    let mut worst = 0.0f64;
    for k in 0..grid {
        let t = config.t_f * k as f64 / (grid - 1) as f64;
        worst = worst.max(invariant::invariant_residual(&angles, &p, chi, t));
    }

    let cf = invariant::closed_form_final_state(config.epsilon)?;
    let phi1 = CVector::from_vec(vec![1.0.into(), 0.0.into(), 0.0.into()]);
    let steps = (config.t_f / config.dt).round() as usize;
    let out = invariant::propagate_effective(&p, &phi1, config.t_f, steps);
    let componentwise = (0..3).map(|i| (out[i] - cf[i]).norm()).fold(0.0, f64::max);
    let norm_err = (cf.norm() - 1.0).abs();
    let target_pop = cf[2].norm_sqr();
    let pop_err = (out[2].norm_sqr() - target_pop).abs();

    Ok(CheckReport {
        suite: "invariant".into(),
        results: vec![
            CheckResult::new(
                "invariant equation residual (1000-point grid, units of chi)",
                worst / chi,
                1e-10,
                Comparison::Below,
            ),
            CheckResult::new("closed-form final state norm error", norm_err, 1e-12, Comparison::Below),
            CheckResult::new(
                "effective propagation vs closed form (componentwise)",
                componentwise,
                1e-4,
                Comparison::Below,
            )
            .with_notes(vec![
                format!(
                    "propagated ({:+.6}, {:+.6}i, {:+.6}), closed form ({:+.6}, {:+.6}i, {:+.6})",
                    out[0].re, out[1].im, out[2].re, cf[0].re, cf[1].im, cf[2].re
                ),
                "the phi1 component reproduces the closed form in magnitude only; \
                 its sign follows the propagation (+sin eps sin alpha)"
                    .into(),
            ]),
            CheckResult::new("target population |c_phi5|^2 error", pop_err, 1e-5, Comparison::Below),
        ],
    })
}

/// Zeno reduction quality: projector algebra, dark-sector consistency, and
/// the strong-coupling limit.
pub fn check_zeno(config: &ProtocolConfig) -> Result<CheckReport> {
    let initial = BasisState::new(AtomLevel::G0, AtomLevel::G1, 0);
    let mut errors = Vec::new();
    for g in [5.0, 10.0, 20.0, 50.0] {
        let mut cfg = config.clone();
        cfg.g = g;
        errors.push((g, zeno::zeno_error(&cfg, Step::One, &initial)?));
    }
    let worst_ratio = errors
        .windows(2)
        .map(|w| w[1].1 / w[0].1)
        .fold(0.0, f64::max);
    let table: Vec<String> =
        errors.iter().map(|(g, e)| format!("g = {g:>4}: error {e:.6e}")).collect();

    let eq5 = zeno::eq5_dark_consistency(config, Step::One, &initial, 4000)?;
    let leak = zeno::dark_leakage(config, Step::One, &initial)?;
    let peak_ratio = config.step_pulses(Step::One)?.amplitude / config.g;

    Ok(CheckReport {
        suite: "zeno".into(),
        results: vec![
            CheckResult::new(
                "zeno error shrinks with g (max consecutive ratio)",
                worst_ratio,
                1.0,
                Comparison::Below,
            )
            .with_notes(table),
            CheckResult::new(
                "zeno error at configured g",
                zeno::zeno_error(config, Step::One, &initial)?,
                0.15,
                Comparison::Below,
            ),
            CheckResult::new(
                "dark-sector evolution operator consistency",
                eq5,
                1e-6,
                Comparison::Below,
            ),
            CheckResult::new(
                "dark-subspace leakage vs (peak/g)^2",
                leak,
                peak_ratio * peak_ratio,
                Comparison::Below,
            ),
        ],
    })
}

/// Gate extraction and laser-phase calibration.
pub fn check_gate(config: &ProtocolConfig) -> Result<CheckReport> {
    let report = calibration_report(config)?;
    let notes: Vec<String> = report
        .candidates
        .iter()
        .map(|c| {
            format!(
                "target signs ({:+},{:+},{:+}): gate fidelity {:.6}",
                c.target_signs[0] as i8,
                c.target_signs[1] as i8,
                c.target_signs[2] as i8,
                c.gate_fidelity
            )
        })
        .collect();

    let mut cfg = config.clone();
    cfg.sign_config = report.best;
    let gate = extract_gate(&cfg)?;

    Ok(CheckReport {
        suite: "gate".into(),
        results: vec![
            CheckResult::new(
                "calibrated gate fidelity to exact SWAP",
                report.best_fidelity,
                0.99,
                Comparison::AtLeast,
            )
            .with_notes(notes),
            CheckResult::new(
                "max |G - SWAP| entry",
                gate.max_deviation_from_swap(),
                0.05,
                Comparison::Below,
            ),
            CheckResult::new("|G[10,01]| (swapped entry)", gate.matrix[(2, 1)].norm(), 0.99, Comparison::AtLeast),
            CheckResult::new("|G[01,10]| (swapped entry)", gate.matrix[(1, 2)].norm(), 0.99, Comparison::AtLeast),
            CheckResult::new("|G[11,11]|", gate.matrix[(3, 3)].norm(), 0.99, Comparison::AtLeast),
            CheckResult::new("|G[00,00]|", gate.matrix[(0, 0)].norm(), 0.99, Comparison::AtLeast)
                .with_notes(vec![
                    "the |00> input is dragged to |aa> by the step-3 drive on |0>; \
                     no laser-phase pattern avoids this"
                        .into(),
                ]),
            CheckResult::new("worst shelving-path leakage (inputs 01, 10)",
                gate.leakage[1].max(gate.leakage[2]),
                0.02,
                Comparison::Below,
            ),
        ],
    })
}

/// Numerical convergence in dt and Fock truncation.
pub fn check_convergence(config: &ProtocolConfig) -> Result<CheckReport> {
    // worst-case noise point, fidelity change under dt halving
    let mut noisy = config.clone();
    noisy.noise = NoiseModel { kappa: 10.0, gamma: 1.0, branching: Branching::PerChannel };
    noisy.sample_every = usize::MAX;
    let f_coarse = run_protocol(&noisy, RunMode::Open)?.fidelity;
    let mut fine = noisy.clone();
    fine.dt /= 2.0;
    let f_fine = run_protocol(&fine, RunMode::Open)?.fidelity;

    // Fock truncation: closed-system gate fidelity, n_max 1 → 2
    let mut base = config.clone();
    base.n_max = 1;
    let g1 = extract_gate(&base)?.gate_fidelity;
    let mut wide = config.clone();
    wide.n_max = 2;
    let g2 = extract_gate(&wide)?.gate_fidelity;

    // two-photon containment at n_max = 2
    let mut closed2 = wide.clone();
    closed2.sample_every = 10;
    let outcome = run_protocol(&closed2, RunMode::Closed)?;
    let space = closed2.space();
    let two_photon: Vec<BasisState> =
        space.states().filter(|s| s.photons == 2).collect();
    let table = crate::dynamics::populations(&outcome.trajectory, &two_photon)?;
    let worst_two_photon = table
        .iter()
        .map(|row| row.iter().sum::<f64>())
        .fold(0.0, f64::max);

    Ok(CheckReport {
        suite: "convergence".into(),
        results: vec![
            CheckResult::new(
                "worst-case-noise fidelity change under dt halving",
                (f_fine - f_coarse).abs(),
                1e-6,
                Comparison::Below,
            )
            .with_notes(vec![format!("F(dt) = {f_coarse:.9}, F(dt/2) = {f_fine:.9}")]),
            CheckResult::new(
                "closed gate fidelity change, n_max 1 -> 2",
                (g2 - g1).abs(),
                1e-8,
                Comparison::Below,
            ),
            CheckResult::new(
                "max two-photon population at n_max = 2 (closed)",
                worst_two_photon,
                1e-10,
                Comparison::Below,
            ),
        ],
    })
}

/// Run a suite by name.
pub fn run_suite(which: &str, config: &ProtocolConfig) -> Result<CheckReport> {
    match which {
        "odes" => check_odes(config),
        "invariant" => check_invariant(config),
        "zeno" => check_zeno(config),
        "gate" => check_gate(config),
        "convergence" => check_convergence(config),
        other => Err(crate::error::Error::InvalidConfig(format!(
            "unknown check suite '{other}' (expected invariant|zeno|odes|gate|convergence)"
        ))),
    }
}
