//! Three-step SWAP protocol orchestration.
//!
//! Step 1 moves the |01⟩ population to the |1a⟩ shelf, step 2 moves |10⟩ to
//! |a1⟩, and step 3 applies the one-qubit |a⟩ → |0⟩ relabeling on both
//! atoms. Laser phases (±1 per pulse) are free parameters; only the
//! relative sign inside each step is physical, and [`calibrate_signs`]
//! searches the 2³ patterns against full propagation to pick the one
//! closest to an exact SWAP.

use crate::dynamics::{
    build_step_hamiltonian, lindblad_evolve, schrodinger_evolve, Branching, NoiseModel, Step,
    Trajectory,
};
use crate::error::{Error, Result};
use crate::hilbert::{AtomLevel, BasisState, SpaceDescriptor};
use crate::linalg::{c64, CMatrix, CVector};
use crate::pulses::{protocol_pulses, PulseSchedule};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::{FRAC_PI_2, SQRT_2};

/// Amplitude convention for the step-3 pulse pair.
///
/// The cavity-mediated steps need peak (π/t_f)cot ε/√2 because their
/// effective couplings carry a 1/√2 from the dark-state projection. Step 3
/// drives a bare Λ system with no projection, so its exact
/// inverse-engineered peak is (π/t_f)cot ε/2; `PaperLiteral` reuses the
/// 1/√2 peak instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step3Amplitude {
    PaperLiteral,
    ExactLambda,
}

/// Per-step laser-phase signs (initial leg, target leg), each ±1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignConfig {
    pub steps: [(f64, f64); 3],
}

impl Default for SignConfig {
    /// The calibrated pattern: flipping the step-3 target leg makes the
    /// |a⟩ → |0⟩ relabeling deliver +|0⟩, completing the +|10⟩/+|01⟩ chain.
    fn default() -> Self {
        SignConfig { steps: [(1.0, 1.0), (1.0, 1.0), (1.0, -1.0)] }
    }
}

impl SignConfig {
    pub fn validate(&self) -> Result<()> {
        for (i, (si, st)) in self.steps.iter().enumerate() {
            if si.abs() != 1.0 || st.abs() != 1.0 {
                return Err(Error::InvalidConfig(format!(
                    "sign factors must be ±1 (step {} has ({si}, {st}))",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    pub fn for_step(&self, step: Step) -> (f64, f64) {
        self.steps[step.index()]
    }

    /// Realized sign of the cavity-mediated transfer |φ₁⟩ → ±|φ₅⟩ in steps
    /// 1 and 2: the dark-state projection contributes a relative minus on
    /// the initial leg, so the transfer sign is the product of the two
    /// laser signs.
    pub fn transfer_sign(&self, step: Step) -> f64 {
        let (si, st) = self.for_step(step);
        match step {
            Step::One | Step::Two => si * st,
            // direct Λ drive: no projection minus
            Step::Three => -si * st,
        }
    }
}

/// All physical and numerical knobs for one protocol run.
#[derive(Debug, Clone)]
pub struct ProtocolConfig {
    /// Invariant mixing angle ε (radians).
    pub epsilon: f64,
    /// Cavity coupling g (units of g₀).
    pub g: f64,
    /// Per-step duration (units of 1/g₀).
    pub t_f: f64,
    /// Fock truncation.
    pub n_max: usize,
    /// Integrator step.
    pub dt: f64,
    pub noise: NoiseModel,
    /// Input amplitudes (α₀₀, α₀₁, α₁₀, α₁₁).
    pub input_amplitudes: [Complex64; 4],
    pub sign_config: SignConfig,
    pub step3_amplitude: Step3Amplitude,
    /// Record one snapshot every this many integrator steps.
    pub sample_every: usize,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        let t_f = 20.0;
        ProtocolConfig {
            epsilon: 0.25,
            g: 10.0,
            t_f,
            n_max: 1,
            dt: t_f / 4000.0,
            noise: NoiseModel::closed(),
            input_amplitudes: [c64(0.5, 0.0); 4],
            sign_config: SignConfig::default(),
            step3_amplitude: Step3Amplitude::ExactLambda,
            sample_every: 10,
        }
    }
}

impl ProtocolConfig {
    pub fn space(&self) -> SpaceDescriptor {
        SpaceDescriptor::new(self.n_max)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < FRAC_PI_2) {
            return Err(Error::InvalidConfig(format!("epsilon out of (0, π/2): {}", self.epsilon)));
        }
        if self.g <= 0.0 || self.t_f <= 0.0 || self.dt <= 0.0 {
            return Err(Error::InvalidConfig("g, t_f, dt must be positive".into()));
        }
        if self.n_max < 1 {
            return Err(Error::InvalidConfig("n_max must be at least 1".into()));
        }
        self.noise.validate()?;
        self.sign_config.validate()?;
        let norm_sq: f64 = self.input_amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > 1e-12 {
            return Err(Error::UnnormalizedInput { norm_sq });
        }
        Ok(())
    }

    /// Pulse pair for a step, signs applied.
    pub fn step_pulses(&self, step: Step) -> Result<PulseSchedule> {
        let factor = match (step, self.step3_amplitude) {
            (Step::One | Step::Two, _) => 1.0 / SQRT_2,
            (Step::Three, Step3Amplitude::PaperLiteral) => 1.0 / SQRT_2,
            (Step::Three, Step3Amplitude::ExactLambda) => 0.5,
        };
        let (si, st) = self.sign_config.for_step(step);
        Ok(protocol_pulses(self.epsilon, self.t_f, factor)?.with_signs(si, st))
    }

    /// Copy with different noise rates.
    pub fn with_noise(&self, kappa: f64, gamma: f64) -> Self {
        let mut cfg = self.clone();
        cfg.noise = NoiseModel { kappa, gamma, branching: self.noise.branching };
        cfg
    }
}

/// The four computational qubit levels in gate-matrix order
/// |00⟩, |01⟩, |10⟩, |11⟩.
pub const QUBIT_LEVELS: [(AtomLevel, AtomLevel); 4] = [
    (AtomLevel::G0, AtomLevel::G0),
    (AtomLevel::G0, AtomLevel::G1),
    (AtomLevel::G1, AtomLevel::G0),
    (AtomLevel::G1, AtomLevel::G1),
];

/// Vacuum-sector basis state for a qubit pair.
pub fn qubit_state(levels: (AtomLevel, AtomLevel)) -> BasisState {
    BasisState::new(levels.0, levels.1, 0)
}

/// The exact SWAP matrix on {|00⟩, |01⟩, |10⟩, |11⟩}.
pub fn swap_matrix() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = c64(1.0, 0.0);
    m[(1, 2)] = c64(1.0, 0.0);
    m[(2, 1)] = c64(1.0, 0.0);
    m[(3, 3)] = c64(1.0, 0.0);
    m
}

/// Full-space input state Σ α_nm |nm⟩|0⟩.
pub fn input_state(config: &ProtocolConfig) -> Result<CVector> {
    let space = config.space();
    let mut psi = CVector::zeros(space.dim());
    for (levels, amp) in QUBIT_LEVELS.iter().zip(&config.input_amplitudes) {
        psi[space.index(&qubit_state(*levels))?] = *amp;
    }
    Ok(psi)
}

/// Ideal states (Ψ₀, Ψ₁, Ψ₂, Ψ₃) after each step, with the intermediate
/// shelf signs determined by the configured laser phases. Ψ₃ is always the
/// exact SWAP output.
pub fn ideal_states(config: &ProtocolConfig) -> Result<[CVector; 4]> {
    use AtomLevel::*;
    let space = config.space();
    let [a00, a01, a10, a11] = config.input_amplitudes;
    let s1 = config.sign_config.transfer_sign(Step::One);
    let s2 = config.sign_config.transfer_sign(Step::Two);
    let mut states = [(); 4].map(|_| CVector::zeros(space.dim()));

    let mut set = |k: usize, a: AtomLevel, b: AtomLevel, amp: Complex64| -> Result<()> {
        let idx = space.index(&BasisState::new(a, b, 0))?;
        states[k][idx] += amp;
        Ok(())
    };

    // Ψ₀: the input
    set(0, G0, G0, a00)?;
    set(0, G0, G1, a01)?;
    set(0, G1, G0, a10)?;
    set(0, G1, G1, a11)?;
    // Ψ₁: |01⟩ shelved on |1a⟩
    set(1, G0, G0, a00)?;
    set(1, G1, Ga, a01 * s1)?;
    set(1, G1, G0, a10)?;
    set(1, G1, G1, a11)?;
    // Ψ₂: |10⟩ shelved on |a1⟩
    set(2, G0, G0, a00)?;
    set(2, G1, Ga, a01 * s1)?;
    set(2, Ga, G1, a10 * s2)?;
    set(2, G1, G1, a11)?;
    // Ψ₃: exact SWAP output
    set(3, G0, G0, a00)?;
    set(3, G1, G0, a01)?;
    set(3, G0, G1, a10)?;
    set(3, G1, G1, a11)?;
    Ok(states)
}

/// Whether to propagate a pure state or a density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Closed,
    Open,
}

/// Result of one protocol run.
#[derive(Debug, Clone)]
pub struct ProtocolOutcome {
    pub trajectory: Trajectory,
    /// F = ⟨Ψ_ideal| ρ(3t_f) |Ψ_ideal⟩ against the exact SWAP output.
    pub fidelity: f64,
}

/// Propagate the configured input through all three steps.
///
/// `RunMode::Closed` integrates the Schrödinger equation and ignores the
/// noise model; `RunMode::Open` integrates the master equation from
/// ρ(0) = |Ψ₀⟩⟨Ψ₀|.
pub fn run_protocol(config: &ProtocolConfig, mode: RunMode) -> Result<ProtocolOutcome> {
    config.validate()?;
    let psi0 = input_state(config)?;
    let ideal = ideal_states(config)?[3].clone();
    let mut trajectory: Option<Trajectory> = None;

    match mode {
        RunMode::Closed => {
            let mut psi = psi0;
            for step in Step::ALL {
                let h = build_step_hamiltonian(step, config)?;
                let offset = step.index() as f64 * config.t_f;
                let traj = schrodinger_evolve(
                    &h,
                    &psi,
                    (0.0, config.t_f),
                    config.dt,
                    config.sample_every,
                    offset,
                )?;
                psi = traj.final_pure().unwrap().clone();
                match &mut trajectory {
                    Some(t) => t.extend(traj),
                    None => trajectory = Some(traj),
                }
            }
            let fidelity = ideal.dotc(&psi).norm_sqr();
            Ok(ProtocolOutcome { trajectory: trajectory.unwrap(), fidelity })
        }
        RunMode::Open => {
            let mut rho = &psi0 * psi0.adjoint();
            for step in Step::ALL {
                let h = build_step_hamiltonian(step, config)?;
                let offset = step.index() as f64 * config.t_f;
                let traj = lindblad_evolve(
                    &h,
                    &rho,
                    &config.noise,
                    (0.0, config.t_f),
                    config.dt,
                    config.sample_every,
                    offset,
                )?;
                rho = traj.final_density().unwrap().clone();
                match &mut trajectory {
                    Some(t) => t.extend(traj),
                    None => trajectory = Some(traj),
                }
            }
            let fidelity = (&ideal.adjoint() * &rho * &ideal)[(0, 0)].re;
            Ok(ProtocolOutcome { trajectory: trajectory.unwrap(), fidelity })
        }
    }
}

/// Gate matrix on the qubit ⊗ vacuum sector, with per-input leakage.
#[derive(Debug, Clone)]
pub struct GateResult {
    /// G[j, i] = ⟨qubit_j, 0| U |qubit_i, 0⟩.
    pub matrix: CMatrix,
    /// |Tr(SWAP† G)/4|².
    pub gate_fidelity: f64,
    /// 1 − column norm² per input.
    pub leakage: [f64; 4],
}

impl GateResult {
    pub fn max_deviation_from_swap(&self) -> f64 {
        crate::linalg::max_abs(&(self.matrix.clone() - swap_matrix()))
    }
}

/// Run the protocol on the four computational basis inputs (closed system)
/// and project the outputs onto the qubit ⊗ vacuum basis.
pub fn extract_gate(config: &ProtocolConfig) -> Result<GateResult> {
    let mut cfg = config.clone();
    cfg.sample_every = usize::MAX;
    let space = cfg.space();
    let mut matrix = CMatrix::zeros(4, 4);
    let mut leakage = [0.0; 4];
    for col in 0..4 {
        cfg.input_amplitudes = [c64(0.0, 0.0); 4];
        cfg.input_amplitudes[col] = c64(1.0, 0.0);
        let outcome = run_protocol(&cfg, RunMode::Closed)?;
        let psi = outcome.trajectory.final_pure().unwrap();
        let mut col_norm_sq = 0.0;
        for (row, out_levels) in QUBIT_LEVELS.iter().enumerate() {
            let amp = psi[space.index(&qubit_state(*out_levels))?];
            matrix[(row, col)] = amp;
            col_norm_sq += amp.norm_sqr();
        }
        leakage[col] = 1.0 - col_norm_sq;
    }
    let swap = swap_matrix();
    let overlap = (swap.adjoint() * &matrix).diagonal().iter().sum::<Complex64>() / 4.0;
    Ok(GateResult { matrix, gate_fidelity: overlap.norm_sqr(), leakage })
}

/// One candidate from the sign search.
#[derive(Debug, Clone)]
pub struct SignCandidate {
    /// Target-leg signs of steps 1–3 (initial legs fixed at +1).
    pub target_signs: [f64; 3],
    pub gate_fidelity: f64,
}

/// Full record of the laser-phase search.
#[derive(Debug, Clone)]
pub struct CalibrationReport {
    pub candidates: Vec<SignCandidate>,
    pub best: SignConfig,
    pub best_fidelity: f64,
}

/// Evaluate all 2³ physically inequivalent laser-phase patterns (relative
/// sign per step) by full propagation, without enforcing a threshold.
pub fn calibration_report(config: &ProtocolConfig) -> Result<CalibrationReport> {
    let mut candidates = Vec::with_capacity(8);
    let mut best: Option<(SignConfig, f64)> = None;
    for &s1 in &[1.0, -1.0] {
        for &s2 in &[1.0, -1.0] {
            for &s3 in &[1.0, -1.0] {
                let mut cfg = config.clone();
                cfg.sign_config = SignConfig { steps: [(1.0, s1), (1.0, s2), (1.0, s3)] };
                let gate = extract_gate(&cfg)?;
                candidates.push(SignCandidate {
                    target_signs: [s1, s2, s3],
                    gate_fidelity: gate.gate_fidelity,
                });
                // strictly-greater keeps the lexicographically first maximum
                if best.as_ref().is_none_or(|(_, f)| gate.gate_fidelity > *f + 1e-12) {
                    best = Some((cfg.sign_config, gate.gate_fidelity));
                }
            }
        }
    }
    let (best, best_fidelity) = best.unwrap();
    Ok(CalibrationReport { candidates, best, best_fidelity })
}

/// Pick the laser-phase pattern maximizing closed-system gate fidelity.
///
/// Errors when even the best pattern stays below 0.99, reporting all eight
/// candidate fidelities.
pub fn calibrate_signs(config: &ProtocolConfig) -> Result<SignConfig> {
    let report = calibration_report(config)?;
    if report.best_fidelity < 0.99 {
        let listing = report
            .candidates
            .iter()
            .map(|c| {
                format!(
                    "({:+},{:+},{:+}) -> {:.6}",
                    c.target_signs[0] as i8, c.target_signs[1] as i8, c.target_signs[2] as i8,
                    c.gate_fidelity
                )
            })
            .collect::<Vec<_>>()
            .join(", ");
        return Err(Error::CalibrationFailure { best: report.best_fidelity, report: listing });
    }
    Ok(report.best)
}

/// One point of a (κ, γ) sweep.
#[derive(Debug, Clone, Copy)]
pub struct SweepPoint {
    pub kappa: f64,
    pub gamma: f64,
    pub fidelity: f64,
    pub branching: Branching,
}

/// Master-equation fidelity over a (κ, γ) grid, κ as rows (outer), γ as
/// columns (inner). Points run concurrently; ordering is deterministic.
pub fn sweep(config: &ProtocolConfig, gammas: &[f64], kappas: &[f64]) -> Result<Vec<SweepPoint>> {
    if gammas.is_empty() || kappas.is_empty() {
        return Err(Error::InvalidConfig("sweep needs at least one gamma and one kappa".into()));
    }
    let grid: Vec<(f64, f64)> = kappas
        .iter()
        .flat_map(|&k| gammas.iter().map(move |&g| (k, g)))
        .collect();
    grid.par_iter()
        .map(|&(kappa, gamma)| {
            let mut cfg = config.with_noise(kappa, gamma);
            cfg.sample_every = usize::MAX;
            let outcome = run_protocol(&cfg, RunMode::Open)?;
            Ok(SweepPoint { kappa, gamma, fidelity: outcome.fidelity, branching: cfg.noise.branching })
        })
        .collect()
}

/// Render sweep results as CSV (`kappa,gamma,fidelity,branching`).
pub fn sweep_csv(points: &[SweepPoint], comments: &[String]) -> String {
    let mut out = String::new();
    for line in comments {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    out.push_str("kappa,gamma,fidelity,branching\n");
    for p in points {
        out.push_str(&format!(
            "{:.8e},{:.8e},{:.8e},{}\n",
            p.kappa,
            p.gamma,
            p.fidelity,
            p.branching.label()
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn fast_config() -> ProtocolConfig {
        // 1000 steps per segment is plenty for unit-test accuracy
        let mut cfg = ProtocolConfig::default();
        cfg.dt = cfg.t_f / 1000.0;
        cfg.sample_every = usize::MAX;
        cfg
    }

    #[test]
    fn default_config_is_valid() {
        ProtocolConfig::default().validate().unwrap();
    }

    #[test]
    fn unnormalized_input_is_rejected() {
        let mut cfg = ProtocolConfig::default();
        cfg.input_amplitudes = [c64(1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)];
        assert!(matches!(cfg.validate(), Err(Error::UnnormalizedInput { .. })));
    }

    #[test]
    fn ideal_states_swap_structure() {
        use AtomLevel::*;
        let mut cfg = ProtocolConfig::default();
        let space = cfg.space();

        // basis input |01⟩ ends at |10⟩
        cfg.input_amplitudes = [c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)];
        let states = ideal_states(&cfg).unwrap();
        let i10 = space.index(&BasisState::new(G1, G0, 0)).unwrap();
        assert_abs_diff_eq!(states[3][i10].re, 1.0, epsilon = 1e-15);
        // intermediate shelf |1a⟩ with the sign set by the laser phases
        let i1a = space.index(&BasisState::new(G1, Ga, 0)).unwrap();
        let expected = cfg.sign_config.transfer_sign(Step::One);
        assert_abs_diff_eq!(states[1][i1a].re, expected, epsilon = 1e-15);

        // |00⟩ input is fixed by SWAP
        cfg.input_amplitudes = [c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)];
        let states = ideal_states(&cfg).unwrap();
        for k in 0..4 {
            let i00 = space.index(&BasisState::new(G0, G0, 0)).unwrap();
            assert_abs_diff_eq!(states[k][i00].re, 1.0, epsilon = 1e-15);
        }

        // the equal superposition is SWAP-invariant: Ψ₃ = Ψ₀
        cfg.input_amplitudes = [c64(0.5, 0.0); 4];
        let states = ideal_states(&cfg).unwrap();
        assert_abs_diff_eq!((states[3].clone() - states[0].clone()).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn decoupled_input_11_is_preserved() {
        use AtomLevel::*;
        let mut cfg = fast_config();
        cfg.input_amplitudes = [c64(0.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)];
        let outcome = run_protocol(&cfg, RunMode::Closed).unwrap();
        assert!(outcome.fidelity > 0.9999);
        let psi = outcome.trajectory.final_pure().unwrap();
        let idx = cfg.space().index(&BasisState::new(G1, G1, 0)).unwrap();
        assert!(psi[idx].norm_sqr() > 0.9999);
    }

    #[test]
    fn input_01_swaps_to_10() {
        use AtomLevel::*;
        let mut cfg = fast_config();
        cfg.input_amplitudes = [c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)];
        let outcome = run_protocol(&cfg, RunMode::Closed).unwrap();
        let psi = outcome.trajectory.final_pure().unwrap();
        let idx = cfg.space().index(&BasisState::new(G1, G0, 0)).unwrap();
        assert!(psi[idx].norm_sqr() > 0.98, "P(10) = {}", psi[idx].norm_sqr());
        // with the calibrated signs the amplitude lands on +|10⟩
        assert!(psi[idx].re > 0.99);
        assert!(outcome.fidelity > 0.98);
    }

    #[test]
    fn transfer_sign_matches_propagation() {
        use AtomLevel::*;
        // step 1 alone, all-plus lasers: |01⟩ → +|1a⟩ (the projection minus
        // and the transfer minus cancel)
        let mut cfg = fast_config();
        cfg.input_amplitudes = [c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)];
        cfg.sign_config = SignConfig { steps: [(1.0, 1.0), (1.0, 1.0), (1.0, 1.0)] };
        let h = build_step_hamiltonian(Step::One, &cfg).unwrap();
        let psi0 = input_state(&cfg).unwrap();
        let traj =
            schrodinger_evolve(&h, &psi0, (0.0, cfg.t_f), cfg.dt, usize::MAX, 0.0).unwrap();
        let psi = traj.final_pure().unwrap();
        let i1a = cfg.space().index(&BasisState::new(G1, Ga, 0)).unwrap();
        assert!(psi[i1a].re > 0.999);
        assert_abs_diff_eq!(cfg.sign_config.transfer_sign(Step::One), 1.0, epsilon = 0.0);

        // flipping one leg flips the shelf sign
        cfg.sign_config = SignConfig { steps: [(1.0, -1.0), (1.0, 1.0), (1.0, 1.0)] };
        let h = build_step_hamiltonian(Step::One, &cfg).unwrap();
        let traj =
            schrodinger_evolve(&h, &psi0, (0.0, cfg.t_f), cfg.dt, usize::MAX, 0.0).unwrap();
        let psi = traj.final_pure().unwrap();
        assert!(psi[i1a].re < -0.999);
        assert_abs_diff_eq!(cfg.sign_config.transfer_sign(Step::One), -1.0, epsilon = 0.0);
    }

    #[test]
    fn linearity_of_closed_runs() {
        let mut cfg = fast_config();
        cfg.input_amplitudes = [
            c64(0.5, 0.0),
            c64(0.0, 0.5),
            c64(-0.5, 0.0),
            c64(0.0, -0.5),
        ];
        let combined = run_protocol(&cfg, RunMode::Closed).unwrap();
        let combined_final = combined.trajectory.final_pure().unwrap().clone();

        let mut superposed = CVector::zeros(cfg.space().dim());
        for (k, amp) in cfg.input_amplitudes.iter().enumerate() {
            let mut basis_cfg = cfg.clone();
            basis_cfg.input_amplitudes = [c64(0.0, 0.0); 4];
            basis_cfg.input_amplitudes[k] = c64(1.0, 0.0);
            let outcome = run_protocol(&basis_cfg, RunMode::Closed).unwrap();
            superposed += outcome.trajectory.final_pure().unwrap() * *amp;
        }
        assert!((combined_final - superposed).norm() < 1e-9);
    }

    #[test]
    fn gate_magnitudes_and_leakage() {
        let cfg = fast_config();
        let gate = extract_gate(&cfg).unwrap();
        // the two shelved-and-relabeled inputs swap almost perfectly
        assert!(gate.matrix[(2, 1)].norm() > 0.99);
        assert!(gate.matrix[(1, 2)].norm() > 0.99);
        assert!(gate.matrix[(3, 3)].norm() > 0.9999);
        assert!(gate.leakage[1] < 0.02);
        assert!(gate.leakage[2] < 0.02);
        assert!(gate.leakage[3] < 1e-6);
        // the |00⟩ input is dragged out of the qubit sector by the
        // uncompensated step-3 drive on |0⟩
        assert!(gate.matrix[(0, 0)].norm() < 0.05);
        assert!(gate.leakage[0] > 0.9);
    }

    #[test]
    fn sign_flip_invariances() {
        // Flipping both legs of one step flips that step's laser part only.
        // Within each decoupled manifold this is a basis resigning, so the
        // gate is invariant up to the Zeno leakage left on excited states at
        // the step boundary, which re-enters the later steps with opposite
        // sign: the residual difference scales as (Ω_peak/2g)² ≈ 5e−4.
        let cfg = fast_config();
        let base = extract_gate(&cfg).unwrap();
        let mut flipped = cfg.clone();
        flipped.sign_config.steps[0] = (-1.0, -1.0);
        let other = extract_gate(&flipped).unwrap();
        assert!((base.gate_fidelity - other.gate_fidelity).abs() < 1e-4);
        for i in 0..4 {
            for j in 0..4 {
                assert!(
                    (base.matrix[(i, j)].norm() - other.matrix[(i, j)].norm()).abs() < 2e-4
                );
            }
        }
    }

    #[test]
    fn step3_leg_flip_changes_transfer_phase() {
        // flipping exactly one step-3 leg flips the sign delivered to |0⟩:
        // the two candidate gates differ by diag(1,−1,−1,1)
        let cfg = fast_config();
        let base = extract_gate(&cfg).unwrap();
        let mut flipped = cfg.clone();
        flipped.sign_config.steps[2] = (1.0, 1.0);
        let other = extract_gate(&flipped).unwrap();
        let mut phase = CMatrix::identity(4, 4);
        phase[(1, 1)] = c64(-1.0, 0.0);
        phase[(2, 2)] = c64(-1.0, 0.0);
        let diff = crate::linalg::max_abs(&(&phase * &other.matrix - &base.matrix));
        assert!(diff < 0.02, "gates differ by more than a 01/10 phase flip: {diff}");
    }

    #[test]
    fn sweep_is_deterministic_and_ordered() {
        // near-pure density matrices need the full default resolution to
        // stay positive through RK4
        let mut cfg = ProtocolConfig::default();
        cfg.sample_every = usize::MAX;
        let pts = sweep(&cfg, &[0.0, 0.5], &[0.0, 1.0]).unwrap();
        assert_eq!(pts.len(), 4);
        assert_eq!((pts[0].kappa, pts[0].gamma), (0.0, 0.0));
        assert_eq!((pts[1].kappa, pts[1].gamma), (0.0, 0.5));
        assert_eq!((pts[2].kappa, pts[2].gamma), (1.0, 0.0));
        assert_eq!((pts[3].kappa, pts[3].gamma), (1.0, 0.5));
        // the γ = κ = 0 entry is the closed-system fidelity
        let mut closed_cfg = cfg.clone();
        closed_cfg.sample_every = usize::MAX;
        let closed = run_protocol(&closed_cfg, RunMode::Closed).unwrap();
        assert!((pts[0].fidelity - closed.fidelity).abs() < 1e-6);
        for p in &pts {
            assert!(p.fidelity >= 0.0 && p.fidelity <= 1.0 + 1e-9);
        }
    }
}
