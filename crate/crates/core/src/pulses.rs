//! Invariant-based inverse engineering of the laser pulses.
//!
//! The effective three-level dynamics is parametrized by two auxiliary
//! angles ν(t), β(t). Their equations of motion,
//!
//! ```text
//! ν̇ = (1/√2)(Ω_init cos β − Ω_targ sin β)
//! β̇ = (1/√2) tan ν (Ω_targ cos β + Ω_init sin β)
//! ```
//!
//! invert to
//!
//! ```text
//! Ω_init = √2 (β̇ cot ν sin β + ν̇ cos β)
//! Ω_targ = √2 (β̇ cot ν cos β − ν̇ sin β)
//! ```
//!
//! The protocol choice ν ≡ ε, β = πt/(2t_f) turns these into the sin/cos
//! pulse pair used by every step, with the Lewis–Riesenfeld phases of the
//! two bright invariant modes accumulating to ±π/(2 sin ε) at t = t_f.

use crate::error::{Error, Result};
use crate::invariant;
use crate::linalg::{c64, CVector};
use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

/// Time course of the auxiliary angles ν and β with analytic derivatives.
pub trait AngleSchedule {
    fn nu(&self, t: f64) -> f64;
    fn beta(&self, t: f64) -> f64;
    fn nu_dot(&self, t: f64) -> f64;
    fn beta_dot(&self, t: f64) -> f64;
}

/// The protocol parametrization: ν(t) = ε, β(t) = πt/(2t_f).
#[derive(Debug, Clone, Copy)]
pub struct ProtocolAngles {
    pub epsilon: f64,
    pub t_f: f64,
}

impl ProtocolAngles {
    pub fn new(epsilon: f64, t_f: f64) -> Self {
        Self { epsilon, t_f }
    }
}

impl AngleSchedule for ProtocolAngles {
    fn nu(&self, _t: f64) -> f64 {
        self.epsilon
    }

    fn beta(&self, t: f64) -> f64 {
        PI * t / (2.0 * self.t_f)
    }

    fn nu_dot(&self, _t: f64) -> f64 {
        0.0
    }

    fn beta_dot(&self, _t: f64) -> f64 {
        PI / (2.0 * self.t_f)
    }
}

/// The sin/cos pulse pair driving one protocol step.
///
/// `omega_initial_leg` (∝ sin) couples the transition on the state being
/// emptied; `omega_target_leg` (∝ cos) couples the transition on the state
/// being filled. The ±1 sign factors are laser phases, free in hardware and
/// calibrated by the protocol layer.
#[derive(Debug, Clone, Copy)]
pub struct PulseSchedule {
    /// Common peak amplitude of both legs (units of g₀).
    pub amplitude: f64,
    /// Step duration (units of 1/g₀).
    pub t_f: f64,
    pub sign_initial: f64,
    pub sign_target: f64,
}

impl PulseSchedule {
    /// Pulse on the initial-state leg, `A sin(πt/2t_f)` (unsigned).
    #[inline]
    pub fn omega_initial_leg(&self, t: f64) -> f64 {
        self.amplitude * (PI * t / (2.0 * self.t_f)).sin()
    }

    /// Pulse on the target-state leg, `A cos(πt/2t_f)` (unsigned).
    #[inline]
    pub fn omega_target_leg(&self, t: f64) -> f64 {
        self.amplitude * (PI * t / (2.0 * self.t_f)).cos()
    }

    /// Initial-leg pulse including its laser-phase sign.
    #[inline]
    pub fn signed_initial(&self, t: f64) -> f64 {
        self.sign_initial * self.omega_initial_leg(t)
    }

    /// Target-leg pulse including its laser-phase sign.
    #[inline]
    pub fn signed_target(&self, t: f64) -> f64 {
        self.sign_target * self.omega_target_leg(t)
    }

    /// Copy with rescaled amplitude.
    pub fn scaled(&self, factor: f64) -> PulseSchedule {
        PulseSchedule { amplitude: self.amplitude * factor, ..*self }
    }

    /// Copy with the given laser-phase signs.
    pub fn with_signs(&self, sign_initial: f64, sign_target: f64) -> PulseSchedule {
        PulseSchedule { sign_initial, sign_target, ..*self }
    }
}

/// Accumulated Lewis–Riesenfeld phases of the two bright invariant modes.
#[derive(Debug, Clone, Copy)]
pub struct PhaseRecord {
    pub alpha_plus: f64,
    pub alpha_minus: f64,
}

impl PhaseRecord {
    /// |α±|, the transfer-completeness phase.
    pub fn magnitude(&self) -> f64 {
        self.alpha_plus.abs()
    }
}

/// Protocol pulse pair for a step of duration `t_f`.
///
/// The peak amplitude is `amplitude_factor · (π/t_f) · cot ε`. A factor of
/// 1/√2 gives the pair driving the Zeno-reduced steps (whose effective
/// couplings carry an extra 1/√2 from the dark-state projection); 1/2 gives
/// the exact inverse-engineered pair for a directly driven Λ system.
pub fn protocol_pulses(epsilon: f64, t_f: f64, amplitude_factor: f64) -> Result<PulseSchedule> {
    if !(epsilon > 0.0 && epsilon < FRAC_PI_2) {
        return Err(Error::SingularAngle { nu: epsilon });
    }
    if t_f <= 0.0 {
        return Err(Error::InvalidConfig(format!("t_f must be positive, got {t_f}")));
    }
    Ok(PulseSchedule {
        amplitude: amplitude_factor * PI / (t_f * epsilon.tan()),
        t_f,
        sign_initial: 1.0,
        sign_target: 1.0,
    })
}

/// Pulse values at time `t` for the given angle schedule.
///
/// Errors when sin ν is too small for cot ν to be meaningful.
pub fn inverse_engineer(angles: &dyn AngleSchedule, t: f64) -> Result<(f64, f64)> {
    let nu = angles.nu(t);
    if nu.sin().abs() < 1e-12 {
        return Err(Error::SingularAngle { nu });
    }
    let beta = angles.beta(t);
    let cot_nu = nu.cos() / nu.sin();
    let (nu_dot, beta_dot) = (angles.nu_dot(t), angles.beta_dot(t));
    let omega_init = SQRT_2 * (beta_dot * cot_nu * beta.sin() + nu_dot * beta.cos());
    let omega_targ = SQRT_2 * (beta_dot * cot_nu * beta.cos() - nu_dot * beta.sin());
    Ok((omega_init, omega_targ))
}

/// Residuals of the auxiliary-angle equations for an (angles, pulses) pair.
///
/// Both residuals vanish identically when the pulses are the inverse of the
/// angle schedule. Signs are not applied: the residual checks the unsigned
/// pulse family against the angles.
pub fn angle_ode_residual(
    angles: &dyn AngleSchedule,
    pulses: &PulseSchedule,
    t: f64,
) -> (f64, f64) {
    let nu = angles.nu(t);
    let beta = angles.beta(t);
    let omega_init = pulses.omega_initial_leg(t);
    let omega_targ = pulses.omega_target_leg(t);
    let r_nu = angles.nu_dot(t) - (omega_init * beta.cos() - omega_targ * beta.sin()) / SQRT_2;
    let r_beta = angles.beta_dot(t)
        - nu.tan() * (omega_targ * beta.cos() + omega_init * beta.sin()) / SQRT_2;
    (r_nu, r_beta)
}

/// Closed-form Lewis–Riesenfeld phases for the protocol schedule,
/// |α±| = π/(2 sin ε).
pub fn lr_phase(epsilon: f64) -> Result<PhaseRecord> {
    if !(epsilon > 0.0 && epsilon <= FRAC_PI_2) {
        return Err(Error::SingularAngle { nu: epsilon });
    }
    let alpha = PI / (2.0 * epsilon.sin());
    Ok(PhaseRecord { alpha_plus: alpha, alpha_minus: -alpha })
}

/// Lewis–Riesenfeld phases by quadrature of ⟨Φ±| i∂_t − H |Φ±⟩ along the
/// protocol schedule, using the analytic eigenstates and the effective
/// three-level Hamiltonian. Returned in the order (α₀, α for Φ₊, α for Φ₋).
///
/// The quadrature fixes which labelled eigenstate carries which sign; the
/// closed form in [`lr_phase`] records only the ± pair.
pub fn lr_phase_quadrature(epsilon: f64, t_f: f64, samples: usize) -> Result<[f64; 3]> {
    let angles = ProtocolAngles::new(epsilon, t_f);
    let pulses = protocol_pulses(epsilon, t_f, 1.0 / SQRT_2)?;
    let n = samples.max(3) | 1; // odd count for Simpson
    let h = t_f / (n - 1) as f64;
    let mut out = [0.0; 3];
    for (mode, slot) in [(invariant::Mode::Zero, 0), (invariant::Mode::Plus, 1), (invariant::Mode::Minus, 2)]
    {
        let integrand = |t: f64| -> f64 {
            let nu = angles.nu(t);
            let beta = angles.beta(t);
            let state = invariant::invariant_eigenstate(mode, nu, beta);
            let deriv = invariant::eigenstate_time_derivative(
                mode,
                nu,
                beta,
                angles.nu_dot(t),
                angles.beta_dot(t),
            );
            let h_eff = invariant::effective_three_level(
                pulses.omega_initial_leg(t),
                pulses.omega_target_leg(t),
            );
            let hs: CVector = &h_eff * &state;
            (state.dotc(&(deriv.map(|z| z * c64(0.0, 1.0)))) - state.dotc(&hs)).re
        };
        // composite Simpson
        let mut acc = integrand(0.0) + integrand(t_f);
        for k in 1..n - 1 {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * integrand(k as f64 * h);
        }
        out[slot] = acc * h / 3.0;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const EPS: f64 = 0.25;
    const TF: f64 = 20.0;

    #[test]
    fn protocol_peak_amplitude() {
        let p = protocol_pulses(EPS, TF, 1.0 / SQRT_2).unwrap();
        assert_abs_diff_eq!(p.amplitude, 0.434_993_49, epsilon = 1e-8);
        assert_abs_diff_eq!(p.omega_initial_leg(0.0), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.omega_target_leg(TF), 0.0, epsilon = 1e-12);
        // both legs meet at peak/√2 at mid-step
        assert_abs_diff_eq!(p.omega_initial_leg(TF / 2.0), 0.307_586_8, epsilon = 1e-6);
        assert_abs_diff_eq!(
            p.omega_initial_leg(TF / 2.0),
            p.omega_target_leg(TF / 2.0),
            epsilon = 1e-12
        );
    }

    #[test]
    fn exact_lambda_amplitude() {
        let p = protocol_pulses(EPS, TF, 0.5).unwrap();
        assert_abs_diff_eq!(p.amplitude, PI / (2.0 * TF * EPS.tan()), epsilon = 1e-15);
    }

    #[test]
    fn epsilon_zero_is_rejected() {
        assert!(protocol_pulses(0.0, TF, 0.5).is_err());
    }

    #[test]
    fn inverse_engineer_matches_protocol_pulses() {
        let angles = ProtocolAngles::new(EPS, TF);
        let p = protocol_pulses(EPS, TF, 1.0 / SQRT_2).unwrap();
        for t in [0.0, TF / 3.0, TF / 2.0, 0.9 * TF, TF] {
            let (oi, ot) = inverse_engineer(&angles, t).unwrap();
            assert_abs_diff_eq!(oi, p.omega_initial_leg(t), epsilon = 1e-13);
            assert_abs_diff_eq!(ot, p.omega_target_leg(t), epsilon = 1e-13);
        }
        // endpoint values
        let (oi, ot) = inverse_engineer(&angles, TF).unwrap();
        assert_abs_diff_eq!(oi, 0.435_00, epsilon = 1e-5);
        assert_abs_diff_eq!(ot, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn static_angles_need_no_drive() {
        struct Static;
        impl AngleSchedule for Static {
            fn nu(&self, _: f64) -> f64 {
                0.4
            }
            fn beta(&self, _: f64) -> f64 {
                0.7
            }
            fn nu_dot(&self, _: f64) -> f64 {
                0.0
            }
            fn beta_dot(&self, _: f64) -> f64 {
                0.0
            }
        }
        let (oi, ot) = inverse_engineer(&Static, 1.0).unwrap();
        assert_abs_diff_eq!(oi, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ot, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn ode_residual_vanishes_for_consistent_pair() {
        let angles = ProtocolAngles::new(EPS, TF);
        let p = protocol_pulses(EPS, TF, 1.0 / SQRT_2).unwrap();
        for t in [0.0, TF / 3.0, TF] {
            let (r_nu, r_beta) = angle_ode_residual(&angles, &p, t);
            assert_abs_diff_eq!(r_nu, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(r_beta, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn ode_residual_scales_linearly() {
        let angles = ProtocolAngles::new(EPS, TF);
        let p = protocol_pulses(EPS, TF, 1.0 / SQRT_2).unwrap();
        let beta_dot = PI / (2.0 * TF);
        // doubling the pulses doubles the drive: r_beta = β̇ − 2β̇ = −β̇
        let (_, r_beta) = angle_ode_residual(&angles, &p.scaled(2.0), TF / 4.0);
        assert_abs_diff_eq!(r_beta, -beta_dot, epsilon = 1e-12);
        // no pulses: nothing drives β
        let (r_nu, r_beta) = angle_ode_residual(&angles, &p.scaled(0.0), TF / 4.0);
        assert_abs_diff_eq!(r_nu, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r_beta, beta_dot, epsilon = 1e-12);
    }

    #[test]
    fn lr_phase_values() {
        // sin ε = 1/4 makes α = 2π exactly
        let rec = lr_phase(0.25f64.asin()).unwrap();
        assert_abs_diff_eq!(rec.alpha_plus, 2.0 * PI, epsilon = 1e-12);
        assert_abs_diff_eq!(rec.alpha_plus + rec.alpha_minus, 0.0, epsilon = 1e-15);

        let rec = lr_phase(0.25).unwrap();
        assert_abs_diff_eq!(rec.magnitude(), 6.349_115_56, epsilon = 1e-8);

        let rec = lr_phase(FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(rec.alpha_plus, FRAC_PI_2, epsilon = 1e-15);
    }

    #[test]
    fn lr_phase_quadrature_agrees_with_closed_form() {
        let closed = lr_phase(EPS).unwrap();
        let quad = lr_phase_quadrature(EPS, TF, 2001).unwrap();
        assert_abs_diff_eq!(quad[0], 0.0, epsilon = 1e-9);
        // the quadrature resolves the sign attached to each labelled mode:
        // Φ₊ (the +χ/√2 eigenstate) accumulates the negative phase
        assert_abs_diff_eq!(quad[1], closed.alpha_minus, epsilon = 1e-6);
        assert_abs_diff_eq!(quad[2], closed.alpha_plus, epsilon = 1e-6);
        let mut quad_pair = [quad[1], quad[2]];
        quad_pair.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(quad_pair[0], closed.alpha_minus, epsilon = 1e-6);
        assert_abs_diff_eq!(quad_pair[1], closed.alpha_plus, epsilon = 1e-6);
    }
}
