//! Zeno decomposition: H = H_obs + K·H_meas with strong cavity coupling as
//! the measurement part.
//!
//! In the strong-coupling limit the evolution operator factorizes over the
//! eigenprojections P_n of H_meas,
//!
//! ```text
//! U(t) = exp[−it Σ_n (K λ_n P_n + P_n H_obs P_n)]
//! ```
//!
//! so the weak laser drive acts only inside each eigenspace. The protocol
//! lives in the λ = 0 (dark) sector, where the cavity-mediated steps reduce
//! to the three-level system handled by [`crate::invariant`]. This module
//! computes the decomposition on the subspace reachable from a given input,
//! forms the projected Hamiltonians, and quantifies how well the full
//! dynamics tracks the dark-sector reduction at finite g.

use crate::dynamics::{build_step_hamiltonian, schrodinger_evolve, Step, StepHamiltonian};
use crate::error::{Error, Result};
use crate::hilbert::BasisState;
use crate::linalg::{c64, exp_hermitian, hermitian_eigen, max_abs, CMatrix, CVector, IM};
use crate::protocol::ProtocolConfig;

/// Eigenvalues and eigenprojections of the measurement Hamiltonian on a
/// reachable subspace, degenerate levels merged.
#[derive(Debug, Clone)]
pub struct ZenoDecomposition {
    /// Basis states spanning the subspace, in discovery order.
    pub subspace: Vec<BasisState>,
    /// Distinct eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// One projector per distinct eigenvalue, in subspace coordinates.
    pub projectors: Vec<CMatrix>,
    /// Tolerance used to merge degenerate eigenvalues.
    pub merge_tol: f64,
}

impl ZenoDecomposition {
    /// Projector for the eigenvalue closest to `value` within the merge
    /// tolerance.
    pub fn projector_for(&self, value: f64) -> Result<&CMatrix> {
        self.eigenvalues
            .iter()
            .position(|&ev| (ev - value).abs() <= self.merge_tol.max(1e-12))
            .map(|i| &self.projectors[i])
            .ok_or_else(|| Error::EigenvalueNotPresent {
                requested: value,
                available: self.eigenvalues.clone(),
            })
    }

    pub fn dim(&self) -> usize {
        self.subspace.len()
    }
}

/// Subspace reachable from `initial` under a step's Hamiltonian terms
/// (breadth-first closure over the structural support, ties broken by basis
/// index).
pub fn reachable_subspace(initial: &BasisState, h: &StepHamiltonian) -> Result<Vec<BasisState>> {
    let space = h.space;
    let dim = space.dim();
    let mut adj = vec![Vec::new(); dim];
    for (r, c) in h.structural_support() {
        adj[c].push(r);
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }

    let start = space.index(initial)?;
    let mut visited = vec![false; dim];
    let mut queue = std::collections::VecDeque::from([start]);
    visited[start] = true;
    let mut order = Vec::new();
    while let Some(i) = queue.pop_front() {
        order.push(space.state_at(i));
        for &j in &adj[i] {
            if !visited[j] {
                visited[j] = true;
                queue.push_back(j);
            }
        }
    }
    Ok(order)
}

/// Restrict a full-space operator to a subspace, as a k×k matrix in the
/// subspace's own coordinates.
pub fn restrict(op: &CMatrix, subspace: &[BasisState], space: &crate::hilbert::SpaceDescriptor) -> Result<CMatrix> {
    let k = subspace.len();
    let mut m = CMatrix::zeros(k, k);
    for (j, sj) in subspace.iter().enumerate() {
        let cj = space.index(sj)?;
        for (i, si) in subspace.iter().enumerate() {
            let ri = space.index(si)?;
            m[(i, j)] = op[(ri, cj)];
        }
    }
    Ok(m)
}

/// Diagonalize the measurement Hamiltonian on a subspace and merge
/// degenerate eigenvalues into joint projectors.
pub fn zeno_decompose(
    h_meas: &CMatrix,
    subspace: &[BasisState],
    space: &crate::hilbert::SpaceDescriptor,
    merge_tol: f64,
) -> Result<ZenoDecomposition> {
    let m = restrict(h_meas, subspace, space)?;
    let herm = crate::linalg::hermiticity_error(&m);
    if herm > 1e-10 {
        return Err(Error::NotHermitian { deviation: herm });
    }
    let (values, vectors) = hermitian_eigen(&m);
    let k = subspace.len();
    let mut eigenvalues = Vec::new();
    let mut projectors: Vec<CMatrix> = Vec::new();
    let mut members: Vec<usize> = Vec::new();
    for i in 0..k {
        if eigenvalues.last().is_some_and(|&last: &f64| (values[i] - last).abs() <= merge_tol) {
            members.push(i);
        } else {
            if !members.is_empty() {
                projectors.push(projector_from(&vectors, &members));
            }
            eigenvalues.push(values[i]);
            members = vec![i];
        }
    }
    projectors.push(projector_from(&vectors, &members));
    Ok(ZenoDecomposition { subspace: subspace.to_vec(), eigenvalues, projectors, merge_tol })
}

fn projector_from(vectors: &CMatrix, members: &[usize]) -> CMatrix {
    let k = vectors.nrows();
    let mut p = CMatrix::zeros(k, k);
    for &i in members {
        let v = vectors.column(i);
        p += &v * v.adjoint();
    }
    p
}

/// The projection P H_obs P restricted to one eigenvalue sector, with an
/// explicit orthonormal basis of that sector.
#[derive(Debug, Clone)]
pub struct EffectiveHamiltonian {
    pub eigenvalue: f64,
    /// Orthonormal sector basis in subspace coordinates (columns).
    pub basis: Vec<CVector>,
    pub subspace: Vec<BasisState>,
}

impl EffectiveHamiltonian {
    /// Build the sector basis by projecting the subspace basis states and
    /// orthonormalizing in subspace order (deterministic).
    pub fn new(decomp: &ZenoDecomposition, eigenvalue: f64) -> Result<Self> {
        let p = decomp.projector_for(eigenvalue)?;
        let k = decomp.dim();
        let mut basis: Vec<CVector> = Vec::new();
        for i in 0..k {
            let mut seed = CVector::zeros(k);
            seed[i] = c64(1.0, 0.0);
            let mut v = p * seed;
            for b in &basis {
                let overlap = b.dotc(&v);
                v -= b * overlap;
            }
            let norm = v.norm();
            if norm > 1e-9 {
                basis.push(v / c64(norm, 0.0));
            }
        }
        Ok(Self { eigenvalue, basis, subspace: decomp.subspace.clone() })
    }

    pub fn sector_dim(&self) -> usize {
        self.basis.len()
    }

    /// Sector matrix of a subspace-restricted observable (k×k in, d×d out
    /// with d the sector dimension).
    pub fn project(&self, h_restricted: &CMatrix) -> CMatrix {
        let d = self.basis.len();
        let mut m = CMatrix::zeros(d, d);
        for (j, bj) in self.basis.iter().enumerate() {
            let applied = h_restricted * bj;
            for (i, bi) in self.basis.iter().enumerate() {
                m[(i, j)] = bi.dotc(&applied);
            }
        }
        m
    }

    /// Sector matrix of a step's laser part at time `t`.
    pub fn matrix_at(
        &self,
        step: &StepHamiltonian,
        t: f64,
    ) -> Result<CMatrix> {
        let h_l = restrict(&step.laser_matrix(t), &self.subspace, &step.space)?;
        Ok(self.project(&h_l))
    }

    /// Embed sector coordinates back into the full space.
    pub fn embed(
        &self,
        coords: &CVector,
        space: &crate::hilbert::SpaceDescriptor,
    ) -> Result<CVector> {
        let mut sub = CVector::zeros(self.subspace.len());
        for (b, &c) in self.basis.iter().zip(coords.iter()) {
            sub += b * c;
        }
        let mut full = CVector::zeros(space.dim());
        for (i, s) in self.subspace.iter().enumerate() {
            full[space.index(s)?] = sub[i];
        }
        Ok(full)
    }

    /// Sector coordinates of a full-space state.
    pub fn coords_of(
        &self,
        full: &CVector,
        space: &crate::hilbert::SpaceDescriptor,
    ) -> Result<CVector> {
        let mut sub = CVector::zeros(self.subspace.len());
        for (i, s) in self.subspace.iter().enumerate() {
            sub[i] = full[space.index(s)?];
        }
        Ok(CVector::from_iterator(self.basis.len(), self.basis.iter().map(|b| b.dotc(&sub))))
    }
}

/// Merge tolerance for Zeno eigenvalues: spectra here are exact multiples
/// of g, so 1e−9·g separates them safely from floating-point degeneracy.
pub fn merge_tolerance(g: f64) -> f64 {
    1e-9 * g
}

/// ‖ψ_full(t_f) − ψ_eff(t_f)‖: the full step propagation against the
/// dark-sector effective propagation embedded in the full space. Closed
/// system; measures the finite-g validity of the Zeno reduction.
pub fn zeno_error(config: &ProtocolConfig, step: Step, initial: &BasisState) -> Result<f64> {
    let h = build_step_hamiltonian(step, config)?;
    let space = config.space();
    let steps = (config.t_f / config.dt).round() as usize;

    let psi0 = space.basis_vector(initial)?;
    let full_traj =
        schrodinger_evolve(&h, &psi0, (0.0, config.t_f), config.dt, usize::MAX, 0.0)?;
    let psi_full = full_traj.final_pure().unwrap();

    let subspace = reachable_subspace(initial, &h)?;
    let decomp = zeno_decompose(&h.cavity_matrix(), &subspace, &space, merge_tolerance(config.g))?;
    let eff = EffectiveHamiltonian::new(&decomp, 0.0)?;
    let coords0 = eff.coords_of(&psi0, &space)?;
    let h_sector = |t: f64| eff.matrix_at(&h, t).unwrap();
    let coords_f = crate::linalg::rk4_schrodinger(h_sector, &coords0, 0.0, config.t_f, steps);
    let psi_eff = eff.embed(&coords_f, &space)?;
    Ok((psi_full - psi_eff).norm())
}

/// Largest population outside the dark sector along one full-step
/// propagation (the finite-g leakage the strong-coupling limit suppresses).
pub fn dark_leakage(config: &ProtocolConfig, step: Step, initial: &BasisState) -> Result<f64> {
    let h = build_step_hamiltonian(step, config)?;
    let space = config.space();
    let psi0 = space.basis_vector(initial)?;
    let traj = schrodinger_evolve(&h, &psi0, (0.0, config.t_f), config.dt, 10, 0.0)?;
    let subspace = reachable_subspace(initial, &h)?;
    let decomp = zeno_decompose(&h.cavity_matrix(), &subspace, &space, merge_tolerance(config.g))?;
    let eff = EffectiveHamiltonian::new(&decomp, 0.0)?;
    let states = match &traj.states {
        crate::dynamics::StateSeries::Pure(v) => v,
        _ => unreachable!(),
    };
    let mut worst = 0.0f64;
    for psi in states {
        let coords = eff.coords_of(psi, &space)?;
        let leak = (psi.norm_squared() - coords.norm_squared()).max(0.0);
        worst = worst.max(leak);
    }
    Ok(worst)
}

/// Compare the dark-sector block of the piecewise-constant evolution
/// operator `exp[−i dt Σ_n (λ_n P_n + P_n H_obs(t) P_n)]` with time-ordered
/// evolution under the projected effective Hamiltonian. Returns the largest
/// entry of the difference.
pub fn eq5_dark_consistency(
    config: &ProtocolConfig,
    step: Step,
    initial: &BasisState,
    slices: usize,
) -> Result<f64> {
    let h = build_step_hamiltonian(step, config)?;
    let space = config.space();
    let subspace = reachable_subspace(initial, &h)?;
    let decomp = zeno_decompose(&h.cavity_matrix(), &subspace, &space, merge_tolerance(config.g))?;
    let eff = EffectiveHamiltonian::new(&decomp, 0.0)?;
    let k = decomp.dim();
    let d = eff.sector_dim();
    let dt = config.t_f / slices as f64;

    let mut u_zeno = CMatrix::identity(k, k);
    let mut u_eff = CMatrix::identity(d, d);
    for s in 0..slices {
        let t = (s as f64 + 0.5) * dt;
        let h_l = restrict(&h.laser_matrix(t), &subspace, &space)?;
        let mut gen = CMatrix::zeros(k, k);
        for (ev, p) in decomp.eigenvalues.iter().zip(&decomp.projectors) {
            gen += p * c64(*ev, 0.0) + p * &h_l * p;
        }
        u_zeno = exp_hermitian(&gen, -IM * dt) * u_zeno;
        u_eff = exp_hermitian(&eff.project(&h_l), -IM * dt) * u_eff;
    }

    // dark block of the Zeno propagator vs the effective propagator
    let mut dark_block = CMatrix::zeros(d, d);
    for (j, bj) in eff.basis.iter().enumerate() {
        let applied = &u_zeno * bj;
        for (i, bi) in eff.basis.iter().enumerate() {
            dark_block[(i, j)] = bi.dotc(&applied);
        }
    }
    Ok(max_abs(&(dark_block - u_eff)))
}
