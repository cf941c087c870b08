//! Composite Hilbert space of two five-level atoms and a truncated cavity mode.
//!
//! Each atom carries three ground levels |0⟩, |1⟩, |a⟩ and two excited levels
//! |e⟩, |u⟩. The cavity is a single mode truncated at `n_max` photons. Basis
//! ordering is row-major with atom A slowest:
//!
//! ```text
//! index = (5·levelA + levelB)·(n_max + 1) + photons
//! ```
//!
//! with levels ordered (0, 1, a, e, u). The ordering is part of the output
//! contract (CSV columns and gate matrices are reproducible bit-for-bit), so
//! it must not change.

use crate::error::{Error, Result};
use crate::linalg::{c64, CMatrix, CVector};

/// One atomic level. `G0`, `G1`, `Ga` are ground; `E`, `U` are excited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AtomLevel {
    G0,
    G1,
    Ga,
    E,
    U,
}

impl AtomLevel {
    pub const ALL: [AtomLevel; 5] = [
        AtomLevel::G0,
        AtomLevel::G1,
        AtomLevel::Ga,
        AtomLevel::E,
        AtomLevel::U,
    ];

    /// Position in the fixed level ordering (0, 1, a, e, u).
    #[inline]
    pub fn index(self) -> usize {
        match self {
            AtomLevel::G0 => 0,
            AtomLevel::G1 => 1,
            AtomLevel::Ga => 2,
            AtomLevel::E => 3,
            AtomLevel::U => 4,
        }
    }

    pub fn from_index(i: usize) -> Option<AtomLevel> {
        AtomLevel::ALL.get(i).copied()
    }

    pub fn is_ground(self) -> bool {
        matches!(self, AtomLevel::G0 | AtomLevel::G1 | AtomLevel::Ga)
    }

    pub fn is_excited(self) -> bool {
        !self.is_ground()
    }

    pub fn label(self) -> &'static str {
        match self {
            AtomLevel::G0 => "0",
            AtomLevel::G1 => "1",
            AtomLevel::Ga => "a",
            AtomLevel::E => "e",
            AtomLevel::U => "u",
        }
    }
}

/// Which atom an operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Atom {
    A,
    B,
}

/// A product basis element |levelA, levelB⟩ ⊗ |photons⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisState {
    pub level_a: AtomLevel,
    pub level_b: AtomLevel,
    pub photons: usize,
}

impl BasisState {
    pub fn new(level_a: AtomLevel, level_b: AtomLevel, photons: usize) -> Self {
        Self { level_a, level_b, photons }
    }

    /// Level of the given atom.
    pub fn level(&self, atom: Atom) -> AtomLevel {
        match atom {
            Atom::A => self.level_a,
            Atom::B => self.level_b,
        }
    }

    /// Copy with the given atom's level replaced.
    pub fn with_level(&self, atom: Atom, level: AtomLevel) -> BasisState {
        let mut s = *self;
        match atom {
            Atom::A => s.level_a = level,
            Atom::B => s.level_b = level,
        }
        s
    }

    /// Label like `01,0` (atom A, atom B, photon number).
    pub fn label(&self) -> String {
        format!("{}{},{}", self.level_a.label(), self.level_b.label(), self.photons)
    }
}

/// Dimensions of the composite space for a given Fock truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceDescriptor {
    pub n_max: usize,
}

impl SpaceDescriptor {
    pub fn new(n_max: usize) -> Self {
        Self { n_max }
    }

    /// Total dimension, 25·(n_max + 1).
    #[inline]
    pub fn dim(&self) -> usize {
        25 * (self.n_max + 1)
    }

    /// Flat index of a basis state. Errors if the photon number exceeds the
    /// truncation.
    pub fn index(&self, s: &BasisState) -> Result<usize> {
        if s.photons > self.n_max {
            return Err(Error::Truncation { photons: s.photons, n_max: self.n_max });
        }
        Ok((5 * s.level_a.index() + s.level_b.index()) * (self.n_max + 1) + s.photons)
    }

    /// Basis state at a flat index. Panics if out of range.
    pub fn state_at(&self, index: usize) -> BasisState {
        assert!(index < self.dim(), "basis index {index} out of range");
        let per = self.n_max + 1;
        let photons = index % per;
        let atoms = index / per;
        BasisState {
            level_a: AtomLevel::from_index(atoms / 5).unwrap(),
            level_b: AtomLevel::from_index(atoms % 5).unwrap(),
            photons,
        }
    }

    /// Iterator over the full basis in index order.
    pub fn states(&self) -> impl Iterator<Item = BasisState> + '_ {
        (0..self.dim()).map(|i| self.state_at(i))
    }

    /// Unit vector for a basis state.
    pub fn basis_vector(&self, s: &BasisState) -> Result<CVector> {
        let mut v = CVector::zeros(self.dim());
        v[self.index(s)?] = c64(1.0, 0.0);
        Ok(v)
    }
}

/// Convenience wrapper for [`SpaceDescriptor::index`].
pub fn basis_index(s: &BasisState, d: &SpaceDescriptor) -> Result<usize> {
    d.index(s)
}

/// Atomic transition operator σ_{l,k} = |l⟩⟨k| on one atom, identity on the
/// other atom and on the cavity.
pub fn atomic_operator(atom: Atom, l: AtomLevel, k: AtomLevel, d: &SpaceDescriptor) -> CMatrix {
    let dim = d.dim();
    let mut m = CMatrix::zeros(dim, dim);
    for other in AtomLevel::ALL {
        for n in 0..=d.n_max {
            let (from, to) = match atom {
                Atom::A => (
                    BasisState::new(k, other, n),
                    BasisState::new(l, other, n),
                ),
                Atom::B => (
                    BasisState::new(other, k, n),
                    BasisState::new(other, l, n),
                ),
            };
            m[(d.index(&to).unwrap(), d.index(&from).unwrap())] = c64(1.0, 0.0);
        }
    }
    m
}

/// Cavity annihilation operator, a|n⟩ = √n |n-1⟩, identity on the atoms.
pub fn annihilation(d: &SpaceDescriptor) -> CMatrix {
    let dim = d.dim();
    let mut m = CMatrix::zeros(dim, dim);
    for a in AtomLevel::ALL {
        for b in AtomLevel::ALL {
            for n in 1..=d.n_max {
                let from = BasisState::new(a, b, n);
                let to = BasisState::new(a, b, n - 1);
                m[(d.index(&to).unwrap(), d.index(&from).unwrap())] = c64((n as f64).sqrt(), 0.0);
            }
        }
    }
    m
}

/// Photon number operator a†a.
pub fn number_operator(d: &SpaceDescriptor) -> CMatrix {
    let a = annihilation(d);
    a.adjoint() * a
}
