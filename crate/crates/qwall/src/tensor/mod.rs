//! Dense complex linear algebra on ℋ_l ⊗ ℋ_w ⊗ ℋ_e.
//!
//! The leftmost factor is always the logical subsystem, then the wall, then
//! the environment. Row-major composite index: `(a * n_w + b) * n_e + c`.

mod basis;
mod decompose;
mod ops;
mod spin;
mod state;

pub use basis::{gellmann_basis, HermitianBasis, TripartiteBasis};
pub use decompose::{decompose_hamiltonian, extract_terms, CoeffTensor, HamiltonianTerms};
pub use ops::{
    anti_hermitian_residual, commutator, eigh, embed_wall, expm_anti_hermitian, frobenius, hermitian_residual, identity, kron3, propagator,
    trace_product, HermitianOp,
};
pub use spin::{spin32_ops, spin_ops, Axis};
pub use state::{haar_random_pure, haar_random_state, partial_trace, purity, random_unitary, thermal_state, DensityMatrix};

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Factor dimensions `(n_l, n_w, n_e)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct TripartiteDims {
    pub n_l: usize,
    pub n_w: usize,
    pub n_e: usize,
}

impl TripartiteDims {
    pub fn new(n_l: usize, n_w: usize, n_e: usize) -> Result<Self> {
        if n_l == 0 || n_w == 0 || n_e == 0 {
            return Err(Error::InvalidDimension(format!("factor dimensions must be positive, got ({n_l}, {n_w}, {n_e})")));
        }
        Ok(Self { n_l, n_w, n_e })
    }

    pub fn total(&self) -> usize {
        self.n_l * self.n_w * self.n_e
    }

    /// Dimension of the controllable block ℋ_l ⊗ ℋ_w.
    pub fn system(&self) -> usize {
        self.n_l * self.n_w
    }

    pub fn factor(&self, s: Subsystem) -> usize {
        match s {
            Subsystem::Logical => self.n_l,
            Subsystem::Wall => self.n_w,
            Subsystem::Env => self.n_e,
        }
    }

    pub fn check(&self, m: &CMat) -> Result<()> {
        let n = self.total();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::Shape { expected: n, got: m.nrows().max(m.ncols()) });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subsystem {
    Logical,
    Wall,
    Env,
}
