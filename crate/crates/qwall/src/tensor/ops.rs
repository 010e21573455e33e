use super::{c, CMat, TripartiteDims, C64};
use crate::error::{Error, Result};
use nalgebra::DVector;
use std::ops::Deref;

/// Hermitian operator, symmetrized on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOp(CMat);

impl HermitianOp {
    pub const TOL: f64 = 1e-12;

    /// Accepts `m` when `max|m − m†| < 1e-12 · max(1, max|m|)` and stores `(m + m†)/2`.
    pub fn new(m: CMat) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Shape { expected: m.nrows(), got: m.ncols() });
        }
        let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let r = hermitian_residual(&m);
        if r > Self::TOL * scale {
            return Err(Error::NotHermitian(r));
        }
        Ok(Self::symmetrized(m))
    }

    /// Symmetrizes without checking; for operators Hermitian by construction.
    pub fn symmetrized(m: CMat) -> Self {
        let h = (&m + m.adjoint()) * c(0.5, 0.0);
        Self(h)
    }

    pub fn zeros(n: usize) -> Self {
        Self(CMat::zeros(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_inner(self) -> CMat {
        self.0
    }
}

impl Deref for HermitianOp {
    type Target = CMat;
    fn deref(&self) -> &CMat {
        &self.0
    }
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn hermitian_residual(m: &CMat) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn anti_hermitian_residual(m: &CMat) -> f64 {
    (m + m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// tr(AB) without forming the product.
pub fn trace_product(a: &CMat, b: &CMat) -> C64 {
    let n = a.nrows();
    let mut s = C64::new(0.0, 0.0);
    for p in 0..n {
        for q in 0..n {
            s += a[(p, q)] * b[(q, p)];
        }
    }
    s
}

pub fn kron3(a: &CMat, b: &CMat, e: &CMat) -> CMat {
    a.kronecker(b).kronecker(e)
}

/// `𝟙_l ⊗ op ⊗ 𝟙_e`.
pub fn embed_wall(dims: TripartiteDims, op: &CMat) -> CMat {
    kron3(&identity(dims.n_l), op, &identity(dims.n_e))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(m: &CMat) -> (DVector<f64>, CMat) {
    let n = m.nrows();
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vecs = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// `V diag(f(λ)) V†`.
pub(crate) fn spectral_map(vals: &DVector<f64>, vecs: &CMat, f: impl Fn(f64) -> C64) -> CMat {
    let mut scaled = vecs.clone();
    for (j, &l) in vals.iter().enumerate() {
        let z = f(l);
        for v in scaled.column_mut(j).iter_mut() {
            *v *= z;
        }
    }
    scaled * vecs.adjoint()
}

/// `e^{−iHt}`.
pub fn propagator(h: &CMat, t: f64) -> CMat {
    let (vals, vecs) = eigh(h);
    spectral_map(&vals, &vecs, |l| C64::from_polar(1.0, -l * t))
}

/// `e^{Ωε}` for anti-Hermitian Ω, via the Hermitian generator `−iΩ`.
pub fn expm_anti_hermitian(omega: &CMat, eps: f64) -> CMat {
    let k = omega * c(0.0, -1.0);
    let k = (&k + k.adjoint()) * c(0.5, 0.0);
    let (vals, vecs) = eigh(&k);
    spectral_map(&vals, &vecs, |l| C64::from_polar(1.0, l * eps))
}
