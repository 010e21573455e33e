use super::{c, CMat};
use crate::error::{Error, Result};
use std::sync::Arc;

/// Orthonormal Hermitian basis `σ_0 = 𝟙/√n, σ_1, …, σ_{n²−1}` with `tr(σ_i σ_j) = δ_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianBasis {
    dim: usize,
    elems: Vec<CMat>,
}

impl HermitianBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn elems(&self) -> &[CMat] {
        &self.elems
    }

    pub fn get(&self, i: usize) -> &CMat {
        &self.elems[i]
    }

    /// The one-element basis `{[1]}` of a trivial factor.
    pub fn trivial() -> Self {
        Self { dim: 1, elems: vec![CMat::identity(1, 1)] }
    }

    /// Real coordinates `tr(σ_i A)` of a Hermitian `A`.
    pub fn coords(&self, a: &CMat) -> Vec<f64> {
        self.elems.iter().map(|s| super::trace_product(s, a).re).collect()
    }

    /// `Σ x_i σ_i`.
    pub fn combine(&self, x: &[f64]) -> CMat {
        let mut m = CMat::zeros(self.dim, self.dim);
        for (s, &xi) in self.elems.iter().zip(x) {
            if xi != 0.0 {
                m += s * c(xi, 0.0);
            }
        }
        m
    }
}

/// Generalized Gell-Mann basis.
///
/// Order: identity, symmetric `(|j⟩⟨k| + |k⟩⟨j|)/√2` for `j<k` lexicographic,
/// antisymmetric `−i(|j⟩⟨k| − |k⟩⟨j|)/√2` in the same order, then diagonal
/// `(Σ_{j<k}|j⟩⟨j| − k|k⟩⟨k|)/√(k(k+1))` for `k = 1..n−1`.
/// For `n = 2` this is `{𝟙, σ_x, σ_y, σ_z}/√2`.
pub fn gellmann_basis(n: usize) -> Result<HermitianBasis> {
    if n < 2 {
        return Err(Error::InvalidDimension(format!("Gell-Mann basis needs n >= 2, got {n}")));
    }
    let r2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut elems = Vec::with_capacity(n * n);
    elems.push(CMat::identity(n, n) * c(1.0 / (n as f64).sqrt(), 0.0));
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|j| (j + 1..n).map(move |k| (j, k))).collect();
    for &(j, k) in &pairs {
        let mut m = CMat::zeros(n, n);
        m[(j, k)] = c(r2, 0.0);
        m[(k, j)] = c(r2, 0.0);
        elems.push(m);
    }
    for &(j, k) in &pairs {
        let mut m = CMat::zeros(n, n);
        m[(j, k)] = c(0.0, -r2);
        m[(k, j)] = c(0.0, r2);
        elems.push(m);
    }
    for k in 1..n {
        let norm = 1.0 / ((k * (k + 1)) as f64).sqrt();
        let mut m = CMat::zeros(n, n);
        for j in 0..k {
            m[(j, j)] = c(norm, 0.0);
        }
        m[(k, k)] = c(-(k as f64) * norm, 0.0);
        elems.push(m);
    }
    Ok(HermitianBasis { dim: n, elems })
}

fn factor_basis(n: usize) -> Result<HermitianBasis> {
    if n == 1 {
        Ok(HermitianBasis::trivial())
    } else {
        gellmann_basis(n)
    }
}

/// Bases of the three factors; products `σ_i ⊗ σ_j ⊗ σ_k` form the basis of the full space.
#[derive(Debug, Clone, PartialEq)]
pub struct TripartiteBasis {
    pub l: HermitianBasis,
    pub w: HermitianBasis,
    pub e: HermitianBasis,
}

impl TripartiteBasis {
    pub fn gellmann(dims: super::TripartiteDims) -> Result<Arc<Self>> {
        Ok(Arc::new(Self { l: factor_basis(dims.n_l)?, w: factor_basis(dims.n_w)?, e: factor_basis(dims.n_e)? }))
    }

    pub fn dims(&self) -> super::TripartiteDims {
        super::TripartiteDims { n_l: self.l.dim(), n_w: self.w.dim(), n_e: self.e.dim() }
    }

    pub fn element(&self, i: usize, j: usize, k: usize) -> CMat {
        super::kron3(self.l.get(i), self.w.get(j), self.e.get(k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::trace_product;

    #[test]
    fn qubit_basis_is_scaled_pauli() {
        let b = gellmann_basis(2).unwrap();
        let r2 = std::f64::consts::FRAC_1_SQRT_2;
        assert!((b.get(1)[(0, 1)].re - r2).abs() < 1e-15);
        assert!((b.get(2)[(0, 1)].im + r2).abs() < 1e-15);
        assert!((b.get(3)[(1, 1)].re + r2).abs() < 1e-15);
    }

    #[test]
    fn orthonormal_up_to_five() {
        for n in 2..=5 {
            let b = gellmann_basis(n).unwrap();
            assert_eq!(b.len(), n * n);
            for i in 0..b.len() {
                if i > 0 {
                    assert!(b.get(i).trace().norm() < 1e-12);
                }
                for j in 0..b.len() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((trace_product(b.get(i), b.get(j)) - c(want, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn rejects_dimension_one() {
        assert!(gellmann_basis(1).is_err());
    }
}
