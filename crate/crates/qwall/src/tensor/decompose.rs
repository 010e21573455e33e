use super::{c, identity, CMat, HermitianBasis, HermitianOp, Subsystem, TripartiteBasis, TripartiteDims};
use crate::error::{Error, Result};
use std::sync::Arc;

/// Real coefficients `g_ijk = tr(σ_ijk H)` so that `H = Σ g_ijk σ_i ⊗ σ_j ⊗ σ_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTensor {
    basis: Arc<TripartiteBasis>,
    g: Vec<f64>,
}

impl CoeffTensor {
    pub fn from_raw(basis: Arc<TripartiteBasis>, g: Vec<f64>) -> Result<Self> {
        let want = basis.l.len() * basis.w.len() * basis.e.len();
        if g.len() != want {
            return Err(Error::Shape { expected: want, got: g.len() });
        }
        Ok(Self { basis, g })
    }

    pub fn dims(&self) -> TripartiteDims {
        self.basis.dims()
    }

    pub fn basis(&self) -> &Arc<TripartiteBasis> {
        &self.basis
    }

    /// Number of basis elements per factor, `(n_l², n_w², n_e²)`.
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.basis.l.len(), self.basis.w.len(), self.basis.e.len())
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        let (_, bw, be) = self.shape();
        self.g[(i * bw + j) * be + k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.g
    }

    fn norm_sq_where(&self, keep: impl Fn(usize, usize, usize) -> bool) -> f64 {
        let (bl, bw, be) = self.shape();
        let mut s = 0.0;
        for i in 0..bl {
            for j in 0..bw {
                for k in 0..be {
                    if keep(i, j, k) {
                        s += self.get(i, j, k).powi(2);
                    }
                }
            }
        }
        s
    }

    /// `‖Δ‖²_F`: all terms touching both the logical and the environment factor.
    pub fn delta_norm_sq(&self) -> f64 {
        self.norm_sq_where(|i, _, k| i > 0 && k > 0)
    }

    /// `‖H_lw‖²_F`.
    pub fn lw_norm_sq(&self) -> f64 {
        self.norm_sq_where(|i, j, k| i > 0 && j > 0 && k == 0)
    }

    /// Operator on ℋ_l ⊗ ℋ_w given by `Σ_{i,j} coeff(i, j) σ_i ⊗ σ_j` for a fixed environment index.
    pub(crate) fn lw_block(&self, k: usize, keep: impl Fn(usize, usize) -> bool) -> CMat {
        let (bl, bw, _) = self.shape();
        let n = self.basis.l.dim() * self.basis.w.dim();
        let mut m = CMat::zeros(n, n);
        for i in 0..bl {
            for j in 0..bw {
                let x = self.get(i, j, k);
                if x != 0.0 && keep(i, j) {
                    m += self.basis.l.get(i).kronecker(self.basis.w.get(j)) * c(x, 0.0);
                }
            }
        }
        m
    }

    fn assemble(&self, keep: impl Fn(usize, usize, usize) -> bool) -> CMat {
        let n = self.dims().total();
        let mut out = CMat::zeros(n, n);
        for k in 0..self.shape().2 {
            let block = self.lw_block(k, |i, j| keep(i, j, k));
            if block.iter().any(|z| z.norm() > 0.0) {
                out += block.kronecker(self.basis.e.get(k));
            }
        }
        out
    }

    /// Traceless single-factor part acting on `s` alone, as an operator on that factor:
    /// `Σ_k g_00k σ_k / √(n_l n_w)` for the environment and likewise for the others.
    pub fn local_part(&self, s: Subsystem) -> CMat {
        let d = self.dims();
        let (bl, bw, be) = self.shape();
        let (basis, coeffs, rest): (&HermitianBasis, Vec<f64>, usize) = match s {
            Subsystem::Logical => (&self.basis.l, (0..bl).map(|i| if i == 0 { 0.0 } else { self.get(i, 0, 0) }).collect(), d.n_w * d.n_e),
            Subsystem::Wall => (&self.basis.w, (0..bw).map(|j| if j == 0 { 0.0 } else { self.get(0, j, 0) }).collect(), d.n_l * d.n_e),
            Subsystem::Env => (&self.basis.e, (0..be).map(|k| if k == 0 { 0.0 } else { self.get(0, 0, k) }).collect(), d.n_l * d.n_w),
        };
        basis.combine(&coeffs) / c((rest as f64).sqrt(), 0.0)
    }

    pub fn reconstruct(&self) -> CMat {
        self.assemble(|_, _, _| true)
    }
}

/// Coefficients of `H` in the product basis.
pub fn decompose_hamiltonian(h: &HermitianOp, basis: &Arc<TripartiteBasis>) -> Result<CoeffTensor> {
    let dims = basis.dims();
    dims.check(h)?;
    let ns = dims.system();
    let ne = dims.n_e;
    let (bl, bw, be) = (basis.l.len(), basis.w.len(), basis.e.len());
    let lw: Vec<CMat> = (0..bl).flat_map(|i| (0..bw).map(move |j| (i, j))).map(|(i, j)| basis.l.get(i).kronecker(basis.w.get(j))).collect();
    let mut g = vec![0.0; bl * bw * be];
    for k in 0..be {
        let sk = basis.e.get(k);
        // T_k = tr_e((𝟙 ⊗ σ_k) H)
        let mut t = CMat::zeros(ns, ns);
        for s in 0..ns {
            for s2 in 0..ns {
                let mut acc = c(0.0, 0.0);
                for a in 0..ne {
                    for b in 0..ne {
                        let v = sk[(b, a)];
                        if v.re != 0.0 || v.im != 0.0 {
                            acc += v * h[(s * ne + a, s2 * ne + b)];
                        }
                    }
                }
                t[(s, s2)] = acc;
            }
        }
        for (ij, p) in lw.iter().enumerate() {
            g[ij * be + k] = super::trace_product(p, &t).re;
        }
    }
    CoeffTensor::from_raw(basis.clone(), g)
}

/// `H = offset·𝟙 + H_l + H_w + H_e + H_lw + H_we + Δ`, every operator on the full space.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianTerms {
    pub dims: TripartiteDims,
    pub offset: f64,
    pub h_l: CMat,
    pub h_w: CMat,
    pub h_e: CMat,
    pub h_lw: CMat,
    pub h_we: CMat,
    pub delta: CMat,
}

impl HamiltonianTerms {
    pub fn sum(&self) -> CMat {
        identity(self.dims.total()) * c(self.offset, 0.0) + &self.h_l + &self.h_w + &self.h_e + &self.h_lw + &self.h_we + &self.delta
    }
}

/// Partition the terms of `g` by which factors they act on.
pub fn extract_terms(g: &CoeffTensor) -> HamiltonianTerms {
    let dims = g.dims();
    let offset = g.get(0, 0, 0) / (dims.total() as f64).sqrt();
    HamiltonianTerms {
        dims,
        offset,
        h_l: g.assemble(|i, j, k| i > 0 && j == 0 && k == 0),
        h_w: g.assemble(|i, j, k| i == 0 && j > 0 && k == 0),
        h_e: g.assemble(|i, j, k| i == 0 && j == 0 && k > 0),
        h_lw: g.assemble(|i, j, k| i > 0 && j > 0 && k == 0),
        h_we: g.assemble(|i, j, k| i == 0 && j > 0 && k > 0),
        delta: g.assemble(|i, _, k| i > 0 && k > 0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{frobenius, random_unitary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64) -> HermitianOp {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_unitary(n, &mut rng);
        let d = CMat::from_fn(n, n, |i, j| if i == j { c(i as f64 - 1.3, 0.0) } else { c(0.0, 0.0) });
        HermitianOp::symmetrized(&u * d * u.adjoint())
    }

    #[test]
    fn identity_has_single_component() {
        let dims = TripartiteDims::new(2, 3, 2).unwrap();
        let b = TripartiteBasis::gellmann(dims).unwrap();
        let h = HermitianOp::new(identity(12)).unwrap();
        let g = decompose_hamiltonian(&h, &b).unwrap();
        assert!((g.get(0, 0, 0) - 12f64.sqrt()).abs() < 1e-12);
        let rest: f64 = g.as_slice()[1..].iter().map(|x| x.abs()).sum();
        assert!(rest < 1e-12);
    }

    #[test]
    fn round_trip_and_partition() {
        let dims = TripartiteDims::new(2, 2, 3).unwrap();
        let b = TripartiteBasis::gellmann(dims).unwrap();
        let h = random_hermitian(12, 11);
        let g = decompose_hamiltonian(&h, &b).unwrap();
        assert!(frobenius(&(g.reconstruct() - h.matrix())) < 1e-10);
        let t = extract_terms(&g);
        assert!(frobenius(&(t.sum() - h.matrix())) < 1e-10);
        assert!((frobenius(&t.delta).powi(2) - g.delta_norm_sq()).abs() < 1e-10);
        let parts = [&t.h_l, &t.h_w, &t.h_e, &t.h_lw, &t.h_we, &t.delta];
        for a in 0..parts.len() {
            for b2 in a + 1..parts.len() {
                assert!(crate::tensor::trace_product(parts[a], parts[b2]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn local_parts_embed_to_extracted_terms() {
        let dims = TripartiteDims::new(2, 3, 2).unwrap();
        let b = TripartiteBasis::gellmann(dims).unwrap();
        let g = decompose_hamiltonian(&random_hermitian(12, 4), &b).unwrap();
        let t = extract_terms(&g);
        let (il, iw, ie) = (identity(2), identity(3), identity(2));
        let e = il.kronecker(&iw).kronecker(&g.local_part(Subsystem::Env));
        let w = il.kronecker(&g.local_part(Subsystem::Wall)).kronecker(&ie);
        let l = g.local_part(Subsystem::Logical).kronecker(&iw).kronecker(&ie);
        assert!((e - &t.h_e).norm() < 1e-12);
        assert!((w - &t.h_w).norm() < 1e-12);
        assert!((l - &t.h_l).norm() < 1e-12);
    }
}
