//! Subsystem finder: the frame `Û` on ℋ_l ⊗ ℋ_w minimizing the logical–environment
//! coupling `J = ‖Δ‖²`, optionally regularized by `η ‖H_lw‖²`.

use crate::error::{Error, Result};
use crate::manifold::SphereVector;
use crate::manifold::{descend, DescentConfig, SpecialUnitary, Termination, Unitary};
use crate::rng;
use crate::tensor::{
    c, decompose_hamiltonian, eigh, partial_trace, trace_product, CMat, CoeffTensor, HamiltonianTerms, HermitianOp, Subsystem,
    TripartiteBasis, TripartiteDims,
};
use rayon::prelude::*;
use std::sync::Arc;

/// Cost data for a fixed Hamiltonian and split.
///
/// `env_blocks[k] = tr_e((𝟙 ⊗ σ_k) H)` is the operator `C_k` on ℋ_l ⊗ ℋ_w, so that
/// in the frame `U` the coefficients are `g_ijk = tr(U σ_ij U† C_k)`.
#[derive(Debug, Clone)]
pub struct FrameProblem {
    pub hamiltonian: HermitianOp,
    pub dims: TripartiteDims,
    pub basis: Arc<TripartiteBasis>,
    pub eta_reg: f64,
    env_blocks: Vec<CMat>,
    lw_basis: Vec<CMat>,
}

pub const DEFAULT_ETA_REG: f64 = 0.01;

impl FrameProblem {
    pub fn new(hamiltonian: HermitianOp, dims: TripartiteDims, eta_reg: f64) -> Result<Self> {
        let basis = TripartiteBasis::gellmann(dims)?;
        Self::with_basis(hamiltonian, basis, eta_reg)
    }

    pub fn with_basis(hamiltonian: HermitianOp, basis: Arc<TripartiteBasis>, eta_reg: f64) -> Result<Self> {
        let dims = basis.dims();
        dims.check(&hamiltonian)?;
        if !(eta_reg >= 0.0) {
            return Err(Error::InvalidParameter(format!("eta_reg must be >= 0, got {eta_reg}")));
        }
        let ns = dims.system();
        let ne = dims.n_e;
        let env_blocks = basis
            .e
            .elems()
            .iter()
            .map(|sk| {
                CMat::from_fn(ns, ns, |s, s2| {
                    let mut acc = c(0.0, 0.0);
                    for a in 0..ne {
                        for b in 0..ne {
                            acc += sk[(b, a)] * hamiltonian[(s * ne + a, s2 * ne + b)];
                        }
                    }
                    acc
                })
            })
            .collect();
        let lw_basis = (0..basis.l.len())
            .flat_map(|i| (0..basis.w.len()).map(move |j| (i, j)))
            .map(|(i, j)| basis.l.get(i).kronecker(basis.w.get(j)))
            .collect();
        Ok(Self { hamiltonian, dims, basis, eta_reg, env_blocks, lw_basis })
    }

    fn bw(&self) -> usize {
        self.basis.w.len()
    }

    fn rotated_lw(&self, u: &Unitary) -> Vec<CMat> {
        let m = u.matrix();
        let ma = m.adjoint();
        self.lw_basis.iter().map(|s| m * s * &ma).collect()
    }

    /// All `g_ijk` in frame `u`, flattened as `(i·n_w² + j)·n_e² + k`.
    fn coeffs(&self, a: &[CMat]) -> Vec<f64> {
        let be = self.env_blocks.len();
        let mut g = vec![0.0; a.len() * be];
        for (ij, aij) in a.iter().enumerate() {
            for (k, ck) in self.env_blocks.iter().enumerate() {
                g[ij * be + k] = trace_product(aij, ck).re;
            }
        }
        g
    }

    fn costs(&self, g: &[f64]) -> (f64, f64) {
        let (bw, be) = (self.bw(), self.env_blocks.len());
        let mut j = 0.0;
        let mut lw = 0.0;
        for (ij, chunk) in g.chunks(be).enumerate() {
            let (i, jw) = (ij / bw, ij % bw);
            if i == 0 {
                continue;
            }
            j += chunk[1..].iter().map(|x| x * x).sum::<f64>();
            if jw > 0 {
                lw += chunk[0] * chunk[0];
            }
        }
        (j, lw)
    }

    /// `J(U) = Σ_{i>0, k>0} g_ijk²`.
    pub fn cost_j(&self, u: &Unitary) -> f64 {
        self.costs(&self.coeffs(&self.rotated_lw(u))).0
    }

    /// `J(U) + η ‖H_lw‖²`.
    pub fn cost_j_reg(&self, u: &Unitary) -> f64 {
        let (j, lw) = self.costs(&self.coeffs(&self.rotated_lw(u)));
        j + self.eta_reg * lw
    }

    /// `‖H_lw‖²` in frame `u`.
    pub fn lw_norm_sq(&self, u: &Unitary) -> f64 {
        self.costs(&self.coeffs(&self.rotated_lw(u))).1
    }

    fn grad(&self, u: &Unitary, eta: f64) -> CMat {
        let a = self.rotated_lw(u);
        let g = self.coeffs(&a);
        let (bw, be) = (self.bw(), self.env_blocks.len());
        let n = self.dims.system();
        let mut omega = CMat::zeros(n, n);
        for (ij, aij) in a.iter().enumerate() {
            let (i, jw) = (ij / bw, ij % bw);
            if i == 0 {
                continue;
            }
            let mut m = CMat::zeros(n, n);
            for k in 1..be {
                let x = g[ij * be + k];
                if x != 0.0 {
                    m += &self.env_blocks[k] * c(x, 0.0);
                }
            }
            if jw > 0 && eta != 0.0 {
                m += &self.env_blocks[0] * c(eta * g[ij * be], 0.0);
            }
            omega += aij * &m - &m * aij;
        }
        omega * c(-2.0, 0.0) * u.matrix()
    }

    /// `grad J = −2 Σ tr(A_ij C_k) [A_ij, C_k] U` over `i>0, k>0`.
    pub fn grad_j(&self, u: &Unitary) -> CMat {
        self.grad(u, 0.0)
    }

    /// Adds `−2 η Σ_{i,j>0} tr(A_ij C_0) [A_ij, C_0] U` to [`grad_j`](Self::grad_j).
    pub fn grad_j_reg(&self, u: &Unitary) -> CMat {
        self.grad(u, self.eta_reg)
    }

    /// `(U ⊗ 𝟙_e)† H (U ⊗ 𝟙_e)`.
    pub fn rotate(&self, u: &Unitary) -> HermitianOp {
        rotate_hamiltonian(&self.hamiltonian, self.dims, u.matrix())
    }
}

pub fn rotate_hamiltonian(h: &CMat, dims: TripartiteDims, u: &CMat) -> HermitianOp {
    let big = u.kronecker(&CMat::identity(dims.n_e, dims.n_e));
    HermitianOp::symmetrized(big.adjoint() * h * &big)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameSearchConfig {
    pub descent: DescentConfig,
    pub restarts: usize,
}

impl Default for FrameSearchConfig {
    fn default() -> Self {
        Self { descent: DescentConfig::default(), restarts: 8 }
    }
}

#[derive(Debug, Clone)]
pub struct FrameSolution {
    pub u_hat: Unitary,
    pub rotated: HermitianOp,
    pub coeffs: CoeffTensor,
    pub j: f64,
    pub j_reg: f64,
    pub lw_norm_sq: f64,
    /// Set when the best restart ended on a failed line search.
    pub stalled: bool,
    pub iterations: usize,
}

/// Multi-start descent on `J_reg`; keeps the lowest final cost, first restart on ties.
pub fn find_wall_frame(prob: &FrameProblem, cfg: &FrameSearchConfig, seed: u64) -> Result<FrameSolution> {
    cfg.descent.validate()?;
    let n = prob.dims.system();
    let runs: Vec<_> = (0..cfg.restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::stream(seed, &format!("frame-restart-{r}"));
            let u0 = Unitary::random(n, &mut rng);
            descend(&SpecialUnitary, |u: &Unitary| prob.cost_j_reg(u), |u: &Unitary| prob.grad_j_reg(u), u0, &cfg.descent)
        })
        .collect();
    let best = runs.into_iter().reduce(|a, b| if b.cost < a.cost { b } else { a }).expect("at least one restart");
    solution_at(prob, best.point.clone(), best.termination == Termination::Stalled, best.iterations())
}

/// Evaluate a frame without optimizing, e.g. the identity frame.
pub fn solution_at(prob: &FrameProblem, u: Unitary, stalled: bool, iterations: usize) -> Result<FrameSolution> {
    let rotated = prob.rotate(&u);
    let coeffs = decompose_hamiltonian(&rotated, &prob.basis)?;
    Ok(FrameSolution {
        j: prob.cost_j(&u),
        j_reg: prob.cost_j_reg(&u),
        lw_norm_sq: prob.lw_norm_sq(&u),
        u_hat: u,
        rotated,
        coeffs,
        stalled,
        iterations,
    })
}

/// Local logical rotation composed onto a frame, `Û' = Û·(V ⊗ 𝟙_w)`.
#[derive(Debug, Clone)]
pub struct LogicalAlignment {
    /// `V ⊗ 𝟙_w` on ℋ_l ⊗ ℋ_w.
    pub w: CMat,
    /// Coupling weight `Σ_{(j,k)≠(0,0)} g_ajk²` along x, y, z after the rotation.
    pub weights: [f64; 3],
}

/// For a qubit logical factor, rotate its Bloch axes so the couplings to wall and
/// environment are diagonal with the weakest one along x and the strongest along z.
/// `J`, `J_reg` and the OSD singular values are unchanged; `XX` selective decoupling
/// then leaves only the x weight uncancelled.
pub fn align_logical_axes(coeffs: &CoeffTensor) -> Result<LogicalAlignment> {
    let dims = coeffs.dims();
    if dims.n_l != 2 {
        return Err(Error::UnsupportedLogicalDim(dims.n_l));
    }
    let (_, bw, be) = coeffs.shape();
    let mut k = nalgebra::Matrix3::<f64>::zeros();
    for a in 0..3 {
        for b in 0..3 {
            let mut acc = 0.0;
            for j in 0..bw {
                for kk in 0..be {
                    if j + kk > 0 {
                        acc += coeffs.get(a + 1, j, kk) * coeffs.get(b + 1, j, kk);
                    }
                }
            }
            k[(a, b)] = acc;
        }
    }
    let eig = nalgebra::SymmetricEigen::new(k);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let mut o = nalgebra::Matrix3::<f64>::zeros();
    for (row, &idx) in order.iter().enumerate() {
        o.set_row(row, &eig.eigenvectors.column(idx).transpose());
    }
    if o.determinant() < 0.0 {
        o.set_row(0, &(-o.row(0)));
    }
    // V† implements the rotation O on Bloch vectors.
    let v = bloch_rotation_unitary(&o).adjoint();
    Ok(LogicalAlignment {
        w: v.kronecker(&CMat::identity(dims.n_w, dims.n_w)),
        weights: [0, 1, 2].map(|i| eig.eigenvalues[order[i]].max(0.0)),
    })
}

/// `U ∈ SU(2)` with `U σ_b U† = Σ_a R_ab σ_a` for `R ∈ SO(3)`.
pub fn bloch_rotation_unitary(r: &nalgebra::Matrix3<f64>) -> CMat {
    let tr = r.trace();
    let (w, x, y, z);
    if tr > 0.0 {
        let s = (tr + 1.0).sqrt() * 2.0;
        w = s / 4.0;
        x = (r[(2, 1)] - r[(1, 2)]) / s;
        y = (r[(0, 2)] - r[(2, 0)]) / s;
        z = (r[(1, 0)] - r[(0, 1)]) / s;
    } else if r[(0, 0)] > r[(1, 1)] && r[(0, 0)] > r[(2, 2)] {
        let s = (1.0 + r[(0, 0)] - r[(1, 1)] - r[(2, 2)]).sqrt() * 2.0;
        w = (r[(2, 1)] - r[(1, 2)]) / s;
        x = s / 4.0;
        y = (r[(0, 1)] + r[(1, 0)]) / s;
        z = (r[(0, 2)] + r[(2, 0)]) / s;
    } else if r[(1, 1)] > r[(2, 2)] {
        let s = (1.0 + r[(1, 1)] - r[(0, 0)] - r[(2, 2)]).sqrt() * 2.0;
        w = (r[(0, 2)] - r[(2, 0)]) / s;
        x = (r[(0, 1)] + r[(1, 0)]) / s;
        y = s / 4.0;
        z = (r[(1, 2)] + r[(2, 1)]) / s;
    } else {
        let s = (1.0 + r[(2, 2)] - r[(0, 0)] - r[(1, 1)]).sqrt() * 2.0;
        w = (r[(1, 0)] - r[(0, 1)]) / s;
        x = (r[(0, 2)] + r[(2, 0)]) / s;
        y = (r[(1, 2)] + r[(2, 1)]) / s;
        z = s / 4.0;
    }
    // w𝟙 − i(xσx + yσy + zσz)
    CMat::from_row_slice(2, 2, &[c(w, -z), c(-y, -x), c(y, -x), c(w, z)])
}

/// Wall state decoupling the logical factor exactly, if one exists.
///
/// Requires `Δ = 0`. Collects the wall-side factors of `H_w`, `H_lw` and `H_we` and
/// returns their first common eigenvector (residual < 1e-8), or `None`.
pub fn detect_perfect_wall(terms: &HamiltonianTerms) -> Result<Option<SphereVector>> {
    let dims = terms.dims;
    let scale = crate::tensor::frobenius(&terms.sum()).max(1.0);
    if crate::tensor::frobenius(&terms.delta) > 1e-8 * scale {
        return Err(Error::Precondition("detect_perfect_wall needs Δ = 0".into()));
    }
    let basis = TripartiteBasis::gellmann(dims)?;
    let wall = |op: &CMat| partial_trace(op, dims, &[Subsystem::Wall]);
    let mut ops = vec![wall(&terms.h_w)?];
    for s in basis.l.elems().iter().skip(1) {
        let lift = crate::tensor::kron3(s, &CMat::identity(dims.n_w, dims.n_w), &CMat::identity(dims.n_e, dims.n_e));
        ops.push(wall(&(lift * &terms.h_lw))?);
    }
    for s in basis.e.elems().iter().skip(1) {
        let lift = crate::tensor::kron3(&CMat::identity(dims.n_l, dims.n_l), &CMat::identity(dims.n_w, dims.n_w), s);
        ops.push(wall(&(lift * &terms.h_we))?);
    }
    let ops: Vec<CMat> = ops.into_iter().map(|o| (&o + o.adjoint()) * c(0.5, 0.0)).collect();
    Ok(common_eigenvector(&ops, &CMat::identity(dims.n_w, dims.n_w), 0)
        .map(|v| SphereVector::new(v).expect("unit vector").canonical_phase()))
}

const PERFECT_TOL: f64 = 1e-8;

fn is_eigvec(ops: &[CMat], v: &crate::tensor::CVec) -> bool {
    ops.iter().all(|o| {
        let ov = o * v;
        let mu = v.dotc(&ov);
        let scale = crate::tensor::frobenius(o).max(1.0);
        (ov - v * mu).norm() < PERFECT_TOL * scale
    })
}

/// Search the span of the columns of `b` for a common eigenvector of `ops`.
fn common_eigenvector(ops: &[CMat], b: &CMat, depth: usize) -> Option<crate::tensor::CVec> {
    let d = b.ncols();
    let restricted: Vec<CMat> = ops.iter().map(|o| b.adjoint() * o * b).collect();
    let scalar = restricted.iter().all(|r| {
        let mu = r.trace() / c(d as f64, 0.0);
        (r - CMat::identity(d, d) * mu).norm() < PERFECT_TOL
    });
    if scalar || depth > 6 {
        let v = b.column(0).into_owned();
        return is_eigvec(ops, &v).then_some(v);
    }
    // generic real combination; weights fixed for determinism
    let mut x = CMat::zeros(d, d);
    for (m, r) in restricted.iter().enumerate() {
        let w = 1.0 + ((m as f64 + 1.0 + depth as f64) * 0.618_033_988_749_895).fract();
        x += r * c(w, 0.0);
    }
    let (vals, vecs) = eigh(&x);
    let spread = vals[d - 1] - vals[0];
    let gap = 1e-9 * spread.max(1.0);
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && vals[end] - vals[end - 1] < gap {
            end += 1;
        }
        let sub = b * vecs.columns(start, end - start);
        if end - start == 1 {
            let v = sub.column(0).into_owned();
            if is_eigvec(ops, &v) {
                return Some(v);
            }
        } else if let Some(v) = common_eigenvector(ops, &sub, depth + 1) {
            return Some(v);
        }
        start = end;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;
    use crate::tensor::extract_terms;

    #[test]
    fn toy_identity_cost() {
        let toy = models::toy_regularization_model();
        let p = FrameProblem::new(toy.model.hamiltonian.clone(), toy.model.dims, 0.01).unwrap();
        assert!((p.cost_j(&Unitary::identity(4)) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_eta_reduces_to_j() {
        let toy = models::toy_regularization_model();
        let p = FrameProblem::new(toy.model.hamiltonian.clone(), toy.model.dims, 0.0).unwrap();
        let mut r = rng::stream(1, "t");
        for _ in 0..5 {
            let u = Unitary::random(4, &mut r);
            assert_eq!(p.cost_j(&u), p.cost_j_reg(&u));
            assert_eq!(p.grad_j(&u), p.grad_j_reg(&u));
        }
    }

    #[test]
    fn cost_matches_extracted_delta() {
        let m = models::spin_lattice5();
        let p = FrameProblem::new(m.hamiltonian.clone(), m.dims, 0.01).unwrap();
        let mut r = rng::stream(2, "t");
        let u = Unitary::random(8, &mut r);
        let t = extract_terms(&decompose_hamiltonian(&p.rotate(&u), &p.basis).unwrap());
        let d = crate::tensor::frobenius(&t.delta).powi(2);
        assert!((p.cost_j(&u) - d).abs() < 1e-10);
    }

    #[test]
    fn perfect_wall_on_ising_chain() {
        let m = models::ising_chain(3, 2, 1.0, 0.8).unwrap();
        let b = TripartiteBasis::gellmann(m.dims).unwrap();
        let t = extract_terms(&decompose_hamiltonian(&m.hamiltonian, &b).unwrap());
        let w = detect_perfect_wall(&t).unwrap().expect("wall state");
        let p0 = w.vector()[0].norm();
        assert!(p0 < 1e-10 || (p0 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn no_perfect_wall_for_transversal_ising() {
        let m = models::transversal_ising3();
        let b = TripartiteBasis::gellmann(m.dims).unwrap();
        let t = extract_terms(&decompose_hamiltonian(&m.hamiltonian, &b).unwrap());
        assert!(detect_perfect_wall(&t).unwrap().is_none());
    }

    #[test]
    fn uncoupled_wall_returns_first_basis_state() {
        let dims = TripartiteDims::new(2, 3, 2).unwrap();
        let h = HermitianOp::zeros(12);
        let b = TripartiteBasis::gellmann(dims).unwrap();
        let t = extract_terms(&decompose_hamiltonian(&h, &b).unwrap());
        let w = detect_perfect_wall(&t).unwrap().unwrap();
        assert!((w.vector()[0].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bloch_rotation_adjoint_action() {
        use crate::tensor::Axis;
        let mut r = crate::rng::stream(11, "rot");
        for _ in 0..5 {
            let q = crate::tensor::random_unitary(2, &mut r);
            let paulis = [Axis::X.pauli(), Axis::Y.pauli(), Axis::Z.pauli()];
            let rot = nalgebra::Matrix3::from_fn(|a, b| 0.5 * trace_product(&paulis[a], &(&q * &paulis[b] * q.adjoint())).re);
            let u = bloch_rotation_unitary(&rot);
            for b in 0..3 {
                let lhs = &u * &paulis[b] * u.adjoint();
                let rhs = (0..3).fold(CMat::zeros(2, 2), |acc, a| acc + &paulis[a] * c(rot[(a, b)], 0.0));
                assert!((lhs - rhs).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn alignment_puts_weakest_coupling_on_x() {
        let m = crate::models::transversal_ising3();
        let p = FrameProblem::new(m.hamiltonian.clone(), m.dims, 0.0).unwrap();
        let mut r = crate::rng::stream(3, "align");
        let u = Unitary::random(4, &mut r);
        let g = decompose_hamiltonian(&p.rotate(&u), &p.basis).unwrap();
        let al = align_logical_axes(&g).unwrap();
        let u2 = Unitary::new(u.matrix() * &al.w).unwrap();
        assert!((p.cost_j(&u2) - p.cost_j(&u)).abs() < 1e-10);
        let g2 = decompose_hamiltonian(&p.rotate(&u2), &p.basis).unwrap();
        let (_, bw, be) = g2.shape();
        let weight = |a: usize| -> f64 {
            (0..bw).flat_map(|j| (0..be).map(move |k| (j, k))).filter(|&(j, k)| j + k > 0).map(|(j, k)| g2.get(a, j, k).powi(2)).sum()
        };
        for a in 0..3 {
            assert!((weight(a + 1) - al.weights[a]).abs() < 1e-10);
        }
        assert!(al.weights[0] <= al.weights[1] && al.weights[1] <= al.weights[2]);
    }
}
