//! Wall-state selection.
//!
//! For a product state `ρ_l ⊗ |w⟩⟨w| ⊗ ρ_e` with `ρ_l` Haar-random and pure, the
//! average initial purity acceleration is `⟨γ̈⟩ = −4ν Σ_{i>0} Var(B_i)` where
//! `B_i = Σ_{jk} g_ijk σ_j ⊗ σ_k` is the wall–environment partner of `σ_i` and the
//! variance is taken in `|w⟩⟨w| ⊗ ρ_e`. `Γ₁` is that variance sum; `Γ₂` keeps only the
//! logical–wall block through its operator-Schmidt decomposition.

use crate::dynamics::Lindbladian;
use crate::error::{Error, Result};
use crate::manifold::{descend, ComplexSphere, DescentConfig, SphereVector, Termination};
use crate::rng;
use crate::tensor::{
    c, eigh, haar_random_state, partial_trace, trace_product, CMat, CVec, CoeffTensor, HamiltonianTerms, HermitianBasis, Subsystem,
    TripartiteDims,
};
use nalgebra::DMatrix;
use rayon::prelude::*;

/// Cached data for `Γ₁`: `R = Σ_{i>0} Σ_{kc} tr(σ_k σ_c ρ_e) W_ik W_ic` and
/// `V_i = Σ_k ⟨σ_k⟩_e W_ik`, with `W_ik = Σ_j g_ijk σ_j` on the wall.
#[derive(Debug, Clone)]
pub struct WallObjectiveContext {
    pub coeffs: CoeffTensor,
    /// `tau[(c, k)] = tr(σ_c σ_k ρ_e)`.
    pub tau: CMat,
    pub env_expect: Vec<f64>,
    pub dims: TripartiteDims,
    pub nu: f64,
    r_op: CMat,
    v_ops: Vec<CMat>,
}

impl WallObjectiveContext {
    pub fn new(coeffs: CoeffTensor, rho_e: &CMat) -> Result<Self> {
        let dims = coeffs.dims();
        if rho_e.nrows() != dims.n_e || rho_e.ncols() != dims.n_e {
            return Err(Error::Shape { expected: dims.n_e, got: rho_e.nrows() });
        }
        let basis = coeffs.basis().clone();
        let be = basis.e.elems();
        let tau = CMat::from_fn(be.len(), be.len(), |ci, k| trace_product(&(&be[ci] * &be[k]), rho_e));
        let env_expect: Vec<f64> = be.iter().map(|s| trace_product(s, rho_e).re).collect();
        let (bl, bw, bek) = coeffs.shape();
        let nw = dims.n_w;
        let mut r_op = CMat::zeros(nw, nw);
        let mut v_ops = Vec::with_capacity(bl.saturating_sub(1));
        for i in 1..bl {
            let w_ik: Vec<CMat> = (0..bek)
                .map(|k| {
                    let x: Vec<f64> = (0..bw).map(|j| coeffs.get(i, j, k)).collect();
                    basis.w.combine(&x)
                })
                .collect();
            let mut v = CMat::zeros(nw, nw);
            for k in 0..bek {
                v += &w_ik[k] * c(env_expect[k], 0.0);
            }
            v_ops.push(v);
            for k in 0..bek {
                if w_ik[k].iter().all(|z| z.norm() == 0.0) {
                    continue;
                }
                for cc in 0..bek {
                    // tr(σ_k σ_c ρ_e) = tau[(k, c)]
                    let t = tau[(k, cc)];
                    if t.norm() != 0.0 {
                        r_op += &w_ik[k] * &w_ik[cc] * t;
                    }
                }
            }
        }
        let r_op = (&r_op + r_op.adjoint()) * c(0.5, 0.0);
        let n = dims.n_l as f64;
        let nu = 1.0 / n - 1.0 / (n * (n + 1.0));
        Ok(Self { coeffs, tau, env_expect, dims, nu, r_op, v_ops })
    }
}

fn expect(op: &CMat, w: &CVec) -> f64 {
    w.dotc(&(op * w)).re
}

/// `Γ₁(w) = −⟨γ̈⟩ / (4ν)`.
pub fn gamma1(w: &SphereVector, ctx: &WallObjectiveContext) -> f64 {
    let v = w.vector();
    expect(&ctx.r_op, v) - ctx.v_ops.iter().map(|op| expect(op, v).powi(2)).sum::<f64>()
}

pub fn grad_gamma1(w: &SphereVector, ctx: &WallObjectiveContext) -> CVec {
    let v = w.vector();
    let mut g = &ctx.r_op * v * c(2.0, 0.0);
    for op in &ctx.v_ops {
        g -= op * v * c(4.0 * expect(op, v), 0.0);
    }
    ComplexSphere::riemannian_grad(w, &g)
}

/// `Ĥ_lw = Σ s_i C_i ⊗ D_i`. The last pair is `(𝟙/√n_l, 𝟙/√n_w)` with `s = 0`.
#[derive(Debug, Clone)]
pub struct OsdResult {
    pub s: Vec<f64>,
    pub c_ops: Vec<CMat>,
    pub d_ops: Vec<CMat>,
    pub n_l: usize,
    pub n_w: usize,
}

impl OsdResult {
    pub fn reconstruct(&self) -> CMat {
        let n = self.n_l * self.n_w;
        let mut m = CMat::zeros(n, n);
        for ((s, ci), di) in self.s.iter().zip(&self.c_ops).zip(&self.d_ops) {
            m += ci.kronecker(di) * c(*s, 0.0);
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.s.iter().all(|&x| x < 1e-12)
    }
}

fn basis_or_trivial(n: usize) -> Result<HermitianBasis> {
    if n == 1 {
        Ok(HermitianBasis::trivial())
    } else {
        crate::tensor::gellmann_basis(n)
    }
}

/// Logical–wall block as an operator on ℋ_l ⊗ ℋ_w: `Σ_{i,j>0} g_ij0/√n_e σ_i ⊗ σ_j`.
pub fn lw_operator(coeffs: &CoeffTensor) -> CMat {
    let ne = coeffs.dims().n_e as f64;
    coeffs.lw_block(0, |i, j| i > 0 && j > 0) * c(1.0 / ne.sqrt(), 0.0)
}

/// Same operator from extracted full-space terms: `tr_e(H_lw) / n_e`.
pub fn lw_operator_from_terms(terms: &HamiltonianTerms) -> Result<CMat> {
    let p = partial_trace(&terms.h_lw, terms.dims, &[Subsystem::Logical, Subsystem::Wall])?;
    Ok(p * c(1.0 / terms.dims.n_e as f64, 0.0))
}

/// Operator-Schmidt decomposition of a pure interaction on ℋ_l ⊗ ℋ_w.
///
/// Singular vectors are fixed by making the first entry of magnitude > 1e-12 of each
/// right-singular vector positive.
pub fn osd(h_lw: &CMat, n_l: usize, n_w: usize) -> Result<OsdResult> {
    let n = n_l * n_w;
    if h_lw.nrows() != n || h_lw.ncols() != n {
        return Err(Error::Shape { expected: n, got: h_lw.nrows() });
    }
    let bl = basis_or_trivial(n_l)?;
    let bw = basis_or_trivial(n_w)?;
    let g = DMatrix::<f64>::from_fn(bl.len(), bw.len(), |a, b| trace_product(&bl.get(a).kronecker(bw.get(b)), h_lw).re);
    let scale = g.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let local = (0..bl.len()).map(|a| g[(a, 0)].abs()).chain((0..bw.len()).map(|b| g[(0, b)].abs()));
    if local.fold(0.0f64, f64::max) > 1e-10 * scale {
        return Err(Error::Precondition("H_lw has local or identity components; split it with extract_terms first".into()));
    }
    let mut s = Vec::new();
    let mut c_ops = Vec::new();
    let mut d_ops = Vec::new();
    if bl.len() > 1 && bw.len() > 1 {
        let block = g.view((1, 1), (bl.len() - 1, bw.len() - 1)).into_owned();
        let svd = block.svd(true, true);
        let u = svd.u.expect("left vectors requested");
        let vt = svd.v_t.expect("right vectors requested");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        for &m in &order {
            let mut uc: Vec<f64> = u.column(m).iter().copied().collect();
            let mut vc: Vec<f64> = vt.row(m).iter().copied().collect();
            if let Some(first) = vc.iter().find(|x| x.abs() > 1e-12) {
                if *first < 0.0 {
                    uc.iter_mut().for_each(|x| *x = -*x);
                    vc.iter_mut().for_each(|x| *x = -*x);
                }
            }
            let mut cu = vec![0.0];
            cu.extend(uc);
            let mut dv = vec![0.0];
            dv.extend(vc);
            s.push(svd.singular_values[m]);
            c_ops.push(bl.combine(&cu));
            d_ops.push(bw.combine(&dv));
        }
    }
    s.push(0.0);
    c_ops.push(bl.get(0).clone());
    d_ops.push(bw.get(0).clone());
    Ok(OsdResult { s, c_ops, d_ops, n_l, n_w })
}

/// `Γ₂(w) = Σ s_i² Var_w(D_i)`.
pub fn gamma2(w: &SphereVector, osd: &OsdResult) -> f64 {
    let v = w.vector();
    osd.s
        .iter()
        .zip(&osd.d_ops)
        .filter(|(s, _)| **s != 0.0)
        .map(|(s, d)| {
            let m = expect(d, v);
            s * s * (expect(&(d * d), v) - m * m)
        })
        .sum()
}

pub fn grad_gamma2(w: &SphereVector, osd: &OsdResult) -> CVec {
    let v = w.vector();
    let mut g = CVec::zeros(v.len());
    for (s, d) in osd.s.iter().zip(&osd.d_ops) {
        if *s == 0.0 {
            continue;
        }
        let dv = d * v;
        let m = v.dotc(&dv).re;
        g += (d * &dv * c(2.0, 0.0) - dv * c(4.0 * m, 0.0)) * c(s * s, 0.0);
    }
    ComplexSphere::riemannian_grad(w, &g)
}

pub const DEGENERACY_GAP: f64 = 1e-6;

/// Lowest eigenvector of `D₁` for a qubit wall.
pub fn optimal_qubit_wall(osd: &OsdResult) -> Result<SphereVector> {
    if osd.n_w != 2 {
        return Err(Error::Precondition(format!("analytic wall state needs n_w = 2, got {}", osd.n_w)));
    }
    let s2 = osd.s.get(1).copied().unwrap_or(0.0);
    if osd.s[0] - s2 <= DEGENERACY_GAP {
        return Err(Error::Degenerate(format!("s1 = {:.3e}, s2 = {:.3e}; optimize Γ₁ with find_wall_state instead", osd.s[0], s2)));
    }
    d1_eigenvector(osd)
}

fn d1_eigenvector(osd: &OsdResult) -> Result<SphereVector> {
    let (_, vecs) = eigh(&osd.d_ops[0]);
    Ok(SphereVector::new(vecs.column(0).into_owned())?.canonical_phase())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Gamma1,
    Gamma2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallSearchConfig {
    pub descent: DescentConfig,
    /// Extra random starts beyond the `D₁`-seeded one.
    pub extra_restarts: usize,
}

impl Default for WallSearchConfig {
    fn default() -> Self {
        Self { descent: DescentConfig::default(), extra_restarts: 3 }
    }
}

#[derive(Debug, Clone)]
pub struct WallSearchResult {
    pub w: SphereVector,
    pub value: f64,
    /// The OSD was zero, so the descent started from a random state.
    pub random_init: bool,
    pub stalled: bool,
}

/// Minimize `Γ₁` or `Γ₂` on the sphere from `μ(|w_D⟩ + |w_r⟩/10)`.
pub fn find_wall_state(
    ctx: &WallObjectiveContext,
    osd: Option<&OsdResult>,
    objective: Objective,
    cfg: &WallSearchConfig,
    seed: u64,
) -> Result<WallSearchResult> {
    cfg.descent.validate()?;
    let nw = ctx.dims.n_w;
    let mut r = rng::stream(seed, "wall-init");
    let seeded = match osd {
        Some(o) if !o.is_zero() => Some(d1_eigenvector(o)?),
        _ => None,
    };
    if objective == Objective::Gamma2 && osd.is_none() {
        return Err(Error::Precondition("Γ₂ needs an OSD".into()));
    }
    let random_init = seeded.is_none();
    let mut starts = Vec::new();
    let wr = SphereVector::random(nw, &mut r);
    starts.push(match &seeded {
        Some(wd) => SphereVector::new(wd.vector() + wr.vector() * c(0.1, 0.0))?,
        None => wr,
    });
    for _ in 0..cfg.extra_restarts {
        starts.push(SphereVector::random(nw, &mut r));
    }
    let mut best: Option<(SphereVector, f64, bool)> = None;
    for w0 in starts {
        let tr = match objective {
            Objective::Gamma1 => {
                descend(&ComplexSphere, |w: &SphereVector| gamma1(w, ctx), |w: &SphereVector| grad_gamma1(w, ctx), w0, &cfg.descent)
            }
            Objective::Gamma2 => {
                let o = osd.expect("checked above");
                descend(&ComplexSphere, |w: &SphereVector| gamma2(w, o), |w: &SphereVector| grad_gamma2(w, o), w0, &cfg.descent)
            }
        };
        let stalled = tr.termination == Termination::Stalled;
        if best.as_ref().is_none_or(|b| tr.cost < b.1 - 1e-14) {
            best = Some((tr.point, tr.cost, stalled));
        }
    }
    let (w, value, stalled) = best.expect("at least one start");
    Ok(WallSearchResult { w: w.canonical_phase(), value, random_init, stalled })
}

/// `(γ̇, γ̈)` of the logical purity at `ρ`: `γ̇ = 2 tr(ρ_l ℒ(ρ)_l)` and
/// `γ̈ = 2 tr(ℒ²(ρ)_l ρ_l + ℒ(ρ)_l²)`, reductions taken over wall and environment.
pub fn purity_derivatives(rho: &CMat, h: &CMat, ls: &[CMat], dims: TripartiteDims) -> Result<(f64, f64)> {
    let gen = Lindbladian::new(h, ls);
    let l1 = gen.apply(rho);
    let l2 = gen.apply(&l1);
    let keep = [Subsystem::Logical];
    let r = partial_trace(rho, dims, &keep)?;
    let r1 = partial_trace(&l1, dims, &keep)?;
    let r2 = partial_trace(&l2, dims, &keep)?;
    let first = 2.0 * trace_product(&r, &r1).re;
    let second = 2.0 * (trace_product(&r2, &r).re + trace_product(&r1, &r1).re);
    Ok((first, second))
}

/// Monte-Carlo mean of `γ̈(0)` over Haar-random pure logical states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccelEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Average of the exact double-generator `γ̈(0)` for `|ψ⟩⟨ψ| ⊗ |w⟩⟨w| ⊗ ρ_e`, `ψ` Haar-random.
/// Sample `k` draws from its own stream, so the estimate does not depend on thread count.
pub fn purity_accel_oracle(
    w: &SphereVector,
    rho_e: &CMat,
    h: &CMat,
    ls: &[CMat],
    dims: TripartiteDims,
    n_samples: usize,
    seed: u64,
) -> Result<AccelEstimate> {
    if n_samples < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    dims.check(h)?;
    let we = w.projector().kronecker(rho_e);
    let vals: Result<Vec<f64>> = (0..n_samples)
        .into_par_iter()
        .map(|k| {
            let mut r = rng::stream(seed, &format!("accel-{k}"));
            let psi = haar_random_state(dims.n_l, &mut r);
            let rho = (&psi * psi.adjoint()).kronecker(&we);
            purity_derivatives(&rho, h, ls, dims).map(|(_, acc)| acc)
        })
        .collect();
    let vals = vals?;
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(AccelEstimate { mean, stderr: (var / n).sqrt(), samples: vals.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;
    use crate::tensor::{decompose_hamiltonian, thermal_state, TripartiteBasis};

    fn ising_ctx() -> (WallObjectiveContext, OsdResult) {
        let m = models::transversal_ising3();
        let b = TripartiteBasis::gellmann(m.dims).unwrap();
        let g = decompose_hamiltonian(&m.hamiltonian, &b).unwrap();
        let o = osd(&lw_operator(&g), 2, 2).unwrap();
        let rho_e = thermal_state(&(crate::tensor::Axis::Z.pauli() * c(0.5, 0.0)), 0.01).unwrap();
        (WallObjectiveContext::new(g, &rho_e).unwrap(), o)
    }

    #[test]
    fn ising_osd_single_value() {
        let (_, o) = ising_ctx();
        assert!((o.s[0] - 0.5).abs() < 1e-12);
        assert!(o.s[1..].iter().all(|s| s.abs() < 1e-12));
        assert_eq!(o.s.len(), 4);
    }

    #[test]
    fn gamma_identity_at_qubit_eigvecs() {
        // Var contributions are ½ for every D_i except the selected one.
        let (_, o) = ising_ctx();
        let total: f64 = o.s.iter().map(|s| s * s).sum();
        for jdx in 0..3 {
            let (_, vecs) = eigh(&o.d_ops[jdx]);
            let w = SphereVector::new(vecs.column(0).into_owned()).unwrap();
            let want = 0.5 * total - 0.5 * o.s[jdx].powi(2);
            assert!((gamma2(&w, &o) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn qubit_optimum_is_minus() {
        let (_, o) = ising_ctx();
        let w = optimal_qubit_wall(&o).unwrap();
        let minus = SphereVector::new(CVec::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)])).unwrap();
        assert!((w.fidelity(&minus) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_osd_is_degenerate() {
        let o = osd(&CMat::zeros(4, 4), 2, 2).unwrap();
        assert!(o.is_zero());
        assert!(matches!(optimal_qubit_wall(&o), Err(Error::Degenerate(_))));
    }

    #[test]
    fn local_terms_rejected() {
        let h = crate::tensor::Axis::Z.pauli().kronecker(&CMat::identity(2, 2));
        assert!(matches!(osd(&h, 2, 2), Err(Error::Precondition(_))));
    }
}
