//! Eternal purity bounds under strong wall driving `H_κ = H₀ + κ 𝟙⊗H_u⊗𝟙`.
//!
//! With `|ψ_i⟩, λ_i` the eigenpairs of `H_κ`, the logical purity is
//! `γ_l(t) = Σ_{abij} e^{−iλ_abij t} ρ_ab ρ_ij tr(τ_ab τ_ij)` where
//! `λ_abij = λ_a − λ_b + λ_i − λ_j`, `ρ_ij = ⟨ψ_i|ρ₀|ψ_j⟩` and `τ_ij = tr_we |ψ_i⟩⟨ψ_j|`.
//! Terms with `λ_abij = 0` form the constant `γ̄`; the rest (`𝒞₁`) oscillate, so
//! `γ_l(t) ≥ γ̄ − ‖ρ⃗‖₁` for all `t`.
//!
//! Index labels are 0-based here; reports add one.

use crate::error::{Error, Result};
use crate::manifold::SphereVector;
use crate::tensor::{eigh, embed_wall, CMat, CVec, DensityMatrix, HermitianOp, TripartiteDims, C64};
use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const CLUSTER_GAP: f64 = 1e-10;

/// Eigenpairs of `H_κ`, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub kappa: f64,
    pub energies: DVector<f64>,
    pub vecs: CMat,
}

/// `H₀ + κ 𝟙⊗H_u⊗𝟙`.
pub fn driven_hamiltonian(h0: &HermitianOp, h_u: &HermitianOp, dims: TripartiteDims, kappa: f64) -> Result<HermitianOp> {
    dims.check(h0)?;
    if h_u.dim() != dims.n_w {
        return Err(Error::Shape { expected: dims.n_w, got: h_u.dim() });
    }
    Ok(HermitianOp::symmetrized(h0.matrix() + embed_wall(dims, h_u.matrix()) * C64::new(kappa, 0.0)))
}

impl SpectralData {
    /// Eigenvectors inside a degenerate cluster (gap < 1e-10) are replaced by the
    /// cluster projections of the computational basis, orthonormalized in order, so
    /// the decomposition is reproducible.
    pub fn of(h: &HermitianOp, kappa: f64) -> Self {
        let (energies, mut vecs) = eigh(h);
        let n = energies.len();
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && energies[end] - energies[end - 1] < CLUSTER_GAP * energies[end].abs().max(1.0) {
                end += 1;
            }
            if end - start > 1 {
                let block = vecs.columns(start, end - start).into_owned();
                let proj = &block * block.adjoint();
                let mut chosen: Vec<CVec> = Vec::new();
                for e in 0..n {
                    if chosen.len() == end - start {
                        break;
                    }
                    let mut v: CVec = proj.column(e).into_owned();
                    for u in &chosen {
                        let ov = u.dotc(&v);
                        v -= u * ov;
                    }
                    let nv = v.norm();
                    if nv > 1e-6 {
                        chosen.push(v / C64::new(nv, 0.0));
                    }
                }
                for (k, v) in chosen.into_iter().enumerate() {
                    vecs.set_column(start + k, &v);
                }
            }
            start = end;
        }
        Self { kappa, energies, vecs }
    }

    pub fn driven(h0: &HermitianOp, h_u: &HermitianOp, dims: TripartiteDims, kappa: f64) -> Result<Self> {
        Ok(Self::of(&driven_hamiltonian(h0, h_u, dims, kappa)?, kappa))
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn range(&self) -> f64 {
        let n = self.dim();
        if n == 0 {
            0.0
        } else {
            self.energies[n - 1] - self.energies[0]
        }
    }

    /// `λ_a − λ_b + λ_i − λ_j`.
    pub fn lambda(&self, q: [usize; 4]) -> f64 {
        let e = &self.energies;
        e[q[0]] - e[q[1]] + e[q[2]] - e[q[3]]
    }

    /// `|λ_abij| < zero_tol · max(1, spectral range)`.
    pub fn is_zero_frequency(&self, q: [usize; 4], zero_tol: f64) -> bool {
        self.lambda(q).abs() < zero_tol * self.range().max(1.0)
    }
}

/// `τ_ij = tr_we |v_i⟩⟨v_j|` for the columns of `vecs`, as `n_l × n_l` matrices.
fn reduced_outer(vecs: &CMat, dims: TripartiteDims) -> Vec<Vec<CMat>> {
    let n = vecs.ncols();
    let (nl, rest) = (dims.n_l, dims.n_w * dims.n_e);
    // Ψ_i[(p, x)] = ⟨p, x|v_i⟩
    let psi: Vec<CMat> = (0..n).map(|i| CMat::from_fn(nl, rest, |p, x| vecs[(p * rest + x, i)])).collect();
    (0..n).into_par_iter().map(|i| (0..n).map(|j| &psi[i] * psi[j].adjoint()).collect()).collect()
}

fn trace_of_product(a: &CMat, b: &CMat) -> C64 {
    let n = a.nrows();
    let mut s = C64::new(0.0, 0.0);
    for p in 0..n {
        for q in 0..n {
            s += a[(p, q)] * b[(q, p)];
        }
    }
    s
}

/// Constant part, oscillation budget and bound for one `κ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub kappa: f64,
    /// `γ_l(0)` computed directly from the reduced state.
    pub gamma0: f64,
    pub gamma_bar: f64,
    pub rho_l1: f64,
    pub bound: f64,
    /// Quadruples with nonzero amplitude classified into `𝒞₁`.
    pub c1_size: usize,
    /// `|Im γ̄|`; vanishes up to round-off because amplitudes pair as `abij ↔ baji`.
    pub imag_residue: f64,
    /// `γ̄ + Σ_{𝒞₁} γ_abij(0) − γ_l(0)`.
    pub consistency: f64,
}

const AMPLITUDE_PRUNE: f64 = 1e-14;

/// Split `γ_l` into constant and oscillating parts for `ρ₀` under the spectrum `spec`.
pub fn purity_decomposition(rho0: &DensityMatrix, spec: &SpectralData, dims: TripartiteDims, zero_tol: f64) -> Result<BoundReport> {
    dims.check(rho0)?;
    let n = spec.dim();
    if n != dims.total() {
        return Err(Error::Shape { expected: dims.total(), got: n });
    }
    if n > 64 {
        return Err(Error::InvalidDimension(format!("quadruple census limited to n ≤ 64, got {n}")));
    }
    if !(zero_tol > 0.0) {
        return Err(Error::InvalidParameter("zero tolerance must be positive".into()));
    }
    let rho = spec.vecs.adjoint() * rho0.matrix() * &spec.vecs;
    let tau = reduced_outer(&spec.vecs, dims);
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect();
    let live: Vec<(usize, usize)> = pairs.iter().copied().filter(|&(a, b)| rho[(a, b)].norm() >= AMPLITUDE_PRUNE).collect();
    // (γ̄, ‖ρ⃗‖₁, Σ_{𝒞₁} amplitude, |𝒞₁|) per (a, b), summed.
    let parts: Vec<(C64, f64, C64, usize)> = live
        .par_iter()
        .map(|&(a, b)| {
            let mut bar = C64::new(0.0, 0.0);
            let mut l1 = 0.0;
            let mut osc = C64::new(0.0, 0.0);
            let mut count = 0;
            for &(i, j) in &live {
                let amp = rho[(a, b)] * rho[(i, j)] * trace_of_product(&tau[a][b], &tau[i][j]);
                if spec.is_zero_frequency([a, b, i, j], zero_tol) {
                    bar += amp;
                } else {
                    l1 += amp.norm();
                    osc += amp;
                    if amp.norm() > 0.0 {
                        count += 1;
                    }
                }
            }
            (bar, l1, osc, count)
        })
        .collect();
    let mut bar = C64::new(0.0, 0.0);
    let mut l1 = 0.0;
    let mut osc = C64::new(0.0, 0.0);
    let mut c1 = 0;
    for (b, l, o, c) in parts {
        bar += b;
        l1 += l;
        osc += o;
        c1 += c;
    }
    let red = crate::tensor::partial_trace(rho0, dims, &[crate::tensor::Subsystem::Logical])?;
    let gamma0 = crate::tensor::purity(&red);
    Ok(BoundReport {
        kappa: spec.kappa,
        gamma0,
        gamma_bar: bar.re,
        rho_l1: l1,
        bound: bar.re - l1,
        c1_size: c1,
        imag_residue: bar.im.abs(),
        consistency: (bar + osc).re - gamma0,
    })
}

/// `γ̄ − ‖ρ⃗‖₁`.
pub fn eternal_lower_bound(report: &BoundReport) -> f64 {
    report.gamma_bar - report.rho_l1
}

/// `γ_l(t)` rebuilt from the spectral sum; agrees with direct propagation.
pub fn purity_from_spectrum(rho0: &DensityMatrix, spec: &SpectralData, dims: TripartiteDims, t: f64) -> Result<f64> {
    let p = crate::dynamics::SpectralPropagator::from_eigen(spec.energies.clone(), spec.vecs.clone());
    let rho_t = p.evolve(rho0.matrix(), t);
    let red = crate::tensor::partial_trace(&rho_t, dims, &[crate::tensor::Subsystem::Logical])?;
    Ok(crate::tensor::purity(&red))
}

#[derive(Debug, Clone)]
pub struct AsymptoticState {
    pub state: CVec,
    /// Index of the `H_u` eigenvector (ascending eigenvalue) carried by the state.
    pub wall_index: usize,
    /// `⟨ψ̃|H₀|ψ̃⟩`.
    pub shift: f64,
}

/// Limits of the eigenstates of `H_κ` as `κ → ∞`, ordered as the large-`κ`
/// eigenvalues: by wall eigenvalue, then by energy shift.
#[derive(Debug, Clone)]
pub struct AsymptoticEigens {
    pub wall_energies: DVector<f64>,
    pub wall_vecs: CMat,
    pub states: Vec<AsymptoticState>,
    pub dims: TripartiteDims,
}

impl AsymptoticEigens {
    pub fn matrix(&self) -> CMat {
        let cols: Vec<CVec> = self.states.iter().map(|s| s.state.clone()).collect();
        CMat::from_columns(&cols)
    }

    /// Wall eigen-index whose vector matches `w` (fidelity > 1 − 1e-10).
    pub fn wall_index_of(&self, w: &SphereVector) -> Result<usize> {
        (0..self.wall_vecs.ncols())
            .find(|&b| self.wall_vecs.column(b).dotc(w.vector()).norm_sqr() > 1.0 - 1e-10)
            .ok_or_else(|| Error::Precondition("wall state is not an eigenvector of H_u".into()))
    }
}

/// Diagonalize `H₀` inside each eigenspace of `𝟙⊗H_u⊗𝟙`.
pub fn asymptotic_eigenstates(h0: &HermitianOp, h_u: &HermitianOp, dims: TripartiteDims) -> Result<AsymptoticEigens> {
    dims.check(h0)?;
    if h_u.dim() != dims.n_w {
        return Err(Error::Shape { expected: dims.n_w, got: h_u.dim() });
    }
    let (wall_energies, wall_vecs) = eigh(h_u);
    let gap = wall_energies.as_slice().windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    if gap <= 1e-9 {
        return Err(Error::Degenerate(format!("H_u has spectral gap {gap:.3e}")));
    }
    let (nl, ne) = (dims.n_l, dims.n_e);
    let mut states = Vec::with_capacity(dims.total());
    for b in 0..dims.n_w {
        let wb = wall_vecs.column(b).into_owned();
        // Isometry onto span{|a⟩|w_b⟩|c⟩}.
        let iso = CMat::from_fn(dims.total(), nl * ne, |row, col| {
            let (a, c) = (col / ne, col % ne);
            let (ra, rw, rc) = (row / (dims.n_w * ne), (row / ne) % dims.n_w, row % ne);
            if ra == a && rc == c {
                wb[rw]
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let block = HermitianOp::symmetrized(iso.adjoint() * h0.matrix() * &iso);
        let sd = SpectralData::of(&block, 0.0);
        for k in 0..nl * ne {
            let v = &iso * sd.vecs.column(k);
            states.push(AsymptoticState { state: v, wall_index: b, shift: sd.energies[k] });
        }
    }
    Ok(AsymptoticEigens { wall_energies, wall_vecs, states, dims })
}

/// Greedy one-to-one assignment maximizing `|⟨x_r|y_c⟩|²`; `result[r] = c`.
fn greedy_match(x: &CMat, y: &CMat) -> Vec<usize> {
    let n = x.ncols();
    let ov = (x.adjoint() * y).map(|z| z.norm_sqr());
    let mut entries: Vec<(usize, usize)> = (0..n).flat_map(|r| (0..n).map(move |c| (r, c))).collect();
    entries.sort_by(|&(r1, c1), &(r2, c2)| ov[(r2, c2)].total_cmp(&ov[(r1, c1)]).then((r1, c1).cmp(&(r2, c2))));
    let mut out = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for (r, c) in entries {
        if out[r] == usize::MAX && !used[c] {
            out[r] = c;
            used[c] = true;
        }
    }
    out
}

/// Map each eigen-index of `H_κ` to an asymptotic state by following the eigenvectors
/// from a large `κ` down to the analysis value on a geometric grid.
pub fn pair_with_asymptotic(
    h0: &HermitianOp,
    h_u: &HermitianOp,
    dims: TripartiteDims,
    asym: &AsymptoticEigens,
    kappa: f64,
) -> Result<Vec<usize>> {
    let gap = asym.wall_energies.as_slice().windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let scale = h0.norm().max(1.0);
    let k_hi = 1e4 * scale / gap;
    let start = kappa.max(k_hi);
    let mut spec = SpectralData::driven(h0, h_u, dims, start)?;
    let mut to_asym = greedy_match(&spec.vecs, &asym.matrix());
    let mut k = start;
    let k_floor = 1e-3 * scale / gap;
    while k > kappa {
        let next = if k * 0.8 <= kappa || k * 0.8 < k_floor { kappa } else { k * 0.8 };
        let nspec = SpectralData::driven(h0, h_u, dims, next)?;
        let m = greedy_match(&nspec.vecs, &spec.vecs);
        to_asym = m.iter().map(|&prev| to_asym[prev]).collect();
        spec = nspec;
        k = next;
    }
    Ok(to_asym)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SetTolerances {
    pub zero_tol: f64,
    pub swap_tol: f64,
}

impl Default for SetTolerances {
    fn default() -> Self {
        Self { zero_tol: 1e-9, swap_tol: 1e-9 }
    }
}

/// `𝒦₁`, `𝒦₁ ∩ 𝒦₂` and `𝒞₁ ∩ 𝒦₁ ∩ 𝒦₂` in eigen-indices of `H_κ` at the analysis `κ`.
#[derive(Debug, Clone)]
pub struct IndexSets {
    pub kappa: f64,
    pub wall_index: usize,
    /// Eigen-index → asymptotic state.
    pub pairing: Vec<usize>,
    /// Eigen-indices whose limit carries `ŵ`; `𝒦₁` is this set to the fourth power.
    pub sector: Vec<usize>,
    pub k1_k2: Vec<[usize; 4]>,
    /// Elements of `𝒞₁ ∩ 𝒦₁ ∩ 𝒦₂` with their `λ_abij`.
    pub c1_k1_k2: Vec<([usize; 4], f64)>,
    /// Eigenvalues at the analysis `κ`, by eigen-index.
    pub energies: DVector<f64>,
}

impl IndexSets {
    pub fn in_k1(&self, q: [usize; 4]) -> bool {
        q.iter().all(|i| self.sector.contains(i))
    }

    pub fn k1_size(&self) -> usize {
        self.sector.len().pow(4)
    }

    /// Members of `𝒦₁ ∩ 𝒦₂` other than the always-constant patterns `iiii`, `iijj`, `ijji`.
    pub fn nontrivial_k1_k2(&self) -> Vec<[usize; 4]> {
        self.k1_k2.iter().copied().filter(|&[a, b, i, j]| !((a == b && i == j) || (a == j && b == i))).collect()
    }
}

pub fn index_sets(
    h0: &HermitianOp,
    h_u: &HermitianOp,
    dims: TripartiteDims,
    asym: &AsymptoticEigens,
    w_hat: &SphereVector,
    kappa: f64,
    tol: &SetTolerances,
) -> Result<IndexSets> {
    let wall_index = asym.wall_index_of(w_hat)?;
    let spec = SpectralData::driven(h0, h_u, dims, kappa)?;
    let pairing = pair_with_asymptotic(h0, h_u, dims, asym, kappa)?;
    let sector: Vec<usize> = (0..spec.dim()).filter(|&e| asym.states[pairing[e]].wall_index == wall_index).collect();
    let tau = reduced_outer(&asym.matrix(), dims);
    let mut k1_k2 = Vec::new();
    let mut c1_k1_k2 = Vec::new();
    for &a in &sector {
        for &b in &sector {
            for &i in &sector {
                for &j in &sector {
                    let (pa, pb, pi, pj) = (pairing[a], pairing[b], pairing[i], pairing[j]);
                    let swap = trace_of_product(&tau[pa][pb], &tau[pi][pj]);
                    if swap.norm() > tol.swap_tol {
                        let q = [a, b, i, j];
                        k1_k2.push(q);
                        if !spec.is_zero_frequency(q, tol.zero_tol) {
                            c1_k1_k2.push((q, spec.lambda(q)));
                        }
                    }
                }
            }
        }
    }
    Ok(IndexSets { kappa, wall_index, pairing, sector, k1_k2, c1_k1_k2, energies: spec.energies })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Verdict {
    /// `𝒞₁ ∩ 𝒦₁ ∩ 𝒦₂ = ∅`: raising `κ` keeps the purity arbitrarily close to `γ₀`.
    Empty,
    NonEmpty {
        witness: [usize; 4],
        lambda: f64,
    },
}

impl Verdict {
    pub fn is_empty(&self) -> bool {
        matches!(self, Verdict::Empty)
    }
}

pub fn check_eternal_condition(sets: &IndexSets) -> Verdict {
    match sets.c1_k1_k2.first() {
        None => Verdict::Empty,
        Some(&(witness, lambda)) => Verdict::NonEmpty { witness, lambda },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CorollaryVerdict {
    Holds,
    /// `(λ[j,b] − λ[i,b]) − (λ[j,j'] − λ[i,j']) ≠ 0` for logical `i, j` and environment `b, j'`.
    Fails {
        i_l: usize,
        j_l: usize,
        b_e: usize,
        j_e: usize,
        mismatch: f64,
    },
    Inapplicable(String),
}

/// Product-structure shortcut: when every asymptotic state in the `ŵ` sector is
/// `|j_l⟩|ŵ⟩|j_e⟩` for bases `{|j_l⟩}`, `{|j_e⟩}`, the eternal condition reduces to
/// logical level spacings that do not depend on the environment label.
pub fn corollary_check(asym: &AsymptoticEigens, sets: &IndexSets, gap_tol: f64) -> CorollaryVerdict {
    let dims = asym.dims;
    let (nl, nw, ne) = (dims.n_l, dims.n_w, dims.n_e);
    let wb = asym.wall_vecs.column(sets.wall_index).into_owned();
    let mut logical: Vec<CVec> = Vec::new();
    let mut env: Vec<CVec> = Vec::new();
    let mut label = vec![vec![None; ne]; nl];
    for &e in &sets.sector {
        let st = &asym.states[sets.pairing[e]].state;
        // Coefficients M[a, c] = (⟨a|⟨ŵ|⟨c|) ψ̃.
        let m = CMat::from_fn(nl, ne, |a, c| (0..nw).map(|w| wb[w].conj() * st[(a * nw + w) * ne + c]).sum());
        let svd = m.clone().svd(true, true);
        let mut sv: Vec<(usize, f64)> = svd.singular_values.iter().copied().enumerate().collect();
        sv.sort_by(|x, y| y.1.total_cmp(&x.1));
        if sv.len() > 1 && sv[1].1 > 1e-8 {
            return CorollaryVerdict::Inapplicable(format!("asymptotic state {} is entangled across logical and environment", e + 1));
        }
        let k = sv[0].0;
        let u: CVec = svd.u.as_ref().expect("requested").column(k).into_owned();
        let v: CVec = svd.v_t.as_ref().expect("requested").row(k).adjoint();
        let find = |set: &mut Vec<CVec>, x: CVec| -> Option<usize> {
            for (idx, y) in set.iter().enumerate() {
                let ov = y.dotc(&x).norm();
                if ov > 1.0 - 1e-8 {
                    return Some(idx);
                }
                if ov > 1e-8 {
                    return None;
                }
            }
            set.push(x);
            Some(set.len() - 1)
        };
        let (Some(li), Some(ei)) = (find(&mut logical, u), find(&mut env, v.conjugate())) else {
            return CorollaryVerdict::Inapplicable("factor states do not form orthonormal bases".into());
        };
        if li >= nl || ei >= ne || label[li][ei].is_some() {
            return CorollaryVerdict::Inapplicable("factor states do not form product bases".into());
        }
        label[li][ei] = Some(e);
    }
    if logical.len() != nl || env.len() != ne {
        return CorollaryVerdict::Inapplicable("sector does not span logical ⊗ environment".into());
    }
    let lam = |l: usize, e: usize| sets.energies[label[l][e].expect("complete labeling")];
    for i in 0..nl {
        for j in 0..nl {
            for b in 0..ne {
                for jj in 0..ne {
                    let mismatch = (lam(j, b) - lam(i, b)) - (lam(j, jj) - lam(i, jj));
                    if mismatch.abs() > gap_tol {
                        return CorollaryVerdict::Fails { i_l: i, j_l: j, b_e: b, j_e: jj, mismatch };
                    }
                }
            }
        }
    }
    CorollaryVerdict::Holds
}

/// Bound, index sets and verdicts for `ρ_l ⊗ |ŵ⟩⟨ŵ| ⊗ ρ_e` at one `κ`.
#[derive(Debug, Clone)]
pub struct EternalAnalysis {
    pub report: BoundReport,
    pub sets: IndexSets,
    pub verdict: Verdict,
    pub corollary: CorollaryVerdict,
}

#[allow(clippy::too_many_arguments)]
pub fn analyze(
    h0: &HermitianOp,
    h_u: &HermitianOp,
    dims: TripartiteDims,
    rho_l: &DensityMatrix,
    w_hat: &SphereVector,
    rho_e: &DensityMatrix,
    kappa: f64,
    tol: &SetTolerances,
) -> Result<EternalAnalysis> {
    let rho0 = crate::dynamics::product_initial_state(rho_l, w_hat, rho_e);
    let spec = SpectralData::driven(h0, h_u, dims, kappa)?;
    let report = purity_decomposition(&rho0, &spec, dims, tol.zero_tol)?;
    let asym = asymptotic_eigenstates(h0, h_u, dims)?;
    let sets = index_sets(h0, h_u, dims, &asym, w_hat, kappa, tol)?;
    let verdict = check_eternal_condition(&sets);
    let corollary = corollary_check(&asym, &sets, tol.zero_tol.max(1e-9) * spec.range().max(1.0));
    Ok(EternalAnalysis { report, sets, verdict, corollary })
}
