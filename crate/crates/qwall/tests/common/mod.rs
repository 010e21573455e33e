//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use qwall::dynamics::SpectralPropagator;
use qwall::manifold::SphereVector;
use qwall::rng;
use qwall::tensor::{
    c, gellmann_basis, haar_random_state, partial_trace, purity, trace_product, CMat, CVec, Subsystem, TripartiteDims, C64,
};
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub label: String,
    pub estimate: f64,
    pub target: f64,
    /// Standard error for statistical checks, zero for exact ones.
    pub stderr: f64,
    pub samples: usize,
    pub pass: bool,
}

impl OracleResult {
    /// Pass when within three standard errors; degenerate (zero-variance) entries must match to 1e-12.
    pub fn statistical(label: String, samples: &[f64], target: f64) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let stderr = (var / n).sqrt();
        let dev = (mean - target).abs();
        let pass = if stderr < 1e-14 { dev <= 1e-12 } else { dev <= 3.0 * stderr };
        Self { label, estimate: mean, target, stderr, samples: samples.len(), pass }
    }

    pub fn exact(label: String, estimate: f64, target: f64, tol: f64) -> Self {
        Self { label, estimate, target, stderr: 0.0, samples: 1, pass: (estimate - target).abs() <= tol }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Moment {
    /// `⟨ρ_jk⟩ = δ_jk / n`.
    First,
    /// `⟨ρ_jk ρ_cb⟩ = (δ_jk δ_bc + δ_jb δ_kc) / (n(n+1))`.
    Second,
    /// `⟨tr(σ_i ρ σ_a ρ)⟩ = δ_ia / (n(n+1))` over traceless Gell-Mann elements,
    /// zero across kinds.
    GellMann,
}

fn haar_samples(n: usize, samples: usize, seed: u64) -> Vec<CVec> {
    (0..samples).into_par_iter().map(|k| haar_random_state(n, &mut rng::stream(seed, &format!("haar-{k}")))).collect()
}

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// Kind of the `i`-th element in the ordering 𝟙, symmetric, antisymmetric, diagonal.
pub fn gellmann_kind(n: usize, i: usize) -> &'static str {
    let off = n * (n - 1) / 2;
    match i {
        0 => "identity",
        i if i <= off => "symmetric",
        i if i <= 2 * off => "antisymmetric",
        _ => "diagonal",
    }
}

/// Every entry of the requested moment, real and imaginary parts separately.
pub fn haar_moment_check(n: usize, moment: Moment, samples: usize, seed: u64) -> Vec<OracleResult> {
    assert!(samples >= 10_000);
    let psis = haar_samples(n, samples, seed);
    let rhos: Vec<CMat> = psis.iter().map(|p| p * p.adjoint()).collect();
    let mut out = Vec::new();
    let mut push = |label: String, vals: Vec<C64>, target: C64| {
        let re: Vec<f64> = vals.iter().map(|z| z.re).collect();
        let im: Vec<f64> = vals.iter().map(|z| z.im).collect();
        out.push(OracleResult::statistical(format!("{label} re"), &re, target.re));
        out.push(OracleResult::statistical(format!("{label} im"), &im, target.im));
    };
    let norm = (n * (n + 1)) as f64;
    match moment {
        Moment::First => {
            for j in 0..n {
                for k in 0..n {
                    let v = rhos.iter().map(|r| r[(j, k)]).collect();
                    push(format!("n={n} <rho_{j}{k}>"), v, c(delta(j, k) / n as f64, 0.0));
                }
            }
        }
        Moment::Second => {
            for j in 0..n {
                for k in 0..n {
                    for cc in 0..n {
                        for b in 0..n {
                            let v = rhos.iter().map(|r| r[(j, k)] * r[(cc, b)]).collect();
                            let t = (delta(j, k) * delta(b, cc) + delta(j, b) * delta(k, cc)) / norm;
                            push(format!("n={n} <rho_{j}{k} rho_{cc}{b}>"), v, c(t, 0.0));
                        }
                    }
                }
            }
        }
        Moment::GellMann => {
            let basis = gellmann_basis(n).expect("n >= 2");
            for i in 1..basis.len() {
                for a in 1..basis.len() {
                    let v = rhos.iter().map(|r| trace_product(&(basis.get(i) * r), &(basis.get(a) * r))).collect();
                    let label = format!("n={n} <tr(s{i} rho s{a} rho)> {}/{}", gellmann_kind(n, i), gellmann_kind(n, a));
                    push(label, v, c(delta(i, a) / norm, 0.0));
                }
            }
        }
    }
    out
}

/// Partial trace by explicit index summation.
pub fn naive_partial_trace(op: &CMat, dims: TripartiteDims, keep: &[Subsystem]) -> CMat {
    let d = [dims.n_l, dims.n_w, dims.n_e];
    let kept = [Subsystem::Logical, Subsystem::Wall, Subsystem::Env].map(|s| keep.contains(&s));
    let kd: usize = (0..3).filter(|&f| kept[f]).map(|f| d[f]).product();
    let mut out = CMat::zeros(kd, kd);
    let idx = |x: [usize; 3]| (x[0] * d[1] + x[1]) * d[2] + x[2];
    let kidx = |x: [usize; 3]| (0..3).filter(|&f| kept[f]).fold(0, |acc, f| acc * d[f] + x[f]);
    for a in 0..d[0] {
        for b in 0..d[1] {
            for cc in 0..d[2] {
                for a2 in 0..d[0] {
                    for b2 in 0..d[1] {
                        for c2 in 0..d[2] {
                            let (r, s) = ([a, b, cc], [a2, b2, c2]);
                            if (0..3).any(|f| !kept[f] && r[f] != s[f]) {
                                continue;
                            }
                            out[(kidx(r), kidx(s))] += op[(idx(r), idx(s))];
                        }
                    }
                }
            }
        }
    }
    out
}

/// `Σ_{i>0} Var_w(B_i)` with `B_i = tr_l((σ_i ⊗ 𝟙) H_lw)` built straight from the
/// logical–wall operator, without any Schmidt decomposition.
pub fn direct_variance_gamma2(h_lw: &CMat, n_l: usize, n_w: usize, w: &SphereVector) -> f64 {
    let basis = gellmann_basis(n_l).expect("n_l >= 2");
    let v = w.vector();
    let mut total = 0.0;
    for i in 1..basis.len() {
        let s = basis.get(i);
        let b = CMat::from_fn(n_w, n_w, |x, y| {
            let mut acc = c(0.0, 0.0);
            for p in 0..n_l {
                for q in 0..n_l {
                    acc += s[(q, p)] * h_lw[(p * n_w + x, q * n_w + y)];
                }
            }
            acc
        });
        let m = v.dotc(&(&b * v)).re;
        let m2 = v.dotc(&(&b * (&b * v))).re;
        total += m2 - m * m;
    }
    total
}

fn lindblad(h: &CMat, ls: &[CMat], rho: &CMat) -> CMat {
    let i = c(0.0, 1.0);
    let mut out = (h * rho - rho * h) * (-i);
    for l in ls {
        let ld = l.adjoint();
        let ldl = &ld * l;
        out += l * rho * &ld - (&ldl * rho + rho * &ldl) * c(0.5, 0.0);
    }
    out
}

/// Exact Haar average of `γ̈(0)` for `|ψ⟩⟨ψ| ⊗ |w⟩⟨w| ⊗ ρ_e`, from the second moment
/// `E[|ψ⟩⟨ψ|^{⊗2}] = (𝟙 + SWAP)/(n(n+1))`: with `B(X) = tr_we ℒ(X⊗σ)` and
/// `A(X) = tr_we ℒ²(X⊗σ)`, `E[γ̈] = Σ_{pq}(Bil(E_pp, E_qq) + Bil(E_pq, E_qp))/(n(n+1))`,
/// `Bil(X, Y) = 2 tr(A(X) Y + B(X) B(Y))`.
pub fn exact_haar_accel(w: &SphereVector, rho_e: &CMat, h: &CMat, ls: &[CMat], dims: TripartiteDims) -> f64 {
    let n = dims.n_l;
    let sigma = w.projector().kronecker(rho_e);
    let unit = |p: usize, q: usize| {
        let mut e = CMat::zeros(n, n);
        e[(p, q)] = c(1.0, 0.0);
        e
    };
    let keep = [Subsystem::Logical];
    let mut a_ops = vec![vec![CMat::zeros(n, n); n]; n];
    let mut b_ops = vec![vec![CMat::zeros(n, n); n]; n];
    for p in 0..n {
        for q in 0..n {
            let x = unit(p, q).kronecker(&sigma);
            let l1 = lindblad(h, ls, &x);
            let l2 = lindblad(h, ls, &l1);
            b_ops[p][q] = naive_partial_trace(&l1, dims, &keep);
            a_ops[p][q] = naive_partial_trace(&l2, dims, &keep);
        }
    }
    let bil = |p: usize, q: usize, r: usize, s: usize| {
        2.0 * (trace_product(&a_ops[p][q], &unit(r, s)) + trace_product(&b_ops[p][q], &b_ops[r][s]))
    };
    let mut total = c(0.0, 0.0);
    for p in 0..n {
        for q in 0..n {
            total += bil(p, p, q, q) + bil(p, q, q, p);
        }
    }
    total.re / (n * (n + 1)) as f64
}

/// Second central difference of the logical purity under `e^{−iHt}` at `t = 0`.
pub fn fd_purity_accel(rho0: &CMat, h: &CMat, dims: TripartiteDims, dt: f64) -> f64 {
    let p = SpectralPropagator::new(h);
    let gam = |t: f64| purity(&naive_partial_trace(&p.evolve(rho0, t), dims, &[Subsystem::Logical]));
    (gam(dt) - 2.0 * gam(0.0) + gam(-dt)) / (dt * dt)
}

/// First central difference of the logical purity at `t = 0`.
pub fn fd_purity_rate(rho0: &CMat, h: &CMat, dims: TripartiteDims, dt: f64) -> f64 {
    let p = SpectralPropagator::new(h);
    let gam = |t: f64| purity(&naive_partial_trace(&p.evolve(rho0, t), dims, &[Subsystem::Logical]));
    (gam(dt) - gam(-dt)) / (2.0 * dt)
}

/// Smallest logical purity under `e^{−iHt}` over the sample times.
pub fn time_sampled_min(rho0: &CMat, h: &CMat, dims: TripartiteDims, times: &[f64]) -> f64 {
    let p = SpectralPropagator::new(h);
    let eig = p.to_eigenbasis(rho0);
    times
        .iter()
        .map(|&t| {
            let r = partial_trace(&p.evolve_from_eigenbasis(&eig, t), dims, &[Subsystem::Logical]).expect("dims match");
            purity(&r)
        })
        .fold(f64::INFINITY, f64::min)
}
