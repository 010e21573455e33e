//! Riemannian steepest descent on SU(n) and on the complex unit sphere.
//!
//! Both manifolds take the gradient itself in `retract` and step downhill:
//! `retract(x, g, ε)` follows the geodesic with initial velocity `−g` for time `ε`.

use crate::error::{Error, Result};
use crate::tensor::{anti_hermitian_residual, c, expm_anti_hermitian, CMat, CVec, C64};
use rand::Rng;
use rand_distr::StandardNormal;

/// Element of SU(n).
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary(CMat);

impl Unitary {
    /// Checks `U†U = 𝟙` to 1e-10, then removes the phase `det(U)^{1/n}`.
    pub fn new(m: CMat) -> Result<Self> {
        let n = m.nrows();
        if !m.is_square() {
            return Err(Error::Shape { expected: n, got: m.ncols() });
        }
        let err = (m.adjoint() * &m - CMat::identity(n, n)).norm();
        if err > 1e-10 {
            return Err(Error::Precondition(format!("matrix is not unitary (residual {err:.3e})")));
        }
        let det = m.determinant();
        let phase = C64::from_polar(1.0, -det.arg() / n as f64);
        Ok(Self(m * phase))
    }

    pub fn identity(n: usize) -> Self {
        Self(CMat::identity(n, n))
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self::new(crate::tensor::random_unitary(n, rng)).expect("QR output is unitary")
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

/// Unit vector in ℂⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereVector(CVec);

impl SphereVector {
    pub fn new(v: CVec) -> Result<Self> {
        let n = v.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidParameter("cannot normalize a zero vector".into()));
        }
        Ok(Self(v / c(n, 0.0)))
    }

    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = CVec::zeros(n);
        v[i] = c(1.0, 0.0);
        Self(v)
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self(crate::tensor::haar_random_state(n, rng))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn vector(&self) -> &CVec {
        &self.0
    }

    pub fn projector(&self) -> CMat {
        &self.0 * self.0.adjoint()
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &SphereVector) -> f64 {
        self.0.dotc(&other.0).norm_sqr()
    }

    /// Same ray with the first entry of magnitude > 1e-12 made real and positive.
    pub fn canonical_phase(&self) -> SphereVector {
        match self.0.iter().find(|z| z.norm() > 1e-12) {
            Some(z) => Self(&self.0 * (z.conj() / z.norm())),
            None => self.clone(),
        }
    }
}

/// `exp(−Ωε) U` with `Ω = tangent · U†`.
pub fn su_retract(u: &Unitary, tangent: &CMat, eps: f64) -> Result<Unitary> {
    let omega = tangent * u.0.adjoint();
    let scale = omega.norm().max(1.0);
    let r = anti_hermitian_residual(&omega);
    if r > 1e-8 * scale {
        return Err(Error::NotTangent(r));
    }
    Ok(su_step(u, &omega, eps))
}

fn su_step(u: &Unitary, omega: &CMat, eps: f64) -> Unitary {
    if eps == 0.0 {
        return u.clone();
    }
    Unitary(expm_anti_hermitian(omega, -eps) * &u.0)
}

/// `exp((Q X ⟨w| − |w⟩ X† Q) ε) |w⟩` with `Q = 𝟙 − |w⟩⟨w|/2` and `X = −grad`.
pub fn sphere_retract(w: &SphereVector, grad: &CVec, eps: f64) -> SphereVector {
    if eps == 0.0 {
        return w.clone();
    }
    let x = -grad;
    let q = sphere_q(&w.0);
    let qx = &q * &x;
    let gen = &qx * w.0.adjoint() - &w.0 * qx.adjoint();
    let v = expm_anti_hermitian(&gen, eps) * &w.0;
    let n = v.norm();
    SphereVector(v / c(n, 0.0))
}

fn sphere_q(w: &CVec) -> CMat {
    CMat::identity(w.len(), w.len()) - w * w.adjoint() * c(0.5, 0.0)
}

/// Manifold interface used by [`descend`] and [`grad_check`].
pub trait Manifold {
    type Point: Clone;
    type Tangent: Clone;

    fn inner(&self, x: &Self::Point, a: &Self::Tangent, b: &Self::Tangent) -> f64;
    fn retract(&self, x: &Self::Point, grad: &Self::Tangent, eps: f64) -> Self::Point;
    fn random_tangent(&self, x: &Self::Point, rng: &mut dyn rand::RngCore) -> Self::Tangent;
}

/// SU(n) with metric `Re tr(A†B)`; tangents are `ΩU` with Ω anti-Hermitian traceless.
#[derive(Debug, Clone, Copy, Default)]
pub struct SpecialUnitary;

impl Manifold for SpecialUnitary {
    type Point = Unitary;
    type Tangent = CMat;

    fn inner(&self, _x: &Unitary, a: &CMat, b: &CMat) -> f64 {
        a.iter().zip(b.iter()).map(|(p, q)| (p.conj() * q).re).sum()
    }

    fn retract(&self, x: &Unitary, grad: &CMat, eps: f64) -> Unitary {
        let omega = grad * x.0.adjoint();
        su_step(x, &omega, eps)
    }

    fn random_tangent(&self, x: &Unitary, rng: &mut dyn rand::RngCore) -> CMat {
        let n = x.dim();
        let g = CMat::from_fn(n, n, |_, _| c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)));
        let mut omega = (&g - g.adjoint()) * c(0.5, 0.0);
        let tr = omega.trace() / c(n as f64, 0.0);
        for i in 0..n {
            omega[(i, i)] -= tr;
        }
        omega * &x.0
    }
}

/// Complex unit sphere with metric `Re x†(𝟙 − ½|w⟩⟨w|) y`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSphere;

impl ComplexSphere {
    /// Riemannian gradient from the Euclidean one `G = 2 ∂f/∂w̄`: `G − |w⟩ G†|w⟩`.
    pub fn riemannian_grad(w: &SphereVector, euclid: &CVec) -> CVec {
        let s = euclid.dotc(&w.0);
        euclid - &w.0 * s
    }
}

impl Manifold for ComplexSphere {
    type Point = SphereVector;
    type Tangent = CVec;

    fn inner(&self, w: &SphereVector, a: &CVec, b: &CVec) -> f64 {
        let wa = w.0.dotc(a);
        let wb = w.0.dotc(b);
        (a.dotc(b) - wa.conj() * wb * 0.5).re
    }

    fn retract(&self, w: &SphereVector, grad: &CVec, eps: f64) -> SphereVector {
        sphere_retract(w, grad, eps)
    }

    fn random_tangent(&self, w: &SphereVector, rng: &mut dyn rand::RngCore) -> CVec {
        let v = CVec::from_fn(w.dim(), |_, _| c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)));
        let s = w.0.dotc(&v).re;
        v - &w.0 * c(s, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DescentConfig {
    pub initial_step: f64,
    pub max_iterations: usize,
    /// Stop once the squared Riemannian gradient norm drops to this value.
    pub g_min: f64,
    pub beta: f64,
    pub armijo_c: f64,
    pub max_contractions: usize,
}

impl Default for DescentConfig {
    fn default() -> Self {
        Self { initial_step: 0.1, max_iterations: 5000, g_min: 1e-10, beta: 0.5, armijo_c: 1e-4, max_contractions: 60 }
    }
}

impl DescentConfig {
    pub fn validate(&self) -> Result<()> {
        let ok =
            self.initial_step > 0.0 && self.g_min > 0.0 && self.beta > 0.0 && self.beta < 1.0 && self.armijo_c > 0.0 && self.armijo_c < 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("descent config out of range: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    GradientNorm,
    MaxIterations,
    /// No Armijo step found; the trace holds the best point reached.
    Stalled,
}

#[derive(Debug, Clone)]
pub struct DescentTrace<P> {
    pub costs: Vec<f64>,
    pub grad_norms: Vec<f64>,
    pub steps: Vec<f64>,
    pub point: P,
    pub cost: f64,
    pub termination: Termination,
}

impl<P> DescentTrace<P> {
    pub fn iterations(&self) -> usize {
        self.steps.len()
    }

    pub fn into_result(self) -> Result<Self> {
        match self.termination {
            Termination::Stalled => Err(Error::Stalled { iterations: self.iterations(), cost: self.cost }),
            _ => Ok(self),
        }
    }
}

/// Steepest descent with Armijo backtracking.
///
/// Each iteration starts from `max(initial_step, 2 · last accepted step)` capped at
/// `16 · initial_step`, then contracts by `beta` until the Armijo condition holds.
pub fn descend<M: Manifold>(
    m: &M,
    cost: impl Fn(&M::Point) -> f64,
    grad: impl Fn(&M::Point) -> M::Tangent,
    x0: M::Point,
    cfg: &DescentConfig,
) -> DescentTrace<M::Point> {
    let mut x = x0;
    let mut f = cost(&x);
    let mut trace = DescentTrace {
        costs: vec![f],
        grad_norms: Vec::new(),
        steps: Vec::new(),
        point: x.clone(),
        cost: f,
        termination: Termination::MaxIterations,
    };
    let mut last = cfg.initial_step;
    for _ in 0..cfg.max_iterations {
        let g = grad(&x);
        let gn2 = m.inner(&x, &g, &g);
        trace.grad_norms.push(gn2.sqrt());
        if gn2 <= cfg.g_min {
            trace.termination = Termination::GradientNorm;
            break;
        }
        let mut eps = (2.0 * last).clamp(cfg.initial_step, 16.0 * cfg.initial_step);
        let mut accepted = None;
        for _ in 0..cfg.max_contractions {
            let y = m.retract(&x, &g, eps);
            let fy = cost(&y);
            if fy <= f - cfg.armijo_c * eps * gn2 {
                accepted = Some((y, fy));
                break;
            }
            eps *= cfg.beta;
        }
        match accepted {
            Some((y, fy)) => {
                x = y;
                f = fy;
                last = eps;
                trace.steps.push(eps);
                trace.costs.push(f);
            }
            None => {
                trace.termination = Termination::Stalled;
                break;
            }
        }
    }
    trace.point = x;
    trace.cost = f;
    trace
}

/// Largest relative mismatch between `⟨grad, v⟩_x` and central differences of the cost
/// along the retraction curve, over `n_dirs` random tangents `v` plus `v = grad`.
pub fn grad_check<M: Manifold>(
    m: &M,
    cost: impl Fn(&M::Point) -> f64,
    grad: impl Fn(&M::Point) -> M::Tangent,
    x: &M::Point,
    h: f64,
    n_dirs: usize,
    rng: &mut dyn rand::RngCore,
) -> f64 {
    let g = grad(x);
    let mut dirs: Vec<M::Tangent> = (0..n_dirs).map(|_| m.random_tangent(x, rng)).collect();
    dirs.push(g.clone());
    let mut worst: f64 = 0.0;
    for v in &dirs {
        let analytic = m.inner(x, &g, v);
        // retract(x, v, −h) moves along +v
        let fd = (cost(&m.retract(x, v, -h)) - cost(&m.retract(x, v, h))) / (2.0 * h);
        let denom = analytic.abs().max(fd.abs()).max(1e-8);
        worst = worst.max((analytic - fd).abs() / denom);
    }
    worst
}
