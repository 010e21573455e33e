//! Open-system time evolution of ℋ_l ⊗ ℋ_w ⊗ ℋ_e and the three wall-stabilization
//! schemes: repeated projective measurement of the wall, engineered dissipation
//! towards `|ŵ⟩`, and strong driving of the wall.

use crate::error::{Error, Result};
use crate::manifold::SphereVector;
use crate::tensor::{
    eigh, embed_wall, identity, kron3, partial_trace, purity, CMat, DensityMatrix, HermitianOp, Subsystem, TripartiteDims, C64,
};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// How the wall is stabilized during the evolution.
#[derive(Debug, Clone)]
pub enum ControlScheme {
    None,
    /// Non-selective measurement of `𝟙⊗|ŵ⟩⟨ŵ|⊗𝟙`, `f` events per unit time.
    Measurement {
        f: f64,
        w_hat: SphereVector,
    },
    /// Wall dissipators `√η 𝟙⊗|ŵ⟩⟨ŵ⊥_i|⊗𝟙` added to the Lindblad operators.
    Dissipation {
        eta: f64,
        w_hat: SphereVector,
    },
    /// `H + κ 𝟙⊗H_u⊗𝟙`.
    Driving {
        kappa: f64,
        h_u: HermitianOp,
    },
}

impl ControlScheme {
    pub fn label(&self) -> String {
        match self {
            ControlScheme::None => "none".into(),
            ControlScheme::Measurement { f, .. } => format!("measurement(f={f})"),
            ControlScheme::Dissipation { eta, .. } => format!("dissipation(eta={eta})"),
            ControlScheme::Driving { kappa, .. } => format!("driving(kappa={kappa})"),
        }
    }

    fn validate(&self, dims: TripartiteDims) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        match self {
            ControlScheme::None => Ok(()),
            ControlScheme::Measurement { f, w_hat } => {
                if !(f.is_finite() && *f > 0.0) {
                    return bad(format!("measurement frequency must be positive, got {f}"));
                }
                check_wall_dim(w_hat.dim(), dims)
            }
            ControlScheme::Dissipation { eta, w_hat } => {
                if !(eta.is_finite() && *eta >= 0.0) {
                    return bad(format!("dissipation rate must be non-negative, got {eta}"));
                }
                check_wall_dim(w_hat.dim(), dims)
            }
            ControlScheme::Driving { kappa, h_u } => {
                if !kappa.is_finite() {
                    return bad(format!("drive amplitude must be finite, got {kappa}"));
                }
                check_wall_dim(h_u.dim(), dims)
            }
        }
    }
}

fn check_wall_dim(n: usize, dims: TripartiteDims) -> Result<()> {
    if n != dims.n_w {
        return Err(Error::Shape { expected: dims.n_w, got: n });
    }
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub scheme: String,
    pub seed: Option<u64>,
    pub model: Option<String>,
}

/// Logical purity `γ_l(t)` on a time grid, with the reduced logical states.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub purity: Vec<f64>,
    /// `ρ_l(t)` at every grid time. Its trace equals the trace of the full state.
    pub states: Vec<CMat>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn min_purity(&self) -> f64 {
        self.purity.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest `|tr ρ(t) − 1|` along the trajectory.
    pub fn max_trace_error(&self) -> f64 {
        self.states.iter().map(|r| (r.trace() - C64::new(1.0, 0.0)).norm()).fold(0.0, f64::max)
    }

    pub fn with_meta(mut self, seed: Option<u64>, model: Option<&str>) -> Self {
        self.meta.seed = seed;
        self.meta.model = model.map(str::to_owned);
        self
    }

    /// `t,gamma_l` with 12 significant digits per value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,gamma_l\n");
        for (t, g) in self.times.iter().zip(&self.purity) {
            let _ = writeln!(out, "{},{}", fmt_sig(*t), fmt_sig(*g));
        }
        out
    }
}

/// Fixed-point decimal with 12 significant digits.
pub fn fmt_sig(x: f64) -> String {
    const DIGITS: i32 = 12;
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return format!("{:.*}", (DIGITS - 1) as usize, 0.0);
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (DIGITS - 1 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // Rounding can carry into a new leading digit (9.99… → 10.0…); trim one place.
    let sig = s.chars().filter(|c| c.is_ascii_digit()).skip_while(|&c| c == '0').count();
    if sig as i32 > DIGITS && decimals > 0 {
        format!("{x:.*}", decimals - 1)
    } else {
        s
    }
}

/// `points` equally spaced times covering `[0, t_end]` inclusive.
pub fn time_grid(t_end: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::InvalidParameter(format!("time grid needs t_end > 0 and at least two points, got ({t_end}, {points})")));
    }
    let dt = t_end / (points - 1) as f64;
    Ok((0..points).map(|k| if k + 1 == points { t_end } else { k as f64 * dt }).collect())
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::InvalidParameter("empty time grid".into()));
    }
    if t_grid[0] < 0.0 || !t_grid.iter().all(|t| t.is_finite()) {
        return Err(Error::InvalidParameter("time grid must be finite and start at t ≥ 0".into()));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("time grid must be strictly increasing".into()));
    }
    Ok(())
}

/// `−i[H, ρ] + Σ_m (L_m ρ L_m† − ½{L_m†L_m, ρ})`.
pub fn lindblad_rhs(rho: &CMat, h: &CMat, ls: &[CMat]) -> CMat {
    Lindbladian::new(h, ls).apply(rho)
}

/// Generator in the form `−i(H_eff ρ − ρ H_eff†) + Σ L ρ L†`, `H_eff = H − (i/2) Σ L†L`.
#[derive(Debug, Clone)]
pub struct Lindbladian {
    h_eff: CMat,
    h_eff_dag: CMat,
    ls: Vec<(CMat, CMat)>,
}

impl Lindbladian {
    pub fn new(h: &CMat, ls: &[CMat]) -> Self {
        let mut h_eff = h.clone();
        let half_i = C64::new(0.0, 0.5);
        for l in ls {
            h_eff -= l.adjoint() * l * half_i;
        }
        let h_eff_dag = h_eff.adjoint();
        Self { h_eff, h_eff_dag, ls: ls.iter().map(|l| (l.clone(), l.adjoint())).collect() }
    }

    pub fn apply(&self, rho: &CMat) -> CMat {
        let mi = C64::new(0.0, -1.0);
        let mut out = (&self.h_eff * rho - rho * &self.h_eff_dag) * mi;
        for (l, ld) in &self.ls {
            out += l * rho * ld;
        }
        out
    }
}

/// Embedded-RK(4)5 tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    pub atol: f64,
    pub rtol: f64,
    pub initial_step: f64,
    pub min_step: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { atol: 1e-10, rtol: 1e-8, initial_step: 1e-3, min_step: 1e-13 }
    }
}

// Dormand–Prince 5(4) tableau; the generator is autonomous so the c-nodes are unused.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn lin(terms: &[(f64, &CMat)], base: &CMat, h: f64) -> CMat {
    let mut out = base.clone();
    for (a, k) in terms {
        if *a != 0.0 {
            out.zip_apply(*k, |o, kv| *o += kv * (a * h));
        }
    }
    out
}

/// Adaptive integration of `ρ̇ = ℒ(ρ)`; `step` carries the step size between calls.
fn integrate(gen: &Lindbladian, rho: &CMat, duration: f64, step: &mut f64, cfg: &IntegratorConfig) -> Result<CMat> {
    let mut y = rho.clone();
    if duration <= 0.0 {
        return Ok(y);
    }
    let mut t = 0.0;
    let mut h = step.min(duration).max(cfg.min_step);
    let mut k1 = gen.apply(&y);
    while t < duration {
        let last = t + h >= duration * (1.0 - 1e-15);
        if last {
            h = duration - t;
        }
        let k2 = gen.apply(&lin(&[(A21, &k1)], &y, h));
        let k3 = gen.apply(&lin(&[(A31, &k1), (A32, &k2)], &y, h));
        let k4 = gen.apply(&lin(&[(A41, &k1), (A42, &k2), (A43, &k3)], &y, h));
        let k5 = gen.apply(&lin(&[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], &y, h));
        let k6 = gen.apply(&lin(&[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], &y, h));
        let y_new = lin(&[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], &y, h);
        let k7 = gen.apply(&y_new);
        let zero = CMat::zeros(y.nrows(), y.ncols());
        let err = lin(&[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)], &zero, h);
        let mut ratio = 0.0_f64;
        for ((e, a), b) in err.iter().zip(y.iter()).zip(y_new.iter()) {
            let scale = cfg.atol + cfg.rtol * a.norm().max(b.norm());
            ratio = ratio.max(e.norm() / scale);
        }
        if ratio <= 1.0 {
            t = if last { duration } else { t + h };
            y = y_new;
            k1 = k7;
            let grow = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
            if !last {
                *step = h;
            }
            h *= grow;
        } else {
            h *= (0.9 * ratio.powf(-0.2)).clamp(0.1, 0.9);
            if h < cfg.min_step {
                return Err(Error::StepUnderflow(h));
            }
        }
    }
    Ok(y)
}

/// Exact propagation `ρ ↦ e^{−iHt} ρ e^{iHt}` through the eigenbasis of `H`.
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    energies: DVector<f64>,
    vecs: CMat,
}

impl SpectralPropagator {
    pub fn new(h: &CMat) -> Self {
        let (energies, vecs) = eigh(h);
        Self { energies, vecs }
    }

    pub fn from_eigen(energies: DVector<f64>, vecs: CMat) -> Self {
        Self { energies, vecs }
    }

    pub fn to_eigenbasis(&self, rho: &CMat) -> CMat {
        self.vecs.adjoint() * rho * &self.vecs
    }

    /// Evolve an eigenbasis-represented state by `t` and return it in the original basis.
    pub fn evolve_from_eigenbasis(&self, rho_eig: &CMat, t: f64) -> CMat {
        let n = self.energies.len();
        let mut m = rho_eig.clone();
        for r in 0..n {
            for c in 0..n {
                let ph = -(self.energies[r] - self.energies[c]) * t;
                m[(r, c)] *= C64::new(ph.cos(), ph.sin());
            }
        }
        &self.vecs * m * self.vecs.adjoint()
    }

    pub fn evolve(&self, rho: &CMat, t: f64) -> CMat {
        self.evolve_from_eigenbasis(&self.to_eigenbasis(rho), t)
    }

    /// `e^{−iHt}`.
    pub fn unitary(&self, t: f64) -> CMat {
        let phases = self.energies.map(|e| C64::new((-e * t).cos(), (-e * t).sin()));
        let mut scaled = self.vecs.clone();
        for (j, p) in phases.iter().enumerate() {
            for r in 0..scaled.nrows() {
                scaled[(r, j)] *= p;
            }
        }
        scaled * self.vecs.adjoint()
    }
}

enum Propagator {
    Spectral(SpectralPropagator),
    Open(Lindbladian, IntegratorConfig),
}

impl Propagator {
    fn new(h: &CMat, ls: &[CMat], cfg: &IntegratorConfig) -> Self {
        if ls.iter().all(|l| l.iter().all(|z| *z == C64::new(0.0, 0.0))) {
            Propagator::Spectral(SpectralPropagator::new(h))
        } else {
            Propagator::Open(Lindbladian::new(h, ls), *cfg)
        }
    }

    fn advance(&self, rho: &CMat, dt: f64, step: &mut f64) -> Result<CMat> {
        match self {
            Propagator::Spectral(p) => Ok(p.evolve(rho, dt)),
            Propagator::Open(g, cfg) => integrate(g, rho, dt, step, cfg),
        }
    }
}

fn logical_state(rho: &CMat, dims: TripartiteDims) -> Result<CMat> {
    partial_trace(rho, dims, &[Subsystem::Logical])
}

fn check_state(rho0: &DensityMatrix, h: &CMat, ls: &[CMat], dims: TripartiteDims) -> Result<()> {
    dims.check(rho0)?;
    dims.check(h)?;
    for l in ls {
        dims.check(l)?;
    }
    Ok(())
}

pub(crate) fn finish_trajectory(times: &[f64], states: Vec<CMat>, scheme: String) -> Result<Trajectory> {
    let mut pur = Vec::with_capacity(states.len());
    for s in &states {
        let g = purity(s);
        if !g.is_finite() {
            return Err(Error::InvalidState("non-finite purity along trajectory".into()));
        }
        pur.push(g);
    }
    Ok(Trajectory { times: times.to_vec(), purity: pur, states, meta: TrajectoryMeta { scheme, ..Default::default() } })
}

/// Evolve `ρ₀` (at `t = 0`) under `H`, the Lindblad operators `ls` and a wall control scheme.
pub fn evolve(
    rho0: &DensityMatrix,
    h: &HermitianOp,
    ls: &[CMat],
    dims: TripartiteDims,
    t_grid: &[f64],
    scheme: &ControlScheme,
) -> Result<Trajectory> {
    evolve_with(rho0, h, ls, dims, t_grid, scheme, &IntegratorConfig::default())
}

pub fn evolve_with(
    rho0: &DensityMatrix,
    h: &HermitianOp,
    ls: &[CMat],
    dims: TripartiteDims,
    t_grid: &[f64],
    scheme: &ControlScheme,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    check_grid(t_grid)?;
    check_state(rho0, h, ls, dims)?;
    scheme.validate(dims)?;
    let mut ham = h.matrix().clone();
    let mut all_ls: Vec<CMat> = ls.to_vec();
    match scheme {
        ControlScheme::None => {}
        ControlScheme::Measurement { f, w_hat } => {
            let pi = kron3(&identity(dims.n_l), &w_hat.projector(), &identity(dims.n_e));
            let mut traj = measured(rho0, &ham, ls, dims, &pi, *f, t_grid, cfg)?;
            traj.meta.scheme = scheme.label();
            return Ok(traj);
        }
        ControlScheme::Dissipation { eta, w_hat } => {
            if *eta > 0.0 {
                let s = C64::new(eta.sqrt(), 0.0);
                all_ls.extend(wall_dissipators(w_hat, dims).into_iter().map(|l| l * s));
            }
        }
        ControlScheme::Driving { kappa, h_u } => {
            ham += embed_wall(dims, h_u.matrix()) * C64::new(*kappa, 0.0);
        }
    }
    let prop = Propagator::new(&ham, &all_ls, cfg);
    let mut states = Vec::with_capacity(t_grid.len());
    match &prop {
        Propagator::Spectral(p) => {
            let eig0 = p.to_eigenbasis(rho0);
            for &t in t_grid {
                states.push(logical_state(&p.evolve_from_eigenbasis(&eig0, t), dims)?);
            }
        }
        Propagator::Open(..) => {
            let mut rho = rho0.matrix().clone();
            let mut t_prev = 0.0;
            let mut step = cfg.initial_step;
            for &t in t_grid {
                rho = prop.advance(&rho, t - t_prev, &mut step)?;
                t_prev = t;
                states.push(logical_state(&rho, dims)?);
            }
        }
    }
    finish_trajectory(t_grid, states, scheme.label())
}

fn check_projector(pi: &CMat) -> Result<()> {
    let r = (pi * pi - pi).norm().max((pi - pi.adjoint()).norm());
    if r > 1e-12 {
        return Err(Error::Precondition(format!("operator is not an orthogonal projector (residual {r:.3e})")));
    }
    Ok(())
}

/// `ρ ↦ ΠρΠ + Π⊥ρΠ⊥`.
pub fn measure(rho: &CMat, pi: &CMat) -> CMat {
    let pr = pi * rho;
    let rp = rho * pi;
    let prp = &pr * pi;
    rho - pr - rp + prp * C64::new(2.0, 0.0)
}

/// Unitary (or Lindblad) evolution interrupted every `1/f` by the non-selective
/// measurement `{Π, Π⊥}`.
pub fn evolve_measured(
    rho0: &DensityMatrix,
    h: &HermitianOp,
    ls: &[CMat],
    dims: TripartiteDims,
    pi_hat: &CMat,
    f: f64,
    t_grid: &[f64],
) -> Result<Trajectory> {
    check_grid(t_grid)?;
    check_state(rho0, h, ls, dims)?;
    if !(f.is_finite() && f > 0.0) {
        return Err(Error::InvalidParameter(format!("measurement frequency must be positive, got {f}")));
    }
    let mut traj = measured(rho0, h, ls, dims, pi_hat, f, t_grid, &IntegratorConfig::default())?;
    traj.meta.scheme = format!("measurement(f={f})");
    Ok(traj)
}

#[allow(clippy::too_many_arguments)]
fn measured(
    rho0: &DensityMatrix,
    h: &CMat,
    ls: &[CMat],
    dims: TripartiteDims,
    pi: &CMat,
    f: f64,
    t_grid: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    dims.check(pi)?;
    check_projector(pi)?;
    let prop = Propagator::new(h, ls, cfg);
    let period = 1.0 / f;
    let t_end = *t_grid.last().expect("grid checked non-empty");
    let mut rho = rho0.matrix().clone();
    let mut t_now = 0.0;
    let mut step = cfg.initial_step;
    let mut next_k = 1_u64;
    let mut states = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        // Measurement epochs at k/f, computed from k to avoid drift.
        while (next_k as f64) * period <= t * (1.0 + 1e-14) && (next_k as f64) * period <= t_end * (1.0 + 1e-14) {
            let tm = next_k as f64 * period;
            rho = measure(&prop.advance(&rho, tm - t_now, &mut step)?, pi);
            t_now = tm;
            next_k += 1;
        }
        rho = prop.advance(&rho, t - t_now, &mut step)?;
        t_now = t;
        states.push(logical_state(&rho, dims)?);
    }
    finish_trajectory(t_grid, states, format!("measurement(f={f})"))
}

/// `ΠHΠ + Π⊥HΠ⊥`.
pub fn zeno_hamiltonian(h: &HermitianOp, pi: &CMat) -> Result<HermitianOp> {
    if pi.shape() != h.shape() {
        return Err(Error::Shape { expected: h.nrows(), got: pi.nrows() });
    }
    check_projector(pi)?;
    let perp = identity(pi.nrows()) - pi;
    Ok(HermitianOp::symmetrized(pi * h.matrix() * pi + &perp * h.matrix() * &perp))
}

/// `𝟙_l ⊗ |ŵ⟩⟨ŵ⊥_i| ⊗ 𝟙_e` for an orthonormal basis `{ŵ⊥_i}` of the complement of `ŵ`.
pub fn wall_dissipators(w_hat: &SphereVector, dims: TripartiteDims) -> Vec<CMat> {
    let n = w_hat.dim();
    let (_, vecs) = eigh(&(identity(n) - w_hat.projector()));
    let w = w_hat.vector();
    (1..n)
        .map(|j| {
            let perp = SphereVector::new(vecs.column(j).into_owned()).expect("eigenvectors are normalized").canonical_phase();
            let op = w * perp.vector().adjoint();
            kron3(&identity(dims.n_l), &op, &identity(dims.n_e))
        })
        .collect()
}

/// Nondegenerate wall drive with `ŵ` as its top eigenvector: `|ŵ⟩⟨ŵ| − Σ_j j |ŵ⊥_j⟩⟨ŵ⊥_j|`.
/// For a qubit wall this is `|ŵ⟩⟨ŵ| − |ŵ⊥⟩⟨ŵ⊥|`.
pub fn drive_hamiltonian(w_hat: &SphereVector) -> HermitianOp {
    let n = w_hat.dim();
    let (_, vecs) = eigh(&(identity(n) - w_hat.projector()));
    let mut m = w_hat.projector();
    for j in 1..n {
        let v = vecs.column(j);
        m -= v * v.adjoint() * C64::new(j as f64, 0.0);
    }
    HermitianOp::symmetrized(m)
}

/// First time the purity drops to `threshold`, linearly interpolated between grid points.
pub fn time_to_threshold(traj: &Trajectory, threshold: f64) -> Option<f64> {
    let k = traj.purity.iter().position(|&g| g <= threshold)?;
    if k == 0 {
        return Some(traj.times[0]);
    }
    let (g0, g1) = (traj.purity[k - 1], traj.purity[k]);
    let (t0, t1) = (traj.times[k - 1], traj.times[k]);
    Some(t0 + (g0 - threshold) / (g0 - g1) * (t1 - t0))
}

/// `ρ_l ⊗ |w⟩⟨w| ⊗ ρ_e`.
pub fn product_initial_state(rho_l: &DensityMatrix, w: &SphereVector, rho_e: &DensityMatrix) -> DensityMatrix {
    let w_state = DensityMatrix::pure(w.vector()).expect("unit vector gives a valid state");
    DensityMatrix::product(rho_l, &w_state, rho_e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{c, Axis};

    fn ket(v: &[C64]) -> SphereVector {
        SphereVector::new(DVector::from_column_slice(v)).unwrap()
    }

    #[test]
    fn rhs_examples() {
        let z = CMat::zeros(2, 2);
        let plus = ket(&[c(1.0, 0.0), c(1.0, 0.0)].map(|x| x / 2f64.sqrt())).projector();
        assert_eq!(lindblad_rhs(&plus, &z, &[]).norm(), 0.0);
        let sz = Axis::Z.pauli();
        let r = lindblad_rhs(&plus, &sz, &[]);
        assert!(r[(0, 0)].norm() < 1e-15 && r[(1, 1)].norm() < 1e-15);
        assert!((r[(0, 1)] - c(0.0, -1.0)).norm() < 1e-15);
        let mut lower = CMat::zeros(2, 2);
        lower[(0, 1)] = c(1.0, 0.0);
        let mut one = CMat::zeros(2, 2);
        one[(1, 1)] = c(1.0, 0.0);
        let r = lindblad_rhs(&one, &z, &[lower]);
        assert_eq!(r[(0, 0)], c(1.0, 0.0));
        assert_eq!(r[(1, 1)], c(-1.0, 0.0));
    }

    #[test]
    fn dopri_matches_closed_form_damping() {
        let mut lower = CMat::zeros(2, 2);
        lower[(0, 1)] = c(1.0, 0.0);
        let gen = Lindbladian::new(&CMat::zeros(2, 2), &[lower]);
        let mut one = CMat::zeros(2, 2);
        one[(1, 1)] = c(1.0, 0.0);
        let mut step = 1e-3;
        let out = integrate(&gen, &one, 2.0, &mut step, &IntegratorConfig::default()).unwrap();
        assert!((out[(1, 1)].re - (-2.0f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn sig_digit_formatting() {
        assert_eq!(fmt_sig(1.0), "1.00000000000");
        assert_eq!(fmt_sig(12.5), "12.5000000000");
        assert_eq!(fmt_sig(0.97), "0.970000000000");
        assert_eq!(fmt_sig(0.0), "0.00000000000");
        assert_eq!(fmt_sig(9.999999999999), "10.0000000000");
        assert_eq!(fmt_sig(-0.5), "-0.500000000000");
    }

    #[test]
    fn zeno_examples() {
        let sx = HermitianOp::new(Axis::X.pauli()).unwrap();
        let mut p0 = CMat::zeros(2, 2);
        p0[(0, 0)] = c(1.0, 0.0);
        assert!(zeno_hamiltonian(&sx, &p0).unwrap().norm() < 1e-15);
        assert!((zeno_hamiltonian(&sx, &identity(2)).unwrap().matrix() - sx.matrix()).norm() < 1e-15);
        assert!(zeno_hamiltonian(&sx, &(p0.clone() * c(0.5, 0.0))).is_err());
    }

    #[test]
    fn dissipator_for_minus_state() {
        let dims = TripartiteDims::new(1, 2, 1).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let minus = ket(&[c(s, 0.0), c(-s, 0.0)]);
        let ls = wall_dissipators(&minus, dims);
        assert_eq!(ls.len(), 1);
        let expect = minus.vector() * ket(&[c(s, 0.0), c(s, 0.0)]).vector().adjoint();
        assert!((&ls[0] - expect).norm() < 1e-14);
    }

    #[test]
    fn threshold_interpolates() {
        let times: Vec<f64> = (0..11).map(|k| k as f64 * 0.1).collect();
        let traj =
            Trajectory { purity: times.iter().map(|t| 1.0 - t / 10.0).collect(), states: vec![], times, meta: TrajectoryMeta::default() };
        assert!((time_to_threshold(&traj, 0.97).unwrap() - 0.3).abs() < 1e-12);
        assert_eq!(time_to_threshold(&traj, 0.5), None);
    }

    #[test]
    fn grid_checks() {
        assert_eq!(time_grid(1.0, 3).unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(time_grid(0.0, 3).is_err());
        assert!(check_grid(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn spectral_unitary_matches_propagator() {
        let h = Axis::X.pauli() + Axis::Z.pauli() * c(0.3, 0.0);
        let p = SpectralPropagator::new(&h);
        assert!((p.unitary(0.7) - crate::tensor::propagator(&h, 0.7)).norm() < 1e-13);
    }
}
