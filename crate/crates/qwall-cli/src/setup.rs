//! Model, frame, wall and initial states shared by the subcommands.

use crate::config::{Config, ConfigError, ObjectiveChoice};
use crate::io::{parse_matrix, parse_vector};
use qwall::frame::{align_logical_axes, find_wall_frame, solution_at, FrameProblem, FrameSearchConfig, FrameSolution};
use qwall::manifold::{DescentConfig, SphereVector, Unitary};
use qwall::models::{self, ModelSpec};
use qwall::rng;
use qwall::tensor::{
    decompose_hamiltonian, haar_random_pure, thermal_state, CMat, CoeffTensor, DensityMatrix, HermitianOp, Subsystem, TripartiteBasis,
    TripartiteDims,
};
use qwall::wall::{find_wall_state, gamma1, gamma2, lw_operator, osd, Objective, OsdResult, WallObjectiveContext, WallSearchConfig};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(qwall::Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(s) => write!(f, "config error: {s}"),
            CliError::Numerical(e) => write!(f, "numerical failure: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Bad input surfaces as a config error; everything else is numerical.
impl From<qwall::Error> for CliError {
    fn from(e: qwall::Error) -> Self {
        use qwall::Error::*;
        match e {
            InvalidDimension(_)
            | Shape { .. }
            | NotHermitian(_)
            | InvalidState(_)
            | InvalidParameter(_)
            | UnsupportedLogicalDim(_)
            | Schedule(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn load_model(cfg: &Config) -> CliResult<ModelSpec> {
    let mut m = match (&cfg.model.id, &cfg.model.hamiltonian_file) {
        (Some(id), _) => models::by_id(id)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            let h = HermitianOp::new(parse_matrix(&text)?)?;
            let [l, w, e] = cfg.model.dims.expect("validated");
            let dims = TripartiteDims::new(l, w, e)?;
            if dims.total() != h.dim() {
                return Err(CliError::Config(format!("dims {l}x{w}x{e} do not match a {}-dimensional Hamiltonian", h.dim())));
            }
            ModelSpec { id: "custom".into(), dims, params: Default::default(), hamiltonian: h, control: None, pumping: vec![] }
        }
        (None, None) => unreachable!("validated"),
    };
    if !cfg.model.pumping {
        m.pumping.clear();
    }
    Ok(m)
}

pub fn coeffs(h: &HermitianOp, dims: TripartiteDims) -> CliResult<CoeffTensor> {
    Ok(decompose_hamiltonian(h, &TripartiteBasis::gellmann(dims)?)?)
}

/// A Hamiltonian seen in some frame, with its Lindblad operators rotated along.
pub struct Framed {
    pub label: &'static str,
    pub h: HermitianOp,
    pub ls: Vec<CMat>,
    pub u: Unitary,
    pub solution: FrameSolution,
}

pub fn frame_problem(cfg: &Config, m: &ModelSpec) -> CliResult<FrameProblem> {
    Ok(FrameProblem::new(m.hamiltonian.clone(), m.dims, cfg.frame.eta_reg)?)
}

pub fn identity_frame(cfg: &Config, m: &ModelSpec) -> CliResult<Framed> {
    let prob = frame_problem(cfg, m)?;
    let u = Unitary::identity(m.dims.system());
    let solution = solution_at(&prob, u.clone(), false, 0)?;
    Ok(Framed { label: "identity", h: m.hamiltonian.clone(), ls: m.pumping.clone(), u, solution })
}

/// Optimized frame, followed by the logical alignment for qubit logical factors when enabled.
pub fn optimized_frame(cfg: &Config, m: &ModelSpec, seed: u64) -> CliResult<Framed> {
    let prob = frame_problem(cfg, m)?;
    let search = FrameSearchConfig {
        descent: DescentConfig { g_min: cfg.frame.g_min, max_iterations: cfg.frame.max_iterations, ..Default::default() },
        restarts: cfg.frame.restarts,
    };
    let sol = find_wall_frame(&prob, &search, rng::derive_seed(seed, "frame"))?;
    let sol = if cfg.frame.align_logical && m.dims.n_l == 2 {
        let a = align_logical_axes(&sol.coeffs)?;
        let u = Unitary::new(sol.u_hat.matrix() * &a.w)?;
        solution_at(&prob, u, sol.stalled, sol.iterations)?
    } else {
        sol
    };
    let big = sol.u_hat.matrix().kronecker(&CMat::identity(m.dims.n_e, m.dims.n_e));
    let ls = m.pumping.iter().map(|l| big.adjoint() * l * &big).collect();
    Ok(Framed { label: "optimized", h: sol.rotated.clone(), ls, u: sol.u_hat.clone(), solution: sol })
}

pub fn chosen_frame(cfg: &Config, m: &ModelSpec, seed: u64) -> CliResult<Framed> {
    if cfg.frame.optimize {
        optimized_frame(cfg, m, seed)
    } else {
        identity_frame(cfg, m)
    }
}

pub fn env_state(g: &CoeffTensor, beta: f64) -> CliResult<DensityMatrix> {
    Ok(thermal_state(&g.local_part(Subsystem::Env), beta)?)
}

pub fn logical_state(cfg: &Config, n_l: usize, seed: u64) -> CliResult<DensityMatrix> {
    match &cfg.initial.logical {
        Some(v) => Ok(DensityMatrix::pure(&parse_vector(v, n_l, "initial.logical")?)?),
        None => Ok(haar_random_pure(n_l, &mut rng::stream(seed, "logical-state"))),
    }
}

pub struct WallChoice {
    pub w: SphereVector,
    /// `gamma1`, `gamma2` or `fixed`.
    pub method: &'static str,
    pub gamma1: f64,
    /// `None` when the OSD vanishes and `Γ₂` carries no information.
    pub gamma2: Option<f64>,
    pub osd: OsdResult,
    pub ctx: WallObjectiveContext,
    pub random_init: bool,
    pub stalled: bool,
}

pub fn choose_wall(cfg: &Config, framed: &Framed, dims: TripartiteDims, seed: u64) -> CliResult<WallChoice> {
    let g = coeffs(&framed.h, dims)?;
    let o = osd(&lw_operator(&g), dims.n_l, dims.n_w)?;
    let rho_e = env_state(&g, cfg.wall.beta)?;
    let ctx = WallObjectiveContext::new(g, &rho_e)?;
    let g2_usable = !o.is_zero();
    let (w, method, random_init, stalled) = if let Some(v) = &cfg.wall.vector {
        (SphereVector::new(parse_vector(v, dims.n_w, "wall.vector")?)?, "fixed", false, false)
    } else {
        let objective = match cfg.wall.objective {
            ObjectiveChoice::Gamma1 => Objective::Gamma1,
            ObjectiveChoice::Gamma2 if !g2_usable => {
                return Err(CliError::Numerical(qwall::Error::Precondition("Γ₂ requested but the OSD vanishes".into())))
            }
            ObjectiveChoice::Gamma2 => Objective::Gamma2,
            ObjectiveChoice::Auto if g2_usable => Objective::Gamma2,
            ObjectiveChoice::Auto => Objective::Gamma1,
        };
        let search = WallSearchConfig { extra_restarts: cfg.wall.extra_restarts, ..Default::default() };
        let r = find_wall_state(&ctx, Some(&o), objective, &search, rng::derive_seed(seed, "wall"))?;
        let method = if objective == Objective::Gamma1 { "gamma1" } else { "gamma2" };
        (r.w, method, r.random_init, r.stalled)
    };
    Ok(WallChoice { gamma1: gamma1(&w, &ctx), gamma2: g2_usable.then(|| gamma2(&w, &o)), w, method, osd: o, ctx, random_init, stalled })
}
