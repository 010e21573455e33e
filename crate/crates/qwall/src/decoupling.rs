//! Dynamical decoupling on the logical factor: universal `XZXZ` and selective `XX`
//! cycles, with instantaneous or finite rectangular pulses, optionally on top of a
//! constant wall drive.
//!
//! A finite pulse adds `κ_p P ⊗ 𝟙` for a time `τ` with `κ_p τ = π/2`, so it
//! implements `e^{−iπP/2} = −iP`, a π flip up to phase. Pulses act transversally
//! (`X^{⊗m}`, `Z^{⊗m}`) when the logical factor holds `m` qubits.

use crate::dynamics::{finish_trajectory, SpectralPropagator, Trajectory};
use crate::error::{Error, Result};
use crate::tensor::{embed_wall, identity, partial_trace, Axis, CMat, DensityMatrix, HermitianOp, Subsystem, TripartiteDims, C64};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DdMode {
    Universal,
    Selective,
}

impl DdMode {
    pub fn pulses_per_cycle(self) -> usize {
        match self {
            DdMode::Universal => 4,
            DdMode::Selective => 2,
        }
    }

    /// Pulse axes in time order within one cycle.
    fn axes(self) -> &'static [Axis] {
        match self {
            DdMode::Universal => &[Axis::X, Axis::Z, Axis::X, Axis::Z],
            DdMode::Selective => &[Axis::X, Axis::X],
        }
    }
}

#[derive(Debug, Clone)]
pub struct WallDrive {
    pub kappa: f64,
    pub h_u: HermitianOp,
}

#[derive(Debug, Clone)]
pub struct DdConfig {
    pub mode: DdMode,
    /// Cycles per unit time; the cycle length is `T = 1/f`.
    pub f: f64,
    /// Fraction of each cycle with a pulse on.
    pub duty: f64,
    /// Instantaneous pulses instead of finite ones.
    pub ideal: bool,
    pub wall_drive: Option<WallDrive>,
    /// Keep the wall drive on while a pulse is applied.
    pub drive_during_pulses: bool,
}

impl DdConfig {
    pub fn new(mode: DdMode, f: f64) -> Self {
        Self { mode, f, duty: 0.2, ideal: false, wall_drive: None, drive_during_pulses: true }
    }

    pub fn period(&self) -> f64 {
        1.0 / self.f
    }

    /// `τ = duty·T / pulses`.
    pub fn pulse_duration(&self) -> f64 {
        self.duty * self.period() / self.mode.pulses_per_cycle() as f64
    }

    /// `κ_p = π / (2τ)`.
    pub fn pulse_amplitude(&self) -> f64 {
        FRAC_PI_2 / self.pulse_duration()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f.is_finite() && self.f > 0.0) {
            return Err(Error::InvalidParameter(format!("cycle frequency must be positive, got {}", self.f)));
        }
        if !self.ideal && !(self.duty > 0.0 && self.duty < 1.0) {
            return Err(Error::Schedule(format!("duty cycle {} leaves no room for free evolution between pulses", self.duty)));
        }
        if let Some(d) = &self.wall_drive {
            if !d.kappa.is_finite() {
                return Err(Error::InvalidParameter("wall drive amplitude must be finite".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Control {
    Free,
    /// Finite pulse `κ_p P` along the axis.
    Pulse(Axis),
    /// Zero-duration exact flip.
    Kick(Axis),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub duration: f64,
    pub control: Control,
}

/// One cycle of piecewise-constant control; repeats with period `period`.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSchedule {
    pub segments: Vec<Segment>,
    pub period: f64,
    pub amplitude: f64,
}

/// Rectangular pulses ending at every `T/4` (universal) or `T/2` (selective) boundary.
pub fn build_pulse_schedule(cfg: &DdConfig) -> Result<PulseSchedule> {
    cfg.validate()?;
    let t = cfg.period();
    let slot = t / cfg.mode.pulses_per_cycle() as f64;
    let mut segments = Vec::new();
    if cfg.ideal {
        for &a in cfg.mode.axes() {
            segments.push(Segment { duration: slot, control: Control::Free });
            segments.push(Segment { duration: 0.0, control: Control::Kick(a) });
        }
        return Ok(PulseSchedule { segments, period: t, amplitude: f64::INFINITY });
    }
    let tau = cfg.pulse_duration();
    let free = slot - tau;
    if free <= 0.0 {
        return Err(Error::Schedule(format!("pulse duration {tau} does not fit in slot {slot}")));
    }
    for &a in cfg.mode.axes() {
        segments.push(Segment { duration: free, control: Control::Free });
        segments.push(Segment { duration: tau, control: Control::Pulse(a) });
    }
    Ok(PulseSchedule { segments, period: t, amplitude: cfg.pulse_amplitude() })
}

fn logical_qubits(dims: TripartiteDims) -> Result<usize> {
    let n = dims.n_l;
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::UnsupportedLogicalDim(n));
    }
    Ok(n.trailing_zeros() as usize)
}

/// `P^{⊗m} ⊗ 𝟙_w ⊗ 𝟙_e`.
pub fn logical_pulse(axis: Axis, dims: TripartiteDims) -> Result<CMat> {
    let m = logical_qubits(dims)?;
    let p = axis.pauli();
    let mut op = p.clone();
    for _ in 1..m {
        op = op.kronecker(&p);
    }
    Ok(op.kronecker(&identity(dims.n_w * dims.n_e)))
}

/// Instantaneous-pulse cycle `Z e^{−iHT/4} X e^{−iHT/4} Z e^{−iHT/4} X e^{−iHT/4}`
/// (universal) or `X e^{−iHT/2} X e^{−iHT/2}` (selective).
pub fn dd_cycle_ideal(h: &HermitianOp, period: f64, mode: DdMode, dims: TripartiteDims) -> Result<CMat> {
    dims.check(h)?;
    let prop = SpectralPropagator::new(h);
    let free = prop.unitary(period / mode.pulses_per_cycle() as f64);
    let mut u = identity(h.nrows());
    for &a in mode.axes() {
        u = logical_pulse(a, dims)? * &free * u;
    }
    Ok(u)
}

/// Exact propagators for the (at most three) distinct segment Hamiltonians.
struct SegmentPropagators {
    free: SpectralPropagator,
    pulse_x: Option<SpectralPropagator>,
    pulse_z: Option<SpectralPropagator>,
    kick_x: CMat,
    kick_z: CMat,
}

impl SegmentPropagators {
    fn new(h: &HermitianOp, cfg: &DdConfig, sched: &PulseSchedule, dims: TripartiteDims) -> Result<Self> {
        let mut base = h.matrix().clone();
        let mut drive = CMat::zeros(base.nrows(), base.ncols());
        if let Some(d) = &cfg.wall_drive {
            drive = embed_wall(dims, d.h_u.matrix()) * C64::new(d.kappa, 0.0);
        }
        let kick_x = logical_pulse(Axis::X, dims)?;
        let kick_z = logical_pulse(Axis::Z, dims)?;
        base += &drive;
        let pulse = |p: &CMat| {
            let mut m = &base + p * C64::new(sched.amplitude, 0.0);
            if !cfg.drive_during_pulses {
                m -= &drive;
            }
            SpectralPropagator::new(&m)
        };
        let uses = |a: Axis| sched.segments.iter().any(|s| s.control == Control::Pulse(a));
        Ok(Self {
            pulse_x: uses(Axis::X).then(|| pulse(&kick_x)),
            pulse_z: uses(Axis::Z).then(|| pulse(&kick_z)),
            free: SpectralPropagator::new(&base),
            kick_x,
            kick_z,
        })
    }

    fn segment(&self, seg: &Segment, dt: f64) -> CMat {
        match seg.control {
            Control::Free => self.free.unitary(dt),
            Control::Pulse(Axis::Z) => self.pulse_z.as_ref().expect("z pulses prepared").unitary(dt),
            Control::Pulse(_) => self.pulse_x.as_ref().expect("x pulses prepared").unitary(dt),
            Control::Kick(Axis::Z) => self.kick_z.clone(),
            Control::Kick(_) => self.kick_x.clone(),
        }
    }

    /// Propagator from the start of a cycle to offset `s ∈ [0, T]`.
    fn partial(&self, sched: &PulseSchedule, s: f64) -> CMat {
        let mut u = identity(self.kick_x.nrows());
        let mut start = 0.0;
        for seg in &sched.segments {
            if seg.duration == 0.0 {
                // Kicks at the end of a slot belong to the slot.
                if start <= s + 1e-15 * sched.period {
                    u = self.segment(seg, 0.0) * u;
                }
                continue;
            }
            let end = start + seg.duration;
            if s >= end {
                u = self.segment(seg, seg.duration) * u;
            } else {
                if s > start {
                    u = self.segment(seg, s - start) * u;
                }
                break;
            }
            start = end;
        }
        u
    }
}

/// Single-cycle propagator of the schedule for `H` (wall drive included when configured).
pub fn dd_cycle(h: &HermitianOp, cfg: &DdConfig, dims: TripartiteDims) -> Result<CMat> {
    dims.check(h)?;
    let sched = build_pulse_schedule(cfg)?;
    let props = SegmentPropagators::new(h, cfg, &sched, dims)?;
    Ok(props.partial(&sched, sched.period))
}

/// Evolution under the repeated cycle, sampled on `t_grid`.
pub fn evolve_dd(rho0: &DensityMatrix, h: &HermitianOp, dims: TripartiteDims, cfg: &DdConfig, t_grid: &[f64]) -> Result<Trajectory> {
    dims.check(rho0)?;
    dims.check(h)?;
    if t_grid.is_empty() || t_grid[0] < 0.0 || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("time grid must be non-empty, non-negative and increasing".into()));
    }
    let sched = build_pulse_schedule(cfg)?;
    let props = SegmentPropagators::new(h, cfg, &sched, dims)?;
    let cycle = props.partial(&sched, sched.period);
    let cycle_dag = cycle.adjoint();
    let period = sched.period;
    let mut rho = rho0.matrix().clone();
    let mut done = 0_u64;
    let mut states = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        // Offsets within 1e-9 of a cycle boundary are snapped onto it.
        let x = t / period;
        let mut k = x.floor();
        if x - k > 1.0 - 1e-9 {
            k += 1.0;
        }
        let k = k as u64;
        while done < k {
            rho = &cycle * &rho * &cycle_dag;
            done += 1;
        }
        let s = (t - k as f64 * period).max(0.0);
        let out = if s < 1e-12 * period {
            rho.clone()
        } else {
            let u = props.partial(&sched, s);
            &u * &rho * u.adjoint()
        };
        states.push(partial_trace(&out, dims, &[Subsystem::Logical])?);
    }
    let label = format!(
        "dd({:?},f={},{}{})",
        cfg.mode,
        cfg.f,
        if cfg.ideal { "ideal".to_string() } else { format!("duty={}", cfg.duty) },
        cfg.wall_drive.as_ref().map(|d| format!(",drive={}", d.kappa)).unwrap_or_default()
    )
    .to_lowercase();
    finish_trajectory(t_grid, states, label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::c;

    fn dims(n_l: usize) -> TripartiteDims {
        TripartiteDims::new(n_l, 2, 2).unwrap()
    }

    /// `‖A − e^{iφ}B‖` minimized over the global phase.
    fn phase_gap(a: &CMat, b: &CMat) -> f64 {
        let ov = (b.adjoint() * a).trace();
        let ph = if ov.norm() > 0.0 { ov / ov.norm() } else { c(1.0, 0.0) };
        (a - b * ph).norm()
    }

    #[test]
    fn zero_hamiltonian_cycles() {
        let d = dims(2);
        let h = HermitianOp::zeros(8);
        let u = dd_cycle_ideal(&h, 0.1, DdMode::Universal, d).unwrap();
        assert!(phase_gap(&u, &identity(8)) < 1e-12);
        let u = dd_cycle_ideal(&h, 0.1, DdMode::Selective, d).unwrap();
        assert!((u - identity(8)).norm() < 1e-12);
    }

    #[test]
    fn rejects_odd_logical_dimension() {
        let d = TripartiteDims::new(3, 2, 1).unwrap();
        assert_eq!(dd_cycle_ideal(&HermitianOp::zeros(6), 1.0, DdMode::Selective, d), Err(Error::UnsupportedLogicalDim(3)));
    }

    #[test]
    fn schedule_layout() {
        let cfg = DdConfig::new(DdMode::Universal, 10.0);
        let s = build_pulse_schedule(&cfg).unwrap();
        let total: f64 = s.segments.iter().map(|x| x.duration).sum();
        assert!((total - 0.1).abs() < 1e-15);
        assert!((cfg.pulse_duration() - 0.005).abs() < 1e-15);
        assert!((s.amplitude * cfg.pulse_duration() - FRAC_PI_2).abs() < 1e-12);
        let sel = build_pulse_schedule(&DdConfig::new(DdMode::Selective, 10.0)).unwrap();
        assert!(sel.segments.iter().all(|x| !matches!(x.control, Control::Pulse(Axis::Z))));
        let bad = DdConfig { duty: 1.0, ..DdConfig::new(DdMode::Selective, 10.0) };
        assert!(matches!(build_pulse_schedule(&bad), Err(Error::Schedule(_))));
    }

    #[test]
    fn finite_pulse_is_a_flip() {
        let d = dims(2);
        let x = logical_pulse(Axis::X, d).unwrap();
        let u = SpectralPropagator::new(&(x.clone() * c(100.0, 0.0))).unitary(FRAC_PI_2 / 100.0);
        assert!(phase_gap(&u, &x) < 1e-12);
    }

    #[test]
    fn ideal_schedule_matches_closed_form_cycle() {
        let d = dims(2);
        let mut r = crate::rng::stream(5, "dd");
        let h = HermitianOp::symmetrized({
            let a = crate::tensor::random_unitary(8, &mut r);
            let diag = CMat::from_diagonal(&nalgebra::DVector::from_fn(8, |i, _| c(i as f64 * 0.3 - 1.0, 0.0)));
            &a * diag * a.adjoint()
        });
        for mode in [DdMode::Universal, DdMode::Selective] {
            let cfg = DdConfig { ideal: true, ..DdConfig::new(mode, 4.0) };
            let a = dd_cycle(&h, &cfg, d).unwrap();
            let b = dd_cycle_ideal(&h, 0.25, mode, d).unwrap();
            assert!((a - b).norm() < 1e-12);
        }
    }
}
