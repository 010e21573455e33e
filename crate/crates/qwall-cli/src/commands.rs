use crate::config::{Config, DdCompareConfig, DdScheme, DriveSource, FrameChoice, SchemeKind};
use crate::io::{format_matrix, parse_vector, Output};
use crate::plot::{line_chart, Series};
use crate::setup::*;
use qwall::decoupling::{evolve_dd, DdConfig, DdMode, WallDrive};
use qwall::dynamics::{drive_hamiltonian, evolve, fmt_sig, product_initial_state, time_grid, time_to_threshold, ControlScheme, Trajectory};
use qwall::eternal::{self, CorollaryVerdict, SetTolerances, SpectralData, Verdict};
use qwall::manifold::SphereVector;
use qwall::rng;
use qwall::tensor::eigh;
use qwall::wall::{gamma1, gamma2};
use rayon::prelude::*;
use std::fmt::Write as _;

fn kv(lines: &[(&str, String)]) -> String {
    lines.iter().fold(String::new(), |mut s, (k, v)| {
        let _ = writeln!(s, "{k}={v}");
        s
    })
}

fn gain_tag(g: f64) -> String {
    format!("{g}").replace('.', "p")
}

pub fn find_frame(cfg: &Config, seed: u64, out: &mut Output) -> CliResult<()> {
    let m = load_model(cfg)?;
    let id = out.time("identity", || identity_frame(cfg, &m))?;
    let opt = out.time("optimize", || optimized_frame(cfg, &m, seed))?;
    out.write("u_hat.txt", &format_matrix(opt.u.matrix()))?;
    out.write("h_rotated.txt", &format_matrix(opt.h.matrix()))?;
    let (a, b) = (&id.solution, &opt.solution);
    out.write(
        "frame_summary.txt",
        &kv(&[
            ("model", m.id.clone()),
            ("eta_reg", fmt_sig(cfg.frame.eta_reg)),
            ("j_identity", fmt_sig(a.j)),
            ("j_reg_identity", fmt_sig(a.j_reg)),
            ("lw_norm_sq_identity", fmt_sig(a.lw_norm_sq)),
            ("j", fmt_sig(b.j)),
            ("j_reg", fmt_sig(b.j_reg)),
            ("lw_norm_sq", fmt_sig(b.lw_norm_sq)),
            ("iterations", b.iterations.to_string()),
            ("stalled", b.stalled.to_string()),
        ]),
    )?;
    Ok(())
}

pub fn find_wall(cfg: &Config, seed: u64, out: &mut Output) -> CliResult<()> {
    let m = load_model(cfg)?;
    let framed = out.time("frame", || chosen_frame(cfg, &m, seed))?;
    let wc = out.time("wall", || choose_wall(cfg, &framed, m.dims, seed))?;
    let mut osd_csv = String::from("index,s\n");
    for (i, s) in wc.osd.s.iter().enumerate() {
        let _ = writeln!(osd_csv, "{},{}", i + 1, fmt_sig(*s));
    }
    out.write("osd.csv", &osd_csv)?;
    let mut state = String::from("index,re,im\n");
    for (i, z) in wc.w.vector().iter().enumerate() {
        let _ = writeln!(state, "{i},{},{}", fmt_sig(z.re), fmt_sig(z.im));
    }
    out.write("wall_state.csv", &state)?;
    let g2 = |x: Option<f64>| x.map_or("unusable".to_string(), fmt_sig);
    let mut cmp = String::from("state,gamma1,gamma2\n");
    let _ = writeln!(cmp, "chosen,{},{}", fmt_sig(wc.gamma1), g2(wc.gamma2));
    let mut r = rng::stream(seed, "wall-compare");
    for k in 0..cfg.wall.compare_random {
        let w = SphereVector::random(m.dims.n_w, &mut r);
        let v2 = (!wc.osd.is_zero()).then(|| gamma2(&w, &wc.osd));
        let _ = writeln!(cmp, "random_{},{},{}", k + 1, fmt_sig(gamma1(&w, &wc.ctx)), g2(v2));
    }
    out.write("wall_compare.csv", &cmp)?;
    let note = if wc.gamma2.is_none() { "OSD vanishes in this frame; Γ₂ carries no information and Γ₁ is used" } else { "" };
    out.write(
        "wall_summary.txt",
        &kv(&[
            ("model", m.id.clone()),
            ("frame", framed.label.to_string()),
            ("objective", wc.method.to_string()),
            ("gamma1", fmt_sig(wc.gamma1)),
            ("gamma2", g2(wc.gamma2)),
            ("random_init", wc.random_init.to_string()),
            ("stalled", wc.stalled.to_string()),
            ("note", note.to_string()),
        ]),
    )?;
    Ok(())
}

pub fn simulate(cfg: &Config, seed: u64, out: &mut Output) -> CliResult<()> {
    let sim = cfg.simulate.as_ref().ok_or_else(|| CliError::Config("missing [simulate] section".into()))?;
    let m = load_model(cfg)?;
    let framed = out.time("frame", || chosen_frame(cfg, &m, seed))?;
    let wc = out.time("wall", || choose_wall(cfg, &framed, m.dims, seed))?;
    let rho_e = env_state(&coeffs(&framed.h, m.dims)?, cfg.wall.beta)?;
    let rho0 = product_initial_state(&logical_state(cfg, m.dims.n_l, seed)?, &wc.w, &rho_e);
    let grid = time_grid(sim.t_end, sim.points)?;
    let h_u = match (sim.drive, &m.control) {
        (DriveSource::Model, Some(c)) if !cfg.frame.optimize => c.clone(),
        _ => drive_hamiltonian(&wc.w),
    };
    let jobs: Vec<(SchemeKind, f64)> = sim
        .sweep
        .iter()
        .flat_map(|s| {
            let gains = if s.scheme == SchemeKind::None { vec![0.0] } else { s.gains.clone() };
            gains.into_iter().map(move |g| (s.scheme, g))
        })
        .collect();
    let runs: Vec<CliResult<Trajectory>> = out.time("simulate", || {
        jobs.par_iter()
            .map(|&(kind, g)| {
                let scheme = match kind {
                    SchemeKind::None => ControlScheme::None,
                    SchemeKind::Measurement => ControlScheme::Measurement { f: g, w_hat: wc.w.clone() },
                    SchemeKind::Dissipation => ControlScheme::Dissipation { eta: g, w_hat: wc.w.clone() },
                    SchemeKind::Driving => ControlScheme::Driving { kappa: g, h_u: h_u.clone() },
                };
                Ok(evolve(&rho0, &framed.h, &framed.ls, m.dims, &grid, &scheme)?.with_meta(Some(seed), Some(&m.id)))
            })
            .collect()
    });
    let col = format!("time_to_{:03}", (sim.threshold * 100.0).round() as i64);
    let mut by_scheme: Vec<(SchemeKind, Vec<(f64, Trajectory)>)> = Vec::new();
    for (&(kind, g), run) in jobs.iter().zip(runs) {
        let tr = run?;
        let name = if kind == SchemeKind::None { "traj_none.csv".to_string() } else { format!("traj_{}_{}.csv", kind.name(), gain_tag(g)) };
        out.write(&name, &tr.to_csv())?;
        match by_scheme.iter_mut().find(|(k, _)| *k == kind) {
            Some((_, v)) => v.push((g, tr)),
            None => by_scheme.push((kind, vec![(g, tr)])),
        }
    }
    for (kind, runs) in &by_scheme {
        let mut csv = format!("gain,{col}\n");
        for (g, tr) in runs {
            let t = time_to_threshold(tr, sim.threshold).map_or("none".to_string(), fmt_sig);
            let _ = writeln!(csv, "{},{t}", fmt_sig(*g));
        }
        out.write(&format!("threshold_{}.csv", kind.name()), &csv)?;
        if out.plots {
            let series: Vec<Series> = runs
                .iter()
                .map(|(g, tr)| Series {
                    label: if *kind == SchemeKind::None { "none".into() } else { format!("gain {g}") },
                    x: tr.times.clone(),
                    y: tr.purity.clone(),
                })
                .collect();
            line_chart(
                &out.path(&format!("plot_{}.svg", kind.name())),
                &format!("{} ({})", kind.name(), m.id),
                "t",
                "logical purity",
                &series,
            );
        }
    }
    Ok(())
}

fn dd_run(
    scheme: DdScheme,
    d: &DdCompareConfig,
    framed: &Framed,
    dims: qwall::tensor::TripartiteDims,
    rho0: &qwall::tensor::DensityMatrix,
    w: &SphereVector,
    grid: &[f64],
) -> CliResult<Trajectory> {
    let base = |mode| DdConfig { duty: d.duty, ideal: d.ideal, ..DdConfig::new(mode, d.f) };
    let combo = |mode| DdConfig { wall_drive: Some(WallDrive { kappa: d.combo_kappa, h_u: drive_hamiltonian(w) }), ..base(mode) };
    Ok(match scheme {
        DdScheme::Universal => evolve_dd(rho0, &framed.h, dims, &base(DdMode::Universal), grid)?,
        DdScheme::Selective => evolve_dd(rho0, &framed.h, dims, &base(DdMode::Selective), grid)?,
        DdScheme::UniversalDrive => evolve_dd(rho0, &framed.h, dims, &combo(DdMode::Universal), grid)?,
        DdScheme::SelectiveDrive => evolve_dd(rho0, &framed.h, dims, &combo(DdMode::Selective), grid)?,
        DdScheme::WallDrive => {
            evolve(rho0, &framed.h, &[], dims, grid, &ControlScheme::Driving { kappa: d.drive_kappa, h_u: drive_hamiltonian(w) })?
        }
    })
}

pub fn dd_compare(cfg: &Config, seed: u64, out: &mut Output) -> CliResult<()> {
    let d = cfg.dd.clone().unwrap_or_default();
    let m = load_model(cfg)?;
    let grid = time_grid(d.t_end, d.points)?;
    let rho_l = logical_state(cfg, m.dims.n_l, seed)?;
    let mut summary = String::from("frame,scheme,min_gamma\n");
    for &fc in &d.frames {
        let framed = out.time(&format!("frame_{}", fc.name()), || match fc {
            FrameChoice::Identity => identity_frame(cfg, &m),
            FrameChoice::Optimized => optimized_frame(cfg, &m, seed),
        })?;
        let wc = choose_wall(cfg, &framed, m.dims, seed)?;
        let rho_e = env_state(&coeffs(&framed.h, m.dims)?, cfg.wall.beta)?;
        let rho0 = product_initial_state(&rho_l, &wc.w, &rho_e);
        let runs: Vec<CliResult<Trajectory>> = out.time(&format!("dd_{}", fc.name()), || {
            d.schemes.par_iter().map(|&s| dd_run(s, &d, &framed, m.dims, &rho0, &wc.w, &grid)).collect()
        });
        let runs: Vec<Trajectory> = runs.into_iter().collect::<CliResult<_>>()?;
        let mut csv = String::from("t");
        for s in &d.schemes {
            csv.push(',');
            csv.push_str(s.name());
        }
        csv.push('\n');
        for (k, t) in grid.iter().enumerate() {
            csv.push_str(&fmt_sig(*t));
            for tr in &runs {
                csv.push(',');
                csv.push_str(&fmt_sig(tr.purity[k]));
            }
            csv.push('\n');
        }
        out.write(&format!("dd_{}.csv", fc.name()), &csv)?;
        for (s, tr) in d.schemes.iter().zip(&runs) {
            let _ = writeln!(summary, "{},{},{}", fc.name(), s.name(), fmt_sig(tr.min_purity()));
        }
        if out.plots {
            let series: Vec<Series> = d
                .schemes
                .iter()
                .zip(&runs)
                .map(|(s, tr)| Series { label: s.name().into(), x: grid.clone(), y: tr.purity.clone() })
                .collect();
            line_chart(
                &out.path(&format!("plot_dd_{}.svg", fc.name())),
                &format!("DD comparison, {} frame ({})", fc.name(), m.id),
                "t",
                "logical purity",
                &series,
            );
        }
    }
    out.write("dd_summary.csv", &summary)?;
    Ok(())
}

pub fn eternal_bound(cfg: &Config, seed: u64, out: &mut Output) -> CliResult<()> {
    let e = cfg.eternal.clone().unwrap_or_default();
    let m = load_model(cfg)?;
    let h_u = m.control.clone().ok_or_else(|| CliError::Config(format!("model {} has no control Hamiltonian", m.id)))?;
    let w = match &cfg.wall.vector {
        Some(v) => SphereVector::new(parse_vector(v, m.dims.n_w, "wall.vector")?)?,
        None => {
            let (_, vecs) = eigh(h_u.matrix());
            SphereVector::new(vecs.column(m.dims.n_w - 1).into_owned())?.canonical_phase()
        }
    };
    let rho_e = env_state(&coeffs(&m.hamiltonian, m.dims)?, cfg.wall.beta)?;
    let rho_l = logical_state(cfg, m.dims.n_l, seed)?;
    let rho0 = product_initial_state(&rho_l, &w, &rho_e);
    let tol = SetTolerances { zero_tol: e.zero_tol, swap_tol: e.swap_tol };
    let reports: Vec<CliResult<eternal::BoundReport>> = out.time("sweep", || {
        e.kappas
            .par_iter()
            .map(|&k| {
                let spec = SpectralData::driven(&m.hamiltonian, &h_u, m.dims, k)?;
                Ok(eternal::purity_decomposition(&rho0, &spec, m.dims, tol.zero_tol)?)
            })
            .collect()
    });
    let reports: Vec<eternal::BoundReport> = reports.into_iter().collect::<CliResult<_>>()?;
    let mut csv = String::from("kappa,gamma_bar,rho_l1,bound\n");
    for r in &reports {
        let _ = writeln!(csv, "{},{},{},{}", fmt_sig(r.kappa), fmt_sig(r.gamma_bar), fmt_sig(r.rho_l1), fmt_sig(r.bound));
    }
    out.write("eternal_sweep.csv", &csv)?;

    let k_rep = e.report_kappa.unwrap_or_else(|| e.kappas.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    let a = out.time("analysis", || eternal::analyze(&m.hamiltonian, &h_u, m.dims, &rho_l, &w, &rho_e, k_rep, &tol))?;
    let (witness, lambda) = match &a.verdict {
        Verdict::Empty => ("none".to_string(), "none".to_string()),
        Verdict::NonEmpty { witness, lambda } => {
            (witness.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(","), fmt_sig(*lambda))
        }
    };
    let corollary = match &a.corollary {
        CorollaryVerdict::Holds => "holds".to_string(),
        CorollaryVerdict::Fails { mismatch, .. } => format!("fails (mismatch {})", fmt_sig(*mismatch)),
        CorollaryVerdict::Inapplicable(why) => format!("inapplicable ({why})"),
    };
    out.write(
        "eternal_report.txt",
        &kv(&[
            ("model", m.id.clone()),
            ("kappa", fmt_sig(a.report.kappa)),
            ("gamma0", fmt_sig(a.report.gamma0)),
            ("gamma_bar", fmt_sig(a.report.gamma_bar)),
            ("rho_l1", fmt_sig(a.report.rho_l1)),
            ("bound", fmt_sig(a.report.bound)),
            ("c1_size", a.report.c1_size.to_string()),
            ("k1_size", a.sets.k1_size().to_string()),
            ("k1_k2_size", a.sets.k1_k2.len().to_string()),
            ("c1_k1_k2_empty", a.verdict.is_empty().to_string()),
            ("witness", witness),
            ("witness_lambda", lambda),
            ("corollary", corollary),
        ]),
    )?;

    if e.validate_times > 0 {
        let mut r = rng::stream(seed, "eternal-times");
        let mut times: Vec<f64> = (0..e.validate_times).map(|_| rand::Rng::random::<f64>(&mut r) * e.validate_horizon).collect();
        times.sort_by(f64::total_cmp);
        let mins: Vec<CliResult<f64>> = out.time("validate", || {
            e.kappas
                .par_iter()
                .map(|&k| {
                    Ok(evolve(&rho0, &m.hamiltonian, &[], m.dims, &times, &ControlScheme::Driving { kappa: k, h_u: h_u.clone() })?
                        .min_purity())
                })
                .collect()
        });
        let mut csv = String::from("kappa,bound,min_simulated\n");
        for (rep, mn) in reports.iter().zip(mins) {
            let _ = writeln!(csv, "{},{},{}", fmt_sig(rep.kappa), fmt_sig(rep.bound), fmt_sig(mn?));
        }
        out.write("eternal_validation.csv", &csv)?;
    }
    if out.plots {
        let s =
            Series { label: "bound".into(), x: reports.iter().map(|r| r.kappa).collect(), y: reports.iter().map(|r| r.bound).collect() };
        line_chart(&out.path("plot_eternal.svg"), &format!("Eternal bound ({})", m.id), "kappa", "lower bound", &[s]);
    }
    Ok(())
}
