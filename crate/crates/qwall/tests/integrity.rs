mod common;

use common::*;
use qwall::manifold::SphereVector;
use qwall::models;
use qwall::tensor::*;
use qwall::wall::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> HermitianOp {
    let u = random_unitary(n, rng);
    let d = CMat::from_fn(n, n, |i, j| if i == j { c(((i * 7) % 5) as f64 - 2.0 + 0.3 * i as f64, 0.0) } else { c(0.0, 0.0) });
    HermitianOp::symmetrized(&u * d * u.adjoint())
}

fn failures(rs: &[OracleResult]) -> Vec<String> {
    rs.iter().filter(|r| !r.pass).map(|r| format!("{} est {:.4e} ± {:.1e}", r.label, r.estimate, r.stderr)).collect()
}

#[test]
fn haar_first_moment_qubit() {
    let rs = haar_moment_check(2, Moment::First, 100_000, 11);
    assert!(failures(&rs).is_empty(), "{:?}", failures(&rs));
}

#[test]
fn haar_fourth_power_qutrit() {
    let rs = haar_moment_check(3, Moment::Second, 100_000, 12);
    let r = rs.iter().find(|r| r.label == "n=3 <rho_00 rho_00> re").unwrap();
    assert!((r.target - 1.0 / 6.0).abs() < 1e-15);
    assert!(r.pass, "{r:?}");
}

#[test]
fn haar_gellmann_pairs_qutrit_and_cross_kind() {
    let rs = haar_moment_check(3, Moment::GellMann, 100_000, 13);
    let diag = rs.iter().find(|r| r.label.starts_with("n=3 <tr(s1 rho s1 rho)>") && r.label.ends_with(" re")).unwrap();
    assert!((diag.target - 1.0 / 12.0).abs() < 1e-15);
    assert!(diag.pass, "{diag:?}");
    let q = haar_moment_check(2, Moment::GellMann, 100_000, 14);
    let cross: Vec<_> = q.iter().filter(|r| r.label.contains(" symmetric/antisymmetric")).collect();
    assert!(!cross.is_empty());
    for r in &cross {
        assert!(r.pass && r.target == 0.0, "{r:?}");
    }
}

#[test]
fn partial_trace_matches_index_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let dims = TripartiteDims::new(2, 2, 2).unwrap();
    let m = random_hermitian(8, &mut rng);
    for keep in [
        vec![Subsystem::Logical],
        vec![Subsystem::Logical, Subsystem::Wall],
        vec![Subsystem::Env],
        vec![Subsystem::Logical, Subsystem::Env],
    ] {
        let a = partial_trace(&m, dims, &keep).unwrap();
        let b = naive_partial_trace(&m, dims, &keep);
        assert!((a - b).norm() < 1e-12, "{keep:?}");
    }
}

#[test]
fn gamma2_matches_direct_variance() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let dims = TripartiteDims::new(2, 3, 2).unwrap();
    let b = TripartiteBasis::gellmann(dims).unwrap();
    let g = decompose_hamiltonian(&random_hermitian(12, &mut rng), &b).unwrap();
    let h_lw = lw_operator(&g);
    let o = osd(&h_lw, 2, 3).unwrap();
    for _ in 0..20 {
        let w = SphereVector::random(3, &mut rng);
        let direct = direct_variance_gamma2(&h_lw, 2, 3, &w);
        assert!((gamma2(&w, &o) - direct).abs() < 1e-10 * direct.max(1.0));
    }
}

#[test]
fn closed_form_accel_matches_exact_haar_average() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for model in [models::transversal_ising3(), {
        let dims = TripartiteDims::new(2, 2, 2).unwrap();
        models::ModelSpec {
            id: "random".into(),
            dims,
            params: Default::default(),
            hamiltonian: random_hermitian(8, &mut rng),
            control: None,
            pumping: vec![],
        }
    }] {
        let b = TripartiteBasis::gellmann(model.dims).unwrap();
        let g = decompose_hamiltonian(&model.hamiltonian, &b).unwrap();
        let rho_e = thermal_state(&g.local_part(Subsystem::Env), 0.01).unwrap();
        let ctx = WallObjectiveContext::new(g, &rho_e).unwrap();
        for _ in 0..5 {
            let w = SphereVector::random(2, &mut rng);
            let exact = exact_haar_accel(&w, &rho_e, &model.hamiltonian, &[], model.dims);
            let closed = -4.0 * ctx.nu * gamma1(&w, &ctx);
            assert!((exact - closed).abs() < 1e-9 * closed.abs().max(1.0), "{} {exact} {closed}", model.id);
        }
    }
}

#[test]
fn derivatives_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let dims = TripartiteDims::new(2, 2, 2).unwrap();
    let h = random_hermitian(8, &mut rng);
    for _ in 0..5 {
        let psi = haar_random_state(8, &mut rng);
        let rho = &psi * psi.adjoint();
        let (d1, d2) = purity_derivatives(&rho, &h, &[], dims).unwrap();
        assert!((d1 - fd_purity_rate(&rho, &h, dims, 1e-4)).abs() < 1e-6);
        assert!((d2 - fd_purity_accel(&rho, &h, dims, 1e-3)).abs() < 1e-4 * d2.abs().max(1.0));
    }
}
