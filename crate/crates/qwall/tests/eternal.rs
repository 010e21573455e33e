use qwall::eternal::*;
use qwall::manifold::SphereVector;
use qwall::models::eternal_example;
use qwall::tensor::{c, decompose_hamiltonian, thermal_state, CVec, DensityMatrix, HermitianOp, Subsystem, TripartiteBasis};

fn closed_form(kappa: f64) -> [f64; 8] {
    let a = (1.0 + 4.0 * kappa + 8.0 * kappa * kappa).sqrt() / (2.0 * 2f64.sqrt());
    let b = (5.0 + 12.0 * kappa + 8.0 * kappa * kappa).sqrt() / (2.0 * 2f64.sqrt());
    [-1.0 - a, -b, -a, 1.0 - b, -1.0 + a, a, b, 1.0 + b]
}

struct Setup {
    h0: HermitianOp,
    h_u: HermitianOp,
    dims: qwall::tensor::TripartiteDims,
    rho_l: DensityMatrix,
    rho_e: DensityMatrix,
    w: SphereVector,
}

fn setup() -> Setup {
    let m = eternal_example();
    let basis = TripartiteBasis::gellmann(m.dims).unwrap();
    let g = decompose_hamiltonian(&m.hamiltonian, &basis).unwrap();
    let rho_e = thermal_state(&g.local_part(Subsystem::Env), 0.01).unwrap();
    let s = 0.5f64.sqrt();
    let plus_y = CVec::from_vec(vec![c(s, 0.0), c(0.0, s)]);
    Setup {
        h0: m.hamiltonian.clone(),
        h_u: m.control.clone().unwrap(),
        dims: m.dims,
        rho_l: DensityMatrix::pure(&plus_y).unwrap(),
        rho_e,
        w: SphereVector::basis(2, 0),
    }
}

#[test]
fn spectrum_matches_closed_form() {
    let s = setup();
    for kappa in [0.5, 1.0, 3.0, 10.0, 100.0] {
        let spec = SpectralData::driven(&s.h0, &s.h_u, s.dims, kappa).unwrap();
        for (k, want) in closed_form(kappa).iter().enumerate() {
            assert!((spec.energies[k] - want).abs() < 1e-10, "κ={kappa} k={k}");
        }
    }
}

#[test]
fn asymptotic_labels_in_wall_zero_sector() {
    let s = setup();
    let asym = asymptotic_eigenstates(&s.h0, &s.h_u, s.dims).unwrap();
    // |101⟩, |100⟩, |001⟩, |000⟩ for labels 5..8
    let expect = [0b101usize, 0b100, 0b001, 0b000];
    let sets = index_sets(&s.h0, &s.h_u, s.dims, &asym, &s.w, 10.0, &SetTolerances::default()).unwrap();
    assert_eq!(sets.sector, vec![4, 5, 6, 7]);
    for (k, &e) in sets.sector.iter().enumerate() {
        let st = &asym.states[sets.pairing[e]].state;
        assert!((st[expect[k]].norm() - 1.0).abs() < 1e-10, "label {}", e + 1);
    }
    assert_eq!(sets.k1_size(), 256);
}

#[test]
fn nontrivial_quadruples_and_empty_condition() {
    let s = setup();
    let asym = asymptotic_eigenstates(&s.h0, &s.h_u, s.dims).unwrap();
    let sets = index_sets(&s.h0, &s.h_u, s.dims, &asym, &s.w, 10.0, &SetTolerances::default()).unwrap();
    let mut got: Vec<[usize; 4]> = sets.nontrivial_k1_k2().iter().map(|q| q.map(|i| i + 1)).collect();
    got.sort();
    let mut want = vec![[5, 7, 8, 6], [8, 6, 5, 7], [6, 8, 7, 5], [7, 5, 6, 8]];
    want.sort();
    assert_eq!(got, want);
    let spec = SpectralData::driven(&s.h0, &s.h_u, s.dims, 10.0).unwrap();
    assert!(spec.lambda([4, 6, 7, 5]).abs() < 1e-12);
    assert!(check_eternal_condition(&sets).is_empty());
    assert_eq!(corollary_check(&asym, &sets, 1e-9), CorollaryVerdict::Holds);
}

#[test]
fn extra_coupling_breaks_condition() {
    let s = setup();
    let j1 = qwall::tensor::spin_ops(3, 1, qwall::tensor::Axis::Z).unwrap();
    let j3 = qwall::tensor::spin_ops(3, 3, qwall::tensor::Axis::Z).unwrap();
    let h0 = HermitianOp::symmetrized(s.h0.matrix() + j1.matrix() * j3.matrix());
    let asym = asymptotic_eigenstates(&h0, &s.h_u, s.dims).unwrap();
    let sets = index_sets(&h0, &s.h_u, s.dims, &asym, &s.w, 10.0, &SetTolerances::default()).unwrap();
    assert!(!check_eternal_condition(&sets).is_empty());
    assert!(matches!(corollary_check(&asym, &sets, 1e-9), CorollaryVerdict::Fails { .. }));
}

#[test]
fn bound_grows_with_drive_and_is_sound() {
    let s = setup();
    let rho0 = qwall::dynamics::product_initial_state(&s.rho_l, &s.w, &s.rho_e);
    let mut prev = f64::NEG_INFINITY;
    for kappa in [1.0, 3.0, 10.0, 30.0, 100.0] {
        let spec = SpectralData::driven(&s.h0, &s.h_u, s.dims, kappa).unwrap();
        let r = purity_decomposition(&rho0, &spec, s.dims, 1e-9).unwrap();
        assert!(r.consistency.abs() < 1e-10);
        assert!(r.imag_residue < 1e-12);
        assert!(r.bound > prev, "κ={kappa}: {} ≤ {prev}", r.bound);
        prev = r.bound;
        let min = (0..=2000).map(|k| purity_from_spectrum(&rho0, &spec, s.dims, k as f64 * 0.05).unwrap()).fold(f64::INFINITY, f64::min);
        assert!(r.bound <= min + 1e-10, "κ={kappa}: bound {} above sampled min {min}", r.bound);
    }
    assert!(prev > 0.99);
}

#[test]
fn undriven_bound_below_initial_purity() {
    let s = setup();
    let rho0 = qwall::dynamics::product_initial_state(&s.rho_l, &s.w, &s.rho_e);
    let spec = SpectralData::driven(&s.h0, &s.h_u, s.dims, 0.0).unwrap();
    let r = purity_decomposition(&rho0, &spec, s.dims, 1e-9).unwrap();
    assert!(r.bound <= r.gamma0 + 1e-12);
}

#[test]
fn eigenvectors_approach_wall_sectors() {
    let s = setup();
    let asym = asymptotic_eigenstates(&s.h0, &s.h_u, s.dims).unwrap();
    let leak = |kappa: f64| {
        let spec = SpectralData::driven(&s.h0, &s.h_u, s.dims, kappa).unwrap();
        (0..8)
            .map(|j| {
                let v = spec.vecs.column(j);
                let best = (0..2)
                    .map(|b| {
                        let mut inside = 0.0;
                        for st in asym.states.iter().filter(|st| st.wall_index == b) {
                            inside += st.state.dotc(&v).norm_sqr();
                        }
                        1.0 - inside
                    })
                    .fold(f64::INFINITY, f64::min);
                best
            })
            .fold(0.0, f64::max)
    };
    let (a, b, d) = (leak(1e2), leak(1e3), leak(1e4));
    assert!(a > b && b > d, "{a} {b} {d}");
}
