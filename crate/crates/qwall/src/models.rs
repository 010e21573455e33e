//! Hamiltonians of the worked examples: Ising chains, the regularization toy model,
//! the five-site optical lattice, the spin-3/2 central spin and the driven
//! three-qubit model used for eternal bounds.

use crate::error::{Error, Result};
use crate::tensor::{c, identity, spin32_ops, spin_ops, Axis, CMat, HermitianOp, TripartiteDims};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A named model on ℋ_l ⊗ ℋ_w ⊗ ℋ_e.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub id: String,
    pub dims: TripartiteDims,
    pub params: BTreeMap<String, f64>,
    pub hamiltonian: HermitianOp,
    /// Wall control Hamiltonian `H_u`, when the model comes with one.
    pub control: Option<HermitianOp>,
    /// Environment pumping operators `Λ J⁺`; not part of `hamiltonian`.
    pub pumping: Vec<CMat>,
}

pub const MODEL_IDS: [&str; 5] = ["ising3", "toy-reg", "lattice5", "central-spin", "eternal3q"];

pub fn by_id(id: &str) -> Result<ModelSpec> {
    match id {
        "ising3" => Ok(transversal_ising3()),
        "toy-reg" => Ok(toy_regularization_model().model),
        "lattice5" => Ok(spin_lattice5()),
        "central-spin" => Ok(central_spin()),
        "eternal3q" => Ok(eternal_example()),
        other => Err(Error::InvalidParameter(format!("unknown model `{other}`, expected one of {MODEL_IDS:?}"))),
    }
}

fn j(n: usize, site: usize, a: Axis) -> CMat {
    spin_ops(n, site, a).expect("site within chain").into_inner()
}

fn real(x: f64) -> crate::tensor::C64 {
    c(x, 0.0)
}

/// `Λ J⁺_site = Λ (J^x + i J^y)` on an `n`-site chain.
pub fn pumping_operator(n_sites: usize, site: usize, lambda: f64) -> Result<CMat> {
    let x = spin_ops(n_sites, site, Axis::X)?;
    let y = spin_ops(n_sites, site, Axis::Y)?;
    Ok((x.matrix() + y.matrix() * c(0.0, 1.0)) * real(lambda))
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// `H = h Σ J^z_i + g_z Σ J^z_i J^z_{i+1}` with the wall at spin `j_split`.
pub fn ising_chain(n: usize, j_split: usize, h: f64, g_z: f64) -> Result<ModelSpec> {
    if !(2 <= j_split && j_split < n) {
        return Err(Error::InvalidParameter(format!("wall site must satisfy 2 <= j < N, got j={j_split}, N={n}")));
    }
    let dim = 1 << n;
    let mut m = CMat::zeros(dim, dim);
    for i in 1..=n {
        m += j(n, i, Axis::Z) * real(h);
    }
    for i in 1..n {
        m += j(n, i, Axis::Z) * j(n, i + 1, Axis::Z) * real(g_z);
    }
    let dims = TripartiteDims::new(1 << (j_split - 1), 2, 1 << (n - j_split))?;
    Ok(ModelSpec {
        id: format!("ising-chain-{n}-{j_split}"),
        dims,
        params: params(&[("N", n as f64), ("j", j_split as f64), ("h", h), ("g_z", g_z)]),
        hamiltonian: HermitianOp::symmetrized(m),
        control: None,
        pumping: vec![pumping_operator(n, n, 0.5)?],
    })
}

/// Toy model plus the two reference frames `U₁` (J = 0, J_reg > 0) and `U₂` (J_reg = 0).
#[derive(Debug, Clone)]
pub struct ToyModel {
    pub model: ModelSpec,
    pub u1: CMat,
    pub u2: CMat,
}

fn ketbra_sum(pairs: &[(usize, usize)]) -> CMat {
    let mut m = CMat::zeros(4, 4);
    for &(r, col) in pairs {
        m[(r, col)] = real(1.0);
    }
    m
}

/// `H₀ = Σ J^z_i + J^x_1 J^x_3` on three qubits, dims (2, 2, 2).
pub fn toy_regularization_model() -> ToyModel {
    let n = 3;
    let mut m = CMat::zeros(8, 8);
    for i in 1..=n {
        m += j(n, i, Axis::Z);
    }
    m += j(n, 1, Axis::X) * j(n, 3, Axis::X);
    let model = ModelSpec {
        id: "toy-reg".into(),
        dims: TripartiteDims { n_l: 2, n_w: 2, n_e: 2 },
        params: BTreeMap::new(),
        hamiltonian: HermitianOp::symmetrized(m),
        control: None,
        pumping: vec![pumping_operator(3, 3, 0.5).unwrap()],
    };
    // |00⟩⟨11| + |01⟩⟨00| + |10⟩⟨10| + |11⟩⟨01|
    let u1 = ketbra_sum(&[(0, 3), (1, 0), (2, 2), (3, 1)]);
    // SWAP
    let u2 = ketbra_sum(&[(0, 0), (1, 2), (2, 1), (3, 3)]);
    ToyModel { model, u1, u2 }
}

/// `H = Σ J^z_i + Σ J^x_i J^x_{i+1}` on three qubits with `H_u = |−⟩⟨−| − |+⟩⟨+|`.
pub fn transversal_ising3() -> ModelSpec {
    let n = 3;
    let mut m = CMat::zeros(8, 8);
    for i in 1..=n {
        m += j(n, i, Axis::Z);
    }
    for i in 1..n {
        m += j(n, i, Axis::X) * j(n, i + 1, Axis::X);
    }
    ModelSpec {
        id: "ising3".into(),
        dims: TripartiteDims { n_l: 2, n_w: 2, n_e: 2 },
        params: BTreeMap::new(),
        hamiltonian: HermitianOp::symmetrized(m),
        control: Some(HermitianOp::symmetrized(-Axis::X.pauli())),
        pumping: vec![pumping_operator(3, 3, 0.5).unwrap()],
    }
}

/// Couplings of the five-site lattice; bonds and triples are indexed from site 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeParams {
    pub omega: [f64; 5],
    pub g_zz: [f64; 4],
    pub g_xx: [f64; 4],
    /// Triples (1,2,3), (2,3,4), (3,4,5).
    pub g_zzz: [f64; 3],
    pub g_xzx: [f64; 3],
}

impl Default for LatticeParams {
    fn default() -> Self {
        Self {
            omega: [1.13, 1.13, 1.55, 2.51, 2.51],
            g_zz: [0.77, 0.77, 0.46, 0.46],
            g_xx: [0.21, 0.21, 0.19, 0.19],
            // the third triple is listed as (4,5,6) in the source; (3,4,5) is the only one that fits N = 5
            g_zzz: [0.08, 0.08, 0.08],
            g_xzx: [0.06, 0.06, 0.06],
        }
    }
}

pub fn spin_lattice5() -> ModelSpec {
    spin_lattice5_with(&LatticeParams::default())
}

/// Sites 1–2 logical, 3 wall, 4–5 environment: dims (4, 2, 4).
pub fn spin_lattice5_with(p: &LatticeParams) -> ModelSpec {
    let n = 5;
    let (x, y, z) = (|i| j(n, i, Axis::X), |i| j(n, i, Axis::Y), |i| j(n, i, Axis::Z));
    let mut m = CMat::zeros(32, 32);
    for i in 1..=n {
        m += z(i) * real(p.omega[i - 1]);
    }
    for i in 1..n {
        m += z(i) * z(i + 1) * real(p.g_zz[i - 1]);
        m += (x(i) * x(i + 1) + y(i) * y(i + 1)) * real(p.g_xx[i - 1]);
    }
    for i in 1..n - 1 {
        m += z(i) * z(i + 1) * z(i + 2) * real(p.g_zzz[i - 1]);
        m += (x(i) * z(i + 1) * x(i + 2) + y(i) * z(i + 1) * y(i + 2)) * real(p.g_xzx[i - 1]);
    }
    let mut rec = BTreeMap::new();
    for (name, vals) in [("omega", &p.omega[..]), ("g_zz", &p.g_zz[..]), ("g_xx", &p.g_xx[..])] {
        for (i, v) in vals.iter().enumerate() {
            rec.insert(format!("{name}_{}", i + 1), *v);
        }
    }
    for (name, vals) in [("g_zzz", &p.g_zzz), ("g_xzx", &p.g_xzx)] {
        for (i, v) in vals.iter().enumerate() {
            rec.insert(format!("{name}_{}", i + 1), *v);
        }
    }
    ModelSpec {
        id: "lattice5".into(),
        dims: TripartiteDims { n_l: 4, n_w: 2, n_e: 4 },
        params: rec,
        hamiltonian: HermitianOp::symmetrized(m),
        control: None,
        pumping: (4..=5).map(|s| pumping_operator(5, s, 0.5).unwrap()).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralSpinParams {
    pub omega_s: f64,
    pub eta_s: f64,
    pub a_x: f64,
    pub a_y: f64,
    pub a_z: f64,
    pub omega_e: f64,
    pub eta_e: f64,
    pub lambda_e: f64,
    pub bath_spins: usize,
    /// How many bath spins enter the system-bath coupling (defaults to all).
    #[serde(default)]
    pub coupled_bath_spins: Option<usize>,
    /// Which virtual qubit of the spin-3/2 is logical: 0 (leftmost) or 1.
    #[serde(default)]
    pub logical_virtual_qubit: usize,
}

impl Default for CentralSpinParams {
    fn default() -> Self {
        Self {
            omega_s: 1.01,
            eta_s: 0.0,
            a_x: 0.71,
            a_y: 0.0,
            a_z: 0.19,
            omega_e: 1.92,
            eta_e: 0.0,
            lambda_e: 0.31,
            bath_spins: 4,
            coupled_bath_spins: None,
            logical_virtual_qubit: 0,
        }
    }
}

pub fn central_spin() -> ModelSpec {
    central_spin_with(&CentralSpinParams::default())
}

/// Spin-3/2 split into two virtual qubits in its J^z eigenbasis
/// (|00⟩ = |3/2⟩, …, |11⟩ = |−3/2⟩), coupled to a spin-½ bath.
/// The bath Ising term runs over unordered pairs `i < j`.
pub fn central_spin_with(p: &CentralSpinParams) -> ModelSpec {
    let nb = p.bath_spins;
    let de = 1 << nb;
    let coupled = p.coupled_bath_spins.unwrap_or(nb).min(nb);
    let bath_total = |a: Axis| (1..=coupled).fold(CMat::zeros(de, de), |acc, i| acc + j(nb, i, a));
    let (ex, ey, ez) = (bath_total(Axis::X), bath_total(Axis::Y), bath_total(Axis::Z));
    // Swapping the virtual qubits makes the rightmost one logical.
    let swap = ketbra_sum(&[(0, 0), (1, 2), (2, 1), (3, 3)]);
    let spin = |a: Axis| {
        let m = spin32_ops(a).into_inner();
        if p.logical_virtual_qubit == 1 {
            &swap * m * &swap
        } else {
            m
        }
    };
    let (sx, sy, sz) = (spin(Axis::X), spin(Axis::Y), spin(Axis::Z));
    let ie = identity(de);
    let is = identity(4);
    let mut h_e = &ez * real(p.omega_e) + &ex * real(p.eta_e);
    for a in 1..=nb {
        for b in a + 1..=nb {
            h_e += j(nb, a, Axis::X) * j(nb, b, Axis::X) * real(p.lambda_e);
        }
    }
    let mut m = (&sz * real(p.omega_s) + &sx * real(p.eta_s)).kronecker(&ie);
    m += sx.kronecker(&ex) * real(p.a_x);
    m += sy.kronecker(&ey) * real(p.a_y);
    m += sz.kronecker(&ez) * real(p.a_z);
    m += is.kronecker(&h_e);
    let pumping = (1..=nb).map(|s| is.kronecker(&pumping_operator(nb, s, 0.5).unwrap())).collect();
    ModelSpec {
        id: "central-spin".into(),
        dims: TripartiteDims { n_l: 2, n_w: 2, n_e: de },
        params: params(&[
            ("omega_s", p.omega_s),
            ("eta_s", p.eta_s),
            ("A_x", p.a_x),
            ("A_y", p.a_y),
            ("A_z", p.a_z),
            ("omega_e", p.omega_e),
            ("eta_e", p.eta_e),
            ("lambda_e", p.lambda_e),
            ("bath_spins", nb as f64),
            ("coupled_bath_spins", coupled as f64),
            ("logical_virtual_qubit", p.logical_virtual_qubit as f64),
        ]),
        hamiltonian: HermitianOp::symmetrized(m),
        control: None,
        pumping,
    }
}

/// `H₀ = J^z_1 + J^z_2 + J^z_3 + J^z_1 J^z_2 + J^x_2 J^z_3` with `H_u = σ_z` on the wall.
pub fn eternal_example() -> ModelSpec {
    let n = 3;
    let mut m = CMat::zeros(8, 8);
    for i in 1..=n {
        m += j(n, i, Axis::Z);
    }
    m += j(n, 1, Axis::Z) * j(n, 2, Axis::Z);
    m += j(n, 2, Axis::X) * j(n, 3, Axis::Z);
    ModelSpec {
        id: "eternal3q".into(),
        dims: TripartiteDims { n_l: 2, n_w: 2, n_e: 2 },
        params: BTreeMap::new(),
        hamiltonian: HermitianOp::symmetrized(m),
        control: Some(HermitianOp::symmetrized(Axis::Z.pauli())),
        pumping: vec![pumping_operator(3, 3, 0.5).unwrap()],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{decompose_hamiltonian, extract_terms, frobenius, TripartiteBasis};

    #[test]
    fn pumping_single_site() {
        let l = pumping_operator(1, 1, 0.5).unwrap();
        assert_eq!(l[(0, 1)], real(0.5));
        assert_eq!(frobenius(&l), 0.5);
        assert_eq!(frobenius(&pumping_operator(2, 2, 0.0).unwrap()), 0.0);
    }

    #[test]
    fn ising_chain_split() {
        assert!(ising_chain(3, 3, 1.0, 1.0).is_err());
        let m = ising_chain(4, 2, 1.0, 0.7).unwrap();
        assert_eq!((m.dims.n_l, m.dims.n_w, m.dims.n_e), (2, 2, 4));
        let b = TripartiteBasis::gellmann(m.dims).unwrap();
        let t = extract_terms(&decompose_hamiltonian(&m.hamiltonian, &b).unwrap());
        assert!(frobenius(&t.delta) < 1e-12);
        let zero = ising_chain(3, 2, 0.0, 0.0).unwrap();
        assert_eq!(frobenius(&zero.hamiltonian), 0.0);
    }

    #[test]
    fn toy_frames_are_permutations() {
        let toy = toy_regularization_model();
        for u in [&toy.u1, &toy.u2] {
            assert!((u.adjoint() * u - identity(4)).norm() < 1e-15);
        }
    }

    #[test]
    fn lattice_without_couplings_has_no_delta() {
        let p = LatticeParams { g_zz: [0.0; 4], g_xx: [0.0; 4], g_zzz: [0.0; 3], g_xzx: [0.0; 3], ..LatticeParams::default() };
        let m = spin_lattice5_with(&p);
        let b = TripartiteBasis::gellmann(m.dims).unwrap();
        let g = decompose_hamiltonian(&m.hamiltonian, &b).unwrap();
        assert!(g.delta_norm_sq() < 1e-24);
    }

    #[test]
    fn all_ids_resolve() {
        for id in MODEL_IDS {
            let m = by_id(id).unwrap();
            assert_eq!(m.hamiltonian.dim(), m.dims.total());
        }
        assert!(by_id("nope").is_err());
    }
}
