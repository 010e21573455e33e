use super::{c, eigh, hermitian_residual, CMat, CVec, Subsystem, TripartiteDims, C64};
use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;
use std::ops::Deref;

/// Density matrix: Hermitian, unit trace, positive semidefinite (to 1e-10).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMat);

impl DensityMatrix {
    pub const TOL: f64 = 1e-10;

    pub fn new(m: CMat) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Shape { expected: m.nrows(), got: m.ncols() });
        }
        let r = hermitian_residual(&m);
        if r > Self::TOL {
            return Err(Error::NotHermitian(r));
        }
        let m = (&m + m.adjoint()) * c(0.5, 0.0);
        let tr = m.trace().re;
        if (tr - 1.0).abs() > Self::TOL {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let (vals, _) = eigh(&m);
        if vals[0] < -Self::TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {}", vals[0])));
        }
        Ok(Self(m))
    }

    /// `|v⟩⟨v| / ⟨v|v⟩`.
    pub fn pure(v: &CVec) -> Result<Self> {
        let n2 = v.norm_squared();
        if n2 == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Ok(Self(v * v.adjoint() * c(1.0 / n2, 0.0)))
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self(CMat::identity(n, n) * c(1.0 / n as f64, 0.0))
    }

    /// `ρ_l ⊗ ρ_w ⊗ ρ_e`.
    pub fn product(l: &DensityMatrix, w: &DensityMatrix, e: &DensityMatrix) -> Self {
        Self(super::kron3(&l.0, &w.0, &e.0))
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

impl Deref for DensityMatrix {
    type Target = CMat;
    fn deref(&self) -> &CMat {
        &self.0
    }
}

/// `tr(ρ²)`, real part; for Hermitian ρ this is the squared Frobenius norm.
pub fn purity(rho: &CMat) -> f64 {
    rho.iter().map(|z| z.norm_sqr()).sum()
}

/// Trace over every factor not listed in `keep`. Kept factors stay in l, w, e order.
pub fn partial_trace(op: &CMat, dims: TripartiteDims, keep: &[Subsystem]) -> Result<CMat> {
    dims.check(op)?;
    let ns = [dims.n_l, dims.n_w, dims.n_e];
    let kept = [keep.contains(&Subsystem::Logical), keep.contains(&Subsystem::Wall), keep.contains(&Subsystem::Env)];
    let out_dim: usize = (0..3).filter(|&s| kept[s]).map(|s| ns[s]).product();
    let split = |r: usize| [r / (ns[1] * ns[2]), (r / ns[2]) % ns[1], r % ns[2]];
    let join = |t: [usize; 3]| (t[0] * ns[1] + t[1]) * ns[2] + t[2];
    let kept_index = |t: [usize; 3]| (0..3).filter(|&s| kept[s]).fold(0, |acc, s| acc * ns[s] + t[s]);
    let kept_tuples: Vec<[usize; 3]> = (0..out_dim)
        .map(|mut q| {
            let mut t = [0usize; 3];
            for s in (0..3).rev() {
                if kept[s] {
                    t[s] = q % ns[s];
                    q /= ns[s];
                }
            }
            t
        })
        .collect();
    let mut out = CMat::zeros(out_dim, out_dim);
    for r in 0..dims.total() {
        let tr = split(r);
        let ro = kept_index(tr);
        for (co, kt) in kept_tuples.iter().enumerate() {
            let mut tc = tr;
            for s in 0..3 {
                if kept[s] {
                    tc[s] = kt[s];
                }
            }
            out[(ro, co)] += op[(r, join(tc))];
        }
    }
    Ok(out)
}

/// `e^{−βH} / tr e^{−βH}`; `β = ∞` gives the (normalized) ground-state projector.
pub fn thermal_state(h: &CMat, beta: f64) -> Result<DensityMatrix> {
    if !(beta >= 0.0) {
        return Err(Error::InvalidParameter(format!("beta must be >= 0, got {beta}")));
    }
    let (vals, vecs) = eigh(h);
    let e0 = vals[0];
    let weights: Vec<f64> = vals
        .iter()
        .map(|&l| {
            let x = l - e0;
            if beta.is_infinite() {
                if x.abs() < 1e-12 {
                    1.0
                } else {
                    0.0
                }
            } else {
                (-beta * x).exp()
            }
        })
        .collect();
    let z: f64 = weights.iter().sum();
    let mut scaled = vecs.clone();
    for (j, w) in weights.iter().enumerate() {
        for v in scaled.column_mut(j).iter_mut() {
            *v *= w / z;
        }
    }
    let rho = scaled * vecs.adjoint();
    Ok(DensityMatrix((&rho + rho.adjoint()) * c(0.5, 0.0)))
}

/// Uniform unit vector: normalized i.i.d. standard complex Gaussians.
pub fn haar_random_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVec {
    loop {
        let v = CVec::from_fn(n, |_, _| c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)));
        let norm = v.norm();
        if norm > 1e-300 {
            return v / c(norm, 0.0);
        }
    }
}

pub fn haar_random_pure<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DensityMatrix {
    let v = haar_random_state(n, rng);
    DensityMatrix(&v * v.adjoint())
}

/// Haar unitary from the QR decomposition of a Ginibre matrix with the phases of `diag(R)` divided out.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for v in q.column_mut(j).iter_mut() {
            *v *= ph;
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(v: &[f64]) -> CMat {
        CMat::from_diagonal(&CVec::from_iterator(v.len(), v.iter().map(|&x| c(x, 0.0))))
    }

    #[test]
    fn purity_examples() {
        assert!((purity(&diag(&[0.75, 0.25])) - 0.625).abs() < 1e-15);
        assert!((purity(&DensityMatrix::maximally_mixed(4)) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn bell_reduction_is_mixed() {
        let mut v = CVec::zeros(4);
        v[0] = c(1.0, 0.0);
        v[3] = c(1.0, 0.0);
        let rho = DensityMatrix::pure(&v).unwrap();
        let dims = TripartiteDims::new(2, 2, 1).unwrap();
        let r = partial_trace(&rho, dims, &[Subsystem::Logical]).unwrap();
        assert!((r - diag(&[0.5, 0.5])).norm() < 1e-15);
    }

    #[test]
    fn thermal_closed_form() {
        let sz = diag(&[1.0, -1.0]);
        let r = thermal_state(&sz, 1.0).unwrap();
        let e = std::f64::consts::E;
        let z = e + 1.0 / e;
        assert!((r[(0, 0)].re - (1.0 / e) / z).abs() < 1e-14);
        assert!((r[(1, 1)].re - e / z).abs() < 1e-14);
        let r0 = thermal_state(&sz, 0.0).unwrap();
        assert!((r0.matrix() - diag(&[0.5, 0.5])).norm() < 1e-15);
        let rinf = thermal_state(&sz, f64::INFINITY).unwrap();
        assert!((rinf.matrix() - diag(&[0.0, 1.0])).norm() < 1e-15);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_unitary(6, &mut rng);
        assert!((u.adjoint() * &u - CMat::identity(6, 6)).norm() < 1e-12);
    }

    #[test]
    fn rejects_bad_trace() {
        assert!(DensityMatrix::new(diag(&[0.5, 0.4])).is_err());
        assert!(DensityMatrix::new(diag(&[1.2, -0.2])).is_err());
    }
}
