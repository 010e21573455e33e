use super::{c, identity, CMat, HermitianOp};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    /// Pauli matrix σ_axis.
    pub fn pauli(self) -> CMat {
        let (o, z) = (c(1.0, 0.0), c(0.0, 0.0));
        match self {
            Axis::X => CMat::from_row_slice(2, 2, &[z, o, o, z]),
            Axis::Y => CMat::from_row_slice(2, 2, &[z, c(0.0, -1.0), c(0.0, 1.0), z]),
            Axis::Z => CMat::from_row_slice(2, 2, &[o, z, z, -o]),
        }
    }
}

/// `J_i^a = 𝟙^{⊗(i−1)} ⊗ σ_a/2 ⊗ 𝟙^{⊗(N−i)}` with 1-based `site`.
pub fn spin_ops(n_sites: usize, site: usize, axis: Axis) -> Result<HermitianOp> {
    if site == 0 || site > n_sites {
        return Err(Error::InvalidParameter(format!("site {site} outside 1..={n_sites}")));
    }
    let left = identity(1 << (site - 1));
    let right = identity(1 << (n_sites - site));
    let m = left.kronecker(&(axis.pauli() * c(0.5, 0.0))).kronecker(&right);
    Ok(HermitianOp::symmetrized(m))
}

/// Spin-3/2 operators in the `m = 3/2, 1/2, −1/2, −3/2` basis.
pub fn spin32_ops(axis: Axis) -> HermitianOp {
    let s = 3f64.sqrt() / 2.0;
    let z = c(0.0, 0.0);
    let m = match axis {
        Axis::X => {
            let (a, b) = (c(s, 0.0), c(1.0, 0.0));
            CMat::from_row_slice(4, 4, &[z, a, z, z, a, z, b, z, z, b, z, a, z, z, a, z])
        }
        Axis::Y => {
            let (a, b) = (c(0.0, s), c(0.0, 1.0));
            CMat::from_row_slice(4, 4, &[z, -a, z, z, a, z, -b, z, z, b, z, -a, z, z, a, z])
        }
        Axis::Z => CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.5, 0.0), c(0.5, 0.0), c(-0.5, 0.0), c(-1.5, 0.0)])),
    };
    HermitianOp::symmetrized(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::commutator;

    #[test]
    fn single_site_is_half_pauli() {
        let j = spin_ops(1, 1, Axis::Z).unwrap();
        assert_eq!(j[(0, 0)], c(0.5, 0.0));
        assert_eq!(j[(1, 1)], c(-0.5, 0.0));
        assert!(spin_ops(3, 4, Axis::X).is_err());
    }

    #[test]
    fn spin32_algebra() {
        let (x, y, z) = (spin32_ops(Axis::X), spin32_ops(Axis::Y), spin32_ops(Axis::Z));
        let lhs = commutator(&x, &y);
        assert!((lhs - z.matrix() * c(0.0, 1.0)).norm() < 1e-12);
        let casimir = x.matrix() * x.matrix() + y.matrix() * y.matrix() + z.matrix() * z.matrix();
        assert!((casimir - identity(4) * c(3.75, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn embedded_sites_commute() {
        let a = spin_ops(3, 1, Axis::X).unwrap();
        let b = spin_ops(3, 3, Axis::Y).unwrap();
        assert!(commutator(&a, &b).norm() < 1e-15);
    }
}
