//! Small fixed-size tensor helpers for spatial dimension 2 and 3.

use nalgebra::{SMatrix, SVector};

pub type Vector<const D: usize> = SVector<f64, D>;
pub type Tensor<const D: usize> = SMatrix<f64, D, D>;

/// Determinant for D in {1, 2, 3}.
pub fn det<const D: usize>(a: &Tensor<D>) -> f64 {
    match D {
        1 => a[(0, 0)],
        2 => a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)],
        3 => {
            a[(0, 0)] * (a[(1, 1)] * a[(2, 2)] - a[(1, 2)] * a[(2, 1)])
                - a[(0, 1)] * (a[(1, 0)] * a[(2, 2)] - a[(1, 2)] * a[(2, 0)])
                + a[(0, 2)] * (a[(1, 0)] * a[(2, 1)] - a[(1, 1)] * a[(2, 0)])
        }
        _ => panic!("unsupported dimension {D}"),
    }
}

/// Cofactor matrix, `cof(A) = det(A) A^{-T}`; defined for singular `A` too.
pub fn cofactor<const D: usize>(a: &Tensor<D>) -> Tensor<D> {
    let mut c = Tensor::<D>::zeros();
    match D {
        1 => c[(0, 0)] = 1.0,
        2 => {
            c[(0, 0)] = a[(1, 1)];
            c[(0, 1)] = -a[(1, 0)];
            c[(1, 0)] = -a[(0, 1)];
            c[(1, 1)] = a[(0, 0)];
        }
        3 => {
            for i in 0..3 {
                for j in 0..3 {
                    let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
                    let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
                    c[(i, j)] = a[(i1, j1)] * a[(i2, j2)] - a[(i1, j2)] * a[(i2, j1)];
                }
            }
        }
        _ => panic!("unsupported dimension {D}"),
    }
    c
}

/// Inverse via the adjugate; `None` when the determinant vanishes.
pub fn inverse<const D: usize>(a: &Tensor<D>) -> Option<Tensor<D>> {
    let d = det(a);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    Some(cofactor(a).transpose() / d)
}

pub fn sym<const D: usize>(a: &Tensor<D>) -> Tensor<D> {
    (a + a.transpose()) * 0.5
}

/// Outer product `a ⊗ b`.
pub fn outer<const D: usize>(a: &Vector<D>, b: &Vector<D>) -> Tensor<D> {
    a * b.transpose()
}

pub fn ddot<const D: usize>(a: &Tensor<D>, b: &Tensor<D>) -> f64 {
    a.component_mul(b).sum()
}

pub fn from_slice<const D: usize>(xs: &[f64]) -> Vector<D> {
    Vector::<D>::from_fn(|i, _| xs[i])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_matches_identity() {
        let a = Tensor::<3>::new(2.0, 0.5, 0.1, -0.3, 1.5, 0.2, 0.0, 0.4, 3.0);
        let inv = inverse(&a).unwrap();
        assert!((a * inv - Tensor::<3>::identity()).abs().max() < 1e-14);
        let b = Tensor::<2>::new(1.0, 0.3, 0.0, 1.0);
        assert_eq!(det(&b), 1.0);
        assert!(inverse(&Tensor::<2>::new(1.0, 1.0, 1.0, 1.0)).is_none());
    }
}
