//! Collapsed Gauss–Legendre rules on reference simplices.
//!
//! The reference d-simplex is `{x ≥ 0, Σx ≤ 1}`. A tensor Gauss–Legendre rule
//! on the unit cube is mapped by the Duffy transform, so a rule with `n`
//! points per direction integrates polynomials of degree `2n − d` exactly.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{FpsiError, Result};

pub const MAX_DEGREE: usize = 30;

/// Points are stored with three coordinates; only the first `dim` are used.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub dim: usize,
    pub degree: usize,
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Integrate `f` over the reference simplex.
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(&p[..self.dim]))
            .sum()
    }

    /// Barycentric coordinates `(1 − Σx, x_1, …, x_d)` of every point.
    pub fn barycentric(&self) -> Vec<Vec<f64>> {
        self.points
            .iter()
            .map(|p| {
                let x = &p[..self.dim];
                std::iter::once(1.0 - x.iter().sum::<f64>()).chain(x.iter().copied()).collect()
            })
            .collect()
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]` (Golub–Welsch).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            let k = i.max(j) as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (0.5 * (eig.eigenvalues[i] + 1.0), v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Rule on the reference `dim`-simplex exact for polynomials up to `degree`.
pub fn quadrature(dim: usize, degree: usize) -> Result<QuadratureRule> {
    if degree > MAX_DEGREE {
        return Err(FpsiError::UnsupportedQuadrature {
            degree,
            max: MAX_DEGREE,
        });
    }
    if dim > 3 {
        return Err(FpsiError::Dimension(format!("no quadrature for dimension {dim}")));
    }
    if dim == 0 {
        return Ok(QuadratureRule {
            dim,
            degree,
            points: vec![[0.0; 3]],
            weights: vec![1.0],
        });
    }
    let n = (degree + dim).div_ceil(2).max(1);
    let (x, w) = gauss_legendre(n);
    let mut points = Vec::new();
    let mut weights = Vec::new();
    match dim {
        1 => {
            for i in 0..n {
                points.push([x[i], 0.0, 0.0]);
                weights.push(w[i]);
            }
        }
        2 => {
            for i in 0..n {
                for j in 0..n {
                    let (u, v) = (x[i], x[j]);
                    points.push([u, v * (1.0 - u), 0.0]);
                    weights.push(w[i] * w[j] * (1.0 - u));
                }
            }
        }
        _ => {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let (u, v, s) = (x[i], x[j], x[k]);
                        points.push([u, v * (1.0 - u), s * (1.0 - u) * (1.0 - v)]);
                        weights.push(w[i] * w[j] * w[k] * (1.0 - u) * (1.0 - u) * (1.0 - v));
                    }
                }
            }
        }
    }
    Ok(QuadratureRule {
        dim,
        degree,
        points,
        weights,
    })
}

/// Reference measure of the `dim`-simplex, `1/dim!`.
pub fn reference_measure(dim: usize) -> f64 {
    1.0 / (1..=dim).map(|k| k as f64).product::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    /// ∫ x^a y^b z^c over the reference simplex = a! b! c! / (a+b+c+d)!.
    fn monomial_exact(dim: usize, e: [u32; 3]) -> f64 {
        let num: f64 = e[..dim].iter().map(|&k| factorial(k)).product();
        num / factorial(e[..dim].iter().sum::<u32>() + dim as u32)
    }

    #[test]
    fn spec_examples() {
        let q = quadrature(2, 2).unwrap();
        assert_relative_eq!(q.integrate(|_| 1.0), 0.5, max_relative = 1e-14);
        assert_relative_eq!(q.integrate(|x| x[0] * x[0]), 1.0 / 12.0, max_relative = 1e-14);
        assert_relative_eq!(q.integrate(|x| x[0] * x[1]), 1.0 / 24.0, max_relative = 1e-14);
        assert_relative_eq!(quadrature(3, 0).unwrap().integrate(|_| 1.0), 1.0 / 6.0, max_relative = 1e-14);
        assert_relative_eq!(quadrature(1, 6).unwrap().integrate(|_| 1.0), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn monomials_up_to_degree() {
        for dim in 1..=3usize {
            for deg in 0..=10usize {
                let q = quadrature(dim, deg).unwrap();
                for a in 0..=deg as u32 {
                    for b in 0..=(deg as u32 - a) {
                        for c in 0..=(deg as u32 - a - b) {
                            let e = [a, if dim > 1 { b } else { 0 }, if dim > 2 { c } else { 0 }];
                            let got = q.integrate(|x| {
                                (0..dim).map(|i| x[i].powi(e[i] as i32)).product()
                            });
                            assert_relative_eq!(got, monomial_exact(dim, e), max_relative = 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn too_high_degree_is_rejected() {
        assert!(matches!(
            quadrature(2, MAX_DEGREE + 1),
            Err(FpsiError::UnsupportedQuadrature { .. })
        ));
    }
}
