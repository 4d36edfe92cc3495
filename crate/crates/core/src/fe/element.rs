//! Lagrange P1/P2 elements on the reference simplex.
//!
//! Node order: vertices first, then edge midpoints in
//! [`reference_edges`](crate::mesh::reference_edges) order.

use crate::error::{FpsiError, Result};
use crate::fe::quadrature::QuadratureRule;
use crate::mesh::reference_edges;

const OUTSIDE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ReferenceElement {
    pub dim: usize,
    pub degree: usize,
}

/// Basis values and reference gradients at a set of points, row-major by point.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulation {
    pub n_nodes: usize,
    pub values: Vec<f64>,
    pub grads: Vec<[f64; 3]>,
}

impl Tabulation {
    pub fn values_at(&self, q: usize) -> &[f64] {
        &self.values[q * self.n_nodes..(q + 1) * self.n_nodes]
    }

    pub fn grads_at(&self, q: usize) -> &[[f64; 3]] {
        &self.grads[q * self.n_nodes..(q + 1) * self.n_nodes]
    }
}

impl ReferenceElement {
    pub fn new(dim: usize, degree: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) || !(1..=2).contains(&degree) || (degree == 2 && dim == 1) {
            return Err(FpsiError::Space(format!("unsupported element P{degree} in {dim}D")));
        }
        Ok(ReferenceElement { dim, degree })
    }

    pub fn n_nodes(&self) -> usize {
        match self.degree {
            1 => self.dim + 1,
            _ => self.dim + 1 + reference_edges(self.dim).len(),
        }
    }

    /// Reference coordinates of the interpolation nodes.
    pub fn nodes(&self) -> Vec<[f64; 3]> {
        let mut verts = vec![[0.0; 3]];
        for i in 0..self.dim {
            let mut v = [0.0; 3];
            v[i] = 1.0;
            verts.push(v);
        }
        let mut nodes = verts.clone();
        if self.degree == 2 {
            for &[a, b] in reference_edges(self.dim) {
                nodes.push(std::array::from_fn(|k| 0.5 * (verts[a][k] + verts[b][k])));
            }
        }
        nodes
    }

    /// Values and reference gradients at `point`; errors outside the closed simplex.
    pub fn eval_basis(&self, point: &[f64]) -> Result<(Vec<f64>, Vec<[f64; 3]>)> {
        let lam = self.barycentric(point);
        let min = lam.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -OUTSIDE_TOL {
            return Err(FpsiError::OutsideSimplex { min_bary: min });
        }
        let mut values = vec![0.0; self.n_nodes()];
        let mut grads = vec![[0.0; 3]; self.n_nodes()];
        self.eval_into(&lam, &mut values, &mut grads);
        Ok((values, grads))
    }

    fn barycentric(&self, point: &[f64]) -> Vec<f64> {
        let x = &point[..self.dim];
        std::iter::once(1.0 - x.iter().sum::<f64>()).chain(x.iter().copied()).collect()
    }

    /// Evaluate without the inside check, given barycentric coordinates.
    pub fn eval_into(&self, lam: &[f64], values: &mut [f64], grads: &mut [[f64; 3]]) {
        let d = self.dim;
        let grad_lam = |i: usize| -> [f64; 3] {
            let mut g = [0.0; 3];
            if i == 0 {
                g[..d].fill(-1.0);
            } else {
                g[i - 1] = 1.0;
            }
            g
        };
        match self.degree {
            1 => {
                for i in 0..=d {
                    values[i] = lam[i];
                    grads[i] = grad_lam(i);
                }
            }
            _ => {
                for i in 0..=d {
                    values[i] = lam[i] * (2.0 * lam[i] - 1.0);
                    let g = grad_lam(i);
                    grads[i] = g.map(|x| (4.0 * lam[i] - 1.0) * x);
                }
                for (e, &[a, b]) in reference_edges(d).iter().enumerate() {
                    let k = d + 1 + e;
                    values[k] = 4.0 * lam[a] * lam[b];
                    let (ga, gb) = (grad_lam(a), grad_lam(b));
                    grads[k] = std::array::from_fn(|c| 4.0 * (lam[b] * ga[c] + lam[a] * gb[c]));
                }
            }
        }
    }

    /// Tabulate at every point of `rule` (which must live on this element's simplex).
    pub fn tabulate(&self, rule: &QuadratureRule) -> Tabulation {
        self.tabulate_points(&rule.points)
    }

    pub fn tabulate_points(&self, points: &[[f64; 3]]) -> Tabulation {
        let n = self.n_nodes();
        let mut values = vec![0.0; n * points.len()];
        let mut grads = vec![[0.0; 3]; n * points.len()];
        for (q, p) in points.iter().enumerate() {
            let lam = self.barycentric(p);
            self.eval_into(&lam, &mut values[q * n..(q + 1) * n], &mut grads[q * n..(q + 1) * n]);
        }
        Tabulation {
            n_nodes: n,
            values,
            grads,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn spec_examples() {
        let p1 = ReferenceElement::new(2, 1).unwrap();
        let (v, _) = p1.eval_basis(&[1.0 / 3.0, 1.0 / 3.0]).unwrap();
        for x in v {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }
        let p2 = ReferenceElement::new(2, 2).unwrap();
        let (v, _) = p2.eval_basis(&[0.0, 0.0]).unwrap();
        assert_eq!(v, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let (v, _) = p2.eval_basis(&[0.5, 0.0]).unwrap();
        // edge (0,1) is node 3
        assert_eq!(v, vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        assert!(p2.eval_basis(&[0.7, 0.7]).is_err());
        assert_eq!(ReferenceElement::new(3, 2).unwrap().n_nodes(), 10);
        assert_eq!(ReferenceElement::new(3, 1).unwrap().n_nodes(), 4);
    }

    #[test]
    fn nodal_duality() {
        for (dim, deg) in [(2, 1), (2, 2), (3, 1), (3, 2)] {
            let el = ReferenceElement::new(dim, deg).unwrap();
            for (j, node) in el.nodes().iter().enumerate() {
                let (v, _) = el.eval_basis(node).unwrap();
                for (i, x) in v.iter().enumerate() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((x - expect).abs() < 1e-14);
                }
            }
        }
    }

    fn point_in_simplex(dim: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1.0, dim + 1).prop_map(move |mut w| {
            // normalized positive weights are barycentric coordinates
            let s: f64 = w.iter().sum::<f64>() + 1e-9;
            w.iter_mut().for_each(|x| *x /= s);
            w[1..].to_vec()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn partition_of_unity(p2 in point_in_simplex(2), p3 in point_in_simplex(3)) {
            for (dim, p) in [(2, &p2), (3, &p3)] {
                for deg in 1..=2 {
                    let el = ReferenceElement::new(dim, deg).unwrap();
                    let (v, g) = el.eval_basis(p).unwrap();
                    prop_assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-13);
                    for c in 0..dim {
                        prop_assert!(g.iter().map(|x| x[c]).sum::<f64>().abs() < 1e-13);
                    }
                }
            }
        }

        #[test]
        fn gradients_match_finite_differences(p in point_in_simplex(3)) {
            let eps = 1e-6;
            for dim in [2usize, 3] {
                let el = ReferenceElement::new(dim, 2).unwrap();
                let x: Vec<f64> = p[..dim].iter().map(|v| v * 0.9).collect();
                let (_, g) = el.eval_basis(&x).unwrap();
                for c in 0..dim {
                    let mut xp = x.clone();
                    xp[c] += eps;
                    let mut lam = vec![1.0 - xp.iter().sum::<f64>()];
                    lam.extend_from_slice(&xp);
                    let mut vp = vec![0.0; el.n_nodes()];
                    let mut gp = vec![[0.0; 3]; el.n_nodes()];
                    el.eval_into(&lam, &mut vp, &mut gp);
                    let (v0, _) = el.eval_basis(&x).unwrap();
                    for i in 0..el.n_nodes() {
                        prop_assert!(((vp[i] - v0[i]) / eps - g[i][c]).abs() < 1e-4);
                    }
                }
            }
        }
    }
}
