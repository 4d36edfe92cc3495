//! Sparse direct solves with residual verification.

use faer::prelude::*;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use crate::error::{FpsiError, Result};
use crate::forms::CsrMatrix;

pub const DEFAULT_RESIDUAL_TOLERANCE: f64 = 1e-9;
const MAX_REFINEMENTS: usize = 3;
/// A probe solve `A⁻¹(A·1)` must recover the ones vector to this accuracy.
const PROBE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub residual: f64,
    pub refinements: usize,
}

pub struct Factorization<'a> {
    matrix: &'a CsrMatrix,
    /// LU of `R A C` for the diagonal equilibration `R`, `C`.
    lu: Lu<usize, f64>,
    row_scale: Vec<f64>,
    col_scale: Vec<f64>,
}

impl std::fmt::Debug for Factorization<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Factorization").field("n", &self.matrix.dim()).finish()
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Relative residual `‖Ax − b‖ / max(‖b‖, ε)`.
pub fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.matvec(x);
    let r: Vec<f64> = ax.iter().zip(b).map(|(p, q)| p - q).collect();
    norm(&r) / norm(b).max(f64::MIN_POSITIVE)
}

const EQUILIBRATION_SWEEPS: usize = 8;

/// Ruiz scaling: repeatedly divide rows and columns by the square root of
/// their largest entry, so every row and column of `R A C` has max entry near 1.
fn equilibrate(n: usize, trips: &[(usize, usize, f64)]) -> (Vec<f64>, Vec<f64>) {
    let mut r = vec![1.0; n];
    let mut c = vec![1.0; n];
    for _ in 0..EQUILIBRATION_SWEEPS {
        let mut rmax = vec![0.0f64; n];
        let mut cmax = vec![0.0f64; n];
        for &(i, j, v) in trips {
            let s = (r[i] * v * c[j]).abs();
            rmax[i] = rmax[i].max(s);
            cmax[j] = cmax[j].max(s);
        }
        for (s, m) in r.iter_mut().zip(&rmax) {
            if *m > 0.0 {
                *s /= m.sqrt();
            }
        }
        for (s, m) in c.iter_mut().zip(&cmax) {
            if *m > 0.0 {
                *s /= m.sqrt();
            }
        }
    }
    (r, c)
}

/// LU factorization with partial pivoting of the equilibrated matrix. Rank
/// deficiency shows up as a failed factorization or a probe solve that does
/// not reproduce a known solution of the scaled system.
pub fn factorize(a: &CsrMatrix) -> Result<Factorization<'_>> {
    let n = a.dim();
    if n == 0 {
        return Err(FpsiError::Singular("empty system".into()));
    }
    let raw: Vec<(usize, usize, f64)> = a.triplets().into_iter().filter(|t| t.2 != 0.0).collect();
    let (row_scale, col_scale) = equilibrate(n, &raw);
    let trips: Vec<Triplet<usize, usize, f64>> = raw
        .iter()
        .map(|&(r, c, v)| Triplet::new(r, c, row_scale[r] * v * col_scale[c]))
        .collect();
    let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trips)
        .map_err(|e| FpsiError::Singular(format!("cannot build sparse matrix: {e:?}")))?;
    let lu = mat
        .sp_lu()
        .map_err(|e| FpsiError::Singular(format!("factorization failed: {e:?}")))?;
    let fact = Factorization {
        matrix: a,
        lu,
        row_scale,
        col_scale,
    };

    let ac = a.matvec(&fact.col_scale);
    let b: Vec<f64> = ac.iter().zip(&fact.row_scale).map(|(v, r)| v * r).collect();
    let x = fact.scaled_solve(&b);
    // f64::max would skip NaN entries
    let err = x
        .iter()
        .map(|v| (v - 1.0).abs())
        .fold(0.0, |m: f64, e| if e.is_nan() || e > m { e } else { m });
    if !(err <= PROBE_TOLERANCE) {
        return Err(FpsiError::Singular(format!(
            "probe solve error {err:e}; matrix is numerically singular"
        )));
    }
    Ok(fact)
}

impl Factorization<'_> {
    fn scaled_solve(&self, b: &[f64]) -> Vec<f64> {
        let mut rhs = Mat::<f64>::from_fn(b.len(), 1, |i, _| b[i]);
        self.lu.solve_in_place(rhs.as_mut());
        (0..b.len()).map(|i| rhs[(i, 0)]).collect()
    }

    fn raw_solve(&self, b: &[f64]) -> Vec<f64> {
        let rb: Vec<f64> = b.iter().zip(&self.row_scale).map(|(v, r)| v * r).collect();
        let y = self.scaled_solve(&rb);
        y.iter().zip(&self.col_scale).map(|(v, c)| v * c).collect()
    }

    /// Solve and verify the residual, refining iteratively if needed.
    pub fn solve(&self, b: &[f64], tolerance: f64) -> Result<(Vec<f64>, SolveReport)> {
        if b.len() != self.matrix.dim() {
            return Err(FpsiError::Dimension(format!(
                "right-hand side has length {}, matrix is {}",
                b.len(),
                self.matrix.dim()
            )));
        }
        if b.iter().all(|&v| v == 0.0) {
            return Ok((
                vec![0.0; b.len()],
                SolveReport {
                    residual: 0.0,
                    refinements: 0,
                },
            ));
        }
        let mut x = self.raw_solve(b);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(FpsiError::Singular("solution is not finite".into()));
        }
        let mut residual = relative_residual(self.matrix, &x, b);
        let mut refinements = 0;
        while residual > tolerance && refinements < MAX_REFINEMENTS {
            let ax = self.matrix.matvec(&x);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
            let dx = self.raw_solve(&r);
            x.iter_mut().zip(&dx).for_each(|(a, d)| *a += d);
            residual = relative_residual(self.matrix, &x, b);
            refinements += 1;
        }
        if !(residual <= tolerance) {
            return Err(FpsiError::SolverQuality {
                residual,
                threshold: tolerance,
            });
        }
        Ok((x, SolveReport { residual, refinements }))
    }
}

/// Factorize and solve in one call.
pub fn solve(a: &CsrMatrix, b: &[f64], tolerance: f64) -> Result<(Vec<f64>, SolveReport)> {
    factorize(a)?.solve(b, tolerance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn small_examples() {
        let id = CsrMatrix::from_triplets(3, &[(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0)]);
        let (x, _) = solve(&id, &[1.0, 2.0, 3.0], 1e-12).unwrap();
        assert_eq!(x, vec![1.0, 2.0, 3.0]);

        let perm = CsrMatrix::from_triplets(2, &[(0, 1, 1.0), (1, 0, 1.0)]);
        let (x, _) = solve(&perm, &[3.0, 4.0], 1e-12).unwrap();
        assert_eq!(x, vec![4.0, 3.0]);

        let diag = CsrMatrix::from_triplets(2, &[(0, 0, 2.0), (1, 1, 4.0)]);
        let (x, _) = solve(&diag, &[2.0, 8.0], 1e-12).unwrap();
        assert_eq!(x, vec![1.0, 2.0]);
        let (x, _) = solve(&diag, &[0.0, 0.0], 1e-12).unwrap();
        assert_eq!(x, vec![0.0, 0.0]);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        assert!(matches!(factorize(&a), Err(FpsiError::Singular(_))));
    }

    fn random_system(rng: &mut ChaCha8Rng, n: usize) -> (CsrMatrix, nalgebra::DMatrix<f64>) {
        let mut trips = Vec::new();
        let mut dense = nalgebra::DMatrix::zeros(n, n);
        for i in 0..n {
            // diagonally dominant with a few random off-diagonals
            let d = 10.0 + rng.gen::<f64>();
            trips.push((i, i, d));
            dense[(i, i)] += d;
            for _ in 0..4 {
                let j = rng.gen_range(0..n);
                let v = rng.gen_range(-1.0..1.0);
                trips.push((i, j, v));
                dense[(i, j)] += v;
            }
        }
        (CsrMatrix::from_triplets(n, &trips), dense)
    }

    #[test]
    fn matches_dense_oracle_and_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (a, dense) = random_system(&mut rng, 50);
        let b1: Vec<f64> = (0..50).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b2: Vec<f64> = (0..50).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let fact = factorize(&a).unwrap();
        let (x1, r) = fact.solve(&b1, 1e-9).unwrap();
        assert!(r.residual <= 1e-9);
        let oracle = dense.lu().solve(&nalgebra::DVector::from_vec(b1.clone())).unwrap();
        for i in 0..50 {
            assert!((x1[i] - oracle[i]).abs() < 1e-10);
        }
        let (x2, _) = fact.solve(&b2, 1e-9).unwrap();
        let b12: Vec<f64> = b1.iter().zip(&b2).map(|(p, q)| p + q).collect();
        let (x12, _) = fact.solve(&b12, 1e-9).unwrap();
        let scale = x12.iter().map(|v| v.abs()).fold(0.0, f64::max);
        for i in 0..50 {
            assert!((x12[i] - x1[i] - x2[i]).abs() <= 1e-9 * scale);
        }
    }
}
