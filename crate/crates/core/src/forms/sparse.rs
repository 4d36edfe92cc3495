//! Compressed-row matrix with a fixed sparsity pattern.

use std::io::Write;
use std::path::Path;

use crate::error::{FpsiError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Build the pattern from groups of indices coupled all-to-all.
    pub fn from_groups<'a>(n: usize, groups: impl IntoIterator<Item = &'a [usize]>) -> Self {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for g in groups {
            for &r in g {
                rows[r].extend_from_slice(g);
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        row_ptr.push(0);
        for (i, mut r) in rows.into_iter().enumerate() {
            r.push(i);
            r.sort_unstable();
            r.dedup();
            cols.extend(r);
            row_ptr.push(cols.len());
        }
        let values = vec![0.0; cols.len()];
        CsrMatrix { n, row_ptr, cols, values }
    }

    /// Matrix from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(r, c, _) in triplets {
            rows[r].push(c);
        }
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        for mut r in rows {
            r.sort_unstable();
            r.dedup();
            cols.extend(r);
            row_ptr.push(cols.len());
        }
        let mut m = CsrMatrix {
            n,
            values: vec![0.0; cols.len()],
            row_ptr,
            cols,
        };
        for &(r, c, v) in triplets {
            m.add(r, c, v);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn zero_values(&mut self) {
        self.values.fill(0.0);
    }

    fn position(&self, r: usize, c: usize) -> Option<usize> {
        let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
        self.cols[lo..hi].binary_search(&c).ok().map(|p| lo + p)
    }

    /// Add to an entry of the pattern; panics if `(r, c)` is not in it.
    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        let p = self
            .position(r, c)
            .unwrap_or_else(|| panic!("entry ({r}, {c}) outside sparsity pattern"));
        self.values[p] += v;
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.position(r, c).map_or(0.0, |p| self.values[p])
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
        self.cols[lo..hi].iter().copied().zip(self.values[lo..hi].iter().copied())
    }

    pub fn has_entry(&self, r: usize, c: usize) -> bool {
        self.position(r, c).is_some()
    }

    /// Scatter a dense local matrix (row-major, `dofs.len()` square).
    pub fn add_local(&mut self, dofs: &[usize], local: &[f64]) {
        let n = dofs.len();
        for (i, &r) in dofs.iter().enumerate() {
            for (j, &c) in dofs.iter().enumerate() {
                let v = local[i * n + j];
                if v != 0.0 {
                    self.add(r, c, v);
                }
            }
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()).collect()
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut t = Vec::with_capacity(self.nnz());
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                t.push((c, r, v));
            }
        }
        CsrMatrix::from_triplets(self.n, &t)
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut t = Vec::with_capacity(self.nnz());
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                t.push((r, c, v));
            }
        }
        t
    }

    /// Impose `x[i] = value` for each constraint: known columns move to the
    /// right-hand side and constrained rows become identity rows.
    pub fn apply_dirichlet(&mut self, rhs: &mut [f64], constraints: &[(usize, f64)]) {
        let mut fixed: Vec<Option<f64>> = vec![None; self.n];
        for &(i, v) in constraints {
            fixed[i] = Some(v);
        }
        for r in 0..self.n {
            let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
            if let Some(g) = fixed[r] {
                for p in lo..hi {
                    self.values[p] = if self.cols[p] == r { 1.0 } else { 0.0 };
                }
                rhs[r] = g;
                continue;
            }
            for p in lo..hi {
                if let Some(g) = fixed[self.cols[p]] {
                    rhs[r] -= self.values[p] * g;
                    self.values[p] = 0.0;
                }
            }
        }
    }

    /// Index of the first row without a nonzero value, if any.
    pub fn first_empty_row(&self) -> Option<usize> {
        (0..self.n).find(|&r| self.row(r).all(|(_, v)| v == 0.0))
    }

    /// Write in Matrix Market coordinate format.
    pub fn write_matrix_market(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| FpsiError::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        let io = |e| FpsiError::io(path, e);
        writeln!(w, "%%MatrixMarket matrix coordinate real general").map_err(io)?;
        let entries: Vec<_> = self.triplets().into_iter().filter(|t| t.2 != 0.0).collect();
        writeln!(w, "{} {} {}", self.n, self.n, entries.len()).map_err(io)?;
        for (r, c, v) in entries {
            writeln!(w, "{} {} {:?}", r + 1, c + 1, v).map_err(io)?;
        }
        w.flush().map_err(io)
    }
}
