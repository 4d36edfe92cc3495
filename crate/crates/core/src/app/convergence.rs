//! Observed orders of convergence under refinement.

use std::fmt::Write as _;

use crate::error::{FpsiError, Result};

/// `order_i = log(e_i / e_{i+1}) / log(h_i / h_{i+1})` for strictly
/// decreasing sizes `h` and positive errors.
pub fn convergence_orders(sizes: &[f64], errors: &[f64]) -> Result<Vec<f64>> {
    if sizes.len() != errors.len() {
        return Err(FpsiError::Convergence(format!(
            "{} sizes but {} errors",
            sizes.len(),
            errors.len()
        )));
    }
    if sizes.len() < 3 {
        return Err(FpsiError::Convergence(format!("need ≥ 3 levels, got {}", sizes.len())));
    }
    if sizes.iter().any(|h| !(*h > 0.0 && h.is_finite())) || sizes.windows(2).any(|w| w[1] >= w[0]) {
        return Err(FpsiError::Convergence("refinement sizes must be positive and strictly decreasing".into()));
    }
    if errors.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(FpsiError::Convergence("errors must be positive and finite".into()));
    }
    Ok(sizes
        .windows(2)
        .zip(errors.windows(2))
        .map(|(h, e)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect())
}

/// Orders for a constant refinement ratio `r` between consecutive levels.
pub fn orders_at_ratio(errors: &[f64], r: f64) -> Result<Vec<f64>> {
    if !(r > 1.0) {
        return Err(FpsiError::Convergence(format!("refinement ratio must exceed 1, got {r}")));
    }
    let sizes: Vec<f64> = (0..errors.len()).map(|i| r.powi(-(i as i32))).collect();
    convergence_orders(&sizes, errors)
}

/// Errors of several quantities over the same sequence of refinement levels.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub title: String,
    /// Name of the refinement parameter, such as `h` or `dt`.
    pub parameter: String,
    pub sizes: Vec<f64>,
    pub columns: Vec<(String, Vec<f64>)>,
}

impl ConvergenceTable {
    pub fn new(title: impl Into<String>, parameter: impl Into<String>, sizes: Vec<f64>) -> Self {
        ConvergenceTable {
            title: title.into(),
            parameter: parameter.into(),
            sizes,
            columns: Vec::new(),
        }
    }

    pub fn push(&mut self, name: impl Into<String>, errors: Vec<f64>) {
        self.columns.push((name.into(), errors));
    }

    pub fn orders(&self, name: &str) -> Result<Vec<f64>> {
        let (_, errors) = self
            .columns
            .iter()
            .find(|(n, _)| n == name)
            .ok_or_else(|| FpsiError::Convergence(format!("no column '{name}'")))?;
        convergence_orders(&self.sizes, errors)
    }

    /// Mean of the observed orders of one column.
    pub fn mean_order(&self, name: &str) -> Result<f64> {
        let o = self.orders(name)?;
        Ok(o.iter().sum::<f64>() / o.len() as f64)
    }

    /// Plain-text table: one row per level, error and observed order per column.
    pub fn render(&self) -> String {
        let mut s = format!("# {}\n{:>12}", self.title, self.parameter);
        for (name, _) in &self.columns {
            let _ = write!(s, " {:>14} {:>7}", format!("err({name})"), "order");
        }
        s.push('\n');
        let orders: Vec<Option<Vec<f64>>> = self
            .columns
            .iter()
            .map(|(_, e)| convergence_orders(&self.sizes, e).ok())
            .collect();
        for (i, h) in self.sizes.iter().enumerate() {
            let _ = write!(s, "{h:>12.4e}");
            for ((_, e), o) in self.columns.iter().zip(&orders) {
                let order = match (i, o) {
                    (0, _) | (_, None) => "-".to_string(),
                    (i, Some(o)) => format!("{:.3}", o[i - 1]),
                };
                let _ = write!(s, " {:>14.6e} {order:>7}", e[i]);
            }
            s.push('\n');
        }
        s
    }
}
