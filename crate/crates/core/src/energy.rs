//! Energy balance terms of the discrete solution.

use serde::Serialize;

use crate::forms::geometry::{scalar_value, vector_gradient, vector_value};
use crate::forms::{Coefficients, Discretization, Fields, GeometricFields};
use crate::kinematics::{fluid_rate_of_strain, green_lagrange, svk_stress};
use crate::tensor::{ddot, Vector};

/// Stored energies (g·mm²/s² per unit depth in 2D), dissipation rates and the
/// interface flux defect at one time level.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct EnergyReport {
    pub kinetic_solid: f64,
    pub kinetic_mixture: f64,
    pub kinetic_fluid: f64,
    pub pressure_storage: f64,
    pub darcy_dissipation: f64,
    /// `2 μ_f ∫ J |D v_f|²`, the viscous form evaluated on the solution.
    pub viscous_dissipation: f64,
    pub bjs_dissipation: f64,
    pub elastic_power: f64,
    pub penalty_defect: f64,
}

impl EnergyReport {
    pub const COLUMNS: [&'static str; 10] = [
        "kinetic_solid",
        "kinetic_mixture",
        "kinetic_fluid",
        "pressure_storage",
        "total",
        "darcy_dissipation",
        "viscous_dissipation",
        "bjs_dissipation",
        "elastic_power",
        "penalty_defect",
    ];

    /// Kinetic plus storage energy.
    pub fn total(&self) -> f64 {
        self.kinetic_solid + self.kinetic_mixture + self.kinetic_fluid + self.pressure_storage
    }

    pub fn values(&self) -> [f64; 10] {
        [
            self.kinetic_solid,
            self.kinetic_mixture,
            self.kinetic_fluid,
            self.pressure_storage,
            self.total(),
            self.darcy_dissipation,
            self.viscous_dissipation,
            self.bjs_dissipation,
            self.elastic_power,
            self.penalty_defect,
        ]
    }
}

/// Evaluate every term with the assembly quadrature and the geometry of the level.
pub fn evaluate<const D: usize>(
    disc: &Discretization<D>,
    coef: &Coefficients<D>,
    fields: &Fields,
    geo: &GeometricFields<D>,
) -> EnergyReport {
    let mut r = EnergyReport::default();
    let nq = disc.n_quad();
    let rho_s_part = coef.rho_p - coef.phi * coef.rho_f;
    if let Some(vf) = &disc.vf {
        for l in 0..vf.cells().len() {
            let cg = vf.geometry(l);
            for q in 0..nq {
                let st = geo.fluid_at(l, q);
                let jw = st.j * disc.cell_rule.weights[q] * cg.det_b.abs();
                let v = vector_value(vf, &fields.vf, l, &disc.p2, q);
                r.kinetic_fluid += 0.5 * coef.rho_f * v.norm_squared() * jw;
                let d = fluid_rate_of_strain(&vector_gradient(vf, &fields.vf, l, &disc.p2, q), &st.f_inv);
                r.viscous_dissipation += 2.0 * coef.mu_f * ddot(&d, &d) * jw;
            }
        }
    }
    if let (Some(vs), Some(pd)) = (&disc.vs, &disc.pd) {
        for l in 0..vs.cells().len() {
            let cg = vs.geometry(l);
            for q in 0..nq {
                let st = geo.solid_at(l, q);
                let w = disc.cell_rule.weights[q] * cg.det_b.abs();
                let jw = st.j * w;
                let v = vector_value(vs, &fields.vs, l, &disc.p2, q);
                let qq = vector_value(vs, &fields.q, l, &disc.p2, q);
                let p = scalar_value(pd, &fields.pd, l, &disc.p1, q);
                r.kinetic_solid += 0.5 * rho_s_part * v.norm_squared() * jw;
                r.kinetic_mixture += 0.5 * coef.phi * coef.rho_f * (v + qq / coef.phi).norm_squared() * jw;
                r.pressure_storage += 0.5 * coef.s0 * p * p * jw;
                r.darcy_dissipation += qq.dot(&(coef.k_inv * qq)) * jw;
                // first Piola–Kirchhoff stress of the full strain at u^k
                let s = svk_stress(&green_lagrange(&st.f, &st.f), coef.lambda_s, coef.mu_s);
                let grad_v = vector_gradient(vs, &fields.vs, l, &disc.p2, q);
                r.elastic_power += ddot(&(st.f * s), &grad_v) * w;
            }
        }
    }
    if let (Some(vf), Some(vs)) = (&disc.vf, &disc.vs) {
        for (fi, f) in disc.interface.iter().enumerate() {
            for q in 0..f.solid.weights.len() {
                let ip = geo.interface_at(fi, q);
                let ds = f.solid.weights[q] * ip.js;
                let uf: Vector<D> = vector_value(vf, &fields.vf, f.fluid_cell, &f.fluid.p2, q);
                let us = vector_value(vs, &fields.vs, f.solid_cell, &f.solid.p2, q);
                let qq = vector_value(vs, &fields.q, f.solid_cell, &f.solid.p2, q);
                let slip = ip.p * (uf - us);
                r.bjs_dissipation += coef.gamma * slip.dot(&(coef.k_inv_sqrt * slip)) * ds;
                r.penalty_defect += (uf - us - qq).dot(&ip.n).abs() * ds;
            }
        }
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipationCheck {
    pub passed: bool,
    /// Index in the series of the largest increase, if any increase occurred.
    pub worst_step: Option<usize>,
    pub worst_increase: f64,
}

/// Check `E(k) ≤ E(k−1) + tol_step` along a series of total energies.
pub fn dissipation_check(totals: &[f64], tol_step: f64) -> DissipationCheck {
    let mut worst: Option<(usize, f64)> = None;
    for k in 1..totals.len() {
        let inc = totals[k] - totals[k - 1];
        if inc > 0.0 && worst.is_none_or(|(_, w)| inc > w) {
            worst = Some((k, inc));
        }
    }
    let worst_increase = worst.map_or(0.0, |w| w.1);
    DissipationCheck {
        passed: worst_increase <= tol_step && totals.iter().all(|e| e.is_finite()),
        worst_step: worst.map(|w| w.0),
        worst_increase,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dissipation_examples() {
        assert!(dissipation_check(&[1.0, 0.5, 0.25], 0.0).passed);
        let c = dissipation_check(&[1.0, 1.5, 1.0], 1e-3);
        assert!(!c.passed);
        assert_eq!(c.worst_step, Some(1));
        assert!(dissipation_check(&[2.0, 2.0, 2.0], 0.0).passed);
    }
}
