//! Manufactured solutions on the unit square with frozen geometry.
//!
//! Forcing terms are the strong-form residuals of the discrete operators:
//! `−div(2 μ_f D v) + ∇p` in the fluid, and in the structure the elastic
//! operator at zero displacement, `−div(½ σ_lin(u))`, because the linearized
//! strain about an undeformed state is `½ ε(u)`.

use std::f64::consts::PI;

use nalgebra::vector;

use crate::kinematics::{MaterialParams, Permeability};
use crate::problem::ProblemData;
use crate::tensor::Vector;

type V2 = Vector<2>;

/// Exact fields of a manufactured problem, `None` where a field is not part of it.
pub trait ExactSolution: ProblemData<2> {
    fn fluid_velocity_exact(&self, _x: &V2, _t: f64) -> Option<V2> {
        None
    }
    fn fluid_pressure_exact(&self, _x: &V2, _t: f64) -> Option<f64> {
        None
    }
    fn solid_velocity_exact(&self, _x: &V2, _t: f64) -> Option<V2> {
        None
    }
    fn flux_exact(&self, _x: &V2, _t: f64) -> Option<V2> {
        None
    }
    fn pore_pressure_exact(&self, _x: &V2, _t: f64) -> Option<f64> {
        None
    }
    fn displacement_exact(&self, _x: &V2, _t: f64) -> Option<V2> {
        None
    }
    /// Whether the convective term is part of the problem.
    fn convection(&self) -> bool {
        false
    }
    /// Material constants the forcing was derived for.
    fn params(&self) -> MaterialParams;
}

/// Unit constants; the fluid and structure entries are both used.
pub fn unit_params() -> MaterialParams {
    MaterialParams {
        rho_f: 1.0,
        rho_s: 1.0,
        mu_f: 1.0,
        lambda_s: 1.0,
        mu_s: 1.0,
        phi: 0.5,
        s0: 1.0,
        permeability: Permeability::Isotropic(1.0),
        gamma: 1.0,
    }
}

/// Steady Stokes flow with `v = (x², −2xy)`, `p = x − y`: exactly representable.
#[derive(Debug, Clone, Copy)]
pub struct StokesPolynomial {
    pub mu: f64,
}

impl ProblemData<2> for StokesPolynomial {
    fn fluid_velocity(&self, x: &V2, _t: f64) -> V2 {
        vector![x[0] * x[0], -2.0 * x[0] * x[1]]
    }
    fn fluid_pressure_pin(&self, x: &V2, _t: f64) -> f64 {
        x[0] - x[1]
    }
    fn has_forcing(&self) -> bool {
        true
    }
    fn fluid_force(&self, _x: &V2, _t: f64) -> V2 {
        // −μΔv + ∇p with Δv = (2, 0)
        vector![1.0 - 2.0 * self.mu, -1.0]
    }
}

impl ExactSolution for StokesPolynomial {
    fn fluid_velocity_exact(&self, x: &V2, t: f64) -> Option<V2> {
        Some(self.fluid_velocity(x, t))
    }
    fn fluid_pressure_exact(&self, x: &V2, t: f64) -> Option<f64> {
        Some(self.fluid_pressure_pin(x, t))
    }
    fn params(&self) -> MaterialParams {
        MaterialParams {
            mu_f: self.mu,
            ..unit_params()
        }
    }
}

// S(s) = sin²(πs) and its derivatives
fn s0(s: f64) -> f64 {
    (PI * s).sin().powi(2)
}
fn s1(s: f64) -> f64 {
    PI * (2.0 * PI * s).sin()
}
fn s2(s: f64) -> f64 {
    2.0 * PI * PI * (2.0 * PI * s).cos()
}
fn s3(s: f64) -> f64 {
    -4.0 * PI.powi(3) * (2.0 * PI * s).sin()
}

/// Steady Stokes flow from the stream function `S(x) S(y)`, `p = cos πx cos πy`.
#[derive(Debug, Clone, Copy)]
pub struct StokesTrig {
    pub mu: f64,
}

impl ProblemData<2> for StokesTrig {
    fn fluid_velocity(&self, x: &V2, _t: f64) -> V2 {
        vector![s0(x[0]) * s1(x[1]), -s1(x[0]) * s0(x[1])]
    }
    fn fluid_pressure_pin(&self, x: &V2, _t: f64) -> f64 {
        (PI * x[0]).cos() * (PI * x[1]).cos()
    }
    fn has_forcing(&self) -> bool {
        true
    }
    fn fluid_force(&self, x: &V2, _t: f64) -> V2 {
        let (a, b) = (x[0], x[1]);
        let lap = vector![
            s2(a) * s1(b) + s0(a) * s3(b),
            -(s3(a) * s0(b) + s1(a) * s2(b))
        ];
        let grad_p = vector![
            -PI * (PI * a).sin() * (PI * b).cos(),
            -PI * (PI * a).cos() * (PI * b).sin()
        ];
        grad_p - lap * self.mu
    }
}

impl ExactSolution for StokesTrig {
    fn fluid_velocity_exact(&self, x: &V2, t: f64) -> Option<V2> {
        Some(self.fluid_velocity(x, t))
    }
    fn fluid_pressure_exact(&self, x: &V2, t: f64) -> Option<f64> {
        Some(self.fluid_pressure_pin(x, t))
    }
    fn params(&self) -> MaterialParams {
        MaterialParams {
            mu_f: self.mu,
            ..unit_params()
        }
    }
}

/// Steady Biot flow with displacement growing linearly in time:
/// `v_s = (s s, s s)`, `u = t v_s`, `q = (cos πx sin πy, sin πx cos πy)`,
/// `p_d = cos πx cos πy`, where `s s = sin πx sin πy`.
#[derive(Debug, Clone)]
pub struct BiotTrig {
    pub params: MaterialParams,
}

impl BiotTrig {
    pub fn new() -> Self {
        BiotTrig { params: unit_params() }
    }

    fn k_inv(&self) -> f64 {
        match self.params.permeability {
            Permeability::Isotropic(k) => 1.0 / k,
            Permeability::Tensor(_) => unreachable!("manufactured Biot problem uses isotropic permeability"),
        }
    }

    fn vs(x: &V2) -> V2 {
        let ss = (PI * x[0]).sin() * (PI * x[1]).sin();
        vector![ss, ss]
    }

    fn q(x: &V2) -> V2 {
        vector![
            (PI * x[0]).cos() * (PI * x[1]).sin(),
            (PI * x[0]).sin() * (PI * x[1]).cos()
        ]
    }

    fn p(x: &V2) -> f64 {
        (PI * x[0]).cos() * (PI * x[1]).cos()
    }

    fn grad_p(x: &V2) -> V2 {
        vector![
            -PI * (PI * x[0]).sin() * (PI * x[1]).cos(),
            -PI * (PI * x[0]).cos() * (PI * x[1]).sin()
        ]
    }
}

impl Default for BiotTrig {
    fn default() -> Self {
        BiotTrig::new()
    }
}

impl ProblemData<2> for BiotTrig {
    fn solid_velocity(&self, x: &V2, _t: f64) -> V2 {
        BiotTrig::vs(x)
    }
    fn pore_pressure(&self, x: &V2, _t: f64) -> f64 {
        BiotTrig::p(x)
    }
    fn has_pore_pressure_data(&self) -> bool {
        true
    }
    fn has_forcing(&self) -> bool {
        true
    }
    fn solid_force(&self, x: &V2, t: f64) -> V2 {
        let (l, m) = (self.params.lambda_s, self.params.mu_s);
        let ss = (PI * x[0]).sin() * (PI * x[1]).sin();
        let cs = (PI * (x[0] + x[1])).cos();
        // div σ_lin(v_s) = μ Δv + (λ + μ) ∇ div v, both components equal
        let div_sigma = -2.0 * PI * PI * m * ss + (l + m) * PI * PI * cs;
        vector![1.0, 1.0] * (-0.5 * t * div_sigma) + BiotTrig::grad_p(x)
    }
    fn darcy_force(&self, x: &V2, _t: f64) -> V2 {
        BiotTrig::q(x) * self.k_inv() + BiotTrig::grad_p(x)
    }
    fn pore_source(&self, x: &V2, _t: f64) -> f64 {
        let div_v = PI * (PI * (x[0] + x[1])).sin();
        let div_q = -2.0 * PI * (PI * x[0]).sin() * (PI * x[1]).sin();
        div_v + div_q
    }
}

impl ExactSolution for BiotTrig {
    fn solid_velocity_exact(&self, x: &V2, _t: f64) -> Option<V2> {
        Some(BiotTrig::vs(x))
    }
    fn flux_exact(&self, x: &V2, _t: f64) -> Option<V2> {
        Some(BiotTrig::q(x))
    }
    fn pore_pressure_exact(&self, x: &V2, _t: f64) -> Option<f64> {
        Some(BiotTrig::p(x))
    }
    fn displacement_exact(&self, x: &V2, t: f64) -> Option<V2> {
        Some(BiotTrig::vs(x) * t)
    }
    fn params(&self) -> MaterialParams {
        self.params.clone()
    }
}

/// Amplitude `g(t) = 1 + sin 2t` of the time-dependent flows.
fn g(t: f64) -> f64 {
    1.0 + (2.0 * t).sin()
}
fn dg(t: f64) -> f64 {
    2.0 * (2.0 * t).cos()
}
/// `G(t) = ∫₀ᵗ g`.
fn big_g(t: f64) -> f64 {
    t + 0.5 * (1.0 - (2.0 * t).cos())
}

/// Navier–Stokes flow `v = g(t)(x², −2xy)`, `p = g(t)(x − y)`; exact in space,
/// so the discrete error is the time-discretization error.
#[derive(Debug, Clone, Copy, Default)]
pub struct FluidTime;

impl ProblemData<2> for FluidTime {
    fn fluid_velocity(&self, x: &V2, t: f64) -> V2 {
        vector![x[0] * x[0], -2.0 * x[0] * x[1]] * g(t)
    }
    fn fluid_pressure_pin(&self, x: &V2, t: f64) -> f64 {
        (x[0] - x[1]) * g(t)
    }
    fn has_forcing(&self) -> bool {
        true
    }
    fn fluid_force(&self, x: &V2, t: f64) -> V2 {
        let p = unit_params();
        let v0 = vector![x[0] * x[0], -2.0 * x[0] * x[1]];
        // (∇v0) v0
        let conv = vector![2.0 * x[0].powi(3), 2.0 * x[0] * x[0] * x[1]];
        let lap = vector![2.0, 0.0];
        let grad_p = vector![1.0, -1.0];
        (v0 * dg(t) + conv * (g(t) * g(t))) * p.rho_f - lap * (p.mu_f * g(t)) + grad_p * g(t)
    }
}

impl ExactSolution for FluidTime {
    fn fluid_velocity_exact(&self, x: &V2, t: f64) -> Option<V2> {
        Some(self.fluid_velocity(x, t))
    }
    fn fluid_pressure_exact(&self, x: &V2, t: f64) -> Option<f64> {
        Some(self.fluid_pressure_pin(x, t))
    }
    fn convection(&self) -> bool {
        true
    }
    fn params(&self) -> MaterialParams {
        unit_params()
    }
}

/// Biot flow with `v_s = g(t) a`, `u = G(t) a`, `q = g(t) b`, `p_d = g(t) c`
/// for `a = (x² + y, xy)`, `b = (y², x²)`, `c = x + 2y`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SolidTime;

impl SolidTime {
    fn a(x: &V2) -> V2 {
        vector![x[0] * x[0] + x[1], x[0] * x[1]]
    }
    fn b(x: &V2) -> V2 {
        vector![x[1] * x[1], x[0] * x[0]]
    }
    fn c(x: &V2) -> f64 {
        x[0] + 2.0 * x[1]
    }
}

impl ProblemData<2> for SolidTime {
    fn solid_velocity(&self, x: &V2, t: f64) -> V2 {
        SolidTime::a(x) * g(t)
    }
    fn pore_pressure(&self, x: &V2, t: f64) -> f64 {
        SolidTime::c(x) * g(t)
    }
    fn has_pore_pressure_data(&self) -> bool {
        true
    }
    fn has_forcing(&self) -> bool {
        true
    }
    fn solid_force(&self, x: &V2, t: f64) -> V2 {
        let p = unit_params();
        let rho_p = p.mixture_density();
        // Δa = (2, 0), ∇ div a = (3, 0)
        let div_sigma = vector![2.0 * p.mu_s + 3.0 * (p.lambda_s + p.mu_s), 0.0];
        let grad_c = vector![1.0, 2.0];
        (SolidTime::a(x) * rho_p + SolidTime::b(x) * p.rho_f) * dg(t) - div_sigma * (0.5 * big_g(t))
            + grad_c * g(t)
    }
    fn darcy_force(&self, x: &V2, t: f64) -> V2 {
        let p = unit_params();
        let k_inv = 1.0;
        let grad_c = vector![1.0, 2.0];
        (SolidTime::a(x) * p.rho_f + SolidTime::b(x) * (p.rho_f / p.phi)) * dg(t)
            + SolidTime::b(x) * (k_inv * g(t))
            + grad_c * g(t)
    }
    fn pore_source(&self, x: &V2, t: f64) -> f64 {
        let p = unit_params();
        // div a = 3x, div b = 0
        p.s0 * SolidTime::c(x) * dg(t) + 3.0 * x[0] * g(t)
    }
}

impl ExactSolution for SolidTime {
    fn solid_velocity_exact(&self, x: &V2, t: f64) -> Option<V2> {
        Some(self.solid_velocity(x, t))
    }
    fn flux_exact(&self, x: &V2, t: f64) -> Option<V2> {
        Some(SolidTime::b(x) * g(t))
    }
    fn pore_pressure_exact(&self, x: &V2, t: f64) -> Option<f64> {
        Some(self.pore_pressure(x, t))
    }
    fn displacement_exact(&self, x: &V2, t: f64) -> Option<V2> {
        Some(SolidTime::a(x) * big_g(t))
    }
    fn params(&self) -> MaterialParams {
        unit_params()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Central differences of the closed-form derivatives.
    #[test]
    fn stream_function_derivatives() {
        let e = 1e-5;
        for s in [0.1, 0.37, 0.8] {
            assert!(((s0(s + e) - s0(s - e)) / (2.0 * e) - s1(s)).abs() < 1e-6);
            assert!(((s1(s + e) - s1(s - e)) / (2.0 * e) - s2(s)).abs() < 1e-5);
            assert!(((s2(s + e) - s2(s - e)) / (2.0 * e) - s3(s)).abs() < 1e-4);
        }
        assert!(((big_g(0.3 + e) - big_g(0.3 - e)) / (2.0 * e) - g(0.3)).abs() < 1e-8);
        assert!(((g(0.3 + e) - g(0.3 - e)) / (2.0 * e) - dg(0.3)).abs() < 1e-8);
    }

    /// The trig Stokes velocity is divergence free.
    #[test]
    fn trig_velocity_is_solenoidal() {
        let e = 1e-6;
        let st = StokesTrig { mu: 1.0 };
        for x in [vector![0.2, 0.7], vector![0.55, 0.15]] {
            let dx = (st.fluid_velocity(&(x + vector![e, 0.0]), 0.0) - st.fluid_velocity(&(x - vector![e, 0.0]), 0.0)) / (2.0 * e);
            let dy = (st.fluid_velocity(&(x + vector![0.0, e]), 0.0) - st.fluid_velocity(&(x - vector![0.0, e]), 0.0)) / (2.0 * e);
            assert!((dx[0] + dy[1]).abs() < 1e-7);
        }
    }
}
