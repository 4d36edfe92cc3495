//! Boundary data, body forces and sources of a concrete problem.
//!
//! Coordinates are reference (mesh) coordinates; with frozen geometry they
//! coincide with physical ones.

use serde::{Deserialize, Serialize};

use crate::mesh::Marker;
use crate::tensor::Vector;

pub trait ProblemData<const D: usize>: Sync {
    /// Prescribed fluid velocity on Dirichlet fluid boundaries.
    fn fluid_velocity(&self, _x: &Vector<D>, _t: f64) -> Vector<D> {
        Vector::zeros()
    }

    /// Prescribed structure velocity on the fixed structure boundary.
    fn solid_velocity(&self, _x: &Vector<D>, _t: f64) -> Vector<D> {
        Vector::zeros()
    }

    /// Prescribed pore pressure on the fixed structure boundary.
    fn pore_pressure(&self, _x: &Vector<D>, _t: f64) -> f64 {
        0.0
    }

    /// Whether `pore_pressure` may be nonzero, which adds its boundary term to the flux equation.
    fn has_pore_pressure_data(&self) -> bool {
        false
    }

    /// Value for the pinned fluid pressure DOF (closed fluid boxes only).
    fn fluid_pressure_pin(&self, _x: &Vector<D>, _t: f64) -> f64 {
        0.0
    }

    /// Whether any volume forcing is present; when false the force hooks are skipped.
    fn has_forcing(&self) -> bool {
        false
    }

    fn fluid_force(&self, _x: &Vector<D>, _t: f64) -> Vector<D> {
        Vector::zeros()
    }

    fn solid_force(&self, _x: &Vector<D>, _t: f64) -> Vector<D> {
        Vector::zeros()
    }

    fn darcy_force(&self, _x: &Vector<D>, _t: f64) -> Vector<D> {
        Vector::zeros()
    }

    /// Right-hand side of the fluid continuity equation.
    fn fluid_source(&self, _x: &Vector<D>, _t: f64) -> f64 {
        0.0
    }

    /// Right-hand side of the pore mass balance.
    fn pore_source(&self, _x: &Vector<D>, _t: f64) -> f64 {
        0.0
    }

    /// External pressure on a natural fluid boundary.
    fn boundary_pressure(&self, _marker: Marker, _x: &Vector<D>, _t: f64) -> f64 {
        0.0
    }
}

/// Homogeneous data: no forcing, zero boundary values.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoData;

impl<const D: usize> ProblemData<D> for NoData {}

/// External pressure pulse on the inlet; all other data homogeneous.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PressurePulse {
    pub amplitude: f64,
    pub start: f64,
    pub end: f64,
}

impl Default for PressurePulse {
    /// 1.333e3 Pa (= g/(mm·s²)) for `t ∈ (0, 3 ms)`.
    fn default() -> Self {
        PressurePulse {
            amplitude: 1.333e3,
            start: 0.0,
            end: 3e-3,
        }
    }
}

impl PressurePulse {
    pub fn value(&self, t: f64) -> f64 {
        if t > self.start && t < self.end {
            self.amplitude
        } else {
            0.0
        }
    }
}

impl<const D: usize> ProblemData<D> for PressurePulse {
    fn boundary_pressure(&self, marker: Marker, _x: &Vector<D>, t: f64) -> f64 {
        if marker == Marker::GammaF0 {
            self.value(t)
        } else {
            0.0
        }
    }
}
