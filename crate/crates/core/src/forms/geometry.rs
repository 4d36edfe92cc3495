//! Deformation data at every quadrature point for one displacement field.

use super::discretization::{Discretization, FacetQuadrature};
use crate::error::{FpsiError, Result};
use crate::fe::{FunctionSpace, Tabulation};
use crate::kinematics::{deformation_state, pushforward_normal, DeformationState};
use crate::tensor::{outer, Tensor, Vector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfacePoint<const D: usize> {
    pub state: DeformationState<D>,
    /// Surface scaling `J |F^{-T} ñ|`.
    pub js: f64,
    /// Current unit normal, fluid to structure.
    pub n: Vector<D>,
    /// Tangential projector `I − n nᵀ`.
    pub p: Tensor<D>,
}

/// Deformation states at cell and interface quadrature points.
#[derive(Debug, Clone)]
pub struct GeometricFields<const D: usize> {
    pub fluid: Vec<DeformationState<D>>,
    pub solid: Vec<DeformationState<D>>,
    pub interface: Vec<InterfacePoint<D>>,
    nq: usize,
    nqf: usize,
}

/// `∇u` at tabulation point `q` of a local cell.
pub fn vector_gradient<const D: usize>(
    space: &FunctionSpace<D>,
    coeffs: &[f64],
    cell: usize,
    tab: &Tabulation,
    q: usize,
) -> Tensor<D> {
    let geo = space.geometry(cell);
    let mut g = Tensor::<D>::zeros();
    for (i, &n) in space.cell_nodes(cell).iter().enumerate() {
        let dn = geo.grad(&tab.grads_at(q)[i]);
        let u = Vector::<D>::from_fn(|a, _| coeffs[n * D + a]);
        g += outer(&u, &dn);
    }
    g
}

/// Vector field value at tabulation point `q` of a local cell.
pub fn vector_value<const D: usize>(
    space: &FunctionSpace<D>,
    coeffs: &[f64],
    cell: usize,
    tab: &Tabulation,
    q: usize,
) -> Vector<D> {
    let mut v = Vector::<D>::zeros();
    for (i, &n) in space.cell_nodes(cell).iter().enumerate() {
        let phi = tab.values_at(q)[i];
        for a in 0..D {
            v[a] += phi * coeffs[n * D + a];
        }
    }
    v
}

/// Scalar field value at tabulation point `q` of a local cell.
pub fn scalar_value<const D: usize>(
    space: &FunctionSpace<D>,
    coeffs: &[f64],
    cell: usize,
    tab: &Tabulation,
    q: usize,
) -> f64 {
    space
        .cell_nodes(cell)
        .iter()
        .enumerate()
        .map(|(i, &n)| tab.values_at(q)[i] * coeffs[n])
        .sum()
}

fn cell_states<const D: usize>(
    space: &FunctionSpace<D>,
    u: Option<&[f64]>,
    tab: &Tabulation,
    nq: usize,
) -> Result<Vec<DeformationState<D>>> {
    let n = space.cells().len();
    let mut out = Vec::with_capacity(n * nq);
    for l in 0..n {
        for q in 0..nq {
            let st = match u {
                Some(u) => deformation_state(&vector_gradient(space, u, l, tab, q))
                    .map_err(|e| e.at_cell(space.cells()[l]))?,
                None => DeformationState::identity(),
            };
            out.push(st);
        }
    }
    Ok(out)
}

/// Deformation state at facet quadrature point `q` seen from the facet's cell.
pub fn facet_state<const D: usize>(
    space: &FunctionSpace<D>,
    u: Option<&[f64]>,
    cell: usize,
    quad: &FacetQuadrature<D>,
    q: usize,
) -> Result<DeformationState<D>> {
    match u {
        Some(u) => deformation_state(&vector_gradient(space, u, cell, &quad.p2, q)).map_err(|e| e.at_cell(space.cells()[cell])),
        None => Ok(DeformationState::identity()),
    }
}

impl<const D: usize> GeometricFields<D> {
    /// Evaluate from fluid-mesh and structure displacements; `None` means undeformed.
    pub fn new(disc: &Discretization<D>, uf: Option<&[f64]>, us: Option<&[f64]>) -> Result<Self> {
        let nq = disc.n_quad();
        let fluid = match &disc.vf {
            Some(s) => cell_states(s, uf, &disc.p2, nq)?,
            None => Vec::new(),
        };
        let solid = match &disc.vs {
            Some(s) => cell_states(s, us, &disc.p2, nq)?,
            None => Vec::new(),
        };
        let nqf = disc.interface.first().map_or(0, |f| f.solid.weights.len());
        let mut interface = Vec::with_capacity(disc.interface.len() * nqf);
        for f in &disc.interface {
            let vs = disc.vs.as_ref().unwrap();
            for q in 0..nqf {
                // structure-side geometry; the fluid side agrees by continuity of u
                let state = facet_state(vs, us, f.solid_cell, &f.solid, q)?;
                let (n, js) = pushforward_normal(&state.f_inv_t, state.j, &f.facet.normal)
                    .map_err(|e| e.at_cell(f.facet.solid_cell))?;
                interface.push(InterfacePoint {
                    state,
                    js,
                    n,
                    p: Tensor::<D>::identity() - outer(&n, &n),
                });
            }
        }
        Ok(GeometricFields {
            fluid,
            solid,
            interface,
            nq,
            nqf,
        })
    }

    pub fn identity(disc: &Discretization<D>) -> Self {
        GeometricFields::new(disc, None, None).expect("undeformed geometry is valid")
    }

    pub fn fluid_at(&self, cell: usize, q: usize) -> &DeformationState<D> {
        &self.fluid[cell * self.nq + q]
    }

    pub fn solid_at(&self, cell: usize, q: usize) -> &DeformationState<D> {
        &self.solid[cell * self.nq + q]
    }

    pub fn interface_at(&self, facet: usize, q: usize) -> &InterfacePoint<D> {
        &self.interface[facet * self.nqf + q]
    }

    /// Smallest Jacobian over all cell quadrature points.
    pub fn min_jacobian(&self) -> f64 {
        self.fluid.iter().chain(&self.solid).map(|s| s.j).fold(f64::INFINITY, f64::min)
    }

    /// Check the cached invariants: positive Jacobians and projector identities.
    pub fn validate(&self) -> Result<()> {
        if let Some(s) = self.fluid.iter().chain(&self.solid).find(|s| !(s.j > 0.0)) {
            return Err(FpsiError::DegenerateDeformation {
                cell: None,
                jacobian: s.j,
            });
        }
        for ip in &self.interface {
            let pp = ip.p * ip.p - ip.p;
            let pn = ip.p * ip.n;
            if pp.abs().max() > 1e-12 || pn.abs().max() > 1e-12 {
                return Err(FpsiError::Assembly("tangential projector is inconsistent".into()));
            }
        }
        Ok(())
    }
}
