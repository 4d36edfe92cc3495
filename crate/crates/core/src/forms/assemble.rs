//! Global assembly of the monolithic system and the mesh-extension system.

use rayon::prelude::*;

use super::discretization::Discretization;
use super::geometry::vector_gradient;
use super::kernels::{
    backflow_facet, fluid_cell, interface_facet, natural_facet, pore_boundary_facet, solid_cell, BoundaryLoad, KernelInput, LocalSystem,
};
use super::layout::Block;
use super::sparse::CsrMatrix;
use crate::error::{FpsiError, Result};
use crate::kinematics::deformation_state;
use crate::tensor::Vector;

/// Time-discretization weights: the derivative is `(α0 x^k + α1 x^{k−1} + α2 x^{k−2}) / Δt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeWeights {
    pub alpha: [f64; 3],
    pub dt: f64,
}

/// Known history entering the right-hand side.
#[derive(Debug, Clone, Copy)]
pub struct HistoryTerms<'a> {
    /// `α1 x^{k−1} + α2 x^{k−2}` over all unknowns.
    pub unknowns: &'a [f64],
    /// `α1 u^{k−1} + α2 u^{k−2}` of the structure displacement.
    pub displacement: &'a [f64],
}

#[derive(Debug, Clone)]
pub struct BlockSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
}

/// Every local system of the monolithic problem, in a fixed order.
pub fn local_systems<const D: usize>(inp: &KernelInput<D>) -> Result<Vec<LocalSystem>> {
    let disc = inp.disc;
    let mut out: Vec<LocalSystem> = (0..disc.n_fluid_cells()).into_par_iter().map(|l| fluid_cell(inp, l)).collect();
    out.par_extend((0..disc.n_solid_cells()).into_par_iter().map(|l| solid_cell(inp, l)));
    out.par_extend((0..disc.interface.len()).into_par_iter().map(|f| interface_facet(inp, f)));
    if inp.mask.backflow && inp.mask.inertia && inp.advection.is_some() {
        for i in 0..disc.natural.len() {
            out.push(backflow_facet(inp, i)?);
        }
    }
    Ok(out)
}

fn boundary_loads<const D: usize>(inp: &KernelInput<D>) -> Result<Vec<BoundaryLoad>> {
    let disc = inp.disc;
    let mut out = Vec::new();
    if !inp.mask.loads {
        return Ok(out);
    }
    for i in 0..disc.natural.len() {
        out.push(natural_facet(inp, i)?);
    }
    if inp.data.has_pore_pressure_data() {
        for i in 0..disc.pore_boundary.len() {
            out.push(pore_boundary_facet(inp, i)?);
        }
    }
    Ok(out)
}

/// Dirichlet constraints `(global DOF, value)` at time `t`.
pub fn dirichlet_constraints<const D: usize>(inp: &KernelInput<D>, t: f64) -> Vec<(usize, f64)> {
    let disc = inp.disc;
    let mut out = Vec::new();
    let mut vector_block = |b: Block, f: &dyn Fn(&Vector<D>) -> Vector<D>| {
        if let Some(s) = disc.space(b) {
            let off = disc.layout.offset(b);
            for node in s.dirichlet_nodes() {
                let v = f(s.node_coord(node));
                for a in 0..D {
                    out.push((off + s.dof(node, a), v[a]));
                }
            }
        }
    };
    vector_block(Block::FluidVelocity, &|x| inp.data.fluid_velocity(x, t));
    vector_block(Block::SolidVelocity, &|x| inp.data.solid_velocity(x, t));
    if let Some(s) = &disc.pd {
        let off = disc.layout.offset(Block::PorePressure);
        for node in s.dirichlet_nodes() {
            out.push((off + node, inp.data.pore_pressure(s.node_coord(node), t)));
        }
    }
    if let (Some(node), Some(s)) = (disc.pressure_pin, &disc.pf) {
        let off = disc.layout.offset(Block::FluidPressure);
        out.push((off + node, inp.data.fluid_pressure_pin(s.node_coord(node), t)));
    }
    out
}

/// Assemble `A x^k = b` for one time level.
///
/// The structure displacement is eliminated through the time discretization,
/// `u^k = (Δt/α0) v_s^k − (α1 u^{k−1} + α2 u^{k−2})/α0`, so the elastic operator
/// acts on the velocity unknown.
pub fn assemble_system<const D: usize>(
    inp: &KernelInput<D>,
    time: TimeWeights,
    history: HistoryTerms,
) -> Result<BlockSystem> {
    let disc = inp.disc;
    let n = disc.layout.total();
    if history.unknowns.len() != n || history.displacement.len() != disc.layout.size(Block::SolidVelocity) {
        return Err(FpsiError::Dimension("history vectors do not match the layout".into()));
    }
    let [a0, ..] = time.alpha;
    let dt = time.dt;
    let vs_off = disc.layout.offset(Block::SolidVelocity);
    let vs_range = disc.layout.range(Block::SolidVelocity);

    let mut a = disc.empty_matrix();
    let mut b = vec![0.0; n];
    for ls in local_systems(inp)? {
        let m = ls.n();
        let mut local = ls.op.clone();
        let mut rhs = ls.rhs.clone();
        let hist: Vec<f64> = ls.dofs.iter().map(|&d| history.unknowns[d]).collect();
        // displacement history h = −(α1 u1 + α2 u2)/α0 on structure velocity rows
        let h: Vec<f64> = ls
            .dofs
            .iter()
            .map(|&d| {
                if vs_range.contains(&d) {
                    -history.displacement[d - vs_off] / a0
                } else {
                    0.0
                }
            })
            .collect();
        for r in 0..m {
            let mut mh = 0.0;
            let mut kh = 0.0;
            for c in 0..m {
                let (mv, kv) = (ls.mass[r * m + c], ls.elastic[r * m + c]);
                local[r * m + c] += a0 / dt * mv + dt / a0 * kv;
                mh += mv * hist[c];
                kh += kv * h[c];
            }
            rhs[r] -= mh / dt + kh + ls.elastic_rhs[r];
        }
        a.add_local(&ls.dofs, &local);
        for (r, &d) in ls.dofs.iter().enumerate() {
            b[d] += rhs[r];
        }
    }
    for load in boundary_loads(inp)? {
        for (r, &d) in load.dofs.iter().enumerate() {
            b[d] += load.rhs[r];
        }
    }
    a.apply_dirichlet(&mut b, &dirichlet_constraints(inp, inp.time));
    if let Some(r) = a.first_empty_row() {
        let (blk, i) = disc.layout.locate(r).unwrap();
        return Err(FpsiError::Assembly(format!("row {i} of block {} is empty", blk.name())));
    }
    Ok(BlockSystem { matrix: a, rhs: b })
}

/// Per-cell stiffness of the mesh-extension problem: `μ_m = μ_s |Δ_e|^{−1.2}`,
/// `λ_m = 16 μ_m`, with `|Δ_e|` and `F` taken from the displacement `u_prev`.
pub fn extension_matrix<const D: usize>(disc: &Discretization<D>, u_prev: &[f64], mu_s: f64) -> Result<CsrMatrix> {
    let space = disc
        .ext
        .as_ref()
        .ok_or_else(|| FpsiError::Assembly("no fluid subdomain to extend into".into()))?;
    let mut a = disc.empty_extension_matrix().unwrap();
    let locals: Result<Vec<(Vec<usize>, Vec<f64>)>> = (0..space.cells().len())
        .into_par_iter()
        .map(|l| {
            let cg = space.geometry(l);
            let n2 = space.nodes_per_cell();
            let n = n2 * D;
            let nq = disc.n_quad();
            let mut states = Vec::with_capacity(nq);
            let mut vol = 0.0;
            for q in 0..nq {
                let st = deformation_state(&vector_gradient(space, u_prev, l, &disc.p2, q))
                    .map_err(|e| e.at_cell(space.cells()[l]))?;
                vol += st.j * disc.cell_rule.weights[q] * cg.det_b.abs();
                states.push(st);
            }
            let mu_m = mu_s * vol.powf(-1.2);
            let lambda_m = 16.0 * mu_m;
            let mut local = vec![0.0; n * n];
            for (q, st) in states.iter().enumerate() {
                let jw = st.j * disc.cell_rule.weights[q] * cg.det_b.abs();
                let g: Vec<Vector<D>> = disc
                    .p2
                    .grads_at(q)
                    .iter()
                    .map(|gr| st.f_inv_t * cg.grad(gr))
                    .collect();
                for i in 0..n2 {
                    for j in 0..n2 {
                        let gij = g[i].dot(&g[j]);
                        for b in 0..D {
                            for a2 in 0..D {
                                let d = if a2 == b { gij } else { 0.0 };
                                local[(i * D + b) * n + j * D + a2] +=
                                    jw * (lambda_m * g[j][a2] * g[i][b] + mu_m * (d + g[j][b] * g[i][a2]));
                            }
                        }
                    }
                }
            }
            Ok((space.cell_dofs(l), local))
        })
        .collect();
    for (dofs, local) in locals? {
        a.add_local(&dofs, &local);
    }
    Ok(a)
}
