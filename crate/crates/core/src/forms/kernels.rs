//! Element and facet kernels of the monolithic system.
//!
//! Local vectors are node-major: vector DOF `(i, b)` of a P2 block sits at
//! `i·d + b`. A fluid cell holds `[v_f, p_f]`, a structure cell
//! `[v_s, q, p_d]`, an interface facet `[v_f | v_s, q, p_d]`.

use serde::{Deserialize, Serialize};

use super::discretization::Discretization;
use super::geometry::{facet_state, vector_value, GeometricFields};
use crate::error::{FpsiError, Result};
use crate::kinematics::{pushforward_normal, svk_stress, MaterialParams};
use crate::problem::ProblemData;
use crate::tensor::{sym, Tensor, Vector};

/// Switches for individual forms; everything is on in production.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FormMask {
    pub mass: bool,
    pub elastic: bool,
    pub darcy: bool,
    pub viscous: bool,
    pub inertia: bool,
    pub pressure: bool,
    pub penalty: bool,
    pub interface_pressure: bool,
    pub kinetic: bool,
    pub bjs: bool,
    /// Directional do-nothing term on open fluid boundaries.
    pub backflow: bool,
    /// Volume forcing, sources and boundary loads.
    pub loads: bool,
}

impl FormMask {
    pub fn all() -> Self {
        FormMask {
            mass: true,
            elastic: true,
            darcy: true,
            viscous: true,
            inertia: true,
            pressure: true,
            penalty: true,
            interface_pressure: true,
            kinetic: true,
            bjs: true,
            backflow: true,
            loads: true,
        }
    }

    pub fn none() -> Self {
        FormMask {
            mass: false,
            elastic: false,
            darcy: false,
            viscous: false,
            inertia: false,
            pressure: false,
            penalty: false,
            interface_pressure: false,
            kinetic: false,
            bjs: false,
            backflow: false,
            loads: false,
        }
    }
}

impl Default for FormMask {
    fn default() -> Self {
        FormMask::all()
    }
}

/// Interface penalty rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Penalty {
    /// `τ = c · h⁻²` with `h` the facet diameter.
    Scaled(f64),
    Constant(f64),
}

impl Default for Penalty {
    fn default() -> Self {
        Penalty::Scaled(1.0)
    }
}

impl Penalty {
    pub fn tau(&self, h: f64) -> f64 {
        match *self {
            Penalty::Scaled(c) => c / (h * h),
            Penalty::Constant(t) => t,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let v = match *self {
            Penalty::Scaled(c) => c,
            Penalty::Constant(t) => t,
        };
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(FpsiError::Config(format!("penalty must be positive, got {v}")))
        }
    }
}

/// Material constants in the form used by the kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients<const D: usize> {
    pub rho_f: f64,
    pub rho_p: f64,
    pub mu_f: f64,
    pub lambda_s: f64,
    pub mu_s: f64,
    pub phi: f64,
    pub s0: f64,
    pub gamma: f64,
    pub k_inv: Tensor<D>,
    pub k_inv_sqrt: Tensor<D>,
}

impl<const D: usize> Coefficients<D> {
    pub fn new(params: &MaterialParams) -> Result<Self> {
        params.validate::<D>()?;
        Ok(Coefficients {
            rho_f: params.rho_f,
            rho_p: params.mixture_density(),
            mu_f: params.mu_f,
            lambda_s: params.lambda_s,
            mu_s: params.mu_s,
            phi: params.phi,
            s0: params.s0,
            gamma: params.gamma,
            k_inv: params.k_inv::<D>()?,
            k_inv_sqrt: params.k_inv_sqrt::<D>()?,
        })
    }
}

/// Everything the kernels read for one time level.
pub struct KernelInput<'a, const D: usize> {
    pub disc: &'a Discretization<D>,
    pub geo: &'a GeometricFields<D>,
    pub coef: &'a Coefficients<D>,
    pub mask: FormMask,
    /// Advective field `ṽ_f − w̃` in fluid velocity numbering; `None` drops convection.
    pub advection: Option<&'a [f64]>,
    /// Extrapolated fluid velocity for the kinetic interface term.
    pub vf_tilde: Option<&'a [f64]>,
    /// Extrapolated fluid-mesh displacement for boundary geometry; `None` is undeformed.
    pub uf_tilde: Option<&'a [f64]>,
    /// Extrapolated structure displacement for boundary geometry.
    pub us_tilde: Option<&'a [f64]>,
    pub penalty: Penalty,
    pub sign_pext: f64,
    pub data: &'a dyn ProblemData<D>,
    pub time: f64,
}

/// Dense local contributions of one cell or facet. Matrices are row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalSystem {
    pub dofs: Vec<usize>,
    /// Multiplies the discrete time derivative.
    pub mass: Vec<f64>,
    /// Structure stiffness acting on the displacement.
    pub elastic: Vec<f64>,
    /// Everything acting directly on the unknowns.
    pub op: Vec<f64>,
    pub rhs: Vec<f64>,
    /// Stress of the extrapolated state tested against each row.
    pub elastic_rhs: Vec<f64>,
}

impl LocalSystem {
    fn new(dofs: Vec<usize>) -> Self {
        let n = dofs.len();
        LocalSystem {
            dofs,
            mass: vec![0.0; n * n],
            elastic: vec![0.0; n * n],
            op: vec![0.0; n * n],
            rhs: vec![0.0; n],
            elastic_rhs: vec![0.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.dofs.len()
    }
}

fn physical_gradients<const D: usize>(grads: &[[f64; 3]], b_inv_t: &Tensor<D>) -> Vec<Vector<D>> {
    grads
        .iter()
        .map(|g| b_inv_t * Vector::<D>::from_fn(|i, _| g[i]))
        .collect()
}

/// Viscous, inertia, mass, pressure and load terms of one fluid cell.
pub fn fluid_cell<const D: usize>(inp: &KernelInput<D>, l: usize) -> LocalSystem {
    let disc = inp.disc;
    let vf = disc.vf.as_ref().expect("fluid cell without fluid space");
    let c = inp.coef;
    let m = inp.mask;
    let mut ls = LocalSystem::new(disc.fluid_cell_dofs(l));
    let n = ls.n();
    let n2 = vf.nodes_per_cell();
    let n1 = n - n2 * D;
    let nv = n2 * D;
    let cg = vf.geometry(l);
    let forcing = m.loads && inp.data.has_forcing();
    for q in 0..disc.n_quad() {
        let st = inp.geo.fluid_at(l, q);
        let jw = st.j * disc.cell_rule.weights[q] * cg.det_b.abs();
        let nv_q = disc.p2.values_at(q);
        let mv_q = disc.p1.values_at(q);
        let h = physical_gradients(disc.p2.grads_at(q), &cg.b_inv_t);
        let g: Vec<Vector<D>> = h.iter().map(|h| st.f_inv_t * h).collect();
        let phi = match inp.advection {
            Some(a) if m.inertia => Some(vector_value(vf, a, l, &disc.p2, q)),
            _ => None,
        };
        for i in 0..n2 {
            for j in 0..n2 {
                let gij = g[i].dot(&g[j]);
                let nn = nv_q[i] * nv_q[j];
                let conv = phi.map_or(0.0, |p| g[j].dot(&p) * nv_q[i]);
                for b in 0..D {
                    let r = (i * D + b) * n;
                    for a in 0..D {
                        let col = j * D + a;
                        let mut v = 0.0;
                        if m.viscous {
                            let d = if a == b { gij } else { 0.0 };
                            v += c.mu_f * jw * (d + g[j][b] * g[i][a]);
                        }
                        if a == b {
                            v += c.rho_f * jw * conv;
                            if m.mass {
                                ls.mass[r + col] += c.rho_f * jw * nn;
                            }
                        }
                        ls.op[r + col] += v;
                    }
                }
            }
        }
        if m.pressure {
            for i in 0..n2 {
                for b in 0..D {
                    for k in 0..n1 {
                        let v = jw * mv_q[k] * g[i][b];
                        ls.op[(i * D + b) * n + nv + k] -= v;
                        ls.op[(nv + k) * n + i * D + b] += v;
                    }
                }
            }
        }
        if forcing {
            let x = cg.map(&disc.cell_rule.points[q]);
            let f = inp.data.fluid_force(&x, inp.time);
            let s = inp.data.fluid_source(&x, inp.time);
            for i in 0..n2 {
                for b in 0..D {
                    ls.rhs[i * D + b] += jw * f[b] * nv_q[i];
                }
            }
            for k in 0..n1 {
                ls.rhs[nv + k] += jw * s * mv_q[k];
            }
        }
    }
    ls
}

/// Mass, elastic, Darcy, pressure and load terms of one structure cell.
pub fn solid_cell<const D: usize>(inp: &KernelInput<D>, l: usize) -> LocalSystem {
    let disc = inp.disc;
    let vs = disc.vs.as_ref().expect("structure cell without structure space");
    let c = inp.coef;
    let m = inp.mask;
    let mut ls = LocalSystem::new(disc.solid_cell_dofs(l));
    let n = ls.n();
    let n2 = vs.nodes_per_cell();
    let nv = n2 * D;
    let n1 = n - 2 * nv;
    let (os, od, op) = (0, nv, 2 * nv);
    let cg = vs.geometry(l);
    let forcing = m.loads && inp.data.has_forcing();
    let eye = Tensor::<D>::identity();
    for q in 0..disc.n_quad() {
        let st = inp.geo.solid_at(l, q);
        let w = disc.cell_rule.weights[q] * cg.det_b.abs();
        let jw = st.j * w;
        let nv_q = disc.p2.values_at(q);
        let mv_q = disc.p1.values_at(q);
        let h = physical_gradients(disc.p2.grads_at(q), &cg.b_inv_t);
        let g: Vec<Vector<D>> = h.iter().map(|h| st.f_inv_t * h).collect();
        let ft = st.f.transpose();

        for i in 0..n2 {
            for j in 0..n2 {
                let nn = nv_q[i] * nv_q[j] * jw;
                for b in 0..D {
                    for a in 0..D {
                        let (ri, cj) = (i * D + b, j * D + a);
                        if m.mass && a == b {
                            ls.mass[(os + ri) * n + os + cj] += c.rho_p * nn;
                            ls.mass[(os + ri) * n + od + cj] += c.rho_f * nn;
                            ls.mass[(od + ri) * n + os + cj] += c.rho_f * nn;
                            ls.mass[(od + ri) * n + od + cj] += c.rho_f / c.phi * nn;
                        }
                        if m.darcy {
                            ls.op[(od + ri) * n + od + cj] += c.k_inv[(b, a)] * nn;
                        }
                    }
                }
            }
        }
        if m.mass {
            for k in 0..n1 {
                for l2 in 0..n1 {
                    ls.mass[(op + k) * n + op + l2] += c.s0 * jw * mv_q[k] * mv_q[l2];
                }
            }
        }
        if m.elastic {
            // trial displacement e_a ⊗ h_j, linearized about the extrapolated state
            for j in 0..n2 {
                for a in 0..D {
                    let mut grad_w = Tensor::<D>::zeros();
                    grad_w.set_row(a, &h[j].transpose());
                    let e = sym(&(ft * grad_w)) * 0.5;
                    let fs = st.f * svk_stress(&e, c.lambda_s, c.mu_s);
                    for i in 0..n2 {
                        let t = fs * h[i];
                        for b in 0..D {
                            ls.elastic[(os + i * D + b) * n + os + j * D + a] += w * t[b];
                        }
                    }
                }
            }
            let e0 = sym(&(st.f - eye)) * 0.5;
            let fs0 = st.f * svk_stress(&e0, c.lambda_s, c.mu_s);
            for i in 0..n2 {
                let t = fs0 * h[i];
                for b in 0..D {
                    ls.elastic_rhs[os + i * D + b] += w * t[b];
                }
            }
        }
        if m.pressure {
            for i in 0..n2 {
                for b in 0..D {
                    for k in 0..n1 {
                        let v = jw * mv_q[k] * g[i][b];
                        for off in [os, od] {
                            ls.op[(off + i * D + b) * n + op + k] -= v;
                            ls.op[(op + k) * n + off + i * D + b] += v;
                        }
                    }
                }
            }
        }
        if forcing {
            let x = cg.map(&disc.cell_rule.points[q]);
            let fs = inp.data.solid_force(&x, inp.time);
            let fd = inp.data.darcy_force(&x, inp.time);
            let s = inp.data.pore_source(&x, inp.time);
            for i in 0..n2 {
                for b in 0..D {
                    ls.rhs[os + i * D + b] += jw * fs[b] * nv_q[i];
                    ls.rhs[od + i * D + b] += jw * fd[b] * nv_q[i];
                }
            }
            for k in 0..n1 {
                ls.rhs[op + k] += jw * s * mv_q[k];
            }
        }
    }
    ls
}

/// Penalty, pressure coupling, kinetic correction and slip terms on one
/// interface facet.
pub fn interface_facet<const D: usize>(inp: &KernelInput<D>, fi: usize) -> LocalSystem {
    let disc = inp.disc;
    let f = &disc.interface[fi];
    let vf = disc.vf.as_ref().unwrap();
    let c = inp.coef;
    let m = inp.mask;
    let mut ls = LocalSystem::new(disc.interface_dofs(f));
    let n = ls.n();
    let n2 = vf.nodes_per_cell();
    let nv = n2 * D;
    let n1 = n - 3 * nv;
    // blocks: fluid velocity, structure velocity, flux; then p_d
    let offsets = [0, nv, 2 * nv];
    let sigma = [1.0, -1.0, -1.0];
    let kappa = [-1.0, 1.0, 0.0];
    let op = 3 * nv;
    let tau = inp.penalty.tau(f.facet.h);
    for q in 0..f.fluid.weights.len() {
        let ip = inp.geo.interface_at(fi, q);
        let ds = f.solid.weights[q] * ip.js;
        let nvec = ip.n;
        let vals = [f.fluid.p2.values_at(q), f.solid.p2.values_at(q), f.solid.p2.values_at(q)];
        let mvals = f.solid.p1.values_at(q);
        let t = ip.p * c.k_inv_sqrt * ip.p;
        let vt = match inp.vf_tilde {
            Some(v) if m.kinetic => Some(vector_value(vf, v, f.fluid_cell, &f.fluid.p2, q)),
            _ => None,
        };
        for x in 0..3 {
            for i in 0..n2 {
                let nx = vals[x][i];
                for b in 0..D {
                    let r = (offsets[x] + i * D + b) * n;
                    for y in 0..3 {
                        for j in 0..n2 {
                            let nyv = vals[y][j];
                            for a in 0..D {
                                let col = offsets[y] + j * D + a;
                                let mut v = 0.0;
                                if m.penalty {
                                    v += tau * sigma[x] * sigma[y] * nx * nyv * nvec[b] * nvec[a];
                                }
                                if m.bjs && x < 2 && y < 2 {
                                    v += c.gamma * sigma[x] * sigma[y] * nx * nyv * t[(b, a)];
                                }
                                if let (Some(vt), 0) = (vt, y) {
                                    v += 0.5 * c.rho_f * vt[a] * nyv * kappa[x] * nx * nvec[b];
                                }
                                ls.op[r + col] += ds * v;
                            }
                        }
                    }
                    if m.interface_pressure {
                        for k in 0..n1 {
                            ls.op[r + op + k] += ds * sigma[x] * nx * nvec[b] * mvals[k];
                        }
                    }
                }
            }
        }
    }
    ls
}

/// Right-hand side contribution of one natural boundary facet.
pub struct BoundaryLoad {
    pub dofs: Vec<usize>,
    pub rhs: Vec<f64>,
}

/// External pressure on a natural fluid boundary facet.
pub fn natural_facet<const D: usize>(inp: &KernelInput<D>, idx: usize) -> Result<BoundaryLoad> {
    let disc = inp.disc;
    let bf = &disc.natural[idx];
    let vf = disc.vf.as_ref().unwrap();
    let n2 = vf.nodes_per_cell();
    let dofs = disc.global_dofs(super::Block::FluidVelocity, bf.cell);
    let mut rhs = vec![0.0; dofs.len()];
    for q in 0..bf.quad.weights.len() {
        let p = inp.data.boundary_pressure(bf.marker, &bf.quad.points[q], inp.time);
        if p == 0.0 {
            continue;
        }
        let st = facet_state(vf, inp.uf_tilde, bf.cell, &bf.quad, q)?;
        let cn = st.cofactor() * bf.normal;
        let vals = bf.quad.p2.values_at(q);
        for i in 0..n2 {
            for b in 0..D {
                rhs[i * D + b] += inp.sign_pext * p * cn[b] * vals[i] * bf.quad.weights[q];
            }
        }
    }
    Ok(BoundaryLoad { dofs, rhs })
}

/// `−½ ρ_f ∫ J_s (φ·n)⁻ v·ψ ds` on an open fluid boundary, where `(x)⁻ = min(x, 0)`
/// and `φ` is the advective field. It cancels the kinetic energy carried in
/// by inflow through a traction boundary, the source of backflow instability.
pub fn backflow_facet<const D: usize>(inp: &KernelInput<D>, idx: usize) -> Result<LocalSystem> {
    let disc = inp.disc;
    let bf = &disc.natural[idx];
    let vf = disc.vf.as_ref().expect("open boundary without fluid space");
    let mut ls = LocalSystem::new(disc.global_dofs(super::Block::FluidVelocity, bf.cell));
    let Some(adv) = inp.advection.filter(|_| inp.mask.backflow && inp.mask.inertia) else {
        return Ok(ls);
    };
    let n = ls.n();
    let n2 = vf.nodes_per_cell();
    for q in 0..bf.quad.weights.len() {
        let st = facet_state(vf, inp.uf_tilde, bf.cell, &bf.quad, q)?;
        let (normal, js) = pushforward_normal(&st.f_inv_t, st.j, &bf.normal)?;
        let inflow = vector_value(vf, adv, bf.cell, &bf.quad.p2, q).dot(&normal).min(0.0);
        if inflow == 0.0 {
            continue;
        }
        let w = -0.5 * inp.coef.rho_f * inflow * js * bf.quad.weights[q];
        let vals = bf.quad.p2.values_at(q);
        for i in 0..n2 {
            for j in 0..n2 {
                for b in 0..D {
                    ls.op[(i * D + b) * n + j * D + b] += w * vals[i] * vals[j];
                }
            }
        }
    }
    Ok(ls)
}

/// Prescribed pore pressure on the fixed structure boundary, tested with the flux.
pub fn pore_boundary_facet<const D: usize>(inp: &KernelInput<D>, idx: usize) -> Result<BoundaryLoad> {
    let disc = inp.disc;
    let bf = &disc.pore_boundary[idx];
    let vs = disc.vs.as_ref().unwrap();
    let n2 = vs.nodes_per_cell();
    let dofs = disc.global_dofs(super::Block::Flux, bf.cell);
    let mut rhs = vec![0.0; dofs.len()];
    for q in 0..bf.quad.weights.len() {
        let g = inp.data.pore_pressure(&bf.quad.points[q], inp.time);
        if g == 0.0 {
            continue;
        }
        let st = facet_state(vs, inp.us_tilde, bf.cell, &bf.quad, q)?;
        let cn = st.cofactor() * bf.normal;
        let vals = bf.quad.p2.values_at(q);
        for i in 0..n2 {
            for b in 0..D {
                rhs[i * D + b] -= g * cn[b] * vals[i] * bf.quad.weights[q];
            }
        }
    }
    Ok(BoundaryLoad { dofs, rhs })
}
