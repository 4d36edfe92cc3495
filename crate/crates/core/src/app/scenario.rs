//! Built-in problems: the pressure-wave channel, its forcing-free variant and
//! the manufactured solutions.

use nalgebra::vector;

use super::config::{MeshSource, RunConfig, ScenarioId};
use super::mms::{unit_params, BiotTrig, ExactSolution, FluidTime, SolidTime, StokesPolynomial, StokesTrig};
use crate::error::{FpsiError, Result};
use crate::fe::{quadrature, FunctionSpace, ReferenceElement};
use crate::forms::{Discretization, DiscretizationOptions, Fields, FormMask};
use crate::kinematics::MaterialParams;
use crate::mesh::{channel_2d, load_mesh, unit_square, ChannelSpec, Marker, Mesh, SquareTags, Subdomain};
use crate::problem::{PressurePulse, ProblemData};
use crate::tensor::Vector;

type V2 = Vector<2>;

/// Problem data: either a boundary pressure schedule or a manufactured solution.
pub enum ProblemKind {
    Pulse(PressurePulse),
    Exact(Box<dyn ExactSolution>),
}

impl ProblemKind {
    pub fn data(&self) -> &dyn ProblemData<2> {
        match self {
            ProblemKind::Pulse(p) => p,
            ProblemKind::Exact(e) => e.as_ref(),
        }
    }

    pub fn exact(&self) -> Option<&dyn ExactSolution> {
        match self {
            ProblemKind::Pulse(_) => None,
            ProblemKind::Exact(e) => Some(e.as_ref()),
        }
    }
}

pub struct Scenario {
    pub id: ScenarioId,
    pub disc: Discretization<2>,
    pub problem: ProblemKind,
    pub params: MaterialParams,
    pub frozen_geometry: bool,
    pub mask: FormMask,
    pub initial: Fields,
    /// Displacement probe on the inner wall.
    pub probe: Option<V2>,
}

/// Manufactured time-dependent flow on two disjoint unit squares: fluid on
/// `[0,1]²`, structure on `[2,3]×[0,1]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct TimeCoupled;

const SOLID_SHIFT: f64 = 2.0;

fn local(x: &V2) -> V2 {
    vector![x[0] - SOLID_SHIFT, x[1]]
}

impl ProblemData<2> for TimeCoupled {
    fn fluid_velocity(&self, x: &V2, t: f64) -> V2 {
        FluidTime.fluid_velocity(x, t)
    }
    fn fluid_pressure_pin(&self, x: &V2, t: f64) -> f64 {
        FluidTime.fluid_pressure_pin(x, t)
    }
    fn solid_velocity(&self, x: &V2, t: f64) -> V2 {
        SolidTime.solid_velocity(&local(x), t)
    }
    fn pore_pressure(&self, x: &V2, t: f64) -> f64 {
        SolidTime.pore_pressure(&local(x), t)
    }
    fn has_pore_pressure_data(&self) -> bool {
        true
    }
    fn has_forcing(&self) -> bool {
        true
    }
    fn fluid_force(&self, x: &V2, t: f64) -> V2 {
        FluidTime.fluid_force(x, t)
    }
    fn solid_force(&self, x: &V2, t: f64) -> V2 {
        SolidTime.solid_force(&local(x), t)
    }
    fn darcy_force(&self, x: &V2, t: f64) -> V2 {
        SolidTime.darcy_force(&local(x), t)
    }
    fn pore_source(&self, x: &V2, t: f64) -> f64 {
        SolidTime.pore_source(&local(x), t)
    }
}

impl ExactSolution for TimeCoupled {
    fn fluid_velocity_exact(&self, x: &V2, t: f64) -> Option<V2> {
        FluidTime.fluid_velocity_exact(x, t)
    }
    fn fluid_pressure_exact(&self, x: &V2, t: f64) -> Option<f64> {
        FluidTime.fluid_pressure_exact(x, t)
    }
    fn solid_velocity_exact(&self, x: &V2, t: f64) -> Option<V2> {
        SolidTime.solid_velocity_exact(&local(x), t)
    }
    fn flux_exact(&self, x: &V2, t: f64) -> Option<V2> {
        SolidTime.flux_exact(&local(x), t)
    }
    fn pore_pressure_exact(&self, x: &V2, t: f64) -> Option<f64> {
        SolidTime.pore_pressure_exact(&local(x), t)
    }
    fn displacement_exact(&self, x: &V2, t: f64) -> Option<V2> {
        SolidTime.displacement_exact(&local(x), t)
    }
    fn convection(&self) -> bool {
        true
    }
    fn params(&self) -> MaterialParams {
        unit_params()
    }
}

/// Fluid square next to a disjoint structure square, both `n × n`.
pub fn split_squares(n: usize) -> Result<Mesh<2>> {
    let fluid = unit_square(
        n,
        SquareTags {
            subdomain: Subdomain::Fluid,
            boundary: Marker::GammaF0,
        },
    )?;
    let nv = fluid.n_vertices();
    let mut vertices = fluid.vertices().to_vec();
    vertices.extend(fluid.vertices().iter().map(|v| v + vector![SOLID_SHIFT, 0.0]));
    let mut cells = Vec::new();
    let mut facets = Vec::new();
    for (tag, marker, off) in [(Subdomain::Fluid, Marker::GammaF0, 0), (Subdomain::Solid, Marker::GammaS0, nv)] {
        cells.extend((0..fluid.n_cells()).map(|c| (tag, fluid.cell(c).iter().map(|v| v + off).collect())));
        facets.extend(
            fluid
                .marked_facets()
                .iter()
                .map(|f| (marker, f.vertices.iter().map(|v| v + off).collect())),
        );
    }
    Mesh::new(vertices, cells, facets)
}

fn square(n: usize, subdomain: Subdomain, boundary: Marker) -> Result<Mesh<2>> {
    unit_square(n, SquareTags { subdomain, boundary })
}

/// Interpolate whatever exact fields exist at time `t`.
pub fn interpolate_exact(disc: &Discretization<2>, exact: &dyn ExactSolution, t: f64) -> Fields {
    let mut f = Fields::zeros(disc);
    let vec_field = |space: &Option<FunctionSpace<2>>, g: &dyn Fn(&V2) -> Option<V2>| {
        space.as_ref().map(|s| {
            s.interpolate(|x, out| {
                if let Some(v) = g(x) {
                    out[0] = v[0];
                    out[1] = v[1];
                }
            })
        })
    };
    let scalar_field = |space: &Option<FunctionSpace<2>>, g: &dyn Fn(&V2) -> Option<f64>| {
        space.as_ref().map(|s| s.interpolate(|x, out| out[0] = g(x).unwrap_or(0.0)))
    };
    if let Some(v) = vec_field(&disc.vf, &|x| exact.fluid_velocity_exact(x, t)) {
        f.vf = v;
    }
    if let Some(v) = vec_field(&disc.vs, &|x| exact.solid_velocity_exact(x, t)) {
        f.vs = v;
    }
    if let Some(v) = vec_field(&disc.q, &|x| exact.flux_exact(x, t)) {
        f.q = v;
    }
    if let Some(v) = vec_field(&disc.vs, &|x| exact.displacement_exact(x, t)) {
        f.us = v;
    }
    if let Some(v) = scalar_field(&disc.pf, &|x| exact.fluid_pressure_exact(x, t)) {
        f.pf = v;
    }
    if let Some(v) = scalar_field(&disc.pd, &|x| exact.pore_pressure_exact(x, t)) {
        f.pd = v;
    }
    f
}

pub fn build_scenario(cfg: &RunConfig) -> Result<Scenario> {
    let default_mesh = match cfg.scenario {
        ScenarioId::PressureWave2d | ScenarioId::Decay => MeshSource::Channel(16),
        _ => MeshSource::Square(8),
    };
    let source = cfg.mesh.clone().unwrap_or(default_mesh);
    let channel_mesh = || -> Result<(Mesh<2>, Option<V2>)> {
        match &source {
            MeshSource::Channel(n) => {
                let spec = ChannelSpec::new(*n);
                Ok((channel_2d(&spec)?, Some(spec.probe())))
            }
            MeshSource::File(p) => Ok((load_mesh::<2>(p, &cfg.tags)?, Some(ChannelSpec::new(1).probe()))),
            MeshSource::Square(_) => Err(FpsiError::Config(format!(
                "scenario {} needs a channel or file mesh",
                cfg.scenario.name()
            ))),
        }
    };
    let square_n = || -> Result<usize> {
        match source {
            MeshSource::Square(n) => Ok(n),
            _ => Err(FpsiError::Config(format!(
                "scenario {} runs on the built-in square mesh",
                cfg.scenario.name()
            ))),
        }
    };
    let options = |fluid_dirichlet: Vec<Marker>| DiscretizationOptions {
        quadrature_degree: cfg.quadrature_degree,
        fluid_dirichlet,
    };

    match cfg.scenario {
        ScenarioId::PressureWave2d | ScenarioId::Decay => {
            let (mesh, probe) = channel_mesh()?;
            let disc = Discretization::new(mesh, options(Vec::new()))?;
            let pulse = if cfg.scenario == ScenarioId::Decay {
                PressurePulse {
                    amplitude: 0.0,
                    ..cfg.pulse
                }
            } else {
                cfg.pulse
            };
            let params = cfg
                .material
                .clone()
                .unwrap_or_else(|| MaterialParams::channel_defaults(cfg.permeability));
            let initial = Fields::zeros(&disc);
            let mut mask = FormMask::all();
            mask.backflow = cfg.backflow_stabilization;
            Ok(Scenario {
                id: cfg.scenario,
                disc,
                problem: ProblemKind::Pulse(pulse),
                params,
                frozen_geometry: false,
                mask,
                initial,
                probe,
            })
        }
        ScenarioId::MmsStokes | ScenarioId::MmsBiot | ScenarioId::MmsTime => {
            let n = square_n()?;
            let (mesh, exact, dirichlet): (Mesh<2>, Box<dyn ExactSolution>, Vec<Marker>) = match cfg.scenario {
                ScenarioId::MmsStokes => (
                    square(n, Subdomain::Fluid, Marker::GammaF0)?,
                    Box::new(StokesTrig { mu: 1.0 }),
                    vec![Marker::GammaF0],
                ),
                ScenarioId::MmsBiot => (
                    square(n, Subdomain::Solid, Marker::GammaS0)?,
                    Box::new(BiotTrig::new()),
                    Vec::new(),
                ),
                _ => (split_squares(n)?, Box::new(TimeCoupled), vec![Marker::GammaF0]),
            };
            mms_scenario(cfg.scenario, mesh, exact, options(dirichlet))
        }
    }
}

/// Frozen-geometry setup for a manufactured solution, initialized from the exact fields at `t = 0`.
pub fn mms_scenario(
    id: ScenarioId,
    mesh: Mesh<2>,
    exact: Box<dyn ExactSolution>,
    options: DiscretizationOptions,
) -> Result<Scenario> {
    let disc = Discretization::new(mesh, options)?;
    let mut mask = FormMask::all();
    mask.inertia = exact.convection();
    let initial = interpolate_exact(&disc, exact.as_ref(), 0.0);
    Ok(Scenario {
        id,
        params: exact.params(),
        disc,
        problem: ProblemKind::Exact(exact),
        frozen_geometry: true,
        mask,
        initial,
        probe: None,
    })
}

/// Exactly representable Stokes problem on an `n × n` square.
pub fn stokes_polynomial_scenario(n: usize) -> Result<Scenario> {
    mms_scenario(
        ScenarioId::MmsStokes,
        square(n, Subdomain::Fluid, Marker::GammaF0)?,
        Box::new(StokesPolynomial { mu: 1.0 }),
        DiscretizationOptions {
            quadrature_degree: 6,
            fluid_dirichlet: vec![Marker::GammaF0],
        },
    )
}

/// L² errors of every field the exact solution provides.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FieldErrors {
    pub vf: Option<f64>,
    pub pf: Option<f64>,
    pub vs: Option<f64>,
    pub q: Option<f64>,
    pub pd: Option<f64>,
    pub us: Option<f64>,
}

impl FieldErrors {
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        [
            ("v_f", self.vf),
            ("p_f", self.pf),
            ("v_s", self.vs),
            ("q", self.q),
            ("p_d", self.pd),
            ("u_s", self.us),
        ]
        .into_iter()
        .filter_map(|(n, e)| e.map(|e| (n, e)))
        .collect()
    }
}

const ERROR_QUADRATURE: usize = 10;

/// `‖u_h − u‖_{L²}` over the cells of a space; components are compared up to
/// the space's value size.
pub fn l2_error(space: &FunctionSpace<2>, coeffs: &[f64], exact: &dyn Fn(&V2) -> Option<Vec<f64>>) -> Option<f64> {
    let rule = quadrature(2, ERROR_QUADRATURE).expect("error quadrature degree is supported");
    let tab = ReferenceElement::new(2, space.degree()).expect("space degree is valid").tabulate(&rule);
    let nc = space.components;
    let mut sum = 0.0;
    for l in 0..space.cells().len() {
        let cg = space.geometry(l);
        let nodes = space.cell_nodes(l);
        for q in 0..rule.len() {
            let x = cg.map(&rule.points[q]);
            let e = exact(&x)?;
            let vals = tab.values_at(q);
            for c in 0..nc {
                let uh: f64 = nodes.iter().enumerate().map(|(i, &n)| vals[i] * coeffs[space.dof(n, c)]).sum();
                sum += (uh - e[c]).powi(2) * rule.weights[q] * cg.det_b.abs();
            }
        }
    }
    Some(sum.sqrt())
}

pub fn field_errors(disc: &Discretization<2>, fields: &Fields, exact: &dyn ExactSolution, t: f64) -> FieldErrors {
    let vec_err = |space: &Option<FunctionSpace<2>>, coeffs: &[f64], g: &dyn Fn(&V2) -> Option<V2>| {
        space
            .as_ref()
            .and_then(|s| l2_error(s, coeffs, &|x| g(x).map(|v| vec![v[0], v[1]])))
    };
    let scalar_err = |space: &Option<FunctionSpace<2>>, coeffs: &[f64], g: &dyn Fn(&V2) -> Option<f64>| {
        space.as_ref().and_then(|s| l2_error(s, coeffs, &|x| g(x).map(|v| vec![v])))
    };
    FieldErrors {
        vf: vec_err(&disc.vf, &fields.vf, &|x| exact.fluid_velocity_exact(x, t)),
        pf: scalar_err(&disc.pf, &fields.pf, &|x| exact.fluid_pressure_exact(x, t)),
        vs: vec_err(&disc.vs, &fields.vs, &|x| exact.solid_velocity_exact(x, t)),
        q: vec_err(&disc.q, &fields.q, &|x| exact.flux_exact(x, t)),
        pd: scalar_err(&disc.pd, &fields.pd, &|x| exact.pore_pressure_exact(x, t)),
        us: vec_err(&disc.vs, &fields.us, &|x| exact.displacement_exact(x, t)),
    }
}
