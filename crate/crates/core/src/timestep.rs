//! Semi-implicit BDF time stepping with extrapolated geometry and advection.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{FpsiError, Result};
use crate::forms::{
    assemble_system, extension_matrix, Coefficients, Discretization, Fields, FormMask, GeometricFields,
    HistoryTerms, KernelInput, Penalty, TimeWeights,
};
use crate::mesh::Marker;
use crate::problem::ProblemData;
use crate::solver::{self, SolveReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum SchemeOrder {
    First,
    Second,
}

impl TryFrom<u8> for SchemeOrder {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(SchemeOrder::First),
            2 => Ok(SchemeOrder::Second),
            _ => Err(format!("scheme order must be 1 or 2, got {v}")),
        }
    }
}

impl From<SchemeOrder> for u8 {
    fn from(o: SchemeOrder) -> u8 {
        o.order() as u8
    }
}

impl SchemeOrder {
    pub fn order(self) -> usize {
        match self {
            SchemeOrder::First => 1,
            SchemeOrder::Second => 2,
        }
    }

    /// `[α0, α1, α2]` with `[∂f/∂t]^k = (α0 f^k + α1 f^{k−1} + α2 f^{k−2}) / Δt`.
    pub fn bdf_coefficients(self) -> [f64; 3] {
        match self {
            SchemeOrder::First => [1.0, -1.0, 0.0],
            SchemeOrder::Second => [1.5, -2.0, 0.5],
        }
    }

    /// `[β1, β2]` with `f̃^k = β1 f^{k−1} + β2 f^{k−2}`.
    pub fn extrapolation_coefficients(self) -> [f64; 2] {
        match self {
            SchemeOrder::First => [1.0, 0.0],
            SchemeOrder::Second => [2.0, -1.0],
        }
    }

    fn needed(self) -> usize {
        self.order()
    }
}

fn check_history(order: SchemeOrder, history: &[&[f64]]) -> Result<()> {
    if history.len() < order.needed() {
        return Err(FpsiError::InsufficientHistory {
            order: order.order(),
            needed: order.needed(),
            available: history.len(),
        });
    }
    if history.iter().any(|h| h.len() != history[0].len()) {
        return Err(FpsiError::Dimension("history levels differ in length".into()));
    }
    Ok(())
}

/// Split `[∂f/∂t]^k` into the coefficient of `f^k` (`α0/Δt`) and the history
/// part `(α1 f^{k−1} + α2 f^{k−2})/Δt`. `history[0]` is level `k−1`.
pub fn bdf_apply(history: &[&[f64]], order: SchemeOrder, dt: f64) -> Result<(f64, Vec<f64>)> {
    check_history(order, history)?;
    let a = order.bdf_coefficients();
    let rhs = (0..history[0].len())
        .map(|i| (1..=order.order()).map(|l| a[l] * history[l - 1][i]).sum::<f64>() / dt)
        .collect();
    Ok((a[0] / dt, rhs))
}

/// `f̃^k` from `history[0] = f^{k−1}` and, for order 2, `history[1] = f^{k−2}`.
pub fn extrapolate(history: &[&[f64]], order: SchemeOrder) -> Result<Vec<f64>> {
    check_history(order, history)?;
    let b = order.extrapolation_coefficients();
    Ok((0..history[0].len())
        .map(|i| (0..order.order()).map(|l| b[l] * history[l][i]).sum())
        .collect())
}

/// Solve `[∂u/∂t]^k = v^k` for `u^k`.
pub fn kinematic_update(v: &[f64], history: &[&[f64]], order: SchemeOrder, dt: f64) -> Result<Vec<f64>> {
    let (c0, hist) = bdf_apply(history, order, dt)?;
    if v.len() != hist.len() {
        return Err(FpsiError::Dimension("velocity and displacement lengths differ".into()));
    }
    Ok(v.iter().zip(&hist).map(|(v, h)| (v - h) / c0).collect())
}

/// Solution history: the latest level and, once available, the one before.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    /// Index of the latest computed level.
    pub step: usize,
    pub time: f64,
    pub dt: f64,
    pub current: Fields,
    pub previous: Option<Fields>,
}

impl State {
    pub fn at_rest<const D: usize>(disc: &Discretization<D>, dt: f64) -> Self {
        State::from_fields(Fields::zeros(disc), 0.0, dt)
    }

    pub fn from_fields(fields: Fields, time: f64, dt: f64) -> Self {
        State {
            step: 0,
            time,
            dt,
            current: fields,
            previous: None,
        }
    }

    pub fn save_checkpoint(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self).map_err(|e| FpsiError::Config(format!("checkpoint encoding: {e}")))?;
        std::fs::write(path, text).map_err(|e| FpsiError::io(path, e))
    }

    pub fn load_checkpoint(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| FpsiError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| FpsiError::Config(format!("checkpoint {}: {e}", path.display())))
    }

    pub fn check<const D: usize>(&self, disc: &Discretization<D>) -> Result<()> {
        self.current.check_sizes(disc)?;
        if let Some(p) = &self.previous {
            p.check_sizes(disc)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepConfig {
    pub order: SchemeOrder,
    pub dt: f64,
    pub penalty: Penalty,
    /// `+1` applies `σ F^{-T} n = p_ext n` as written, `−1` the opposite sign.
    pub sign_pext: f64,
    /// Keep the reference geometry: `F = I`, no mesh motion, no extension solve.
    pub frozen_geometry: bool,
    pub mask: FormMask,
    pub residual_tolerance: f64,
}

impl StepConfig {
    pub fn new(order: SchemeOrder, dt: f64) -> Self {
        StepConfig {
            order,
            dt,
            penalty: Penalty::default(),
            sign_pext: 1.0,
            frozen_geometry: false,
            mask: FormMask::all(),
            residual_tolerance: solver::DEFAULT_RESIDUAL_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StepOutcome<const D: usize> {
    pub order: SchemeOrder,
    pub solve: SolveReport,
    pub extension: Option<SolveReport>,
    /// Geometry of the new level, already checked for positive Jacobians.
    pub geometry: GeometricFields<D>,
}

pub struct TimeStepper<'a, const D: usize> {
    pub disc: &'a Discretization<D>,
    pub coef: Coefficients<D>,
    pub config: StepConfig,
    pub data: &'a dyn ProblemData<D>,
}

fn combine(a: f64, x: &[f64], b: f64, y: Option<&Vec<f64>>) -> Vec<f64> {
    match y {
        Some(y) => x.iter().zip(y).map(|(p, q)| a * p + b * q).collect(),
        None => x.iter().map(|p| a * p).collect(),
    }
}

impl<'a, const D: usize> TimeStepper<'a, D> {
    pub fn new(
        disc: &'a Discretization<D>,
        params: &crate::kinematics::MaterialParams,
        config: StepConfig,
        data: &'a dyn ProblemData<D>,
    ) -> Result<Self> {
        if !(config.dt > 0.0 && config.dt.is_finite()) {
            return Err(FpsiError::Config(format!("time step must be positive, got {}", config.dt)));
        }
        config.penalty.validate()?;
        Ok(TimeStepper {
            disc,
            coef: Coefficients::new(params)?,
            config,
            data,
        })
    }

    /// Order used for the next step: second order needs two stored levels.
    pub fn effective_order(&self, state: &State) -> SchemeOrder {
        match (self.config.order, &state.previous) {
            (SchemeOrder::Second, Some(_)) => SchemeOrder::Second,
            _ => SchemeOrder::First,
        }
    }

    /// Advance one step, replacing `state` by the new level on success.
    pub fn advance(&self, state: &mut State) -> Result<StepOutcome<D>> {
        let step = state.step + 1;
        self.advance_inner(state).map_err(|e| FpsiError::Step {
            step,
            source: Box::new(e),
        })
    }

    fn advance_inner(&self, state: &mut State) -> Result<StepOutcome<D>> {
        let disc = self.disc;
        state.check(disc)?;
        let order = self.effective_order(state);
        let dt = self.config.dt;
        let t = state.time + dt;
        let cur = &state.current;
        let prev = state.previous.as_ref();
        let [b1, b2] = order.extrapolation_coefficients();
        let prev_of = |f: fn(&Fields) -> &Vec<f64>| prev.filter(|_| order == SchemeOrder::Second).map(f);
        let ext = |f: fn(&Fields) -> &Vec<f64>| combine(b1, f(cur), b2, prev_of(f));

        let vf_t = ext(|f| &f.vf);
        let frozen = self.config.frozen_geometry;
        let (uf_t, us_t, geo) = if frozen {
            (None, None, GeometricFields::identity(disc))
        } else {
            let uf_t = ext(|f| &f.uf);
            let us_t = ext(|f| &f.us);
            let geo = GeometricFields::new(disc, Some(&uf_t), Some(&us_t))?;
            (Some(uf_t), Some(us_t), geo)
        };
        let advection: Vec<f64> = if frozen {
            vf_t.clone()
        } else {
            let wf_t = ext(|f| &f.wf);
            vf_t.iter().zip(&wf_t).map(|(v, w)| v - w).collect()
        };

        let alpha = order.bdf_coefficients();
        let [_, a1, a2] = alpha;
        let x1 = cur.to_vector();
        let x2 = prev_of(|f| &f.vf).map(|_| prev.unwrap().to_vector());
        let hist_x = combine(a1, &x1, a2, x2.as_ref());
        let hist_u = combine(a1, &cur.us, a2, prev_of(|f| &f.us));

        let inp = KernelInput {
            disc,
            geo: &geo,
            coef: &self.coef,
            mask: self.config.mask,
            advection: Some(&advection),
            vf_tilde: Some(&vf_t),
            uf_tilde: uf_t.as_deref(),
            us_tilde: us_t.as_deref(),
            penalty: self.config.penalty,
            sign_pext: self.config.sign_pext,
            data: self.data,
            time: t,
        };
        let sys = assemble_system(
            &inp,
            TimeWeights { alpha, dt },
            HistoryTerms {
                unknowns: &hist_x,
                displacement: &hist_u,
            },
        )?;
        let (x, solve) = solver::solve(&sys.matrix, &sys.rhs, self.config.residual_tolerance)?;

        let mut next = cur.clone();
        next.set_unknowns(&disc.layout, &x);
        let us_hist: Vec<&[f64]> = std::iter::once(cur.us.as_slice()).chain(prev_of(|f| &f.us).map(|v| v.as_slice())).collect();
        next.us = kinematic_update(&next.vs, &us_hist, order, dt)?;

        let mut extension = None;
        if !frozen && disc.ext.is_some() {
            let (w, report) = self.extension_solve(&cur.uf, &next.vs)?;
            let uf_hist: Vec<&[f64]> =
                std::iter::once(cur.uf.as_slice()).chain(prev_of(|f| &f.uf).map(|v| v.as_slice())).collect();
            next.uf = kinematic_update(&w, &uf_hist, order, dt)?;
            next.wf = w;
            extension = Some(report);
        }

        let geometry = if frozen {
            GeometricFields::identity(disc)
        } else {
            GeometricFields::new(disc, Some(&next.uf), Some(&next.us))?
        };
        geometry.validate()?;

        let old = std::mem::replace(&mut state.current, next);
        state.previous = Some(old);
        state.step += 1;
        state.time = t;
        Ok(StepOutcome {
            order,
            solve,
            extension,
            geometry,
        })
    }

    /// Mesh velocity in the fluid: elasticity with interface trace `v_s` and
    /// zero velocity on the outer fluid boundary.
    pub fn extension_solve(&self, uf_prev: &[f64], vs: &[f64]) -> Result<(Vec<f64>, SolveReport)> {
        let disc = self.disc;
        let ext = disc.ext.as_ref().unwrap();
        let mut a = extension_matrix(disc, uf_prev, self.coef.mu_s)?;
        let mut rhs = vec![0.0; ext.n_dofs()];
        let mut constraints = Vec::new();
        for node in ext.dirichlet_nodes() {
            let value: [f64; D] = match ext.dirichlet_marker(node) {
                Some(Marker::GammaFs) => {
                    let vsp = disc.vs.as_ref().unwrap();
                    let sn = vsp
                        .node_of_entity(ext.node_entity(node))
                        .ok_or_else(|| FpsiError::Assembly("interface node missing from structure space".into()))?;
                    std::array::from_fn(|a| vs[vsp.dof(sn, a)])
                }
                _ => [0.0; D],
            };
            for (c, v) in value.iter().enumerate() {
                constraints.push((ext.dof(node, c), *v));
            }
        }
        a.apply_dirichlet(&mut rhs, &constraints);
        solver::solve(&a, &rhs, self.config.residual_tolerance)
    }
}
