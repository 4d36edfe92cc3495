//! Refinement studies for the manufactured solutions.

use std::path::Path;

use log::info;

use super::config::{MeshSource, RunConfig, ScenarioId};
use super::convergence::ConvergenceTable;
use super::run::Simulation;
use super::scenario::{stokes_polynomial_scenario, FieldErrors};
use crate::error::{FpsiError, Result};
use crate::timestep::SchemeOrder;

/// Coarsest mesh of the spatial studies.
pub const BASE_CELLS: usize = 8;
/// Mesh of the temporal study; the time-dependent solutions are exact in space.
pub const TIME_STUDY_CELLS: usize = 4;
pub const TIME_STUDY_END: f64 = 0.8;
pub const TIME_STUDY_BASE_DT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Study {
    Stokes,
    Biot,
    Time,
}

impl std::str::FromStr for Study {
    type Err = FpsiError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stokes" => Ok(Study::Stokes),
            "biot" => Ok(Study::Biot),
            "time" => Ok(Study::Time),
            _ => Err(FpsiError::Config(format!("unknown study '{s}' (expected stokes, biot or time)"))),
        }
    }
}

/// Advance a frozen-geometry problem to `t_end` and return its errors.
pub fn solve_mms(config: RunConfig) -> Result<FieldErrors> {
    let mut sim = Simulation::new(config)?;
    for _ in 0..sim.remaining_steps() {
        sim.step()?;
    }
    sim.errors()
        .ok_or_else(|| FpsiError::Config("scenario has no exact solution".into()))
}

fn table_from(title: &str, parameter: &str, sizes: Vec<f64>, errors: &[FieldErrors]) -> ConvergenceTable {
    let mut t = ConvergenceTable::new(title, parameter, sizes);
    if let Some(first) = errors.first() {
        for (name, _) in first.entries() {
            let col = errors
                .iter()
                .map(|e| e.entries().into_iter().find(|(n, _)| *n == name).map_or(f64::NAN, |x| x.1))
                .collect();
            t.push(name, col);
        }
    }
    t
}

fn spatial_study(id: ScenarioId, levels: usize) -> Result<ConvergenceTable> {
    let mut sizes = Vec::new();
    let mut errors = Vec::new();
    for i in 0..levels {
        let n = BASE_CELLS << i;
        let mut cfg = RunConfig::new(id, 1.0, 1.0);
        cfg.mesh = Some(MeshSource::Square(n));
        let e = solve_mms(cfg)?;
        info!("{} n = {n}: {:?}", id.name(), e.entries());
        sizes.push(1.0 / n as f64);
        errors.push(e);
    }
    Ok(table_from(&format!("{} spatial refinement", id.name()), "h", sizes, &errors))
}

/// Trigonometric Stokes flow over `levels` meshes from `n = BASE_CELLS`, halving `h` each time.
pub fn stokes_study(levels: usize) -> Result<ConvergenceTable> {
    spatial_study(ScenarioId::MmsStokes, levels)
}

pub fn biot_study(levels: usize) -> Result<ConvergenceTable> {
    spatial_study(ScenarioId::MmsBiot, levels)
}

/// Largest error of the exactly representable Stokes flow.
pub fn stokes_polynomial_error(n: usize) -> Result<f64> {
    let scenario = stokes_polynomial_scenario(n)?;
    let mut cfg = RunConfig::new(ScenarioId::MmsStokes, 1.0, 1.0);
    cfg.mesh = Some(MeshSource::Square(n));
    let mut sim = Simulation::from_scenario(cfg, scenario)?;
    sim.step()?;
    let e = sim.errors().expect("manufactured scenario");
    Ok(e.entries().into_iter().map(|(_, v)| v).fold(0.0, f64::max))
}

/// Time-dependent flows with `levels` halvings of the step, at one order.
pub fn time_study(levels: usize, order: SchemeOrder) -> Result<ConvergenceTable> {
    let mut sizes = Vec::new();
    let mut errors = Vec::new();
    for i in 0..levels {
        let dt = TIME_STUDY_BASE_DT / (1u32 << i) as f64;
        let mut cfg = RunConfig::new(ScenarioId::MmsTime, dt, TIME_STUDY_END);
        cfg.order = order;
        cfg.mesh = Some(MeshSource::Square(TIME_STUDY_CELLS));
        let e = solve_mms(cfg)?;
        info!("mms_time BDF{} dt = {dt:e}: {:?}", order.order(), e.entries());
        sizes.push(dt);
        errors.push(e);
    }
    Ok(table_from(
        &format!("mms_time BDF{} temporal refinement", order.order()),
        "dt",
        sizes,
        &errors,
    ))
}

/// Run a study and its tables; with `output`, also write `convergence.txt`.
pub fn run_study(study: Study, levels: usize, output: Option<&Path>) -> Result<Vec<ConvergenceTable>> {
    if levels < 3 {
        return Err(FpsiError::Config(format!("need at least 3 levels, got {levels}")));
    }
    let tables = match study {
        Study::Stokes => vec![stokes_study(levels)?],
        Study::Biot => vec![biot_study(levels)?],
        Study::Time => vec![
            time_study(levels, SchemeOrder::First)?,
            time_study(levels, SchemeOrder::Second)?,
        ],
    };
    if let Some(dir) = output {
        std::fs::create_dir_all(dir).map_err(|e| FpsiError::io(dir, e))?;
        let text: Vec<String> = tables.iter().map(|t| t.render()).collect();
        let path = dir.join("convergence.txt");
        std::fs::write(&path, text.join("\n")).map_err(|e| FpsiError::io(&path, e))?;
    }
    Ok(tables)
}
