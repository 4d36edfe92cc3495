//! The time loop and its artifacts.

use std::path::{Path, PathBuf};

use log::{debug, info};

use super::config::RunConfig;
use super::output::{snapshot_name, write_vtk, SeriesRow, SeriesWriter};
use super::scenario::{build_scenario, field_errors, FieldErrors, Scenario};
use crate::energy;
use crate::error::{FpsiError, Result};
use crate::forms::{Coefficients, GeometricFields};
use crate::solver::SolveReport;
use crate::timestep::{SchemeOrder, State, StepConfig, TimeStepper};

pub const SERIES_FILE: &str = "timeseries.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";

/// A scenario together with its evolving state and recorded series.
pub struct Simulation {
    pub config: RunConfig,
    pub scenario: Scenario,
    pub state: State,
    /// Geometry of the latest level.
    pub geometry: GeometricFields<2>,
    pub series: Vec<SeriesRow>,
    pub last_solve: Option<SolveReport>,
    pub last_order: Option<SchemeOrder>,
}

impl Simulation {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let scenario = build_scenario(&config)?;
        Simulation::from_scenario(config, scenario)
    }

    /// Start from the scenario's initial fields, or from `config.restart`.
    pub fn from_scenario(config: RunConfig, scenario: Scenario) -> Result<Self> {
        let state = match &config.restart {
            Some(path) => {
                let mut s = State::load_checkpoint(path)?;
                s.check(&scenario.disc)?;
                if s.previous.is_some() && (s.dt - config.dt).abs() > 1e-12 * config.dt {
                    // the stored history is only valid for the step it was computed with
                    info!("restart with dt {} instead of {}: restarting at first order", config.dt, s.dt);
                    s.previous = None;
                }
                s.dt = config.dt;
                s
            }
            None => State::from_fields(scenario.initial.clone(), 0.0, config.dt),
        };
        let geometry = if scenario.frozen_geometry {
            GeometricFields::identity(&scenario.disc)
        } else {
            GeometricFields::new(&scenario.disc, Some(&state.current.uf), Some(&state.current.us))?
        };
        geometry.validate()?;
        let mut sim = Simulation {
            config,
            scenario,
            state,
            geometry,
            series: Vec::new(),
            last_solve: None,
            last_order: None,
        };
        let row = sim.current_row()?;
        sim.series.push(row);
        Ok(sim)
    }

    pub fn step_config(&self) -> StepConfig {
        StepConfig {
            order: self.config.order,
            dt: self.config.dt,
            penalty: self.config.penalty,
            sign_pext: self.config.sign_pext,
            frozen_geometry: self.scenario.frozen_geometry,
            mask: self.scenario.mask,
            residual_tolerance: self.config.residual_tolerance,
        }
    }

    /// Energies and probe reading of the latest level.
    pub fn current_row(&self) -> Result<SeriesRow> {
        let disc = &self.scenario.disc;
        let coef = Coefficients::new(&self.scenario.params)?;
        let energy = energy::evaluate(disc, &coef, &self.state.current, &self.geometry);
        let probe = self
            .scenario
            .probe
            .zip(disc.vs.as_ref())
            .and_then(|(x, vs)| vs.evaluate_at(&self.state.current.us, &x))
            .map_or([f64::NAN; 2], |u| [u[0], u[1]]);
        Ok(SeriesRow {
            time: self.state.time,
            probe,
            energy,
        })
    }

    /// Advance one step and record its row.
    pub fn step(&mut self) -> Result<&SeriesRow> {
        let stepper = TimeStepper::new(
            &self.scenario.disc,
            &self.scenario.params,
            self.step_config(),
            self.scenario.problem.data(),
        )?;
        let outcome = stepper.advance(&mut self.state)?;
        debug!(
            "step {} t = {:.6e} order {} residual {:.2e}",
            self.state.step,
            self.state.time,
            outcome.order.order(),
            outcome.solve.residual
        );
        self.geometry = outcome.geometry;
        self.last_solve = Some(outcome.solve);
        self.last_order = Some(outcome.order);
        let row = self.current_row()?;
        self.series.push(row);
        Ok(self.series.last().expect("row was just pushed"))
    }

    /// Steps still needed to reach `t_end`.
    pub fn remaining_steps(&self) -> usize {
        let left = (self.config.t_end - self.state.time) / self.config.dt;
        (left + 1e-9).floor().max(0.0) as usize
    }

    /// Errors against the manufactured solution at the current time.
    pub fn errors(&self) -> Option<FieldErrors> {
        self.scenario
            .problem
            .exact()
            .map(|e| field_errors(&self.scenario.disc, &self.state.current, e, self.state.time))
    }

    /// Largest nodal value of the latest level.
    pub fn max_abs(&self) -> f64 {
        self.state.current.max_abs()
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub steps: usize,
    pub final_time: f64,
    pub series: Vec<SeriesRow>,
    pub errors: Option<FieldErrors>,
    pub output_dir: Option<PathBuf>,
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| FpsiError::io(dir, e))
}

/// Run a configuration to `t_end`, writing snapshots, the time series and a
/// final checkpoint when an output directory is set. Nothing is written
/// unless the configuration and mesh are valid.
pub fn run(config: &RunConfig) -> Result<RunSummary> {
    let mut sim = Simulation::new(config.clone())?;
    let dir = config.output_dir.clone();
    let every = config.output_every;
    let mut series = match &dir {
        Some(d) => {
            create_dir(d)?;
            let mut w = SeriesWriter::create(&d.join(SERIES_FILE))?;
            w.append(&sim.series[0])?;
            if every > 0 {
                write_vtk(&sim.scenario.disc, &sim.state.current, &d.join(snapshot_name(sim.state.step)))?;
            }
            Some(w)
        }
        None => None,
    };
    let n = sim.remaining_steps();
    info!(
        "{}: {} steps of {:e} s, {} unknowns",
        config.scenario.name(),
        n,
        config.dt,
        sim.scenario.disc.layout.total()
    );
    for _ in 0..n {
        let row = *sim.step()?;
        if let (Some(w), Some(d)) = (series.as_mut(), &dir) {
            w.append(&row)?;
            if every > 0 && sim.state.step % every == 0 {
                write_vtk(&sim.scenario.disc, &sim.state.current, &d.join(snapshot_name(sim.state.step)))?;
            }
        }
    }
    if let Some(d) = &dir {
        sim.state.save_checkpoint(&d.join(CHECKPOINT_FILE))?;
    }
    let errors = sim.errors();
    if let Some(e) = &errors {
        for (name, err) in e.entries() {
            info!("L2 error {name}: {err:.6e}");
        }
    }
    Ok(RunSummary {
        steps: n,
        final_time: sim.state.time,
        series: sim.series,
        errors,
        output_dir: dir,
    })
}
