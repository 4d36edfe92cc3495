//! Run configuration read from TOML.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{FpsiError, Result};
use crate::forms::Penalty;
use crate::kinematics::MaterialParams;
use crate::mesh::PhysicalTagMap;
use crate::problem::PressurePulse;
use crate::solver::DEFAULT_RESIDUAL_TOLERANCE;
use crate::timestep::SchemeOrder;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioId {
    #[serde(rename = "pressure_wave_2d")]
    PressureWave2d,
    Decay,
    MmsStokes,
    MmsBiot,
    MmsTime,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 5] = [
        ScenarioId::PressureWave2d,
        ScenarioId::Decay,
        ScenarioId::MmsStokes,
        ScenarioId::MmsBiot,
        ScenarioId::MmsTime,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioId::PressureWave2d => "pressure_wave_2d",
            ScenarioId::Decay => "decay",
            ScenarioId::MmsStokes => "mms_stokes",
            ScenarioId::MmsBiot => "mms_biot",
            ScenarioId::MmsTime => "mms_time",
        }
    }

    pub fn is_mms(self) -> bool {
        matches!(self, ScenarioId::MmsStokes | ScenarioId::MmsBiot | ScenarioId::MmsTime)
    }
}

impl FromStr for ScenarioId {
    type Err = FpsiError;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| FpsiError::Config(format!("unknown scenario '{s}'")))
    }
}

/// Where the mesh comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MeshSource {
    /// Built-in channel with `n` cells across the fluid height.
    Channel(usize),
    /// Built-in unit square with `n × n` cells.
    Square(usize),
    /// MSH 2.2 or native mesh file.
    File(PathBuf),
}

fn default_order() -> SchemeOrder {
    SchemeOrder::First
}

fn default_sign() -> f64 {
    1.0
}

fn default_every() -> usize {
    10
}

fn default_degree() -> usize {
    6
}

fn default_tolerance() -> f64 {
    DEFAULT_RESIDUAL_TOLERANCE
}

fn default_true() -> bool {
    true
}

fn default_permeability() -> f64 {
    5e-13
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioId,
    /// Defaults to the scenario's built-in mesh.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<MeshSource>,
    #[serde(default = "default_order")]
    pub order: SchemeOrder,
    /// Time step, s.
    pub dt: f64,
    /// Final time, s.
    pub t_end: f64,
    /// Scalar permeability (mm²) used with the channel material defaults.
    #[serde(default = "default_permeability")]
    pub permeability: f64,
    /// Full material table; overrides the scenario defaults and `permeability`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub material: Option<MaterialParams>,
    #[serde(default)]
    pub penalty: Penalty,
    #[serde(default = "default_sign")]
    pub sign_pext: f64,
    /// Directional do-nothing term on open fluid boundaries.
    #[serde(default = "default_true")]
    pub backflow_stabilization: bool,
    /// Inlet pressure schedule, g/(mm·s²).
    #[serde(default)]
    pub pulse: PressurePulse,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Write a VTK snapshot every this many steps; 0 disables snapshots.
    #[serde(default = "default_every")]
    pub output_every: usize,
    #[serde(default = "default_degree")]
    pub quadrature_degree: usize,
    #[serde(default = "default_tolerance")]
    pub residual_tolerance: f64,
    #[serde(default)]
    pub tags: PhysicalTagMap,
    /// Resume from a checkpoint written by an earlier run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restart: Option<PathBuf>,
}

impl RunConfig {
    /// Defaults for a scenario with the given time step and final time.
    pub fn new(scenario: ScenarioId, dt: f64, t_end: f64) -> Self {
        RunConfig {
            scenario,
            mesh: None,
            order: default_order(),
            dt,
            t_end,
            permeability: default_permeability(),
            material: None,
            penalty: Penalty::default(),
            sign_pext: default_sign(),
            backflow_stabilization: true,
            pulse: PressurePulse::default(),
            output_dir: None,
            output_every: default_every(),
            quadrature_degree: default_degree(),
            residual_tolerance: default_tolerance(),
            tags: PhysicalTagMap::default(),
            restart: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| FpsiError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| FpsiError::io(path, e))?;
        let mut cfg = RunConfig::parse(&text)?;
        // relative paths in the file are relative to the file
        let base = path.parent().unwrap_or(Path::new("."));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(MeshSource::File(p)) = &mut cfg.mesh {
            rebase(p);
        }
        if let Some(p) = &mut cfg.output_dir {
            rebase(p);
        }
        if let Some(p) = &mut cfg.restart {
            rebase(p);
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configuration is serializable")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(FpsiError::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= self.dt) {
            return Err(FpsiError::Config(format!("t_end = {} is shorter than dt = {}", self.t_end, self.dt)));
        }
        if self.sign_pext != 1.0 && self.sign_pext != -1.0 {
            return Err(FpsiError::Config(format!("sign_pext must be +1 or -1, got {}", self.sign_pext)));
        }
        if !(self.residual_tolerance > 0.0) {
            return Err(FpsiError::Config("residual_tolerance must be positive".into()));
        }
        if !(self.permeability > 0.0 && self.permeability.is_finite()) {
            return Err(FpsiError::Config(format!("permeability must be positive, got {}", self.permeability)));
        }
        if let Some(m) = &self.material {
            m.validate::<2>()?;
        }
        self.penalty.validate()?;
        if let Some(MeshSource::Channel(0) | MeshSource::Square(0)) = self.mesh {
            return Err(FpsiError::Config("mesh resolution must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of steps to reach `t_end`.
    pub fn n_steps(&self) -> usize {
        ((self.t_end / self.dt) * (1.0 + 1e-12)).floor() as usize
    }
}
