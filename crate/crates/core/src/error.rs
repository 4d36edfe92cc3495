use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = FpsiError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum FpsiError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("mesh parse error (line {line}): {message}")]
    MeshParse { line: usize, message: String },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("point outside reference simplex (min barycentric {min_bary:e})")]
    OutsideSimplex { min_bary: f64 },

    #[error("unsupported quadrature degree {degree} (max {max})")]
    UnsupportedQuadrature { degree: usize, max: usize },

    #[error("function space error: {0}")]
    Space(String),

    #[error("degenerate deformation (J = {jacobian:e}){}", cell.map(|c| format!(" in cell {c}")).unwrap_or_default())]
    DegenerateDeformation { cell: Option<usize>, jacobian: f64 },

    #[error("invalid material parameters: {0}")]
    Material(String),

    #[error("insufficient history: order {order} needs {needed} level(s), have {available}")]
    InsufficientHistory {
        order: usize,
        needed: usize,
        available: usize,
    },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("solver residual {residual:e} exceeds threshold {threshold:e}")]
    SolverQuality { residual: f64, threshold: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("convergence table: {0}")]
    Convergence(String),

    #[error("step {step} failed: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<FpsiError>,
    },
}

impl FpsiError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        FpsiError::Io {
            path: path.into(),
            source,
        }
    }

    /// Attach a cell index to a degenerate-deformation error.
    pub fn at_cell(self, cell: usize) -> Self {
        match self {
            FpsiError::DegenerateDeformation { jacobian, .. } => FpsiError::DegenerateDeformation {
                cell: Some(cell),
                jacobian,
            },
            other => other,
        }
    }

    /// True for errors caused by user input rather than by the computation.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            FpsiError::Config(_)
                | FpsiError::Material(_)
                | FpsiError::MeshParse { .. }
                | FpsiError::InvalidMesh(_)
        )
    }
}
