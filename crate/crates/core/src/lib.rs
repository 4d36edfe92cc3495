//! Monolithic finite element solver for fluid–poroelastic structure interaction.

pub mod app;
pub mod energy;
pub mod error;
pub mod fe;
pub mod forms;
pub mod kinematics;
pub mod mesh;
pub mod problem;
pub mod solver;
pub mod tensor;
pub mod timestep;

pub use error::{FpsiError, Result};
