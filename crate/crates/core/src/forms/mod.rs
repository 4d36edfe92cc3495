//! Discrete spaces, multilinear forms and assembly of the coupled system.

pub mod assemble;
pub mod discretization;
pub mod geometry;
pub mod kernels;
pub mod layout;
pub mod sparse;

pub use assemble::{assemble_system, dirichlet_constraints, extension_matrix, local_systems, BlockSystem, HistoryTerms, TimeWeights};
pub use discretization::{Discretization, DiscretizationOptions, Fields};
pub use geometry::{GeometricFields, InterfacePoint};
pub use kernels::{Coefficients, FormMask, KernelInput, LocalSystem, Penalty};
pub use layout::{Block, BlockLayout};
pub use sparse::CsrMatrix;
