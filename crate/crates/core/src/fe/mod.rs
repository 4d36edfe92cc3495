//! Reference elements, quadrature and Lagrange function spaces.

pub mod element;
pub mod quadrature;
pub mod space;

pub use element::{ReferenceElement, Tabulation};
pub use quadrature::{gauss_legendre, quadrature, reference_measure, QuadratureRule};
pub use space::{build_space, CellGeometry, Entity, FunctionSpace};
