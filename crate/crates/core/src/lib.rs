//! Compiles discrete lattice models into a rectangular Ising lattice whose
//! couplings all equal iπ/4, tracking the exact complex prefactor.

pub mod compiler;
pub mod dsl;
pub mod duality;
pub mod cyclo;
pub mod error;
pub mod eval;
pub mod field;
pub mod gadgets;
pub mod gf2;
pub mod graph;
pub mod grid;
pub mod model;
pub mod planar;
pub mod potts;
pub mod rewrite;
pub mod serial;
pub mod stabilizer;

pub use error::{Error, Result};
pub use field::{canonicalize_field, prefactor_mul, ComplexField, Prefactor};
pub use graph::{IsingGraph, VId};
pub use grid::GridIsing;
pub use model::{SiteKind, SpinModel};
