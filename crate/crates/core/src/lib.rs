//! Finite-volume laboratory for the two-dimensional compressible Euler
//! equations in similarity coordinates `xi = x / t`.

pub mod diagnostics;
pub mod error;
pub mod exact_fields;
pub mod fv_solver;
pub mod gas;
pub mod geometry;
pub mod presets;
pub mod riemann;
pub mod simgrid;
pub mod vec2;

pub use error::{Error, Result};
pub use gas::{ConservativeState, GasKind, GasModel, PrimitiveState};
