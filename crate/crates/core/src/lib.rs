//! Characteristic-flow solver for first-order hyperbolic systems on cones.

pub mod asymtype;
pub mod cone_symbols;
pub mod harness;
pub mod interior;
pub mod linalg;
pub mod mellin;
pub mod spectral;
pub mod trace_cascade;
