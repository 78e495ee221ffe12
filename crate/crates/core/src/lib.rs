//! Lagrangian free-boundary simulator for a compressible fluid surrounded by
//! vacuum, covering both the relativistic system (inverse light speed
//! `eps > 0`) and its classical `eps = 0` reduction.
//!
//! The crate is organized around a fixed reference slab `T^2 x (0,1)` with a
//! weight field that vanishes like the distance to the vacuum faces. On top of
//! that sit the deformation-tensor calculus, the quasi-linear second-order
//! system assembly, the curl/vorticity structure, the weighted energy
//! functionals, and a planar-symmetric explicit solver with MMS and
//! limit-sweep harnesses.

pub mod checks;
pub mod dynamics;
pub mod energy;
pub mod eos;
pub mod error;
pub mod expr;
pub mod grid;
pub mod io;
pub mod kinematics;
pub mod linalg;
pub mod mms;
pub mod quadrature;
pub mod solver;
pub mod vorticity;
pub mod weight;

pub use error::{Error, Result};
