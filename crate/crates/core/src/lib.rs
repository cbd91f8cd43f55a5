//! Discrete exterior calculus for abelian Yang–Mills fields on triangulated
//! regions with boundary: helicity observables, presymplectic pairing, gauge
//! fixing, Hodge–Morrey–Friedrichs decomposition and region gluing.

pub mod error;
pub mod geometry;
pub mod dec;
pub mod linalg;
pub mod solver;
pub mod ym;
pub mod observables;
pub mod gluing;

pub use dec::{Cochain, Dec, HodgeStar, StarKind};
pub use error::{Error, Result};
