//! Scaled-boundary isogeometric analysis of Kirchhoff plates with globally C1
//! multi-patch spaces.

pub mod coupling;
pub mod curve;
pub mod error;
pub mod geom;
pub mod plate;
pub mod quadrature;
pub mod sbgeom;
pub mod space;
pub mod sparse;
pub mod stabilize;
pub mod trim;
pub mod splines;
pub mod util;

pub use error::{Error, Result};
pub use geom::Vec2;
