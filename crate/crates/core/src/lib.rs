//! Level-set active contour segmentation.
//!
//! Five evolution models share one numerical kernel ([`field`]):
//!
//! * [`edge`]: curvature flow slowed by an edge-stopping function,
//! * [`chanvese`]: two-phase piecewise-constant region fitting,
//! * [`drlse`]: distance-regularized evolution with an edge-weighted
//!   external energy and no reinitialization,
//! * [`rsf`]: region-scalable fitting with a Gaussian locality kernel,
//! * [`localized`]: ball-masked local region statistics on a narrow band.
//!
//! [`engine::evolve`] drives any of them to convergence, and [`contour`]
//! turns the final level set into polylines.

pub mod chanvese;
pub mod contour;
pub mod drlse;
pub mod edge;
pub mod engine;
pub mod error;
pub mod field;
pub mod init;
mod io;
pub mod localized;
pub mod raster;
pub mod rsf;

pub use error::{Error, Result};
pub use field::{Epsilon, LevelSet, ScalarField, VectorField};
pub use io::write_atomic;
