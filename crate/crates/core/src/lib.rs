//! Neutron two-path optics through magnetic Wollaston prism pairs.
//!
//! The crate covers single-boundary refraction, closed-form and exact ray
//! tracing through prism pairs, the resulting spin-dependent phases and
//! interference fringes, and the spin textures produced by two orthogonal pairs.

pub mod beamline;
pub mod constants;
pub mod interferometry;
pub mod error;
pub mod raytrace;
pub mod real;
pub mod refraction;
pub mod spin;
pub mod textures;
pub mod units;

pub use beamline::{BeamlineConfig, DetectorOrientation, Geometry, NeutronState, PrismPairSpec};
pub use constants::Constants;
pub use error::{Error, Result};
pub use refraction::Spin;
pub use spin::{SpinOperator, Spinor};
