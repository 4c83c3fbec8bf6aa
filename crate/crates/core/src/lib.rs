//! Anisotropic fractional perimeters in the plane.
//!
//! The crate computes `P_s(E, K) = ∫_E ∫_{E^c} ‖x − y‖_K^{−(2+s)} dx dy` for
//! polygonal and pixel regions `E` and origin-symmetric convex bodies `K`,
//! together with the geometric objects that govern its limits: the moment
//! body `MK` (for `s → 1⁻`) and the volume of `K` (for `s → 0⁺`).

pub mod convex_body;
pub mod error;
pub mod frac1d;
pub mod frac_perimeter;
pub mod geom;
pub mod isoperimetric;
pub mod limits;
pub mod quadrature;
pub mod region;

pub use convex_body::SymmetricBody;
pub use error::{Error, Result};
pub use frac1d::IntervalUnion;
pub use frac_perimeter::{AngularRule, EnergyBreakdown, Method, PixelKernel, QuadratureSpec};
pub use geom::Vec2;
pub use isoperimetric::{AnnealConfig, GammaBracket};
pub use limits::{StepFunction, SweepResult, SweepRow};
pub use region::{Line, LineSlice, PixelSet, PolygonRegion, Region};
