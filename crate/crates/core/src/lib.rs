//! Boundary-integral solver for the subwavelength resonances of a pair of
//! closely spaced high-contrast inclusions in two dimensions.
//!
//! The library discretizes the single-layer and Neumann-Poincare boundary
//! operators of the 2D Helmholtz transmission problem with a spectrally
//! accurate Nystrom method, computes the capacitance coefficients of the
//! pair, locates the two subwavelength resonant frequencies as
//! characteristic values of the boundary system, and evaluates the resonant
//! eigenmodes and their gradient blow-up in the narrow gap.

pub mod bipolar;
pub mod fields;
pub mod geometry;
pub mod layerpot;
pub mod linalg;
pub mod resonance;
pub mod specfun;
pub mod statics;

pub use geometry::{discretize, gap_width, make_pair, CurveSpec, InclusionPair, Mesh};
pub use resonance::{find_resonance, solve_scattering, MediumParams, ModeClass, ResonanceResult};

