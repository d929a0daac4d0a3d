//! Central configurations of two twisted coaxial regular polygons in the
//! Newtonian N-body problem.
//!
//! * [`nbody`]: direct central-configuration test for arbitrary point masses.
//! * [`polygon`]: builds the two-layer configuration from `(N, L, a, b, h, θ)`.
//! * [`residuals`]: the projected balance conditions and their reductions for N = L.
//! * [`series`], [`lemmas`]: sign analysis of the trigonometric sums that decide existence.
//! * [`admissibility`]: exact angle arithmetic and the L = 2N nonexistence certificate.
//! * [`solver`]: planar and spatial root finding and existence scans.

pub mod admissibility;
pub mod error;
pub mod grid;
pub mod lemmas;
pub mod nbody;
pub mod polygon;
pub mod residuals;
pub mod roots;
pub mod series;
pub mod solver;
pub mod sum;

pub use error::{PolyError, Result};
pub use nbody::{
    cc_residual, cc_residual_with_tolerance, center_of_mass_shift, moment_of_inertia, potential,
    BodySystem, CCReport,
};
pub use polygon::{build, centered_positions, TwistedPairParams};
pub use residuals::{
    constant_a, planar_mass_ratio, residual_vector, spatial_system, EqualRingSystem,
    PolygonConstants, ResidualVector, ThetaChoice,
};
