//! Pollution-free eigenvalue enclosures for perturbed periodic Schrödinger
//! operators `H = −Δ + V_p + V_d` in one and two dimensions.
//!
//! The pipeline is
//!
//! 1. [`bands`]: essential spectrum of the periodic part (band edges and gaps),
//! 2. [`fem`]: clamped C¹ finite elements and the mass, stiffness and bending
//!    matrices `B`, `A`, `Q`,
//! 3. [`matpoly`]: the quadratic pencil `P(z) = Q − 2zA + z²B`, its companion
//!    linearization and full complex spectrum,
//! 4. [`certify`]: enclosures `[Re μ − |Im μ|, Re μ + |Im μ|]` classified by
//!    gap, their quadratic refinement, and the Galerkin pollution report.

pub mod bands;
pub mod certify;
pub mod fem;
pub mod matpoly;
pub mod potentials;

pub use num_complex::Complex64;
