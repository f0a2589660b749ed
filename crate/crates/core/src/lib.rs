//! Constant-curvature conformal metrics with conical singularities on the
//! Riemann sphere, built from abelian differentials of the third kind.
//!
//! Given `ω` with simple poles and real residues, the logistic solution `Φ` of
//! `4 dΦ / (Φ(4 - Φ)) = ω + ω̄` yields the metric
//! `g = 4Φ(4 - Φ)/[4 + (K - 1)Φ]² · ωω̄` of constant curvature `K`.

pub mod error;
pub mod metric_field;
pub mod oneform;
pub mod phi_solver;
pub mod rational_algebra;
pub mod singularity_analysis;
pub mod sphere_classification;

pub use error::{Error, Result};
pub use metric_field::ConformalDensity;
