use std::fmt;

use num_complex::Complex64;
use serde::ser::{Serialize, SerializeSeq, Serializer};

/// A point of the Riemann sphere `C ∪ {∞}`.
///
/// Infinity is a distinguished value, never a large coordinate, so the chart
/// change `w = 1/z` is exact.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpherePoint {
    Finite(Complex64),
    Infinity,
}

impl SpherePoint {
    pub fn finite(re: f64, im: f64) -> Self {
        Self::Finite(Complex64::new(re, im))
    }

    pub fn origin() -> Self {
        Self::finite(0.0, 0.0)
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, Self::Infinity)
    }

    pub fn as_finite(&self) -> Option<Complex64> {
        match self {
            Self::Finite(z) => Some(*z),
            Self::Infinity => None,
        }
    }

    /// Coordinate of the point in the `w = 1/z` chart (`None` at `z = 0`).
    pub fn inverted(&self) -> Option<Complex64> {
        match self {
            Self::Infinity => Some(Complex64::new(0.0, 0.0)),
            Self::Finite(z) if z.norm() == 0.0 => None,
            Self::Finite(z) => Some(z.inv()),
        }
    }

    /// Chordal distance on the unit-diameter-2 sphere; `∞` is at distance 2/√(1+|z|²) from `z`.
    pub fn chordal_distance(&self, other: &SpherePoint) -> f64 {
        match (self, other) {
            (Self::Infinity, Self::Infinity) => 0.0,
            (Self::Finite(z), Self::Infinity) | (Self::Infinity, Self::Finite(z)) => {
                2.0 / (1.0 + z.norm_sqr()).sqrt()
            }
            (Self::Finite(a), Self::Finite(b)) => {
                2.0 * (a - b).norm() / ((1.0 + a.norm_sqr()).sqrt() * (1.0 + b.norm_sqr()).sqrt())
            }
        }
    }

    /// Same point up to a relative tolerance in the finite chart.
    pub fn approx_eq(&self, other: &SpherePoint, rel_tol: f64) -> bool {
        match (self, other) {
            (Self::Infinity, Self::Infinity) => true,
            (Self::Finite(a), Self::Finite(b)) => {
                (a - b).norm() <= rel_tol * a.norm().max(b.norm()).max(1.0)
            }
            _ => false,
        }
    }
}

impl From<Complex64> for SpherePoint {
    fn from(z: Complex64) -> Self {
        Self::Finite(z)
    }
}

impl fmt::Display for SpherePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Infinity => write!(f, "inf"),
            Self::Finite(z) => write!(f, "{z}"),
        }
    }
}

/// Finite points serialize as `[re, im]`, infinity as the string `"inf"`.
impl Serialize for SpherePoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Self::Infinity => serializer.serialize_str("inf"),
            Self::Finite(z) => {
                let mut seq = serializer.serialize_seq(Some(2))?;
                seq.serialize_element(&z.re)?;
                seq.serialize_element(&z.im)?;
                seq.end()
            }
        }
    }
}
