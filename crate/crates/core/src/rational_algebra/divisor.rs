use std::fmt;

use serde::Serialize;

use super::point::SpherePoint;
use super::roots::zeros_with_multiplicity;
use crate::error::{Error, Result};
use crate::oneform::MeromorphicOneForm;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DivisorEntry {
    pub point: SpherePoint,
    pub weight: f64,
}

/// Formal sum `Σ wᵢ · Pᵢ` of distinct points of the sphere with real weights.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Divisor {
    entries: Vec<DivisorEntry>,
}

/// Points closer than this (relative) are treated as the same location.
const SAME_POINT_TOL: f64 = 1e-12;

impl Divisor {
    pub fn new(entries: Vec<DivisorEntry>) -> Result<Self> {
        for (i, a) in entries.iter().enumerate() {
            if entries[..i].iter().any(|b| b.point.approx_eq(&a.point, SAME_POINT_TOL)) {
                return Err(Error::InvalidInput(format!("divisor point {} repeated", a.point)));
            }
        }
        Ok(Self { entries })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[DivisorEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn degree(&self) -> f64 {
        self.entries.iter().map(|e| e.weight).sum()
    }

    /// Weight at `point`, zero if absent.
    pub fn weight_at(&self, point: &SpherePoint, rel_tol: f64) -> f64 {
        self.entries
            .iter()
            .find(|e| e.point.approx_eq(point, rel_tol))
            .map_or(0.0, |e| e.weight)
    }
}

impl fmt::Display for Divisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "0");
        }
        for (i, e) in self.entries.iter().enumerate() {
            let sign = if e.weight < 0.0 { "-" } else { "+" };
            if i == 0 {
                if e.weight < 0.0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            write!(f, "{}·{{{}}}", e.weight.abs(), e.point)?;
        }
        Ok(())
    }
}

/// Full zero/pole divisor of `ω` on the sphere, including infinity.
///
/// Zeros come from the numerator of `η` (with multiplicity), poles from the
/// stored pole list, and the order at infinity from the degree balance of
/// `η(1/w)·(-1/w²)`.
pub fn divisor_of_form(form: &MeromorphicOneForm) -> Divisor {
    let eta = form.eta();
    let mut entries: Vec<DivisorEntry> = zeros_with_multiplicity(eta.numerator())
        .into_iter()
        .map(|(z, m)| DivisorEntry {
            point: SpherePoint::Finite(z),
            weight: m as f64,
        })
        .collect();
    entries.extend(form.poles().iter().map(|p| DivisorEntry {
        point: SpherePoint::Finite(p.location),
        weight: -1.0,
    }));
    if let Some(order) = form.order_at_infinity() {
        if order != 0 {
            entries.push(DivisorEntry {
                point: SpherePoint::Infinity,
                weight: order as f64,
            });
        }
    }
    Divisor { entries }
}
