//! The function `Φ` solving `4 dΦ / (Φ(4 - Φ)) = ω + ω̄`, `Φ(p₀) = Φ₀`.
//!
//! Closed form: `Φ = 4 e^{f + A₀} / (1 + e^{f + A₀})` with
//! `A₀ = ln(Φ₀/(4 - Φ₀)) - f(p₀)`. An RK4 integrator along polylines serves
//! as an independent check of the closed form.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::oneform::MeromorphicOneForm;
use crate::rational_algebra::SpherePoint;

/// Base points tried in order when none is supplied.
pub const DEFAULT_BASE_POINTS: [Complex64; 3] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(2.0, 0.0),
    Complex64::new(1.0, 1.0),
];
pub const DEFAULT_PHI0: f64 = 2.0;

/// Minimum allowed distance between an integration path and a pole.
pub const MIN_PATH_POLE_DISTANCE: f64 = 1e-3;
/// Nominal RK4 step in the normalized path parameter.
pub const RK4_STEP: f64 = 1e-4;
/// Allowed disagreement between the full-step and half-step solutions.
pub const RK4_HALF_STEP_TOL: f64 = 1e-6;
const RK4_MIN_STEP: f64 = 1e-8;

/// `4 e^s/(1 + e^s)` without overflow.
pub fn logistic4(s: f64) -> f64 {
    if s > 0.0 {
        4.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        4.0 * e / (1.0 + e)
    }
}

/// `ln(Φ/(4 - Φ))`, the inverse of [`logistic4`].
pub fn logit4(phi: f64) -> f64 {
    (phi / (4.0 - phi)).ln()
}

fn check_initial_value(phi0: f64) -> Result<()> {
    if phi0.is_finite() && phi0 > 0.0 && phi0 < 4.0 {
        Ok(())
    } else {
        Err(Error::BadInitialValue(phi0))
    }
}

/// The solved field with its initial data.
#[derive(Clone, Debug)]
pub struct PhiField {
    form: MeromorphicOneForm,
    p0: Complex64,
    phi0: f64,
    a0: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PhiSummary {
    pub p0: [f64; 2],
    pub phi0: f64,
    pub a0: f64,
}

impl PhiField {
    pub fn solve(form: &MeromorphicOneForm, p0: Complex64, phi0: f64) -> Result<Self> {
        let report = form.check_hypotheses();
        if !report.passes() {
            return Err(Error::HypothesesFailed(report.diagnostics.join("; ")));
        }
        check_initial_value(phi0)?;
        if form.is_pole(p0) {
            return Err(Error::BasePointIsPole(p0));
        }
        let a0 = logit4(phi0) - form.potential_f(p0)?;
        Ok(Self {
            form: form.clone(),
            p0,
            phi0,
            a0,
        })
    }

    /// First non-pole among `1, 2, 1+i`.
    pub fn default_base_point(form: &MeromorphicOneForm) -> Complex64 {
        DEFAULT_BASE_POINTS
            .into_iter()
            .find(|z| !form.is_pole(*z))
            .expect("three distinct points cannot all be poles of a form with distinct checks")
    }

    /// Default initial data: first non-pole among `1, 2, 1+i` and `Φ₀ = 2`.
    pub fn with_defaults(form: &MeromorphicOneForm) -> Result<Self> {
        Self::solve(form, Self::default_base_point(form), DEFAULT_PHI0)
    }

    /// Field with a prescribed constant `A₀`, based at the default base point.
    pub fn with_a0(form: &MeromorphicOneForm, a0: f64) -> Result<Self> {
        let p0 = Self::default_base_point(form);
        let phi0 = logistic4(form.potential_f(p0)? + a0);
        if !(phi0 > 0.0 && phi0 < 4.0) {
            return Err(Error::BadInitialValue(phi0));
        }
        let mut field = Self::solve(form, p0, phi0)?;
        field.a0 = a0;
        Ok(field)
    }

    pub fn form(&self) -> &MeromorphicOneForm {
        &self.form
    }

    pub fn p0(&self) -> Complex64 {
        self.p0
    }

    pub fn phi0(&self) -> f64 {
        self.phi0
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn summary(&self) -> PhiSummary {
        PhiSummary {
            p0: [self.p0.re, self.p0.im],
            phi0: self.phi0,
            a0: self.a0,
        }
    }

    /// `s(z) = f(z) + A₀ = ln(Φ/(4 - Φ))`.
    pub fn exponent(&self, z: Complex64) -> Result<f64> {
        Ok(self.form.potential_f(z)? + self.a0)
    }

    pub fn phi(&self, z: Complex64) -> Result<f64> {
        self.exponent(z).map(logistic4)
    }

    /// Value of the continuous extension at any point of the sphere.
    pub fn phi_at(&self, point: SpherePoint) -> Result<f64> {
        if let Some((_, res)) = self
            .form
            .sphere_poles()
            .into_iter()
            .find(|(p, _)| p.approx_eq(&point, 0.0))
        {
            return Ok(pole_limit(res.re));
        }
        match point {
            SpherePoint::Finite(z) => self.phi(z),
            // No pole at infinity: the log terms cancel and H is constant.
            SpherePoint::Infinity => Ok(logistic4(2.0 * self.form.exact_part().coeff(0).re + self.a0)),
        }
    }

    /// `(-ω, p₀, 4 - Φ₀)`, the partner field under negation.
    pub fn negated(&self) -> Result<Self> {
        Self::solve(&self.form.negated(), self.p0, 4.0 - self.phi0)
    }
}

fn pole_limit(residue: f64) -> f64 {
    if residue > 0.0 {
        0.0
    } else {
        4.0
    }
}

pub fn solve_phi_closed(form: &MeromorphicOneForm, p0: Complex64, phi0: f64) -> Result<PhiField> {
    PhiField::solve(form, p0, phi0)
}

/// Limit of `Φ` at a pole: 0 for a positive residue, 4 for a negative one.
///
/// `pole_index` indexes [`MeromorphicOneForm::sphere_poles`], which lists the
/// finite poles in input order followed by infinity when it is a pole.
pub fn phi_limit_at_pole(field: &PhiField, pole_index: usize) -> Result<f64> {
    let poles = field.form.sphere_poles();
    let (_, res) = poles
        .get(pole_index)
        .ok_or_else(|| Error::InvalidInput(format!("no pole with index {pole_index}")))?;
    Ok(pole_limit(res.re))
}

fn segment_distance(a: Complex64, b: Complex64, p: Complex64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * d.conj()).re / len2).clamp(0.0, 1.0);
    (a + d * t - p).norm()
}

/// RK4 integration of `dΦ/dt = (Φ(4 - Φ)/4) · 2 Re(η(γ(t)) γ'(t))` along a
/// polyline, parametrized by normalized arc length.
///
/// Every segment is integrated at the nominal step and at half of it; if the
/// two disagree by more than [`RK4_HALF_STEP_TOL`] the step is halved again.
pub fn integrate_phi_along_path(form: &MeromorphicOneForm, path: &[Complex64], phi_start: f64) -> Result<f64> {
    check_initial_value(phi_start)?;
    for seg in path.windows(2) {
        for p in form.poles() {
            let d = segment_distance(seg[0], seg[1], p.location);
            if d < MIN_PATH_POLE_DISTANCE {
                return Err(Error::PathTooCloseToPole {
                    pole: p.location,
                    distance: d,
                });
            }
        }
    }
    let total: f64 = path.windows(2).map(|s| (s[1] - s[0]).norm()).sum();
    if total == 0.0 {
        return Ok(phi_start);
    }
    let mut phi = phi_start;
    for seg in path.windows(2) {
        let len = (seg[1] - seg[0]).norm();
        if len == 0.0 {
            continue;
        }
        phi = integrate_segment(form, seg[0], seg[1], phi, len / total)?;
    }
    Ok(phi)
}

fn integrate_segment(form: &MeromorphicOneForm, a: Complex64, b: Complex64, phi: f64, share: f64) -> Result<f64> {
    let mut step = RK4_STEP;
    loop {
        let coarse = rk4_segment(form, a, b, phi, steps_for(share, step));
        let fine = rk4_segment(form, a, b, phi, steps_for(share, step / 2.0));
        if (coarse - fine).abs() <= RK4_HALF_STEP_TOL {
            return Ok(fine);
        }
        step /= 2.0;
        if step < RK4_MIN_STEP {
            return Err(Error::StepUnderflow(step));
        }
    }
}

fn steps_for(share: f64, step: f64) -> usize {
    ((share / step).ceil() as usize).max(1)
}

fn rk4_segment(form: &MeromorphicOneForm, a: Complex64, b: Complex64, mut phi: f64, n: usize) -> f64 {
    let velocity = b - a;
    let rhs = |t: f64, phi: f64| {
        let eta = form.eta_at(a + velocity * t).expect("path avoids poles");
        phi * (4.0 - phi) / 4.0 * 2.0 * (eta * velocity).re
    };
    let h = 1.0 / n as f64;
    for k in 0..n {
        let t = k as f64 * h;
        let k1 = rhs(t, phi);
        let k2 = rhs(t + h / 2.0, phi + h * k1 / 2.0);
        let k3 = rhs(t + h / 2.0, phi + h * k2 / 2.0);
        let k4 = rhs(t + h, phi + h * k3);
        phi += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
    }
    phi
}
