//! Standard forms of third-kind differentials with two conical points and the
//! resulting classification of spherical footballs.
//!
//! Every such form is, after a coordinate change `z = p·w`, one of
//!
//! 1. `λ/z dz`,
//! 2. `α z^{α-1}/(z^α + 1) dz` (α poles of residue 1),
//! 3. `α(a - 1) z^{α-1}/((z^α + a)(z^α + 1)) dz` (α poles of residue 1 and α of residue -1).
//!
//! Recognizing case 3 relies on the identity `t's - ts' = αμ z^{α-1}` for the
//! monic polynomials `t, s` vanishing at the two pole sets, which forces
//! `t = z^α + ω₀` and `s = z^α + σ₀`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric_field::{ConformalDensity, Curvature, MetricField};
use crate::oneform::{MeromorphicOneForm, Pole};
use crate::phi_solver::PhiField;
use crate::rational_algebra::{
    exact_from_complex64, ComplexPolynomial, Divisor, DivisorEntry, ExactComplex, ExactPolynomial, Polynomial,
    Scalar, SpherePoint,
};

/// Relative cleanup applied to pole-set polynomials built by floating Vieta.
pub const VIETA_CLEANUP_TOL: f64 = 1e-9;
/// Tolerance for recognizing residues `±1`.
const UNIT_RESIDUE_TOL: f64 = 1e-9;
/// Agreement required between a pulled-back form and its standard form.
pub const NORMALIZATION_CHECK_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum StandardCase {
    /// `λ/z dz`
    Simple { residue: f64 },
    /// `α z^{α-1}/(z^α + 1) dz`
    UnitResidues { alpha: u32 },
    /// `α(a - 1) z^{α-1}/((z^α + a)(z^α + 1)) dz`
    PlusMinus { alpha: u32, a: Complex64 },
}

/// A standard form together with the scale `p` of the coordinate change
/// `z = p·w` taking the standard coordinate `w` to the working coordinate `z`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StandardFormCase {
    #[serde(flatten)]
    pub case: StandardCase,
    pub scale: Complex64,
}

impl StandardFormCase {
    pub fn simple(residue: f64) -> Self {
        Self {
            case: StandardCase::Simple { residue },
            scale: Complex64::new(1.0, 0.0),
        }
    }

    pub fn unit_residues(alpha: u32) -> Self {
        Self {
            case: StandardCase::UnitResidues { alpha },
            scale: Complex64::new(1.0, 0.0),
        }
    }

    pub fn plus_minus(alpha: u32, a: Complex64) -> Self {
        Self {
            case: StandardCase::PlusMinus { alpha, a },
            scale: Complex64::new(1.0, 0.0),
        }
    }

    pub fn with_scale(mut self, scale: Complex64) -> Self {
        self.scale = scale;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale.is_finite() && self.scale.norm() > 0.0) {
            return Err(Error::InvalidCaseData(format!("scale must be nonzero, got {}", self.scale)));
        }
        match self.case {
            StandardCase::Simple { residue } => {
                if !(residue.is_finite() && residue != 0.0) {
                    return Err(Error::InvalidCaseData(format!("residue must be nonzero, got {residue}")));
                }
            }
            StandardCase::UnitResidues { alpha } => check_alpha(alpha)?,
            StandardCase::PlusMinus { alpha, a } => {
                check_alpha(alpha)?;
                check_a(a).map_err(|_| Error::InvalidCaseData(format!("a must avoid 0 and 1, got {a}")))?;
            }
        }
        Ok(())
    }

    /// Cone angle parameter of the induced K = 1 metric (both points have angle `2πα`).
    pub fn cone_alpha(&self) -> f64 {
        match self.case {
            StandardCase::Simple { residue } => residue.abs(),
            StandardCase::UnitResidues { alpha } | StandardCase::PlusMinus { alpha, .. } => alpha as f64,
        }
    }
}

fn check_alpha(alpha: u32) -> Result<()> {
    if alpha < 2 {
        return Err(Error::InvalidCaseData(format!("alpha must be at least 2, got {alpha}")));
    }
    Ok(())
}

fn check_a(a: Complex64) -> Result<()> {
    if !a.is_finite() || a.norm() <= 1e-12 || (a - 1.0).norm() <= 1e-12 {
        return Err(Error::DegenerateA(a));
    }
    Ok(())
}

/// The `alpha` roots of `w^α = c`.
fn roots_of(c: Complex64, alpha: u32) -> Vec<Complex64> {
    let r = c.norm().powf(1.0 / alpha as f64);
    let theta = c.arg();
    (0..alpha)
        .map(|k| Complex64::from_polar(r, (theta + 2.0 * PI * k as f64) / alpha as f64))
        .collect()
}

/// The α-th root of `c` with argument in `[0, 2π/α)`.
pub fn canonical_root(c: Complex64, alpha: u32) -> Complex64 {
    let sector = 2.0 * PI / alpha as f64;
    let mut theta = c.arg() / alpha as f64;
    if theta < 0.0 {
        theta += sector;
    }
    if theta >= sector - 1e-12 {
        theta = 0.0;
    }
    Complex64::from_polar(c.norm().powf(1.0 / alpha as f64), theta)
}

/// The form described by `case`, written in the working coordinate `z = p·w`.
pub fn standard_form(case: &StandardFormCase) -> Result<MeromorphicOneForm> {
    case.validate()?;
    let p = case.scale;
    let poles = match case.case {
        StandardCase::Simple { residue } => vec![Pole::real(Complex64::new(0.0, 0.0), residue)],
        StandardCase::UnitResidues { alpha } => roots_of(Complex64::new(-1.0, 0.0), alpha)
            .into_iter()
            .map(|r| Pole::real(p * r, 1.0))
            .collect(),
        StandardCase::PlusMinus { alpha, a } => {
            let mut poles: Vec<Pole> = roots_of(Complex64::new(-1.0, 0.0), alpha)
                .into_iter()
                .map(|r| Pole::real(p * r, 1.0))
                .collect();
            poles.extend(roots_of(-a, alpha).into_iter().map(|s| Pole::real(p * s, -1.0)));
            poles
        }
    };
    MeromorphicOneForm::build_third_kind(poles, ComplexPolynomial::zero())
        .map_err(|e| Error::InvalidCaseData(e.to_string()))
}

/// Outcome of a successful Wronskian identity check.
#[derive(Clone, Debug, PartialEq)]
pub struct WronskianIdentity {
    pub alpha: usize,
    /// `μ` in `t's - ts' = αμ z^{α-1}`; equals `σ₀ - ω₀`.
    pub mu: ExactComplex,
    /// Constant term of `t`.
    pub omega0: ExactComplex,
    /// Constant term of `s`.
    pub sigma0: ExactComplex,
}

/// Exact check of `t's - ts' = αμ z^{α-1}` for monic `t, s` of equal degree
/// `α ≥ 2` with nonzero constant terms.
///
/// On success the forced shape `t = z^α + ω₀`, `s = z^α + σ₀` is verified
/// coefficient by coefficient together with `μ = σ₀ - ω₀`.
pub fn wronskian_identity_check(t: &ExactPolynomial, s: &ExactPolynomial) -> Result<WronskianIdentity> {
    let alpha = match (t.degree(), s.degree()) {
        (Some(a), Some(b)) if a == b && a >= 2 => a,
        _ => {
            return Err(Error::InvalidCaseData(
                "t and s must have equal degree at least 2".into(),
            ))
        }
    };
    if !t.is_monic() || !s.is_monic() {
        return Err(Error::InvalidCaseData("t and s must be monic".into()));
    }
    let omega0 = t.coeff(0);
    let sigma0 = s.coeff(0);
    if omega0.is_zero() || sigma0.is_zero() {
        return Err(Error::InvalidCaseData("constant terms must be nonzero".into()));
    }

    let w = &(&t.derivative() * s) - &(t * &s.derivative());
    if w.is_zero() {
        return Err(Error::ZeroMu);
    }
    let monomial = w.degree() == Some(alpha - 1) && w.coeffs()[..alpha - 1].iter().all(Scalar::is_zero);
    if !monomial {
        return Err(Error::NotMonomialIdentity);
    }
    let alpha_inv = Scalar::inv(&ExactComplex::from_i64(alpha as i64)).expect("alpha > 0");
    let mu = w.coeff(alpha - 1) * alpha_inv;

    // Coefficient matching from z^{2α-2} down to z^{α+1} forces the middle
    // coefficients of t and s to agree; the remaining equation then kills them.
    let forced = (1..alpha).all(|k| t.coeff(k).is_zero() && s.coeff(k).is_zero());
    if !forced || mu != sigma0.clone() - omega0.clone() {
        return Err(Error::InvalidCaseData(
            "monomial Wronskian without the forced two-term shape".into(),
        ));
    }
    Ok(WronskianIdentity {
        alpha,
        mu,
        omega0,
        sigma0,
    })
}

/// Monic polynomial vanishing on `roots`, built in floating point, cleaned of
/// coefficients below `VIETA_CLEANUP_TOL` (relative) and converted exactly.
fn exact_vieta(roots: &[Complex64]) -> Result<ExactPolynomial> {
    let p = ComplexPolynomial::from_roots(roots).cleaned(VIETA_CLEANUP_TOL);
    let coeffs = p
        .coeffs()
        .iter()
        .map(|c| exact_from_complex64(*c).ok_or_else(|| Error::PatternMismatch("non-finite pole".into())))
        .collect::<Result<Vec<_>>>()?;
    Ok(Polynomial::new(coeffs))
}

/// Recovers the standard-form data `(case, α, a, p)` of a form.
pub fn normalize_form(form: &MeromorphicOneForm) -> Result<StandardFormCase> {
    let report = form.check_hypotheses();
    if !report.passes() {
        return Err(Error::PatternMismatch(format!(
            "form fails the construction hypotheses: {}",
            report.diagnostics.join("; ")
        )));
    }
    if form.exact_part().degree().unwrap_or(0) > 0 {
        return Err(Error::PatternMismatch("nonconstant exact part".into()));
    }
    let poles = form.poles();
    let case = if poles.len() == 1 {
        let pole = poles[0];
        if pole.location.norm() > 1e-12 {
            return Err(Error::PatternMismatch(format!(
                "single pole must sit at 0, found {}",
                pole.location
            )));
        }
        StandardFormCase::simple(pole.residue.re)
    } else {
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for p in poles {
            let r = p.residue.re;
            if (r - 1.0).abs() <= UNIT_RESIDUE_TOL {
                plus.push(p.location);
            } else if (r + 1.0).abs() <= UNIT_RESIDUE_TOL {
                minus.push(p.location);
            } else {
                return Err(Error::ResidueMismatch(format!(
                    "residue {r} at {} is neither 1 nor -1",
                    p.location
                )));
            }
        }
        if minus.is_empty() {
            let alpha = plus.len();
            let t = exact_vieta(&plus)?;
            let expected_derivative =
                Polynomial::monomial(ExactComplex::from_i64(alpha as i64), alpha - 1);
            if t.derivative() != expected_derivative {
                return Err(Error::PatternMismatch(
                    "unit-residue poles are not the roots of z^α + ω₀".into(),
                ));
            }
            let omega0 = t.coeff(0).to_complex64();
            StandardFormCase::unit_residues(alpha as u32).with_scale(canonical_root(omega0, alpha as u32))
        } else if plus.len() == minus.len() && plus.len() >= 2 {
            let alpha = plus.len();
            let t = exact_vieta(&plus)?;
            let s = exact_vieta(&minus)?;
            let identity = wronskian_identity_check(&t, &s).map_err(|e| match e {
                Error::NotMonomialIdentity => Error::PatternMismatch(
                    "pole sets do not satisfy t's - ts' = αμ z^{α-1}".into(),
                ),
                other => other,
            })?;
            let omega0 = identity.omega0.to_complex64();
            let a = identity.sigma0.to_complex64() / omega0;
            StandardFormCase::plus_minus(alpha as u32, a).with_scale(canonical_root(omega0, alpha as u32))
        } else {
            return Err(Error::PatternMismatch(format!(
                "{} poles of residue 1 and {} of residue -1",
                plus.len(),
                minus.len()
            )));
        }
    };
    verify_normalization(form, &case)?;
    Ok(case)
}

/// The pullback of `form` under `z = p·w` must match the standard form.
fn verify_normalization(form: &MeromorphicOneForm, case: &StandardFormCase) -> Result<()> {
    let pulled = form.pullback_scaled(case.scale)?;
    let standard = standard_form(&StandardFormCase {
        case: case.case,
        scale: Complex64::new(1.0, 0.0),
    })?;
    for k in 0..10 {
        let w = Complex64::from_polar(0.35 + 0.21 * k as f64, 0.9 + 1.7 * k as f64);
        let (Some(a), Some(b)) = (pulled.eta_at(w), standard.eta_at(w)) else {
            continue;
        };
        if (a - b).norm() > NORMALIZATION_CHECK_TOL * b.norm().max(1.0) {
            return Err(Error::PatternMismatch(format!(
                "pulled-back form differs from the standard form at {w}"
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum FootballVariant {
    /// `4α²|w|^{2(α-1)}/(1 + |w|^{2α})²`
    Generic,
    /// `4α²|w|^{2(α-1)}/(1 + |w^α + b|²)²`
    Integer { b: f64 },
}

/// Spherical metric with two cone points of angle `2πα` at `0` and `∞`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FootballMetric {
    pub alpha: f64,
    #[serde(flatten)]
    pub variant: FootballVariant,
}

pub fn football_metric(alpha: f64, variant: FootballVariant) -> Result<FootballMetric> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    if let FootballVariant::Integer { b } = variant {
        if alpha.fract() != 0.0 || !b.is_finite() {
            return Err(Error::InvalidAlpha(alpha));
        }
    }
    Ok(FootballMetric { alpha, variant })
}

impl FootballMetric {
    pub fn divisor(&self) -> Divisor {
        if self.alpha == 1.0 {
            return Divisor::empty();
        }
        Divisor::new(vec![
            DivisorEntry {
                point: SpherePoint::origin(),
                weight: self.alpha - 1.0,
            },
            DivisorEntry {
                point: SpherePoint::Infinity,
                weight: self.alpha - 1.0,
            },
        ])
        .expect("0 and infinity are distinct")
    }

    /// `|w^α + b|²` or `|w|^{2α}`.
    fn shifted_power_sq(&self, w: Complex64) -> f64 {
        match self.variant {
            FootballVariant::Generic => w.norm().powf(2.0 * self.alpha),
            FootballVariant::Integer { b } => (w.powu(self.alpha as u32) + b).norm_sqr(),
        }
    }
}

impl ConformalDensity for FootballMetric {
    fn density(&self, w: Complex64) -> Result<f64> {
        Ok(self.log_density(w)?.exp())
    }

    fn log_density(&self, w: Complex64) -> Result<f64> {
        let a = self.alpha;
        let radial = if a == 1.0 { 0.0 } else { 2.0 * (a - 1.0) * w.norm().ln() };
        Ok((4.0 * a * a).ln() + radial - 2.0 * self.shifted_power_sq(w).ln_1p())
    }

    fn singular_points(&self) -> Vec<SpherePoint> {
        if self.alpha == 1.0 {
            Vec::new()
        } else {
            vec![SpherePoint::origin(), SpherePoint::Infinity]
        }
    }
}

/// Scale `p` and football produced from a standard form and the constant `A₀`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FootballReduction {
    pub scale: Complex64,
    pub football: FootballMetric,
    /// Imaginary part of `b` before it is taken as real (case 3 only).
    pub b_imaginary: f64,
}

/// Coordinate change `z = p·w` turning the K = 1 metric of the standard form
/// (with constant `A₀`) into a football in `w`. The scale stored in `case`
/// is ignored; the form is taken in its standard coordinate.
pub fn reduce_to_football(case: &StandardFormCase, a0: f64) -> Result<FootballReduction> {
    if let StandardCase::PlusMinus { a, .. } = case.case {
        check_a(a)?;
    }
    case.validate()?;
    if !a0.is_finite() {
        return Err(Error::InvalidInput(format!("A0 must be finite, got {a0}")));
    }
    let real = |x: f64| Complex64::new(x, 0.0);
    match case.case {
        StandardCase::Simple { residue } => {
            // λ < 0 is the same metric with A₀ ↦ -A₀ and α = |λ|.
            let alpha = residue.abs();
            let scale = real((-residue.signum() * a0 / (2.0 * alpha)).exp());
            Ok(FootballReduction {
                scale,
                football: football_metric(alpha, FootballVariant::Generic)?,
                b_imaginary: 0.0,
            })
        }
        StandardCase::UnitResidues { alpha } => {
            let scale = real((-a0 / (2.0 * alpha as f64)).exp());
            let b = (a0 / 2.0).exp();
            Ok(FootballReduction {
                scale,
                football: football_metric(alpha as f64, FootballVariant::Integer { b })?,
                b_imaginary: 0.0,
            })
        }
        StandardCase::PlusMinus { alpha, a } => {
            let lambda = (a0 / 2.0).exp();
            let lambda_sq = lambda * lambda;
            let shift = (a + lambda_sq) / (1.0 + lambda_sq);
            let modulus = lambda * (a - 1.0).norm() / (1.0 + lambda_sq);
            let phase = if (a + lambda_sq).norm() == 0.0 { 0.0 } else { (a + lambda_sq).arg() };
            let p_alpha = Complex64::from_polar(modulus, phase);
            let b = shift / p_alpha;
            Ok(FootballReduction {
                scale: canonical_root(p_alpha, alpha),
                football: football_metric(alpha as f64, FootballVariant::Integer { b: b.re })?,
                b_imaginary: b.im,
            })
        }
    }
}

/// Largest relative mismatch between `ρ_z(p·w)·|p|²` from the K = 1 pipeline
/// and the football density `ρ(w)`, over the given points `w`.
pub fn reduction_discrepancy(
    case: &StandardFormCase,
    a0: f64,
    sample_points: &[Complex64],
) -> Result<f64> {
    let reduction = reduce_to_football(case, a0)?;
    let form = standard_form(&StandardFormCase {
        case: case.case,
        scale: Complex64::new(1.0, 0.0),
    })?;
    let field = MetricField::new(PhiField::with_a0(&form, a0)?, Curvature::Spherical);
    let p = reduction.scale;
    let mut worst: f64 = 0.0;
    for &w in sample_points {
        let pipeline = field.metric_density(p * w)? * p.norm_sqr();
        let football = reduction.football.density(w)?;
        worst = worst.max((pipeline - football).abs() / football.abs().max(1.0));
    }
    Ok(worst)
}

/// Classification of a solved K = 1 field whose form has two conical points.
#[derive(Clone, Debug, Serialize)]
pub struct FieldClassification {
    /// Standard form and the scale `p` with `z = p·w`.
    pub case: StandardFormCase,
    /// `A₀` of the same field written in the standard coordinate `w`.
    pub a0_standard: f64,
    pub reduction: FootballReduction,
    /// `P = p·q` with `z = P·u` taking the football coordinate `u` to `z`.
    pub total_scale: Complex64,
    /// Largest relative mismatch between `ρ_z(P·u)|P|²` and the football density.
    pub discrepancy: f64,
}

/// Normalizes the form of `field`, carries `A₀` to the standard coordinate
/// and reduces the K = 1 metric to a football.
pub fn classify_field(field: &PhiField) -> Result<FieldClassification> {
    let case = normalize_form(field.form())?;
    let standard = standard_form(&StandardFormCase {
        case: case.case,
        scale: Complex64::new(1.0, 0.0),
    })?;
    let w0 = [
        Complex64::new(0.5, 0.3),
        Complex64::new(1.7, 0.4),
        Complex64::new(-0.2, 2.3),
    ]
    .into_iter()
    .max_by(|a, b| standard.distance_to_poles(*a).total_cmp(&standard.distance_to_poles(*b)))
    .expect("nonempty");
    let a0_standard = field.exponent(case.scale * w0)? - standard.potential_f(w0)?;
    let reduction = reduce_to_football(&case, a0_standard)?;
    let total_scale = case.scale * reduction.scale;
    let metric = MetricField::new(field.clone(), Curvature::Spherical);
    let mut discrepancy: f64 = 0.0;
    for k in 0..100 {
        let u = Complex64::from_polar(0.1 + 0.029 * k as f64, 0.37 + 2.4 * k as f64);
        let z = total_scale * u;
        if field.form().distance_to_poles(z) < 1e-6 {
            continue;
        }
        let pipeline = metric.metric_density(z)? * total_scale.norm_sqr();
        let football = reduction.football.density(u)?;
        discrepancy = discrepancy.max((pipeline - football).abs() / football.max(1.0));
    }
    Ok(FieldClassification {
        case,
        a0_standard,
        reduction,
        total_scale,
        discrepancy,
    })
}
