//! Abelian differentials of the third kind on the sphere,
//! `ω = Σ λᵢ/(z - aᵢ) dz + dH`, and their real potential `f` with
//! `df = ω + ω̄`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational_algebra::{ComplexPolynomial, Polynomial, RationalFunction, SpherePoint};

/// Relative tolerance for calling two pole locations the same.
const DUPLICATE_POLE_TOL: f64 = 1e-9;
/// Relative tolerance for calling a residue real.
const REAL_RESIDUE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Pole {
    pub location: Complex64,
    pub residue: Complex64,
}

impl Pole {
    pub fn new(location: Complex64, residue: Complex64) -> Self {
        Self { location, residue }
    }

    pub fn real(location: Complex64, residue: f64) -> Self {
        Self::new(location, Complex64::new(residue, 0.0))
    }
}

/// Hypothesis check for the construction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactnessReport {
    pub is_third_kind: bool,
    pub residues_all_real_nonzero: bool,
    /// On the sphere the loops around poles generate all cycles, so this
    /// coincides with `residues_all_real_nonzero`.
    pub real_part_exact: bool,
    pub diagnostics: Vec<String>,
}

impl ExactnessReport {
    pub fn passes(&self) -> bool {
        self.is_third_kind && self.residues_all_real_nonzero && self.real_part_exact
    }
}

/// Meromorphic one-form stored by pole/residue data plus a polynomial exact part.
#[derive(Clone, Debug)]
pub struct MeromorphicOneForm {
    poles: Vec<Pole>,
    exact_part: ComplexPolynomial,
    exact_part_derivative: ComplexPolynomial,
    eta: RationalFunction<Complex64>,
    report: ExactnessReport,
}

fn is_real(z: Complex64) -> bool {
    z.im.abs() <= REAL_RESIDUE_TOL * z.norm().max(1.0)
}

impl MeromorphicOneForm {
    /// Builds `Σ λᵢ/(z - aᵢ) dz + dH` and caches `η` with `ω = η dz`.
    pub fn build_third_kind(poles: Vec<Pole>, exact_part: ComplexPolynomial) -> Result<Self> {
        for (i, p) in poles.iter().enumerate() {
            if !(p.location.is_finite() && p.residue.is_finite()) {
                return Err(Error::InvalidInput(format!("non-finite pole data at index {i}")));
            }
            if p.residue.norm() == 0.0 {
                return Err(Error::ZeroResidue(p.location));
            }
            let dup = poles[..i].iter().any(|q| {
                let scale = p.location.norm().max(q.location.norm()).max(1.0);
                (p.location - q.location).norm() <= DUPLICATE_POLE_TOL * scale
            });
            if dup {
                return Err(Error::DuplicatePole(p.location));
            }
        }

        let exact_part_derivative = exact_part.derivative();
        let den = ComplexPolynomial::from_roots(poles.iter().map(|p| &p.location));
        let mut num = &exact_part_derivative * &den;
        for (i, p) in poles.iter().enumerate() {
            let others = ComplexPolynomial::from_roots(
                poles
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, q)| &q.location),
            );
            num = &num + &others.scale(&p.residue);
        }
        let eta = RationalFunction::new(num, den)?;

        let mut form = Self {
            poles,
            exact_part,
            exact_part_derivative,
            eta,
            report: ExactnessReport {
                is_third_kind: false,
                residues_all_real_nonzero: false,
                real_part_exact: false,
                diagnostics: Vec::new(),
            },
        };
        form.report = form.compute_report();
        Ok(form)
    }

    /// `λ/z dz`
    pub fn simple(residue: f64) -> Self {
        Self::build_third_kind(
            vec![Pole::real(Complex64::new(0.0, 0.0), residue)],
            ComplexPolynomial::zero(),
        )
        .expect("single pole with nonzero residue")
    }

    pub fn poles(&self) -> &[Pole] {
        &self.poles
    }

    pub fn exact_part(&self) -> &ComplexPolynomial {
        &self.exact_part
    }

    /// `η` with `ω = η dz`, in lowest terms.
    pub fn eta(&self) -> &RationalFunction<Complex64> {
        &self.eta
    }

    /// `η(z) = Σ λᵢ/(z - aᵢ) + H'(z)`; `None` at a pole.
    pub fn eta_at(&self, z: Complex64) -> Option<Complex64> {
        let mut acc = self.exact_part_derivative.eval(&z);
        for p in &self.poles {
            let d = z - p.location;
            if d.norm() == 0.0 {
                return None;
            }
            acc += p.residue / d;
        }
        Some(acc)
    }

    /// Order of `ω` at infinity (`None` for the zero form).
    pub fn order_at_infinity(&self) -> Option<i64> {
        self.eta.residue_at_infinity().order
    }

    /// Residue at infinity, derived from `η` (equals minus the sum of finite residues).
    pub fn residue_at_infinity(&self) -> Complex64 {
        self.eta.residue_at_infinity().residue
    }

    /// Whether infinity is a (simple) pole.
    pub fn has_pole_at_infinity(&self) -> bool {
        self.order_at_infinity() == Some(-1)
    }

    /// All poles on the sphere with their residues, infinity last.
    pub fn sphere_poles(&self) -> Vec<(SpherePoint, Complex64)> {
        let mut out: Vec<(SpherePoint, Complex64)> = self
            .poles
            .iter()
            .map(|p| (SpherePoint::Finite(p.location), p.residue))
            .collect();
        if self.order_at_infinity().is_some_and(|o| o < 0) {
            out.push((SpherePoint::Infinity, self.residue_at_infinity()));
        }
        out
    }

    pub fn is_pole(&self, z: Complex64) -> bool {
        self.poles.iter().any(|p| p.location == z)
    }

    /// Distance from `z` to the nearest finite pole.
    pub fn distance_to_poles(&self, z: Complex64) -> f64 {
        self.poles
            .iter()
            .map(|p| (z - p.location).norm())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn check_hypotheses(&self) -> &ExactnessReport {
        &self.report
    }

    fn compute_report(&self) -> ExactnessReport {
        let mut diagnostics = Vec::new();
        let inf = self.eta.residue_at_infinity();
        let mut is_third_kind = true;
        if self.poles.is_empty() && inf.order.is_none_or(|o| o >= 0) {
            is_third_kind = false;
            diagnostics.push("form has no poles".to_string());
        }
        if let Some(order) = inf.order {
            if order < -1 {
                is_third_kind = false;
                diagnostics.push(format!("pole of order {} at infinity", -order));
            }
        }
        let mut all_real = true;
        for p in &self.poles {
            if !is_real(p.residue) {
                all_real = false;
                diagnostics.push(format!(
                    "residue {} at {} is not real (loop integral of Re ω = {:.6})",
                    p.residue,
                    p.location,
                    -2.0 * std::f64::consts::PI * p.residue.im
                ));
            }
        }
        if inf.order == Some(-1) && !is_real(inf.residue) {
            all_real = false;
            diagnostics.push(format!("residue {} at infinity is not real", inf.residue));
        }
        ExactnessReport {
            is_third_kind,
            residues_all_real_nonzero: all_real,
            real_part_exact: all_real,
            diagnostics,
        }
    }

    /// `f(z) = Σ λᵢ ln|z - aᵢ|² + 2 Re H(z)`, the potential with `df = ω + ω̄`
    /// normalized by a zero additive constant.
    pub fn potential_f(&self, z: Complex64) -> Result<f64> {
        if !self.report.real_part_exact {
            return Err(Error::HypothesesFailed(
                "real part of the form is not exact".into(),
            ));
        }
        let mut acc = 2.0 * self.exact_part.eval(&z).re;
        for p in &self.poles {
            let d2 = (z - p.location).norm_sqr();
            if d2 == 0.0 {
                return Err(Error::EvalAtPole(p.location));
            }
            acc += p.residue.re * d2.ln();
        }
        Ok(acc)
    }

    /// `-ω`
    pub fn negated(&self) -> Self {
        let poles = self
            .poles
            .iter()
            .map(|p| Pole::new(p.location, -p.residue))
            .collect();
        Self::build_third_kind(poles, -&self.exact_part).expect("negation preserves validity")
    }

    /// Pullback under `z = p·w`: poles move to `aᵢ/p`, residues are unchanged.
    pub fn pullback_scaled(&self, p: Complex64) -> Result<Self> {
        if p.norm() == 0.0 {
            return Err(Error::InvalidInput("scale must be nonzero".into()));
        }
        let poles = self
            .poles
            .iter()
            .map(|q| Pole::new(q.location / p, q.residue))
            .collect();
        Self::build_third_kind(poles, self.exact_part.substitute_scaled(&p))
    }

    pub fn to_spec(&self) -> FormSpec {
        FormSpec {
            poles: self
                .poles
                .iter()
                .map(|p| PoleSpec {
                    a: [p.location.re, p.location.im],
                    lambda: [p.residue.re, p.residue.im],
                })
                .collect(),
            exact_part: self.exact_part.coeffs().iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

pub fn build_third_kind(poles: Vec<Pole>, exact_part: ComplexPolynomial) -> Result<MeromorphicOneForm> {
    MeromorphicOneForm::build_third_kind(poles, exact_part)
}

pub fn check_hypotheses(form: &MeromorphicOneForm) -> ExactnessReport {
    form.check_hypotheses().clone()
}

pub fn potential_f(form: &MeromorphicOneForm, z: Complex64) -> Result<f64> {
    form.potential_f(z)
}

/// JSON form schema:
/// `{"poles":[{"a":[re,im],"lambda":[re,im]}],"exact_part":[[re,im],...]}`
/// with exact-part coefficients in ascending degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormSpec {
    #[serde(default)]
    pub poles: Vec<PoleSpec>,
    #[serde(default)]
    pub exact_part: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoleSpec {
    pub a: [f64; 2],
    pub lambda: [f64; 2],
}

impl FormSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("form JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }

    pub fn build(&self) -> Result<MeromorphicOneForm> {
        let poles = self
            .poles
            .iter()
            .map(|p| {
                Pole::new(
                    Complex64::new(p.a[0], p.a[1]),
                    Complex64::new(p.lambda[0], p.lambda[1]),
                )
            })
            .collect();
        let h = Polynomial::new(
            self.exact_part
                .iter()
                .map(|c| Complex64::new(c[0], c[1]))
                .collect(),
        );
        MeromorphicOneForm::build_third_kind(poles, h)
    }
}
