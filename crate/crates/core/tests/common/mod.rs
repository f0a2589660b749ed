//! Shared test forms and helpers for the integration tests.

#![allow(dead_code)]

use csc_forge::metric_field::{Curvature, MetricField};
use csc_forge::oneform::{MeromorphicOneForm, Pole};
use csc_forge::phi_solver::PhiField;
use csc_forge::rational_algebra::{divisor_of_form, ComplexPolynomial};
use csc_forge::sphere_classification::{standard_form, StandardFormCase};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CATALOG_SEED: u64 = 0x5eed_c5c0;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub struct TestForm {
    pub name: String,
    pub form: MeromorphicOneForm,
}

/// Smallest distance between two finite points of the divisor of `ω`.
fn min_singular_separation(form: &MeromorphicOneForm) -> f64 {
    let pts: Vec<Complex64> = divisor_of_form(form)
        .entries()
        .iter()
        .filter_map(|e| e.point.as_finite())
        .collect();
    let mut best = f64::INFINITY;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            best = best.min((pts[i] - pts[j]).norm());
        }
    }
    best
}

/// A form with 4 to 6 real-residue poles in `|z| < 1.5`.
///
/// Residues have modulus in `[1, 3]` and random sign, their sum has modulus at
/// least 1, and all zeros and poles are at least 0.3 apart.
pub fn random_form(rng: &mut ChaCha8Rng) -> MeromorphicOneForm {
    loop {
        let n = rng.random_range(4..=6);
        let mut poles: Vec<Pole> = Vec::with_capacity(n);
        while poles.len() < n {
            let z = Complex64::from_polar(1.5 * rng.random::<f64>().sqrt(), rng.random_range(0.0..std::f64::consts::TAU));
            if poles.iter().all(|p| (p.location - z).norm() >= 0.5) {
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                poles.push(Pole::real(z, sign * rng.random_range(1.0..3.0)));
            }
        }
        let total: f64 = poles.iter().map(|p| p.residue.re).sum();
        if total.abs() < 1.0 {
            continue;
        }
        let form = MeromorphicOneForm::build_third_kind(poles, ComplexPolynomial::zero()).unwrap();
        if min_singular_separation(&form) >= 0.3 {
            return form;
        }
    }
}

/// Ten forms: five standard cases and five seeded random forms.
pub fn catalog() -> Vec<TestForm> {
    let standard = [
        ("simple(2.5)", StandardFormCase::simple(2.5)),
        ("unit(2)", StandardFormCase::unit_residues(2)),
        ("unit(3)", StandardFormCase::unit_residues(3)),
        ("plus_minus(2, 2)", StandardFormCase::plus_minus(2, c(2.0, 0.0))),
        ("plus_minus(3, -0.4+1.3i)", StandardFormCase::plus_minus(3, c(-0.4, 1.3))),
    ];
    let mut out: Vec<TestForm> = standard
        .into_iter()
        .map(|(name, case)| TestForm {
            name: name.to_string(),
            form: standard_form(&case).unwrap(),
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(CATALOG_SEED);
    for k in 0..5 {
        out.push(TestForm {
            name: format!("random#{k}"),
            form: random_form(&mut rng),
        });
    }
    out
}

pub fn metric(form: &MeromorphicOneForm, k: Curvature) -> MetricField {
    MetricField::new(PhiField::with_defaults(form).unwrap(), k)
}

pub use csc_forge::metric_field::admissible_grid;

/// Uniform point in the box `[-2, 2]²` at least `clearance` from every pole.
pub fn random_point_clear_of_poles(rng: &mut ChaCha8Rng, form: &MeromorphicOneForm, clearance: f64) -> Complex64 {
    loop {
        let z = c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        if form.distance_to_poles(z) >= clearance {
            return z;
        }
    }
}
