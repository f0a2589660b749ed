mod common;

use common::c;
use csc_forge::metric_field::{Curvature, MetricField};
use csc_forge::oneform::{MeromorphicOneForm, Pole};
use csc_forge::phi_solver::PhiField;
use csc_forge::rational_algebra::{divisor_of_form, ComplexPolynomial};
use csc_forge::sphere_classification::{
    canonical_root, normalize_form, standard_form, StandardCase, StandardFormCase,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn form_strategy() -> impl Strategy<Value = MeromorphicOneForm> {
    any::<u64>().prop_map(|seed| common::random_form(&mut ChaCha8Rng::seed_from_u64(seed)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn residues_sum_to_zero(form in form_strategy()) {
        let total: Complex64 = form.sphere_poles().iter().map(|(_, r)| *r).sum();
        prop_assert!(total.norm() < 1e-9, "sum of residues {total}");
    }

    #[test]
    fn divisor_degree_is_minus_two(form in form_strategy()) {
        prop_assert!((divisor_of_form(&form).degree() + 2.0).abs() < 1e-9);
    }

    #[test]
    fn potential_gradient_matches_form(form in form_strategy(), x in -2.0..2.0f64, y in -2.0..2.0f64) {
        let z = c(x, y);
        prop_assume!(form.distance_to_poles(z) > 0.05);
        let h = 1e-6;
        let fx = (form.potential_f(z + h).unwrap() - form.potential_f(z - h).unwrap()) / (2.0 * h);
        let fy = (form.potential_f(z + c(0.0, h)).unwrap() - form.potential_f(z - c(0.0, h)).unwrap()) / (2.0 * h);
        // df = 2 Re(η dz): ∂f/∂x = 2 Re η, ∂f/∂y = -2 Im η
        let eta = form.eta_at(z).unwrap();
        let scale = eta.norm().max(1.0);
        prop_assert!((fx - 2.0 * eta.re).abs() < 1e-5 * scale);
        prop_assert!((fy + 2.0 * eta.im).abs() < 1e-5 * scale);
    }

    #[test]
    fn phi_negation_is_reflection(form in form_strategy(), phi0 in 0.1..3.9f64, x in -2.0..2.0f64, y in -2.0..2.0f64) {
        let z = c(x, y);
        prop_assume!(form.distance_to_poles(z) > 1e-3);
        let field = PhiField::with_defaults(&form).unwrap();
        let field = PhiField::solve(&form, field.p0(), phi0).unwrap();
        let partner = field.negated().unwrap();
        let (a, b) = (field.phi(z).unwrap(), partner.phi(z).unwrap());
        prop_assert!((a + b - 4.0).abs() < 1e-12);
        prop_assert!(a > 0.0 && a < 4.0 || a == 0.0 || a == 4.0);
    }

    #[test]
    fn stable_density_matches_direct_formula(form in form_strategy(), k in -1i32..=1, x in -2.0..2.0f64, y in -2.0..2.0f64) {
        let z = c(x, y);
        prop_assume!(form.distance_to_poles(z) > 0.05);
        let field = MetricField::new(PhiField::with_defaults(&form).unwrap(), Curvature::from_i32(k).unwrap());
        let phi = field.phi_field().phi(z).unwrap();
        prop_assume!(k != -1 || (phi - 2.0).abs() > 0.05);
        prop_assume!(phi > 1e-6 && phi < 4.0 - 1e-6);
        let stable = field.metric_density(z).unwrap();
        let direct = field.metric_density_direct(z).unwrap();
        prop_assert!((stable - direct).abs() <= 1e-9 * stable.max(1e-300), "{stable} vs {direct}");
    }

    #[test]
    fn unit_residue_round_trip(alpha in 2u32..=7, r in 0.3..3.0f64, theta in 0.0..std::f64::consts::TAU) {
        let case = StandardFormCase::unit_residues(alpha).with_scale(Complex64::from_polar(r, theta));
        let back = normalize_form(&standard_form(&case).unwrap()).unwrap();
        prop_assert_eq!(back.case, StandardCase::UnitResidues { alpha });
        prop_assert!((back.scale - canonical_root(case.scale.powu(alpha), alpha)).norm() < 1e-9);
    }

    #[test]
    fn plus_minus_round_trip(alpha in 2u32..=6, ar in -3.0..3.0f64, ai in -3.0..3.0f64, r in 0.3..3.0f64, theta in 0.0..std::f64::consts::TAU) {
        let a = c(ar, ai);
        prop_assume!(a.norm() > 0.1 && (a - 1.0).norm() > 0.1);
        let case = StandardFormCase::plus_minus(alpha, a).with_scale(Complex64::from_polar(r, theta));
        let back = normalize_form(&standard_form(&case).unwrap()).unwrap();
        let StandardCase::PlusMinus { alpha: b_alpha, a: b_a } = back.case else {
            return Err(TestCaseError::fail(format!("wrong case {back:?}")));
        };
        prop_assert_eq!(b_alpha, alpha);
        prop_assert!((b_a - a).norm() < 1e-9 * a.norm().max(1.0));
        prop_assert!((back.scale - canonical_root(case.scale.powu(alpha), alpha)).norm() < 1e-9 * r.max(1.0));
    }
}

#[test]
fn json_round_trip_preserves_form() {
    let form = MeromorphicOneForm::build_third_kind(
        vec![Pole::real(c(0.5, -1.0), 2.0), Pole::real(c(-1.0, 0.25), -1.5)],
        ComplexPolynomial::constant(c(0.3, 0.0)),
    )
    .unwrap();
    let text = form.to_spec().to_json();
    let again = csc_forge::oneform::FormSpec::from_json(&text).unwrap().build().unwrap();
    assert_eq!(again.poles(), form.poles());
    assert_eq!(again.to_spec().to_json(), text);
}

#[test]
fn corrupted_density_fails_curvature_check() {
    let form = standard_form(&StandardFormCase::unit_residues(2)).unwrap();
    let field = MetricField::new(PhiField::with_defaults(&form).unwrap(), Curvature::Spherical);
    let grid = common::admissible_grid(&field, 1e-3).unwrap();
    assert!(field.curvature_report(&grid, 1e-3).unwrap().max_residual < 1e-4);
    let corrupted = field.clone().with_density_scale(1.01);
    assert!(corrupted.curvature_report(&grid, 1e-3).unwrap().max_residual > 1e-3);
}
