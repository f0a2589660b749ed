//! Acceptance suite: runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line per criterion. Exits nonzero if any criterion fails.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;

use common::{admissible_grid, c, catalog, metric, random_point_clear_of_poles, TestForm};
use csc_forge::metric_field::{negation_invariance_check, Curvature};
use csc_forge::phi_solver::{integrate_phi_along_path, phi_limit_at_pole, PhiField};
use csc_forge::rational_algebra::{exact_gaussian, ExactPolynomial, Polynomial, Scalar, SpherePoint};
use csc_forge::singularity_analysis::{
    all_cone_angles, default_radii, fit_cone_angle, gauss_bonnet_for, log_spaced, predicted_divisor, sphere_area,
};
use csc_forge::sphere_classification::{
    canonical_root, football_metric, normalize_form, reduce_to_football, reduction_discrepancy, standard_form,
    wronskian_identity_check, FootballVariant, StandardCase, StandardFormCase,
};
use csc_forge::{ConformalDensity, Error};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn constant_curvature(forms: &[TestForm]) -> Outcome {
    let h = 1e-3;
    let mut worst = [0.0f64; 3];
    for t in forms {
        for (slot, k) in [Curvature::Hyperbolic, Curvature::Flat, Curvature::Spherical].into_iter().enumerate() {
            let field = metric(&t.form, k);
            let Some(grid) = admissible_grid(&field, h) else {
                return outcome(false, format!("{}: no admissible grid for K={k}", t.name));
            };
            match field.curvature_report(&grid, h) {
                Ok(r) => worst[slot] = worst[slot].max(r.max_residual),
                Err(e) => return outcome(false, format!("{} K={k}: {e}", t.name)),
            }
        }
    }
    let pass = worst.iter().all(|w| *w < 1e-3);
    outcome(
        pass,
        format!(
            "max|K_est-K| at h=1e-3 over {} forms: K=-1 {:.2e}, K=0 {:.2e}, K=1 {:.2e} (tol 1e-3)",
            forms.len(),
            worst[0],
            worst[1],
            worst[2]
        ),
    )
}

fn segment_distance(a: Complex64, b: Complex64, p: Complex64) -> f64 {
    let d = b - a;
    let t = (((p - a) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0);
    (a + d * t - p).norm()
}

fn ode_consistency(forms: &[TestForm]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_path: f64 = 0.0;
    let mut worst_loop: f64 = 0.0;
    for t in forms {
        let field = PhiField::with_defaults(&t.form).unwrap();
        let mut pairs = 0;
        while pairs < 50 {
            let a = random_point_clear_of_poles(&mut rng, &t.form, 0.1);
            let b = random_point_clear_of_poles(&mut rng, &t.form, 0.1);
            if (a - b).norm() < 1e-3 || t.form.poles().iter().any(|p| segment_distance(a, b, p.location) < 0.1) {
                continue;
            }
            let start = field.phi(a).unwrap();
            match integrate_phi_along_path(&t.form, &[a, b], start) {
                Ok(end) => worst_path = worst_path.max((end - field.phi(b).unwrap()).abs()),
                Err(e) => return outcome(false, format!("{}: {e}", t.name)),
            }
            pairs += 1;
        }
        for p in t.form.poles() {
            let center = p.location;
            let loop_path: Vec<Complex64> =
                (0..=64).map(|k| center + Complex64::from_polar(0.1, 2.0 * PI * k as f64 / 64.0)).collect();
            let start = field.phi(loop_path[0]).unwrap();
            match integrate_phi_along_path(&t.form, &loop_path, start) {
                Ok(end) => worst_loop = worst_loop.max((end - start).abs()),
                Err(e) => return outcome(false, format!("{}: {e}", t.name)),
            }
        }
    }
    outcome(
        worst_path < 1e-6 && worst_loop < 1e-8,
        format!("closed form vs RK4 on 50 pairs/form: {worst_path:.2e} (tol 1e-6); loops around poles: {worst_loop:.2e} (tol 1e-8)"),
    )
}

fn pole_limits(forms: &[TestForm]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for t in forms {
        let field = PhiField::with_defaults(&t.form).unwrap();
        for (index, (point, _)) in t.form.sphere_poles().into_iter().enumerate() {
            let limit = phi_limit_at_pole(&field, index).unwrap();
            for k in 0..4 {
                let zeta = Complex64::from_polar(1e-6, 0.3 + PI / 2.0 * k as f64);
                let z = match point {
                    SpherePoint::Finite(a) => a + zeta,
                    SpherePoint::Infinity => zeta.inv(),
                };
                worst = worst.max((field.phi(z).unwrap() - limit).abs());
                checked += 1;
            }
        }
    }
    outcome(
        worst < 1e-6,
        format!("{checked} approaches at distance 1e-6: max|Phi-limit| {worst:.2e} (tol 1e-6)"),
    )
}

fn cone_angles(forms: &[TestForm]) -> Outcome {
    let radii = default_radii();
    let mut worst: f64 = 0.0;
    let mut worst_unit: f64 = 0.0;
    let mut count = 0;
    for t in forms {
        let field = metric(&t.form, Curvature::Spherical);
        let reports = match all_cone_angles(&field, &radii) {
            Ok(r) => r,
            Err(e) => return outcome(false, format!("{}: {e}", t.name)),
        };
        for r in &reports {
            let Some(err) = r.relative_error() else {
                return outcome(false, format!("{}: no prediction at {}", t.name, r.point));
            };
            worst = worst.max(err);
            count += 1;
        }
        // |Res| = 1 poles are smooth points: the fit must give 2π there.
        for (point, res) in t.form.sphere_poles() {
            if (res.re.abs() - 1.0).abs() < 1e-12 {
                let r = fit_cone_angle(&field, point, &radii).unwrap();
                worst_unit = worst_unit.max((r.fitted_angle - 2.0 * PI).abs() / (2.0 * PI));
                count += 1;
            }
        }
    }
    outcome(
        worst < 0.01 && worst_unit < 0.01,
        format!("{count} points, K=1: max relative angle error {worst:.2e}, |Res|=1 points {worst_unit:.2e} (tol 1e-2)"),
    )
}

fn gauss_bonnet() -> Outcome {
    let mut worst: f64 = 0.0;
    for alpha in [0.5, 1.0, 2.0, 2.5, 3.0] {
        let football = football_metric(alpha, FootballVariant::Generic).unwrap();
        let area = sphere_area(&football).unwrap();
        worst = worst.max((area - 4.0 * PI * alpha).abs() / (4.0 * PI * alpha));
        let report = gauss_bonnet_for(&football, 1, &football.divisor()).unwrap();
        worst = worst.max(report.relative_residual);
        // The same football produced by the pipeline from λ/z dz.
        let field = metric(&standard_form(&StandardFormCase::simple(alpha)).unwrap(), Curvature::Spherical);
        let divisor = predicted_divisor(field.form(), Curvature::Spherical).unwrap().divisor;
        worst = worst.max(gauss_bonnet_for(&field, 1, &divisor).unwrap().relative_residual);
    }
    outcome(
        worst < 0.01,
        format!("footballs alpha in {{0.5,1,2,2.5,3}}: max relative area error {worst:.2e} (tol 1e-2)"),
    )
}

fn random_gaussian(rng: &mut ChaCha8Rng) -> csc_forge::rational_algebra::ExactComplex {
    loop {
        let g = exact_gaussian(rng.random_range(-20..=20), rng.random_range(-20..=20), rng.random_range(1..=12));
        if !g.is_zero() {
            return g;
        }
    }
}

fn two_term(alpha: usize, constant: csc_forge::rational_algebra::ExactComplex) -> ExactPolynomial {
    let mut coeffs = vec![csc_forge::rational_algebra::ExactComplex::zero(); alpha + 1];
    coeffs[0] = constant;
    coeffs[alpha] = csc_forge::rational_algebra::ExactComplex::one();
    Polynomial::new(coeffs)
}

fn lemma_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut identities = 0;
    let mut rejected = 0;
    for alpha in 2..=8usize {
        for _ in 0..10 {
            let (w0, s0) = (random_gaussian(&mut rng), random_gaussian(&mut rng));
            if w0 == s0 {
                continue;
            }
            let id = match wronskian_identity_check(&two_term(alpha, w0.clone()), &two_term(alpha, s0.clone())) {
                Ok(id) => id,
                Err(e) => return outcome(false, format!("alpha={alpha}: two-term input rejected: {e}")),
            };
            if id.omega0 != w0 || id.sigma0 != s0 || id.mu != s0.clone() - w0.clone() || id.alpha != alpha {
                return outcome(false, format!("alpha={alpha}: wrong identity data"));
            }
            identities += 1;

            // A nonzero middle coefficient in t breaks the monomial identity.
            let mut t = two_term(alpha, w0).coeffs().to_vec();
            t[rng.random_range(1..alpha)] = random_gaussian(&mut rng);
            let mut s = two_term(alpha, s0).coeffs().to_vec();
            if rng.random_bool(0.5) {
                s[rng.random_range(1..alpha)] = random_gaussian(&mut rng);
            }
            match wronskian_identity_check(&Polynomial::new(t), &Polynomial::new(s)) {
                Err(Error::NotMonomialIdentity) | Err(Error::ZeroMu) => rejected += 1,
                Ok(_) => return outcome(false, format!("alpha={alpha}: accepted a non-forced pair")),
                Err(e) => return outcome(false, format!("alpha={alpha}: unexpected error {e}")),
            }
        }
    }

    let mut round_trips = 0;
    for trial in 0..60 {
        let scale = Complex64::from_polar(rng.random_range(0.5..2.0), rng.random_range(0.0..2.0 * PI));
        let case = match trial % 3 {
            0 => StandardFormCase::simple(rng.random_range(0.3..4.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 }),
            1 => StandardFormCase::unit_residues(rng.random_range(2..=8)).with_scale(scale),
            _ => {
                let a = loop {
                    let a = c(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
                    if a.norm() > 0.1 && (a - 1.0).norm() > 0.1 {
                        break a;
                    }
                };
                StandardFormCase::plus_minus(rng.random_range(2..=8), a).with_scale(scale)
            }
        };
        let recovered = match normalize_form(&standard_form(&case).unwrap()) {
            Ok(r) => r,
            Err(e) => return outcome(false, format!("round trip of {case:?}: {e}")),
        };
        let ok = match (case.case, recovered.case) {
            (StandardCase::Simple { residue: x }, StandardCase::Simple { residue: y }) => {
                (x - y).abs() <= 1e-12 && recovered.scale == c(1.0, 0.0)
            }
            (StandardCase::UnitResidues { alpha: x }, StandardCase::UnitResidues { alpha: y }) => {
                x == y && (recovered.scale - canonical_root(case.scale.powu(x), x)).norm() <= 1e-9
            }
            (StandardCase::PlusMinus { alpha: x, a: ax }, StandardCase::PlusMinus { alpha: y, a: ay }) => {
                x == y && (ax - ay).norm() <= 1e-9 && (recovered.scale - canonical_root(case.scale.powu(x), x)).norm() <= 1e-9
            }
            _ => false,
        };
        if !ok {
            return outcome(false, format!("round trip of {case:?} gave {recovered:?}"));
        }
        round_trips += 1;
    }
    outcome(
        true,
        format!("{identities} exact identities (alpha<=8) with forced shape, {rejected} non-forced pairs rejected, {round_trips} round trips"),
    )
}

fn reductions() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut worst_im: f64 = 0.0;
    for trial in 0..30 {
        let case = match trial % 3 {
            0 => StandardFormCase::simple(rng.random_range(0.3..4.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 }),
            1 => StandardFormCase::unit_residues(rng.random_range(2..=6)),
            _ => {
                let a = loop {
                    let a = c(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
                    if a.norm() > 0.1 && (a - 1.0).norm() > 0.1 {
                        break a;
                    }
                };
                StandardFormCase::plus_minus(rng.random_range(2..=6), a)
            }
        };
        let a0 = rng.random_range(-2.0..2.0);
        let points: Vec<Complex64> = (0..100)
            .map(|_| Complex64::from_polar(rng.random_range(0.1..3.0), rng.random_range(0.0..2.0 * PI)))
            .collect();
        match reduction_discrepancy(&case, a0, &points) {
            Ok(d) => worst = worst.max(d),
            Err(e) => return outcome(false, format!("{case:?}, A0={a0}: {e}")),
        }
        let r = reduce_to_football(&case, a0).unwrap();
        if let FootballVariant::Integer { b } = r.football.variant {
            worst_im = worst_im.max(r.b_imaginary.abs() / b.abs().max(1.0));
        }
    }
    outcome(
        worst < 1e-9 && worst_im < 1e-12,
        format!("30 random cases x 100 points: max density mismatch {worst:.2e} (tol 1e-9); max |Im b| {worst_im:.2e} (tol 1e-12)"),
    )
}

fn negation(forms: &[TestForm]) -> Outcome {
    let mut worst: f64 = 0.0;
    for t in forms {
        let p0 = PhiField::default_base_point(&t.form);
        for phi0 in [2.0, 1.3] {
            match negation_invariance_check(&t.form, p0, phi0) {
                Ok(d) => worst = worst.max(d),
                Err(e) => return outcome(false, format!("{}: {e}", t.name)),
            }
        }
    }
    outcome(
        worst < 1e-10,
        format!("K=1, (w, Phi0) vs (-w, 4-Phi0), Phi0 in {{2, 1.3}}: max density difference {worst:.2e} (tol 1e-10)"),
    )
}

fn flat_non_conical(forms: &[TestForm]) -> Outcome {
    let radii = log_spaced(1e-4, 1e-2, 9);
    let mut points = 0;
    let mut regression_failures = 0;
    let mut diverging = 0;
    let (mut r2_min, mut r2_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for t in forms {
        let field = metric(&t.form, Curvature::Flat);
        let predicted = predicted_divisor(&t.form, Curvature::Flat).unwrap();
        for point in predicted.non_conical {
            points += 1;
            let report = fit_cone_angle(&field, point, &radii).unwrap();
            r2_min = r2_min.min(report.regression_r2);
            r2_max = r2_max.max(report.regression_r2);
            if report.regression_r2 < 0.999 {
                regression_failures += 1;
            }
            let rho: Vec<f64> = radii
                .iter()
                .map(|&r| field.density_near(point, Complex64::from_polar(r, 0.7)).unwrap())
                .collect();
            if rho.windows(2).all(|w| w[0] > w[1]) {
                diverging += 1;
            }
        }
    }
    outcome(
        points > 0 && regression_failures == points && diverging == points,
        format!(
            "{points} negative-residue poles at K=0: rho diverges at {diverging}; regression r^2 in [{r2_min:.6}, {r2_max:.6}], below 0.999 at {regression_failures}"
        ),
    )
}

fn main() -> ExitCode {
    let forms = catalog();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("1 constant curvature", Box::new(|| constant_curvature(&forms))),
        ("2 ODE consistency", Box::new(|| ode_consistency(&forms))),
        ("3 pole limits", Box::new(|| pole_limits(&forms))),
        ("4 cone angles", Box::new(|| cone_angles(&forms))),
        ("5 Gauss-Bonnet", Box::new(gauss_bonnet)),
        ("6 Wronskian exactness", Box::new(lemma_exactness)),
        ("7 football reductions", Box::new(reductions)),
        ("8 negation invariance", Box::new(|| negation(&forms))),
        ("9 K=0 non-conical poles", Box::new(|| flat_non_conical(&forms))),
    ];
    let mut failures = 0;
    for (name, run) in &criteria {
        let o = run();
        if !o.pass {
            failures += 1;
        }
        println!("criterion {name}: {} ({})", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
