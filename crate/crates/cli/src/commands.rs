use std::io::Write;

use csc_forge::metric_field::{
    admissible_grid, locate_phi2_crossing, negation_invariance_check, Curvature, GridSpec, MetricField,
};
use csc_forge::phi_solver::PhiField;
use csc_forge::rational_algebra::{divisor_of_form, SpherePoint};
use csc_forge::singularity_analysis::{
    all_cone_angles, gauss_bonnet_check, predicted_divisor, GAUSS_BONNET_REL_TOL,
};
use csc_forge::sphere_classification::{classify_field, normalize_form, standard_form};
use csc_forge::Error;
use serde_json::{json, Value};

use crate::config::JobConfig;
use crate::failure::{Failure, EXIT_GEOMETRY, EXIT_HYPOTHESES, EXIT_VERIFICATION};

pub const CURVATURE_TOL: f64 = 1e-3;
pub const ANGLE_REL_TOL: f64 = 0.01;
pub const NEGATION_TOL: f64 = 1e-10;
pub const REDUCTION_TOL: f64 = 1e-9;

fn emit(cfg: &JobConfig, text: &str) -> Result<(), Failure> {
    let written = match &cfg.out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    written.map_err(|e| Failure::new(EXIT_GEOMETRY, format!("cannot write output: {e}")))
}

fn emit_json(cfg: &JobConfig, value: &Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    text.push('\n');
    emit(cfg, &text)
}

fn complex(z: num_complex::Complex64) -> Value {
    json!([z.re, z.im])
}

fn solved(cfg: &JobConfig) -> Result<PhiField, Failure> {
    let form = cfg.build_form()?;
    let report = form.check_hypotheses();
    if !report.passes() {
        return Err(Failure::new(EXIT_HYPOTHESES, report.diagnostics.join("; ")));
    }
    cfg.solve_phi(&form)
}

pub fn inspect(cfg: &JobConfig) -> Result<u8, Failure> {
    let form = cfg.build_form()?;
    let report = form.check_hypotheses().clone();
    let divisor = divisor_of_form(&form);
    let residues: Vec<Value> = form
        .sphere_poles()
        .into_iter()
        .map(|(point, r)| json!({"point": point, "residue": complex(r)}))
        .collect();
    emit_json(
        cfg,
        &json!({
            "form": form.to_spec(),
            "divisor": divisor.to_string(),
            "divisor_entries": divisor.entries(),
            "residues": residues,
            "order_at_infinity": form.order_at_infinity(),
            "hypotheses": report,
        }),
    )?;
    eprintln!(
        "divisor {divisor}; third-kind: {}; exact: {}",
        report.is_third_kind,
        report.passes()
    );
    Ok(if report.passes() { 0 } else { EXIT_HYPOTHESES })
}

pub fn phi(cfg: &JobConfig) -> Result<u8, Failure> {
    let field = solved(cfg)?;
    let limits: Vec<Value> = field
        .form()
        .sphere_poles()
        .into_iter()
        .map(|(point, r)| {
            let limit = field.phi_at(point).map_err(Failure::from_core)?;
            Ok(json!({"point": point, "residue": complex(r), "limit": limit}))
        })
        .collect::<Result<_, Failure>>()?;
    let infinity = if field.form().has_pole_at_infinity() {
        Value::Null
    } else {
        json!(field.phi_at(SpherePoint::Infinity).map_err(Failure::from_core)?)
    };
    let grid: Option<Vec<Value>> = match &cfg.grid {
        Some(g) => Some(
            g.points()
                .into_iter()
                .map(|z| {
                    let v = field.phi(z).map_err(Failure::from_core)?;
                    Ok(json!({"x": z.re, "y": z.im, "phi": v}))
                })
                .collect::<Result<_, Failure>>()?,
        ),
        None => None,
    };
    emit_json(
        cfg,
        &json!({
            "initial_data": field.summary(),
            "pole_limits": limits,
            "phi_at_infinity": infinity,
            "grid": grid,
        }),
    )?;
    Ok(0)
}

fn grid_for(cfg: &JobConfig, field: &MetricField) -> Result<GridSpec, Failure> {
    match cfg.grid {
        Some(g) => Ok(g),
        None => admissible_grid(field, cfg.h).ok_or_else(|| {
            Failure::new(EXIT_GEOMETRY, "no admissible grid found in [-2, 2]^2; pass --grid")
        }),
    }
}

/// Adds the location of the `Φ = 2` level set to grid errors for `K = -1`.
fn grid_failure(field: &MetricField, grid: &GridSpec, e: Error) -> Failure {
    let mut failure = Failure::from_core(e);
    if field.curvature() == Curvature::Hyperbolic {
        if let Some(z) = locate_phi2_crossing(field.phi_field(), grid) {
            failure.message = format!(
                "{}; the phi = 2 locus crosses the grid at {:.12}{:+.12}i",
                failure.message, z.re, z.im
            );
        }
    }
    failure
}

pub fn metric(cfg: &JobConfig) -> Result<u8, Failure> {
    let field = cfg.metric(solved(cfg)?)?;
    let grid = grid_for(cfg, &field)?;
    let report = field
        .curvature_report(&grid, cfg.h)
        .map_err(|e| grid_failure(&field, &grid, e))?;
    let mut csv = String::from("x,y,rho,phi,K_est\n");
    for s in &report.samples {
        let phi = field
            .phi_field()
            .phi(num_complex::Complex64::new(s.x, s.y))
            .map_err(Failure::from_core)?;
        csv.push_str(&format!("{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n", s.x, s.y, s.rho, phi, s.k_est));
    }
    emit(cfg, &csv)?;
    eprintln!(
        "max |K_est - K| = {:.3e} over {} grid points (K = {}, h = {})",
        report.max_residual,
        report.samples.len(),
        field.curvature(),
        cfg.h
    );
    Ok(0)
}

pub fn angles(cfg: &JobConfig) -> Result<u8, Failure> {
    let field = cfg.metric(solved(cfg)?)?;
    let predicted = predicted_divisor(field.form(), field.curvature()).map_err(Failure::from_core)?;
    let reports = all_cone_angles(&field, &cfg.radii).map_err(Failure::from_core)?;
    emit_json(
        cfg,
        &json!({
            "curvature": field.curvature().value(),
            "predicted_divisor": predicted.divisor.to_string(),
            "predicted": predicted,
            "reports": reports,
        }),
    )?;
    Ok(0)
}

pub fn gauss_bonnet(cfg: &JobConfig) -> Result<u8, Failure> {
    let field = cfg.metric(solved(cfg)?)?;
    let report = gauss_bonnet_check(&field).map_err(Failure::from_core)?;
    let passes = report.passes(GAUSS_BONNET_REL_TOL);
    emit_json(
        cfg,
        &json!({"report": report, "tolerance": GAUSS_BONNET_REL_TOL, "passes": passes}),
    )?;
    Ok(if passes { 0 } else { EXIT_VERIFICATION })
}

pub fn classify(cfg: &JobConfig) -> Result<u8, Failure> {
    let field = solved(cfg)?;
    let classification = classify_field(&field).map_err(Failure::from_core)?;
    let passes = classification.discrepancy < REDUCTION_TOL;
    emit_json(
        cfg,
        &json!({"classification": classification, "tolerance": REDUCTION_TOL, "passes": passes}),
    )?;
    Ok(if passes { 0 } else { EXIT_VERIFICATION })
}

/// Status of one verification check.
enum Check {
    Pass(Value),
    Fail(Value),
    Skipped(String),
}

fn run_check(name: &str, result: Result<Check, Failure>, first_failure: &mut Option<u8>) -> Value {
    let (status, detail) = match result {
        Ok(Check::Pass(v)) => ("pass", v),
        Ok(Check::Fail(v)) => {
            first_failure.get_or_insert(EXIT_VERIFICATION);
            ("fail", v)
        }
        Ok(Check::Skipped(reason)) => ("skipped", json!({"reason": reason})),
        Err(f) => {
            first_failure.get_or_insert(f.code);
            ("fail", json!({"error": f.message}))
        }
    };
    json!({"check": name, "status": status, "detail": detail})
}

fn check_curvature(cfg: &JobConfig, field: &MetricField) -> Result<Check, Failure> {
    let grid = grid_for(cfg, field)?;
    let report = field
        .curvature_report(&grid, cfg.h)
        .map_err(|e| grid_failure(field, &grid, e))?;
    let detail = json!({
        "grid": grid,
        "h": cfg.h,
        "max_residual": report.max_residual,
        "tolerance": CURVATURE_TOL,
    });
    Ok(if report.max_residual < CURVATURE_TOL {
        Check::Pass(detail)
    } else {
        Check::Fail(detail)
    })
}

fn check_angles(cfg: &JobConfig, field: &MetricField) -> Result<Check, Failure> {
    let predicted = predicted_divisor(field.form(), field.curvature()).map_err(Failure::from_core)?;
    let reports = all_cone_angles(field, &cfg.radii).map_err(Failure::from_core)?;
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for r in &reports {
        match r.relative_error() {
            Some(err) => {
                worst = worst.max(err);
                ok &= err < ANGLE_REL_TOL;
            }
            // Points without a predicted angle must not look conical.
            None => ok &= !predicted.non_conical.contains(&r.point) || !r.conical,
        }
    }
    let detail = json!({
        "points": reports.len(),
        "max_relative_error": worst,
        "tolerance": ANGLE_REL_TOL,
        "non_conical": predicted.non_conical,
    });
    Ok(if ok { Check::Pass(detail) } else { Check::Fail(detail) })
}

fn check_gauss_bonnet(field: &MetricField) -> Result<Check, Failure> {
    if field.curvature() != Curvature::Spherical {
        return Ok(Check::Skipped("only K = 1 metrics have conical singularities alone".into()));
    }
    let report = gauss_bonnet_check(field).map_err(Failure::from_core)?;
    let passes = report.passes(GAUSS_BONNET_REL_TOL);
    let detail = json!({"report": report, "tolerance": GAUSS_BONNET_REL_TOL});
    Ok(if passes { Check::Pass(detail) } else { Check::Fail(detail) })
}

fn check_negation(field: &MetricField) -> Result<Check, Failure> {
    if field.curvature() != Curvature::Spherical {
        return Ok(Check::Skipped("negation invariance is a K = 1 statement".into()));
    }
    let phi = field.phi_field();
    let d = negation_invariance_check(phi.form(), phi.p0(), phi.phi0()).map_err(Failure::from_core)?;
    let detail = json!({"max_difference": d, "tolerance": NEGATION_TOL});
    Ok(if d < NEGATION_TOL { Check::Pass(detail) } else { Check::Fail(detail) })
}

fn check_classification(field: &MetricField) -> Result<Check, Failure> {
    if field.curvature() != Curvature::Spherical {
        return Ok(Check::Skipped("football reduction is a K = 1 statement".into()));
    }
    let classification = match classify_field(field.phi_field()) {
        Ok(c) => c,
        Err(Error::PatternMismatch(m)) | Err(Error::ResidueMismatch(m)) => {
            return Ok(Check::Skipped(format!("not a two-point form: {m}")))
        }
        Err(e) => return Err(Failure::from_core(e)),
    };
    let round_trip = standard_form(&classification.case)
        .and_then(|f| normalize_form(&f))
        .map_err(Failure::from_core)?;
    let round_trip_ok = round_trip.case == classification.case.case
        && (round_trip.scale - classification.case.scale).norm() <= 1e-9 * classification.case.scale.norm().max(1.0);
    let ok = round_trip_ok && classification.discrepancy < REDUCTION_TOL;
    let detail = json!({
        "classification": classification,
        "round_trip": round_trip_ok,
        "tolerance": REDUCTION_TOL,
    });
    Ok(if ok { Check::Pass(detail) } else { Check::Fail(detail) })
}

pub fn verify(cfg: &JobConfig) -> Result<u8, Failure> {
    let field = cfg.metric(solved(cfg)?)?;
    let mut first_failure = None;
    let checks = vec![
        run_check("curvature", check_curvature(cfg, &field), &mut first_failure),
        run_check("cone_angles", check_angles(cfg, &field), &mut first_failure),
        run_check("gauss_bonnet", check_gauss_bonnet(&field), &mut first_failure),
        run_check("negation_invariance", check_negation(&field), &mut first_failure),
        run_check("classification", check_classification(&field), &mut first_failure),
    ];
    let passed = first_failure.is_none();
    emit_json(
        cfg,
        &json!({
            "curvature": field.curvature().value(),
            "initial_data": field.phi_field().summary(),
            "predicted_divisor": predicted_divisor(field.form(), field.curvature())
                .map(|p| p.divisor.to_string())
                .map_err(Failure::from_core)?,
            "checks": checks,
            "passed": passed,
        }),
    )?;
    eprintln!("verify: {}", if passed { "all checks passed" } else { "some checks failed" });
    Ok(first_failure.unwrap_or(0))
}
