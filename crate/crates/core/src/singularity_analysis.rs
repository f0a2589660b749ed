//! Predicted and measured cone angles, and the Gauss–Bonnet area check.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric_field::{ConformalDensity, Curvature, MetricField};
use crate::oneform::MeromorphicOneForm;
use crate::rational_algebra::{divisor_of_form, Divisor, DivisorEntry, SpherePoint};

/// Minimum coefficient of determination for a conical fit.
pub const CONICAL_R2_MIN: f64 = 0.999;
/// Angular samples averaged per radius.
pub const ANGULAR_SAMPLES: usize = 64;
/// `|Res| = 1` is detected within this tolerance.
const UNIT_RESIDUE_TOL: f64 = 1e-12;
/// Euler characteristic of the sphere.
pub const SPHERE_EULER: i32 = 2;

/// Default fit radii: eight logarithmically spaced values in `[1e-5, 1e-3]`.
///
/// The outer decade of `[1e-5, 1e-2]` is left out: near a pole with `|Res|`
/// close to 1 the `ln(1 + e^s)` term still bends the profile there.
pub fn default_radii() -> Vec<f64> {
    log_spaced(1e-5, 1e-3, 8)
}

pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Divisor of conical points predicted for the metric of curvature `K`,
/// plus the poles that are singular but not conical.
#[derive(Clone, Debug, Serialize)]
pub struct PredictedDivisor {
    pub divisor: Divisor,
    pub non_conical: Vec<SpherePoint>,
}

/// Zeros of order `m` carry weight `m` (angle `2π(m + 1)`); poles carry
/// `|Res| - 1` (angle `2π|Res|`) and are omitted when `|Res| = 1`. For
/// `K = 0`, poles with negative residue are not conical and are listed apart.
pub fn predicted_divisor(form: &MeromorphicOneForm, curvature: Curvature) -> Result<PredictedDivisor> {
    let report = form.check_hypotheses();
    if !report.passes() {
        return Err(Error::HypothesesFailed(report.diagnostics.join("; ")));
    }
    let mut entries: Vec<DivisorEntry> = divisor_of_form(form)
        .entries()
        .iter()
        .filter(|e| e.weight > 0.0)
        .copied()
        .collect();
    let mut non_conical = Vec::new();
    for (point, residue) in form.sphere_poles() {
        let res = residue.re;
        if curvature == Curvature::Flat && res < 0.0 {
            non_conical.push(point);
            continue;
        }
        let weight = res.abs() - 1.0;
        if weight.abs() > UNIT_RESIDUE_TOL {
            entries.push(DivisorEntry { point, weight });
        }
    }
    Ok(PredictedDivisor {
        divisor: Divisor::new(entries)?,
        non_conical,
    })
}

/// Predicted angle at `point`, `None` where no conical angle is asserted
/// (non-conical poles, or zeros on the `K = -1` degeneracy locus).
pub fn predicted_angle(field: &MetricField, point: SpherePoint) -> Option<f64> {
    let form = field.form();
    if let Some((_, res)) = form
        .sphere_poles()
        .into_iter()
        .find(|(p, _)| p.approx_eq(&point, 1e-12))
    {
        let res = res.re;
        if field.curvature() == Curvature::Flat && res < 0.0 {
            return None;
        }
        return Some(2.0 * PI * res.abs());
    }
    let order = divisor_of_form(form).weight_at(&point, 1e-9);
    if order > 0.0 && field.curvature() == Curvature::Hyperbolic {
        let degenerate = match point {
            SpherePoint::Finite(z) => field
                .phi_field()
                .phi(z)
                .map_or(true, |phi| (phi - 2.0).abs() <= crate::metric_field::HYPERBOLIC_DEGENERACY_TOL),
            SpherePoint::Infinity => false,
        };
        if degenerate {
            return None;
        }
    }
    Some(2.0 * PI * (order + 1.0))
}

#[derive(Clone, Debug, Serialize)]
pub struct ConeAngleReport {
    pub point: SpherePoint,
    pub predicted_angle: Option<f64>,
    pub fitted_angle: f64,
    /// Fitted exponent `s` in `½ ln ρ ≈ s ln r + c`.
    pub slope: f64,
    pub fit_radii: Vec<f64>,
    pub regression_r2: f64,
    pub conical: bool,
}

impl ConeAngleReport {
    /// Relative deviation of the fitted angle from the prediction.
    pub fn relative_error(&self) -> Option<f64> {
        self.predicted_angle
            .map(|p| (self.fitted_angle - p).abs() / p.abs())
    }
}

/// Least-squares line through `(x, y)`: returns `(slope, intercept, r²)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

/// Mean of `½ ln ρ` over a circle of radius `r` in the local chart at `point`.
pub fn circle_mean_log_density<D: ConformalDensity + ?Sized>(density: &D, point: SpherePoint, r: f64) -> Result<f64> {
    let mut acc = 0.0;
    for k in 0..ANGULAR_SAMPLES {
        let theta = 2.0 * PI * (k as f64 + 0.5) / ANGULAR_SAMPLES as f64;
        acc += 0.5 * density.log_density_near(point, Complex64::from_polar(r, theta))?;
    }
    Ok(acc / ANGULAR_SAMPLES as f64)
}

/// Checks that the disk of radius `1.5 · max(radii)` around `point` (in its
/// chart) contains no other singular point.
fn check_annulus<D: ConformalDensity + ?Sized>(density: &D, point: SpherePoint, radii: &[f64]) -> Result<()> {
    let outer = 1.5 * radii.iter().copied().fold(0.0, f64::max);
    for other in density.singular_points() {
        if other.approx_eq(&point, 1e-12) {
            continue;
        }
        let local = match (point, other) {
            (SpherePoint::Finite(a), SpherePoint::Finite(b)) => Some(b - a),
            (SpherePoint::Infinity, p) => p.inverted(),
            (SpherePoint::Finite(_), SpherePoint::Infinity) => None,
        };
        if local.is_some_and(|d| d.norm() <= outer) {
            return Err(Error::AnnulusContainsSingularity { center: point, other });
        }
    }
    Ok(())
}

/// Fits `½ ln ρ` (circle-averaged) against `ln r`; the angle is `2π(s + 1)`.
///
/// `conical` requires `r² ≥ 0.999` and a positive fitted angle.
pub fn fit_cone_angle<D: ConformalDensity + ?Sized>(
    density: &D,
    point: SpherePoint,
    radii: &[f64],
) -> Result<ConeAngleReport> {
    if radii.len() < 2 || radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidInput("need at least two positive radii".into()));
    }
    check_annulus(density, point, radii)?;
    let log_r: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let u = radii
        .iter()
        .map(|&r| circle_mean_log_density(density, point, r))
        .collect::<Result<Vec<_>>>()?;
    let (slope, _, r2) = linear_fit(&log_r, &u);
    let fitted_angle = 2.0 * PI * (slope + 1.0);
    let r2 = if r2.is_finite() { r2 } else { 0.0 };
    Ok(ConeAngleReport {
        point,
        predicted_angle: None,
        fitted_angle,
        slope,
        fit_radii: radii.to_vec(),
        regression_r2: r2,
        conical: fitted_angle.is_finite() && r2 >= CONICAL_R2_MIN && fitted_angle > 0.0,
    })
}

pub fn estimate_cone_angle(field: &MetricField, point: SpherePoint, radii: &[f64]) -> Result<ConeAngleReport> {
    let mut report = fit_cone_angle(field, point, radii)?;
    report.predicted_angle = predicted_angle(field, point);
    Ok(report)
}

/// Cone-angle reports at every zero and pole of `ω`.
pub fn all_cone_angles(field: &MetricField, radii: &[f64]) -> Result<Vec<ConeAngleReport>> {
    field
        .singular_points()
        .into_iter()
        .map(|p| estimate_cone_angle(field, p, radii))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct GaussBonnetReport {
    pub chi: i32,
    pub deg_d: f64,
    pub total_area: f64,
    pub curvature: i32,
    /// `|K · area - 2π(χ + deg D)|`
    pub residual: f64,
    /// `residual / (2π|χ + deg D|)`
    pub relative_residual: f64,
}

impl GaussBonnetReport {
    pub fn passes(&self, rel_tol: f64) -> bool {
        self.relative_residual < rel_tol
    }
}

/// Relative tolerance of the area check.
pub const GAUSS_BONNET_REL_TOL: f64 = 0.01;

/// Gauss–Bonnet for a compact `K = 1` metric whose singularities are all conical.
pub fn gauss_bonnet_check(field: &MetricField) -> Result<GaussBonnetReport> {
    if field.curvature() != Curvature::Spherical {
        return Err(Error::NonConicalSingularityPresent(format!(
            "K = {} metrics on the sphere always carry non-conical singularities",
            field.curvature()
        )));
    }
    let predicted = predicted_divisor(field.form(), field.curvature())?;
    if !predicted.non_conical.is_empty() {
        return Err(Error::NonConicalSingularityPresent(format!(
            "{} non-conical poles",
            predicted.non_conical.len()
        )));
    }
    gauss_bonnet_for(field, 1, &predicted.divisor)
}

/// Gauss–Bonnet residual for any density with known curvature and divisor.
pub fn gauss_bonnet_for<D: ConformalDensity + ?Sized>(
    density: &D,
    curvature: i32,
    divisor: &Divisor,
) -> Result<GaussBonnetReport> {
    let total_area = sphere_area(density)?;
    let deg_d = divisor.degree();
    let target = 2.0 * PI * (SPHERE_EULER as f64 + deg_d);
    let residual = (curvature as f64 * total_area - target).abs();
    Ok(GaussBonnetReport {
        chi: SPHERE_EULER,
        deg_d,
        total_area,
        curvature,
        residual,
        relative_residual: residual / target.abs(),
    })
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` (8 points).
const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

fn gauss_legendre(a: f64, b: f64, mut f: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (x, w) in GL8 {
        acc += w * f(mid + half * x)?;
    }
    Ok(acc * half)
}

/// Radial panels for a disk of radius `r`: geometric toward the center,
/// so integrands like `r^β` with `β > -1` converge. Refinement stops at
/// `1e-9 · r`; closer in, `center + ζ` can round to the center itself.
fn radial_panels(r: f64) -> Vec<(f64, f64)> {
    let mut edges = vec![r];
    let mut x = r;
    while x > r * 1e-9 {
        x *= 0.5;
        edges.push(x);
    }
    edges.push(0.0);
    edges.reverse();
    edges.windows(2).map(|w| (w[0], w[1])).collect()
}

/// Smooth bump equal to 1 on `|ζ| ≤ δ/2`, vanishing for `|ζ| ≥ δ`.
fn bump(dist: f64, delta: f64) -> f64 {
    let t = dist / delta;
    if t <= 0.5 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        let x = 2.0 * t - 1.0; // in (0,1)
        let a = (-1.0 / x).exp();
        let b = (-1.0 / (1.0 - x)).exp();
        b / (a + b)
    }
}

/// Chart used by the area integral: `|z| ≤ 1` in `z`, the rest in `w = 1/z`.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Chart {
    Inner,
    Outer,
}

struct Bump {
    chart: Chart,
    center: Complex64,
    delta: f64,
}

impl Bump {
    /// Bump value at a point given in its own chart coordinate.
    fn value_local(&self, chart: Chart, coord: Complex64) -> f64 {
        let local = if chart == self.chart {
            Some(coord)
        } else if coord.norm() == 0.0 {
            None
        } else {
            Some(coord.inv())
        };
        local.map_or(0.0, |c| bump((c - self.center).norm(), self.delta))
    }
}

fn chart_density<D: ConformalDensity + ?Sized>(density: &D, chart: Chart, coord: Complex64) -> Result<f64> {
    match chart {
        Chart::Inner => density.density(coord),
        Chart::Outer => density.density_near(SpherePoint::Infinity, coord),
    }
}

fn build_bumps(points: &[SpherePoint]) -> Vec<Bump> {
    let located: Vec<(Chart, Complex64)> = points
        .iter()
        .map(|p| match p {
            SpherePoint::Finite(z) if z.norm() <= 1.0 => (Chart::Inner, *z),
            other => (Chart::Outer, other.inverted().expect("nonzero point")),
        })
        .collect();
    located
        .iter()
        .enumerate()
        .map(|(i, &(chart, center))| {
            let mut nearest = f64::INFINITY;
            for (j, &(other_chart, other)) in located.iter().enumerate() {
                if i == j {
                    continue;
                }
                let other_here = if other_chart == chart {
                    Some(other)
                } else if other.norm() == 0.0 {
                    None
                } else {
                    Some(other.inv())
                };
                if let Some(o) = other_here {
                    nearest = nearest.min((o - center).norm());
                }
            }
            Bump {
                chart,
                center,
                delta: (0.45 * nearest).min(0.25),
            }
        })
        .collect()
}

const AREA_RADIAL_PANELS: usize = 96;
const AREA_ANGULAR_SAMPLES: usize = 256;
const BUMP_ANGULAR_SAMPLES: usize = 128;

/// `∫∫ ρ dx dy` over the whole sphere.
///
/// A smooth partition of unity isolates each singular point in a small disk
/// integrated in local polar coordinates with geometrically graded radii; the
/// remainder is integrated in polar coordinates on `|z| ≤ 1` and on
/// `|w| ≤ 1` in the chart at infinity.
pub fn sphere_area<D: ConformalDensity + ?Sized>(density: &D) -> Result<f64> {
    let bumps = build_bumps(&density.singular_points());
    let total_bump = |chart: Chart, coord: Complex64| -> f64 {
        bumps.iter().map(|b| b.value_local(chart, coord)).sum()
    };

    let mut area = 0.0;
    for b in &bumps {
        let panels = radial_panels(b.delta);
        let contributions = panels
            .par_iter()
            .map(|&(r0, r1)| {
                gauss_legendre(r0, r1, |r| {
                    let mut ring = 0.0;
                    for k in 0..BUMP_ANGULAR_SAMPLES {
                        let theta = 2.0 * PI * (k as f64 + 0.5) / BUMP_ANGULAR_SAMPLES as f64;
                        let coord = b.center + Complex64::from_polar(r, theta);
                        let weight = bump(r, b.delta);
                        if weight > 0.0 {
                            ring += weight * chart_density(density, b.chart, coord)?;
                        }
                    }
                    Ok(ring * 2.0 * PI / BUMP_ANGULAR_SAMPLES as f64 * r)
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        area += contributions.iter().sum::<f64>();
    }

    for chart in [Chart::Inner, Chart::Outer] {
        let contributions = (0..AREA_RADIAL_PANELS)
            .into_par_iter()
            .map(|i| {
                let r0 = i as f64 / AREA_RADIAL_PANELS as f64;
                let r1 = (i + 1) as f64 / AREA_RADIAL_PANELS as f64;
                gauss_legendre(r0, r1, |r| {
                    let mut ring = 0.0;
                    for k in 0..AREA_ANGULAR_SAMPLES {
                        let theta = 2.0 * PI * (k as f64 + 0.5) / AREA_ANGULAR_SAMPLES as f64;
                        let coord = Complex64::from_polar(r, theta);
                        let weight = 1.0 - total_bump(chart, coord);
                        if weight > 1e-15 {
                            ring += weight * chart_density(density, chart, coord)?;
                        }
                    }
                    Ok(ring * 2.0 * PI / AREA_ANGULAR_SAMPLES as f64 * r)
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        area += contributions.iter().sum::<f64>();
    }
    Ok(area)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_field::DensityFn;
    use crate::oneform::{build_third_kind, Pole};
    use crate::phi_solver::PhiField;
    use crate::rational_algebra::ComplexPolynomial;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit_residue_pair() -> MeromorphicOneForm {
        build_third_kind(
            vec![Pole::real(c(0.0, 1.0), 1.0), Pole::real(c(0.0, -1.0), 1.0)],
            ComplexPolynomial::zero(),
        )
        .unwrap()
    }

    fn field(form: &MeromorphicOneForm, k: Curvature) -> MetricField {
        MetricField::new(PhiField::with_a0(form, 0.0).unwrap(), k)
    }

    #[test]
    fn divisor_of_simple_form() {
        let d = predicted_divisor(&MeromorphicOneForm::simple(2.5), Curvature::Spherical).unwrap();
        assert!(d.non_conical.is_empty());
        assert_eq!(d.divisor.weight_at(&SpherePoint::origin(), 1e-12), 1.5);
        assert_eq!(d.divisor.weight_at(&SpherePoint::Infinity, 1e-12), 1.5);
        assert_eq!(d.divisor.len(), 2);
    }

    #[test]
    fn unit_residue_poles_are_smooth() {
        let d = predicted_divisor(&unit_residue_pair(), Curvature::Spherical).unwrap();
        assert_eq!(d.divisor.len(), 2);
        assert_eq!(d.divisor.weight_at(&SpherePoint::origin(), 1e-9), 1.0);
        assert_eq!(d.divisor.weight_at(&SpherePoint::Infinity, 1e-12), 1.0);
    }

    #[test]
    fn flat_negative_residue_is_non_conical() {
        let d = predicted_divisor(&MeromorphicOneForm::simple(-3.0), Curvature::Flat).unwrap();
        assert_eq!(d.non_conical, vec![SpherePoint::origin()]);
        assert_eq!(d.divisor.weight_at(&SpherePoint::Infinity, 1e-12), 2.0);
        assert_eq!(d.divisor.len(), 1);
    }

    #[test]
    fn linear_fit_exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let (s, i, r2) = linear_fit(&x, &y);
        assert!((s - 2.0).abs() < 1e-14 && (i - 1.0).abs() < 1e-14 && (r2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_of_form_has_angle_four_pi() {
        let f = field(&unit_residue_pair(), Curvature::Spherical);
        let rep = estimate_cone_angle(&f, SpherePoint::origin(), &default_radii()).unwrap();
        assert!(rep.conical);
        assert!(rep.relative_error().unwrap() < 0.01, "{rep:?}");
        assert!((rep.predicted_angle.unwrap() - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn unit_residue_pole_is_smooth() {
        let f = field(&unit_residue_pair(), Curvature::Spherical);
        let rep = estimate_cone_angle(&f, SpherePoint::finite(0.0, 1.0), &default_radii()).unwrap();
        assert!((rep.fitted_angle - 2.0 * PI).abs() < 0.02 * PI);
    }

    #[test]
    fn infinity_chart_angle() {
        let f = field(&MeromorphicOneForm::simple(2.5), Curvature::Spherical);
        let rep = estimate_cone_angle(&f, SpherePoint::Infinity, &default_radii()).unwrap();
        assert!(rep.relative_error().unwrap() < 0.01, "{rep:?}");
    }

    #[test]
    fn annulus_with_other_singularity_is_rejected() {
        let f = field(&unit_residue_pair(), Curvature::Spherical);
        let err = estimate_cone_angle(&f, SpherePoint::origin(), &[0.1, 0.5, 0.9]).unwrap_err();
        assert!(matches!(err, Error::AnnulusContainsSingularity { .. }));
    }

    #[test]
    fn round_sphere_area() {
        let sphere = DensityFn::new(|z: Complex64| 4.0 / (1.0 + z.norm_sqr()).powi(2), vec![]);
        let area = sphere_area(&sphere).unwrap();
        assert!((area - 4.0 * PI).abs() < 1e-8, "{area}");
    }

    #[test]
    fn gauss_bonnet_rejects_non_spherical() {
        let f = field(&MeromorphicOneForm::simple(2.0), Curvature::Flat);
        assert!(matches!(gauss_bonnet_check(&f), Err(Error::NonConicalSingularityPresent(_))));
    }

    #[test]
    fn gauss_bonnet_unit_residue_form() {
        let f = field(&unit_residue_pair(), Curvature::Spherical);
        let rep = gauss_bonnet_check(&f).unwrap();
        // deg D = 2, so the area is 2π(2 + 2) = 8π
        assert!(rep.passes(GAUSS_BONNET_REL_TOL), "{rep:?}");
        assert!((rep.total_area - 8.0 * PI).abs() < 1e-3 * 8.0 * PI);
    }

    #[test]
    fn bump_is_partition_piece() {
        assert_eq!(bump(0.0, 1.0), 1.0);
        assert_eq!(bump(1.0, 1.0), 0.0);
        assert!((bump(0.75, 1.0) - 0.5).abs() < 1e-12);
    }
}
