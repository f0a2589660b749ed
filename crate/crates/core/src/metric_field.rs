//! Metric densities `g = ρ |dz|²` of curvature `K ∈ {-1, 0, 1}` and their
//! finite-difference curvature check.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::oneform::MeromorphicOneForm;
use crate::phi_solver::PhiField;
use crate::rational_algebra::{divisor_of_form, SpherePoint};

/// Default radius kept clear around zeros and poles of `ω` by curvature grids.
pub const DEFAULT_EXCLUSION_RADIUS: f64 = 0.05;
/// For `K = -1`, grid points with `|Φ - 2|` below this are rejected.
pub const HYPERBOLIC_PHI_MARGIN: f64 = 0.05;
/// `|Φ - 2|` at or below this is treated as the degenerate locus itself.
pub const HYPERBOLIC_DEGENERACY_TOL: f64 = 1e-9;

/// Sign of the constant curvature.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Curvature {
    Hyperbolic,
    Flat,
    Spherical,
}

impl Curvature {
    pub fn from_i32(k: i32) -> Result<Self> {
        match k {
            -1 => Ok(Self::Hyperbolic),
            0 => Ok(Self::Flat),
            1 => Ok(Self::Spherical),
            _ => Err(Error::InvalidInput(format!("curvature must be -1, 0 or 1, got {k}"))),
        }
    }

    pub fn value(self) -> i32 {
        match self {
            Self::Hyperbolic => -1,
            Self::Flat => 0,
            Self::Spherical => 1,
        }
    }
}

impl fmt::Display for Curvature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// A conformal density on (an open subset of) the sphere.
pub trait ConformalDensity: Sync {
    /// `ρ(z)` with `g = ρ |dz|²`.
    fn density(&self, z: Complex64) -> Result<f64>;

    fn log_density(&self, z: Complex64) -> Result<f64> {
        self.density(z).map(f64::ln)
    }

    /// Points of the sphere where `ρ` vanishes, blows up or is not smooth.
    fn singular_points(&self) -> Vec<SpherePoint>;

    /// Describes a degenerate locus near `z` other than isolated singular points.
    fn degenerate_near(&self, _z: Complex64) -> Option<String> {
        None
    }

    /// `ln ρ̃(ζ)` in the local chart centered at `point`: `ζ = z - a` for a
    /// finite point, `ζ = 1/z` at infinity with `ρ̃(ζ) = ρ(1/ζ)/|ζ|⁴`.
    fn log_density_near(&self, point: SpherePoint, zeta: Complex64) -> Result<f64> {
        match point {
            SpherePoint::Finite(a) => self.log_density(a + zeta),
            SpherePoint::Infinity => Ok(self.log_density(zeta.inv())? - 4.0 * zeta.norm().ln()),
        }
    }

    fn density_near(&self, point: SpherePoint, zeta: Complex64) -> Result<f64> {
        match point {
            SpherePoint::Finite(a) => self.density(a + zeta),
            SpherePoint::Infinity => Ok(self.density(zeta.inv())? / zeta.norm_sqr().powi(2)),
        }
    }
}

/// `g = 4Φ(4 - Φ)/[4 + (K - 1)Φ]² · ωω̄` built from a solved field.
#[derive(Clone, Debug)]
pub struct MetricField {
    phi: PhiField,
    curvature: Curvature,
    singular: Vec<SpherePoint>,
    density_scale: f64,
}

/// `ln(1 + e^{-x})` for `x ≥ 0`.
fn log1p_exp_neg(x: f64) -> f64 {
    (-x).exp().ln_1p()
}

impl MetricField {
    pub fn new(phi: PhiField, curvature: Curvature) -> Self {
        let form = phi.form();
        let mut singular: Vec<SpherePoint> = divisor_of_form(form)
            .entries()
            .iter()
            .map(|e| e.point)
            .collect();
        singular.sort_by_key(|p| p.is_infinity());
        Self {
            phi,
            curvature,
            singular,
            density_scale: 1.0,
        }
    }

    /// Multiplies every density value by `factor`. Only meant for negative
    /// controls in verification runs.
    pub fn with_density_scale(mut self, factor: f64) -> Self {
        self.density_scale = factor;
        self
    }

    pub fn phi_field(&self) -> &PhiField {
        &self.phi
    }

    pub fn form(&self) -> &MeromorphicOneForm {
        self.phi.form()
    }

    pub fn curvature(&self) -> Curvature {
        self.curvature
    }

    fn eta_sq(&self, z: Complex64) -> Result<f64> {
        self.form()
            .eta_at(z)
            .map(|e| e.norm_sqr())
            .ok_or(Error::EvalAtPole(z))
    }

    fn check_hyperbolic(&self, z: Complex64, s: f64) -> Result<()> {
        if self.curvature == Curvature::Hyperbolic
            && (crate::phi_solver::logistic4(s) - 2.0).abs() <= HYPERBOLIC_DEGENERACY_TOL
        {
            return Err(Error::DegenerateHyperbolicPoint(z));
        }
        Ok(())
    }

    /// Density computed from `s = f + A₀` in overflow-free form:
    /// `|η|²/cosh²(s/2)`, `4e^s|η|²`, `|η|²/sinh²(s/2)` for `K = 1, 0, -1`.
    pub fn metric_density(&self, z: Complex64) -> Result<f64> {
        Ok(self.log_metric_density(z)?.exp())
    }

    pub fn log_metric_density(&self, z: Complex64) -> Result<f64> {
        let eta_sq = self.eta_sq(z)?;
        let s = self.phi.exponent(z)?;
        self.check_hyperbolic(z, s)?;
        let a = s.abs();
        let factor = match self.curvature {
            Curvature::Spherical => 4f64.ln() - a - 2.0 * log1p_exp_neg(a),
            Curvature::Flat => 4f64.ln() + s,
            // sinh(a/2) = e^{a/2}(1 - e^{-a})/2
            Curvature::Hyperbolic => -(a + 2.0 * (-(-a).exp()).ln_1p() - 2.0 * 2f64.ln()),
        };
        Ok(eta_sq.ln() + factor + self.density_scale.ln())
    }

    /// The density straight from `4Φ(4 - Φ)/[4 + (K - 1)Φ]² |η|²`.
    /// Loses precision where `Φ` is close to 0 or 4.
    pub fn metric_density_direct(&self, z: Complex64) -> Result<f64> {
        let eta_sq = self.eta_sq(z)?;
        let s = self.phi.exponent(z)?;
        self.check_hyperbolic(z, s)?;
        let phi = crate::phi_solver::logistic4(s);
        let k = self.curvature.value() as f64;
        let denom = 4.0 + (k - 1.0) * phi;
        Ok(4.0 * phi * (4.0 - phi) / (denom * denom) * eta_sq * self.density_scale)
    }

    pub fn curvature_report(&self, grid: &GridSpec, h: f64) -> Result<CurvatureReport> {
        gauss_curvature_fd(self, self.curvature.value() as f64, grid, h)
    }
}

impl ConformalDensity for MetricField {
    fn density(&self, z: Complex64) -> Result<f64> {
        self.metric_density(z)
    }

    fn log_density(&self, z: Complex64) -> Result<f64> {
        self.log_metric_density(z)
    }

    fn singular_points(&self) -> Vec<SpherePoint> {
        self.singular.clone()
    }

    fn degenerate_near(&self, z: Complex64) -> Option<String> {
        if self.curvature != Curvature::Hyperbolic {
            return None;
        }
        let phi = self.phi.phi(z).ok()?;
        ((phi - 2.0).abs() < HYPERBOLIC_PHI_MARGIN).then(|| format!("|phi - 2| = {:.3e} near the K=-1 degeneracy locus", (phi - 2.0).abs()))
    }
}

pub fn metric_density(field: &MetricField, z: Complex64) -> Result<f64> {
    field.metric_density(z)
}

/// A density given by a closure, for reference metrics.
pub struct DensityFn<F> {
    f: F,
    singular: Vec<SpherePoint>,
}

impl<F> DensityFn<F>
where
    F: Fn(Complex64) -> f64 + Sync,
{
    pub fn new(f: F, singular: Vec<SpherePoint>) -> Self {
        Self { f, singular }
    }
}

impl<F> ConformalDensity for DensityFn<F>
where
    F: Fn(Complex64) -> f64 + Sync,
{
    fn density(&self, z: Complex64) -> Result<f64> {
        Ok((self.f)(z))
    }

    fn singular_points(&self) -> Vec<SpherePoint> {
        self.singular.clone()
    }
}

/// `n × n` grid of points spanning `center ± half_width` in both directions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub center: [f64; 2],
    pub half_width: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn new(center: Complex64, half_width: f64, n: usize) -> Self {
        Self {
            center: [center.re, center.im],
            half_width,
            n,
        }
    }

    /// Row-major points, `y` outer and `x` inner.
    pub fn points(&self) -> Vec<Complex64> {
        let c = Complex64::new(self.center[0], self.center[1]);
        if self.n <= 1 {
            return vec![c];
        }
        let step = 2.0 * self.half_width / (self.n - 1) as f64;
        let mut out = Vec::with_capacity(self.n * self.n);
        for j in 0..self.n {
            for i in 0..self.n {
                out.push(Complex64::new(
                    c.re - self.half_width + step * i as f64,
                    c.im - self.half_width + step * j as f64,
                ));
            }
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvatureSample {
    pub x: f64,
    pub y: f64,
    pub rho: f64,
    pub k_est: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvatureReport {
    pub grid: GridSpec,
    pub h: f64,
    pub target_curvature: f64,
    pub exclusion_radius: f64,
    pub max_residual: f64,
    pub samples: Vec<CurvatureSample>,
}

/// Checks that every stencil point of the grid stays clear of the singular locus.
pub fn check_grid<D: ConformalDensity + ?Sized>(
    density: &D,
    grid: &GridSpec,
    h: f64,
    exclusion_radius: f64,
) -> Result<()> {
    let singular: Vec<Complex64> = density
        .singular_points()
        .iter()
        .filter_map(SpherePoint::as_finite)
        .collect();
    for z in grid.points() {
        for s in &singular {
            if (z - s).norm() <= exclusion_radius + h {
                return Err(Error::GridTouchesSingularity {
                    point: z,
                    radius: exclusion_radius,
                    what: format!("zero or pole at {s}"),
                });
            }
        }
        if let Some(what) = density.degenerate_near(z) {
            return Err(Error::GridTouchesSingularity {
                point: z,
                radius: exclusion_radius,
                what,
            });
        }
    }
    Ok(())
}

/// `K_est = -(1/(2ρ)) Δ ln ρ` with the five-point Laplacian of spacing `h`
/// at every grid point.
pub fn gauss_curvature_fd<D: ConformalDensity + ?Sized>(
    density: &D,
    target_curvature: f64,
    grid: &GridSpec,
    h: f64,
) -> Result<CurvatureReport> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidInput(format!("stencil spacing must be positive, got {h}")));
    }
    check_grid(density, grid, h, DEFAULT_EXCLUSION_RADIUS)?;
    let samples = grid
        .points()
        .into_par_iter()
        .map(|z| {
            let center = density.log_density(z)?;
            let mut lap = -4.0 * center;
            for d in [
                Complex64::new(h, 0.0),
                Complex64::new(-h, 0.0),
                Complex64::new(0.0, h),
                Complex64::new(0.0, -h),
            ] {
                lap += density.log_density(z + d)?;
            }
            lap /= h * h;
            let rho = center.exp();
            Ok(CurvatureSample {
                x: z.re,
                y: z.im,
                rho,
                k_est: -lap / (2.0 * rho),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_residual = samples
        .iter()
        .map(|s| (s.k_est - target_curvature).abs())
        .fold(0.0, f64::max);
    Ok(CurvatureReport {
        grid: *grid,
        h,
        target_curvature,
        exclusion_radius: DEFAULT_EXCLUSION_RADIUS,
        max_residual,
        samples,
    })
}

/// First grid of half-width 0.1 with 11 × 11 points, scanning centers on a
/// 0.25-spaced lattice in `[-2, 2]²`, whose stencil stays 0.2 clear of the
/// zeros and poles of `ω` and, for `K = -1`, keeps `|Φ - 2| ≥ 0.5`.
pub fn admissible_grid(field: &MetricField, h: f64) -> Option<GridSpec> {
    let singular: Vec<Complex64> = field
        .singular_points()
        .iter()
        .filter_map(SpherePoint::as_finite)
        .collect();
    let half = 0.1;
    for j in 0..17 {
        for i in 0..17 {
            let center = Complex64::new(-2.0 + 0.25 * i as f64, -2.0 + 0.25 * j as f64);
            if singular
                .iter()
                .any(|s| (center - s).norm() <= half * std::f64::consts::SQRT_2 + h + 0.2)
            {
                continue;
            }
            let grid = GridSpec::new(center, half, 11);
            if field.curvature() == Curvature::Hyperbolic
                && !grid
                    .points()
                    .iter()
                    .all(|&z| field.phi.phi(z).is_ok_and(|p| (p - 2.0).abs() >= 0.5))
            {
                continue;
            }
            return Some(grid);
        }
    }
    None
}

/// A point of the level set `Φ = 2` (that is `f + A₀ = 0`) between two
/// horizontally or vertically adjacent grid points, located by bisection.
pub fn locate_phi2_crossing(phi: &PhiField, grid: &GridSpec) -> Option<Complex64> {
    let n = grid.n;
    let pts = grid.points();
    let s: Vec<Option<f64>> = pts.iter().map(|&z| phi.exponent(z).ok()).collect();
    for j in 0..n {
        for i in 0..n {
            let k = j * n + i;
            for next in [(i + 1 < n).then_some(k + 1), (j + 1 < n).then_some(k + n)].into_iter().flatten() {
                let (Some(sa), Some(sb)) = (s[k], s[next]) else { continue };
                if sa == 0.0 {
                    return Some(pts[k]);
                }
                if sa.signum() == sb.signum() {
                    continue;
                }
                let (mut a, mut b, mut fa) = (pts[k], pts[next], sa);
                for _ in 0..60 {
                    let m = (a + b) * 0.5;
                    let fm = phi.exponent(m).ok()?;
                    if fm.signum() == fa.signum() {
                        a = m;
                        fa = fm;
                    } else {
                        b = m;
                    }
                }
                return Some((a + b) * 0.5);
            }
        }
    }
    None
}

/// Sample points for density comparisons: a 10 × 10 cell-centered grid on
/// `[-2, 2]²`, skipping points within `1e-6` of a pole.
pub fn comparison_points(form: &MeromorphicOneForm) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(100);
    for j in 0..10 {
        for i in 0..10 {
            let z = Complex64::new(-2.0 + 0.4 * (i as f64 + 0.5), -2.0 + 0.4 * (j as f64 + 0.5));
            if form.distance_to_poles(z) > 1e-6 {
                out.push(z);
            }
        }
    }
    out
}

/// Max density difference between `(ω, p₀, Φ₀)` and `(-ω, p₀, Φ₀')` where
/// `Φ₀' = 4 - Φ₀` if `swap_initial` and `Φ₀` otherwise.
pub fn negation_discrepancy(
    form: &MeromorphicOneForm,
    p0: Complex64,
    phi0: f64,
    curvature: Curvature,
    swap_initial: bool,
) -> Result<f64> {
    let original = MetricField::new(PhiField::solve(form, p0, phi0)?, curvature);
    let partner_phi0 = if swap_initial { 4.0 - phi0 } else { phi0 };
    let negated = MetricField::new(PhiField::solve(&form.negated(), p0, partner_phi0)?, curvature);
    let mut worst: f64 = 0.0;
    for z in comparison_points(form) {
        let a = match original.metric_density(z) {
            Ok(v) => v,
            Err(Error::DegenerateHyperbolicPoint(_)) => continue,
            Err(e) => return Err(e),
        };
        let b = match negated.metric_density(z) {
            Ok(v) => v,
            Err(Error::DegenerateHyperbolicPoint(_)) => continue,
            Err(e) => return Err(e),
        };
        worst = worst.max((a - b).abs());
    }
    Ok(worst)
}

/// K = 1 densities of `(ω, p₀, Φ₀)` and `(-ω, p₀, 4 - Φ₀)` agree; returns the
/// largest pointwise difference on the comparison grid.
pub fn negation_invariance_check(form: &MeromorphicOneForm, p0: Complex64, phi0: f64) -> Result<f64> {
    negation_discrepancy(form, p0, phi0, Curvature::Spherical, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oneform::{build_third_kind, Pole};
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
    fn spherical_density_on_unit_circle() {
        let f = field(&MeromorphicOneForm::simple(1.0), Curvature::Spherical);
        let z = Complex64::from_polar(1.0, 0.7);
        assert!((f.metric_density(z).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn flat_density_at_phi_two() {
        // |z| = 1 gives Φ = 2 and |η| = 1 for ω = dz/z.
        let f = field(&MeromorphicOneForm::simple(1.0), Curvature::Flat);
        let z = Complex64::from_polar(1.0, -2.1);
        assert!((f.metric_density(z).unwrap() - 4.0).abs() < 1e-13);
    }

    #[test]
    fn hyperbolic_degenerate_point() {
        let f = field(&MeromorphicOneForm::simple(1.0), Curvature::Hyperbolic);
        let z = c(1.0, 0.0);
        assert_eq!(f.metric_density(z), Err(Error::DegenerateHyperbolicPoint(z)));
        assert!(f.metric_density(c(2.0, 0.0)).is_ok());
    }

    #[test]
    fn stable_and_direct_formulas_agree() {
        let form = unit_residue_pair();
        for k in [Curvature::Hyperbolic, Curvature::Flat, Curvature::Spherical] {
            let f = field(&form, k);
            for z in [c(0.3, 0.2), c(-1.2, 0.7), c(2.5, -1.5)] {
                let a = f.metric_density(z).unwrap();
                let b = f.metric_density_direct(z).unwrap();
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "K={k} z={z}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn spherical_density_is_quarter_phi_product() {
        let f = field(&unit_residue_pair(), Curvature::Spherical);
        let z = c(0.4, -0.9);
        let phi = f.phi_field().phi(z).unwrap();
        let eta = f.form().eta_at(z).unwrap();
        let expected = phi * (4.0 - phi) / 4.0 * eta.norm_sqr();
        assert!((f.metric_density(z).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn density_vanishes_at_zero_of_form() {
        let f = field(&unit_residue_pair(), Curvature::Spherical);
        assert_eq!(f.metric_density(c(0.0, 0.0)).unwrap(), 0.0);
        for dir in [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)] {
            assert!(f.metric_density(dir * 1e-5).unwrap() < 1e-8);
        }
    }

    #[test]
    fn round_sphere_curvature() {
        let sphere = DensityFn::new(|z: Complex64| 4.0 / (1.0 + z.norm_sqr()).powi(2), vec![]);
        let report = gauss_curvature_fd(&sphere, 1.0, &GridSpec::new(c(0.0, 0.0), 0.5, 11), 1e-3).unwrap();
        assert!(report.max_residual < 1e-4, "{}", report.max_residual);
    }

    #[test]
    fn flat_plane_curvature_is_zero() {
        let plane = DensityFn::new(|_| 1.0, vec![]);
        let report = gauss_curvature_fd(&plane, 0.0, &GridSpec::new(c(0.0, 0.0), 0.5, 5), 1e-3).unwrap();
        assert_eq!(report.max_residual, 0.0);
    }

    #[test]
    fn pipeline_curvature_on_annulus_points() {
        let f = field(&unit_residue_pair(), Curvature::Spherical);
        // grid of points between radius 0.3 and 0.8, away from 0 and ±i
        let grid = GridSpec::new(c(0.55, 0.0), 0.15, 9);
        let report = f.curvature_report(&grid, 1e-3).unwrap();
        assert!(report.max_residual < 1e-4, "{}", report.max_residual);
    }

    #[test]
    fn grid_touching_pole_is_rejected() {
        let f = field(&unit_residue_pair(), Curvature::Spherical);
        let err = f.curvature_report(&GridSpec::new(c(0.0, 1.0), 0.1, 3), 1e-3).unwrap_err();
        assert!(matches!(err, Error::GridTouchesSingularity { .. }));
    }

    #[test]
    fn hyperbolic_grid_crossing_locus_is_rejected() {
        let f = field(&MeromorphicOneForm::simple(1.0), Curvature::Hyperbolic);
        let err = f.curvature_report(&GridSpec::new(c(1.0, 0.0), 0.2, 5), 1e-3).unwrap_err();
        assert!(matches!(err, Error::GridTouchesSingularity { .. }));
    }

    #[test]
    fn negation_examples() {
        let form = MeromorphicOneForm::simple(1.0);
        let p0 = c(1.0, 0.0);
        assert!(negation_invariance_check(&form, p0, 2.0).unwrap() < 1e-12);
        assert!(negation_invariance_check(&form, p0, 1.0).unwrap() < 1e-12);
        assert!(negation_invariance_check(&unit_residue_pair(), p0, 1.5).unwrap() < 1e-10);
    }

    #[test]
    fn literal_negation_differs_off_spherical_case() {
        let form = unit_residue_pair();
        let p0 = c(1.0, 0.0);
        let flat = negation_discrepancy(&form, p0, 1.5, Curvature::Flat, false).unwrap();
        assert!(flat > 1e-3);
    }

    #[test]
    fn curvature_values() {
        assert_eq!(Curvature::from_i32(-1).unwrap(), Curvature::Hyperbolic);
        assert!(Curvature::from_i32(2).is_err());
    }
}
