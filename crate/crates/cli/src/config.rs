//! Command-line flags, config files and their resolution into a job.

use std::path::{Path, PathBuf};

use clap::Args;
use csc_forge::metric_field::{Curvature, GridSpec, MetricField};
use csc_forge::oneform::{FormSpec, MeromorphicOneForm};
use csc_forge::phi_solver::{PhiField, DEFAULT_PHI0};
use csc_forge::singularity_analysis::{default_radii, log_spaced};
use csc_forge::sphere_classification::{standard_form, StandardFormCase};
use num_complex::Complex64;
use serde::Deserialize;

use crate::failure::Failure;

pub const DEFAULT_H: f64 = 1e-3;

#[derive(Args, Clone, Debug, Default)]
pub struct JobArgs {
    /// JSON config file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Form as inline JSON or a path to a JSON file.
    #[arg(long, conflicts_with = "standard")]
    pub form: Option<String>,
    /// Standard form: simple:<λ>, unit:<α> or plus-minus:<α>:<a_re>[,<a_im>],
    /// optionally followed by @<p_re>,<p_im> for the scale.
    #[arg(long, allow_hyphen_values = true)]
    pub standard: Option<String>,
    /// Curvature K ∈ {-1, 0, 1}.
    #[arg(long = "K", allow_negative_numbers = true)]
    pub k: Option<i32>,
    /// Base point as re,im.
    #[arg(long, allow_hyphen_values = true)]
    pub p0: Option<String>,
    /// Initial value Φ(p0) in (0, 4).
    #[arg(long)]
    pub phi0: Option<f64>,
    /// Integration constant A0, instead of (p0, phi0).
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["p0", "phi0"])]
    pub a0: Option<f64>,
    /// Grid as cx,cy,half_width,n.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Finite-difference step.
    #[arg(long)]
    pub h: Option<f64>,
    /// Fit radii as lo,hi,n (log spaced).
    #[arg(long)]
    pub radii: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Scales every density value (negative-control hook).
    #[arg(long, hide = true)]
    pub corrupt_density: Option<f64>,
}

/// Config file schema. Every entry is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    form: Option<FormEntry>,
    standard: Option<String>,
    #[serde(rename = "K")]
    k: Option<i32>,
    p0: Option<[f64; 2]>,
    phi0: Option<f64>,
    a0: Option<f64>,
    grid: Option<[f64; 4]>,
    h: Option<f64>,
    radii: Option<[f64; 3]>,
    out: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum FormEntry {
    Inline(FormSpec),
    Path(PathBuf),
}

#[derive(Clone, Debug)]
pub enum FormSource {
    Inline(FormSpec),
    File(PathBuf),
    Standard(StandardFormCase),
}

#[derive(Clone, Debug)]
pub enum InitialData {
    Point { p0: Option<Complex64>, phi0: f64 },
    Constant(f64),
}

/// A fully resolved job.
#[derive(Clone, Debug)]
pub struct JobConfig {
    pub source: FormSource,
    pub curvature: Option<Curvature>,
    pub initial: InitialData,
    pub grid: Option<GridSpec>,
    pub h: f64,
    pub radii: Vec<f64>,
    pub out: Option<PathBuf>,
    pub density_scale: Option<f64>,
}

fn parse_numbers(text: &str, what: &str, count: usize) -> Result<Vec<f64>, Failure> {
    let values = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| Failure::parse(format!("{what}: expected {count} comma-separated numbers, got {text:?}")))?;
    if values.len() != count || values.iter().any(|v| !v.is_finite()) {
        return Err(Failure::parse(format!("{what}: expected {count} finite numbers, got {text:?}")));
    }
    Ok(values)
}

fn grid_from(v: &[f64]) -> Result<GridSpec, Failure> {
    let n = v[3];
    if !(v[2] > 0.0) || n < 1.0 || n.fract() != 0.0 {
        return Err(Failure::parse("grid: need half_width > 0 and integer n >= 1"));
    }
    Ok(GridSpec::new(Complex64::new(v[0], v[1]), v[2], n as usize))
}

fn radii_from(v: &[f64]) -> Result<Vec<f64>, Failure> {
    let (lo, hi, n) = (v[0], v[1], v[2]);
    if !(lo > 0.0 && hi > lo) || n < 2.0 || n.fract() != 0.0 {
        return Err(Failure::parse("radii: need 0 < lo < hi and integer n >= 2"));
    }
    Ok(log_spaced(lo, hi, n as usize))
}

/// Parses `simple:<λ>`, `unit:<α>`, `plus-minus:<α>:<a_re>[,<a_im>]`, each
/// optionally followed by `@<p_re>,<p_im>`.
pub fn parse_standard(text: &str) -> Result<StandardFormCase, Failure> {
    let bad = || Failure::parse(format!("--standard: cannot parse {text:?}"));
    let (body, scale) = match text.split_once('@') {
        Some((body, scale)) => {
            let v = parse_numbers(scale, "--standard scale", 2)?;
            (body, Complex64::new(v[0], v[1]))
        }
        None => (text, Complex64::new(1.0, 0.0)),
    };
    let parts: Vec<&str> = body.split(':').collect();
    let alpha = |s: &str| s.trim().parse::<u32>().map_err(|_| bad());
    let case = match parts.as_slice() {
        ["simple", lambda] => StandardFormCase::simple(lambda.trim().parse().map_err(|_| bad())?),
        ["unit", a] => StandardFormCase::unit_residues(alpha(a)?),
        ["plus-minus", a, param] => {
            let v: Vec<f64> = param
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| bad())?;
            let a_param = match v.as_slice() {
                [re] => Complex64::new(*re, 0.0),
                [re, im] => Complex64::new(*re, *im),
                _ => return Err(bad()),
            };
            StandardFormCase::plus_minus(alpha(a)?, a_param)
        }
        _ => return Err(bad()),
    };
    Ok(case.with_scale(scale))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::parse(format!("cannot read {}: {e}", path.display())))
}

impl JobArgs {
    pub fn resolve(&self) -> Result<JobConfig, Failure> {
        let file: FileConfig = match &self.config {
            Some(path) => serde_json::from_str(&read_text(path)?)
                .map_err(|e| Failure::parse(format!("config {}: {e}", path.display())))?,
            None => FileConfig::default(),
        };

        let flag_source = match (&self.form, &self.standard) {
            (Some(f), None) => Some(if f.trim_start().starts_with('{') {
                FormSource::Inline(FormSpec::from_json(f).map_err(Failure::from_core)?)
            } else {
                FormSource::File(PathBuf::from(f))
            }),
            (None, Some(s)) => Some(FormSource::Standard(parse_standard(s)?)),
            (None, None) => None,
            (Some(_), Some(_)) => return Err(Failure::parse("give either --form or --standard, not both")),
        };
        let file_source = match (file.form, file.standard) {
            (Some(FormEntry::Inline(spec)), None) => Some(FormSource::Inline(spec)),
            (Some(FormEntry::Path(p)), None) => Some(FormSource::File(p)),
            (None, Some(s)) => Some(FormSource::Standard(parse_standard(&s)?)),
            (None, None) => None,
            (Some(_), Some(_)) => return Err(Failure::parse("config has both form and standard")),
        };
        let source = flag_source
            .or(file_source)
            .ok_or_else(|| Failure::parse("no form given: use --form or --standard"))?;

        let curvature = self
            .k
            .or(file.k)
            .map(Curvature::from_i32)
            .transpose()
            .map_err(|e| Failure::parse(e.to_string()))?;

        let flag_p0 = self.p0.as_deref().map(|t| parse_numbers(t, "--p0", 2)).transpose()?;
        let point = |p0: Option<Vec<f64>>, phi0: Option<f64>| InitialData::Point {
            p0: p0.map(|v| Complex64::new(v[0], v[1])),
            phi0: phi0.unwrap_or(DEFAULT_PHI0),
        };
        let initial = if let Some(a0) = self.a0 {
            InitialData::Constant(a0)
        } else if flag_p0.is_some() || self.phi0.is_some() {
            point(flag_p0.or(file.p0.map(|v| v.to_vec())), self.phi0.or(file.phi0))
        } else if let Some(a0) = file.a0 {
            if file.p0.is_some() || file.phi0.is_some() {
                return Err(Failure::parse("config: A0 excludes p0 and phi0"));
            }
            InitialData::Constant(a0)
        } else {
            point(file.p0.map(|v| v.to_vec()), file.phi0)
        };

        let grid = match &self.grid {
            Some(t) => Some(grid_from(&parse_numbers(t, "--grid", 4)?)?),
            None => file.grid.as_ref().map(|v| grid_from(v)).transpose()?,
        };
        let h = self.h.or(file.h).unwrap_or(DEFAULT_H);
        if !(h > 0.0 && h.is_finite()) {
            return Err(Failure::parse(format!("--h must be positive, got {h}")));
        }
        let radii = match &self.radii {
            Some(t) => radii_from(&parse_numbers(t, "--radii", 3)?)?,
            None => match file.radii {
                Some(v) => radii_from(&v)?,
                None => default_radii(),
            },
        };
        Ok(JobConfig {
            source,
            curvature,
            initial,
            grid,
            h,
            radii,
            out: self.out.clone().or(file.out),
            density_scale: self.corrupt_density,
        })
    }
}

impl JobConfig {
    pub fn build_form(&self) -> Result<MeromorphicOneForm, Failure> {
        match &self.source {
            FormSource::Inline(spec) => spec.build().map_err(Failure::from_core),
            FormSource::File(path) => FormSpec::from_json(&read_text(path)?)
                .and_then(|s| s.build())
                .map_err(Failure::from_core),
            FormSource::Standard(case) => standard_form(case).map_err(Failure::from_core),
        }
    }

    pub fn solve_phi(&self, form: &MeromorphicOneForm) -> Result<PhiField, Failure> {
        match self.initial {
            InitialData::Constant(a0) => PhiField::with_a0(form, a0),
            InitialData::Point { p0, phi0 } => {
                PhiField::solve(form, p0.unwrap_or_else(|| PhiField::default_base_point(form)), phi0)
            }
        }
        .map_err(Failure::from_core)
    }

    pub fn require_curvature(&self) -> Result<Curvature, Failure> {
        self.curvature
            .ok_or_else(|| Failure::parse("this command needs --K <-1|0|1>"))
    }

    pub fn metric(&self, phi: PhiField) -> Result<MetricField, Failure> {
        let field = MetricField::new(phi, self.require_curvature()?);
        Ok(match self.density_scale {
            Some(f) => field.with_density_scale(f),
            None => field,
        })
    }
}
