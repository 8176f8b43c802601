//! Run configuration: a TOML document with `[metric]`, `[domain]`,
//! `[problem]`, `[solver]` and `[output]` sections. Unknown keys are errors.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::discretization::Grid;
use crate::error::{PmcError, Result};
use crate::geometry::{ChartMetric, Warp};
use crate::problems::{
    counterexample_problem, make_cmc, make_conformal_minimal, make_custom, make_jang, ConformalFactor, DomainChart,
    PMCProblem, ScalarFn, Shape,
};
use crate::solver::{NewtonOptions, Schedule};

/// Fewest grid nodes accepted along any axis.
pub const MIN_RESOLUTION: usize = 17;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricSection>,
    pub domain: DomainSection,
    pub problem: ProblemSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKindName {
    Euclidean,
    Hyperbolic,
    ConformalProduct,
    SphericalWarped,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarpName {
    Identity,
    Cosh,
    Reciprocal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSection {
    pub kind: MetricKindName,
    #[serde(default = "two")]
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warp: Option<WarpName>,
}

fn two() -> usize {
    2
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeName {
    Disk,
    Annulus,
    PolarCap,
    Periodic,
    Rectangle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutName {
    Polar,
    Radial,
    Cartesian,
    Periodic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    /// Omitted for the counterexample family, which fixes its own domain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<ShapeName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<[f64; 2]>,
    /// Defaults: polar for disks, annuli and caps; cartesian for rectangles;
    /// periodic for the torus.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<LayoutName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nr: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ntheta: Option<usize>,
    /// Nodes per axis of cartesian and periodic lattices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Cmc,
    Jang,
    Conformal,
    Counterexample,
    Custom,
}

/// A scalar function of the chart point, used for ψ and for custom offsets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalarSpec {
    Constant { value: f64 },
    /// value + coeffs·x
    Linear { value: f64, coeffs: Vec<f64> },
    /// amplitude·sin(2π·frequency·x_axis)
    Sine { amplitude: f64, frequency: f64, axis: usize },
    /// The lower hemisphere −√(R² − |x|²).
    Cap { radius: f64 },
}

impl ScalarSpec {
    pub fn build(&self) -> ScalarFn {
        match self.clone() {
            ScalarSpec::Constant { value } => Arc::new(move |_| value),
            ScalarSpec::Linear { value, coeffs } => {
                Arc::new(move |x| value + coeffs.iter().zip(x).map(|(c, v)| c * v).sum::<f64>())
            }
            ScalarSpec::Sine { amplitude, frequency, axis } => {
                Arc::new(move |x| amplitude * (2.0 * std::f64::consts::PI * frequency * x[axis]).sin())
            }
            ScalarSpec::Cap { radius } => Arc::new(move |x| -(radius * radius - x.iter().map(|v| v * v).sum::<f64>()).sqrt()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub family: Family,
    /// cmc: the constant mean curvature.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// jang: a constant symmetric tensor k, row-major.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<Vec<f64>>,
    /// conformal: constant x-gradient of the conformal factor.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad_x: Option<Vec<f64>>,
    /// conformal: ∂_z f = height_slope·z + height_offset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height_slope: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height_offset: Option<f64>,
    /// counterexample: β and dimension n.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// custom: F ≡ f0, φ = slope·z + offset(x).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<ScalarSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<ScalarSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorSection {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Continuation schedule, Newton tolerance and the gradient-monitor ball.
/// Every key is optional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub t0: f64,
    pub ratio: f64,
    pub t_min: f64,
    pub max_insertions: usize,
    pub converge_tol: f64,
    pub max_extra_levels: usize,
    pub stop_at_blow_up: bool,
    /// Relative Newton tolerance.
    pub tol: f64,
    pub max_iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monitor: Option<MonitorSection>,
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = Schedule::default();
        let o = NewtonOptions::default();
        SolverSection {
            t0: s.t0,
            ratio: s.ratio,
            t_min: s.t_min,
            max_insertions: s.max_insertions,
            converge_tol: s.converge_tol,
            max_extra_levels: s.max_extra_levels,
            stop_at_blow_up: s.stop_at_blow_up,
            tol: o.tol,
            max_iterations: o.max_iterations,
            monitor: None,
        }
    }
}

impl SolverSection {
    pub fn schedule(&self) -> Schedule {
        Schedule {
            t0: self.t0,
            ratio: self.ratio,
            t_min: self.t_min,
            max_insertions: self.max_insertions,
            converge_tol: self.converge_tol,
            max_extra_levels: self.max_extra_levels,
            stop_at_blow_up: self.stop_at_blow_up,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { directory: PathBuf::from("out"), formats: vec![Format::Json, Format::Csv] }
    }
}

/// Everything a run needs, built from a config.
#[derive(Clone, Debug)]
pub struct Setup {
    pub problem: PMCProblem,
    pub grid: Arc<Grid>,
    pub schedule: Schedule,
    pub newton: NewtonOptions,
}

fn need<T: Copy>(v: Option<T>, what: &str) -> Result<T> {
    v.ok_or_else(|| PmcError::Invalid(format!("missing key {what}")))
}

fn resolution(v: Option<usize>, what: &str) -> Result<usize> {
    let n = need(v, what)?;
    if n < MIN_RESOLUTION {
        return Err(PmcError::Invalid(format!("{what} = {n} is below the minimum resolution {MIN_RESOLUTION}")));
    }
    Ok(n)
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| PmcError::Invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| PmcError::Invalid(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Checks that the config builds; used on load so errors surface early.
    pub fn validate(&self) -> Result<()> {
        self.setup().map(|_| ())
    }

    fn metric(&self) -> Result<ChartMetric> {
        let Some(m) = &self.metric else { return Ok(ChartMetric::euclidean(2)) };
        let warp = |default: Option<WarpName>| -> Result<Warp> {
            Ok(match m.warp.or(default) {
                Some(WarpName::Identity) => Warp::Identity,
                Some(WarpName::Cosh) => Warp::Cosh,
                Some(WarpName::Reciprocal) => Warp::Reciprocal,
                None => return Err(PmcError::Invalid("metric.warp is required for this kind".into())),
            })
        };
        Ok(match m.kind {
            MetricKindName::Euclidean => ChartMetric::euclidean(m.dim),
            MetricKindName::Hyperbolic => ChartMetric::hyperbolic(m.dim),
            MetricKindName::ConformalProduct => ChartMetric::conformal_product(m.dim, warp(None)?),
            MetricKindName::SphericalWarped => ChartMetric::spherical_warped(m.dim, warp(None)?),
        })
    }

    fn shape(&self) -> Result<Shape> {
        let d = &self.domain;
        let shape = need(d.shape, "domain.shape")?;
        Ok(match shape {
            ShapeName::Disk => {
                let radius = need(d.radius, "domain.radius")?;
                match d.center {
                    Some(c) => Shape::disk_at(c, radius),
                    None => Shape::disk(radius),
                }
            }
            ShapeName::Annulus => Shape::Annulus {
                center: d.center.map(|c| c.to_vec()).unwrap_or_default(),
                inner: need(d.inner, "domain.inner")?,
                outer: need(d.outer, "domain.outer")?,
            },
            ShapeName::PolarCap => Shape::PolarCap { r_max: need(d.radius, "domain.radius")? },
            ShapeName::Periodic => Shape::BoxPeriodic { length: need(d.length, "domain.length")? },
            ShapeName::Rectangle => Shape::Rectangle { lo: need(d.lo, "domain.lo")?, hi: need(d.hi, "domain.hi")? },
        })
    }

    fn grid(&self, domain: DomainChart) -> Result<Grid> {
        let d = &self.domain;
        let layout = d.layout.unwrap_or(match domain.shape {
            Shape::Rectangle { .. } => LayoutName::Cartesian,
            Shape::BoxPeriodic { .. } => LayoutName::Periodic,
            _ => LayoutName::Polar,
        });
        match layout {
            LayoutName::Polar => Grid::polar(domain, resolution(d.nr, "domain.nr")?, resolution(d.ntheta, "domain.ntheta")?),
            LayoutName::Radial => Grid::radial(domain, resolution(d.nr, "domain.nr")?),
            LayoutName::Cartesian => {
                let n = resolution(d.n, "domain.n")?;
                Grid::cartesian(domain, n, n)
            }
            LayoutName::Periodic => Grid::periodic(domain, resolution(d.n, "domain.n")?),
        }
    }

    pub fn setup(&self) -> Result<Setup> {
        let p = &self.problem;
        let (problem, domain) = if p.family == Family::Counterexample {
            if self.metric.is_some() || self.domain.shape.is_some() {
                return Err(PmcError::Invalid("the counterexample family fixes its own metric and domain".into()));
            }
            let beta = need(p.beta, "problem.beta")?;
            let n = p.n.unwrap_or(2);
            if !(beta > 0.0) || n < 2 {
                return Err(PmcError::Invalid("counterexample needs beta > 0 and n >= 2".into()));
            }
            let c = counterexample_problem(beta, n);
            (c.problem, c.domain)
        } else {
            let metric = self.metric()?;
            let dim = metric.dim;
            let domain = DomainChart::new(metric.clone(), self.shape()?);
            let mut problem = match p.family {
                Family::Cmc => make_cmc(need(p.c, "problem.c")?),
                Family::Jang => {
                    let k = p.k.clone().ok_or_else(|| PmcError::Invalid("missing key problem.k".into()))?;
                    if k.len() != dim * dim {
                        return Err(PmcError::Invalid(format!("problem.k needs {} entries", dim * dim)));
                    }
                    let km = DMatrix::from_row_slice(dim, dim, &k);
                    if (&km - km.transpose()).amax() > 0.0 {
                        return Err(PmcError::Invalid("problem.k must be symmetric".into()));
                    }
                    make_jang(metric, Arc::new(move |_| km.clone()))
                }
                Family::Conformal => {
                    let g = p.grad_x.clone().unwrap_or_else(|| vec![0.0; dim]);
                    if g.len() != dim {
                        return Err(PmcError::Invalid(format!("problem.grad_x needs {dim} entries")));
                    }
                    let (s, b) = (p.height_slope.unwrap_or(0.0), p.height_offset.unwrap_or(0.0));
                    make_conformal_minimal(
                        dim,
                        ConformalFactor {
                            grad_x: Arc::new(move |_| g.clone()),
                            d_height: Arc::new(move |_, z| s * z + b),
                            d2_height_lower_bound: s,
                        },
                    )
                }
                Family::Custom => {
                    let slope = p.slope.unwrap_or(0.0);
                    if slope < 0.0 {
                        return Err(PmcError::Invalid("problem.slope must be nonnegative".into()));
                    }
                    let offset = p.offset.as_ref().map_or_else(|| ScalarSpec::Constant { value: 0.0 }.build(), |o| o.build());
                    make_custom(p.f0.unwrap_or(0.0), slope, offset)
                }
                Family::Counterexample => unreachable!(),
            };
            if let Some(psi) = &p.psi {
                problem.psi = Some(psi.build());
            } else if domain.has_boundary() {
                return Err(PmcError::Invalid("missing key problem.psi".into()));
            }
            (problem, domain)
        };
        let grid = Arc::new(self.grid(domain)?);
        let s = &self.solver;
        let newton = NewtonOptions { tol: s.tol, max_iterations: s.max_iterations, ..NewtonOptions::default() };
        Ok(Setup { problem, grid, schedule: s.schedule(), newton })
    }
}
