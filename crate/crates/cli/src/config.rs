//! Run configuration: a TOML file with one table per pipeline stage.
//!
//! ```toml
//! [kernel]
//! family = "wendland41"        # or "truncated-gaussian", "polynomial"
//!
//! [manifold]
//! shape = "interval"           # or "circle", "sphere"
//!
//! [density]
//! form = "cosine"              # or "uniform", "table"
//! a = 0.5
//!
//! [sample]
//! n = 2000
//! seed = 42
//!
//! [assemble]
//! t = 0.01
//! ```
//!
//! Unknown keys are rejected so that typos surface as configuration errors.

use std::path::Path;

use serde::{Deserialize, Serialize};

use pim_core::analysis::{Schedule, SweepGrid, SweepOptions, DEFAULT_CENTERS};
use pim_core::assembly::{auto_bandwidth, AssemblyOptions, DEFAULT_DENSE_THRESHOLD};
use pim_core::geometry::{DensityForm, DensitySpec, ManifoldModel};
use pim_core::KernelSpec;

use crate::CliError;

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub kernel: KernelConfig,
    #[serde(default)]
    pub manifold: ManifoldConfig,
    #[serde(default)]
    pub density: DensityConfig,
    #[serde(default)]
    pub sample: SampleConfig,
    #[serde(default)]
    pub assemble: AssembleConfig,
    #[serde(default)]
    pub validate: ValidateConfig,
    #[serde(default)]
    pub eig: EigConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub poisson: PoissonConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acceptance: Option<AcceptanceConfig>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    #[serde(default = "default_family")]
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

fn default_family() -> String {
    "wendland41".into()
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            family: default_family(),
            coeffs: None,
            beta: None,
            scale: None,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldConfig {
    #[serde(default = "default_shape")]
    pub shape: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
}

fn default_shape() -> String {
    "interval".into()
}

impl Default for ManifoldConfig {
    fn default() -> Self {
        Self {
            shape: default_shape(),
            radius: None,
            a: None,
            b: None,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DensityConfig {
    #[serde(default = "default_form")]
    pub form: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

fn default_form() -> String {
    "uniform".into()
}

impl Default for DensityConfig {
    fn default() -> Self {
        Self {
            form: default_form(),
            a: None,
            values: None,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_n() -> usize {
    1000
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self { n: default_n(), seed: 0 }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AssembleConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    /// Constant `c` of the bandwidth heuristic `t = c n^{-2/(2k+7)}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_auto: Option<f64>,
    #[serde(default = "default_dense_threshold")]
    pub dense_threshold: usize,
}

fn default_dense_threshold() -> usize {
    DEFAULT_DENSE_THRESHOLD
}

impl Default for AssembleConfig {
    fn default() -> Self {
        Self {
            t: None,
            t_auto: None,
            dense_threshold: default_dense_threshold(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
}

fn default_grid_points() -> usize {
    30_001
}

impl Default for ValidateConfig {
    fn default() -> Self {
        Self {
            grid_points: default_grid_points(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EigConfig {
    #[serde(default = "default_count")]
    pub count: usize,
}

fn default_count() -> usize {
    6
}

impl Default for EigConfig {
    fn default() -> Self {
        Self { count: default_count() }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub n: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<Vec<f64>>,
    /// Explicit seeds; otherwise `sample.seed + k` for `k < repeats`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    #[serde(default = "one")]
    pub repeats: usize,
    #[serde(default = "default_count")]
    pub count: usize,
    /// `cartesian`, `zipped`, or `auto` (one `t` per `n` from `assemble.t_auto`).
    #[serde(default = "default_schedule")]
    pub schedule: String,
    #[serde(default = "yes")]
    pub angles: bool,
    #[serde(default = "yes")]
    pub coercivity: bool,
    #[serde(default = "yes")]
    pub discrepancy: bool,
    #[serde(default = "default_centers")]
    pub centers: usize,
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

fn default_schedule() -> String {
    "cartesian".into()
}

fn default_centers() -> usize {
    DEFAULT_CENTERS
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n: vec![],
            t: None,
            seeds: None,
            repeats: 1,
            count: default_count(),
            schedule: default_schedule(),
            angles: true,
            coercivity: true,
            discrepancy: true,
            centers: default_centers(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PoissonConfig {
    /// `zero`, `coordinate`, or `cosine <m>`.
    #[serde(default = "default_f")]
    pub f: String,
}

fn default_f() -> String {
    "zero".into()
}

impl Default for PoissonConfig {
    fn default() -> Self {
        Self { f: default_f() }
    }
}

/// Verdicts evaluated on the seed-averaged sweep results.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AcceptanceConfig {
    /// Eigenvalue indices the checks apply to.
    #[serde(default = "default_indices")]
    pub indices: Vec<usize>,
    /// Bound on `|mean lambda_i - lambda_i| / lambda_i` in every cell.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_relative_error: Option<f64>,
    /// Bound on every recorded subspace angle of the listed indices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_angle: Option<f64>,
    /// Mean absolute error nonincreasing as cells are traversed in order.
    #[serde(default)]
    pub monotone: bool,
}

fn default_indices() -> Vec<usize> {
    vec![1]
}

/// Built-in right-hand sides for the Poisson command.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Forcing {
    Zero,
    /// First ambient coordinate.
    Coordinate,
    /// `cos(m pi s)` in the intrinsic coordinate `s`; `cos(m theta)` on the circle.
    Cosine(u32),
}

impl Forcing {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let words: Vec<&str> = s.split_whitespace().collect();
        match words.as_slice() {
            ["zero"] => Ok(Forcing::Zero),
            ["coordinate"] => Ok(Forcing::Coordinate),
            ["cosine", m] => m
                .parse()
                .map(Forcing::Cosine)
                .map_err(|_| CliError::Config(format!("poisson.f: bad cosine order `{m}`"))),
            _ => Err(CliError::Config(format!(
                "poisson.f: expected `zero`, `coordinate` or `cosine <m>`, got `{s}`"
            ))),
        }
    }
}

pub fn load(path: &Path) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<Config, CliError> {
    toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

fn require<T>(v: Option<T>, key: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Config(format!("missing key `{key}`")))
}

fn core_config(key: &str) -> impl Fn(pim_core::Error) -> CliError + '_ {
    move |e| match e {
        pim_core::Error::UnsupportedConfiguration(m) => CliError::Config(format!("{key}: unsupported: {m}")),
        other => CliError::Config(format!("{key}: {other}")),
    }
}

impl Config {
    pub fn kernel_spec(&self) -> Result<KernelSpec, CliError> {
        let k = &self.kernel;
        let spec = match k.family.as_str() {
            "wendland41" => KernelSpec::wendland41(),
            "truncated-gaussian" => {
                let beta = k.beta.unwrap_or(1.0);
                if !beta.is_finite() {
                    return Err(CliError::Config("kernel.beta must be finite".into()));
                }
                KernelSpec::truncated_gaussian(beta)
            }
            "polynomial" => {
                let coeffs = require(k.coeffs.clone(), "kernel.coeffs")?;
                if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(CliError::Config("kernel.coeffs must be a nonempty list of finite numbers".into()));
                }
                KernelSpec::polynomial(coeffs)
            }
            other => {
                return Err(CliError::Config(format!(
                    "kernel.family: unknown family `{other}` (expected wendland41, truncated-gaussian or polynomial)"
                )))
            }
        };
        match k.scale {
            Some(c) if !(c > 0.0 && c.is_finite()) => Err(CliError::Config("kernel.scale must be positive".into())),
            Some(c) => Ok(spec.scaled(c)),
            None => Ok(spec),
        }
    }

    pub fn manifold_model(&self) -> Result<ManifoldModel, CliError> {
        let m = &self.manifold;
        let model = match m.shape.as_str() {
            "interval" => ManifoldModel::Interval {
                a: m.a.unwrap_or(0.0),
                b: m.b.unwrap_or(1.0),
            },
            "circle" => ManifoldModel::Circle {
                radius: m.radius.unwrap_or(1.0),
            },
            "sphere" => ManifoldModel::Sphere {
                radius: m.radius.unwrap_or(1.0),
            },
            other => {
                return Err(CliError::Config(format!(
                    "manifold.shape: unknown shape `{other}` (expected interval, circle or sphere)"
                )))
            }
        };
        model.validate().map_err(core_config("manifold"))?;
        Ok(model)
    }

    pub fn density_spec(&self, manifold: &ManifoldModel) -> Result<DensitySpec, CliError> {
        let d = &self.density;
        let form = match d.form.as_str() {
            "uniform" => DensityForm::Uniform,
            "cosine" => DensityForm::CosinePerturbed {
                a: require(d.a, "density.a")?,
            },
            "table" => DensityForm::Table {
                values: require(d.values.clone(), "density.values")?,
            },
            other => {
                return Err(CliError::Config(format!(
                    "density.form: unknown form `{other}` (expected uniform, cosine or table)"
                )))
            }
        };
        DensitySpec::new(form, manifold).map_err(core_config("density"))
    }

    /// Bandwidth for a cloud of `n` points.
    pub fn bandwidth(&self, n: usize, manifold: &ManifoldModel) -> Result<f64, CliError> {
        let t = match (self.assemble.t, self.assemble.t_auto) {
            (Some(t), _) => t,
            (None, Some(c)) => auto_bandwidth(n, manifold.intrinsic_dim(), c),
            (None, None) => return Err(CliError::Config("missing key `assemble.t` (or `assemble.t_auto`)".into())),
        };
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Config(format!("assemble.t must be positive, got {t}")));
        }
        Ok(t)
    }

    pub fn assembly_options(&self) -> AssemblyOptions {
        AssemblyOptions {
            dense_threshold: self.assemble.dense_threshold,
            ..Default::default()
        }
    }

    pub fn sample_size(&self) -> Result<usize, CliError> {
        if self.sample.n == 0 {
            return Err(CliError::Config("sample.n must be positive".into()));
        }
        Ok(self.sample.n)
    }

    pub fn forcing(&self) -> Result<Forcing, CliError> {
        Forcing::parse(&self.poisson.f)
    }

    pub fn sweep_seeds(&self) -> Result<Vec<u64>, CliError> {
        match &self.sweep.seeds {
            Some(s) if s.is_empty() => Err(CliError::Config("sweep.seeds must not be empty".into())),
            Some(s) => Ok(s.clone()),
            None if self.sweep.repeats == 0 => Err(CliError::Config("sweep.repeats must be positive".into())),
            None => Ok((0..self.sweep.repeats as u64).map(|k| self.sample.seed + k).collect()),
        }
    }

    pub fn sweep_grid(&self) -> Result<SweepGrid, CliError> {
        let manifold = self.manifold_model()?;
        let density = self.density_spec(&manifold)?;
        let kernel = self.kernel_spec()?;
        let s = &self.sweep;
        if s.n.is_empty() {
            return Err(CliError::Config("missing key `sweep.n`".into()));
        }
        let (schedule, t_values) = match s.schedule.as_str() {
            "cartesian" => (Schedule::Cartesian, require(s.t.clone(), "sweep.t")?),
            "zipped" => (Schedule::Zipped, require(s.t.clone(), "sweep.t")?),
            "auto" => {
                let c = require(self.assemble.t_auto, "assemble.t_auto")?;
                let ts = s.n.iter().map(|&n| auto_bandwidth(n, manifold.intrinsic_dim(), c)).collect();
                (Schedule::Zipped, ts)
            }
            other => {
                return Err(CliError::Config(format!(
                    "sweep.schedule: unknown schedule `{other}` (expected cartesian, zipped or auto)"
                )))
            }
        };
        if s.count == 0 {
            return Err(CliError::Config("sweep.count must be positive".into()));
        }
        let grid = SweepGrid {
            manifold,
            density,
            kernel,
            n_values: s.n.clone(),
            t_values,
            seeds: self.sweep_seeds()?,
            schedule,
            options: SweepOptions {
                angles: s.angles,
                coercivity: s.coercivity,
                discrepancy: s.discrepancy,
                discrepancy_centers: s.centers,
                assembly: self.assembly_options(),
            },
        };
        grid.validate().map_err(core_config("sweep"))?;
        if s.discrepancy && s.centers < 8 {
            return Err(CliError::Config("sweep.centers must be at least 8".into()));
        }
        Ok(grid)
    }
}
