//! Experiment configuration: one JSON document with nested blocks. Every
//! block has defaults, unknown keys are rejected, and [`ExperimentConfig::resolve`]
//! fills the grid-dependent defaults so that the resolved document can be
//! embedded in the outputs and read back to the same value.

use std::path::{Path, PathBuf};

use qmn::{
    make_saturating, ComparisonFunction, Cone, Grid64, GridRef, HammersteinProblem64, InnerProfile, Kernel,
    Nonlinearity, OuterFactor, QuasimeasureParams64,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub grid: GridConfig,
    pub saturating_levels: usize,
    pub quasimeasure: QuasimeasureConfig,
    pub kernel: KernelConfig,
    pub nonlinearity: NonlinearityConfig,
    pub cone: ConeConfig,
    pub solver: SolverConfig,
    pub suite: SuiteConfig,
    pub darbo: DarboConfig,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            grid: GridConfig::default(),
            saturating_levels: 4,
            quasimeasure: QuasimeasureConfig::default(),
            kernel: KernelConfig::default(),
            nonlinearity: NonlinearityConfig::default(),
            cone: ConeConfig::default(),
            solver: SolverConfig::default(),
            suite: SuiteConfig::default(),
            darbo: DarboConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub dim: usize,
    pub half_width: f64,
    pub points_per_axis: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            dim: 1,
            half_width: 2.0,
            points_per_axis: 81,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuasimeasureConfig {
    pub k_budget: usize,
    /// Strictly descending; `null` resolves to `[4h, 2h, h]`.
    pub delta_schedule: Option<Vec<f64>>,
    pub eps_schedule: Vec<f64>,
}

impl Default for QuasimeasureConfig {
    fn default() -> Self {
        QuasimeasureConfig {
            k_budget: 1,
            delta_schedule: None,
            eps_schedule: vec![0.5, 0.2, 0.1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelConfig {
    Gaussian {
        amplitude: f64,
        rate: f64,
    },
    Laplace {
        amplitude: f64,
        rate: f64,
    },
    Separable {
        amplitude: f64,
        outer: OuterConfig,
        inner: InnerConfig,
    },
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig::Separable {
            amplitude: 1.0,
            outer: OuterConfig::Gaussian { rate: 1.0 },
            inner: InnerConfig::Indicator { lo: 0.0, hi: 1.0 },
        }
    }
}

impl KernelConfig {
    pub fn build(&self) -> Kernel<f64> {
        match *self {
            KernelConfig::Gaussian { amplitude, rate } => Kernel::Gaussian { amplitude, rate },
            KernelConfig::Laplace { amplitude, rate } => Kernel::Laplace { amplitude, rate },
            KernelConfig::Separable {
                amplitude,
                ref outer,
                ref inner,
            } => Kernel::Separable {
                amplitude,
                outer: match *outer {
                    OuterConfig::Constant => OuterFactor::Constant,
                    OuterConfig::Gaussian { rate } => OuterFactor::Gaussian { rate },
                    OuterConfig::PositivePart => OuterFactor::PositivePart,
                },
                inner: match *inner {
                    InnerConfig::Indicator { lo, hi } => InnerProfile::Indicator { lo, hi },
                    InnerConfig::Gaussian { rate } => InnerProfile::Gaussian { rate },
                },
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum OuterConfig {
    Constant,
    Gaussian { rate: f64 },
    PositivePart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum InnerConfig {
    Indicator { lo: f64, hi: f64 },
    Gaussian { rate: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearityConfig {
    Affine { slope: f64, offset: f64 },
    Saturating { gain: f64 },
    Sqrt { gain: f64 },
}

impl Default for NonlinearityConfig {
    fn default() -> Self {
        NonlinearityConfig::Affine {
            slope: 0.5,
            offset: 1.0,
        }
    }
}

impl NonlinearityConfig {
    pub fn build(&self) -> Nonlinearity<f64> {
        match *self {
            NonlinearityConfig::Affine { slope, offset } => Nonlinearity::Affine { slope, offset },
            NonlinearityConfig::Saturating { gain } => Nonlinearity::Saturating { gain },
            NonlinearityConfig::Sqrt { gain } => Nonlinearity::Sqrt { gain },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConeConfig {
    pub r: f64,
    pub c: f64,
}

impl Default for ConeConfig {
    fn default() -> Self {
        ConeConfig { r: 1.0, c: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// Radius of the invariant ball; `null` solves for it.
    pub radius: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-10,
            max_iter: 60,
            radius: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorConfig {
    Random,
    Constants,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteConfig {
    pub trials: usize,
    pub seed: u64,
    pub generator: GeneratorConfig,
    pub max_members: usize,
    pub mix_count: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            trials: 50,
            seed: 0,
            generator: GeneratorConfig::Random,
            max_members: 5,
            mix_count: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DarboConfig {
    /// Members per sampled ensemble, both for the contraction estimate and
    /// for the start of the ensemble iteration.
    pub members: usize,
    pub q_trials: usize,
    pub iters: usize,
    /// Node indices where the nonconvexity is sampled; `null` resolves to
    /// the first, middle and last node.
    pub probes: Option<Vec<usize>>,
    pub kappa_budget: usize,
    pub phi_d_slope: f64,
    pub phi_e_slope: f64,
    pub slack: f64,
    pub kappa_informational: bool,
}

impl Default for DarboConfig {
    fn default() -> Self {
        DarboConfig {
            members: 4,
            q_trials: 20,
            iters: 6,
            probes: None,
            kappa_budget: 64,
            phi_d_slope: 0.9,
            phi_e_slope: 0.9,
            slack: 1e-9,
            kappa_informational: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
    #[default]
    Both,
}

impl Format {
    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }

    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Format,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: PathBuf::from("out"),
            formats: Format::Both,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    /// Fills grid-dependent defaults and checks every block by building the
    /// library objects it describes.
    pub fn resolve(mut self) -> Result<Self, CliError> {
        let grid = self.build_grid()?;
        let h = grid.spacing();
        if self.quasimeasure.delta_schedule.is_none() {
            self.quasimeasure.delta_schedule = Some(vec![4.0 * h, 2.0 * h, h]);
        }
        if self.darbo.probes.is_none() {
            let n = grid.len();
            let mut probes = vec![0, n / 2, n - 1];
            probes.dedup();
            self.darbo.probes = Some(probes);
        }
        self.quasimeasure_params(&grid)?;
        self.kernel.build().validate()?;
        self.nonlinearity.build().validate()?;
        Cone::new(self.cone.r, self.cone.c)?;
        self.check_solver()?;
        self.check_suite()?;
        self.check_darbo(grid.len())?;
        Ok(self)
    }

    pub fn build_grid(&self) -> Result<GridRef<f64>, CliError> {
        Ok(Grid64::new(
            self.grid.dim,
            self.grid.half_width,
            self.grid.points_per_axis,
        )?)
    }

    pub fn quasimeasure_params(&self, grid: &GridRef<f64>) -> Result<QuasimeasureParams64, CliError> {
        let saturating = make_saturating(grid, self.saturating_levels)?;
        let h = grid.spacing();
        let deltas = self
            .quasimeasure
            .delta_schedule
            .clone()
            .unwrap_or_else(|| vec![4.0 * h, 2.0 * h, h]);
        Ok(QuasimeasureParams64::new(
            self.quasimeasure.k_budget,
            deltas,
            self.quasimeasure.eps_schedule.clone(),
            saturating,
        )?)
    }

    pub fn build_problem(&self, grid: &GridRef<f64>) -> Result<HammersteinProblem64, CliError> {
        Ok(HammersteinProblem64::new(
            grid,
            self.kernel.build(),
            self.nonlinearity.build(),
            Cone::new(self.cone.r, self.cone.c)?,
        )?)
    }

    pub fn phi_d(&self) -> Result<ComparisonFunction<f64>, CliError> {
        Ok(ComparisonFunction::linear(self.darbo.phi_d_slope)?)
    }

    pub fn phi_e(&self) -> Result<ComparisonFunction<f64>, CliError> {
        Ok(ComparisonFunction::linear(self.darbo.phi_e_slope)?)
    }

    fn check_solver(&self) -> Result<(), CliError> {
        let s = &self.solver;
        if !(s.tol > 0.0 && s.tol.is_finite()) {
            return Err(CliError::field("solver.tol", "must be positive and finite"));
        }
        if s.max_iter == 0 {
            return Err(CliError::field("solver.max_iter", "must be at least 1"));
        }
        if let Some(r) = s.radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(CliError::field("solver.radius", "must be positive and finite"));
            }
        }
        Ok(())
    }

    fn check_suite(&self) -> Result<(), CliError> {
        let s = &self.suite;
        if s.trials == 0 {
            return Err(CliError::field("suite.trials", "must be at least 1"));
        }
        if s.max_members < 2 {
            return Err(CliError::field("suite.max_members", "must be at least 2"));
        }
        if s.mix_count == 0 {
            return Err(CliError::field("suite.mix_count", "must be at least 1"));
        }
        Ok(())
    }

    fn check_darbo(&self, nodes: usize) -> Result<(), CliError> {
        let d = &self.darbo;
        if d.members < 2 {
            return Err(CliError::field("darbo.members", "must be at least 2"));
        }
        if d.q_trials == 0 {
            return Err(CliError::field("darbo.q_trials", "must be at least 1"));
        }
        if d.iters < 2 {
            return Err(CliError::field("darbo.iters", "must be at least 2"));
        }
        if d.kappa_budget == 0 {
            return Err(CliError::field("darbo.kappa_budget", "must be positive"));
        }
        match &d.probes {
            Some(p) if p.is_empty() => return Err(CliError::field("darbo.probes", "need at least one node")),
            Some(p) => {
                if let Some(&bad) = p.iter().find(|&&i| i >= nodes) {
                    return Err(CliError::field(
                        "darbo.probes",
                        format!("node {bad} out of range (grid has {nodes})"),
                    ));
                }
            }
            None => {}
        }
        if !(d.slack >= 0.0 && d.slack.is_finite()) {
            return Err(CliError::field("darbo.slack", "must be nonnegative and finite"));
        }
        self.phi_d()?;
        self.phi_e()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve() {
        let c = ExperimentConfig::default().resolve().unwrap();
        assert_eq!(c.quasimeasure.delta_schedule.as_ref().unwrap().len(), 3);
        assert_eq!(c.darbo.probes, Some(vec![0, 40, 80]));
    }

    #[test]
    fn round_trip_is_lossless() {
        let mut c = ExperimentConfig::default().resolve().unwrap();
        c.quasimeasure.eps_schedule = vec![0.1 + 0.2, 1.0 / 3.0];
        c.kernel = KernelConfig::Laplace {
            amplitude: 0.7,
            rate: std::f64::consts::PI,
        };
        let back = ExperimentConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_json(), c.to_json());
    }

    #[test]
    fn partial_documents_take_defaults() {
        let c = ExperimentConfig::from_json(r#"{"grid": {"points_per_axis": 41}}"#).unwrap();
        assert_eq!(c.grid.points_per_axis, 41);
        assert_eq!(c.grid.half_width, 2.0);
        assert_eq!(c.cone, ConeConfig::default());
    }

    #[test]
    fn unknown_keys_and_families_are_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"gird": {}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"kernel": {"family": "cauchy", "amplitude": 1}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"nonlinearity": {"family": "affine", "slope": 1}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"nonlinearity": {"family": "sqrt", "gain": 1, "extra": 2}}"#).is_err());
    }

    #[test]
    fn ranges_are_checked() {
        let mut c = ExperimentConfig::default();
        c.cone.c = 1.0;
        assert!(c.clone().resolve().is_err());
        c.cone.c = 0.2;
        c.quasimeasure.delta_schedule = Some(vec![0.01]);
        assert!(matches!(
            c.clone().resolve(),
            Err(CliError::Core(qmn::Error::DeltaBelowSpacing { .. }))
        ));
        c.quasimeasure.delta_schedule = None;
        c.darbo.phi_d_slope = 1.0;
        assert!(c.clone().resolve().is_err());
        c.darbo.phi_d_slope = 0.5;
        c.darbo.probes = Some(vec![81]);
        assert!(c.clone().resolve().is_err());
        c.darbo.probes = None;
        c.nonlinearity = NonlinearityConfig::Sqrt { gain: -1.0 };
        assert!(c.resolve().is_err());
    }
}
