use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::BoundOptions;
use crate::error::{PinnError, Result};
use crate::nn::Activation;
use crate::problems::catalog;
use crate::problems::{GridField, ProblemSpec};
use crate::sampling::{QuadratureKind, SetCounts};
use crate::train::{AdamConfig, Architecture, HyperGrid, LbfgsConfig, LossConfig, OptimizerConfig};

/// Which preset scale to load.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Desk,
    Paper,
}

impl std::str::FromStr for Scale {
    type Err = PinnError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Scale::Desk),
            "paper" => Ok(Scale::Paper),
            other => Err(config_error("scale", format!("expected `desk` or `paper`, got `{other}`"))),
        }
    }
}

fn config_error(path: &str, message: impl Into<String>) -> PinnError {
    PinnError::Config { path: path.into(), message: message.into() }
}

/// Problem identifier and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemConfig {
    #[serde(rename = "heat_1d")]
    Heat1d,
    HeatNd {
        dimension: usize,
    },
    BurgersSine {
        nu: f64,
    },
    BurgersRarefaction {
        nu: f64,
    },
    TaylorVortex {
        #[serde(default = "default_a_x")]
        a_x: f64,
        #[serde(default)]
        a_y: f64,
    },
    /// Either read from `field_file` or generated on an `nx x ny` grid.
    DoubleShearLayer {
        #[serde(default)]
        field_file: Option<PathBuf>,
        #[serde(default = "default_grid")]
        nx: usize,
        #[serde(default = "default_grid")]
        ny: usize,
        #[serde(default = "default_rho")]
        rho: f64,
        #[serde(default = "default_delta")]
        delta: f64,
        #[serde(default = "default_t_final")]
        t_final: f64,
    },
}

fn default_a_x() -> f64 {
    4.0
}
fn default_grid() -> usize {
    128
}
fn default_rho() -> f64 {
    30.0
}
fn default_delta() -> f64 {
    0.05
}
fn default_t_final() -> f64 {
    1.0
}

impl ProblemConfig {
    pub fn build(&self) -> Result<ProblemSpec> {
        match self {
            ProblemConfig::Heat1d => catalog::heat_1d(),
            ProblemConfig::HeatNd { dimension } => catalog::heat_nd(*dimension),
            ProblemConfig::BurgersSine { nu } => catalog::burgers_sine(*nu),
            ProblemConfig::BurgersRarefaction { nu } => catalog::burgers_rarefaction(*nu),
            ProblemConfig::TaylorVortex { a_x, a_y } => catalog::taylor_vortex(*a_x, *a_y),
            ProblemConfig::DoubleShearLayer { field_file, nx, ny, rho, delta, t_final } => {
                let field = match field_file {
                    Some(f) => GridField::load(f)?,
                    None => GridField::double_shear_layer(*nx, *ny, *rho, *delta),
                };
                catalog::double_shear_layer(field, *t_final)
            }
        }
    }

    /// Short label of the problem parameter for table rows.
    pub fn parameter(&self) -> String {
        match self {
            ProblemConfig::Heat1d => "n=1".into(),
            ProblemConfig::HeatNd { dimension } => format!("n={dimension}"),
            ProblemConfig::BurgersSine { nu } | ProblemConfig::BurgersRarefaction { nu } => format!("nu={nu}"),
            ProblemConfig::TaylorVortex { a_x, a_y } => format!("a=({a_x},{a_y})"),
            ProblemConfig::DoubleShearLayer { rho, delta, .. } => format!("rho={rho},delta={delta}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    pub kind: QuadratureKind,
    pub n_int: usize,
    pub n_sb: usize,
    pub n_tb: usize,
    #[serde(default)]
    pub seed: u64,
    /// Independent training draws.
    #[serde(default = "one")]
    pub k_sets: usize,
}

impl SamplingConfig {
    pub fn counts(&self) -> SetCounts {
        SetCounts { n_int: self.n_int, n_sb: self.n_sb, n_tb: self.n_tb }
    }
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchitectureConfig {
    /// Hidden layers.
    pub depth: usize,
    pub width: usize,
    pub activation: Activation,
}

impl ArchitectureConfig {
    pub fn architecture(&self) -> Architecture {
        Architecture { depth: self.depth, width: self.width, activation: self.activation }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerChoice {
    Lbfgs,
    Adam,
    /// `adam_iters` Adam steps, then `iters` L-BFGS iterations.
    AdamLbfgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    pub choice: OptimizerChoice,
    pub iters: usize,
    #[serde(default = "one")]
    pub restarts: usize,
    #[serde(default = "learning_rate")]
    pub learning_rate: f64,
    #[serde(default)]
    pub adam_iters: usize,
    #[serde(default = "history_size")]
    pub history_size: usize,
    #[serde(default = "tolerance")]
    pub tolerance: f64,
}

fn learning_rate() -> f64 {
    1e-3
}
fn history_size() -> usize {
    50
}
fn tolerance() -> f64 {
    1e-10
}

impl OptimizerSection {
    pub fn optimizer(&self) -> OptimizerConfig {
        let mut lbfgs = LbfgsConfig::new(self.iters);
        lbfgs.history_size = self.history_size;
        lbfgs.tolerance = self.tolerance;
        match self.choice {
            OptimizerChoice::Lbfgs => OptimizerConfig::Lbfgs(lbfgs),
            OptimizerChoice::Adam => OptimizerConfig::Adam(AdamConfig::new(self.iters, self.learning_rate)),
            OptimizerChoice::AdamLbfgs => {
                OptimizerConfig::AdamLbfgs { adam: AdamConfig::new(self.adam_iters, self.learning_rate), lbfgs }
            }
        }
    }
}

/// Error evaluation and bound settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluationConfig {
    pub n_test: usize,
    pub test_seed: u64,
    /// Compute the a posteriori bound where one applies.
    pub bound: bool,
    pub bound_boundary_samples: usize,
    pub bound_interior_samples: usize,
    pub bound_seed: u64,
    pub validation_seed: u64,
    pub validation_draws: usize,
    /// Cells of the finite-volume reference when no exact solution exists.
    pub reference_cells: usize,
    pub reference_cfl: f64,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            n_test: 100_000,
            test_seed: 1,
            bound: true,
            bound_boundary_samples: 10_000,
            bound_interior_samples: 100_000,
            bound_seed: 2,
            validation_seed: 3,
            validation_draws: 1,
            reference_cells: 2048,
            reference_cfl: 0.4,
        }
    }
}

impl EvaluationConfig {
    pub fn bound_options(&self) -> BoundOptions {
        BoundOptions {
            n_boundary: self.bound_boundary_samples,
            n_interior: self.bound_interior_samples,
            n_test: self.n_test,
            seed: self.bound_seed,
            ..BoundOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

/// Training-set schedule of a convergence study. Entry `i` pairs
/// `n_int[i]` interior points with `n_b[i]` points on each boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub n_int: Vec<usize>,
    pub n_b: Vec<usize>,
    pub k_sets: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub sampling: SamplingConfig,
    pub architecture: ArchitectureConfig,
    #[serde(default)]
    pub loss: LossConfig,
    pub optimizer: OptimizerSection,
    #[serde(default)]
    pub evaluation: EvaluationConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<HyperGrid>,
}

/// Recursively overlays `over` onto `base`; tables merge, everything else
/// is replaced.
fn merge(base: &mut toml::Value, over: toml::Value) {
    match (base, over) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

impl ExperimentConfig {
    /// Parses a TOML config. A top-level `[paper]` table holds overrides
    /// applied only at paper scale.
    pub fn parse(text: &str, scale: Scale) -> Result<Self> {
        let mut value: toml::Value =
            text.parse().map_err(|e: toml::de::Error| config_error("<document>", e.message().to_string()))?;
        let overrides = value.as_table_mut().and_then(|t| t.remove("paper"));
        if let (Scale::Paper, Some(o)) = (scale, overrides) {
            merge(&mut value, o);
        }
        let cfg: Self = serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            let message = e.into_inner().to_string();
            // the toml deserializer repeats the path on a second line
            let message = message.split("\nin `").next().unwrap_or_default().trim().to_string();
            config_error(if path == "." { "<document>" } else { &path }, message)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a config file. A relative `field_file` is resolved against the
    /// config's directory; the output directory stays relative to the
    /// working directory.
    pub fn load(path: &Path, scale: Scale) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| config_error("<file>", format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text, scale)?;
        if let ProblemConfig::DoubleShearLayer { field_file: Some(f), .. } = &mut cfg.problem {
            if f.is_relative() {
                *f = path.parent().unwrap_or(Path::new(".")).join(&*f);
            }
        }
        Ok(cfg)
    }

    pub fn build_problem(&self) -> Result<ProblemSpec> {
        self.problem.build()
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |path: &str, v: usize| {
            if v == 0 {
                Err(config_error(path, "must be positive"))
            } else {
                Ok(())
            }
        };
        match &self.problem {
            ProblemConfig::HeatNd { dimension } => positive("problem.dimension", *dimension)?,
            ProblemConfig::BurgersSine { nu } | ProblemConfig::BurgersRarefaction { nu } if !(*nu >= 0.0) => {
                return Err(config_error("problem.nu", format!("viscosity must be non-negative, got {nu}")));
            }
            ProblemConfig::DoubleShearLayer { nx, ny, t_final, .. } => {
                positive("problem.nx", *nx)?;
                positive("problem.ny", *ny)?;
                if !(*t_final > 0.0) {
                    return Err(config_error("problem.t_final", "must be positive"));
                }
            }
            _ => {}
        }
        positive("sampling.n_int", self.sampling.n_int)?;
        positive("sampling.n_sb", self.sampling.n_sb)?;
        positive("sampling.n_tb", self.sampling.n_tb)?;
        positive("sampling.k_sets", self.sampling.k_sets)?;
        positive("architecture.depth", self.architecture.depth)?;
        positive("architecture.width", self.architecture.width)?;
        self.loss.validate().map_err(|e| config_error("loss", e.to_string()))?;
        positive("optimizer.iters", self.optimizer.iters)?;
        positive("optimizer.restarts", self.optimizer.restarts)?;
        if self.optimizer.choice != OptimizerChoice::Lbfgs && !(self.optimizer.learning_rate > 0.0) {
            return Err(config_error("optimizer.learning_rate", "must be positive"));
        }
        if self.optimizer.choice == OptimizerChoice::AdamLbfgs {
            positive("optimizer.adam_iters", self.optimizer.adam_iters)?;
        }
        positive("evaluation.n_test", self.evaluation.n_test)?;
        positive("evaluation.validation_draws", self.evaluation.validation_draws)?;
        positive("evaluation.reference_cells", self.evaluation.reference_cells)?;
        if !(self.evaluation.reference_cfl > 0.0 && self.evaluation.reference_cfl <= 1.0) {
            return Err(config_error("evaluation.reference_cfl", "must lie in (0, 1]"));
        }
        if let Some(c) = &self.convergence {
            if c.n_int.is_empty() || c.n_int.len() != c.n_b.len() {
                return Err(config_error("convergence.n_b", "needs one entry per `n_int` entry"));
            }
            if c.n_int.iter().chain(&c.n_b).any(|&n| n == 0) {
                return Err(config_error("convergence", "point counts must be positive"));
            }
            positive("convergence.k_sets", c.k_sets)?;
        }
        if let Some(g) = &self.ensemble {
            if g.is_empty() {
                return Err(config_error("ensemble", "every hyperparameter needs at least one value"));
            }
            if g.depth.iter().chain(&g.width).any(|&n| n == 0) {
                return Err(config_error("ensemble", "depth and width must be positive"));
            }
            if g.q.iter().any(|&q| q != 1 && q != 2) {
                return Err(config_error("ensemble.q", "regularization exponent must be 1 or 2"));
            }
            if g.lambda.iter().chain(&g.lambda_reg).any(|&v| !(v >= 0.0)) {
                return Err(config_error("ensemble", "loss weights must be non-negative"));
            }
        }
        Ok(())
    }

    /// Seed of training draw `k`.
    pub fn set_seed(&self, k: usize) -> u64 {
        set_seed(self.sampling.seed, k)
    }
}

/// Seed offset between independent training draws.
pub const SET_SEED_STRIDE: u64 = 104_729;

pub fn set_seed(seed: u64, k: usize) -> u64 {
    seed.wrapping_add(SET_SEED_STRIDE.wrapping_mul(k as u64))
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[problem]
kind = "heat_1d"

[sampling]
kind = "monte_carlo"
n_int = 1024
n_sb = 64
n_tb = 64

[architecture]
depth = 4
width = 20
activation = "tanh"

[loss]
lambda_residual = 1.0
lambda_reg = 1e-6

[optimizer]
choice = "lbfgs"
iters = 500
restarts = 5

[paper.sampling]
n_int = 65536
n_sb = 32768
n_tb = 32768
"#;

    #[test]
    fn desk_and_paper_scale() {
        let desk = ExperimentConfig::parse(BASE, Scale::Desk).unwrap();
        assert_eq!(desk.sampling.n_int, 1024);
        assert_eq!(desk.sampling.k_sets, 1);
        assert_eq!(desk.loss.reg_exponent, 2);
        assert_eq!(desk.evaluation, EvaluationConfig::default());
        let paper = ExperimentConfig::parse(BASE, Scale::Paper).unwrap();
        assert_eq!((paper.sampling.n_int, paper.sampling.n_sb), (65536, 32768));
        assert_eq!(paper.architecture, desk.architecture);
    }

    fn error_path(text: &str) -> String {
        match ExperimentConfig::parse(text, Scale::Desk) {
            Err(PinnError::Config { path, .. }) => path,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn errors_name_the_field() {
        assert_eq!(error_path(&BASE.replace("n_int = 1024", "n_int = \"many\"")), "sampling.n_int");
        assert_eq!(error_path(&BASE.replace("n_int = 1024", "n_int = 0")), "sampling.n_int");
        assert_eq!(error_path(&BASE.replace("width = 20", "width = 20\nheight = 3")), "architecture.height");
        assert_eq!(error_path(&BASE.replace("\"tanh\"", "\"relu\"")), "architecture.activation");
        assert_eq!(error_path(&BASE.replace("kind = \"heat_1d\"", "kind = \"burgers_sine\"\nnu = -1.0")), "problem.nu");
        assert_eq!(error_path(&BASE.replace("iters = 500", "")), "optimizer");
        assert_eq!(error_path(&BASE.replace("lambda_reg = 1e-6", "lambda_reg = 1e-6\nreg_exponent = 3")), "loss");
        assert_eq!(error_path("[problem"), "<document>");
    }

    #[test]
    fn problems_build() {
        let cases = [
            ProblemConfig::Heat1d,
            ProblemConfig::HeatNd { dimension: 3 },
            ProblemConfig::BurgersSine { nu: 0.01 },
            ProblemConfig::BurgersRarefaction { nu: 0.0 },
            ProblemConfig::TaylorVortex { a_x: 4.0, a_y: 0.0 },
            ProblemConfig::DoubleShearLayer { field_file: None, nx: 16, ny: 16, rho: 30.0, delta: 0.05, t_final: 1.0 },
        ];
        for c in cases {
            let p = c.build().unwrap();
            assert!(p.input_dim() >= 2, "{}", p.name);
        }
    }

    #[test]
    fn set_seeds_are_distinct() {
        let mut seeds: Vec<u64> = (0..50).map(|k| set_seed(7, k)).collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), 50);
        assert_eq!(set_seed(7, 0), 7);
    }
}
