//! Experiment configuration schema.
//!
//! Configurations are JSON documents with a fixed top level: a schema
//! version, the experiment name (which must match the invoked subcommand),
//! a master seed, an optional output directory, and exactly one section
//! named after the experiment. Unknown keys are rejected everywhere so a
//! typo cannot silently fall back to a default.

use std::path::PathBuf;
use std::sync::Arc;

use serde::Deserialize;

use crate::bounds::BoundSpec;
use crate::chains::{ChainModel, FiniteKernel, Noise, SgdChain};
use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::montecarlo::TailSide;
use crate::observable::{FunctionProfile, GeneratorClass};
use crate::rng::RngStream;
use crate::space::{MetricSpace, State};

/// Schema revision this build reads.
pub const SCHEMA_VERSION: &str = "1";

/// Top-level configuration document.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: String,
    /// Subcommand name; checked against the invoked subcommand.
    pub experiment: String,
    pub seed: u64,
    /// Output directory; overridden by `--out`, defaulted from the
    /// `MHK_OUT_DIR` environment variable, then the working directory.
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub simulate: Option<SimulateSection>,
    #[serde(default)]
    pub ipm: Option<IpmSection>,
    #[serde(default)]
    pub gamma: Option<GammaSection>,
    #[serde(default)]
    pub bound: Option<BoundSection>,
    #[serde(default)]
    pub validate: Option<ValidateSection>,
    #[serde(default)]
    pub erm: Option<ErmSection>,
    #[serde(default)]
    pub sgd: Option<SgdSection>,
    #[serde(default)]
    pub bandit: Option<BanditSection>,
}

impl ExperimentConfig {
    /// Check the version tag and that the section named by `experiment`
    /// (and the invoked subcommand) is the one present.
    pub fn check(&self, invoked: &str) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {:?} is not supported; this build reads {:?}",
                self.schema_version, SCHEMA_VERSION
            )));
        }
        if self.experiment != invoked {
            return Err(Error::Config(format!(
                "config declares experiment {:?} but the {invoked:?} subcommand was invoked",
                self.experiment
            )));
        }
        let present = |name: &str| -> bool {
            match name {
                "simulate" => self.simulate.is_some(),
                "ipm" => self.ipm.is_some(),
                "gamma" => self.gamma.is_some(),
                "bound" => self.bound.is_some(),
                "validate" => self.validate.is_some(),
                "erm" => self.erm.is_some(),
                "sgd" => self.sgd.is_some(),
                "bandit" => self.bandit.is_some(),
                _ => false,
            }
        };
        if !matches!(
            self.experiment.as_str(),
            "simulate" | "ipm" | "gamma" | "bound" | "validate" | "erm" | "sgd" | "bandit"
        ) {
            return Err(Error::Config(format!("unknown experiment {:?}", self.experiment)));
        }
        if !present(&self.experiment) {
            return Err(Error::Config(format!(
                "missing required section {:?}",
                self.experiment
            )));
        }
        for name in ["simulate", "ipm", "gamma", "bound", "validate", "erm", "sgd", "bandit"] {
            if name != self.experiment && present(name) {
                return Err(Error::Config(format!(
                    "section {name:?} does not belong in a {:?} config",
                    self.experiment
                )));
            }
        }
        Ok(())
    }
}

/// Chain constructors reachable from a config file.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChainSpec {
    /// The two-state reference kernel `[[0.9, 0.1], [0.2, 0.8]]`.
    TwoStateReference,
    /// A finite row-stochastic kernel; `positions` places the states on the
    /// line (defaults to `0, 1, 2, ...`).
    Finite {
        rows: Vec<Vec<f64>>,
        #[serde(default)]
        positions: Option<Vec<f64>>,
    },
    /// The decimal contraction `X' = X/10 + digit/10` with stationary grid
    /// resolution `10^-k_ref`.
    Ar1Decimal { k_ref: u32 },
    /// `X' = a X + noise`.
    LinearContraction { a: f64, noise: NoiseSpec },
    /// Projected minibatch SGD on scalar quadratic losses.
    Sgd {
        curvatures: Vec<f64>,
        targets: Vec<f64>,
        strong_convexity: f64,
        smoothness: f64,
        step_size: f64,
        batch: usize,
        lo: f64,
        hi: f64,
    },
}

impl ChainSpec {
    pub fn build(&self) -> Result<ChainModel> {
        match self {
            ChainSpec::TwoStateReference => {
                Ok(ChainModel::Finite(crate::chains::two_state_reference()))
            }
            ChainSpec::Finite { rows, positions } => {
                let kernel = match positions {
                    Some(p) => {
                        let space = Arc::new(MetricSpace::line_at(p)?);
                        FiniteKernel::new(rows.clone(), space)?
                    }
                    None => FiniteKernel::on_line(rows.clone())?,
                };
                Ok(ChainModel::Finite(kernel))
            }
            ChainSpec::Ar1Decimal { k_ref } => ChainModel::ar1(*k_ref),
            ChainSpec::LinearContraction { a, noise } => ChainModel::linear(*a, noise.build()),
            ChainSpec::Sgd {
                curvatures,
                targets,
                strong_convexity,
                smoothness,
                step_size,
                batch,
                lo,
                hi,
            } => Ok(ChainModel::Sgd(SgdChain::new(
                curvatures.clone(),
                targets.clone(),
                *strong_convexity,
                *smoothness,
                *step_size,
                *batch,
                *lo,
                *hi,
            )?)),
        }
    }
}

/// Noise law for the linear contraction chain.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseSpec {
    None,
    Uniform { lo: f64, hi: f64 },
    Gauss { sd: f64 },
}

impl NoiseSpec {
    pub fn build(&self) -> Noise {
        match self {
            NoiseSpec::None => Noise::None,
            NoiseSpec::Uniform { lo, hi } => Noise::Uniform { lo: *lo, hi: *hi },
            NoiseSpec::Gauss { sd } => Noise::Gauss { sd: *sd },
        }
    }
}

/// Observables constructible from a config file.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservableSpec {
    /// Indicator of one finite state.
    Indicator { index: usize },
    /// A value table over a finite state space.
    Table { values: Vec<f64> },
    /// `f(x) = x` on a real-state chain with a declared range.
    Identity { lower: f64, upper: f64 },
}

impl ObservableSpec {
    pub fn build(&self, chain: &ChainModel) -> Result<FunctionProfile> {
        match self {
            ObservableSpec::Indicator { index } => {
                let space = chain
                    .space()
                    .ok_or_else(|| Error::Config("indicator needs a finite chain".into()))?;
                if *index >= space.len() {
                    return Err(Error::Config(format!(
                        "indicator index {index} outside a space of {}",
                        space.len()
                    )));
                }
                Ok(FunctionProfile::indicator(*index))
            }
            ObservableSpec::Table { values } => {
                let space = chain
                    .space()
                    .ok_or_else(|| Error::Config("a value table needs a finite chain".into()))?;
                FunctionProfile::table(values.clone(), space)
            }
            ObservableSpec::Identity { lower, upper } => {
                if !(lower < upper) {
                    return Err(Error::Config(format!(
                        "identity range [{lower}, {upper}] is empty"
                    )));
                }
                FunctionProfile::new(
                    "identity",
                    |s| match s {
                        State::Real(x) => x,
                        State::Finite(_) => f64::NAN,
                    },
                    *lower,
                    *upper,
                    lower.abs().max(upper.abs()),
                    Some(1.0),
                )
            }
        }
    }
}

/// Initial laws constructible from a config file.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StartSpec {
    /// The chain's stationary law.
    Stationary,
    /// Dirac at a finite state index.
    State { index: usize },
    /// Dirac at a real coordinate.
    Point { at: f64 },
}

impl StartSpec {
    pub fn build(&self, chain: &ChainModel, probe: &RngStream) -> Result<DiscreteMeasure> {
        match self {
            StartSpec::Stationary => chain.stationary_distribution(probe),
            StartSpec::State { index } => {
                let space = chain
                    .space()
                    .ok_or_else(|| Error::Config("state starts need a finite chain".into()))?;
                DiscreteMeasure::dirac_indexed(space.clone(), *index)
            }
            StartSpec::Point { at } => {
                chain.check_state(State::Real(*at))?;
                Ok(DiscreteMeasure::dirac_real(*at))
            }
        }
    }
}

/// Measures constructible from a config file (the `ipm` subcommand).
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    /// Atoms at `positions` with the given `weights`.
    Weighted { positions: Vec<f64>, weights: Vec<f64> },
    /// A single unit atom.
    Dirac { at: f64 },
    /// Equal weights over the listed points.
    UniformGrid { points: Vec<f64> },
    /// The `k`-step law of a chain from a start law.
    KStep { chain: ChainSpec, start: StartSpec, k: usize },
    /// The stationary law of a chain.
    Stationary { chain: ChainSpec },
}

impl MeasureSpec {
    pub fn build(&self, probe: &RngStream) -> Result<DiscreteMeasure> {
        match self {
            MeasureSpec::Weighted { positions, weights } => {
                DiscreteMeasure::real(positions.clone(), weights.clone())
            }
            MeasureSpec::Dirac { at } => Ok(DiscreteMeasure::dirac_real(*at)),
            MeasureSpec::UniformGrid { points } => {
                if points.is_empty() {
                    return Err(Error::Config("uniform_grid needs at least one point".into()));
                }
                let w = 1.0 / points.len() as f64;
                DiscreteMeasure::real(points.clone(), vec![w; points.len()])
            }
            MeasureSpec::KStep { chain, start, k } => {
                let model = chain.build()?;
                let init = start.build(&model, probe)?;
                model.k_step_distribution(&init, *k)
            }
            MeasureSpec::Stationary { chain } => {
                chain.build()?.stationary_distribution(probe)
            }
        }
    }
}

/// Generator class selector.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    Tv,
    W1,
    Bl,
    Mmd { bandwidth: f64 },
    #[serde(rename = "l2pi")]
    L2Pi,
}

impl GeneratorSpec {
    pub fn build(&self) -> GeneratorClass {
        match self {
            GeneratorSpec::Tv => GeneratorClass::Tv,
            GeneratorSpec::W1 => GeneratorClass::W1,
            GeneratorSpec::Bl => GeneratorClass::Bl,
            GeneratorSpec::Mmd { bandwidth } => GeneratorClass::Mmd { bandwidth: *bandwidth },
            GeneratorSpec::L2Pi => GeneratorClass::L2Pi,
        }
    }
}

/// `simulate` section: sample paths to CSV.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub chain: ChainSpec,
    /// Recorded states per path, the drawn start included.
    pub n: usize,
    #[serde(default)]
    pub start: Option<StartSpec>,
    #[serde(default = "default_one")]
    pub trials: usize,
}

/// `ipm` section: distances between two configured measures.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IpmSection {
    pub mu: MeasureSpec,
    pub nu: MeasureSpec,
    pub generators: Vec<GeneratorSpec>,
    /// Dominating law for the L2(pi) generator.
    #[serde(default)]
    pub pi: Option<MeasureSpec>,
}

/// `gamma` section: the concentrability per-step table.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaSection {
    pub chain: ChainSpec,
    pub generator: GeneratorSpec,
    #[serde(default)]
    pub horizon: Option<usize>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub trials: Option<usize>,
}

/// `bound` section: closed-form families over a grid.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundSection {
    pub specs: Vec<BoundSpec>,
}

/// `validate` section: Monte Carlo tail frequencies against bounds.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateSection {
    pub chain: ChainSpec,
    pub observable: ObservableSpec,
    pub n: usize,
    pub trials: usize,
    /// Strictly increasing deviation grid shared with every bound spec.
    pub eps: Vec<f64>,
    #[serde(default)]
    pub start: Option<StartSpec>,
    #[serde(default)]
    pub side: Option<TailSide>,
    pub specs: Vec<BoundSpec>,
}

/// `erm` section: the decimal-chain quadratic ERM experiment.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErmSection {
    pub k_ref: u32,
    pub n_samples: usize,
    /// Declared concentrability of the sample chain.
    pub gamma: f64,
    pub delta: f64,
    pub trials: usize,
}

/// `sgd` section: averaged-iterate concentration.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SgdSection {
    /// Must be a `sgd` chain spec.
    pub chain: ChainSpec,
    /// Declared bounded-Lipschitz concentrability of the iterate chain.
    pub gamma_bl: f64,
    pub eps: f64,
    pub delta: f64,
    pub trials: usize,
}

/// One custom bandit arm.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmSpec {
    pub rows: Vec<Vec<f64>>,
    #[serde(default)]
    pub positions: Option<Vec<f64>>,
    /// Reward table over the arm's states.
    pub rewards: Vec<f64>,
    pub r_stretch: f64,
    pub gamma: f64,
}

/// Bandit instance selector.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BanditInstanceSpec {
    /// The built-in three-arm reference instance.
    Reference,
    /// An explicit arm list.
    Custom { arms: Vec<ArmSpec> },
}

/// `bandit` section: the rested UCB experiment.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BanditSection {
    pub instance: BanditInstanceSpec,
    #[serde(default = "default_one")]
    pub m_play: usize,
    #[serde(default)]
    pub l_explore: Option<f64>,
    pub horizon: usize,
    pub runs: usize,
    /// Horizons where the bound verdict is evaluated; defaults to the
    /// decades up to the horizon.
    #[serde(default)]
    pub checkpoints: Option<Vec<usize>>,
}

fn default_one() -> usize {
    1
}
