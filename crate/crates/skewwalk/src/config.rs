//! TOML run configuration.
//!
//! Every table rejects unknown keys. Omitted experiment parameters take the
//! defaults below, and the resolved values are what reports embed.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use skewwalk_core::distributions::{EtaFamily, PerturbationLaw, StepLaw};
use skewwalk_core::quadrature::QuadratureSpec;
use skewwalk_core::resolvent::Observable;

use crate::{Error, Result};

pub const WORKERS_ENV: &str = "SKEWWALK_WORKERS";
pub const OUTPUT_DIR_ENV: &str = "SKEWWALK_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// 0 means one worker per available core.
    #[serde(default)]
    pub workers: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// What the `run` subcommand executes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operation: Option<Operation>,
    #[serde(default)]
    pub xi: XiConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<EtaConfig>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform: Option<TransformConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolvent: Option<ResolventConfig>,
    #[serde(default, rename = "experiment", skip_serializing_if = "Vec::is_empty")]
    pub experiments: Vec<ExperimentConfig>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    /// A config with defaults everywhere; used when a subcommand runs
    /// without `--config`.
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            workers: 0,
            output_dir: default_output_dir(),
            operation: None,
            xi: XiConfig::default(),
            eta: None,
            tolerances: Tolerances::default(),
            simulate: None,
            transform: None,
            resolvent: None,
            experiments: Vec::new(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let de = toml::Deserializer::new(text);
        serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
            path: e.path().to_string(),
            message: e.inner().message().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config {
            path: String::new(),
            message: e.to_string(),
        })
    }

    pub fn quadrature(&self) -> Result<QuadratureSpec> {
        self.tolerances.spec()
    }

    pub fn step_law(&self) -> Result<StepLaw> {
        self.xi.law()
    }

    pub fn eta_law(&self) -> Result<Option<PerturbationLaw>> {
        self.eta.as_ref().map(|e| e.law()).transpose()
    }

    /// Apply the environment overrides (only workers and output dir).
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(w) = std::env::var(WORKERS_ENV) {
            self.workers = w.trim().parse().map_err(|_| Error::Config {
                path: WORKERS_ENV.into(),
                message: format!("expected a nonnegative integer, got {w:?}"),
            })?;
        }
        if let Ok(d) = std::env::var(OUTPUT_DIR_ENV) {
            self.output_dir = PathBuf::from(d);
        }
        Ok(())
    }

    /// The configured experiment with this name, or its defaults.
    pub fn experiment(&self, name: &str) -> Result<ExperimentConfig> {
        if let Some(e) = self.experiments.iter().find(|e| e.name() == name) {
            return Ok(e.clone());
        }
        ExperimentConfig::default_for(name).ok_or_else(|| Error::Config {
            path: "experiment.name".into(),
            message: format!("unknown experiment {name:?}; known: {}", ExperimentConfig::NAMES.join(", ")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operation {
    Simulate,
    Transform,
    Resolvent,
    Experiment,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum XiConfig {
    Stable { alpha: f64 },
    Simple,
}

impl Default for XiConfig {
    fn default() -> Self {
        XiConfig::Stable { alpha: 1.5 }
    }
}

impl XiConfig {
    pub fn law(&self) -> Result<StepLaw> {
        Ok(match *self {
            XiConfig::Stable { alpha } => StepLaw::stable(alpha)?,
            XiConfig::Simple => StepLaw::SimpleWalk,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EtaConfig {
    OneSided { beta: f64 },
    TwoSided { beta: f64, c_plus: f64 },
    Constant { value: i64 },
    Geometric { q: f64 },
}

impl EtaConfig {
    pub fn family(&self) -> EtaFamily {
        match *self {
            EtaConfig::OneSided { beta } => EtaFamily::OneSided { beta },
            EtaConfig::TwoSided { beta, c_plus } => EtaFamily::TwoSided { beta, c_plus },
            EtaConfig::Constant { value } => EtaFamily::Constant { value },
            EtaConfig::Geometric { q } => EtaFamily::Geometric { q },
        }
    }

    pub fn law(&self) -> Result<PerturbationLaw> {
        Ok(PerturbationLaw::new(self.family())?)
    }

    pub fn label(&self) -> String {
        match *self {
            EtaConfig::OneSided { beta } => format!("one_sided(beta={beta})"),
            EtaConfig::TwoSided { beta, c_plus } => format!("two_sided(beta={beta},c_plus={c_plus})"),
            EtaConfig::Constant { value } => format!("constant({value})"),
            EtaConfig::Geometric { q } => format!("geometric(q={q})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservableConfig {
    One,
    Gaussian { center: f64, width: f64 },
    Hann { center: f64, width: f64 },
}

impl ObservableConfig {
    pub fn observable(&self) -> Result<Observable> {
        let check = |w: f64| {
            if w > 0.0 && w.is_finite() {
                Ok(())
            } else {
                Err(Error::Config {
                    path: "width".into(),
                    message: format!("must be positive, got {w}"),
                })
            }
        };
        Ok(match *self {
            ObservableConfig::One => Observable::One,
            ObservableConfig::Gaussian { center, width } => {
                check(width)?;
                Observable::Gaussian { center, width }
            }
            ObservableConfig::Hann { center, width } => {
                check(width)?;
                Observable::Hann { center, width }
            }
        })
    }

    pub fn label(&self) -> String {
        match *self {
            ObservableConfig::One => "one".into(),
            ObservableConfig::Gaussian { center, width } => format!("gaussian(c={center},w={width})"),
            ObservableConfig::Hann { center, width } => format!("hann(c={center},w={width})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        let s = QuadratureSpec::default();
        Self {
            abs_tol: s.abs_tol,
            rel_tol: s.rel_tol,
            max_subdivisions: s.max_subdivisions,
        }
    }
}

impl Tolerances {
    pub fn spec(&self) -> Result<QuadratureSpec> {
        let s = QuadratureSpec {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            max_subdivisions: self.max_subdivisions,
            ..QuadratureSpec::default()
        };
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub x0: i64,
    pub n_steps: usize,
    pub n_paths: usize,
    /// Also write the paths in the binary dump format.
    pub dump: bool,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            x0: 0,
            n_steps: 10_000,
            n_paths: 100,
            dump: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformQuantity {
    /// `u_s(x)`.
    Green,
    /// `E_x s^σ`.
    HitGf,
    /// `E_x e^{-λσ̃}` on a rate-`ρ` clock.
    PoissonHit,
    /// `E_{⌊xa(v)⌋} e^{-(λ/v)σ}`.
    ScaledHit,
    /// `E_x e^{-λσ(U_α)}`.
    StableHit,
    /// `v_λ(x)`.
    StableDensity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformConfig {
    pub quantity: TransformQuantity,
    pub x: Vec<f64>,
    #[serde(default)]
    pub s: Option<f64>,
    #[serde(default = "one")]
    pub lambda: f64,
    #[serde(default = "one")]
    pub rho: f64,
    #[serde(default)]
    pub v: Vec<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResolventQuantity {
    /// `V̂_λ f(x)`.
    Killed,
    /// `λR f(0)` of the hold-and-jump walk.
    HoldingJumping,
    /// `λR f(0)` of the skew process.
    Skew,
    /// `E V̂f(η/a) / E V̂1(η/a)`.
    SkewRatio,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResolventMode {
    Formula,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolventConfig {
    pub quantity: ResolventQuantity,
    #[serde(default)]
    pub x: Vec<f64>,
    #[serde(default = "one")]
    pub lambda: f64,
    #[serde(default)]
    pub v: Vec<f64>,
    pub f: ObservableConfig,
    #[serde(default = "formula")]
    pub mode: ResolventMode,
    #[serde(default = "default_mc_paths")]
    pub n_paths: usize,
}

fn formula() -> ResolventMode {
    ResolventMode::Formula
}

fn default_mc_paths() -> usize {
    20_000
}

macro_rules! experiments {
    ($($variant:ident($params:ident) = $name:literal),* $(,)?) => {
        /// One experiment and its parameters, tagged by `name`.
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        #[serde(tag = "name", rename_all = "snake_case")]
        pub enum ExperimentConfig {
            $($variant($params)),*
        }

        impl ExperimentConfig {
            pub const NAMES: &'static [&'static str] = &[$($name),*];

            pub fn name(&self) -> &'static str {
                match self {
                    $(ExperimentConfig::$variant(_) => $name),*
                }
            }

            pub fn default_for(name: &str) -> Option<Self> {
                match name {
                    $($name => Some(ExperimentConfig::$variant($params::default())),)*
                    _ => None,
                }
            }
        }
    };
}

experiments! {
    HittingTransformConvergence(HittingTransformParams) = "hitting_transform_convergence",
    IntegrandConvergence(IntegrandParams) = "integrand_convergence",
    PotterBound(PotterParams) = "potter_bound",
    LocalTimeScaling(LocalTimeParams) = "local_time_scaling",
    InverseSubordinatorLimit(InverseSubordinatorParams) = "inverse_subordinator_limit",
    PartBVanishingPerturbation(PartBParams) = "part_b_vanishing_perturbation",
    SkewRatioLimit(SkewRatioParams) = "skew_ratio_limit",
    PoissonizationEquivalence(PoissonizationParams) = "poissonization_equivalence",
    HittingBound(HittingBoundParams) = "hitting_bound",
    TailFunctional(TailFunctionalParams) = "tail_functional",
    PoissonHittingMc(PoissonHittingMcParams) = "poisson_hitting_mc",
    ResolventIdentities(ResolventIdentitiesParams) = "resolvent_identities",
    PathDecomposition(PathDecompositionParams) = "path_decomposition",
}

fn symmetric(values: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = values.iter().map(|x| -x).rev().collect();
    v.push(0.0);
    v.extend_from_slice(values);
    v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HittingTransformParams {
    pub alpha: f64,
    pub lambda: f64,
    pub x_grid: Vec<f64>,
    pub v_grid: Vec<f64>,
    pub final_threshold: f64,
}

impl Default for HittingTransformParams {
    fn default() -> Self {
        Self {
            alpha: 1.5,
            lambda: 1.0,
            x_grid: symmetric(&[0.1, 0.2, 0.5, 1.0, 2.0, 5.0]),
            v_grid: vec![1e2, 1e4, 1e6],
            final_threshold: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegrandParams {
    pub alpha: f64,
    pub lambda: f64,
    pub v_grid: Vec<f64>,
    /// `A` for `I(v, A)`.
    pub cut: f64,
    /// `A` grid for `J(v_max, A)` and `K(A)`.
    pub cut_grid: Vec<f64>,
    pub eps: f64,
}

impl Default for IntegrandParams {
    fn default() -> Self {
        Self {
            alpha: 1.5,
            lambda: 1.0,
            v_grid: vec![1e2, 1e4, 1e6],
            cut: 10.0,
            cut_grid: vec![10.0, 100.0, 1000.0],
            eps: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PotterParams {
    pub alpha: f64,
    pub delta: f64,
    pub v_grid: Vec<f64>,
    pub eps: f64,
    pub theta_min: f64,
    pub points_per_decade: usize,
    pub c_threshold: f64,
}

impl Default for PotterParams {
    fn default() -> Self {
        Self {
            alpha: 1.5,
            delta: 0.2,
            v_grid: vec![1e3, 1e5, 1e7],
            eps: 1.0,
            theta_min: 1e-3,
            points_per_decade: 20,
            c_threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocalTimeParams {
    pub alpha: f64,
    pub eta: EtaConfig,
    pub delta: f64,
    pub n_grid: Vec<u64>,
    pub n_paths: usize,
}

impl Default for LocalTimeParams {
    fn default() -> Self {
        Self {
            alpha: 1.5,
            eta: EtaConfig::Geometric { q: 0.5 },
            delta: 0.1,
            n_grid: vec![1_000, 10_000, 100_000],
            n_paths: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InverseSubordinatorParams {
    pub alpha: f64,
    pub n0: i64,
    pub n_grid: Vec<u64>,
    pub n_paths: usize,
    /// First-passage runs used to estimate `P{τ_{-n₀} > n}`.
    pub tail_paths: usize,
    /// Below this many survivors at some `n` the tail estimate is too
    /// coarse and the verdict is inconclusive.
    pub min_survivors: usize,
}

impl Default for InverseSubordinatorParams {
    fn default() -> Self {
        Self {
            alpha: 1.5,
            n0: 1,
            n_grid: vec![1_000, 10_000, 100_000],
            n_paths: 500,
            tail_paths: 100_000,
            min_survivors: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartBParams {
    pub alpha: f64,
    pub etas: Vec<EtaConfig>,
    pub t0: f64,
    pub v_grid: Vec<f64>,
    pub n_paths: usize,
}

impl Default for PartBParams {
    fn default() -> Self {
        Self {
            alpha: 1.5,
            etas: vec![
                EtaConfig::Geometric { q: 0.5 },
                EtaConfig::TwoSided { beta: 0.9, c_plus: 0.5 },
            ],
            t0: 1.0,
            v_grid: vec![1e3, 1e4, 1e5],
            n_paths: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SkewRatioParams {
    pub alpha: f64,
    pub eta: EtaConfig,
    pub lambda: f64,
    pub v_grid: Vec<f64>,
    pub f_set: Vec<ObservableConfig>,
}

impl Default for SkewRatioParams {
    fn default() -> Self {
        Self {
            alpha: 1.5,
            eta: EtaConfig::TwoSided { beta: 0.3, c_plus: 0.7 },
            lambda: 1.0,
            v_grid: vec![1e3, 1e4, 1e5],
            f_set: vec![
                ObservableConfig::Gaussian { center: 0.0, width: 1.0 },
                ObservableConfig::Hann { center: -0.3, width: 1.0 },
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoissonizationParams {
    pub alpha: f64,
    pub eta: EtaConfig,
    pub t: f64,
    pub v_grid: Vec<f64>,
    pub n_paths: usize,
    /// FFT length `2^log2_len` for the exact free-walk marginals.
    pub log2_len: u32,
}

impl Default for PoissonizationParams {
    fn default() -> Self {
        Self {
            alpha: 1.5,
            eta: EtaConfig::TwoSided { beta: 0.3, c_plus: 0.7 },
            t: 1.0,
            v_grid: vec![1e2, 1e3, 1e4],
            n_paths: 2000,
            log2_len: 21,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HittingBoundParams {
    pub alpha: f64,
    pub lambda: f64,
    pub delta: f64,
    pub v_grid: Vec<f64>,
    pub x_grid: Vec<f64>,
    pub stability: f64,
}

impl Default for HittingBoundParams {
    fn default() -> Self {
        let pos: Vec<f64> = (0..=12).map(|k| 2f64.powf(-6.0 + 0.5 * k as f64)).collect();
        let mut x_grid: Vec<f64> = pos.iter().map(|x| -x).collect();
        x_grid.extend(pos);
        Self {
            alpha: 1.5,
            lambda: 1.0,
            delta: 0.25,
            v_grid: vec![1e3, 1e5, 1e7],
            x_grid,
            stability: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TailFunctionalParams {
    pub eta: EtaConfig,
    pub gamma: f64,
    pub u_grid: Vec<f64>,
    pub indicator_tolerance: f64,
}

impl Default for TailFunctionalParams {
    fn default() -> Self {
        Self {
            eta: EtaConfig::TwoSided { beta: 0.5, c_plus: 0.5 },
            gamma: 0.3,
            u_grid: vec![1e3, 1e4, 1e5, 1e6],
            indicator_tolerance: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoissonHittingMcParams {
    pub alpha: f64,
    /// `(x, λ, ρ)` triples.
    pub cases: Vec<(i64, f64, f64)>,
    pub n_paths: usize,
    pub z_max: f64,
}

impl Default for PoissonHittingMcParams {
    fn default() -> Self {
        Self {
            alpha: 1.5,
            cases: vec![(1, 1.0, 1.0), (2, 0.5, 1.0)],
            n_paths: 100_000,
            z_max: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResolventIdentitiesParams {
    pub alpha: f64,
    pub eta: EtaConfig,
    pub lambda: f64,
    pub v: f64,
    pub f: ObservableConfig,
    /// Lattice starts `k`, i.e. `x = k/a(v)`.
    pub starts: Vec<i64>,
    pub n_paths: usize,
    pub z_max: f64,
}

impl Default for ResolventIdentitiesParams {
    fn default() -> Self {
        Self {
            alpha: 1.5,
            eta: EtaConfig::TwoSided { beta: 0.3, c_plus: 0.7 },
            lambda: 1.0,
            v: 100.0,
            f: ObservableConfig::Gaussian { center: 0.5, width: 1.0 },
            starts: vec![1, 2, 5],
            n_paths: 100_000,
            z_max: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathDecompositionParams {
    pub alpha: f64,
    pub eta: EtaConfig,
    pub n_paths: usize,
    pub n_steps: usize,
}

impl Default for PathDecompositionParams {
    fn default() -> Self {
        Self {
            alpha: 1.5,
            eta: EtaConfig::TwoSided { beta: 0.3, c_plus: 0.7 },
            n_paths: 100,
            n_steps: 10_000,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
seed = 7
workers = 2
output_dir = "reports"
operation = "experiment"

[xi]
kind = "stable"
alpha = 1.5

[eta]
kind = "two_sided"
beta = 0.3
c_plus = 0.7

[tolerances]
abs_tol = 1e-10

[[experiment]]
name = "hitting_transform_convergence"
v_grid = [100.0, 10000.0]

[[experiment]]
name = "skew_ratio_limit"
f_set = [{ kind = "gaussian", center = 0.0, width = 1.0 }]
"#;

    #[test]
    fn round_trip_is_identity() {
        let c = RunConfig::parse(SAMPLE).unwrap();
        let again = RunConfig::parse(&c.to_toml().unwrap()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.experiments.len(), 2);
        assert_eq!(c.tolerances.rel_tol, QuadratureSpec::default().rel_tol);
    }

    #[test]
    fn unknown_keys_are_rejected_with_their_path() {
        let bad = SAMPLE.replace("v_grid = [100.0, 10000.0]", "v_gird = [1.0]");
        let err = RunConfig::parse(&bad).unwrap_err().to_string();
        assert!(err.contains("v_gird"), "{err}");
        assert!(err.contains("experiment"), "{err}");
        let bad = format!("{SAMPLE}\nbogus = 1\n");
        assert!(RunConfig::parse(&bad).is_err());
        let bad = SAMPLE.replace("c_plus = 0.7", "c_plus = 0.7\nc_minus = 0.3");
        let err = RunConfig::parse(&bad).unwrap_err().to_string();
        assert!(err.contains("eta"), "{err}");
    }

    #[test]
    fn experiments_fall_back_to_defaults() {
        let c = RunConfig::parse(SAMPLE).unwrap();
        match c.experiment("hitting_transform_convergence").unwrap() {
            ExperimentConfig::HittingTransformConvergence(p) => {
                assert_eq!(p.v_grid, vec![100.0, 10000.0]);
                assert_eq!(p.final_threshold, 0.02);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            c.experiment("potter_bound").unwrap(),
            ExperimentConfig::PotterBound(_)
        ));
        assert!(c.experiment("nope").is_err());
        for name in ExperimentConfig::NAMES {
            assert_eq!(ExperimentConfig::default_for(name).unwrap().name(), *name);
        }
    }
}
