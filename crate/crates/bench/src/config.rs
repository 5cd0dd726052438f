//! Experiment configuration files (JSON, unknown keys rejected).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::BenchError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "snake_case")]
pub enum ExperimentConfig {
    Frechet(FrechetConfig),
    Quadgame(QuadConfig),
    RobustPca(PcaConfig),
    Verify(VerifyConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamMode {
    Abrupt,
    Drift,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OnlineAlgorithm {
    Rogd,
    Roogd,
    RoogdCorrected,
    Raoogd,
}

impl OnlineAlgorithm {
    pub fn label(self) -> &'static str {
        match self {
            OnlineAlgorithm::Rogd => "rogd",
            OnlineAlgorithm::Roogd => "roogd",
            OnlineAlgorithm::RoogdCorrected => "roogd_corrected",
            OnlineAlgorithm::Raoogd => "raoogd",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameAlgorithm {
    Rogda,
    Rgda,
    Rceg,
}

impl GameAlgorithm {
    pub fn label(self) -> &'static str {
        match self {
            GameAlgorithm::Rogda => "rogda",
            GameAlgorithm::Rgda => "rgda",
            GameAlgorithm::Rceg => "rceg",
        }
    }
}

/// An algorithm and an optional step size; `None` picks the default rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec<A> {
    pub name: A,
    #[serde(default)]
    pub step_size: Option<f64>,
}

fn default_online() -> Vec<AlgorithmSpec<OnlineAlgorithm>> {
    [
        OnlineAlgorithm::Rogd,
        OnlineAlgorithm::Roogd,
        OnlineAlgorithm::Raoogd,
    ]
    .into_iter()
    .map(|name| AlgorithmSpec {
        name,
        step_size: None,
    })
    .collect()
}

fn default_games() -> Vec<AlgorithmSpec<GameAlgorithm>> {
    [
        GameAlgorithm::Rogda,
        GameAlgorithm::Rgda,
        GameAlgorithm::Rceg,
    ]
    .into_iter()
    .map(|name| AlgorithmSpec {
        name,
        step_size: None,
    })
    .collect()
}

fn one() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}

/// Online Fréchet mean on hyperbolic space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrechetConfig {
    /// Hyperbolic dimension `n` of `H^n`.
    pub dim: usize,
    /// Points per round.
    pub n_points: usize,
    pub rounds: usize,
    #[serde(default)]
    pub seed: u64,
    pub mode: StreamMode,
    /// Rounds between re-selections of the center `P_t`.
    pub window: usize,
    #[serde(default = "default_drift")]
    pub drift: f64,
    /// Radius of the ball around `P_t` that round points are drawn from.
    #[serde(default = "one")]
    pub ball_radius: f64,
    /// Diameter of the set that `P_t` is re-selected in.
    #[serde(default = "one")]
    pub center_diam: f64,
    /// Diameter `D` used by the step-size rules.
    #[serde(default = "one")]
    pub diameter: f64,
    /// Lower curvature bound fed to `zeta`.
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "default_online")]
    pub algorithms: Vec<AlgorithmSpec<OnlineAlgorithm>>,
    #[serde(default)]
    pub record_timing: bool,
    #[serde(default)]
    pub output: Option<String>,
}

fn default_drift() -> f64 {
    0.1
}
fn default_kappa() -> f64 {
    -1.0
}

/// The quadratic logdet game on `SPD(d) x SPD(d)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadConfig {
    pub d: usize,
    pub c1: f64,
    #[serde(default = "one")]
    pub c2: f64,
    pub rounds: usize,
    #[serde(default)]
    pub seed: u64,
    /// Distance of the start from a random equilibrium.
    #[serde(default = "one")]
    pub init_distance: f64,
    /// Divide configured step sizes by `d`.
    #[serde(default = "yes")]
    pub scale_step_by_dim: bool,
    #[serde(default = "default_games")]
    pub algorithms: Vec<AlgorithmSpec<GameAlgorithm>>,
    #[serde(default)]
    pub record_timing: bool,
    #[serde(default)]
    pub output: Option<String>,
}

/// Robust geometry-aware PCA on `SPD(d) x S^{d-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PcaConfig {
    pub d: usize,
    pub n_samples: usize,
    pub rounds: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default = "default_eig_lo")]
    pub eig_lo: f64,
    #[serde(default = "default_eig_hi")]
    pub eig_hi: f64,
    #[serde(default = "default_games")]
    pub algorithms: Vec<AlgorithmSpec<GameAlgorithm>>,
    #[serde(default)]
    pub record_timing: bool,
    #[serde(default)]
    pub output: Option<String>,
}

fn default_eig_lo() -> f64 {
    0.2
}
fn default_eig_hi() -> f64 {
    4.5
}

/// Geometry probes over a list of manifolds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub manifolds: Vec<VerifyTarget>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<String>,
}

fn default_samples() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyTarget {
    pub manifold: riemopt::manifolds::ManifoldSpec,
    pub max_diam: f64,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, BenchError> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentConfig::Frechet(_) => "frechet",
            ExperimentConfig::Quadgame(_) => "quadgame",
            ExperimentConfig::RobustPca(_) => "robust_pca",
            ExperimentConfig::Verify(_) => "verify",
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            ExperimentConfig::Frechet(c) => c.seed,
            ExperimentConfig::Quadgame(c) => c.seed,
            ExperimentConfig::RobustPca(c) => c.seed,
            ExperimentConfig::Verify(c) => c.seed,
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        match self {
            ExperimentConfig::Frechet(c) => c.seed = seed,
            ExperimentConfig::Quadgame(c) => c.seed = seed,
            ExperimentConfig::RobustPca(c) => c.seed = seed,
            ExperimentConfig::Verify(c) => c.seed = seed,
        }
    }

    /// Overrides the horizon; ignored by `verify`.
    pub fn set_rounds(&mut self, rounds: usize) {
        match self {
            ExperimentConfig::Frechet(c) => c.rounds = rounds,
            ExperimentConfig::Quadgame(c) => c.rounds = rounds,
            ExperimentConfig::RobustPca(c) => c.rounds = rounds,
            ExperimentConfig::Verify(_) => {}
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |field: &str, why: &str| Err(BenchError::Config(format!("{field}: {why}")));
        let positive = |field: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                bad(field, "must be positive and finite")
            }
        };
        match self {
            ExperimentConfig::Frechet(c) => {
                if c.dim == 0 {
                    return bad("dim", "must be at least 1");
                }
                if c.n_points == 0 {
                    return bad("n_points", "must be at least 1");
                }
                if c.rounds == 0 {
                    return bad("rounds", "must be at least 1");
                }
                if c.window == 0 {
                    return bad("window", "must be at least 1");
                }
                positive("ball_radius", c.ball_radius)?;
                positive("center_diam", c.center_diam)?;
                positive("diameter", c.diameter)?;
                if !(c.drift >= 0.0) {
                    return bad("drift", "must be non-negative");
                }
                if !c.kappa.is_finite() {
                    return bad("kappa", "must be finite");
                }
                check_algorithms(&c.algorithms, |a| a.label())?;
            }
            ExperimentConfig::Quadgame(c) => {
                if c.d == 0 {
                    return bad("d", "must be at least 1");
                }
                if c.rounds == 0 {
                    return bad("rounds", "must be at least 1");
                }
                if !(c.c1 >= 0.0) || !c.c1.is_finite() {
                    return bad("c1", "must be non-negative");
                }
                if !c.c2.is_finite() {
                    return bad("c2", "must be finite");
                }
                positive("init_distance", c.init_distance)?;
                check_algorithms(&c.algorithms, |a| a.label())?;
            }
            ExperimentConfig::RobustPca(c) => {
                if c.d < 2 {
                    return bad("d", "must be at least 2");
                }
                if c.n_samples == 0 {
                    return bad("n_samples", "must be at least 1");
                }
                if c.rounds == 0 {
                    return bad("rounds", "must be at least 1");
                }
                if !(c.alpha >= 0.0) {
                    return bad("alpha", "must be non-negative");
                }
                positive("eig_lo", c.eig_lo)?;
                if !(c.eig_hi >= c.eig_lo) || !c.eig_hi.is_finite() {
                    return bad("eig_hi", "must be finite and at least eig_lo");
                }
                check_algorithms(&c.algorithms, |a| a.label())?;
            }
            ExperimentConfig::Verify(c) => {
                if c.manifolds.is_empty() {
                    return bad("manifolds", "must not be empty");
                }
                if c.samples == 0 {
                    return bad("samples", "must be at least 1");
                }
                for t in &c.manifolds {
                    positive("max_diam", t.max_diam)?;
                    riemopt::manifolds::make_manifold(&t.manifold)
                        .map_err(|e| BenchError::Config(format!("manifold: {e}")))?;
                }
            }
        }
        Ok(())
    }
}

fn check_algorithms<A: Copy>(
    algs: &[AlgorithmSpec<A>],
    label: impl Fn(A) -> &'static str,
) -> Result<(), BenchError> {
    if algs.is_empty() {
        return Err(BenchError::Config("algorithms: must not be empty".into()));
    }
    let mut seen = Vec::new();
    for a in algs {
        let l = label(a.name);
        if seen.contains(&l) {
            return Err(BenchError::Config(format!("algorithms: {l} listed twice")));
        }
        seen.push(l);
        if let Some(eta) = a.step_size {
            if !(eta > 0.0) || !eta.is_finite() {
                return Err(BenchError::Config(format!(
                    "algorithms.{l}.step_size: must be positive"
                )));
            }
        }
    }
    Ok(())
}
