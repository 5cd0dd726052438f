//! Seeded synthetic experiments for `riemopt`: the online Fréchet mean on
//! hyperbolic space, the quadratic logdet game, robust geometry-aware PCA,
//! geometry probes, and parameter sweeps over them.
//!
//! Every run is a pure function of its configuration: the same config and
//! seed produce byte-identical CSV.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod run;
pub mod stream;
pub mod sweep;
pub mod verify_cmd;

pub use config::ExperimentConfig;
pub use run::{run_experiment, ResultRow, RunOutput};
pub use stream::gen_frechet_stream;
pub use sweep::{sweep, SweepConfig};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BenchError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("io error: {0}")]
    Io(String),
}

impl BenchError {
    /// Process exit code: 2 for config errors, 3 for numeric failures,
    /// 1 for IO.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) => 2,
            BenchError::Numeric(_) => 3,
            BenchError::Io(_) => 1,
        }
    }
}

impl From<riemopt::GeomError> for BenchError {
    fn from(e: riemopt::GeomError) -> Self {
        BenchError::Numeric(e.to_string())
    }
}
