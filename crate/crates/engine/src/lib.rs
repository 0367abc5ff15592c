//! Config-driven runner for the `abc-core` samplers: parsing, a rayon
//! executor, result files, and the `abc` command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod executor;
pub mod output;
pub mod registry;
pub mod runner;

use std::path::Path;

pub use config::{parse_config, render_config, Algorithm, RunConfig};
pub use error::{ConfigError, EngineError};
pub use executor::ThreadedExecutor;
pub use output::{emit_outputs, verify_manifest, Manifest};
pub use runner::{run, ResultBundle};

/// Runs and writes outputs into `dir`; on failure writes `error.json` there instead.
pub fn run_to_dir(config: &RunConfig, dir: &Path) -> Result<(ResultBundle, Manifest), EngineError> {
    let result = run(config).and_then(|bundle| {
        let manifest = emit_outputs(&bundle, dir)?;
        Ok((bundle, manifest))
    });
    if let Err(e) = &result {
        if !matches!(e, EngineError::Config(_)) {
            // The original error matters more than a failure to record it.
            let _ = output::write_failure(dir, e);
        }
    }
    result
}
