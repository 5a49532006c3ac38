//! Parallel sweep driver: runs the configured environments across threads
//! and assembles results in deterministic sweep order, so output bytes
//! never depend on scheduling.

use std::collections::BTreeMap;

use canyonsim_core::analysis::{
    fit_quadratic, summarize_environment, EnvironmentSummary, QuadraticModel,
};
use canyonsim_core::simulate::{run_environment, EnvironmentRun, ScenarioConfig};
use rayon::prelude::*;

use crate::artifacts::{self, RunManifest, SummaryFile};
use crate::AppError;

/// Display-histogram defaults: 2 m bins up to 100 m, matching the delay
/// range of interest.
pub const HISTOGRAM_BIN_WIDTH_M: f64 = 2.0;
pub const HISTOGRAM_MAX_DELAY_M: f64 = 100.0;

/// In-memory result of a full sweep.
pub struct SweepOutput {
    pub runs: Vec<EnvironmentRun>,
    pub summaries: Vec<EnvironmentSummary>,
    /// Fitted on the per-environment (mean N_s, median delay) points;
    /// absent when fewer than three environments have a median.
    pub model: Option<QuadraticModel>,
}

/// Runs every environment of the sweep (in parallel) and fits the
/// quadratic model on the resulting (N_s, d_m) points.
pub fn run(config: &ScenarioConfig) -> Result<SweepOutput, AppError> {
    config.validate().map_err(|e| AppError::Config(e.to_string()))?;
    let runs: Vec<EnvironmentRun> = config
        .nu_sweep_m
        .par_iter()
        .map(|nu| run_environment(config, *nu))
        .collect::<Result<_, _>>()
        .map_err(|e| AppError::Config(e.to_string()))?;

    let summaries: Vec<EnvironmentSummary> = runs
        .iter()
        .map(|run| {
            summarize_environment(&run.observations, run.nu_h_m, config.canyon.rice_sigma_m)
                .map_err(|e| AppError::Config(e.to_string()))
        })
        .collect::<Result<_, _>>()?;

    Ok(SweepOutput { model: fit_model(&summaries), runs, summaries })
}

/// Quadratic fit over environments that produced a median delay.
pub fn fit_model(summaries: &[EnvironmentSummary]) -> Option<QuadraticModel> {
    let points: Vec<(f64, f64)> = summaries
        .iter()
        .filter_map(|s| s.median_delay_m.map(|m| (s.mean_received_ns, m)))
        .collect();
    fit_quadratic(&points).ok()
}

impl SweepOutput {
    pub fn summary_file(&self, config: &ScenarioConfig) -> SummaryFile {
        SummaryFile {
            schema_version: artifacts::SCHEMA_VERSION,
            tool_version: artifacts::TOOL_VERSION.to_string(),
            master_seed: config.canyon.rng_seed,
            environments: self.summaries.clone(),
            model: self.model.clone(),
        }
    }

    pub fn manifest(
        &self,
        config: &ScenarioConfig,
        output_paths: BTreeMap<String, String>,
    ) -> RunManifest {
        RunManifest {
            schema_version: artifacts::SCHEMA_VERSION,
            tool_version: artifacts::TOOL_VERSION.to_string(),
            master_seed: config.canyon.rng_seed,
            config: config.clone(),
            per_environment_seeds: self
                .runs
                .iter()
                .map(|r| (artifacts::nu_label(r.nu_h_m), r.seed))
                .collect(),
            output_paths,
        }
    }
}
