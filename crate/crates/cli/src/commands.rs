//! Implementations behind the CLI subcommands.

use std::collections::BTreeMap;
use std::path::Path;

use canyonsim_core::analysis::histogram_delays;
use canyonsim_core::geometry::{generate_canyon, rice_mean};
use canyonsim_core::orbits::satellite_states;
use canyonsim_core::simulate::antenna_position;

use crate::artifacts::{self, ModelFile};
use crate::{config, sweep, verify, AppError};

/// `generate`: write one city's geometry JSON and echo a height summary.
pub fn generate(
    config_path: Option<&Path>,
    nu: Option<f64>,
    seed: Option<u64>,
    out: &Path,
    quiet: bool,
) -> Result<(), AppError> {
    let scenario = config::load(config_path, seed)?;
    let mut params = scenario.canyon;
    if let Some(nu) = nu {
        params.rice_nu_m = nu;
    }
    let geometry = generate_canyon(&params).map_err(|e| AppError::Config(e.to_string()))?;
    artifacts::write_geometry(out, &geometry)?;
    if !quiet {
        let analytic = rice_mean(params.rice_nu_m, params.rice_sigma_m)
            .map_err(|e| AppError::Config(e.to_string()))?;
        println!(
            "wrote {}: {} buildings, mean height {:.2} m (analytic Rice mean {:.2} m), seed {}",
            out.display(),
            geometry.buildings.len(),
            geometry.mean_height_m(),
            analytic,
            params.rng_seed
        );
    }
    Ok(())
}

/// `sweep`: run every environment and write the full artifact set.
pub fn run_sweep(
    config_path: Option<&Path>,
    out_dir: &Path,
    seed: Option<u64>,
    nu_override: Option<Vec<f64>>,
    quiet: bool,
) -> Result<(), AppError> {
    let mut scenario = config::load(config_path, seed)?;
    if let Some(nu) = nu_override {
        scenario.nu_sweep_m = nu;
        scenario.validate().map_err(|e| AppError::Config(e.to_string()))?;
    }
    std::fs::create_dir_all(out_dir)
        .map_err(|e| AppError::io(&format!("creating {}", out_dir.display()), e))?;

    let output = sweep::run(&scenario)?;

    let mut paths: BTreeMap<String, String> = BTreeMap::new();
    let mut record = |key: String, name: &str| {
        paths.insert(key, name.to_string());
    };

    for (run, summary) in output.runs.iter().zip(&output.summaries) {
        let events_name = artifacts::events_file_name(run.nu_h_m);
        let observations_name = artifacts::observations_file_name(run.nu_h_m);
        let histogram_name = artifacts::histogram_file_name(run.nu_h_m);
        std::fs::write(out_dir.join(&events_name), artifacts::render_events(run))
            .map_err(|e| AppError::io(&format!("writing {events_name}"), e))?;
        std::fs::write(out_dir.join(&observations_name), artifacts::render_observations(run))
            .map_err(|e| AppError::io(&format!("writing {observations_name}"), e))?;
        let histogram = histogram_delays(
            &summary.pooled_delays_m,
            sweep::HISTOGRAM_BIN_WIDTH_M,
            sweep::HISTOGRAM_MAX_DELAY_M,
        )
        .map_err(|e| AppError::Config(e.to_string()))?;
        std::fs::write(out_dir.join(&histogram_name), artifacts::render_histogram(&histogram))
            .map_err(|e| AppError::io(&format!("writing {histogram_name}"), e))?;
        let label = artifacts::nu_label(run.nu_h_m);
        record(format!("events_nu{label}"), &events_name);
        record(format!("observations_nu{label}"), &observations_name);
        record(format!("histogram_nu{label}"), &histogram_name);
    }

    record("summary".into(), artifacts::SUMMARY_FILE);
    record("model".into(), artifacts::MODEL_FILE);
    record("manifest".into(), artifacts::MANIFEST_FILE);

    let summary_file = output.summary_file(&scenario);
    std::fs::write(out_dir.join(artifacts::SUMMARY_FILE), artifacts::render_summary(&summary_file))
        .map_err(|e| AppError::io("writing summary.json", e))?;
    let model_file =
        ModelFile { schema_version: artifacts::SCHEMA_VERSION, model: output.model.clone() };
    std::fs::write(out_dir.join(artifacts::MODEL_FILE), artifacts::render_model(&model_file))
        .map_err(|e| AppError::io("writing model.json", e))?;
    let manifest = output.manifest(&scenario, paths);
    std::fs::write(out_dir.join(artifacts::MANIFEST_FILE), artifacts::render_manifest(&manifest))
        .map_err(|e| AppError::io("writing manifest.json", e))?;

    if !quiet {
        println!(
            "swept {} environments into {} (master seed {})",
            output.runs.len(),
            out_dir.display(),
            scenario.canyon.rng_seed
        );
        println!("{:>8} {:>8} {:>8} {:>10} {:>10}", "nu_m", "mu_m", "N_s", "refl/ep", "median_m");
        for s in &output.summaries {
            println!(
                "{:>8} {:>8.2} {:>8.3} {:>10.3} {:>10}",
                s.nu_h_m,
                s.mu_h_m,
                s.mean_received_ns,
                s.reflections_per_epoch,
                s.median_delay_m.map_or("-".to_string(), |m| format!("{m:.2}")),
            );
        }
        if let Some(model) = &output.model {
            println!(
                "quadratic model: d_m = {:.4} N_s^2 + {:.4} N_s + {:.4} (rms {:.3} m)",
                model.c2, model.c1, model.c0, model.rms_error_m
            );
        }
    }
    Ok(())
}

/// `satellites`: export per-epoch satellite states over the full schedule.
pub fn satellites(
    config_path: Option<&Path>,
    out: &Path,
    seed: Option<u64>,
    quiet: bool,
) -> Result<(), AppError> {
    let scenario = config::load(config_path, seed)?;
    let mut rows = Vec::new();
    for offset in &scenario.constellation.epoch_offsets_s {
        for i in 0..scenario.epochs_per_repetition() {
            let t = i as f64 * scenario.sample_period_s;
            let antenna = antenna_position(t, &scenario).map_err(|e| AppError::Config(e.to_string()))?;
            let epoch = offset + t;
            for state in satellite_states(&scenario.constellation, epoch, antenna)
                .map_err(|e| AppError::Config(e.to_string()))?
            {
                rows.push((epoch, state));
            }
        }
    }
    std::fs::write(out, artifacts::render_satellites(&rows))
        .map_err(|e| AppError::io(&format!("writing {}", out.display()), e))?;
    if !quiet {
        println!("wrote {} satellite states to {}", rows.len(), out.display());
    }
    Ok(())
}

/// `verify`: replay the acceptance criteria against a completed sweep.
pub fn verify_dir(out_dir: &Path, quiet: bool) -> Result<(), AppError> {
    verify::verify_and_report(out_dir, quiet)
}
