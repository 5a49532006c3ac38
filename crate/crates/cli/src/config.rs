//! Config-file loading: a JSON file with any subset of the scenario fields,
//! merged over the reference defaults.

use std::path::Path;

use canyonsim_core::simulate::ScenarioConfig;
use serde::Deserialize;

use crate::AppError;

/// Environment variable that overrides the master seed (handy for CI).
pub const SEED_ENV_VAR: &str = "CANYONSIM_SEED";

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CanyonFile {
    block_side_m: Option<f64>,
    road_width_m: Option<f64>,
    building_width_m: Option<f64>,
    rice_nu_m: Option<f64>,
    rice_sigma_m: Option<f64>,
    rng_seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstellationFile {
    satellite_count: Option<u32>,
    semi_major_axis_m: Option<f64>,
    inclination_deg: Option<f64>,
    plane_count: Option<u32>,
    epoch_offsets_s: Option<Vec<f64>>,
    observer_latitude_deg: Option<f64>,
    observer_longitude_deg: Option<f64>,
}

/// On-disk config: every scenario field, all optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    schema_version: Option<u32>,
    canyon: Option<CanyonFile>,
    constellation: Option<ConstellationFile>,
    vehicle_speed_mps: Option<f64>,
    vehicle_dims_m: Option<(f64, f64, f64)>,
    antenna_offset_delta_m: Option<f64>,
    duration_s: Option<f64>,
    sample_period_s: Option<f64>,
    repetitions: Option<u32>,
    repetition_spacing_s: Option<f64>,
    min_delay_filter_m: Option<f64>,
    nu_sweep_m: Option<Vec<f64>>,
    start_corner: Option<u8>,
    trace_elevation_mask_deg: Option<f64>,
}

fn merge(file: ConfigFile) -> Result<ScenarioConfig, AppError> {
    if let Some(v) = file.schema_version {
        if v != crate::artifacts::SCHEMA_VERSION {
            return Err(AppError::Config(format!(
                "config schema_version {v} is not supported (expected {})",
                crate::artifacts::SCHEMA_VERSION
            )));
        }
    }
    let mut config = ScenarioConfig::default();
    let explicit_offsets;

    if let Some(c) = file.canyon {
        let k = &mut config.canyon;
        k.block_side_m = c.block_side_m.unwrap_or(k.block_side_m);
        k.road_width_m = c.road_width_m.unwrap_or(k.road_width_m);
        k.building_width_m = c.building_width_m.unwrap_or(k.building_width_m);
        k.rice_nu_m = c.rice_nu_m.unwrap_or(k.rice_nu_m);
        k.rice_sigma_m = c.rice_sigma_m.unwrap_or(k.rice_sigma_m);
        k.rng_seed = c.rng_seed.unwrap_or(k.rng_seed);
    }
    if let Some(c) = file.constellation {
        let k = &mut config.constellation;
        k.satellite_count = c.satellite_count.unwrap_or(k.satellite_count);
        k.semi_major_axis_m = c.semi_major_axis_m.unwrap_or(k.semi_major_axis_m);
        k.inclination_deg = c.inclination_deg.unwrap_or(k.inclination_deg);
        k.plane_count = c.plane_count.unwrap_or(k.plane_count);
        k.observer_latitude_deg = c.observer_latitude_deg.unwrap_or(k.observer_latitude_deg);
        k.observer_longitude_deg = c.observer_longitude_deg.unwrap_or(k.observer_longitude_deg);
        explicit_offsets = c.epoch_offsets_s;
    } else {
        explicit_offsets = None;
    }

    macro_rules! take {
        ($field:ident) => {
            if let Some(v) = file.$field {
                config.$field = v;
            }
        };
    }
    take!(vehicle_speed_mps);
    take!(vehicle_dims_m);
    take!(antenna_offset_delta_m);
    take!(duration_s);
    take!(sample_period_s);
    take!(repetitions);
    take!(repetition_spacing_s);
    take!(min_delay_filter_m);
    take!(nu_sweep_m);
    take!(start_corner);
    take!(trace_elevation_mask_deg);

    // the repetition schedule follows repetitions x spacing unless the file
    // pins the offsets explicitly
    config.constellation.epoch_offsets_s = explicit_offsets.unwrap_or_else(|| {
        (0..config.repetitions)
            .map(|k| k as f64 * config.repetition_spacing_s)
            .collect()
    });
    Ok(config)
}

/// Loads (or defaults) the scenario config and applies the seed override
/// chain: `--seed` flag, then the `CANYONSIM_SEED` variable, then the file.
pub fn load(path: Option<&Path>, seed_flag: Option<u64>) -> Result<ScenarioConfig, AppError> {
    let file = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| AppError::io(&format!("reading config {}", p.display()), e))?;
            serde_json::from_str::<ConfigFile>(&text)
                .map_err(|e| AppError::Config(format!("parsing {}: {e}", p.display())))?
        }
        None => ConfigFile::default(),
    };
    let mut config = merge(file)?;

    if let Some(seed) = seed_flag {
        config.canyon.rng_seed = seed;
    } else if let Ok(text) = std::env::var(SEED_ENV_VAR) {
        let seed = text.parse::<u64>().map_err(|_| {
            AppError::Config(format!("{SEED_ENV_VAR} must be an unsigned integer, got {text:?}"))
        })?;
        config.canyon.rng_seed = seed;
    }

    config.validate().map_err(|e| AppError::Config(e.to_string()))?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_yields_defaults() {
        let config = merge(ConfigFile::default()).unwrap();
        assert_eq!(config, ScenarioConfig::default());
    }

    #[test]
    fn partial_override_keeps_schedule_consistent() {
        let file: ConfigFile =
            serde_json::from_str(r#"{"repetitions": 3, "repetition_spacing_s": 100.0}"#).unwrap();
        let config = merge(file).unwrap();
        assert_eq!(config.constellation.epoch_offsets_s, vec![0.0, 100.0, 200.0]);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = serde_json::from_str::<ConfigFile>(r#"{"vehicle_speed": 5}"#);
        assert!(err.is_err());
    }

    #[test]
    fn schema_version_must_match() {
        let file: ConfigFile = serde_json::from_str(r#"{"schema_version": 99}"#).unwrap();
        assert!(merge(file).is_err());
    }
}
