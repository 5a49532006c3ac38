//! On-disk artifact schemas and writers.
//!
//! Every file carries the schema version: JSON files in a `schema_version`
//! field, CSV files in a leading `#`-comment line. All writers render to
//! bytes deterministically (fixed field order, fixed float formatting), so
//! reruns from the same seed are byte-identical.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use canyonsim_core::analysis::{DelayHistogram, EnvironmentSummary, QuadraticModel};
use canyonsim_core::geometry::CanyonGeometry;
use canyonsim_core::orbits::SatelliteState;
use canyonsim_core::simulate::{EnvironmentRun, ScenarioConfig};
use serde::{Deserialize, Serialize};

use crate::AppError;

pub const SCHEMA_VERSION: u32 = 1;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// `5.0 -> "5"`, `7.5 -> "7.5"`; used in per-environment file names.
pub fn nu_label(nu: f64) -> String {
    format!("{nu}")
}

pub fn events_file_name(nu: f64) -> String {
    format!("events_nu{}.csv", nu_label(nu))
}

pub fn observations_file_name(nu: f64) -> String {
    format!("observations_nu{}.csv", nu_label(nu))
}

pub fn histogram_file_name(nu: f64) -> String {
    format!("histogram_nu{}.csv", nu_label(nu))
}

pub const SUMMARY_FILE: &str = "summary.json";
pub const MODEL_FILE: &str = "model.json";
pub const MANIFEST_FILE: &str = "manifest.json";

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), AppError> {
    std::fs::write(path, bytes)
        .map_err(|e| AppError::io(&format!("writing {}", path.display()), e))
}

// ---------------------------------------------------------------- geometry

/// Geometry snapshot: buildings as footprint corners plus height, meters,
/// at 1e-6 precision.
#[derive(Debug, Serialize, Deserialize)]
pub struct GeometryFile {
    pub schema_version: u32,
    pub params: canyonsim_core::geometry::CanyonParams,
    pub buildings: Vec<BuildingRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BuildingRecord {
    /// Four [x, y] footprint corners, counterclockwise from the minimum.
    pub corners: [[f64; 2]; 4],
    pub height_m: f64,
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

pub fn render_geometry(geometry: &CanyonGeometry) -> Vec<u8> {
    let file = GeometryFile {
        schema_version: SCHEMA_VERSION,
        params: geometry.params,
        buildings: geometry
            .buildings
            .iter()
            .map(|b| BuildingRecord {
                corners: b.footprint_corners().map(|(x, y)| [round6(x), round6(y)]),
                height_m: round6(b.height_m),
            })
            .collect(),
    };
    let mut bytes = serde_json::to_vec_pretty(&file).expect("geometry serializes");
    bytes.push(b'\n');
    bytes
}

pub fn write_geometry(path: &Path, geometry: &CanyonGeometry) -> Result<(), AppError> {
    write_bytes(path, &render_geometry(geometry))
}

// ------------------------------------------------------------------ events

/// Reflection events of one environment, 1e-4 m precision.
pub fn render_events(run: &EnvironmentRun) -> Vec<u8> {
    let mut out = Vec::new();
    writeln!(out, "# canyonsim events schema_version={SCHEMA_VERSION}").unwrap();
    writeln!(out, "epoch_s,sat_id,surface_kind,delay_m,rx_m,ry_m,rz_m,plane_index").unwrap();
    for obs in &run.observations {
        for e in &obs.reflections {
            writeln!(
                out,
                "{:.3},{},{},{:.4},{:.4},{:.4},{:.4},{}",
                e.epoch_s,
                e.sat_id,
                e.surface_kind.as_str(),
                e.delay_m,
                e.point.x,
                e.point.y,
                e.point.z,
                e.plane_index
            )
            .unwrap();
        }
    }
    out
}

/// Minimum delay_m across every data row of an events CSV.
pub fn min_delay_in_events(path: &Path) -> Result<Option<f64>, AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::io(&format!("reading {}", path.display()), e))?;
    let mut min: Option<f64> = None;
    for line in text.lines().skip(2) {
        let delay: f64 = line
            .split(',')
            .nth(3)
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| AppError::Config(format!("malformed events row in {}", path.display())))?;
        min = Some(min.map_or(delay, |m: f64| m.min(delay)));
    }
    Ok(min)
}

// ------------------------------------------------------------ observations

pub fn render_observations(run: &EnvironmentRun) -> Vec<u8> {
    let mut out = Vec::new();
    writeln!(out, "# canyonsim observations schema_version={SCHEMA_VERSION}").unwrap();
    writeln!(out, "repetition,epoch_s,sat_id,elevation_deg,mode,reflection_count").unwrap();
    for obs in &run.observations {
        writeln!(
            out,
            "{},{:.3},{},{:.4},{},{}",
            obs.repetition,
            obs.epoch_s,
            obs.sat_id,
            obs.elevation_deg,
            obs.mode.as_str(),
            obs.reflections.len()
        )
        .unwrap();
    }
    out
}

// -------------------------------------------------------------- satellites

/// Satellite states per epoch: (epoch_s, sat_id, east_m, north_m, up_m,
/// elevation_deg, azimuth_deg).
pub fn render_satellites(rows: &[(f64, SatelliteState)]) -> Vec<u8> {
    let mut out = Vec::new();
    writeln!(out, "# canyonsim satellites schema_version={SCHEMA_VERSION}").unwrap();
    writeln!(out, "epoch_s,sat_id,east_m,north_m,up_m,elevation_deg,azimuth_deg").unwrap();
    for (epoch, s) in rows {
        writeln!(
            out,
            "{:.3},{},{:.3},{:.3},{:.3},{:.6},{:.6}",
            epoch, s.sat_id, s.position_enu.x, s.position_enu.y, s.position_enu.z,
            s.elevation_deg, s.azimuth_deg
        )
        .unwrap();
    }
    out
}

// --------------------------------------------------------------- histogram

pub fn render_histogram(histogram: &DelayHistogram) -> Vec<u8> {
    let mut out = Vec::new();
    writeln!(out, "# canyonsim histogram schema_version={SCHEMA_VERSION}").unwrap();
    writeln!(out, "bin_low_m,bin_high_m,density").unwrap();
    for bin in &histogram.bins {
        writeln!(out, "{:.4},{:.4},{:.9}", bin.lower_m, bin.upper_m, bin.density).unwrap();
    }
    out
}

// ----------------------------------------------------- summary and model

#[derive(Debug, Serialize, Deserialize)]
pub struct SummaryFile {
    pub schema_version: u32,
    pub tool_version: String,
    pub master_seed: u64,
    pub environments: Vec<EnvironmentSummary>,
    /// Absent for sweeps too small to fit the quadratic model.
    pub model: Option<QuadraticModel>,
}

pub fn render_summary(file: &SummaryFile) -> Vec<u8> {
    let mut bytes = serde_json::to_vec(file).expect("summary serializes");
    bytes.push(b'\n');
    bytes
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema_version: u32,
    pub model: Option<QuadraticModel>,
}

pub fn render_model(file: &ModelFile) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(file).expect("model serializes");
    bytes.push(b'\n');
    bytes
}

// ---------------------------------------------------------------- manifest

/// Everything needed to reproduce a sweep bit for bit.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub master_seed: u64,
    pub config: ScenarioConfig,
    pub per_environment_seeds: BTreeMap<String, u64>,
    pub output_paths: BTreeMap<String, String>,
}

pub fn render_manifest(manifest: &RunManifest) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(manifest).expect("manifest serializes");
    bytes.push(b'\n');
    bytes
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, AppError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            AppError::Io(format!("missing artifact: {}", path.display()))
        } else {
            AppError::io(&format!("reading {}", path.display()), e)
        }
    })?;
    serde_json::from_str(&text)
        .map_err(|e| AppError::Config(format!("parsing {}: {e}", path.display())))
}

pub fn check_schema(version: u32, path: &Path) -> Result<(), AppError> {
    if version != SCHEMA_VERSION {
        return Err(AppError::Config(format!(
            "{}: schema_version {version} does not match this tool's {SCHEMA_VERSION}; refusing to verify",
            path.display()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nu_labels_trim_integral_values() {
        assert_eq!(nu_label(5.0), "5");
        assert_eq!(nu_label(7.5), "7.5");
        assert_eq!(events_file_name(60.0), "events_nu60.csv");
    }

    #[test]
    fn geometry_rendering_is_deterministic_and_rounded() {
        let geometry = canyonsim_core::geometry::generate_canyon(
            &canyonsim_core::geometry::CanyonParams::default(),
        )
        .unwrap();
        let a = render_geometry(&geometry);
        let b = render_geometry(&geometry);
        assert_eq!(a, b);
        let parsed: GeometryFile = serde_json::from_slice(&a).unwrap();
        assert_eq!(parsed.schema_version, SCHEMA_VERSION);
        assert_eq!(parsed.buildings.len(), 324);
    }
}
