//! Experiment orchestration: the vehicle loop, time stepping, repetitions,
//! the multi-environment sweep, and reception-mode classification.
//!
//! One environment run drives the vehicle once around the central block
//! while tracing every visible satellite once per sample period, repeats
//! the drive at each constellation-time offset, drops reflections below
//! the small-delay threshold, and classifies each (epoch, satellite) pair
//! into one of four reception modes.

use alloc::format;
use alloc::vec::Vec;

// resolves float math through libm in the no_std build
#[allow(unused_imports)]
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    generate_canyon, BoundedPlane, CanyonGeometry, CanyonParams, SurfaceKind,
};
use crate::orbits::{satellite_states, ConstellationConfig};
use crate::raytrace::{trace_epoch, ReflectionEvent};
use crate::vec3::Vec3;

/// Full scenario description with the reference defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    /// City parameters. `rice_nu_m` is replaced per environment during a
    /// sweep; `rng_seed` acts as the master seed from which every
    /// per-environment seed is derived.
    pub canyon: CanyonParams,
    pub constellation: ConstellationConfig,
    /// Vehicle speed, m/s.
    pub vehicle_speed_mps: f64,
    /// Vehicle length, width, height, meters.
    pub vehicle_dims_m: (f64, f64, f64),
    /// Antenna height above the vehicle roof, meters.
    pub antenna_offset_delta_m: f64,
    /// Drive duration, seconds (one full loop).
    pub duration_s: f64,
    /// Sampling period, seconds.
    pub sample_period_s: f64,
    /// Number of fast-forwarded repetitions of the drive.
    pub repetitions: u32,
    /// Constellation-time spacing between repetitions, seconds.
    pub repetition_spacing_s: f64,
    /// Reflections with delay below this threshold are dropped before
    /// classification and analysis, meters. The default is twice the
    /// antenna offset: the vehicle-roof bounce has delay
    /// 2 * delta * sin(elevation) <= 2 * delta, so this removes every
    /// sub-roof-bounce event while leaving building reflections untouched.
    pub min_delay_filter_m: f64,
    /// Rice non-centrality values of the environment sweep, meters.
    pub nu_sweep_m: Vec<f64>,
    /// Loop corner (0..4, counterclockwise from the south-west corner)
    /// where the drive starts.
    pub start_corner: u8,
    /// Satellites at or below this elevation are skipped by the tracer,
    /// degrees. The 15-degree mask of the visibility census is separate
    /// and applies to the census only.
    pub trace_elevation_mask_deg: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            canyon: CanyonParams::default(),
            constellation: ConstellationConfig::default(),
            vehicle_speed_mps: 5.0,
            vehicle_dims_m: (2.0, 2.0, 1.5),
            antenna_offset_delta_m: 0.01,
            duration_s: 224.0,
            sample_period_s: 1.0,
            repetitions: 6,
            repetition_spacing_s: 7200.0,
            min_delay_filter_m: 0.02,
            nu_sweep_m: (1..=12).map(|k| 5.0 * k as f64).collect(),
            start_corner: 0,
            trace_elevation_mask_deg: 0.0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.canyon.validate()?;
        self.constellation.validate()?;
        let positive = [
            (self.vehicle_speed_mps, "vehicle_speed_mps"),
            (self.vehicle_dims_m.0, "vehicle length"),
            (self.vehicle_dims_m.1, "vehicle width"),
            (self.vehicle_dims_m.2, "vehicle height"),
            (self.duration_s, "duration_s"),
            (self.sample_period_s, "sample_period_s"),
            (self.repetition_spacing_s, "repetition_spacing_s"),
        ];
        for (v, name) in positive {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        for (v, name) in [
            (self.antenna_offset_delta_m, "antenna_offset_delta_m"),
            (self.min_delay_filter_m, "min_delay_filter_m"),
            (self.trace_elevation_mask_deg, "trace_elevation_mask_deg"),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be non-negative, got {v}"
                )));
            }
        }
        if self.repetitions < 1 {
            return Err(Error::InvalidParameter("repetitions must be >= 1".into()));
        }
        if self.start_corner > 3 {
            return Err(Error::InvalidParameter("start_corner must be in 0..4".into()));
        }
        let perimeter = 4.0 * self.loop_side_m();
        let driven = self.duration_s * self.vehicle_speed_mps;
        if (driven - perimeter).abs() > 1e-6 {
            return Err(Error::InvalidParameter(format!(
                "duration x speed ({driven} m) must equal the loop perimeter ({perimeter} m)"
            )));
        }
        if self.nu_sweep_m.is_empty() {
            return Err(Error::InvalidParameter("nu_sweep_m must not be empty".into()));
        }
        if self.nu_sweep_m.iter().any(|nu| !nu.is_finite() || *nu <= 0.0) {
            return Err(Error::InvalidParameter("nu_sweep_m values must be positive".into()));
        }
        let spacing_ok = self.constellation.epoch_offsets_s.len() == self.repetitions as usize
            && self
                .constellation
                .epoch_offsets_s
                .iter()
                .enumerate()
                .all(|(k, off)| (off - k as f64 * self.repetition_spacing_s).abs() < 1e-9);
        if !spacing_ok {
            return Err(Error::InvalidParameter(
                "constellation.epoch_offsets_s must equal k * repetition_spacing_s for k in 0..repetitions"
                    .into(),
            ));
        }
        Ok(())
    }

    /// Side length of the rectangular drive loop (road midline to road
    /// midline around the central block).
    pub fn loop_side_m(&self) -> f64 {
        self.canyon.block_side_m + self.canyon.road_width_m
    }

    /// Antenna height above ground, meters.
    pub fn antenna_height_m(&self) -> f64 {
        self.vehicle_dims_m.2 + self.antenna_offset_delta_m
    }

    /// Number of samples per repetition (t = 0, period, ... < duration).
    pub fn epochs_per_repetition(&self) -> usize {
        (self.duration_s / self.sample_period_s).round() as usize
    }
}

/// How one satellite arrived at one epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReceptionMode {
    /// Direct signal only.
    Splos,
    /// Direct signal plus at least one reflection.
    Mp,
    /// Reflections only; direct path blocked.
    Nlos,
    /// Nothing received.
    Blocked,
}

impl ReceptionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ReceptionMode::Splos => "SPLOS",
            ReceptionMode::Mp => "MP",
            ReceptionMode::Nlos => "NLOS",
            ReceptionMode::Blocked => "BLOCKED",
        }
    }

    /// Whether any signal (direct or reflected) is received.
    pub fn is_received(self) -> bool {
        !matches!(self, ReceptionMode::Blocked)
    }

    fn classify(los_clear: bool, has_reflections: bool) -> Self {
        match (los_clear, has_reflections) {
            (true, false) => ReceptionMode::Splos,
            (true, true) => ReceptionMode::Mp,
            (false, true) => ReceptionMode::Nlos,
            (false, false) => ReceptionMode::Blocked,
        }
    }
}

/// Classification of one satellite at one epoch, with its retained
/// reflections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochObservation {
    /// Drive time within the repetition, seconds.
    pub epoch_s: f64,
    pub repetition: u32,
    pub sat_id: u32,
    pub mode: ReceptionMode,
    pub reflections: Vec<ReflectionEvent>,
    pub elevation_deg: f64,
}

/// One environment of a sweep: its Rice parameter, derived seed, and the
/// full observation stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentRun {
    pub nu_h_m: f64,
    /// Analytic mean building height for this environment, meters.
    pub mu_h_m: f64,
    pub seed: u64,
    pub observations: Vec<EpochObservation>,
}

/// SplitMix64 step; the standard 64-bit mixer.
fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-environment seed: a SplitMix64 hash of the master seed and the
/// environment's Rice parameter, so environments are independent,
/// reproducible, and invariant to sweep order.
pub fn derive_env_seed(master_seed: u64, nu_h_m: f64) -> u64 {
    splitmix64(splitmix64(master_seed) ^ nu_h_m.to_bits())
}

/// The crate-wide deterministic generator, seeded portably from a u64.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Vehicle ground-center position and heading at drive time `t`.
///
/// The vehicle runs counterclockwise around the central block on the road
/// midlines: a square loop of side `block_side + road_width`, corners
/// traversed as instantaneous heading changes. Heading is radians
/// counterclockwise from East.
pub fn vehicle_position(t: f64, config: &ScenarioConfig) -> Result<(Vec3, f64)> {
    if !(0.0..=config.duration_s).contains(&t) {
        return Err(Error::InvalidParameter(format!(
            "t = {t} outside the drive interval [0, {}]",
            config.duration_s
        )));
    }
    let side = config.loop_side_m();
    let half = side / 2.0;
    let perimeter = 4.0 * side;
    let mut s = config.vehicle_speed_mps * t + config.start_corner as f64 * side;
    s %= perimeter;

    let leg = (s / side) as usize; // 0..4; s == perimeter already wrapped
    let along = s - leg as f64 * side;
    let (pos, heading) = match leg {
        0 => (Vec3::new(-half + along, -half, 0.0), 0.0),
        1 => (Vec3::new(half, -half + along, 0.0), core::f64::consts::FRAC_PI_2),
        2 => (Vec3::new(half - along, half, 0.0), core::f64::consts::PI),
        _ => (Vec3::new(-half, half - along, 0.0), -core::f64::consts::FRAC_PI_2),
    };
    Ok((pos, heading))
}

/// Antenna position at drive time `t`: vehicle roof center plus the antenna
/// offset.
pub fn antenna_position(t: f64, config: &ScenarioConfig) -> Result<Vec3> {
    let (pos, _) = vehicle_position(t, config)?;
    Ok(pos + Vec3::new(0.0, 0.0, config.antenna_height_m()))
}

/// The vehicle-roof reflector at the given pose.
pub fn vehicle_roof_plane(position: Vec3, heading_rad: f64, config: &ScenarioConfig) -> BoundedPlane {
    let (length, width, height) = config.vehicle_dims_m;
    let (sin_h, cos_h) = (heading_rad.sin(), heading_rad.cos());
    BoundedPlane {
        point: position + Vec3::new(0.0, 0.0, height),
        normal: Vec3::new(0.0, 0.0, 1.0),
        axis_u: Vec3::new(cos_h, sin_h, 0.0),
        axis_v: Vec3::new(-sin_h, cos_h, 0.0),
        u_range: (-length / 2.0, length / 2.0),
        v_range: (-width / 2.0, width / 2.0),
        kind: SurfaceKind::VehicleRoof,
        building: None,
    }
}

/// Runs one environment with a freshly generated city for `nu_h_m`.
pub fn run_environment(config: &ScenarioConfig, nu_h_m: f64) -> Result<EnvironmentRun> {
    config.validate()?;
    if !nu_h_m.is_finite() || nu_h_m <= 0.0 {
        return Err(Error::InvalidParameter(format!("nu_h must be positive, got {nu_h_m}")));
    }
    let seed = derive_env_seed(config.canyon.rng_seed, nu_h_m);
    let params = CanyonParams { rice_nu_m: nu_h_m, rng_seed: seed, ..config.canyon };
    let geometry = generate_canyon(&params)?;
    run_environment_with_geometry(config, nu_h_m, &geometry)
}

/// Runs one environment against a caller-supplied city (diagnostics and
/// degenerate-scene tests use this to override the geometry).
pub fn run_environment_with_geometry(
    config: &ScenarioConfig,
    nu_h_m: f64,
    geometry: &CanyonGeometry,
) -> Result<EnvironmentRun> {
    config.validate()?;
    let epochs = config.epochs_per_repetition();
    let mut observations = Vec::new();

    for repetition in 0..config.repetitions {
        let offset = repetition as f64 * config.repetition_spacing_s;
        for i in 0..epochs {
            let t = i as f64 * config.sample_period_s;
            let (vehicle_pos, heading) = vehicle_position(t, config)?;
            let antenna = vehicle_pos + Vec3::new(0.0, 0.0, config.antenna_height_m());
            let roof = vehicle_roof_plane(vehicle_pos, heading, config);
            let constellation_time = offset + t;

            for sat in satellite_states(&config.constellation, constellation_time, antenna)? {
                if sat.elevation_deg <= config.trace_elevation_mask_deg {
                    continue;
                }
                let (los_clear, mut reflections) =
                    trace_epoch(&sat, antenna, geometry, core::slice::from_ref(&roof), constellation_time);
                // small-delay exclusion happens before classification
                reflections.retain(|e| e.delay_m >= config.min_delay_filter_m);
                let mode = ReceptionMode::classify(los_clear, !reflections.is_empty());
                observations.push(EpochObservation {
                    epoch_s: t,
                    repetition,
                    sat_id: sat.sat_id,
                    mode,
                    reflections,
                    elevation_deg: sat.elevation_deg,
                });
            }
        }
    }

    Ok(EnvironmentRun {
        nu_h_m,
        mu_h_m: crate::geometry::rice_mean(nu_h_m, config.canyon.rice_sigma_m)?,
        seed: derive_env_seed(config.canyon.rng_seed, nu_h_m),
        observations,
    })
}

/// Runs every environment of the configured sweep, in sweep order.
///
/// Each environment derives its own seed from the master seed and its Rice
/// parameter, so results per environment do not depend on sweep order or
/// on which other environments run.
pub fn run_sweep(config: &ScenarioConfig) -> Result<Vec<EnvironmentRun>> {
    config.validate()?;
    config.nu_sweep_m.iter().map(|nu| run_environment(config, *nu)).collect()
}
