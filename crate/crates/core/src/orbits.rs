//! Nominal GPS constellation propagation and the local-frame bridge.
//!
//! The constellation is synthetic: circular orbits at the GPS semi-major
//! axis on six equally spaced planes, with the orbital period locked to
//! exactly half a sidereal day (the 2:1 resonance that makes satellite
//! geometry repeat after ~12 hours). Satellite slots are spread
//! near-uniformly in phase within each plane, with a fixed per-plane
//! stagger. Positions come out in an Earth-fixed frame and are mapped into
//! the simulation's local East-North-Up frame over a spherical Earth.

use alloc::format;
use alloc::vec::Vec;

// resolves float math through libm in the no_std build
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vec3::Vec3;

/// Spherical Earth radius, meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Earth rotation rate, rad/s.
pub const EARTH_ROTATION_RAD_PER_S: f64 = 7.292_115_9e-5;

/// Orbital period: half a sidereal day, seconds (~43082 s).
///
/// Locking the period to the rotation rate instead of deriving it from a
/// gravitational parameter builds the 12-hour ground-track repeat directly
/// into the model.
pub fn orbital_period_s() -> f64 {
    core::f64::consts::PI / EARTH_ROTATION_RAD_PER_S
}

/// Constellation and observer parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstellationConfig {
    pub satellite_count: u32,
    pub semi_major_axis_m: f64,
    pub inclination_deg: f64,
    pub plane_count: u32,
    /// Constellation-time offsets of the scenario repetitions, seconds.
    pub epoch_offsets_s: Vec<f64>,
    pub observer_latitude_deg: f64,
    pub observer_longitude_deg: f64,
}

impl Default for ConstellationConfig {
    fn default() -> Self {
        Self {
            satellite_count: 31,
            semi_major_axis_m: 26_559_700.0,
            inclination_deg: 55.0,
            plane_count: 6,
            epoch_offsets_s: (0..6).map(|k| k as f64 * 7200.0).collect(),
            observer_latitude_deg: 40.0,
            observer_longitude_deg: -70.0,
        }
    }
}

impl ConstellationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.satellite_count < 1 {
            return Err(Error::InvalidParameter("satellite_count must be >= 1".into()));
        }
        if self.plane_count < 1 {
            return Err(Error::InvalidParameter("plane_count must be >= 1".into()));
        }
        if !(self.inclination_deg > 0.0 && self.inclination_deg <= 90.0) {
            return Err(Error::InvalidParameter(format!(
                "inclination_deg must be in (0, 90], got {}",
                self.inclination_deg
            )));
        }
        if !(self.semi_major_axis_m > EARTH_RADIUS_M) {
            return Err(Error::InvalidParameter(format!(
                "semi_major_axis_m must exceed the Earth radius, got {}",
                self.semi_major_axis_m
            )));
        }
        if !(-90.0..=90.0).contains(&self.observer_latitude_deg) {
            return Err(Error::InvalidParameter(format!(
                "observer_latitude_deg must be in [-90, 90], got {}",
                self.observer_latitude_deg
            )));
        }
        if self.epoch_offsets_s.is_empty() {
            return Err(Error::InvalidParameter("epoch_offsets_s must not be empty".into()));
        }
        Ok(())
    }

    pub fn observer(&self) -> Observer {
        Observer {
            latitude_deg: self.observer_latitude_deg,
            longitude_deg: self.observer_longitude_deg,
            height_m: 0.0,
        }
    }
}

/// One satellite slot: orbital plane orientation plus in-plane phase at t=0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitSlot {
    pub plane: u32,
    pub raan_rad: f64,
    pub phase0_rad: f64,
}

/// Slot assignment: satellites are distributed over the planes as evenly as
/// possible (31 over 6 planes puts the extra slot on plane 0), spaced
/// uniformly in phase within each plane, and staggered between planes by
/// one slot-fraction of a full turn per plane index.
pub fn constellation_slots(config: &ConstellationConfig) -> Vec<OrbitSlot> {
    let planes = config.plane_count;
    let count = config.satellite_count;
    let base = count / planes;
    let extra = count % planes;
    let tau = core::f64::consts::TAU;

    let mut slots = Vec::with_capacity(count as usize);
    for plane in 0..planes {
        let in_plane = base + u32::from(plane < extra);
        let raan = tau * plane as f64 / planes as f64;
        let stagger = tau * plane as f64 / count as f64;
        for s in 0..in_plane {
            slots.push(OrbitSlot {
                plane,
                raan_rad: raan,
                phase0_rad: stagger + tau * s as f64 / in_plane as f64,
            });
        }
    }
    slots
}

/// Earth-fixed satellite positions at `time_since_epoch_s`.
///
/// Circular orbits: argument of latitude advances at 2x the Earth rotation
/// rate; the inertial position is then rotated by the elapsed Earth
/// rotation into the Earth-fixed frame (the two frames coincide at t = 0).
pub fn propagate_constellation(
    config: &ConstellationConfig,
    time_since_epoch_s: f64,
) -> Vec<Vec3> {
    let r = config.semi_major_axis_m;
    let inc = config.inclination_deg.to_radians();
    let (sin_i, cos_i) = (inc.sin(), inc.cos());
    let mean_motion = 2.0 * EARTH_ROTATION_RAD_PER_S;
    let earth_angle = EARTH_ROTATION_RAD_PER_S * time_since_epoch_s;
    let (sin_e, cos_e) = (earth_angle.sin(), earth_angle.cos());

    constellation_slots(config)
        .iter()
        .map(|slot| {
            let u = slot.phase0_rad + mean_motion * time_since_epoch_s;
            let (sin_u, cos_u) = (u.sin(), u.cos());
            let (sin_o, cos_o) = (slot.raan_rad.sin(), slot.raan_rad.cos());
            // inertial position from (RAAN, inclination, argument of latitude)
            let xi = r * (cos_o * cos_u - sin_o * cos_i * sin_u);
            let yi = r * (sin_o * cos_u + cos_o * cos_i * sin_u);
            let zi = r * (sin_i * sin_u);
            // inertial -> Earth-fixed
            Vec3::new(xi * cos_e + yi * sin_e, -xi * sin_e + yi * cos_e, zi)
        })
        .collect()
}

/// A ground site on the spherical Earth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observer {
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    pub height_m: f64,
}

impl Observer {
    pub fn to_ecef(&self) -> Vec3 {
        let lat = self.latitude_deg.to_radians();
        let lon = self.longitude_deg.to_radians();
        let r = EARTH_RADIUS_M + self.height_m;
        Vec3::new(r * lat.cos() * lon.cos(), r * lat.cos() * lon.sin(), r * lat.sin())
    }
}

/// Earth-fixed -> local East-North-Up at `observer`.
pub fn to_local_enu(ecef: Vec3, observer: &Observer) -> Vec3 {
    let lat = observer.latitude_deg.to_radians();
    let lon = observer.longitude_deg.to_radians();
    let (sin_lat, cos_lat) = (lat.sin(), lat.cos());
    let (sin_lon, cos_lon) = (lon.sin(), lon.cos());
    let d = ecef - observer.to_ecef();
    Vec3::new(
        -sin_lon * d.x + cos_lon * d.y,
        -sin_lat * cos_lon * d.x - sin_lat * sin_lon * d.y + cos_lat * d.z,
        cos_lat * cos_lon * d.x + cos_lat * sin_lon * d.y + sin_lat * d.z,
    )
}

/// Local East-North-Up at `observer` -> Earth-fixed (inverse of
/// [`to_local_enu`]).
pub fn enu_to_ecef(enu: Vec3, observer: &Observer) -> Vec3 {
    let lat = observer.latitude_deg.to_radians();
    let lon = observer.longitude_deg.to_radians();
    let (sin_lat, cos_lat) = (lat.sin(), lat.cos());
    let (sin_lon, cos_lon) = (lon.sin(), lon.cos());
    let d = Vec3::new(
        -sin_lon * enu.x - sin_lat * cos_lon * enu.y + cos_lat * cos_lon * enu.z,
        cos_lon * enu.x - sin_lat * sin_lon * enu.y + cos_lat * sin_lon * enu.z,
        cos_lat * enu.y + sin_lat * enu.z,
    );
    d + observer.to_ecef()
}

/// A satellite as seen from the antenna, in the local frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SatelliteState {
    /// 1-based satellite id.
    pub sat_id: u32,
    /// Position in local East-North-Up coordinates, meters.
    pub position_enu: Vec3,
    pub elevation_deg: f64,
    pub azimuth_deg: f64,
}

/// Elevation (above horizon) and azimuth (clockwise from North), degrees.
pub fn elevation_azimuth(satellite_enu: Vec3, antenna_enu: Vec3) -> Result<(f64, f64)> {
    let v = satellite_enu - antenna_enu;
    let range = v.norm();
    if range <= 0.0 || !range.is_finite() {
        return Err(Error::DegenerateGeometry(
            "satellite and antenna positions coincide".into(),
        ));
    }
    let elevation = (v.z / range).asin().to_degrees();
    let mut azimuth = v.x.atan2(v.y).to_degrees();
    if azimuth < 0.0 {
        azimuth += 360.0;
    }
    if azimuth >= 360.0 {
        azimuth -= 360.0;
    }
    Ok((elevation, azimuth))
}

/// All satellites at one constellation epoch, expressed relative to the
/// given antenna position.
pub fn satellite_states(
    config: &ConstellationConfig,
    time_since_epoch_s: f64,
    antenna_enu: Vec3,
) -> Result<Vec<SatelliteState>> {
    let observer = config.observer();
    propagate_constellation(config, time_since_epoch_s)
        .into_iter()
        .enumerate()
        .map(|(i, ecef)| {
            let position_enu = to_local_enu(ecef, &observer);
            let (elevation_deg, azimuth_deg) = elevation_azimuth(position_enu, antenna_enu)?;
            Ok(SatelliteState { sat_id: i as u32 + 1, position_enu, elevation_deg, azimuth_deg })
        })
        .collect()
}

/// Mean number of satellites above the elevation mask, averaged over every
/// sample of every repetition offset, ignoring all geometry.
///
/// This is the open-sky visibility census: what the receiver would see with
/// no buildings. Samples run at `t = 0, step, ...` strictly below
/// `duration_s`, matching the simulation's epoch grid.
pub fn mean_open_sky_count(
    config: &ConstellationConfig,
    mask_deg: f64,
    duration_s: f64,
    step_s: f64,
) -> Result<f64> {
    config.validate()?;
    if !(0.0..90.0).contains(&mask_deg) {
        return Err(Error::InvalidParameter(format!(
            "elevation mask must be in [0, 90), got {mask_deg}"
        )));
    }
    if step_s <= 0.0 || duration_s <= 0.0 {
        return Err(Error::InvalidParameter("duration and step must be positive".into()));
    }
    let samples = (duration_s / step_s).round() as u64;
    let antenna = Vec3::ZERO;
    let mut total = 0u64;
    let mut epochs = 0u64;
    for offset in &config.epoch_offsets_s {
        for k in 0..samples {
            let t = offset + k as f64 * step_s;
            let visible = satellite_states(config, t, antenna)?
                .iter()
                .filter(|s| s.elevation_deg > mask_deg)
                .count();
            total += visible as u64;
            epochs += 1;
        }
    }
    Ok(total as f64 / epochs as f64)
}
