//! Single-bounce specular ray tracing.
//!
//! For a satellite at `s`, an antenna at `a`, and a bounded plane, the
//! candidate reflection is found by mirroring the antenna through the plane
//! and projecting the satellite-to-mirror segment onto it. A candidate
//! counts only if it falls inside the plane's rectangle, the satellite and
//! antenna sit on the same side of the plane, and both path legs clear the
//! city's buildings. The reflection delay is the extra path length of the
//! bounced route over the direct one.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::{BoundedPlane, Building, CanyonGeometry, SurfaceKind};
use crate::vec3::Vec3;

/// Parametric tolerance for strict-interior segment intersection, so rays
/// grazing a face they start on do not flicker between blocked and clear.
const OCCLUSION_EPS: f64 = 1e-9;

/// One accepted specular reflection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionEvent {
    pub sat_id: u32,
    /// Constellation time of the trace, seconds.
    pub epoch_s: f64,
    /// Reflection point in the local frame, meters.
    pub point: Vec3,
    /// Extra path length versus the direct path, meters.
    pub delay_m: f64,
    /// Index into the scene's reflector list; vehicle planes are appended
    /// after the building planes.
    pub plane_index: usize,
    pub surface_kind: SurfaceKind,
}

/// Mirror image of `antenna` in the plane: a_m = a + 2 n ((p - a) . n).
///
/// The plane normal is unit length by construction, so the (n . n)
/// denominator is omitted.
#[inline]
pub fn mirror_point(antenna: Vec3, plane: &BoundedPlane) -> Vec3 {
    antenna + plane.normal * (2.0 * (plane.point - antenna).dot(plane.normal))
}

/// Candidate specular reflection point of `satellite` -> plane -> `antenna`:
/// r = s + ((p - s) . n) / ((a_m - s) . n) * (a_m - s).
///
/// Returns `None` when the satellite and antenna are not strictly on the
/// same side of the plane (no single-bounce specular path exists), when the
/// mirror ray runs parallel to the plane, or when the projected point falls
/// outside the plane's rectangle.
pub fn reflection_point(satellite: Vec3, antenna: Vec3, plane: &BoundedPlane) -> Option<Vec3> {
    let side_s = plane.signed_distance(satellite);
    let side_a = plane.signed_distance(antenna);
    if side_s * side_a <= 0.0 {
        return None;
    }
    let mirrored = mirror_point(antenna, plane);
    let direction = mirrored - satellite;
    let denom = direction.dot(plane.normal);
    if denom.abs() < 1e-12 {
        return None;
    }
    let t = (plane.point - satellite).dot(plane.normal) / denom;
    let r = satellite + direction * t;
    plane.contains_in_extent(r).then_some(r)
}

/// Reflection delay per the path difference
/// d = |r - s| + |a - r| - |a - s|, clamped at zero against rounding.
///
/// The |r - s| - |a - s| part is evaluated as
/// (r - a) . ((r - s) + (a - s)) / (|r - s| + |a - s|), which is the same
/// quantity without the catastrophic cancellation that the direct
/// difference suffers when the satellite is tens of thousands of
/// kilometers away and the delay is centimeters.
#[inline]
pub fn path_delay(satellite: Vec3, antenna: Vec3, reflection: Vec3) -> f64 {
    let u = reflection - satellite;
    let v = antenna - satellite;
    let denom = u.norm() + v.norm();
    if denom == 0.0 {
        return 0.0;
    }
    let d = (reflection - antenna).dot(u + v) / denom + (antenna - reflection).norm();
    d.max(0.0)
}

/// Whether the open segment `from -> to` strictly intersects any building
/// cuboid (parametric t in (eps, 1 - eps)).
///
/// `ignore_plane` names a reflector plane whose owning building is skipped;
/// used when validating the legs of a reflection off that plane.
pub fn segment_occluded(
    from: Vec3,
    to: Vec3,
    geometry: &CanyonGeometry,
    ignore_plane: Option<usize>,
) -> bool {
    let ignore_building =
        ignore_plane.and_then(|i| geometry.planes.get(i).and_then(|p| p.building));
    let d = to - from;
    geometry.buildings.iter().enumerate().any(|(i, b)| {
        if Some(i) == ignore_building {
            return false;
        }
        segment_hits_building(from, d, b)
    })
}

/// Slab test of a segment against one building's axis-aligned cuboid.
fn segment_hits_building(from: Vec3, d: Vec3, b: &Building) -> bool {
    let mut t_min = OCCLUSION_EPS;
    let mut t_max = 1.0 - OCCLUSION_EPS;

    let axes = [
        (from.x, d.x, b.min.0, b.max.0),
        (from.y, d.y, b.min.1, b.max.1),
        (from.z, d.z, 0.0, b.height_m),
    ];
    for (origin, dir, lo, hi) in axes {
        if dir.abs() < 1e-15 {
            if origin < lo || origin > hi {
                return false;
            }
            continue;
        }
        let inv = 1.0 / dir;
        let (t0, t1) = if inv >= 0.0 {
            ((lo - origin) * inv, (hi - origin) * inv)
        } else {
            ((hi - origin) * inv, (lo - origin) * inv)
        };
        if t0 > t_min {
            t_min = t0;
        }
        if t1 < t_max {
            t_max = t1;
        }
        if t_min > t_max {
            return false;
        }
    }
    true
}

/// Traces one satellite against the whole scene.
///
/// Returns whether the direct line of sight is clear, plus every valid
/// specular reflection: for each reflector (building walls and roofs, then
/// the supplied vehicle planes) the candidate point is kept only if both
/// the satellite-to-reflection and reflection-to-antenna legs are
/// unoccluded, ignoring the reflecting plane itself.
pub fn trace_epoch(
    satellite: &crate::orbits::SatelliteState,
    antenna: Vec3,
    geometry: &CanyonGeometry,
    vehicle_planes: &[BoundedPlane],
    epoch_s: f64,
) -> (bool, Vec<ReflectionEvent>) {
    let s = satellite.position_enu;
    let los_clear = !segment_occluded(s, antenna, geometry, None);

    let mut events = Vec::new();
    let building_planes = geometry.planes.len();
    let all_planes = geometry.planes.iter().chain(vehicle_planes.iter());
    for (index, plane) in all_planes.enumerate() {
        let Some(r) = reflection_point(s, antenna, plane) else {
            continue;
        };
        let ignore = (index < building_planes).then_some(index);
        if segment_occluded(s, r, geometry, ignore) || segment_occluded(r, antenna, geometry, ignore)
        {
            continue;
        }
        events.push(ReflectionEvent {
            sat_id: satellite.sat_id,
            epoch_s,
            point: r,
            delay_m: path_delay(s, antenna, r),
            plane_index: index,
            surface_kind: plane.kind,
        });
    }
    (los_clear, events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate_canyon, CanyonGeometry, CanyonParams};
    use approx::assert_relative_eq;

    fn plane_z0() -> BoundedPlane {
        BoundedPlane {
            point: Vec3::ZERO,
            normal: Vec3::new(0.0, 0.0, 1.0),
            axis_u: Vec3::new(1.0, 0.0, 0.0),
            axis_v: Vec3::new(0.0, 1.0, 0.0),
            u_range: (-100.0, 100.0),
            v_range: (-100.0, 100.0),
            kind: SurfaceKind::BuildingRoof,
            building: None,
        }
    }

    #[test]
    fn mirror_point_planar_cases() {
        let p = plane_z0();
        assert_eq!(mirror_point(Vec3::new(1.0, 2.0, 3.0), &p), Vec3::new(1.0, 2.0, -3.0));

        let px10 = BoundedPlane {
            point: Vec3::new(10.0, 0.0, 0.0),
            normal: Vec3::new(1.0, 0.0, 0.0),
            axis_u: Vec3::new(0.0, 1.0, 0.0),
            axis_v: Vec3::new(0.0, 0.0, 1.0),
            u_range: (-100.0, 100.0),
            v_range: (-100.0, 100.0),
            kind: SurfaceKind::BuildingWall,
            building: None,
        };
        assert_eq!(mirror_point(Vec3::new(4.0, 5.0, 6.0), &px10), Vec3::new(16.0, 5.0, 6.0));

        // a point on the plane is a fixed point
        let on_plane = Vec3::new(3.0, -7.0, 0.0);
        assert_eq!(mirror_point(on_plane, &p), on_plane);
    }

    #[test]
    fn reflection_point_symmetric_and_collinear() {
        let p = plane_z0();
        let r = reflection_point(Vec3::new(0.0, 0.0, 10.0), Vec3::new(4.0, 0.0, 10.0), &p).unwrap();
        assert!(r.distance(Vec3::new(2.0, 0.0, 0.0)) < 1e-12);

        let r = reflection_point(Vec3::new(0.0, 0.0, 10.0), Vec3::new(0.0, 0.0, 2.0), &p).unwrap();
        assert!(r.distance(Vec3::ZERO) < 1e-12);
    }

    #[test]
    fn reflection_point_rejections() {
        let p = plane_z0();
        // opposite sides: no specular single bounce
        assert!(reflection_point(Vec3::new(0.0, 0.0, 10.0), Vec3::new(0.0, 0.0, -2.0), &p).is_none());
        // outside the extent
        let narrow = BoundedPlane { u_range: (-1.0, 1.0), ..plane_z0() };
        assert!(reflection_point(Vec3::new(0.0, 0.0, 10.0), Vec3::new(40.0, 0.0, 10.0), &narrow).is_none());
        // ray parallel to the plane (mirror direction horizontal)
        let vertical = BoundedPlane {
            point: Vec3::new(0.0, 5.0, 0.0),
            normal: Vec3::new(0.0, 1.0, 0.0),
            axis_u: Vec3::new(1.0, 0.0, 0.0),
            axis_v: Vec3::new(0.0, 0.0, 1.0),
            ..plane_z0()
        };
        // antenna on the plane makes the mirror segment parallel-degenerate
        assert!(reflection_point(Vec3::new(0.0, 0.0, 3.0), Vec3::new(0.0, 5.0, 3.0), &vertical).is_none());
    }

    #[test]
    fn reflection_law_holds() {
        let p = plane_z0();
        let s = Vec3::new(-3.0, 2.0, 12.0);
        let a = Vec3::new(5.0, -1.0, 4.0);
        let r = reflection_point(s, a, &p).unwrap();
        let incident = (r - s).normalized().unwrap();
        let reflected = (a - r).normalized().unwrap();
        let cos_in = -incident.dot(p.normal);
        let cos_out = reflected.dot(p.normal);
        assert_relative_eq!(cos_in, cos_out, epsilon = 1e-9);
    }

    #[test]
    fn path_delay_matches_hand_value() {
        // s=(0,0,10), a=(4,0,10), r=(2,0,0): d = 2 sqrt(104) - 4
        let d = path_delay(Vec3::new(0.0, 0.0, 10.0), Vec3::new(4.0, 0.0, 10.0), Vec3::new(2.0, 0.0, 0.0));
        assert_relative_eq!(d, 2.0 * 104.0f64.sqrt() - 4.0, epsilon = 1e-12);
        assert_relative_eq!(d, 16.396078054371138, epsilon = 1e-9);
    }

    #[test]
    fn path_delay_degenerate_and_nonnegative() {
        let s = Vec3::new(0.0, 0.0, 10.0);
        let a = Vec3::new(4.0, 0.0, 2.0);
        let mid = (s + a) * 0.5;
        assert!(path_delay(s, a, mid) < 1e-12);

        let mut rng = crate::simulate::seeded_rng(5);
        use rand::Rng;
        for _ in 0..10_000 {
            let rv = |rng: &mut rand_chacha::ChaCha8Rng| {
                Vec3::new(rng.gen_range(-1e4..1e4), rng.gen_range(-1e4..1e4), rng.gen_range(-1e4..1e4))
            };
            let (s, a, r) = (rv(&mut rng), rv(&mut rng), rv(&mut rng));
            assert!(path_delay(s, a, r) >= 0.0);
        }
    }

    fn default_city() -> CanyonGeometry {
        generate_canyon(&CanyonParams::default()).unwrap()
    }

    #[test]
    fn zenith_ray_up_open_street_is_clear() {
        let geom = default_city();
        let antenna = Vec3::new(0.0, -140.0, 1.51); // mid-road south of the central block
        let sat = antenna + Vec3::new(0.0, 0.0, 2e7);
        assert!(!segment_occluded(sat, antenna, &geom, None));
    }

    #[test]
    fn low_satellite_across_street_is_blocked() {
        let geom = default_city();
        // antenna mid-street; satellite 5 degrees above the horizon, due
        // north (perpendicular to the east-west street axis): over the 15 m
        // to the wall the ray climbs ~1.3 m, far below the buildings.
        let antenna = Vec3::new(0.0, -140.0, 1.51);
        let elev = 5.0f64.to_radians();
        let dir = Vec3::new(0.0, elev.cos(), elev.sin());
        let sat = antenna + dir * 2e7;
        assert!(segment_occluded(sat, antenna, &geom, None));
    }

    #[test]
    fn tiny_segment_in_open_street_is_clear() {
        let geom = default_city();
        let a = Vec3::new(0.0, -140.0, 1.51);
        let b = a + Vec3::new(1e-9, 0.0, 0.0);
        assert!(!segment_occluded(a, b, &geom, None));
    }

    #[test]
    fn occlusion_is_symmetric() {
        let geom = default_city();
        let mut rng = crate::simulate::seeded_rng(6);
        use rand::Rng;
        for _ in 0..500 {
            let a = Vec3::new(rng.gen_range(-400.0..400.0), rng.gen_range(-400.0..400.0), rng.gen_range(0.1..60.0));
            let b = Vec3::new(rng.gen_range(-400.0..400.0), rng.gen_range(-400.0..400.0), rng.gen_range(0.1..60.0));
            assert_eq!(
                segment_occluded(a, b, &geom, None),
                segment_occluded(b, a, &geom, None)
            );
        }
    }

    #[test]
    fn trace_epoch_single_wall_toy_scene() {
        // one infinite-ish wall, the symmetric mirror example: expect
        // exactly one reflection with the hand-computed delay
        let wall = BoundedPlane {
            point: Vec3::ZERO,
            normal: Vec3::new(0.0, 0.0, 1.0),
            axis_u: Vec3::new(1.0, 0.0, 0.0),
            axis_v: Vec3::new(0.0, 1.0, 0.0),
            u_range: (-1e4, 1e4),
            v_range: (-1e4, 1e4),
            kind: SurfaceKind::BuildingWall,
            building: None,
        };
        let geom = CanyonGeometry {
            params: CanyonParams::default(),
            buildings: alloc::vec::Vec::new(),
            planes: alloc::vec![wall],
        };
        let sat = crate::orbits::SatelliteState {
            sat_id: 1,
            position_enu: Vec3::new(0.0, 0.0, 10.0),
            elevation_deg: 45.0,
            azimuth_deg: 0.0,
        };
        let (clear, events) = trace_epoch(&sat, Vec3::new(4.0, 0.0, 10.0), &geom, &[], 0.0);
        assert!(clear);
        assert_eq!(events.len(), 1);
        assert_relative_eq!(events[0].delay_m, 16.396078054371138, epsilon = 1e-9);
        assert_eq!(events[0].surface_kind, SurfaceKind::BuildingWall);
    }

    #[test]
    fn trace_epoch_vehicle_roof_zenith_bounce() {
        // empty city, vehicle roof 1 cm below the antenna, satellite at
        // zenith: exactly one sub-2-cm roof reflection
        let geom = CanyonGeometry::empty(CanyonParams::default());
        let antenna = Vec3::new(0.0, -140.0, 1.51);
        let roof = BoundedPlane {
            point: Vec3::new(0.0, -140.0, 1.5),
            normal: Vec3::new(0.0, 0.0, 1.0),
            axis_u: Vec3::new(1.0, 0.0, 0.0),
            axis_v: Vec3::new(0.0, 1.0, 0.0),
            u_range: (-1.0, 1.0),
            v_range: (-1.0, 1.0),
            kind: SurfaceKind::VehicleRoof,
            building: None,
        };
        let sat = crate::orbits::SatelliteState {
            sat_id: 7,
            position_enu: antenna + Vec3::new(0.0, 0.0, 2.02e7),
            elevation_deg: 90.0,
            azimuth_deg: 0.0,
        };
        let (clear, events) = trace_epoch(&sat, antenna, &geom, &[roof], 3.0);
        assert!(clear);
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].surface_kind, SurfaceKind::VehicleRoof);
        assert!(events[0].delay_m <= 0.02 + 1e-9, "delay {}", events[0].delay_m);
        assert!(events[0].delay_m > 0.019, "delay {}", events[0].delay_m);
    }

    #[test]
    fn mirror_involution_on_random_planes() {
        let mut rng = crate::simulate::seeded_rng(11);
        use rand::Rng;
        for _ in 0..10_000 {
            let n = loop {
                let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                if let Some(u) = v.normalized() {
                    break u;
                }
            };
            let axis_u = n
                .cross(if n.x.abs() < 0.9 { Vec3::new(1.0, 0.0, 0.0) } else { Vec3::new(0.0, 1.0, 0.0) })
                .normalized()
                .unwrap();
            let plane = BoundedPlane {
                point: Vec3::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)),
                normal: n,
                axis_u,
                axis_v: n.cross(axis_u),
                u_range: (-10.0, 10.0),
                v_range: (-10.0, 10.0),
                kind: SurfaceKind::BuildingWall,
                building: None,
            };
            let a = Vec3::new(rng.gen_range(-100.0..100.0), rng.gen_range(-100.0..100.0), rng.gen_range(-100.0..100.0));
            let twice = mirror_point(mirror_point(a, &plane), &plane);
            assert!(twice.distance(a) < 1e-12 * a.norm().max(1.0) + 1e-12);
        }
    }
}
