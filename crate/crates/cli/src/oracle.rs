//! Independent numerical oracles used by the verification command.
//!
//! These are deliberately NOT the code paths they check: the Rice mean is
//! recomputed by quadrature of the density (Bessel factor via trapezoidal
//! integration of its integral representation), and reflection points are
//! checked against brute-force minimal-path grid search. Keeping them in
//! product code lets `canyonsim verify` replay the checks at runtime.

use std::f64::consts::PI;

use canyonsim_core::geometry::{BoundedPlane, SurfaceKind};
use canyonsim_core::raytrace::{mirror_point, path_delay, reflection_point};
use canyonsim_core::simulate::seeded_rng;
use canyonsim_core::Vec3;
use rand::Rng;

/// e^-y I_0(y) = (1/pi) int_0^pi exp(y (cos t - 1)) dt by trapezoid;
/// spectrally accurate on the periodic integrand.
fn bessel_i0_scaled_quadrature(y: f64) -> f64 {
    let n = 4096usize;
    let mut sum = 0.0;
    for k in 0..=n {
        let t = PI * k as f64 / n as f64;
        let w = if k == 0 || k == n { 0.5 } else { 1.0 };
        sum += w * (y * (t.cos() - 1.0)).exp();
    }
    sum / n as f64
}

fn rice_x_pdf(x: f64, nu: f64, sigma: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let s2 = sigma * sigma;
    let gauss = (-(x - nu) * (x - nu) / (2.0 * s2)).exp();
    x * x / s2 * gauss * bessel_i0_scaled_quadrature(x * nu / s2)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = (a + b) / 2.0;
    let lm = (a + m) / 2.0;
    let rm = (m + b) / 2.0;
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        left + right + (left + right - whole) / 15.0
    } else {
        adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
}

/// Rice mean by adaptive quadrature of x * pdf(x), pre-split into panels so
/// a narrow density peak cannot slip between probe nodes.
pub fn rice_mean_quadrature(nu: f64, sigma: f64) -> f64 {
    let f = |x: f64| rice_x_pdf(x, nu, sigma);
    let lo = (nu - 14.0 * sigma).max(0.0);
    let hi = nu + 14.0 * sigma;
    let panels = 32;
    let mut total = 0.0;
    for k in 0..panels {
        let a = lo + (hi - lo) * k as f64 / panels as f64;
        let b = lo + (hi - lo) * (k + 1) as f64 / panels as f64;
        let m = (a + b) / 2.0;
        let (fa, fm, fb) = (f(a), f(m), f(b));
        let whole = simpson(a, b, fa, fm, fb);
        total += adaptive_simpson(&f, a, b, fa, fm, fb, whole, 1e-13 * (nu + sigma), 40);
    }
    total
}

fn random_plane<R: Rng>(rng: &mut R) -> BoundedPlane {
    let normal = loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        if let Some(u) = v.normalized() {
            break u;
        }
    };
    let helper =
        if normal.x.abs() < 0.9 { Vec3::new(1.0, 0.0, 0.0) } else { Vec3::new(0.0, 1.0, 0.0) };
    let axis_u = normal.cross(helper).normalized().unwrap();
    let axis_v = normal.cross(axis_u);
    let hu = rng.gen_range(5.0..40.0);
    let hv = rng.gen_range(5.0..40.0);
    BoundedPlane {
        point: Vec3::new(
            rng.gen_range(-50.0..50.0),
            rng.gen_range(-50.0..50.0),
            rng.gen_range(-50.0..50.0),
        ),
        normal,
        axis_u,
        axis_v,
        u_range: (-hu, hu),
        v_range: (-hv, hv),
        kind: SurfaceKind::BuildingWall,
        building: None,
    }
}

fn point_off_plane<R: Rng>(rng: &mut R, plane: &BoundedPlane, h: f64) -> Vec3 {
    plane.point
        + plane.normal * h
        + plane.axis_u * rng.gen_range(plane.u_range.0..plane.u_range.1)
        + plane.axis_v * rng.gen_range(plane.v_range.0..plane.v_range.1)
}

/// Runs `configs` random reflection set-ups through the minimal-path grid
/// oracle (refined once); returns the failure count.
pub fn grid_oracle_failures(configs: usize, seed: u64) -> usize {
    let mut rng = seeded_rng(seed);
    let mut failures = 0usize;
    let mut accepted = 0usize;
    while accepted < configs {
        let plane = random_plane(&mut rng);
        let h_s = rng.gen_range(20.0..200.0);
        let h_a = rng.gen_range(1.0..50.0);
        let s = point_off_plane(&mut rng, &plane, h_s);
        let a = point_off_plane(&mut rng, &plane, h_a);
        let Some(r) = reflection_point(s, a, &plane) else {
            continue;
        };
        accepted += 1;

        let path = |u: f64, v: f64| {
            let x = plane.point + plane.axis_u * u + plane.axis_v * v;
            (x - s).norm() + (a - x).norm()
        };
        let n = 200usize;
        let coarse = |lo_u: f64, hi_u: f64, lo_v: f64, hi_v: f64| {
            let mut best = (f64::INFINITY, 0.0, 0.0);
            for i in 0..=n {
                let u = lo_u + (hi_u - lo_u) * i as f64 / n as f64;
                for j in 0..=n {
                    let v = lo_v + (hi_v - lo_v) * j as f64 / n as f64;
                    let p = path(u, v);
                    if p < best.0 {
                        best = (p, u, v);
                    }
                }
            }
            best
        };
        let (_, u0, v0) =
            coarse(plane.u_range.0, plane.u_range.1, plane.v_range.0, plane.v_range.1);
        let du = (plane.u_range.1 - plane.u_range.0) / n as f64;
        let dv = (plane.v_range.1 - plane.v_range.0) / n as f64;
        let (grid_path, u1, v1) = coarse(
            (u0 - du).max(plane.u_range.0),
            (u0 + du).min(plane.u_range.1),
            (v0 - dv).max(plane.v_range.0),
            (v0 + dv).min(plane.v_range.1),
        );
        let grid_r = plane.point + plane.axis_u * u1 + plane.axis_v * v1;
        let resolution = (du / n as f64).hypot(dv / n as f64);
        let refl_path = (r - s).norm() + (a - r).norm();
        if refl_path > grid_path + 1e-9 || r.distance(grid_r) > 2.0 * resolution + 1e-9 {
            failures += 1;
        }
    }
    failures
}

/// Mirror involution, reflection law, and delay non-negativity over `cases`
/// random configurations each; returns the total violation count.
pub fn property_suite_failures(cases: usize, seed: u64) -> usize {
    let mut rng = seeded_rng(seed);
    let mut failures = 0usize;

    for _ in 0..cases {
        let plane = random_plane(&mut rng);
        let a = Vec3::new(
            rng.gen_range(-200.0..200.0),
            rng.gen_range(-200.0..200.0),
            rng.gen_range(-200.0..200.0),
        );
        let twice = mirror_point(mirror_point(a, &plane), &plane);
        if twice.distance(a) > 1e-12 * (1.0 + a.norm()) {
            failures += 1;
        }
    }

    for _ in 0..cases {
        let plane = random_plane(&mut rng);
        let h_s = rng.gen_range(5.0..300.0);
        let h_a = rng.gen_range(1.0..80.0);
        let s = point_off_plane(&mut rng, &plane, h_s);
        let a = point_off_plane(&mut rng, &plane, h_a);
        if let Some(r) = reflection_point(s, a, &plane) {
            let incident = (r - s).normalized().unwrap();
            let reflected = (a - r).normalized().unwrap();
            let cos_in = -incident.dot(plane.normal);
            let cos_out = reflected.dot(plane.normal);
            if (cos_in - cos_out).abs() > 1e-9 {
                failures += 1;
            }
        }
    }

    for _ in 0..cases {
        let rv = |rng: &mut rand_chacha::ChaCha8Rng| {
            Vec3::new(
                rng.gen_range(-1e5..1e5),
                rng.gen_range(-1e5..1e5),
                rng.gen_range(-1e5..1e5),
            )
        };
        let (s, a, r) = (rv(&mut rng), rv(&mut rng), rv(&mut rng));
        if path_delay(s, a, r) < 0.0 {
            failures += 1;
        }
    }

    failures
}
