//! Procedural urban-canyon generation.
//!
//! The city is a 3x3 grid of square blocks separated by roads. Each block's
//! perimeter is tiled with cuboid buildings of fixed footprint whose heights
//! follow a Rice distribution, and the whole scene is exposed both as
//! cuboids (for occlusion tests) and as bounded reflecting planes (for the
//! specular ray trace).
//!
//! Coordinates are a local East-North-Up frame in meters, centered on the
//! central block; the ground is z = 0.
//!
//! Layout conventions, chosen where the underlying description is silent:
//! each block edge shows 10 building facades of width `building_width`;
//! building depth equals the width, so the perimeter is a closed ring of
//! 4n - 4 cells (36 for the defaults); heights are sampled independently
//! per building in a fixed scan order; only street-facing walls and roofs
//! are emitted as reflectors (courtyard-facing and abutting walls are
//! unreachable from a street-level antenna), while occlusion always tests
//! the full cuboids.

use alloc::format;
use alloc::vec::Vec;

// resolves float math through libm in the no_std build
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{bessel_i0_scaled, bessel_i1_scaled};
use crate::vec3::Vec3;

/// Parameters of the generated city.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanyonParams {
    /// Side length of one square city block, meters.
    pub block_side_m: f64,
    /// Width of the roads separating blocks, meters.
    pub road_width_m: f64,
    /// Facade width of one building, meters (also used as its depth).
    pub building_width_m: f64,
    /// Rice non-centrality parameter of the building heights, meters.
    pub rice_nu_m: f64,
    /// Rice scale parameter of the building heights, meters.
    pub rice_sigma_m: f64,
    /// Seed of the height-sampling stream.
    pub rng_seed: u64,
}

impl Default for CanyonParams {
    fn default() -> Self {
        Self {
            block_side_m: 250.0,
            road_width_m: 30.0,
            building_width_m: 25.0,
            rice_nu_m: 25.0,
            rice_sigma_m: 5.0,
            rng_seed: 42,
        }
    }
}

impl CanyonParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            (self.block_side_m, "block_side_m"),
            (self.road_width_m, "road_width_m"),
            (self.building_width_m, "building_width_m"),
            (self.rice_sigma_m, "rice_sigma_m"),
        ];
        for (v, name) in positive {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !self.rice_nu_m.is_finite() || self.rice_nu_m < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "rice_nu_m must be non-negative, got {}",
                self.rice_nu_m
            )));
        }
        let per_side = self.block_side_m / self.building_width_m;
        if (per_side - per_side.round()).abs() > 1e-9 || per_side.round() < 2.0 {
            return Err(Error::InvalidParameter(format!(
                "block_side_m ({}) must be an integer multiple (>= 2) of building_width_m ({})",
                self.block_side_m, self.building_width_m
            )));
        }
        Ok(())
    }

    /// Number of building facades per block edge.
    pub fn buildings_per_edge(&self) -> usize {
        (self.block_side_m / self.building_width_m).round() as usize
    }

    /// Buildings in one block's perimeter ring.
    pub fn buildings_per_block(&self) -> usize {
        let n = self.buildings_per_edge();
        4 * n - 4
    }

    /// Total building count over the 3x3 grid.
    pub fn total_buildings(&self) -> usize {
        9 * self.buildings_per_block()
    }

    /// Center-to-center spacing of adjacent blocks.
    pub fn block_pitch_m(&self) -> f64 {
        self.block_side_m + self.road_width_m
    }
}

/// What a reflecting plane belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SurfaceKind {
    BuildingWall,
    BuildingRoof,
    VehicleRoof,
}

impl SurfaceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SurfaceKind::BuildingWall => "building_wall",
            SurfaceKind::BuildingRoof => "building_roof",
            SurfaceKind::VehicleRoof => "vehicle_roof",
        }
    }
}

/// A finite rectangle in 3D: a plane anchored at `point` with unit `normal`,
/// bounded along two orthogonal in-plane axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundedPlane {
    /// A point on the plane (the rectangle center).
    pub point: Vec3,
    /// Unit normal.
    pub normal: Vec3,
    /// First in-plane axis (unit).
    pub axis_u: Vec3,
    /// Second in-plane axis (unit).
    pub axis_v: Vec3,
    /// Extent along `axis_u`, meters: (min, max) relative to `point`.
    pub u_range: (f64, f64),
    /// Extent along `axis_v`, meters: (min, max) relative to `point`.
    pub v_range: (f64, f64),
    pub kind: SurfaceKind,
    /// Index of the owning building, if any.
    pub building: Option<usize>,
}

impl BoundedPlane {
    /// Signed distance of `p` from the plane along the normal.
    #[inline]
    pub fn signed_distance(&self, p: Vec3) -> f64 {
        (p - self.point).dot(self.normal)
    }

    /// Whether an on-plane point falls inside the rectangle bounds.
    pub fn contains_in_extent(&self, p: Vec3) -> bool {
        let rel = p - self.point;
        let u = rel.dot(self.axis_u);
        let v = rel.dot(self.axis_v);
        u >= self.u_range.0 && u <= self.u_range.1 && v >= self.v_range.0 && v <= self.v_range.1
    }
}

/// One building: an axis-aligned cuboid standing on the ground plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Building {
    /// Footprint minimum corner (x, y), meters.
    pub min: (f64, f64),
    /// Footprint maximum corner (x, y), meters.
    pub max: (f64, f64),
    /// Height above ground, meters.
    pub height_m: f64,
}

impl Building {
    pub fn footprint_corners(&self) -> [(f64, f64); 4] {
        [
            (self.min.0, self.min.1),
            (self.max.0, self.min.1),
            (self.max.0, self.max.1),
            (self.min.0, self.max.1),
        ]
    }
}

/// The generated city: cuboid buildings plus the emitted reflector planes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanyonGeometry {
    pub params: CanyonParams,
    pub buildings: Vec<Building>,
    /// Street-facing walls and roofs, in building order.
    pub planes: Vec<BoundedPlane>,
}

impl CanyonGeometry {
    /// A scene with no buildings at all (diagnostics and tests).
    pub fn empty(params: CanyonParams) -> Self {
        Self { params, buildings: Vec::new(), planes: Vec::new() }
    }

    /// Mean of the sampled building heights; 0 for an empty scene.
    pub fn mean_height_m(&self) -> f64 {
        if self.buildings.is_empty() {
            return 0.0;
        }
        self.buildings.iter().map(|b| b.height_m).sum::<f64>() / self.buildings.len() as f64
    }
}

/// Draws one Rice(nu, sigma) sample as sqrt(X^2 + Y^2) with
/// X ~ Normal(nu, sigma^2), Y ~ Normal(0, sigma^2).
///
/// Consumes exactly two standard-normal draws from `rng`, so the stream
/// position is independent of the parameter values.
pub fn sample_rice<R: Rng + ?Sized>(nu: f64, sigma: f64, rng: &mut R) -> Result<f64> {
    check_rice_params(nu, sigma)?;
    loop {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let x = nu + sigma * z1;
        let y = sigma * z2;
        let r = (x * x + y * y).sqrt();
        // the distribution is strictly positive; r = 0 has probability zero
        // but can occur after floating-point underflow
        if r > 0.0 {
            return Ok(r);
        }
    }
}

/// Analytic mean of the Rice distribution:
/// mu = sigma * sqrt(pi/2) * L_{1/2}(-nu^2 / (2 sigma^2)),
/// with the half-order Laguerre polynomial expanded in modified Bessel
/// functions: L_{1/2}(x) = e^{x/2} [(1 - x) I_0(-x/2) - x I_1(-x/2)].
///
/// Evaluated in exponentially scaled form so large nu/sigma ratios cannot
/// overflow.
pub fn rice_mean(nu: f64, sigma: f64) -> Result<f64> {
    check_rice_params(nu, sigma)?;
    // z = -x/2 = nu^2 / (4 sigma^2); the e^{x/2} factor cancels against the
    // implicit e^z in each unscaled Bessel value.
    let z = nu * nu / (4.0 * sigma * sigma);
    let laguerre_scaled = (1.0 + 2.0 * z) * bessel_i0_scaled(z) + 2.0 * z * bessel_i1_scaled(z);
    Ok(sigma * (core::f64::consts::PI / 2.0).sqrt() * laguerre_scaled)
}

fn check_rice_params(nu: f64, sigma: f64) -> Result<()> {
    if !nu.is_finite() || nu < 0.0 {
        return Err(Error::InvalidParameter(format!("rice nu must be >= 0, got {nu}")));
    }
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::InvalidParameter(format!("rice sigma must be > 0, got {sigma}")));
    }
    Ok(())
}

/// Which outer boundaries of the block a perimeter cell touches.
struct CellFaces {
    south: bool,
    north: bool,
    west: bool,
    east: bool,
}

/// Generates the 3x3-block city for the given parameters.
///
/// Deterministic: the same parameters (including the seed) reproduce the
/// geometry bit for bit. Building heights are drawn from a ChaCha8 stream
/// seeded with `params.rng_seed`, in block-major, row-major cell order.
pub fn generate_canyon(params: &CanyonParams) -> Result<CanyonGeometry> {
    params.validate()?;

    let mut rng = crate::simulate::seeded_rng(params.rng_seed);
    let n = params.buildings_per_edge();
    let w = params.building_width_m;
    let pitch = params.block_pitch_m();
    let half_block = params.block_side_m / 2.0;

    let mut buildings = Vec::with_capacity(params.total_buildings());
    let mut planes = Vec::new();

    // blocks south-to-north, west-to-east; cells row-major within a block
    for gy in 0..3i32 {
        for gx in 0..3i32 {
            let block_min_x = (gx - 1) as f64 * pitch - half_block;
            let block_min_y = (gy - 1) as f64 * pitch - half_block;
            for cy in 0..n {
                for cx in 0..n {
                    let on_perimeter = cx == 0 || cx == n - 1 || cy == 0 || cy == n - 1;
                    if !on_perimeter {
                        continue;
                    }
                    let height = sample_rice(params.rice_nu_m, params.rice_sigma_m, &mut rng)?;
                    let min = (block_min_x + cx as f64 * w, block_min_y + cy as f64 * w);
                    let max = (min.0 + w, min.1 + w);
                    let building = Building { min, max, height_m: height };
                    let faces = CellFaces {
                        south: cy == 0,
                        north: cy == n - 1,
                        west: cx == 0,
                        east: cx == n - 1,
                    };
                    emit_reflectors(&building, buildings.len(), &faces, &mut planes);
                    buildings.push(building);
                }
            }
        }
    }

    Ok(CanyonGeometry { params: *params, buildings, planes })
}

/// Emits the street-facing wall planes and the roof plane of one building.
fn emit_reflectors(
    b: &Building,
    index: usize,
    faces: &CellFaces,
    planes: &mut Vec<BoundedPlane>,
) {
    let cx = (b.min.0 + b.max.0) / 2.0;
    let cy = (b.min.1 + b.max.1) / 2.0;
    let half_w = (b.max.0 - b.min.0) / 2.0;
    let half_d = (b.max.1 - b.min.1) / 2.0;
    let half_h = b.height_m / 2.0;

    let mut wall = |point: Vec3, normal: Vec3, axis_u: Vec3, half_u: f64| {
        planes.push(BoundedPlane {
            point,
            normal,
            axis_u,
            axis_v: Vec3::new(0.0, 0.0, 1.0),
            u_range: (-half_u, half_u),
            v_range: (-half_h, half_h),
            kind: SurfaceKind::BuildingWall,
            building: Some(index),
        });
    };

    if faces.south {
        wall(Vec3::new(cx, b.min.1, half_h), Vec3::new(0.0, -1.0, 0.0), Vec3::new(1.0, 0.0, 0.0), half_w);
    }
    if faces.north {
        wall(Vec3::new(cx, b.max.1, half_h), Vec3::new(0.0, 1.0, 0.0), Vec3::new(1.0, 0.0, 0.0), half_w);
    }
    if faces.west {
        wall(Vec3::new(b.min.0, cy, half_h), Vec3::new(-1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), half_d);
    }
    if faces.east {
        wall(Vec3::new(b.max.0, cy, half_h), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), half_d);
    }

    planes.push(BoundedPlane {
        point: Vec3::new(cx, cy, b.height_m),
        normal: Vec3::new(0.0, 0.0, 1.0),
        axis_u: Vec3::new(1.0, 0.0, 0.0),
        axis_v: Vec3::new(0.0, 1.0, 0.0),
        u_range: (-half_w, half_w),
        v_range: (-half_d, half_d),
        kind: SurfaceKind::BuildingRoof,
        building: Some(index),
    });
}

/// Street-facing wall count for one block: n facades per edge.
pub fn walls_per_block(params: &CanyonParams) -> usize {
    4 * params.buildings_per_edge()
}
