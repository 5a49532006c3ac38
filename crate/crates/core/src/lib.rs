//! Deterministic urban-canyon GNSS multipath simulator.
//!
//! The crate generates randomized city-block canyons, propagates a nominal
//! GPS constellation, traces single-bounce specular reflections from
//! satellites to a moving vehicle antenna, classifies per-satellite
//! reception modes, and estimates reflection-delay distributions — including
//! a quadratic model predicting the median delay from the number of
//! received satellites.
//!
//! The crate is `no_std` (with `alloc`); all IO, file formats, and the
//! command-line front end live in the companion `canyonsim-cli` crate.
//!
//! Everything is deterministic: randomness flows through explicit, seedable
//! [`rand_chacha::ChaCha8Rng`] streams (a portable generator with a
//! documented, bit-exact output sequence), so a fixed seed reproduces a run
//! bit for bit.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analysis;
pub mod error;
pub mod geometry;
pub mod orbits;
pub mod raytrace;
pub mod simulate;
pub mod special;
pub mod vec3;

pub use error::{Error, Result};
pub use vec3::Vec3;
