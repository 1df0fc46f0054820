//! Core library for generating, rendering, and annotating scenes that
//! contain transparent objects.
//!
//! The pipeline: procedurally compose a scene ([`gen`]), render it with a
//! tile-parallel path tracer plus a caustic photon map ([`render`]), derive
//! pixel-aligned ground-truth passes ([`gt`]), mutate capture parameters
//! without touching composition ([`ablation`]), lay datasets out on disk
//! ([`dataset`]), and score predicted masks ([`metrics`]).

pub mod ablation;
pub mod assets;
pub mod codec;
pub mod config;
pub mod dataset;
pub mod gen;
pub mod gt;
pub mod img;
pub mod math;
pub mod metrics;
pub mod render;
pub mod rng;
pub mod scene;

/// Version stamp recorded in dataset manifests.
pub const GENERATOR_VERSION: &str = env!("CARGO_PKG_VERSION");
