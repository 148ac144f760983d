//! Seed-driven procedural scenes with transparent objects.
//!
//! A scene is a pure function of a [`GeneratorConfig`] and a 64-bit seed.
//! Each subsystem (room, objects, materials, lights, camera) draws from its
//! own stream derived from the seed and a tag, so changing one never shifts
//! the others.

pub mod catalog;
mod camera;
mod config;
pub mod fixtures;
pub mod generate;
mod lighting;
mod material;
mod spec;

pub use camera::{gen_camera, CameraPlacement};
pub use config::{CameraWeights, GeneratorConfig, LightingWeights};
pub use generate::{build_room, build_room_with, generate_scene};
pub use lighting::{gen_lighting, saturated_hue, LightingStyle};
pub use material::{assign_materials, MaterialSpec, Rgb, TransmissiveKind};
pub use spec::{
    parse_scene, serialize_scene, DiscoEmitter, LightSpec, ObjectSpec, PartSpec, Provenance,
    RoomSpec, SceneSpec, SCENE_VERSION,
};

#[derive(Debug, thiserror::Error)]
pub enum SceneError {
    #[error("invalid generator config: {0}")]
    Config(String),
    #[error("invalid scene: {0}")]
    Invalid(String),
    #[error("{path}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("seed {seed}: could not place object {object} ({family}) after max retries")]
    Placement {
        seed: u64,
        object: usize,
        family: String,
    },
}
