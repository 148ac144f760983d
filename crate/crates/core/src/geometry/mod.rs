//! Vector math, the pinhole camera, ray–primitive intersection with a BVH,
//! and the reflection/refraction optics shared by both render passes.

mod bvh;
mod camera;
pub mod optics;
mod primitive;
mod ray;
mod transform;
mod vec3;

pub use bvh::{build_bvh, Bvh, Geometry};
pub use camera::{camera_ray, CameraModel};
pub use optics::{fresnel_reflectance, reflect_dir, refract_dir};
pub use primitive::{Aabb, Element, ElementShape, HitRecord, Primitive, Shape, HIT_EPSILON,
    SURFACE_EPSILON,
};
pub use ray::{MediumStack, Ray, AIR_IOR};
pub use transform::{Quat, Transform};
pub use vec3::Vec3;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GeometryError {
    #[error("pixel ({px}, {py}) outside {width}x{height} image")]
    PixelOutOfRange {
        px: u32,
        py: u32,
        width: u32,
        height: u32,
    },
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
    #[error("invalid primitive: {0}")]
    InvalidPrimitive(String),
    #[error("cannot build a BVH over zero primitives")]
    EmptyBvh,
}
