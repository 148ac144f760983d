//! Small analytic scenes with closed-form depth, for tests and examples.

use super::{LightSpec, MaterialSpec, ObjectSpec, PartSpec, SceneSpec, TransmissiveKind};
use crate::geometry::{CameraModel, Primitive, Shape, Transform, Vec3};

pub const SLAB_FRONT: f64 = 1.0;
pub const SLAB_BACK: f64 = 1.2;
pub const SLAB_IOR: f64 = 1.5;
pub const WALL_Z: f64 = 3.0;

pub fn object(family: &str, parts: Vec<PartSpec>) -> ObjectSpec {
    ObjectSpec {
        family: family.into(),
        transform: Transform::IDENTITY,
        parts,
        stacked_on: None,
    }
}

pub fn part(shape: Shape, material: MaterialSpec) -> PartSpec {
    PartSpec {
        primitive: Primitive::new(shape),
        material,
    }
}

/// Square diffuse quad in the plane `z`, centered on the z axis, facing -z.
pub fn wall_at(z: f64, half: f64, albedo: f64) -> PartSpec {
    part(
        Shape::Quad {
            corner: Vec3::new(-half, -half, z),
            u: Vec3::new(0.0, 2.0 * half, 0.0),
            v: Vec3::new(2.0 * half, 0.0, 0.0),
        },
        MaterialSpec::diffuse(Vec3::splat(albedo)),
    )
}

/// Glass box between `z0` and `z1`, `half` wide in x and y.
pub fn slab(z0: f64, z1: f64, half: f64, ior: f64) -> PartSpec {
    part(
        Shape::Box {
            min: Vec3::new(-half, -half, z0),
            max: Vec3::new(half, half, z1),
        },
        MaterialSpec::Transmissive {
            ior,
            tint: Vec3::ONE,
            kind: TransmissiveKind::Glass,
        },
    )
}

fn camera(width: u32, height: u32) -> CameraModel {
    CameraModel::default().with_resolution(width, height)
}

/// Diffuse wall at `z` lit by a white point light at the camera.
pub fn wall_scene(z: f64, width: u32, height: u32) -> SceneSpec {
    SceneSpec {
        version: super::SCENE_VERSION,
        room: None,
        objects: vec![object("wall", vec![wall_at(z, 50.0, 0.5)])],
        lights: vec![LightSpec::Point {
            position: Vec3::ZERO,
            intensity: Vec3::ONE,
        }],
        camera: camera(width, height),
        provenance: None,
    }
}

/// Camera at the origin looking down +z through a glass slab with faces at
/// [`SLAB_FRONT`] and [`SLAB_BACK`], `slab_half` wide, onto a wall at [`WALL_Z`].
pub fn slab_scene(slab_half: f64, width: u32, height: u32) -> SceneSpec {
    let mut scene = wall_scene(WALL_Z, width, height);
    scene.objects.push(object(
        "slab",
        vec![slab(SLAB_FRONT, SLAB_BACK, slab_half, SLAB_IOR)],
    ));
    scene
}

/// Plane of the tilted wall in [`tilted_slab_scene`]: points with `n·p = c`.
pub const TILTED_WALL: (Vec3, f64) = (
    Vec3 {
        x: std::f64::consts::FRAC_1_SQRT_2,
        y: 0.0,
        z: std::f64::consts::FRAC_1_SQRT_2,
    },
    4.0 * std::f64::consts::FRAC_1_SQRT_2,
);

/// Slab as in [`slab_scene`] but 2.5 wide, seen by a camera yawed 30° toward
/// +x, in front of a wall tilted 45° about y (the plane `x + z = 4`).
pub fn tilted_slab_scene(width: u32, height: u32) -> SceneSpec {
    let yaw = 30f64.to_radians();
    let forward = Vec3::new(yaw.sin(), 0.0, yaw.cos());
    let cam = CameraModel::look_at(
        Vec3::ZERO,
        forward,
        Vec3::Y,
        30f64.to_radians(),
        width,
        height,
    )
    .expect("valid fixture camera");
    let wall = part(
        Shape::Quad {
            corner: Vec3::new(-2.0, -5.0, 6.0),
            u: Vec3::new(0.0, 10.0, 0.0),
            v: Vec3::new(8.0, 0.0, -8.0),
        },
        MaterialSpec::diffuse(Vec3::splat(0.5)),
    );
    SceneSpec {
        version: super::SCENE_VERSION,
        room: None,
        objects: vec![
            object("slab", vec![slab(SLAB_FRONT, SLAB_BACK, 2.5, SLAB_IOR)]),
            object("wall", vec![wall]),
        ],
        lights: vec![LightSpec::Point {
            position: Vec3::new(0.0, 1.0, 0.0),
            intensity: Vec3::splat(4.0),
        }],
        camera: cam,
        provenance: None,
    }
}
