use super::{CameraWeights, ObjectSpec, RoomSpec};
use crate::geometry::{Aabb, CameraModel, Vec3};
use crate::rng::DetRng;

/// How the scene camera was placed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CameraPlacement {
    /// Near a wall, looking at the room center.
    Room,
    /// Aimed at object `target` from `ratio` times its bounding radius.
    CloseUp { target: usize, ratio: f64 },
}

const CLOSE_UP_TRIES: usize = 64;
const WALL_MARGIN: f64 = 0.05;

/// Places the camera in `mode` chosen by `weights`. A close-up that cannot
/// fit inside the room after a bounded number of tries falls back to room mode.
pub fn gen_camera(
    room: &RoomSpec,
    objects: &[ObjectSpec],
    rng: &mut DetRng,
    weights: &CameraWeights,
    width: u32,
    height: u32,
) -> (CameraModel, CameraPlacement) {
    let vfov = rng.range(45.0, 65.0).to_radians();
    let inner = room.bounds().pad(-WALL_MARGIN);
    let boxes: Vec<Aabb> = objects.iter().map(ObjectSpec::bounds).collect();
    if !objects.is_empty() && rng.weighted(&weights.as_array()) == 1 {
        let target = rng.below(objects.len() as u64) as usize;
        let b = boxes[target];
        let (center, radius) = (b.center(), b.radius().max(1e-3));
        for _ in 0..CLOSE_UP_TRIES {
            let ratio = rng.range(2.0, 6.0);
            let azimuth = rng.range(0.0, std::f64::consts::TAU);
            let elevation = rng.range(-10.0, 45.0).to_radians();
            let dir = Vec3::new(
                libm::cos(elevation) * libm::cos(azimuth),
                libm::sin(elevation),
                libm::cos(elevation) * libm::sin(azimuth),
            );
            let pos = center + dir * (ratio * radius);
            let pt = Aabb::new(pos, pos);
            if !inner.contains(&pt) || boxes.iter().any(|o| o.pad(0.02).contains(&pt)) {
                continue;
            }
            if let Ok(cam) = CameraModel::look_at(pos, center, Vec3::Y, vfov, width, height) {
                return (cam, CameraPlacement::CloseUp { target, ratio });
            }
        }
    }
    (room_camera(room, &boxes, rng, vfov, width, height), CameraPlacement::Room)
}

fn room_camera(
    room: &RoomSpec,
    boxes: &[Aabb],
    rng: &mut DetRng,
    vfov: f64,
    width: u32,
    height: u32,
) -> CameraModel {
    let target = room.center();
    let mut pos = Vec3::ZERO;
    for _ in 0..CLOSE_UP_TRIES {
        let along = rng.range(0.2, 0.8);
        let inset = rng.range(0.25, 0.5);
        let y = rng.range(1.2, 1.8).min(room.height - 0.3);
        pos = match rng.below(4) {
            0 => Vec3::new(along * room.width, y, inset),
            1 => Vec3::new(along * room.width, y, room.depth - inset),
            2 => Vec3::new(inset, y, along * room.depth),
            _ => Vec3::new(room.width - inset, y, along * room.depth),
        };
        let pt = Aabb::new(pos, pos);
        if !boxes.iter().any(|o| o.pad(0.02).contains(&pt)) {
            break;
        }
    }
    CameraModel::look_at(pos, target, Vec3::Y, vfov, width, height)
        .expect("room camera is never at its target")
}
