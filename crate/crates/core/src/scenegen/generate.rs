use super::catalog::{self, Family, Support, PART_GAP};
use super::{
    assign_materials, gen_camera, gen_lighting, GeneratorConfig, MaterialSpec, ObjectSpec,
    PartSpec, Provenance, RoomSpec, SceneError, SceneSpec, SCENE_VERSION,
};
use crate::geometry::{Aabb, Primitive, Quat, Shape, Transform, Vec3};
use crate::rng::DetRng;

/// Room shell with neutral albedos.
pub fn build_room(width: f64, depth: f64, height: f64) -> RoomSpec {
    build_room_with(width, depth, height, [Vec3::splat(0.4), Vec3::splat(0.7), Vec3::splat(0.8)])
}

/// Room shell; `albedo` is `[floor, walls, ceiling]`. Quads face inward.
pub fn build_room_with(width: f64, depth: f64, height: f64, albedo: [Vec3; 3]) -> RoomSpec {
    let (w, d, h) = (width, depth, height);
    let quad = |corner: [f64; 3], u: [f64; 3], v: [f64; 3], a: Vec3| PartSpec {
        primitive: Primitive::new(Shape::Quad {
            corner: corner.into(),
            u: u.into(),
            v: v.into(),
        }),
        material: MaterialSpec::diffuse(a),
    };
    let [floor, wall, ceiling] = albedo;
    RoomSpec {
        width,
        depth,
        height,
        shell: vec![
            quad([0.0, 0.0, 0.0], [0.0, 0.0, d], [w, 0.0, 0.0], floor),
            quad([0.0, 0.0, 0.0], [w, 0.0, 0.0], [0.0, h, 0.0], wall),
            quad([0.0, 0.0, d], [0.0, h, 0.0], [w, 0.0, 0.0], wall),
            quad([0.0, 0.0, 0.0], [0.0, h, 0.0], [0.0, 0.0, d], wall),
            quad([w, 0.0, 0.0], [0.0, 0.0, d], [0.0, h, 0.0], wall),
            quad([0.0, h, 0.0], [w, 0.0, 0.0], [0.0, 0.0, d], ceiling),
        ],
    }
}

struct Placed {
    bounds: Aabb,
    transform: Transform,
    support: Option<Support>,
}

fn local_footprint(parts: &[Primitive]) -> f64 {
    let b = parts
        .iter()
        .map(|p| p.bounds(&Transform::IDENTITY))
        .reduce(|a, b| a.union(&b))
        .unwrap_or(Aabb::EMPTY);
    let ext = Vec3::new(b.max.x.max(-b.min.x), 0.0, b.max.z.max(-b.min.z));
    ext.length()
}

/// Room volume available to objects: a wall margin, floor contact allowed.
fn interior(room: &RoomSpec) -> Aabb {
    let b = room.bounds().pad(-0.01);
    Aabb::new(Vec3::new(b.min.x, 0.0, b.min.z), b.max)
}

fn try_place(
    family: Family,
    parts: &[Primitive],
    placed: &[Placed],
    room: &RoomSpec,
    cfg: &GeneratorConfig,
    rng: &mut DetRng,
) -> Option<(Transform, Aabb, Option<u32>)> {
    let scale = rng.range(0.9, 1.1);
    let rotation = Quat::from_axis_angle(Vec3::Y, rng.range(0.0, std::f64::consts::TAU));
    let reach = local_footprint(parts) * scale;
    let supports: Vec<usize> = (0..placed.len())
        .filter(|&i| placed[i].support.is_some())
        .collect();
    let stack = family.stackable() && !supports.is_empty() && rng.bernoulli(cfg.p_stack);
    let (translation, stacked_on) = if stack {
        let host = *rng.pick(&supports);
        let s = placed[host].support.expect("filtered on support");
        let hx = s.half_x - reach / placed[host].transform.scale;
        let hz = s.half_z - reach / placed[host].transform.scale;
        if hx <= 0.0 || hz <= 0.0 {
            return None;
        }
        let local = Vec3::new(rng.range(-hx, hx), s.top, rng.range(-hz, hz));
        let p = placed[host].transform.apply_point(local);
        (Vec3::new(p.x, p.y + PART_GAP, p.z), Some(host as u32))
    } else {
        let m = reach + 0.05;
        if 2.0 * m >= room.width || 2.0 * m >= room.depth {
            return None;
        }
        let x = rng.range(m, room.width - m);
        let z = rng.range(m, room.depth - m);
        (Vec3::new(x, PART_GAP, z), None)
    };
    let transform = Transform {
        translation,
        rotation,
        scale,
    };
    let bounds = parts
        .iter()
        .map(|p| p.bounds(&transform))
        .reduce(|a, b| a.union(&b))?;
    let inside = interior(room).contains(&bounds);
    let clear = placed.iter().all(|o| !o.bounds.overlaps(&bounds));
    (inside && clear).then_some((transform, bounds, stacked_on))
}

/// Generates the scene for `seed`. Pure function of `(config, seed)`.
pub fn generate_scene(config: &GeneratorConfig, seed: u64) -> Result<SceneSpec, SceneError> {
    config.validate()?;
    let mut room_rng = DetRng::derive(seed, "room");
    let mut object_rng = DetRng::derive(seed, "objects");
    let mut material_rng = DetRng::derive(seed, "materials");
    let mut light_rng = DetRng::derive(seed, "lights");
    let mut camera_rng = DetRng::derive(seed, "camera");

    let (w, d, h) = (
        room_rng.range(config.room_width[0], config.room_width[1]),
        room_rng.range(config.room_depth[0], config.room_depth[1]),
        room_rng.range(config.room_height[0], config.room_height[1]),
    );
    let mut tone = |lo: f64, hi: f64| {
        let base = room_rng.range(lo, hi);
        Vec3::new(
            base * room_rng.range(0.9, 1.0),
            base * room_rng.range(0.9, 1.0),
            base * room_rng.range(0.9, 1.0),
        )
    };
    let albedo = [tone(0.2, 0.6), tone(0.5, 0.9), tone(0.7, 0.9)];
    let room = build_room_with(w, d, h, albedo);

    let count = object_rng.int_in(config.object_count[0], config.object_count[1]);
    let mut placed: Vec<Placed> = Vec::new();
    let mut objects = Vec::new();
    for index in 0..count as usize {
        let family = *object_rng.pick(&Family::ALL);
        let mut result = None;
        for _ in 0..config.max_retries {
            let built = catalog::build(family, &mut object_rng);
            if let Some(p) = try_place(family, &built.parts, &placed, &room, config, &mut object_rng)
            {
                result = Some((built, p));
                break;
            }
        }
        let Some((built, (transform, bounds, stacked_on))) = result else {
            return Err(SceneError::Placement {
                seed,
                object: index,
                family: family.name().into(),
            });
        };
        let eligible: Vec<bool> = built.parts.iter().map(|p| p.shape.is_watertight()).collect();
        let materials = assign_materials(&eligible, config.p_transparent, &mut material_rng);
        placed.push(Placed {
            bounds,
            transform,
            support: built.support,
        });
        objects.push(ObjectSpec {
            family: family.name().into(),
            transform,
            parts: built
                .parts
                .into_iter()
                .zip(materials)
                .map(|(primitive, material)| PartSpec {
                    primitive,
                    material,
                })
                .collect(),
            stacked_on,
        });
    }

    let (_, lights) = gen_lighting(&mut light_rng, &config.lighting, &room);
    let (camera, _) = gen_camera(
        &room,
        &objects,
        &mut camera_rng,
        &config.camera,
        config.width,
        config.height,
    );
    let scene = SceneSpec {
        version: SCENE_VERSION,
        room: Some(room),
        objects,
        lights,
        camera,
        provenance: Some(Provenance {
            seed,
            config_hash: config.hash(),
        }),
    };
    scene.validate()?;
    Ok(scene)
}
