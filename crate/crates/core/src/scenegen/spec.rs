use serde::{Deserialize, Serialize};

use super::{MaterialSpec, Rgb, SceneError};
use crate::canonical::to_canonical_json;
use crate::geometry::{Aabb, CameraModel, Primitive, Shape, Transform, Vec3};

/// Format version written into every scene file.
pub const SCENE_VERSION: u32 = 1;

/// One material-bearing piece of an object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartSpec {
    pub primitive: Primitive,
    pub material: MaterialSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSpec {
    /// Catalog family the object was built from.
    pub family: String,
    pub transform: Transform,
    pub parts: Vec<PartSpec>,
    /// Index of the object this one rests on.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stacked_on: Option<u32>,
}

impl ObjectSpec {
    pub fn bounds(&self) -> Aabb {
        self.parts
            .iter()
            .map(|p| p.primitive.bounds(&self.transform))
            .reduce(|a, b| a.union(&b))
            .unwrap_or(Aabb::EMPTY)
    }

    pub fn transmissive_parts(&self) -> usize {
        self.parts.iter().filter(|p| p.material.is_transmissive()).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscoEmitter {
    pub position: Vec3,
    /// Saturated hue, max component 1.
    pub color: Rgb,
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum LightSpec {
    /// Isotropic point light; `intensity` is radiant intensity per channel.
    Point { position: Vec3, intensity: Rgb },
    /// One-sided quad emitter facing `u × v`.
    Area {
        corner: Vec3,
        u: Vec3,
        v: Vec3,
        emission: Rgb,
    },
    Disco {
        position: Vec3,
        emitters: Vec<DiscoEmitter>,
    },
    /// Uniform sky radiance; also lights diffuse surfaces as an unoccluded ambient term.
    Environment { sky: Rgb },
}

impl LightSpec {
    fn violation(&self) -> Option<&'static str> {
        let nonneg = |c: &Rgb| c.is_finite() && c.min_component() >= 0.0;
        let ok = match self {
            LightSpec::Point { intensity, .. } => nonneg(intensity),
            LightSpec::Area { emission, u, v, .. } => {
                nonneg(emission) && u.cross(*v).length() > 0.0
            }
            LightSpec::Disco { emitters, .. } => emitters
                .iter()
                .all(|e| nonneg(&e.color) && e.power >= 0.0 && e.power.is_finite()),
            LightSpec::Environment { sky } => nonneg(sky),
        };
        (!ok).then_some("light intensities must be finite and non-negative")
    }
}

/// Axis-aligned room `[0, width] × [0, height] × [0, depth]` with diffuse shell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoomSpec {
    pub width: f64,
    pub depth: f64,
    pub height: f64,
    /// Floor, four walls and ceiling as quads.
    pub shell: Vec<PartSpec>,
}

impl RoomSpec {
    pub fn bounds(&self) -> Aabb {
        Aabb::new(Vec3::ZERO, Vec3::new(self.width, self.height, self.depth))
    }

    pub fn center(&self) -> Vec3 {
        self.bounds().center()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub seed: u64,
    pub config_hash: String,
}

fn default_version() -> u32 {
    SCENE_VERSION
}

/// Complete, self-contained scene description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    #[serde(default = "default_version")]
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub room: Option<RoomSpec>,
    #[serde(default)]
    pub objects: Vec<ObjectSpec>,
    pub lights: Vec<LightSpec>,
    #[serde(default)]
    pub camera: CameraModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl Default for CameraModel {
    /// At the origin looking down +z, 60° vertical fov, 64×64.
    fn default() -> Self {
        CameraModel {
            position: Vec3::ZERO,
            right: -Vec3::X,
            up: Vec3::Y,
            forward: Vec3::Z,
            vfov: std::f64::consts::FRAC_PI_3,
            width: 64,
            height: 64,
        }
    }
}

impl SceneSpec {
    /// All material-bearing parts with their world transforms: room shell first,
    /// then objects in order.
    pub fn parts(&self) -> impl Iterator<Item = (&PartSpec, Transform)> {
        let shell = self
            .room
            .iter()
            .flat_map(|r| r.shell.iter().map(|p| (p, Transform::IDENTITY)));
        let objects = self
            .objects
            .iter()
            .flat_map(|o| o.parts.iter().map(move |p| (p, o.transform)));
        shell.chain(objects)
    }

    pub fn transmissive_parts(&self) -> usize {
        self.objects.iter().map(ObjectSpec::transmissive_parts).sum()
    }

    /// Checks every structural rule; the first violation is returned.
    pub fn validate(&self) -> Result<(), SceneError> {
        let invalid = |m: String| Err(SceneError::Invalid(m));
        if self.version != SCENE_VERSION {
            return invalid(format!("unsupported scene version {}", self.version));
        }
        self.camera
            .validate()
            .map_err(|e| SceneError::Invalid(e.to_string()))?;
        if self.lights.is_empty() {
            return invalid("scene needs at least one light".into());
        }
        if let Some(v) = self.lights.iter().find_map(LightSpec::violation) {
            return invalid(v.into());
        }
        for (i, obj) in self.objects.iter().enumerate() {
            if !obj.transform.is_valid() {
                return invalid(format!("object {i}: transform scale must be > 0 with unit rotation"));
            }
            if obj.parts.is_empty() {
                return invalid(format!("object {i}: needs at least one part"));
            }
            if let Some(room) = &self.room {
                if !room.bounds().pad(1e-6).contains(&obj.bounds()) {
                    return invalid(format!("object {i}: bounding box leaves the room"));
                }
            }
        }
        for (part, _) in self.parts() {
            part.primitive
                .shape
                .validate()
                .map_err(|e| SceneError::Invalid(e.to_string()))?;
            if !part.primitive.transform.is_valid() {
                return invalid("part transform scale must be > 0 with unit rotation".into());
            }
            if let Some(v) = part.material.violation() {
                return invalid(v);
            }
            if part.material.is_transmissive() && !part.primitive.shape.is_watertight() {
                return invalid(format!(
                    "transmissive material on a non-watertight {}",
                    shape_name(&part.primitive.shape)
                ));
            }
        }
        Ok(())
    }
}

fn shape_name(s: &Shape) -> &'static str {
    match s {
        Shape::Sphere { .. } => "sphere",
        Shape::Quad { .. } => "quad",
        Shape::Box { .. } => "box",
        Shape::TriangleMesh { .. } => "triangle mesh",
    }
}

/// Canonical JSON bytes of a scene.
pub fn serialize_scene(scene: &SceneSpec) -> Vec<u8> {
    to_canonical_json(scene).expect("scene types always serialize")
}

/// Parses scene JSON. Errors carry the field path, line and column.
pub fn parse_scene(bytes: &[u8]) -> Result<SceneSpec, SceneError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        SceneError::Parse {
            path,
            line: inner.line(),
            column: inner.column(),
            message: inner.to_string(),
        }
    })
}
