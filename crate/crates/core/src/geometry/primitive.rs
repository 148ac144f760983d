use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{GeometryError, Ray, Transform, Vec3};

/// Minimum ray parameter accepted as a triangle hit, in scene units. Rays
/// leaving a mesh vertex or edge would otherwise re-hit the neighbouring face.
pub const HIT_EPSILON: f64 = 1e-4;

/// Minimum ray parameter for analytic shapes. Their self-hits solve to
/// near-exact zeros, so a tiny bound keeps genuinely short paths, such as a ray
/// clipping the corner of a box.
pub const SURFACE_EPSILON: f64 = 1e-9;

const EDGE_TIE: f64 = 1e-12;

/// Local-space shape description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    Sphere {
        center: Vec3,
        radius: f64,
    },
    /// Parallelogram `corner + a·u + b·v`, `a, b ∈ [0, 1]`. Its outward side is `u × v`.
    Quad { corner: Vec3, u: Vec3, v: Vec3 },
    Box { min: Vec3, max: Vec3 },
    /// Counter-clockwise triangles seen from outside.
    TriangleMesh {
        vertices: Vec<Vec3>,
        triangles: Vec<[u32; 3]>,
    },
}

impl Shape {
    pub fn validate(&self) -> Result<(), GeometryError> {
        let bad = |m: String| Err(GeometryError::InvalidPrimitive(m));
        match self {
            Shape::Sphere { center, radius } => {
                if !(center.is_finite() && *radius > 0.0 && radius.is_finite()) {
                    return bad(format!("sphere radius must be positive, got {radius}"));
                }
            }
            Shape::Quad { corner, u, v } => {
                if !(corner.is_finite() && u.is_finite() && v.is_finite())
                    || u.cross(*v).length() < 1e-12
                {
                    return bad("quad edges must be finite and non-parallel".into());
                }
            }
            Shape::Box { min, max } => {
                if !(min.is_finite() && max.is_finite())
                    || !(min.x < max.x && min.y < max.y && min.z < max.z)
                {
                    return bad("box min must be < max componentwise".into());
                }
            }
            Shape::TriangleMesh {
                vertices,
                triangles,
            } => {
                if triangles.is_empty() {
                    return bad("mesh has no triangles".into());
                }
                if vertices.iter().any(|v| !v.is_finite()) {
                    return bad("mesh vertex is not finite".into());
                }
                for (i, tri) in triangles.iter().enumerate() {
                    if tri.iter().any(|&k| k as usize >= vertices.len()) {
                        return bad(format!("triangle {i} references a missing vertex"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Whether the shape bounds a closed volume with consistent orientation.
    ///
    /// Spheres and boxes are closed, quads never are, and a mesh is closed when
    /// every directed edge is matched by exactly one opposite edge.
    pub fn is_watertight(&self) -> bool {
        match self {
            Shape::Sphere { .. } | Shape::Box { .. } => true,
            Shape::Quad { .. } => false,
            Shape::TriangleMesh { triangles, vertices } => {
                mesh_is_closed(triangles, vertices.len())
            }
        }
    }
}

fn mesh_is_closed(triangles: &[[u32; 3]], vertex_count: usize) -> bool {
    let mut edges: HashMap<(u32, u32), u32> = HashMap::new();
    for tri in triangles {
        if tri.iter().any(|&k| k as usize >= vertex_count)
            || tri[0] == tri[1]
            || tri[1] == tri[2]
            || tri[0] == tri[2]
        {
            return false;
        }
        for k in 0..3 {
            *edges.entry((tri[k], tri[(k + 1) % 3])).or_default() += 1;
        }
    }
    edges
        .iter()
        .all(|(&(a, b), &n)| n == 1 && edges.get(&(b, a)) == Some(&1))
}

/// A shape placed by a similarity transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Primitive {
    pub shape: Shape,
    #[serde(default)]
    pub transform: Transform,
}

impl Primitive {
    pub fn new(shape: Shape) -> Self {
        Primitive {
            shape,
            transform: Transform::IDENTITY,
        }
    }

    /// World-space elements for intersection. Meshes expand to one element
    /// per triangle.
    pub fn to_elements(&self, parent: &Transform, material: u32, primitive: u32) -> Vec<Element> {
        let xf = parent.then_inner(&self.transform);
        let mk = |shape| Element {
            shape,
            material,
            primitive,
        };
        match &self.shape {
            Shape::Sphere { center, radius } => vec![mk(ElementShape::Sphere {
                center: xf.apply_point(*center),
                radius: radius * xf.scale,
            })],
            Shape::Quad { corner, u, v } => {
                let (u, v) = (xf.apply_vector(*u), xf.apply_vector(*v));
                let n = u.cross(v);
                vec![mk(ElementShape::Quad {
                    corner: xf.apply_point(*corner),
                    u,
                    v,
                    w: n / n.length_squared(),
                    normal: n.normalize(),
                })]
            }
            Shape::Box { min, max } => {
                let center = xf.apply_point((*min + *max) * 0.5);
                let half = (*max - *min) * (0.5 * xf.scale);
                vec![mk(ElementShape::Obb {
                    center,
                    axes: [
                        xf.apply_direction(Vec3::X),
                        xf.apply_direction(Vec3::Y),
                        xf.apply_direction(Vec3::Z),
                    ],
                    half,
                })]
            }
            Shape::TriangleMesh {
                vertices,
                triangles,
            } => {
                let world: Vec<Vec3> = vertices.iter().map(|&p| xf.apply_point(p)).collect();
                triangles
                    .iter()
                    .filter_map(|t| {
                        let v0 = world[t[0] as usize];
                        let e1 = world[t[1] as usize] - v0;
                        let e2 = world[t[2] as usize] - v0;
                        let n = e1.cross(e2);
                        (n.length() > 0.0).then(|| {
                            mk(ElementShape::Triangle {
                                v0,
                                e1,
                                e2,
                                normal: n.normalize(),
                            })
                        })
                    })
                    .collect()
            }
        }
    }

    /// World-space bounding box under `parent`.
    pub fn bounds(&self, parent: &Transform) -> Aabb {
        self.to_elements(parent, 0, 0)
            .iter()
            .map(Element::bounds)
            .reduce(|a, b| a.union(&b))
            .unwrap_or(Aabb::EMPTY)
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub const EMPTY: Aabb = Aabb {
        min: Vec3::splat(f64::INFINITY),
        max: Vec3::splat(f64::NEG_INFINITY),
    };

    pub fn new(min: Vec3, max: Vec3) -> Self {
        Aabb { min, max }
    }

    pub fn from_points(points: &[Vec3]) -> Self {
        points.iter().fold(Aabb::EMPTY, |b, &p| b.include(p))
    }

    pub fn include(&self, p: Vec3) -> Aabb {
        Aabb::new(self.min.min(p), self.max.max(p))
    }

    pub fn union(&self, o: &Aabb) -> Aabb {
        Aabb::new(self.min.min(o.min), self.max.max(o.max))
    }

    pub fn pad(&self, d: f64) -> Aabb {
        Aabb::new(self.min - Vec3::splat(d), self.max + Vec3::splat(d))
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    /// Half the diagonal length.
    pub fn radius(&self) -> f64 {
        0.5 * self.extent().length()
    }

    pub fn contains(&self, o: &Aabb) -> bool {
        self.min.x <= o.min.x
            && self.min.y <= o.min.y
            && self.min.z <= o.min.z
            && self.max.x >= o.max.x
            && self.max.y >= o.max.y
            && self.max.z >= o.max.z
    }

    /// Interiors intersect (touching faces do not count).
    pub fn overlaps(&self, o: &Aabb) -> bool {
        self.min.x < o.max.x
            && o.min.x < self.max.x
            && self.min.y < o.max.y
            && o.min.y < self.max.y
            && self.min.z < o.max.z
            && o.min.z < self.max.z
    }

    /// Entry parameter of the slab test, if the ray meets the box within `t_max`.
    #[inline]
    pub fn hit(&self, origin: Vec3, inv_dir: Vec3, t_max: f64) -> Option<f64> {
        let mut t0 = 0.0f64;
        let mut t1 = t_max;
        for a in 0..3 {
            let ta = (self.min[a] - origin[a]) * inv_dir[a];
            let tb = (self.max[a] - origin[a]) * inv_dir[a];
            let (lo, hi) = if ta <= tb { (ta, tb) } else { (tb, ta) };
            t0 = t0.max(lo);
            t1 = t1.min(hi);
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }
}

/// World-space intersectable piece of a primitive.
#[derive(Debug, Clone, PartialEq)]
pub enum ElementShape {
    Sphere {
        center: Vec3,
        radius: f64,
    },
    Quad {
        corner: Vec3,
        u: Vec3,
        v: Vec3,
        w: Vec3,
        normal: Vec3,
    },
    Obb {
        center: Vec3,
        axes: [Vec3; 3],
        half: Vec3,
    },
    Triangle {
        v0: Vec3,
        e1: Vec3,
        e2: Vec3,
        normal: Vec3,
    },
}

/// A world-space element tagged with its material and source primitive.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub shape: ElementShape,
    pub material: u32,
    pub primitive: u32,
}

/// Nearest-surface record, normal oriented against the incoming ray.
#[derive(Debug, Clone, PartialEq)]
pub struct HitRecord {
    pub t: f64,
    pub point: Vec3,
    pub normal: Vec3,
    pub material: u32,
    /// `true` when crossing from outside into the surface's enclosed volume.
    pub entering: bool,
    pub primitive: u32,
    /// Index of the element within its scene.
    pub element: u32,
}

impl Element {
    pub fn bounds(&self) -> Aabb {
        let b = match &self.shape {
            ElementShape::Sphere { center, radius } => {
                Aabb::new(*center - Vec3::splat(*radius), *center + Vec3::splat(*radius))
            }
            ElementShape::Quad { corner, u, v, .. } => {
                Aabb::from_points(&[*corner, *corner + *u, *corner + *v, *corner + *u + *v])
            }
            ElementShape::Obb { center, axes, half } => {
                let r = Vec3::new(
                    axes[0].x.abs() * half.x + axes[1].x.abs() * half.y + axes[2].x.abs() * half.z,
                    axes[0].y.abs() * half.x + axes[1].y.abs() * half.y + axes[2].y.abs() * half.z,
                    axes[0].z.abs() * half.x + axes[1].z.abs() * half.y + axes[2].z.abs() * half.z,
                );
                Aabb::new(*center - r, *center + r)
            }
            ElementShape::Triangle { v0, e1, e2, .. } => {
                Aabb::from_points(&[*v0, *v0 + *e1, *v0 + *e2])
            }
        };
        b.pad(1e-7)
    }

    /// Ray parameter in `(eps, t_max]` and the outward normal, where `eps` is
    /// [`HIT_EPSILON`] for triangles and [`SURFACE_EPSILON`] otherwise.
    pub fn intersect(&self, ray: &Ray, t_max: f64) -> Option<(f64, Vec3)> {
        let o = ray.origin;
        let d = ray.direction;
        let eps = match self.shape {
            ElementShape::Triangle { .. } => HIT_EPSILON,
            _ => SURFACE_EPSILON,
        };
        let in_range = |t: f64| t > eps && t <= t_max;
        match &self.shape {
            ElementShape::Sphere { center, radius } => {
                let oc = o - *center;
                let b = oc.dot(d);
                let c = oc.length_squared() - radius * radius;
                let disc = b * b - c;
                if disc < 0.0 {
                    return None;
                }
                let s = disc.sqrt();
                let t = [-b - s, -b + s].into_iter().find(|&t| in_range(t))?;
                Some((t, (ray.at(t) - *center).normalize()))
            }
            ElementShape::Quad {
                corner,
                u,
                v,
                w,
                normal,
            } => {
                let denom = normal.dot(d);
                if denom.abs() < 1e-12 {
                    return None;
                }
                let t = normal.dot(*corner - o) / denom;
                if !in_range(t) {
                    return None;
                }
                let rel = ray.at(t) - *corner;
                let a = w.dot(rel.cross(*v));
                let b = w.dot(u.cross(rel));
                ((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b)).then_some((t, *normal))
            }
            ElementShape::Obb { center, axes, half } => {
                let rel = o - *center;
                let mut t_near = f64::NEG_INFINITY;
                let mut t_far = f64::INFINITY;
                let mut near_n = Vec3::ZERO;
                let mut far_n = Vec3::ZERO;
                for a in 0..3 {
                    let oa = axes[a].dot(rel);
                    let da = axes[a].dot(d);
                    let h = half[a];
                    if da.abs() < 1e-15 {
                        if oa.abs() > h {
                            return None;
                        }
                        continue;
                    }
                    let t0 = (-h - oa) / da;
                    let t1 = (h - oa) / da;
                    // Entering through the face whose outward normal opposes d.
                    let sign = if da > 0.0 { 1.0 } else { -1.0 };
                    let (lo, hi) = if t0 < t1 { (t0, t1) } else { (t1, t0) };
                    // Hits on an edge or corner get the bisecting normal, so
                    // reflection there turns the ray around both faces at once.
                    let tie = |t: f64, u: f64| (t - u).abs() <= EDGE_TIE * t.abs().max(1.0);
                    if tie(lo, t_near) {
                        near_n += axes[a] * -sign;
                    } else if lo > t_near {
                        t_near = lo;
                        near_n = axes[a] * -sign;
                    }
                    if tie(hi, t_far) {
                        far_n += axes[a] * sign;
                    } else if hi < t_far {
                        t_far = hi;
                        far_n = axes[a] * sign;
                    }
                }
                let (near_n, far_n) = (near_n.normalize(), far_n.normalize());
                if t_near > t_far {
                    return None;
                }
                if in_range(t_near) {
                    Some((t_near, near_n))
                } else if in_range(t_far) {
                    Some((t_far, far_n))
                } else {
                    None
                }
            }
            ElementShape::Triangle { v0, e1, e2, normal } => {
                let p = d.cross(*e2);
                let det = e1.dot(p);
                if det.abs() < 1e-14 {
                    return None;
                }
                let inv = 1.0 / det;
                let s = o - *v0;
                let a = s.dot(p) * inv;
                if !(0.0..=1.0).contains(&a) {
                    return None;
                }
                let q = s.cross(*e1);
                let b = d.dot(q) * inv;
                if b < 0.0 || a + b > 1.0 {
                    return None;
                }
                let t = e2.dot(q) * inv;
                in_range(t).then_some((t, *normal))
            }
        }
    }

    /// Full hit record for this element, or `None`.
    pub fn hit(&self, ray: &Ray, t_max: f64, index: u32) -> Option<HitRecord> {
        let (t, outward) = self.intersect(ray, t_max)?;
        let entering = outward.dot(ray.direction) < 0.0;
        Some(HitRecord {
            t,
            point: ray.at(t),
            normal: if entering { outward } else { -outward },
            material: self.material,
            entering,
            primitive: self.primitive,
            element: index,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere() -> Element {
        Primitive::new(Shape::Sphere {
            center: Vec3::new(0.0, 0.0, 5.0),
            radius: 1.0,
        })
        .to_elements(&Transform::IDENTITY, 7, 0)
        .remove(0)
    }

    #[test]
    fn sphere_from_outside_and_inside() {
        let s = sphere();
        let h = s.hit(&Ray::new(Vec3::ZERO, Vec3::Z), f64::INFINITY, 0).unwrap();
        assert!((h.t - 4.0).abs() < 1e-12);
        assert!((h.point - Vec3::new(0.0, 0.0, 4.0)).length() < 1e-12);
        assert!(h.entering);
        assert_eq!(h.material, 7);
        assert!(h.normal.dot(Vec3::Z) <= 0.0);

        let h = s
            .hit(&Ray::new(Vec3::new(0.0, 0.0, 5.0), Vec3::Z), f64::INFINITY, 0)
            .unwrap();
        assert!((h.t - 1.0).abs() < 1e-12);
        assert!(!h.entering);
        assert!(h.normal.dot(Vec3::Z) <= 0.0);
    }

    #[test]
    fn ray_parallel_to_quad_misses() {
        let q = Primitive::new(Shape::Quad {
            corner: Vec3::new(-1.0, -1.0, 2.0),
            u: Vec3::new(2.0, 0.0, 0.0),
            v: Vec3::new(0.0, 2.0, 0.0),
        })
        .to_elements(&Transform::IDENTITY, 0, 0)
        .remove(0);
        assert!(q.hit(&Ray::new(Vec3::new(0.0, 0.0, 2.0), Vec3::X), 1e9, 0).is_none());
        let h = q.hit(&Ray::new(Vec3::ZERO, Vec3::Z), 1e9, 0).unwrap();
        assert!((h.t - 2.0).abs() < 1e-12);
    }

    #[test]
    fn box_entry_and_exit() {
        let b = Primitive::new(Shape::Box {
            min: Vec3::new(-1.0, -1.0, 1.0),
            max: Vec3::new(1.0, 1.0, 1.2),
        })
        .to_elements(&Transform::IDENTITY, 0, 0)
        .remove(0);
        let h = b.hit(&Ray::new(Vec3::ZERO, Vec3::Z), 1e9, 0).unwrap();
        assert!((h.t - 1.0).abs() < 1e-12 && h.entering);
        assert!((h.normal + Vec3::Z).length() < 1e-12);
        let inside = Ray::new(Vec3::new(0.0, 0.0, 1.0), Vec3::Z);
        let h = b.hit(&inside, 1e9, 0).unwrap();
        assert!((h.t - 0.2).abs() < 1e-12 && !h.entering);
    }

    #[test]
    fn rotated_box_matches_analytic_distance() {
        // Unit cube rotated 45 degrees about y: the corner edge faces the ray.
        let p = Primitive {
            shape: Shape::Box {
                min: Vec3::splat(-0.5),
                max: Vec3::splat(0.5),
            },
            transform: Transform {
                translation: Vec3::new(0.0, 0.0, 4.0),
                rotation: super::super::Quat::from_axis_angle(Vec3::Y, std::f64::consts::FRAC_PI_4),
                scale: 2.0,
            },
        };
        let e = p.to_elements(&Transform::IDENTITY, 0, 0).remove(0);
        let h = e.hit(&Ray::new(Vec3::ZERO, Vec3::Z), 1e9, 0).unwrap();
        assert!((h.t - (4.0 - 2f64.sqrt())).abs() < 1e-9);
    }

    #[test]
    fn tetrahedron_is_watertight_and_open_fan_is_not() {
        let vertices = vec![Vec3::ZERO, Vec3::X, Vec3::Y, Vec3::Z];
        let closed = Shape::TriangleMesh {
            vertices: vertices.clone(),
            triangles: vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]],
        };
        assert!(closed.is_watertight());
        let open = Shape::TriangleMesh {
            vertices,
            triangles: vec![[0, 2, 1], [0, 1, 3], [0, 3, 2]],
        };
        assert!(!open.is_watertight());
        assert!(!Shape::Quad {
            corner: Vec3::ZERO,
            u: Vec3::X,
            v: Vec3::Y
        }
        .is_watertight());
    }

    #[test]
    fn invalid_shapes_are_rejected() {
        assert!(Shape::Sphere {
            center: Vec3::ZERO,
            radius: 0.0
        }
        .validate()
        .is_err());
        assert!(Shape::Box {
            min: Vec3::ONE,
            max: Vec3::ZERO
        }
        .validate()
        .is_err());
        assert!(Shape::TriangleMesh {
            vertices: vec![Vec3::ZERO],
            triangles: vec![[0, 1, 2]]
        }
        .validate()
        .is_err());
    }
}
