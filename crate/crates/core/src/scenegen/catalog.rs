//! Parametric object families. Every object is built in a local frame with
//! its base on `y = 0`, centered on the y axis. Parts of one object are kept
//! at least [`PART_GAP`] apart so no two surfaces coincide.

use crate::geometry::{Primitive, Shape, Vec3};
use crate::rng::DetRng;

/// Clearance between neighbouring parts, and between objects and supports.
pub const PART_GAP: f64 = 0.002;

const LATHE_SEGMENTS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Pane,
    Door,
    Table,
    OpenBox,
    Shelf,
    DrinkingGlass,
    Bottle,
    Bowl,
    Vase,
    Ball,
    Slab,
    Sign,
}

impl Family {
    pub const ALL: [Family; 12] = [
        Family::Pane,
        Family::Door,
        Family::Table,
        Family::OpenBox,
        Family::Shelf,
        Family::DrinkingGlass,
        Family::Bottle,
        Family::Bowl,
        Family::Vase,
        Family::Ball,
        Family::Slab,
        Family::Sign,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Pane => "pane",
            Family::Door => "door",
            Family::Table => "table",
            Family::OpenBox => "open_box",
            Family::Shelf => "shelf",
            Family::DrinkingGlass => "drinking_glass",
            Family::Bottle => "bottle",
            Family::Bowl => "bowl",
            Family::Vase => "vase",
            Family::Ball => "ball",
            Family::Slab => "slab",
            Family::Sign => "sign",
        }
    }

    /// Small enough to sit on a table or shelf.
    pub fn stackable(self) -> bool {
        matches!(
            self,
            Family::DrinkingGlass
                | Family::Bottle
                | Family::Bowl
                | Family::Vase
                | Family::Ball
                | Family::Slab
                | Family::OpenBox
        )
    }
}

/// Horizontal surface other objects may rest on, in the object's local frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub top: f64,
    pub half_x: f64,
    pub half_z: f64,
}

#[derive(Debug, Clone)]
pub struct Built {
    pub parts: Vec<Primitive>,
    pub support: Option<Support>,
}


fn cuboid(min: [f64; 3], max: [f64; 3]) -> Primitive {
    Primitive::new(Shape::Box {
        min: min.into(),
        max: max.into(),
    })
}

/// Revolves a closed `(radius, height)` polygon about the y axis into a
/// watertight mesh with outward-facing triangles. Profile points with zero
/// radius collapse to a single pole vertex.
pub fn lathe(profile: &[(f64, f64)], segments: usize) -> Shape {
    let mut vertices = Vec::new();
    let mut rings: Vec<Vec<u32>> = Vec::with_capacity(profile.len());
    for &(r, y) in profile {
        if r <= 0.0 {
            rings.push(vec![vertices.len() as u32]);
            vertices.push(Vec3::new(0.0, y, 0.0));
        } else {
            let ring = (0..segments)
                .map(|k| {
                    let a = std::f64::consts::TAU * k as f64 / segments as f64;
                    vertices.push(Vec3::new(r * libm::cos(a), y, r * libm::sin(a)));
                    (vertices.len() - 1) as u32
                })
                .collect();
            rings.push(ring);
        }
    }
    let at = |ring: &Vec<u32>, k: usize| ring[if ring.len() == 1 { 0 } else { k % segments }];
    let mut triangles = Vec::new();
    for i in 0..profile.len() {
        let (ri, rj) = (&rings[i], &rings[(i + 1) % profile.len()]);
        if ri.len() == 1 && rj.len() == 1 {
            continue;
        }
        for k in 0..segments {
            let (a, b) = (at(ri, k), at(ri, k + 1));
            let (c, d) = (at(rj, k + 1), at(rj, k));
            if a != b {
                triangles.push([a, b, c]);
            }
            if c != d {
                triangles.push([a, c, d]);
            }
        }
    }
    let volume: f64 = triangles
        .iter()
        .map(|t| {
            let [a, b, c] = t.map(|i| vertices[i as usize]);
            a.dot(b.cross(c))
        })
        .sum();
    if volume < 0.0 {
        for t in &mut triangles {
            t.swap(1, 2);
        }
    }
    Shape::TriangleMesh {
        vertices,
        triangles,
    }
}

fn mesh(profile: &[(f64, f64)]) -> Primitive {
    Primitive::new(lathe(profile, LATHE_SEGMENTS))
}

/// Builds a randomized instance of `family`.
pub fn build(family: Family, rng: &mut DetRng) -> Built {
    let g = PART_GAP;
    let mut support = None;
    let parts = match family {
        Family::Pane => {
            let (w, h, t) = (rng.range(0.5, 1.4), rng.range(0.6, 1.8), rng.range(0.008, 0.03));
            vec![cuboid([-w / 2.0, 0.0, -t / 2.0], [w / 2.0, h, t / 2.0])]
        }
        Family::Door => {
            let (w, h) = (rng.range(0.7, 1.0), rng.range(1.8, 2.1));
            let (f, t) = (rng.range(0.04, 0.08), 0.04);
            let (x0, x1) = (-w / 2.0, w / 2.0);
            vec![
                cuboid([x0, 0.0, -t / 2.0], [x0 + f, h, t / 2.0]),
                cuboid([x1 - f, 0.0, -t / 2.0], [x1, h, t / 2.0]),
                cuboid([x0 + f + g, 0.0, -t / 2.0], [x1 - f - g, f, t / 2.0]),
                cuboid([x0 + f + g, h - f, -t / 2.0], [x1 - f - g, h, t / 2.0]),
                cuboid([x0 + f + g, f + g, -t / 4.0], [x1 - f - g, h - f - g, t / 4.0]),
            ]
        }
        Family::Table => {
            let (l, d, h) = (rng.range(0.8, 1.6), rng.range(0.6, 1.0), rng.range(0.7, 0.8));
            let (top, leg, inset) = (rng.range(0.02, 0.05), rng.range(0.04, 0.07), 0.05);
            support = Some(Support {
                top: h,
                half_x: l / 2.0,
                half_z: d / 2.0,
            });
            let mut parts = vec![cuboid([-l / 2.0, h - top, -d / 2.0], [l / 2.0, h, d / 2.0])];
            for sx in [-1.0, 1.0] {
                for sz in [-1.0, 1.0] {
                    let cx = sx * (l / 2.0 - inset - leg / 2.0);
                    let cz = sz * (d / 2.0 - inset - leg / 2.0);
                    parts.push(cuboid(
                        [cx - leg / 2.0, 0.0, cz - leg / 2.0],
                        [cx + leg / 2.0, h - top - g, cz + leg / 2.0],
                    ));
                }
            }
            parts
        }
        Family::OpenBox => {
            let (a, b, h) = (rng.range(0.12, 0.4), rng.range(0.12, 0.4), rng.range(0.12, 0.45));
            let t = rng.range(0.005, 0.02);
            vec![
                cuboid([-a, 0.0, -b], [a, t, b]),
                cuboid([-a, t + g, -b], [a, h, -b + t]),
                cuboid([-a, t + g, b - t], [a, h, b]),
                cuboid([-a, t + g, -b + t + g], [-a + t, h, b - t - g]),
                cuboid([a - t, t + g, -b + t + g], [a, h, b - t - g]),
            ]
        }
        Family::Shelf => {
            let (w, d, h) = (rng.range(0.6, 1.2), rng.range(0.25, 0.4), rng.range(0.8, 1.8));
            let t = rng.range(0.015, 0.03);
            let boards = rng.int_in(3, 5) as usize;
            support = Some(Support {
                top: h,
                half_x: w / 2.0 - t,
                half_z: d / 2.0,
            });
            let mut parts = vec![
                cuboid([-w / 2.0, 0.0, -d / 2.0], [-w / 2.0 + t, h, d / 2.0]),
                cuboid([w / 2.0 - t, 0.0, -d / 2.0], [w / 2.0, h, d / 2.0]),
            ];
            for i in 0..boards {
                let y = i as f64 * (h - t) / (boards - 1) as f64;
                parts.push(cuboid(
                    [-w / 2.0 + t + g, y, -d / 2.0],
                    [w / 2.0 - t - g, y + t, d / 2.0],
                ));
            }
            parts
        }
        Family::DrinkingGlass => {
            let (r, h) = (rng.range(0.03, 0.05), rng.range(0.08, 0.16));
            let (w, b) = (rng.range(0.002, 0.005), rng.range(0.005, 0.015));
            vec![mesh(&[
                (0.0, 0.0),
                (r, 0.0),
                (r, h),
                (r - w, h),
                (r - w, b),
                (0.0, b),
            ])]
        }
        Family::Bottle => {
            let (r, h) = (rng.range(0.03, 0.06), rng.range(0.2, 0.35));
            let neck = r * rng.range(0.25, 0.4);
            let (h1, h2) = (0.6 * h, 0.75 * h);
            let (w, b) = (rng.range(0.002, 0.004), rng.range(0.004, 0.01));
            vec![mesh(&[
                (0.0, 0.0),
                (r, 0.0),
                (r, h1),
                (neck, h2),
                (neck, h),
                (neck - w, h),
                (neck - w, h2),
                (r - w, h1),
                (r - w, b),
                (0.0, b),
            ])]
        }
        Family::Bowl => {
            let (r0, r, h) = (rng.range(0.03, 0.06), rng.range(0.08, 0.15), rng.range(0.05, 0.1));
            let (w, b) = (rng.range(0.003, 0.006), rng.range(0.005, 0.01));
            vec![mesh(&[
                (0.0, 0.0),
                (r0, 0.0),
                (r, h),
                (r - w, h),
                (r0 - w + (r - r0) * b / h, b),
                (0.0, b),
            ])]
        }
        Family::Vase => {
            let r = rng.range(0.06, 0.12);
            let h = rng.range(0.2, 0.45);
            let radii = [0.6 * r, r, 0.7 * r, 0.5 * r];
            let ys = [0.0, 0.3 * h, 0.7 * h, h];
            let (w, b) = (rng.range(0.003, 0.006), rng.range(0.006, 0.012));
            let base_inner = radii[0] - w + (radii[1] - radii[0]) * b / ys[1];
            vec![mesh(&[
                (0.0, 0.0),
                (radii[0], ys[0]),
                (radii[1], ys[1]),
                (radii[2], ys[2]),
                (radii[3], ys[3]),
                (radii[3] - w, ys[3]),
                (radii[2] - w, ys[2]),
                (radii[1] - w, ys[1]),
                (base_inner, b),
                (0.0, b),
            ])]
        }
        Family::Ball => {
            let r = rng.range(0.05, 0.25);
            vec![Primitive::new(Shape::Sphere {
                center: Vec3::new(0.0, r, 0.0),
                radius: r,
            })]
        }
        Family::Slab => {
            let (a, b, h) = (rng.range(0.1, 0.4), rng.range(0.1, 0.4), rng.range(0.03, 0.3));
            support = Some(Support {
                top: h,
                half_x: a,
                half_z: b,
            });
            vec![cuboid([-a, 0.0, -b], [a, h, b])]
        }
        Family::Sign => {
            let (w, h, t) = (rng.range(0.4, 1.0), rng.range(0.5, 1.2), rng.range(0.02, 0.04));
            let m = 0.1 * w.min(h);
            vec![
                cuboid([-w / 2.0, 0.0, -t / 2.0], [w / 2.0, h, t / 2.0]),
                Primitive::new(Shape::Quad {
                    corner: Vec3::new(-w / 2.0 + m, m, t / 2.0 + g),
                    u: Vec3::new(w - 2.0 * m, 0.0, 0.0),
                    v: Vec3::new(0.0, h - 2.0 * m, 0.0),
                }),
            ]
        }
    };
    Built { parts, support }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Aabb, Geometry, Ray, Transform};

    #[test]
    fn every_family_builds_valid_parts_that_keep_apart() {
        let mut rng = DetRng::new(11);
        for family in Family::ALL {
            for _ in 0..20 {
                let built = build(family, &mut rng);
                assert!(!built.parts.is_empty());
                let boxes: Vec<Aabb> = built
                    .parts
                    .iter()
                    .map(|p| {
                        p.shape.validate().unwrap();
                        p.bounds(&Transform::IDENTITY)
                    })
                    .collect();
                let lowest = boxes.iter().map(|b| b.min.y).fold(f64::INFINITY, f64::min);
                assert!(lowest.abs() < 1e-6, "{family:?} base at {lowest}");
                // Box parts are pairwise separated.
                for i in 0..boxes.len() {
                    for j in i + 1..boxes.len() {
                        if matches!(built.parts[i].shape, Shape::Box { .. })
                            && matches!(built.parts[j].shape, Shape::Box { .. })
                        {
                            assert!(
                                !boxes[i].pad(-1e-4).overlaps(&boxes[j].pad(-1e-4)),
                                "{family:?} parts {i} and {j} touch"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn lathe_solids_are_watertight_and_outward() {
        let mut rng = DetRng::new(12);
        for family in [Family::DrinkingGlass, Family::Bottle, Family::Bowl, Family::Vase] {
            let built = build(family, &mut rng);
            let shape = &built.parts[0].shape;
            assert!(shape.is_watertight(), "{family:?}");
            // A ray from far outside toward the axis enters first.
            let g = Geometry::new(built.parts[0].to_elements(&Transform::IDENTITY, 0, 0));
            let h = g
                .intersect(&Ray::new(Vec3::new(5.0, 0.002, 0.0013), -Vec3::X))
                .expect("hits the vessel");
            assert!(h.entering, "{family:?}");
        }
    }

    #[test]
    fn crossing_a_glass_wall_enters_then_exits() {
        let shape = lathe(
            &[(0.0, 0.0), (1.0, 0.0), (1.0, 2.0), (0.9, 2.0), (0.9, 0.2), (0.0, 0.2)],
            64,
        );
        let g = Geometry::new(Primitive::new(shape).to_elements(&Transform::IDENTITY, 0, 0));
        let mut ray = Ray::new(Vec3::new(-5.0, 1.0, 0.01), Vec3::X);
        let mut kinds = vec![];
        while let Some(h) = g.intersect(&ray) {
            kinds.push(h.entering);
            ray = ray.continued(h.point, ray.direction);
        }
        assert_eq!(kinds, vec![true, false, true, false]);
    }
}
