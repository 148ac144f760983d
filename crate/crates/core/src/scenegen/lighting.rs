use super::{DiscoEmitter, LightSpec, LightingWeights, Rgb, RoomSpec};
use crate::geometry::Vec3;
use crate::rng::DetRng;

/// Lighting style drawn for a scene.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LightingStyle {
    /// Warm ceiling point lights, sometimes with a ceiling panel.
    Standard,
    /// Several saturated colored point emitters.
    Disco,
    /// Bright uniform sky plus one key light.
    Environment,
}

/// Fully saturated-ish hue: max component 1, min component at most 0.25.
pub fn saturated_hue(rng: &mut DetRng) -> Rgb {
    let h = rng.range(0.0, 6.0);
    let s = rng.range(0.75, 1.0);
    let lo = 1.0 - s;
    let f = h - libm::floor(h);
    let (rise, fall) = (lo + (1.0 - lo) * f, 1.0 - (1.0 - lo) * f);
    match h as u32 {
        0 => Vec3::new(1.0, rise, lo),
        1 => Vec3::new(fall, 1.0, lo),
        2 => Vec3::new(lo, 1.0, rise),
        3 => Vec3::new(lo, fall, 1.0),
        4 => Vec3::new(rise, lo, 1.0),
        _ => Vec3::new(1.0, lo, fall),
    }
}

fn ceiling_point(room: &RoomSpec, rng: &mut DetRng) -> Vec3 {
    Vec3::new(
        rng.range(0.2, 0.8) * room.width,
        room.height - rng.range(0.15, 0.4),
        rng.range(0.2, 0.8) * room.depth,
    )
}

fn upper_point(room: &RoomSpec, rng: &mut DetRng) -> Vec3 {
    Vec3::new(
        rng.range(0.1, 0.9) * room.width,
        rng.range(0.5, 0.92) * room.height,
        rng.range(0.1, 0.9) * room.depth,
    )
}

pub fn sample_style(rng: &mut DetRng, weights: &LightingWeights) -> LightingStyle {
    match rng.weighted(&weights.as_array()) {
        0 => LightingStyle::Standard,
        1 => LightingStyle::Disco,
        _ => LightingStyle::Environment,
    }
}

/// Draws a lighting style by weight and builds its lights inside `room`.
pub fn gen_lighting(
    rng: &mut DetRng,
    weights: &LightingWeights,
    room: &RoomSpec,
) -> (LightingStyle, Vec<LightSpec>) {
    let style = sample_style(rng, weights);
    let lights = match style {
        LightingStyle::Standard => {
            let n = rng.int_in(1, 3);
            let mut lights: Vec<LightSpec> = (0..n)
                .map(|_| {
                    let warmth = rng.range(0.8, 1.0);
                    let power = rng.range(4.0, 10.0);
                    LightSpec::Point {
                        position: ceiling_point(room, rng),
                        intensity: Vec3::new(1.0, warmth, warmth * warmth) * power,
                    }
                })
                .collect();
            if rng.bernoulli(0.5) {
                let (sx, sz) = (rng.range(0.4, 1.0), rng.range(0.4, 1.0));
                let c = ceiling_point(room, rng);
                // Facing down: u × v = -y.
                lights.push(LightSpec::Area {
                    corner: Vec3::new(c.x - sx / 2.0, room.height - 0.01, c.z - sz / 2.0),
                    u: Vec3::new(0.0, 0.0, sz),
                    v: Vec3::new(sx, 0.0, 0.0),
                    emission: Vec3::splat(rng.range(2.0, 5.0)),
                });
            }
            lights
        }
        LightingStyle::Disco => {
            let n = rng.int_in(3, 8);
            let emitters = (0..n)
                .map(|_| DiscoEmitter {
                    position: upper_point(room, rng),
                    color: saturated_hue(rng),
                    power: rng.range(3.0, 8.0),
                })
                .collect();
            vec![LightSpec::Disco {
                position: Vec3::new(room.width / 2.0, room.height - 0.3, room.depth / 2.0),
                emitters,
            }]
        }
        LightingStyle::Environment => {
            let b = rng.range(0.4, 0.9);
            vec![
                LightSpec::Environment {
                    sky: Vec3::new(0.85 * b, 0.92 * b, b),
                },
                LightSpec::Point {
                    position: ceiling_point(room, rng),
                    intensity: Vec3::splat(rng.range(3.0, 8.0)),
                },
            ]
        }
    };
    (style, lights)
}
