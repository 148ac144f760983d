//! Whitted-style beauty pass.

use std::path::Path;

use image::RgbImage;

use super::layers::render_tiled;
use super::{RenderConfig, RenderError, RenderScene};
use crate::fsutil::write_atomic;
use crate::geometry::{fresnel_reflectance, reflect_dir, refract_dir, Ray, Vec3};
use crate::rng::DetRng;
use crate::scenegen::{LightSpec, MaterialSpec};

/// Transmissive interfaces below this recursion depth trace both the
/// reflected and refracted branch; deeper ones pick one by Fresnel weight.
const FULL_SPLIT_DEPTH: u32 = 2;
const MAX_SHADOW_CROSSINGS: usize = 16;

struct Shader<'a> {
    scene: &'a RenderScene,
    sky: Vec3,
    max_bounce: u32,
}

impl Shader<'_> {
    fn radiance(&self, ray: &Ray, depth: u32, rng: &mut DetRng) -> Vec3 {
        let Some(hit) = self.scene.intersect(ray) else {
            return self.sky;
        };
        match self.scene.material(hit.material) {
            MaterialSpec::Diffuse { albedo } => {
                let direct = self.direct(hit.point, hit.normal, rng);
                albedo.mul_elem(direct * std::f64::consts::FRAC_1_PI + self.sky)
            }
            MaterialSpec::Transmissive { ior, tint, .. } => {
                if depth >= self.max_bounce {
                    return Vec3::ZERO;
                }
                let n1 = ray.media.current();
                let n2 = ray.media.index_beyond(*ior, hit.entering);
                let cos_i = -ray.direction.dot(hit.normal);
                let refracted = refract_dir(ray.direction, hit.normal, n1 / n2);
                let f = if refracted.is_some() {
                    fresnel_reflectance(cos_i, n1, n2)
                } else {
                    1.0
                };
                let reflect = |rng: &mut DetRng| {
                    let r = ray.continued(hit.point, reflect_dir(ray.direction, hit.normal));
                    self.radiance(&r, depth + 1, rng)
                };
                let refract = |rng: &mut DetRng, dir: Vec3| {
                    let mut r = ray.continued(hit.point, dir);
                    if hit.entering {
                        r.media.push(*ior);
                        tint.mul_elem(self.radiance(&r, depth + 1, rng))
                    } else {
                        r.media.exit(*ior);
                        self.radiance(&r, depth + 1, rng)
                    }
                };
                match refracted {
                    None => reflect(rng),
                    Some(dir) if depth < FULL_SPLIT_DEPTH => {
                        reflect(rng) * f + refract(rng, dir) * (1.0 - f)
                    }
                    Some(dir) => {
                        if rng.uniform() < f {
                            reflect(rng)
                        } else {
                            refract(rng, dir)
                        }
                    }
                }
            }
        }
    }

    /// Irradiance at a diffuse point from all non-ambient lights.
    fn direct(&self, p: Vec3, n: Vec3, rng: &mut DetRng) -> Vec3 {
        let mut e = Vec3::ZERO;
        for light in self.scene.lights() {
            match light {
                LightSpec::Point {
                    position,
                    intensity,
                } => e += self.point_irradiance(p, n, *position, *intensity),
                LightSpec::Disco { emitters, .. } => {
                    for em in emitters {
                        e += self.point_irradiance(p, n, em.position, em.color * em.power);
                    }
                }
                LightSpec::Area {
                    corner,
                    u,
                    v,
                    emission,
                } => {
                    let q = *corner + *u * rng.uniform() + *v * rng.uniform();
                    let area_n = u.cross(*v);
                    let area = area_n.length();
                    let to = q - p;
                    let d2 = to.length_squared();
                    let l = to / d2.sqrt();
                    let cos_s = n.dot(l);
                    let cos_l = -(area_n / area).dot(l);
                    if cos_s > 0.0 && cos_l > 0.0 {
                        let t = self.transmittance(p, l, d2.sqrt());
                        e += emission.mul_elem(t) * (cos_s * cos_l * area / d2);
                    }
                }
                LightSpec::Environment { .. } => {}
            }
        }
        e
    }

    fn point_irradiance(&self, p: Vec3, n: Vec3, light: Vec3, intensity: Vec3) -> Vec3 {
        let to = light - p;
        let d2 = to.length_squared();
        let dist = d2.sqrt();
        let l = to / dist;
        let cos = n.dot(l);
        if cos <= 0.0 {
            return Vec3::ZERO;
        }
        intensity.mul_elem(self.transmittance(p, l, dist)) * (cos / d2)
    }

    /// Fraction of light reaching `p` from `dist` along `l`. Diffuse blockers
    /// are opaque; transmissive ones filter by their tint on entry.
    fn transmittance(&self, p: Vec3, l: Vec3, dist: f64) -> Vec3 {
        let mut ray = Ray::new(p, l);
        let mut remaining = dist;
        let mut t = Vec3::ONE;
        for _ in 0..MAX_SHADOW_CROSSINGS {
            let Some(hit) = self.scene.intersect(&ray) else {
                return t;
            };
            if hit.t >= remaining {
                return t;
            }
            match self.scene.material(hit.material) {
                MaterialSpec::Diffuse { .. } => return Vec3::ZERO,
                MaterialSpec::Transmissive { tint, .. } => {
                    if hit.entering {
                        t = t.mul_elem(*tint);
                    }
                }
            }
            remaining -= hit.t;
            ray = Ray::new(hit.point, l);
        }
        Vec3::ZERO
    }
}

/// Linear radiance per pixel, row-major. Each pixel draws its jitter from its
/// own stream keyed by `(cfg.seed, pixel index)`, so output is independent of
/// scheduling.
pub fn render_rgb_linear(scene: &RenderScene, cfg: &RenderConfig) -> Vec<Vec3> {
    let scene = scene.with_resolution(cfg.width, cfg.height);
    let sky = scene
        .lights()
        .iter()
        .filter_map(|l| match l {
            LightSpec::Environment { sky } => Some(*sky),
            _ => None,
        })
        .fold(Vec3::ZERO, |a, b| a + b);
    let shader = Shader {
        scene: &scene,
        sky,
        max_bounce: cfg.max_bounce,
    };
    let spp = cfg.spp.max(1);
    render_tiled(cfg.width, cfg.height, cfg.tile_size, |x, y| {
        let index = y as u64 * cfg.width as u64 + x as u64;
        let mut rng = DetRng::derive_indexed(cfg.seed, "rgb", index);
        let mut sum = Vec3::ZERO;
        for _ in 0..spp {
            let jitter = (rng.uniform(), rng.uniform());
            let ray = scene.camera.ray(x, y, jitter).expect("pixel in range");
            sum += shader.radiance(&ray, 0, &mut rng);
        }
        sum / spp as f64
    })
}

/// Reinhard per channel, then sRGB encoding.
pub fn tonemap(linear: &[Vec3], width: u32, height: u32) -> RgbImage {
    let encode = |c: f64| {
        let c = if c.is_finite() { c.max(0.0) } else { 0.0 };
        let r = c / (1.0 + c);
        let s = if r <= 0.003_130_8 {
            12.92 * r
        } else {
            1.055 * r.powf(1.0 / 2.4) - 0.055
        };
        (s * 255.0).round().clamp(0.0, 255.0) as u8
    };
    let mut img = RgbImage::new(width, height);
    for (px, c) in img.pixels_mut().zip(linear) {
        px.0 = [encode(c.x), encode(c.y), encode(c.z)];
    }
    img
}

pub fn render_rgb(scene: &RenderScene, cfg: &RenderConfig) -> RgbImage {
    tonemap(&render_rgb_linear(scene, cfg), cfg.width, cfg.height)
}

pub fn save_png(img: &RgbImage, path: &Path) -> Result<(), RenderError> {
    let mut buf = std::io::Cursor::new(Vec::new());
    img.write_to(&mut buf, image::ImageFormat::Png)?;
    write_atomic(path, buf.get_ref())?;
    Ok(())
}
