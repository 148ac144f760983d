use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{RenderConfig, RenderScene};
use crate::geometry::{reflect_dir, refract_dir, Ray};
use crate::scenegen::MaterialSpec;

/// Kind of medium transition recorded as a layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transition {
    EnterTransmissive,
    ExitTransmissive,
    OpaqueTerminal,
}

/// One recorded layer along a camera ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerHit {
    /// 1-based.
    pub layer: u32,
    /// Camera-space z of the hit point.
    pub depth: f64,
    pub material: u32,
    pub transition: Transition,
}

/// Total internal reflections followed before a ray is abandoned, when no
/// render config says otherwise.
pub const DEFAULT_MAX_BOUNCES: usize = 8;

/// Follows a primary ray through the scene and records one layer per medium
/// transition.
///
/// Transmissive surfaces only refract: the ray continues along the refracted
/// direction and the interface is logged. Total internal reflection bends the
/// ray back without logging anything. A diffuse surface is logged as the
/// terminal layer. Tracing stops at `max_layers`, when the ray escapes, or
/// when reflections carry it to a surface at or behind the camera plane,
/// where no positive depth exists.
pub fn trace_layers(ray: Ray, scene: &RenderScene, max_layers: usize) -> Vec<LayerHit> {
    trace_layers_bounded(ray, scene, max_layers, DEFAULT_MAX_BOUNCES)
}

/// [`trace_layers`] with an explicit bound on total internal reflections.
pub fn trace_layers_bounded(
    mut ray: Ray,
    scene: &RenderScene,
    max_layers: usize,
    max_bounces: usize,
) -> Vec<LayerHit> {
    let mut hits = Vec::new();
    let mut bounces = 0;
    while hits.len() < max_layers {
        let Some(hit) = scene.intersect(&ray) else {
            break;
        };
        let depth = scene.camera.depth_of(hit.point);
        if !(depth as f32 > 0.0) {
            break;
        }
        let layer = hits.len() as u32 + 1;
        match scene.material(hit.material) {
            MaterialSpec::Diffuse { .. } => {
                hits.push(LayerHit {
                    layer,
                    depth,
                    material: hit.material,
                    transition: Transition::OpaqueTerminal,
                });
                break;
            }
            MaterialSpec::Transmissive { ior, .. } => {
                let n_from = ray.media.current();
                let n_to = ray.media.index_beyond(*ior, hit.entering);
                match refract_dir(ray.direction, hit.normal, n_from / n_to) {
                    Some(dir) => {
                        let mut next = ray.continued(hit.point, dir);
                        let transition = if hit.entering {
                            next.media.push(*ior);
                            Transition::EnterTransmissive
                        } else {
                            next.media.exit(*ior);
                            Transition::ExitTransmissive
                        };
                        hits.push(LayerHit {
                            layer,
                            depth,
                            material: hit.material,
                            transition,
                        });
                        ray = next;
                    }
                    None => {
                        bounces += 1;
                        if bounces > max_bounces {
                            break;
                        }
                        ray = ray.continued(hit.point, reflect_dir(ray.direction, hit.normal));
                    }
                }
            }
        }
    }
    hits
}

/// Per-pixel ordered layer depths. Depths are stored in ray-traversal order;
/// unused slots hold NaN.
#[derive(Debug, Clone)]
pub struct LayeredDepthMap {
    width: u32,
    height: u32,
    max_layers: u32,
    counts: Vec<u8>,
    depths: Vec<f32>,
}

// Equal when dimensions, counts and recorded depths agree bitwise; unused slots are ignored.
impl PartialEq for LayeredDepthMap {
    fn eq(&self, other: &Self) -> bool {
        (self.width, self.height, self.max_layers) == (other.width, other.height, other.max_layers)
            && self.counts == other.counts
            && (0..self.counts.len()).all(|i| {
                let (a, b) = (self.layers_at(i), other.layers_at(i));
                a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
            })
    }
}

impl LayeredDepthMap {
    /// Empty map; `max_layers` must lie in `1..=255`.
    pub fn new(width: u32, height: u32, max_layers: u32) -> Self {
        assert!((1..=255).contains(&max_layers), "max_layers must lie in 1..=255");
        let n = width as usize * height as usize;
        LayeredDepthMap {
            width,
            height,
            max_layers,
            counts: vec![0; n],
            depths: vec![f32::NAN; n * max_layers as usize],
        }
    }

    /// Single-layer map from a dense depth image; NaN pixels have no layer.
    pub fn from_single(width: u32, height: u32, depth: &[f32]) -> Self {
        let mut m = LayeredDepthMap::new(width, height, 1);
        for (i, &d) in depth.iter().enumerate() {
            if !d.is_nan() {
                m.set_index(i, &[d]);
            }
        }
        m
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn max_layers(&self) -> u32 {
        self.max_layers
    }

    pub fn pixel_count(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u8] {
        &self.counts
    }

    #[inline]
    pub fn index(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    #[inline]
    pub fn count_at(&self, i: usize) -> usize {
        self.counts[i] as usize
    }

    /// Recorded depths of pixel index `i`.
    #[inline]
    pub fn layers_at(&self, i: usize) -> &[f32] {
        let s = i * self.max_layers as usize;
        &self.depths[s..s + self.counts[i] as usize]
    }

    pub fn layers(&self, x: u32, y: u32) -> &[f32] {
        self.layers_at(self.index(x, y))
    }

    /// Depth of 1-based `layer` at pixel index `i`.
    pub fn layer_at(&self, i: usize, layer: u32) -> Option<f32> {
        if layer == 0 {
            return None;
        }
        self.layers_at(i).get(layer as usize - 1).copied()
    }

    pub fn first_at(&self, i: usize) -> Option<f32> {
        self.layers_at(i).first().copied()
    }

    pub fn last_at(&self, i: usize) -> Option<f32> {
        self.layers_at(i).last().copied()
    }

    /// Replaces the layers of pixel index `i`; extra depths beyond `max_layers` are dropped.
    pub fn set_index(&mut self, i: usize, depths: &[f32]) {
        let k = depths.len().min(self.max_layers as usize);
        let s = i * self.max_layers as usize;
        let slot = &mut self.depths[s..s + self.max_layers as usize];
        slot.fill(f32::NAN);
        slot[..k].copy_from_slice(&depths[..k]);
        self.counts[i] = k as u8;
    }

    pub fn set(&mut self, x: u32, y: u32, depths: &[f32]) {
        let i = self.index(x, y);
        self.set_index(i, depths);
    }

    /// Dense image of one 1-based layer; NaN where the pixel has fewer layers.
    pub fn layer_image(&self, layer: u32) -> Vec<f32> {
        (0..self.pixel_count())
            .map(|i| self.layer_at(i, layer).unwrap_or(f32::NAN))
            .collect()
    }

    /// Applies `f(pixel, layer, depth)` to every recorded depth.
    pub fn map_depths(&self, mut f: impl FnMut(usize, u32, f32) -> f32) -> Self {
        let mut out = self.clone();
        for i in 0..self.pixel_count() {
            let d: Vec<f32> = self
                .layers_at(i)
                .iter()
                .enumerate()
                .map(|(l, &v)| f(i, l as u32 + 1, v))
                .collect();
            out.set_index(i, &d);
        }
        out
    }
}

/// Pixels whose first recorded surface is transmissive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransMask {
    width: u32,
    height: u32,
    data: Vec<bool>,
}

impl TransMask {
    pub fn new(width: u32, height: u32) -> Self {
        TransMask {
            width,
            height,
            data: vec![false; width as usize * height as usize],
        }
    }

    pub fn from_vec(width: u32, height: u32, data: Vec<bool>) -> Self {
        assert_eq!(data.len(), width as usize * height as usize);
        TransMask {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.data
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.data[y as usize * self.width as usize + x as usize]
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }
}

/// Rectangular pixel tiles covering a `width × height` image in row-major
/// tile order: `(x0, y0, x1, y1)`, exclusive upper bounds.
pub fn tiles(width: u32, height: u32, tile: u32) -> Vec<(u32, u32, u32, u32)> {
    let tile = tile.max(1);
    let mut out = Vec::new();
    for y0 in (0..height).step_by(tile as usize) {
        for x0 in (0..width).step_by(tile as usize) {
            out.push((x0, y0, (x0 + tile).min(width), (y0 + tile).min(height)));
        }
    }
    out
}

/// Renders per-tile pixel values in parallel and scatters them row-major.
pub(crate) fn render_tiled<T, F>(width: u32, height: u32, tile: u32, f: F) -> Vec<T>
where
    T: Send + Clone + Default,
    F: Fn(u32, u32) -> T + Sync,
{
    let parts: Vec<((u32, u32, u32, u32), Vec<T>)> = tiles(width, height, tile)
        .into_par_iter()
        .map(|t| {
            let (x0, y0, x1, y1) = t;
            let mut v = Vec::with_capacity(((x1 - x0) * (y1 - y0)) as usize);
            for y in y0..y1 {
                for x in x0..x1 {
                    v.push(f(x, y));
                }
            }
            (t, v)
        })
        .collect();
    let mut out = vec![T::default(); width as usize * height as usize];
    for ((x0, y0, x1, _), v) in parts {
        let w = (x1 - x0) as usize;
        for (k, val) in v.into_iter().enumerate() {
            let (dx, dy) = ((k % w) as u32, (k / w) as u32);
            out[((y0 + dy) * width + x0 + dx) as usize] = val;
        }
    }
    out
}

/// Ground-truth pass: one pixel-center ray per pixel through [`trace_layers`].
/// Uses the scene camera at the config resolution.
pub fn render_layers(scene: &RenderScene, cfg: &RenderConfig) -> (LayeredDepthMap, TransMask) {
    let scene = scene.with_resolution(cfg.width, cfg.height);
    let max_layers = cfg.max_layers as usize;
    let traced: Vec<Vec<LayerHit>> = render_tiled(cfg.width, cfg.height, cfg.tile_size, |x, y| {
        let ray = scene
            .camera
            .ray(x, y, (0.5, 0.5))
            .expect("tile pixels lie inside the image");
        trace_layers_bounded(ray, &scene, max_layers, cfg.max_bounce as usize)
    });
    let mut map = LayeredDepthMap::new(cfg.width, cfg.height, cfg.max_layers);
    let mut mask = Vec::with_capacity(traced.len());
    for (i, hits) in traced.iter().enumerate() {
        let d: Vec<f32> = hits.iter().map(|h| h.depth as f32).collect();
        map.set_index(i, &d);
        mask.push(hits.first().map(|h| h.transition) == Some(Transition::EnterTransmissive));
    }
    (map, TransMask::from_vec(cfg.width, cfg.height, mask))
}

/// Plain depth render: camera-space z of the first surface, NaN on escape.
pub fn render_depth(scene: &RenderScene, cfg: &RenderConfig) -> Vec<f32> {
    let scene = scene.with_resolution(cfg.width, cfg.height);
    render_tiled(cfg.width, cfg.height, cfg.tile_size, |x, y| {
        let ray = scene.camera.ray(x, y, (0.5, 0.5)).expect("pixel in range");
        scene
            .intersect(&ray)
            .map_or(f32::NAN, |h| scene.camera.depth_of(h.point) as f32)
    })
}
