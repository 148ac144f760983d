//! Beauty and layered ground-truth render passes.

mod layers;
mod ldgt;
mod rgb;
mod scene;

use serde::{Deserialize, Serialize};

pub use layers::{
    render_depth, render_layers, tiles, trace_layers, trace_layers_bounded, LayerHit,
    LayeredDepthMap, TransMask, Transition, DEFAULT_MAX_BOUNCES,
};
pub use ldgt::{
    decode_ldgt, encode_ldgt, read_ldgt, write_ldgt, LdgtError, LDGT_HEADER_LEN, LDGT_MAGIC,
    LDGT_VERSION,
};
pub use rgb::{render_rgb, render_rgb_linear, save_png, tonemap};
pub use scene::RenderScene;

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error("invalid render config: {0}")]
    Config(String),
    #[error("image encoding failed: {0}")]
    Image(#[from] image::ImageError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderConfig {
    pub width: u32,
    pub height: u32,
    /// Jittered samples per pixel in the RGB pass.
    pub spp: u32,
    pub max_bounce: u32,
    pub max_layers: u32,
    pub tile_size: u32,
    pub seed: u64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            width: 320,
            height: 240,
            spp: 4,
            max_bounce: 8,
            max_layers: 8,
            tile_size: 32,
            seed: 0,
        }
    }
}

impl RenderConfig {
    pub fn new(width: u32, height: u32) -> Self {
        RenderConfig {
            width,
            height,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), RenderError> {
        let problem = if self.width == 0 || self.height == 0 {
            "resolution must be at least 1x1"
        } else if self.spp == 0 {
            "spp must be at least 1"
        } else if !(1..=255).contains(&self.max_layers) {
            "max_layers must be in 1..=255"
        } else if self.tile_size == 0 {
            "tile_size must be at least 1"
        } else {
            return Ok(());
        };
        Err(RenderError::Config(problem.into()))
    }
}
