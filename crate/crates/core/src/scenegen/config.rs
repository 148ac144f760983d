use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::SceneError;
use crate::canonical::to_canonical_json;

/// Relative weights of the three lighting styles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LightingWeights {
    pub standard: f64,
    pub disco: f64,
    pub environment: f64,
}

impl LightingWeights {
    pub fn as_array(&self) -> [f64; 3] {
        [self.standard, self.disco, self.environment]
    }
}

/// Relative weights of the camera placement modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraWeights {
    pub room: f64,
    pub close_up: f64,
}

impl CameraWeights {
    pub fn as_array(&self) -> [f64; 2] {
        [self.room, self.close_up]
    }
}

/// Parameters of the procedural generator. Missing fields in a config file
/// take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub room_width: [f64; 2],
    pub room_depth: [f64; 2],
    pub room_height: [f64; 2],
    pub object_count: [u32; 2],
    /// Probability that an eligible part becomes transmissive.
    pub p_transparent: f64,
    /// Probability of trying to stack an object on an existing support.
    pub p_stack: f64,
    pub lighting: LightingWeights,
    pub camera: CameraWeights,
    /// Placement attempts per object before generation fails.
    pub max_retries: u32,
    /// Image size stored in the scene camera.
    pub width: u32,
    pub height: u32,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            room_width: [4.0, 8.0],
            room_depth: [4.0, 8.0],
            room_height: [2.6, 3.4],
            object_count: [4, 9],
            p_transparent: 0.5,
            p_stack: 0.35,
            lighting: LightingWeights {
                standard: 1.0,
                disco: 1.0,
                environment: 1.0,
            },
            camera: CameraWeights {
                room: 1.0,
                close_up: 1.0,
            },
            max_retries: 100,
            width: 320,
            height: 240,
        }
    }
}

fn range_ok(r: [f64; 2], min: f64) -> bool {
    r[0].is_finite() && r[1].is_finite() && r[0] >= min && r[0] <= r[1]
}

fn weights_ok(w: &[f64]) -> bool {
    w.iter().all(|x| x.is_finite() && *x >= 0.0) && w.iter().any(|x| *x > 0.0)
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), SceneError> {
        let bad = |m: &str| Err(SceneError::Config(m.to_string()));
        if !range_ok(self.room_width, 1.0) || !range_ok(self.room_depth, 1.0) {
            return bad("room_width/room_depth must be ordered ranges of at least 1 m");
        }
        if !range_ok(self.room_height, 1.5) {
            return bad("room_height must be an ordered range of at least 1.5 m");
        }
        if self.object_count[0] < 1 || self.object_count[0] > self.object_count[1] {
            return bad("object_count must be an ordered range starting at 1 or more");
        }
        if !(0.0..=1.0).contains(&self.p_transparent) || !(0.0..=1.0).contains(&self.p_stack) {
            return bad("probabilities must lie in [0, 1]");
        }
        if !weights_ok(&self.lighting.as_array()) || !weights_ok(&self.camera.as_array()) {
            return bad("weights must be non-negative and not all zero");
        }
        if self.max_retries == 0 {
            return bad("max_retries must be at least 1");
        }
        if self.width == 0 || self.height == 0 {
            return bad("width/height must be at least 1");
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let bytes = to_canonical_json(self).expect("config always serializes");
        let digest = Sha256::digest(&bytes);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, SceneError> {
        let de = &mut serde_json::Deserializer::from_slice(bytes);
        let cfg: GeneratorConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            SceneError::Parse {
                path,
                line: inner.line(),
                column: inner.column(),
                message: inner.to_string(),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Vec<u8> {
        to_canonical_json(self).expect("config always serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid_and_round_trips() {
        let c = GeneratorConfig::default();
        c.validate().unwrap();
        assert_eq!(GeneratorConfig::from_json(&c.to_json()).unwrap(), c);
        assert_eq!(c.hash().len(), 64);
    }

    #[test]
    fn partial_file_takes_defaults() {
        let c = GeneratorConfig::from_json(br#"{"p_transparent": 0.0}"#).unwrap();
        assert_eq!(c.p_transparent, 0.0);
        assert_eq!(c.object_count, GeneratorConfig::default().object_count);
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(GeneratorConfig::from_json(br#"{"p_transparent": 1.5}"#).is_err());
        assert!(GeneratorConfig::from_json(br#"{"object_count": [5, 2]}"#).is_err());
        assert!(GeneratorConfig::from_json(
            br#"{"lighting": {"standard": 0, "disco": 0, "environment": 0}}"#
        )
        .is_err());
        assert!(matches!(
            GeneratorConfig::from_json(br#"{"objects": 3}"#),
            Err(SceneError::Parse { .. })
        ));
    }
}
