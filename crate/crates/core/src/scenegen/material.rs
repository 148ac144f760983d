use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;
use crate::rng::DetRng;

/// Linear RGB triple.
pub type Rgb = Vec3;

/// Kinds of transmissive material, each with a fixed refractive index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransmissiveKind {
    Glass,
    Plastic,
    Water,
    Ice,
}

impl TransmissiveKind {
    pub const ALL: [TransmissiveKind; 4] = [
        TransmissiveKind::Glass,
        TransmissiveKind::Plastic,
        TransmissiveKind::Water,
        TransmissiveKind::Ice,
    ];

    pub fn ior(self) -> f64 {
        match self {
            TransmissiveKind::Glass => 1.50,
            TransmissiveKind::Plastic => 1.46,
            TransmissiveKind::Water => 1.33,
            TransmissiveKind::Ice => 1.31,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MaterialSpec {
    Diffuse {
        albedo: Rgb,
    },
    Transmissive {
        ior: f64,
        tint: Rgb,
        kind: TransmissiveKind,
    },
}

fn unit_rgb(c: Rgb) -> bool {
    c.is_finite() && c.min_component() >= 0.0 && c.max_component() <= 1.0
}

impl MaterialSpec {
    pub fn diffuse(albedo: Rgb) -> Self {
        MaterialSpec::Diffuse { albedo }
    }

    pub fn transmissive(kind: TransmissiveKind) -> Self {
        MaterialSpec::Transmissive {
            ior: kind.ior(),
            tint: Vec3::ONE,
            kind,
        }
    }

    pub fn is_transmissive(&self) -> bool {
        matches!(self, MaterialSpec::Transmissive { .. })
    }

    /// Rule violated by this material, if any.
    pub fn violation(&self) -> Option<String> {
        match self {
            MaterialSpec::Diffuse { albedo } if !unit_rgb(*albedo) => {
                Some("diffuse albedo components must lie in [0, 1]".into())
            }
            MaterialSpec::Transmissive { ior, tint, .. } => {
                if !(1.01..=2.5).contains(ior) {
                    Some(format!("transmissive ior {ior} outside [1.01, 2.5]"))
                } else if !unit_rgb(*tint) {
                    Some("transmissive tint components must lie in [0, 1]".into())
                } else {
                    None
                }
            }
            _ => None,
        }
    }
}

/// Chooses a material for each part.
///
/// Each eligible (watertight) part independently becomes transmissive with
/// probability `p_transparent`, its kind drawn uniformly; all other parts get
/// a random diffuse albedo.
pub fn assign_materials(eligible: &[bool], p_transparent: f64, rng: &mut DetRng) -> Vec<MaterialSpec> {
    eligible
        .iter()
        .map(|&ok| {
            // Draw unconditionally so eligibility does not shift later streams.
            let roll = rng.uniform();
            if ok && roll < p_transparent {
                let kind = *rng.pick(&TransmissiveKind::ALL);
                let tint = Vec3::new(
                    rng.range(0.85, 1.0),
                    rng.range(0.85, 1.0),
                    rng.range(0.85, 1.0),
                );
                MaterialSpec::Transmissive {
                    ior: kind.ior(),
                    tint,
                    kind,
                }
            } else {
                MaterialSpec::Diffuse {
                    albedo: Vec3::new(
                        rng.range(0.1, 0.9),
                        rng.range(0.1, 0.9),
                        rng.range(0.1, 0.9),
                    ),
                }
            }
        })
        .collect()
}
