use crate::geometry::{Geometry, HitRecord, Ray};
use crate::scenegen::{LightSpec, MaterialSpec, SceneSpec};
use crate::geometry::CameraModel;

/// A scene flattened into world-space elements behind a BVH, ready to trace.
///
/// Material ids index [`RenderScene::materials`], one entry per part in
/// [`SceneSpec::parts`] order.
#[derive(Debug, Clone)]
pub struct RenderScene {
    pub camera: CameraModel,
    geometry: Geometry,
    materials: Vec<MaterialSpec>,
    lights: Vec<LightSpec>,
}

impl RenderScene {
    pub fn new(spec: &SceneSpec) -> Self {
        let mut elements = Vec::new();
        let mut materials = Vec::new();
        for (i, (part, xf)) in spec.parts().enumerate() {
            elements.extend(part.primitive.to_elements(&xf, i as u32, i as u32));
            materials.push(part.material.clone());
        }
        RenderScene {
            camera: spec.camera.clone(),
            geometry: Geometry::new(elements),
            materials,
            lights: spec.lights.clone(),
        }
    }

    pub fn materials(&self) -> &[MaterialSpec] {
        &self.materials
    }

    pub fn material(&self, id: u32) -> &MaterialSpec {
        &self.materials[id as usize]
    }

    pub fn lights(&self) -> &[LightSpec] {
        &self.lights
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    #[inline]
    pub fn intersect(&self, ray: &Ray) -> Option<HitRecord> {
        self.geometry.intersect(ray)
    }

    /// Copy with every transmissive index replaced by `ior`.
    pub fn with_uniform_ior(&self, ior: f64) -> Self {
        let mut out = self.clone();
        for m in &mut out.materials {
            if let MaterialSpec::Transmissive { ior: n, .. } = m {
                *n = ior;
            }
        }
        out
    }

    /// Copy with all transmissive surfaces removed.
    pub fn without_transmissive(&self) -> Self {
        let elements = self
            .geometry
            .elements()
            .iter()
            .filter(|e| !self.materials[e.material as usize].is_transmissive())
            .cloned()
            .collect();
        RenderScene {
            geometry: Geometry::new(elements),
            ..self.clone()
        }
    }

    /// Same scene seen at another resolution.
    pub fn with_resolution(&self, width: u32, height: u32) -> Self {
        RenderScene {
            camera: self.camera.with_resolution(width, height),
            ..self.clone()
        }
    }
}
