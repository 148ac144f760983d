//! Reflection and refraction at a surface with normal `n` oriented against
//! the incident direction.

use super::Vec3;

/// Mirror reflection of `incident` about `normal`.
#[inline]
pub fn reflect_dir(incident: Vec3, normal: Vec3) -> Vec3 {
    incident - normal * (2.0 * incident.dot(normal))
}

/// Transmitted direction by Snell's law, or `None` on total internal
/// reflection. `eta_ratio` is `n_from / n_to`.
pub fn refract_dir(incident: Vec3, normal: Vec3, eta_ratio: f64) -> Option<Vec3> {
    if eta_ratio == 1.0 {
        return Some(incident);
    }
    let cos_i = (-incident.dot(normal)).min(1.0);
    let sin2_t = eta_ratio * eta_ratio * (1.0 - cos_i * cos_i).max(0.0);
    if sin2_t > 1.0 {
        return None;
    }
    let cos_t = (1.0 - sin2_t).sqrt();
    let t = incident * eta_ratio + normal * (eta_ratio * cos_i - cos_t);
    Some(t.normalize())
}

/// Schlick's approximation of the Fresnel reflectance going from index `n1`
/// into `n2` with incidence cosine `cos_i`.
///
/// Going into a less dense medium the transmitted cosine is used, and the
/// reflectance is 1 past the critical angle.
pub fn fresnel_reflectance(cos_i: f64, n1: f64, n2: f64) -> f64 {
    let r0 = ((n1 - n2) / (n1 + n2)).powi(2);
    let cos_i = cos_i.clamp(0.0, 1.0);
    let cos = if n1 > n2 {
        let sin2_t = (n1 / n2).powi(2) * (1.0 - cos_i * cos_i);
        if sin2_t > 1.0 {
            return 1.0;
        }
        (1.0 - sin2_t).sqrt()
    } else {
        cos_i
    };
    (r0 + (1.0 - r0) * (1.0 - cos).powi(5)).clamp(0.0, 1.0)
}
