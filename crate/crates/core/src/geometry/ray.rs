use super::Vec3;

/// Refractive index of the ambient medium.
pub const AIR_IOR: f64 = 1.0;

/// Stack of refractive indices enclosing a ray. The bottom entry is air and
/// is never removed.
#[derive(Debug, Clone, PartialEq)]
pub struct MediumStack {
    stack: Vec<f64>,
}

impl Default for MediumStack {
    fn default() -> Self {
        MediumStack {
            stack: vec![AIR_IOR],
        }
    }
}

impl MediumStack {
    /// Index of the medium the ray currently travels in.
    #[inline]
    pub fn current(&self) -> f64 {
        *self.stack.last().expect("medium stack is never empty")
    }

    pub fn depth(&self) -> usize {
        self.stack.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.stack
    }

    pub fn push(&mut self, ior: f64) {
        self.stack.push(ior);
    }

    /// Removes the entry nearest the top whose index equals `ior`, or the top
    /// entry if none matches. Air at the bottom is never removed.
    pub fn exit(&mut self, ior: f64) {
        if self.stack.len() <= 1 {
            return;
        }
        let pos = self.stack[1..]
            .iter()
            .rposition(|&n| n == ior)
            .map(|p| p + 1)
            .unwrap_or(self.stack.len() - 1);
        self.stack.remove(pos);
    }

    /// Index on the far side of an interface with a medium of index `ior`.
    pub fn index_beyond(&self, ior: f64, entering: bool) -> f64 {
        if entering {
            return ior;
        }
        let mut next = self.clone();
        next.exit(ior);
        next.current()
    }
}

/// A ray with an origin, a unit direction and the media enclosing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    pub direction: Vec3,
    pub media: MediumStack,
}

impl Ray {
    /// A ray in air. `direction` is expected to be unit length.
    pub fn new(origin: Vec3, direction: Vec3) -> Self {
        Ray {
            origin,
            direction,
            media: MediumStack::default(),
        }
    }

    #[inline]
    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }

    /// Continues from `origin` in a new direction, keeping the media.
    pub fn continued(&self, origin: Vec3, direction: Vec3) -> Ray {
        Ray {
            origin,
            direction,
            media: self.media.clone(),
        }
    }
}
