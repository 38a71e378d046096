use nalgebra::Vector3;

/// Hits closer than this (mm) along the ray are ignored.
pub const T_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vector3<f64>,
    pub direction: Vector3<f64>,
}

impl Ray {
    /// Builds a ray, normalizing `direction`. Panics on a zero direction.
    pub fn new(origin: Vector3<f64>, direction: Vector3<f64>) -> Self {
        let n = direction.norm();
        assert!(n > 0.0 && n.is_finite(), "ray direction must be non-zero");
        Self {
            origin,
            direction: direction / n,
        }
    }

    pub fn at(&self, t: f64) -> Vector3<f64> {
        self.origin + self.direction * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub face: usize,
    pub t: f64,
    pub u: f64,
    pub v: f64,
}

/// Möller–Trumbore test against one triangle. Both windings are reported.
pub fn intersect_triangle(
    ray: &Ray,
    v0: &Vector3<f64>,
    v1: &Vector3<f64>,
    v2: &Vector3<f64>,
) -> Option<(f64, f64, f64)> {
    let e1 = v1 - v0;
    let e2 = v2 - v0;
    let p = ray.direction.cross(&e2);
    let det = e1.dot(&p);
    // parallel to the plane (scale-aware)
    if det.abs() <= 1e-14 * e1.norm() * e2.norm() {
        return None;
    }
    let inv = 1.0 / det;
    let s = ray.origin - v0;
    let u = s.dot(&p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = ray.direction.dot(&q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(&q) * inv;
    (t > T_EPSILON).then_some((t, u, v))
}
