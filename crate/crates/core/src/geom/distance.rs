//! Closest-distance queries between segments and triangles.

use nalgebra::Vector3;

/// Closest point on triangle `abc` to `p` (Voronoi-region walk).
pub fn closest_point_on_triangle(
    p: &Vector3<f64>,
    a: &Vector3<f64>,
    b: &Vector3<f64>,
    c: &Vector3<f64>,
) -> Vector3<f64> {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

/// Squared distance between segments `p1q1` and `p2q2`.
pub fn segment_segment_distance_sq(
    p1: &Vector3<f64>,
    q1: &Vector3<f64>,
    p2: &Vector3<f64>,
    q2: &Vector3<f64>,
) -> f64 {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.dot(&d1);
    let e = d2.dot(&d2);
    let f = d2.dot(&r);
    let (s, t);
    if a <= f64::EPSILON && e <= f64::EPSILON {
        return r.norm_squared();
    }
    if a <= f64::EPSILON {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= f64::EPSILON {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > 0.0 {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s0;
            t = t0;
        }
    }
    let c1 = p1 + d1 * s;
    let c2 = p2 + d2 * t;
    (c1 - c2).norm_squared()
}

/// True when the segment crosses the (closed) triangle.
fn segment_crosses_triangle(
    p: &Vector3<f64>,
    q: &Vector3<f64>,
    a: &Vector3<f64>,
    b: &Vector3<f64>,
    c: &Vector3<f64>,
) -> bool {
    let n = (b - a).cross(&(c - a));
    let dp = n.dot(&(p - a));
    let dq = n.dot(&(q - a));
    if (dp > 0.0 && dq > 0.0) || (dp < 0.0 && dq < 0.0) || dp == dq {
        return false;
    }
    let t = dp / (dp - dq);
    let x = p + (q - p) * t;
    let e0 = (b - a).cross(&(x - a)).dot(&n);
    let e1 = (c - b).cross(&(x - b)).dot(&n);
    let e2 = (a - c).cross(&(x - c)).dot(&n);
    (e0 >= 0.0 && e1 >= 0.0 && e2 >= 0.0) || (e0 <= 0.0 && e1 <= 0.0 && e2 <= 0.0)
}

/// Euclidean distance between segment `pq` and triangle `abc`.
pub fn segment_triangle_distance(
    p: &Vector3<f64>,
    q: &Vector3<f64>,
    tri: &[Vector3<f64>; 3],
) -> f64 {
    let [a, b, c] = tri;
    if segment_crosses_triangle(p, q, a, b, c) {
        return 0.0;
    }
    let mut best = (p - closest_point_on_triangle(p, a, b, c)).norm_squared();
    best = best.min((q - closest_point_on_triangle(q, a, b, c)).norm_squared());
    for (e0, e1) in [(a, b), (b, c), (c, a)] {
        best = best.min(segment_segment_distance_sq(p, q, e0, e1));
    }
    best.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri() -> [Vector3<f64>; 3] {
        [
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(2.0, 0.0, 0.0),
            Vector3::new(0.0, 2.0, 0.0),
        ]
    }

    #[test]
    fn piercing_segment_has_zero_distance() {
        let d = segment_triangle_distance(
            &Vector3::new(0.5, 0.5, -1.0),
            &Vector3::new(0.5, 0.5, 1.0),
            &tri(),
        );
        assert_eq!(d, 0.0);
    }

    #[test]
    fn segment_above_face() {
        let d = segment_triangle_distance(
            &Vector3::new(0.2, 0.2, 0.7),
            &Vector3::new(0.6, 0.4, 0.7),
            &tri(),
        );
        assert!((d - 0.7).abs() < 1e-15);
    }

    #[test]
    fn segment_near_edge() {
        // parallel to the hypotenuse, offset outward in-plane
        let d = segment_triangle_distance(
            &Vector3::new(2.0, 1.0, 0.0),
            &Vector3::new(1.0, 2.0, 0.0),
            &tri(),
        );
        assert!((d - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn closest_point_regions() {
        let [a, b, c] = tri();
        let cp = closest_point_on_triangle(&Vector3::new(-1.0, -1.0, 3.0), &a, &b, &c);
        assert_eq!(cp, a);
        let cp = closest_point_on_triangle(&Vector3::new(1.0, -3.0, 0.0), &a, &b, &c);
        assert!((cp - Vector3::new(1.0, 0.0, 0.0)).norm() < 1e-15);
        let cp = closest_point_on_triangle(&Vector3::new(0.3, 0.4, -2.0), &a, &b, &c);
        assert!((cp - Vector3::new(0.3, 0.4, 0.0)).norm() < 1e-15);
    }
}
