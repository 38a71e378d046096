//! Capsule-chain versus mesh clearance tests.

use nalgebra::Vector3;

use crate::geom::distance::segment_triangle_distance;
use crate::geom::TriMesh;

/// A device center-line swept by a sphere of `radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub points: Vec<Vector3<f64>>,
    pub radius: f64,
}

/// True when no segment of any backbone, inflated to a capsule of its body
/// radius plus `clearance`, touches a (non-degenerate) mesh triangle.
pub fn collision_free(backbones: &[Polyline], mesh: &TriMesh, clearance: f64) -> bool {
    backbones.iter().all(|line| {
        let r = line.radius + clearance;
        if line.points.len() == 1 {
            return segment_clear(&line.points[0], &line.points[0], r, mesh);
        }
        line.points
            .windows(2)
            .all(|w| segment_clear(&w[0], &w[1], r, mesh))
    })
}

/// True when segment `a`–`b` stays farther than `radius` from every face.
pub fn segment_clear(a: &Vector3<f64>, b: &Vector3<f64>, radius: f64, mesh: &TriMesh) -> bool {
    !mesh.any_face_near_segment(a, b, radius, &mut |f| {
        segment_triangle_distance(a, b, &mesh.triangle(f)) <= radius
    })
}
