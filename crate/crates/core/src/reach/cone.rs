//! Laser beam model and cone ray casting.

use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::KinematicsError;
use crate::geom::{Pose, Ray, TriMesh};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSpec {
    /// Full apex angle of the beam cone (rad).
    pub divergence: f64,
    pub rays_per_config: usize,
    /// Hits farther than this (mm) are ignored.
    pub max_range: f64,
}

impl Default for BeamSpec {
    fn default() -> Self {
        Self {
            divergence: 40f64.to_radians(),
            rays_per_config: 1000,
            max_range: f64::INFINITY,
        }
    }
}

impl BeamSpec {
    pub fn validate(&self) -> Result<(), KinematicsError> {
        if !(self.divergence > 0.0 && self.divergence < PI) {
            return Err(KinematicsError::InvalidDesign {
                param: "divergence",
                reason: format!("{} rad must lie in (0, π)", self.divergence),
            });
        }
        if self.rays_per_config == 0 {
            return Err(KinematicsError::InvalidDesign {
                param: "rays_per_config",
                reason: "must be at least 1".into(),
            });
        }
        if self.max_range.is_nan() || self.max_range <= 0.0 {
            return Err(KinematicsError::InvalidDesign {
                param: "max_range",
                reason: "must be positive".into(),
            });
        }
        Ok(())
    }

    pub fn half_angle(&self) -> f64 {
        0.5 * self.divergence
    }
}

/// Unit direction uniformly distributed over the solid angle of the cone of
/// half-angle `half_angle` about +z (inverse-CDF in `cos θ`, uniform azimuth).
pub fn sample_cone_direction(half_angle: f64, rng: &mut impl Rng) -> Vector3<f64> {
    let cos_min = half_angle.cos();
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    let cos_t = 1.0 - u * (1.0 - cos_min);
    let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
    let (s, c) = (2.0 * PI * v).sin_cos();
    Vector3::new(sin_t * c, sin_t * s, cos_t)
}

/// Face struck by each ray that hits something, in ray order.
pub(crate) fn laser_ray_faces(
    tip: &Pose,
    beam: &BeamSpec,
    mesh: &TriMesh,
    rng: &mut impl Rng,
) -> Vec<usize> {
    let half = beam.half_angle();
    (0..beam.rays_per_config)
        .filter_map(|_| {
            let d = sample_cone_direction(half, rng);
            let ray = Ray::new(tip.translation, tip.transform_vector(&d));
            mesh.first_hit_within(&ray, beam.max_range).map(|h| h.face)
        })
        .collect()
}

/// Faces lit by the beam leaving `tip` along its local +z. Sorted and
/// deduplicated.
pub fn cast_laser_cone(tip: &Pose, beam: &BeamSpec, mesh: &TriMesh, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut faces = laser_ray_faces(tip, beam, mesh, &mut rng);
    faces.sort_unstable();
    faces.dedup();
    faces
}
