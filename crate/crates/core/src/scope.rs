//! Parametric flexible-endoscope model.
//!
//! The scope advances along the world z axis from the origin, rolls about
//! it, and articulates its distal bending section as one planar
//! constant-curvature arc. The camera looks along the tip frame's +z; the
//! working channel exits at a fixed lateral offset from the camera.

use nalgebra::{Vector2, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::KinematicsError;
use crate::geom::{exp_twist, Pose, Ray, TriMesh, Twist};
use crate::reach::cone::sample_cone_direction;

/// Segments used to discretize the bending section in the backbone.
const ARC_SEGMENTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScopeDesign {
    pub shaft_diameter: f64,
    /// Working-channel axis offset from the camera axis, in the tip
    /// cross-section (mm, tip-frame x and y).
    pub channel_offset: [f64; 2],
    pub bend_section_length: f64,
    /// Tip articulation limits (rad).
    pub bend_min: f64,
    pub bend_max: f64,
    /// Camera cone half-angle (rad).
    pub camera_fov: f64,
    /// Farthest distance the camera resolves (mm).
    pub camera_range: f64,
}

impl Default for ScopeDesign {
    fn default() -> Self {
        Self {
            shaft_diameter: 5.0,
            channel_offset: [1.5, 0.0],
            bend_section_length: 30.0,
            bend_min: -130f64.to_radians(),
            bend_max: 130f64.to_radians(),
            camera_fov: 45f64.to_radians(),
            camera_range: 60.0,
        }
    }
}

impl ScopeDesign {
    pub fn validate(&self) -> Result<(), KinematicsError> {
        let bad = |param: &'static str, reason: &str| KinematicsError::InvalidDesign {
            param,
            reason: reason.to_string(),
        };
        if !(self.shaft_diameter > 0.0 && self.shaft_diameter.is_finite()) {
            return Err(bad("shaft_diameter", "must be positive"));
        }
        if !self.channel_offset.iter().all(|c| c.is_finite()) {
            return Err(KinematicsError::NonFinite("channel_offset"));
        }
        if !(self.bend_section_length > 0.0 && self.bend_section_length.is_finite()) {
            return Err(bad("bend_section_length", "must be positive"));
        }
        if !(self.bend_min <= 0.0 && self.bend_max >= 0.0) {
            return Err(bad("bend_range", "must contain zero"));
        }
        if !(self.camera_fov > 0.0 && self.camera_fov < std::f64::consts::FRAC_PI_2) {
            return Err(bad("camera_fov", "must lie in (0, 90) degrees"));
        }
        if self.camera_range.is_nan() || self.camera_range <= 0.0 {
            return Err(bad("camera_range", "must be positive"));
        }
        Ok(())
    }

    pub fn shaft_radius(&self) -> f64 {
        0.5 * self.shaft_diameter
    }

    pub fn channel_offset(&self) -> Vector2<f64> {
        Vector2::new(self.channel_offset[0], self.channel_offset[1])
    }

    /// Channel exit relative to the camera frame; independent of the
    /// configuration.
    pub fn camera_to_channel(&self) -> Pose {
        Pose::from_translation(Vector3::new(self.channel_offset[0], self.channel_offset[1], 0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ScopeConfig {
    /// Advance along the approach axis (mm): the base of the bending section
    /// sits at `(0, 0, insertion)`.
    pub insertion: f64,
    pub roll: f64,
    pub tip_bend: f64,
}

#[derive(Debug, Clone)]
pub struct ScopeFrames {
    pub channel_exit: Pose,
    pub camera: Pose,
    /// Center-line of the scope from the entry point to the tip.
    pub backbone: Vec<Vector3<f64>>,
}

pub fn scope_frames(design: &ScopeDesign, config: &ScopeConfig) -> Result<ScopeFrames, KinematicsError> {
    for (name, v) in [
        ("insertion", config.insertion),
        ("roll", config.roll),
        ("tip_bend", config.tip_bend),
    ] {
        if !v.is_finite() {
            return Err(KinematicsError::NonFinite(name));
        }
    }
    if config.tip_bend < design.bend_min || config.tip_bend > design.bend_max {
        return Err(KinematicsError::OutOfRange {
            bound: "tip_bend",
            value: config.tip_bend,
            min: design.bend_min,
            max: design.bend_max,
        });
    }
    let length = design.bend_section_length;
    let base = Pose::trans_z(config.insertion) * Pose::rot_z(config.roll);
    let twist = Twist::arc(config.tip_bend / length);

    let mut backbone = Vec::with_capacity(ARC_SEGMENTS + 2);
    if config.insertion > 0.0 {
        backbone.push(Vector3::zeros());
    }
    backbone.push(base.translation);
    let mut camera = base;
    for k in 1..=ARC_SEGMENTS {
        camera = base * exp_twist(&twist, length * k as f64 / ARC_SEGMENTS as f64);
        backbone.push(camera.translation);
    }
    Ok(ScopeFrames {
        channel_exit: camera * design.camera_to_channel(),
        camera,
        backbone,
    })
}

/// Faces struck first by at least one of `n_rays` rays spread uniformly over
/// the camera cone, within the camera range. Sorted, deduplicated.
///
/// Rays are drawn in sequence from `rng`, so with a seed-identical generator
/// the set for `n` rays is a subset of the set for `m >= n` rays.
pub fn camera_visible_faces(
    camera: &Pose,
    design: &ScopeDesign,
    mesh: &TriMesh,
    n_rays: usize,
    rng: &mut impl Rng,
) -> Vec<usize> {
    let mut faces: Vec<usize> = (0..n_rays)
        .filter_map(|_| {
            let d = sample_cone_direction(design.camera_fov, rng);
            let ray = Ray::new(camera.translation, camera.transform_vector(&d));
            mesh.first_hit_within(&ray, design.camera_range).map(|h| h.face)
        })
        .collect();
    faces.sort_unstable();
    faces.dedup();
    faces
}

/// Whether the camera sees `face`: its centroid lies inside the camera cone
/// and range, and the line of sight to it reaches that face first.
pub fn camera_sees_face(camera: &Pose, design: &ScopeDesign, mesh: &TriMesh, face: usize) -> bool {
    if mesh.is_degenerate(face) {
        return false;
    }
    let target = mesh.centroid(face);
    let offset = target - camera.translation;
    let dist = offset.norm();
    if dist <= 0.0 || dist > design.camera_range {
        return false;
    }
    if offset.dot(&camera.z_axis()) < dist * design.camera_fov.cos() {
        return false;
    }
    let ray = Ray::new(camera.translation, offset);
    match mesh.first_hit(&ray) {
        Some(hit) => hit.face == face || hit.t >= dist - 1e-6 * dist.max(1.0),
        None => false,
    }
}
