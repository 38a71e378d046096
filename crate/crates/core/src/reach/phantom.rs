//! Procedural larynx-like test cavity.
//!
//! A tube along +z, open at `z = 0` where the endoscope enters and capped at
//! the far end. A narrow inlet opens into a wider vestibule whose floor is
//! formed by two medial folds protruding from the ±x walls; they leave a
//! slit-shaped opening into a narrower subglottic tube.
//!
//! The wall is star-shaped about the z axis, so it is generated as a radius
//! field `r(θ, z)` sampled on a regular grid.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::geom::TriMesh;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LarynxPhantom {
    pub inlet_radius: f64,
    /// Axial position where the inlet starts widening (mm).
    pub inlet_length: f64,
    /// Axial length of the inlet-to-vestibule flare (mm).
    pub flare_length: f64,
    pub vestibule_radius: f64,
    /// Axial position of the fold crests (mm).
    pub fold_center: f64,
    /// Axial half-thickness of each fold (mm).
    pub fold_half_width: f64,
    /// Half-width of the slit left between the fold crests (mm).
    pub glottic_half_gap: f64,
    pub subglottic_radius: f64,
    pub length: f64,
    pub angular_segments: usize,
    pub axial_step: f64,
}

impl Default for LarynxPhantom {
    fn default() -> Self {
        Self {
            inlet_radius: 4.2,
            inlet_length: 50.0,
            flare_length: 3.0,
            vestibule_radius: 11.0,
            fold_center: 76.0,
            fold_half_width: 4.0,
            glottic_half_gap: 1.5,
            subglottic_radius: 7.0,
            length: 100.0,
            angular_segments: 128,
            axial_step: 0.5,
        }
    }
}

fn smoothstep(e0: f64, e1: f64, x: f64) -> f64 {
    let t = ((x - e0) / (e1 - e0)).clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

impl LarynxPhantom {
    /// Wall radius ignoring the folds.
    fn base_radius(&self, z: f64) -> f64 {
        let flare = smoothstep(self.inlet_length, self.inlet_length + self.flare_length, z);
        let r = self.inlet_radius + (self.vestibule_radius - self.inlet_radius) * flare;
        let narrow = smoothstep(
            self.fold_center - self.fold_half_width,
            self.fold_center + self.fold_half_width,
            z,
        );
        r + (self.subglottic_radius - self.vestibule_radius) * narrow
    }

    /// Wall radius at azimuth `theta` and depth `z`.
    pub fn radius(&self, theta: f64, z: f64) -> f64 {
        let base = self.base_radius(z);
        let dz = (z - self.fold_center) / self.fold_half_width;
        if dz.abs() >= 1.0 {
            return base;
        }
        let fold = (0.5 * PI * dz).cos().powi(2);
        let slit = self.glottic_half_gap / theta.cos().abs().max(1e-12);
        let crest = base.min(slit);
        (1.0 - fold) * base + fold * crest
    }

    pub fn mesh(&self) -> TriMesh {
        let na = self.angular_segments.max(3);
        let nz = (self.length / self.axial_step).round().max(1.0) as usize;
        let mut vertices = Vec::with_capacity(na * (nz + 1) + 1);
        for j in 0..=nz {
            let z = self.length * j as f64 / nz as f64;
            for i in 0..na {
                let theta = 2.0 * PI * i as f64 / na as f64;
                let r = self.radius(theta, z);
                vertices.push(Vector3::new(r * theta.cos(), r * theta.sin(), z));
            }
        }
        let idx = |i: usize, j: usize| (j * na + i % na) as u32;
        let mut faces = Vec::with_capacity(2 * na * nz + na);
        for j in 0..nz {
            for i in 0..na {
                let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
                faces.push([a, c, b]);
                faces.push([a, d, c]);
            }
        }
        let center = vertices.len() as u32;
        vertices.push(Vector3::new(0.0, 0.0, self.length));
        for i in 0..na {
            faces.push([idx(i, nz), idx(i + 1, nz), center]);
        }
        TriMesh::new(vertices, faces).expect("phantom indices are in range")
    }
}

/// The bundled phantom with default dimensions.
pub fn synthetic_larynx() -> TriMesh {
    LarynxPhantom::default().mesh()
}
