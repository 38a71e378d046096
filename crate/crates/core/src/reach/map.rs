//! Per-face accumulation of laser hits and joint laser/camera reachability.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cone::{laser_ray_faces, BeamSpec};
use super::sampling::{sample_configs, SamplingConfig};
use super::scene::{FiberMode, SceneConfig, SceneModel};
use crate::error::KinematicsError;
use crate::geom::{FaceLabel, TriMesh};
use crate::scope::{camera_sees_face, camera_visible_faces};

/// How camera visibility gates laser hits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Gating {
    /// A face counts only if, in one configuration, the beam strikes it and
    /// the camera has a line of sight to it.
    #[default]
    Joint,
    /// A face counts if the beam strikes it in some configuration and the
    /// camera's sampled view includes it in some (possibly other)
    /// configuration.
    Pooled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapOptions {
    pub mode: FiberMode,
    pub gating: Gating,
    /// Camera rays per configuration, used by pooled gating.
    pub camera_rays: usize,
}

impl Default for MapOptions {
    fn default() -> Self {
        Self {
            mode: FiberMode::Steerable,
            gating: Gating::Joint,
            camera_rays: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReachabilityMap {
    face_areas: Vec<f64>,
    /// Laser rays that struck each face, summed over configurations.
    pub laser_hits: Vec<u64>,
    pub jointly_reachable: Vec<bool>,
    pub configs_requested: usize,
    pub configs_evaluated: usize,
    pub seed: u64,
    /// The sampler found fewer configurations than requested.
    pub shortfall: bool,
}

impl ReachabilityMap {
    fn empty(mesh: &TriMesh, requested: usize, seed: u64) -> Self {
        Self {
            face_areas: mesh.face_areas().to_vec(),
            laser_hits: vec![0; mesh.face_count()],
            jointly_reachable: vec![false; mesh.face_count()],
            configs_requested: requested,
            configs_evaluated: 0,
            seed,
            shortfall: false,
        }
    }

    pub fn face_count(&self) -> usize {
        self.face_areas.len()
    }

    pub fn face_areas(&self) -> &[f64] {
        &self.face_areas
    }

    pub fn reachable_faces(&self) -> Vec<usize> {
        (0..self.face_count())
            .filter(|&f| self.jointly_reachable[f])
            .collect()
    }

    pub fn laser_faces(&self) -> Vec<usize> {
        (0..self.face_count())
            .filter(|&f| self.laser_hits[f] > 0)
            .collect()
    }

    /// Area of jointly reachable tissue (cm²).
    pub fn coverage_area(&self) -> f64 {
        self.area_where(|f| self.jointly_reachable[f])
    }

    /// Area struck by the beam regardless of camera visibility (cm²).
    pub fn laser_area(&self) -> f64 {
        self.area_where(|f| self.laser_hits[f] > 0)
    }

    fn area_where(&self, keep: impl Fn(usize) -> bool) -> f64 {
        (0..self.face_count())
            .filter(|&f| keep(f))
            .map(|f| self.face_areas[f])
            .sum::<f64>()
            / 100.0
    }

    pub fn labels(&self) -> Vec<FaceLabel> {
        self.jointly_reachable
            .iter()
            .map(|&r| if r { FaceLabel::Reachable } else { FaceLabel::Unreachable })
            .collect()
    }

    /// Marks faces reachable directly; laser counts are left untouched.
    pub fn with_reachable(mut self, faces: impl IntoIterator<Item = usize>) -> Self {
        for f in faces {
            self.jointly_reachable[f] = true;
            self.laser_hits[f] = self.laser_hits[f].max(1);
        }
        self
    }

    /// Blank map over `mesh`, for callers assembling coverage by hand.
    pub fn blank(mesh: &TriMesh) -> Self {
        Self::empty(mesh, 0, 0)
    }
}

/// Random stream for the laser rays of configuration `index`; the sampler
/// uses stream 0.
fn laser_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2 * index as u64 + 1);
    rng
}

fn camera_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2 * index as u64 + 2);
    rng
}

struct ConfigOutcome {
    /// (face, rays) pairs, sorted by face.
    laser: Vec<(usize, u64)>,
    /// Faces passing the gating test within this configuration.
    gated: Vec<usize>,
}

fn evaluate(
    index: usize,
    config: &SceneConfig,
    mesh: &TriMesh,
    scene: &SceneModel,
    beam: &BeamSpec,
    options: &MapOptions,
    seed: u64,
) -> Result<ConfigOutcome, KinematicsError> {
    let pose = scene.pose(config)?;
    let mut rays = laser_ray_faces(&pose.fiber_tip, beam, mesh, &mut laser_rng(seed, index));
    rays.sort_unstable();
    let mut laser: Vec<(usize, u64)> = Vec::new();
    for f in rays {
        match laser.last_mut() {
            Some((g, c)) if *g == f => *c += 1,
            _ => laser.push((f, 1)),
        }
    }
    let gated = match options.gating {
        Gating::Joint => laser
            .iter()
            .map(|&(f, _)| f)
            .filter(|&f| camera_sees_face(&pose.camera, &scene.scope, mesh, f))
            .collect(),
        Gating::Pooled => camera_visible_faces(
            &pose.camera,
            &scene.scope,
            mesh,
            options.camera_rays,
            &mut camera_rng(seed, index),
        ),
    };
    Ok(ConfigOutcome { laser, gated })
}

#[derive(Clone)]
struct Accum {
    laser_hits: Vec<u64>,
    gated: Vec<bool>,
}

impl Accum {
    fn new(faces: usize) -> Self {
        Self {
            laser_hits: vec![0; faces],
            gated: vec![false; faces],
        }
    }

    fn add(mut self, o: ConfigOutcome) -> Self {
        for (f, c) in o.laser {
            self.laser_hits[f] = self.laser_hits[f].saturating_add(c);
        }
        for f in o.gated {
            self.gated[f] = true;
        }
        self
    }

    fn merge(mut self, other: Accum) -> Self {
        for (a, b) in self.laser_hits.iter_mut().zip(other.laser_hits) {
            *a = a.saturating_add(b);
        }
        for (a, b) in self.gated.iter_mut().zip(other.gated) {
            *a |= b;
        }
        self
    }
}

/// Accumulates laser hits and gated visibility over `configs`. The merge is
/// commutative, so the result does not depend on how work is scheduled.
pub fn accumulate(
    mesh: &TriMesh,
    scene: &SceneModel,
    configs: &[SceneConfig],
    beam: &BeamSpec,
    options: &MapOptions,
    seed: u64,
) -> Result<ReachabilityMap, KinematicsError> {
    beam.validate()?;
    let faces = mesh.face_count();
    let acc = configs
        .par_iter()
        .enumerate()
        .map(|(i, c)| evaluate(i, c, mesh, scene, beam, options, seed))
        .try_fold(
            || Accum::new(faces),
            |acc, outcome| outcome.map(|o| acc.add(o)),
        )
        .try_reduce(|| Accum::new(faces), |a, b| Ok(a.merge(b)))?;

    let mut map = ReachabilityMap::empty(mesh, configs.len(), seed);
    map.configs_evaluated = configs.len();
    for f in 0..faces {
        map.laser_hits[f] = acc.laser_hits[f];
        // within one configuration the joint set is already a subset of the
        // laser hits; pooled gating intersects the unions here
        map.jointly_reachable[f] = acc.gated[f] && acc.laser_hits[f] > 0;
    }
    Ok(map)
}

/// Samples configurations and accumulates the reachability map.
pub fn build_map(
    mesh: &TriMesh,
    scene: &SceneModel,
    sampling: &SamplingConfig,
    beam: &BeamSpec,
    options: &MapOptions,
) -> Result<ReachabilityMap, KinematicsError> {
    beam.validate()?;
    if sampling.n == 0 {
        return Ok(ReachabilityMap::empty(mesh, 0, sampling.seed));
    }
    let samples = sample_configs(mesh, scene, sampling, options.mode);
    let mut map = accumulate(mesh, scene, &samples.configs, beam, options, sampling.seed)?;
    map.configs_requested = sampling.n;
    map.shortfall = samples.shortfall;
    Ok(map)
}
