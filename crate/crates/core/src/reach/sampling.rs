//! Rapidly-exploring random tree over the joint scope + fiber configuration
//! space.
//!
//! Growth is sequential and driven by a single seeded stream, so the node
//! list depends only on the inputs and its first `k` nodes are the same for
//! every requested size `n >= k`.

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::collision::collision_free;
use super::scene::{DofBox, FiberMode, SceneConfig, SceneModel, DOF};
use crate::geom::TriMesh;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    /// Number of tree nodes (configurations) to grow.
    pub n: usize,
    pub seed: u64,
    /// Extra margin beyond each body radius (mm).
    pub clearance: f64,
    /// Insertion travel of the scope (mm).
    pub insertion: [f64; 2],
    /// Per-DoF weights of the nearest-node metric, applied to coordinates
    /// normalized by each DoF range.
    pub weights: [f64; DOF],
    /// Largest extension per DoF, as a fraction of that DoF's range.
    pub step_fraction: f64,
    /// Attempts allowed per requested node before giving up.
    pub budget_factor: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            n: 10_000,
            seed: 1,
            clearance: 0.0,
            insertion: [0.0, 24.0],
            weights: [1.0; DOF],
            step_fraction: 0.1,
            budget_factor: 50,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SampleSet {
    pub configs: Vec<SceneConfig>,
    /// Parent index of each node (`None` for the root).
    pub parents: Vec<Option<usize>>,
    pub attempts: usize,
    /// Fewer than the requested nodes were found within the budget.
    pub shortfall: bool,
}

/// Collision-free check for one configuration; inadmissible configurations
/// count as blocked.
pub fn config_is_free(scene: &SceneModel, mesh: &TriMesh, config: &SceneConfig, clearance: f64) -> bool {
    match scene.pose(config) {
        Ok(pose) => collision_free(&pose.backbones, mesh, clearance),
        Err(_) => false,
    }
}

/// Root of the tree: scope withdrawn and straight, fiber retracted.
pub fn root_config(dofs: &DofBox) -> SceneConfig {
    let mut q = [0.0; DOF];
    for (k, v) in q.iter_mut().enumerate() {
        *v = 0f64.clamp(dofs.lo[k], dofs.hi[k]);
    }
    q[0] = dofs.lo[0];
    SceneConfig::from_array(q)
}

pub fn sample_configs(
    mesh: &TriMesh,
    scene: &SceneModel,
    sampling: &SamplingConfig,
    mode: FiberMode,
) -> SampleSet {
    let dofs = scene.dof_box(sampling.insertion, mode);
    let mut out = SampleSet {
        configs: Vec::new(),
        parents: Vec::new(),
        attempts: 0,
        shortfall: false,
    };
    if sampling.n == 0 {
        return out;
    }
    let root = root_config(&dofs);
    if !config_is_free(scene, mesh, &root, sampling.clearance) {
        warn!("start configuration is in collision; no configurations sampled");
        out.shortfall = true;
        return out;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
    let mut normalized: Vec<[f64; DOF]> = vec![dofs.normalize(&root.to_array())];
    out.configs.push(root);
    out.parents.push(None);

    let budget = sampling.budget_factor.saturating_mul(sampling.n);
    let w = sampling.weights;
    while out.configs.len() < sampling.n && out.attempts < budget {
        out.attempts += 1;
        let target: [f64; DOF] = std::array::from_fn(|_| rng.random::<f64>());

        let mut nearest = 0;
        let mut best = f64::INFINITY;
        for (i, q) in normalized.iter().enumerate() {
            let d: f64 = (0..DOF).map(|k| w[k] * (q[k] - target[k]).powi(2)).sum();
            if d < best {
                best = d;
                nearest = i;
            }
        }

        let from = normalized[nearest];
        let step = sampling.step_fraction;
        let next: [f64; DOF] = std::array::from_fn(|k| {
            if dofs.span(k) > 0.0 {
                from[k] + (target[k] - from[k]).clamp(-step, step)
            } else {
                0.0
            }
        });
        if next == from {
            continue;
        }
        let config = SceneConfig::from_array(dofs.denormalize(&next));
        if config_is_free(scene, mesh, &config, sampling.clearance) {
            normalized.push(next);
            out.configs.push(config);
            out.parents.push(Some(nearest));
        }
    }
    if out.configs.len() < sampling.n {
        warn!(
            "only {} of {} configurations found after {} attempts",
            out.configs.len(),
            sampling.n,
            out.attempts
        );
        out.shortfall = true;
    }
    out
}
