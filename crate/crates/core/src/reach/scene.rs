//! Combined scope + fiber configuration and its world-frame geometry.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::collision::Polyline;
use crate::error::KinematicsError;
use crate::geom::Pose;
use crate::scope::{scope_frames, ScopeConfig, ScopeDesign};
use crate::sheath::{FiberConfig, SheathModel};

/// Number of actuated degrees of freedom: insertion, roll, tip bend, tendon
/// displacement, fiber translation, fiber rotation.
pub const DOF: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SceneConfig {
    pub scope: ScopeConfig,
    pub fiber: FiberConfig,
}

impl SceneConfig {
    pub fn to_array(&self) -> [f64; DOF] {
        [
            self.scope.insertion,
            self.scope.roll,
            self.scope.tip_bend,
            self.fiber.dl,
            self.fiber.z,
            self.fiber.theta,
        ]
    }

    pub fn from_array(q: [f64; DOF]) -> Self {
        Self {
            scope: ScopeConfig {
                insertion: q[0],
                roll: q[1],
                tip_bend: q[2],
            },
            fiber: FiberConfig {
                dl: q[3],
                z: q[4],
                theta: q[5],
            },
        }
    }
}

/// Whether the tendon may be actuated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FiberMode {
    #[default]
    Steerable,
    /// Tendon locked at zero: a conventional straight fiber that can still
    /// advance and rotate.
    Straight,
}

/// Device models sharing one world frame.
#[derive(Debug, Clone, Copy)]
pub struct SceneModel {
    pub sheath: SheathModel,
    pub scope: ScopeDesign,
}

#[derive(Debug, Clone)]
pub struct ScenePose {
    pub camera: Pose,
    pub channel_exit: Pose,
    pub fiber_tip: Pose,
    /// Scope and fiber center-lines with their body radii.
    pub backbones: [Polyline; 2],
}

impl SceneModel {
    pub fn new(sheath: SheathModel, scope: ScopeDesign) -> Result<Self, KinematicsError> {
        scope.validate()?;
        Ok(Self { sheath, scope })
    }

    pub fn pose(&self, config: &SceneConfig) -> Result<ScenePose, KinematicsError> {
        let frames = scope_frames(&self.scope, &config.scope)?;
        let fiber = self.sheath.forward_kinematics(&config.fiber)?;
        let exit = frames.channel_exit;
        let mut fiber_points = Vec::with_capacity(fiber.backbone.len() + 1);
        fiber_points.push(exit.translation);
        fiber_points.extend(fiber.backbone.iter().map(|p| exit.transform_point(&p.translation)));
        Ok(ScenePose {
            camera: frames.camera,
            channel_exit: exit,
            fiber_tip: exit * fiber.tip,
            backbones: [
                Polyline {
                    points: frames.backbone,
                    radius: self.scope.shaft_radius(),
                },
                Polyline {
                    points: fiber_points,
                    radius: self.sheath.design().outer_radius,
                },
            ],
        })
    }

    /// Box of admissible configurations explored by the sampler.
    pub fn dof_box(&self, insertion: [f64; 2], mode: FiberMode) -> DofBox {
        let dl_max = match mode {
            FiberMode::Steerable => self.sheath.max_tendon_displacement(),
            FiberMode::Straight => 0.0,
        };
        DofBox {
            lo: [insertion[0], -PI, self.scope.bend_min, 0.0, 0.0, -PI],
            hi: [
                insertion[1],
                PI,
                self.scope.bend_max,
                dl_max,
                self.sheath.design().z_travel,
                PI,
            ],
        }
    }
}

/// Axis-aligned box in configuration space. Roll and fiber rotation span one
/// full turn without wrap-around.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DofBox {
    pub lo: [f64; DOF],
    pub hi: [f64; DOF],
}

impl DofBox {
    pub fn span(&self, k: usize) -> f64 {
        self.hi[k] - self.lo[k]
    }

    pub fn contains(&self, q: &[f64; DOF]) -> bool {
        (0..DOF).all(|k| q[k] >= self.lo[k] && q[k] <= self.hi[k])
    }

    /// Maps `[0,1]^6` onto the box; zero-width dimensions stay pinned.
    pub fn denormalize(&self, u: &[f64; DOF]) -> [f64; DOF] {
        std::array::from_fn(|k| {
            if self.span(k) > 0.0 {
                (self.lo[k] + u[k] * self.span(k)).min(self.hi[k])
            } else {
                self.lo[k]
            }
        })
    }

    pub fn normalize(&self, q: &[f64; DOF]) -> [f64; DOF] {
        std::array::from_fn(|k| {
            if self.span(k) > 0.0 {
                (q[k] - self.lo[k]) / self.span(k)
            } else {
                0.0
            }
        })
    }
}
