//! Reachable-workspace characterization: sample device configurations, cast
//! the laser cone from each, keep what the camera can also see, and tally
//! the covered area.

pub mod collision;
pub mod cone;
mod map;
pub mod phantom;
mod sampling;
mod scene;

pub use collision::{collision_free, segment_clear, Polyline};
pub use cone::{cast_laser_cone, sample_cone_direction, BeamSpec};
pub use map::{accumulate, build_map, Gating, MapOptions, ReachabilityMap};
pub use phantom::{synthetic_larynx, LarynxPhantom};
pub use sampling::{config_is_free, root_config, sample_configs, SampleSet, SamplingConfig};
pub use scene::{DofBox, FiberMode, SceneConfig, SceneModel, ScenePose, DOF};
