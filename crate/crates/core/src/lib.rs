//! Kinematics and reachability analysis for a tendon-driven, notched-sheath
//! steerable laser fiber deployed through a flexible endoscope.
//!
//! * [`geom`]: poses, twists, meshes, ray casting, STL/PLY I/O.
//! * [`sheath`]: notched-sheath forward/inverse kinematics and limits.
//! * [`scope`]: parametric endoscope carrier and camera model.
//! * [`reach`]: configuration sampling, laser-cone casting, coverage maps.
//! * [`calib`]: bend-curve fitting, fiducial registration, power budget.
//! * [`config`]: the run-configuration file.
//!
//! Units are millimeters and radians throughout.

pub mod calib;
pub mod config;
pub mod error;
pub mod geom;
pub mod reach;
pub mod scope;
pub mod sheath;

pub use error::{CalibrationError, KinematicsError, MeshError};
