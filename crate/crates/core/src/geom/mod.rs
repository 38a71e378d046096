//! Rigid-body math, triangle meshes and ray queries.

mod bvh;
pub mod distance;
pub mod io;
mod mesh;
mod pose;
mod ray;

pub use io::{load_colored_mesh, load_mesh, save_colored_mesh, FaceLabel};
pub use mesh::{TriMesh, DEGENERATE_AREA, TIE_EPSILON, WELD_TOLERANCE};
pub use pose::{exp_twist, skew, Pose, PoseRecord, Twist};
pub use ray::{intersect_triangle, Hit, Ray, T_EPSILON};
