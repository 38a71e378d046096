use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("face {face} references vertex {index}, but the mesh has {vertex_count} vertices")]
    IndexOutOfRange {
        face: usize,
        index: usize,
        vertex_count: usize,
    },
    #[error("vertex {0} has a non-finite coordinate")]
    NonFiniteVertex(usize),
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("mesh contains no triangles")]
    Empty,
    #[error("face label count {labels} does not match face count {faces}")]
    LabelCount { labels: usize, faces: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl MeshError {
    pub(crate) fn parse(offset: usize, message: impl Into<String>) -> Self {
        Self::Parse {
            offset,
            message: message.into(),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum KinematicsError {
    #[error("invalid design: {param} {reason}")]
    InvalidDesign { param: &'static str, reason: String },
    #[error("{bound} violated: {value} not in [{min}, {max}]")]
    OutOfRange {
        bound: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("{0} must be finite")]
    NonFinite(&'static str),
}

#[derive(Debug, Error, PartialEq)]
pub enum CalibrationError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("fit is rank deficient: all tendon displacements are equal")]
    RankDeficient,
    #[error("point sets differ in size ({src} vs {dst})")]
    CountMismatch { src: usize, dst: usize },
    #[error("point set is degenerate (collinear or coincident points)")]
    Degenerate,
    #[error("{name} must be {requirement}, got {value}")]
    Domain {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
}
