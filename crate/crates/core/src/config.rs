//! Run-configuration file.
//!
//! TOML with one table per section. Every key is optional and falls back to
//! the library default; unknown keys are rejected. Lengths are in mm and
//! angles in degrees (keys ending in `_deg`).
//!
//! ```toml
//! [sheath]
//! notch_height = 0.19
//! cut_depth = 0.94
//! notch_spacing = 1.31
//! notch_count = 10
//! inner_radius = 0.45
//! outer_radius = 0.55
//! distal_offset = 1.0
//! precurve_deg = 0.0
//! z_travel = 17.0
//!
//! [scope]
//! shaft_diameter = 5.0
//! channel_offset = [1.5, 0.0]
//! bend_section_length = 30.0
//! bend_min_deg = -130.0
//! bend_max_deg = 130.0
//! camera_fov_deg = 45.0
//! camera_range = 60.0
//!
//! [beam]
//! divergence_deg = 40.0
//! rays_per_config = 1000
//! max_range = inf
//!
//! [sampling]
//! n = 10000
//! seed = 1
//! clearance = 0.0
//! insertion = [0.0, 24.0]
//! weights = [1.0, 1.0, 1.0, 1.0, 1.0, 1.0]
//! step_fraction = 0.1
//! budget_factor = 50
//! mode = "steerable"
//! gating = "joint"
//! camera_rays = 1000
//!
//! [io]
//! mesh = "larynx.stl"
//! scale = 1.0
//! ply = "reach.ply"
//! summary = "summary.json"
//! faces = "faces.csv"
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::error::KinematicsError;
use crate::reach::{BeamSpec, FiberMode, Gating, MapOptions, SamplingConfig, DOF};
use crate::scope::ScopeDesign;
use crate::sheath::SheathDesign;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
}

impl ConfigError {
    pub fn invalid(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Invalid {
            key: key.into(),
            message: message.into(),
        }
    }

    /// The offending key, when known.
    pub fn key(&self) -> Option<&str> {
        match self {
            Self::Invalid { key, .. } => Some(key),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SheathSection {
    notch_height: f64,
    cut_depth: f64,
    notch_spacing: f64,
    notch_count: u32,
    inner_radius: f64,
    outer_radius: f64,
    distal_offset: f64,
    precurve_deg: f64,
    z_travel: f64,
}

impl Default for SheathSection {
    fn default() -> Self {
        let d = SheathDesign::default();
        Self {
            notch_height: d.notch_height,
            cut_depth: d.cut_depth,
            notch_spacing: d.notch_spacing,
            notch_count: d.notch_count,
            inner_radius: d.inner_radius,
            outer_radius: d.outer_radius,
            distal_offset: d.distal_offset,
            precurve_deg: d.precurve.to_degrees(),
            z_travel: d.z_travel,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ScopeSection {
    shaft_diameter: f64,
    channel_offset: [f64; 2],
    bend_section_length: f64,
    bend_min_deg: f64,
    bend_max_deg: f64,
    camera_fov_deg: f64,
    camera_range: f64,
}

impl Default for ScopeSection {
    fn default() -> Self {
        let d = ScopeDesign::default();
        Self {
            shaft_diameter: d.shaft_diameter,
            channel_offset: d.channel_offset,
            bend_section_length: d.bend_section_length,
            bend_min_deg: d.bend_min.to_degrees(),
            bend_max_deg: d.bend_max.to_degrees(),
            camera_fov_deg: d.camera_fov.to_degrees(),
            camera_range: d.camera_range,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct BeamSection {
    divergence_deg: f64,
    rays_per_config: usize,
    max_range: f64,
}

impl Default for BeamSection {
    fn default() -> Self {
        let d = BeamSpec::default();
        Self {
            divergence_deg: d.divergence.to_degrees(),
            rays_per_config: d.rays_per_config,
            max_range: d.max_range,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SamplingSection {
    n: usize,
    seed: u64,
    clearance: f64,
    insertion: [f64; 2],
    weights: [f64; DOF],
    step_fraction: f64,
    budget_factor: usize,
    mode: FiberMode,
    gating: Gating,
    camera_rays: usize,
}

impl Default for SamplingSection {
    fn default() -> Self {
        let s = SamplingConfig::default();
        let m = MapOptions::default();
        Self {
            n: s.n,
            seed: s.seed,
            clearance: s.clearance,
            insertion: s.insertion,
            weights: s.weights,
            step_fraction: s.step_fraction,
            budget_factor: s.budget_factor,
            mode: m.mode,
            gating: m.gating,
            camera_rays: m.camera_rays,
        }
    }
}

/// Input and output paths. Unset outputs are not written.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IoPaths {
    /// Anatomy mesh (STL); the bundled phantom when unset.
    pub mesh: Option<PathBuf>,
    /// Factor applied to mesh coordinates on load (e.g. 1000 for meters).
    pub scale: f64,
    pub ply: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub faces: Option<PathBuf>,
}

impl Default for IoPaths {
    fn default() -> Self {
        Self {
            mesh: None,
            scale: 1.0,
            ply: None,
            summary: None,
            faces: None,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileLayout {
    sheath: SheathSection,
    scope: ScopeSection,
    beam: BeamSection,
    sampling: SamplingSection,
    io: IoPaths,
}

/// Fully resolved run configuration in library units (mm, rad).
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sheath: SheathDesign,
    pub scope: ScopeDesign,
    pub beam: BeamSpec,
    pub sampling: SamplingConfig,
    pub map: MapOptions,
    pub io: IoPaths,
}

impl Default for RunConfig {
    fn default() -> Self {
        FileLayout::default().resolve()
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let layout: FileLayout =
            toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        let config = layout.resolve();
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// Checks every section; the error names the offending key as written in
    /// the file.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.sheath.validate().map_err(|e| keyed("sheath", e))?;
        self.scope.validate().map_err(|e| keyed("scope", e))?;
        self.beam.validate().map_err(|e| keyed("beam", e))?;
        let s = &self.sampling;
        if !(s.clearance >= 0.0 && s.clearance.is_finite()) {
            return Err(ConfigError::invalid("sampling.clearance", "must be finite and non-negative"));
        }
        if !(s.insertion[0].is_finite() && s.insertion[1].is_finite() && s.insertion[0] <= s.insertion[1]) {
            return Err(ConfigError::invalid("sampling.insertion", "must be a finite [min, max] with min <= max"));
        }
        if !s.weights.iter().all(|w| *w > 0.0 && w.is_finite()) {
            return Err(ConfigError::invalid("sampling.weights", "must all be positive"));
        }
        if !(s.step_fraction > 0.0 && s.step_fraction <= 1.0) {
            return Err(ConfigError::invalid("sampling.step_fraction", "must lie in (0, 1]"));
        }
        if s.budget_factor == 0 {
            return Err(ConfigError::invalid("sampling.budget_factor", "must be at least 1"));
        }
        if self.map.gating == Gating::Pooled && self.map.camera_rays == 0 {
            return Err(ConfigError::invalid("sampling.camera_rays", "must be at least 1 for pooled gating"));
        }
        if !(self.io.scale > 0.0 && self.io.scale.is_finite()) {
            return Err(ConfigError::invalid("io.scale", "must be positive"));
        }
        Ok(())
    }
}

impl FileLayout {
    fn resolve(self) -> RunConfig {
        let FileLayout {
            sheath: sh,
            scope: sc,
            beam: b,
            sampling: sa,
            io,
        } = self;
        RunConfig {
            sheath: SheathDesign {
                notch_height: sh.notch_height,
                cut_depth: sh.cut_depth,
                notch_spacing: sh.notch_spacing,
                notch_count: sh.notch_count,
                inner_radius: sh.inner_radius,
                outer_radius: sh.outer_radius,
                distal_offset: sh.distal_offset,
                precurve: sh.precurve_deg.to_radians(),
                z_travel: sh.z_travel,
            },
            scope: ScopeDesign {
                shaft_diameter: sc.shaft_diameter,
                channel_offset: sc.channel_offset,
                bend_section_length: sc.bend_section_length,
                bend_min: sc.bend_min_deg.to_radians(),
                bend_max: sc.bend_max_deg.to_radians(),
                camera_fov: sc.camera_fov_deg.to_radians(),
                camera_range: sc.camera_range,
            },
            beam: BeamSpec {
                divergence: b.divergence_deg.to_radians(),
                rays_per_config: b.rays_per_config,
                max_range: b.max_range,
            },
            sampling: SamplingConfig {
                n: sa.n,
                seed: sa.seed,
                clearance: sa.clearance,
                insertion: sa.insertion,
                weights: sa.weights,
                step_fraction: sa.step_fraction,
                budget_factor: sa.budget_factor,
            },
            map: MapOptions {
                mode: sa.mode,
                gating: sa.gating,
                camera_rays: sa.camera_rays,
            },
            io,
        }
    }
}

/// File key for a library parameter name; angles carry a `_deg` suffix.
fn file_key(section: &str, param: &str) -> String {
    let name = match param {
        "precurve" => "precurve_deg",
        "divergence" => "divergence_deg",
        "camera_fov" => "camera_fov_deg",
        "bend_range" => "bend_min_deg",
        other => other,
    };
    format!("{section}.{name}")
}

fn keyed(section: &str, err: KinematicsError) -> ConfigError {
    match &err {
        KinematicsError::InvalidDesign { param, .. } | KinematicsError::NonFinite(param) => {
            ConfigError::invalid(file_key(section, param), err.to_string())
        }
        KinematicsError::OutOfRange { bound, .. } => {
            ConfigError::invalid(file_key(section, bound), err.to_string())
        }
    }
}
