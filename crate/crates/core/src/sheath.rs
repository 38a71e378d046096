//! Kinematics of the tendon-actuated asymmetric-notch sheath.
//!
//! The sheath is a chain of `n` identical units, each a notched (cut) segment
//! followed by an uncut spacer. Pulling the tendon by `dl` closes every notch
//! by `dl / n`; each cut segment then bends into a constant-curvature arc
//! about the neutral plane of its remaining cross-section:
//!
//! ```text
//! kappa = dl_i / (h (r_i + ybar) - dl_i ybar)
//! s     = h / (1 + ybar kappa)
//! ```
//!
//! so that each notch turns by `kappa s = dl_i / (r_i + ybar)`. The sheath
//! bends toward local +x (the cut side), about local +y.

use std::f64::consts::PI;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::KinematicsError;
use crate::geom::{exp_twist, Pose, Twist};

/// Bend radius the internal optical fiber tolerates (mm).
pub const FIBER_MIN_BEND_RADIUS: f64 = 6.0;
/// Interior samples per notch arc in the backbone (plus the arc end).
pub const ARC_SAMPLES: usize = 5;
/// Relative slack when comparing a displacement against its closure limit.
const CLOSURE_SLACK: f64 = 1e-12;

/// Notch geometry and actuation limits of a sheath.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SheathDesign {
    /// Notch height `h` along the tube axis (mm).
    pub notch_height: f64,
    /// Cut depth `w`, measured across the tube from the outer surface (mm).
    pub cut_depth: f64,
    /// Uncut spacing `u` between consecutive notches (mm).
    pub notch_spacing: f64,
    pub notch_count: u32,
    pub inner_radius: f64,
    pub outer_radius: f64,
    /// End cap plus fiber stick-out beyond the last spacer (mm).
    pub distal_offset: f64,
    /// Resting bend at zero tendon tension (rad), spread evenly over notches.
    pub precurve: f64,
    /// Axial translation travel of the actuation unit (mm).
    pub z_travel: f64,
}

impl Default for SheathDesign {
    /// The 1.1 mm OD, 0.1 mm wall nitinol prototype with ten notches.
    fn default() -> Self {
        Self {
            notch_height: 0.19,
            cut_depth: 0.94,
            notch_spacing: 1.31,
            notch_count: 10,
            inner_radius: 0.45,
            outer_radius: 0.55,
            distal_offset: 1.0,
            precurve: 0.0,
            z_travel: 17.0,
        }
    }
}

impl SheathDesign {
    /// Validates the notch cross-section: radii and cut depth.
    fn check_section(&self) -> Result<(), KinematicsError> {
        let finite = [
            ("notch_height", self.notch_height),
            ("cut_depth", self.cut_depth),
            ("notch_spacing", self.notch_spacing),
            ("inner_radius", self.inner_radius),
            ("outer_radius", self.outer_radius),
            ("distal_offset", self.distal_offset),
            ("precurve", self.precurve),
            ("z_travel", self.z_travel),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(KinematicsError::NonFinite(name));
            }
        }
        if !(self.inner_radius > 0.0 && self.inner_radius < self.outer_radius) {
            return Err(invalid(
                "inner_radius",
                format!(
                    "must satisfy 0 < inner_radius < outer_radius ({} vs {})",
                    self.inner_radius, self.outer_radius
                ),
            ));
        }
        let ro = self.outer_radius;
        if self.cut_depth >= 2.0 * ro {
            return Err(invalid(
                "cut_depth",
                format!("{} leaves no uncut material (tube is {} wide)", self.cut_depth, 2.0 * ro),
            ));
        }
        if self.cut_depth <= ro {
            return Err(invalid(
                "cut_depth",
                format!("{} must pass the tube axis (exceed outer_radius {ro})", self.cut_depth),
            ));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), KinematicsError> {
        self.check_section()?;
        if self.notch_height <= 0.0 {
            return Err(invalid("notch_height", "must be positive".into()));
        }
        if self.notch_spacing <= 0.0 {
            return Err(invalid("notch_spacing", "must be positive".into()));
        }
        if self.notch_count == 0 {
            return Err(invalid("notch_count", "must be at least 1".into()));
        }
        if self.distal_offset < 0.0 {
            return Err(invalid("distal_offset", "must be non-negative".into()));
        }
        if self.z_travel < 0.0 {
            return Err(invalid("z_travel", "must be non-negative".into()));
        }
        let phi_max = max_bend_angle(self)?;
        if !(0.0..phi_max).contains(&self.precurve) {
            return Err(invalid(
                "precurve",
                format!("{} rad must lie in [0, {phi_max}) rad", self.precurve),
            ));
        }
        Ok(())
    }
}

fn invalid(param: &'static str, reason: String) -> KinematicsError {
    KinematicsError::InvalidDesign { param, reason }
}

/// Area and centroid height of the part of a disc of radius `r` lying above
/// the chord `y = d` (`|d| < r`).
fn circular_segment(r: f64, d: f64) -> (f64, f64) {
    if d >= r {
        return (0.0, 0.0);
    }
    let angle = 2.0 * (d / r).acos();
    let area = 0.5 * r * r * (angle - angle.sin());
    let centroid = 4.0 * r * (0.5 * angle).sin().powi(3) / (3.0 * (angle - angle.sin()));
    (area, centroid)
}

/// Distance from the tube axis to the neutral bending plane: the centroid of
/// the annular cross-section left after a chordal cut of depth `w`.
pub fn neutral_plane(design: &SheathDesign) -> Result<f64, KinematicsError> {
    design.check_section()?;
    let chord = design.cut_depth - design.outer_radius;
    let (a_o, y_o) = circular_segment(design.outer_radius, chord);
    let (a_i, y_i) = circular_segment(design.inner_radius, chord);
    let area = a_o - a_i;
    if area <= 0.0 {
        return Err(invalid("cut_depth", "leaves no uncut material".into()));
    }
    Ok((a_o * y_o - a_i * y_i) / area)
}

/// Bend angle with every notch closed: `n h / (r_o + ybar)`.
pub fn max_bend_angle(design: &SheathDesign) -> Result<f64, KinematicsError> {
    let ybar = neutral_plane(design)?;
    Ok(design.notch_count as f64 * design.notch_height / (design.outer_radius + ybar))
}

/// Mean center-line bend radius of the bent span at full closure.
///
/// The span runs from the base of the first notch to the top of the last one
/// (`n` arcs and the `n - 1` spacers between them); the radius is its
/// center-line length over its total turning angle. Infinite when the sheath
/// cannot bend.
pub fn min_bend_radius(design: &SheathDesign) -> Result<f64, KinematicsError> {
    let ybar = neutral_plane(design)?;
    let phi_max = max_bend_angle(design)?;
    if phi_max <= 0.0 {
        return Ok(f64::INFINITY);
    }
    let n = design.notch_count as f64;
    // at closure kappa = 1 / r_o, s = h r_o / (r_o + ybar)
    let s = design.notch_height * design.outer_radius / (design.outer_radius + ybar);
    Ok((n * s + (n - 1.0).max(0.0) * design.notch_spacing) / phi_max)
}

/// How to treat a tendon displacement past notch closure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClosurePolicy {
    #[default]
    Error,
    /// Clamp to closure and log a warning.
    Clamp,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcParams {
    /// Center-line curvature (1/mm).
    pub kappa: f64,
    /// Center-line arc length (mm).
    pub s: f64,
}

impl ArcParams {
    pub fn angle(&self) -> f64 {
        self.kappa * self.s
    }
}

/// Actuated degrees of freedom of the fiber.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FiberConfig {
    /// Tendon displacement (mm).
    pub dl: f64,
    /// Axial translation (mm).
    pub z: f64,
    /// Axial rotation (rad).
    pub theta: f64,
}

impl FiberConfig {
    pub fn new(dl: f64, z: f64, theta: f64) -> Self {
        Self { dl, z, theta }
    }

    /// `theta` wrapped into `[0, 2π)`.
    pub fn theta_wrapped(&self) -> f64 {
        self.theta.rem_euclid(2.0 * PI)
    }
}

#[derive(Debug, Clone)]
pub struct SheathPose {
    pub tip: Pose,
    /// Poses at every cut/uncut boundary, [`ARC_SAMPLES`] per notch arc and
    /// along the distal offset, starting at the sheath base.
    pub backbone: Vec<Pose>,
}

/// A validated design with its neutral plane resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SheathModel {
    design: SheathDesign,
    ybar: f64,
}

impl SheathModel {
    pub fn new(design: SheathDesign) -> Result<Self, KinematicsError> {
        design.validate()?;
        let ybar = neutral_plane(&design)?;
        Ok(Self { design, ybar })
    }

    pub fn design(&self) -> &SheathDesign {
        &self.design
    }

    pub fn neutral_plane(&self) -> f64 {
        self.ybar
    }

    fn n(&self) -> f64 {
        self.design.notch_count as f64
    }

    /// Moment arm between tendon and neutral plane, `r_i + ybar`.
    fn lever(&self) -> f64 {
        self.design.inner_radius + self.ybar
    }

    pub fn max_bend_angle(&self) -> f64 {
        self.n() * self.design.notch_height / (self.design.outer_radius + self.ybar)
    }

    pub fn min_bend_radius(&self) -> f64 {
        min_bend_radius(&self.design).expect("validated design")
    }

    /// Per-notch displacement that closes a notch: `h (r_i + ybar) / (r_o + ybar)`.
    pub fn notch_closure(&self) -> f64 {
        self.design.notch_height * self.lever() / (self.design.outer_radius + self.ybar)
    }

    /// Total tendon displacement that closes every notch of a straight sheath.
    pub fn closure_displacement(&self) -> f64 {
        self.n() * self.notch_closure()
    }

    /// Largest admissible tendon displacement. A pre-curved sheath starts
    /// partly closed, so it reaches closure earlier.
    pub fn max_tendon_displacement(&self) -> f64 {
        ((self.max_bend_angle() - self.design.precurve) * self.lever()).max(0.0)
    }

    fn arc_unchecked(&self, dl_notch: f64) -> ArcParams {
        let h = self.design.notch_height;
        let kappa = dl_notch / (h * self.lever() - dl_notch * self.ybar);
        ArcParams {
            kappa,
            s: h / (1.0 + self.ybar * kappa),
        }
    }

    /// Arc taken by one notch closed by `dl_per_notch`.
    pub fn notch_arc(
        &self,
        dl_per_notch: f64,
        policy: ClosurePolicy,
    ) -> Result<ArcParams, KinematicsError> {
        let limit = self.notch_closure();
        let dl = check_bound("dl_per_notch", dl_per_notch, limit, policy)?;
        Ok(self.arc_unchecked(dl))
    }

    /// Model bend angle for a total tendon displacement (closed form).
    pub fn bend_angle(&self, dl: f64) -> f64 {
        dl / self.lever() + self.design.precurve
    }

    /// Tendon displacement that produces bend angle `phi`; exact inverse of
    /// the constant-curvature model.
    pub fn tendon_for_angle(&self, phi: f64) -> Result<f64, KinematicsError> {
        let lo = self.design.precurve;
        let hi = self.max_bend_angle();
        if !phi.is_finite() {
            return Err(KinematicsError::NonFinite("phi"));
        }
        if phi < lo || phi > hi * (1.0 + CLOSURE_SLACK) {
            return Err(KinematicsError::OutOfRange {
                bound: "bend angle",
                value: phi,
                min: lo,
                max: hi,
            });
        }
        Ok(((phi - lo) * self.lever()).min(self.max_tendon_displacement()))
    }

    /// Per-notch arc for a total displacement, including the precurve share.
    fn arc_for(&self, dl: f64) -> ArcParams {
        let n = self.n();
        self.arc_unchecked(dl / n + self.design.precurve / n * self.lever())
    }

    /// Mean center-line radius of the bent span for displacement `dl`.
    pub fn bend_radius(&self, dl: f64) -> f64 {
        let arc = self.arc_for(dl);
        let phi = self.n() * arc.angle();
        if phi <= 0.0 {
            return f64::INFINITY;
        }
        (self.n() * arc.s + (self.n() - 1.0) * self.design.notch_spacing) / phi
    }

    fn admit(&self, config: &FiberConfig, policy: ClosurePolicy) -> Result<FiberConfig, KinematicsError> {
        for (name, v) in [("dl", config.dl), ("z", config.z), ("theta", config.theta)] {
            if !v.is_finite() {
                return Err(KinematicsError::NonFinite(name));
            }
        }
        let dl = check_bound("dl", config.dl, self.max_tendon_displacement(), policy)?;
        let z_travel = self.design.z_travel;
        if config.z < 0.0 || config.z > z_travel {
            return Err(KinematicsError::OutOfRange {
                bound: "z",
                value: config.z,
                min: 0.0,
                max: z_travel,
            });
        }
        Ok(FiberConfig { dl, ..*config })
    }

    pub fn forward_kinematics(&self, config: &FiberConfig) -> Result<SheathPose, KinematicsError> {
        self.forward_kinematics_with(config, ClosurePolicy::Error)
    }

    /// Tip pose and backbone in the sheath base frame (the frame the sheath
    /// translates and rotates in).
    pub fn forward_kinematics_with(
        &self,
        config: &FiberConfig,
        policy: ClosurePolicy,
    ) -> Result<SheathPose, KinematicsError> {
        let config = self.admit(config, policy)?;
        let arc = self.arc_for(config.dl);
        let arc_twist = Twist::arc(arc.kappa);
        let spacer = exp_twist(&Twist::translation_z(), self.design.notch_spacing);
        let sub_arcs: Vec<Pose> = (1..=ARC_SAMPLES)
            .map(|k| exp_twist(&arc_twist, arc.s * k as f64 / ARC_SAMPLES as f64))
            .collect();

        let n = self.design.notch_count as usize;
        let mut backbone = Vec::with_capacity(n * (ARC_SAMPLES + 1) + 4);
        let mut cur = Pose::trans_z(config.z) * Pose::rot_z(config.theta);
        backbone.push(cur);
        for _ in 0..n {
            for sub in &sub_arcs {
                backbone.push(cur * *sub);
            }
            cur = cur * sub_arcs[ARC_SAMPLES - 1] * spacer;
            backbone.push(cur);
        }
        let step = self.design.notch_height.max(self.design.notch_spacing);
        let pieces = (self.design.distal_offset / step).ceil().max(1.0) as usize;
        if self.design.distal_offset > 0.0 {
            let piece = Pose::trans_z(self.design.distal_offset / pieces as f64);
            for _ in 0..pieces {
                cur = cur * piece;
                backbone.push(cur);
            }
        }
        Ok(SheathPose { tip: cur, backbone })
    }
}

fn check_bound(
    name: &'static str,
    value: f64,
    max: f64,
    policy: ClosurePolicy,
) -> Result<f64, KinematicsError> {
    if !value.is_finite() {
        return Err(KinematicsError::NonFinite(name));
    }
    let over = value > max * (1.0 + CLOSURE_SLACK);
    if value < 0.0 || over {
        if over && policy == ClosurePolicy::Clamp {
            warn!("{name} = {value} exceeds closure {max}; clamped");
            return Ok(max);
        }
        return Err(KinematicsError::OutOfRange {
            bound: name,
            value,
            min: 0.0,
            max,
        });
    }
    Ok(value.min(max))
}

/// Bend angle of `tip` relative to `base`, measured in the base x-z plane.
pub fn bend_angle_between(base: &Pose, tip: &Pose) -> f64 {
    let rel = base.inverse() * *tip;
    rel.rotation[(0, 2)].atan2(rel.rotation[(2, 2)])
}
