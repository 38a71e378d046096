//! Bench procedures: bend-curve fitting, fiducial registration and the
//! optical power budget.

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::error::CalibrationError;

/// One bend measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BendSample {
    /// Tendon displacement (mm).
    pub dl: f64,
    /// Measured bend angle (rad).
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    /// rad per mm of tendon displacement.
    pub slope: f64,
    /// Bend at zero displacement (rad); the pre-curvature.
    pub intercept: f64,
    pub r_squared: f64,
}

impl LineFit {
    pub fn predict(&self, dl: f64) -> f64 {
        self.intercept + self.slope * dl
    }
}

/// Ordinary least-squares line `phi = intercept + slope * dl`.
pub fn fit_bend_line(samples: &[BendSample]) -> Result<LineFit, CalibrationError> {
    if samples.len() < 2 {
        return Err(CalibrationError::TooFewSamples {
            needed: 2,
            got: samples.len(),
        });
    }
    let n = samples.len() as f64;
    let mean_x = samples.iter().map(|s| s.dl).sum::<f64>() / n;
    let mean_y = samples.iter().map(|s| s.phi).sum::<f64>() / n;
    let sxx: f64 = samples.iter().map(|s| (s.dl - mean_x).powi(2)).sum();
    let sxy: f64 = samples
        .iter()
        .map(|s| (s.dl - mean_x) * (s.phi - mean_y))
        .sum();
    let spread = samples.iter().map(|s| s.dl.abs()).fold(0.0, f64::max);
    if sxx <= (f64::EPSILON * spread).powi(2) * n {
        return Err(CalibrationError::RankDeficient);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_tot: f64 = samples.iter().map(|s| (s.phi - mean_y).powi(2)).sum();
    let ss_res: f64 = samples
        .iter()
        .map(|s| (s.phi - intercept - slope * s.dl).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(LineFit {
        slope,
        intercept,
        r_squared,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegistrationResult {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
    /// Root-mean-square residual over all correspondences (mm).
    pub rms_error: f64,
}

impl RegistrationResult {
    pub fn apply(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }
}

/// Least-squares rigid transform taking `src[i]` onto `dst[i]`, by SVD of the
/// cross-covariance with a reflection guard.
pub fn register_fiducials(
    src: &[Vector3<f64>],
    dst: &[Vector3<f64>],
) -> Result<RegistrationResult, CalibrationError> {
    if src.len() != dst.len() {
        return Err(CalibrationError::CountMismatch {
            src: src.len(),
            dst: dst.len(),
        });
    }
    if src.len() < 3 {
        return Err(CalibrationError::TooFewSamples {
            needed: 3,
            got: src.len(),
        });
    }
    let n = src.len() as f64;
    let c_src = src.iter().sum::<Vector3<f64>>() / n;
    let c_dst = dst.iter().sum::<Vector3<f64>>() / n;
    if is_degenerate(src, &c_src) || is_degenerate(dst, &c_dst) {
        return Err(CalibrationError::Degenerate);
    }

    let mut h = Matrix3::zeros();
    for (p, q) in src.iter().zip(dst) {
        h += (p - c_src) * (q - c_dst).transpose();
    }
    let svd = h.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let mut d = Matrix3::identity();
    if (v_t.transpose() * u.transpose()).determinant() < 0.0 {
        d[(2, 2)] = -1.0;
    }
    let rotation = v_t.transpose() * d * u.transpose();
    let translation = c_dst - rotation * c_src;
    let sq: f64 = src
        .iter()
        .zip(dst)
        .map(|(p, q)| (rotation * p + translation - q).norm_squared())
        .sum();
    Ok(RegistrationResult {
        rotation,
        translation,
        rms_error: (sq / n).sqrt(),
    })
}

/// Collinear or coincident: the second principal spread vanishes relative to
/// the first.
fn is_degenerate(points: &[Vector3<f64>], centroid: &Vector3<f64>) -> bool {
    let mut cov = Matrix3::zeros();
    for p in points {
        let d = p - centroid;
        cov += d * d.transpose();
    }
    let mut s: Vec<f64> = cov.symmetric_eigenvalues().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s[0] <= 0.0 || s[1] <= 1e-12 * s[0]
}

/// Fraction of source power coupled into the thin multimode fiber.
pub const COUPLING_EFFICIENCY: f64 = 0.545;
/// Optical loss at the fiber's tightest rated bend.
pub const BEND_LOSS_AT_MIN_RADIUS: f64 = 0.045;
/// Tightest rated bend radius of the fiber (mm).
pub const MIN_BEND_RADIUS_MM: f64 = 6.0;
/// Radius (mm) beyond which bend loss is taken as zero.
pub const LOSSLESS_BEND_RADIUS_MM: f64 = 60.0;

/// Fractional bend loss at `radius`: 4.5 % at 6 mm falling linearly in
/// `ln(radius)` to zero at [`LOSSLESS_BEND_RADIUS_MM`]. Only the 6 mm point is
/// measured; the rest of the curve is an engineering approximation.
pub fn bend_loss(radius: f64) -> Result<f64, CalibrationError> {
    if radius.is_nan() || radius < MIN_BEND_RADIUS_MM {
        return Err(CalibrationError::Domain {
            name: "bend_radius",
            requirement: "at least 6 mm",
            value: radius,
        });
    }
    if radius >= LOSSLESS_BEND_RADIUS_MM {
        return Ok(0.0);
    }
    let frac = (radius / MIN_BEND_RADIUS_MM).ln()
        / (LOSSLESS_BEND_RADIUS_MM / MIN_BEND_RADIUS_MM).ln();
    Ok(BEND_LOSS_AT_MIN_RADIUS * (1.0 - frac))
}

/// Power delivered at the fiber tip (W) for `input_w` at the source and a
/// fiber bent to `bend_radius` (mm; `f64::INFINITY` for a straight fiber).
pub fn power_budget(input_w: f64, bend_radius: f64) -> Result<f64, CalibrationError> {
    if !(input_w >= 0.0 && input_w.is_finite()) {
        return Err(CalibrationError::Domain {
            name: "input_w",
            requirement: "finite and non-negative",
            value: input_w,
        });
    }
    Ok(input_w * COUPLING_EFFICIENCY * (1.0 - bend_loss(bend_radius)?))
}
