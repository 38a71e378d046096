//! Rigid transforms and the SE(3) exponential map.

use std::ops::Mul;

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

/// Below this rotation angle the Rodrigues coefficients are evaluated by
/// their Taylor expansions.
const SMALL_ANGLE: f64 = 1e-2;

/// A twist `[v | w]`: translational part `v` (mm per unit parameter) and
/// rotational part `w` (rad per unit parameter).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Twist {
    pub v: Vector3<f64>,
    pub w: Vector3<f64>,
}

impl Twist {
    pub fn new(v: Vector3<f64>, w: Vector3<f64>) -> Self {
        Self { v, w }
    }

    /// `[0 0 1 | 0 0 0]`: unit-speed travel along the local z axis.
    pub fn translation_z() -> Self {
        Self::new(Vector3::z(), Vector3::zeros())
    }

    /// `[0 0 1 | 0 kappa 0]`: a planar constant-curvature arc bending toward
    /// local +x, parameterized by arc length.
    pub fn arc(kappa: f64) -> Self {
        Self::new(Vector3::z(), Vector3::new(0.0, kappa, 0.0))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.v * s, self.w * s)
    }
}

/// Rigid transform: `p_parent = rotation * p_child + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn identity() -> Self {
        Self::new(Matrix3::identity(), Vector3::zeros())
    }

    pub fn from_translation(t: Vector3<f64>) -> Self {
        Self::new(Matrix3::identity(), t)
    }

    /// Rotation by `angle` about the z axis.
    pub fn rot_z(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        #[rustfmt::skip]
        let r = Matrix3::new(
            c, -s, 0.0,
            s,  c, 0.0,
            0.0, 0.0, 1.0,
        );
        Self::new(r, Vector3::zeros())
    }

    pub fn trans_z(d: f64) -> Self {
        Self::from_translation(Vector3::new(0.0, 0.0, d))
    }

    pub fn position(&self) -> Vector3<f64> {
        self.translation
    }

    /// Local x axis expressed in the parent frame.
    pub fn x_axis(&self) -> Vector3<f64> {
        self.rotation.column(0).into_owned()
    }

    pub fn y_axis(&self) -> Vector3<f64> {
        self.rotation.column(1).into_owned()
    }

    /// Local z axis expressed in the parent frame; the pointing direction of
    /// every tool frame in this crate.
    pub fn z_axis(&self) -> Vector3<f64> {
        self.rotation.column(2).into_owned()
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    pub fn transform_vector(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * v
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self::new(rt, -(rt * self.translation))
    }

    /// Largest entry of `RᵀR - I` and `|det R - 1|`.
    pub fn orthonormality_error(&self) -> f64 {
        let e = self.rotation.transpose() * self.rotation - Matrix3::identity();
        e.amax().max((self.rotation.determinant() - 1.0).abs())
    }

    /// Row-major rotation and translation, for serialization.
    pub fn to_record(&self) -> PoseRecord {
        let r = &self.rotation;
        PoseRecord {
            rotation: [
                [r[(0, 0)], r[(0, 1)], r[(0, 2)]],
                [r[(1, 0)], r[(1, 1)], r[(1, 2)]],
                [r[(2, 0)], r[(2, 1)], r[(2, 2)]],
            ],
            translation: [self.translation.x, self.translation.y, self.translation.z],
        }
    }
}

impl Mul for Pose {
    type Output = Pose;

    fn mul(self, rhs: Pose) -> Pose {
        Pose::new(
            self.rotation * rhs.rotation,
            self.rotation * rhs.translation + self.translation,
        )
    }
}

impl Mul<&Pose> for &Pose {
    type Output = Pose;

    fn mul(self, rhs: &Pose) -> Pose {
        *self * *rhs
    }
}

/// Plain-array form of a [`Pose`].
#[derive(Debug, Clone, Serialize)]
pub struct PoseRecord {
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
}

pub fn skew(w: &Vector3<f64>) -> Matrix3<f64> {
    #[rustfmt::skip]
    let m = Matrix3::new(
        0.0, -w.z,  w.y,
        w.z,  0.0, -w.x,
       -w.y,  w.x,  0.0,
    );
    m
}

/// Closed-form exponential of the twist `xi` scaled by `length`.
///
/// Pure translation when the rotational part vanishes, otherwise the
/// Rodrigues screw construction `R = I + A W + B W²`, `t = (I + B W + C W²) v`.
pub fn exp_twist(xi: &Twist, length: f64) -> Pose {
    let scaled = xi.scaled(length);
    let theta_sq = scaled.w.norm_squared();
    let theta = theta_sq.sqrt();
    if theta == 0.0 {
        return Pose::from_translation(scaled.v);
    }

    let (a, b, c) = if theta < SMALL_ANGLE {
        let t2 = theta_sq;
        let t4 = t2 * t2;
        (
            1.0 - t2 / 6.0 + t4 / 120.0,
            0.5 - t2 / 24.0 + t4 / 720.0,
            1.0 / 6.0 - t2 / 120.0 + t4 / 5040.0,
        )
    } else {
        let (s, co) = theta.sin_cos();
        (
            s / theta,
            (1.0 - co) / theta_sq,
            (theta - s) / (theta_sq * theta),
        )
    };

    let w = skew(&scaled.w);
    let w2 = w * w;
    let id = Matrix3::identity();
    let rotation = id + w * a + w2 * b;
    let v_mat = id + w * b + w2 * c;
    Pose::new(rotation, v_mat * scaled.v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix4;

    /// Scaling-and-squaring Taylor exponential of the 4x4 twist matrix.
    fn numeric_exp(xi: &Twist, length: f64) -> Pose {
        let s = xi.scaled(length);
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&skew(&s.w));
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&s.v);
        let norm = m.norm();
        let squarings = if norm > 0.5 {
            (norm / 0.5).log2().ceil() as u32
        } else {
            0
        };
        let m = m / 2f64.powi(squarings as i32);
        let mut term = Matrix4::identity();
        let mut sum = Matrix4::identity();
        for k in 1..30 {
            term = term * m / k as f64;
            sum += term;
        }
        for _ in 0..squarings {
            sum = sum * sum;
        }
        Pose::new(
            sum.fixed_view::<3, 3>(0, 0).into_owned(),
            sum.fixed_view::<3, 1>(0, 3).into_owned(),
        )
    }

    #[test]
    fn pure_translation() {
        let p = exp_twist(&Twist::translation_z(), 1.31);
        assert_eq!(p.rotation, Matrix3::identity());
        assert!((p.translation - Vector3::new(0.0, 0.0, 1.31)).norm() < 1e-15);
    }

    #[test]
    fn zero_curvature_limit() {
        let p = exp_twist(&Twist::arc(1e-14), 2.0);
        assert!((p.rotation - Matrix3::identity()).amax() < 1e-12);
        assert!((p.translation - Vector3::new(0.0, 0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn arc_matches_circle_and_numeric_exponential() {
        let kappa: f64 = 0.1;
        let s = 2.0;
        let p = exp_twist(&Twist::arc(kappa), s);
        let expected = Vector3::new(
            (1.0 - (kappa * s).cos()) / kappa,
            0.0,
            (kappa * s).sin() / kappa,
        );
        assert!((p.translation - expected).norm() < 1e-12);
        let angle = p.rotation[(0, 2)].atan2(p.rotation[(2, 2)]);
        assert!((angle - 0.2).abs() < 1e-12);

        let n = numeric_exp(&Twist::arc(kappa), s);
        assert!((p.rotation - n.rotation).amax() < 1e-12);
        assert!((p.translation - n.translation).norm() < 1e-12);
    }

    #[test]
    fn general_twists_match_numeric_exponential() {
        let cases = [
            (Vector3::new(0.3, -1.0, 2.0), Vector3::new(0.5, 0.2, -0.7), 1.7),
            (Vector3::new(1.0, 0.0, 0.0), Vector3::new(0.0, 0.0, 3.0), 2.5),
            (Vector3::new(-0.2, 0.4, 0.1), Vector3::new(1e-4, -2e-4, 3e-4), 4.0),
        ];
        for (v, w, l) in cases {
            let xi = Twist::new(v, w);
            let a = exp_twist(&xi, l);
            let b = numeric_exp(&xi, l);
            assert!((a.rotation - b.rotation).amax() < 1e-11, "{a:?} vs {b:?}");
            assert!((a.translation - b.translation).norm() < 1e-11);
        }
    }

    #[test]
    fn inverse_composes_to_identity() {
        let p = exp_twist(
            &Twist::new(Vector3::new(1.0, 2.0, 3.0), Vector3::new(0.3, -0.1, 0.7)),
            1.3,
        );
        let id = p * p.inverse();
        assert!((id.rotation - Matrix3::identity()).amax() < 1e-14);
        assert!(id.translation.norm() < 1e-14);
    }
}
