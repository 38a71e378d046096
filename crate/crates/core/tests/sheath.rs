use std::f64::consts::PI;

use nalgebra::Vector3;
use proptest::prelude::*;
use steerfiber::sheath::{
    bend_angle_between, ClosurePolicy, FiberConfig, SheathDesign, SheathModel, FIBER_MIN_BEND_RADIUS,
};

fn prototype() -> SheathModel {
    SheathModel::new(SheathDesign::default()).unwrap()
}

fn design() -> impl Strategy<Value = SheathDesign> {
    (
        0.3..2.0f64,
        0.3..0.95f64,
        1.05..1.95f64,
        0.05..0.5f64,
        0.2..2.0f64,
        1u32..30,
        0.0..3.0f64,
    )
        .prop_map(|(ro, ri_frac, w_frac, h, u, n, distal)| SheathDesign {
            notch_height: h,
            cut_depth: w_frac * ro,
            notch_spacing: u,
            notch_count: n,
            inner_radius: ri_frac * ro,
            outer_radius: ro,
            distal_offset: distal,
            precurve: 0.0,
            z_travel: 17.0,
        })
}

/// Tip position by planar turtle geometry: each notch is a circular arc of
/// radius 1/κ and angle κs bending toward +x, followed by a straight spacer.
fn turtle_tip(model: &SheathModel, dl: f64) -> (Vector3<f64>, f64) {
    let d = model.design();
    let n = d.notch_count as usize;
    let h = d.notch_height;
    let ybar = model.neutral_plane();
    let dln = dl / n as f64;
    let kappa = dln / (h * (d.inner_radius + ybar) - dln * ybar);
    let s = h / (1.0 + ybar * kappa);
    let (mut x, mut z, mut heading) = (0.0, 0.0, 0.0f64);
    for _ in 0..n {
        let turn = kappa * s;
        if kappa > 0.0 {
            let r = 1.0 / kappa;
            x += r * (heading.cos() - (heading + turn).cos());
            z += r * ((heading + turn).sin() - heading.sin());
        } else {
            x += s * heading.sin();
            z += s * heading.cos();
        }
        heading += turn;
        x += d.notch_spacing * heading.sin();
        z += d.notch_spacing * heading.cos();
    }
    x += d.distal_offset * heading.sin();
    z += d.distal_offset * heading.cos();
    (Vector3::new(x, 0.0, z), heading)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn tip_matches_planar_geometry(
        frac in 0.0..=1.0f64,
        z in 0.0..=17.0f64,
        theta in -10.0..10.0f64,
    ) {
        let m = prototype();
        let dl = frac * m.max_tendon_displacement();
        let tip = m.forward_kinematics(&FiberConfig::new(dl, z, theta)).unwrap().tip;
        let (p, heading) = turtle_tip(&m, dl);
        let (s, c) = theta.sin_cos();
        let expected = Vector3::new(c * p.x - s * p.y, s * p.x + c * p.y, p.z + z);
        prop_assert!((tip.translation - expected).amax() <= 1e-9);
        prop_assert!((tip.z_axis().z - heading.cos()).abs() <= 1e-9);
    }

    #[test]
    fn bend_angle_is_linear_in_displacement(frac in 0.0..=1.0f64) {
        let m = prototype();
        let dl = frac * m.max_tendon_displacement();
        let pose = m.forward_kinematics(&FiberConfig::new(dl, 0.0, 0.0)).unwrap();
        let phi = bend_angle_between(&pose.backbone[0], &pose.tip);
        let lever = m.design().inner_radius + m.neutral_plane();
        prop_assert!((phi - dl / lever).abs() <= 1e-9);
        prop_assert!((m.bend_angle(dl) - phi).abs() <= 1e-9);
    }

    #[test]
    fn bend_angle_increases_with_displacement(a in 0.0..1.0f64, b in 0.0..1.0f64) {
        prop_assume!((a - b).abs() > 1e-6);
        let m = prototype();
        let angle = |f: f64| {
            let pose = m.forward_kinematics(&FiberConfig::new(f * m.max_tendon_displacement(), 0.0, 0.0)).unwrap();
            bend_angle_between(&pose.backbone[0], &pose.tip)
        };
        prop_assert_eq!(angle(a) < angle(b), a < b);
    }

    #[test]
    fn translation_and_rotation_do_not_change_the_bend(
        frac in 0.0..=1.0f64,
        z in 0.0..=17.0f64,
        theta in -PI..PI,
    ) {
        let m = prototype();
        let dl = frac * m.max_tendon_displacement();
        let base = m.forward_kinematics(&FiberConfig::new(dl, 0.0, 0.0)).unwrap();
        let moved = m.forward_kinematics(&FiberConfig::new(dl, z, theta)).unwrap();
        let phi0 = bend_angle_between(&base.backbone[0], &base.tip);
        let phi1 = bend_angle_between(&moved.backbone[0], &moved.tip);
        prop_assert!((phi0 - phi1).abs() <= 1e-9);
        // same tip, expressed in the translated and rotated base
        let rel = moved.backbone[0].inverse() * moved.tip;
        prop_assert!((rel.translation - base.tip.translation).amax() <= 1e-9);
        let shifted = m.forward_kinematics(&FiberConfig::new(dl, z, 0.0)).unwrap();
        let dz = shifted.tip.translation - base.tip.translation;
        prop_assert!((dz - Vector3::new(0.0, 0.0, z)).amax() <= 1e-9);
    }

    #[test]
    fn half_turn_mirrors_through_the_axis(frac in 0.0..=1.0f64, z in 0.0..=17.0f64, theta in -PI..PI) {
        let m = prototype();
        let dl = frac * m.max_tendon_displacement();
        let a = m.forward_kinematics(&FiberConfig::new(dl, z, theta)).unwrap().tip.translation;
        let b = m.forward_kinematics(&FiberConfig::new(dl, z, theta + PI)).unwrap().tip.translation;
        prop_assert!((a.x + b.x).abs() <= 1e-9 && (a.y + b.y).abs() <= 1e-9 && (a.z - b.z).abs() <= 1e-9);
    }

    #[test]
    fn inverse_map_round_trips(frac in 0.0..=1.0f64) {
        let m = prototype();
        let phi = frac * m.max_bend_angle();
        let dl = m.tendon_for_angle(phi).unwrap();
        let pose = m.forward_kinematics(&FiberConfig::new(dl, 0.0, 0.0)).unwrap();
        prop_assert!((bend_angle_between(&pose.backbone[0], &pose.tip) - phi).abs() <= 1e-9);
    }

    #[test]
    fn closed_notch_turns_one_nth_of_the_maximum(d in design()) {
        let m = SheathModel::new(d).unwrap();
        let ybar = m.neutral_plane();
        prop_assert!(ybar > 0.0 && ybar < d.outer_radius);
        let arc = m.notch_arc(m.notch_closure(), ClosurePolicy::Error).unwrap();
        let per_notch = m.max_bend_angle() / d.notch_count as f64;
        prop_assert!((arc.angle() - per_notch).abs() <= 1e-9);
        prop_assert!((arc.kappa - 1.0 / d.outer_radius).abs() <= 1e-9 / d.outer_radius);
    }

    #[test]
    fn backbone_steps_are_short(d in design(), frac in 0.0..=1.0f64) {
        let m = SheathModel::new(d).unwrap();
        let dl = frac * m.max_tendon_displacement();
        let pose = m.forward_kinematics(&FiberConfig::new(dl, 0.0, 0.0)).unwrap();
        let limit = d.notch_height.max(d.notch_spacing) + 1e-6;
        for w in pose.backbone.windows(2) {
            prop_assert!((w[1].translation - w[0].translation).norm() <= limit);
        }
        prop_assert_eq!(pose.backbone.last().unwrap(), &pose.tip);
    }

    #[test]
    fn precurve_adds_a_constant_offset(pre_frac in 0.0..0.9f64, frac in 0.0..=1.0f64) {
        let base = SheathDesign::default();
        let phi_max = SheathModel::new(base).unwrap().max_bend_angle();
        let m = SheathModel::new(SheathDesign { precurve: pre_frac * phi_max, ..base }).unwrap();
        let dl = frac * m.max_tendon_displacement();
        let pose = m.forward_kinematics(&FiberConfig::new(dl, 0.0, 0.0)).unwrap();
        let lever = base.inner_radius + m.neutral_plane();
        let phi = bend_angle_between(&pose.backbone[0], &pose.tip);
        prop_assert!((phi - (m.design().precurve + dl / lever)).abs() <= 1e-9);
        prop_assert!(phi <= phi_max + 1e-9);
    }
}

#[test]
fn prototype_is_fiber_safe_over_its_stroke() {
    let m = prototype();
    let dl_max = m.max_tendon_displacement();
    for k in 0..=10_000 {
        let dl = dl_max * k as f64 / 10_000.0;
        assert!(m.bend_radius(dl) >= FIBER_MIN_BEND_RADIUS, "dl = {dl}");
    }
    assert!((m.bend_radius(dl_max) - m.min_bend_radius()).abs() < 1e-12);
}

#[test]
fn bend_radius_from_backbone_length() {
    // path length of the bent span over its turning angle, measured on the
    // sampled backbone
    let m = prototype();
    let n = m.design().notch_count as usize;
    for frac in [0.25, 0.5, 1.0] {
        let dl = frac * m.max_tendon_displacement();
        let pose = m.forward_kinematics(&FiberConfig::new(dl, 0.0, 0.0)).unwrap();
        let last_arc_end = 6 * n - 1;
        let length: f64 = pose.backbone[..=last_arc_end]
            .windows(2)
            .map(|w| (w[1].translation - w[0].translation).norm())
            .sum();
        let phi = bend_angle_between(&pose.backbone[0], &pose.backbone[last_arc_end]);
        let r = length / phi;
        assert!((r - m.bend_radius(dl)).abs() / r < 1e-4, "{r} vs {}", m.bend_radius(dl));
    }
}

#[test]
fn notch_height_sweep_shrinks_radius() {
    let mut last = f64::INFINITY;
    for k in 0..=20 {
        let h = 0.1 + 0.01 * k as f64;
        let m = SheathModel::new(SheathDesign {
            notch_height: h,
            ..SheathDesign::default()
        })
        .unwrap();
        let r = m.min_bend_radius();
        assert!(r < last, "h = {h}");
        last = r;
    }
}
