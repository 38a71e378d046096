mod common;

use std::f64::consts::PI;

use nalgebra::Vector3;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use steerfiber::geom::{Pose, TriMesh};
use steerfiber::scope::{camera_visible_faces, scope_frames, ScopeConfig, ScopeDesign};

use common::uv_sphere;

fn design_with_fov(fov: f64) -> ScopeDesign {
    ScopeDesign {
        camera_fov: fov,
        camera_range: f64::INFINITY,
        ..ScopeDesign::default()
    }
}

/// Angle between the +x axis and the direction to `p`.
fn off_axis(p: &Vector3<f64>) -> f64 {
    (p.x / p.norm()).clamp(-1.0, 1.0).acos()
}

#[test]
fn narrow_view_inside_sphere_sees_only_the_cap() {
    let sphere = uv_sphere(1.0, 60, 120);
    // look along +x, away from the poles of the tessellation
    let camera = Pose::new(
        nalgebra::Rotation3::from_axis_angle(&Vector3::y_axis(), PI / 2.0).into_inner(),
        Vector3::zeros(),
    );
    assert!((camera.z_axis() - Vector3::x()).norm() < 1e-12);
    let fov = 10f64.to_radians();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let seen = camera_visible_faces(&camera, &design_with_fov(fov), &sphere, 20_000, &mut rng);
    assert!(!seen.is_empty());
    for f in 0..sphere.face_count() {
        let tri = sphere.triangle(f);
        let nearest = tri.iter().map(off_axis).fold(f64::INFINITY, f64::min);
        let farthest = tri.iter().map(off_axis).fold(0.0, f64::max);
        if seen.binary_search(&f).is_ok() {
            // some part of the face lies inside the cone
            assert!(nearest <= fov + 0.06, "face {f} at {nearest}");
        } else {
            // faces well inside the cone are large enough to be sampled
            assert!(farthest > fov - 0.01, "face {f} inside the cone was missed");
        }
    }
}

#[test]
fn camera_facing_away_sees_nothing() {
    let plate = TriMesh::new(
        vec![
            Vector3::new(-5.0, -5.0, -3.0),
            Vector3::new(5.0, -5.0, -3.0),
            Vector3::new(0.0, 5.0, -3.0),
        ],
        vec![[0, 1, 2]],
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let seen = camera_visible_faces(&Pose::identity(), &design_with_fov(1.4), &plate, 5000, &mut rng);
    assert!(seen.is_empty());
}

#[test]
fn all_round_view_sees_every_face_of_a_convex_cavity() {
    let sphere = uv_sphere(3.0, 10, 14);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let wide = design_with_fov(PI - 1e-6);
    let seen = camera_visible_faces(&Pose::identity(), &wide, &sphere, 200_000, &mut rng);
    // from the center every face is the first thing along some line of sight
    assert_eq!(seen, (0..sphere.face_count()).collect::<Vec<_>>());
}

#[test]
fn more_rays_never_see_less() {
    let sphere = uv_sphere(2.0, 30, 40);
    let design = design_with_fov(0.6);
    let pose = Pose::trans_z(0.5) * Pose::rot_z(0.3);
    let mut prev: Vec<usize> = Vec::new();
    for n in [10, 100, 1000, 5000] {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let seen = camera_visible_faces(&pose, &design, &sphere, n, &mut rng);
        assert!(prev.iter().all(|f| seen.binary_search(f).is_ok()));
        prev = seen;
    }
}

#[test]
fn range_limits_visibility() {
    let sphere = uv_sphere(10.0, 20, 30);
    let short = ScopeDesign {
        camera_range: 5.0,
        ..ScopeDesign::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    assert!(camera_visible_faces(&Pose::identity(), &short, &sphere, 1000, &mut rng).is_empty());
}

proptest! {
    #[test]
    fn channel_is_rigidly_attached_to_the_camera(
        insertion in 0.0..40.0f64,
        roll in -PI..PI,
        bend in -2.2..2.2f64,
    ) {
        let d = ScopeDesign::default();
        let frames = scope_frames(&d, &ScopeConfig { insertion, roll, tip_bend: bend }).unwrap();
        let rel = frames.camera.inverse() * frames.channel_exit;
        let fixed = d.camera_to_channel();
        prop_assert!((rel.rotation - fixed.rotation).amax() <= 1e-9);
        prop_assert!((rel.translation - fixed.translation).amax() <= 1e-9);
        prop_assert!(frames.camera.orthonormality_error() <= 1e-9);
    }

    #[test]
    fn opposite_bend_under_half_roll_coincides(bend in 0.0..2.2f64, insertion in 0.0..30.0f64) {
        // with the channel on the camera axis the two articulations reach
        // the same exit point
        let d = ScopeDesign { channel_offset: [0.0, 0.0], ..ScopeDesign::default() };
        let a = scope_frames(&d, &ScopeConfig { insertion, roll: PI, tip_bend: bend }).unwrap();
        let b = scope_frames(&d, &ScopeConfig { insertion, roll: 0.0, tip_bend: -bend }).unwrap();
        prop_assert!((a.channel_exit.translation - b.channel_exit.translation).amax() <= 1e-9);
        prop_assert!((a.camera.translation - b.camera.translation).amax() <= 1e-9);
        prop_assert!((a.camera.z_axis() - b.camera.z_axis()).amax() <= 1e-9);
    }

    #[test]
    fn arc_tip_follows_circle(bend in -2.2..2.2f64) {
        let d = ScopeDesign::default();
        let l = d.bend_section_length;
        let f = scope_frames(&d, &ScopeConfig { insertion: 0.0, roll: 0.0, tip_bend: bend }).unwrap();
        let (x, z) = if bend.abs() < 1e-12 {
            (0.0, l)
        } else {
            let r = l / bend;
            (r * (1.0 - bend.cos()), r * bend.sin())
        };
        prop_assert!((f.camera.translation - Vector3::new(x, 0.0, z)).amax() <= 1e-9);
    }
}
