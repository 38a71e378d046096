mod common;

use nalgebra::Vector3;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use steerfiber::geom::{exp_twist, Pose, Ray, TriMesh, Twist, WELD_TOLERANCE};

use common::{random_point, random_soup, random_unit, uv_sphere};

fn vec3() -> impl Strategy<Value = Vector3<f64>> {
    (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(x, y, z)| Vector3::new(x, y, z))
}

fn pose_close(a: &Pose, b: &Pose, tol: f64) -> bool {
    (a.rotation - b.rotation).amax() <= tol && (a.translation - b.translation).amax() <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn exponential_is_a_rigid_motion(v in vec3(), w in vec3(), len in 0.0..10.0f64) {
        let pose = exp_twist(&Twist::new(v, w), len);
        prop_assert!(pose.orthonormality_error() <= 1e-9);
        prop_assert!((pose.rotation.determinant() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn exponential_is_a_one_parameter_subgroup(v in vec3(), w in vec3(), a in 0.0..5.0f64, b in 0.0..5.0f64) {
        let xi = Twist::new(v, w);
        let composed = exp_twist(&xi, a) * exp_twist(&xi, b);
        prop_assert!(pose_close(&composed, &exp_twist(&xi, a + b), 1e-9));
    }

    #[test]
    fn exponential_inverse_is_negative_length(v in vec3(), w in vec3(), a in 0.0..5.0f64) {
        let xi = Twist::new(v, w);
        let back = exp_twist(&xi.scaled(-1.0), a);
        prop_assert!(pose_close(&(exp_twist(&xi, a) * back), &Pose::identity(), 1e-9));
    }

    #[test]
    fn welding_preserves_area(seed in any::<u64>(), stacks in 3usize..12, slices in 3usize..16) {
        let sphere = uv_sphere(1.0 + (seed % 7) as f64, stacks, slices);
        let soup: Vec<_> = (0..sphere.face_count()).map(|f| sphere.triangle(f)).collect();
        let welded = TriMesh::from_triangles(&soup, WELD_TOLERANCE).unwrap();
        prop_assert_eq!(welded.vertices().len(), sphere.vertices().len());
        prop_assert_eq!(welded.face_count(), sphere.face_count());
        let rel = (welded.total_area() - sphere.total_area()).abs() / sphere.total_area();
        prop_assert!(rel <= 1e-9);
    }
}

/// Plane intersection followed by barycentric coordinates from the Gram
/// system; returns `(t, u, v, margin)` where `margin` is the signed distance
/// (in barycentric units) to the nearest triangle edge.
fn plane_oracle(ray: &Ray, tri: &[Vector3<f64>; 3]) -> Option<(f64, f64, f64, f64)> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let n = e1.cross(&e2);
    let denom = n.dot(&ray.direction);
    if denom.abs() < 1e-9 * n.norm() {
        return None;
    }
    let t = n.dot(&(tri[0] - ray.origin)) / denom;
    let p = ray.origin + t * ray.direction - tri[0];
    let (d11, d12, d22) = (e1.dot(&e1), e1.dot(&e2), e2.dot(&e2));
    let (p1, p2) = (p.dot(&e1), p.dot(&e2));
    let det = d11 * d22 - d12 * d12;
    let u = (d22 * p1 - d12 * p2) / det;
    let v = (d11 * p2 - d12 * p1) / det;
    Some((t, u, v, u.min(v).min(1.0 - u - v)))
}

#[test]
fn triangle_test_matches_plane_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mesh = random_soup(&mut rng, 200, 3.0, 2.0);
    let (mut hits, mut ambiguous) = (0, 0);
    for _ in 0..1000 {
        // aim at a point around a random face so that hits and near misses
        // both occur
        let [a, b, c] = mesh.triangle(rng.random_range(0..mesh.face_count()));
        let (s, t) = (rng.random_range(-0.3..1.3), rng.random_range(-0.3..1.3));
        let target = a + s * (b - a) + t * (c - a);
        let origin = random_point(&mut rng, 5.0);
        let ray = Ray::new(origin, target - origin);
        for f in 0..mesh.face_count() {
            let got = mesh.intersect(&ray, f);
            let want = plane_oracle(&ray, &mesh.triangle(f));
            match want {
                Some((t, u, v, margin)) if margin > 1e-9 && t > 1e-6 => {
                    let h = got.unwrap_or_else(|| panic!("missed face {f}"));
                    assert!((h.t - t).abs() <= 1e-9 * t.max(1.0));
                    assert!((h.u - u).abs() <= 1e-9 && (h.v - v).abs() <= 1e-9);
                    hits += 1;
                }
                Some((t, _, _, margin)) if margin < -1e-9 || t < -1e-6 => {
                    assert!(got.is_none(), "spurious hit on face {f}");
                }
                None => assert!(got.is_none() || got.unwrap().t > 0.0),
                _ => ambiguous += 1,
            }
            if let Some(h) = got {
                assert!(h.t > 0.0 && h.u >= 0.0 && h.v >= 0.0 && h.u + h.v <= 1.0 + 1e-12);
            }
        }
    }
    assert!(hits > 600, "only {hits} hits exercised");
    assert!(ambiguous < 20, "{ambiguous} boundary cases");
}

#[test]
fn first_hit_equals_exhaustive_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mesh = random_soup(&mut rng, 2000, 10.0, 3.0);
    let mut hits = 0;
    for _ in 0..2000 {
        let ray = Ray::new(random_point(&mut rng, 12.0), random_unit(&mut rng));
        let fast = mesh.first_hit(&ray);
        let slow = mesh.first_hit_exhaustive(&ray);
        assert_eq!(fast.map(|h| h.face), slow.map(|h| h.face));
        if let Some(h) = fast {
            hits += 1;
            assert_eq!(h.t.to_bits(), slow.unwrap().t.to_bits());
            for f in 0..mesh.face_count() {
                if let Some(other) = mesh.intersect(&ray, f) {
                    assert!(h.t <= other.t + 1e-9);
                }
            }
        }
    }
    assert!(hits > 200);
}

#[test]
fn range_limited_hits_are_the_unlimited_hit_or_nothing() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mesh = random_soup(&mut rng, 500, 6.0, 2.0);
    for _ in 0..2000 {
        let ray = Ray::new(random_point(&mut rng, 8.0), random_unit(&mut rng));
        let max_t = rng_range(&mut rng);
        let full = mesh.first_hit(&ray);
        let limited = mesh.first_hit_within(&ray, max_t);
        match full {
            Some(h) if h.t <= max_t => assert_eq!(limited.map(|l| l.face), Some(h.face)),
            _ => assert!(limited.is_none()),
        }
    }
}

fn rng_range(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(0.5..15.0)
}

#[test]
fn ray_directions_are_unit() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1000 {
        let d = random_point(&mut rng, 100.0);
        let ray = Ray::new(Vector3::zeros(), d);
        assert!((ray.direction.norm() - 1.0).abs() <= 1e-12);
    }
}
