#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::Rng;
use steerfiber::geom::TriMesh;

pub fn random_point(rng: &mut impl Rng, half: f64) -> Vector3<f64> {
    Vector3::new(
        rng.random_range(-half..half),
        rng.random_range(-half..half),
        rng.random_range(-half..half),
    )
}

pub fn random_unit(rng: &mut impl Rng) -> Vector3<f64> {
    loop {
        let v = random_point(rng, 1.0);
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Independent triangles of edge length up to `size` scattered in a cube of
/// half-width `half`.
pub fn random_soup(rng: &mut impl Rng, faces: usize, half: f64, size: f64) -> TriMesh {
    let mut vertices = Vec::with_capacity(3 * faces);
    let mut idx = Vec::with_capacity(faces);
    for f in 0..faces {
        let c = random_point(rng, half);
        for _ in 0..3 {
            vertices.push(c + random_point(rng, 0.5 * size));
        }
        let b = 3 * f as u32;
        idx.push([b, b + 1, b + 2]);
    }
    TriMesh::new(vertices, idx).unwrap()
}

/// Closed latitude-longitude sphere with outward winding.
pub fn uv_sphere(radius: f64, stacks: usize, slices: usize) -> TriMesh {
    let mut vertices = vec![Vector3::new(0.0, 0.0, radius)];
    for i in 1..stacks {
        let polar = PI * i as f64 / stacks as f64;
        for j in 0..slices {
            let az = 2.0 * PI * j as f64 / slices as f64;
            vertices.push(radius * Vector3::new(polar.sin() * az.cos(), polar.sin() * az.sin(), polar.cos()));
        }
    }
    vertices.push(Vector3::new(0.0, 0.0, -radius));
    let south = (vertices.len() - 1) as u32;
    let ring = |i: usize, j: usize| (1 + (i - 1) * slices + j % slices) as u32;
    let mut faces = Vec::new();
    for j in 0..slices {
        faces.push([0, ring(1, j), ring(1, j + 1)]);
        faces.push([south, ring(stacks - 1, j + 1), ring(stacks - 1, j)]);
    }
    for i in 1..stacks - 1 {
        for j in 0..slices {
            let (a, b, c, d) = (ring(i, j), ring(i, j + 1), ring(i + 1, j + 1), ring(i + 1, j));
            faces.push([a, d, c]);
            faces.push([a, c, b]);
        }
    }
    TriMesh::new(vertices, faces).unwrap()
}

/// Open cylinder about the z axis from `z0` to `z1`.
pub fn cylinder(radius: f64, z0: f64, z1: f64, rings: usize, slices: usize) -> TriMesh {
    let mut vertices = Vec::new();
    for i in 0..=rings {
        let z = z0 + (z1 - z0) * i as f64 / rings as f64;
        for j in 0..slices {
            let az = 2.0 * PI * j as f64 / slices as f64;
            vertices.push(Vector3::new(radius * az.cos(), radius * az.sin(), z));
        }
    }
    let idx = |i: usize, j: usize| (i * slices + j % slices) as u32;
    let mut faces = Vec::new();
    for i in 0..rings {
        for j in 0..slices {
            faces.push([idx(i, j), idx(i, j + 1), idx(i + 1, j + 1)]);
            faces.push([idx(i, j), idx(i + 1, j + 1), idx(i + 1, j)]);
        }
    }
    TriMesh::new(vertices, faces).unwrap()
}
