use std::collections::HashMap;

use nalgebra::Vector3;

use super::bvh::{pick_canonical, triangle_bounds, Bvh, RayCandidate};
use super::ray::{intersect_triangle, Hit, Ray};
use crate::error::MeshError;

/// Faces with less area than this (mm²) are flagged degenerate and skipped by
/// every geometric query.
pub const DEGENERATE_AREA: f64 = 1e-12;
/// Default vertex-weld tolerance (mm).
pub const WELD_TOLERANCE: f64 = 1e-6;
/// Hits whose distances differ by at most this much (mm) are treated as
/// simultaneous; the lower face index wins.
pub const TIE_EPSILON: f64 = 1e-9;

/// Indexed triangle mesh in millimeters.
///
/// Immutable once built. Construction also builds the ray-query accelerator,
/// so a mesh can be shared read-only between worker threads.
#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<Vector3<f64>>,
    faces: Vec<[u32; 3]>,
    face_areas: Vec<f64>,
    face_normals: Vec<Vector3<f64>>,
    degenerate: Vec<bool>,
    bvh: Bvh,
}

impl TriMesh {
    pub fn new(vertices: Vec<Vector3<f64>>, faces: Vec<[u32; 3]>) -> Result<Self, MeshError> {
        for (i, f) in faces.iter().enumerate() {
            for &idx in f {
                if idx as usize >= vertices.len() {
                    return Err(MeshError::IndexOutOfRange {
                        face: i,
                        index: idx as usize,
                        vertex_count: vertices.len(),
                    });
                }
            }
        }
        for (i, v) in vertices.iter().enumerate() {
            if !v.iter().all(|c| c.is_finite()) {
                return Err(MeshError::NonFiniteVertex(i));
            }
        }

        let mut face_areas = Vec::with_capacity(faces.len());
        let mut face_normals = Vec::with_capacity(faces.len());
        let mut degenerate = Vec::with_capacity(faces.len());
        for f in &faces {
            let [a, b, c] = f.map(|i| vertices[i as usize]);
            let n = (b - a).cross(&(c - a));
            let len = n.norm();
            let area = 0.5 * len;
            face_areas.push(area);
            if area < DEGENERATE_AREA {
                face_normals.push(Vector3::zeros());
                degenerate.push(true);
            } else {
                face_normals.push(n / len);
                degenerate.push(false);
            }
        }

        let live: Vec<u32> = (0..faces.len() as u32)
            .filter(|&i| !degenerate[i as usize])
            .collect();
        let bvh = Bvh::build(live, &|f| {
            let [a, b, c] = faces[f as usize];
            triangle_bounds([
                &vertices[a as usize],
                &vertices[b as usize],
                &vertices[c as usize],
            ])
        });

        Ok(Self {
            vertices,
            faces,
            face_areas,
            face_normals,
            degenerate,
            bvh,
        })
    }

    /// Builds a mesh from a triangle soup, merging vertices closer than
    /// `tolerance` so shared edges become topologically shared.
    pub fn from_triangles(triangles: &[[Vector3<f64>; 3]], tolerance: f64) -> Result<Self, MeshError> {
        let mut welder = Welder::new(tolerance);
        let faces = triangles
            .iter()
            .map(|tri| tri.map(|p| welder.insert(p)))
            .collect();
        Self::new(welder.vertices, faces)
    }

    pub fn empty() -> Self {
        Self::new(Vec::new(), Vec::new()).expect("empty mesh is valid")
    }

    pub fn vertices(&self) -> &[Vector3<f64>] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn face_areas(&self) -> &[f64] {
        &self.face_areas
    }

    pub fn face_normals(&self) -> &[Vector3<f64>] {
        &self.face_normals
    }

    pub fn is_degenerate(&self, face: usize) -> bool {
        self.degenerate[face]
    }

    pub fn total_area(&self) -> f64 {
        self.face_areas.iter().sum()
    }

    pub fn triangle(&self, face: usize) -> [Vector3<f64>; 3] {
        self.faces[face].map(|i| self.vertices[i as usize])
    }

    pub fn centroid(&self, face: usize) -> Vector3<f64> {
        let [a, b, c] = self.triangle(face);
        (a + b + c) / 3.0
    }

    /// Axis-aligned bounds of all vertices, `None` for an empty mesh.
    pub fn bounds(&self) -> Option<(Vector3<f64>, Vector3<f64>)> {
        let first = *self.vertices.first()?;
        Some(self.vertices.iter().fold((first, first), |(lo, hi), v| {
            (lo.inf(v), hi.sup(v))
        }))
    }

    /// Ray against a single face. Degenerate faces never hit.
    pub fn intersect(&self, ray: &Ray, face: usize) -> Option<Hit> {
        if self.degenerate[face] {
            return None;
        }
        let [a, b, c] = self.faces[face];
        intersect_triangle(
            ray,
            &self.vertices[a as usize],
            &self.vertices[b as usize],
            &self.vertices[c as usize],
        )
        .map(|(t, u, v)| Hit { face, t, u, v })
    }

    /// Nearest hit along the ray (no backface culling). Ties within
    /// [`TIE_EPSILON`] go to the lowest face index.
    pub fn first_hit(&self, ray: &Ray) -> Option<Hit> {
        self.first_hit_within(ray, f64::INFINITY)
    }

    /// As [`first_hit`](Self::first_hit), ignoring hits beyond `max_t`.
    pub fn first_hit_within(&self, ray: &Ray, max_t: f64) -> Option<Hit> {
        self.bvh
            .first_hit(ray, max_t, TIE_EPSILON, &|f| {
                let [a, b, c] = self.faces[f];
                intersect_triangle(
                    ray,
                    &self.vertices[a as usize],
                    &self.vertices[b as usize],
                    &self.vertices[c as usize],
                )
            })
            .map(|c| Hit {
                face: c.face,
                t: c.t,
                u: c.u,
                v: c.v,
            })
    }

    /// Reference answer for [`first_hit`](Self::first_hit): tests every face.
    pub fn first_hit_exhaustive(&self, ray: &Ray) -> Option<Hit> {
        pick_canonical(
            (0..self.faces.len()).filter_map(|f| {
                self.intersect(ray, f).map(|h| RayCandidate {
                    face: h.face,
                    t: h.t,
                    u: h.u,
                    v: h.v,
                })
            }),
            TIE_EPSILON,
        )
        .map(|c| Hit {
            face: c.face,
            t: c.t,
            u: c.u,
            v: c.v,
        })
    }

    /// Visits non-degenerate faces that may lie within `radius` of segment
    /// `a`–`b` until `visit` returns `true`.
    pub(crate) fn any_face_near_segment(
        &self,
        a: &Vector3<f64>,
        b: &Vector3<f64>,
        radius: f64,
        visit: &mut dyn FnMut(usize) -> bool,
    ) -> bool {
        self.bvh.any_near_segment(a, b, radius, visit)
    }

    /// Uniform scale about the origin (unit conversion for foreign meshes).
    pub fn scaled(&self, factor: f64) -> Result<Self, MeshError> {
        Self::new(
            self.vertices.iter().map(|v| v * factor).collect(),
            self.faces.clone(),
        )
    }
}

/// Grid-hashed vertex merger. Cells are one tolerance wide and the 27
/// neighbouring cells are probed, so any earlier vertex within tolerance is
/// found; the earliest such vertex wins.
struct Welder {
    tolerance: f64,
    cells: HashMap<[i64; 3], Vec<u32>>,
    vertices: Vec<Vector3<f64>>,
}

impl Welder {
    fn new(tolerance: f64) -> Self {
        Self {
            tolerance: tolerance.max(0.0),
            cells: HashMap::new(),
            vertices: Vec::new(),
        }
    }

    /// Zero tolerance merges bit-identical coordinates only.
    fn insert_exact(&mut self, p: Vector3<f64>) -> u32 {
        // the bit pattern of -0.0 differs from 0.0; normalize it first
        let key = [0, 1, 2].map(|k| (p[k] + 0.0).to_bits() as i64);
        if let Some(ids) = self.cells.get(&key) {
            return ids[0];
        }
        let id = self.vertices.len() as u32;
        self.vertices.push(p);
        self.cells.insert(key, vec![id]);
        id
    }

    fn key(&self, p: &Vector3<f64>) -> [i64; 3] {
        [0, 1, 2].map(|k| (p[k] / self.tolerance).floor() as i64)
    }

    fn insert(&mut self, p: Vector3<f64>) -> u32 {
        if self.tolerance == 0.0 {
            return self.insert_exact(p);
        }
        let key = self.key(&p);
        let mut found: Option<u32> = None;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let k = [
                        key[0].saturating_add(dx),
                        key[1].saturating_add(dy),
                        key[2].saturating_add(dz),
                    ];
                    if let Some(ids) = self.cells.get(&k) {
                        for &id in ids {
                            if (self.vertices[id as usize] - p).norm() <= self.tolerance
                                && found.is_none_or(|f| id < f)
                            {
                                found = Some(id);
                            }
                        }
                    }
                }
            }
        }
        if let Some(id) = found {
            return id;
        }
        let id = self.vertices.len() as u32;
        self.vertices.push(p);
        self.cells.entry(key).or_default().push(id);
        id
    }
}
