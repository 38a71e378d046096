//! STL input, STL/PLY output.
//!
//! All files are millimeters. STL is accepted in both encodings; binary is
//! recognised by its size (84-byte header plus 50 bytes per facet).

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::Vector3;

use super::mesh::{TriMesh, WELD_TOLERANCE};
use crate::error::MeshError;

/// Reachability label carried in the per-face color of exported PLY files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaceLabel {
    Unreachable,
    Reachable,
}

impl FaceLabel {
    pub fn rgb(self) -> [u8; 3] {
        match self {
            FaceLabel::Unreachable => [190, 190, 190],
            FaceLabel::Reachable => [30, 200, 90],
        }
    }

    pub fn from_rgb(rgb: [u8; 3]) -> Option<Self> {
        [FaceLabel::Unreachable, FaceLabel::Reachable]
            .into_iter()
            .find(|l| l.rgb() == rgb)
    }
}

/// Reads an STL file and welds coincident vertices.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<TriMesh, MeshError> {
    let bytes = fs::read(path)?;
    mesh_from_stl_bytes(&bytes)
}

pub fn mesh_from_stl_bytes(bytes: &[u8]) -> Result<TriMesh, MeshError> {
    let tris = parse_stl(bytes)?;
    if tris.is_empty() {
        return Err(MeshError::Empty);
    }
    TriMesh::from_triangles(&tris, WELD_TOLERANCE)
}

/// Triangle soup from STL bytes.
pub fn parse_stl(bytes: &[u8]) -> Result<Vec<[Vector3<f64>; 3]>, MeshError> {
    if bytes.len() >= 84 {
        let count = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
        if 84 + 50 * count == bytes.len() {
            return Ok(parse_binary(bytes, count));
        }
    }
    let trimmed = bytes.iter().position(|b| !b.is_ascii_whitespace()).unwrap_or(0);
    if bytes[trimmed..].starts_with(b"solid") {
        return parse_ascii(bytes);
    }
    if bytes.len() < 84 {
        return Err(MeshError::parse(
            bytes.len(),
            "file too short for a binary STL header",
        ));
    }
    let count = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
    Err(MeshError::parse(
        84,
        format!(
            "binary STL declares {count} facets ({} bytes) but file has {} bytes",
            84 + 50 * count,
            bytes.len()
        ),
    ))
}

fn parse_binary(bytes: &[u8], count: usize) -> Vec<[Vector3<f64>; 3]> {
    let f32_at = |o: usize| f32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as f64;
    (0..count)
        .map(|i| {
            let base = 84 + 50 * i + 12; // skip the stored normal
            [0, 1, 2].map(|k| {
                let o = base + 12 * k;
                Vector3::new(f32_at(o), f32_at(o + 4), f32_at(o + 8))
            })
        })
        .collect()
}

struct Tokens<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Tokens<'a> {
    /// Next whitespace-delimited token and its byte offset.
    fn next(&mut self) -> Option<(usize, &'a str)> {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= self.bytes.len() {
            return None;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        // non-UTF-8 bytes surface as an unmatched keyword below
        Some((
            start,
            std::str::from_utf8(&self.bytes[start..self.pos]).unwrap_or("\u{fffd}"),
        ))
    }

    fn skip_line(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
            self.pos += 1;
        }
    }

    fn expect(&mut self, word: &str) -> Result<(), MeshError> {
        match self.next() {
            Some((_, t)) if t.eq_ignore_ascii_case(word) => Ok(()),
            Some((o, t)) => Err(MeshError::parse(o, format!("expected `{word}`, found `{t}`"))),
            None => Err(MeshError::parse(
                self.bytes.len(),
                format!("expected `{word}`, found end of file"),
            )),
        }
    }

    fn number(&mut self) -> Result<f64, MeshError> {
        match self.next() {
            Some((o, t)) => match t.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(MeshError::parse(o, format!("expected a number, found `{t}`"))),
            },
            None => Err(MeshError::parse(
                self.bytes.len(),
                "expected a number, found end of file",
            )),
        }
    }
}

fn parse_ascii(bytes: &[u8]) -> Result<Vec<[Vector3<f64>; 3]>, MeshError> {
    let mut tok = Tokens { bytes, pos: 0 };
    let mut tris = Vec::new();
    tok.expect("solid")?;
    tok.skip_line();
    loop {
        match tok.next() {
            Some((_, t)) if t.eq_ignore_ascii_case("facet") => {
                tok.expect("normal")?;
                for _ in 0..3 {
                    tok.number()?;
                }
                tok.expect("outer")?;
                tok.expect("loop")?;
                let mut tri = [Vector3::zeros(); 3];
                for v in &mut tri {
                    tok.expect("vertex")?;
                    *v = Vector3::new(tok.number()?, tok.number()?, tok.number()?);
                }
                tok.expect("endloop")?;
                tok.expect("endfacet")?;
                tris.push(tri);
            }
            Some((_, t)) if t.eq_ignore_ascii_case("endsolid") => {
                tok.skip_line();
                // several solids may follow one another
                match tok.next() {
                    None => return Ok(tris),
                    Some((_, t)) if t.eq_ignore_ascii_case("solid") => tok.skip_line(),
                    Some((o, t)) => {
                        return Err(MeshError::parse(
                            o,
                            format!("unexpected `{t}` after endsolid"),
                        ))
                    }
                }
            }
            Some((o, t)) => {
                return Err(MeshError::parse(
                    o,
                    format!("expected `facet` or `endsolid`, found `{t}`"),
                ))
            }
            None => {
                return Err(MeshError::parse(
                    bytes.len(),
                    "missing `endsolid` at end of file",
                ))
            }
        }
    }
}

pub fn write_stl_binary(mesh: &TriMesh, w: &mut impl Write) -> io::Result<()> {
    let mut header = [0u8; 80];
    let tag = b"steerfiber binary STL (mm)";
    header[..tag.len()].copy_from_slice(tag);
    w.write_all(&header)?;
    w.write_all(&(mesh.face_count() as u32).to_le_bytes())?;
    for f in 0..mesh.face_count() {
        let n = mesh.face_normals()[f];
        for c in n.iter() {
            w.write_all(&(*c as f32).to_le_bytes())?;
        }
        for v in mesh.triangle(f) {
            for c in v.iter() {
                w.write_all(&(*c as f32).to_le_bytes())?;
            }
        }
        w.write_all(&[0, 0])?;
    }
    Ok(())
}

pub fn write_stl_ascii(mesh: &TriMesh, w: &mut impl Write) -> io::Result<()> {
    writeln!(w, "solid steerfiber")?;
    for f in 0..mesh.face_count() {
        let n = mesh.face_normals()[f];
        writeln!(w, "  facet normal {:e} {:e} {:e}", n.x, n.y, n.z)?;
        writeln!(w, "    outer loop")?;
        for v in mesh.triangle(f) {
            writeln!(w, "      vertex {:e} {:e} {:e}", v.x, v.y, v.z)?;
        }
        writeln!(w, "    endloop")?;
        writeln!(w, "  endfacet")?;
    }
    writeln!(w, "endsolid steerfiber")
}

pub fn write_colored_ply(
    mesh: &TriMesh,
    labels: &[FaceLabel],
    w: &mut impl Write,
) -> Result<(), MeshError> {
    if labels.len() != mesh.face_count() {
        return Err(MeshError::LabelCount {
            labels: labels.len(),
            faces: mesh.face_count(),
        });
    }
    writeln!(w, "ply")?;
    writeln!(w, "format ascii 1.0")?;
    writeln!(w, "comment steerfiber reachability map, units mm")?;
    writeln!(w, "element vertex {}", mesh.vertices().len())?;
    for axis in ["x", "y", "z"] {
        writeln!(w, "property double {axis}")?;
    }
    writeln!(w, "element face {}", mesh.face_count())?;
    writeln!(w, "property list uchar int vertex_indices")?;
    for ch in ["red", "green", "blue"] {
        writeln!(w, "property uchar {ch}")?;
    }
    writeln!(w, "end_header")?;
    for v in mesh.vertices() {
        writeln!(w, "{} {} {}", v.x, v.y, v.z)?;
    }
    for (f, label) in mesh.faces().iter().zip(labels) {
        let [r, g, b] = label.rgb();
        writeln!(w, "3 {} {} {} {r} {g} {b}", f[0], f[1], f[2])?;
    }
    Ok(())
}

/// Writes the labeled mesh as ASCII PLY with per-face RGB.
pub fn save_colored_mesh(
    mesh: &TriMesh,
    labels: &[FaceLabel],
    path: impl AsRef<Path>,
) -> Result<(), MeshError> {
    let mut buf = Vec::new();
    write_colored_ply(mesh, labels, &mut buf)?;
    atomic_write(path.as_ref(), &buf)?;
    Ok(())
}

/// Reads back a PLY written by [`save_colored_mesh`].
pub fn load_colored_mesh(path: impl AsRef<Path>) -> Result<(TriMesh, Vec<FaceLabel>), MeshError> {
    let bytes = fs::read(path)?;
    parse_colored_ply(&bytes)
}

pub fn parse_colored_ply(bytes: &[u8]) -> Result<(TriMesh, Vec<FaceLabel>), MeshError> {
    let mut tok = Tokens { bytes, pos: 0 };
    tok.expect("ply")?;
    tok.expect("format")?;
    tok.expect("ascii")?;
    tok.expect("1.0")?;

    let mut n_vertices = None;
    let mut n_faces = None;
    let mut vertex_props: Vec<String> = Vec::new();
    let mut face_props: Vec<String> = Vec::new();
    let mut current = "";
    loop {
        let (o, t) = tok
            .next()
            .ok_or_else(|| MeshError::parse(bytes.len(), "unterminated PLY header"))?;
        match t {
            "comment" | "obj_info" => tok.skip_line(),
            "element" => {
                let (o, name) = tok
                    .next()
                    .ok_or_else(|| MeshError::parse(bytes.len(), "truncated element line"))?;
                let count = tok.number()?;
                if count < 0.0 || count.fract() != 0.0 {
                    return Err(MeshError::parse(o, "element count must be a whole number"));
                }
                match name {
                    "vertex" => {
                        n_vertices = Some(count as usize);
                        current = "vertex";
                    }
                    "face" => {
                        n_faces = Some(count as usize);
                        current = "face";
                    }
                    other => {
                        return Err(MeshError::parse(o, format!("unsupported element `{other}`")))
                    }
                }
            }
            "property" => {
                let start = tok.pos;
                tok.skip_line();
                let line = String::from_utf8_lossy(&bytes[start..tok.pos]).trim().to_string();
                let name = line.split_whitespace().last().unwrap_or("").to_string();
                match current {
                    "vertex" => vertex_props.push(name),
                    "face" => face_props.push(name),
                    _ => return Err(MeshError::parse(o, "property before any element")),
                }
            }
            "end_header" => break,
            other => return Err(MeshError::parse(o, format!("unexpected `{other}` in header"))),
        }
    }
    let (n_vertices, n_faces) = match (n_vertices, n_faces) {
        (Some(v), Some(f)) => (v, f),
        _ => return Err(MeshError::parse(tok.pos, "PLY needs vertex and face elements")),
    };
    let pos_of = |props: &[String], name: &str| props.iter().position(|p| p == name);
    let xyz = [
        pos_of(&vertex_props, "x"),
        pos_of(&vertex_props, "y"),
        pos_of(&vertex_props, "z"),
    ];
    let rgb = [
        pos_of(&face_props, "red"),
        pos_of(&face_props, "green"),
        pos_of(&face_props, "blue"),
    ];
    let list_pos = pos_of(&face_props, "vertex_indices").or(pos_of(&face_props, "vertex_index"));
    let (Some(xi), Some(yi), Some(zi)) = (xyz[0], xyz[1], xyz[2]) else {
        return Err(MeshError::parse(tok.pos, "vertex element lacks x/y/z"));
    };
    let (Some(ri), Some(gi), Some(bi), Some(li)) = (rgb[0], rgb[1], rgb[2], list_pos) else {
        return Err(MeshError::parse(
            tok.pos,
            "face element lacks vertex_indices or red/green/blue",
        ));
    };

    let mut vertices = Vec::with_capacity(n_vertices);
    for _ in 0..n_vertices {
        let vals: Vec<f64> = (0..vertex_props.len())
            .map(|_| tok.number())
            .collect::<Result<_, _>>()?;
        vertices.push(Vector3::new(vals[xi], vals[yi], vals[zi]));
    }
    let mut faces = Vec::with_capacity(n_faces);
    let mut labels = Vec::with_capacity(n_faces);
    for _ in 0..n_faces {
        let face_start = tok.pos;
        let mut idx = [0u32; 3];
        let mut color = [0u8; 3];
        for p in 0..face_props.len() {
            if p == li {
                let n = tok.number()?;
                if n != 3.0 {
                    return Err(MeshError::parse(face_start, "only triangular faces are supported"));
                }
                for slot in &mut idx {
                    let v = tok.number()?;
                    if v < 0.0 || v.fract() != 0.0 {
                        return Err(MeshError::parse(face_start, "bad vertex index"));
                    }
                    *slot = v as u32;
                }
            } else {
                let v = tok.number()?;
                let channel = [ri, gi, bi].iter().position(|&c| c == p);
                if let Some(c) = channel {
                    if !(0.0..=255.0).contains(&v) || v.fract() != 0.0 {
                        return Err(MeshError::parse(face_start, "color channel out of range"));
                    }
                    color[c] = v as u8;
                }
            }
        }
        let label = FaceLabel::from_rgb(color).ok_or_else(|| {
            MeshError::parse(face_start, format!("color {color:?} is not a reachability label"))
        })?;
        faces.push(idx);
        labels.push(label);
    }
    Ok((TriMesh::new(vertices, faces)?, labels))
}

/// Writes `data` to a sibling temporary file and renames it over `path`, so
/// readers never observe a partially written artifact.
pub fn atomic_write(path: &Path, data: &[u8]) -> io::Result<()> {
    let tmp = temp_sibling(path);
    let result = (|| {
        let file = fs::File::create(&tmp)?;
        let mut w = BufWriter::new(file);
        w.write_all(data)?;
        let file = w.into_inner().map_err(|e| e.into_error())?;
        file.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

fn temp_sibling(path: &Path) -> PathBuf {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "artifact".into());
    path.with_file_name(format!(".{name}.{}.tmp", std::process::id()))
}
