use std::fmt::Write as _;
use std::path::Path;

use super::{TriangleMesh, Vec3};
use crate::error::{Error, Result};

/// Supported mesh file formats. PLY is ASCII only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Off,
    Ply,
}

impl MeshFormat {
    /// Guess the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "obj" => Some(Self::Obj),
            "off" => Some(Self::Off),
            "ply" => Some(Self::Ply),
            _ => None,
        }
    }
}

pub fn load_mesh(path: impl AsRef<Path>, format: MeshFormat) -> Result<TriangleMesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_mesh(&text, format)
}

pub fn save_mesh(mesh: &TriangleMesh, path: impl AsRef<Path>, format: MeshFormat) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_mesh(mesh, format)).map_err(|e| Error::io(path, e))
}

pub fn parse_mesh(text: &str, format: MeshFormat) -> Result<TriangleMesh> {
    let (vertices, polygons) = match format {
        MeshFormat::Obj => parse_obj(text)?,
        MeshFormat::Off => parse_off(text)?,
        MeshFormat::Ply => parse_ply(text)?,
    };
    let mut faces = Vec::with_capacity(polygons.len());
    for poly in polygons {
        for k in 1..poly.len() - 1 {
            faces.push([poly[0], poly[k], poly[k + 1]]);
        }
    }
    TriangleMesh::new(vertices, faces)
}

/// Serializes with shortest round-trip float formatting, so reading back is exact.
pub fn write_mesh(mesh: &TriangleMesh, format: MeshFormat) -> String {
    let mut s = String::new();
    match format {
        MeshFormat::Obj => {
            for v in mesh.vertices() {
                writeln!(s, "v {} {} {}", v.x, v.y, v.z).unwrap();
            }
            for f in mesh.faces() {
                writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1).unwrap();
            }
        }
        MeshFormat::Off => {
            writeln!(s, "OFF\n{} {} 0", mesh.n_v(), mesh.n_f()).unwrap();
            for v in mesh.vertices() {
                writeln!(s, "{} {} {}", v.x, v.y, v.z).unwrap();
            }
            for f in mesh.faces() {
                writeln!(s, "3 {} {} {}", f[0], f[1], f[2]).unwrap();
            }
        }
        MeshFormat::Ply => {
            writeln!(
                s,
                "ply\nformat ascii 1.0\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\nelement face {}\nproperty list uchar int vertex_indices\nend_header",
                mesh.n_v(),
                mesh.n_f()
            )
            .unwrap();
            for v in mesh.vertices() {
                writeln!(s, "{} {} {}", v.x, v.y, v.z).unwrap();
            }
            for f in mesh.faces() {
                writeln!(s, "3 {} {} {}", f[0], f[1], f[2]).unwrap();
            }
        }
    }
    s
}

type Parsed = (Vec<Vec3>, Vec<Vec<usize>>);

fn number<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| Error::parse(line, format!("invalid {what} '{tok}'")))
}

fn check_polygon(poly: &[usize], n_v: usize, line: usize) -> Result<()> {
    if poly.len() < 3 {
        return Err(Error::parse(line, "face with fewer than 3 vertices"));
    }
    if let Some(&i) = poly.iter().find(|&&i| i >= n_v) {
        return Err(Error::parse(line, format!("vertex index {i} out of range")));
    }
    Ok(())
}

fn parse_obj(text: &str) -> Result<Parsed> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut face_lines = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let ln = ln + 1;
        let line = raw.split('#').next().unwrap().trim();
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("v") => {
                let x = number(toks.next(), ln, "coordinate")?;
                let y = number(toks.next(), ln, "coordinate")?;
                let z = number(toks.next(), ln, "coordinate")?;
                vertices.push(Vec3::new(x, y, z));
            }
            Some("f") => {
                let mut poly = Vec::new();
                for tok in toks {
                    let idx = tok.split('/').next().unwrap();
                    let i: i64 = number(Some(idx), ln, "face index")?;
                    let resolved = match i {
                        0 => return Err(Error::parse(ln, "OBJ face index 0 (indices are 1-based)")),
                        i if i > 0 => i - 1,
                        i => vertices.len() as i64 + i,
                    };
                    if resolved < 0 {
                        return Err(Error::parse(ln, format!("relative index {i} out of range")));
                    }
                    poly.push(resolved as usize);
                }
                faces.push(poly);
                face_lines.push(ln);
            }
            _ => {}
        }
    }
    for (poly, &ln) in faces.iter().zip(&face_lines) {
        check_polygon(poly, vertices.len(), ln)?;
    }
    Ok((vertices, faces))
}

/// Non-empty, non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap().trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_off(text: &str) -> Result<Parsed> {
    let mut lines = content_lines(text);
    let (ln, first) = lines.next().ok_or_else(|| Error::parse(1, "empty OFF file"))?;
    let counts_line = if first == "OFF" {
        lines.next().ok_or_else(|| Error::parse(ln, "missing OFF counts"))?
    } else if let Some(rest) = first.strip_prefix("OFF") {
        (ln, rest.trim())
    } else {
        return Err(Error::parse(ln, "missing OFF header"));
    };
    let mut toks = counts_line.1.split_whitespace();
    let n_v: usize = number(toks.next(), counts_line.0, "vertex count")?;
    let n_f: usize = number(toks.next(), counts_line.0, "face count")?;
    read_body(&mut lines, n_v, n_f, counts_line.0)
}

fn read_body<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    n_v: usize,
    n_f: usize,
    header_line: usize,
) -> Result<Parsed> {
    let mut vertices = Vec::with_capacity(n_v);
    for _ in 0..n_v {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| Error::parse(header_line, "fewer vertices than declared"))?;
        let mut t = l.split_whitespace();
        vertices.push(Vec3::new(
            number(t.next(), ln, "coordinate")?,
            number(t.next(), ln, "coordinate")?,
            number(t.next(), ln, "coordinate")?,
        ));
    }
    let mut faces = Vec::with_capacity(n_f);
    for _ in 0..n_f {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| Error::parse(header_line, "fewer faces than declared"))?;
        let mut t = l.split_whitespace();
        let k: usize = number(t.next(), ln, "polygon size")?;
        let poly = (0..k)
            .map(|_| number(t.next(), ln, "face index"))
            .collect::<Result<Vec<usize>>>()?;
        check_polygon(&poly, n_v, ln)?;
        faces.push(poly);
    }
    Ok((vertices, faces))
}

fn parse_ply(text: &str) -> Result<Parsed> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, "ply")) => {}
        _ => return Err(Error::parse(1, "missing 'ply' magic")),
    }
    let mut n_v = None;
    let mut n_f = None;
    let mut vertex_props = 0usize;
    let mut current = "";
    let mut header_end = 0;
    for (ln, l) in lines.by_ref() {
        let t: Vec<&str> = l.split_whitespace().collect();
        match t.as_slice() {
            ["format", fmt, ..] if *fmt != "ascii" => {
                return Err(Error::parse(ln, format!("unsupported PLY format '{fmt}' (ASCII only)")))
            }
            ["element", "vertex", n] => {
                n_v = Some(number::<usize>(Some(n), ln, "vertex count")?);
                current = "vertex";
            }
            ["element", "face", n] => {
                n_f = Some(number::<usize>(Some(n), ln, "face count")?);
                current = "face";
            }
            ["element", ..] => current = "other",
            ["property", ..] if current == "vertex" => vertex_props += 1,
            ["end_header"] => {
                header_end = ln;
                break;
            }
            _ => {}
        }
    }
    if header_end == 0 {
        return Err(Error::parse(1, "missing end_header"));
    }
    let n_v = n_v.ok_or_else(|| Error::parse(header_end, "no vertex element"))?;
    let n_f = n_f.unwrap_or(0);
    if vertex_props < 3 {
        return Err(Error::parse(header_end, "vertex element needs x, y, z"));
    }
    read_body(&mut lines, n_v, n_f, header_end)
}
