//! OBJ and OFF reading/writing. Only geometry and triangle connectivity survive.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::TriMesh;
use crate::error::{Error, Result};
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshFormat {
    Obj,
    Off,
}

impl MeshFormat {
    /// Guess from a file extension.
    pub fn from_path(path: &std::path::Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "obj" => Some(MeshFormat::Obj),
            "off" => Some(MeshFormat::Off),
            _ => None,
        }
    }
}

impl FromStr for MeshFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "obj" => Ok(MeshFormat::Obj),
            "off" => Ok(MeshFormat::Off),
            other => Err(Error::InvalidParameter(format!("unknown mesh format {other:?}"))),
        }
    }
}

pub fn load_mesh(bytes: &[u8], format: MeshFormat) -> Result<TriMesh> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Parse {
        line: 0,
        msg: format!("not UTF-8: {e}"),
    })?;
    let (verts, tris) = match format {
        MeshFormat::Obj => parse_obj(text)?,
        MeshFormat::Off => parse_off(text)?,
    };
    TriMesh::new(verts, tris)
}

pub fn save_mesh(mesh: &TriMesh, format: MeshFormat) -> Vec<u8> {
    let mut out = String::new();
    match format {
        MeshFormat::Obj => {
            for v in mesh.vertices() {
                writeln!(out, "v {:.16e} {:.16e} {:.16e}", v.x, v.y, v.z).unwrap();
            }
            for t in mesh.triangles() {
                writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1).unwrap();
            }
        }
        MeshFormat::Off => {
            writeln!(out, "OFF\n{} {} 0", mesh.num_vertices(), mesh.num_faces()).unwrap();
            for v in mesh.vertices() {
                writeln!(out, "{:.16e} {:.16e} {:.16e}", v.x, v.y, v.z).unwrap();
            }
            for t in mesh.triangles() {
                writeln!(out, "3 {} {} {}", t[0], t[1], t[2]).unwrap();
            }
        }
    }
    out.into_bytes()
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_f64(tok: Option<&str>, line: usize) -> Result<f64> {
    let tok = tok.ok_or_else(|| parse_err(line, "missing coordinate"))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("bad number {tok:?}")))
}

/// Fan-triangulate a polygon given as vertex indices.
fn push_fan(poly: &[usize], tris: &mut Vec<[usize; 3]>, line: usize) -> Result<()> {
    if poly.len() < 3 {
        return Err(parse_err(line, "face with fewer than 3 vertices"));
    }
    for k in 1..poly.len() - 1 {
        tris.push([poly[0], poly[k], poly[k + 1]]);
    }
    Ok(())
}

fn parse_obj(text: &str) -> Result<(Vec<Vec3>, Vec<[usize; 3]>)> {
    let mut verts = Vec::new();
    let mut tris = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut toks = content.split_whitespace();
        match toks.next() {
            Some("v") => {
                let x = parse_f64(toks.next(), line)?;
                let y = parse_f64(toks.next(), line)?;
                let z = parse_f64(toks.next(), line)?;
                verts.push(Vec3::new(x, y, z));
            }
            Some("f") => {
                let mut poly = Vec::new();
                for tok in toks {
                    let idx_str = tok.split('/').next().unwrap_or("");
                    let idx: i64 = idx_str
                        .parse()
                        .map_err(|_| parse_err(line, format!("bad face index {tok:?}")))?;
                    let resolved = if idx > 0 {
                        idx - 1
                    } else if idx < 0 {
                        verts.len() as i64 + idx
                    } else {
                        return Err(parse_err(line, "face index 0 is invalid in OBJ"));
                    };
                    if resolved < 0 {
                        return Err(parse_err(line, format!("face index {idx} out of range")));
                    }
                    poly.push(resolved as usize);
                }
                push_fan(&poly, &mut tris, line)?;
            }
            _ => {}
        }
    }
    Ok((verts, tris))
}

fn parse_off(text: &str) -> Result<(Vec<Vec3>, Vec<[usize; 3]>)> {
    // Non-empty, comment-stripped lines with their 1-based line numbers.
    let mut lines = text.lines().enumerate().filter_map(|(i, l)| {
        let c = l.split('#').next().unwrap_or("").trim();
        (!c.is_empty()).then_some((i + 1, c))
    });
    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let rest_of_header = header
        .strip_prefix("OFF")
        .ok_or_else(|| parse_err(hline, "missing OFF header"))?
        .trim();
    let (cline, counts) = if rest_of_header.is_empty() {
        lines.next().ok_or_else(|| parse_err(hline, "missing counts line"))?
    } else {
        (hline, rest_of_header)
    };
    let mut ct = counts.split_whitespace().map(|t| t.parse::<usize>());
    let nv = ct
        .next()
        .and_then(|r| r.ok())
        .ok_or_else(|| parse_err(cline, "bad vertex count"))?;
    let nf = ct
        .next()
        .and_then(|r| r.ok())
        .ok_or_else(|| parse_err(cline, "bad face count"))?;

    let mut verts = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, l) = lines
            .next()
            .ok_or_else(|| parse_err(cline, "unexpected end of file in vertex list"))?;
        let mut toks = l.split_whitespace();
        let x = parse_f64(toks.next(), line)?;
        let y = parse_f64(toks.next(), line)?;
        let z = parse_f64(toks.next(), line)?;
        verts.push(Vec3::new(x, y, z));
    }
    let mut tris = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (line, l) = lines
            .next()
            .ok_or_else(|| parse_err(cline, "unexpected end of file in face list"))?;
        let nums: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| parse_err(line, "bad face record"))?;
        let (&arity, idx) = nums
            .split_first()
            .ok_or_else(|| parse_err(line, "empty face record"))?;
        if idx.len() < arity {
            return Err(parse_err(line, format!("face declares {arity} vertices")));
        }
        if let Some(&bad) = idx[..arity].iter().find(|&&i| i >= nv) {
            return Err(parse_err(line, format!("face index {bad} out of range")));
        }
        push_fan(&idx[..arity], &mut tris, line)?;
    }
    Ok((verts, tris))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::topology;

    const TRI_OFF: &str = "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n";

    pub(crate) const OCTAHEDRON_OBJ: &str = "\
v 1 0 0\nv -1 0 0\nv 0 1 0\nv 0 -1 0\nv 0 0 1\nv 0 0 -1
f 1 3 5\nf 3 2 5\nf 2 4 5\nf 4 1 5\nf 3 1 6\nf 2 3 6\nf 4 2 6\nf 1 4 6\n";

    #[test]
    fn off_single_triangle() {
        let m = load_mesh(TRI_OFF.as_bytes(), MeshFormat::Off).unwrap();
        assert_eq!((m.num_vertices(), m.num_faces(), m.boundary_edge_count()), (3, 1, 3));
        let out = String::from_utf8(save_mesh(&m, MeshFormat::Off)).unwrap();
        assert!(out.starts_with("OFF\n3 1"));
    }

    #[test]
    fn obj_octahedron_is_a_sphere() {
        let m = load_mesh(OCTAHEDRON_OBJ.as_bytes(), MeshFormat::Obj).unwrap();
        let t = topology(&m).unwrap();
        assert_eq!((t.euler_characteristic, t.boundary_loop_count, t.genus), (2, 0, 0));
        let out = String::from_utf8(save_mesh(&m, MeshFormat::Obj)).unwrap();
        assert_eq!(out.lines().filter(|l| l.starts_with("v ")).count(), 6);
        assert_eq!(out.lines().filter(|l| l.starts_with("f ")).count(), 8);
    }

    #[test]
    fn edge_with_three_faces_is_topology_error() {
        let obj = "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 -1 0\nv 0 0 1\nf 1 2 3\nf 2 1 4\nf 1 2 5\n";
        let err = load_mesh(obj.as_bytes(), MeshFormat::Obj).unwrap_err();
        assert!(matches!(err, Error::Topology(ref s) if s.contains("non-manifold")), "{err}");
    }

    #[test]
    fn quads_are_fanned_and_extras_ignored() {
        let obj = "# square\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1/1/1 2/2/1 3/3/1 4/4/1\n";
        let m = load_mesh(obj.as_bytes(), MeshFormat::Obj).unwrap();
        assert_eq!(m.num_faces(), 2);
    }

    #[test]
    fn malformed_inputs_are_parse_errors() {
        assert!(matches!(
            load_mesh(b"v 0 0\nf 1 2 3\n", MeshFormat::Obj),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            load_mesh(b"3 1 0\n", MeshFormat::Off),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            load_mesh(b"OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n", MeshFormat::Off),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn round_trip_is_exact() {
        let m = load_mesh(OCTAHEDRON_OBJ.as_bytes(), MeshFormat::Obj).unwrap();
        let m = m.map_positions(|p| p * std::f64::consts::PI + Vec3::new(1e-7, 0.1, -3.3)).unwrap();
        for fmt in [MeshFormat::Obj, MeshFormat::Off] {
            let back = load_mesh(&save_mesh(&m, fmt), fmt).unwrap();
            assert_eq!(back.triangles(), m.triangles());
            assert_eq!(back.vertices(), m.vertices());
        }
    }
}
