//! ASCII OFF reader and writer.

use std::fmt::Write as _;
use std::path::Path;

use super::mesh::Mesh;
use crate::{Error, Result, Vec3};

/// Parses an ASCII OFF document. Polygons with more than three corners are
/// fan-triangulated; `#` starts a comment.
pub fn parse_off(text: &str) -> Result<Mesh> {
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace);
    let mut first = tokens.next().ok_or_else(|| Error::Parse("empty OFF document".into()))?;
    if first == "OFF" {
        first = tokens
            .next()
            .ok_or_else(|| Error::Parse("missing OFF header counts".into()))?;
    } else if first.starts_with("OFF") {
        return Err(Error::Parse(format!("unsupported OFF variant '{first}'")));
    }
    let parse_usize = |s: &str, what: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::Parse(format!("invalid {what} '{s}'")))
    };
    let mut next = |what: &str| {
        tokens
            .next()
            .ok_or_else(|| Error::Parse(format!("unexpected end of file reading {what}")))
    };
    let nv = parse_usize(first, "vertex count")?;
    let nf = parse_usize(next("face count")?, "face count")?;
    let _edges = next("edge count")?;
    let mut vertices = Vec::with_capacity(nv);
    for i in 0..nv {
        let mut p = [0.0; 3];
        for c in p.iter_mut() {
            let s = next("vertex coordinate")?;
            *c = s
                .parse()
                .map_err(|_| Error::Parse(format!("vertex {i}: invalid coordinate '{s}'")))?;
        }
        vertices.push(Vec3::from(p));
    }
    let mut faces = Vec::with_capacity(nf);
    for i in 0..nf {
        let k = parse_usize(next("face size")?, "face size")?;
        if k < 3 {
            return Err(Error::Parse(format!("face {i} has {k} corners")));
        }
        let mut ids = Vec::with_capacity(k);
        for _ in 0..k {
            ids.push(parse_usize(next("face index")?, "face index")?);
        }
        for j in 1..k - 1 {
            faces.push([ids[0], ids[j], ids[j + 1]]);
        }
    }
    Mesh::new(vertices, faces)
}

pub fn read_off(path: &Path) -> Result<Mesh> {
    parse_off(&std::fs::read_to_string(path)?)
}

pub fn to_off(mesh: &Mesh) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "OFF\n{} {} 0", mesh.vertices().len(), mesh.faces().len());
    for v in mesh.vertices() {
        let _ = writeln!(out, "{:?} {:?} {:?}", v.x, v.y, v.z);
    }
    for f in mesh.faces() {
        let _ = writeln!(out, "3 {} {} {}", f[0], f[1], f[2]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_cube() {
        let cube = Mesh::cube(Vec3::new(0.5, 0.5, 0.5), 1.0, 1).unwrap();
        let back = parse_off(&to_off(&cube)).unwrap();
        assert_eq!(cube, back);
    }

    #[test]
    fn quads_and_comments() {
        let text = "OFF\n# unit cube\n8 6 12\n\
            0 0 0\n1 0 0\n1 1 0\n0 1 0\n0 0 1\n1 0 1\n1 1 1\n0 1 1\n\
            4 0 3 2 1\n4 4 5 6 7\n4 0 1 5 4\n4 2 3 7 6\n4 1 2 6 5\n4 0 4 7 3\n";
        let m = parse_off(text).unwrap();
        assert_eq!(m.faces().len(), 12);
        assert!((m.volume() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn truncated_input_is_a_parse_error() {
        assert!(matches!(parse_off("OFF\n8 6 12\n0 0"), Err(Error::Parse(_))));
    }
}
