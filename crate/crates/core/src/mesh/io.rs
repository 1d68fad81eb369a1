//! Plain-text mesh format.
//!
//! ```text
//! # comment
//! vertices 4
//! 0 0
//! 1 0
//! 1 1
//! 0 1
//! triangles 2
//! 0 1 2
//! 0 2 3
//! ```

use super::{Point, Triangulation};
use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    /// Next non-blank, non-comment line with its 1-based number.
    fn next_content(&mut self) -> Option<(usize, &'a str)> {
        for (i, raw) in self.inner.by_ref() {
            self.last = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            return Some((i + 1, line));
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.next_content()
            .ok_or_else(|| parse_err(self.last, format!("unexpected end of file, expected {what}")))
    }

    fn header(&mut self, keyword: &str) -> Result<usize> {
        let (no, line) = self.expect(keyword)?;
        let mut it = line.split_whitespace();
        if it.next() != Some(keyword) {
            return Err(parse_err(no, format!("expected `{keyword} <count>`")));
        }
        let count = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(no, format!("bad {keyword} count")))?;
        if it.next().is_some() {
            return Err(parse_err(no, "trailing tokens"));
        }
        Ok(count)
    }
}

fn fields<T: std::str::FromStr, const K: usize>(no: usize, line: &str) -> Result<[T; K]> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != K {
        return Err(parse_err(no, format!("expected {K} fields, found {}", parts.len())));
    }
    let mut out = Vec::with_capacity(K);
    for p in parts {
        out.push(p.parse::<T>().map_err(|_| parse_err(no, format!("cannot parse `{p}`")))?);
    }
    out.try_into().map_err(|_| parse_err(no, "field count"))
}

/// Parses mesh-file contents into a validated triangulation.
pub fn load_mesh(text: &str) -> Result<Triangulation> {
    let mut lines = Lines { inner: text.lines().enumerate(), last: 0 };
    let nv = lines.header("vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (no, line) = lines.expect("a vertex")?;
        let [x, y] = fields::<f64, 2>(no, line)?;
        vertices.push(Point::new(x, y));
    }
    let nt = lines.header("triangles")?;
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (no, line) = lines.expect("a triangle")?;
        let tri = fields::<usize, 3>(no, line)?;
        if let Some(bad) = tri.iter().find(|&&i| i >= nv) {
            return Err(parse_err(no, format!("vertex index {bad} out of range (have {nv})")));
        }
        triangles.push(tri);
    }
    if let Some((no, _)) = lines.next_content() {
        return Err(parse_err(no, "unexpected content after triangles"));
    }
    Triangulation::new(vertices, triangles)
}

/// Reads and parses a mesh file.
pub fn read_mesh(path: impl AsRef<Path>) -> Result<Triangulation> {
    load_mesh(&std::fs::read_to_string(path)?)
}

/// Serializes a triangulation. Coordinates use the shortest round-trip
/// representation, so `load_mesh(&write_mesh(m))` reproduces `m` exactly.
pub fn write_mesh(mesh: &Triangulation) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "vertices {}", mesh.num_vertices());
    for v in &mesh.vertices {
        let _ = writeln!(s, "{:?} {:?}", v.x, v.y);
    }
    let _ = writeln!(s, "triangles {}", mesh.num_triangles());
    for t in &mesh.triangles {
        let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
    }
    s
}
