//! Plain-text mesh exchange format.
//!
//! Header line `V F Bedges h`, then `V` vertex lines `x y`, `F` triangle
//! lines `i j k`, `Bedges` boundary edge lines `i j nx ny`. Indices are
//! 0-based. Floats are written in Rust's shortest round-trip form.

use super::Mesh;
use crate::vec2::Vec2;
use crate::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

impl Mesh {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{} {} {} {}",
            self.vertices.len(),
            self.triangles.len(),
            self.boundary_edges.len(),
            self.h
        );
        for v in &self.vertices {
            let _ = writeln!(s, "{} {}", v.x, v.y);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
        }
        for e in &self.boundary_edges {
            let _ = writeln!(s, "{} {} {} {}", e.a, e.b, e.normal.x, e.normal.y);
        }
        s
    }

    pub fn write_text(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    /// Parses the text format and rebuilds the full topology from vertices
    /// and triangles. The boundary-edge lines are validated against the
    /// header count; normals are recomputed.
    pub fn from_text(text: &str) -> Result<Mesh> {
        let mut lines = text.lines().enumerate();
        let (line_no, header) = lines.next().ok_or(Error::MeshFormat { line: 1, msg: "empty file".into() })?;
        let head: Vec<&str> = header.split_whitespace().collect();
        if head.len() != 4 {
            return Err(Error::MeshFormat { line: line_no + 1, msg: "header must be `V F Bedges h`".into() });
        }
        let nv: usize = parse(head[0], line_no + 1)?;
        let nf: usize = parse(head[1], line_no + 1)?;
        let nb: usize = parse(head[2], line_no + 1)?;
        let _h: f64 = parse(head[3], line_no + 1)?;

        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (ln, raw) = lines.next().ok_or(Error::MeshFormat { line: 0, msg: "unexpected end of file".into() })?;
            let parts: Vec<&str> = raw.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(Error::MeshFormat { line: ln + 1, msg: "vertex line must be `x y`".into() });
            }
            vertices.push(Vec2::new(parse(parts[0], ln + 1)?, parse(parts[1], ln + 1)?));
        }
        let mut triangles = Vec::with_capacity(nf);
        for _ in 0..nf {
            let (ln, raw) = lines.next().ok_or(Error::MeshFormat { line: 0, msg: "unexpected end of file".into() })?;
            let parts: Vec<&str> = raw.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(Error::MeshFormat { line: ln + 1, msg: "triangle line must be `i j k`".into() });
            }
            triangles.push([parse(parts[0], ln + 1)?, parse(parts[1], ln + 1)?, parse(parts[2], ln + 1)?]);
        }
        let mut boundary_lines = 0usize;
        for _ in 0..nb {
            let (ln, raw) = lines.next().ok_or(Error::MeshFormat { line: 0, msg: "unexpected end of file".into() })?;
            if raw.split_whitespace().count() != 4 {
                return Err(Error::MeshFormat { line: ln + 1, msg: "boundary line must be `i j nx ny`".into() });
            }
            boundary_lines += 1;
        }
        let mesh = Mesh::from_cells(vertices, triangles)?;
        if mesh.boundary_edges.len() != boundary_lines {
            return Err(Error::MeshFormat {
                line: 1,
                msg: format!(
                    "header declares {} boundary edges but the triangulation has {}",
                    boundary_lines,
                    mesh.boundary_edges.len()
                ),
            });
        }
        Ok(mesh)
    }

    pub fn read_text(path: &Path) -> Result<Mesh> {
        let text = std::fs::read_to_string(path)?;
        Mesh::from_text(&text)
    }
}

fn parse<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse().map_err(|_| Error::MeshFormat { line, msg: format!("cannot parse `{s}`") })
}

#[cfg(test)]
mod tests {
    use crate::geometry::{build_mesh, DomainSpec, Mesh};

    #[test]
    fn text_round_trip_is_stable() {
        let mesh = build_mesh(&DomainSpec::unit_disk(), 0.3).unwrap();
        let text = mesh.to_text();
        let back = Mesh::from_text(&text).unwrap();
        assert_eq!(text, back.to_text());
    }

    #[test]
    fn rejects_malformed_header() {
        assert!(Mesh::from_text("3 1\n").is_err());
    }
}
