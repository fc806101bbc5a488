//! Triangular meshes of the model domains (disk, rectangle, convex polygon)
//! with explicit boundary topology: oriented boundary edges, outward unit
//! normals and per-vertex arc weights.

mod build;
mod io;

pub use build::{boundary_normals, build_mesh, refine};

use crate::vec2::{point_segment_distance, Vec2};
use crate::{Error, Result};
use std::collections::BTreeMap;

/// Catalog of computational domains. The boundary is a closed Lipschitz
/// curve; polygon corners must be convex, counterclockwise and
/// non-self-intersecting.
#[derive(Clone, Debug, PartialEq)]
pub enum DomainSpec {
    Disk { radius: f64 },
    Rectangle { x0: f64, y0: f64, x1: f64, y1: f64 },
    Polygon { corners: Vec<Vec2> },
}

impl DomainSpec {
    pub fn unit_disk() -> Self {
        DomainSpec::Disk { radius: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DomainSpec::Disk { radius } => {
                if !radius.is_finite() || *radius <= 0.0 {
                    return Err(Error::InvalidDomain(format!("disk radius {radius} must be positive")));
                }
            }
            DomainSpec::Rectangle { x0, y0, x1, y1 } => {
                if !(x1 > x0 && y1 > y0) {
                    return Err(Error::InvalidDomain(format!(
                        "rectangle [{x0}, {x1}] x [{y0}, {y1}] has nonpositive extent"
                    )));
                }
            }
            DomainSpec::Polygon { corners } => {
                let n = corners.len();
                if n < 3 {
                    return Err(Error::InvalidDomain("polygon needs at least 3 corners".into()));
                }
                let scale = self.diameter();
                for i in 0..n {
                    let a = corners[i];
                    let b = corners[(i + 1) % n];
                    let c = corners[(i + 2) % n];
                    let cross = (b - a).cross(c - b);
                    if cross.abs() <= 1e-12 * scale * scale {
                        return Err(Error::DegeneratePolygon(i, (i + 1) % n, (i + 2) % n));
                    }
                    if cross < 0.0 {
                        return Err(Error::PolygonNotConvexCcw((i + 1) % n));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn diameter(&self) -> f64 {
        match self {
            DomainSpec::Disk { radius } => 2.0 * radius,
            DomainSpec::Rectangle { x0, y0, x1, y1 } => ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt(),
            DomainSpec::Polygon { corners } => {
                let mut d = 0.0f64;
                for i in 0..corners.len() {
                    for j in (i + 1)..corners.len() {
                        d = d.max(corners[i].dist(corners[j]));
                    }
                }
                d
            }
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            DomainSpec::Disk { radius } => std::f64::consts::PI * radius * radius,
            DomainSpec::Rectangle { x0, y0, x1, y1 } => (x1 - x0) * (y1 - y0),
            DomainSpec::Polygon { corners } => {
                let n = corners.len();
                0.5 * (0..n).map(|i| corners[i].cross(corners[(i + 1) % n])).sum::<f64>()
            }
        }
    }

    pub fn perimeter(&self) -> f64 {
        match self {
            DomainSpec::Disk { radius } => 2.0 * std::f64::consts::PI * radius,
            DomainSpec::Rectangle { x0, y0, x1, y1 } => 2.0 * ((x1 - x0) + (y1 - y0)),
            DomainSpec::Polygon { corners } => {
                let n = corners.len();
                (0..n).map(|i| corners[i].dist(corners[(i + 1) % n])).sum()
            }
        }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        match self {
            DomainSpec::Disk { radius } => p.norm() <= *radius,
            DomainSpec::Rectangle { x0, y0, x1, y1 } => p.x >= *x0 && p.x <= *x1 && p.y >= *y0 && p.y <= *y1,
            DomainSpec::Polygon { corners } => {
                let n = corners.len();
                (0..n).all(|i| (corners[(i + 1) % n] - corners[i]).cross(p - corners[i]) >= 0.0)
            }
        }
    }

    /// Axis-aligned bounding box (lower-left, upper-right).
    pub fn bounding_box(&self) -> (Vec2, Vec2) {
        match self {
            DomainSpec::Disk { radius } => (Vec2::new(-radius, -radius), Vec2::new(*radius, *radius)),
            DomainSpec::Rectangle { x0, y0, x1, y1 } => (Vec2::new(*x0, *y0), Vec2::new(*x1, *y1)),
            DomainSpec::Polygon { corners } => {
                let mut lo = corners[0];
                let mut hi = corners[0];
                for c in corners {
                    lo.x = lo.x.min(c.x);
                    lo.y = lo.y.min(c.y);
                    hi.x = hi.x.max(c.x);
                    hi.y = hi.y.max(c.y);
                }
                (lo, hi)
            }
        }
    }
}

/// Oriented boundary edge: `a -> b` traverses the boundary counterclockwise
/// (domain on the left); `normal` is the outward unit normal, constant per
/// edge (P1 boundary elements).
#[derive(Clone, Copy, Debug)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub normal: Vec2,
}

impl BoundaryEdge {
    pub fn vertices(&self) -> [usize; 2] {
        [self.a, self.b]
    }
}

/// Undirected mesh edge with the opposite vertex of each adjacent triangle.
/// Boundary edges have `opposite[1] == None`.
#[derive(Clone, Copy, Debug)]
pub struct MeshEdge {
    pub v: [usize; 2],
    pub opposite: [Option<usize>; 2],
}

/// Conforming P1 triangulation. Immutable after construction.
#[derive(Clone, Debug)]
pub struct Mesh {
    pub vertices: Vec<Vec2>,
    /// Vertex index triples, counterclockwise.
    pub triangles: Vec<[usize; 3]>,
    /// Oriented boundary edges with outward normals.
    pub boundary_edges: Vec<BoundaryEdge>,
    /// Maximum edge length (measured).
    pub h: f64,
    edges: Vec<MeshEdge>,
    boundary_vertices: Vec<usize>,
    is_boundary: Vec<bool>,
    min_angle_deg: f64,
}

impl Mesh {
    /// Builds the full topology from raw cells, fixing triangle orientation
    /// and validating conformity. Vertex order is preserved.
    pub fn from_cells(vertices: Vec<Vec2>, mut triangles: Vec<[usize; 3]>) -> Result<Mesh> {
        let nv = vertices.len();
        if nv < 3 || triangles.is_empty() {
            return Err(Error::MeshInvalid("mesh needs at least one triangle".into()));
        }
        let mut scale = 0.0f64;
        for t in &triangles {
            for &i in t {
                if i >= nv {
                    return Err(Error::MeshInvalid(format!("triangle references vertex {i} >= {nv}")));
                }
            }
            let [a, b, c] = [vertices[t[0]], vertices[t[1]], vertices[t[2]]];
            scale = scale.max((b - a).norm()).max((c - a).norm());
        }
        for t in triangles.iter_mut() {
            let area2 = signed_area2(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
            if area2.abs() <= 1e-14 * scale * scale {
                return Err(Error::MeshInvalid(format!("degenerate triangle {t:?}")));
            }
            if area2 < 0.0 {
                t.swap(1, 2);
            }
        }

        // Edge map keyed by the sorted vertex pair.
        let mut edge_map: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (ti, t) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (u, v) = (t[k], t[(k + 1) % 3]);
                let key = (u.min(v), u.max(v));
                edge_map.entry(key).or_default().push(ti);
            }
        }

        let mut edges = Vec::with_capacity(edge_map.len());
        let mut boundary_pairs = Vec::new();
        for (&(u, v), tris) in &edge_map {
            match tris.len() {
                1 => {
                    let opp = opposite_vertex(&triangles[tris[0]], u, v);
                    edges.push(MeshEdge { v: [u, v], opposite: [Some(opp), None] });
                    boundary_pairs.push(((u, v), tris[0]));
                }
                2 => {
                    let o0 = opposite_vertex(&triangles[tris[0]], u, v);
                    let o1 = opposite_vertex(&triangles[tris[1]], u, v);
                    edges.push(MeshEdge { v: [u, v], opposite: [Some(o0), Some(o1)] });
                }
                n => {
                    return Err(Error::MeshInvalid(format!("edge ({u}, {v}) shared by {n} triangles")));
                }
            }
        }

        // Orient each boundary edge by its occurrence in the (CCW) owning
        // triangle, so the domain lies on the left and perp_cw points out.
        let mut boundary_edges = Vec::with_capacity(boundary_pairs.len());
        for ((u, v), ti) in boundary_pairs {
            let t = &triangles[ti];
            let (a, b) = if follows_ccw(t, u, v) { (u, v) } else { (v, u) };
            let normal = (vertices[b] - vertices[a]).perp_cw().normalized();
            boundary_edges.push(BoundaryEdge { a, b, normal });
        }

        let mut is_boundary = vec![false; nv];
        for e in &boundary_edges {
            is_boundary[e.a] = true;
            is_boundary[e.b] = true;
        }
        let boundary_vertices: Vec<usize> = (0..nv).filter(|&i| is_boundary[i]).collect();

        let mut h = 0.0f64;
        for e in &edges {
            h = h.max(vertices[e.v[0]].dist(vertices[e.v[1]]));
        }
        let mut min_angle = f64::INFINITY;
        for t in &triangles {
            min_angle = min_angle.min(triangle_min_angle_deg(vertices[t[0]], vertices[t[1]], vertices[t[2]]));
        }

        let mesh = Mesh {
            vertices,
            triangles,
            boundary_edges,
            h,
            edges,
            boundary_vertices,
            is_boundary,
            min_angle_deg: min_angle,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    /// Conformity checks: Euler relation for a disk-like triangulation,
    /// a single closed boundary cycle, positive areas (by construction).
    pub fn validate(&self) -> Result<()> {
        let v = self.vertices.len() as i64;
        let e = self.edges.len() as i64;
        let f = self.triangles.len() as i64;
        if v - e + f != 1 {
            return Err(Error::MeshInvalid(format!("Euler relation violated: V - E + F = {}", v - e + f)));
        }
        // Every boundary vertex has exactly two incident boundary edges and
        // the directed edges form one cycle.
        let mut next: BTreeMap<usize, usize> = BTreeMap::new();
        for edge in &self.boundary_edges {
            if next.insert(edge.a, edge.b).is_some() {
                return Err(Error::MeshInvalid(format!("boundary vertex {} has two outgoing edges", edge.a)));
            }
        }
        if next.len() != self.boundary_edges.len() {
            return Err(Error::MeshInvalid("boundary edges do not form a cycle".into()));
        }
        let start = self.boundary_edges[0].a;
        let mut cur = start;
        for _ in 0..self.boundary_edges.len() {
            cur = *next
                .get(&cur)
                .ok_or_else(|| Error::MeshInvalid(format!("boundary cycle broken at vertex {cur}")))?;
        }
        if cur != start {
            return Err(Error::MeshInvalid("boundary cycle does not close".into()));
        }
        Ok(())
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn edges(&self) -> &[MeshEdge] {
        &self.edges
    }

    pub fn boundary_vertices(&self) -> &[usize] {
        &self.boundary_vertices
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.is_boundary[v]
    }

    pub fn min_angle_deg(&self) -> f64 {
        self.min_angle_deg
    }

    pub fn triangle_area(&self, ti: usize) -> f64 {
        let [a, b, c] = self.triangles[ti];
        0.5 * signed_area2(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn total_boundary_length(&self) -> f64 {
        self.boundary_edges
            .iter()
            .map(|e| self.vertices[e.a].dist(self.vertices[e.b]))
            .sum()
    }

    /// Trapezoid weight of each boundary vertex: half the length of its two
    /// incident boundary edges. Zero for interior vertices.
    pub fn boundary_vertex_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.vertices.len()];
        for e in &self.boundary_edges {
            let len = self.vertices[e.a].dist(self.vertices[e.b]);
            w[e.a] += 0.5 * len;
            w[e.b] += 0.5 * len;
        }
        w
    }

    /// Euclidean distance from `p` to the polygonal boundary.
    pub fn distance_to_boundary(&self, p: Vec2) -> f64 {
        let mut d = f64::INFINITY;
        for e in &self.boundary_edges {
            d = d.min(point_segment_distance(p, self.vertices[e.a], self.vertices[e.b]));
        }
        d
    }
}

fn signed_area2(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).cross(c - a)
}

fn opposite_vertex(t: &[usize; 3], u: usize, v: usize) -> usize {
    t.iter().copied().find(|&w| w != u && w != v).expect("triangle has three distinct vertices")
}

/// True when the directed pair (u, v) appears in the cyclic order of `t`.
fn follows_ccw(t: &[usize; 3], u: usize, v: usize) -> bool {
    (0..3).any(|k| t[k] == u && t[(k + 1) % 3] == v)
}

fn triangle_min_angle_deg(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    let angle = |p: Vec2, q: Vec2, r: Vec2| {
        let u = q - p;
        let v = r - p;
        (u.dot(v) / (u.norm() * v.norm())).clamp(-1.0, 1.0).acos()
    };
    let t = angle(a, b, c).min(angle(b, c, a)).min(angle(c, a, b));
    t.to_degrees()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_corners() -> Vec<Vec2> {
        vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)]
    }

    #[test]
    fn polygon_validation_rejects_collinear_corners() {
        let spec = DomainSpec::Polygon {
            corners: vec![
                Vec2::new(0.0, 0.0),
                Vec2::new(0.5, 0.0),
                Vec2::new(1.0, 0.0),
                Vec2::new(0.5, 1.0),
            ],
        };
        assert!(matches!(spec.validate(), Err(Error::DegeneratePolygon(..))));
    }

    #[test]
    fn polygon_validation_rejects_clockwise_order() {
        let mut corners = square_corners();
        corners.reverse();
        let spec = DomainSpec::Polygon { corners };
        assert!(matches!(spec.validate(), Err(Error::PolygonNotConvexCcw(_))));
    }

    #[test]
    fn polygon_contains_centroid() {
        let spec = DomainSpec::Polygon { corners: square_corners() };
        spec.validate().unwrap();
        assert!(spec.contains(Vec2::new(0.5, 0.5)));
        assert!(!spec.contains(Vec2::new(1.5, 0.5)));
    }

    #[test]
    fn from_cells_fixes_orientation() {
        // One clockwise triangle gets re-oriented rather than rejected.
        let verts = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];
        let mesh = Mesh::from_cells(verts, vec![[0, 2, 1]]).unwrap();
        assert!(mesh.triangle_area(0) > 0.0);
        assert_eq!(mesh.boundary_edges.len(), 3);
    }
}
