//! Structured mesh generators for the domain catalog.
//!
//! Disks are meshed with concentric rings (ring k carries 6k vertices), so
//! boundary vertices land on the circle exactly; annuli between rings are
//! triangulated by an exact integer two-pointer merge on vertex angles.
//! Rectangles use a diagonal-split grid. Convex polygons start from a
//! centroid fan and are refined uniformly until the target edge length is
//! met.

use super::{BoundaryEdge, DomainSpec, Mesh};
use crate::vec2::Vec2;
use crate::{Error, Result};
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

/// Builds a conforming mesh with maximum edge length <= 1.5 h. Boundary
/// vertices lie on the domain boundary exactly (disks: on the circle up to
/// machine precision).
pub fn build_mesh(spec: &DomainSpec, h: f64) -> Result<Mesh> {
    spec.validate()?;
    if !h.is_finite() || h <= 0.0 || h >= spec.diameter() {
        return Err(Error::InvalidMeshSize(h));
    }
    match spec {
        DomainSpec::Disk { radius } => build_disk(*radius, h),
        DomainSpec::Rectangle { x0, y0, x1, y1 } => build_rectangle(*x0, *y0, *x1, *y1, h),
        DomainSpec::Polygon { corners } => build_polygon(corners, h),
    }
}

fn build_disk(radius: f64, h: f64) -> Result<Mesh> {
    let n = ((radius / h).ceil() as usize).max(2);
    let dr = radius / n as f64;

    let mut vertices = vec![Vec2::ZERO];
    let mut ring_start = vec![0usize; n + 1];
    for k in 1..=n {
        ring_start[k] = vertices.len();
        let count = 6 * k;
        let r = k as f64 * dr;
        for i in 0..count {
            let theta = 2.0 * PI * i as f64 / count as f64;
            vertices.push(Vec2::new(r * theta.cos(), r * theta.sin()));
        }
    }

    let mut triangles = Vec::new();
    // Center fan.
    for i in 0..6 {
        triangles.push([0, ring_start[1] + i, ring_start[1] + (i + 1) % 6]);
    }
    for k in 1..n {
        annulus_triangles(ring_start[k], 6 * k, ring_start[k + 1], 6 * (k + 1), &mut triangles);
    }
    Mesh::from_cells(vertices, triangles)
}

/// Triangulates the annulus between an inner ring (`n_in` vertices starting
/// at `in0`) and an outer ring, both uniformly spaced in angle starting at
/// angle zero. Pointer advance compares the next vertex angles exactly:
/// (j+1)/n_out < (i+1)/n_in  <=>  (j+1)*n_in < (i+1)*n_out. Ties advance
/// the inner ring, which keeps inner-outer angle gaps below one inner step.
fn annulus_triangles(in0: usize, n_in: usize, out0: usize, n_out: usize, triangles: &mut Vec<[usize; 3]>) {
    let mut i = 0usize;
    let mut j = 0usize;
    while i < n_in || j < n_out {
        let inner = in0 + i % n_in;
        let outer = out0 + j % n_out;
        let advance_outer = j < n_out && (i == n_in || (j + 1) * n_in < (i + 1) * n_out);
        if advance_outer {
            triangles.push([inner, outer, out0 + (j + 1) % n_out]);
            j += 1;
        } else {
            triangles.push([inner, outer, in0 + (i + 1) % n_in]);
            i += 1;
        }
    }
}

fn build_rectangle(x0: f64, y0: f64, x1: f64, y1: f64, h: f64) -> Result<Mesh> {
    let nx = (((x1 - x0) / h).ceil() as usize).max(1);
    let ny = (((y1 - y0) / h).ceil() as usize).max(1);
    let dx = (x1 - x0) / nx as f64;
    let dy = (y1 - y0) / ny as f64;

    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            // Snap the last row/column to the exact corner coordinates.
            let x = if i == nx { x1 } else { x0 + i as f64 * dx };
            let y = if j == ny { y1 } else { y0 + j as f64 * dy };
            vertices.push(Vec2::new(x, y));
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            triangles.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            triangles.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    Mesh::from_cells(vertices, triangles)
}

fn build_polygon(corners: &[Vec2], h: f64) -> Result<Mesh> {
    let centroid = corners.iter().fold(Vec2::ZERO, |acc, &c| acc + c) / corners.len() as f64;
    let mut vertices = vec![centroid];
    vertices.extend_from_slice(corners);
    let n = corners.len();
    let triangles: Vec<[usize; 3]> = (0..n).map(|i| [0, 1 + i, 1 + (i + 1) % n]).collect();
    let mut mesh = Mesh::from_cells(vertices, triangles)?;
    let spec = DomainSpec::Polygon { corners: corners.to_vec() };
    let mut rounds = 0;
    while mesh.h > 1.45 * h {
        if rounds > 16 || mesh.num_vertices() > 4_000_000 {
            return Err(Error::InvalidMeshSize(h));
        }
        mesh = refine(&spec, &mesh)?;
        rounds += 1;
    }
    Ok(mesh)
}

/// Uniform 4-way refinement (one new vertex per edge). Original vertices
/// keep their indices. New boundary vertices are projected back onto the
/// exact boundary, which only matters for disks; rectangle and polygon edge
/// midpoints already lie on the boundary.
pub fn refine(spec: &DomainSpec, mesh: &Mesh) -> Result<Mesh> {
    let mut vertices = mesh.vertices.clone();
    let boundary_set: BTreeSet<(usize, usize)> = mesh
        .boundary_edges
        .iter()
        .map(|e| (e.a.min(e.b), e.a.max(e.b)))
        .collect();

    let mut midpoint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut mid = |u: usize, v: usize, vertices: &mut Vec<Vec2>| -> usize {
        let key = (u.min(v), u.max(v));
        if let Some(&m) = midpoint.get(&key) {
            return m;
        }
        let mut p = (vertices[u] + vertices[v]) * 0.5;
        if boundary_set.contains(&key) {
            if let DomainSpec::Disk { radius } = spec {
                let r = p.norm();
                if r > 0.0 {
                    p = p * (radius / r);
                }
            }
        }
        vertices.push(p);
        let m = vertices.len() - 1;
        midpoint.insert(key, m);
        m
    };

    let mut triangles = Vec::with_capacity(4 * mesh.triangles.len());
    for t in &mesh.triangles {
        let [a, b, c] = *t;
        let mab = mid(a, b, &mut vertices);
        let mbc = mid(b, c, &mut vertices);
        let mca = mid(c, a, &mut vertices);
        triangles.push([a, mab, mca]);
        triangles.push([b, mbc, mab]);
        triangles.push([c, mca, mbc]);
        triangles.push([mab, mbc, mca]);
    }
    Mesh::from_cells(vertices, triangles)
}

/// Per-edge outward unit normals of the boundary, in boundary-edge order.
/// The normals are already stored on the mesh; this re-derives them for
/// auditing.
pub fn boundary_normals(mesh: &Mesh) -> Vec<BoundaryEdge> {
    mesh.boundary_edges
        .iter()
        .map(|e| BoundaryEdge {
            a: e.a,
            b: e.b,
            normal: (mesh.vertices[e.b] - mesh.vertices[e.a]).perp_cw().normalized(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_mesh_satisfies_euler_and_stays_in_circle() {
        let mesh = build_mesh(&DomainSpec::unit_disk(), 0.5).unwrap();
        let v = mesh.num_vertices() as i64;
        let e = mesh.edges().len() as i64;
        let f = mesh.num_triangles() as i64;
        assert_eq!(v - e + f, 1);
        for p in &mesh.vertices {
            assert!(p.norm() <= 1.0 + 1e-12);
        }
        // Boundary vertices are on the circle up to machine precision.
        for &bv in mesh.boundary_vertices() {
            assert!((mesh.vertices[bv].norm() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn disk_boundary_vertex_count_roughly_doubles() {
        let coarse = build_mesh(&DomainSpec::unit_disk(), 0.2).unwrap();
        let fine = build_mesh(&DomainSpec::unit_disk(), 0.1).unwrap();
        let ratio = fine.boundary_vertices().len() as f64 / coarse.boundary_vertices().len() as f64;
        assert!((1.8..=2.2).contains(&ratio), "ratio = {ratio}");
    }

    #[test]
    fn rectangle_normals_are_axis_aligned() {
        let spec = DomainSpec::Rectangle { x0: 0.0, y0: 0.0, x1: 1.0, y1: 1.0 };
        let mesh = build_mesh(&spec, 0.25).unwrap();
        for e in &mesh.boundary_edges {
            let n = e.normal;
            let axis_aligned = (n.x.abs() - 1.0).abs() < 1e-14 && n.y.abs() < 1e-14
                || (n.y.abs() - 1.0).abs() < 1e-14 && n.x.abs() < 1e-14;
            assert!(axis_aligned, "normal {n:?}");
            // Right edge has n = (1, 0).
            let midx = 0.5 * (mesh.vertices[e.a].x + mesh.vertices[e.b].x);
            if (midx - 1.0).abs() < 1e-14 {
                assert!((n.x - 1.0).abs() < 1e-14 && n.y.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn normals_point_outward_and_disk_normals_are_radial() {
        let mesh = build_mesh(&DomainSpec::unit_disk(), 0.2).unwrap();
        for e in &mesh.boundary_edges {
            assert!((e.normal.norm() - 1.0).abs() < 1e-14);
            let mid = (mesh.vertices[e.a] + mesh.vertices[e.b]) * 0.5;
            // Outward: negative inner product with mid -> opposite-vertex.
            let owner = mesh
                .edges()
                .iter()
                .find(|me| {
                    let key = (me.v[0], me.v[1]);
                    key == (e.a.min(e.b), e.a.max(e.b))
                })
                .unwrap();
            let opp = mesh.vertices[owner.opposite[0].unwrap()];
            assert!(e.normal.dot(opp - mid) < 0.0);
            // Radial up to O(h).
            let radial = mid.normalized();
            assert!((e.normal - radial).norm() < 3.0 * mesh.h, "deviation {}", (e.normal - radial).norm());
        }
    }

    #[test]
    fn boundary_length_converges_at_second_order() {
        let spec = DomainSpec::unit_disk();
        let coarse = build_mesh(&spec, 0.2).unwrap();
        let fine = build_mesh(&spec, 0.1).unwrap();
        let d_coarse = 2.0 * PI - coarse.total_boundary_length();
        let d_fine = 2.0 * PI - fine.total_boundary_length();
        assert!(d_coarse > 0.0 && d_fine > 0.0);
        assert!(d_fine < d_coarse / 3.0, "deficits {d_coarse} {d_fine}");
    }

    #[test]
    fn mesh_quality_holds_for_the_catalog() {
        for (spec, h) in [
            (DomainSpec::unit_disk(), 0.11),
            (DomainSpec::Rectangle { x0: 0.0, y0: 0.0, x1: 2.0, y1: 1.0 }, 0.2),
            (
                DomainSpec::Polygon {
                    corners: (0..6)
                        .map(|i| {
                            let t = 2.0 * PI * i as f64 / 6.0;
                            Vec2::new(t.cos(), t.sin())
                        })
                        .collect(),
                },
                0.15,
            ),
        ] {
            let mesh = build_mesh(&spec, h).unwrap();
            assert!(mesh.min_angle_deg() >= 20.0, "min angle {}", mesh.min_angle_deg());
            assert!(mesh.h <= 1.5 * h, "max edge {} vs h {}", mesh.h, h);
            mesh.validate().unwrap();
        }
    }

    #[test]
    fn refine_preserves_vertices_and_quality() {
        let spec = DomainSpec::unit_disk();
        let mesh = build_mesh(&spec, 0.3).unwrap();
        let fine = refine(&spec, &mesh).unwrap();
        for (i, p) in mesh.vertices.iter().enumerate() {
            assert!(p.dist(fine.vertices[i]) < 1e-15);
        }
        assert_eq!(fine.num_triangles(), 4 * mesh.num_triangles());
        assert!(fine.min_angle_deg() >= 20.0);
        fine.validate().unwrap();
    }

    #[test]
    fn rejects_bad_h() {
        assert!(matches!(build_mesh(&DomainSpec::unit_disk(), 0.0), Err(Error::InvalidMeshSize(_))));
        assert!(matches!(build_mesh(&DomainSpec::unit_disk(), -1.0), Err(Error::InvalidMeshSize(_))));
        assert!(matches!(build_mesh(&DomainSpec::unit_disk(), 5.0), Err(Error::InvalidMeshSize(_))));
    }
}
