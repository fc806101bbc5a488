//! Agmon metric machinery: the multiscale weight, the ball radius function,
//! magnetic wells, weighted graph geodesics, and the smooth regularized
//! distance built from a partition of unity.

use crate::field::MagneticField;
use crate::geometry::Mesh;
use crate::vec2::Vec2;
use crate::{Error, Result};
use rayon::prelude::*;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::Write as _;
use std::path::Path;

/// Quadrature rule for the metric line integral along a graph edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeRule {
    Trapezoid,
    Simpson,
}

/// The multiscale weight: sum over |alpha| <= kappa_star of
/// beta^(1/(|alpha|+2)) |d^alpha B(x)|^(1/(|alpha|+2)).
pub fn m_tilde(field: &MagneticField, p: Vec2, beta: f64) -> f64 {
    let mut s = 0.0;
    for k in 0..=field.kappa_star() {
        let e = 1.0 / (k as f64 + 2.0);
        let bp = beta.powf(e);
        for ay in 0..=k {
            let d = field.deriv_b(p, k - ay, ay).abs();
            if d > 0.0 {
                s += bp * d.powf(e);
            }
        }
    }
    s
}

/// Parameters of the ball-sup sampling and the radius bisection.
#[derive(Clone, Copy, Debug)]
pub struct MRadiusParams {
    pub angles: usize,
    pub radial: usize,
    pub rel_tol: f64,
}

impl Default for MRadiusParams {
    fn default() -> Self {
        MRadiusParams { angles: 16, radial: 4, rel_tol: 1e-3 }
    }
}

/// Approximate sup of |beta B| over the ball B(center, r): polar sampling
/// (angles x radial fractions plus the center) with one refinement pass
/// around the running maximum.
pub fn ball_sup_abs_b(field: &MagneticField, center: Vec2, r: f64, beta: f64, params: &MRadiusParams) -> f64 {
    let eval = |rho: f64, theta: f64| beta.abs() * field.b(center + Vec2::new(theta.cos(), theta.sin()) * rho).abs();
    let mut best = beta.abs() * field.b(center).abs();
    let mut best_rho = 0.0;
    let mut best_theta = 0.0;
    for ia in 0..params.angles {
        let theta = 2.0 * std::f64::consts::PI * ia as f64 / params.angles as f64;
        for ir in 1..=params.radial {
            let rho = r * ir as f64 / params.radial as f64;
            let v = eval(rho, theta);
            if v > best {
                best = v;
                best_rho = rho;
                best_theta = theta;
            }
        }
    }
    // One refinement level around the maximizer.
    let dr = r / params.radial as f64;
    let dt = std::f64::consts::PI / params.angles as f64;
    for &rho in &[best_rho - 0.5 * dr, best_rho, best_rho + 0.5 * dr] {
        if rho <= 0.0 || rho > r {
            continue;
        }
        for &theta in &[best_theta - 0.5 * dt, best_theta, best_theta + 0.5 * dt] {
            best = best.max(eval(rho, theta));
        }
    }
    best
}

/// The radius function m(x, beta B): reciprocal of the largest r such that
/// sup over B(x, r) of |beta B| stays below 1/r^2. Monotone bisection on
/// r^2 * sup - 1. Errors when the criterion still holds at `rmax`, which
/// signals a field too weak near x for this beta.
pub fn m_radius(field: &MagneticField, p: Vec2, beta: f64, rmax: f64) -> Result<f64> {
    m_radius_with(field, p, beta, rmax, &MRadiusParams::default())
}

pub fn m_radius_with(field: &MagneticField, p: Vec2, beta: f64, rmax: f64, params: &MRadiusParams) -> Result<f64> {
    let holds = |r: f64| ball_sup_abs_b(field, p, r, beta, params) * r * r <= 1.0;
    if holds(rmax) {
        return Err(Error::FieldTooWeak { point: p, beta, rmax });
    }
    let mut lo = rmax * 1e-9;
    while !holds(lo) {
        lo *= 1e-3;
        if lo < 1e-300 {
            return Err(Error::FieldTooWeak { point: p, beta, rmax });
        }
    }
    let mut hi = rmax;
    while (hi - lo) > params.rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(1.0 / (0.5 * (lo + hi)))
}

/// Boundary vertices inside the magnetic well { m_tilde <= t }.
pub fn magnetic_well(field: &MagneticField, mesh: &Mesh, beta: f64, t: f64) -> Vec<usize> {
    mesh.boundary_vertices()
        .iter()
        .copied()
        .filter(|&v| m_tilde(field, mesh.vertices[v], beta) <= t)
        .collect()
}

/// Weighted shortest-path graph over the mesh: all mesh edges plus, for each
/// interior edge, the segment joining the two opposite vertices of the
/// adjacent triangle pair. The extra diagonals cut the metric-anisotropy
/// overestimate of graph geodesics below 5% on convex domains.
pub struct MetricGraph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
}

impl MetricGraph {
    pub fn num_vertices(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.offsets[v]..self.offsets[v + 1]).map(move |i| (self.targets[i] as usize, self.weights[i]))
    }
}

pub fn build_metric_graph(mesh: &Mesh, field: &MagneticField, beta: f64, rule: EdgeRule) -> MetricGraph {
    let nv = mesh.num_vertices();
    let mut pairs: Vec<(u32, u32)> = Vec::with_capacity(mesh.edges().len() * 2);
    for e in mesh.edges() {
        pairs.push((e.v[0] as u32, e.v[1] as u32));
        if let [Some(c), Some(d)] = e.opposite {
            let (c, d) = (c.min(d) as u32, c.max(d) as u32);
            pairs.push((c, d));
        }
    }
    pairs.sort_unstable();
    pairs.dedup();

    let m_at: Vec<f64> = mesh.vertices.par_iter().map(|&p| m_tilde(field, p, beta)).collect();
    let weight = |a: u32, b: u32| -> f64 {
        let pa = mesh.vertices[a as usize];
        let pb = mesh.vertices[b as usize];
        let len = pa.dist(pb);
        match rule {
            EdgeRule::Trapezoid => 0.5 * (m_at[a as usize] + m_at[b as usize]) * len,
            EdgeRule::Simpson => {
                let mid = m_tilde(field, (pa + pb) * 0.5, beta);
                (m_at[a as usize] + 4.0 * mid + m_at[b as usize]) / 6.0 * len
            }
        }
    };

    let mut degree = vec![0usize; nv];
    for &(a, b) in &pairs {
        degree[a as usize] += 1;
        degree[b as usize] += 1;
    }
    let mut offsets = vec![0usize; nv + 1];
    for v in 0..nv {
        offsets[v + 1] = offsets[v] + degree[v];
    }
    let mut targets = vec![0u32; offsets[nv]];
    let mut weights = vec![0.0f64; offsets[nv]];
    let mut cursor = offsets.clone();
    for &(a, b) in &pairs {
        let w = weight(a, b);
        targets[cursor[a as usize]] = b;
        weights[cursor[a as usize]] = w;
        cursor[a as usize] += 1;
        targets[cursor[b as usize]] = a;
        weights[cursor[b as usize]] = w;
        cursor[b as usize] += 1;
    }
    MetricGraph { offsets, targets, weights }
}

struct HeapItem {
    dist: f64,
    node: u32,
}

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.dist == other.dist && self.node == other.node
    }
}
impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on distance; ties broken by node id for determinism.
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Multi-source Dijkstra over a prebuilt metric graph.
pub fn dijkstra(graph: &MetricGraph, sources: &[usize]) -> Result<Vec<f64>> {
    if sources.is_empty() {
        return Err(Error::EmptySources);
    }
    let nv = graph.num_vertices();
    let mut dist = vec![f64::INFINITY; nv];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        dist[s] = 0.0;
        heap.push(HeapItem { dist: 0.0, node: s as u32 });
    }
    while let Some(HeapItem { dist: d, node }) = heap.pop() {
        let v = node as usize;
        if d > dist[v] {
            continue;
        }
        for (u, w) in graph.neighbors(v) {
            let nd = d + w;
            if nd < dist[u] {
                dist[u] = nd;
                heap.push(HeapItem { dist: nd, node: u as u32 });
            }
        }
    }
    Ok(dist)
}

/// Agmon distance from a vertex source set, as multi-source Dijkstra with
/// edge weight = line quadrature of m_tilde.
pub fn agmon_distance(
    mesh: &Mesh,
    field: &MagneticField,
    beta: f64,
    sources: &[usize],
    rule: EdgeRule,
) -> Result<Vec<f64>> {
    let graph = build_metric_graph(mesh, field, beta, rule);
    dijkstra(&graph, sources)
}

/// Greedy maximal ball cover: vertices are scanned in index order and an
/// uncovered vertex becomes a center with radius t_j = m(z_j)^-1 / 2.
/// Every vertex ends up inside some B(z_j, t_j).
pub struct PartitionCover {
    pub centers: Vec<usize>,
    pub radii: Vec<f64>,
}

pub fn build_cover(mesh: &Mesh, m_radius: &[f64]) -> PartitionCover {
    let nv = mesh.num_vertices();
    let mut covered = vec![false; nv];
    let mut centers = Vec::new();
    let mut radii: Vec<f64> = Vec::new();
    for v in 0..nv {
        if covered[v] {
            continue;
        }
        let t = 0.5 / m_radius[v];
        centers.push(v);
        radii.push(t);
        covered[v] = true;
        // Mark everything within t of the new center.
        let zv = mesh.vertices[v];
        for (u, flag) in covered.iter_mut().enumerate() {
            if !*flag && mesh.vertices[u].dist(zv) <= t {
                *flag = true;
            }
        }
    }
    PartitionCover { centers, radii }
}

/// Uniform bucket grid for radius queries over the cover centers.
struct PointGrid {
    cell: f64,
    x0: f64,
    y0: f64,
    nx: usize,
    ny: usize,
    bins: Vec<Vec<u32>>,
}

impl PointGrid {
    fn build(points: &[Vec2], cell: f64) -> PointGrid {
        let mut lo = points[0];
        let mut hi = points[0];
        for p in points {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        let nx = (((hi.x - lo.x) / cell).floor() as usize + 1).max(1);
        let ny = (((hi.y - lo.y) / cell).floor() as usize + 1).max(1);
        let mut bins = vec![Vec::new(); nx * ny];
        for (i, p) in points.iter().enumerate() {
            let ix = (((p.x - lo.x) / cell) as usize).min(nx - 1);
            let iy = (((p.y - lo.y) / cell) as usize).min(ny - 1);
            bins[iy * nx + ix].push(i as u32);
        }
        PointGrid { cell, x0: lo.x, y0: lo.y, nx, ny, bins }
    }

    fn near(&self, p: Vec2, radius: f64) -> impl Iterator<Item = u32> + '_ {
        let r = (radius / self.cell).ceil() as i64;
        let cx = ((p.x - self.x0) / self.cell) as i64;
        let cy = ((p.y - self.y0) / self.cell) as i64;
        let nx = self.nx as i64;
        let ny = self.ny as i64;
        ((cy - r).max(0)..=(cy + r).min(ny - 1))
            .flat_map(move |iy| ((cx - r).max(0)..=(cx + r).min(nx - 1)).map(move |ix| (ix, iy)))
            .flat_map(move |(ix, iy)| self.bins[(iy * nx + ix) as usize].iter().copied())
    }
}

/// Smooth transition profile: 1 for s <= 1, 0 for s >= 2, and
/// exp(1 - 1/(1 - (s-1)^2)) in between.
pub fn bump(s: f64) -> f64 {
    if s <= 1.0 {
        1.0
    } else if s >= 2.0 {
        0.0
    } else {
        let u = s - 1.0;
        (1.0 - 1.0 / (1.0 - u * u)).exp()
    }
}

/// The regularized distance: psi(x) = sum_j d(z_j) phi_j(x) where {phi_j} is
/// the normalized partition of unity carried by the cover balls
/// B(z_j, 2 t_j).
pub fn regularized_distance(mesh: &Mesh, dist: &[f64], cover: &PartitionCover) -> Vec<f64> {
    let centers_pos: Vec<Vec2> = cover.centers.iter().map(|&c| mesh.vertices[c]).collect();
    let max_t = cover.radii.iter().cloned().fold(0.0f64, f64::max);
    let grid = PointGrid::build(&centers_pos, (2.0 * max_t).max(1e-12));
    mesh.vertices
        .par_iter()
        .map(|&p| {
            let mut num = 0.0;
            let mut den = 0.0;
            for j in grid.near(p, 2.0 * max_t) {
                let j = j as usize;
                let t = cover.radii[j];
                let s = p.dist(centers_pos[j]) / t;
                let w = bump(s);
                if w > 0.0 {
                    num += dist[cover.centers[j]] * w;
                    den += w;
                }
            }
            debug_assert!(den >= 1.0 - 1e-12, "cover must reach every vertex");
            num / den
        })
        .collect()
}

/// Per-vertex metric data for one (field, beta, well threshold) triple.
#[derive(Clone, Debug)]
pub struct AgmonMetricData {
    pub beta: f64,
    pub well_threshold: f64,
    pub m_tilde: Vec<f64>,
    pub m_radius: Vec<f64>,
    pub well: Vec<usize>,
    pub dist: Vec<f64>,
    pub psi: Vec<f64>,
}

/// Pipeline options. `r0_calib` defaults to 0.2 x domain diameter and is
/// the testable stand-in for the paper-style smallness condition on
/// m(x)^-1; betas failing it are rejected with a diagnostic.
#[derive(Clone, Copy, Debug)]
pub struct AgmonParams {
    pub r0_calib: f64,
    pub edge_rule: EdgeRule,
    pub m_params: MRadiusParams,
}

impl AgmonParams {
    pub fn for_mesh_diameter(diameter: f64) -> Self {
        AgmonParams { r0_calib: 0.2 * diameter, edge_rule: EdgeRule::Trapezoid, m_params: MRadiusParams::default() }
    }
}

impl AgmonMetricData {
    pub fn compute(
        mesh: &Mesh,
        field: &MagneticField,
        beta: f64,
        well_threshold: f64,
        params: &AgmonParams,
    ) -> Result<AgmonMetricData> {
        if beta <= 1.0 {
            return Err(Error::BetaOutOfRange(beta));
        }
        let m_t: Vec<f64> = mesh.vertices.par_iter().map(|&p| m_tilde(field, p, beta)).collect();
        let rmax = params.r0_calib;
        let m_r: Vec<f64> = mesh
            .vertices
            .par_iter()
            .map(|&p| m_radius_with(field, p, beta, rmax, &params.m_params))
            .collect::<Result<Vec<_>>>()?;
        // Calibration: m(x)^-1 must stay below r0 everywhere in the sample.
        for (i, &m) in m_r.iter().enumerate() {
            let inv = 1.0 / m;
            if inv >= params.r0_calib {
                return Err(Error::BetaBelowCalibration {
                    beta,
                    point: mesh.vertices[i],
                    inv_m: inv,
                    r0: params.r0_calib,
                });
            }
        }
        let well = magnetic_well(field, mesh, beta, well_threshold);
        if well.is_empty() {
            return Err(Error::EmptyWell { beta, t: well_threshold });
        }
        let graph = build_metric_graph(mesh, field, beta, params.edge_rule);
        let dist = dijkstra(&graph, &well)?;
        let cover = build_cover(mesh, &m_r);
        let psi = regularized_distance(mesh, &dist, &cover);
        Ok(AgmonMetricData { beta, well_threshold, m_tilde: m_t, m_radius: m_r, well, dist, psi })
    }

    /// CSV export: `x, y, m_tilde, m_radius, dist, psi, is_boundary, is_well`.
    pub fn to_csv(&self, mesh: &Mesh) -> String {
        let mut in_well = vec![false; mesh.num_vertices()];
        for &w in &self.well {
            in_well[w] = true;
        }
        let mut s = String::from("x,y,m_tilde,m_radius,dist,psi,is_boundary,is_well\n");
        for (i, p) in mesh.vertices.iter().enumerate() {
            use std::fmt::Write as _;
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                p.x,
                p.y,
                self.m_tilde[i],
                self.m_radius[i],
                self.dist[i],
                self.psi[i],
                mesh.is_boundary_vertex(i) as u8,
                in_well[i] as u8
            );
        }
        s
    }

    pub fn write_csv(&self, mesh: &Mesh, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_csv(mesh).as_bytes())?;
        Ok(())
    }

    /// Max of |psi - dist| over vertices, the Lemma-style regularization gap.
    pub fn psi_gap(&self) -> f64 {
        self.psi.iter().zip(&self.dist).map(|(&p, &d)| (p - d).abs()).fold(0.0, f64::max)
    }

    /// Max over triangles of |grad psi| / min vertex m_radius, the discrete
    /// stand-in for the gradient bound on the regularized distance.
    pub fn psi_gradient_ratio(&self, mesh: &Mesh) -> f64 {
        let mut worst = 0.0f64;
        for (ti, t) in mesh.triangles.iter().enumerate() {
            let [a, b, c] = *t;
            let (pa, pb, pc) = (mesh.vertices[a], mesh.vertices[b], mesh.vertices[c]);
            let area2 = 2.0 * mesh.triangle_area(ti);
            // P1 gradient from vertex values.
            let (fa, fb, fc) = (self.psi[a], self.psi[b], self.psi[c]);
            let gx = (fa * (pb.y - pc.y) + fb * (pc.y - pa.y) + fc * (pa.y - pb.y)) / area2;
            let gy = (fa * (pc.x - pb.x) + fb * (pa.x - pc.x) + fc * (pb.x - pa.x)) / area2;
            let g = (gx * gx + gy * gy).sqrt();
            let mmin = self.m_radius[a].min(self.m_radius[b]).min(self.m_radius[c]);
            worst = worst.max(g / mmin);
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, DomainSpec};

    #[test]
    fn m_tilde_hand_values() {
        let c = MagneticField::constant(1.0);
        for beta in [4.0, 100.0, 1234.5] {
            assert!((m_tilde(&c, Vec2::new(0.3, -0.2), beta) - beta.sqrt()).abs() < 1e-12);
        }
        let m = MagneticField::monomial(1);
        // At (0, 1) only the first-order x-derivative survives.
        assert!((m_tilde(&m, Vec2::new(0.0, 1.0), 1000.0) - 10.0).abs() < 1e-12);
        // At (1, 0): beta^(1/2) * 1 + beta^(1/3) * 1 = 8 + 4 = 12 for beta = 64.
        assert!((m_tilde(&m, Vec2::new(1.0, 0.0), 64.0) - 12.0).abs() < 1e-12);
    }

    #[test]
    fn m_radius_constant_field_is_sqrt_beta() {
        let c = MagneticField::constant(1.0);
        for beta in [25.0, 100.0, 400.0] {
            let m = m_radius(&c, Vec2::new(0.2, 0.1), beta, 1.0).unwrap();
            assert!((m - beta.sqrt()).abs() / beta.sqrt() < 3e-3, "m = {m}");
        }
    }

    #[test]
    fn m_radius_matches_monomial_oracle() {
        // For B = x^k the ball sup is beta (|a| + r)^k, so r* solves
        // beta (|a| + r)^k r^2 = 1. Newton iteration gives the oracle.
        let oracle = |a: f64, beta: f64, k: i32| -> f64 {
            let f = |r: f64| beta * (a.abs() + r).powi(k) * r * r - 1.0;
            let mut lo = 0.0f64;
            let mut hi = 10.0f64;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if f(mid) <= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            1.0 / (0.5 * (lo + hi))
        };
        for (kappa, point, beta) in [(1u32, Vec2::new(1.0, 0.0), 100.0), (1, Vec2::new(0.0, 0.4), 200.0), (2, Vec2::new(0.5, -0.3), 400.0)] {
            let f = MagneticField::monomial(kappa);
            let got = m_radius(&f, point, beta, 2.0).unwrap();
            let want = oracle(point.x, beta, kappa as i32);
            assert!((got - want).abs() / want < 0.01, "kappa={kappa} got {got} want {want}");
        }
    }

    #[test]
    fn m_radius_monotone_in_beta() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let f = MagneticField::monomial(1);
        for _ in 0..50 {
            let p = Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let m1 = m_radius(&f, p, 200.0, 2.0).unwrap();
            let m2 = m_radius(&f, p, 400.0, 2.0).unwrap();
            assert!(m2 >= m1 * (1.0 - 2e-3), "criterion tightens with beta: {m1} vs {m2}");
        }
    }

    #[test]
    fn m_radius_errors_when_field_too_weak() {
        let f = MagneticField::constant(1.0);
        // beta r^2 <= 1 for all r <= rmax when rmax^2 beta <= 1.
        let err = m_radius(&f, Vec2::ZERO, 2.0, 0.5).unwrap_err();
        assert!(matches!(err, Error::FieldTooWeak { .. }));
    }

    #[test]
    fn wells_match_hand_thresholds() {
        let mesh = build_mesh(&DomainSpec::unit_disk(), 0.2).unwrap();
        let c = MagneticField::constant(1.0);
        let beta = 100.0;
        assert!(magnetic_well(&c, &mesh, beta, 0.5 * beta.sqrt()).is_empty());
        let all = magnetic_well(&c, &mesh, beta, 2.0 * beta.sqrt());
        assert_eq!(all.len(), mesh.boundary_vertices().len());
    }

    #[test]
    fn monomial_well_is_contained_in_small_x_band() {
        let mesh = build_mesh(&DomainSpec::unit_disk(), 0.05).unwrap();
        let f = MagneticField::monomial(1);
        let beta: f64 = 1000.0;
        let t = 2.0 * beta.powf(1.0 / 3.0);
        let well = magnetic_well(&f, &mesh, beta, t);
        assert!(!well.is_empty());
        // m_tilde >= sqrt(beta |x1|), so the well forces |x1| <= t^2/beta.
        let bound = t * t / beta;
        for &v in &well {
            assert!(mesh.vertices[v].x.abs() <= bound + 1e-12, "x1 = {}", mesh.vertices[v].x);
        }
    }

    #[test]
    fn distance_zero_on_sources_and_triangle_inequality() {
        use rand::Rng;
        use rand::SeedableRng;
        let mesh = build_mesh(&DomainSpec::unit_disk(), 0.15).unwrap();
        let f = MagneticField::constant(1.0);
        let graph = build_metric_graph(&mesh, &f, 50.0, EdgeRule::Trapezoid);
        let sources = vec![0usize, 7, 19];
        let d = dijkstra(&graph, &sources).unwrap();
        for &s in &sources {
            assert_eq!(d[s], 0.0);
        }
        assert!(d.iter().all(|v| v.is_finite()));

        // d(s -> a) <= d(s -> b) + d(b -> a) over sampled triples.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let nv = mesh.num_vertices();
        for _ in 0..1000 {
            let a = rng.random_range(0..nv);
            let b = rng.random_range(0..nv);
            let db = dijkstra(&graph, &[b]).unwrap();
            assert!(d[a] <= d[b] + db[a] + 1e-9);
        }
    }

    #[test]
    fn empty_sources_rejected() {
        let mesh = build_mesh(&DomainSpec::unit_disk(), 0.3).unwrap();
        let f = MagneticField::constant(1.0);
        let graph = build_metric_graph(&mesh, &f, 50.0, EdgeRule::Trapezoid);
        assert!(matches!(dijkstra(&graph, &[]), Err(Error::EmptySources)));
    }

    #[test]
    fn constant_metric_geodesics_approximate_straight_lines() {
        let mesh = build_mesh(&DomainSpec::unit_disk(), 0.05).unwrap();
        let f = MagneticField::constant(1.0);
        let beta = 100.0;
        let graph = build_metric_graph(&mesh, &f, beta, EdgeRule::Trapezoid);
        let src = 0usize; // center vertex
        let d = dijkstra(&graph, &[src]).unwrap();
        let mt = beta.sqrt();
        for &v in mesh.boundary_vertices().iter().step_by(7) {
            let exact = mt * mesh.vertices[v].dist(mesh.vertices[src]);
            assert!(d[v] >= exact - 1e-9);
            assert!(d[v] <= exact * 1.05, "stretch {}", d[v] / exact);
        }
    }

    #[test]
    fn cover_reaches_every_vertex_and_psi_nonnegative() {
        let mesh = build_mesh(&DomainSpec::unit_disk(), 0.1).unwrap();
        let f = MagneticField::constant(1.0);
        let beta = 100.0;
        let params = AgmonParams::for_mesh_diameter(2.0);
        let data = AgmonMetricData::compute(&mesh, &f, beta, 2.0 * beta.sqrt(), &params).unwrap();
        assert!(data.psi.iter().all(|&p| p >= 0.0));
        // dist = 0 exactly on well vertices.
        for &w in &data.well {
            assert_eq!(data.dist[w], 0.0);
        }
        // psi stays within a mesh-scale constant of dist.
        assert!(data.psi_gap() < 3.0, "gap {}", data.psi_gap());
    }

    #[test]
    fn bump_profile_endpoints() {
        assert_eq!(bump(0.5), 1.0);
        assert_eq!(bump(1.0), 1.0);
        assert_eq!(bump(2.0), 0.0);
        assert!(bump(1.5) > 0.0 && bump(1.5) < 1.0);
        // Monotone down on the transition.
        assert!(bump(1.2) > bump(1.4) && bump(1.4) > bump(1.8));
    }
}
