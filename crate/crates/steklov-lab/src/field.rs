//! Catalog of magnetic potentials with closed-form fields and derivatives.
//!
//! Every entry is analytic on the whole plane, so ball suprema and sample
//! sets slightly outside the domain need no extension step. Derivatives are
//! closed-form rather than autodiff: the multiscale weight and the
//! finite-type certificate need exact values.

use crate::geometry::Mesh;
use crate::vec2::Vec2;
use crate::{Error, Result};

/// Bivariate polynomial `sum c * x^px * y^py`, used for gauge shifts.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial2 {
    pub terms: Vec<(f64, u32, u32)>,
}

impl Polynomial2 {
    pub fn new(terms: Vec<(f64, u32, u32)>) -> Self {
        Polynomial2 { terms }
    }

    pub fn eval(&self, p: Vec2) -> f64 {
        self.terms.iter().map(|&(c, px, py)| c * p.x.powi(px as i32) * p.y.powi(py as i32)).sum()
    }

    pub fn grad(&self, p: Vec2) -> Vec2 {
        let mut g = Vec2::ZERO;
        for &(c, px, py) in &self.terms {
            if px > 0 {
                g.x += c * px as f64 * p.x.powi(px as i32 - 1) * p.y.powi(py as i32);
            }
            if py > 0 {
                g.y += c * py as f64 * p.x.powi(px as i32) * p.y.powi(py as i32 - 1);
            }
        }
        g
    }
}

#[derive(Clone, Debug)]
enum FieldKind {
    /// A(x) = (-B0 y / 2, B0 x / 2), B = B0.
    Constant { b0: f64 },
    /// A(x) = (0, x^(kappa+1) / (kappa+1)), B = x^kappa, kappa >= 1.
    Monomial { kappa: u32 },
    /// Base potential shifted by a polynomial gradient; B unchanged.
    Gauged { base: Box<MagneticField>, phi: Polynomial2 },
}

/// A magnetic potential together with its scalar field B = d1 A2 - d2 A1,
/// exact derivatives of B, and the finite-type certificate data
/// (kappa_star, tau_star).
#[derive(Clone, Debug)]
pub struct MagneticField {
    kind: FieldKind,
    label: String,
    kappa_star: u32,
    tau_star: f64,
}

/// Result of sampling the finite-type condition over a point set.
#[derive(Clone, Debug)]
pub struct FiniteTypeReport {
    pub min_sum: f64,
    pub argmin: Vec2,
    pub tau_star: f64,
    pub kappa_star: u32,
    pub pass: bool,
}

impl MagneticField {
    pub fn constant(b0: f64) -> Self {
        assert!(b0 != 0.0 && b0.is_finite(), "constant field needs B0 != 0");
        MagneticField {
            kind: FieldKind::Constant { b0 },
            label: format!("constant(B0={b0})"),
            kappa_star: 0,
            tau_star: b0.abs(),
        }
    }

    pub fn monomial(kappa: u32) -> Self {
        assert!(kappa >= 1, "monomial field needs kappa >= 1");
        MagneticField {
            kind: FieldKind::Monomial { kappa },
            label: format!("monomial(kappa={kappa})"),
            kappa_star: kappa,
            tau_star: factorial(kappa),
        }
    }

    pub fn gauged(base: MagneticField, phi: Polynomial2) -> Self {
        let label = format!("{}+gauge", base.label);
        let (kappa_star, tau_star) = (base.kappa_star, base.tau_star);
        MagneticField { kind: FieldKind::Gauged { base: Box::new(base), phi }, label, kappa_star, tau_star }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kappa_star(&self) -> u32 {
        self.kappa_star
    }

    pub fn tau_star(&self) -> f64 {
        self.tau_star
    }

    /// The vector potential A at a point.
    pub fn potential(&self, p: Vec2) -> Vec2 {
        match &self.kind {
            FieldKind::Constant { b0 } => Vec2::new(-0.5 * b0 * p.y, 0.5 * b0 * p.x),
            FieldKind::Monomial { kappa } => {
                let k1 = *kappa as i32 + 1;
                Vec2::new(0.0, p.x.powi(k1) / k1 as f64)
            }
            FieldKind::Gauged { base, phi } => base.potential(p) + phi.grad(p),
        }
    }

    /// The scalar field B at a point.
    pub fn b(&self, p: Vec2) -> f64 {
        match &self.kind {
            FieldKind::Constant { b0 } => *b0,
            FieldKind::Monomial { kappa } => p.x.powi(*kappa as i32),
            FieldKind::Gauged { base, .. } => base.b(p),
        }
    }

    /// Exact partial derivative of B for the multi-index (ax, ay).
    pub fn deriv_b(&self, p: Vec2, ax: u32, ay: u32) -> f64 {
        match &self.kind {
            FieldKind::Constant { b0 } => {
                if ax == 0 && ay == 0 {
                    *b0
                } else {
                    0.0
                }
            }
            FieldKind::Monomial { kappa } => {
                if ay > 0 || ax > *kappa {
                    0.0
                } else {
                    falling_factorial(*kappa, ax) * p.x.powi((*kappa - ax) as i32)
                }
            }
            FieldKind::Gauged { base, .. } => base.deriv_b(p, ax, ay),
        }
    }

    /// All derivatives of B at `p` up to `max_order`, as (multi-index, value)
    /// pairs. Orders beyond kappa_star + 1 are outside the stored data.
    pub fn eval_b_derivs(&self, p: Vec2, max_order: u32) -> Result<Vec<((u32, u32), f64)>> {
        if max_order > self.kappa_star + 1 {
            return Err(Error::DerivOrder { requested: max_order, max: self.kappa_star + 1 });
        }
        let mut out = Vec::new();
        for k in 0..=max_order {
            for ay in 0..=k {
                let ax = k - ay;
                out.push(((ax, ay), self.deriv_b(p, ax, ay)));
            }
        }
        Ok(out)
    }

    /// Sum over |alpha| <= order of |d^alpha B(p)|.
    pub fn deriv_sum(&self, p: Vec2, order: u32) -> f64 {
        let mut s = 0.0;
        for k in 0..=order {
            for ay in 0..=k {
                s += self.deriv_b(p, k - ay, ay).abs();
            }
        }
        s
    }

    /// Smallest k such that some |alpha| = k derivative exceeds `tol` in
    /// absolute value. Errors if no derivative up to kappa_star does, which
    /// means the finite-type condition fails at `p` within tolerance.
    pub fn vanishing_order(&self, p: Vec2, tol: f64) -> Result<u32> {
        assert!(tol > 0.0, "vanishing_order needs tol > 0");
        for k in 0..=self.kappa_star {
            for ay in 0..=k {
                if self.deriv_b(p, k - ay, ay).abs() > tol {
                    return Ok(k);
                }
            }
        }
        Err(Error::FiniteTypeViolated { point: p, order: self.kappa_star, tol })
    }

    /// Default tolerance for `vanishing_order`: 1e-9 (1 + ||B||_{C^kappa*})
    /// with the norm sampled over the given points.
    pub fn default_vanishing_tol(&self, samples: &[Vec2]) -> f64 {
        let mut norm = 0.0f64;
        for &p in samples {
            for k in 0..=self.kappa_star {
                for ay in 0..=k {
                    norm = norm.max(self.deriv_b(p, k - ay, ay).abs());
                }
            }
        }
        1e-9 * (1.0 + norm)
    }

    /// Samples the finite-type condition: the minimum over the points of the
    /// derivative sum up to kappa_star. Passes iff the minimum >= tau_star.
    pub fn certify_finite_type(&self, samples: &[Vec2]) -> Result<FiniteTypeReport> {
        if samples.is_empty() {
            return Err(Error::EmptySamples);
        }
        let mut min_sum = f64::INFINITY;
        let mut argmin = samples[0];
        for &p in samples {
            let s = self.deriv_sum(p, self.kappa_star);
            if s < min_sum {
                min_sum = s;
                argmin = p;
            }
        }
        // Allow roundoff slack at the certificate boundary.
        let pass = min_sum >= self.tau_star * (1.0 - 1e-12);
        Ok(FiniteTypeReport { min_sum, argmin, tau_star: self.tau_star, kappa_star: self.kappa_star, pass })
    }

    /// Highest vanishing order of B over the boundary vertices, and the
    /// vertices achieving it.
    pub fn kappa0_gamma0(&self, mesh: &Mesh, tol: f64) -> Result<(u32, Vec<usize>)> {
        let mut orders = Vec::with_capacity(mesh.boundary_vertices().len());
        let mut kappa0 = 0u32;
        for &v in mesh.boundary_vertices() {
            let k = self.vanishing_order(mesh.vertices[v], tol)?;
            kappa0 = kappa0.max(k);
            orders.push((v, k));
        }
        let gamma0 = orders.into_iter().filter(|&(_, k)| k == kappa0).map(|(v, _)| v).collect();
        Ok((kappa0, gamma0))
    }
}

fn factorial(k: u32) -> f64 {
    (1..=k as u64).product::<u64>() as f64
}

/// kappa! / (kappa - a)!
fn falling_factorial(kappa: u32, a: u32) -> f64 {
    ((kappa - a + 1) as u64..=kappa as u64).product::<u64>() as f64
}

/// Vertex samples scaled outward about the mesh centroid, used to check the
/// finite-type condition on a slightly enlarged region.
pub fn enlarged_samples(mesh: &Mesh, factor: f64) -> Vec<Vec2> {
    let centroid = mesh.vertices.iter().fold(Vec2::ZERO, |a, &p| a + p) / mesh.vertices.len() as f64;
    mesh.vertices.iter().map(|&p| centroid + (p - centroid) * factor).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_field_derivatives() {
        let f = MagneticField::constant(1.0);
        let x = Vec2::new(0.3, -0.7);
        let derivs = f.eval_b_derivs(x, 1).unwrap();
        assert_eq!(derivs[0], ((0, 0), 1.0));
        assert!(derivs[1..].iter().all(|&(_, v)| v == 0.0));
    }

    #[test]
    fn monomial_derivatives_at_origin() {
        let f = MagneticField::monomial(1);
        let o = Vec2::ZERO;
        assert_eq!(f.deriv_b(o, 0, 0), 0.0);
        assert_eq!(f.deriv_b(o, 1, 0), 1.0);
        assert_eq!(f.deriv_b(o, 0, 1), 0.0);

        let f2 = MagneticField::monomial(2);
        assert_eq!(f2.deriv_b(o, 0, 0), 0.0);
        assert_eq!(f2.deriv_b(o, 1, 0), 0.0);
        assert_eq!(f2.deriv_b(o, 2, 0), 2.0);
    }

    #[test]
    fn deriv_order_beyond_stored_data_errors() {
        let f = MagneticField::constant(2.0);
        assert!(matches!(f.eval_b_derivs(Vec2::ZERO, 2), Err(Error::DerivOrder { .. })));
    }

    #[test]
    fn vanishing_orders_match_hand_values() {
        let f = MagneticField::monomial(1);
        assert_eq!(f.vanishing_order(Vec2::new(0.0, 0.5), 1e-9).unwrap(), 1);
        assert_eq!(f.vanishing_order(Vec2::new(0.5, 0.0), 1e-9).unwrap(), 0);
        let c = MagneticField::constant(1.0);
        assert_eq!(c.vanishing_order(Vec2::new(0.2, 0.9), 1e-9).unwrap(), 0);
    }

    #[test]
    fn vanishing_order_stable_under_tol_halving() {
        let f = MagneticField::monomial(2);
        for p in [Vec2::new(0.4, 0.1), Vec2::new(-0.3, 0.8), Vec2::new(0.0, -0.6)] {
            let tol = f.default_vanishing_tol(&[p]);
            assert_eq!(f.vanishing_order(p, tol).unwrap(), f.vanishing_order(p, tol / 2.0).unwrap());
        }
    }

    #[test]
    fn gauge_shift_keeps_b_and_derivatives() {
        let base = MagneticField::constant(1.5);
        let phi = Polynomial2::new(vec![(1.0, 1, 1), (-0.3, 2, 0)]);
        let g = MagneticField::gauged(base.clone(), phi.clone());
        for p in [Vec2::new(0.1, 0.2), Vec2::new(-0.8, 0.5)] {
            assert_eq!(g.b(p), base.b(p));
            assert_eq!(g.deriv_b(p, 1, 0), base.deriv_b(p, 1, 0));
            let expected = base.potential(p) + phi.grad(p);
            assert!((g.potential(p) - expected).norm() < 1e-15);
        }
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let fields = [MagneticField::monomial(1), MagneticField::monomial(3)];
        let delta = 1e-4;
        for f in &fields {
            for _ in 0..100 {
                let p = Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                // d/dx B by central difference.
                let fd = (f.b(Vec2::new(p.x + delta, p.y)) - f.b(Vec2::new(p.x - delta, p.y))) / (2.0 * delta);
                let exact = f.deriv_b(p, 1, 0);
                let scale = 1.0 + exact.abs();
                assert!((fd - exact).abs() / scale < 1e-6, "fd {fd} vs exact {exact}");
            }
        }
    }

    #[test]
    fn finite_type_certificate_cases() {
        let samples: Vec<Vec2> = (0..50)
            .flat_map(|i| {
                (0..50).map(move |j| Vec2::new(-1.0 + 2.0 * i as f64 / 49.0, -1.0 + 2.0 * j as f64 / 49.0))
            })
            .filter(|p| p.norm() <= 1.0)
            .collect();

        let c = MagneticField::constant(1.0);
        let rep = c.certify_finite_type(&samples).unwrap();
        assert!(rep.pass);
        assert!((rep.min_sum - 1.0).abs() < 1e-14);

        let m = MagneticField::monomial(1);
        let rep = m.certify_finite_type(&samples).unwrap();
        assert!(rep.pass, "|B| + |grad B| >= 1 everywhere on the disk");

        // Declaring kappa_star = 0 for B = x1 fails at points with x1 = 0.
        let mut fake = MagneticField::monomial(1);
        fake.kappa_star = 0;
        fake.tau_star = 0.5;
        let rep = fake.certify_finite_type(&samples).unwrap();
        assert!(!rep.pass);
        assert!(rep.argmin.x.abs() < 0.05);
    }
}
