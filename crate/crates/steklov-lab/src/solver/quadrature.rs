//! Symmetric Gauss rules on the reference triangle, in barycentric
//! coordinates. Weights sum to one and multiply the physical area.

/// One quadrature node: barycentric coordinates and weight.
#[derive(Clone, Copy, Debug)]
pub struct TriQuadNode {
    pub l: [f64; 3],
    pub w: f64,
}

const CENTROID: [TriQuadNode; 1] = [TriQuadNode { l: [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], w: 1.0 }];

// Degree-2 rule: edge midpoints.
const DEG2: [TriQuadNode; 3] = [
    TriQuadNode { l: [0.5, 0.5, 0.0], w: 1.0 / 3.0 },
    TriQuadNode { l: [0.0, 0.5, 0.5], w: 1.0 / 3.0 },
    TriQuadNode { l: [0.5, 0.0, 0.5], w: 1.0 / 3.0 },
];

// Dunavant degree-4 rule, two symmetric orbits.
const A1: f64 = 0.445_948_490_915_965;
const W1: f64 = 0.223_381_589_678_011;
const A2: f64 = 0.091_576_213_509_771;
const W2: f64 = 0.109_951_743_655_322;
const DEG4: [TriQuadNode; 6] = [
    TriQuadNode { l: [1.0 - 2.0 * A1, A1, A1], w: W1 },
    TriQuadNode { l: [A1, 1.0 - 2.0 * A1, A1], w: W1 },
    TriQuadNode { l: [A1, A1, 1.0 - 2.0 * A1], w: W1 },
    TriQuadNode { l: [1.0 - 2.0 * A2, A2, A2], w: W2 },
    TriQuadNode { l: [A2, 1.0 - 2.0 * A2, A2], w: W2 },
    TriQuadNode { l: [A2, A2, 1.0 - 2.0 * A2], w: W2 },
];

// Degree-5 rule: centroid plus two orbits.
const B1: f64 = 0.470_142_064_105_115;
const V1: f64 = 0.132_394_152_788_506;
const B2: f64 = 0.101_286_507_323_456;
const V2: f64 = 0.125_939_180_544_827;
const DEG5: [TriQuadNode; 7] = [
    TriQuadNode { l: [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], w: 0.225 },
    TriQuadNode { l: [1.0 - 2.0 * B1, B1, B1], w: V1 },
    TriQuadNode { l: [B1, 1.0 - 2.0 * B1, B1], w: V1 },
    TriQuadNode { l: [B1, B1, 1.0 - 2.0 * B1], w: V1 },
    TriQuadNode { l: [1.0 - 2.0 * B2, B2, B2], w: V2 },
    TriQuadNode { l: [B2, 1.0 - 2.0 * B2, B2], w: V2 },
    TriQuadNode { l: [B2, B2, 1.0 - 2.0 * B2], w: V2 },
];

/// The smallest shipped rule exact at least to the requested polynomial
/// degree.
pub fn triangle_rule(order: u32) -> &'static [TriQuadNode] {
    match order {
        0 | 1 => &CENTROID,
        2 | 3 => &DEG2,
        4 => &DEG4,
        _ => &DEG5,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Integrates x^p y^q over the reference triangle {x, y >= 0, x + y <= 1}
    /// with the rule mapped to cartesian nodes (l2, l3).
    fn quad_monomial(rule: &[TriQuadNode], p: i32, q: i32) -> f64 {
        // Reference triangle area = 1/2; weights sum to 1 and scale by area.
        rule.iter().map(|n| 0.5 * n.w * n.l[1].powi(p) * n.l[2].powi(q)).sum()
    }

    /// Exact integral of x^p y^q over the reference triangle: p! q! / (p+q+2)!.
    fn exact_monomial(p: u64, q: u64) -> f64 {
        let fact = |k: u64| (1..=k).product::<u64>() as f64;
        fact(p) * fact(q) / fact(p + q + 2)
    }

    #[test]
    fn rules_are_exact_to_declared_degree() {
        for (rule, degree) in [(&DEG2[..], 2), (&DEG4[..], 4), (&DEG5[..], 5)] {
            for p in 0..=degree {
                for q in 0..=(degree - p) {
                    let got = quad_monomial(rule, p as i32, q as i32);
                    let want = exact_monomial(p, q);
                    assert!((got - want).abs() < 1e-14, "deg {degree}: x^{p} y^{q}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn weights_sum_to_one() {
        for rule in [&CENTROID[..], &DEG2[..], &DEG4[..], &DEG5[..]] {
            let s: f64 = rule.iter().map(|n| n.w).sum();
            assert!((s - 1.0).abs() < 1e-14);
        }
    }
}
