//! Uncertainty geometry: the half-circle support of the geo-electric
//! field, its inner/outer polyhedral approximations, the mean-support
//! ambiguity set and the triangle scenario-weight solve.
//!
//! Conventions for the polyhedral approximations (the reference figures
//! show shapes but no coordinates): inner sets take equally spaced points
//! on the arc; the outer triangle uses the base line plus tangents at 60
//! and 120 degrees; the outer hexagon adds the tangents at 0, 90 and 180
//! degrees to the same two, which keeps the whole family nested:
//! inner3 within inner5 within the half-circle within outer6 within outer3.

use crate::gic::FieldScenario;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AmbiguityError {
    #[error("support radius must be positive, got {0}")]
    BadRadius(f64),
    #[error("unsupported vertex count {n} for {which} approximation")]
    BadVertexCount { which: &'static str, n: usize },
    #[error("the exact half-circle has no finite extreme-point list; use a polyhedral approximation (inner3/inner5/outer3/outer6)")]
    NoVertices,
    #[error("mean ({0}, {1}) lies outside the support set")]
    MeanOutsideSupport(f64, f64),
    #[error("degenerate triangle (area too small) in scenario-weight solve")]
    DegenerateTriangle,
}

/// How a polytope relates to the exact half-circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Inner,
    Outer,
    Exact,
}

/// Support set of the field vector `(xi_E, xi_N)`.
#[derive(Debug, Clone, PartialEq)]
pub enum SupportSet {
    /// `{ -R <= xi_E <= R, 0 <= xi_N <= R, xi_E^2 + xi_N^2 <= R^2 }`
    HalfCircle { radius: f64 },
    /// Convex hull of the vertices, stored counterclockwise.
    Polytope {
        vertices: Vec<(f64, f64)>,
        orientation: Orientation,
    },
}

/// The exact half-circle support of radius `R`.
pub fn halfcircle(radius: f64) -> Result<SupportSet, AmbiguityError> {
    if radius <= 0.0 {
        return Err(AmbiguityError::BadRadius(radius));
    }
    Ok(SupportSet::HalfCircle { radius })
}

/// Inner polytope: convex hull of `n` points equally spaced on the arc
/// over [0, 180] degrees. `n = 3` gives `{(R,0), (0,R), (-R,0)}`.
pub fn inner_polytope(radius: f64, n: usize) -> Result<SupportSet, AmbiguityError> {
    if radius <= 0.0 {
        return Err(AmbiguityError::BadRadius(radius));
    }
    if !(n == 3 || n == 5) {
        return Err(AmbiguityError::BadVertexCount { which: "inner", n });
    }
    let vertices = (0..n)
        .map(|k| {
            let angle = std::f64::consts::PI * k as f64 / (n - 1) as f64;
            // Snap the axis points so vertices are exact.
            let (s, c) = (angle.sin(), angle.cos());
            let c = if c.abs() < 1e-15 { 0.0 } else { c };
            let s = if s.abs() < 1e-15 { 0.0 } else { s };
            (radius * c, radius * s)
        })
        .collect();
    Ok(SupportSet::Polytope {
        vertices,
        orientation: Orientation::Inner,
    })
}

/// Outer polytope containing the half-circle.
///
/// `n = 3`: base corners `(+-2R, 0)` and apex `(0, 2R/sqrt(3))` from the
/// tangents at 60/120 degrees. `n = 6`: those two tangents plus the
/// tangents at 0, 90 and 180 degrees and the base, a hexagon nested inside
/// the outer triangle.
pub fn outer_polytope(radius: f64, n: usize) -> Result<SupportSet, AmbiguityError> {
    if radius <= 0.0 {
        return Err(AmbiguityError::BadRadius(radius));
    }
    let r = radius;
    let vertices = match n {
        3 => vec![(2.0 * r, 0.0), (0.0, 2.0 * r / 3.0_f64.sqrt()), (-2.0 * r, 0.0)],
        6 => {
            let y_side = r / 3.0_f64.sqrt(); // x = R meets the 60-degree tangent
            let x_top = (2.0 - 3.0_f64.sqrt()) * r; // y = R meets it
            vec![
                (r, 0.0),
                (r, y_side),
                (x_top, r),
                (-x_top, r),
                (-r, y_side),
                (-r, 0.0),
            ]
        }
        _ => return Err(AmbiguityError::BadVertexCount { which: "outer", n }),
    };
    Ok(SupportSet::Polytope {
        vertices,
        orientation: Orientation::Outer,
    })
}

impl SupportSet {
    pub fn contains(&self, point: (f64, f64), tol: f64) -> bool {
        let (x, y) = point;
        match self {
            SupportSet::HalfCircle { radius } => {
                let r = *radius;
                x >= -r - tol
                    && x <= r + tol
                    && y >= -tol
                    && y <= r + tol
                    && x * x + y * y <= r * r + tol * (2.0 * r + tol)
            }
            SupportSet::Polytope { vertices, .. } => {
                // Left-of-every-edge test for a counterclockwise polygon.
                let k = vertices.len();
                (0..k).all(|i| {
                    let (ax, ay) = vertices[i];
                    let (bx, by) = vertices[(i + 1) % k];
                    (bx - ax) * (y - ay) - (by - ay) * (x - ax)
                        >= -tol * (1.0 + (bx - ax).abs() + (by - ay).abs())
                })
            }
        }
    }

    /// Extreme points (polytopes only; the half-circle has infinitely many).
    pub fn vertices(&self) -> Result<Vec<FieldScenario>, AmbiguityError> {
        match self {
            SupportSet::HalfCircle { .. } => Err(AmbiguityError::NoVertices),
            SupportSet::Polytope { vertices, .. } => Ok(vertices
                .iter()
                .map(|&(e, n)| FieldScenario::new(e, n))
                .collect()),
        }
    }

    /// Shoelace area (polytopes) or the exact half-disk area.
    pub fn area(&self) -> f64 {
        match self {
            SupportSet::HalfCircle { radius } => 0.5 * std::f64::consts::PI * radius * radius,
            SupportSet::Polytope { vertices, .. } => {
                let k = vertices.len();
                0.5 * (0..k)
                    .map(|i| {
                        let (ax, ay) = vertices[i];
                        let (bx, by) = vertices[(i + 1) % k];
                        ax * by - bx * ay
                    })
                    .sum::<f64>()
            }
        }
    }

    /// Half-plane representation `g . xi <= h` of a polytope (CCW edges).
    pub fn half_planes(&self) -> Result<Vec<((f64, f64), f64)>, AmbiguityError> {
        match self {
            SupportSet::HalfCircle { .. } => Err(AmbiguityError::NoVertices),
            SupportSet::Polytope { vertices, .. } => {
                let k = vertices.len();
                Ok((0..k)
                    .map(|i| {
                        let (ax, ay) = vertices[i];
                        let (bx, by) = vertices[(i + 1) % k];
                        // Outward normal of edge a -> b for a CCW polygon.
                        let g = (by - ay, -(bx - ax));
                        let h = g.0 * ax + g.1 * ay;
                        (g, h)
                    })
                    .collect())
            }
        }
    }

    pub fn is_triangle(&self) -> bool {
        matches!(self, SupportSet::Polytope { vertices, .. } if vertices.len() == 3)
    }

    pub fn label(&self) -> String {
        match self {
            SupportSet::HalfCircle { .. } => "exact".into(),
            SupportSet::Polytope { vertices, orientation } => match orientation {
                Orientation::Inner => format!("inner{}", vertices.len()),
                Orientation::Outer => format!("outer{}", vertices.len()),
                Orientation::Exact => format!("poly{}", vertices.len()),
            },
        }
    }
}

/// Support set by CLI name.
pub fn support_by_name(name: &str, radius: f64) -> Result<SupportSet, AmbiguityError> {
    match name {
        "exact" => halfcircle(radius),
        "inner3" => inner_polytope(radius, 3),
        "inner5" => inner_polytope(radius, 5),
        "outer3" => outer_polytope(radius, 3),
        "outer6" => outer_polytope(radius, 6),
        _ => Err(AmbiguityError::BadVertexCount {
            which: "unknown support name",
            n: 0,
        }),
    }
}

/// Mean-support ambiguity set: all distributions with the given marginal
/// means supported on the set.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguitySet {
    pub mean: FieldScenario,
    pub support: SupportSet,
}

impl AmbiguitySet {
    pub fn new(mean: FieldScenario, support: SupportSet) -> Result<Self, AmbiguityError> {
        if !support.contains((mean.e, mean.n), 1e-9) {
            return Err(AmbiguityError::MeanOutsideSupport(mean.e, mean.n));
        }
        Ok(AmbiguitySet { mean, support })
    }
}

/// Probabilities attached to the three vertices of a triangle support.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioWeights {
    pub p: [f64; 3],
    pub vertices: [FieldScenario; 3],
}

/// Unique convex weights reproducing the mean from a triangle's vertices,
/// by solving the 3x3 system
/// `[xi_E row; xi_N row; 1 1 1] p = [mu_E; mu_N; 1]`.
///
/// Weights below `-1e-12` mean the mean lies outside the triangle; smaller
/// negative round-off is clamped to zero.
pub fn scenario_weights(
    triangle: &SupportSet,
    mean: FieldScenario,
) -> Result<ScenarioWeights, AmbiguityError> {
    let verts = triangle.vertices()?;
    if verts.len() != 3 {
        return Err(AmbiguityError::BadVertexCount {
            which: "scenario weights need a triangle",
            n: verts.len(),
        });
    }
    let (v1, v2, v3) = (verts[0], verts[1], verts[2]);
    // Cramer on the barycentric system.
    let det = |a: (f64, f64), b: (f64, f64), c: (f64, f64)| -> f64 {
        (b.0 - a.0) * (c.1 - a.1) - (c.0 - a.0) * (b.1 - a.1)
    };
    let total = det((v1.e, v1.n), (v2.e, v2.n), (v3.e, v3.n));
    let scale = verts
        .iter()
        .map(|v| v.e.abs().max(v.n.abs()))
        .fold(1.0, f64::max);
    if total.abs() < 1e-12 * scale * scale {
        return Err(AmbiguityError::DegenerateTriangle);
    }
    let m = (mean.e, mean.n);
    let mut p = [
        det(m, (v2.e, v2.n), (v3.e, v3.n)) / total,
        det((v1.e, v1.n), m, (v3.e, v3.n)) / total,
        det((v1.e, v1.n), (v2.e, v2.n), m) / total,
    ];
    for w in p.iter_mut() {
        if *w < -1e-12 {
            return Err(AmbiguityError::MeanOutsideSupport(mean.e, mean.n));
        }
        if *w < 0.0 {
            *w = 0.0;
        }
    }
    Ok(ScenarioWeights {
        p,
        vertices: [v1, v2, v3],
    })
}

impl ScenarioWeights {
    /// `sum p_k xi_k`, for checking mean reproduction.
    pub fn reproduced_mean(&self) -> FieldScenario {
        let e = self.p.iter().zip(&self.vertices).map(|(p, v)| p * v.e).sum();
        let n = self.p.iter().zip(&self.vertices).map(|(p, v)| p * v.n).sum();
        FieldScenario::new(e, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halfcircle_membership() {
        let hc = halfcircle(2.0).unwrap();
        assert!(hc.contains((0.0, 0.0), 0.0));
        assert!(!hc.contains((0.0, -0.02 * 2.0), 1e-12));
        let r = 2.0 / 2.0_f64.sqrt();
        assert!(hc.contains((r, r), 1e-9)); // boundary
        assert!(!hc.contains((2.01, 0.0), 1e-9));
    }

    #[test]
    fn inner3_vertices_exact() {
        let s = inner_polytope(1.0, 3).unwrap();
        let v = s.vertices().unwrap();
        assert_eq!(v.len(), 3);
        assert_eq!((v[0].e, v[0].n), (1.0, 0.0));
        assert_eq!((v[1].e, v[1].n), (0.0, 1.0));
        assert_eq!((v[2].e, v[2].n), (-1.0, 0.0));
    }

    #[test]
    fn vertex_arity_and_errors() {
        assert_eq!(inner_polytope(1.0, 5).unwrap().vertices().unwrap().len(), 5);
        assert_eq!(outer_polytope(1.0, 6).unwrap().vertices().unwrap().len(), 6);
        assert_eq!(outer_polytope(1.0, 3).unwrap().vertices().unwrap().len(), 3);
        assert!(matches!(
            halfcircle(1.0).unwrap().vertices(),
            Err(AmbiguityError::NoVertices)
        ));
        assert!(inner_polytope(1.0, 4).is_err());
        assert!(inner_polytope(-1.0, 3).is_err());
    }

    #[test]
    fn outer3_contains_arc_points() {
        let s = outer_polytope(1.0, 3).unwrap();
        for p in [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0)] {
            assert!(s.contains(p, 1e-9), "{p:?}");
        }
    }

    #[test]
    fn nesting_by_sampling() {
        let r = 3.0;
        let i3 = inner_polytope(r, 3).unwrap();
        let i5 = inner_polytope(r, 5).unwrap();
        let hc = halfcircle(r).unwrap();
        let o6 = outer_polytope(r, 6).unwrap();
        let o3 = outer_polytope(r, 3).unwrap();

        // Vertices of each set sit inside the next one out.
        for v in i3.vertices().unwrap() {
            assert!(i5.contains((v.e, v.n), 1e-9));
        }
        for v in i5.vertices().unwrap() {
            assert!(hc.contains((v.e, v.n), 1e-9));
        }
        for v in o6.vertices().unwrap() {
            assert!(o3.contains((v.e, v.n), 1e-9), "{v:?}");
        }

        // Half-circle sample points land in the outer sets, and sampled
        // convex combinations of inner vertices land in the half-circle.
        let mut rng = 0xabcdef12345_u64;
        let mut next = move || {
            rng ^= rng << 13;
            rng ^= rng >> 7;
            rng ^= rng << 17;
            (rng >> 11) as f64 / (1u64 << 53) as f64
        };
        let i5v = i5.vertices().unwrap();
        for _ in 0..10_000 {
            // Rejection-sample the half circle.
            let x = r * (2.0 * next() - 1.0);
            let y = r * next();
            if x * x + y * y <= r * r {
                assert!(o6.contains((x, y), 1e-9), "({x}, {y}) not in outer6");
                assert!(o3.contains((x, y), 1e-9), "({x}, {y}) not in outer3");
            }
            // Random convex combination of inner5 vertices.
            let mut w: Vec<f64> = (0..i5v.len()).map(|_| next()).collect();
            let tot: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= tot);
            let px: f64 = w.iter().zip(&i5v).map(|(wi, v)| wi * v.e).sum();
            let py: f64 = w.iter().zip(&i5v).map(|(wi, v)| wi * v.n).sum();
            assert!(hc.contains((px, py), 1e-9));
        }
    }

    #[test]
    fn areas_are_ordered() {
        let r = 2.0;
        let a_i3 = inner_polytope(r, 3).unwrap().area();
        let a_i5 = inner_polytope(r, 5).unwrap().area();
        let a_hc = halfcircle(r).unwrap().area();
        let a_o6 = outer_polytope(r, 6).unwrap().area();
        let a_o3 = outer_polytope(r, 3).unwrap().area();
        assert!(a_i3 < a_i5 && a_i5 < a_hc && a_hc < a_o6 && a_o6 < a_o3);
        assert!((a_hc - 0.5 * std::f64::consts::PI * r * r).abs() < 1e-12);
        // inner3 = triangle with base 2R and height R.
        assert!((a_i3 - r * r).abs() < 1e-9);
    }

    #[test]
    fn weights_at_vertex_and_centroid() {
        let tri = inner_polytope(1.0, 3).unwrap();
        // Mean at vertex 2 -> p = (0, 1, 0).
        let w = scenario_weights(&tri, FieldScenario::new(0.0, 1.0)).unwrap();
        assert!((w.p[0]).abs() < 1e-12 && (w.p[1] - 1.0).abs() < 1e-12 && (w.p[2]).abs() < 1e-12);
        // Centroid -> 1/3 each.
        let w = scenario_weights(&tri, FieldScenario::new(0.0, 1.0 / 3.0)).unwrap();
        for p in w.p {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn weights_hand_solved() {
        // Vertices (-R,0), (R,0), (0,R); mean (0, R/2) -> (1/4, 1/4, 1/2).
        let r = 4.0;
        let tri = SupportSet::Polytope {
            vertices: vec![(-r, 0.0), (r, 0.0), (0.0, r)],
            orientation: Orientation::Exact,
        };
        let w = scenario_weights(&tri, FieldScenario::new(0.0, r / 2.0)).unwrap();
        assert!((w.p[0] - 0.25).abs() < 1e-12);
        assert!((w.p[1] - 0.25).abs() < 1e-12);
        assert!((w.p[2] - 0.5).abs() < 1e-12);
        let m = w.reproduced_mean();
        assert!((m.e).abs() < 1e-10 && (m.n - r / 2.0).abs() < 1e-10);
    }

    #[test]
    fn weights_reject_outside_mean() {
        let tri = inner_polytope(1.0, 3).unwrap();
        assert!(matches!(
            scenario_weights(&tri, FieldScenario::new(0.9, 0.9)),
            Err(AmbiguityError::MeanOutsideSupport(_, _))
        ));
    }

    #[test]
    fn mean_must_be_in_support() {
        let s = inner_polytope(1.0, 3).unwrap();
        assert!(AmbiguitySet::new(FieldScenario::new(0.2, 0.3), s.clone()).is_ok());
        assert!(AmbiguitySet::new(FieldScenario::new(0.9, 0.9), s).is_err());
    }

    #[test]
    fn weight_uniqueness_under_permutation() {
        let tri = SupportSet::Polytope {
            vertices: vec![(2.0, 0.0), (0.0, 2.0), (-2.0, 0.0)],
            orientation: Orientation::Inner,
        };
        let perm = SupportSet::Polytope {
            vertices: vec![(0.0, 2.0), (-2.0, 0.0), (2.0, 0.0)],
            orientation: Orientation::Inner,
        };
        let mean = FieldScenario::new(0.3, 0.7);
        let w1 = scenario_weights(&tri, mean).unwrap();
        let w2 = scenario_weights(&perm, mean).unwrap();
        // Same weight attaches to the same vertex independent of order.
        assert!((w1.p[1] - w2.p[0]).abs() < 1e-10);
        assert!((w1.p[2] - w2.p[1]).abs() < 1e-10);
        assert!((w1.p[0] - w2.p[2]).abs() < 1e-10);
    }

    #[test]
    fn half_planes_match_membership() {
        let o6 = outer_polytope(2.0, 6).unwrap();
        let hps = o6.half_planes().unwrap();
        for p in [(0.5, 0.5), (1.9, 0.1), (0.0, 2.0)] {
            let inside_hp = hps.iter().all(|((gx, gy), h)| gx * p.0 + gy * p.1 <= h + 1e-9);
            assert_eq!(inside_hp, o6.contains(p, 1e-9), "{p:?}");
        }
    }
}
