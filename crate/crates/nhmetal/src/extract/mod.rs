//! Exceptional-point and exceptional-line extraction.
//!
//! 2D: marching-squares contours of the spectral fields plus Gauss–Newton
//! refinement of candidate roots. 3D: seed search over sign-change cells
//! followed by predictor–corrector continuation of the curve where
//! `Re(E²) = Im(E²) = 0`. The Fermi classifier labels grid cells by the
//! sign structure of the discriminant.

mod contour;
mod fermi;
mod newton;
mod trace;

pub use contour::{contour_2d, contour_from_values};
pub use fermi::{fermi_classify, CellLabel, FermiClassification, FermiDefinition};
pub use newton::{
    find_ep_2d_generic, refine_newton, residual, seed_search_3d, sorted_dedup, NewtonParams,
    VANISHING_D_TOL,
};
pub use trace::{extract_el_set_3d, plane_crossings, trace_el_3d, TraceParams};

use crate::momentum::Momentum;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExtractError {
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
    #[error("degenerate tangent: the two zero surfaces meet non-transversally")]
    TangentDegenerate,
    #[error("point budget {0} exceeded before the curve closed")]
    BudgetExceeded(usize),
}

/// An ordered polyline on the Brillouin torus, stored in unwrapped
/// coordinates so curves that wind around the zone stay continuous.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolyCurve {
    pub points: Vec<Momentum>,
    pub closed: bool,
    /// Net winding around each torus axis; for closed curves the last point
    /// equals the first shifted by `2π · winding`.
    pub winding: [i64; 3],
    /// Largest scaled EP residual along the curve, when the curve has been
    /// checked against a model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_max: Option<f64>,
}

impl PolyCurve {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Polyline arclength in unwrapped coordinates.
    pub fn arclength(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].dist(&w[1])).sum()
    }

    /// Shortest torus distance from `k` to the curve's vertices.
    pub fn vertex_dist(&self, k: &Momentum) -> f64 {
        self.points
            .iter()
            .map(|p| p.torus_dist(k))
            .fold(f64::INFINITY, f64::min)
    }

    /// Douglas–Peucker simplification with the given tolerance. Closed
    /// curves are split at the point farthest from the starting vertex so
    /// the recursion sees two open halves; the closing vertex is preserved.
    pub fn simplify(&self, tol: f64) -> PolyCurve {
        let n = self.points.len();
        if n <= 4 {
            return self.clone();
        }
        let pts = &self.points;
        let keep = if self.closed {
            // last point duplicates the first (mod winding); anchor on the
            // farthest point from the start
            let far = (1..n - 1)
                .max_by(|&a, &b| {
                    pts[0].dist(&pts[a]).partial_cmp(&pts[0].dist(&pts[b])).unwrap()
                })
                .unwrap();
            let mut keep = vec![false; n];
            keep[0] = true;
            keep[far] = true;
            keep[n - 1] = true;
            dp_mark(pts, 0, far, tol, &mut keep);
            dp_mark(pts, far, n - 1, tol, &mut keep);
            keep
        } else {
            let mut keep = vec![false; n];
            keep[0] = true;
            keep[n - 1] = true;
            dp_mark(pts, 0, n - 1, tol, &mut keep);
            keep
        };
        let points: Vec<Momentum> =
            pts.iter().zip(&keep).filter(|(_, &k)| k).map(|(p, _)| *p).collect();
        PolyCurve {
            points,
            closed: self.closed,
            winding: self.winding,
            residual_max: self.residual_max,
        }
    }
}

fn dp_mark(pts: &[Momentum], lo: usize, hi: usize, tol: f64, keep: &mut [bool]) {
    if hi <= lo + 1 {
        return;
    }
    let a = &pts[lo];
    let b = &pts[hi];
    let mut worst = 0.0;
    let mut worst_i = lo;
    for i in lo + 1..hi {
        let d = point_segment_dist(&pts[i], a, b);
        if d > worst {
            worst = d;
            worst_i = i;
        }
    }
    if worst > tol {
        keep[worst_i] = true;
        dp_mark(pts, lo, worst_i, tol, keep);
        dp_mark(pts, worst_i, hi, tol, keep);
    }
}

fn point_segment_dist(p: &Momentum, a: &Momentum, b: &Momentum) -> f64 {
    let dim = p.dim;
    let mut ab = [0.0; 3];
    let mut ap = [0.0; 3];
    for c in 0..dim {
        ab[c] = b.coords[c] - a.coords[c];
        ap[c] = p.coords[c] - a.coords[c];
    }
    let denom: f64 = ab.iter().map(|x| x * x).sum();
    let t = if denom == 0.0 {
        0.0
    } else {
        (ab.iter().zip(&ap).map(|(x, y)| x * y).sum::<f64>() / denom).clamp(0.0, 1.0)
    };
    let mut s = 0.0;
    for c in 0..dim {
        let d = ap[c] - t * ab[c];
        s += d * d;
    }
    s.sqrt()
}

/// Everything found in one extraction pass.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ElSet {
    pub curves: Vec<PolyCurve>,
    pub isolated_points: Vec<Momentum>,
    /// Roots where the Bloch vector itself vanishes. These are spectral
    /// degeneracies but not exceptional points (the EP predicate requires
    /// non-vanishing `d`), so they are reported separately.
    pub degeneracy_points: Vec<Momentum>,
    /// `min_k max(|Re E²|, |Im E²|)` over the scanned samples; a nonzero
    /// floor certifies the absence of exceptional points on the grid.
    pub grid_floor: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplify_keeps_endpoints_and_shape() {
        let points: Vec<Momentum> = (0..200)
            .map(|i| {
                let t = i as f64 / 199.0 * std::f64::consts::TAU;
                Momentum::new3(t.cos(), t.sin(), 0.0)
            })
            .collect();
        let curve = PolyCurve { points, closed: false, winding: [0; 3], residual_max: None };
        let simple = curve.simplify(0.01);
        assert!(simple.len() < 60, "expected strong reduction, got {}", simple.len());
        assert_eq!(simple.points[0], curve.points[0]);
        assert_eq!(simple.points.last(), curve.points.last());
        // every original vertex stays close to the simplified polyline
        for p in &curve.points {
            let d = simple
                .points
                .windows(2)
                .map(|w| point_segment_dist(p, &w[0], &w[1]))
                .fold(f64::INFINITY, f64::min);
            assert!(d <= 0.011, "vertex drifted {d}");
        }
    }
}
