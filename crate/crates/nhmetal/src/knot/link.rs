//! Linking numbers of closed polyline pairs, computed two independent ways
//! and cross-validated:
//!
//! * half the signed count of inter-component crossings in a generic planar
//!   projection, and
//! * the discretized Gauss double integral, evaluated exactly per segment
//!   pair as the signed solid angle of the spherical quadrilateral swept by
//!   the Gauss map (van Oosterom–Strackee).

use super::project::project;
use super::KnotError;
use crate::bloch::{cross, dot, norm3};
use crate::extract::PolyCurve;
use std::f64::consts::PI;

/// Signed solid angle of the spherical triangle with unit vertices a, b, c.
fn triangle_solid_angle(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    let numer = dot(a, &cross(b, c));
    let denom = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
    2.0 * numer.atan2(denom)
}

/// Gauss linking integral for two closed polylines, exact per segment pair.
pub fn gauss_linking_integral(c1: &PolyCurve, c2: &PolyCurve) -> f64 {
    let pts1 = &c1.points;
    let pts2 = &c2.points;
    let mut total = 0.0;
    for i in 0..pts1.len() - 1 {
        let p1 = pts1[i].coords;
        let p2 = pts1[i + 1].coords;
        for j in 0..pts2.len() - 1 {
            let q1 = pts2[j].coords;
            let q2 = pts2[j + 1].coords;
            // Gauss map corners of the parameter square, in orientation
            // (s along c1, t along c2)
            let u = |p: [f64; 3], q: [f64; 3]| -> [f64; 3] {
                let d = [q[0] - p[0], q[1] - p[1], q[2] - p[2]];
                let n = norm3(&d);
                [d[0] / n, d[1] / n, d[2] / n]
            };
            let e00 = u(p1, q1);
            let e10 = u(p2, q1);
            let e11 = u(p2, q2);
            let e01 = u(p1, q2);
            let omega = triangle_solid_angle(&e00, &e10, &e11)
                + triangle_solid_angle(&e00, &e11, &e01);
            total += omega;
        }
    }
    total / (4.0 * PI)
}

/// Linking number of two disjoint closed curves: the projection route and
/// the Gauss-integral route must agree after rounding.
pub fn linking_number(c1: &PolyCurve, c2: &PolyCurve, seed: u64) -> Result<i64, KnotError> {
    if !c1.closed || !c2.closed {
        return Err(KnotError::OpenCurve);
    }
    let diagram = project(
        &[c1.clone(), c2.clone()],
        [0.318, -0.562, 0.767],
        seed,
    )?;
    let comp_of = diagram.crossing_components();
    let mut signed: i64 = 0;
    for (c, &(over, under)) in comp_of.iter().enumerate() {
        if over != under {
            signed += diagram.signs[c] as i64;
        }
    }
    if signed % 2 != 0 {
        return Err(KnotError::MethodDisagreement {
            projection: signed as f64 / 2.0,
            gauss: f64::NAN,
        });
    }
    let from_projection = signed / 2;

    let gauss = gauss_linking_integral(c1, c2);
    let rounded = gauss.round();
    if (gauss - rounded).abs() > 0.2 || rounded as i64 != from_projection {
        return Err(KnotError::MethodDisagreement {
            projection: from_projection as f64,
            gauss,
        });
    }
    Ok(from_projection)
}

/// Pairwise linking matrix for a set of closed curves (diagonal zero).
pub fn linking_matrix(curves: &[PolyCurve], seed: u64) -> Result<Vec<Vec<i64>>, KnotError> {
    let n = curves.len();
    let mut m = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let lk = linking_number(&curves[i], &curves[j], seed.wrapping_add((i * n + j) as u64))?;
            m[i][j] = lk;
            m[j][i] = lk;
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::momentum::Momentum;
    use std::f64::consts::TAU;

    fn parametric_circle(
        n: usize,
        f: impl Fn(f64) -> [f64; 3],
    ) -> PolyCurve {
        let mut points: Vec<Momentum> = (0..n)
            .map(|i| {
                let t = i as f64 / n as f64 * TAU;
                let p = f(t);
                Momentum::new3(p[0], p[1], p[2])
            })
            .collect();
        points.push(points[0]);
        PolyCurve { points, closed: true, winding: [0; 3], residual_max: None }
    }

    /// The canonical Hopf pair: a unit circle in the xy-plane at the origin
    /// and a unit circle in the xz-plane centered at (1, 0, 0); they link
    /// exactly once.
    fn hopf_pair() -> (PolyCurve, PolyCurve) {
        let c1 = parametric_circle(96, |t| [t.cos(), t.sin(), 0.0]);
        let c2 = parametric_circle(96, |t| [1.0 + t.cos(), 0.0, t.sin()]);
        (c1, c2)
    }

    #[test]
    fn far_separated_circles_do_not_link() {
        let c1 = parametric_circle(64, |t| [t.cos(), t.sin(), 0.0]);
        let c2 = parametric_circle(64, |t| [8.0 + t.cos(), t.sin(), 0.0]);
        assert_eq!(linking_number(&c1, &c2, 5).unwrap(), 0);
        assert!(gauss_linking_integral(&c1, &c2).abs() < 1e-10);
    }

    #[test]
    fn hopf_pair_links_once() {
        let (c1, c2) = hopf_pair();
        let gauss = gauss_linking_integral(&c1, &c2);
        assert!((gauss.abs() - 1.0).abs() < 1e-9, "gauss {gauss}");
        let lk = linking_number(&c1, &c2, 17).unwrap();
        assert_eq!(lk.abs(), 1);
    }

    #[test]
    fn orientation_reversal_flips_the_sign() {
        let (c1, mut c2) = hopf_pair();
        let lk_forward = linking_number(&c1, &c2, 23).unwrap();
        c2.points.reverse();
        let lk_backward = linking_number(&c1, &c2, 23).unwrap();
        assert_eq!(lk_forward, -lk_backward);
    }

    #[test]
    fn gauss_integral_is_parametrization_invariant() {
        let (c1, c2) = hopf_pair();
        let dense = parametric_circle(257, |t| [t.cos(), t.sin(), 0.0]);
        let a = gauss_linking_integral(&c1, &c2);
        let b = gauss_linking_integral(&dense, &c2);
        assert!((a - b).abs() < 1e-9);
    }
}
