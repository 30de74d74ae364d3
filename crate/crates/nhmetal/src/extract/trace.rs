//! Predictor–corrector continuation of 3D exceptional lines.
//!
//! The exceptional line is the transversal intersection of the two surfaces
//! `Re E² = 0` and `Im E² = 0`, so its tangent is `∇Re E² × ∇Im E²`. Each
//! step predicts along the unit tangent and corrects with a damped Newton
//! solve of the square system `(Re E², Im E², t·(k − k_pred)) = 0`, which
//! pins the corrector to the plane orthogonal to the tangent. The step
//! length adapts to a target turning angle. Curves are traced in unwrapped
//! coordinates so torus winding is explicit.

use super::newton::{refine_newton, residual, seed_search_3d, sorted_dedup, NewtonParams};
use super::{ElSet, ExtractError, PolyCurve};
use crate::bloch::{cross, discriminant, discriminant_grad, dot, norm3, BlochModel};
use crate::grid::GridSpec;
use crate::momentum::Momentum;
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy)]
pub struct TraceParams {
    /// Corrector residual target (relative, scaled by `max(1, ‖d‖²)`).
    pub tol: f64,
    pub h_min: f64,
    pub h_max: f64,
    /// Target turning angle per step (radians).
    pub turn_angle: f64,
    /// Endpoint tolerance for declaring closure.
    pub closure_tol: f64,
    pub max_points: usize,
}

impl Default for TraceParams {
    fn default() -> Self {
        TraceParams {
            tol: 1e-10,
            h_min: 1e-3,
            h_max: 5e-2,
            turn_angle: 5.0_f64.to_radians(),
            closure_tol: 1e-6,
            max_points: 20_000,
        }
    }
}

/// Unit tangent of the exceptional line at `k`.
fn tangent<M: BlochModel>(model: &M, k: &Momentum) -> Result<[f64; 3], ExtractError> {
    let d = model.bloch(k);
    let g = model.grad(k);
    let cg = discriminant_grad(&d, &g, 3);
    let g_re = [cg[0].re, cg[1].re, cg[2].re];
    let g_im = [cg[0].im, cg[1].im, cg[2].im];
    let t = cross(&g_re, &g_im);
    let nt = norm3(&t);
    if nt <= 1e-8 * (norm3(&g_re) * norm3(&g_im)).max(1e-300) {
        return Err(ExtractError::TangentDegenerate);
    }
    Ok([t[0] / nt, t[1] / nt, t[2] / nt])
}

/// One corrector solve: Newton on the square system that holds both field
/// constraints and the hyperplane through `k_pred` orthogonal to `t`.
fn correct<M: BlochModel>(
    model: &M,
    k_pred: &Momentum,
    t: &[f64; 3],
    params: &TraceParams,
) -> Option<Momentum> {
    let mut k = *k_pred;
    for _ in 0..30 {
        let d = model.bloch(&k);
        let disc = discriminant(&d);
        let scale = d.norm_sqr().max(1.0);
        let mut plane = 0.0;
        for c in 0..3 {
            plane += t[c] * (k.coords[c] - k_pred.coords[c]);
        }
        if disc.re.abs().max(disc.im.abs()) <= params.tol * scale && plane.abs() <= 1e-12 {
            return Some(k);
        }

        let g = model.grad(&k);
        let cg = discriminant_grad(&d, &g, 3);
        let jac = [
            [cg[0].re, cg[1].re, cg[2].re],
            [cg[0].im, cg[1].im, cg[2].im],
            *t,
        ];
        let rhs = [-disc.re, -disc.im, -plane];
        let delta = solve3(&jac, &rhs)?;

        // damped: accept the longest step that reduces the field residual
        let res0 = disc.re.abs().max(disc.im.abs()) / scale;
        let mut lambda = 1.0;
        let mut moved = false;
        for _ in 0..20 {
            let trial = k.add_scaled(&delta, lambda);
            let dt = model.bloch(&trial);
            let dc = discriminant(&dt);
            let rt = dc.re.abs().max(dc.im.abs()) / dt.norm_sqr().max(1.0);
            if rt < res0 || res0 == 0.0 {
                k = trial;
                moved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !moved {
            return None;
        }
    }
    let final_res = residual(model, &k);
    (final_res <= params.tol).then_some(k)
}

fn solve3(a: &[[f64; 3]; 3], b: &[f64; 3]) -> Option<[f64; 3]> {
    // Cramer's rule; the system is 3×3 and well scaled after normalization
    let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    if det.abs() < 1e-300 || !det.is_finite() {
        return None;
    }
    let mut x = [0.0; 3];
    for col in 0..3 {
        let mut m = *a;
        for row in 0..3 {
            m[row][col] = b[row];
        }
        let dc = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        x[col] = dc / det;
    }
    Some(x)
}

/// Traces the closed exceptional line through `seed`.
pub fn trace_el_3d<M: BlochModel>(
    model: &M,
    seed: &Momentum,
    params: &TraceParams,
) -> Result<PolyCurve, ExtractError> {
    assert_eq!(model.dim(), 3);
    let newton = NewtonParams { tol: params.tol, ..NewtonParams::default() };
    let start = refine_newton(model, seed, &newton)?;
    let t_start = tangent(model, &start)?;

    let mut points = vec![start];
    let mut residual_max = residual(model, &start);
    let mut k = start;
    let mut t = t_start;
    let mut h = 0.5 * params.h_max;
    let mut arclength = 0.0;
    let min_arclength_before_closure = (4.0 * params.h_max).max(0.2);

    while points.len() < params.max_points {
        // predictor + corrector, shrinking h on failure or sharp turns
        let (k_new, t_new) = loop {
            let k_pred = k.add_scaled(&t, h);
            let corrected = correct(model, &k_pred, &t, params);
            if let Some(kc) = corrected {
                match tangent(model, &kc) {
                    Ok(mut tc) => {
                        if dot(&tc, &t) < 0.0 {
                            for c in &mut tc {
                                *c = -*c;
                            }
                        }
                        let turn = dot(&tc, &t).clamp(-1.0, 1.0).acos();
                        if turn <= 2.0 * params.turn_angle || h <= params.h_min {
                            break (kc, tc);
                        }
                    }
                    Err(ExtractError::TangentDegenerate) if h > params.h_min => {}
                    Err(e) => return Err(e),
                }
            }
            if h <= params.h_min {
                return Err(ExtractError::NoConvergence(30));
            }
            h = (0.5 * h).max(params.h_min);
        };

        let step_len = k.dist(&k_new);
        arclength += step_len;
        residual_max = residual_max.max(residual(model, &k_new));
        points.push(k_new);

        // grow the step again when the curve is flat
        let turn = dot(&t_new, &t).clamp(-1.0, 1.0).acos();
        if turn < 0.5 * params.turn_angle {
            h = (1.5 * h).min(params.h_max);
        }
        k = k_new;
        t = t_new;

        // closure: back at the start with an aligned tangent
        if arclength >= min_arclength_before_closure
            && k.torus_dist(&start) <= 1.1 * h.max(10.0 * params.closure_tol)
            && dot(&t, &t_start) > 0.8
        {
            let mut closing = start;
            let mut winding = [0i64; 3];
            for c in 0..3 {
                let w = ((k.coords[c] - start.coords[c]) / TAU).round();
                winding[c] = w as i64;
                closing.coords[c] += TAU * w;
            }
            points.push(closing);
            return Ok(PolyCurve {
                points,
                closed: true,
                winding,
                residual_max: Some(residual_max),
            });
        }
    }
    Err(ExtractError::BudgetExceeded(params.max_points))
}

/// Complete 3D extraction: seed search, then one trace per curve component.
/// Seeds landing on an already-traced curve are consumed rather than traced
/// again, so the number of returned curves is the number of components
/// resolved by the grid.
pub fn extract_el_set_3d<M: BlochModel>(
    model: &M,
    spec: &GridSpec,
    params: &TraceParams,
) -> Result<ElSet, ExtractError> {
    let seeds = seed_search_3d(model, spec, params.tol);
    let consume_dist = spec.cell_diag();
    let mut curves: Vec<PolyCurve> = Vec::new();
    for seed in &seeds {
        if curves.iter().any(|c| c.vertex_dist(seed) <= consume_dist) {
            continue;
        }
        curves.push(trace_el_3d(model, seed, params)?);
    }
    // the residual floor over the seed grid certifies empty results
    let grid_floor = if curves.is_empty() {
        (0..spec.n_points())
            .map(|i| {
                let d = model.bloch(&spec.momentum_at(i));
                let disc = discriminant(&d);
                disc.re.abs().max(disc.im.abs())
            })
            .fold(f64::INFINITY, f64::min)
    } else {
        0.0
    };
    Ok(ElSet {
        curves,
        isolated_points: Vec::new(),
        degeneracy_points: Vec::new(),
        grid_floor,
    })
}

/// Intersections of a traced curve with an axis-aligned plane, linearly
/// interpolated between bracketing vertices and canonicalized.
pub fn plane_crossings(curve: &PolyCurve, axis: usize, value: f64) -> Vec<Momentum> {
    let mut out = Vec::new();
    for w in curve.points.windows(2) {
        // compare against all periodic images of the plane that the segment
        // can reach (coordinates are unwrapped)
        let (a, b) = (w[0].coords[axis], w[1].coords[axis]);
        let lo = a.min(b);
        let hi = a.max(b);
        let mut plane = value + TAU * ((lo - value) / TAU).floor();
        while plane <= hi {
            if plane >= lo && (b - a).abs() > 0.0 {
                let t = (plane - a) / (b - a);
                if (0.0..=1.0).contains(&t) {
                    let mut p = w[0];
                    for c in 0..3 {
                        p.coords[c] += t * (w[1].coords[c] - w[0].coords[c]);
                    }
                    out.push(p.canonical());
                }
            }
            plane += TAU;
        }
    }
    sorted_dedup(out, 1e-9)
}
