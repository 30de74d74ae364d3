//! Generic planar projection of closed space curves into knot diagrams.
//!
//! Curves are orthographically projected along a direction; crossings are
//! segment-pair intersections with over/under decided by depth. Genericity
//! is checked (no near-tangential intersections, no near-triple points, no
//! vertex grazing, no ambiguous depth); a violation triggers a retry with a
//! seeded perturbed direction.

use super::diagram::{KnotDiagram, Passage};
use super::KnotError;
use crate::extract::PolyCurve;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MAX_ATTEMPTS: usize = 20;

/// Relative genericity margins, scaled by the projected extent.
const PARAM_MARGIN: f64 = 1e-6;
const ANGLE_MARGIN: f64 = 1e-6;
const SEPARATION_MARGIN: f64 = 1e-7;
const DEPTH_MARGIN: f64 = 1e-9;

pub fn project(
    curves: &[PolyCurve],
    direction: [f64; 3],
    seed: u64,
) -> Result<KnotDiagram, KnotError> {
    for c in curves {
        if !c.closed {
            return Err(KnotError::OpenCurve);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dir = normalize(direction);
    for _ in 0..MAX_ATTEMPTS {
        match try_project(curves, dir) {
            Ok(d) => return Ok(d),
            Err(KnotError::NoGenericProjection(_)) => {
                let mut v = dir;
                for x in &mut v {
                    *x += rng.gen_range(-0.2..0.2);
                }
                dir = normalize(v);
            }
            Err(e) => return Err(e),
        }
    }
    Err(KnotError::NoGenericProjection(MAX_ATTEMPTS))
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

struct Projected {
    // per curve: 2D vertices + depth, closed (last vertex omitted)
    xy: Vec<Vec<[f64; 2]>>,
    depth: Vec<Vec<f64>>,
    extent: f64,
}

fn project_points(curves: &[PolyCurve], dir: [f64; 3]) -> Projected {
    // orthonormal frame (e1, e2, dir)
    let pick = if dir[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let e1 = normalize(crate::bloch::cross(&dir, &pick));
    let e2 = crate::bloch::cross(&dir, &e1);

    let mut xy = Vec::new();
    let mut depth = Vec::new();
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for c in curves {
        // drop the duplicated closing vertex
        let m = c.points.len() - 1;
        let mut cxy = Vec::with_capacity(m);
        let mut cd = Vec::with_capacity(m);
        for p in &c.points[..m] {
            let v = p.coords;
            let x = v[0] * e1[0] + v[1] * e1[1] + v[2] * e1[2];
            let y = v[0] * e2[0] + v[1] * e2[1] + v[2] * e2[2];
            let z = v[0] * dir[0] + v[1] * dir[1] + v[2] * dir[2];
            lo[0] = lo[0].min(x);
            lo[1] = lo[1].min(y);
            hi[0] = hi[0].max(x);
            hi[1] = hi[1].max(y);
            cxy.push([x, y]);
            cd.push(z);
        }
        xy.push(cxy);
        depth.push(cd);
    }
    let extent = ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2)).sqrt().max(1e-12);
    Projected { xy, depth, extent }
}

struct CrossingEvent {
    over_curve: usize,
    over_pos: f64,
    under_curve: usize,
    under_pos: f64,
    sign: i8,
    point: [f64; 2],
}

fn try_project(curves: &[PolyCurve], dir: [f64; 3]) -> Result<KnotDiagram, KnotError> {
    let proj = project_points(curves, dir);
    let violation = || Err(KnotError::NoGenericProjection(1));

    let mut events: Vec<CrossingEvent> = Vec::new();
    for a in 0..curves.len() {
        for b in a..curves.len() {
            let na = proj.xy[a].len();
            let nb = proj.xy[b].len();
            for i in 0..na {
                let jstart = if a == b { i + 1 } else { 0 };
                for j in jstart..nb {
                    if a == b {
                        // skip adjacent segments of the same curve
                        let adjacent = j == i + 1 || (i == 0 && j == na - 1);
                        if adjacent {
                            continue;
                        }
                    }
                    let p = proj.xy[a][i];
                    let p2 = proj.xy[a][(i + 1) % na];
                    let q = proj.xy[b][j];
                    let q2 = proj.xy[b][(j + 1) % nb];
                    let r = [p2[0] - p[0], p2[1] - p[1]];
                    let w = [q2[0] - q[0], q2[1] - q[1]];
                    let denom = r[0] * w[1] - r[1] * w[0];
                    let len_r = (r[0] * r[0] + r[1] * r[1]).sqrt();
                    let len_w = (w[0] * w[0] + w[1] * w[1]).sqrt();
                    if len_r == 0.0 || len_w == 0.0 {
                        continue;
                    }
                    let qp = [q[0] - p[0], q[1] - p[1]];
                    if denom.abs() < ANGLE_MARGIN * len_r * len_w {
                        // (near-)parallel: a violation only when the segments
                        // actually overlap sideways
                        let side = (qp[0] * r[1] - qp[1] * r[0]).abs() / len_r;
                        if side < SEPARATION_MARGIN * proj.extent {
                            let u0 = (qp[0] * r[0] + qp[1] * r[1]) / len_r;
                            let u1 = u0 + (w[0] * r[0] + w[1] * r[1]) / len_r;
                            let (lo_u, hi_u) = (u0.min(u1), u0.max(u1));
                            if hi_u >= 0.0 && lo_u <= len_r {
                                return violation();
                            }
                        }
                        continue;
                    }
                    let t = (qp[0] * w[1] - qp[1] * w[0]) / denom;
                    let s = (qp[0] * r[1] - qp[1] * r[0]) / denom;
                    if !(0.0..=1.0).contains(&t) || !(0.0..=1.0).contains(&s) {
                        continue;
                    }
                    // vertex grazing
                    if t < PARAM_MARGIN
                        || t > 1.0 - PARAM_MARGIN
                        || s < PARAM_MARGIN
                        || s > 1.0 - PARAM_MARGIN
                    {
                        return violation();
                    }
                    let za = proj.depth[a][i]
                        + t * (proj.depth[a][(i + 1) % na] - proj.depth[a][i]);
                    let zb = proj.depth[b][j]
                        + s * (proj.depth[b][(j + 1) % nb] - proj.depth[b][j]);
                    if (za - zb).abs() < DEPTH_MARGIN * proj.extent {
                        return violation();
                    }
                    let point = [p[0] + t * r[0], p[1] + t * r[1]];
                    let (over_curve, over_pos, under_curve, under_pos, d_over, d_under) =
                        if za > zb {
                            (a, i as f64 + t, b, j as f64 + s, r, w)
                        } else {
                            (b, j as f64 + s, a, i as f64 + t, w, r)
                        };
                    let cross = d_over[0] * d_under[1] - d_over[1] * d_under[0];
                    events.push(CrossingEvent {
                        over_curve,
                        over_pos,
                        under_curve,
                        under_pos,
                        sign: if cross > 0.0 { 1 } else { -1 },
                        point,
                    });
                }
            }
        }
    }

    // near-triple points (or coincident crossings)
    for i in 0..events.len() {
        for j in i + 1..events.len() {
            let d = ((events[i].point[0] - events[j].point[0]).powi(2)
                + (events[i].point[1] - events[j].point[1]).powi(2))
            .sqrt();
            if d < SEPARATION_MARGIN * proj.extent {
                return violation();
            }
        }
    }

    // assemble passages per curve, ordered along the curve parameter
    let signs: Vec<i8> = events.iter().map(|e| e.sign).collect();
    let mut per_curve: Vec<Vec<(f64, Passage)>> = vec![Vec::new(); curves.len()];
    for (id, e) in events.iter().enumerate() {
        per_curve[e.over_curve].push((e.over_pos, Passage { crossing: id, over: true }));
        per_curve[e.under_curve].push((e.under_pos, Passage { crossing: id, over: false }));
    }
    let components = per_curve
        .into_iter()
        .map(|mut v| {
            v.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
            v.into_iter().map(|(_, p)| p).collect()
        })
        .collect();

    let d = KnotDiagram { signs, components };
    d.validate().expect("projection produced a malformed diagram");
    Ok(d)
}
