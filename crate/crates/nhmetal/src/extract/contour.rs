//! Marching-squares iso-contour extraction on (possibly periodic) 2D grids.
//!
//! Cells are classified by the sign of `value − iso` at their corners;
//! crossing points are placed by linear interpolation along cell edges and
//! chained into oriented polylines. Segments keep the negative region on
//! their left, so contours run counterclockwise around negative regions.
//! Saddle cells are disambiguated by the cell-center (corner-mean) sample.
//! On periodic axes the cells wrap, so torus contours close across the zone
//! boundary and their winding is recorded.

use super::PolyCurve;
use crate::grid::{FieldGrid, GridSpec, ScalarField};
use crate::momentum::Momentum;
use std::collections::HashMap;
use std::f64::consts::TAU;

pub fn contour_2d(grid: &FieldGrid, field: ScalarField, iso: f64) -> Vec<PolyCurve> {
    contour_from_values(&grid.spec, grid.field(field), iso)
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct EdgeKey {
    horiz: bool,
    i: usize,
    j: usize,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Tag {
    Exit,
    Entry,
}

/// Extracts iso-contours of a raw scalar lattice over a 2D grid spec.
pub fn contour_from_values(spec: &GridSpec, values: &[f64], iso: f64) -> Vec<PolyCurve> {
    assert_eq!(spec.grid_dim(), 2, "contour extraction needs a 2D grid");
    assert!(iso.is_finite());
    let (ax, ay) = (spec.axes[0], spec.axes[1]);
    let (nx, ny) = (ax.n, ay.n);
    let val = |i: usize, j: usize| values[i * ny + j] - iso;

    // node bookkeeping: one node per sign-change grid edge
    let mut node_ids: HashMap<EdgeKey, usize> = HashMap::new();
    let mut node_pos: Vec<Momentum> = Vec::new();
    let mut next_of: HashMap<usize, usize> = HashMap::new();
    let mut in_deg: HashMap<usize, usize> = HashMap::new();

    let mut node_at = |key: EdgeKey, pos: Momentum, node_pos: &mut Vec<Momentum>| -> usize {
        *node_ids.entry(key).or_insert_with(|| {
            node_pos.push(pos);
            node_pos.len() - 1
        })
    };

    for i in 0..ax.n_cells() {
        let ip = (i + 1) % nx;
        for j in 0..ay.n_cells() {
            let jp = (j + 1) % ny;
            // corners in counterclockwise walk order, with the edge that
            // follows each corner
            let corners = [val(i, j), val(ip, j), val(ip, jp), val(i, jp)];
            let edges = [
                EdgeKey { horiz: true, i, j },
                EdgeKey { horiz: false, i: ip, j },
                EdgeKey { horiz: true, i, j: jp },
                EdgeKey { horiz: false, i, j },
            ];
            let inside = [corners[0] < 0.0, corners[1] < 0.0, corners[2] < 0.0, corners[3] < 0.0];
            if inside.iter().all(|&b| b) || inside.iter().all(|&b| !b) {
                continue;
            }

            let mut crossings: Vec<(usize, Tag)> = Vec::with_capacity(4);
            for e in 0..4 {
                let a = e;
                let b = (e + 1) % 4;
                if inside[a] == inside[b] {
                    continue;
                }
                let tag = if inside[a] { Tag::Exit } else { Tag::Entry };
                let key = edges[e];
                // interpolate along the edge in its axis direction
                let (va, vb) = (corners[a], corners[b]);
                let t = va / (va - vb);
                // the walk traverses T and L edges against their axis, so
                // re-express t relative to the low-index sample of the edge
                let t_axis = if e == 2 || e == 3 { 1.0 - t } else { t };
                let pos = if key.horiz {
                    Momentum::new2(ax.sample(key.i) + t_axis * ax.step(), ay.sample(key.j))
                } else {
                    Momentum::new2(ax.sample(key.i), ay.sample(key.j) + t_axis * ay.step())
                };
                let id = node_at(key, pos, &mut node_pos);
                crossings.push((id, tag));
            }

            match crossings.len() {
                2 => {
                    let (from, to) = match (crossings[0].1, crossings[1].1) {
                        (Tag::Exit, Tag::Entry) => (crossings[0].0, crossings[1].0),
                        (Tag::Entry, Tag::Exit) => (crossings[1].0, crossings[0].0),
                        _ => unreachable!("transitions alternate around a cell"),
                    };
                    next_of.insert(from, to);
                    *in_deg.entry(to).or_insert(0) += 1;
                }
                4 => {
                    // saddle: center sample picks the pairing
                    let center = corners.iter().sum::<f64>() / 4.0;
                    for c in 0..4 {
                        if crossings[c].1 != Tag::Exit {
                            continue;
                        }
                        let partner = if center < 0.0 {
                            // connect to the next entry counterclockwise
                            (1..4).map(|s| (c + s) % 4).find(|&x| crossings[x].1 == Tag::Entry)
                        } else {
                            (1..4).map(|s| (c + 4 - s) % 4).find(|&x| crossings[x].1 == Tag::Entry)
                        }
                        .expect("saddle cell has two entries");
                        next_of.insert(crossings[c].0, crossings[partner].0);
                        *in_deg.entry(crossings[partner].0).or_insert(0) += 1;
                    }
                }
                _ => unreachable!("cells have 0, 2 or 4 sign-change edges"),
            }
        }
    }

    assemble_chains(node_pos, next_of, in_deg)
}

fn assemble_chains(
    node_pos: Vec<Momentum>,
    next_of: HashMap<usize, usize>,
    in_deg: HashMap<usize, usize>,
) -> Vec<PolyCurve> {
    let n = node_pos.len();
    let mut visited = vec![false; n];
    let mut curves = Vec::new();

    // open chains start at nodes without incoming segments
    let mut starts: Vec<usize> = (0..n)
        .filter(|id| in_deg.get(id).copied().unwrap_or(0) == 0 && next_of.contains_key(id))
        .collect();
    starts.sort_unstable();
    for s in starts {
        if !visited[s] {
            curves.push(walk_chain(s, &node_pos, &next_of, &mut visited));
        }
    }
    // everything else is a closed loop
    for s in 0..n {
        if !visited[s] && next_of.contains_key(&s) {
            curves.push(walk_chain(s, &node_pos, &next_of, &mut visited));
        }
    }
    curves
}

fn walk_chain(
    start: usize,
    node_pos: &[Momentum],
    next_of: &HashMap<usize, usize>,
    visited: &mut [bool],
) -> PolyCurve {
    let mut points = vec![node_pos[start]];
    visited[start] = true;
    let mut cur = start;
    let mut closed = false;
    loop {
        let Some(&nxt) = next_of.get(&cur) else {
            break;
        };
        let unwrapped = unwrap_step(points.last().unwrap(), &node_pos[nxt]);
        if nxt == start {
            points.push(unwrapped);
            closed = true;
            break;
        }
        if visited[nxt] {
            break;
        }
        points.push(unwrapped);
        visited[nxt] = true;
        cur = nxt;
    }

    let mut winding = [0i64; 3];
    if closed {
        let first = points[0];
        let last = *points.last().unwrap();
        for c in 0..2 {
            let w = (last.coords[c] - first.coords[c]) / TAU;
            winding[c] = w.round() as i64;
            debug_assert!((w - w.round()).abs() < 1e-6, "non-integral winding {w}");
        }
    }
    PolyCurve { points, closed, winding, residual_max: None }
}

/// Shifts `next` by multiples of 2π per axis so it continues `prev`.
fn unwrap_step(prev: &Momentum, next: &Momentum) -> Momentum {
    let mut out = *next;
    for c in 0..next.dim {
        out.coords[c] += TAU * ((prev.coords[c] - next.coords[c]) / TAU).round();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::AxisSpec;

    fn eval_lattice(spec: &GridSpec, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        (0..spec.n_points())
            .map(|idx| {
                let k = spec.momentum_at(idx);
                f(k.coords[0], k.coords[1])
            })
            .collect()
    }

    fn shoelace(curve: &PolyCurve) -> f64 {
        let mut area = 0.0;
        for w in curve.points.windows(2) {
            area += w[0].coords[0] * w[1].coords[1] - w[1].coords[0] * w[0].coords[1];
        }
        area / 2.0
    }

    #[test]
    fn constant_lattice_has_no_contours() {
        let spec = GridSpec::bz2(32);
        let values = vec![1.0; spec.n_points()];
        assert!(contour_from_values(&spec, &values, 0.0).is_empty());
    }

    #[test]
    fn circle_contour_is_closed_and_counterclockwise() {
        let spec = GridSpec::bz2(128);
        let values = eval_lattice(&spec, |x, y| x * x + y * y - 1.0);
        let curves = contour_from_values(&spec, &values, 0.0);
        assert_eq!(curves.len(), 1);
        let c = &curves[0];
        assert!(c.closed);
        assert_eq!(c.winding, [0, 0, 0]);
        // radius accuracy of linear interpolation on this grid
        for p in &c.points {
            let r = (p.coords[0].powi(2) + p.coords[1].powi(2)).sqrt();
            assert!((r - 1.0).abs() < 2e-3, "radius {r}");
        }
        // negative region (disk interior) on the left ⇒ positive area
        assert!(shoelace(c) > 0.0);
        assert!((shoelace(c) - std::f64::consts::PI).abs() < 0.01);
    }

    #[test]
    fn winding_contour_crosses_the_zone_seam() {
        // zero set of sin(y − 0.3): two horizontal lines winding around x
        let spec = GridSpec::bz2(64);
        let values = eval_lattice(&spec, |_x, y| (y - 0.3).sin());
        let curves = contour_from_values(&spec, &values, 0.0);
        assert_eq!(curves.len(), 2);
        for c in &curves {
            assert!(c.closed);
            assert_eq!(c.winding[0].abs(), 1, "winding {:?}", c.winding);
            assert_eq!(c.winding[1], 0);
        }
    }

    #[test]
    fn saddle_cells_split_consistently() {
        // x·y has a saddle at the origin; with a tiny positive offset the
        // contour splits into two hyperbola branches
        let spec = GridSpec {
            axes: vec![AxisSpec::linear(65, -1.0, 1.0), AxisSpec::linear(65, -1.0, 1.0)],
            slice: None,
        };
        let values = eval_lattice(&spec, |x, y| x * y + 1e-3);
        let curves = contour_from_values(&spec, &values, 0.0);
        // open curves ending on the patch boundary
        assert_eq!(curves.len(), 2);
        for c in &curves {
            assert!(!c.closed);
            for p in &c.points {
                assert!((p.coords[0] * p.coords[1] + 1e-3).abs() < 2e-3);
            }
        }
    }

    #[test]
    fn open_curves_on_nonperiodic_grids() {
        let spec = GridSpec {
            axes: vec![AxisSpec::linear(33, -1.0, 1.0), AxisSpec::linear(33, -1.0, 1.0)],
            slice: None,
        };
        let values = eval_lattice(&spec, |x, _y| x);
        let curves = contour_from_values(&spec, &values, 0.0);
        assert_eq!(curves.len(), 1);
        assert!(!curves[0].closed);
        // vertical line x = 0 spanning the patch
        assert!(curves[0].arclength() > 1.9);
    }
}
