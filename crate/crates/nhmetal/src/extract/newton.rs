//! Gauss–Newton refinement of exceptional-point candidates and grid-based
//! seed searches in 2D and 3D.
//!
//! The root system is `F(k) = (Re E²(k), Im E²(k))`. Steps are minimal-norm
//! Gauss–Newton, `δ = −Jᵀ(JJᵀ)⁺F`, with the 2×2 normal matrix pseudo-
//! inverted through its eigenvalues. Rank deficiency is expected, not an
//! error: for symmetric models the Im row vanishes identically, and in 3D
//! the system is underdetermined along the curve tangent.

use super::{ElSet, ExtractError};
use crate::bloch::{discriminant, discriminant_grad, is_exceptional, BlochModel};
use crate::grid::GridSpec;
use crate::momentum::Momentum;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy)]
pub struct NewtonParams {
    /// Relative residual target, scaled by `max(1, ‖d‖²)`.
    pub tol: f64,
    pub max_iter: usize,
    /// Cap on a single step length (radians).
    pub max_step: f64,
}

impl Default for NewtonParams {
    fn default() -> Self {
        NewtonParams { tol: 1e-10, max_iter: 50, max_step: 0.5 }
    }
}

/// Scaled EP residual `max(|Re E²|, |Im E²|) / max(1, ‖d‖²)` at `k`.
pub fn residual<M: BlochModel>(model: &M, k: &Momentum) -> f64 {
    let d = model.bloch(k);
    let disc = discriminant(&d);
    disc.re.abs().max(disc.im.abs()) / d.norm_sqr().max(1.0)
}

/// Minimal-norm Gauss–Newton step for `F + J δ = 0`.
fn gn_step(g_re: &[f64; 3], g_im: &[f64; 3], f: (f64, f64), dim: usize) -> [f64; 3] {
    let dotn = |a: &[f64; 3], b: &[f64; 3]| -> f64 {
        a.iter().zip(b).take(dim).map(|(x, y)| x * y).sum()
    };
    let a = dotn(g_re, g_re);
    let b = dotn(g_re, g_im);
    let c = dotn(g_im, g_im);

    // eigen-decomposition of the symmetric 2×2 normal matrix
    let mid = 0.5 * (a + c);
    let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let l1 = mid + rad;
    let l2 = mid - rad;
    let (v1, v2) = if b.abs() > 1e-300 {
        let v1 = norm2d([b, l1 - a]);
        (v1, [-v1[1], v1[0]])
    } else if a >= c {
        ([1.0, 0.0], [0.0, 1.0])
    } else {
        ([0.0, 1.0], [1.0, 0.0])
    };

    let cut = 1e-12 * l1.max(1e-300);
    let mut y = [0.0f64; 2];
    for (l, v) in [(l1, v1), (l2, v2)] {
        if l > cut {
            let proj = (v[0] * f.0 + v[1] * f.1) / l;
            y[0] += proj * v[0];
            y[1] += proj * v[1];
        }
    }

    let mut delta = [0.0; 3];
    for ax in 0..dim {
        delta[ax] = -(g_re[ax] * y[0] + g_im[ax] * y[1]);
    }
    delta
}

fn norm2d(v: [f64; 2]) -> [f64; 2] {
    let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
    [v[0] / n, v[1] / n]
}

/// Refines `k0` onto the zero set of `F`. Returns the input unchanged when
/// it already satisfies the tolerance. The result is post-checked: a point
/// that fails the residual test is never returned as a root.
pub fn refine_newton<M: BlochModel>(
    model: &M,
    k0: &Momentum,
    params: &NewtonParams,
) -> Result<Momentum, ExtractError> {
    let mut k = *k0;
    for _ in 0..params.max_iter {
        let res = residual(model, &k);
        if res <= params.tol {
            return Ok(k);
        }
        let d = model.bloch(&k);
        let g = model.grad(&k);
        let cg = discriminant_grad(&d, &g, k.dim);
        let g_re = [cg[0].re, cg[1].re, cg[2].re];
        let g_im = [cg[0].im, cg[1].im, cg[2].im];
        let disc = discriminant(&d);
        let mut delta = gn_step(&g_re, &g_im, (disc.re, disc.im), k.dim);

        let norm: f64 = delta.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(ExtractError::NoConvergence(params.max_iter));
        }
        if norm > params.max_step {
            for x in &mut delta {
                *x *= params.max_step / norm;
            }
        }

        // damped update: halve until the residual decreases
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..25 {
            let trial = k.add_scaled(&delta, lambda);
            if residual(model, &trial) < res {
                k = trial;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(ExtractError::NoConvergence(params.max_iter));
        }
    }
    if residual(model, &k) <= params.tol {
        Ok(k)
    } else {
        Err(ExtractError::NoConvergence(params.max_iter))
    }
}

/// `‖d‖²` threshold below which a converged root is reported as a
/// vanishing-`d` degeneracy rather than an exceptional point.
pub const VANISHING_D_TOL: f64 = 1e-8;

/// Relative size under which a whole lattice of `Im E²` values counts as
/// identically zero (symmetric models), satisfying the Im constraint over
/// every cell.
const IM_NEGLIGIBLE: f64 = 1e-12;

/// Threshold for seeding at local minima of the scaled residual, catching
/// tangential zeros that produce no sign change.
const LOCAL_MIN_SEED: f64 = 5e-2;

struct Lattice {
    re: Vec<f64>,
    im: Vec<f64>,
    scale: Vec<f64>,
    floor: f64,
}

fn eval_lattice<M: BlochModel>(model: &M, spec: &GridSpec) -> Lattice {
    let n = spec.n_points();
    let rows: Vec<(f64, f64, f64)> = (0..n)
        .into_par_iter()
        .map(|idx| {
            let k = spec.momentum_at(idx);
            let d = model.bloch(&k);
            let disc = discriminant(&d);
            (disc.re, disc.im, d.norm_sqr().max(1.0))
        })
        .collect();
    let mut lat = Lattice {
        re: Vec::with_capacity(n),
        im: Vec::with_capacity(n),
        scale: Vec::with_capacity(n),
        floor: f64::INFINITY,
    };
    for (re, im, s) in rows {
        lat.floor = lat.floor.min(re.abs().max(im.abs()));
        lat.re.push(re);
        lat.im.push(im);
        lat.scale.push(s);
    }
    lat
}

/// Does a set of corner values admit a zero: either a sign change, or a
/// value already at tolerance?
fn active(values: &[f64], tol_abs: f64) -> bool {
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (min < 0.0 && max > 0.0) || values.iter().any(|v| v.abs() <= tol_abs)
}

/// Generic 2D exceptional-point search: Newton seeded at every cell where
/// both constraints admit a zero, plus local minima of the scaled residual
/// (which catch tangential zeros). Converged roots are deduplicated and
/// classified; roots with vanishing `d` are reported separately.
pub fn find_ep_2d_generic<M: BlochModel>(model: &M, spec: &GridSpec, tol: f64) -> ElSet {
    assert_eq!(spec.grid_dim(), 2);
    let (nx, ny) = (spec.axes[0].n, spec.axes[1].n);
    let lat = eval_lattice(model, spec);

    let all_im_negligible = lat
        .im
        .iter()
        .zip(&lat.scale)
        .all(|(im, s)| im.abs() <= IM_NEGLIGIBLE * s);

    let mut seeds: Vec<Momentum> = Vec::new();

    for i in 0..spec.axes[0].n_cells() {
        let ip = (i + 1) % nx;
        for j in 0..spec.axes[1].n_cells() {
            let jp = (j + 1) % ny;
            let ids = [i * ny + j, ip * ny + j, ip * ny + jp, i * ny + jp];
            let s_cell = ids.iter().map(|&x| lat.scale[x]).fold(1.0f64, f64::max);
            let re = ids.map(|x| lat.re[x]);
            let im = ids.map(|x| lat.im[x]);
            let im_ok = all_im_negligible || active(&im, tol * s_cell);
            if active(&re, tol * s_cell) && im_ok {
                let kx = spec.axes[0].sample(i) + 0.5 * spec.axes[0].step();
                let ky = spec.axes[1].sample(j) + 0.5 * spec.axes[1].step();
                seeds.push(Momentum::new2(kx, ky));
            }
        }
    }

    // local minima of the scaled residual (8-neighborhood, periodic)
    for i in 0..nx {
        for j in 0..ny {
            let idx = i * ny + j;
            let r = lat.re[idx].abs().max(lat.im[idx].abs()) / lat.scale[idx];
            if r > LOCAL_MIN_SEED {
                continue;
            }
            let mut is_min = true;
            'nb: for di in [-1i64, 0, 1] {
                for dj in [-1i64, 0, 1] {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let ni = (i as i64 + di).rem_euclid(nx as i64) as usize;
                    let nj = (j as i64 + dj).rem_euclid(ny as i64) as usize;
                    let nidx = ni * ny + nj;
                    let rn = lat.re[nidx].abs().max(lat.im[nidx].abs()) / lat.scale[nidx];
                    if rn < r {
                        is_min = false;
                        break 'nb;
                    }
                }
            }
            if is_min {
                seeds.push(spec.momentum_at(idx));
            }
        }
    }

    let params = NewtonParams { tol, ..NewtonParams::default() };
    let roots: Vec<Momentum> = seeds
        .par_iter()
        .filter_map(|s| refine_newton(model, s, &params).ok())
        .map(|k| k.canonical())
        .collect();

    let merge_tol = 0.5 * spec.cell_diag();
    let mut isolated = Vec::new();
    let mut degenerate = Vec::new();
    for k in sorted_dedup(roots, merge_tol) {
        let d = model.bloch(&k);
        if d.norm_sqr() <= VANISHING_D_TOL {
            degenerate.push(k);
        } else if is_exceptional(&d, tol) {
            isolated.push(k);
        }
    }

    ElSet {
        curves: Vec::new(),
        isolated_points: isolated,
        degeneracy_points: degenerate,
        grid_floor: lat.floor,
    }
}

/// Deterministic dedup: sort lexicographically, then keep points farther
/// than `merge_tol` (torus metric) from everything already kept.
pub fn sorted_dedup(mut points: Vec<Momentum>, merge_tol: f64) -> Vec<Momentum> {
    points.sort_by(|a, b| {
        a.coords
            .iter()
            .zip(&b.coords)
            .find_map(|(x, y)| x.partial_cmp(y).filter(|o| o.is_ne()))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut kept: Vec<Momentum> = Vec::new();
    for p in points {
        if kept.iter().all(|q| q.torus_dist(&p) > merge_tol) {
            kept.push(p);
        }
    }
    kept
}

/// Scans a 3D grid for cells where both `Re E²` and `Im E²` change sign,
/// clusters them by face adjacency, and refines one seed per cluster.
pub fn seed_search_3d<M: BlochModel>(model: &M, spec: &GridSpec, tol: f64) -> Vec<Momentum> {
    assert_eq!(spec.grid_dim(), 3);
    let ns = [spec.axes[0].n, spec.axes[1].n, spec.axes[2].n];
    let lat = eval_lattice(model, spec);
    let idx3 = |i: usize, j: usize, l: usize| (i * ns[1] + j) * ns[2] + l;

    let cells = [
        spec.axes[0].n_cells(),
        spec.axes[1].n_cells(),
        spec.axes[2].n_cells(),
    ];
    let cell_idx = |i: usize, j: usize, l: usize| (i * cells[1] + j) * cells[2] + l;
    let n_cells = cells[0] * cells[1] * cells[2];

    let mut flagged = vec![false; n_cells];
    for i in 0..cells[0] {
        let ip = (i + 1) % ns[0];
        for j in 0..cells[1] {
            let jp = (j + 1) % ns[1];
            for l in 0..cells[2] {
                let lp = (l + 1) % ns[2];
                let corners = [
                    idx3(i, j, l),
                    idx3(ip, j, l),
                    idx3(i, jp, l),
                    idx3(ip, jp, l),
                    idx3(i, j, lp),
                    idx3(ip, j, lp),
                    idx3(i, jp, lp),
                    idx3(ip, jp, lp),
                ];
                let s_cell = corners.iter().map(|&x| lat.scale[x]).fold(1.0f64, f64::max);
                let re = corners.map(|x| lat.re[x]);
                let im = corners.map(|x| lat.im[x]);
                if active(&re, tol * s_cell) && active(&im, tol * s_cell) {
                    flagged[cell_idx(i, j, l)] = true;
                }
            }
        }
    }

    // union-find over face-adjacent flagged cells
    let mut parent: Vec<usize> = (0..n_cells).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            parent[r] = parent[parent[r]];
            r = parent[r];
        }
        r
    }
    for i in 0..cells[0] {
        for j in 0..cells[1] {
            for l in 0..cells[2] {
                let c = cell_idx(i, j, l);
                if !flagged[c] {
                    continue;
                }
                let neighbors = [
                    cell_idx((i + 1) % cells[0], j, l),
                    cell_idx(i, (j + 1) % cells[1], l),
                    cell_idx(i, j, (l + 1) % cells[2]),
                ];
                for nb in neighbors {
                    if flagged[nb] {
                        let (ra, rb) = (find(&mut parent, c), find(&mut parent, nb));
                        if ra != rb {
                            parent[ra.max(rb)] = ra.min(rb);
                        }
                    }
                }
            }
        }
    }

    let mut clusters: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for c in 0..n_cells {
        if flagged[c] {
            let root = find(&mut parent, c);
            clusters.entry(root).or_default().push(c);
        }
    }

    let params = NewtonParams { tol, ..NewtonParams::default() };
    let cluster_list: Vec<Vec<usize>> = clusters.into_values().collect();
    let mut seeds: Vec<Momentum> = cluster_list
        .par_iter()
        .filter_map(|cluster| {
            for &c in cluster {
                let l = c % cells[2];
                let j = (c / cells[2]) % cells[1];
                let i = c / (cells[2] * cells[1]);
                let center = Momentum::new3(
                    spec.axes[0].sample(i) + 0.5 * spec.axes[0].step(),
                    spec.axes[1].sample(j) + 0.5 * spec.axes[1].step(),
                    spec.axes[2].sample(l) + 0.5 * spec.axes[2].step(),
                );
                if let Ok(k) = refine_newton(model, &center, &params) {
                    let d = model.bloch(&k);
                    if is_exceptional(&d, tol) {
                        return Some(k.canonical());
                    }
                }
            }
            None
        })
        .collect();

    seeds = sorted_dedup(seeds, 0.5 * spec.cell_diag());
    seeds
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::{BlochModel, BlochVector};
    use crate::models::ModelSpec;
    use std::f64::consts::PI;

    #[test]
    fn refine_converges_onto_the_h1_ring() {
        let h1 = ModelSpec::h1();
        // start where d_x = 0.24: cos kx + cos ky = 1.76, pick ky = 0
        let kx = (0.76f64).acos();
        let seed = Momentum::new2(kx, 0.0);
        let k = refine_newton(&h1, &seed, &NewtonParams::default()).unwrap();
        let dx = 2.0 - k.coords[0].cos() - k.coords[1].cos();
        assert!((dx - 0.25).abs() < 1e-10, "dx {dx}");
    }

    #[test]
    fn exact_seed_returns_unchanged() {
        // d_x = 1 − cos kx = 1/4 on the ky = 0 axis
        let h1 = ModelSpec::h1();
        let kx = (0.75f64).acos();
        let seed = Momentum::new2(kx, 0.0);
        assert!(residual(&h1, &seed) <= 1e-10);
        let k = refine_newton(&h1, &seed, &NewtonParams::default()).unwrap();
        assert_eq!(k, seed);
    }

    #[test]
    fn deep_gapped_seed_never_returns_a_non_root() {
        let h1 = ModelSpec::h1();
        let seed = Momentum::new2(PI, PI);
        match refine_newton(&h1, &seed, &NewtonParams::default()) {
            Ok(k) => {
                let dx = 2.0 - k.coords[0].cos() - k.coords[1].cos();
                assert!((dx - 0.25).abs() < 1e-8, "claimed root off the ring");
            }
            Err(ExtractError::NoConvergence(_)) => {}
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn symmetry_broken_h1_has_no_eps_and_a_residual_floor() {
        let spec = ModelSpec::h1().with_imag_perturbation([PI / 20.0, 0.0, 0.0]);
        let set = find_ep_2d_generic(&spec, &crate::grid::GridSpec::bz2(101), 1e-10);
        assert!(set.isolated_points.is_empty());
        assert!(set.degeneracy_points.is_empty());
        assert!(set.grid_floor >= 0.05, "floor {}", set.grid_floor);
    }

    #[test]
    fn h2_tangency_gives_exactly_four_points() {
        let m = 6.0f64.sqrt() - 1.0;
        let set = find_ep_2d_generic(&ModelSpec::h2(m), &crate::grid::GridSpec::bz2(101), 1e-10);
        assert_eq!(set.isolated_points.len(), 4, "{:?}", set.isolated_points);
        let k_star = (6.0f64.sqrt() / 3.0).acos();
        for p in &set.isolated_points {
            assert!((p.coords[0].abs() - k_star).abs() < 1e-4);
            assert!((p.coords[1].abs() - k_star).abs() < 1e-4);
        }
    }

    #[test]
    fn h2_collapse_reports_vanishing_d_degeneracy() {
        let set = find_ep_2d_generic(&ModelSpec::h2(1.0), &crate::grid::GridSpec::bz2(100), 1e-10);
        assert_eq!(set.degeneracy_points.len(), 1, "{:?}", set.degeneracy_points);
        // the zero of the residual is quartic at the collapse point, so a
        // 1e-10 residual pins the location only to ~1e-5
        let p = set.degeneracy_points[0];
        assert!(p.coords[0].abs() < 1e-4 && p.coords[1].abs() < 1e-4);
        let d = ModelSpec::h2(1.0).eval_bloch(&p).unwrap();
        assert!(d.norm_sqr() < VANISHING_D_TOL);
    }

    #[test]
    fn h1_ring_is_found_as_a_dense_point_set() {
        let set = find_ep_2d_generic(&ModelSpec::h1(), &crate::grid::GridSpec::bz2(101), 1e-10);
        assert!(set.isolated_points.len() > 50, "only {} points", set.isolated_points.len());
        for p in &set.isolated_points {
            let dx = 2.0 - p.coords[0].cos() - p.coords[1].cos();
            assert!((dx - 0.25).abs() < 1e-8);
        }
    }

    #[test]
    fn trefoil_seed_search_lands_on_the_line() {
        let spec = crate::grid::GridSpec::bz3(31);
        let seeds = seed_search_3d(&ModelSpec::trefoil(), &spec, 1e-10);
        assert!(!seeds.is_empty());
        let model = ModelSpec::trefoil();
        for s in &seeds {
            assert!(residual(&model, s) <= 1e-10);
            let ki = model.knot_intermediates(s).unwrap();
            // on the exceptional line f₂ = 0 and f₁ = 0
            assert!(ki.f2.abs() < 1e-6, "f2 {}", ki.f2);
            assert!(ki.f1.abs() < 1e-6, "f1 {}", ki.f1);
        }
    }

    #[test]
    fn gapped_constant_model_yields_no_seeds() {
        struct Gapped;
        impl BlochModel for Gapped {
            fn dim(&self) -> usize {
                3
            }
            fn bloch(&self, _: &Momentum) -> BlochVector {
                BlochVector::new([1.0, 0.0, 0.0], [0.0, 0.0, 0.1])
            }
        }
        let seeds = seed_search_3d(&Gapped, &crate::grid::GridSpec::bz3(9), 1e-10);
        assert!(seeds.is_empty());
    }
}
