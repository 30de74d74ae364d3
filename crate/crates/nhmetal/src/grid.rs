//! Sampling grids over the Brillouin zone and scalar field scans.

use crate::bloch::{discriminant, principal_sqrt, BlochModel, BlochVector};
use crate::momentum::Momentum;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// One sampled axis. Periodic axes cover `[min, max)` with `n` samples
/// (endpoint excluded, cells wrap around); non-periodic axes include both
/// endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub n: usize,
    pub min: f64,
    pub max: f64,
    pub periodic: bool,
}

impl AxisSpec {
    pub fn bz(n: usize) -> Self {
        AxisSpec { n, min: -PI, max: PI, periodic: true }
    }

    pub fn linear(n: usize, min: f64, max: f64) -> Self {
        AxisSpec { n, min, max, periodic: false }
    }

    pub fn step(&self) -> f64 {
        if self.periodic {
            (self.max - self.min) / self.n as f64
        } else {
            (self.max - self.min) / (self.n - 1) as f64
        }
    }

    pub fn sample(&self, j: usize) -> f64 {
        self.min + j as f64 * self.step()
    }

    /// Number of cells along this axis (periodic axes wrap around).
    pub fn n_cells(&self) -> usize {
        if self.periodic {
            self.n
        } else {
            self.n - 1
        }
    }
}

/// A fixed coordinate axis, used to scan a 3D model on a 2D grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slice {
    pub axis: usize,
    pub value: f64,
}

/// Grid specification: 2 or 3 scanned axes, plus an optional fixed slice
/// axis when the model has one more dimension than the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub axes: Vec<AxisSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slice: Option<Slice>,
}

impl GridSpec {
    /// Full-BZ square grid, `n` samples per axis.
    pub fn bz2(n: usize) -> Self {
        GridSpec { axes: vec![AxisSpec::bz(n), AxisSpec::bz(n)], slice: None }
    }

    /// Full-BZ cubic grid.
    pub fn bz3(n: usize) -> Self {
        GridSpec {
            axes: vec![AxisSpec::bz(n), AxisSpec::bz(n), AxisSpec::bz(n)],
            slice: None,
        }
    }

    /// 2D grid over the two free axes of a 3D model with one axis pinned.
    pub fn bz2_sliced(n: usize, axis: usize, value: f64) -> Self {
        GridSpec {
            axes: vec![AxisSpec::bz(n), AxisSpec::bz(n)],
            slice: Some(Slice { axis, value }),
        }
    }

    /// Dimension of the grid itself (2 or 3).
    pub fn grid_dim(&self) -> usize {
        self.axes.len()
    }

    /// Dimension of the momenta this grid produces (grid axes + slice).
    pub fn model_dim(&self) -> usize {
        self.axes.len() + usize::from(self.slice.is_some())
    }

    pub fn n_points(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    /// Decomposes a flat row-major index into per-axis indices.
    pub fn unflatten(&self, idx: usize) -> Vec<usize> {
        let mut rem = idx;
        let mut out = vec![0; self.axes.len()];
        for a in (0..self.axes.len()).rev() {
            out[a] = rem % self.axes[a].n;
            rem /= self.axes[a].n;
        }
        out
    }

    pub fn flatten(&self, ij: &[usize]) -> usize {
        let mut idx = 0;
        for (a, &i) in ij.iter().enumerate() {
            idx = idx * self.axes[a].n + i;
        }
        idx
    }

    /// Momentum at the given per-axis sample indices, slice value inserted.
    pub fn momentum(&self, ij: &[usize]) -> Momentum {
        let dim = self.model_dim();
        let mut coords = [0.0; 3];
        let mut axis_positions: Vec<usize> = (0..dim).collect();
        if let Some(s) = self.slice {
            coords[s.axis] = s.value;
            axis_positions.retain(|&p| p != s.axis);
        }
        for (a, &i) in ij.iter().enumerate() {
            coords[axis_positions[a]] = self.axes[a].sample(i);
        }
        Momentum { coords, dim }
    }

    pub fn momentum_at(&self, flat: usize) -> Momentum {
        self.momentum(&self.unflatten(flat))
    }

    pub fn iter_momenta(&self) -> impl Iterator<Item = Momentum> + '_ {
        (0..self.n_points()).map(move |i| self.momentum_at(i))
    }

    /// Approximate diagonal of one grid cell, for merge tolerances.
    pub fn cell_diag(&self) -> f64 {
        self.axes.iter().map(|a| a.step() * a.step()).sum::<f64>().sqrt()
    }
}

/// Named scalar lattices produced by [`scan_fields`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScalarField {
    ReE2,
    ImE2,
    SqrtAbsReE2,
    SqrtAbsImE2,
    ReGap,
    ImGap,
}

/// Pointwise spectral fields of a model over a grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldGrid {
    pub spec: GridSpec,
    pub re_e2: Vec<f64>,
    pub im_e2: Vec<f64>,
    pub sqrt_abs_re_e2: Vec<f64>,
    pub sqrt_abs_im_e2: Vec<f64>,
    pub re_gap: Vec<f64>,
    pub im_gap: Vec<f64>,
}

impl FieldGrid {
    pub fn field(&self, f: ScalarField) -> &[f64] {
        match f {
            ScalarField::ReE2 => &self.re_e2,
            ScalarField::ImE2 => &self.im_e2,
            ScalarField::SqrtAbsReE2 => &self.sqrt_abs_re_e2,
            ScalarField::SqrtAbsImE2 => &self.sqrt_abs_im_e2,
            ScalarField::ReGap => &self.re_gap,
            ScalarField::ImGap => &self.im_gap,
        }
    }
}

/// Evaluates all named spectral fields pointwise. Deterministic for a fixed
/// model and grid; points are independent, so the scan runs in parallel and
/// is written back in index order.
pub fn scan_fields<M: BlochModel>(model: &M, spec: &GridSpec) -> FieldGrid {
    assert!(
        spec.axes.iter().all(|a| a.n >= 2),
        "grid needs at least 2 samples per axis"
    );
    assert_eq!(spec.model_dim(), model.dim(), "grid/model dimension mismatch");

    let n = spec.n_points();
    let rows: Vec<[f64; 6]> = (0..n)
        .into_par_iter()
        .map(|i| {
            let k = spec.momentum_at(i);
            let d = model.bloch(&k);
            point_fields(&d)
        })
        .collect();

    let mut grid = FieldGrid {
        spec: spec.clone(),
        re_e2: Vec::with_capacity(n),
        im_e2: Vec::with_capacity(n),
        sqrt_abs_re_e2: Vec::with_capacity(n),
        sqrt_abs_im_e2: Vec::with_capacity(n),
        re_gap: Vec::with_capacity(n),
        im_gap: Vec::with_capacity(n),
    };
    for r in rows {
        grid.re_e2.push(r[0]);
        grid.im_e2.push(r[1]);
        grid.sqrt_abs_re_e2.push(r[2]);
        grid.sqrt_abs_im_e2.push(r[3]);
        grid.re_gap.push(r[4]);
        grid.im_gap.push(r[5]);
    }
    grid
}

fn point_fields(d: &BlochVector) -> [f64; 6] {
    let disc = discriminant(d);
    let e = principal_sqrt(disc);
    [
        disc.re,
        disc.im,
        disc.re.abs().sqrt(),
        disc.im.abs().sqrt(),
        2.0 * e.re,
        2.0 * e.im,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat2::C64;

    struct ConstSigmaX;

    impl BlochModel for ConstSigmaX {
        fn dim(&self) -> usize {
            2
        }
        fn bloch(&self, _k: &Momentum) -> BlochVector {
            BlochVector::new([1.0, 0.0, 0.0], [0.0, 0.0, 0.0])
        }
    }

    #[test]
    fn constant_sigma_x_fields() {
        let g = scan_fields(&ConstSigmaX, &GridSpec::bz2(8));
        assert!(g.re_e2.iter().all(|&v| v == 1.0));
        assert!(g.im_e2.iter().all(|&v| v == 0.0));
        assert!(g.re_gap.iter().all(|&v| (v - 2.0).abs() < 1e-15));
    }

    #[test]
    fn periodic_axis_excludes_endpoint() {
        let a = AxisSpec::bz(4);
        assert_eq!(a.sample(0), -PI);
        assert!((a.sample(3) - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn slice_inserts_fixed_axis() {
        let spec = GridSpec::bz2_sliced(5, 2, 0.65);
        let k = spec.momentum(&[0, 1]);
        assert_eq!(k.dim, 3);
        assert_eq!(k.coords[2], 0.65);
        assert_eq!(k.coords[0], -PI);
    }

    #[test]
    fn flatten_unflatten_round_trip() {
        let spec = GridSpec::bz3(5);
        for idx in [0usize, 1, 17, 124] {
            let ij = spec.unflatten(idx);
            assert_eq!(spec.flatten(&ij), idx);
        }
    }

    #[test]
    fn fields_json_round_trip_is_bit_exact() {
        struct Skewed;
        impl BlochModel for Skewed {
            fn dim(&self) -> usize {
                2
            }
            fn bloch(&self, k: &Momentum) -> BlochVector {
                BlochVector::new(
                    [0.3 * k.coords[0].sin() + 0.1, 0.0, 0.2],
                    [0.0, k.coords[1].cos() / 3.0, 0.05],
                )
            }
        }
        let g = scan_fields(&Skewed, &GridSpec::bz2(7));
        let text = serde_json::to_string(&g).unwrap();
        let back: FieldGrid = serde_json::from_str(&text).unwrap();
        assert_eq!(g.re_e2, back.re_e2);
        assert_eq!(g.im_e2, back.im_e2);
        assert_eq!(g.re_gap, back.re_gap);
        let _ = C64::ZERO;
    }
}
