//! Fermi-set classification: per-cell labels for the region with a purely
//! imaginary spectrum, `Re(E) = 0` ⇔ `Im(E²) = 0 ∧ Re(E²) ≤ 0`.
//!
//! In 2D (symmetric models) `Im E²` vanishes identically and the Fermi set
//! is an open *area* bounded by the exceptional ring. In 3D it is an open
//! *surface* (the Fermi–Seifert surface of the knot): a cell belongs to it
//! when the `Im E² = 0` surface passes through the cell while `Re E²` stays
//! negative; cells where both fields change sign carry the exceptional line
//! itself and are labeled as boundary.

use crate::bloch::{discriminant, BlochModel};
use crate::grid::GridSpec;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellLabel {
    Fermi,
    Gapped,
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FermiDefinition {
    FermiVolume2d,
    FermiSeifert3d,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FermiClassification {
    pub spec: GridSpec,
    /// Per-axis cell counts (periodic axes wrap).
    pub cells: Vec<usize>,
    /// Row-major cell labels.
    pub labels: Vec<CellLabel>,
    pub definition: FermiDefinition,
}

impl FermiClassification {
    pub fn count(&self, label: CellLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn cell_index(&self, ij: &[usize]) -> usize {
        let mut idx = 0;
        for (a, &i) in ij.iter().enumerate() {
            idx = idx * self.cells[a] + i;
        }
        idx
    }

    /// Center momentum of a cell (canonical coordinates).
    pub fn cell_center(&self, flat: usize) -> crate::momentum::Momentum {
        let mut rem = flat;
        let mut ij = vec![0usize; self.cells.len()];
        for a in (0..self.cells.len()).rev() {
            ij[a] = rem % self.cells[a];
            rem /= self.cells[a];
        }
        let mut k = self.spec.momentum(&ij);
        // shift from corner to center along the free axes
        let dim = self.spec.model_dim();
        let mut free = 0;
        for c in 0..dim {
            if let Some(s) = self.spec.slice {
                if c == s.axis {
                    continue;
                }
            }
            k.coords[c] += 0.5 * self.spec.axes[free].step();
            free += 1;
        }
        k.canonical()
    }
}

pub fn fermi_classify<M: BlochModel>(model: &M, spec: &GridSpec, tol: f64) -> FermiClassification {
    let dim = spec.grid_dim();
    assert!(dim == 2 || dim == 3);
    let n = spec.n_points();
    let samples: Vec<(f64, f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let d = model.bloch(&spec.momentum_at(i));
            let disc = discriminant(&d);
            (disc.re, disc.im, d.norm_sqr().max(1.0))
        })
        .collect();

    let ns: Vec<usize> = spec.axes.iter().map(|a| a.n).collect();
    let cells: Vec<usize> = spec.axes.iter().map(|a| a.n_cells()).collect();

    let corner_ids = |ij: &[usize]| -> Vec<usize> {
        let mut ids = Vec::with_capacity(1 << dim);
        for mask in 0..(1usize << dim) {
            let mut flat = 0;
            for a in 0..dim {
                let step = (mask >> a) & 1;
                let idx = (ij[a] + step) % ns[a];
                flat = flat * ns[a] + idx;
            }
            ids.push(flat);
        }
        ids
    };

    let n_cells: usize = cells.iter().product();
    let mut labels = Vec::with_capacity(n_cells);
    let mut ij = vec![0usize; dim];
    for flat in 0..n_cells {
        let mut rem = flat;
        for a in (0..dim).rev() {
            ij[a] = rem % cells[a];
            rem /= cells[a];
        }
        let ids = corner_ids(&ij);
        let s = ids.iter().map(|&x| samples[x].2).fold(1.0f64, f64::max);
        let eps = tol * s;
        let re: Vec<f64> = ids.iter().map(|&x| samples[x].0).collect();
        let im: Vec<f64> = ids.iter().map(|&x| samples[x].1).collect();

        let all_re_neg = re.iter().all(|&v| v < -eps);
        let all_re_pos = re.iter().all(|&v| v > eps);
        let label = if dim == 2 {
            let im_zero = im.iter().all(|&v| v.abs() <= eps);
            if !im_zero {
                CellLabel::Gapped
            } else if all_re_neg {
                CellLabel::Fermi
            } else if all_re_pos {
                CellLabel::Gapped
            } else {
                CellLabel::Boundary
            }
        } else {
            let im_min = im.iter().cloned().fold(f64::INFINITY, f64::min);
            let im_max = im.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let im_cross = im_min <= eps && im_max >= -eps;
            if !im_cross {
                CellLabel::Gapped
            } else if all_re_neg {
                CellLabel::Fermi
            } else if all_re_pos {
                CellLabel::Gapped
            } else {
                CellLabel::Boundary
            }
        };
        labels.push(label);
    }

    FermiClassification {
        spec: spec.clone(),
        cells,
        labels,
        definition: if dim == 2 {
            FermiDefinition::FermiVolume2d
        } else {
            FermiDefinition::FermiSeifert3d
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::BlochVector;
    use crate::models::ModelSpec;
    use crate::momentum::Momentum;

    #[test]
    fn h1_fermi_region_matches_the_closed_form_cell_exactly() {
        let spec = GridSpec::bz2(201);
        let cls = fermi_classify(&ModelSpec::h1(), &spec, 1e-9);
        assert_eq!(cls.definition, FermiDefinition::FermiVolume2d);
        assert!(cls.count(CellLabel::Fermi) > 0);

        // oracle: FERMI ⇔ every corner has d_x < 1/4
        let ns = 201;
        let dx = |i: usize, j: usize| -> f64 {
            let k = spec.momentum(&[i, j]);
            2.0 - k.coords[0].cos() - k.coords[1].cos()
        };
        for i in 0..ns {
            for j in 0..ns {
                let corners = [
                    dx(i, j),
                    dx((i + 1) % ns, j),
                    dx(i, (j + 1) % ns),
                    dx((i + 1) % ns, (j + 1) % ns),
                ];
                let oracle_fermi = corners.iter().all(|&v| v < 0.25);
                let got = cls.labels[cls.cell_index(&[i, j])];
                if oracle_fermi {
                    assert_eq!(got, CellLabel::Fermi, "cell ({i},{j})");
                } else {
                    assert_ne!(got, CellLabel::Fermi, "cell ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn hermitian_model_has_empty_fermi_set() {
        struct Hermitian;
        impl BlochModel for Hermitian {
            fn dim(&self) -> usize {
                2
            }
            fn bloch(&self, k: &Momentum) -> BlochVector {
                BlochVector::new([1.5 - k.coords[0].cos(), 0.3, 0.0], [0.0; 3])
            }
        }
        let cls = fermi_classify(&Hermitian, &GridSpec::bz2(64), 1e-9);
        assert_eq!(cls.count(CellLabel::Fermi), 0);
        assert_eq!(cls.count(CellLabel::Boundary), 0);
    }

    #[test]
    fn boundary_cells_ring_the_h1_fermi_disk() {
        let cls = fermi_classify(&ModelSpec::h1(), &GridSpec::bz2(101), 1e-9);
        let b = cls.count(CellLabel::Boundary);
        assert!(b > 0);
        // the boundary is a thin ring: far fewer boundary cells than total
        assert!(b < cls.labels.len() / 10);
    }
}
