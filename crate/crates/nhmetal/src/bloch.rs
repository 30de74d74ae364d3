//! Two-band non-Hermitian Bloch algebra.
//!
//! A two-band Bloch Hamiltonian is `H(k) = d_R(k)·σ + i d_I(k)·σ` with real
//! 3-vectors `d_R`, `d_I`. Its squared eigenvalue is the complex discriminant
//! `E² = d·d = |d_R|² − |d_I|² + 2i d_R·d_I`, and a momentum is exceptional
//! when `E² = 0` at non-vanishing `d`: there the two eigenvalues *and*
//! eigenvectors coalesce and the matrix is non-diagonalizable.

use crate::mat2::{fix_phase, normalize2, Mat2, C64};
use crate::momentum::Momentum;
use serde::{Deserialize, Serialize};

/// Default cap on the eigenvector condition number before a spectrum is
/// flagged defective (proximity to an exceptional point).
pub const DEFAULT_CONDITION_CAP: f64 = 1e8;

/// Relative tolerance used by the exceptional-point predicate and the
/// extraction routines, scaled by `max(1, ‖d‖²)`.
pub const DEFAULT_EP_TOL: f64 = 1e-10;

/// The complex Bloch vector `d = d_R + i d_I` as two real 3-vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub dr: [f64; 3],
    pub di: [f64; 3],
}

impl BlochVector {
    pub fn new(dr: [f64; 3], di: [f64; 3]) -> Self {
        BlochVector { dr, di }
    }

    pub fn zero() -> Self {
        BlochVector::new([0.0; 3], [0.0; 3])
    }

    /// `‖d_R‖² + ‖d_I‖²`, the natural squared scale of the vector.
    pub fn norm_sqr(&self) -> f64 {
        dot(&self.dr, &self.dr) + dot(&self.di, &self.di)
    }

    /// Complex component `d_c = d_R[c] + i d_I[c]`.
    pub fn component(&self, c: usize) -> C64 {
        C64::new(self.dr[c], self.di[c])
    }

    /// The Hamiltonian `d·σ` (traceless by construction).
    pub fn hamiltonian(&self) -> Mat2 {
        Mat2::from_pauli(
            C64::ZERO,
            [self.component(0), self.component(1), self.component(2)],
        )
    }
}

pub fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm3(a: &[f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// The discriminant `d·d = (|d_R|² − |d_I|²) + 2i (d_R·d_I)`, evaluated as
/// real dot products so the symmetric case `d_R·d_I = 0` is exact.
pub fn discriminant(d: &BlochVector) -> C64 {
    C64::new(
        dot(&d.dr, &d.dr) - dot(&d.di, &d.di),
        2.0 * dot(&d.dr, &d.di),
    )
}

/// Principal square root: `Re ≥ 0`, and `Im ≥ 0` on the `Re = 0` boundary.
pub fn principal_sqrt(z: C64) -> C64 {
    let mut w = z.sqrt();
    if w.re == 0.0 {
        w.im = w.im.abs();
    } else if w.re < 0.0 {
        w = -w;
    }
    w
}

/// Exceptional-point predicate with relative tolerance: both parts of the
/// discriminant vanish against the scale `s = max(1, ‖d‖²)` while `d` itself
/// does not.
pub fn is_exceptional(d: &BlochVector, tol: f64) -> bool {
    let s = d.norm_sqr().max(1.0);
    let disc = discriminant(d);
    disc.re.abs() <= tol * s && disc.im.abs() <= tol * s && d.norm_sqr() > tol * s
}

/// Eigensystem of a general complex 2×2 matrix in the branch convention of
/// this crate: `E₊ = c₀ + √(b·b)` with the principal root, `E₋ = c₀ − √(b·b)`.
#[derive(Debug, Clone, Copy)]
pub struct ComplexSpectrum {
    pub e_plus: C64,
    pub e_minus: C64,
    /// The discriminant `b·b` of the traceless part (equals `E₊²` when the
    /// trace vanishes).
    pub e_squared: C64,
    pub psi_plus: [C64; 2],
    pub psi_minus: [C64; 2],
    /// `1 / |det [ψ₊ ψ₋]|` for unit eigenvectors; 1 for orthonormal frames,
    /// diverges as an exceptional point is approached.
    pub condition_number: f64,
    /// Set when `condition_number` exceeded the cap; eigenvectors are still
    /// returned best-effort.
    pub defective: bool,
}

impl ComplexSpectrum {
    pub fn gap(&self) -> C64 {
        self.e_plus - self.e_minus
    }
}

pub fn spectrum(h: &Mat2) -> ComplexSpectrum {
    spectrum_with_cap(h, DEFAULT_CONDITION_CAP)
}

pub fn spectrum_with_cap(h: &Mat2, condition_cap: f64) -> ComplexSpectrum {
    let (c0, b) = h.pauli_components();
    let e_squared = b[0] * b[0] + b[1] * b[1] + b[2] * b[2];
    let e = principal_sqrt(e_squared);

    let (psi_plus, psi_minus, condition_number) = eigenvectors(&b, e);

    ComplexSpectrum {
        e_plus: c0 + e,
        e_minus: c0 - e,
        e_squared,
        psi_plus,
        psi_minus,
        condition_number,
        defective: !(condition_number <= condition_cap),
    }
}

/// Right eigenvectors of `b·σ` for eigenvalues `±e`. Two algebraically
/// equivalent forms exist per eigenvalue; the larger one is kept for
/// stability. A numerically scalar matrix returns the canonical basis.
fn eigenvectors(b: &[C64; 3], e: C64) -> ([C64; 2], [C64; 2], f64) {
    let candidate = |ev: C64| -> Option<[C64; 2]> {
        let v1 = [b[0] - C64::i() * b[1], ev - b[2]];
        let v2 = [ev + b[2], b[0] + C64::i() * b[1]];
        let n1 = v1[0].norm_sqr() + v1[1].norm_sqr();
        let n2 = v2[0].norm_sqr() + v2[1].norm_sqr();
        let v = if n1 >= n2 { v1 } else { v2 };
        if n1.max(n2) == 0.0 {
            None
        } else {
            Some(fix_phase(normalize2(v)))
        }
    };

    match (candidate(e), candidate(-e)) {
        (Some(p), Some(m)) => {
            let det = p[0] * m[1] - p[1] * m[0];
            let cond = if det.norm() == 0.0 {
                f64::INFINITY
            } else {
                1.0 / det.norm()
            };
            (p, m, cond)
        }
        // b vanishes: scalar matrix, every frame is an eigenbasis
        _ => (
            [C64::ONE, C64::ZERO],
            [C64::ZERO, C64::ONE],
            1.0,
        ),
    }
}

/// A unitary `q` implementing the non-Hermitian symmetry `H = q H† q⁻¹`.
#[derive(Debug, Clone, Copy)]
pub struct SymmetryOp {
    q: Mat2,
    q_inv: Mat2,
}

#[derive(Debug, thiserror::Error)]
#[error("symmetry operator is not unitary (residual {residual:.3e})")]
pub struct NotUnitary {
    pub residual: f64,
}

impl SymmetryOp {
    pub fn new(q: Mat2) -> Result<Self, NotUnitary> {
        let residual = q.unitarity_residual();
        if residual > 1e-12 {
            return Err(NotUnitary { residual });
        }
        Ok(SymmetryOp { q, q_inv: q.inverse() })
    }

    pub fn sigma_x() -> Self {
        SymmetryOp::new(crate::mat2::PAULI_X).expect("σ_x is unitary")
    }

    pub fn q(&self) -> &Mat2 {
        &self.q
    }

    /// `H − q H† q⁻¹` for a single matrix.
    pub fn residual_matrix(&self, h: &Mat2) -> Mat2 {
        *h - self.q * h.adjoint() * self.q_inv
    }

    /// Spectral-norm symmetry violation at one momentum.
    pub fn residual(&self, h: &Mat2) -> f64 {
        self.residual_matrix(h).spectral_norm()
    }
}

/// Momentum-to-Bloch-vector map. The catalog models implement this with
/// analytic gradients; anything else can rely on the finite-difference
/// default.
pub trait BlochModel: Sync {
    fn dim(&self) -> usize;

    fn bloch(&self, k: &Momentum) -> BlochVector;

    fn hamiltonian(&self, k: &Momentum) -> Mat2 {
        self.bloch(k).hamiltonian()
    }

    /// Momentum derivatives of `(d_R, d_I)`; central differences with step
    /// `1e-6` unless overridden.
    fn grad(&self, k: &Momentum) -> BlochGrad {
        finite_difference_grad(self, k)
    }
}

/// Central-difference gradient with step `1e-6`, the fallback for models
/// without analytic derivatives.
pub fn finite_difference_grad<M: BlochModel + ?Sized>(model: &M, k: &Momentum) -> BlochGrad {
    const H: f64 = 1e-6;
    let mut g = BlochGrad::zero();
    for a in 0..model.dim() {
        let mut kp = *k;
        let mut km = *k;
        kp.coords[a] += H;
        km.coords[a] -= H;
        let dp = model.bloch(&kp);
        let dm = model.bloch(&km);
        for c in 0..3 {
            g.ddr[a][c] = (dp.dr[c] - dm.dr[c]) / (2.0 * H);
            g.ddi[a][c] = (dp.di[c] - dm.di[c]) / (2.0 * H);
        }
    }
    g
}

/// `ddr[a]` is the 3-vector `∂d_R/∂k_a` (and likewise `ddi`); axes beyond the
/// model dimension stay zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochGrad {
    pub ddr: [[f64; 3]; 3],
    pub ddi: [[f64; 3]; 3],
}

impl BlochGrad {
    pub fn zero() -> Self {
        BlochGrad { ddr: [[0.0; 3]; 3], ddi: [[0.0; 3]; 3] }
    }
}

/// Complex gradient of the discriminant, `∂(d·d)/∂k_a = 2 Σ_c d_c ∂d_c/∂k_a`.
pub fn discriminant_grad(d: &BlochVector, g: &BlochGrad, dim: usize) -> [C64; 3] {
    let mut out = [C64::ZERO; 3];
    for (a, slot) in out.iter_mut().enumerate().take(dim) {
        let mut acc = C64::ZERO;
        for c in 0..3 {
            let dc = d.component(c);
            let gc = C64::new(g.ddr[a][c], g.ddi[a][c]);
            acc += dc * gc;
        }
        *slot = 2.0 * acc;
    }
    out
}

/// Maximum spectral-norm violation of `H = q H† q⁻¹` over all samples of a
/// grid. Values at rounding level (≤ 1e−12) certify the symmetry on the grid.
pub fn symmetry_residual<M: BlochModel>(
    model: &M,
    q: &SymmetryOp,
    grid: &crate::grid::GridSpec,
) -> f64 {
    let mut worst = 0.0f64;
    for k in grid.iter_momenta() {
        worst = worst.max(q.residual(&model.hamiltonian(&k)));
    }
    worst
}
