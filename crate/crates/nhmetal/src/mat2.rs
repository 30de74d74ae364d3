//! Exact closed-form algebra for complex 2×2 matrices.
//!
//! Everything a two-band Bloch Hamiltonian needs: Pauli decomposition,
//! eigenpairs, singular values, matrix exponential. All routines are
//! closed-form (no iterative linear algebra), so they are deterministic
//! and cheap enough to call millions of times during grid scans.

use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

pub type C64 = Complex64;

pub const PAULI_X: Mat2 = Mat2 {
    e: [
        [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
    ],
};

pub const PAULI_Y: Mat2 = Mat2 {
    e: [
        [C64::new(0.0, 0.0), C64::new(0.0, -1.0)],
        [C64::new(0.0, 1.0), C64::new(0.0, 0.0)],
    ],
};

pub const PAULI_Z: Mat2 = Mat2 {
    e: [
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        [C64::new(0.0, 0.0), C64::new(-1.0, 0.0)],
    ],
};

/// Row-major complex 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub e: [[C64; 2]; 2],
}

impl Mat2 {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2 { e: [[a, b], [c, d]] }
    }

    pub fn zero() -> Self {
        Mat2::new(C64::ZERO, C64::ZERO, C64::ZERO, C64::ZERO)
    }

    pub fn identity() -> Self {
        Mat2::new(C64::ONE, C64::ZERO, C64::ZERO, C64::ONE)
    }

    /// Builds `c0·σ₀ + b·σ` from complex Pauli coefficients.
    pub fn from_pauli(c0: C64, b: [C64; 3]) -> Self {
        Mat2::new(c0 + b[2], b[0] - C64::i() * b[1], b[0] + C64::i() * b[1], c0 - b[2])
    }

    /// Inverse of [`Mat2::from_pauli`]: returns `(c0, b)`.
    pub fn pauli_components(&self) -> (C64, [C64; 3]) {
        let half = C64::new(0.5, 0.0);
        let c0 = (self.e[0][0] + self.e[1][1]) * half;
        let bz = (self.e[0][0] - self.e[1][1]) * half;
        let bx = (self.e[0][1] + self.e[1][0]) * half;
        let by = C64::i() * (self.e[0][1] - self.e[1][0]) * half;
        (c0, [bx, by, bz])
    }

    pub fn adjoint(&self) -> Self {
        Mat2::new(
            self.e[0][0].conj(),
            self.e[1][0].conj(),
            self.e[0][1].conj(),
            self.e[1][1].conj(),
        )
    }

    pub fn trace(&self) -> C64 {
        self.e[0][0] + self.e[1][1]
    }

    pub fn det(&self) -> C64 {
        self.e[0][0] * self.e[1][1] - self.e[0][1] * self.e[1][0]
    }

    /// Exact inverse via the adjugate. Caller guarantees `det != 0`.
    pub fn inverse(&self) -> Self {
        let d = self.det();
        Mat2::new(
            self.e[1][1] / d,
            -self.e[0][1] / d,
            -self.e[1][0] / d,
            self.e[0][0] / d,
        )
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut m = *self;
        for row in m.e.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        m
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.e
            .iter()
            .flatten()
            .map(|v| v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest singular value (operator 2-norm).
    pub fn spectral_norm(&self) -> f64 {
        self.singular_values()[0]
    }

    /// Singular values in descending order, computed from the Hermitian
    /// eigenvalues of `A†A`.
    pub fn singular_values(&self) -> [f64; 2] {
        let g = self.adjoint() * *self;
        let a = g.e[0][0].re;
        let d = g.e[1][1].re;
        let b = g.e[0][1];
        let mid = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        let l1 = (mid + rad).max(0.0);
        let l2 = (mid - rad).max(0.0);
        [l1.sqrt(), l2.sqrt()]
    }

    /// Full singular value decomposition `A = W·diag(s)·X†` with `s[0] >= s[1]`.
    ///
    /// Columns of `W` and `X` carry a deterministic phase (largest-modulus
    /// component real positive) so repeated runs decompose identically.
    pub fn svd(&self) -> (Mat2, [f64; 2], Mat2) {
        let g = self.adjoint() * *self;
        let a = g.e[0][0].re;
        let d = g.e[1][1].re;
        let b = g.e[0][1];
        let mid = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        let l1 = (mid + rad).max(0.0);
        let l2 = (mid - rad).max(0.0);
        let s = [l1.sqrt(), l2.sqrt()];

        let scale = a.abs().max(d.abs()).max(b.norm()).max(f64::MIN_POSITIVE);
        let x1 = if b.norm() <= 1e-15 * scale {
            // already diagonal: order columns by magnitude
            if a >= d {
                [C64::ONE, C64::ZERO]
            } else {
                [C64::ZERO, C64::ONE]
            }
        } else {
            normalize2(pick_larger([b, C64::new(l1 - a, 0.0)], [C64::new(l1 - d, 0.0), b.conj()]))
        };
        // deterministic phases go on X only; W must stay exactly A·x/s or
        // the product W·diag(s)·X† no longer reconstructs A
        let x1 = fix_phase(x1);
        let x2 = fix_phase([-x1[1].conj(), x1[0].conj()]);

        let w1 = if s[0] > 1e-300 {
            let v = self.apply(x1);
            normalize2([v[0] / s[0], v[1] / s[0]])
        } else {
            [C64::ONE, C64::ZERO]
        };
        let w2 = if s[1] > 1e-12 * s[0].max(1e-300) {
            let v = self.apply(x2);
            normalize2([v[0] / s[1], v[1] / s[1]])
        } else {
            // null direction: complete the orthonormal frame
            [-w1[1].conj(), w1[0].conj()]
        };

        let w = Mat2::from_columns(w1, w2);
        let x = Mat2::from_columns(x1, x2);
        (w, s, x)
    }

    pub fn from_columns(c1: [C64; 2], c2: [C64; 2]) -> Self {
        Mat2::new(c1[0], c2[0], c1[1], c2[1])
    }

    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        [
            self.e[0][0] * v[0] + self.e[0][1] * v[1],
            self.e[1][0] * v[0] + self.e[1][1] * v[1],
        ]
    }

    /// Matrix exponential via the Pauli closed form
    /// `exp(αI + m·σ) = e^α (cosh r · I + sinhc r · m·σ)` with `r² = m·m`.
    ///
    /// `cosh` and `sinh(r)/r` are even in `r`, so the square-root branch is
    /// irrelevant; the small-`r` limit uses the series for `sinhc`.
    pub fn exp(&self) -> Self {
        let (alpha, m) = self.pauli_components();
        let r2 = m[0] * m[0] + m[1] * m[1] + m[2] * m[2];
        let r = r2.sqrt();
        let (cosh_r, sinhc_r) = if r.norm() < 1e-4 {
            // series in r²; error O(|r|⁸) << 1e-16
            let c = C64::ONE + r2 / 2.0 + r2 * r2 / 24.0 + r2 * r2 * r2 / 720.0;
            let s = C64::ONE + r2 / 6.0 + r2 * r2 / 120.0 + r2 * r2 * r2 / 5040.0;
            (c, s)
        } else {
            (r.cosh(), r.sinh() / r)
        };
        let ea = alpha.exp();
        Mat2::from_pauli(cosh_r, [m[0] * sinhc_r, m[1] * sinhc_r, m[2] * sinhc_r]).scale(ea)
    }

    /// Max-abs difference to another matrix, entrywise.
    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut m = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                m = m.max((self.e[i][j] - other.e[i][j]).norm());
            }
        }
        m
    }

    /// Frobenius distance from unitarity, `‖A†A − I‖_F`.
    pub fn unitarity_residual(&self) -> f64 {
        (self.adjoint() * *self - Mat2::identity()).frobenius_norm()
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let mut m = self;
        for i in 0..2 {
            for j in 0..2 {
                m.e[i][j] += rhs.e[i][j];
            }
        }
        m
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        let mut m = self;
        for i in 0..2 {
            for j in 0..2 {
                m.e[i][j] -= rhs.e[i][j];
            }
        }
        m
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let mut m = Mat2::zero();
        for i in 0..2 {
            for j in 0..2 {
                m.e[i][j] = self.e[i][0] * rhs.e[0][j] + self.e[i][1] * rhs.e[1][j];
            }
        }
        m
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(C64::new(-1.0, 0.0))
    }
}

pub fn normalize2(v: [C64; 2]) -> [C64; 2] {
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    if n == 0.0 {
        return v;
    }
    [v[0] / n, v[1] / n]
}

/// Deterministic global phase: first component with non-negligible modulus
/// is made real positive.
pub fn fix_phase(v: [C64; 2]) -> [C64; 2] {
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    if n == 0.0 {
        return v;
    }
    let lead = if v[0].norm() > 1e-12 * n { v[0] } else { v[1] };
    let phase = lead / lead.norm();
    [v[0] * phase.conj(), v[1] * phase.conj()]
}

fn pick_larger(a: [C64; 2], b: [C64; 2]) -> [C64; 2] {
    let na = a[0].norm_sqr() + a[1].norm_sqr();
    let nb = b[0].norm_sqr() + b[1].norm_sqr();
    if na >= nb {
        a
    } else {
        b
    }
}
