//! Catalog of two-band lattice Hamiltonians with tunable exceptional
//! structure, plus additive Pauli perturbations.
//!
//! Three families are provided:
//!
//! * `H1` — 2D, `(2 − cos kx − cos ky) σx + (i/4) σz`; hosts a single
//!   exceptional ring protected by the `q = σx` symmetry.
//! * `H2(m)` — 2D, `(m + 1 − cos kx − cos ky) σx + i sin kx σy + i sin ky σz`;
//!   its exceptional-line pattern morphs with `m` (two loops, collapse,
//!   four pockets, four points).
//! * `Knot(p, q, ε)` — 3D; `f₁ + i f₂ = Z₀^p + Z₁^q` built from lattice maps
//!   `Z₀ = sin kx + i sin ky`, `Z₁ = 2Σcos k − 5 + i sin kz`, embedded as
//!   `d_R = (f₁ − ε, ε, 0)`, `d_I = (0, f₂, √2 ε)`. For coprime `(p, q)` the
//!   exceptional line is a `(p, q)` torus knot; for `(2, 2)` a Hopf link.
//!
//! The perturbation is a complex 3-vector `c`, adding `Σ c_i σ_i`: real parts
//! shift `d_R`, imaginary parts shift `d_I`, so both the symmetry-preserving
//! `i(π/20)σ_y` style terms and the real random `δ_i σ_i` terms use the same
//! mechanism.

use crate::bloch::{BlochGrad, BlochModel, BlochVector};
use crate::mat2::C64;
use crate::momentum::Momentum;
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

/// The reference random perturbation strengths `(δx, δy, δz)` used for the
/// knot-robustness experiments.
pub const PAPER_DELTA: [f64; 3] = [0.3179, 0.3590, 0.2211];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum Family {
    H1,
    H2 {
        m: f64,
    },
    Knot {
        p: u32,
        q_exp: u32,
        epsilon: f64,
        /// Rescale `(Z₀, Z₁)` to the unit 3-sphere before taking powers.
        /// Off by default; the lattice maps are used verbatim.
        #[serde(default)]
        normalized: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(flatten)]
    pub family: Family,
    /// Additive Pauli term `Σ c_i σ_i` with complex `c`.
    #[serde(with = "complex3_pairs", default = "zero_perturbation")]
    pub perturbation: [C64; 3],
}

fn zero_perturbation() -> [C64; 3] {
    [C64::ZERO; 3]
}

/// Serializes the perturbation as three `[re, im]` pairs.
mod complex3_pairs {
    use super::C64;
    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[C64; 3], s: S) -> Result<S::Ok, S::Error> {
        [[v[0].re, v[0].im], [v[1].re, v[1].im], [v[2].re, v[2].im]].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[C64; 3], D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(d)?;
        if pairs.len() != 3 {
            return Err(D::Error::custom("perturbation needs exactly 3 [re, im] pairs"));
        }
        Ok([
            C64::new(pairs[0][0], pairs[0][1]),
            C64::new(pairs[1][0], pairs[1][1]),
            C64::new(pairs[2][0], pairs[2][1]),
        ])
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("momentum dimension {got} does not match model dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("operation is only defined for the knot family")]
    WrongFamily,
    #[error("no closed-form locus: {0}")]
    Unsupported(String),
    #[error("invalid model: {0}")]
    Invalid(String),
}

/// Intermediate quantities of the knot construction at one momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnotIntermediates {
    pub z0: C64,
    pub z1: C64,
    pub f1: f64,
    pub f2: f64,
}

impl ModelSpec {
    pub fn h1() -> Self {
        ModelSpec { family: Family::H1, perturbation: zero_perturbation() }
    }

    pub fn h2(m: f64) -> Self {
        ModelSpec { family: Family::H2 { m }, perturbation: zero_perturbation() }
    }

    pub fn knot(p: u32, q_exp: u32, epsilon: f64) -> Self {
        ModelSpec {
            family: Family::Knot { p, q_exp, epsilon, normalized: false },
            perturbation: zero_perturbation(),
        }
    }

    /// The trefoil model `(p, q) = (3, 2)`, `ε = −20`.
    pub fn trefoil() -> Self {
        ModelSpec::knot(3, 2, -20.0)
    }

    /// The Hopf-link model `(p, q) = (2, 2)`, `ε = −20`.
    pub fn hopf() -> Self {
        ModelSpec::knot(2, 2, -20.0)
    }

    pub fn with_perturbation(mut self, c: [C64; 3]) -> Self {
        self.perturbation = c;
        self
    }

    /// Real perturbation `Σ δ_i σ_i` (shifts `d_R`).
    pub fn with_real_perturbation(self, delta: [f64; 3]) -> Self {
        self.with_perturbation([
            C64::new(delta[0], 0.0),
            C64::new(delta[1], 0.0),
            C64::new(delta[2], 0.0),
        ])
    }

    /// Imaginary perturbation `Σ i β_i σ_i` (shifts `d_I`).
    pub fn with_imag_perturbation(self, beta: [f64; 3]) -> Self {
        self.with_perturbation([
            C64::new(0.0, beta[0]),
            C64::new(0.0, beta[1]),
            C64::new(0.0, beta[2]),
        ])
    }

    pub fn dimension(&self) -> usize {
        match self.family {
            Family::H1 | Family::H2 { .. } => 2,
            Family::Knot { .. } => 3,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if let Family::Knot { p, q_exp, epsilon, .. } = self.family {
            if p < 1 || q_exp < 1 {
                return Err(ModelError::Invalid("knot exponents must be >= 1".into()));
            }
            if epsilon == 0.0 {
                return Err(ModelError::Invalid("knot epsilon must be nonzero".into()));
            }
        }
        if self.perturbation.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(ModelError::Invalid("perturbation must be finite".into()));
        }
        Ok(())
    }

    fn check_dim(&self, k: &Momentum) -> Result<(), ModelError> {
        if k.dim != self.dimension() {
            return Err(ModelError::DimensionMismatch { expected: self.dimension(), got: k.dim });
        }
        Ok(())
    }

    /// Bloch vector at `k`, perturbation folded in. All periodic arithmetic
    /// goes through one canonicalization of the momentum.
    pub fn eval_bloch(&self, k: &Momentum) -> Result<BlochVector, ModelError> {
        self.check_dim(k)?;
        let k = k.canonical();
        let (kx, ky, kz) = (k.coords[0], k.coords[1], k.coords[2]);
        let mut d = match self.family {
            Family::H1 => BlochVector::new(
                [2.0 - kx.cos() - ky.cos(), 0.0, 0.0],
                [0.0, 0.0, 0.25],
            ),
            Family::H2 { m } => BlochVector::new(
                [m + 1.0 - kx.cos() - ky.cos(), 0.0, 0.0],
                [0.0, kx.sin(), ky.sin()],
            ),
            Family::Knot { epsilon, .. } => {
                let f = self.knot_f(&k);
                BlochVector::new(
                    [f.re - epsilon, epsilon, 0.0],
                    [0.0, f.im, SQRT_2 * epsilon],
                )
            }
        };
        for c in 0..3 {
            d.dr[c] += self.perturbation[c].re;
            d.di[c] += self.perturbation[c].im;
        }
        let _ = kz;
        Ok(d)
    }

    fn knot_maps(&self, k: &Momentum) -> (C64, C64) {
        let (kx, ky, kz) = (k.coords[0], k.coords[1], k.coords[2]);
        let z0 = C64::new(kx.sin(), ky.sin());
        let z1 = C64::new(2.0 * (kx.cos() + ky.cos() + kz.cos()) - 5.0, kz.sin());
        (z0, z1)
    }

    fn knot_f(&self, k: &Momentum) -> C64 {
        let Family::Knot { p, q_exp, normalized, .. } = self.family else {
            unreachable!("knot_f called on non-knot family")
        };
        let (mut z0, mut z1) = self.knot_maps(k);
        if normalized {
            let r = (z0.norm_sqr() + z1.norm_sqr()).sqrt();
            z0 /= r;
            z1 /= r;
        }
        pow_by_mul(z0, p) + pow_by_mul(z1, q_exp)
    }

    /// `Z₀`, `Z₁`, `f₁`, `f₂` at `k`. Powers are taken by repeated complex
    /// multiplication, so there are no logarithm branch issues.
    pub fn knot_intermediates(&self, k: &Momentum) -> Result<KnotIntermediates, ModelError> {
        let Family::Knot { normalized, .. } = self.family else {
            return Err(ModelError::WrongFamily);
        };
        self.check_dim(k)?;
        let k = k.canonical();
        let (mut z0, mut z1) = self.knot_maps(&k);
        if normalized {
            let r = (z0.norm_sqr() + z1.norm_sqr()).sqrt();
            z0 /= r;
            z1 /= r;
        }
        let f = self.knot_f(&k);
        Ok(KnotIntermediates { z0, z1, f1: f.re, f2: f.im })
    }

    /// Analytic momentum derivatives of `(d_R, d_I)`. The normalized knot
    /// variant falls back to central finite differences.
    pub fn grad_bloch(&self, k: &Momentum) -> Result<BlochGrad, ModelError> {
        self.check_dim(k)?;
        let k = k.canonical();
        let (kx, ky, kz) = (k.coords[0], k.coords[1], k.coords[2]);
        let mut g = BlochGrad::zero();
        match self.family {
            Family::H1 => {
                g.ddr[0][0] = kx.sin();
                g.ddr[1][0] = ky.sin();
            }
            Family::H2 { .. } => {
                g.ddr[0][0] = kx.sin();
                g.ddr[1][0] = ky.sin();
                g.ddi[0][1] = kx.cos();
                g.ddi[1][2] = ky.cos();
            }
            Family::Knot { p, q_exp, normalized, .. } => {
                if normalized {
                    return Ok(crate::bloch::finite_difference_grad(self, &k));
                }
                let (z0, z1) = self.knot_maps(&k);
                let dz0 = [C64::new(kx.cos(), 0.0), C64::new(0.0, ky.cos()), C64::ZERO];
                let dz1 = [
                    C64::new(-2.0 * kx.sin(), 0.0),
                    C64::new(-2.0 * ky.sin(), 0.0),
                    C64::new(-2.0 * kz.sin(), kz.cos()),
                ];
                let p0 = pow_by_mul(z0, p - 1) * p as f64;
                let p1 = pow_by_mul(z1, q_exp - 1) * q_exp as f64;
                for a in 0..3 {
                    let df = p0 * dz0[a] + p1 * dz1[a];
                    g.ddr[a][0] = df.re;
                    g.ddi[a][1] = df.im;
                }
            }
        }
        Ok(g)
    }

    /// Closed-form scalar equation `g(k) = 0` for the exceptional line of the
    /// symmetric 2D families, perturbation shifts included. Used as a test
    /// oracle and for analytic Fermi-region labels.
    pub fn analytic_ep_locus(&self) -> Result<EpLocus, ModelError> {
        let [cx, cy, cz] = self.perturbation;
        if cx.im != 0.0 || cy.re != 0.0 || cz.re != 0.0 {
            return Err(ModelError::Unsupported(
                "perturbation breaks the q = σx symmetry".into(),
            ));
        }
        match self.family {
            Family::H1 => {
                let di_y = cy.im;
                let di_z = 0.25 + cz.im;
                Ok(EpLocus::H1Ring {
                    dx_crit: (di_y * di_y + di_z * di_z).sqrt(),
                    dx_shift: cx.re,
                })
            }
            Family::H2 { m } => Ok(EpLocus::H2Loops {
                m_eff: m + cx.re,
                shift_y: cy.im,
                shift_z: cz.im,
            }),
            Family::Knot { .. } => {
                Err(ModelError::Unsupported("knot family has no 2D locus".into()))
            }
        }
    }
}

fn pow_by_mul(z: C64, n: u32) -> C64 {
    let mut acc = C64::ONE;
    for _ in 0..n {
        acc *= z;
    }
    acc
}

impl BlochModel for ModelSpec {
    fn dim(&self) -> usize {
        self.dimension()
    }

    fn bloch(&self, k: &Momentum) -> BlochVector {
        self.eval_bloch(k).expect("momentum dimension checked by caller")
    }

    fn grad(&self, k: &Momentum) -> BlochGrad {
        self.grad_bloch(k).expect("momentum dimension checked by caller")
    }
}

/// Zero set descriptor for the exceptional lines of the symmetric families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpLocus {
    /// `(2 − cos kx − cos ky + dx_shift)² = dx_crit²`: a ring at effective
    /// `d_x = dx_crit`.
    H1Ring { dx_crit: f64, dx_shift: f64 },
    /// `(m_eff + 1 − cos kx − cos ky)² = (sin kx + shift_y)² + (sin ky + shift_z)²`.
    H2Loops { m_eff: f64, shift_y: f64, shift_z: f64 },
}

impl EpLocus {
    pub fn eval(&self, k: &Momentum) -> f64 {
        let (kx, ky) = (k.coords[0], k.coords[1]);
        match *self {
            EpLocus::H1Ring { dx_crit, dx_shift } => {
                let dx = 2.0 - kx.cos() - ky.cos() + dx_shift;
                dx * dx - dx_crit * dx_crit
            }
            EpLocus::H2Loops { m_eff, shift_y, shift_z } => {
                let dx = m_eff + 1.0 - kx.cos() - ky.cos();
                let sy = kx.sin() + shift_y;
                let sz = ky.sin() + shift_z;
                dx * dx - sy * sy - sz * sz
            }
        }
    }

    /// Critical effective `d_x` of the H1-family ring.
    pub fn dx_crit(&self) -> Option<f64> {
        match *self {
            EpLocus::H1Ring { dx_crit, .. } => Some(dx_crit),
            _ => None,
        }
    }
}

/// A 3D model restricted to a plane `k[axis] = value`, exposed as a 2D model.
pub struct SlicedModel<'a, M: BlochModel> {
    pub inner: &'a M,
    pub axis: usize,
    pub value: f64,
}

impl<'a, M: BlochModel> SlicedModel<'a, M> {
    pub fn new(inner: &'a M, axis: usize, value: f64) -> Self {
        assert_eq!(inner.dim(), 3, "slicing requires a 3D model");
        assert!(axis < 3);
        SlicedModel { inner, axis, value }
    }

    pub fn lift(&self, k: &Momentum) -> Momentum {
        let mut coords = [0.0; 3];
        let mut free = 0;
        for (c, slot) in coords.iter_mut().enumerate() {
            if c == self.axis {
                *slot = self.value;
            } else {
                *slot = k.coords[free];
                free += 1;
            }
        }
        Momentum { coords, dim: 3 }
    }
}

impl<M: BlochModel> BlochModel for SlicedModel<'_, M> {
    fn dim(&self) -> usize {
        2
    }

    fn bloch(&self, k: &Momentum) -> BlochVector {
        self.inner.bloch(&self.lift(k))
    }

    fn grad(&self, k: &Momentum) -> BlochGrad {
        let g3 = self.inner.grad(&self.lift(k));
        let mut g = BlochGrad::zero();
        let mut free = 0;
        for a in 0..3 {
            if a == self.axis {
                continue;
            }
            g.ddr[free] = g3.ddr[a];
            g.ddi[free] = g3.ddi[a];
            free += 1;
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::{discriminant, finite_difference_grad, symmetry_residual, SymmetryOp};
    use crate::grid::GridSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn h1_at_origin() {
        let d = ModelSpec::h1().eval_bloch(&Momentum::new2(0.0, 0.0)).unwrap();
        assert_eq!(d.dr, [0.0, 0.0, 0.0]);
        assert_eq!(d.di, [0.0, 0.0, 0.25]);
    }

    #[test]
    fn trefoil_at_origin() {
        // Z₀ = 0, Z₁ = 1 → f = 1: d_R = (21, −20, 0), d_I = (0, 0, −20√2)
        let d = ModelSpec::trefoil().eval_bloch(&Momentum::new3(0.0, 0.0, 0.0)).unwrap();
        assert_eq!(d.dr, [21.0, -20.0, 0.0]);
        assert_eq!(d.di[0], 0.0);
        assert_eq!(d.di[1], 0.0);
        assert!((d.di[2] + 20.0 * SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn h2_direct_substitution() {
        let d = ModelSpec::h2(0.4).eval_bloch(&Momentum::new2(FRAC_PI_2, 0.0)).unwrap();
        assert!((d.dr[0] - 0.4).abs() < 1e-15);
        assert_eq!(d.dr[1], 0.0);
        assert_eq!(d.dr[2], 0.0);
        assert_eq!(d.di[0], 0.0);
        assert!((d.di[1] - 1.0).abs() < 1e-15);
        assert_eq!(d.di[2], 0.0);
    }

    #[test]
    fn wrong_dimension_is_rejected() {
        let err = ModelSpec::h1().eval_bloch(&Momentum::new3(0.0, 0.0, 0.0)).unwrap_err();
        assert_eq!(err, ModelError::DimensionMismatch { expected: 2, got: 3 });
    }

    #[test]
    fn knot_intermediates_by_substitution() {
        let spec = ModelSpec::trefoil();
        let ki = spec.knot_intermediates(&Momentum::new3(0.0, 0.0, 0.0)).unwrap();
        assert_eq!(ki.z0, C64::ZERO);
        assert_eq!(ki.z1, C64::ONE);
        assert_eq!((ki.f1, ki.f2), (1.0, 0.0));

        // k = (π/2, 0, 0): Z₀ = 1, Z₁ = 2(0+1+1) − 5 = −1 → f = 1 + 1 = 2
        let ki = spec.knot_intermediates(&Momentum::new3(FRAC_PI_2, 0.0, 0.0)).unwrap();
        assert!((ki.z0 - C64::ONE).norm() < 1e-15);
        assert!((ki.z1 + C64::ONE).norm() < 1e-15);
        assert!((ki.f1 - 2.0).abs() < 1e-14 && ki.f2.abs() < 1e-14);

        // k = (0, π/2, 0): Z₀ = i, Z₁ = −1 → Z₀³ + Z₁² = 1 − i
        let ki = spec.knot_intermediates(&Momentum::new3(0.0, FRAC_PI_2, 0.0)).unwrap();
        assert!((ki.z0 - C64::i()).norm() < 1e-15);
        assert!((ki.f1 - 1.0).abs() < 1e-14);
        assert!((ki.f2 + 1.0).abs() < 1e-14);
    }

    #[test]
    fn knot_intermediates_wrong_family() {
        assert_eq!(
            ModelSpec::h1().knot_intermediates(&Momentum::new2(0.0, 0.0)).unwrap_err(),
            ModelError::WrongFamily
        );
    }

    #[test]
    fn knot_f_consistent_with_powi() {
        let spec = ModelSpec::trefoil();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let k = Momentum::new3(
                rng.gen_range(-PI..PI),
                rng.gen_range(-PI..PI),
                rng.gen_range(-PI..PI),
            );
            let ki = spec.knot_intermediates(&k).unwrap();
            let oracle = ki.z0.powi(3) + ki.z1.powi(2);
            let f = C64::new(ki.f1, ki.f2);
            assert!((f - oracle).norm() <= 1e-12 * oracle.norm().max(1.0));
        }
    }

    #[test]
    fn h1_ring_locus() {
        let locus = ModelSpec::h1().analytic_ep_locus().unwrap();
        assert_eq!(locus.dx_crit(), Some(0.25));
    }

    #[test]
    fn perturbed_h1_ring_matches_reported_value() {
        // i(π/20)σ_y moves the ring to √(1/16 + π²/400) ≈ 0.295
        let spec = ModelSpec::h1().with_imag_perturbation([0.0, PI / 20.0, 0.0]);
        let dx = spec.analytic_ep_locus().unwrap().dx_crit().unwrap();
        let exact = (1.0 / 16.0 + PI * PI / 400.0).sqrt();
        assert_eq!(dx, exact);
        assert!((dx - 0.295).abs() < 1e-3);
    }

    #[test]
    fn symmetry_broken_perturbation_has_no_locus() {
        let spec = ModelSpec::h1().with_imag_perturbation([PI / 20.0, 0.0, 0.0]);
        assert!(matches!(spec.analytic_ep_locus(), Err(ModelError::Unsupported(_))));
    }

    #[test]
    fn h2_tangency_at_sqrt6_over_3() {
        // m = √6 − 1: the diagonal quadratic has a double root at
        // cos k = √6/3, i.e. k ≈ 0.1959π
        let m = 6.0f64.sqrt() - 1.0;
        let locus = ModelSpec::h2(m).analytic_ep_locus().unwrap();
        let k_star = (6.0f64.sqrt() / 3.0).acos();
        assert!((k_star / PI - 0.1959).abs() < 1e-4);
        for (sx, sy) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            let g = locus.eval(&Momentum::new2(sx * k_star, sy * k_star));
            assert!(g.abs() < 1e-12, "tangency violated: {g}");
        }
    }

    #[test]
    fn h1_gradient_stationary_at_origin() {
        let g = ModelSpec::h1().grad_bloch(&Momentum::new2(0.0, 0.0)).unwrap();
        assert_eq!(g, BlochGrad::zero());
    }

    #[test]
    fn h2_gradient_component() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let k = Momentum::new2(rng.gen_range(-PI..PI), rng.gen_range(-PI..PI));
            let g = ModelSpec::h2(0.7).grad_bloch(&k).unwrap();
            assert!((g.ddi[0][1] - k.coords[0].cos()).abs() < 1e-15);
        }
    }

    #[test]
    fn analytic_gradients_match_finite_differences() {
        let specs = vec![
            ModelSpec::h1(),
            ModelSpec::h2(0.4),
            ModelSpec::h2(1.42),
            ModelSpec::trefoil(),
            ModelSpec::hopf(),
            ModelSpec::trefoil().with_real_perturbation(PAPER_DELTA),
            ModelSpec::h1().with_imag_perturbation([0.0, PI / 20.0, 0.0]),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for spec in &specs {
            for _ in 0..100 {
                let k = if spec.dimension() == 2 {
                    Momentum::new2(rng.gen_range(-PI..PI), rng.gen_range(-PI..PI))
                } else {
                    Momentum::new3(
                        rng.gen_range(-PI..PI),
                        rng.gen_range(-PI..PI),
                        rng.gen_range(-PI..PI),
                    )
                };
                let ga = spec.grad_bloch(&k).unwrap();
                let gf = finite_difference_grad(spec, &k);
                for a in 0..spec.dimension() {
                    for c in 0..3 {
                        // knot derivatives reach O(10²), so compare with a
                        // mild relative allowance on top of the 1e-6 floor
                        let scale = 1.0 + ga.ddr[a][c].abs() + ga.ddi[a][c].abs();
                        assert!(
                            (ga.ddr[a][c] - gf.ddr[a][c]).abs() < 1e-6 * scale,
                            "ddr mismatch {spec:?} axis {a} comp {c}"
                        );
                        assert!(
                            (ga.ddi[a][c] - gf.ddi[a][c]).abs() < 1e-6 * scale,
                            "ddi mismatch {spec:?} axis {a} comp {c}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn knot_discriminant_identity() {
        // Im E² = 2εf₂ and Re E² = f₁² − 2εf₁ − f₂², checked against the
        // generic discriminant
        let spec = ModelSpec::trefoil();
        let eps = -20.0;
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..200 {
            let k = Momentum::new3(
                rng.gen_range(-PI..PI),
                rng.gen_range(-PI..PI),
                rng.gen_range(-PI..PI),
            );
            let ki = spec.knot_intermediates(&k).unwrap();
            let disc = discriminant(&spec.eval_bloch(&k).unwrap());
            let re = ki.f1 * ki.f1 - 2.0 * eps * ki.f1 - ki.f2 * ki.f2;
            let im = 2.0 * eps * ki.f2;
            assert!((disc.re - re).abs() <= 1e-10 * re.abs().max(1.0), "re {} vs {}", disc.re, re);
            assert!((disc.im - im).abs() <= 1e-10 * im.abs().max(1.0), "im {} vs {}", disc.im, im);
        }
    }

    #[test]
    fn periodicity_after_canonicalization() {
        let specs = [ModelSpec::h1(), ModelSpec::h2(1.0)];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for spec in &specs {
            for _ in 0..50 {
                let k = Momentum::new2(rng.gen_range(-PI..PI), rng.gen_range(-PI..PI));
                let shifted = Momentum::new2(k.coords[0] + 2.0 * PI, k.coords[1] - 4.0 * PI);
                let a = spec.eval_bloch(&k).unwrap();
                let b = spec.eval_bloch(&shifted).unwrap();
                for c in 0..3 {
                    // adding 2π in floating point perturbs the argument by an
                    // ulp; canonicalization keeps the drift at rounding level
                    assert!((a.dr[c] - b.dr[c]).abs() < 1e-13);
                    assert!((a.di[c] - b.di[c]).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn symmetry_residuals_on_grid() {
        let grid = GridSpec::bz2(101);
        let q = SymmetryOp::sigma_x();

        // symmetric: H1, H2, H1 + i(π/20)σy
        for spec in [
            ModelSpec::h1(),
            ModelSpec::h2(0.4),
            ModelSpec::h1().with_imag_perturbation([0.0, PI / 20.0, 0.0]),
            ModelSpec::h1().with_imag_perturbation([0.0, 0.0, PI / 20.0]),
        ] {
            assert!(symmetry_residual(&spec, &q, &grid) < 1e-12);
        }

        // broken: H1 + i(π/20)σx has residual exactly π/10 in operator norm
        let broken = ModelSpec::h1().with_imag_perturbation([PI / 20.0, 0.0, 0.0]);
        let r = symmetry_residual(&broken, &q, &grid);
        assert!((r - PI / 10.0).abs() < 1e-12, "residual {r}");
    }

    #[test]
    fn pointwise_orthogonality_for_symmetric_models() {
        let grid = GridSpec::bz2(64);
        for spec in [
            ModelSpec::h1(),
            ModelSpec::h2(1.0),
            ModelSpec::h1().with_imag_perturbation([0.0, PI / 20.0, 0.0]),
        ] {
            for k in grid.iter_momenta() {
                let d = spec.eval_bloch(&k).unwrap();
                let dot = crate::bloch::dot(&d.dr, &d.di);
                assert!(dot.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn model_spec_json_round_trip() {
        let spec = ModelSpec::trefoil().with_real_perturbation(PAPER_DELTA);
        let text = serde_json::to_string(&spec).unwrap();
        let back: ModelSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(spec, back);
        // family tag is visible in the document
        assert!(text.contains("\"family\":\"Knot\""));
        assert!(text.contains("\"perturbation\":[[0.3179,0.0]"));
    }

    #[test]
    fn sliced_model_matches_direct_evaluation() {
        let spec = ModelSpec::trefoil();
        let sliced = SlicedModel::new(&spec, 2, 0.65);
        let k2 = Momentum::new2(0.3, -0.7);
        let d2 = sliced.bloch(&k2);
        let d3 = spec.eval_bloch(&Momentum::new3(0.3, -0.7, 0.65)).unwrap();
        assert_eq!(d2, d3);
        let g2 = sliced.grad(&k2);
        let g3 = spec.grad_bloch(&Momentum::new3(0.3, -0.7, 0.65)).unwrap();
        assert_eq!(g2.ddr[0], g3.ddr[0]);
        assert_eq!(g2.ddr[1], g3.ddr[1]);
        assert_eq!(g2.ddi[1], g3.ddi[1]);
    }
}
