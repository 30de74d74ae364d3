//! Single-photon interferometric measurement of complex eigenenergies,
//! simulated end to end.
//!
//! The pipeline per momentum sector and band: shift the Hamiltonian by
//! `d₀σ₀` so the evolution `exp(−iH′)` is passive (no gain), decompose it
//! into unitaries around a polarization-dependent loss element, prepare the
//! eigenstate, form the interferometer's ideal projective probabilities in
//! the `{H, V, +, R}` bases, draw Poissonian coincidence counts, and invert
//! the counts back to the complex phase `E′`. The physical eigenenergy is
//! `E = E′ − d₀`.
//!
//! Count inversion (transmitted arm):
//! `E′ = i ln( (2N₊−N_H−N_V)/(2N_H) + i (N_H+N_V−2N_R)/(2N_H) )`,
//! principal branch; the reflected arm uses `2N_V` denominators and a
//! sign-flipped imaginary part.

use crate::bloch::{norm3, spectrum_with_cap, BlochModel, ComplexSpectrum, DEFAULT_CONDITION_CAP};
use crate::grid::GridSpec;
use crate::mat2::{Mat2, C64};
use crate::momentum::Momentum;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShiftMode {
    /// One `Λ = max_k λ_k` over a covering grid, as in the defining map.
    Global,
    /// `Λ` evaluated at the measured momentum only. Default for simulation:
    /// a global shift makes transmitted amplitudes unmeasurably small for
    /// models whose `‖d_I‖` varies strongly across the zone.
    PerK,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Band {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Arm {
    TPrime,
    RPrime,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeasureError {
    #[error("evolution is not passive: largest singular value {0}")]
    NotPassive(f64),
    #[error("denominator count is zero")]
    ZeroDenominator,
    #[error("counts give a vanishing logarithm argument")]
    DegenerateCounts,
    #[error("eigenvector condition number {0:.3e} exceeds the cap")]
    NearEp(f64),
}

/// `H′ = H + d₀σ₀` with `d₀ = i ln√(1/Λ)`, `Λ` kept in the log domain.
#[derive(Debug, Clone, Copy)]
pub struct ShiftedHamiltonian {
    pub h_prime: Mat2,
    pub d0: C64,
    pub log_lambda: f64,
    pub mode: ShiftMode,
}

/// `log Λ` of one momentum, computed with the pre-conditioning shift `μ`:
/// the matrix `exp(−iH − μσ₀) = e^{−μ} exp(−iH)` keeps every entry O(1)
/// for `μ ≥ ‖d_I‖`, and `log λ_k = 2(log s_max + μ)` restores the value.
fn log_lambda_at<M: BlochModel>(model: &M, k: &Momentum, mu: f64) -> f64 {
    let h = model.hamiltonian(k);
    let minus_i_h = h.scale(-C64::i());
    let conditioned = (minus_i_h + Mat2::identity().scale(C64::new(-mu, 0.0))).exp();
    let s = conditioned.spectral_norm();
    2.0 * (s.ln() + mu)
}

/// Precomputed global normalization `Λ = max_k λ_k` over a covering grid.
#[derive(Debug, Clone, Copy)]
pub struct GlobalShift {
    pub log_lambda: f64,
}

pub fn passivity_shift_global<M: BlochModel>(model: &M, grid: &GridSpec) -> GlobalShift {
    let mu = (0..grid.n_points())
        .into_par_iter()
        .map(|i| norm3(&model.bloch(&grid.momentum_at(i)).di))
        .reduce(|| 0.0, f64::max);
    let log_lambda = (0..grid.n_points())
        .into_par_iter()
        .map(|i| log_lambda_at(model, &grid.momentum_at(i), mu))
        .reduce(|| f64::NEG_INFINITY, f64::max);
    GlobalShift { log_lambda }
}

/// Builds the shifted Hamiltonian at `k`, either from a precomputed global
/// `Λ` or from the local one.
pub fn passivity_shift<M: BlochModel>(
    model: &M,
    k: &Momentum,
    mode: ShiftMode,
    global: Option<&GlobalShift>,
) -> ShiftedHamiltonian {
    let log_lambda = match mode {
        ShiftMode::Global => {
            global
                .expect("global shift mode needs a precomputed GlobalShift")
                .log_lambda
        }
        ShiftMode::PerK => {
            let mu = norm3(&model.bloch(k).di);
            log_lambda_at(model, k, mu)
        }
    };
    let d0 = C64::new(0.0, -0.5 * log_lambda);
    ShiftedHamiltonian {
        h_prime: model.hamiltonian(k) + Mat2::identity().scale(d0),
        d0,
        log_lambda,
        mode,
    }
}

impl ShiftedHamiltonian {
    /// The passive evolution `U′ = exp(−iH′)`.
    pub fn evolution(&self) -> Mat2 {
        self.h_prime.scale(-C64::i()).exp()
    }

    pub fn spectrum(&self) -> ComplexSpectrum {
        spectrum_with_cap(&self.h_prime, DEFAULT_CONDITION_CAP)
    }
}

/// `U′ = R₂ · L(l) · R₁ · attenuation` with the polarization-dependent loss
/// `L(l) = |V⟩⟨H| + l|H⟩⟨V|`.
#[derive(Debug, Clone, Copy)]
pub struct GateDecomposition {
    pub r1: Mat2,
    pub r2: Mat2,
    pub l: f64,
    /// Uniform attenuation `s₁` absorbed outside `L` (the single-parameter
    /// loss element cannot carry it).
    pub global_attenuation: f64,
}

pub fn loss_operator(l: f64) -> Mat2 {
    Mat2::new(C64::ZERO, C64::new(l, 0.0), C64::ONE, C64::ZERO)
}

/// Splits a passive evolution into unitaries around the loss element via the
/// singular value decomposition: `U′ = W diag(s₁, s₂) X† = (W·swap) · L(s₂/s₁)
/// · X† · s₁`.
pub fn decompose(u_prime: &Mat2) -> Result<GateDecomposition, MeasureError> {
    let (w, s, x) = u_prime.svd();
    if s[0] > 1.0 + 1e-9 {
        return Err(MeasureError::NotPassive(s[0]));
    }
    let swap = crate::mat2::PAULI_X;
    Ok(GateDecomposition {
        r1: x.adjoint(),
        r2: w * swap,
        l: if s[0] > 0.0 { s[1] / s[0] } else { 1.0 },
        global_attenuation: s[0],
    })
}

impl GateDecomposition {
    pub fn reconstruct(&self) -> Mat2 {
        (self.r2 * loss_operator(self.l) * self.r1).scale(C64::new(self.global_attenuation, 0.0))
    }
}

/// Eigenstate preparation: unit-norm right eigenvector of `H′` with the
/// deterministic phase convention, plus the near-EP flag the caller decides
/// how to handle.
pub struct PreparedState {
    pub amplitudes: [C64; 2],
    pub near_ep: bool,
    pub condition_number: f64,
}

pub fn prepare_eigenstate(sh: &ShiftedHamiltonian, band: Band) -> PreparedState {
    let sp = sh.spectrum();
    let amplitudes = match band {
        Band::Plus => sp.psi_plus,
        Band::Minus => sp.psi_minus,
    };
    PreparedState { amplitudes, near_ep: sp.defective, condition_number: sp.condition_number }
}

/// Ideal projective detection weights in the `{H, V, +, R}` bases for one
/// interferometer arm. The weights carry the arm amplitude (`|α|²/2` for
/// T′, `|β|²/2` for R′), so `expected_total × weight` is a Poisson mean.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ArmWeights {
    pub p: [f64; 4],
    pub arm: Arm,
    pub arm_weight: f64,
}

pub fn ideal_probabilities(psi: &[C64; 2], e_prime: C64, arm: Arm) -> ArmWeights {
    let z = (-C64::i() * e_prime).exp();
    let sqrt_half = std::f64::consts::FRAC_1_SQRT_2;
    let v: [C64; 2] = match arm {
        Arm::TPrime => [psi[0] * sqrt_half, psi[0] * z * sqrt_half],
        Arm::RPrime => [psi[1] * z * sqrt_half, psi[1] * sqrt_half],
    };
    let p_h = v[0].norm_sqr();
    let p_v = v[1].norm_sqr();
    let p_plus = (v[0] + v[1]).norm_sqr() / 2.0;
    let p_r = (v[0] + C64::i() * v[1]).norm_sqr() / 2.0;
    let arm_weight = match arm {
        Arm::TPrime => psi[0].norm_sqr() / 2.0,
        Arm::RPrime => psi[1].norm_sqr() / 2.0,
    };
    ArmWeights { p: [p_h, p_v, p_plus, p_r], arm, arm_weight }
}

/// Simulated coincidence counts `{N_H, N_V, N_+, N_R}` for one sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRecord {
    pub n_h: u64,
    pub n_v: u64,
    pub n_plus: u64,
    pub n_r: u64,
    pub arm: Arm,
}

impl CountRecord {
    pub fn as_f64(&self) -> [f64; 4] {
        [self.n_h as f64, self.n_v as f64, self.n_plus as f64, self.n_r as f64]
    }
}

/// Each basis is a separate experimental run, so the four counts are
/// independent Poisson draws (not one multinomial split).
pub fn sample_counts(weights: &ArmWeights, expected_total: f64, rng: &mut ChaCha8Rng) -> CountRecord {
    assert!(expected_total > 0.0);
    let mut draw = |p: f64| -> u64 {
        let mean = expected_total * p;
        if mean <= 0.0 {
            0
        } else {
            Poisson::new(mean).expect("positive mean").sample(rng) as u64
        }
    };
    CountRecord {
        n_h: draw(weights.p[0]),
        n_v: draw(weights.p[1]),
        n_plus: draw(weights.p[2]),
        n_r: draw(weights.p[3]),
        arm: weights.arm,
    }
}

/// Count-to-phase inversion, principal branch (`n = 0`). Works on real
/// count values so the noiseless pipeline can feed exact weights through
/// the same formula.
pub fn invert_counts(counts: &[f64; 4], arm: Arm) -> Result<C64, MeasureError> {
    let (n_h, n_v, n_plus, n_r) = (counts[0], counts[1], counts[2], counts[3]);
    let den = match arm {
        Arm::TPrime => 2.0 * n_h,
        Arm::RPrime => 2.0 * n_v,
    };
    if den == 0.0 {
        return Err(MeasureError::ZeroDenominator);
    }
    let re = (2.0 * n_plus - n_h - n_v) / den;
    let im = match arm {
        Arm::TPrime => (n_h + n_v - 2.0 * n_r) / den,
        Arm::RPrime => (2.0 * n_r - n_h - n_v) / den,
    };
    let w = C64::new(re, im);
    if w == C64::ZERO {
        return Err(MeasureError::DegenerateCounts);
    }
    Ok(C64::i() * w.ln())
}

/// First-order propagation of the independent Poisson variances through the
/// inversion formula, for the standard error of `Re E′`.
pub fn stderr_re_e_prime(counts: &[f64; 4], arm: Arm) -> f64 {
    let (n_h, n_v, n_plus, n_r) = (counts[0], counts[1], counts[2], counts[3]);
    let den = match arm {
        Arm::TPrime => 2.0 * n_h,
        Arm::RPrime => 2.0 * n_v,
    };
    if den == 0.0 {
        return f64::INFINITY;
    }
    let re = (2.0 * n_plus - n_h - n_v) / den;
    let im = match arm {
        Arm::TPrime => (n_h + n_v - 2.0 * n_r) / den,
        Arm::RPrime => (2.0 * n_r - n_h - n_v) / den,
    };
    let r2 = re * re + im * im;
    if r2 == 0.0 {
        return f64::INFINITY;
    }
    // φ = −atan2(im, re)
    let dphi_dre = im / r2;
    let dphi_dim = -re / r2;

    // partials of (re, im) with respect to the four counts
    let (dre, dim) = match arm {
        Arm::TPrime => (
            [-(1.0 + 2.0 * re) / den, -1.0 / den, 2.0 / den, 0.0],
            [(1.0 - 2.0 * im) / den, 1.0 / den, 0.0, -2.0 / den],
        ),
        Arm::RPrime => (
            [-1.0 / den, -(1.0 + 2.0 * re) / den, 2.0 / den, 0.0],
            [-1.0 / den, -(1.0 + 2.0 * im) / den, 0.0, 2.0 / den],
        ),
    };
    let mut var = 0.0;
    for i in 0..4 {
        let dphi = dphi_dre * dre[i] + dphi_dim * dim[i];
        var += dphi * dphi * counts[i]; // Var(N) ≈ N for Poisson
    }
    var.sqrt()
}

#[derive(Debug, Clone)]
pub struct MeasureConfig {
    pub expected_total: f64,
    pub master_seed: u64,
    pub trial: u64,
    pub shift_mode: ShiftMode,
    /// Covering grid for the global `Λ` (required in `Global` mode).
    pub shift_grid: Option<GridSpec>,
    /// Feed exact weights through the inversion instead of sampling.
    pub noiseless: bool,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        MeasureConfig {
            expected_total: 1e4,
            master_seed: 7,
            trial: 0,
            shift_mode: ShiftMode::PerK,
            shift_grid: None,
            noiseless: false,
        }
    }
}

/// One measured `(k, band)` sector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub k: Momentum,
    pub band: Band,
    pub arm: Arm,
    pub d0: C64,
    /// Recovered `E′` (principal branch) and `E = E′ − d₀`; absent when the
    /// sector failed.
    pub e_prime: Option<C64>,
    pub e_recovered: Option<C64>,
    /// `+2nπ` branch offset applied to `Re E′` by the unwrap pass.
    pub branch_index: i64,
    pub stderr_estimate: f64,
    pub near_ep: bool,
    pub counts: [f64; 4],
    pub error: Option<String>,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn derive_seed(master: u64, k_index: u64, band: u64, trial: u64) -> u64 {
    let mut x = splitmix64(master);
    x = splitmix64(x ^ splitmix64(k_index));
    x = splitmix64(x ^ splitmix64(band));
    x = splitmix64(x ^ splitmix64(trial));
    x
}

/// Full pipeline over a momentum list, both bands per momentum. Per-sector
/// failures are recorded in the result rather than aborting the batch. The
/// RNG is split per `(k, band, trial)` from the master seed, so parallel
/// and serial execution produce identical counts.
pub fn measure_band_structure<M: BlochModel>(
    model: &M,
    momenta: &[Momentum],
    config: &MeasureConfig,
) -> Vec<MeasurementRecord> {
    let global = match config.shift_mode {
        ShiftMode::Global => {
            let grid = config
                .shift_grid
                .clone()
                .expect("global shift mode needs a covering grid");
            Some(passivity_shift_global(model, &grid))
        }
        ShiftMode::PerK => None,
    };

    momenta
        .par_iter()
        .enumerate()
        .flat_map(|(ki, k)| {
            [(Band::Plus, 0u64), (Band::Minus, 1u64)]
                .into_par_iter()
                .map(move |(band, bi)| {
                    measure_one(model, k, ki as u64, band, bi, config, global.as_ref())
                })
        })
        .collect()
}

fn measure_one<M: BlochModel>(
    model: &M,
    k: &Momentum,
    k_index: u64,
    band: Band,
    band_index: u64,
    config: &MeasureConfig,
    global: Option<&GlobalShift>,
) -> MeasurementRecord {
    let sh = passivity_shift(model, k, config.shift_mode, global);
    let sp = sh.spectrum();
    let prepared = prepare_eigenstate(&sh, band);
    let psi = prepared.amplitudes;
    let e_prime_true = match band {
        Band::Plus => sp.e_plus,
        Band::Minus => sp.e_minus,
    };

    // the decomposition is a realizability check of the optical network
    let decomposition_error = decompose(&sh.evolution()).err();

    // measure the arm with the larger amplitude
    let arm = if psi[0].norm() >= psi[1].norm() { Arm::TPrime } else { Arm::RPrime };
    let weights = ideal_probabilities(&psi, e_prime_true, arm);

    let counts: [f64; 4] = if config.noiseless {
        [
            config.expected_total * weights.p[0],
            config.expected_total * weights.p[1],
            config.expected_total * weights.p[2],
            config.expected_total * weights.p[3],
        ]
    } else {
        let seed = derive_seed(config.master_seed, k_index, band_index, config.trial);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        sample_counts(&weights, config.expected_total, &mut rng).as_f64()
    };

    let inverted = invert_counts(&counts, arm);
    let (e_prime, e_recovered, error) = match (&inverted, &decomposition_error) {
        (Ok(ep), None) => (Some(*ep), Some(*ep - sh.d0), None),
        (Ok(ep), Some(de)) => (Some(*ep), Some(*ep - sh.d0), Some(de.to_string())),
        (Err(ie), _) => (None, None, Some(ie.to_string())),
    };

    MeasurementRecord {
        k: *k,
        band,
        arm,
        d0: sh.d0,
        e_prime,
        e_recovered,
        branch_index: 0,
        stderr_estimate: stderr_re_e_prime(&counts, arm),
        near_ep: prepared.near_ep,
        counts,
        error,
    }
}

/// Optional branch unwrap: walks records (one band) along a path, choosing
/// the `+2nπ` branch of each `Re E′` that is closest to its predecessor.
pub fn unwrap_along_path(records: &mut [MeasurementRecord]) {
    let mut prev: Option<f64> = None;
    for r in records.iter_mut() {
        let (Some(ep), Some(erec)) = (r.e_prime, r.e_recovered) else {
            continue;
        };
        if let Some(p) = prev {
            let n = ((p - ep.re) / (2.0 * PI)).round();
            r.branch_index = n as i64;
            let shift = 2.0 * PI * n;
            r.e_prime = Some(C64::new(ep.re + shift, ep.im));
            r.e_recovered = Some(C64::new(erec.re + shift, erec.im));
        }
        prev = Some(r.e_prime.unwrap().re);
    }
}
