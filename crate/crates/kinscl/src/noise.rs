//! Truncated cylindrical noise and reproducible Brownian paths.
//!
//! The noise operator acts through a finite family `g_k(x, u) = alpha_k *
//! P_k(x) * chi(u)` where `P_k` are paired cosine/sine modes of increasing
//! frequency and `chi` is a bounded Lipschitz state profile. The separable
//! form makes the growth and continuity certificates computable in closed
//! form.
//!
//! Brownian increments are generated by the counter-based Philox-2x64-10
//! generator (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3")
//! followed by a Box-Muller transform. Every increment is a pure function of
//! `(seed, step, mode)`, so regeneration is bit-identical regardless of
//! traversal order or thread count.

use crate::error::{Error, Result};
use crate::grid::TorusGrid;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

pub const RNG_ALGORITHM: &str = "philox2x64-10+box-muller";

const PHILOX_M: u64 = 0xD2B7_4407_B1CE_6E93;
const PHILOX_W: u64 = 0x9E37_79B9_7F4A_7C15;

/// One round of Philox-2x64: multiply-hi/lo mix of the counter with the key.
#[inline]
fn philox_round(ctr: [u64; 2], key: u64) -> [u64; 2] {
    let prod = (ctr[0] as u128).wrapping_mul(PHILOX_M as u128);
    let hi = (prod >> 64) as u64;
    let lo = prod as u64;
    [hi ^ key ^ ctr[1], lo]
}

/// Philox-2x64-10: ten rounds with the Weyl-sequence key schedule.
#[inline]
pub fn philox2x64(mut ctr: [u64; 2], mut key: u64) -> [u64; 2] {
    for _ in 0..10 {
        ctr = philox_round(ctr, key);
        key = key.wrapping_add(PHILOX_W);
    }
    ctr
}

/// SplitMix64 finalizer, used to derive independent sub-seeds.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(PHILOX_W);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the seed of ensemble member `sample` from a base seed.
pub fn sample_seed(base: u64, sample: u64) -> u64 {
    mix64(base ^ mix64(sample))
}

#[inline]
fn u64_to_open_unit(x: u64) -> f64 {
    // 53 significant bits, offset by half an ulp so the result is in (0, 1)
    ((x >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
}

/// Standard normal draw for counter `(c0, c1)` under `key`.
#[inline]
fn philox_normal(c0: u64, c1: u64, key: u64) -> f64 {
    let out = philox2x64([c0, c1], key);
    let u1 = u64_to_open_unit(out[0]);
    let u2 = u64_to_open_unit(out[1]);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// How the state profile `chi(u)` couples the noise to the solution value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NoiseMode {
    /// Smooth bump equal to 1 on `[-1/2, 1/2]`, supported in `(-1, 1)`.
    CompactSupport,
    /// `chi(u) = u` on the core region, slope smoothly ramped to zero so the
    /// profile is capped near the configured `u_max`.
    LinearGrowth { u_max: f64 },
    /// `chi ≡ 1`: noise independent of the state (and of xi), as required by
    /// the BGK noise step.
    Additive,
}

/// Finite family `g_k(x,u) = alpha_k P_k(x) chi(u)` with its certificates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub k_modes: usize,
    pub decay: f64,
    pub mode: NoiseMode,
    pub amplitudes: Vec<f64>,
    /// Closed-form bound `D0` with `G^2 <= D0 (1 + u^2)`.
    pub d0_certificate: f64,
    /// Closed-form bound `D1` for the squared continuity modulus with
    /// `h(z) = min(z, 1)`.
    pub d1_certificate: f64,
}

/// Quintic smoothstep on `[0, 1]`; `C^2` with `s(0)=0`, `s(1)=1`.
#[inline]
fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    }
}

// max of d/dt smoothstep = 15/8 at t = 1/2
const SMOOTHSTEP_MAX_SLOPE: f64 = 1.875;

/// Integral of the smoothstep from 0 to t (t in [0,1]).
#[inline]
fn smoothstep_integral(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    let t4 = t * t * t * t;
    t4 * (t * t - 3.0 * t + 2.5)
}

/// The compact bump: 1 on [-1/2,1/2], smooth transition, 0 outside (-1,1).
fn bump(u: f64) -> f64 {
    let a = u.abs();
    if a <= 0.5 {
        1.0
    } else if a >= 1.0 {
        0.0
    } else {
        smoothstep(2.0 * (1.0 - a))
    }
}

const BUMP_LIPSCHITZ: f64 = 2.0 * SMOOTHSTEP_MAX_SLOPE;

/// `u` on `[-0.9 u_max, 0.9 u_max]`, slope ramped smoothly to zero at
/// `|u| = u_max`, constant `0.95 u_max` beyond. Lipschitz constant exactly 1.
fn clipped_linear(u: f64, u_max: f64) -> f64 {
    let a = u.abs();
    let lo = 0.9 * u_max;
    let v = if a <= lo {
        a
    } else if a >= u_max {
        0.95 * u_max
    } else {
        let w = u_max - lo;
        let tau = (a - lo) / w;
        lo + w * (tau - smoothstep_integral(tau))
    };
    v.copysign(u)
}

impl NoiseMode {
    fn chi(&self, u: f64) -> f64 {
        match *self {
            NoiseMode::CompactSupport => bump(u),
            NoiseMode::LinearGrowth { u_max } => clipped_linear(u, u_max),
            NoiseMode::Additive => 1.0,
        }
    }

    fn chi_sup(&self) -> f64 {
        match *self {
            NoiseMode::CompactSupport => 1.0,
            NoiseMode::LinearGrowth { u_max } => 0.95 * u_max,
            NoiseMode::Additive => 1.0,
        }
    }

    fn chi_lipschitz(&self) -> f64 {
        match *self {
            NoiseMode::CompactSupport => BUMP_LIPSCHITZ,
            NoiseMode::LinearGrowth { .. } => 1.0,
            NoiseMode::Additive => 0.0,
        }
    }

    /// Whether `chi(u)^2 <= u^2` holds, which sharpens the D0 certificate.
    fn chi_dominated_by_u(&self) -> bool {
        matches!(self, NoiseMode::LinearGrowth { .. })
    }
}

impl NoiseModel {
    /// Build the model: `alpha_k = 2^(-decay k)`, trig spatial profiles.
    pub fn new(k_modes: usize, decay: f64, mode: NoiseMode) -> Result<Self> {
        if k_modes == 0 {
            return Err(Error::config("noise K must be >= 1"));
        }
        if !(decay > 0.0) {
            return Err(Error::config(format!("noise decay must be > 0, got {decay}")));
        }
        if let NoiseMode::LinearGrowth { u_max } = mode {
            if !(u_max > 0.0) {
                return Err(Error::config("linear_growth u_max must be > 0"));
            }
        }
        let amplitudes: Vec<f64> = (1..=k_modes)
            .map(|k| 2f64.powf(-decay * k as f64))
            .collect();
        let mut model = NoiseModel {
            k_modes,
            decay,
            mode,
            amplitudes,
            d0_certificate: 0.0,
            d1_certificate: 0.0,
        };
        model.d0_certificate = model.compute_d0();
        model.d1_certificate = model.compute_d1();
        Ok(model)
    }

    /// Model with a single zero-amplitude mode: exactly no noise.
    pub fn off() -> Self {
        NoiseModel {
            k_modes: 1,
            decay: 1.0,
            mode: NoiseMode::Additive,
            amplitudes: vec![0.0],
            d0_certificate: 0.0,
            d1_certificate: 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.amplitudes.iter().all(|&a| a == 0.0)
    }

    /// Spatial profile of mode `k` (0-based): cos/sin pairs of frequency
    /// `pair/dim + 1`, alternating axes in dimension 2.
    pub fn spatial_profile(&self, k: usize, x: (f64, f64), dim: usize) -> f64 {
        let pair = k / 2;
        let (freq, coord) = if dim == 1 {
            ((pair + 1) as f64, x.0)
        } else {
            (((pair / 2) + 1) as f64, if pair % 2 == 0 { x.0 } else { x.1 })
        };
        let arg = 2.0 * std::f64::consts::PI * freq * coord;
        if k % 2 == 0 {
            arg.cos()
        } else {
            arg.sin()
        }
    }

    fn spatial_lipschitz(&self, k: usize) -> f64 {
        let pair = k / 2;
        let freq = (pair + 1) as f64; // dimension-1 worst case; 2-d frequencies are no larger
        2.0 * std::f64::consts::PI * freq
    }

    /// `g_k(x, u)` for the 0-based mode index `k`.
    pub fn g(&self, k: usize, x: (f64, f64), u: f64, dim: usize) -> f64 {
        self.amplitudes[k] * self.spatial_profile(k, x, dim) * self.mode.chi(u)
    }

    /// `G^2(x,u) = sum_k g_k^2`.
    pub fn g_squared(&self, x: (f64, f64), u: f64, dim: usize) -> f64 {
        (0..self.k_modes).map(|k| self.g(k, x, u, dim).powi(2)).sum()
    }

    /// Upper bound for `sum_k |g_k|`, used by the L-infinity tolerance.
    pub fn g_max(&self) -> f64 {
        self.amplitudes.iter().sum::<f64>() * self.mode.chi_sup()
    }

    fn compute_d0(&self) -> f64 {
        // G^2 <= (sum alpha_k^2) max|P|^2 max(chi)^2; if chi^2 <= u^2 the same
        // sum bounds G^2 / (1 + u^2) directly.
        let s: f64 = self.amplitudes.iter().map(|a| a * a).sum();
        if self.mode.chi_dominated_by_u() {
            s
        } else {
            s * self.mode.chi_sup().powi(2)
        }
    }

    fn compute_d1(&self) -> f64 {
        // |g_k(x,u)-g_k(y,v)|^2 <= 2 alpha_k^2 [ L_Pk^2 Mchi^2 |x-y|^2
        //   + Mp^2 Lchi max(Lchi, 2 Mchi) |u-v| min(|u-v|,1) ]
        let m_chi = self.mode.chi_sup();
        let l_chi = self.mode.chi_lipschitz();
        let state_factor = l_chi * l_chi.max(2.0 * m_chi);
        (0..self.k_modes)
            .map(|k| {
                let a2 = self.amplitudes[k] * self.amplitudes[k];
                let spatial = self.spatial_lipschitz(k).powi(2) * m_chi * m_chi;
                2.0 * a2 * spatial.max(state_factor)
            })
            .sum()
    }
}

/// Report of `verify_noise_bounds`.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub d0_hat: f64,
    pub d1_hat: f64,
    pub d0_certificate: f64,
    pub d1_certificate: f64,
    pub pass: bool,
}

/// Empirical check of the growth and continuity bounds over sample points
/// `(x, u, y, v)`. Pairs with `(x,u) == (y,v)` are skipped for the `D1`
/// quotient.
pub fn verify_noise_bounds(
    model: &NoiseModel,
    grid: &TorusGrid,
    samples: &[((f64, f64), f64, (f64, f64), f64)],
) -> Result<BoundReport> {
    if samples.is_empty() {
        return Err(Error::config("verify_noise_bounds needs a nonempty sample list"));
    }
    let dim = grid.dim;
    let mut d0_hat: f64 = 0.0;
    let mut d1_hat: f64 = 0.0;
    for &(x, u, y, v) in samples {
        d0_hat = d0_hat.max(model.g_squared(x, u, dim) / (1.0 + u * u));
        if x == y && u == v {
            continue;
        }
        let dx = grid.torus_distance(x, y);
        let du = (u - v).abs();
        let denom = dx * dx + du * du.min(1.0);
        if denom == 0.0 {
            continue;
        }
        let num: f64 = (0..model.k_modes)
            .map(|k| (model.g(k, x, u, dim) - model.g(k, y, v, dim)).powi(2))
            .sum();
        d1_hat = d1_hat.max(num / denom);
    }
    let pass = d0_hat.is_finite()
        && d1_hat.is_finite()
        && d0_hat <= model.d0_certificate
        && d1_hat <= model.d1_certificate;
    Ok(BoundReport {
        d0_hat,
        d1_hat,
        d0_certificate: model.d0_certificate,
        d1_certificate: model.d1_certificate,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq)]
struct FineIncrements {
    seed: u64,
    k_modes: usize,
    dt: f64,
    n_steps: usize,
}

impl FineIncrements {
    /// Increment `Delta beta_k` of the fine step `step`; pure in all indices.
    #[inline]
    fn increment(&self, step: usize, mode: usize) -> f64 {
        philox_normal(step as u64, mode as u64, self.seed) * self.dt.sqrt()
    }
}

/// A realisation of the truncated Wiener path, possibly viewed at a coarser
/// step. Aggregated views share the finest-level data, so re-aggregation is
/// exact: summing blocks always folds the same fine increments left to right.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisePath {
    fine: Arc<FineIncrements>,
    factor: usize,
}

impl NoisePath {
    pub fn seed(&self) -> u64 {
        self.fine.seed
    }

    pub fn k_modes(&self) -> usize {
        self.fine.k_modes
    }

    /// Step size at this aggregation level.
    pub fn dt(&self) -> f64 {
        self.fine.dt * self.factor as f64
    }

    pub fn dt_fine(&self) -> f64 {
        self.fine.dt
    }

    pub fn n_steps(&self) -> usize {
        self.fine.n_steps / self.factor
    }

    /// Increment of Brownian mode `mode` over coarse step `step`.
    pub fn increment(&self, step: usize, mode: usize) -> f64 {
        let base = step * self.factor;
        let mut acc = 0.0;
        for s in 0..self.factor {
            acc += self.fine.increment(base + s, mode);
        }
        acc
    }

    /// All mode increments of one step.
    pub fn increments_at(&self, step: usize) -> Vec<f64> {
        (0..self.k_modes()).map(|k| self.increment(step, k)).collect()
    }

    /// Coarsen by `factor`; rejects non-divisors of the current step count.
    pub fn aggregate(&self, factor: usize) -> Result<NoisePath> {
        if factor == 0 || self.n_steps() % factor != 0 {
            return Err(Error::config(format!(
                "aggregation factor {factor} does not divide {} steps",
                self.n_steps()
            )));
        }
        Ok(NoisePath {
            fine: Arc::clone(&self.fine),
            factor: self.factor * factor,
        })
    }

    /// Sample variance of each mode's increments, for sanity checks.
    pub fn per_mode_variance(&self) -> Vec<f64> {
        (0..self.k_modes())
            .map(|k| {
                let n = self.n_steps();
                let vals: Vec<f64> = (0..n).map(|s| self.increment(s, k)).collect();
                let mean = vals.iter().sum::<f64>() / n as f64;
                vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0)
            })
            .collect()
    }
}

/// Generate the Brownian path shared by all schemes of one sample.
pub fn sample_wiener_path(model: &NoiseModel, t_final: f64, dt_fine: f64, seed: u64) -> Result<NoisePath> {
    if !(t_final > 0.0) {
        return Err(Error::config(format!("T must be positive, got {t_final}")));
    }
    if !(dt_fine > 0.0) {
        return Err(Error::config(format!("dt must be positive, got {dt_fine}")));
    }
    let ratio = t_final / dt_fine;
    let n_steps = ratio.round();
    if (ratio - n_steps).abs() > 1e-9 * ratio.max(1.0) || n_steps < 1.0 {
        return Err(Error::config(format!(
            "T/dt = {ratio} is not integral within rounding tolerance"
        )));
    }
    Ok(NoisePath {
        fine: Arc::new(FineIncrements {
            seed,
            k_modes: model.k_modes,
            dt: dt_fine,
            n_steps: n_steps as usize,
        }),
        factor: 1,
    })
}
