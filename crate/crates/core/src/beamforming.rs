//! Zero-forcing active beamforming for a fixed IRS reflection vector.
//!
//! For a reflection vector `phi` the effective downlink channel is
//! `H = H_r^H diag(phi) G + H_d^H` (K x M). ZF precoding
//! `W = H^H (H H^H)^-1 U^(1/2)` with `u_k = sigma_k^2 gamma_k` meets every
//! SINR target with equality and costs `tr(U (H H^H)^-1)` watts.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::channel::ChannelSet;
use crate::units::{db_to_linear, dbm_to_watts};
use crate::{Error, Result, C64};

/// Gram matrices with reciprocal 1-norm condition number below this are
/// treated as singular.
pub const RCOND_THRESHOLD: f64 = 1e-12;

/// Unit-modulus phasor `exp(j 2pi q / 2^bits)`.
///
/// Quarter turns are returned exactly so that 1- and 2-bit coefficients are
/// exactly `+-1` and `+-j`.
pub fn level_phasor(level: u32, bits: u32) -> C64 {
    let levels = 1u64 << bits;
    let q = level as u64 % levels;
    if (4 * q).is_multiple_of(levels) {
        return match 4 * q / levels {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
    }
    C64::from_polar(1.0, 2.0 * PI * q as f64 / levels as f64)
}

/// IRS phase configuration: one index `q` in `0..2^bits` per element,
/// selecting the coefficient `exp(j q 2pi / 2^bits)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ReflectionVector {
    bits: u32,
    levels: Vec<u32>,
}

impl ReflectionVector {
    pub fn new(bits: u32, levels: Vec<u32>) -> Result<Self> {
        if !(1..=16).contains(&bits) {
            return Err(Error::config("phase_bits", format!("must be in 1..=16, got {bits}")));
        }
        let count = 1u32 << bits;
        if let Some(bad) = levels.iter().position(|&q| q >= count) {
            return Err(Error::config(
                "reflection",
                format!("element {bad} has level {} outside 0..{count}", levels[bad]),
            ));
        }
        Ok(Self { bits, levels })
    }

    /// Every element at level 0 (coefficient +1).
    pub fn zeros(bits: u32, elements: usize) -> Self {
        Self {
            bits,
            levels: vec![0; elements],
        }
    }

    /// Little-endian mixed-radix decoding of `index`: element 0 is the least
    /// significant digit.
    pub fn from_index(bits: u32, elements: usize, mut index: u128) -> Self {
        let radix = 1u128 << bits;
        let levels = (0..elements)
            .map(|_| {
                let digit = (index % radix) as u32;
                index /= radix;
                digit
            })
            .collect();
        Self { bits, levels }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn level_count(&self) -> u32 {
        1 << self.bits
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn set_level(&mut self, element: usize, level: u32) {
        assert!(level < self.level_count(), "level {level} out of range");
        self.levels[element] = level;
    }

    pub fn coefficient(&self, element: usize) -> C64 {
        level_phasor(self.levels[element], self.bits)
    }

    pub fn coefficients(&self) -> DVector<C64> {
        DVector::from_iterator(self.len(), (0..self.len()).map(|n| self.coefficient(n)))
    }

    /// Phase shifts in radians, `q * 2pi / 2^bits`.
    pub fn phases(&self) -> Vec<f64> {
        let step = 2.0 * PI / self.level_count() as f64;
        self.levels.iter().map(|&q| q as f64 * step).collect()
    }
}

/// Per-user SINR targets (linear) and noise powers (watts).
#[derive(Debug, Clone, PartialEq)]
pub struct SinrTargets {
    pub gamma: Vec<f64>,
    pub sigma2: Vec<f64>,
}

impl SinrTargets {
    pub fn new(gamma: Vec<f64>, sigma2: Vec<f64>) -> Result<Self> {
        if gamma.len() != sigma2.len() {
            return Err(Error::config(
                "sinr_targets",
                format!("{} SINR targets but {} noise powers", gamma.len(), sigma2.len()),
            ));
        }
        if let Some(&g) = gamma.iter().find(|&&g| !(g > 0.0 && g.is_finite())) {
            return Err(Error::config("sinr_db", format!("SINR target must be positive, got {g}")));
        }
        if let Some(&s) = sigma2.iter().find(|&&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::config("noise_dbm", format!("noise power must be positive, got {s}")));
        }
        Ok(Self { gamma, sigma2 })
    }

    /// The same target and noise floor for `users` users.
    pub fn uniform_db(users: usize, gamma_db: f64, noise_dbm: f64) -> Result<Self> {
        Self::new(vec![db_to_linear(gamma_db); users], vec![dbm_to_watts(noise_dbm); users])
    }

    pub fn from_db(gamma_db: &[f64], noise_dbm: &[f64]) -> Result<Self> {
        Self::new(
            gamma_db.iter().map(|&g| db_to_linear(g)).collect(),
            noise_dbm.iter().map(|&n| dbm_to_watts(n)).collect(),
        )
    }

    pub fn users(&self) -> usize {
        self.gamma.len()
    }

    /// Allocated powers `u_k = sigma_k^2 gamma_k`.
    pub fn allocation(&self) -> Vec<f64> {
        self.gamma.iter().zip(&self.sigma2).map(|(g, s)| g * s).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingSolution {
    /// Precoder, M x K, column k serves user k.
    pub w: DMatrix<C64>,
    /// `||w_k||^2` per user.
    pub power_per_user: Vec<f64>,
    /// `sum_k ||w_k||^2` in watts, `+inf` when infeasible.
    pub total_power: f64,
    /// `tr(U (H H^H)^-1)` from the Gram factorization, `+inf` when infeasible.
    pub trace_power: f64,
    pub feasible: bool,
}

impl BeamformingSolution {
    fn infeasible(m: usize, k: usize) -> Self {
        Self {
            w: DMatrix::zeros(m, k),
            power_per_user: vec![f64::INFINITY; k],
            total_power: f64::INFINITY,
            trace_power: f64::INFINITY,
            feasible: false,
        }
    }
}

/// `H = H_r^H diag(phi) G + H_d^H`, one row per user.
pub fn effective_channel(channels: &ChannelSet, phi: &ReflectionVector) -> DMatrix<C64> {
    let (n, m) = channels.g.shape();
    assert_eq!(phi.len(), n, "reflection vector length must equal IRS size");
    let k = channels.users();
    let coeffs = phi.coefficients();
    // Row k of the weights is conj(h_r,k) .* phi.
    let weights = DMatrix::from_fn(k, n, |u, e| channels.h_r[u][e].conj() * coeffs[e]);
    let mut h = weights * &channels.g;
    for (u, hd) in channels.h_d.iter().enumerate() {
        for a in 0..m {
            h[(u, a)] += hd[a].conj();
        }
    }
    h
}

fn one_norm(a: &DMatrix<C64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// ZF precoder with the minimum power allocation meeting every SINR target.
///
/// Returns an infeasible solution (power `+inf`) instead of an error when
/// `H H^H` is numerically singular.
pub fn zf_solution(h: &DMatrix<C64>, targets: &SinrTargets) -> Result<BeamformingSolution> {
    let (k, m) = h.shape();
    if k > m {
        return Err(Error::config(
            "users",
            format!("zero-forcing needs K <= M, got K={k} users and M={m} antennas"),
        ));
    }
    if targets.users() != k {
        return Err(Error::config(
            "sinr_targets",
            format!("{} targets for {k} users", targets.users()),
        ));
    }
    let gram = h * h.adjoint();
    let Some(chol) = gram.clone().cholesky() else {
        return Ok(BeamformingSolution::infeasible(m, k));
    };
    let sqrt_u: Vec<f64> = targets.allocation().iter().map(|u| u.sqrt()).collect();
    // X = (H H^H)^-1 U^(1/2); its columns rescaled give (H H^H)^-1 for rcond.
    let x = chol.solve(&DMatrix::from_diagonal(&DVector::from_iterator(
        k,
        sqrt_u.iter().map(|&s| C64::from(s)),
    )));
    let mut inverse = x.clone();
    for (j, s) in sqrt_u.iter().enumerate() {
        inverse.column_mut(j).unscale_mut(*s);
    }
    let rcond = 1.0 / (one_norm(&gram) * one_norm(&inverse));
    if rcond.is_nan() || rcond < RCOND_THRESHOLD {
        return Ok(BeamformingSolution::infeasible(m, k));
    }
    let trace_power: f64 = sqrt_u.iter().enumerate().map(|(j, s)| s * x[(j, j)].re).sum();
    let w = h.adjoint() * x;
    let power_per_user: Vec<f64> = w.column_iter().map(|c| c.norm_squared()).collect();
    let total_power = power_per_user.iter().sum();
    Ok(BeamformingSolution {
        w,
        power_per_user,
        total_power,
        trace_power,
        feasible: true,
    })
}

/// Transmit power of the ZF solution for `phi` (`+inf` when infeasible).
pub fn zf_power(channels: &ChannelSet, targets: &SinrTargets, phi: &ReflectionVector) -> Result<f64> {
    Ok(zf_solution(&effective_channel(channels, phi), targets)?.total_power)
}

/// Achieved SINR of every user under precoder `w`, recomputed from the raw
/// channels entry by entry.
pub fn sinr_audit(channels: &ChannelSet, phi: &ReflectionVector, w: &DMatrix<C64>, sigma2: &[f64]) -> Vec<f64> {
    let (n, m) = channels.g.shape();
    let k = channels.users();
    (0..k)
        .map(|user| {
            let row: Vec<C64> = (0..m)
                .map(|a| {
                    let mut acc = channels.h_d[user][a].conj();
                    for e in 0..n {
                        acc += channels.h_r[user][e].conj() * phi.coefficient(e) * channels.g[(e, a)];
                    }
                    acc
                })
                .collect();
            let gain = |col: usize| -> f64 {
                row.iter()
                    .enumerate()
                    .map(|(a, hk)| hk * w[(a, col)])
                    .sum::<C64>()
                    .norm_sqr()
            };
            let interference: f64 = (0..w.ncols()).filter(|&j| j != user).map(gain).sum();
            gain(user) / (interference + sigma2[user])
        })
        .collect()
}
