//! Cross-entropy search over discrete IRS reflection vectors.
//!
//! Each iteration samples `S` candidates from a product distribution over
//! the phase levels, scores them by ZF transmit power, keeps the `S_elite`
//! cheapest and refits the distribution to the elites. The refit is the
//! closed-form cross-entropy minimizer: the per-element elite frequency of
//! each level. For 1-bit phases the model is a Bernoulli vector
//! `p_n = P(phi_n = +1)`; for `Q > 1` it is an `N x 2^Q` categorical table.

use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beamforming::{effective_channel, zf_solution, BeamformingSolution, ReflectionVector, SinrTargets};
use crate::channel::ChannelSet;
use crate::rng::substream;
use crate::{Error, Result};

/// Sampling distribution over reflection vectors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ProbabilityModel {
    /// `p[n]` is the probability that element `n` reflects with `+1`
    /// (level 0); otherwise it reflects with `-1` (level 1).
    Bernoulli(Vec<f64>),
    /// Row-major `elements x 2^bits` table; row `n` is the distribution of
    /// element `n` over the phase levels.
    Categorical { bits: u32, probs: Vec<f64> },
}

impl ProbabilityModel {
    /// Uniform categorical model, allowed for any `bits >= 1`.
    pub fn uniform_categorical(elements: usize, bits: u32) -> Self {
        let levels = 1usize << bits;
        ProbabilityModel::Categorical {
            bits,
            probs: vec![1.0 / levels as f64; elements * levels],
        }
    }

    pub fn elements(&self) -> usize {
        match self {
            ProbabilityModel::Bernoulli(p) => p.len(),
            ProbabilityModel::Categorical { bits, probs } => probs.len() >> bits,
        }
    }

    pub fn bits(&self) -> u32 {
        match self {
            ProbabilityModel::Bernoulli(_) => 1,
            ProbabilityModel::Categorical { bits, .. } => *bits,
        }
    }

    /// Distribution of element `n` over its levels.
    pub fn row(&self, n: usize) -> Vec<f64> {
        match self {
            ProbabilityModel::Bernoulli(p) => vec![p[n], 1.0 - p[n]],
            ProbabilityModel::Categorical { bits, probs } => {
                let l = 1usize << bits;
                probs[n * l..(n + 1) * l].to_vec()
            }
        }
    }

    pub fn is_valid(&self) -> bool {
        match self {
            ProbabilityModel::Bernoulli(p) => p.iter().all(|&x| (0.0..=1.0).contains(&x)),
            ProbabilityModel::Categorical { bits, probs } => probs.chunks(1 << bits).all(|row| {
                row.iter().all(|&x| x >= 0.0) && (row.iter().sum::<f64>() - 1.0).abs() < 1e-12
            }),
        }
    }

    /// Every element puts all mass on a single level.
    pub fn is_degenerate(&self) -> bool {
        match self {
            ProbabilityModel::Bernoulli(p) => p.iter().all(|&x| x == 0.0 || x == 1.0),
            ProbabilityModel::Categorical { bits, probs } => {
                probs.chunks(1 << bits).all(|row| row.contains(&1.0))
            }
        }
    }

    /// Most probable level per element (lowest level on ties).
    pub fn mode(&self) -> ReflectionVector {
        let levels = (0..self.elements())
            .map(|n| {
                let row = self.row(n);
                let mut best = 0;
                for (q, &x) in row.iter().enumerate() {
                    if x > row[best] {
                        best = q;
                    }
                }
                best as u32
            })
            .collect();
        ReflectionVector::new(self.bits(), levels).expect("mode levels are in range")
    }
}

/// Starting model: `p = 1/2` for one bit, uniform over `2^bits` levels
/// otherwise.
pub fn init_model(elements: usize, bits: u32) -> Result<ProbabilityModel> {
    if elements == 0 {
        return Err(Error::config("irs", "IRS must have at least one element"));
    }
    match bits {
        0 => Err(Error::config("phase_bits", "must be at least 1")),
        1 => Ok(ProbabilityModel::Bernoulli(vec![0.5; elements])),
        2..=16 => Ok(ProbabilityModel::uniform_categorical(elements, bits)),
        _ => Err(Error::config("phase_bits", format!("must be at most 16, got {bits}"))),
    }
}

fn sample_level<R: Rng + ?Sized>(rng: &mut R, row: &[f64]) -> u32 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_supported = 0;
    for (q, &p) in row.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last_supported = q;
        if u < acc {
            return q as u32;
        }
    }
    // Rounding left u above the accumulated mass.
    last_supported as u32
}

/// Draw one reflection vector, element by element.
pub fn sample_candidate<R: Rng + ?Sized>(rng: &mut R, model: &ProbabilityModel) -> ReflectionVector {
    let levels = match model {
        ProbabilityModel::Bernoulli(p) => p
            .iter()
            .map(|&pn| if rng.random::<f64>() < pn { 0 } else { 1 })
            .collect(),
        ProbabilityModel::Categorical { bits, probs } => probs
            .chunks(1 << bits)
            .map(|row| sample_level(rng, row))
            .collect(),
    };
    ReflectionVector::new(model.bits(), levels).expect("sampled levels are in range")
}

pub fn sample_candidates<R: Rng + ?Sized>(rng: &mut R, model: &ProbabilityModel, count: usize) -> Vec<ReflectionVector> {
    (0..count).map(|_| sample_candidate(rng, model)).collect()
}

/// Indices of the `count` smallest finite powers, ties to the lower index.
pub fn select_elites(powers: &[f64], count: usize) -> std::result::Result<Vec<usize>, EliteShortfall> {
    let mut finite: Vec<usize> = (0..powers.len()).filter(|&i| powers[i].is_finite()).collect();
    if finite.len() < count {
        return Err(EliteShortfall {
            feasible: finite.len(),
            required: count,
        });
    }
    finite.sort_by(|&a, &b| powers[a].total_cmp(&powers[b]).then(a.cmp(&b)));
    finite.truncate(count);
    Ok(finite)
}

/// Not enough feasible candidates to fill the elite set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EliteShortfall {
    pub feasible: usize,
    pub required: usize,
}

fn blend(new: f64, old: f64, smoothing: f64) -> f64 {
    if smoothing == 1.0 {
        new
    } else {
        smoothing * new + (1.0 - smoothing) * old
    }
}

/// 1-bit refit: `p_n` becomes the fraction of elites with `phi_n = +1`,
/// optionally blended with the previous model.
pub fn update_bernoulli(model: &ProbabilityModel, elites: &[&ReflectionVector], smoothing: f64) -> ProbabilityModel {
    let ProbabilityModel::Bernoulli(old) = model else {
        panic!("update_bernoulli needs a Bernoulli model");
    };
    assert!(!elites.is_empty(), "elite set is empty");
    let count = elites.len() as f64;
    let p = old
        .iter()
        .enumerate()
        .map(|(n, &prev)| {
            let plus = elites.iter().filter(|e| e.levels()[n] == 0).count() as f64;
            blend(plus / count, prev, smoothing)
        })
        .collect();
    ProbabilityModel::Bernoulli(p)
}

/// Multi-level refit: `p_{q,n}` becomes the fraction of elites with
/// element `n` at level `q`, optionally blended with the previous model.
pub fn update_categorical(model: &ProbabilityModel, elites: &[&ReflectionVector], smoothing: f64) -> ProbabilityModel {
    let ProbabilityModel::Categorical { bits, probs } = model else {
        panic!("update_categorical needs a categorical model");
    };
    assert!(!elites.is_empty(), "elite set is empty");
    let levels = 1usize << bits;
    let mut counts = vec![0usize; probs.len()];
    for e in elites {
        for (n, &q) in e.levels().iter().enumerate() {
            counts[n * levels + q as usize] += 1;
        }
    }
    let total = elites.len() as f64;
    let probs = counts
        .iter()
        .zip(probs)
        .map(|(&c, &prev)| blend(c as f64 / total, prev, smoothing))
        .collect();
    ProbabilityModel::Categorical { bits: *bits, probs }
}

/// Dispatch to the refit matching the model kind.
pub fn update_model(model: &ProbabilityModel, elites: &[&ReflectionVector], smoothing: f64) -> ProbabilityModel {
    match model {
        ProbabilityModel::Bernoulli(_) => update_bernoulli(model, elites, smoothing),
        ProbabilityModel::Categorical { .. } => update_categorical(model, elites, smoothing),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CeConfig {
    /// Candidates drawn per iteration (`S`).
    pub candidates: usize,
    /// Elites kept per iteration (`S_elite`).
    pub elites: usize,
    /// Iteration budget (`I`).
    pub iterations: usize,
    /// Weight of the refit in the model update; 1 replaces the model.
    #[serde(default = "default_smoothing")]
    pub smoothing: f64,
    /// Stop once every element has collapsed onto one level.
    #[serde(default)]
    pub early_stop: bool,
    /// Keep a copy of the model in every trace record.
    #[serde(default)]
    pub record_models: bool,
}

fn default_smoothing() -> f64 {
    1.0
}

impl CeConfig {
    pub fn new(candidates: usize, elites: usize, iterations: usize) -> Self {
        Self {
            candidates,
            elites,
            iterations,
            smoothing: 1.0,
            early_stop: false,
            record_models: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.candidates == 0 {
            return Err(Error::config("ce.candidates", "must be positive"));
        }
        if self.elites == 0 || self.elites > self.candidates {
            return Err(Error::config(
                "ce.elites",
                format!("must be in 1..={}, got {}", self.candidates, self.elites),
            ));
        }
        if self.iterations == 0 {
            return Err(Error::config("ce.iterations", "must be positive"));
        }
        if !(self.smoothing > 0.0 && self.smoothing <= 1.0) {
            return Err(Error::config("ce.smoothing", format!("must be in (0, 1], got {}", self.smoothing)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Cheapest candidate of this iteration.
    pub best_power: f64,
    /// Cheapest candidate over this and all earlier iterations.
    pub best_so_far: f64,
    pub elite_mean_power: f64,
    pub feasible: usize,
    pub evaluated: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ProbabilityModel>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CeTrace {
    pub records: Vec<IterationRecord>,
}

impl CeTrace {
    /// Total `(phi, ZF)` scorings across all iterations.
    pub fn evaluations(&self) -> usize {
        self.records.iter().map(|r| r.evaluated).sum()
    }

    pub fn best_so_far(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.best_so_far).collect()
    }
}

#[derive(Debug, Clone)]
pub struct CeOutcome {
    pub reflection: ReflectionVector,
    pub solution: BeamformingSolution,
    pub trace: CeTrace,
    /// Base seed drawn from the caller's generator; candidate `s` of
    /// iteration `i` is sampled from `substream(seed, [i, s])`.
    pub seed: u64,
}

/// Run the cross-entropy search and return the cheapest candidate seen in
/// any iteration.
///
/// One `u64` is drawn from `rng`; all candidate sampling is keyed off it, so
/// the result does not depend on how scoring is spread over threads.
pub fn run_ce<R: RngCore + ?Sized>(
    rng: &mut R,
    channels: &ChannelSet,
    targets: &SinrTargets,
    bits: u32,
    cfg: &CeConfig,
) -> Result<CeOutcome> {
    cfg.validate()?;
    channels.validate()?;
    let seed = rng.next_u64();
    let mut model = init_model(channels.irs_elements(), bits)?;
    let mut best: Option<(ReflectionVector, BeamformingSolution)> = None;
    let mut trace = CeTrace::default();

    for iteration in 0..cfg.iterations {
        let scored: Vec<(ReflectionVector, BeamformingSolution)> = (0..cfg.candidates)
            .into_par_iter()
            .map(|s| {
                let mut r = substream(seed, &[iteration as u64, s as u64]);
                let phi = sample_candidate(&mut r, &model);
                let sol = zf_solution(&effective_channel(channels, &phi), targets)?;
                Ok((phi, sol))
            })
            .collect::<Result<_>>()?;
        let powers: Vec<f64> = scored.iter().map(|(_, s)| s.total_power).collect();
        let elites = select_elites(&powers, cfg.elites).map_err(|e| Error::InsufficientFeasible {
            seed,
            iteration,
            feasible: e.feasible,
            required: e.required,
        })?;

        let leader = elites[0];
        if best.as_ref().is_none_or(|(_, b)| powers[leader] < b.total_power) {
            best = Some(scored[leader].clone());
        }
        let best_so_far = best.as_ref().map_or(f64::INFINITY, |(_, b)| b.total_power);
        let elite_mean_power = elites.iter().map(|&i| powers[i]).sum::<f64>() / elites.len() as f64;

        let elite_refs: Vec<&ReflectionVector> = elites.iter().map(|&i| &scored[i].0).collect();
        model = update_model(&model, &elite_refs, cfg.smoothing);
        debug_assert!(model.is_valid());

        trace.records.push(IterationRecord {
            iteration,
            best_power: powers[leader],
            best_so_far,
            elite_mean_power,
            feasible: powers.iter().filter(|p| p.is_finite()).count(),
            evaluated: cfg.candidates,
            model: cfg.record_models.then(|| model.clone()),
        });

        if cfg.early_stop && model.is_degenerate() {
            break;
        }
    }

    let (reflection, solution) = best.ok_or_else(|| Error::AllInfeasible {
        method: format!("cross-entropy (seed {seed})"),
    })?;
    Ok(CeOutcome {
        reflection,
        solution,
        trace,
        seed,
    })
}
