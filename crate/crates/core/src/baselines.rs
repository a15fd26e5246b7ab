//! Reference solvers for the discrete phase search.
//!
//! One evaluation is one effective-channel construction plus one ZF solve.

use std::fmt;

use rand::RngCore;
use rayon::prelude::*;
use serde::Serialize;

use crate::beamforming::{effective_channel, zf_solution, BeamformingSolution, ReflectionVector, SinrTargets};
use crate::channel::ChannelSet;
use crate::rng::substream;
use crate::{Error, Result};

/// Largest search space exhaustive search accepts by default.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    CrossEntropy,
    Exhaustive,
    SuccessiveRefinement,
    Random,
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::CrossEntropy => "ce",
            Method::Exhaustive => "exhaustive",
            Method::SuccessiveRefinement => "successive_refinement",
            Method::Random => "random",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        [Method::CrossEntropy, Method::Exhaustive, Method::SuccessiveRefinement, Method::Random]
            .into_iter()
            .find(|m| m.tag() == tag)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone)]
pub struct BaselineResult {
    pub method: Method,
    pub reflection: ReflectionVector,
    pub solution: BeamformingSolution,
    pub evaluations: u64,
    /// Full sweeps for successive refinement, trials for random sampling,
    /// 1 for exhaustive search.
    pub iterations: usize,
    /// Power after every single-element move (successive refinement only).
    pub move_trace: Vec<f64>,
    /// Some element had no feasible level with the others held fixed.
    pub flagged: bool,
}

impl BaselineResult {
    pub fn power(&self) -> f64 {
        self.solution.total_power
    }
}

fn score(channels: &ChannelSet, targets: &SinrTargets, phi: &ReflectionVector) -> Result<BeamformingSolution> {
    zf_solution(&effective_channel(channels, phi), targets)
}

/// Lower power wins; ties go to the lower index.
fn better(a: (f64, u128), b: (f64, u128)) -> (f64, u128) {
    match a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)) {
        std::cmp::Ordering::Greater => b,
        _ => a,
    }
}

/// Size of the search space `(2^bits)^elements`, `None` on overflow.
pub fn search_space(elements: usize, bits: u32) -> Option<u128> {
    1u128.checked_shl(bits)?.checked_pow(u32::try_from(elements).ok()?)
}

/// Score every reflection vector and return the cheapest feasible one.
///
/// Candidates are enumerated in little-endian mixed-radix order; ties keep
/// the first found.
pub fn exhaustive_search(channels: &ChannelSet, targets: &SinrTargets, bits: u32, cap: u128) -> Result<BaselineResult> {
    channels.validate()?;
    let n = channels.irs_elements();
    let total = search_space(n, bits).filter(|&t| t <= cap).ok_or(Error::EnumerationCap {
        required: search_space(n, bits).unwrap_or(u128::MAX),
        allowed: cap,
    })?;
    let total_u64 = u64::try_from(total).expect("cap fits in u64");
    let (best_power, best_index) = (0..total_u64)
        .into_par_iter()
        .map(|i| {
            let phi = ReflectionVector::from_index(bits, n, i as u128);
            score(channels, targets, &phi).map(|s| (s.total_power, i as u128))
        })
        .try_reduce(|| (f64::INFINITY, u128::MAX), |a, b| Ok(better(a, b)))?;
    if !best_power.is_finite() {
        return Err(Error::AllInfeasible {
            method: Method::Exhaustive.to_string(),
        });
    }
    let reflection = ReflectionVector::from_index(bits, n, best_index);
    let solution = score(channels, targets, &reflection)?;
    Ok(BaselineResult {
        method: Method::Exhaustive,
        reflection,
        solution,
        evaluations: total_u64,
        iterations: 1,
        move_trace: Vec::new(),
        flagged: false,
    })
}

/// Coordinate descent over IRS elements.
///
/// Each sweep visits elements `0..N` in order; every element tries all
/// `2^bits` levels with the rest fixed and moves only on a strict power
/// decrease. Stops after a sweep without moves or after `max_sweeps`.
pub fn successive_refinement(
    channels: &ChannelSet,
    targets: &SinrTargets,
    start: ReflectionVector,
    max_sweeps: usize,
) -> Result<BaselineResult> {
    channels.validate()?;
    if max_sweeps == 0 {
        return Err(Error::config("successive_refinement.max_sweeps", "must be positive"));
    }
    let n = channels.irs_elements();
    if start.len() != n {
        return Err(Error::config(
            "successive_refinement.start",
            format!("start has {} elements, IRS has {n}", start.len()),
        ));
    }
    let levels = start.level_count();
    let mut phi = start;
    let mut move_trace = Vec::with_capacity(n * max_sweeps);
    let mut evaluations = 0u64;
    let mut flagged = false;
    let mut sweeps = 0;

    while sweeps < max_sweeps {
        sweeps += 1;
        let mut changed = false;
        for element in 0..n {
            let powers: Vec<f64> = (0..levels)
                .into_par_iter()
                .map(|q| {
                    let mut trial = phi.clone();
                    trial.set_level(element, q);
                    score(channels, targets, &trial).map(|s| s.total_power)
                })
                .collect::<Result<_>>()?;
            evaluations += levels as u64;
            let current = phi.levels()[element];
            let mut pick = current;
            for (q, &p) in powers.iter().enumerate() {
                if p < powers[pick as usize] {
                    pick = q as u32;
                }
            }
            if powers.iter().all(|p| !p.is_finite()) {
                flagged = true;
            }
            if pick != current {
                phi.set_level(element, pick);
                changed = true;
            }
            move_trace.push(powers[pick as usize]);
        }
        if !changed {
            break;
        }
    }

    let solution = score(channels, targets, &phi)?;
    if !solution.feasible {
        return Err(Error::AllInfeasible {
            method: Method::SuccessiveRefinement.to_string(),
        });
    }
    Ok(BaselineResult {
        method: Method::SuccessiveRefinement,
        reflection: phi,
        solution,
        evaluations,
        iterations: sweeps,
        move_trace,
        flagged,
    })
}

/// Best of `trials` uniformly random reflection vectors. Trial `t` is drawn
/// from `substream(seed, [t])` with `seed` taken from `rng`.
pub fn random_phases<R: RngCore + ?Sized>(
    rng: &mut R,
    channels: &ChannelSet,
    targets: &SinrTargets,
    bits: u32,
    trials: usize,
) -> Result<BaselineResult> {
    channels.validate()?;
    if trials == 0 {
        return Err(Error::config("random.trials", "must be positive"));
    }
    let seed = rng.next_u64();
    let n = channels.irs_elements();
    let draw = |t: usize| {
        let model = crate::ce::ProbabilityModel::uniform_categorical(n, bits);
        crate::ce::sample_candidate(&mut substream(seed, &[t as u64]), &model)
    };
    let (best_power, best_index) = (0..trials)
        .into_par_iter()
        .map(|t| score(channels, targets, &draw(t)).map(|s| (s.total_power, t as u128)))
        .try_reduce(|| (f64::INFINITY, u128::MAX), |a, b| Ok(better(a, b)))?;
    if !best_power.is_finite() {
        return Err(Error::AllInfeasible {
            method: Method::Random.to_string(),
        });
    }
    let reflection = draw(best_index as usize);
    let solution = score(channels, targets, &reflection)?;
    Ok(BaselineResult {
        method: Method::Random,
        reflection,
        solution,
        evaluations: trials as u64,
        iterations: trials,
        move_trace: Vec::new(),
        flagged: false,
    })
}
