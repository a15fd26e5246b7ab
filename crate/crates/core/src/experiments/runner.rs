//! Scenario runners.
//!
//! Trial `t` draws its channels from `substream(seed, [CHANNEL, t])`, so all
//! methods, SINR targets and candidate counts inside one run see the same
//! channel realizations (paired comparisons). Method randomness comes from
//! separate streams keyed by the trial and the method. Trials run in
//! parallel; results are collected in trial order.

use rayon::prelude::*;
use serde::Serialize;

use crate::baselines::{exhaustive_search, BaselineResult, random_phases, search_space, successive_refinement, Method};
use crate::beamforming::{ReflectionVector, SinrTargets};
use crate::ce::{run_ce, CeConfig, CeOutcome};
use crate::channel::{generate_channels, ChannelSet, UpaGeometry};
use crate::experiments::config::{SrStart, SystemConfig};
use crate::rng::substream;
use crate::units::watts_to_dbm;
use crate::Result;

const STREAM_CHANNEL: u64 = 1;
const STREAM_METHOD: u64 = 2;

/// Channel realization of trial `trial`.
pub fn trial_channels(cfg: &SystemConfig, trial: usize) -> Result<ChannelSet> {
    generate_channels(&mut substream(cfg.seed, &[STREAM_CHANNEL, trial as u64]), &cfg.channel_spec())
}

fn method_stream(cfg: &SystemConfig, trial: usize, method: Method, extra: u64) -> crate::rng::StreamRng {
    substream(cfg.seed, &[STREAM_METHOD, trial as u64, method as u64, extra])
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation; 0 for fewer than two values.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// CE run for one trial at candidate count `candidates` and phase
/// resolution `bits`.
pub fn ce_trial(cfg: &SystemConfig, trial: usize, ce: &CeConfig, bits: u32, targets: &SinrTargets) -> Result<CeOutcome> {
    let channels = trial_channels(cfg, trial)?;
    let mut rng = method_stream(cfg, trial, Method::CrossEntropy, ((bits as u64) << 32) | ce.candidates as u64);
    run_ce(&mut rng, &channels, targets, bits, ce)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    #[serde(rename = "S")]
    pub candidates: usize,
    pub iteration: usize,
    pub mean_power_dbm: f64,
    pub std: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    #[serde(rename = "S")]
    pub candidates: usize,
    pub trial: usize,
    pub iteration: usize,
    pub best_power_dbm: f64,
    pub best_so_far_dbm: f64,
    pub elite_mean_dbm: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Default)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub traces: Vec<TraceRow>,
}

impl ConvergenceReport {
    /// Seed-averaged best-so-far curve (dBm) for one candidate count.
    pub fn curve(&self, candidates: usize) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.candidates == candidates)
            .map(|r| r.mean_power_dbm)
            .collect()
    }

    /// Final best-so-far power (dBm) of every trial for one candidate count.
    pub fn final_powers(&self, candidates: usize) -> Vec<f64> {
        let last = self.traces.iter().filter(|r| r.candidates == candidates).map(|r| r.iteration).max();
        self.traces
            .iter()
            .filter(|r| r.candidates == candidates && Some(r.iteration) == last)
            .map(|r| r.best_so_far_dbm)
            .collect()
    }
}

/// Best-so-far CE power per iteration, averaged in dBm over trials, for
/// each candidate count (elites = `elite_fraction * S`).
pub fn run_convergence(cfg: &SystemConfig, candidate_counts: &[usize]) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let targets = cfg.targets(cfg.primary_sinr_db())?;
    let mut report = ConvergenceReport::default();
    for &s in candidate_counts {
        let ce = CeConfig {
            candidates: s,
            elites: cfg.convergence.elites_for(s),
            ..cfg.ce
        };
        let outcomes: Vec<CeOutcome> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| ce_trial(cfg, t, &ce, cfg.phase_bits, &targets))
            .collect::<Result<_>>()?;
        for (trial, out) in outcomes.iter().enumerate() {
            for r in &out.trace.records {
                report.traces.push(TraceRow {
                    candidates: s,
                    trial,
                    iteration: r.iteration,
                    best_power_dbm: watts_to_dbm(r.best_power),
                    best_so_far_dbm: watts_to_dbm(r.best_so_far),
                    elite_mean_dbm: watts_to_dbm(r.elite_mean_power),
                    seed: cfg.seed,
                });
            }
        }
        let iterations = outcomes.iter().map(|o| o.trace.records.len()).max().unwrap_or(0);
        for it in 0..iterations {
            // Early-stopped runs hold their final value.
            let at: Vec<f64> = outcomes
                .iter()
                .map(|o| {
                    let recs = &o.trace.records;
                    watts_to_dbm(recs[it.min(recs.len() - 1)].best_so_far)
                })
                .collect();
            report.rows.push(ConvergenceRow {
                candidates: s,
                iteration: it,
                mean_power_dbm: mean(&at),
                std: std_dev(&at),
                seed: cfg.seed,
            });
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub method: String,
    pub gamma_db: f64,
    pub mean_power_dbm: f64,
    pub std: f64,
    /// Mean `(phi, ZF)` scorings per trial.
    pub evaluations: f64,
    pub seed: u64,
}

/// Power and cost of one method on one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodRun {
    pub power_watts: f64,
    pub evaluations: u64,
}

/// The `random` method of trial `trial`.
pub fn random_baseline(
    cfg: &SystemConfig,
    trial: usize,
    channels: &ChannelSet,
    targets: &SinrTargets,
) -> Result<BaselineResult> {
    let mut rng = method_stream(cfg, trial, Method::Random, 0);
    random_phases(&mut rng, channels, targets, cfg.phase_bits, cfg.baselines.random_trials)
}

/// Run `method` on the channels of `trial`.
pub fn run_method(
    cfg: &SystemConfig,
    trial: usize,
    channels: &ChannelSet,
    targets: &SinrTargets,
    method: Method,
) -> Result<MethodRun> {
    let bits = cfg.phase_bits;
    let (power_watts, evaluations) = match method {
        Method::CrossEntropy => {
            let mut rng = method_stream(cfg, trial, method, 0);
            let out = run_ce(&mut rng, channels, targets, bits, &cfg.ce)?;
            (out.solution.total_power, out.trace.evaluations() as u64)
        }
        Method::Exhaustive => {
            let r = exhaustive_search(channels, targets, bits, cfg.baselines.exhaustive_cap as u128)?;
            (r.power(), r.evaluations)
        }
        Method::SuccessiveRefinement => {
            // A warm start is charged with the random draws it took.
            let (start, start_cost) = match cfg.baselines.sr_start {
                SrStart::Zeros => (ReflectionVector::zeros(bits, channels.irs_elements()), 0),
                SrStart::BestRandom => {
                    let r = random_baseline(cfg, trial, channels, targets)?;
                    (r.reflection, r.evaluations)
                }
            };
            let r = successive_refinement(channels, targets, start, cfg.baselines.sr_max_sweeps)?;
            (r.power(), r.evaluations + start_cost)
        }
        Method::Random => {
            let r = random_baseline(cfg, trial, channels, targets)?;
            (r.power(), r.evaluations)
        }
    };
    Ok(MethodRun {
        power_watts,
        evaluations,
    })
}

/// Mean transmit power per (method, SINR target). Exhaustive search is
/// skipped when the search space exceeds the configured cap.
pub fn run_sinr_sweep(cfg: &SystemConfig, methods: &[Method]) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let within_cap = search_space(cfg.irs.len(), cfg.phase_bits)
        .is_some_and(|s| s <= cfg.baselines.exhaustive_cap as u128);
    let methods: Vec<Method> = methods
        .iter()
        .copied()
        .filter(|&m| m != Method::Exhaustive || within_cap)
        .collect();
    let channels: Vec<ChannelSet> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| trial_channels(cfg, t))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for &method in &methods {
        for &gamma_db in &cfg.sinr_db {
            let targets = cfg.targets(gamma_db)?;
            let runs: Vec<MethodRun> = channels
                .par_iter()
                .enumerate()
                .map(|(t, ch)| run_method(cfg, t, ch, &targets, method))
                .collect::<Result<_>>()?;
            let dbm: Vec<f64> = runs.iter().map(|r| watts_to_dbm(r.power_watts)).collect();
            let evals: Vec<f64> = runs.iter().map(|r| r.evaluations as f64).collect();
            rows.push(SweepRow {
                method: method.tag().to_string(),
                gamma_db,
                mean_power_dbm: mean(&dbm),
                std: std_dev(&dbm),
                evaluations: mean(&evals),
                seed: cfg.seed,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityRow {
    #[serde(rename = "N")]
    pub irs_elements: usize,
    #[serde(rename = "Q")]
    pub bits: u32,
    pub ce_model: f64,
    pub sr_model: f64,
    pub ce_measured: Option<u64>,
    pub sr_measured: Option<u64>,
    pub sr_sweeps: Option<usize>,
    pub seed: u64,
}

/// Model costs for every `(N, Q)` pair, with measured evaluation counts
/// from CE and successive-refinement runs on an `N x 1` IRS when
/// `complexity.measure` is set.
pub fn run_complexity(cfg: &SystemConfig, irs_elements: &[usize]) -> Result<Vec<ComplexityRow>> {
    cfg.validate()?;
    let model = cfg.cost_model();
    let targets = cfg.targets(cfg.primary_sinr_db())?;
    let mut rows = Vec::new();
    for &n in irs_elements {
        for &bits in &cfg.complexity.phase_bits {
            let (ce_measured, sr_measured, sr_sweeps) = if cfg.complexity.measure {
                let sized = SystemConfig {
                    irs: UpaGeometry::new(n, 1).with_spacing(cfg.irs.spacing_over_wavelength),
                    phase_bits: bits,
                    ..cfg.clone()
                };
                let channels = trial_channels(&sized, 0)?;
                let mut rng = method_stream(&sized, 0, Method::CrossEntropy, n as u64);
                let ce = run_ce(&mut rng, &channels, &targets, bits, &cfg.ce)?;
                let sr = successive_refinement(
                    &channels,
                    &targets,
                    ReflectionVector::zeros(bits, n),
                    cfg.baselines.sr_max_sweeps,
                )?;
                (
                    Some(ce.trace.evaluations() as u64),
                    Some(sr.evaluations),
                    Some(sr.iterations),
                )
            } else {
                (None, None, None)
            };
            rows.push(ComplexityRow {
                irs_elements: n,
                bits,
                ce_model: model.ce_cost(n),
                sr_model: model.sr_cost(n, bits),
                ce_measured,
                sr_measured,
                sr_sweeps,
                seed: cfg.seed,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRow {
    pub trial: usize,
    pub ce_power_dbm: f64,
    pub exhaustive_power_dbm: f64,
    pub sr_power_dbm: f64,
    pub random_power_dbm: f64,
    pub gap_db: f64,
    pub ce_optimal: bool,
    pub sr_optimal: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, Default)]
pub struct OracleReport {
    pub rows: Vec<OracleRow>,
    /// Raw powers in watts per trial: (ce, exhaustive, sr, random).
    pub powers: Vec<[f64; 4]>,
}

impl OracleReport {
    pub fn median_gap_db(&self) -> f64 {
        median(&self.rows.iter().map(|r| r.gap_db).collect::<Vec<_>>())
    }

    pub fn ce_match_rate(&self) -> f64 {
        self.rows.iter().filter(|r| r.ce_optimal).count() as f64 / self.rows.len() as f64
    }

    pub fn sr_match_rate(&self) -> f64 {
        self.rows.iter().filter(|r| r.sr_optimal).count() as f64 / self.rows.len() as f64
    }
}

/// CE, successive refinement and random sampling against the exhaustive
/// optimum on every trial, at the first configured SINR.
pub fn run_oracle_compare(cfg: &SystemConfig) -> Result<OracleReport> {
    cfg.validate()?;
    let targets = cfg.targets(cfg.primary_sinr_db())?;
    let powers: Vec<[f64; 4]> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let ch = trial_channels(cfg, t)?;
            let mut out = [0.0; 4];
            let methods = [Method::CrossEntropy, Method::Exhaustive, Method::SuccessiveRefinement, Method::Random];
            for (slot, m) in out.iter_mut().zip(methods) {
                *slot = run_method(cfg, t, &ch, &targets, m)?.power_watts;
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let rel_eq = |a: f64, b: f64| (a - b).abs() <= 1e-10 * b.abs();
    let rows = powers
        .iter()
        .enumerate()
        .map(|(trial, &[ce, ex, sr, rnd])| OracleRow {
            trial,
            ce_power_dbm: watts_to_dbm(ce),
            exhaustive_power_dbm: watts_to_dbm(ex),
            sr_power_dbm: watts_to_dbm(sr),
            random_power_dbm: watts_to_dbm(rnd),
            gap_db: watts_to_dbm(ce) - watts_to_dbm(ex),
            ce_optimal: rel_eq(ce, ex),
            sr_optimal: rel_eq(sr, ex),
            seed: cfg.seed,
        })
        .collect();
    Ok(OracleReport { rows, powers })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_statistics() {
        assert_eq!(mean(&[1.0, 2.0, 3.0]), 2.0);
        assert_eq!(std_dev(&[5.0]), 0.0);
        assert!((std_dev(&[1.0, 2.0, 3.0]) - 1.0).abs() < 1e-15);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn trial_channels_are_reproducible_and_distinct() {
        let cfg = SystemConfig::builtin("small-oracle").unwrap();
        assert_eq!(trial_channels(&cfg, 3).unwrap(), trial_channels(&cfg, 3).unwrap());
        assert_ne!(trial_channels(&cfg, 3).unwrap(), trial_channels(&cfg, 4).unwrap());
    }

    #[test]
    fn sweep_skips_exhaustive_above_cap() {
        let mut cfg = SystemConfig::builtin("desk").unwrap();
        cfg.trials = 2;
        cfg.sinr_db = vec![10.0];
        cfg.ce = CeConfig::new(10, 2, 3);
        let rows = run_sinr_sweep(&cfg, &[Method::Exhaustive, Method::Random]).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].method, "random");
    }
}
