//! Scenario configuration, read from TOML.
//!
//! Physical quantities carry their unit in the field name (`*_dbm`, `*_db`,
//! `*_m`, `*_ghz`). Every section except the array geometries has defaults;
//! see the built-in scenarios and `scenarios/*.toml` for complete files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baselines::{Method, DEFAULT_ENUMERATION_CAP};
use crate::beamforming::SinrTargets;
use crate::ce::CeConfig;
use crate::experiments::cost::CostModel;
use crate::channel::{ChannelSpec, PathLossModel, UpaGeometry};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathCounts {
    pub bs_irs: usize,
    pub irs_user: usize,
    pub bs_user: usize,
}

impl Default for PathCounts {
    fn default() -> Self {
        Self {
            bs_irs: 4,
            irs_user: 5,
            bs_user: 3,
        }
    }
}

/// Candidate-count sweep for the convergence experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceConfig {
    pub candidates: Vec<usize>,
    /// `S_elite / S`; the elite count is rounded and clamped to `1..=S`.
    pub elite_fraction: f64,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            candidates: vec![20, 50, 100],
            elite_fraction: 0.2,
        }
    }
}

impl ConvergenceConfig {
    pub fn elites_for(&self, candidates: usize) -> usize {
        ((candidates as f64 * self.elite_fraction).round() as usize).clamp(1, candidates)
    }
}

/// Starting point of successive refinement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SrStart {
    /// Every element at phase 0.
    #[default]
    Zeros,
    /// The best vector of the trial's random-phase baseline (same draws as
    /// the `random` method), so refinement never ends above it.
    BestRandom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineConfig {
    /// Any of `ce`, `exhaustive`, `successive_refinement`, `random`.
    pub methods: Vec<String>,
    pub random_trials: usize,
    pub sr_max_sweeps: usize,
    pub sr_start: SrStart,
    pub exhaustive_cap: u64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            methods: vec!["ce".into(), "successive_refinement".into(), "random".into()],
            random_trials: 10,
            sr_max_sweeps: 100,
            sr_start: SrStart::Zeros,
            exhaustive_cap: DEFAULT_ENUMERATION_CAP as u64,
        }
    }
}

impl BaselineConfig {
    pub fn parsed_methods(&self) -> Result<Vec<Method>> {
        self.methods
            .iter()
            .map(|m| {
                Method::from_tag(m).ok_or_else(|| {
                    Error::config(
                        "baselines.methods",
                        format!("unknown method `{m}` (expected ce, exhaustive, successive_refinement, random)"),
                    )
                })
            })
            .collect()
    }
}

/// Complexity comparison: closed-form operation counts at the `model_*`
/// sizes, plus measured evaluation counts from runs on the scenario's own
/// BS and users with an `N x 1` IRS.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ComplexityConfig {
    pub irs_elements: Vec<usize>,
    pub phase_bits: Vec<u32>,
    pub model_candidates: usize,
    pub model_elites: usize,
    pub model_iterations: usize,
    pub model_bs_antennas: usize,
    pub model_users: usize,
    /// Also run CE and successive refinement at each size.
    pub measure: bool,
}

impl Default for ComplexityConfig {
    fn default() -> Self {
        Self {
            irs_elements: vec![16, 36, 64, 100, 144, 225, 400, 625],
            phase_bits: vec![1, 2],
            model_candidates: 200,
            model_elites: 40,
            model_iterations: 50,
            model_bs_antennas: 64,
            model_users: 4,
            measure: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub users: usize,
    #[serde(default = "default_bits")]
    pub phase_bits: u32,
    /// SINR targets swept by `sweep-sinr`; the first one is used elsewhere.
    pub sinr_db: Vec<f64>,
    /// One value for all users, or one per user.
    #[serde(default = "default_noise")]
    pub noise_dbm: Vec<f64>,
    /// Informational; only the element spacing ratio enters the model.
    #[serde(default = "default_carrier")]
    pub carrier_ghz: f64,
    pub bs: UpaGeometry,
    pub irs: UpaGeometry,
    #[serde(default)]
    pub paths: PathCounts,
    #[serde(default)]
    pub path_loss: PathLossModel,
    pub ce: CeConfig,
    #[serde(default)]
    pub convergence: ConvergenceConfig,
    #[serde(default)]
    pub baselines: BaselineConfig,
    #[serde(default)]
    pub complexity: ComplexityConfig,
}

fn default_name() -> String {
    "custom".into()
}
fn default_trials() -> usize {
    20
}
fn default_bits() -> u32 {
    1
}
fn default_noise() -> Vec<f64> {
    vec![-90.0]
}
fn default_carrier() -> f64 {
    30.0
}

impl SystemConfig {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let cfg: SystemConfig = toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_string(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.bs.validate("bs")?;
        self.irs.validate("irs")?;
        if self.users == 0 {
            return Err(Error::config("users", "must be positive"));
        }
        if self.users > self.bs.len() {
            return Err(Error::config(
                "users",
                format!("{} users exceed the {} BS antennas", self.users, self.bs.len()),
            ));
        }
        if !(1..=16).contains(&self.phase_bits) {
            return Err(Error::config("phase_bits", format!("must be in 1..=16, got {}", self.phase_bits)));
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be positive"));
        }
        if self.sinr_db.is_empty() || self.sinr_db.iter().any(|g| !g.is_finite()) {
            return Err(Error::config("sinr_db", "needs at least one finite value"));
        }
        if !(self.noise_dbm.len() == 1 || self.noise_dbm.len() == self.users)
            || self.noise_dbm.iter().any(|n| !n.is_finite())
        {
            return Err(Error::config(
                "noise_dbm",
                format!("needs 1 or {} finite values, got {:?}", self.users, self.noise_dbm),
            ));
        }
        for (field, count) in [
            ("paths.bs_irs", self.paths.bs_irs),
            ("paths.irs_user", self.paths.irs_user),
            ("paths.bs_user", self.paths.bs_user),
        ] {
            if count == 0 {
                return Err(Error::config(field, "path count must be at least 1"));
            }
        }
        self.path_loss.validate()?;
        self.ce.validate()?;
        if self.convergence.candidates.is_empty() || self.convergence.candidates.contains(&0) {
            return Err(Error::config("convergence.candidates", "needs positive candidate counts"));
        }
        if !(self.convergence.elite_fraction > 0.0 && self.convergence.elite_fraction <= 1.0) {
            return Err(Error::config("convergence.elite_fraction", "must be in (0, 1]"));
        }
        self.baselines.parsed_methods()?;
        if self.baselines.random_trials == 0 {
            return Err(Error::config("baselines.random_trials", "must be positive"));
        }
        if self.baselines.sr_max_sweeps == 0 {
            return Err(Error::config("baselines.sr_max_sweeps", "must be positive"));
        }
        let c = &self.complexity;
        if c.irs_elements.contains(&0) {
            return Err(Error::config("complexity.irs_elements", "must be positive"));
        }
        if c.phase_bits.iter().any(|b| !(1..=16).contains(b)) {
            return Err(Error::config("complexity.phase_bits", "must be in 1..=16"));
        }
        for (field, v) in [
            ("complexity.model_candidates", c.model_candidates),
            ("complexity.model_elites", c.model_elites),
            ("complexity.model_iterations", c.model_iterations),
            ("complexity.model_bs_antennas", c.model_bs_antennas),
            ("complexity.model_users", c.model_users),
        ] {
            if v == 0 {
                return Err(Error::config(field, "must be positive"));
            }
        }
        Ok(())
    }

    pub fn channel_spec(&self) -> ChannelSpec {
        ChannelSpec {
            bs: self.bs,
            irs: self.irs,
            users: self.users,
            paths_bs_irs: self.paths.bs_irs,
            paths_irs_user: self.paths.irs_user,
            paths_bs_user: self.paths.bs_user,
            path_loss: self.path_loss,
        }
    }

    /// Per-user targets at a common SINR of `gamma_db`.
    pub fn targets(&self, gamma_db: f64) -> Result<SinrTargets> {
        let noise: Vec<f64> = if self.noise_dbm.len() == 1 {
            vec![self.noise_dbm[0]; self.users]
        } else {
            self.noise_dbm.clone()
        };
        SinrTargets::from_db(&vec![gamma_db; self.users], &noise)
    }

    /// Closed-form cost model at the `complexity.model_*` sizes.
    pub fn cost_model(&self) -> CostModel {
        let c = &self.complexity;
        CostModel {
            iterations: c.model_iterations,
            candidates: c.model_candidates,
            users: c.model_users,
            bs_antennas: c.model_bs_antennas,
        }
    }

    /// SINR used by single-target experiments.
    pub fn primary_sinr_db(&self) -> f64 {
        self.sinr_db[0]
    }

    pub fn builtin(name: &str) -> Option<Self> {
        let cfg = match name {
            "desk" => desk(),
            "small-oracle" => small_oracle(),
            "large-converge" => large_converge(),
            "large-sweep-q1" => large_sweep(1),
            "large-sweep-q2" => large_sweep(2),
            "large-complexity" => large_complexity(),
            _ => return None,
        };
        Some(cfg)
    }

    pub const BUILTIN_NAMES: [&'static str; 6] =
        ["desk", "small-oracle", "large-converge", "large-complexity", "large-sweep-q1", "large-sweep-q2"];
}

/// CI-sized scenario: M=8, N=32, K=2, S=50, S_elite=10, I=50, 20 trials.
fn desk() -> SystemConfig {
    SystemConfig {
        name: "desk".into(),
        seed: 2021,
        trials: 20,
        users: 2,
        phase_bits: 1,
        sinr_db: vec![0.0, 5.0, 10.0, 15.0, 20.0],
        noise_dbm: vec![-90.0],
        carrier_ghz: 30.0,
        bs: UpaGeometry::new(4, 2),
        irs: UpaGeometry::new(8, 4),
        paths: PathCounts::default(),
        path_loss: PathLossModel::default(),
        ce: CeConfig::new(50, 10, 50),
        convergence: ConvergenceConfig::default(),
        baselines: BaselineConfig::default(),
        complexity: ComplexityConfig::default(),
    }
}

/// Small instance where exhaustive search is cheap: M=4, K=2, N=8.
fn small_oracle() -> SystemConfig {
    SystemConfig {
        name: "small-oracle".into(),
        trials: 100,
        bs: UpaGeometry::new(2, 2),
        irs: UpaGeometry::new(4, 2),
        ce: CeConfig::new(10, 2, 30),
        baselines: BaselineConfig {
            methods: vec!["ce".into(), "exhaustive".into(), "successive_refinement".into(), "random".into()],
            ..BaselineConfig::default()
        },
        ..desk()
    }
}

/// Full-size convergence run: M=64, N=625, K=4, 20 dB.
fn large_converge() -> SystemConfig {
    SystemConfig {
        name: "large-converge".into(),
        trials: 5,
        users: 4,
        sinr_db: vec![20.0],
        bs: UpaGeometry::new(8, 8),
        irs: UpaGeometry::new(25, 25),
        ce: CeConfig::new(200, 40, 50),
        convergence: ConvergenceConfig {
            candidates: vec![50, 100, 200],
            elite_fraction: 0.2,
        },
        ..desk()
    }
}

fn large_complexity() -> SystemConfig {
    SystemConfig {
        name: "large-complexity".into(),
        trials: 1,
        ..desk()
    }
}

/// Full-size SINR sweep with the IRS-user distance raised to 10 m.
fn large_sweep(bits: u32) -> SystemConfig {
    SystemConfig {
        name: format!("large-sweep-q{bits}"),
        trials: 5,
        users: 4,
        phase_bits: bits,
        bs: UpaGeometry::new(8, 8),
        irs: UpaGeometry::new(25, 25),
        path_loss: PathLossModel {
            d_ru_m: 10.0,
            ..PathLossModel::default()
        },
        ce: CeConfig::new(200, 40, 50),
        baselines: BaselineConfig {
            methods: vec!["ce".into(), "successive_refinement".into()],
            ..BaselineConfig::default()
        },
        ..desk()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_are_valid_and_round_trip() {
        for name in SystemConfig::BUILTIN_NAMES {
            let cfg = SystemConfig::builtin(name).unwrap();
            cfg.validate().unwrap();
            let back = SystemConfig::from_toml_str(&cfg.to_toml(), name).unwrap();
            assert_eq!(back, cfg);
        }
        assert!(SystemConfig::builtin("nope").is_none());
    }

    #[test]
    fn scenario_sizes() {
        let d = SystemConfig::builtin("desk").unwrap();
        assert_eq!((d.bs.len(), d.irs.len(), d.users), (8, 32, 2));
        assert_eq!((d.ce.candidates, d.ce.elites, d.ce.iterations, d.trials), (50, 10, 50, 20));
        let c = SystemConfig::builtin("small-oracle").unwrap();
        assert_eq!((c.bs.len(), c.irs.len(), c.users), (4, 8, 2));
        assert_eq!((c.ce.candidates, c.ce.elites), (10, 2));
        let a = SystemConfig::builtin("large-converge").unwrap();
        assert_eq!((a.bs.len(), a.irs.len(), a.users), (64, 625, 4));
        let q2 = SystemConfig::builtin("large-sweep-q2").unwrap();
        assert_eq!((q2.path_loss.d_ru_m, q2.phase_bits), (10.0, 2));
    }

    #[test]
    fn minimal_file_gets_defaults() {
        let text = r#"
            users = 2
            sinr_db = [10.0]
            bs = { n1 = 2, n2 = 2 }
            irs = { n1 = 4, n2 = 2 }
            ce = { candidates = 10, elites = 2, iterations = 5 }
        "#;
        let cfg = SystemConfig::from_toml_str(text, "inline").unwrap();
        assert_eq!(cfg.noise_dbm, vec![-90.0]);
        assert_eq!(cfg.paths, PathCounts::default());
        assert_eq!(cfg.path_loss.d_bu_m, 60.0);
        assert_eq!(cfg.irs.spacing_over_wavelength, 0.5);
        let t = cfg.targets(10.0).unwrap();
        assert_eq!(t.gamma, vec![10.0, 10.0]);
    }

    fn field_of(text: &str) -> String {
        match SystemConfig::from_toml_str(text, "inline") {
            Err(Error::Config { field, .. }) => field,
            Err(Error::Parse { message, .. }) => format!("parse: {message}"),
            other => panic!("expected error, got {other:?}"),
        }
    }

    #[test]
    fn errors_name_the_field() {
        let base = |extra: &str| {
            format!(
                "users = 2\nsinr_db = [10.0]\nbs = {{ n1 = 2, n2 = 2 }}\nirs = {{ n1 = 4, n2 = 2 }}\nce = {{ candidates = 10, elites = 2, iterations = 5 }}\n{extra}"
            )
        };
        assert_eq!(field_of(&base("trials = 0")), "trials");
        assert_eq!(field_of(&base("noise_dbm = [-90.0, -80.0, -70.0]")), "noise_dbm");
        assert_eq!(field_of(&base("[path_loss]\nd_br_m = -1.0\nd_ru_m = 2.0\nd_bu_m = 60.0")), "path_loss.d_br_m");
        assert_eq!(field_of(&base("[baselines]\nmethods = [\"sdr\"]")), "baselines.methods");
        assert!(field_of(&base("bogus = 1")).contains("bogus"));
        let too_many_users = base("").replace("users = 2", "users = 5");
        assert_eq!(field_of(&too_many_users), "users");
    }
}
