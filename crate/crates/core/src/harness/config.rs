use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::rates::{RateSchedule, ScheduleDescriptor, SuperlinearParams};
use crate::simulator::{StoppingRule, DEFAULT_MAX_EVENTS};

/// Monte Carlo experiment description, read from JSON.
///
/// Times in `time_grid` and `horizon` are in units of `1 / r`, the inverse
/// intrinsic growth rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schedule: ScheduleDescriptor,
    /// Carrying capacities, strictly increasing.
    pub kappas: Vec<u64>,
    /// Stopping rule in text form, e.g. `size:0.05` or `time:8`.
    pub stop: String,
    /// Sample size.
    #[serde(default = "default_m")]
    pub m: usize,
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub threads: usize,
    #[serde(default = "default_time_grid")]
    pub time_grid: Vec<f64>,
    /// Finite-kappa allowance added to the KS critical value.
    #[serde(default = "default_ks_allowance")]
    pub ks_allowance: f64,
    /// Significance level for the partition-frequency chi-square tests.
    #[serde(default = "default_chi_square_level")]
    pub chi_square_level: f64,
    #[serde(default = "default_max_events")]
    pub max_events: usize,
    /// Coupling horizon `t*`.
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default)]
    pub superlinear: Option<SuperlinearConfig>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuperlinearConfig {
    pub c: f64,
    pub alpha: f64,
}

fn default_m() -> usize {
    2
}

fn default_time_grid() -> Vec<f64> {
    vec![0.5, 1.0, 2.0, 4.0]
}

fn default_ks_allowance() -> f64 {
    0.01
}

fn default_chi_square_level() -> f64 {
    0.001
}

fn default_max_events() -> usize {
    DEFAULT_MAX_EVENTS
}

fn default_horizon() -> f64 {
    2.0
}

impl ExperimentConfig {
    /// Config with defaults for everything but the essentials.
    pub fn new(schedule: ScheduleDescriptor, kappas: Vec<u64>, stop: impl Into<String>, m: usize, replicates: usize, seed: u64) -> Self {
        Self {
            schedule,
            kappas,
            stop: stop.into(),
            m,
            replicates,
            seed,
            threads: 0,
            time_grid: default_time_grid(),
            ks_allowance: default_ks_allowance(),
            chi_square_level: default_chi_square_level(),
            max_events: default_max_events(),
            horizon: default_horizon(),
            superlinear: None,
            out_dir: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.replicates == 0 {
            return bad("replicates must be at least 1".into());
        }
        if self.kappas.is_empty() {
            return bad("kappas must not be empty".into());
        }
        if self.kappas.windows(2).any(|w| w[0] >= w[1]) || self.kappas[0] == 0 {
            return bad(format!("kappas must be positive and strictly increasing, got {:?}", self.kappas));
        }
        if self.m == 0 {
            return bad("m must be at least 1".into());
        }
        if self.time_grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return bad("time grid entries must be positive".into());
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon must be positive, got {}", self.horizon));
        }
        if !(0.0..1.0).contains(&self.chi_square_level) {
            return bad(format!("chi_square_level must lie in [0, 1), got {}", self.chi_square_level));
        }
        self.stopping_rule()?;
        self.rate_schedule()?;
        self.superlinear_params()?;
        Ok(())
    }

    pub fn stopping_rule(&self) -> Result<StoppingRule<f64>, HarnessError> {
        let rule: StoppingRule<f64> = self.stop.parse()?;
        rule.validate()?;
        Ok(rule)
    }

    pub fn rate_schedule(&self) -> Result<RateSchedule<f64>, HarnessError> {
        Ok(RateSchedule::from_descriptor(&self.schedule)?)
    }

    pub fn superlinear_params(&self) -> Result<Option<SuperlinearParams<f64>>, HarnessError> {
        self.superlinear.map(|s| SuperlinearParams::new(s.c, s.alpha)).transpose().map_err(Into::into)
    }

    /// Intrinsic growth rate `r`.
    pub fn growth_rate(&self) -> Result<f64, HarnessError> {
        Ok(self.rate_schedule()?.intrinsic_growth())
    }

    /// `time_grid` converted to absolute time.
    pub fn times(&self) -> Result<Vec<f64>, HarnessError> {
        let r = self.growth_rate()?;
        Ok(self.time_grid.iter().map(|t| t / r).collect())
    }

    /// `horizon` converted to absolute time.
    pub fn horizon_time(&self) -> Result<f64, HarnessError> {
        Ok(self.horizon / self.growth_rate()?)
    }

    pub(crate) fn thread_pool(&self) -> Result<rayon::ThreadPool, HarnessError> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build()
            .map_err(|e| HarnessError::ThreadPool(e.to_string()))
    }
}
