//! Genetic-drift and coupling diagnostics.

use rayon::prelude::*;
use serde::Serialize;

use super::stats::{mean_and_se, ols_slope};
use super::{ExperimentConfig, HarnessError};
use crate::rates::{RateSchedule, RatesError};
use crate::simulator::rng::{replicate_rng, replicate_seed};
use crate::simulator::{simulate_coupled, Outcome, SizeOutcome, Simulator, StoppingRule};

/// Sizes up to this bound get their per-size quantity tabulated up front.
const TABLE_CAP: u64 = 1 << 20;

/// Per-size function with the small sizes precomputed.
struct SizeTable<F> {
    values: Vec<f64>,
    f: F,
}

impl<F: Fn(u64) -> Result<f64, RatesError>> SizeTable<F> {
    fn new(cap: u64, f: F) -> Result<Self, RatesError> {
        let mut values = vec![0.0; cap as usize + 1];
        for n in 1..=cap {
            values[n as usize] = f(n)?;
        }
        Ok(Self { values, f })
    }

    fn get(&self, n: u64) -> f64 {
        match self.values.get(n as usize) {
            Some(v) => *v,
            None => (self.f)(n).unwrap_or(f64::NAN),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DriftRow {
    pub t: f64,
    pub estimate: f64,
    pub se: f64,
}

/// `E[1/N(t); N(t) > 0, t < S]` on a time grid for one kappa, where `S` is
/// the first time the size leaves the superlinear-growth set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DriftTable {
    pub kappa: u64,
    pub rows: Vec<DriftRow>,
    /// Least-squares slope of log estimate against log t.
    pub slope: Option<f64>,
    pub slope_se: Option<f64>,
    /// `slope <= -1 + 2 se`: decay at least as fast as `1/t`.
    pub faster_than_inverse: Option<bool>,
    /// Paths cut short by the event cap.
    pub incomplete: usize,
}

/// Monte Carlo estimate of the drift functional along size-only paths.
///
/// `grid` is in units of `1 / r`. Without a `superlinear` section in the
/// config the exit time `S` is infinite.
pub fn drift_diagnostic(cfg: &ExperimentConfig, grid: &[f64]) -> Result<Vec<DriftTable>, HarnessError> {
    cfg.validate()?;
    if grid.is_empty() || grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(HarnessError::Config("drift time grid must be non-empty and positive".into()));
    }
    let schedule = cfg.rate_schedule()?;
    let r = schedule.intrinsic_growth();
    let times: Vec<f64> = grid.iter().map(|t| t / r).collect();
    let t_max = times.iter().copied().fold(0.0, f64::max);
    let params = cfg.superlinear_params()?;
    let pool = cfg.thread_pool()?;

    let mut tables = Vec::new();
    for &kappa in &cfg.kappas {
        let sim = Simulator::new(&schedule, kappa).with_max_events(cfg.max_events);
        let inside = SizeTable::new(if params.is_some() { TABLE_CAP } else { 0 }, |n| match &params {
            Some(p) => schedule.is_superlinear(kappa, n, p).map(|b| if b { 1.0 } else { 0.0 }),
            None => Ok(1.0),
        })?;
        let seed = replicate_seed(cfg.seed, kappa);
        let samples: Vec<Result<(Vec<f64>, bool), HarnessError>> = pool.install(|| {
            (0..cfg.replicates)
                .into_par_iter()
                .map(|k| {
                    let mut rng = replicate_rng(seed, k as u64);
                    let path = sim.simulate_sizes(StoppingRule::FixedTime(t_max), &mut rng, |n| {
                        params.is_some() && inside.get(n) == 0.0
                    })?;
                    let incomplete = matches!(path.outcome, SizeOutcome::Run(Outcome::BudgetExhausted));
                    let values = times
                        .iter()
                        .map(|&t| {
                            let cut = matches!(path.outcome, SizeOutcome::Exited | SizeOutcome::Run(Outcome::Extinct));
                            if t > path.end || (cut && t >= path.end) {
                                return 0.0;
                            }
                            match path.size_at(t) {
                                Some(n) if n > 0 => 1.0 / n as f64,
                                _ => 0.0,
                            }
                        })
                        .collect();
                    Ok((values, incomplete))
                })
                .collect()
        });
        let mut columns = vec![Vec::with_capacity(cfg.replicates); times.len()];
        let mut incomplete = 0;
        for sample in samples {
            let (values, cut) = sample?;
            incomplete += cut as usize;
            for (col, v) in columns.iter_mut().zip(values) {
                col.push(v);
            }
        }
        let rows: Vec<DriftRow> = times
            .iter()
            .zip(&columns)
            .map(|(&t, col)| {
                let (estimate, se) = mean_and_se(col);
                DriftRow { t, estimate, se }
            })
            .collect();
        let (lx, ly): (Vec<f64>, Vec<f64>) =
            rows.iter().filter(|row| row.estimate > 0.0).map(|row| (row.t.ln(), row.estimate.ln())).unzip();
        let fit = ols_slope(&lx, &ly);
        tables.push(DriftTable {
            kappa,
            slope: fit.map(|f| f.0),
            slope_se: fit.map(|f| f.1),
            faster_than_inverse: fit.map(|(b, se)| b <= -1.0 + 2.0 * se),
            rows,
            incomplete,
        });
    }
    Ok(tables)
}

/// Two estimates of the probability that the coupled populations agree on
/// `[0, t*]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CouplingRow {
    pub kappa: u64,
    /// Absolute horizon.
    pub horizon: f64,
    /// Frequency of no decoupling in coupled runs.
    pub indicator: f64,
    pub indicator_se: f64,
    /// Mean of `exp(-int_0^t* N gap(N) ds)` along intrinsic-rate paths.
    pub exponential: f64,
    pub exponential_se: f64,
    pub combined_se: f64,
    /// The estimates differ by less than three combined standard errors.
    pub agree: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CouplingDiagnostic {
    pub rows: Vec<CouplingRow>,
    /// The indicator estimate does not drop by more than two combined
    /// standard errors between consecutive kappas.
    pub non_decreasing: bool,
    pub pass: bool,
}

/// Compares the coupled-simulation frequency of staying equal up to the
/// horizon with the pathwise exponential functional of the total-variation
/// gap.
///
/// The two coincide whenever the density-dependent rates dominate the
/// intrinsic ones offspring count by offspring count (schedules that only
/// raise the death rate). Otherwise, while equal, the coupled population moves at
/// the smaller of the two rates and the exponential functional along
/// intrinsic paths is only an approximation.
pub fn coupling_diagnostic(cfg: &ExperimentConfig) -> Result<CouplingDiagnostic, HarnessError> {
    cfg.validate()?;
    let schedule = cfg.rate_schedule()?;
    let intrinsic = RateSchedule::density_independent(schedule.intrinsic().clone())?;
    let horizon = cfg.horizon_time()?;
    let stop = StoppingRule::FixedTime(horizon);
    let pool = cfg.thread_pool()?;

    let mut rows = Vec::new();
    for &kappa in &cfg.kappas {
        let sim = Simulator::new(&schedule, kappa).with_max_events(cfg.max_events);
        let free = Simulator::new(&intrinsic, kappa).with_max_events(cfg.max_events);
        let gap = SizeTable::new(TABLE_CAP.min(64 * kappa), |n| {
            schedule.total_variation_gap(kappa, n).map(|g| n as f64 * g)
        })?;
        let seed_a = replicate_seed(cfg.seed, kappa);
        let seed_b = replicate_seed(cfg.seed ^ 0x9e37_79b9_7f4a_7c15, kappa);
        let pairs: Vec<Result<(f64, f64), HarnessError>> = pool.install(|| {
            (0..cfg.replicates)
                .into_par_iter()
                .map(|k| {
                    let run = simulate_coupled(&sim, stop, None, replicate_seed(seed_a, k as u64))?;
                    let equal = if run.decouple_time.is_none() { 1.0 } else { 0.0 };
                    let mut rng = replicate_rng(seed_b, k as u64);
                    let path = free.simulate_sizes(stop, &mut rng, |_| false)?;
                    let hazard = path.integrate(horizon, |n| if n == 0 { 0.0 } else { gap.get(n) });
                    Ok((equal, (-hazard).exp()))
                })
                .collect()
        });
        let (mut a, mut b) = (Vec::with_capacity(cfg.replicates), Vec::with_capacity(cfg.replicates));
        for pair in pairs {
            let (x, y) = pair?;
            a.push(x);
            b.push(y);
        }
        let (indicator, _) = mean_and_se(&a);
        // Binomial standard error; zero when every run agrees.
        let indicator_se = (indicator * (1.0 - indicator) / a.len() as f64).sqrt();
        let (exponential, exponential_se) = mean_and_se(&b);
        let exponential_se = if exponential_se.is_nan() { 0.0 } else { exponential_se };
        let combined_se = indicator_se.hypot(exponential_se);
        let diff = (indicator - exponential).abs();
        rows.push(CouplingRow {
            kappa,
            horizon,
            indicator,
            indicator_se,
            exponential,
            exponential_se,
            combined_se,
            agree: diff == 0.0 || diff < 3.0 * combined_se,
        });
    }
    let non_decreasing = rows.windows(2).all(|w| w[1].indicator >= w[0].indicator - 2.0 * w[0].combined_se.hypot(w[1].combined_se));
    let pass = non_decreasing && rows.iter().all(|r| r.agree);
    Ok(CouplingDiagnostic { rows, non_decreasing, pass })
}
