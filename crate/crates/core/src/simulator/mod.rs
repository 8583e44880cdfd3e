//! Exact event-driven simulation of the labelled population.
//!
//! While the population has size `n`, every individual is replaced by `j`
//! children at rate `rates_at(kappa, n)(j)`. The simulator draws the
//! exponential waiting time at the total rate `n * sum_j rates(j)`, picks the
//! reproducing individual uniformly and the offspring count proportionally
//! to its rate, and appends the event to the [`EventLog`].

mod coupled;
mod population;
pub mod rng;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::genealogy::EventLog;
use crate::rates::{RateSchedule, RatesError};
use crate::scalar::Real;

pub use coupled::{simulate_coupled, CoupledRun};
use population::IndexedSet;
use rng::{exp_wait, pick_weighted, rng_from_seed};

/// Default cap on the number of events in one run.
pub const DEFAULT_MAX_EVENTS: usize = 10_000_000;

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error(transparent)]
    Rates(#[from] RatesError),
    #[error("invalid stopping rule: {0}")]
    BadStoppingRule(String),
    #[error("kappa must be at least 1")]
    ZeroKappa,
}

/// When a run is sampled.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StoppingRule<T> {
    /// Stop at a fixed time.
    FixedTime(T),
    /// First time the size reaches `x * kappa`.
    Size(T),
    /// First time `ln N >= x * ln kappa`.
    LogSize(T),
    /// After a fixed number of events.
    EventBudget(u64),
}

impl<T: Real> StoppingRule<T> {
    pub fn validate(&self) -> Result<(), SimulationError> {
        let ok = match *self {
            StoppingRule::FixedTime(x) | StoppingRule::Size(x) | StoppingRule::LogSize(x) => x > T::zero() && x.is_finite(),
            StoppingRule::EventBudget(k) => k > 0,
        };
        if ok {
            Ok(())
        } else {
            Err(SimulationError::BadStoppingRule(self.to_string()))
        }
    }

    /// Smallest population size that fires a size-based rule.
    pub fn size_threshold(&self, kappa: u64) -> Option<u64> {
        let k = kappa as f64;
        match *self {
            StoppingRule::Size(x) => {
                let target = x.as_f64() * k;
                Some((target.ceil() as u64).max(1))
            }
            StoppingRule::LogSize(x) => {
                let target = x.as_f64() * k.ln();
                let mut n = (target.exp().ceil() as u64).max(1);
                while n > 1 && ((n - 1) as f64).ln() >= target {
                    n -= 1;
                }
                while (n as f64).ln() < target {
                    n += 1;
                }
                Some(n)
            }
            _ => None,
        }
    }

    pub fn fixed_time(&self) -> Option<T> {
        match *self {
            StoppingRule::FixedTime(t) => Some(t),
            _ => None,
        }
    }
}

/// `time:3.0`, `size:0.1`, `logsize:0.5` or `events:1000`.
impl<T: Real> FromStr for StoppingRule<T> {
    type Err = SimulationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SimulationError::BadStoppingRule(s.to_string());
        let (kind, value) = s.trim().split_once(':').ok_or_else(bad)?;
        let real = || value.trim().parse::<f64>().map(T::of).map_err(|_| bad());
        let rule = match kind.trim() {
            "time" => StoppingRule::FixedTime(real()?),
            "size" => StoppingRule::Size(real()?),
            "logsize" => StoppingRule::LogSize(real()?),
            "events" => StoppingRule::EventBudget(value.trim().parse().map_err(|_| bad())?),
            _ => return Err(bad()),
        };
        rule.validate()?;
        Ok(rule)
    }
}

impl<T: Real> fmt::Display for StoppingRule<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StoppingRule::FixedTime(t) => write!(f, "time:{t}"),
            StoppingRule::Size(x) => write!(f, "size:{x}"),
            StoppingRule::LogSize(x) => write!(f, "logsize:{x}"),
            StoppingRule::EventBudget(k) => write!(f, "events:{k}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// The stopping rule fired.
    Stopped,
    Extinct,
    /// The configured event cap was hit first.
    BudgetExhausted,
    /// All rates are zero while individuals remain alive.
    Frozen,
}

/// One simulated history plus the time it was sampled at.
#[derive(Clone, Debug)]
pub struct SimulationRun<T> {
    pub kappa: u64,
    pub seed: u64,
    pub stop: StoppingRule<T>,
    pub log: EventLog<T>,
    /// Sampling time, or the time of extinction, freezing or budget exhaustion.
    pub stop_time: T,
    pub outcome: Outcome,
}

impl<T: Real> SimulationRun<T> {
    /// Population size at `stop_time`.
    pub fn final_size(&self) -> usize {
        self.log.final_size()
    }
}

/// Simulator bound to one schedule and carrying capacity.
#[derive(Clone, Debug)]
pub struct Simulator<'a, T> {
    pub schedule: &'a RateSchedule<T>,
    pub kappa: u64,
    pub max_events: usize,
}

impl<'a, T: Real> Simulator<'a, T> {
    pub fn new(schedule: &'a RateSchedule<T>, kappa: u64) -> Self {
        Self { schedule, kappa, max_events: DEFAULT_MAX_EVENTS }
    }

    pub fn with_max_events(mut self, max_events: usize) -> Self {
        self.max_events = max_events;
        self
    }

    fn check(&self, stop: &StoppingRule<T>) -> Result<(), SimulationError> {
        if self.kappa == 0 {
            return Err(SimulationError::ZeroKappa);
        }
        stop.validate()?;
        // Surfaces schedule domain errors (e.g. Gompertz with kappa = 1) up front.
        self.schedule.rates_at(self.kappa, 1)?;
        Ok(())
    }

    /// Full labelled simulation with a fresh stream seeded by `seed`.
    pub fn simulate(&self, stop: StoppingRule<T>, seed: u64) -> Result<SimulationRun<T>, SimulationError> {
        let mut rng = rng_from_seed(seed);
        let mut run = self.simulate_with(stop, &mut rng)?;
        run.seed = seed;
        Ok(run)
    }

    /// Full labelled simulation drawing from a caller-supplied stream.
    pub fn simulate_with<R: Rng + ?Sized>(&self, stop: StoppingRule<T>, rng: &mut R) -> Result<SimulationRun<T>, SimulationError> {
        self.check(&stop)?;
        let threshold = stop.size_threshold(self.kappa);
        let horizon = stop.fixed_time();
        let budget = match stop {
            StoppingRule::EventBudget(k) => Some(k as usize),
            _ => None,
        };
        let mut log = EventLog::new();
        let mut alive = IndexedSet::new();
        alive.insert(log.root());
        let mut rates = vec![T::zero(); self.schedule.support_len()];
        let mut t = T::zero();

        let (outcome, stop_time) = loop {
            let n = alive.len();
            if n == 0 {
                break (Outcome::Extinct, t);
            }
            if threshold.is_some_and(|thr| n as u64 >= thr) || budget.is_some_and(|b| log.events().len() >= b) {
                break (Outcome::Stopped, t);
            }
            if log.events().len() >= self.max_events {
                break (Outcome::BudgetExhausted, t);
            }
            self.schedule.write_rates(self.kappa, n as u64, &mut rates)?;
            let per_individual: T = rates.iter().copied().sum();
            if !(per_individual > T::zero()) {
                break (Outcome::Frozen, t);
            }
            let next = t + exp_wait(rng, T::count(n as u64) * per_individual);
            if let Some(h) = horizon {
                if next > h {
                    break (Outcome::Stopped, h);
                }
            }
            t = next;
            let parent = alive.get(rng.random_range(0..n));
            let j = pick_weighted(rng, &rates, per_individual);
            let children = log.record_unchecked(t, parent, j as u32);
            alive.remove(parent);
            for c in children.start.0..children.end.0 {
                alive.insert(crate::genealogy::NodeId(c));
            }
        };
        Ok(SimulationRun { kappa: self.kappa, seed: 0, stop, log, stop_time, outcome })
    }

    /// Simulates population size only (no labels), which is itself Markov.
    ///
    /// `exit` is checked after every event (and at time zero); returning
    /// `true` ends the path with [`SizeOutcome::Exited`].
    pub fn simulate_sizes<R: Rng + ?Sized>(
        &self,
        stop: StoppingRule<T>,
        rng: &mut R,
        mut exit: impl FnMut(u64) -> bool,
    ) -> Result<SizePath<T>, SimulationError> {
        self.check(&stop)?;
        let threshold = stop.size_threshold(self.kappa);
        let horizon = stop.fixed_time();
        let budget = match stop {
            StoppingRule::EventBudget(k) => Some(k as usize),
            _ => None,
        };
        let mut rates = vec![T::zero(); self.schedule.support_len()];
        let mut times = vec![T::zero()];
        let mut sizes = vec![1u64];
        let mut t = T::zero();
        let mut n = 1u64;
        let (outcome, end) = loop {
            if n == 0 {
                break (SizeOutcome::Run(Outcome::Extinct), t);
            }
            if exit(n) {
                break (SizeOutcome::Exited, t);
            }
            let events = times.len() - 1;
            if threshold.is_some_and(|thr| n >= thr) || budget.is_some_and(|b| events >= b) {
                break (SizeOutcome::Run(Outcome::Stopped), t);
            }
            if events >= self.max_events {
                break (SizeOutcome::Run(Outcome::BudgetExhausted), t);
            }
            self.schedule.write_rates(self.kappa, n, &mut rates)?;
            let per_individual: T = rates.iter().copied().sum();
            if !(per_individual > T::zero()) {
                break (SizeOutcome::Run(Outcome::Frozen), t);
            }
            let next = t + exp_wait(rng, T::count(n) * per_individual);
            if let Some(h) = horizon {
                if next > h {
                    break (SizeOutcome::Run(Outcome::Stopped), h);
                }
            }
            t = next;
            let j = pick_weighted(rng, &rates, per_individual) as u64;
            n = n + j - 1;
            times.push(t);
            sizes.push(n);
        };
        Ok(SizePath { times, sizes, end, outcome })
    }
}

/// [`Simulator::simulate`] with the default event cap.
pub fn simulate<T: Real>(
    schedule: &RateSchedule<T>,
    kappa: u64,
    stop: StoppingRule<T>,
    seed: u64,
) -> Result<SimulationRun<T>, SimulationError> {
    Simulator::new(schedule, kappa).simulate(stop, seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SizeOutcome {
    Run(Outcome),
    /// The caller's exit predicate fired.
    Exited,
}

/// Piecewise-constant population size path.
#[derive(Clone, Debug)]
pub struct SizePath<T> {
    /// Jump times, starting with 0.
    pub times: Vec<T>,
    /// Size from `times[k]` until the next jump.
    pub sizes: Vec<u64>,
    /// Time the path ends.
    pub end: T,
    pub outcome: SizeOutcome,
}

impl<T: Real> SizePath<T> {
    /// Size at `t` (right-continuous); `None` beyond the end of the path.
    pub fn size_at(&self, t: T) -> Option<u64> {
        if t > self.end {
            return None;
        }
        let k = self.times.partition_point(|s| *s <= t);
        Some(self.sizes[k.saturating_sub(1)])
    }

    /// `int_0^min(t, end) f(N(s)) ds` for a size-dependent integrand.
    pub fn integrate(&self, t: T, mut f: impl FnMut(u64) -> T) -> T {
        let upper = if t < self.end { t } else { self.end };
        let mut acc = T::zero();
        for (k, &start) in self.times.iter().enumerate() {
            if start >= upper {
                break;
            }
            let stop = self.times.get(k + 1).copied().unwrap_or(self.end);
            let stop = if stop < upper { stop } else { upper };
            acc = acc + f(self.sizes[k]) * (stop - start);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rates::OffspringRates;

    fn schedule(pairs: &[(usize, f64)]) -> RateSchedule<f64> {
        RateSchedule::density_independent(OffspringRates::new(pairs.iter().copied()).unwrap()).unwrap()
    }

    #[test]
    fn stopping_rule_text() {
        assert_eq!("time:3.0".parse::<StoppingRule<f64>>().unwrap(), StoppingRule::FixedTime(3.0));
        assert_eq!("size:0.1".parse::<StoppingRule<f64>>().unwrap(), StoppingRule::Size(0.1));
        assert_eq!("logsize:0.5".parse::<StoppingRule<f64>>().unwrap(), StoppingRule::LogSize(0.5));
        assert_eq!("events:7".parse::<StoppingRule<f64>>().unwrap(), StoppingRule::EventBudget(7));
        assert!("size:-1".parse::<StoppingRule<f64>>().is_err());
        assert!("speed:1".parse::<StoppingRule<f64>>().is_err());
        assert!("size".parse::<StoppingRule<f64>>().is_err());
        let r: StoppingRule<f64> = "logsize:0.5".parse().unwrap();
        assert_eq!(r.to_string().parse::<StoppingRule<f64>>().unwrap(), r);
    }

    #[test]
    fn thresholds() {
        assert_eq!(StoppingRule::Size(0.05f64).size_threshold(10_000), Some(500));
        assert_eq!(StoppingRule::Size(0.05f64).size_threshold(10), Some(1));
        assert_eq!(StoppingRule::Size(0.5f64).size_threshold(7), Some(4));
        assert_eq!(StoppingRule::LogSize(0.5f64).size_threshold(10_000), Some(100));
        assert_eq!(StoppingRule::LogSize(0.5f64).size_threshold(10), Some(4));
        assert_eq!(StoppingRule::FixedTime(1.0f64).size_threshold(10), None);
    }

    #[test]
    fn determinism() {
        let s = schedule(&[(0, 1.0), (2, 2.0)]);
        let a = simulate(&s, 100, StoppingRule::FixedTime(4.0), 17).unwrap();
        let b = simulate(&s, 100, StoppingRule::FixedTime(4.0), 17).unwrap();
        assert_eq!(a.log.to_csv_string(), b.log.to_csv_string());
        assert_eq!(a.stop_time, b.stop_time);
        let c = simulate(&s, 100, StoppingRule::FixedTime(4.0), 18).unwrap();
        assert_ne!(a.log.to_csv_string(), c.log.to_csv_string());
    }

    #[test]
    fn stopping_and_conservation() {
        let s = schedule(&[(0, 0.5), (1, 0.3), (2, 1.0), (3, 0.5)]);
        for seed in 0..50 {
            let run = simulate(&s, 200, StoppingRule::Size(0.25), seed).unwrap();
            let mut n: i64 = 1;
            for e in run.log.events() {
                n += e.offspring_count as i64 - 1;
                assert!(n >= 0);
            }
            assert_eq!(n as usize, run.final_size());
            match run.outcome {
                Outcome::Stopped => {
                    assert!(run.final_size() >= 50);
                    let before: i64 = n - (run.log.events().last().unwrap().offspring_count as i64 - 1);
                    assert!(before < 50);
                    assert_eq!(run.stop_time, run.log.last_time());
                }
                Outcome::Extinct => assert_eq!(run.final_size(), 0),
                other => panic!("unexpected outcome {other:?}"),
            }
        }
    }

    #[test]
    fn outcomes() {
        let s = schedule(&[(2, 1.0)]);
        let run = Simulator::new(&s, 1).with_max_events(10).simulate(StoppingRule::FixedTime(100.0), 1).unwrap();
        assert_eq!(run.outcome, Outcome::BudgetExhausted);
        assert_eq!(run.log.events().len(), 10);
        let run = simulate(&s, 1, StoppingRule::EventBudget(5), 1).unwrap();
        assert_eq!(run.outcome, Outcome::Stopped);
        assert_eq!(run.final_size(), 6);

        let frozen = RateSchedule::user_table(
            OffspringRates::new([(2, 1.0)]).unwrap(),
            vec![crate::rates::TableRow { n_min: 3, n_max: None, rates: OffspringRates::new([]).unwrap() }],
        )
        .unwrap();
        let run = simulate(&frozen, 1, StoppingRule::FixedTime(50.0), 3).unwrap();
        assert_eq!(run.outcome, Outcome::Frozen);
        assert_eq!(run.final_size(), 3);

        let gz = RateSchedule::gompertz_death(OffspringRates::new([(2, 1.0)]).unwrap()).unwrap();
        assert!(simulate(&gz, 1, StoppingRule::Size(0.5), 0).is_err());
        assert!(matches!(simulate(&s, 0, StoppingRule::Size(0.5), 0), Err(SimulationError::ZeroKappa)));
    }

    #[test]
    fn size_path_queries() {
        let path = SizePath { times: vec![0.0, 1.0, 2.5], sizes: vec![1, 2, 3], end: 4.0, outcome: SizeOutcome::Exited };
        assert_eq!(path.size_at(0.5), Some(1));
        assert_eq!(path.size_at(1.0), Some(2));
        assert_eq!(path.size_at(3.9), Some(3));
        assert_eq!(path.size_at(4.5), None);
        let area = path.integrate(3.0, |n| n as f64);
        assert!((area - (1.0 + 2.0 * 1.5 + 3.0 * 0.5)).abs() < 1e-12);
        let all = path.integrate(10.0, |_| 1.0);
        assert!((all - 4.0).abs() < 1e-12);
    }

    #[test]
    fn single_precision_runs() {
        let s = RateSchedule::<f32>::logistic_death(OffspringRates::new([(0, 1.0f32), (2, 2.0)]).unwrap()).unwrap();
        let run = simulate(&s, 100, StoppingRule::Size(0.3f32), 5).unwrap();
        assert!(matches!(run.outcome, Outcome::Stopped | Outcome::Extinct));
    }
}
