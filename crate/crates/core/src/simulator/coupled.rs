//! Joint simulation of the density-dependent model and its intrinsic
//! (density-independent) counterpart.
//!
//! Both populations are sets of labels. An individual whose label is alive
//! in both populations moves
//!
//! * jointly with `j` children at rate `min(intrinsic_j, rates_j)`,
//! * in the intrinsic population only at rate `(intrinsic_j - rates_j)+`,
//! * in the density-dependent population only at rate `(rates_j - intrinsic_j)+`,
//!
//! where `rates = rates_at(kappa, N_kappa)`. Individuals alive in just one
//! population move in that population at its own full rate. All draws come
//! from a single stream.

use rand::Rng;

use super::population::IndexedSet;
use super::rng::{exp_wait, pick_weighted, rng_from_seed};
use super::{Outcome, SimulationError, Simulator, StoppingRule};
use crate::genealogy::{EventLog, NodeId};
use crate::rates::RateSchedule;
use crate::scalar::Real;

const NONE: u32 = u32::MAX;

/// Result of a coupled run.
#[derive(Clone, Debug)]
pub struct CoupledRun<T> {
    pub kappa: u64,
    pub seed: u64,
    /// History of the intrinsic-rate population.
    pub infinite: EventLog<T>,
    /// History of the density-dependent population.
    pub finite: EventLog<T>,
    /// Time of the first event applied to only one population while the
    /// two were equal; `None` if they never separated.
    pub decouple_time: Option<T>,
    /// Stopping time of the density-dependent population.
    pub stop_time: T,
    pub outcome: Outcome,
    /// Time the intrinsic population was simulated up to.
    pub infinite_end: T,
    pub infinite_outcome: Outcome,
}

struct Twins {
    infinite: Vec<u32>,
    finite: Vec<u32>,
}

impl Twins {
    fn link(&mut self, inf: NodeId, fin: NodeId) {
        for (v, i) in [(&mut self.infinite, inf.index()), (&mut self.finite, fin.index())] {
            if v.len() <= i {
                v.resize(i + 1, NONE);
            }
        }
        self.infinite[inf.index()] = fin.0;
        self.finite[fin.index()] = inf.0;
    }

    fn of_infinite(&self, id: NodeId) -> Option<NodeId> {
        self.infinite.get(id.index()).copied().filter(|&x| x != NONE).map(NodeId)
    }

    fn of_finite(&self, id: NodeId) -> Option<NodeId> {
        self.finite.get(id.index()).copied().filter(|&x| x != NONE).map(NodeId)
    }
}

struct State<T> {
    inf_log: EventLog<T>,
    fin_log: EventLog<T>,
    twins: Twins,
    /// Labels alive in both populations, keyed by their infinite-side node.
    shared: IndexedSet,
    inf_only: IndexedSet,
    fin_only: IndexedSet,
}

impl<T: Real> State<T> {
    fn new() -> Self {
        let inf_log = EventLog::new();
        let fin_log = EventLog::new();
        let mut twins = Twins { infinite: Vec::new(), finite: Vec::new() };
        twins.link(inf_log.root(), fin_log.root());
        let mut shared = IndexedSet::new();
        shared.insert(inf_log.root());
        Self { inf_log, fin_log, twins, shared, inf_only: IndexedSet::new(), fin_only: IndexedSet::new() }
    }

    fn n_fin(&self) -> usize {
        self.shared.len() + self.fin_only.len()
    }

    fn equal(&self) -> bool {
        self.inf_only.is_empty() && self.fin_only.is_empty()
    }

    fn joint(&mut self, t: T, inf: NodeId, j: u32) {
        let fin = self.twins.of_infinite(inf).expect("shared node has a twin");
        self.shared.remove(inf);
        let a = self.inf_log.record_unchecked(t, inf, j);
        let b = self.fin_log.record_unchecked(t, fin, j);
        for k in 0..j {
            let (x, y) = (NodeId(a.start.0 + k), NodeId(b.start.0 + k));
            self.twins.link(x, y);
            self.shared.insert(x);
        }
    }

    /// Intrinsic-population move of an individual that may also be alive
    /// in the finite population.
    fn infinite_move(&mut self, t: T, inf: NodeId, j: u32) {
        if self.shared.contains(inf) {
            self.shared.remove(inf);
            self.fin_only.insert(self.twins.of_infinite(inf).expect("shared node has a twin"));
        } else {
            self.inf_only.remove(inf);
        }
        let kids = self.inf_log.record_unchecked(t, inf, j);
        let twin_parent = self.twins.of_infinite(inf);
        for k in 0..j {
            let x = NodeId(kids.start.0 + k);
            let twin = twin_parent.and_then(|p| self.fin_log.child_ids(p).nth(k as usize));
            match twin {
                Some(y) => {
                    self.twins.link(x, y);
                    if self.fin_only.contains(y) {
                        self.fin_only.remove(y);
                        self.shared.insert(x);
                    } else {
                        self.inf_only.insert(x);
                    }
                }
                None => self.inf_only.insert(x),
            }
        }
    }

    fn finite_move(&mut self, t: T, fin: NodeId, j: u32) {
        let twin_parent = self.twins.of_finite(fin);
        if let Some(inf) = twin_parent.filter(|&x| self.shared.contains(x)) {
            self.shared.remove(inf);
            self.inf_only.insert(inf);
        } else {
            self.fin_only.remove(fin);
        }
        let kids = self.fin_log.record_unchecked(t, fin, j);
        for k in 0..j {
            let y = NodeId(kids.start.0 + k);
            let twin = twin_parent.and_then(|p| self.inf_log.child_ids(p).nth(k as usize));
            match twin {
                Some(x) => {
                    self.twins.link(x, y);
                    if self.inf_only.contains(x) {
                        self.inf_only.remove(x);
                        self.shared.insert(x);
                    } else {
                        self.fin_only.insert(y);
                    }
                }
                None => self.fin_only.insert(y),
            }
        }
    }
}

/// Coupled simulation until the finite population's stopping rule fires
/// (or it dies out, freezes, or the event cap is hit).
///
/// With `continue_infinite`, the intrinsic population is then run alone
/// until that rule fires for it (interpreted with the same `kappa`).
pub fn simulate_coupled<T: Real>(
    sim: &Simulator<'_, T>,
    stop: StoppingRule<T>,
    continue_infinite: Option<StoppingRule<T>>,
    seed: u64,
) -> Result<CoupledRun<T>, SimulationError> {
    sim.check(&stop)?;
    if let Some(rule) = &continue_infinite {
        rule.validate()?;
    }
    let mut rng = rng_from_seed(seed);
    let schedule: &RateSchedule<T> = sim.schedule;
    let kappa = sim.kappa;
    let threshold = stop.size_threshold(kappa);
    let horizon = stop.fixed_time();
    let budget = match stop {
        StoppingRule::EventBudget(k) => Some(k as usize),
        _ => None,
    };

    let len = schedule.support_len();
    let intrinsic: Vec<T> = (0..len).map(|i| schedule.intrinsic().get(i)).collect();
    let intrinsic_total: T = intrinsic.iter().copied().sum();
    let mut finite = vec![T::zero(); len];
    // Per category and offspring count: joint, infinite-only, finite-only.
    let mut shared_weights = vec![T::zero(); 3 * len];

    let mut st = State::<T>::new();
    let mut t = T::zero();
    let mut events = 0usize;
    let mut decouple_time = None;

    let (outcome, stop_time) = loop {
        let n_fin = st.n_fin();
        if n_fin == 0 {
            break (Outcome::Extinct, t);
        }
        if threshold.is_some_and(|thr| n_fin as u64 >= thr) || budget.is_some_and(|b| st.fin_log.events().len() >= b) {
            break (Outcome::Stopped, t);
        }
        if events >= sim.max_events {
            break (Outcome::BudgetExhausted, t);
        }
        schedule.write_rates(kappa, n_fin as u64, &mut finite)?;
        let finite_total: T = finite.iter().copied().sum();
        for i in 0..len {
            let (a, b) = (intrinsic[i], finite[i]);
            shared_weights[i] = a.min(b);
            shared_weights[len + i] = (a - b).max(T::zero());
            shared_weights[2 * len + i] = (b - a).max(T::zero());
        }
        let shared_total: T = shared_weights.iter().copied().sum();
        let w_shared = T::count(st.shared.len() as u64) * shared_total;
        let w_inf = T::count(st.inf_only.len() as u64) * intrinsic_total;
        let w_fin = T::count(st.fin_only.len() as u64) * finite_total;
        let total = w_shared + w_inf + w_fin;
        if !(total > T::zero()) {
            break (Outcome::Frozen, t);
        }
        let next = t + exp_wait(&mut rng, total);
        if let Some(h) = horizon {
            if next > h {
                break (Outcome::Stopped, h);
            }
        }
        t = next;
        events += 1;
        let was_equal = st.equal();
        let category = pick_weighted(&mut rng, &[w_shared, w_inf, w_fin], total);
        let joint = match category {
            0 => {
                let inf = st.shared.get(rng.random_range(0..st.shared.len()));
                let k = pick_weighted(&mut rng, &shared_weights, shared_total);
                let (kind, j) = (k / len, (k % len) as u32);
                match kind {
                    0 => st.joint(t, inf, j),
                    1 => st.infinite_move(t, inf, j),
                    _ => {
                        let fin = st.twins.of_infinite(inf).expect("shared node has a twin");
                        st.finite_move(t, fin, j)
                    }
                }
                kind == 0
            }
            1 => {
                let inf = st.inf_only.get(rng.random_range(0..st.inf_only.len()));
                let j = pick_weighted(&mut rng, &intrinsic, intrinsic_total) as u32;
                st.infinite_move(t, inf, j);
                false
            }
            _ => {
                let fin = st.fin_only.get(rng.random_range(0..st.fin_only.len()));
                let j = pick_weighted(&mut rng, &finite, finite_total) as u32;
                st.finite_move(t, fin, j);
                false
            }
        };
        if was_equal && !joint && decouple_time.is_none() {
            decouple_time = Some(t);
        }
    };

    let (infinite_end, infinite_outcome) = match continue_infinite {
        None => (stop_time, outcome),
        Some(rule) => continue_alone(&mut st, &mut rng, rule, kappa, &intrinsic, intrinsic_total, stop_time, events, sim.max_events),
    };

    Ok(CoupledRun {
        kappa,
        seed,
        infinite: st.inf_log,
        finite: st.fin_log,
        decouple_time,
        stop_time,
        outcome,
        infinite_end,
        infinite_outcome,
    })
}

#[allow(clippy::too_many_arguments)]
fn continue_alone<T: Real, R: Rng + ?Sized>(
    st: &mut State<T>,
    rng: &mut R,
    rule: StoppingRule<T>,
    kappa: u64,
    intrinsic: &[T],
    intrinsic_total: T,
    start: T,
    mut events: usize,
    max_events: usize,
) -> (T, Outcome) {
    let mut alive = IndexedSet::new();
    for id in st.shared.iter().chain(st.inf_only.iter()) {
        alive.insert(id);
    }
    let threshold = rule.size_threshold(kappa);
    let horizon = rule.fixed_time();
    let mut t = start;
    let start_events = st.inf_log.events().len();
    loop {
        let n = alive.len();
        if n == 0 {
            return (t, Outcome::Extinct);
        }
        if threshold.is_some_and(|thr| n as u64 >= thr) {
            return (t, Outcome::Stopped);
        }
        if let StoppingRule::EventBudget(b) = rule {
            if st.inf_log.events().len() - start_events >= b as usize {
                return (t, Outcome::Stopped);
            }
        }
        if events >= max_events {
            return (t, Outcome::BudgetExhausted);
        }
        let next = t + exp_wait(rng, T::count(n as u64) * intrinsic_total);
        if let Some(h) = horizon {
            if next > h {
                return (h.max(start), Outcome::Stopped);
            }
        }
        t = next;
        events += 1;
        let parent = alive.get(rng.random_range(0..n));
        let j = pick_weighted(rng, intrinsic, intrinsic_total) as u32;
        let kids = st.inf_log.record_unchecked(t, parent, j);
        alive.remove(parent);
        for c in kids.start.0..kids.end.0 {
            alive.insert(NodeId(c));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rates::OffspringRates;

    fn bd() -> OffspringRates<f64> {
        OffspringRates::new([(0, 1.0), (2, 2.0)]).unwrap()
    }

    fn same_population(a: &EventLog<f64>, b: &EventLog<f64>, t: f64) -> bool {
        a.replay(t).alive == b.replay(t).alive
    }

    #[test]
    fn density_independent_never_decouples() {
        let s = RateSchedule::density_independent(bd()).unwrap();
        let sim = Simulator::new(&s, 50);
        for seed in 0..40 {
            let run = simulate_coupled(&sim, StoppingRule::FixedTime(3.0), None, seed).unwrap();
            assert!(run.decouple_time.is_none());
            assert_eq!(run.infinite.to_csv_string(), run.finite.to_csv_string());
        }
    }

    #[test]
    fn equal_before_decoupling() {
        let s = RateSchedule::logistic_death(bd()).unwrap();
        let sim = Simulator::new(&s, 20);
        let mut decoupled = 0;
        for seed in 0..200 {
            let run = simulate_coupled(&sim, StoppingRule::FixedTime(4.0), None, seed).unwrap();
            let cut = run.decouple_time.unwrap_or(run.stop_time);
            for e in run.finite.events().iter().chain(run.infinite.events()) {
                if e.time < cut {
                    assert!(same_population(&run.infinite, &run.finite, e.time));
                }
            }
            if let Some(d) = run.decouple_time {
                decoupled += 1;
                assert!(!same_population(&run.infinite, &run.finite, d));
            }
        }
        assert!(decoupled > 0);
    }

    #[test]
    fn continuation_extends_infinite_only() {
        let s = RateSchedule::logistic_death(OffspringRates::new([(2, 1.0)]).unwrap()).unwrap();
        let sim = Simulator::new(&s, 100);
        let run = simulate_coupled(&sim, StoppingRule::Size(0.5), Some(StoppingRule::Size(3.0)), 9).unwrap();
        assert_eq!(run.outcome, Outcome::Stopped);
        assert_eq!(run.finite.final_size(), 50);
        assert_eq!(run.infinite_outcome, Outcome::Stopped);
        assert_eq!(run.infinite.final_size(), 300);
        assert!(run.infinite_end >= run.stop_time);
    }

    #[test]
    fn deterministic() {
        let s = RateSchedule::logistic_death(bd()).unwrap();
        let sim = Simulator::new(&s, 30);
        let a = simulate_coupled(&sim, StoppingRule::Size(0.5), None, 4).unwrap();
        let b = simulate_coupled(&sim, StoppingRule::Size(0.5), None, 4).unwrap();
        assert_eq!(a.finite.to_csv_string(), b.finite.to_csv_string());
        assert_eq!(a.infinite.to_csv_string(), b.infinite.to_csv_string());
        assert_eq!(a.decouple_time, b.decouple_time);
    }
}
