use num_rational::Ratio;

use super::CoalescentError;
use crate::genealogy::{EventLog, Label, NodeId};
use crate::scalar::Real;

/// Half-open interval `[lo / denominator, hi / denominator)` of `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ThetaInterval {
    pub lo: u64,
    pub hi: u64,
    pub denominator: u64,
}

impl ThetaInterval {
    pub fn start(&self) -> Ratio<u64> {
        Ratio::new(self.lo, self.denominator)
    }

    pub fn end(&self) -> Ratio<u64> {
        Ratio::new(self.hi, self.denominator)
    }

    pub fn length(&self) -> Ratio<u64> {
        Ratio::new(self.hi - self.lo, self.denominator)
    }

    pub fn contains_interval(&self, other: &ThetaInterval) -> bool {
        debug_assert_eq!(self.denominator, other.denominator);
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Exact test of `x ∈ [lo/N, hi/N)` for a mark `x`.
    pub fn contains(&self, x: f64) -> bool {
        let scaled = x * self.denominator as f64;
        scaled >= self.lo as f64 && scaled < self.hi as f64
    }
}

/// Recursive subdivision of `[0, 1)` by descendant fractions at one time.
///
/// The root gets `[0, F(root))`; the `j`-th child of `u` starts where `u`
/// starts plus the fractions of children `1..j`. Endpoints are integers over
/// the population size, so the alive intervals tile `[0, 1)` exactly.
#[derive(Clone, Debug)]
pub struct ThetaIntervals {
    denominator: u64,
    /// `(lo, hi)` per node id; `None` for nodes not yet born at `t`.
    bounds: Vec<Option<(u64, u64)>>,
    /// Alive individuals ordered by interval start.
    alive: Vec<(NodeId, Label)>,
}

impl ThetaIntervals {
    pub fn new<T: Real>(log: &EventLog<T>, t: T) -> Result<Self, CoalescentError> {
        let counts = descendant_counts(log, t);
        let population = counts[0];
        if population == 0 {
            return Err(CoalescentError::Extinct);
        }
        let mut bounds: Vec<Option<(u64, u64)>> = vec![None; log.num_nodes()];
        bounds[0] = Some((0, population));
        for k in 0..log.num_nodes() {
            let id = NodeId(k as u32);
            let Some((lo, _)) = bounds[k] else { continue };
            if log.replaced(id).is_none_or(|r| r > t) {
                continue;
            }
            let mut start = lo;
            for child in log.child_ids(id) {
                let d = counts[child.index()];
                bounds[child.index()] = Some((start, start + d));
                start += d;
            }
        }
        let mut alive: Vec<(NodeId, Label)> = log
            .alive_nodes_at(t)
            .into_iter()
            .map(|id| (id, log.label(id)))
            .collect();
        alive.sort_by_key(|(id, _)| bounds[id.index()].map(|b| b.0));
        Ok(Self { denominator: population, bounds, alive })
    }

    /// Population size `N(t)`, the common denominator.
    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn interval_of_node(&self, id: NodeId) -> Option<ThetaInterval> {
        let (lo, hi) = (*self.bounds.get(id.index())?)?;
        Some(ThetaInterval { lo, hi, denominator: self.denominator })
    }

    /// Interval of any individual born by `t` (alive or not).
    pub fn interval<T: Real>(&self, log: &EventLog<T>, label: &Label) -> Option<ThetaInterval> {
        self.interval_of_node(log.node(label)?)
    }

    /// Alive individuals and their intervals, in order along `[0, 1)`.
    pub fn alive(&self) -> impl Iterator<Item = (&Label, ThetaInterval)> + '_ {
        self.alive
            .iter()
            .map(|(id, label)| (label, self.interval_of_node(*id).expect("alive nodes have intervals")))
    }

    pub fn len(&self) -> usize {
        self.alive.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alive.is_empty()
    }

    /// The alive individual whose interval contains `mark`.
    pub fn locate(&self, mark: f64) -> Option<(NodeId, &Label)> {
        if !(0.0..1.0).contains(&mark) {
            return None;
        }
        let n = self.denominator;
        let mut k = ((mark * n as f64).floor() as u64).min(n - 1);
        // Guard against rounding in the product.
        while k > 0 && (k as f64) / (n as f64) > mark {
            k -= 1;
        }
        while k + 1 < n && ((k + 1) as f64) / (n as f64) <= mark {
            k += 1;
        }
        // Alive intervals have unit length and are sorted, so rank = start.
        let (id, label) = &self.alive[k as usize];
        Some((*id, label))
    }
}

/// `D^u(t)` for every node id: the number of alive descendants (including itself).
pub fn descendant_counts<T: Real>(log: &EventLog<T>, t: T) -> Vec<u64> {
    let mut counts = vec![0u64; log.num_nodes()];
    for k in (0..log.num_nodes()).rev() {
        let id = NodeId(k as u32);
        if log.birth(id) > t {
            continue;
        }
        if log.is_alive_at(id, t) {
            counts[k] += 1;
        }
        if let Some(p) = log.parent(id) {
            counts[p.index()] += counts[k];
        }
    }
    counts
}
