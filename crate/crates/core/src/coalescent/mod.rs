//! Sampling individuals from a run and extracting their genealogy.

mod matrix;
mod partition;
mod sample;
mod theta;

use num_rational::Ratio;
use thiserror::Error;

use crate::genealogy::{EventLog, Label};
use crate::scalar::Real;

pub use matrix::{coalescence_matrix, CoalescenceMatrix};
pub use partition::{partition_process, Partition, PartitionProcess};
pub use sample::{sample_by_marks, sample_without_replacement, MarkedSample, SampleSet};
pub use theta::{descendant_counts, ThetaInterval, ThetaIntervals};

#[derive(Debug, Error)]
pub enum CoalescentError {
    #[error("population is extinct")]
    Extinct,
    #[error("need {needed} individuals but only {alive} are alive")]
    InsufficientPopulation { needed: usize, alive: usize },
    #[error("mark {0} is outside [0, 1)")]
    BadMark(f64),
    #[error("individual `{0}` is not alive at the sampling time")]
    NotAlive(String),
    #[error("sample without replacement contains a label twice")]
    DuplicateLabels,
    #[error("coalescence times of samples {i}, {j}, {k} are not ultrametric")]
    NotUltrametric { i: usize, j: usize, k: usize },
    #[error("empty sample")]
    EmptySample,
}

/// `F^u(t)`: fraction of the population alive at `t` descended from `u`
/// (including `u` itself), or 0 if the population is extinct.
pub fn descendant_fraction<T: Real>(log: &EventLog<T>, u: &Label, t: T) -> T {
    descendant_fraction_exact(log, u, t).map_or(T::zero(), |f| T::count(*f.numer()) / T::count(*f.denom()))
}

/// Exact form of [`descendant_fraction`]; `None` when extinct.
pub fn descendant_fraction_exact<T: Real>(log: &EventLog<T>, u: &Label, t: T) -> Option<Ratio<u64>> {
    let alive = log.alive_nodes_at(t);
    if alive.is_empty() {
        return None;
    }
    let d = match log.node(u) {
        Some(id) => alive.iter().filter(|&&v| log.is_ancestor_node(id, v)).count(),
        None => 0,
    };
    Some(Ratio::new(d as u64, alive.len() as u64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractions() {
        let mut log: EventLog<f64> = EventLog::new();
        log.record_label(1.0, &Label::root(), 2).unwrap();
        log.record_label(1.5, &Label::from(&[2][..]), 2).unwrap();
        let f = descendant_fraction(&log, &Label::from(&[2][..]), 2.0);
        assert!((f - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(descendant_fraction(&log, &Label::root(), 2.0), 1.0);
        assert_eq!(descendant_fraction(&log, &Label::from(&[7][..]), 2.0), 0.0);

        let mut dead: EventLog<f64> = EventLog::new();
        dead.record_label(1.0, &Label::root(), 0).unwrap();
        assert_eq!(descendant_fraction(&dead, &Label::root(), 2.0), 0.0);
    }
}
