use rand::seq::{index, SliceRandom};

use super::{CoalescentError, ThetaIntervals};
use crate::genealogy::{EventLog, Label, NodeId};
use crate::scalar::Real;
use crate::simulator::rng::rng_from_seed;

/// Sampled individuals at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet<T> {
    pub labels: Vec<Label>,
    pub nodes: Vec<NodeId>,
    pub sample_time: T,
    pub with_replacement: bool,
}

impl<T: Real> SampleSet<T> {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// True when no label appears twice.
    pub fn all_distinct(&self) -> bool {
        let mut sorted: Vec<NodeId> = self.nodes.clone();
        sorted.sort_unstable();
        sorted.windows(2).all(|w| w[0] != w[1])
    }

    /// Builds a sample from explicit labels, checking they are alive at `t`.
    pub fn from_labels(log: &EventLog<T>, labels: Vec<Label>, t: T, with_replacement: bool) -> Result<Self, CoalescentError> {
        let mut nodes = Vec::with_capacity(labels.len());
        for label in &labels {
            let id = log
                .node(label)
                .filter(|&id| log.is_alive_at(id, t))
                .ok_or_else(|| CoalescentError::NotAlive(label.to_string()))?;
            nodes.push(id);
        }
        let sample = Self { labels, nodes, sample_time: t, with_replacement };
        if !with_replacement && !sample.all_distinct() {
            return Err(CoalescentError::DuplicateLabels);
        }
        Ok(sample)
    }
}

/// Sample drawn by marks: either individuals or the ghost outcome for an
/// extinct population.
#[derive(Clone, Debug, PartialEq)]
pub enum MarkedSample<T> {
    Sample(SampleSet<T>),
    Ghost,
}

/// Uniform `m`-subset of the population alive at `t`, in random order.
pub fn sample_without_replacement<T: Real>(
    log: &EventLog<T>,
    t: T,
    m: usize,
    seed: u64,
) -> Result<SampleSet<T>, CoalescentError> {
    let alive = log.alive_nodes_at(t);
    if alive.len() < m || m == 0 {
        return Err(CoalescentError::InsufficientPopulation { needed: m, alive: alive.len() });
    }
    let mut rng = rng_from_seed(seed);
    let mut picked: Vec<usize> = index::sample(&mut rng, alive.len(), m).into_vec();
    picked.shuffle(&mut rng);
    let nodes: Vec<NodeId> = picked.into_iter().map(|k| alive[k]).collect();
    let labels = nodes.iter().map(|&id| log.label(id)).collect();
    Ok(SampleSet { labels, nodes, sample_time: t, with_replacement: false })
}

/// Maps each mark in `[0, 1)` to the alive individual whose Θ-interval holds it.
pub fn sample_by_marks<T: Real>(log: &EventLog<T>, t: T, marks: &[f64]) -> Result<MarkedSample<T>, CoalescentError> {
    if let Some(&bad) = marks.iter().find(|x| !(0.0..1.0).contains(*x)) {
        return Err(CoalescentError::BadMark(bad));
    }
    let theta = match ThetaIntervals::new(log, t) {
        Ok(th) => th,
        Err(CoalescentError::Extinct) => return Ok(MarkedSample::Ghost),
        Err(e) => return Err(e),
    };
    let mut labels = Vec::with_capacity(marks.len());
    let mut nodes = Vec::with_capacity(marks.len());
    for &x in marks {
        let (id, label) = theta.locate(x).expect("mark validated to lie in [0, 1)");
        labels.push(label.clone());
        nodes.push(id);
    }
    Ok(MarkedSample::Sample(SampleSet { labels, nodes, sample_time: t, with_replacement: true }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(p: &[u32]) -> Label {
        Label::from(p)
    }

    fn pair() -> EventLog<f64> {
        let mut log = EventLog::new();
        log.record_label(0.5, &Label::root(), 2).unwrap();
        log
    }

    #[test]
    fn marks_examples() {
        let log = pair();
        let MarkedSample::Sample(s) = sample_by_marks(&log, 1.0, &[0.25, 0.75]).unwrap() else { panic!() };
        assert_eq!(s.labels, vec![l(&[1]), l(&[2])]);
        assert!(s.with_replacement);
        let MarkedSample::Sample(s) = sample_by_marks(&log, 1.0, &[0.1, 0.2]).unwrap() else { panic!() };
        assert_eq!(s.labels, vec![l(&[1]), l(&[1])]);
        assert!(!s.all_distinct());

        let mut dead = EventLog::new();
        dead.record_label(0.5, &Label::root(), 0).unwrap();
        assert_eq!(sample_by_marks(&dead, 1.0, &[0.3]).unwrap(), MarkedSample::Ghost);
        assert!(matches!(sample_by_marks(&log, 1.0, &[1.0]), Err(CoalescentError::BadMark(_))));
    }

    #[test]
    fn without_replacement_examples() {
        let mut log = pair();
        log.record_label(0.7, &l(&[1]), 2).unwrap();
        let s = sample_without_replacement(&log, 1.0, 3, 11).unwrap();
        let mut got = s.labels.clone();
        got.sort();
        assert_eq!(got, vec![l(&[1, 1]), l(&[1, 2]), l(&[2])]);
        assert!(s.all_distinct());
        assert_eq!(s, sample_without_replacement(&log, 1.0, 3, 11).unwrap());
        assert!(matches!(
            sample_without_replacement(&pair(), 1.0, 3, 0),
            Err(CoalescentError::InsufficientPopulation { needed: 3, alive: 2 })
        ));
    }

    #[test]
    fn explicit_labels_must_be_alive() {
        let log = pair();
        assert!(SampleSet::from_labels(&log, vec![l(&[1]), l(&[2])], 1.0, false).is_ok());
        assert!(matches!(
            SampleSet::from_labels(&log, vec![Label::root()], 1.0, false),
            Err(CoalescentError::NotAlive(_))
        ));
        assert!(matches!(
            SampleSet::from_labels(&log, vec![l(&[1]), l(&[1])], 1.0, false),
            Err(CoalescentError::DuplicateLabels)
        ));
    }
}
