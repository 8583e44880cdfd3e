use std::io::Write;

use super::{CoalescentError, SampleSet};
use crate::genealogy::{lcp, EventLog, Label, TreeNode};
use crate::scalar::Real;

/// Pairwise coalescence times and most recent common ancestors of a sample.
#[derive(Clone, Debug, PartialEq)]
pub struct CoalescenceMatrix<T> {
    m: usize,
    tau: Vec<T>,
    mrca: Vec<Label>,
    labels: Vec<Label>,
    sample_time: T,
}

impl<T: Real> CoalescenceMatrix<T> {
    /// MRCA of a pair is the longest common label prefix; the coalescence
    /// time is when that ancestor was replaced. Two copies of the same
    /// individual coalesce at the sampling time.
    pub fn new(log: &EventLog<T>, sample: &SampleSet<T>) -> Result<Self, CoalescentError> {
        let m = sample.len();
        let t = sample.sample_time;
        for (label, &id) in sample.labels.iter().zip(&sample.nodes) {
            if !log.is_alive_at(id, t) {
                return Err(CoalescentError::NotAlive(label.to_string()));
            }
        }
        let mut tau = vec![t; m * m];
        let mut mrca = vec![Label::root(); m * m];
        for i in 0..m {
            mrca[i * m + i] = sample.labels[i].clone();
            for j in (i + 1)..m {
                let (a, b) = (&sample.labels[i], &sample.labels[j]);
                let ancestor = lcp(a, b);
                let time = if a == b {
                    t
                } else {
                    let id = log.node(&ancestor).expect("a prefix of a living label has lived");
                    let replaced = log.replaced(id).expect("a strict ancestor has been replaced");
                    if replaced < t { replaced } else { t }
                };
                tau[i * m + j] = time;
                tau[j * m + i] = time;
                mrca[i * m + j] = ancestor.clone();
                mrca[j * m + i] = ancestor;
            }
        }
        Ok(Self { m, tau, mrca, labels: sample.labels.clone(), sample_time: t })
    }

    /// Builds a matrix directly from times, e.g. for a sampled limit tree.
    /// Leaves get distinct placeholder labels.
    pub fn from_times(m: usize, sample_time: T, mut time: impl FnMut(usize, usize) -> T) -> Self {
        let mut tau = vec![sample_time; m * m];
        for i in 0..m {
            for j in (i + 1)..m {
                let x = time(i, j);
                tau[i * m + j] = x;
                tau[j * m + i] = x;
            }
        }
        let labels: Vec<Label> = (1..=m as u32).map(|k| Label::root().child(k)).collect();
        let mut mrca = vec![Label::root(); m * m];
        for i in 0..m {
            mrca[i * m + i] = labels[i].clone();
        }
        Self { m, tau, mrca, labels, sample_time }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn sample_time(&self) -> T {
        self.sample_time
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn tau(&self, i: usize, j: usize) -> T {
        self.tau[i * self.m + j]
    }

    pub fn mrca(&self, i: usize, j: usize) -> &Label {
        &self.mrca[i * self.m + j]
    }

    /// `(i, j, tau)` for `i < j` in row-major order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.m).flat_map(move |i| ((i + 1)..self.m).map(move |j| (i, j, self.tau(i, j))))
    }

    /// Checks that among every triple the smallest time occurs at least twice.
    pub fn check_ultrametric(&self) -> Result<(), CoalescentError> {
        let m = self.m;
        for i in 0..m {
            for j in (i + 1)..m {
                for k in (j + 1)..m {
                    let mut v = [self.tau(i, j), self.tau(j, k), self.tau(i, k)];
                    v.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
                    if v[0] != v[1] {
                        return Err(CoalescentError::NotUltrametric { i: i + 1, j: j + 1, k: k + 1 });
                    }
                }
            }
        }
        Ok(())
    }

    /// Rooted tree of the sample, leaves named `1..=m`, branch lengths in
    /// time. The root sits at the earliest coalescence and carries no length;
    /// a single leaf hangs from time 0.
    pub fn to_tree(&self) -> Result<TreeNode<T>, CoalescentError> {
        self.check_ultrametric()?;
        if self.m == 0 {
            return Err(CoalescentError::EmptySample);
        }
        if self.m == 1 {
            return Ok(TreeNode::Leaf { name: 1, length: Some(self.sample_time) });
        }
        let all: Vec<usize> = (0..self.m).collect();
        Ok(self.subtree(&all, None))
    }

    fn subtree(&self, members: &[usize], parent_time: Option<T>) -> TreeNode<T> {
        if members.len() == 1 {
            let length = parent_time.map(|p| self.sample_time - p);
            return TreeNode::Leaf { name: members[0] + 1, length };
        }
        let split = members
            .iter()
            .flat_map(|&i| members.iter().filter(move |&&j| j > i).map(move |&j| self.tau(i, j)))
            .fold(T::infinity(), T::min);
        // Groups joined by strictly later coalescences.
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for &i in members {
            match groups.iter_mut().find(|g| self.tau(g[0], i) > split) {
                Some(g) => g.push(i),
                None => groups.push(vec![i]),
            }
        }
        let children = groups.iter().map(|g| self.subtree(g, Some(split))).collect();
        TreeNode::Internal { children, length: parent_time.map(|p| split - p) }
    }

    /// `i,j,tau` rows with 1-based sample indices.
    pub fn write_tau_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "i,j,tau")?;
        for (i, j, t) in self.pairs() {
            writeln!(out, "{},{},{}", i + 1, j + 1, t)?;
        }
        Ok(())
    }
}

/// Free-function form of [`CoalescenceMatrix::new`].
pub fn coalescence_matrix<T: Real>(log: &EventLog<T>, sample: &SampleSet<T>) -> Result<CoalescenceMatrix<T>, CoalescentError> {
    CoalescenceMatrix::new(log, sample)
}
