use rand::Rng;

use super::{BinaryBDParams, LimitsError};
use crate::scalar::Real;
use crate::simulator::rng::{open_unit, rng_from_seed};

/// One draw of the limiting coalescent tree of `m` samples.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitTree<T> {
    pub m: usize,
    /// The `m - 1` coalescence times, in the (exchangeable) order drawn.
    pub sigmas: Vec<T>,
    /// Kingman merge sequence, most recent merge first. Each entry holds the
    /// two merging blocks as sorted sample indices in `1..=m`.
    pub merges: Vec<(Vec<usize>, Vec<usize>)>,
}

impl<T: Real> LimitTree<T> {
    /// Coalescence times in merge order (decreasing).
    pub fn merge_times(&self) -> Vec<T> {
        let mut times = self.sigmas.clone();
        times.sort_by(|a, b| b.partial_cmp(a).expect("finite times"));
        times
    }

    /// Time at which samples `i` and `j` (1-based, distinct) share an ancestor.
    pub fn pair_time(&self, i: usize, j: usize) -> T {
        let times = self.merge_times();
        for (k, (a, b)) in self.merges.iter().enumerate() {
            if (a.contains(&i) && b.contains(&j)) || (a.contains(&j) && b.contains(&i)) {
                return times[k];
            }
        }
        panic!("samples {i} and {j} never merge");
    }

    /// The first pair to merge, going back in time.
    pub fn cherry(&self) -> (usize, usize) {
        let (a, b) = &self.merges[0];
        (a[0].min(b[0]), a[0].max(b[0]))
    }

    /// Nested topology such as `((1,2),3)`; children ordered by smallest leaf.
    pub fn topology(&self) -> String {
        let mut names: Vec<(usize, String)> = (1..=self.m).map(|i| (i, i.to_string())).collect();
        for (a, b) in &self.merges {
            let (ia, ib) = (a[0].min(b[0]), a[0].max(b[0]));
            let pos_a = names.iter().position(|(k, _)| *k == ia).expect("block present");
            let (_, sa) = names.remove(pos_a);
            let pos_b = names.iter().position(|(k, _)| *k == ib).expect("block present");
            let (_, sb) = names.remove(pos_b);
            names.push((ia, format!("({sa},{sb})")));
        }
        names.pop().map(|(_, s)| s).unwrap_or_default()
    }

    pub fn csv_header(m: usize) -> String {
        let mut cols: Vec<String> = (1..m).map(|k| format!("sigma_{k}")).collect();
        cols.push("topology".into());
        cols.join(",")
    }

    /// One CSV record; the topology is quoted because it contains commas.
    pub fn csv_row(&self) -> String {
        let mut cols: Vec<String> = self.sigmas.iter().map(|s| s.to_string()).collect();
        cols.push(format!("\"{}\"", self.topology()));
        cols.join(",")
    }
}

/// Draws a tree from the limit law using a fresh stream for `seed`.
pub fn sample_limit_tree<T: Real>(p: &BinaryBDParams<T>, m: usize, seed: u64) -> Result<LimitTree<T>, LimitsError> {
    sample_limit_tree_with(p, m, &mut rng_from_seed(seed))
}

/// Draws a tree from the limit law.
///
/// The coalescence times are a mixture of i.i.d. draws: with `B ~ Beta(m, 1)`
/// and `y = B / (1 - B)`, the `σ_i` are independent given `y` with survival
/// function `x (1 + y) / (1 + x y)`, `x = exp(-r t)`. Integrating out `y`
/// reproduces the joint survival function exactly. The topology is an
/// independent sequence of uniform pairwise merges.
pub fn sample_limit_tree_with<T: Real, R: Rng + ?Sized>(
    p: &BinaryBDParams<T>,
    m: usize,
    rng: &mut R,
) -> Result<LimitTree<T>, LimitsError> {
    if m < 2 {
        return Err(LimitsError::Domain(format!("need at least two samples, got {m}")));
    }
    let r = p.growth().as_f64();
    let b = open_unit(rng).powf(1.0 / m as f64);
    let y = b / (1.0 - b);
    let sigmas = (0..m - 1)
        .map(|_| {
            let u = open_unit(rng);
            // Invert u = x(1 + y) / (1 + xy); for huge y the form below stays finite.
            let x = if y.is_finite() { u / (1.0 + y * (1.0 - u)) } else { 0.0 };
            let t = if x > 0.0 { -x.ln() / r } else { f64::MAX };
            T::of(t.max(f64::MIN_POSITIVE))
        })
        .collect();

    let mut blocks: Vec<Vec<usize>> = (1..=m).map(|i| vec![i]).collect();
    let mut merges = Vec::with_capacity(m - 1);
    while blocks.len() > 1 {
        let i = rng.random_range(0..blocks.len());
        let mut j = rng.random_range(0..blocks.len() - 1);
        if j >= i {
            j += 1;
        }
        let (lo, hi) = (i.min(j), i.max(j));
        let b_hi = blocks.swap_remove(hi);
        let b_lo = std::mem::take(&mut blocks[lo]);
        let mut joined = [b_lo.clone(), b_hi.clone()].concat();
        joined.sort_unstable();
        blocks[lo] = joined;
        merges.push((b_lo, b_hi));
    }
    Ok(LimitTree { m, sigmas, merges })
}
