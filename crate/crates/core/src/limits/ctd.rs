use super::bd::{laplace_unchecked, pgf_unchecked, MAX_DERIVATIVE_ORDER};
use super::quadrature::integrate_adaptive;
use super::{BinaryBDParams, LimitsError};
use crate::coalescent::Partition;
use crate::scalar::Real;

/// Absolute tolerance on the returned probability.
const DEFAULT_TOLERANCE: f64 = 1e-8;
const MAX_INTERVALS: usize = 4000;

/// `P[π(t_1) = γ_1, .., π(t_r) = γ_r]` for the limiting coalescent of `m`
/// samples from a binary birth–death process.
///
/// Writing `γ_0` for the single block and `t_0 = 0`, with `b_i(Γ)` the
/// number of blocks of `γ_(i+1)` inside `Γ ∈ γ_i` and `r̄` the growth rate,
/// the probability is
///
/// `(-1)^m e^(-m r̄ t_r) / (1 - ψ(∞)) ∫ v^(m-1)/(m-1)!
///   ∏_(i<r) ∏_(Γ∈γ_i) H^(b_i(Γ))_(t_(i+1) - t_i)(ψ(e^(-r̄ t_(i+1)) v))
///   ∏_(Γ∈γ_r) ψ^(#Γ)(e^(-r̄ t_r) v) dv`.
///
/// The integral is taken over `w = e^(-r̄ t_r) v`, mapped to `(0, 1)` by
/// `w = u / (1 - u)`, with adaptive Gauss–Kronrod to absolute error `1e-8`.
pub fn ctd_joint_prob<T: Real>(
    p: &BinaryBDParams<T>,
    m: usize,
    times: &[T],
    partitions: &[Partition],
) -> Result<T, LimitsError> {
    ctd_joint_prob_with(p, m, times, partitions, T::of(DEFAULT_TOLERANCE), MAX_INTERVALS)
}

/// [`ctd_joint_prob`] with an explicit tolerance and subdivision budget.
pub fn ctd_joint_prob_with<T: Real>(
    p: &BinaryBDParams<T>,
    m: usize,
    times: &[T],
    partitions: &[Partition],
    tolerance: T,
    max_intervals: usize,
) -> Result<T, LimitsError> {
    validate(m, times, partitions)?;
    let r = p.growth();
    let last = *times.last().expect("validated non-empty");

    // (elapsed time, argument scale, derivative order) per H factor.
    let mut factors: Vec<(T, T, usize)> = Vec::new();
    let single = Partition::single_block(m);
    let mut prev_time = T::zero();
    let mut coarse = &single;
    for (&t, fine) in times.iter().zip(partitions) {
        let scale = (r * (last - t)).exp();
        for block in coarse.blocks() {
            factors.push((t - prev_time, scale, fine.blocks_within(block)));
        }
        prev_time = t;
        coarse = fine;
    }
    let final_sizes: Vec<usize> = coarse.blocks().iter().map(Vec::len).collect();

    let m_fact = (1..m).fold(T::one(), |acc, k| acc * T::count(k as u64));
    let integrand = |u: T| {
        let one_minus = T::one() - u;
        let w = u / one_minus;
        let mut value = w.powi(m as i32 - 1) / m_fact / (one_minus * one_minus);
        for &(dt, scale, b) in &factors {
            value = value * pgf_unchecked(p, dt, laplace_unchecked(p, scale * w, 0), b);
        }
        for &size in &final_sizes {
            value = value * laplace_unchecked(p, w, size);
        }
        value
    };
    let q = p.extinction_probability();
    let prefactor = if m.is_multiple_of(2) { T::one() } else { -T::one() } / (T::one() - q);
    let result = integrate_adaptive(integrand, T::zero(), T::one(), tolerance / prefactor.abs(), max_intervals)?;
    Ok(prefactor * result.value)
}

/// The law of `π(t)` at one time: every partition of `{1..=m}` with its
/// probability.
pub fn ctd_single_time<T: Real>(p: &BinaryBDParams<T>, m: usize, t: T) -> Result<Vec<(Partition, T)>, LimitsError> {
    Partition::all(m)
        .into_iter()
        .map(|g| ctd_joint_prob(p, m, &[t], std::slice::from_ref(&g)).map(|prob| (g, prob)))
        .collect()
}

fn validate<T: Real>(m: usize, times: &[T], partitions: &[Partition]) -> Result<(), LimitsError> {
    if m == 0 || m > MAX_DERIVATIVE_ORDER {
        return Err(LimitsError::Domain(format!("m must lie in 1..={MAX_DERIVATIVE_ORDER}, got {m}")));
    }
    if times.is_empty() || times.len() != partitions.len() {
        return Err(LimitsError::InvalidChain(format!(
            "need one partition per time ({} times, {} partitions)",
            times.len(),
            partitions.len()
        )));
    }
    let mut prev = T::zero();
    for &t in times {
        if !(t > prev && t.is_finite()) {
            return Err(LimitsError::Domain("times must be finite, positive and strictly increasing".into()));
        }
        prev = t;
    }
    for (i, g) in partitions.iter().enumerate() {
        if g.m() != m {
            return Err(LimitsError::InvalidChain(format!("partition {} is not a partition of 1..={m}", i + 1)));
        }
        if i > 0 && !g.refines(&partitions[i - 1]) {
            return Err(LimitsError::InvalidChain(format!(
                "partition {} ({g}) does not refine partition {} ({})",
                i + 1,
                i,
                partitions[i - 1]
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limits::ctimes_survival;

    fn p(blocks: &[&[usize]]) -> Partition {
        Partition::new(blocks.iter().map(|b| b.to_vec()).collect()).unwrap()
    }

    #[test]
    fn pair_matches_survival_function() {
        for params in [BinaryBDParams::<f64>::yule(1.0).unwrap(), BinaryBDParams::new(2.0, 1.0).unwrap()] {
            for t in [0.2, 1.0, 3.0] {
                let joined = ctd_joint_prob(&params, 2, &[t], &[p(&[&[1, 2]])]).unwrap();
                let split = ctd_joint_prob(&params, 2, &[t], &[p(&[&[1], &[2]])]).unwrap();
                assert!((joined - ctimes_survival(params.growth(), 2, &[t]).unwrap()).abs() < 1e-6);
                assert!((joined + split - 1.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn normalised_for_three_and_four() {
        let params = BinaryBDParams::new(1.5, 0.5).unwrap();
        for m in [3, 4] {
            let total: f64 = ctd_single_time(&params, m, 0.8).unwrap().iter().map(|(_, x)| x).sum();
            assert!((total - 1.0).abs() < 1e-6, "m={m}: {total}");
        }
    }

    #[test]
    fn marginal_consistency() {
        let params = BinaryBDParams::yule(1.0).unwrap();
        let (t1, t2) = (0.5, 1.4);
        for g1 in Partition::all(3) {
            let single = ctd_joint_prob(&params, 3, &[t1], std::slice::from_ref(&g1)).unwrap();
            let summed: f64 = Partition::all(3)
                .into_iter()
                .filter(|g2| g2.refines(&g1))
                .map(|g2| ctd_joint_prob(&params, 3, &[t1, t2], &[g1.clone(), g2]).unwrap())
                .sum();
            assert!((single - summed).abs() < 1e-6, "{g1}: {single} vs {summed}");
        }
    }

    #[test]
    fn rejects_bad_chains() {
        let params = BinaryBDParams::yule(1.0).unwrap();
        let a = p(&[&[1, 2], &[3]]);
        let b = p(&[&[1, 3], &[2]]);
        assert!(matches!(
            ctd_joint_prob(&params, 3, &[1.0, 2.0], &[a.clone(), b]),
            Err(LimitsError::InvalidChain(_))
        ));
        assert!(ctd_joint_prob(&params, 3, &[2.0, 1.0], &[a.clone(), a.clone()]).is_err());
        assert!(ctd_joint_prob(&params, 4, &[1.0], &[a]).is_err());
    }
}
