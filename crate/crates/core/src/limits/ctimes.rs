use super::LimitsError;
use crate::scalar::Real;

/// Arguments closer than this are treated as tied.
pub const TIE_THRESHOLD: f64 = 1e-9;
/// Half-spacing used to separate tied arguments.
pub const TIE_EPSILON: f64 = 1e-6;

/// `P[σ^1 >= t_1, .., σ^(m-1) >= t_(m-1)]` for the unordered coalescence
/// times of `m` samples from a supercritical binary process with growth `r`.
///
/// With `x_i = exp(-r t_i)` this is
/// `m [ ∏ -x_i/(1-x_i) + Σ_j r t_j x_j/(1-x_j)^2 ∏_{i≠j} x_i/(x_i-x_j) ]`.
/// The formula has removable singularities where two arguments coincide;
/// tied arguments are spread symmetrically about their mean by
/// [`TIE_EPSILON`] before evaluation. The result is clamped to `[0, 1]`.
pub fn ctimes_survival<T: Real>(r: T, m: usize, t: &[T]) -> Result<T, LimitsError> {
    if !(r > T::zero() && r.is_finite()) {
        return Err(LimitsError::Domain(format!("growth rate must be positive, got {r}")));
    }
    if m < 2 || t.len() != m - 1 {
        return Err(LimitsError::Domain(format!("need m >= 2 and m - 1 times, got m = {m} and {} times", t.len())));
    }
    if let Some(bad) = t.iter().find(|x| !(**x > T::zero())) {
        return Err(LimitsError::Domain(format!("coalescence times must be positive, got {bad}")));
    }
    if t.iter().any(|x| x.is_infinite()) {
        return Ok(T::zero());
    }
    let value = if m == 2 { pair_survival(r * t[0]) } else { general(r, m, &untie(t)) };
    Ok(value.max(T::zero()).min(T::one()))
}

/// CDF of the coalescence time of two samples, `1 - ctimes_survival(r, 2, [t])`,
/// extended by 0 for `t <= 0`.
pub fn pairwise_cdf<T: Real>(r: T, t: T) -> T {
    if t <= T::zero() {
        return T::zero();
    }
    if t.is_infinite() {
        return T::one();
    }
    (T::one() - pair_survival(r * t)).max(T::zero()).min(T::one())
}

/// `2 x (u - (1 - x)) / (1 - x)^2` with `x = exp(-u)`, avoiding the
/// cancellation for small `u`.
fn pair_survival<T: Real>(u: T) -> T {
    let x = (-u).exp();
    let one_minus_x = -(-u).exp_m1();
    let excess = if u < T::of(1e-3) {
        let u2 = u * u;
        u2 * (T::of(0.5) - u / T::of(6.0) + u2 / T::of(24.0) - u2 * u / T::of(120.0))
    } else {
        u - one_minus_x
    };
    T::of(2.0) * x * excess / (one_minus_x * one_minus_x)
}

fn general<T: Real>(r: T, m: usize, t: &[T]) -> T {
    let x: Vec<T> = t.iter().map(|&ti| (-r * ti).exp()).collect();
    let one_minus: Vec<T> = t.iter().map(|&ti| -(-r * ti).exp_m1()).collect();
    let mut product = T::one();
    for (xi, oi) in x.iter().zip(&one_minus) {
        product = product * (-*xi / *oi);
    }
    let mut sum = T::zero();
    for j in 0..t.len() {
        let mut term = r * t[j] * x[j] / (one_minus[j] * one_minus[j]);
        for i in 0..t.len() {
            if i != j {
                term = term * x[i] / (x[i] - x[j]);
            }
        }
        sum = sum + term;
    }
    T::count(m as u64) * (product + sum)
}

/// Spreads each cluster of (near-)equal arguments to `mean + ε(l - (k-1)/2)`.
/// The formula is symmetric, so the mirrored assignment gives the same value
/// and no further averaging is needed.
fn untie<T: Real>(t: &[T]) -> Vec<T> {
    let mut order: Vec<usize> = (0..t.len()).collect();
    order.sort_by(|&a, &b| t[a].partial_cmp(&t[b]).expect("finite times"));
    let mut out = t.to_vec();
    let threshold = T::of(TIE_THRESHOLD);
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && t[order[end]] - t[order[end - 1]] < threshold {
            end += 1;
        }
        let k = end - start;
        if k > 1 {
            let mean = order[start..end].iter().map(|&i| t[i]).sum::<T>() / T::count(k as u64);
            let centre = T::count(k as u64 - 1) * T::of(0.5);
            for (l, &i) in order[start..end].iter().enumerate() {
                out[i] = mean + T::of(TIE_EPSILON) * (T::count(l as u64) - centre);
            }
        }
        start = end;
    }
    out
}
