use super::{BinaryBDParams, LimitsError};
use crate::scalar::Real;

/// Highest derivative order the closed forms are evaluated for.
pub const MAX_DERIVATIVE_ORDER: usize = 12;

fn check_order(j: usize) -> Result<(), LimitsError> {
    if j > MAX_DERIVATIVE_ORDER {
        return Err(LimitsError::UnsupportedOrder { order: j, max: MAX_DERIVATIVE_ORDER });
    }
    Ok(())
}

fn factorial<T: Real>(j: usize) -> T {
    (1..=j).fold(T::one(), |acc, k| acc * T::count(k as u64))
}

/// `d^j/ds^j E[s^N(t)]` for the birth–death process started from one
/// individual.
///
/// The generating function is linear fractional: with `x = exp(-r t)`,
/// `a = λ(1 - x)` and `b = r x`, it equals `1 - r (1 - s) / (b + a (1 - s))`,
/// so for `j >= 1` the derivatives are `r b j! a^(j-1) / (b + a (1 - s))^(j+1)`.
pub fn bd_pgf<T: Real>(p: &BinaryBDParams<T>, t: T, s: T, j: usize) -> Result<T, LimitsError> {
    check_order(j)?;
    if !(t >= T::zero() && t.is_finite()) {
        return Err(LimitsError::Domain(format!("time must be finite and non-negative, got {t}")));
    }
    if !(s >= T::zero() && s <= T::one()) {
        return Err(LimitsError::Domain(format!("s must lie in [0, 1], got {s}")));
    }
    Ok(pgf_unchecked(p, t, s, j))
}

pub(super) fn pgf_unchecked<T: Real>(p: &BinaryBDParams<T>, t: T, s: T, j: usize) -> T {
    // Same function written in w = 1 - s: 1 - r w / (r x + λ(1 - x) w),
    // which keeps every term positive.
    let r = p.growth();
    let x = (-r * t).exp();
    let a = -p.birth * (-r * t).exp_m1();
    let b = r * x;
    let w = T::one() - s;
    let den = b + a * w;
    if j == 0 {
        return T::one() - r * w / den;
    }
    r * b * factorial::<T>(j) * a.powi(j as i32 - 1) / den.powi(j as i32 + 1)
}

/// `d^j/dv^j E[exp(-vW)]` where `W = lim exp(-rt) N(t)`.
///
/// `W` has an atom of mass `q = μ/λ` at zero and is otherwise exponential
/// with mean `λ/r`, so `ψ(v) = q + (1 - q) / (1 + vλ/r)`.
pub fn bd_laplace_w<T: Real>(p: &BinaryBDParams<T>, v: T, j: usize) -> Result<T, LimitsError> {
    check_order(j)?;
    if !(v >= T::zero()) {
        return Err(LimitsError::Domain(format!("v must be non-negative, got {v}")));
    }
    Ok(laplace_unchecked(p, v, j))
}

pub(super) fn laplace_unchecked<T: Real>(p: &BinaryBDParams<T>, v: T, j: usize) -> T {
    let q = p.extinction_probability();
    let k = p.birth / p.growth();
    if v.is_infinite() {
        return if j == 0 { q } else { T::zero() };
    }
    let base = T::one() + v * k;
    if j == 0 {
        return q + (T::one() - q) / base;
    }
    let sign = if j.is_multiple_of(2) { T::one() } else { -T::one() };
    (T::one() - q) * sign * factorial::<T>(j) * k.powi(j as i32) / base.powi(j as i32 + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bd() -> BinaryBDParams<f64> {
        BinaryBDParams::new(2.0, 0.5).unwrap()
    }

    #[test]
    fn pgf_boundary_values() {
        for p in [bd(), BinaryBDParams::yule(1.0).unwrap()] {
            for s in [0.0, 0.3, 1.0] {
                assert!((bd_pgf(&p, 0.0, s, 0).unwrap() - s).abs() < 1e-15);
            }
            for t in [0.1, 1.0, 7.0] {
                assert!((bd_pgf(&p, t, 1.0, 0).unwrap() - 1.0).abs() < 1e-14);
            }
            assert!((bd_pgf(&p, 0.0, 0.4, 1).unwrap() - 1.0).abs() < 1e-15);
            assert!(bd_pgf(&p, 0.0, 0.4, 2).unwrap().abs() < 1e-15);
        }
        // Yule: N(t) is geometric with parameter exp(-t).
        let p = BinaryBDParams::yule(1.0).unwrap();
        let x = (-1.0f64).exp();
        let direct = 0.5 * x / (1.0 - 0.5 * (1.0 - x));
        assert!((bd_pgf(&p, 1.0, 0.5, 0).unwrap() - direct).abs() < 1e-15);
        // P[N(t) = 0] for birth–death.
        let p = bd();
        let t: f64 = 1.3;
        let e = (p.growth() * t).exp();
        let extinct = p.death * (e - 1.0) / (p.birth * e - p.death);
        assert!((bd_pgf(&p, t, 0.0, 0).unwrap() - extinct).abs() < 1e-14);
    }

    #[test]
    fn pgf_derivatives_match_finite_differences() {
        let p = bd();
        let (t, s, h) = (0.8, 0.4, 1e-5);
        for j in 1..4 {
            let fd = (bd_pgf(&p, t, s + h, j - 1).unwrap() - bd_pgf(&p, t, s - h, j - 1).unwrap()) / (2.0 * h);
            let exact = bd_pgf(&p, t, s, j).unwrap();
            assert!((fd - exact).abs() < 1e-6 * exact.abs().max(1.0), "j={j}: {fd} vs {exact}");
        }
    }

    #[test]
    fn laplace_values() {
        let p = bd();
        assert_eq!(bd_laplace_w(&p, 0.0, 0).unwrap(), 1.0);
        assert!((bd_laplace_w(&p, 1e12, 0).unwrap() - 0.25).abs() < 1e-10);
        assert_eq!(laplace_unchecked(&p, f64::INFINITY, 0), 0.25);
        // E[W] = 1.
        assert!((bd_laplace_w(&p, 0.0, 1).unwrap() + 1.0).abs() < 1e-14);
        let (v, h) = (0.7, 1e-5);
        for j in 1..4 {
            let fd = (bd_laplace_w(&p, v + h, j - 1).unwrap() - bd_laplace_w(&p, v - h, j - 1).unwrap()) / (2.0 * h);
            assert!((fd - bd_laplace_w(&p, v, j).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn order_and_domain_errors() {
        let p = bd();
        assert!(matches!(bd_pgf(&p, 1.0, 0.5, 13), Err(LimitsError::UnsupportedOrder { order: 13, max: 12 })));
        assert!(matches!(bd_laplace_w(&p, 1.0, 13), Err(LimitsError::UnsupportedOrder { .. })));
        assert!(bd_pgf(&p, 1.0, 1.5, 0).is_err());
        assert!(bd_laplace_w(&p, -1.0, 0).is_err());
        assert!(BinaryBDParams::new(1.0, 1.0).is_err());
        assert!(bd_pgf(&BinaryBDParams::<f32>::yule(1.0).unwrap(), 1.0, 0.5, 0).unwrap() > 0.0);
    }
}
