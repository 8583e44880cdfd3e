//! Offspring-rate schedules.
//!
//! A [`RateSchedule`] gives, for carrying capacity `kappa` and current
//! population size `n`, the per-individual rate `rates(i)` at which an
//! individual is replaced by `i` children. Every schedule also carries its
//! *intrinsic* rates: the density-independent law the schedule approaches
//! while the population is small relative to `kappa`.
//!
//! Built-in kinds:
//!
//! | kind | density dependence |
//! |------|--------------------|
//! | `density-independent` | none |
//! | `logistic-death` | death rate grows by `(n / kappa) * growth` |
//! | `gompertz-death` | death rate grows by `(ln n / ln kappa) * growth` |
//! | `logistic-reduced-birth-binary` | binary birth rate falls linearly in `n / kappa` |
//! | `exp-to-poly-binary` | binary birth rate `mu + kappa / (kappa + n^a) * (lambda - mu)` |
//! | `user-table` | explicit rows keyed by population-size ranges |
//!
//! Offspring support is finite (at most [`DEFAULT_MAX_OFFSPRING`] children
//! unless configured otherwise), so every schedule has a bounded second
//! moment by construction.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::scalar::Real;

/// Largest offspring count accepted unless a descriptor overrides it.
pub const DEFAULT_MAX_OFFSPRING: usize = 8;

#[derive(Debug, Error)]
pub enum RatesError {
    #[error("rate for {count} offspring is negative or not finite: {value}")]
    InvalidRate { count: usize, value: f64 },
    #[error("offspring count {count} exceeds the configured limit {limit}")]
    SupportTooLarge { count: usize, limit: usize },
    #[error("intrinsic rates are not supercritical (mean growth {0} <= 0)")]
    NotSupercritical(f64),
    #[error("unknown schedule kind `{0}`")]
    UnknownKind(String),
    #[error("schedule kind `{0}` requires rates supported on {{0, 2}}")]
    NotBinary(&'static str),
    #[error("invalid schedule parameter: {0}")]
    InvalidParameter(String),
    #[error("offspring key `{0}` is not a non-negative integer")]
    BadKey(String),
    #[error("population size must be >= 1 and kappa >= {min_kappa} (got n = {n}, kappa = {kappa})")]
    Domain { kappa: u64, n: u64, min_kappa: u64 },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Per-individual replacement rates indexed by offspring count.
#[derive(Clone, Debug)]
pub struct OffspringRates<T> {
    rates: Vec<T>,
}

impl<T: Real> OffspringRates<T> {
    /// Builds rates from `(offspring count, rate)` pairs, rejecting counts
    /// above [`DEFAULT_MAX_OFFSPRING`].
    pub fn new(pairs: impl IntoIterator<Item = (usize, T)>) -> Result<Self, RatesError> {
        Self::with_limit(pairs, DEFAULT_MAX_OFFSPRING)
    }

    pub fn with_limit(pairs: impl IntoIterator<Item = (usize, T)>, limit: usize) -> Result<Self, RatesError> {
        let mut rates = Vec::new();
        for (count, value) in pairs {
            if count > limit {
                return Err(RatesError::SupportTooLarge { count, limit });
            }
            if !(value >= T::zero()) || !value.is_finite() {
                return Err(RatesError::InvalidRate { count, value: value.as_f64() });
            }
            if rates.len() <= count {
                rates.resize(count + 1, T::zero());
            }
            rates[count] = rates[count] + value;
        }
        Ok(Self::trimmed(rates))
    }

    /// Wraps a dense vector. Entries must already be non-negative.
    pub(crate) fn from_dense(rates: Vec<T>) -> Self {
        debug_assert!(rates.iter().all(|r| *r >= T::zero()));
        Self::trimmed(rates)
    }

    fn trimmed(mut rates: Vec<T>) -> Self {
        while rates.last().is_some_and(|r| *r == T::zero()) {
            rates.pop();
        }
        Self { rates }
    }

    /// Rate of being replaced by `count` children (zero outside the support).
    #[inline]
    pub fn get(&self, count: usize) -> T {
        self.rates.get(count).copied().unwrap_or_else(T::zero)
    }

    /// Dense view; index is the offspring count.
    pub fn as_slice(&self) -> &[T] {
        &self.rates
    }

    /// Iterates over the non-zero entries.
    pub fn iter(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.rates.iter().copied().enumerate().filter(|(_, r)| *r != T::zero())
    }

    /// Largest offspring count with a non-zero rate, if any.
    pub fn max_offspring(&self) -> Option<usize> {
        self.rates.len().checked_sub(1)
    }

    pub fn total(&self) -> T {
        self.rates.iter().copied().sum()
    }

    /// Per-individual growth rate `sum (i - 1) * rates(i)`.
    pub fn mean_growth(&self) -> T {
        mean_growth_rate(self)
    }

    /// `sum i^2 * rates(i)`.
    pub fn second_moment(&self) -> T {
        self.rates
            .iter()
            .enumerate()
            .map(|(i, r)| T::count((i * i) as u64) * *r)
            .sum()
    }

    /// True when the only non-zero rates are for 0 and 2 offspring.
    pub fn is_binary(&self) -> bool {
        self.iter().all(|(i, _)| i == 0 || i == 2)
    }

    /// Map with decimal-string keys, the layout used in JSON descriptors.
    pub fn to_string_map(&self) -> BTreeMap<String, f64> {
        self.iter().map(|(i, r)| (i.to_string(), r.as_f64())).collect()
    }

    pub fn from_string_map(map: &BTreeMap<String, f64>, limit: usize) -> Result<Self, RatesError> {
        let mut pairs = Vec::with_capacity(map.len());
        for (key, value) in map {
            let count: usize = key.trim().parse().map_err(|_| RatesError::BadKey(key.clone()))?;
            pairs.push((count, T::of(*value)));
        }
        Self::with_limit(pairs, limit)
    }
}

impl<T: Real> PartialEq for OffspringRates<T> {
    fn eq(&self, other: &Self) -> bool {
        let len = self.rates.len().max(other.rates.len());
        (0..len).all(|i| self.get(i) == other.get(i))
    }
}

/// `sum_i (i - 1) * rates(i)`; negative for subcritical laws.
pub fn mean_growth_rate<T: Real>(rates: &OffspringRates<T>) -> T {
    rates
        .rates
        .iter()
        .enumerate()
        .map(|(i, r)| (T::count(i as u64) - T::one()) * *r)
        .sum()
}

/// One row of a user-supplied table: rates used while `n_min <= n <= n_max`.
#[derive(Clone, Debug)]
pub struct TableRow<T> {
    pub n_min: u64,
    pub n_max: Option<u64>,
    pub rates: OffspringRates<T>,
}

impl<T: Real> PartialEq for TableRow<T> {
    fn eq(&self, other: &Self) -> bool {
        self.n_min == other.n_min && self.n_max == other.n_max && self.rates == other.rates
    }
}

impl<T: Real> PartialEq for ScheduleKind<T> {
    fn eq(&self, other: &Self) -> bool {
        use ScheduleKind::*;
        match (self, other) {
            (ExpToPolyBinary { exponent: a }, ExpToPolyBinary { exponent: b }) => a == b,
            (UserTable { rows: a }, UserTable { rows: b }) => a == b,
            _ => std::mem::discriminant(self) == std::mem::discriminant(other),
        }
    }
}

impl<T: Real> PartialEq for RateSchedule<T> {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.intrinsic == other.intrinsic && self.max_offspring == other.max_offspring
    }
}

impl<T> TableRow<T> {
    fn covers(&self, n: u64) -> bool {
        n >= self.n_min && self.n_max.is_none_or(|hi| n <= hi)
    }
}

#[derive(Clone, Debug)]
pub enum ScheduleKind<T> {
    DensityIndependent,
    LogisticDeath,
    GompertzDeath,
    LogisticReducedBirthBinary,
    /// `exponent` is the `a` in `n^a`, within `[0, 1)`.
    ExpToPolyBinary { exponent: T },
    /// Rows are scanned in order; sizes no row covers use the intrinsic rates.
    UserTable { rows: Vec<TableRow<T>> },
}

impl<T> ScheduleKind<T> {
    pub fn name(&self) -> &'static str {
        match self {
            ScheduleKind::DensityIndependent => "density-independent",
            ScheduleKind::LogisticDeath => "logistic-death",
            ScheduleKind::GompertzDeath => "gompertz-death",
            ScheduleKind::LogisticReducedBirthBinary => "logistic-reduced-birth-binary",
            ScheduleKind::ExpToPolyBinary { .. } => "exp-to-poly-binary",
            ScheduleKind::UserTable { .. } => "user-table",
        }
    }
}

/// A density-dependent offspring-rate schedule. Immutable once built.
#[derive(Clone, Debug)]
pub struct RateSchedule<T> {
    kind: ScheduleKind<T>,
    intrinsic: OffspringRates<T>,
    max_offspring: usize,
}

impl<T: Real> RateSchedule<T> {
    pub fn new(kind: ScheduleKind<T>, intrinsic: OffspringRates<T>) -> Result<Self, RatesError> {
        Self::with_limit(kind, intrinsic, DEFAULT_MAX_OFFSPRING)
    }

    pub fn with_limit(kind: ScheduleKind<T>, intrinsic: OffspringRates<T>, max_offspring: usize) -> Result<Self, RatesError> {
        let growth = intrinsic.mean_growth();
        if !(growth > T::zero()) {
            return Err(RatesError::NotSupercritical(growth.as_f64()));
        }
        let mut widest = intrinsic.max_offspring().unwrap_or(0);
        match &kind {
            ScheduleKind::LogisticReducedBirthBinary if !intrinsic.is_binary() => {
                return Err(RatesError::NotBinary("logistic-reduced-birth-binary"));
            }
            ScheduleKind::ExpToPolyBinary { exponent } => {
                if !intrinsic.is_binary() {
                    return Err(RatesError::NotBinary("exp-to-poly-binary"));
                }
                if !(*exponent >= T::zero() && *exponent < T::one()) {
                    return Err(RatesError::InvalidParameter(format!(
                        "exp-to-poly exponent must lie in [0, 1), got {exponent}"
                    )));
                }
            }
            ScheduleKind::UserTable { rows } => {
                for row in rows {
                    if row.n_max.is_some_and(|hi| hi < row.n_min) {
                        return Err(RatesError::InvalidParameter(format!(
                            "table row has n_max < n_min ({:?} < {})",
                            row.n_max, row.n_min
                        )));
                    }
                    widest = widest.max(row.rates.max_offspring().unwrap_or(0));
                }
            }
            _ => {}
        }
        if widest > max_offspring {
            return Err(RatesError::SupportTooLarge { count: widest, limit: max_offspring });
        }
        Ok(Self { kind, intrinsic, max_offspring })
    }

    pub fn density_independent(intrinsic: OffspringRates<T>) -> Result<Self, RatesError> {
        Self::new(ScheduleKind::DensityIndependent, intrinsic)
    }

    pub fn logistic_death(intrinsic: OffspringRates<T>) -> Result<Self, RatesError> {
        Self::new(ScheduleKind::LogisticDeath, intrinsic)
    }

    pub fn gompertz_death(intrinsic: OffspringRates<T>) -> Result<Self, RatesError> {
        Self::new(ScheduleKind::GompertzDeath, intrinsic)
    }

    pub fn logistic_reduced_birth(intrinsic: OffspringRates<T>) -> Result<Self, RatesError> {
        Self::new(ScheduleKind::LogisticReducedBirthBinary, intrinsic)
    }

    pub fn exp_to_poly(intrinsic: OffspringRates<T>, exponent: T) -> Result<Self, RatesError> {
        Self::new(ScheduleKind::ExpToPolyBinary { exponent }, intrinsic)
    }

    pub fn user_table(intrinsic: OffspringRates<T>, rows: Vec<TableRow<T>>) -> Result<Self, RatesError> {
        Self::new(ScheduleKind::UserTable { rows }, intrinsic)
    }

    pub fn kind(&self) -> &ScheduleKind<T> {
        &self.kind
    }

    pub fn intrinsic(&self) -> &OffspringRates<T> {
        &self.intrinsic
    }

    pub fn max_offspring(&self) -> usize {
        self.max_offspring
    }

    /// Length of the dense buffer [`write_rates`](Self::write_rates) fills.
    pub fn support_len(&self) -> usize {
        let mut widest = self.intrinsic.as_slice().len();
        if let ScheduleKind::UserTable { rows } = &self.kind {
            for row in rows {
                widest = widest.max(row.rates.as_slice().len());
            }
        }
        widest.max(1)
    }

    /// Intrinsic growth rate, the exponential rate of the small-population regime.
    pub fn intrinsic_growth(&self) -> T {
        self.intrinsic.mean_growth()
    }

    fn min_kappa(&self) -> u64 {
        match self.kind {
            ScheduleKind::GompertzDeath => 2,
            _ => 1,
        }
    }

    fn check_domain(&self, kappa: u64, n: u64) -> Result<(), RatesError> {
        let min_kappa = self.min_kappa();
        if n == 0 || kappa < min_kappa {
            return Err(RatesError::Domain { kappa, n, min_kappa });
        }
        Ok(())
    }

    /// Rates at carrying capacity `kappa` and population size `n`.
    pub fn rates_at(&self, kappa: u64, n: u64) -> Result<OffspringRates<T>, RatesError> {
        let mut buf = vec![T::zero(); self.support_len()];
        self.write_rates(kappa, n, &mut buf)?;
        Ok(OffspringRates::from_dense(buf))
    }

    /// Allocation-free variant of [`rates_at`](Self::rates_at).
    ///
    /// `buf` must have length [`support_len`](Self::support_len); any
    /// negative intermediate value is clamped to zero.
    pub fn write_rates(&self, kappa: u64, n: u64, buf: &mut [T]) -> Result<(), RatesError> {
        self.check_domain(kappa, n)?;
        debug_assert_eq!(buf.len(), self.support_len());
        buf.fill(T::zero());
        let base = self.intrinsic.as_slice();
        buf[..base.len()].copy_from_slice(base);
        let growth = self.intrinsic_growth();
        let k = T::count(kappa);
        let size = T::count(n);
        match &self.kind {
            ScheduleKind::DensityIndependent => {}
            ScheduleKind::LogisticDeath => {
                buf[0] = buf[0] + size / k * growth;
            }
            ScheduleKind::GompertzDeath => {
                buf[0] = buf[0] + size.ln() / k.ln() * growth;
            }
            ScheduleKind::LogisticReducedBirthBinary => {
                let birth = self.intrinsic.get(2);
                let death = self.intrinsic.get(0);
                buf[2] = birth + size / k * (death - birth);
            }
            ScheduleKind::ExpToPolyBinary { exponent } => {
                let birth = self.intrinsic.get(2);
                let death = self.intrinsic.get(0);
                buf[2] = death + k / (k + size.powf(*exponent)) * (birth - death);
            }
            ScheduleKind::UserTable { rows } => {
                if let Some(row) = rows.iter().find(|row| row.covers(n)) {
                    buf.fill(T::zero());
                    let src = row.rates.as_slice();
                    buf[..src.len()].copy_from_slice(src);
                }
            }
        }
        for r in buf.iter_mut() {
            if !(*r >= T::zero()) {
                *r = T::zero();
            }
        }
        Ok(())
    }

    /// `sum_i |intrinsic(i) - rates_at(kappa, n)(i)|`, the per-individual
    /// rate at which a maximal coupling with the intrinsic process breaks.
    pub fn total_variation_gap(&self, kappa: u64, n: u64) -> Result<T, RatesError> {
        let at = self.rates_at(kappa, n)?;
        let len = self.support_len();
        Ok((0..len).map(|i| (self.intrinsic.get(i) - at.get(i)).abs()).sum())
    }

    /// Scans `n = 1..=n_max` for membership in the superlinear-growth set
    /// `{ n : growth(kappa, n) >= c * n^(-alpha) }`.
    pub fn check_superlinear(
        &self,
        kappa: u64,
        params: &SuperlinearParams<T>,
        n_max: u64,
    ) -> Result<SuperlinearReport, RatesError> {
        let mut buf = vec![T::zero(); self.support_len()];
        for n in 1..=n_max {
            if !self.is_superlinear_with(kappa, n, params, &mut buf)? {
                return Ok(SuperlinearReport { holds: false, first_violation: Some(n) });
            }
        }
        Ok(SuperlinearReport { holds: true, first_violation: None })
    }

    /// Single-size membership test used by [`check_superlinear`](Self::check_superlinear).
    pub fn is_superlinear(&self, kappa: u64, n: u64, params: &SuperlinearParams<T>) -> Result<bool, RatesError> {
        let mut buf = vec![T::zero(); self.support_len()];
        self.is_superlinear_with(kappa, n, params, &mut buf)
    }

    fn is_superlinear_with(
        &self,
        kappa: u64,
        n: u64,
        params: &SuperlinearParams<T>,
        buf: &mut [T],
    ) -> Result<bool, RatesError> {
        self.write_rates(kappa, n, buf)?;
        let growth: T = buf
            .iter()
            .enumerate()
            .map(|(i, r)| (T::count(i as u64) - T::one()) * *r)
            .sum();
        Ok(growth >= params.c * T::count(n).powf(-params.alpha))
    }

    pub fn to_descriptor(&self) -> ScheduleDescriptor {
        let mut params = serde_json::Map::new();
        match &self.kind {
            ScheduleKind::ExpToPolyBinary { exponent } => {
                params.insert("a".into(), Value::from(exponent.as_f64()));
            }
            ScheduleKind::UserTable { rows } => {
                let rows: Vec<Value> = rows
                    .iter()
                    .map(|row| {
                        serde_json::json!({
                            "n_min": row.n_min,
                            "n_max": row.n_max,
                            "rates": row.rates.to_string_map(),
                        })
                    })
                    .collect();
                params.insert("rows".into(), Value::Array(rows));
            }
            _ => {}
        }
        if self.max_offspring != DEFAULT_MAX_OFFSPRING {
            params.insert("max_offspring".into(), Value::from(self.max_offspring));
        }
        ScheduleDescriptor {
            kind: self.kind.name().to_string(),
            intrinsic: self.intrinsic.to_string_map(),
            params,
        }
    }

    pub fn from_descriptor(desc: &ScheduleDescriptor) -> Result<Self, RatesError> {
        let limit = match desc.params.get("max_offspring") {
            None => DEFAULT_MAX_OFFSPRING,
            Some(v) => v
                .as_u64()
                .ok_or_else(|| RatesError::InvalidParameter("max_offspring must be a non-negative integer".into()))?
                as usize,
        };
        let intrinsic = OffspringRates::from_string_map(&desc.intrinsic, limit)?;
        let kind = match desc.kind.as_str() {
            "density-independent" => ScheduleKind::DensityIndependent,
            "logistic-death" => ScheduleKind::LogisticDeath,
            "gompertz-death" => ScheduleKind::GompertzDeath,
            "logistic-reduced-birth-binary" => ScheduleKind::LogisticReducedBirthBinary,
            "exp-to-poly-binary" => {
                let a = desc
                    .params
                    .get("a")
                    .and_then(Value::as_f64)
                    .ok_or_else(|| RatesError::InvalidParameter("exp-to-poly-binary needs numeric param `a`".into()))?;
                ScheduleKind::ExpToPolyBinary { exponent: T::of(a) }
            }
            "user-table" => {
                let raw = desc
                    .params
                    .get("rows")
                    .cloned()
                    .ok_or_else(|| RatesError::InvalidParameter("user-table needs param `rows`".into()))?;
                let raw: Vec<RawRow> = serde_json::from_value(raw)?;
                let rows = raw
                    .into_iter()
                    .map(|row| {
                        Ok(TableRow {
                            n_min: row.n_min,
                            n_max: row.n_max,
                            rates: OffspringRates::from_string_map(&row.rates, limit)?,
                        })
                    })
                    .collect::<Result<Vec<_>, RatesError>>()?;
                ScheduleKind::UserTable { rows }
            }
            other => return Err(RatesError::UnknownKind(other.to_string())),
        };
        Self::with_limit(kind, intrinsic, limit)
    }

    pub fn from_json(text: &str) -> Result<Self, RatesError> {
        let desc: ScheduleDescriptor = serde_json::from_str(text)?;
        Self::from_descriptor(&desc)
    }
}

/// JSON form of a schedule:
/// `{"kind": "...", "intrinsic": {"0": 1.0, "2": 2.0}, "params": {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleDescriptor {
    pub kind: String,
    pub intrinsic: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "serde_json::Map::is_empty")]
    pub params: serde_json::Map<String, Value>,
}

#[derive(Deserialize)]
struct RawRow {
    #[serde(default = "one")]
    n_min: u64,
    #[serde(default)]
    n_max: Option<u64>,
    rates: BTreeMap<String, f64>,
}

fn one() -> u64 {
    1
}

/// Constants `c > 0` and `0 < alpha < 1` of the superlinear-growth bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuperlinearParams<T> {
    pub c: T,
    pub alpha: T,
}

impl<T: Real> SuperlinearParams<T> {
    pub fn new(c: T, alpha: T) -> Result<Self, RatesError> {
        if !(c > T::zero()) {
            return Err(RatesError::InvalidParameter(format!("c must be positive, got {c}")));
        }
        if !(alpha > T::zero() && alpha < T::one()) {
            return Err(RatesError::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        Ok(Self { c, alpha })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SuperlinearReport {
    pub holds: bool,
    pub first_violation: Option<u64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rates(pairs: &[(usize, f64)]) -> OffspringRates<f64> {
        OffspringRates::new(pairs.iter().copied()).unwrap()
    }

    fn bd() -> OffspringRates<f64> {
        rates(&[(0, 1.0), (2, 2.0)])
    }

    #[test]
    fn mean_growth_examples() {
        assert_eq!(mean_growth_rate(&rates(&[(0, 1.0), (2, 2.0)])), 1.0);
        assert_eq!(mean_growth_rate(&rates(&[(1, 5.0)])), 0.0);
        assert_eq!(mean_growth_rate(&rates(&[(0, 0.5), (2, 1.5)])), 1.0);
    }

    #[test]
    fn logistic_death_rates() {
        let s = RateSchedule::logistic_death(bd()).unwrap();
        let at = s.rates_at(100, 100).unwrap();
        assert_eq!(at, rates(&[(0, 2.0), (2, 2.0)]));
        assert_eq!(at.mean_growth(), 0.0);
        let at = s.rates_at(100, 50).unwrap();
        assert_eq!(at, rates(&[(0, 1.5), (2, 2.0)]));
        assert_eq!(at.mean_growth(), 0.5);
    }

    #[test]
    fn gompertz_death_rates() {
        let s = RateSchedule::gompertz_death(bd()).unwrap();
        let at = s.rates_at(10_000, 100).unwrap();
        assert!((at.get(0) - 1.5).abs() < 1e-12);
        assert_eq!(at.get(2), 2.0);
        assert!((at.mean_growth() - 0.5).abs() < 1e-12);
        assert!(matches!(s.rates_at(1, 1), Err(RatesError::Domain { .. })));
    }

    #[test]
    fn gaps() {
        let di = RateSchedule::density_independent(bd()).unwrap();
        assert_eq!(di.total_variation_gap(7, 123).unwrap(), 0.0);
        let lg = RateSchedule::logistic_death(bd()).unwrap();
        assert_eq!(lg.total_variation_gap(100, 50).unwrap(), 0.5);
        let gz = RateSchedule::gompertz_death(bd()).unwrap();
        assert!((gz.total_variation_gap(10_000, 100).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn reduced_birth_clamps() {
        let s = RateSchedule::logistic_reduced_birth(rates(&[(0, 1.0), (2, 3.0)])).unwrap();
        // Birth reaches zero at n = kappa * 3 / 2.
        let at = s.rates_at(100, 100).unwrap();
        assert_eq!(at.get(2), 1.0);
        let at = s.rates_at(100, 400).unwrap();
        assert_eq!(at.get(2), 0.0);
        assert_eq!(at.get(0), 1.0);
    }

    #[test]
    fn exp_to_poly_limits() {
        let s = RateSchedule::exp_to_poly(rates(&[(0, 1.0), (2, 3.0)]), 0.5).unwrap();
        let at = s.rates_at(100, 10_000).unwrap();
        // kappa / (kappa + 100) = 1/2
        assert!((at.get(2) - 2.0).abs() < 1e-12);
        assert!(RateSchedule::exp_to_poly(rates(&[(0, 1.0), (2, 3.0)]), 1.0).is_err());
        assert!(matches!(
            RateSchedule::exp_to_poly(rates(&[(0, 1.0), (3, 3.0)]), 0.5),
            Err(RatesError::NotBinary(_))
        ));
    }

    #[test]
    fn superlinear_examples() {
        let yule_like = RateSchedule::density_independent(bd()).unwrap();
        let p = SuperlinearParams::new(1.0, 0.5).unwrap();
        let rep = yule_like.check_superlinear(1, &p, 1_000_000).unwrap();
        assert!(rep.holds);

        let lg = RateSchedule::logistic_death(bd()).unwrap();
        let p = SuperlinearParams::new(0.5, 0.5).unwrap();
        assert!(lg.check_superlinear(1000, &p, 500).unwrap().holds);

        let critical = RateSchedule::user_table(
            bd(),
            vec![TableRow { n_min: 1, n_max: None, rates: rates(&[(0, 1.0), (2, 1.0)]) }],
        )
        .unwrap();
        for (c, alpha) in [(1.0, 0.5), (0.01, 0.9)] {
            let rep = critical
                .check_superlinear(10, &SuperlinearParams::new(c, alpha).unwrap(), 50)
                .unwrap();
            assert_eq!(rep, SuperlinearReport { holds: false, first_violation: Some(1) });
        }
    }

    #[test]
    fn validation() {
        assert!(matches!(
            RateSchedule::density_independent(rates(&[(0, 1.0), (2, 1.0)])),
            Err(RatesError::NotSupercritical(_))
        ));
        assert!(matches!(
            OffspringRates::<f64>::new([(9, 1.0)]),
            Err(RatesError::SupportTooLarge { count: 9, limit: 8 })
        ));
        assert!(OffspringRates::<f64>::new([(0, -1.0)]).is_err());
        assert!(OffspringRates::<f64>::new([(0, f64::NAN)]).is_err());
        let s = RateSchedule::logistic_death(bd()).unwrap();
        assert!(s.rates_at(10, 0).is_err());
        assert!(s.rates_at(0, 1).is_err());
        assert!(SuperlinearParams::new(1.0, 1.0).is_err());
        assert!(SuperlinearParams::new(0.0, 0.5).is_err());
    }

    #[test]
    fn descriptor_round_trip() {
        let json = r#"{"kind": "user-table", "intrinsic": {"0": 1.0, "2": 2.0},
            "params": {"rows": [{"n_min": 5, "n_max": 9, "rates": {"1": 3.0}}]}}"#;
        let s = RateSchedule::<f64>::from_json(json).unwrap();
        assert_eq!(s.rates_at(10, 6).unwrap(), rates(&[(1, 3.0)]));
        assert_eq!(s.rates_at(10, 4).unwrap(), bd());
        let again = RateSchedule::from_descriptor(&s.to_descriptor()).unwrap();
        assert_eq!(s, again);

        let exp = RateSchedule::<f64>::from_json(r#"{"kind":"exp-to-poly-binary","intrinsic":{"0":1,"2":3},"params":{"a":0.25}}"#)
            .unwrap();
        assert_eq!(exp.kind(), &ScheduleKind::ExpToPolyBinary { exponent: 0.25 });

        assert!(matches!(
            RateSchedule::<f64>::from_json(r#"{"kind":"voter","intrinsic":{"2":1}}"#),
            Err(RatesError::UnknownKind(_))
        ));
        assert!(matches!(
            RateSchedule::<f64>::from_json(r#"{"kind":"logistic-death","intrinsic":{"two":1}}"#),
            Err(RatesError::BadKey(_))
        ));
    }

    #[test]
    fn works_in_single_precision() {
        let s = RateSchedule::<f32>::logistic_death(OffspringRates::new([(0, 1.0f32), (2, 2.0)]).unwrap()).unwrap();
        assert_eq!(s.rates_at(100, 50).unwrap().mean_growth(), 0.5f32);
    }
}
