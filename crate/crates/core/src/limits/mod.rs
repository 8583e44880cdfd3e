//! The limiting coalescent-tree law of a supercritical binary birth–death
//! process: closed forms for the generating function of `N(t)` and the
//! Laplace transform of `W`, the joint partition law, the survival function
//! of the coalescence times, and a direct sampler.

mod bd;
mod ctd;
mod ctimes;
mod quadrature;
mod tree;

use thiserror::Error;

use crate::rates::{OffspringRates, RatesError};
use crate::scalar::Real;

pub use bd::{bd_laplace_w, bd_pgf, MAX_DERIVATIVE_ORDER};
pub use ctd::{ctd_joint_prob, ctd_joint_prob_with, ctd_single_time};
pub use ctimes::{ctimes_survival, pairwise_cdf, TIE_EPSILON, TIE_THRESHOLD};
pub use quadrature::{integrate_adaptive, QuadratureResult};
pub use tree::{sample_limit_tree, sample_limit_tree_with, LimitTree};

#[derive(Debug, Error)]
pub enum LimitsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("derivative order {order} exceeds the supported maximum {max}")]
    UnsupportedOrder { order: usize, max: usize },
    #[error("invalid partition chain: {0}")]
    InvalidChain(String),
    #[error("quadrature did not converge: estimate {estimate}, error {error:e} after {intervals} subintervals")]
    Quadrature { estimate: f64, error: f64, intervals: usize },
}

/// Binary birth–death intrinsic rates: split in two at rate `birth`, die at
/// rate `death`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BinaryBDParams<T> {
    pub birth: T,
    pub death: T,
}

impl<T: Real> BinaryBDParams<T> {
    /// Requires `birth > death >= 0`.
    pub fn new(birth: T, death: T) -> Result<Self, LimitsError> {
        if !(birth.is_finite() && death.is_finite() && death >= T::zero() && birth > death) {
            return Err(LimitsError::Domain(format!(
                "need birth > death >= 0 (got birth {birth}, death {death})"
            )));
        }
        Ok(Self { birth, death })
    }

    /// Pure birth at rate `birth`.
    pub fn yule(birth: T) -> Result<Self, LimitsError> {
        Self::new(birth, T::zero())
    }

    /// Reads `{0: death, 2: birth}`; any other offspring count is an error.
    pub fn from_rates(rates: &OffspringRates<T>) -> Result<Self, LimitsError> {
        if !rates.is_binary() {
            return Err(LimitsError::Domain(RatesError::NotBinary("binary birth–death limit").to_string()));
        }
        Self::new(rates.get(2), rates.get(0))
    }

    /// Malthusian parameter `birth - death`.
    pub fn growth(&self) -> T {
        self.birth - self.death
    }

    /// Extinction probability `death / birth`, which is also `ψ(∞)`.
    pub fn extinction_probability(&self) -> T {
        self.death / self.birth
    }
}
