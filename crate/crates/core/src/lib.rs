//! Density-dependent branching processes with exact Ulam–Harris genealogies,
//! coalescent-tree extraction, and the limiting tree law.
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the bottom of this file fix it to `f64`. Interval endpoints and
//! population counts are kept exact in integers and rationals.
//!
//! ```
//! use coaltree::{coalescent, rates::OffspringRates, simulator, RateScheduleF64, StoppingRuleF64};
//!
//! let yule = OffspringRates::new([(2, 1.0)]).unwrap();
//! let schedule = RateScheduleF64::logistic_death(yule).unwrap();
//! let run = simulator::simulate(&schedule, 1000, StoppingRuleF64::Size(0.05), 7).unwrap();
//! let sample = coalescent::sample_without_replacement(&run.log, run.stop_time, 3, 1).unwrap();
//! let tau = coalescent::coalescence_matrix(&run.log, &sample).unwrap();
//! assert!(tau.check_ultrametric().is_ok());
//! ```

// `!(x > 0)` style guards deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coalescent;
pub mod genealogy;
pub mod harness;
pub mod limits;
pub mod rates;
pub mod scalar;
pub mod simulator;

pub use scalar::Real;

pub type OffspringRatesF64 = rates::OffspringRates<f64>;
pub type RateScheduleF64 = rates::RateSchedule<f64>;
pub type SuperlinearParamsF64 = rates::SuperlinearParams<f64>;
pub type EventLogF64 = genealogy::EventLog<f64>;
pub type TreeNodeF64 = genealogy::TreeNode<f64>;
pub type StoppingRuleF64 = simulator::StoppingRule<f64>;
pub type SimulationRunF64 = simulator::SimulationRun<f64>;
pub type CoupledRunF64 = simulator::CoupledRun<f64>;
pub type SampleSetF64 = coalescent::SampleSet<f64>;
pub type CoalescenceMatrixF64 = coalescent::CoalescenceMatrix<f64>;
pub type PartitionProcessF64 = coalescent::PartitionProcess<f64>;
pub type BinaryBDParamsF64 = limits::BinaryBDParams<f64>;
pub type LimitTreeF64 = limits::LimitTree<f64>;
