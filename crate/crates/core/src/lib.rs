//! Quota-constrained dynamic rationing of a scarce resource.
//!
//! Agents with priorities and day-by-day availability are matched to
//! categories under daily quotas, overall quotas and daily supply. The crate
//! provides an exact offline optimum (min-cost flow), the greedy online
//! algorithm, and tools for checking its guarantees.
//!
//! ```
//! use rationd::fixtures::tight_model1;
//! use rationd::online::{run_online, TieBreak};
//! use rationd::{offline, total_utility, Rational};
//!
//! let r = |s: &str| rationd::scalar::parse_rational(s).unwrap();
//! let inst = tight_model1(r("0.5"), r("0.95"));
//! let online = run_online(&inst, false, &TieBreak::Adversarial).unwrap();
//! let best = offline::solve_offline_model1(&inst).unwrap();
//! let ratio: Rational = total_utility(&inst, &best) / total_utility(&inst, &online);
//! assert_eq!(ratio, r("1.95"));
//! ```

pub mod analysis;
pub mod data;
pub mod fixtures;
pub mod flow;
pub mod model;
pub mod offline;
pub mod online;
pub mod scalar;

pub use model::{
    check_allocation, total_utility, validate_instance, Agent, AgentId, Allocation, Assignment, Category, CategoryId,
    Instance, ValidationReport, Violation,
};
pub use scalar::{Rational, Scalar};

pub type ExactInstance = Instance<Rational>;
pub type FloatInstance = Instance<f64>;
pub type Float32Instance = Instance<f32>;
pub type ExactDayGraph = online::DayGraph<Rational>;
pub type FloatDayGraph = online::DayGraph<f64>;
pub type ExactTrace = online::OnlineTrace<Rational>;
