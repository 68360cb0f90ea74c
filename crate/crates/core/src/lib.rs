//! Proper two-sided exits of Lévy processes: exact classification of when
//! both exit-time laws `λ⁺_{a,b}` and `λ⁻_{a,b}` charge a time window, and a
//! Monte Carlo harness that checks those verdicts against simulated exits.
//!
//! * [`model`]: Lévy triplets over a catalog of parametric jump measures.
//! * [`classifier`]: the exit predicates and the window decision procedure.
//! * [`sampler`]: first-exit simulation (event-driven exact, or gridded).
//! * [`estimator`]: campaign aggregation, Wilson intervals, cross-checks.
//! * [`scenario`], [`catalog`], [`report`]: file formats and built-in witnesses.

pub mod catalog;
pub mod classifier;
pub mod defaults;
pub mod estimator;
pub mod model;
mod quad;
pub mod report;
pub mod rng;
pub mod sampler;
pub mod scenario;
pub mod window;

pub use classifier::{decide, Monotonicity, PredicateVector, RuleTag, Verdict, VerdictValue};
pub use estimator::{cross_check, estimate, CheckCase, CrossCheckReport, Execution, ExitEstimate};
pub use model::{Drift, LevyModel, MeasureSpec, PowerSide, Side};
pub use sampler::{plan, simulate_exit, ExitRecord, Outcome, PlanHints, Scheme, SimPlan};
pub use window::ExitQuery;
