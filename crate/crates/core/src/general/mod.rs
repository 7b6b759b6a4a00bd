//! The general framework: finite outcomes, per-bidder state sets and
//! predictions, and component-wise convex consumer welfare.

mod instance;
mod mechanism;
pub mod welfare;

pub use instance::{GeneralInstance, Report};
pub use mechanism::{
    argmax_outcome, bidder_expected_utility, bidder_expected_utility_with, component_slice, counterfactual_objective,
    objective, objective_without, objectives, run_general, run_general_with, select_outcome, utility_from_result,
    GeneralResult, MechanismOptions, FD_STEP,
};
pub use welfare::{CustomWelfare, Factor, OutcomeWelfare, WelfareTerm};
