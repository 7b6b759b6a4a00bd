//! Empirical incentive-compatibility and individual-rationality checks.
//!
//! Every check scans a grid of misreports that always contains the truthful
//! report, computing expected utilities exactly from the reported
//! distributions. A clean scan means no profitable deviation was found on
//! the grid; it is not a proof.

mod demos;
mod general_scan;
mod sampler;
mod single_scan;

use serde::{Deserialize, Serialize};

use crate::general::Report;

pub use demos::{
    concave_general_fixture, concave_single_slot_fixture, demo_concave_general, demo_concave_single_slot,
    demo_no_approximation, product_form_instance, NegativeDemo, ThresholdWitness, WitnessRun,
};
pub use general_scan::{
    check_ic_general, check_ic_general_with, check_ic_reports, check_ir_general, network_edge_scan, GeneralGrid,
};
pub use sampler::{
    fingerprint, sample_instances, GeneralSampler, InstanceSampler, NetworkSampler, PrincipalAgentSampler, WelfareMode,
};
pub use single_scan::{check_ic_single_slot, check_ir_single_slot, deviation_grid};

/// A deviation gap above this refutes incentive compatibility.
pub const IC_TOLERANCE: f64 = 1e-9;
/// Truthful utilities below minus this refute individual rationality.
pub const IR_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "IC_holds (grid)")]
    IcHolds,
    #[serde(rename = "IC_violated")]
    IcViolated,
}

impl Verdict {
    pub fn from_gap(gap: f64) -> Self {
        if gap > IC_TOLERANCE {
            Verdict::IcViolated
        } else {
            Verdict::IcHolds
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::IcHolds => "IC_holds (grid)",
            Verdict::IcViolated => "IC_violated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridShape {
    /// Value candidates per outcome (per bid, in the single-slot auction).
    pub value_points: usize,
    /// Prediction candidates per outcome.
    pub prediction_points: usize,
    /// Reports evaluated in total.
    pub profiles: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub bidder: usize,
    pub truthful_utility: f64,
    pub best_deviation_utility: f64,
    /// The best misreport found. In the single-slot auction this is one value
    /// and one `[1 - q, q]` prediction.
    pub best_deviation: Report,
    pub gap: f64,
    pub grid: GridShape,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrReport {
    pub bidder: usize,
    pub truthful_utility: f64,
    pub rational: bool,
}

impl IrReport {
    fn new(bidder: usize, truthful_utility: f64) -> Self {
        Self {
            bidder,
            truthful_utility,
            rational: truthful_utility >= -IR_TOLERANCE,
        }
    }
}

/// Tracks the best candidate, keeping the earliest on ties.
struct Best {
    utility: f64,
    report: Option<Report>,
}

impl Best {
    fn new() -> Self {
        Self {
            utility: f64::NEG_INFINITY,
            report: None,
        }
    }

    fn offer(&mut self, utility: f64, report: impl FnOnce() -> Report) {
        if utility > self.utility {
            self.utility = utility;
            self.report = Some(report());
        }
    }
}

fn finish(bidder: usize, truthful: f64, best: Best, grid: GridShape) -> DeviationReport {
    let gap = best.utility - truthful;
    DeviationReport {
        bidder,
        truthful_utility: truthful,
        best_deviation_utility: best.utility,
        best_deviation: best.report.expect("grid contains the truthful report"),
        gap,
        grid,
        verdict: Verdict::from_gap(gap),
    }
}
