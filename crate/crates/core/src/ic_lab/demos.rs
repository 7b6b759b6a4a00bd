//! Worked demonstrations: the threshold welfare's value blind spot, and
//! profitable misreports once the welfare function stops being convex.

use serde::Serialize;

use super::general_scan::check_ic_general_with;
use super::single_scan::check_ic_single_slot;
use super::{DeviationReport, GeneralGrid};
use crate::error::Result;
use crate::general::{GeneralInstance, MechanismOptions, OutcomeWelfare, Report, WelfareTerm};
use crate::single_slot::{run_auction, SingleSlotBid};
use crate::welfare_catalog::{concave_counterexample_g, threshold_g};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessRun {
    pub challenger: SingleSlotBid,
    pub adjusted_values: Vec<f64>,
    pub winner: usize,
    pub winner_quality: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdWitness {
    pub alpha: f64,
    pub beta: f64,
    pub v_max: f64,
    /// `(1 - alpha) / (beta - alpha) * v_max`: the adjusted bid of a perfect
    /// quality bidder with value zero.
    pub quoted_bound: f64,
    /// A quality-`beta` challenger loses to the perfect bidder exactly when
    /// its value is below `quoted_bound - v_max`.
    pub critical_value: f64,
    pub perfect_bidder: SingleSlotBid,
    pub runs: Vec<WitnessRun>,
    /// Every run picked a winner with quality at least `alpha`.
    pub quality_guarantee_holds: bool,
}

/// Pits a value-zero, quality-one bidder against quality-`beta` challengers
/// just below and above the critical value, and above the quoted bound.
pub fn demo_no_approximation(alpha: f64, beta: f64, v_max: f64) -> Result<ThresholdWitness> {
    let g = threshold_g(alpha, beta, v_max)?;
    let quoted_bound = (1.0 - alpha) / (beta - alpha) * v_max;
    let critical_value = quoted_bound - g.eval(beta);
    let perfect = SingleSlotBid {
        value: 0.0,
        quality: 1.0,
    };
    let step = 0.01;
    let mut runs = Vec::new();
    for value in [critical_value - step, critical_value + step, quoted_bound + step] {
        let challenger = SingleSlotBid { value, quality: beta };
        let bids = [perfect, challenger];
        let result = run_auction(&bids, &g)?;
        runs.push(WitnessRun {
            challenger,
            winner_quality: bids[result.winner].quality,
            adjusted_values: result.adjusted_values,
            winner: result.winner,
        });
    }
    let quality_guarantee_holds = runs.iter().all(|r| r.winner_quality >= alpha);
    Ok(ThresholdWitness {
        alpha,
        beta,
        v_max,
        quoted_bound,
        critical_value,
        perfect_bidder: perfect,
        runs,
        quality_guarantee_holds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NegativeDemo {
    pub name: String,
    pub welfare: String,
    pub reports: Vec<DeviationReport>,
    pub max_gap: f64,
}

impl NegativeDemo {
    fn new(name: &str, welfare: &str, reports: Vec<DeviationReport>) -> Self {
        let max_gap = reports.iter().map(|r| r.gap).fold(f64::NEG_INFINITY, f64::max);
        Self {
            name: name.into(),
            welfare: welfare.into(),
            reports,
            max_gap,
        }
    }
}

/// Two bidders of quality one half. With `g(p) = -(p - 1/2)^2` the winner
/// gains 0.25 by reporting quality 0 or 1.
pub fn concave_single_slot_fixture() -> Vec<SingleSlotBid> {
    vec![
        SingleSlotBid {
            value: 1.0,
            quality: 0.5,
        },
        SingleSlotBid {
            value: 0.5,
            quality: 0.5,
        },
    ]
}

pub fn demo_concave_single_slot(grid_resolution: usize) -> Result<NegativeDemo> {
    let g = concave_counterexample_g();
    let reports = check_ic_single_slot(&concave_single_slot_fixture(), &g, grid_resolution)?;
    Ok(NegativeDemo::new("concave_single_slot", g.name(), reports))
}

/// Bidder 0 is predicted at outcome `A`, where the welfare
/// `-4 (p_0[yes] - 1/2)^2` is concave in its prediction; bidder 1 prefers `B`.
pub fn concave_general_fixture() -> GeneralInstance {
    let s = |xs: &[&str]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    GeneralInstance::new(
        s(&["A", "B"]),
        vec![vec![s(&["no", "yes"]), s(&["idle"])], vec![s(&["idle"]), s(&["idle"])]],
        vec![
            Report::new(vec![1.0, 0.0], vec![vec![0.5, 0.5], vec![1.0]]),
            Report::new(vec![0.0, 0.5], vec![vec![1.0], vec![1.0]]),
        ],
        vec![
            OutcomeWelfare::Terms(vec![WelfareTerm::Quadratic {
                bidder: 0,
                state: 1,
                weight: -4.0,
                center: 0.5,
            }]),
            OutcomeWelfare::zero(),
        ],
    )
    .expect("fixture is well formed")
}

pub fn demo_concave_general(grid: GeneralGrid) -> Result<NegativeDemo> {
    let options = MechanismOptions {
        require_component_convexity: false,
    };
    let reports = check_ic_general_with(&concave_general_fixture(), grid, options)?;
    Ok(NegativeDemo::new(
        "concave_general",
        "-4 (p[yes] - 1/2)^2 at outcome A",
        reports,
    ))
}

/// `(p_0[1] - 1/2)(p_1[1] - 1/2)` at outcome `A`, nothing at `B`.
pub fn product_form_instance(values: [[f64; 2]; 2], predictions: [f64; 2]) -> Result<GeneralInstance> {
    let s = |xs: &[&str]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    GeneralInstance::new(
        s(&["A", "B"]),
        vec![vec![s(&["no", "yes"]), s(&["idle"])]; 2],
        (0..2)
            .map(|i| {
                Report::new(
                    values[i].to_vec(),
                    vec![crate::simplex::binary(predictions[i]), vec![1.0]],
                )
            })
            .collect(),
        vec![crate::welfare_catalog::product_form_g(), OutcomeWelfare::zero()],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ic_lab::Verdict;

    #[test]
    fn threshold_witness_example() {
        let w = demo_no_approximation(0.2, 0.6, 10.0).unwrap();
        assert!((w.quoted_bound - 20.0).abs() < 1e-12);
        assert!((w.critical_value - 10.0).abs() < 1e-12);
        let below = &w.runs[0];
        assert!((below.challenger.value - 9.99).abs() < 1e-12);
        assert!((below.adjusted_values[0] - 20.0).abs() < 1e-12);
        assert!((below.adjusted_values[1] - 19.99).abs() < 1e-12);
        assert_eq!(below.winner, 0);
        assert_eq!(w.runs[1].winner, 1);
        assert_eq!(w.runs[2].winner, 1);
        assert!(w.quality_guarantee_holds);
    }

    #[test]
    fn perfect_quality_threshold_has_no_gap() {
        let w = demo_no_approximation(0.3, 1.0, 10.0).unwrap();
        assert!((w.quoted_bound - 10.0).abs() < 1e-12);
        assert!(w.critical_value.abs() < 1e-12);
    }

    #[test]
    fn concave_single_slot_gap() {
        let demo = demo_concave_single_slot(101).unwrap();
        let winner = &demo.reports[0];
        assert_eq!(winner.verdict, Verdict::IcViolated);
        assert!((winner.gap - 0.25).abs() < 1e-12);
        // Smallest grid index wins ties: the lowest winning value with quality 0.
        assert_eq!(winner.best_deviation.predictions[0], vec![1.0, 0.0]);
    }

    #[test]
    fn concave_general_gap() {
        let demo = demo_concave_general(GeneralGrid::default()).unwrap();
        assert_eq!(demo.reports[0].verdict, Verdict::IcViolated);
        assert!((demo.reports[0].gap - 1.0).abs() < 1e-12);
        assert_eq!(demo.reports[1].verdict, Verdict::IcHolds);
    }
}
