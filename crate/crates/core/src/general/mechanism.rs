//! VCG with scoring-rule transfers over a finite outcome space.
//!
//! Bidder `i` pays, when state `w` of `Omega_{i,o*}` occurs,
//! `W_{-i} - sum_{j != i} v_j(o*) - S(p_i(o*), w)`, where `S` is the
//! tangent-plane rule of the welfare slice at `o*` with everyone else's
//! predictions held fixed.

use serde::Serialize;

use super::instance::{GeneralInstance, Report};
use super::welfare::{OutcomeWelfare, SliceCurvature};
use crate::error::{Error, Result};
use crate::scoring::{make_simplex_rule, SimplexConvexFn};

/// Central finite-difference step for slices without an analytic gradient.
pub const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MechanismOptions {
    /// Reject welfare slices that are not convex. Turning this off is only
    /// useful for demonstrating what goes wrong without convexity.
    pub require_component_convexity: bool,
}

impl Default for MechanismOptions {
    fn default() -> Self {
        Self {
            require_component_convexity: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralResult {
    pub chosen_outcome: usize,
    pub chosen_id: String,
    /// `W^{o*}`.
    pub objective_value: f64,
    /// `W^o` for every outcome, in instance order.
    pub objectives: Vec<f64>,
    /// `W_{-i}` for every bidder.
    pub counterfactuals: Vec<f64>,
    /// `transfers[i][w]`: what bidder `i` pays when state `w` of
    /// `Omega_{i,o*}` is realized.
    pub transfers: Vec<Vec<f64>>,
    pub state_labels: Vec<Vec<String>>,
}

impl GeneralResult {
    /// Payments owed once every bidder's state has been observed.
    pub fn settle(&self, realized: &[usize]) -> Result<Vec<f64>> {
        if realized.len() != self.transfers.len() {
            return Err(Error::DimensionMismatch {
                field: "realized_states".into(),
                expected: self.transfers.len(),
                got: realized.len(),
            });
        }
        realized
            .iter()
            .enumerate()
            .map(|(bidder, &state)| {
                self.transfers[bidder]
                    .get(state)
                    .copied()
                    .ok_or_else(|| Error::UnknownState {
                        bidder,
                        outcome: self.chosen_id.clone(),
                        state,
                    })
            })
            .collect()
    }

    /// Expected payment of `bidder` when its state is drawn from `belief`.
    pub fn expected_transfer(&self, bidder: usize, belief: &[f64]) -> f64 {
        self.transfers[bidder].iter().zip(belief).map(|(t, p)| t * p).sum()
    }
}

/// `W^o = sum_i v_i(o) + g_o(p(o))`.
pub fn objective(instance: &GeneralInstance, outcome: usize) -> f64 {
    let values: f64 = instance.reports().iter().map(|r| r.values[outcome]).sum();
    values + instance.welfare(outcome).eval(&instance.predictions_at(outcome))
}

pub fn objectives(instance: &GeneralInstance) -> Vec<f64> {
    (0..instance.outcome_count()).map(|o| objective(instance, o)).collect()
}

/// Objective of `outcome` with `excluded` removed: its value counts as zero
/// and its prediction is replaced by its baseline.
pub fn objective_without(instance: &GeneralInstance, outcome: usize, excluded: usize) -> f64 {
    let values: f64 = instance
        .reports()
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != excluded)
        .map(|(_, r)| r.values[outcome])
        .sum();
    let mut predictions = instance.predictions_at(outcome);
    predictions[excluded] = instance.baseline(excluded, outcome);
    values + instance.welfare(outcome).eval(&predictions)
}

/// `W_{-i}`: best objective over all outcomes without bidder `excluded`.
pub fn counterfactual_objective(instance: &GeneralInstance, excluded: usize) -> f64 {
    (0..instance.outcome_count())
        .map(|o| objective_without(instance, o, excluded))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Index of the best objective; ties go to the lexicographically smallest id.
pub fn argmax_outcome(ids: &[String], objectives: &[f64]) -> Result<usize> {
    let mut best: Option<usize> = None;
    for (o, &w) in objectives.iter().enumerate() {
        best = match best {
            None => Some(o),
            Some(b) if w > objectives[b] || (w == objectives[b] && ids[o] < ids[b]) => Some(o),
            keep => keep,
        };
    }
    best.ok_or(Error::EmptyOutcomes)
}

pub fn select_outcome(instance: &GeneralInstance) -> Result<usize> {
    argmax_outcome(instance.outcomes(), &objectives(instance))
}

/// `q -> g_o(q, p_{-i})` as a function on bidder `bidder`'s simplex.
///
/// The slice is certified convex either from the welfare's term structure or
/// by the simplex subgradient grid test; otherwise it is rejected.
pub fn component_slice(
    welfare: &OutcomeWelfare,
    predictions: &[&[f64]],
    bidder: usize,
    outcome_id: &str,
) -> Result<SimplexConvexFn> {
    let slice = slice_unchecked(welfare, predictions, bidder, outcome_id)?;
    let reject = |detail: String| Error::NotComponentWiseConvex {
        outcome: outcome_id.to_string(),
        bidder,
        detail,
    };
    match welfare.slice_curvature(bidder) {
        SliceCurvature::Structural => Ok(slice),
        SliceCurvature::Refuted(why) => Err(reject(why)),
        SliceCurvature::Unknown => match slice.check_subgradients(crate::scoring::SIMPLEX_CHECK_BUDGET) {
            Ok(()) => Ok(slice),
            Err(Error::NotConvex { p, q, violation, .. }) => Err(reject(format!(
                "subgradient inequality fails at p={p:?}, q={q:?} by {violation:e}"
            ))),
            Err(e) => Err(e),
        },
    }
}

fn slice_unchecked(
    welfare: &OutcomeWelfare,
    predictions: &[&[f64]],
    bidder: usize,
    outcome_id: &str,
) -> Result<SimplexConvexFn> {
    let fixed: Vec<Vec<f64>> = predictions.iter().map(|p| p.to_vec()).collect();
    let n = fixed
        .get(bidder)
        .map(Vec::len)
        .ok_or_else(|| Error::InvalidInstance(format!("no bidder {bidder}")))?;
    let with = move |fixed: &[Vec<f64>], q: &[f64], w: &OutcomeWelfare| {
        let mut refs: Vec<&[f64]> = fixed.iter().map(Vec::as_slice).collect();
        refs[bidder] = q;
        w.eval(&refs)
    };
    let eval_welfare = welfare.clone();
    let eval_fixed = fixed.clone();
    let eval = move |q: &[f64]| with(&eval_fixed, q, &eval_welfare);

    let grad_welfare = welfare.clone();
    let analytic = matches!(welfare, OutcomeWelfare::Terms(_))
        || matches!(welfare, OutcomeWelfare::Custom(c) if c.gradient.is_some());
    let subgrad = move |q: &[f64]| {
        let mut refs: Vec<&[f64]> = fixed.iter().map(Vec::as_slice).collect();
        refs[bidder] = q;
        let refs = refs;
        if analytic {
            if let Some(g) = grad_welfare.gradient(&refs, bidder) {
                return g;
            }
        }
        (0..q.len())
            .map(|k| {
                let mut up = q.to_vec();
                let mut dn = q.to_vec();
                up[k] += FD_STEP;
                dn[k] -= FD_STEP;
                let mut at = refs.clone();
                at[bidder] = &up;
                let fu = grad_welfare.eval(&at);
                at[bidder] = &dn;
                let fd = grad_welfare.eval(&at);
                (fu - fd) / (2.0 * FD_STEP)
            })
            .collect()
    };
    SimplexConvexFn::unverified(format!("g[{outcome_id}] slice for bidder {bidder}"), n, eval, subgrad)
}

pub fn run_general(instance: &GeneralInstance) -> Result<GeneralResult> {
    run_general_with(instance, MechanismOptions::default())
}

pub fn run_general_with(instance: &GeneralInstance, options: MechanismOptions) -> Result<GeneralResult> {
    let objectives = objectives(instance);
    let chosen = argmax_outcome(instance.outcomes(), &objectives)?;
    let chosen_id = instance.outcomes()[chosen].clone();
    let predictions = instance.predictions_at(chosen);
    let welfare = instance.welfare(chosen);
    let total_value: f64 = instance.reports().iter().map(|r| r.values[chosen]).sum();

    let mut counterfactuals = Vec::with_capacity(instance.bidder_count());
    let mut transfers = Vec::with_capacity(instance.bidder_count());
    for (i, report) in instance.reports().iter().enumerate() {
        let w_minus_i = counterfactual_objective(instance, i);
        let others_value = total_value - report.values[chosen];
        let slice = if options.require_component_convexity {
            component_slice(welfare, &predictions, i, &chosen_id)?
        } else {
            slice_unchecked(welfare, &predictions, i, &chosen_id)?
        };
        let scores = make_simplex_rule(&slice).score_all(&report.predictions[chosen]);
        transfers.push(scores.iter().map(|s| w_minus_i - others_value - s).collect());
        counterfactuals.push(w_minus_i);
    }

    let state_labels = (0..instance.bidder_count())
        .map(|i| instance.states(i, chosen).to_vec())
        .collect();
    Ok(GeneralResult {
        chosen_outcome: chosen,
        chosen_id,
        objective_value: objectives[chosen],
        objectives,
        counterfactuals,
        transfers,
        state_labels,
    })
}

/// Expected utility of a bidder whose true type is `truth`, given the
/// mechanism's result.
pub fn utility_from_result(result: &GeneralResult, bidder: usize, truth: &Report) -> f64 {
    let o = result.chosen_outcome;
    truth.values[o] - result.expected_transfer(bidder, &truth.predictions[o])
}

/// Expected utility of `bidder` with true type `truth` when it submits
/// `report_override` (or its current bid when `None`).
pub fn bidder_expected_utility(
    instance: &GeneralInstance,
    bidder: usize,
    report_override: Option<&Report>,
    truth: &Report,
) -> Result<f64> {
    bidder_expected_utility_with(instance, bidder, report_override, truth, MechanismOptions::default())
}

pub fn bidder_expected_utility_with(
    instance: &GeneralInstance,
    bidder: usize,
    report_override: Option<&Report>,
    truth: &Report,
    options: MechanismOptions,
) -> Result<f64> {
    let truth = instance.validate_report(bidder, truth.clone())?;
    let result = match report_override {
        Some(r) => run_general_with(&instance.with_report(bidder, r.clone())?, options)?,
        None => run_general_with(instance, options)?,
    };
    Ok(utility_from_result(&result, bidder, &truth))
}
