use serde::{Deserialize, Serialize};

use super::welfare::OutcomeWelfare;
use crate::error::{Error, Result};
use crate::simplex;

/// One bidder's reported (or true) type: a value and a prediction per outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub values: Vec<f64>,
    pub predictions: Vec<Vec<f64>>,
}

impl Report {
    pub fn new(values: Vec<f64>, predictions: Vec<Vec<f64>>) -> Self {
        Self { values, predictions }
    }
}

/// Outcomes, per-(bidder, outcome) state sets, bids and welfare family.
///
/// `baselines[i][o]` is the distribution substituted for bidder `i`'s
/// prediction when evaluating `g_o` without that bidder. It defaults to the
/// uniform distribution over the state set.
#[derive(Debug, Clone)]
pub struct GeneralInstance {
    outcomes: Vec<String>,
    states: Vec<Vec<Vec<String>>>,
    reports: Vec<Report>,
    welfare: Vec<OutcomeWelfare>,
    baselines: Vec<Vec<Vec<f64>>>,
}

impl GeneralInstance {
    pub fn new(
        outcomes: Vec<String>,
        states: Vec<Vec<Vec<String>>>,
        reports: Vec<Report>,
        welfare: Vec<OutcomeWelfare>,
    ) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::EmptyOutcomes);
        }
        let mut seen = std::collections::BTreeSet::new();
        for id in &outcomes {
            if !seen.insert(id) {
                return Err(Error::InvalidInstance(format!("duplicate outcome id {id:?}")));
            }
        }
        let n_out = outcomes.len();
        if states.len() != reports.len() {
            return Err(Error::DimensionMismatch {
                field: "states".into(),
                expected: reports.len(),
                got: states.len(),
            });
        }
        for (i, per_outcome) in states.iter().enumerate() {
            if per_outcome.len() != n_out {
                return Err(Error::DimensionMismatch {
                    field: format!("states[{i}]"),
                    expected: n_out,
                    got: per_outcome.len(),
                });
            }
            if let Some(o) = per_outcome.iter().position(|s| s.is_empty()) {
                return Err(Error::InvalidInstance(format!("states[{i}][{o}] is empty")));
            }
        }
        if welfare.len() != n_out {
            return Err(Error::DimensionMismatch {
                field: "welfare".into(),
                expected: n_out,
                got: welfare.len(),
            });
        }
        let baselines = states
            .iter()
            .map(|per| per.iter().map(|s| simplex::uniform(s.len())).collect())
            .collect();
        let instance = Self {
            outcomes,
            states,
            reports: Vec::new(),
            welfare,
            baselines,
        };
        for (o, w) in instance.welfare.iter().enumerate() {
            instance.check_terms(o, w)?;
        }
        let reports = reports
            .into_iter()
            .enumerate()
            .map(|(i, r)| instance.validate_report(i, r))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { reports, ..instance })
    }

    fn check_terms(&self, o: usize, w: &OutcomeWelfare) -> Result<()> {
        for term in w.terms().unwrap_or_default() {
            for (bidder, state) in term.bidders() {
                let Some(per) = self.states.get(bidder) else {
                    return Err(Error::InvalidInstance(format!(
                        "welfare[{o}] references bidder {bidder} of {}",
                        self.states.len()
                    )));
                };
                if state >= per[o].len() {
                    return Err(Error::InvalidInstance(format!(
                        "welfare[{o}] references state {state} of bidder {bidder}, which has {} states",
                        per[o].len()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Checks dimensions, finiteness and simplex membership of a report.
    pub fn validate_report(&self, bidder: usize, report: Report) -> Result<Report> {
        let n_out = self.outcomes.len();
        if report.values.len() != n_out {
            return Err(Error::DimensionMismatch {
                field: format!("bidders[{bidder}].values"),
                expected: n_out,
                got: report.values.len(),
            });
        }
        if let Some(o) = report.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInstance(format!(
                "bidders[{bidder}].values[{o}] is not finite"
            )));
        }
        if report.predictions.len() != n_out {
            return Err(Error::DimensionMismatch {
                field: format!("bidders[{bidder}].predictions"),
                expected: n_out,
                got: report.predictions.len(),
            });
        }
        let predictions = report
            .predictions
            .iter()
            .enumerate()
            .map(|(o, p)| {
                simplex::validate(
                    &format!("bidders[{bidder}].predictions[{o}]"),
                    p,
                    self.states[bidder][o].len(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Report {
            values: report.values,
            predictions,
        })
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn outcome_count(&self) -> usize {
        self.outcomes.len()
    }

    pub fn bidder_count(&self) -> usize {
        self.reports.len()
    }

    pub fn states(&self, bidder: usize, outcome: usize) -> &[String] {
        &self.states[bidder][outcome]
    }

    pub fn state_sets(&self) -> &[Vec<Vec<String>>] {
        &self.states
    }

    pub fn reports(&self) -> &[Report] {
        &self.reports
    }

    pub fn report(&self, bidder: usize) -> &Report {
        &self.reports[bidder]
    }

    pub fn welfare(&self, outcome: usize) -> &OutcomeWelfare {
        &self.welfare[outcome]
    }

    pub fn welfare_family(&self) -> &[OutcomeWelfare] {
        &self.welfare
    }

    pub fn baseline(&self, bidder: usize, outcome: usize) -> &[f64] {
        &self.baselines[bidder][outcome]
    }

    pub fn baselines(&self) -> &[Vec<Vec<f64>>] {
        &self.baselines
    }

    pub fn set_baseline(&mut self, bidder: usize, outcome: usize, baseline: Vec<f64>) -> Result<()> {
        let n = self
            .states
            .get(bidder)
            .and_then(|per| per.get(outcome))
            .map(|s| s.len())
            .ok_or_else(|| Error::InvalidInstance(format!("no state set for bidder {bidder}, outcome {outcome}")))?;
        self.baselines[bidder][outcome] = simplex::validate(&format!("baselines[{bidder}][{outcome}]"), &baseline, n)?;
        Ok(())
    }

    /// The same instance with `bidder`'s bid replaced.
    pub fn with_report(&self, bidder: usize, report: Report) -> Result<Self> {
        if bidder >= self.reports.len() {
            return Err(Error::InvalidInstance(format!("no bidder {bidder}")));
        }
        let report = self.validate_report(bidder, report)?;
        let mut out = self.clone();
        out.reports[bidder] = report;
        Ok(out)
    }

    /// Reported predictions of every bidder at `outcome`.
    pub fn predictions_at(&self, outcome: usize) -> Vec<&[f64]> {
        self.reports.iter().map(|r| r.predictions[outcome].as_slice()).collect()
    }
}
