use super::{finish, Best, DeviationReport, GridShape, IrReport};
use crate::applications::NetworkInstance;
use crate::error::{invalid, Error, Result};
use crate::general::{
    bidder_expected_utility_with, objectives, run_general_with, utility_from_result, GeneralInstance, MechanismOptions,
    Report,
};
use crate::simplex;

/// Shape of the misreport grid for general instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneralGrid {
    /// Value candidates per outcome, before adding the truthful value.
    pub value_points: usize,
    /// Prediction candidates are the simplex points with coordinates in
    /// multiples of `1 / simplex_divisions`.
    pub simplex_divisions: usize,
    /// Refuse to scan more joint reports than this per bidder.
    pub max_profiles: usize,
}

impl Default for GeneralGrid {
    fn default() -> Self {
        Self {
            value_points: 5,
            simplex_divisions: 4,
            max_profiles: 250_000,
        }
    }
}

impl GeneralGrid {
    pub fn with_resolution(resolution: usize) -> Self {
        Self {
            value_points: resolution,
            simplex_divisions: resolution.saturating_sub(1).max(1),
            ..Self::default()
        }
    }
}

/// Scans the given candidate reports for `bidder`, whose true type is
/// `truth`. The truthful report is evaluated first and offered as a
/// candidate, so the gap is never negative.
pub fn check_ic_reports(
    instance: &GeneralInstance,
    bidder: usize,
    truth: &Report,
    candidates: impl IntoIterator<Item = Report>,
    options: MechanismOptions,
    mut grid: GridShape,
) -> Result<DeviationReport> {
    let truthful = bidder_expected_utility_with(instance, bidder, Some(truth), truth, options)?;
    let mut best = Best::new();
    best.offer(truthful, || truth.clone());
    let mut count = 1;
    for report in candidates {
        let u = bidder_expected_utility_with(instance, bidder, Some(&report), truth, options)?;
        best.offer(u, || report);
        count += 1;
    }
    grid.profiles = count;
    Ok(finish(bidder, truthful, best, grid))
}

pub fn check_ic_general(instance: &GeneralInstance, grid: GeneralGrid) -> Result<Vec<DeviationReport>> {
    check_ic_general_with(instance, grid, MechanismOptions::default())
}

/// Scans joint misreports (a value and a prediction for every outcome) for
/// each bidder, treating the submitted bids as true types.
pub fn check_ic_general_with(
    instance: &GeneralInstance,
    grid: GeneralGrid,
    options: MechanismOptions,
) -> Result<Vec<DeviationReport>> {
    if grid.value_points < 2 || grid.simplex_divisions < 1 {
        return Err(invalid(
            "grid",
            "need at least two value points and one simplex division",
        ));
    }
    let w = objectives(instance);
    let spread = w.iter().copied().fold(f64::NEG_INFINITY, f64::max) - w.iter().copied().fold(f64::INFINITY, f64::min);
    let pad = 1.0 + spread;
    let n_out = instance.outcome_count();

    let mut reports = Vec::with_capacity(instance.bidder_count());
    for i in 0..instance.bidder_count() {
        let truth = instance.report(i).clone();
        let value_sets: Vec<Vec<f64>> = truth
            .values
            .iter()
            .map(|&v| {
                let mut vs = simplex::linspace(v - pad, v + pad, grid.value_points);
                if !vs.contains(&v) {
                    vs.push(v);
                }
                vs
            })
            .collect();
        let prediction_sets: Vec<Vec<Vec<f64>>> = truth
            .predictions
            .iter()
            .map(|p| {
                let mut ps = simplex::grid(p.len(), grid.simplex_divisions);
                if !ps.contains(p) {
                    ps.push(p.clone());
                }
                ps
            })
            .collect();
        let mut radices = Vec::with_capacity(2 * n_out);
        for o in 0..n_out {
            radices.push(value_sets[o].len());
            radices.push(prediction_sets[o].len());
        }
        let profiles = radices
            .iter()
            .try_fold(1usize, |acc, &r| acc.checked_mul(r))
            .unwrap_or(usize::MAX);
        if profiles > grid.max_profiles {
            return Err(Error::GuardExceeded {
                what: format!("deviation profiles for bidder {i}"),
                count: profiles,
                limit: grid.max_profiles,
            });
        }
        let candidates = Odometer::new(radices).map(|digits| {
            Report::new(
                (0..n_out).map(|o| value_sets[o][digits[2 * o]]).collect(),
                (0..n_out)
                    .map(|o| prediction_sets[o][digits[2 * o + 1]].clone())
                    .collect(),
            )
        });
        let shape = GridShape {
            value_points: value_sets.iter().map(Vec::len).max().unwrap_or(0),
            prediction_points: prediction_sets.iter().map(Vec::len).max().unwrap_or(0),
            profiles: 0,
        };
        reports.push(check_ic_reports(instance, i, &truth, candidates, options, shape)?);
    }
    Ok(reports)
}

/// Misreports of `(cost, failure probability)` by one edge owner, with the
/// owner's current bid taken as its true type.
pub fn network_edge_scan(
    net: &NetworkInstance,
    owner: usize,
    costs: &[f64],
    failure_probs: &[f64],
) -> Result<DeviationReport> {
    let truth = net.instance.report(owner).clone();
    let candidates = costs
        .iter()
        .flat_map(|&c| failure_probs.iter().map(move |&f| (c, f)))
        .map(|(c, f)| net.edge_report(owner, c, f));
    let shape = GridShape {
        value_points: costs.len(),
        prediction_points: failure_probs.len(),
        profiles: 0,
    };
    check_ic_reports(
        &net.instance,
        owner,
        &truth,
        candidates,
        MechanismOptions::default(),
        shape,
    )
}

pub fn check_ir_general(instance: &GeneralInstance, options: MechanismOptions) -> Result<Vec<IrReport>> {
    let result = run_general_with(instance, options)?;
    Ok((0..instance.bidder_count())
        .map(|i| IrReport::new(i, utility_from_result(&result, i, instance.report(i))))
        .collect())
}

/// Mixed-radix counter yielding every digit vector in lexicographic order.
struct Odometer {
    radices: Vec<usize>,
    digits: Option<Vec<usize>>,
}

impl Odometer {
    fn new(radices: Vec<usize>) -> Self {
        let digits = if radices.contains(&0) {
            None
        } else {
            Some(vec![0; radices.len()])
        };
        Self { radices, digits }
    }
}

impl Iterator for Odometer {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.digits.clone()?;
        let digits = self.digits.as_mut().expect("checked above");
        let mut pos = digits.len();
        loop {
            if pos == 0 {
                self.digits = None;
                break;
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < self.radices[pos] {
                break;
            }
            digits[pos] = 0;
        }
        Some(current)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odometer_enumerates_everything() {
        let all: Vec<_> = Odometer::new(vec![2, 3]).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], vec![0, 0]);
        assert_eq!(all[1], vec![0, 1]);
        assert_eq!(all[5], vec![1, 2]);
        assert_eq!(Odometer::new(vec![]).count(), 1);
        assert_eq!(Odometer::new(vec![3, 0]).count(), 0);
    }
}
