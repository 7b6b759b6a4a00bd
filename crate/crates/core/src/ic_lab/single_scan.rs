use super::{finish, Best, DeviationReport, GridShape, IrReport};
use crate::error::{invalid, Result};
use crate::general::Report;
use crate::scoring::ConvexFn;
use crate::simplex;
use crate::single_slot::{expected_utility, run_auction, utility_from_result, SingleSlotBid};

/// Inserts `truth` into a sorted grid unless it is already there.
fn with_point(mut grid: Vec<f64>, truth: f64) -> Vec<f64> {
    if !grid.contains(&truth) {
        let at = grid.partition_point(|&x| x < truth);
        grid.insert(at, truth);
    }
    grid
}

/// Value and quality candidates for misreports by `bidder`.
///
/// Values span the instance's bids padded by the range of `g` plus one, so
/// the grid reaches both certain wins and certain losses.
pub fn deviation_grid(bids: &[SingleSlotBid], bidder: usize, g: &ConvexFn, resolution: usize) -> (Vec<f64>, Vec<f64>) {
    let qualities = simplex::linspace(0.0, 1.0, resolution);
    let welfare: Vec<f64> = qualities.iter().map(|&q| g.eval(q)).collect();
    let span = welfare.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - welfare.iter().copied().fold(f64::INFINITY, f64::min);
    let pad = span + 1.0;
    let lo = bids.iter().map(|b| b.value).fold(f64::INFINITY, f64::min) - pad;
    let hi = bids.iter().map(|b| b.value).fold(f64::NEG_INFINITY, f64::max) + pad;
    let truth = bids[bidder];
    (
        with_point(simplex::linspace(lo, hi, resolution), truth.value),
        with_point(qualities, truth.quality),
    )
}

/// Scans value x quality misreports for every bidder. The submitted bids
/// are taken as the bidders' true types.
pub fn check_ic_single_slot(
    bids: &[SingleSlotBid],
    g: &ConvexFn,
    grid_resolution: usize,
) -> Result<Vec<DeviationReport>> {
    if grid_resolution < 11 {
        return Err(invalid("grid_resolution", "must be at least 11"));
    }
    run_auction(bids, g)?;
    let mut reports = Vec::with_capacity(bids.len());
    let mut deviated = bids.to_vec();
    for (i, truth) in bids.iter().enumerate() {
        let truthful = expected_utility(bids, i, truth, g)?;
        let (values, qualities) = deviation_grid(bids, i, g, grid_resolution);
        let mut best = Best::new();
        for &v in &values {
            for &q in &qualities {
                deviated[i] = SingleSlotBid { value: v, quality: q };
                let result = run_auction(&deviated, g)?;
                let u = utility_from_result(&result, i, truth);
                best.offer(u, || Report::new(vec![v], vec![simplex::binary(q)]));
            }
        }
        deviated[i] = *truth;
        let grid = GridShape {
            value_points: values.len(),
            prediction_points: qualities.len(),
            profiles: values.len() * qualities.len(),
        };
        reports.push(finish(i, truthful, best, grid));
    }
    Ok(reports)
}

pub fn check_ir_single_slot(bids: &[SingleSlotBid], g: &ConvexFn) -> Result<Vec<IrReport>> {
    let result = run_auction(bids, g)?;
    Ok(bids
        .iter()
        .enumerate()
        .map(|(i, b)| IrReport::new(i, utility_from_result(&result, i, b)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ic_lab::Verdict;
    use crate::welfare_catalog::{linear_g, square_g};

    fn bid(v: f64, p: f64) -> SingleSlotBid {
        SingleSlotBid::new(v, p).unwrap()
    }

    #[test]
    fn grid_contains_truth() {
        let bids = [bid(1.234, 0.377), bid(2.0, 0.5)];
        let (values, qualities) = deviation_grid(&bids, 0, &square_g(), 11);
        assert!(values.contains(&1.234));
        assert!(qualities.contains(&0.377));
        assert_eq!(values.len(), 12);
        assert!(values.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn linear_instance_holds() {
        let bids = [bid(3.0, 0.2), bid(2.5, 0.9), bid(1.0, 0.6)];
        let reports = check_ic_single_slot(&bids, &linear_g(1.0).unwrap(), 41).unwrap();
        for r in &reports {
            assert_eq!(r.verdict, Verdict::IcHolds);
            assert!(r.gap >= 0.0 && r.gap <= 1e-9);
        }
    }

    #[test]
    fn lone_bidder_holds() {
        let reports = check_ic_single_slot(&[bid(0.3, 0.4)], &square_g(), 21).unwrap();
        assert_eq!(reports[0].verdict, Verdict::IcHolds);
    }

    #[test]
    fn resolution_floor() {
        assert!(check_ic_single_slot(&[bid(0.3, 0.4)], &square_g(), 10).is_err());
    }

    #[test]
    fn losers_have_zero_utility() {
        let bids = [bid(3.0, 0.2), bid(2.5, 0.1)];
        let ir = check_ir_single_slot(&bids, &square_g()).unwrap();
        assert_eq!(ir[1].truthful_utility, 0.0);
        assert!(ir.iter().all(|r| r.rational));
    }
}
