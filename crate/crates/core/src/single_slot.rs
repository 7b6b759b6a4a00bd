//! The single-slot deals auction.
//!
//! Bidders report a value for winning and a purchase probability. The
//! winner maximizes the adjusted value `v + g(p)` and pays the runner-up's
//! adjusted value minus the tangent-rule score of its own quality report,
//! so the payment depends on whether the purchase actually happens.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scoring::{make_binary_rule, ConvexFn};
use crate::simplex;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingleSlotBid {
    /// Total expected value for winning, in currency units.
    pub value: f64,
    /// Probability that a shown deal is purchased.
    pub quality: f64,
}

impl SingleSlotBid {
    pub fn new(value: f64, quality: f64) -> Result<Self> {
        let bid = Self { value, quality };
        bid.validate(0)?;
        Ok(bid)
    }

    pub fn validate(&self, index: usize) -> Result<()> {
        if !self.value.is_finite() {
            return Err(Error::InvalidInstance(format!("bids[{index}].value is not finite")));
        }
        simplex::validate_probability(&format!("bids[{index}].quality"), self.quality)?;
        Ok(())
    }

    /// `h(v, p) = v + g(p)`.
    pub fn adjusted(&self, g: &ConvexFn) -> f64 {
        self.value + g.eval(self.quality)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingleSlotResult {
    pub winner: usize,
    pub payment_if_purchase: f64,
    pub payment_if_no_purchase: f64,
    pub adjusted_values: Vec<f64>,
    /// Runner-up adjusted value, or 0 with a single bidder.
    pub reference_value: f64,
}

impl SingleSlotResult {
    pub fn payment(&self, bidder: usize, purchased: bool) -> f64 {
        match (bidder == self.winner, purchased) {
            (false, _) => 0.0,
            (true, true) => self.payment_if_purchase,
            (true, false) => self.payment_if_no_purchase,
        }
    }

    /// Expected payment of `bidder` when the purchase happens with `belief`.
    pub fn expected_payment(&self, bidder: usize, belief: f64) -> f64 {
        belief * self.payment(bidder, true) + (1.0 - belief) * self.payment(bidder, false)
    }
}

pub fn run_auction(bids: &[SingleSlotBid], g: &ConvexFn) -> Result<SingleSlotResult> {
    if bids.is_empty() {
        return Err(Error::EmptyBids);
    }
    for (i, b) in bids.iter().enumerate() {
        b.validate(i)?;
    }
    let adjusted: Vec<f64> = bids.iter().map(|b| b.adjusted(g)).collect();
    let mut winner = 0;
    for (i, &h) in adjusted.iter().enumerate().skip(1) {
        if h > adjusted[winner] {
            winner = i;
        }
    }
    let reference_value = adjusted
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != winner)
        .map(|(_, &h)| h)
        .reduce(f64::max)
        .unwrap_or(0.0);
    let rule = make_binary_rule(g);
    let report = bids[winner].quality;
    Ok(SingleSlotResult {
        winner,
        payment_if_purchase: reference_value - rule.score_binary(report, true),
        payment_if_no_purchase: reference_value - rule.score_binary(report, false),
        adjusted_values: adjusted,
        reference_value,
    })
}

/// Draws whether the consumer buys, deterministically from `seed`.
///
/// Uses the first `f64` of a ChaCha8 stream seeded with `seed_from_u64`.
pub fn realize_purchase(true_quality: f64, seed: u64) -> bool {
    ChaCha8Rng::seed_from_u64(seed).gen::<f64>() < true_quality
}

/// Expected utility of `bidder` with type `truth` when the submitted bids
/// are `bids` (which may contain a misreport for `bidder`).
pub fn expected_utility(bids: &[SingleSlotBid], bidder: usize, truth: &SingleSlotBid, g: &ConvexFn) -> Result<f64> {
    let result = run_auction(bids, g)?;
    Ok(utility_from_result(&result, bidder, truth))
}

pub fn utility_from_result(result: &SingleSlotResult, bidder: usize, truth: &SingleSlotBid) -> f64 {
    if result.winner != bidder {
        return 0.0;
    }
    truth.value - result.expected_payment(bidder, truth.quality)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::Curvature;

    fn linear() -> ConvexFn {
        ConvexFn::new("linear", |p| p, |_| 1.0, Curvature::Convex).unwrap()
    }

    fn zero() -> ConvexFn {
        ConvexFn::new("zero", |_| 0.0, |_| 0.0, Curvature::Convex).unwrap()
    }

    fn bid(v: f64, p: f64) -> SingleSlotBid {
        SingleSlotBid::new(v, p).unwrap()
    }

    #[test]
    fn worked_linear_example() {
        let bids = [bid(1.0, 0.2), bid(0.5, 0.9)];
        let r = run_auction(&bids, &linear()).unwrap();
        // Oracle: brute-force argmax over v + p.
        let brute = bids
            .iter()
            .map(|b| b.value + b.quality)
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, h)| if h > acc.1 { (i, h) } else { acc },
            );
        assert_eq!(r.winner, brute.0);
        assert_eq!(r.winner, 1);
        assert!((r.adjusted_values[0] - 1.2).abs() < 1e-12);
        assert!((r.adjusted_values[1] - 1.4).abs() < 1e-12);
        assert!((r.payment_if_purchase - 0.2).abs() < 1e-12);
        assert!((r.payment_if_no_purchase - 1.2).abs() < 1e-12);
        assert_eq!(r.payment(0, true), 0.0);
        assert_eq!(r.payment(0, false), 0.0);
    }

    #[test]
    fn constant_welfare_is_second_price() {
        let bids = [bid(3.0, 0.1), bid(5.0, 0.0), bid(4.0, 1.0)];
        let r = run_auction(&bids, &zero()).unwrap();
        assert_eq!(r.winner, 1);
        assert_eq!(r.payment_if_purchase, 4.0);
        assert_eq!(r.payment_if_no_purchase, 4.0);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let bids = [bid(1.0, 0.5), bid(1.0, 0.5)];
        assert_eq!(run_auction(&bids, &linear()).unwrap().winner, 0);
    }

    #[test]
    fn single_bidder_reference_is_zero() {
        let r = run_auction(&[bid(2.0, 0.4)], &linear()).unwrap();
        assert_eq!(r.winner, 0);
        assert_eq!(r.reference_value, 0.0);
        assert!((r.payment_if_purchase + 1.0).abs() < 1e-12);
        assert_eq!(r.payment_if_no_purchase, 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(run_auction(&[], &linear()), Err(Error::EmptyBids));
        assert!(SingleSlotBid::new(1.0, 1.5).is_err());
        assert!(SingleSlotBid::new(f64::NAN, 0.5).is_err());
        let raw = [SingleSlotBid {
            value: 1.0,
            quality: -0.1,
        }];
        assert!(run_auction(&raw, &linear()).is_err());
    }

    #[test]
    fn truthful_utilities() {
        let bids = [bid(1.0, 0.2), bid(0.5, 0.9)];
        let g = linear();
        let winner = expected_utility(&bids, 1, &bids[1], &g).unwrap();
        assert!((winner - (1.4 - 1.2)).abs() < 1e-12);
        assert_eq!(expected_utility(&bids, 0, &bids[0], &g).unwrap(), 0.0);
    }

    #[test]
    fn expected_payment_matches_reference_minus_welfare() {
        let g = ConvexFn::new("square", |p| p * p, |p| 2.0 * p, Curvature::StrictlyConvex).unwrap();
        let bids = [bid(0.3, 0.7), bid(0.1, 0.95), bid(0.6, 0.1)];
        let r = run_auction(&bids, &g).unwrap();
        let w = r.winner;
        let expected = r.expected_payment(w, bids[w].quality);
        assert!((expected - (r.reference_value - g.eval(bids[w].quality))).abs() < 1e-12);
    }

    #[test]
    fn purchase_realization() {
        for seed in 0..1000 {
            assert!(!realize_purchase(0.0, seed));
            assert!(realize_purchase(1.0, seed));
        }
        assert_eq!(realize_purchase(0.5, 42), realize_purchase(0.5, 42));
    }

    #[test]
    fn purchase_frequency_is_close_to_quality() {
        let n = 1_000_000u64;
        let hits = (0..n).filter(|&s| realize_purchase(0.5, s)).count();
        let freq = hits as f64 / n as f64;
        assert!((freq - 0.5).abs() < 0.002, "frequency {freq}");
    }
}
