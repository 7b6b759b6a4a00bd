//! Deals where the merchant and the platform each hold part of the quality
//! signal.
//!
//! The platform turns the merchant's signal `x_i` and its own `y_i` into a
//! purchase probability per slot assignment, sets `v_i(o) = a_i + p_i(o) c_i`
//! and runs the general mechanism on the result.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::general::{run_general, Factor, GeneralInstance, GeneralResult, OutcomeWelfare, Report, WelfareTerm};
use crate::simplex;

pub const NO_PURCHASE: usize = 0;
pub const PURCHASE: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merchant {
    /// `a_i`: value of having the deal displayed.
    pub display_value: f64,
    /// `c_i`: additional value per purchase.
    pub purchase_value: f64,
    /// `x_i`: the merchant's private quality signal.
    pub signal: f64,
}

/// `f_{o,i}(x_i, y_i)`: outcome index, merchant index, merchant signal,
/// platform signal.
pub type QualityModel = Arc<dyn Fn(usize, usize, f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct SplitInfoDealSpec {
    pub merchants: Vec<Merchant>,
    pub platform_signals: Vec<f64>,
    pub quality: QualityModel,
    /// Consumer welfare per expected purchase of a displayed deal.
    pub purchase_welfare: f64,
}

impl fmt::Debug for SplitInfoDealSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SplitInfoDealSpec")
            .field("merchants", &self.merchants)
            .field("platform_signals", &self.platform_signals)
            .field("purchase_welfare", &self.purchase_welfare)
            .finish()
    }
}

/// Compiles the deals into a general instance. Each slot assignment lists
/// the merchants whose coupons it displays.
pub fn build_split_info_instance(spec: &SplitInfoDealSpec, slot_assignments: &[Vec<usize>]) -> Result<GeneralInstance> {
    let m = spec.merchants.len();
    if spec.platform_signals.len() != m {
        return Err(Error::DimensionMismatch {
            field: "platform_signals".into(),
            expected: m,
            got: spec.platform_signals.len(),
        });
    }
    for (o, slots) in slot_assignments.iter().enumerate() {
        if let Some(&i) = slots.iter().find(|&&i| i >= m) {
            return Err(Error::InvalidInstance(format!(
                "slot_assignments[{o}] names merchant {i} of {m}"
            )));
        }
    }
    if !spec.purchase_welfare.is_finite() {
        return Err(invalid("purchase_welfare", "must be finite"));
    }
    let mut states = vec![Vec::new(); m];
    let mut values = vec![Vec::new(); m];
    let mut predictions = vec![Vec::new(); m];
    let mut welfare = Vec::new();
    for (o, slots) in slot_assignments.iter().enumerate() {
        let mut terms = Vec::new();
        for (i, merchant) in spec.merchants.iter().enumerate() {
            if slots.contains(&i) {
                let p = (spec.quality)(o, i, merchant.signal, spec.platform_signals[i]);
                simplex::validate_probability(&format!("quality[{o}][{i}]"), p)?;
                states[i].push(vec!["no_purchase".to_string(), "purchase".to_string()]);
                values[i].push(merchant.display_value + p * merchant.purchase_value);
                predictions[i].push(simplex::binary(p));
                terms.push(WelfareTerm::Product {
                    coeff: spec.purchase_welfare,
                    factors: vec![Factor::new(i, PURCHASE)],
                });
            } else {
                states[i].push(vec!["idle".to_string()]);
                values[i].push(0.0);
                predictions[i].push(vec![1.0]);
            }
        }
        welfare.push(OutcomeWelfare::Terms(terms));
    }
    let outcomes = slot_assignments
        .iter()
        .map(|slots| {
            let ids: Vec<String> = slots.iter().map(|i| i.to_string()).collect();
            format!("slots[{}]", ids.join(","))
        })
        .collect();
    let reports = values
        .into_iter()
        .zip(predictions)
        .map(|(v, p)| Report::new(v, p))
        .collect();
    let mut instance = GeneralInstance::new(outcomes, states, reports, welfare)?;
    // Without a merchant, its slot produces no purchase.
    for (o, slots) in slot_assignments.iter().enumerate() {
        for &i in slots {
            instance.set_baseline(i, o, simplex::vertex(2, NO_PURCHASE))?;
        }
    }
    Ok(instance)
}

pub fn run_split_info(spec: &SplitInfoDealSpec, slot_assignments: &[Vec<usize>]) -> Result<GeneralResult> {
    run_general(&build_split_info_instance(spec, slot_assignments)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::general::objectives;
    use crate::single_slot::{run_auction, SingleSlotBid};
    use crate::welfare_catalog::linear_g;

    fn merchant(a: f64, c: f64, x: f64) -> Merchant {
        Merchant {
            display_value: a,
            purchase_value: c,
            signal: x,
        }
    }

    fn one_slot_each(m: usize) -> Vec<Vec<usize>> {
        (0..m).map(|i| vec![i]).collect()
    }

    #[test]
    fn merchant_only_signal_is_the_deals_auction() {
        let merchants = vec![
            merchant(1.0, 2.0, 0.3),
            merchant(0.5, 1.0, 0.9),
            merchant(0.2, 3.0, 0.4),
        ];
        let spec = SplitInfoDealSpec {
            merchants: merchants.clone(),
            platform_signals: vec![0.7, 0.1, 0.5],
            quality: Arc::new(|_, _, x, _| x),
            purchase_welfare: 1.5,
        };
        let general = run_split_info(&spec, &one_slot_each(3)).unwrap();
        let bids: Vec<SingleSlotBid> = merchants
            .iter()
            .map(|m| SingleSlotBid::new(m.display_value + m.signal * m.purchase_value, m.signal).unwrap())
            .collect();
        let single = run_auction(&bids, &linear_g(1.5).unwrap()).unwrap();
        assert_eq!(general.chosen_outcome, single.winner);
        let w = single.winner;
        assert!((general.transfers[w][PURCHASE] - single.payment_if_purchase).abs() < 1e-12);
        assert!((general.transfers[w][NO_PURCHASE] - single.payment_if_no_purchase).abs() < 1e-12);
    }

    #[test]
    fn zero_quality_is_a_value_auction() {
        let spec = SplitInfoDealSpec {
            merchants: vec![merchant(1.0, 5.0, 0.9), merchant(2.0, 1.0, 0.1)],
            platform_signals: vec![0.0, 0.0],
            quality: Arc::new(|_, _, _, _| 0.0),
            purchase_welfare: 3.0,
        };
        let r = run_split_info(&spec, &one_slot_each(2)).unwrap();
        assert_eq!(r.chosen_outcome, 1);
        // Second-highest display value, whatever happens.
        assert!((r.transfers[1][NO_PURCHASE] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn combined_signal_selection() {
        // f = min(1, x + y): f0 = 0.4, f1 = 0.5.
        // W({0}) = 1 + 0.4*2 + 0.4 = 2.2, W({1}) = 0.5 + 0.5*4 + 0.5 = 3.0.
        let spec = SplitInfoDealSpec {
            merchants: vec![merchant(1.0, 2.0, 0.3), merchant(0.5, 4.0, 0.2)],
            platform_signals: vec![0.1, 0.3],
            quality: Arc::new(|_, _, x, y| (x + y).min(1.0)),
            purchase_welfare: 1.0,
        };
        let inst = build_split_info_instance(&spec, &one_slot_each(2)).unwrap();
        let w = objectives(&inst);
        assert!((w[0] - 2.2).abs() < 1e-12);
        assert!((w[1] - 3.0).abs() < 1e-12);
        assert_eq!(run_general(&inst).unwrap().chosen_outcome, 1);
    }

    #[test]
    fn out_of_range_quality_is_rejected() {
        let spec = SplitInfoDealSpec {
            merchants: vec![merchant(1.0, 1.0, 0.8)],
            platform_signals: vec![0.8],
            quality: Arc::new(|_, _, x, y| x + y),
            purchase_welfare: 1.0,
        };
        assert!(matches!(
            build_split_info_instance(&spec, &[vec![0]]),
            Err(Error::NotOnSimplex { .. })
        ));
    }
}
