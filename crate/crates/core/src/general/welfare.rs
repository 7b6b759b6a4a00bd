//! Consumer-welfare families `g_o` for the general mechanism.
//!
//! Most welfare functions used in practice are sums of products of affine
//! functions of single prediction coordinates, with each bidder appearing at
//! most once per product. Such a sum is affine in every bidder's prediction
//! vector, so component-wise convexity holds structurally. Quadratic terms add
//! strictly convex (or, with a negative weight, concave) pieces. Anything
//! else goes through [`CustomWelfare`] and is verified numerically.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// `p_bidder[state] - shift`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Factor {
    pub bidder: usize,
    pub state: usize,
    #[serde(default)]
    pub shift: f64,
}

impl Factor {
    pub fn new(bidder: usize, state: usize) -> Self {
        Self {
            bidder,
            state,
            shift: 0.0,
        }
    }

    pub fn shifted(bidder: usize, state: usize, shift: f64) -> Self {
        Self { bidder, state, shift }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WelfareTerm {
    Constant {
        value: f64,
    },
    /// `coeff * prod_k (p_{b_k}[s_k] - shift_k)`; an empty product is 1.
    Product {
        coeff: f64,
        factors: Vec<Factor>,
    },
    /// `weight * (p_bidder[state] - center)^2`.
    Quadratic {
        bidder: usize,
        state: usize,
        weight: f64,
        #[serde(default)]
        center: f64,
    },
}

impl WelfareTerm {
    pub fn eval(&self, predictions: &[&[f64]]) -> f64 {
        match self {
            WelfareTerm::Constant { value } => *value,
            WelfareTerm::Product { coeff, factors } => factors
                .iter()
                .fold(*coeff, |acc, f| acc * (predictions[f.bidder][f.state] - f.shift)),
            WelfareTerm::Quadratic {
                bidder,
                state,
                weight,
                center,
            } => {
                let d = predictions[*bidder][*state] - center;
                weight * d * d
            }
        }
    }

    /// Adds this term's gradient with respect to `bidder`'s vector into `out`.
    fn accumulate_gradient(&self, predictions: &[&[f64]], bidder: usize, out: &mut [f64]) {
        match self {
            WelfareTerm::Constant { .. } => {}
            WelfareTerm::Product { coeff, factors } => {
                if let Some(pos) = factors.iter().position(|f| f.bidder == bidder) {
                    let rest = factors
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| k != pos)
                        .fold(*coeff, |acc, (_, f)| acc * (predictions[f.bidder][f.state] - f.shift));
                    out[factors[pos].state] += rest;
                }
            }
            WelfareTerm::Quadratic {
                bidder: b,
                state,
                weight,
                center,
            } => {
                if *b == bidder {
                    out[*state] += 2.0 * weight * (predictions[bidder][*state] - center);
                }
            }
        }
    }

    pub(crate) fn bidders(&self) -> Vec<(usize, usize)> {
        match self {
            WelfareTerm::Constant { .. } => Vec::new(),
            WelfareTerm::Product { factors, .. } => factors.iter().map(|f| (f.bidder, f.state)).collect(),
            WelfareTerm::Quadratic { bidder, state, .. } => vec![(*bidder, *state)],
        }
    }
}

pub type WelfareEval = Arc<dyn Fn(&[&[f64]]) -> f64 + Send + Sync>;
pub type WelfareGrad = Arc<dyn Fn(&[&[f64]], usize) -> Vec<f64> + Send + Sync>;

/// An arbitrary welfare function of all bidders' prediction vectors.
///
/// Without a gradient, slices use central finite differences and must pass
/// the simplex subgradient test.
#[derive(Clone)]
pub struct CustomWelfare {
    pub name: String,
    pub eval: WelfareEval,
    pub gradient: Option<WelfareGrad>,
}

impl fmt::Debug for CustomWelfare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomWelfare")
            .field("name", &self.name)
            .field("analytic_gradient", &self.gradient.is_some())
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum OutcomeWelfare {
    Terms(Vec<WelfareTerm>),
    Custom(CustomWelfare),
}

impl Default for OutcomeWelfare {
    fn default() -> Self {
        OutcomeWelfare::Terms(Vec::new())
    }
}

/// How confident we are that a welfare function is convex in one component.
#[derive(Debug, Clone, PartialEq)]
pub enum SliceCurvature {
    /// Proven from the term structure.
    Structural,
    /// Structure proves the slice is not convex.
    Refuted(String),
    /// Needs the numerical grid test.
    Unknown,
}

impl OutcomeWelfare {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn custom<F>(name: impl Into<String>, eval: F) -> Self
    where
        F: Fn(&[&[f64]]) -> f64 + Send + Sync + 'static,
    {
        OutcomeWelfare::Custom(CustomWelfare {
            name: name.into(),
            eval: Arc::new(eval),
            gradient: None,
        })
    }

    pub fn eval(&self, predictions: &[&[f64]]) -> f64 {
        match self {
            OutcomeWelfare::Terms(terms) => terms.iter().map(|t| t.eval(predictions)).sum(),
            OutcomeWelfare::Custom(c) => (c.eval)(predictions),
        }
    }

    /// Analytic gradient with respect to `bidder`'s prediction, when known.
    pub fn gradient(&self, predictions: &[&[f64]], bidder: usize) -> Option<Vec<f64>> {
        match self {
            OutcomeWelfare::Terms(terms) => {
                let mut out = vec![0.0; predictions[bidder].len()];
                for t in terms {
                    t.accumulate_gradient(predictions, bidder, &mut out);
                }
                Some(out)
            }
            OutcomeWelfare::Custom(c) => c.gradient.as_ref().map(|g| g(predictions, bidder)),
        }
    }

    pub fn slice_curvature(&self, bidder: usize) -> SliceCurvature {
        let OutcomeWelfare::Terms(terms) = self else {
            return SliceCurvature::Unknown;
        };
        for term in terms {
            match term {
                WelfareTerm::Product { factors, .. } => {
                    if factors.iter().filter(|f| f.bidder == bidder).count() > 1 {
                        return SliceCurvature::Unknown;
                    }
                }
                WelfareTerm::Quadratic { bidder: b, weight, .. } if *b == bidder && *weight < 0.0 => {
                    return SliceCurvature::Refuted(format!("quadratic term with negative weight {weight}"));
                }
                _ => {}
            }
        }
        SliceCurvature::Structural
    }

    pub fn terms(&self) -> Option<&[WelfareTerm]> {
        match self {
            OutcomeWelfare::Terms(t) => Some(t),
            OutcomeWelfare::Custom(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_gradient_matches_finite_difference() {
        let w = OutcomeWelfare::Terms(vec![
            WelfareTerm::Product {
                coeff: 3.0,
                factors: vec![Factor::shifted(0, 1, 0.5), Factor::new(1, 0)],
            },
            WelfareTerm::Quadratic {
                bidder: 0,
                state: 0,
                weight: 2.0,
                center: 0.1,
            },
        ]);
        let p0 = [0.3, 0.7];
        let p1 = [0.6, 0.4];
        let grad = w.gradient(&[&p0, &p1], 0).unwrap();
        let h = 1e-6;
        for s in 0..2 {
            let mut up = p0;
            let mut dn = p0;
            up[s] += h;
            dn[s] -= h;
            let fd = (w.eval(&[&up, &p1]) - w.eval(&[&dn, &p1])) / (2.0 * h);
            assert!((fd - grad[s]).abs() < 1e-6, "state {s}: {fd} vs {}", grad[s]);
        }
    }

    #[test]
    fn structural_curvature() {
        let concave = OutcomeWelfare::Terms(vec![WelfareTerm::Quadratic {
            bidder: 1,
            state: 0,
            weight: -1.0,
            center: 0.5,
        }]);
        assert_eq!(concave.slice_curvature(0), SliceCurvature::Structural);
        assert!(matches!(concave.slice_curvature(1), SliceCurvature::Refuted(_)));
        assert_eq!(
            OutcomeWelfare::custom("c", |_| 0.0).slice_curvature(0),
            SliceCurvature::Unknown
        );
    }
}
