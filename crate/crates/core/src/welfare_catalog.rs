//! Named consumer-welfare functions.
//!
//! Binary entries are `ConvexFn`s on `[0, 1]`; the product form is a
//! two-bidder welfare for the general mechanism. Each entry carries a
//! `WelfareSpec` whose convexity claim is checked numerically.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::general::{Factor, OutcomeWelfare, WelfareTerm};
use crate::scoring::{subgrad_of_pointwise_max, ConvexFn, Curvature, LinearPiece, BINARY_CHECK_POINTS};
use crate::simplex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WelfareKind {
    Binary,
    Simplex,
    ComponentWise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvexityClaim {
    Convex,
    StrictlyConvex,
    ComponentWiseConvexOnly,
    NonConvex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WelfareSpec {
    pub name: String,
    pub kind: WelfareKind,
    pub parameters: BTreeMap<String, f64>,
    pub convexity_claim: ConvexityClaim,
}

/// A resolved binary catalog function with its description.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub spec: WelfareSpec,
    pub function: ConvexFn,
}

impl CatalogEntry {
    fn new(name: &str, parameters: &[(&str, f64)], claim: ConvexityClaim, function: ConvexFn) -> Result<Self> {
        let entry = Self {
            spec: WelfareSpec {
                name: name.to_string(),
                kind: WelfareKind::Binary,
                parameters: parameters.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
                convexity_claim: claim,
            },
            function,
        };
        entry.verify_claim()?;
        Ok(entry)
    }

    /// Confirms the convexity claim against the grid subgradient test.
    pub fn verify_claim(&self) -> Result<()> {
        let f = &self.function;
        let violation = f.find_violation(BINARY_CHECK_POINTS);
        match (self.spec.convexity_claim, violation) {
            (ConvexityClaim::NonConvex, None) => Err(Error::ConvexityClaimRefuted {
                name: self.spec.name.clone(),
            }),
            (ConvexityClaim::NonConvex, Some(_)) => Ok(()),
            (_, Some((p, q, violation))) => Err(Error::NotConvex {
                name: self.spec.name.clone(),
                p: vec![p],
                q: vec![q],
                violation,
            }),
            (ConvexityClaim::StrictlyConvex, None) => {
                let grid = simplex::linspace(0.0, 1.0, BINARY_CHECK_POINTS);
                for &p in &grid {
                    for &q in grid.iter().filter(|&&q| q != p) {
                        let gap = f.eval(q) - f.eval(p) - f.subgrad(p) * (q - p);
                        if gap <= 0.0 {
                            return Err(Error::InvalidParameter {
                                name: self.spec.name.clone(),
                                reason: format!("claimed strictly convex but flat between {p} and {q}"),
                            });
                        }
                    }
                }
                Ok(())
            }
            (_, None) => Ok(()),
        }
    }
}

/// `g(p) = slope * p`.
pub fn linear_g(slope: f64) -> Result<ConvexFn> {
    if !slope.is_finite() {
        return Err(invalid("slope", "must be finite"));
    }
    ConvexFn::new(
        format!("linear(slope={slope})"),
        move |p| slope * p,
        move |_| slope,
        Curvature::Convex,
    )
}

/// `g(p) = p^2`.
pub fn square_g() -> ConvexFn {
    ConvexFn::new("square", |p| p * p, |p| 2.0 * p, Curvature::StrictlyConvex).expect("p^2 is convex")
}

/// Zero below `alpha`, then rising linearly to `v_max` at `beta`.
///
/// At the kink the left slope (zero) is used.
pub fn threshold_g(alpha: f64, beta: f64, v_max: f64) -> Result<ConvexFn> {
    if !(0.0..=1.0).contains(&alpha) || !(0.0..=1.0).contains(&beta) {
        return Err(invalid("alpha/beta", "must lie in [0, 1]"));
    }
    if alpha >= beta {
        return Err(invalid("alpha", format!("alpha ({alpha}) must be below beta ({beta})")));
    }
    if !(v_max > 0.0 && v_max.is_finite()) {
        return Err(invalid("v_max", "must be positive"));
    }
    let rate = v_max / (beta - alpha);
    let pieces = vec![
        LinearPiece::new(vec![0.0], 0.0),
        LinearPiece::new(vec![rate], -alpha * rate),
    ];
    ConvexFn::new(
        format!("threshold(alpha={alpha},beta={beta},v_max={v_max})"),
        move |p| {
            if p < alpha {
                0.0
            } else {
                (p - alpha) / (beta - alpha) * v_max
            }
        },
        move |p| subgrad_of_pointwise_max(&pieces, &[p]).expect("two pieces")[0],
        Curvature::Convex,
    )
}

/// `g(p) = -(p - 1/2)^2`, deliberately not convex.
pub fn concave_counterexample_g() -> ConvexFn {
    ConvexFn::unverified(
        "concave_demo",
        |p| -(p - 0.5) * (p - 0.5),
        |p| -2.0 * (p - 0.5),
        Curvature::Convex,
    )
}

/// `g(p_0, p_1) = (p_0 - 1/2)(p_1 - 1/2)` over two binary predictions, where
/// state 1 of each bidder is the event. Linear in each argument, not jointly
/// convex.
pub fn product_form_g() -> OutcomeWelfare {
    OutcomeWelfare::Terms(vec![WelfareTerm::Product {
        coeff: 1.0,
        factors: vec![Factor::shifted(0, 1, 0.5), Factor::shifted(1, 1, 0.5)],
    }])
}

pub fn product_form_spec() -> WelfareSpec {
    WelfareSpec {
        name: "product".into(),
        kind: WelfareKind::ComponentWise,
        parameters: BTreeMap::new(),
        convexity_claim: ConvexityClaim::ComponentWiseConvexOnly,
    }
}

/// Names accepted by [`resolve`].
pub const CATALOG_NAMES: [&str; 5] = ["linear", "square", "threshold", "product", "concave_demo"];

/// Looks up a binary catalog function by name.
///
/// Parameters: `linear` takes `slope` (default 1); `threshold` requires
/// `alpha`, `beta` and `v_max`. Unknown parameter names are rejected.
pub fn resolve(name: &str, params: &BTreeMap<String, f64>) -> Result<CatalogEntry> {
    let get = |key: &str| params.get(key).copied();
    let allow = |keys: &[&str]| -> Result<()> {
        match params.keys().find(|k| !keys.contains(&k.as_str())) {
            Some(k) => Err(invalid(k, format!("not a parameter of {name}"))),
            None => Ok(()),
        }
    };
    let need = |key: &str| get(key).ok_or_else(|| invalid(key, format!("required by {name}")));
    match name {
        "linear" => {
            allow(&["slope"])?;
            let slope = get("slope").unwrap_or(1.0);
            CatalogEntry::new(name, &[("slope", slope)], ConvexityClaim::Convex, linear_g(slope)?)
        }
        "square" => {
            allow(&[])?;
            CatalogEntry::new(name, &[], ConvexityClaim::StrictlyConvex, square_g())
        }
        "threshold" => {
            allow(&["alpha", "beta", "v_max"])?;
            let (a, b, v) = (need("alpha")?, need("beta")?, need("v_max")?);
            CatalogEntry::new(
                name,
                &[("alpha", a), ("beta", b), ("v_max", v)],
                ConvexityClaim::Convex,
                threshold_g(a, b, v)?,
            )
        }
        "concave_demo" => {
            allow(&[])?;
            CatalogEntry::new(name, &[], ConvexityClaim::NonConvex, concave_counterexample_g())
        }
        "product" => Err(invalid(
            name,
            "component-wise welfare over two bidders; use it with a general instance",
        )),
        other => Err(Error::UnknownWelfare(other.to_string())),
    }
}
