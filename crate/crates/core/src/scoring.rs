//! Proper scoring rules built from convex functions.
//!
//! A convex `g` together with any subgradient oracle yields a proper rule by
//! scoring a report with the tangent plane of `g` at that report. The
//! expected score of a truthful report equals `g` itself, which is the
//! property the auctions rely on to turn consumer welfare into payments.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::simplex;

pub type ScalarMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type VectorEval = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type VectorGrad = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Slack allowed in the subgradient inequality.
pub const SUBGRADIENT_TOLERANCE: f64 = 1e-12;
/// Points on `[0, 1]` used by the binary convexity check.
pub const BINARY_CHECK_POINTS: usize = 101;
/// Upper bound on simplex grid points used by the simplex convexity check.
pub const SIMPLEX_CHECK_BUDGET: usize = 231;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Curvature {
    Convex,
    StrictlyConvex,
}

/// A function on `[0, 1]` with a subgradient oracle.
#[derive(Clone)]
pub struct ConvexFn {
    name: String,
    eval: ScalarMap,
    subgrad: ScalarMap,
    curvature: Curvature,
    verified: bool,
}

impl fmt::Debug for ConvexFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConvexFn")
            .field("name", &self.name)
            .field("curvature", &self.curvature)
            .field("verified", &self.verified)
            .finish()
    }
}

impl ConvexFn {
    /// Builds a function and checks the subgradient inequality on a
    /// 101-point grid.
    pub fn new<E, S>(name: impl Into<String>, eval: E, subgrad: S, curvature: Curvature) -> Result<Self>
    where
        E: Fn(f64) -> f64 + Send + Sync + 'static,
        S: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let f = Self::unverified(name, eval, subgrad, curvature);
        f.check_subgradients(BINARY_CHECK_POINTS)?;
        Ok(Self { verified: true, ..f })
    }

    /// Skips the convexity check.
    ///
    /// Only meant for negative demonstrations: a mechanism run with an
    /// unverified function carries none of the truthfulness guarantees.
    pub fn unverified<E, S>(name: impl Into<String>, eval: E, subgrad: S, curvature: Curvature) -> Self
    where
        E: Fn(f64) -> f64 + Send + Sync + 'static,
        S: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
            subgrad: Arc::new(subgrad),
            curvature,
            verified: false,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, p: f64) -> f64 {
        (self.eval)(p)
    }

    pub fn subgrad(&self, p: f64) -> f64 {
        (self.subgrad)(p)
    }

    pub fn curvature(&self) -> Curvature {
        self.curvature
    }

    /// Whether the subgradient grid test passed at construction.
    pub fn is_verified(&self) -> bool {
        self.verified
    }

    /// Returns the first grid pair `(p, q)` that violates
    /// `g(q) >= g(p) + g'(p)(q - p) - tol`, if any.
    pub fn find_violation(&self, points: usize) -> Option<(f64, f64, f64)> {
        let grid = simplex::linspace(0.0, 1.0, points);
        let evals: Vec<f64> = grid.iter().map(|&p| self.eval(p)).collect();
        for (i, &p) in grid.iter().enumerate() {
            let (gp, sp) = (evals[i], self.subgrad(p));
            for (j, &q) in grid.iter().enumerate() {
                let violation = gp + sp * (q - p) - evals[j];
                if violation > SUBGRADIENT_TOLERANCE {
                    return Some((p, q, violation));
                }
            }
        }
        None
    }

    pub fn check_subgradients(&self, points: usize) -> Result<()> {
        if let Some(p) = simplex::linspace(0.0, 1.0, points)
            .into_iter()
            .find(|&p| !self.eval(p).is_finite() || !self.subgrad(p).is_finite())
        {
            return Err(Error::InvalidParameter {
                name: self.name.clone(),
                reason: format!("not finite at p={p}"),
            });
        }
        match self.find_violation(points) {
            None => Ok(()),
            Some((p, q, violation)) => Err(Error::NotConvex {
                name: self.name.clone(),
                p: vec![p],
                q: vec![q],
                violation,
            }),
        }
    }

    /// The same function viewed on the two-state simplex `[1 - p, p]`.
    pub fn to_simplex(&self) -> SimplexConvexFn {
        let eval = self.eval.clone();
        let subgrad = self.subgrad.clone();
        SimplexConvexFn {
            name: self.name.clone(),
            state_count: 2,
            eval: Arc::new(move |q: &[f64]| eval(q[1])),
            subgrad: Arc::new(move |q: &[f64]| vec![0.0, subgrad(q[1])]),
        }
    }
}

/// A function on the `n`-state probability simplex with a subgradient oracle.
#[derive(Clone)]
pub struct SimplexConvexFn {
    name: String,
    state_count: usize,
    eval: VectorEval,
    subgrad: VectorGrad,
}

impl fmt::Debug for SimplexConvexFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SimplexConvexFn")
            .field("name", &self.name)
            .field("state_count", &self.state_count)
            .finish()
    }
}

impl SimplexConvexFn {
    /// Builds the function and checks the subgradient inequality on a
    /// simplex grid.
    pub fn new<E, S>(name: impl Into<String>, state_count: usize, eval: E, subgrad: S) -> Result<Self>
    where
        E: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        S: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        let f = Self::unverified(name, state_count, eval, subgrad)?;
        f.check_subgradients(SIMPLEX_CHECK_BUDGET)?;
        Ok(f)
    }

    pub fn unverified<E, S>(name: impl Into<String>, state_count: usize, eval: E, subgrad: S) -> Result<Self>
    where
        E: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        S: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        if state_count == 0 {
            return Err(crate::error::invalid("state_count", "must be positive"));
        }
        Ok(Self {
            name: name.into(),
            state_count,
            eval: Arc::new(eval),
            subgrad: Arc::new(subgrad),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn state_count(&self) -> usize {
        self.state_count
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        (self.eval)(p)
    }

    pub fn subgrad(&self, p: &[f64]) -> Vec<f64> {
        (self.subgrad)(p)
    }

    pub fn find_violation(&self, budget: usize) -> Option<(Vec<f64>, Vec<f64>, f64)> {
        let grid = simplex::grid(
            self.state_count,
            simplex::divisions_for_budget(self.state_count, budget),
        );
        let evals: Vec<f64> = grid.iter().map(|p| self.eval(p)).collect();
        for (i, p) in grid.iter().enumerate() {
            let grad = self.subgrad(p);
            for (j, q) in grid.iter().enumerate() {
                let step: f64 = grad.iter().zip(q.iter().zip(p)).map(|(g, (a, b))| g * (a - b)).sum();
                let violation = evals[i] + step - evals[j];
                if violation > SUBGRADIENT_TOLERANCE {
                    return Some((p.clone(), q.clone(), violation));
                }
            }
        }
        None
    }

    pub fn check_subgradients(&self, budget: usize) -> Result<()> {
        match self.find_violation(budget) {
            None => Ok(()),
            Some((p, q, violation)) => Err(Error::NotConvex {
                name: self.name.clone(),
                p,
                q,
                violation,
            }),
        }
    }
}

/// Common interface of the binary and simplex rules.
pub trait ScoringRule {
    fn state_count(&self) -> usize;

    /// Score of `report` when state `state` is realized.
    fn score(&self, report: &[f64], state: usize) -> Result<f64>;

    /// Expected score of `report` when the state is drawn from `truth`.
    fn expected_score(&self, report: &[f64], truth: &[f64]) -> Result<f64> {
        let n = self.state_count();
        let report = simplex::validate("report", report, n)?;
        let truth = simplex::validate("truth", truth, n)?;
        let mut total = 0.0;
        for (state, &w) in truth.iter().enumerate() {
            if w != 0.0 {
                total += w * self.score(&report, state)?;
            }
        }
        Ok(total)
    }
}

/// `S(p, 1) = g(p) + (1 - p) g'(p)`, `S(p, 0) = g(p) - p g'(p)`.
#[derive(Debug, Clone)]
pub struct BinaryScoringRule {
    g: ConvexFn,
}

impl BinaryScoringRule {
    pub fn welfare(&self) -> &ConvexFn {
        &self.g
    }

    pub fn score_binary(&self, report: f64, occurred: bool) -> f64 {
        let (g, slope) = (self.g.eval(report), self.g.subgrad(report));
        if occurred {
            g + (1.0 - report) * slope
        } else {
            g - report * slope
        }
    }

    /// `S(report; truth)` for Bernoulli probabilities.
    pub fn expected_binary(&self, report: f64, truth: f64) -> f64 {
        truth * self.score_binary(report, true) + (1.0 - truth) * self.score_binary(report, false)
    }
}

impl ScoringRule for BinaryScoringRule {
    fn state_count(&self) -> usize {
        2
    }

    fn score(&self, report: &[f64], state: usize) -> Result<f64> {
        let report = simplex::validate("report", report, 2)?;
        match state {
            0 | 1 => Ok(self.score_binary(report[1], state == 1)),
            _ => Err(Error::DimensionMismatch {
                field: "state".into(),
                expected: 2,
                got: state + 1,
            }),
        }
    }
}

/// `S(p, w) = g(p) + g'(p) . (e_w - p)`.
#[derive(Debug, Clone)]
pub struct SimplexScoringRule {
    g: SimplexConvexFn,
}

impl SimplexScoringRule {
    pub fn welfare(&self) -> &SimplexConvexFn {
        &self.g
    }

    /// Scores for every state at once; `report` must already be validated.
    pub fn score_all(&self, report: &[f64]) -> Vec<f64> {
        let base = self.g.eval(report);
        let grad = self.g.subgrad(report);
        let centre = simplex::dot(&grad, report);
        grad.iter().map(|&gw| base + gw - centre).collect()
    }
}

impl ScoringRule for SimplexScoringRule {
    fn state_count(&self) -> usize {
        self.g.state_count
    }

    fn score(&self, report: &[f64], state: usize) -> Result<f64> {
        let n = self.g.state_count;
        let report = simplex::validate("report", report, n)?;
        if state >= n {
            return Err(Error::DimensionMismatch {
                field: "state".into(),
                expected: n,
                got: state + 1,
            });
        }
        Ok(self.score_all(&report)[state])
    }
}

pub fn make_binary_rule(g: &ConvexFn) -> BinaryScoringRule {
    BinaryScoringRule { g: g.clone() }
}

pub fn make_simplex_rule(g: &SimplexConvexFn) -> SimplexScoringRule {
    SimplexScoringRule { g: g.clone() }
}

/// Expected score of `report` under `truth`, rejecting non-simplex inputs.
pub fn expected_score(rule: &dyn ScoringRule, report: &[f64], truth: &[f64]) -> Result<f64> {
    rule.expected_score(report, truth)
}

/// An affine function `slope . p + intercept`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LinearPiece {
    pub slope: Vec<f64>,
    pub intercept: f64,
}

impl LinearPiece {
    pub fn new(slope: Vec<f64>, intercept: f64) -> Self {
        Self { slope, intercept }
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        simplex::dot(&self.slope, p) + self.intercept
    }
}

/// Slope of an active piece of `max_k piece_k(p)`.
///
/// Values within `1e-12` (relative) of each other count as tied, and ties go
/// to the lowest piece index.
pub fn subgrad_of_pointwise_max(pieces: &[LinearPiece], p: &[f64]) -> Result<Vec<f64>> {
    let first = pieces.first().ok_or(Error::EmptyPieces)?;
    for piece in pieces {
        if piece.slope.len() != p.len() {
            return Err(Error::DimensionMismatch {
                field: "slope".into(),
                expected: p.len(),
                got: piece.slope.len(),
            });
        }
    }
    let mut best = first;
    let mut best_value = first.eval(p);
    for piece in &pieces[1..] {
        let value = piece.eval(p);
        if value > best_value + 1e-12 * (1.0 + best_value.abs()) {
            best = piece;
            best_value = value;
        }
    }
    Ok(best.slope.clone())
}

/// Pointwise maximum of affine pieces.
pub fn pointwise_max(pieces: &[LinearPiece], p: &[f64]) -> Result<f64> {
    pieces
        .iter()
        .map(|piece| piece.eval(p))
        .reduce(f64::max)
        .ok_or(Error::EmptyPieces)
}
