//! Path procurement with random edge delays.
//!
//! An on-path edge's states are the points of its delay distribution; the
//! welfare is minus the summed expected delay cost. Only concave delay costs
//! are accepted, since a convex cost of delay would make the welfare concave
//! in the predictions.

use serde::{Deserialize, Serialize};

use super::network::{path_ids, simple_paths, topology, NetworkInstance};
use super::OUTCOME_GUARD;
use crate::error::{invalid, Error, Result};
use crate::general::{Factor, GeneralInstance, OutcomeWelfare, Report, WelfareTerm};
use crate::simplex;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelayEdge {
    pub endpoints: (String, String),
    pub owner: usize,
    pub cost: f64,
    /// Support of the delay distribution.
    pub delays: Vec<f64>,
    /// Probability of each delay.
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelayNetworkSpec {
    pub nodes: Vec<String>,
    pub edges: Vec<DelayEdge>,
    pub source: String,
    pub sink: String,
}

/// Points per axis for the midpoint concavity test.
const CONCAVITY_POINTS: usize = 65;

/// Midpoint concavity test on `[lo, hi]`.
pub fn check_concave(cost: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> Result<()> {
    let grid = simplex::linspace(lo, hi, CONCAVITY_POINTS);
    for (i, &x) in grid.iter().enumerate() {
        for &y in &grid[i + 1..] {
            let mid = cost(0.5 * (x + y));
            let chord = 0.5 * (cost(x) + cost(y));
            if mid < chord - 1e-12 * (1.0 + chord.abs()) {
                return Err(invalid(
                    "cost_of_delay",
                    format!(
                        "not concave on [{lo}, {hi}]: cost({}) = {mid} is below the chord {chord} between {x} and {y}; \
                         the welfare would not be convex in the delay predictions",
                        0.5 * (x + y)
                    ),
                ));
            }
        }
    }
    Ok(())
}

pub fn build_delay_instance(spec: &DelayNetworkSpec, cost_of_delay: &dyn Fn(f64) -> f64) -> Result<NetworkInstance> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (e, edge) in spec.edges.iter().enumerate() {
        if !(edge.cost >= 0.0 && edge.cost.is_finite()) {
            return Err(invalid(&format!("edges[{e}].cost"), "must be finite and non-negative"));
        }
        if edge.delays.is_empty() || edge.delays.iter().any(|d| !d.is_finite()) {
            return Err(invalid(&format!("edges[{e}].delays"), "need at least one finite delay"));
        }
        simplex::validate(&format!("edges[{e}].probs"), &edge.probs, edge.delays.len())?;
        for &d in &edge.delays {
            lo = lo.min(d);
            hi = hi.max(d);
        }
    }
    if lo.is_finite() {
        check_concave(cost_of_delay, lo, hi)?;
    }

    let topo = topology(
        &spec.nodes,
        spec.edges.iter().map(|e| (&e.endpoints, e.owner)),
        &spec.source,
        &spec.sink,
    )?;
    let paths = simple_paths(spec.nodes.len(), &topo.endpoints, topo.source, topo.sink, OUTCOME_GUARD)?;
    if paths.is_empty() {
        return Err(Error::NoPath {
            source_node: spec.source.clone(),
            sink: spec.sink.clone(),
        });
    }
    let outcomes = path_ids(&paths, spec.edges.len());
    let welfare = paths
        .iter()
        .map(|path| {
            let mut terms = Vec::new();
            for &e in path {
                for (k, &d) in spec.edges[e].delays.iter().enumerate() {
                    terms.push(WelfareTerm::Product {
                        coeff: -cost_of_delay(d),
                        factors: vec![Factor::new(topo.owners[e], k)],
                    });
                }
            }
            OutcomeWelfare::Terms(terms)
        })
        .collect();

    let mut states = Vec::new();
    let mut reports = Vec::new();
    for edge in &topo.edge_of {
        let mut per_states = Vec::new();
        let mut values = Vec::new();
        let mut predictions = Vec::new();
        for path in &paths {
            match edge {
                Some(e) if path.contains(e) => {
                    let de = &spec.edges[*e];
                    per_states.push(de.delays.iter().map(|d| format!("delay={d}")).collect());
                    values.push(-de.cost);
                    predictions.push(de.probs.clone());
                }
                _ => {
                    per_states.push(vec!["idle".to_string()]);
                    values.push(0.0);
                    predictions.push(vec![1.0]);
                }
            }
        }
        states.push(per_states);
        reports.push(Report::new(values, predictions));
    }
    let mut instance = GeneralInstance::new(outcomes, states, reports, welfare)?;
    // Without a bidder, assume its edge suffers its costliest delay.
    for (bidder, edge) in topo.edge_of.iter().enumerate() {
        let Some(e) = *edge else { continue };
        let delays = &spec.edges[e].delays;
        let worst = (0..delays.len())
            .max_by(|&a, &b| cost_of_delay(delays[a]).total_cmp(&cost_of_delay(delays[b])))
            .expect("non-empty support");
        for (o, path) in paths.iter().enumerate() {
            if path.contains(&e) {
                instance.set_baseline(bidder, o, simplex::vertex(delays.len(), worst))?;
            }
        }
    }
    Ok(NetworkInstance {
        instance,
        paths,
        owners: topo.owners,
        edge_of: topo.edge_of,
    })
}
