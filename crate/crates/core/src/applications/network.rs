//! Reliable path procurement.
//!
//! Every edge belongs to its own bidder. An outcome is a simple `s`-`t`
//! path; an on-path edge's owner bids minus its cost and predicts whether
//! the edge fails, and the welfare is minus the failure penalty times the
//! probability that some edge on the path fails.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::OUTCOME_GUARD;
use crate::error::{invalid, Error, Result};
use crate::general::{Factor, GeneralInstance, OutcomeWelfare, Report, WelfareTerm};
use crate::simplex;

pub const FAIL: usize = 0;
pub const SUCCEED: usize = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkEdge {
    pub endpoints: (String, String),
    pub owner: usize,
    pub cost: f64,
    pub failure_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkProcurementSpec {
    pub nodes: Vec<String>,
    pub edges: Vec<NetworkEdge>,
    pub source: String,
    pub sink: String,
    pub failure_penalty: f64,
}

/// A compiled network together with the path behind each outcome.
#[derive(Debug, Clone)]
pub struct NetworkInstance {
    pub instance: GeneralInstance,
    /// Edge indices of each outcome's path, in traversal order.
    pub paths: Vec<Vec<usize>>,
    /// Owning bidder of each edge.
    pub owners: Vec<usize>,
    /// Edge owned by each bidder, if any.
    pub edge_of: Vec<Option<usize>>,
}

impl NetworkInstance {
    /// The report bidder `owner` makes when claiming `cost` and
    /// `failure_prob` for its edge.
    pub fn edge_report(&self, owner: usize, cost: f64, failure_prob: f64) -> Report {
        edge_report(
            &self.paths,
            self.edge_of.get(owner).copied().flatten(),
            cost,
            failure_prob,
        )
    }
}

fn edge_report(paths: &[Vec<usize>], edge: Option<usize>, cost: f64, failure_prob: f64) -> Report {
    let (values, predictions) = paths
        .iter()
        .map(|path| match edge {
            Some(e) if path.contains(&e) => (-cost, vec![failure_prob, 1.0 - failure_prob]),
            _ => (0.0, vec![1.0]),
        })
        .unzip();
    Report::new(values, predictions)
}

/// Enumerates simple paths from `source` to `sink` by depth-first search.
///
/// Edges are undirected; each path is a list of edge indices.
pub fn simple_paths(
    node_count: usize,
    edges: &[(usize, usize)],
    source: usize,
    sink: usize,
    guard: usize,
) -> Result<Vec<Vec<usize>>> {
    let mut adjacency = vec![Vec::new(); node_count];
    for (e, &(a, b)) in edges.iter().enumerate() {
        adjacency[a].push((e, b));
        if a != b {
            adjacency[b].push((e, a));
        }
    }
    let mut paths = Vec::new();
    let mut visited = vec![false; node_count];
    let mut stack = Vec::new();
    visited[source] = true;
    dfs(&adjacency, source, sink, &mut visited, &mut stack, &mut paths, guard)?;
    Ok(paths)
}

fn dfs(
    adjacency: &[Vec<(usize, usize)>],
    at: usize,
    sink: usize,
    visited: &mut [bool],
    stack: &mut Vec<usize>,
    paths: &mut Vec<Vec<usize>>,
    guard: usize,
) -> Result<()> {
    if at == sink {
        if paths.len() == guard {
            return Err(Error::GuardExceeded {
                what: "simple s-t paths".into(),
                count: guard + 1,
                limit: guard,
            });
        }
        paths.push(stack.clone());
        return Ok(());
    }
    for &(edge, next) in &adjacency[at] {
        if visited[next] {
            continue;
        }
        visited[next] = true;
        stack.push(edge);
        dfs(adjacency, next, sink, visited, stack, paths, guard)?;
        stack.pop();
        visited[next] = false;
    }
    Ok(())
}

pub(crate) struct Topology {
    pub endpoints: Vec<(usize, usize)>,
    pub source: usize,
    pub sink: usize,
    pub owners: Vec<usize>,
    pub edge_of: Vec<Option<usize>>,
}

pub(crate) fn topology<'a>(
    nodes: &[String],
    edges: impl Iterator<Item = (&'a (String, String), usize)>,
    source: &str,
    sink: &str,
) -> Result<Topology> {
    let mut node_index = BTreeMap::new();
    for (k, n) in nodes.iter().enumerate() {
        if node_index.insert(n.clone(), k).is_some() {
            return Err(Error::InvalidInstance(format!("duplicate node {n:?}")));
        }
    }
    let lookup = |n: &str, field: String| {
        node_index
            .get(n)
            .copied()
            .ok_or_else(|| Error::InvalidInstance(format!("{field}: unknown node {n:?}")))
    };
    let mut endpoints = Vec::new();
    let mut owners = Vec::new();
    let mut seen = BTreeSet::new();
    for (e, ((a, b), owner)) in edges.enumerate() {
        endpoints.push((lookup(a, format!("edges[{e}]"))?, lookup(b, format!("edges[{e}]"))?));
        if !seen.insert(owner) {
            return Err(Error::InvalidInstance(format!(
                "edges[{e}]: bidder {owner} already owns an edge"
            )));
        }
        owners.push(owner);
    }
    let source = lookup(source, "source".into())?;
    let sink = lookup(sink, "sink".into())?;
    if source == sink {
        return Err(Error::InvalidInstance("source and sink coincide".into()));
    }
    let bidders = owners.iter().map(|&o| o + 1).max().unwrap_or(0);
    let mut edge_of = vec![None; bidders];
    for (e, &o) in owners.iter().enumerate() {
        edge_of[o] = Some(e);
    }
    Ok(Topology {
        endpoints,
        source,
        sink,
        owners,
        edge_of,
    })
}

pub(crate) fn path_ids(paths: &[Vec<usize>], edge_count: usize) -> Vec<String> {
    let width = edge_count.saturating_sub(1).to_string().len();
    paths
        .iter()
        .map(|p| {
            let parts: Vec<String> = p.iter().map(|e| format!("e{e:0width$}")).collect();
            parts.join("-")
        })
        .collect()
}

pub fn build_network_instance(spec: &NetworkProcurementSpec) -> Result<NetworkInstance> {
    if !(spec.failure_penalty >= 0.0 && spec.failure_penalty.is_finite()) {
        return Err(invalid("failure_penalty", "must be finite and non-negative"));
    }
    for (e, edge) in spec.edges.iter().enumerate() {
        if !(edge.cost >= 0.0 && edge.cost.is_finite()) {
            return Err(invalid(&format!("edges[{e}].cost"), "must be finite and non-negative"));
        }
        simplex::validate_probability(&format!("edges[{e}].failure_prob"), edge.failure_prob)?;
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
    let penalty = spec.failure_penalty;
    let welfare = paths
        .iter()
        .map(|path| {
            OutcomeWelfare::Terms(vec![
                WelfareTerm::Constant { value: -penalty },
                WelfareTerm::Product {
                    coeff: penalty,
                    factors: path.iter().map(|&e| Factor::new(topo.owners[e], SUCCEED)).collect(),
                },
            ])
        })
        .collect();

    let mut states = Vec::new();
    let mut reports = Vec::new();
    for edge in &topo.edge_of {
        states.push(
            paths
                .iter()
                .map(|path| match edge {
                    Some(e) if path.contains(e) => vec!["fail".to_string(), "succeed".to_string()],
                    _ => vec!["idle".to_string()],
                })
                .collect::<Vec<_>>(),
        );
        reports.push(match *edge {
            Some(e) => edge_report(&paths, Some(e), spec.edges[e].cost, spec.edges[e].failure_prob),
            None => edge_report(&paths, None, 0.0, 0.0),
        });
    }
    let mut instance = GeneralInstance::new(outcomes, states, reports, welfare)?;
    for (bidder, edge) in topo.edge_of.iter().enumerate() {
        let Some(e) = edge else { continue };
        for (o, path) in paths.iter().enumerate() {
            if path.contains(e) {
                instance.set_baseline(bidder, o, simplex::vertex(2, FAIL))?;
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
