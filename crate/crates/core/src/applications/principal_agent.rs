//! Hiring agents and assigning effort levels.
//!
//! Each outcome hires a subset of agents at specific effort levels. A hired
//! agent bids minus its effort cost and predicts its own success; the
//! principal only observes success or failure. Welfare is a multilinear
//! function of the hired agents' success probabilities.

use serde::{Deserialize, Serialize};

use super::OUTCOME_GUARD;
use crate::error::{invalid, Error, Result};
use crate::general::{Factor, GeneralInstance, GeneralResult, OutcomeWelfare, Report, WelfareTerm};
use crate::simplex;

pub const FAIL: usize = 0;
pub const SUCCEED: usize = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffortLevel {
    pub name: String,
    pub cost: f64,
    pub success_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub efforts: Vec<EffortLevel>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ProjectWelfare {
    /// `value` times the probability that every hired agent succeeds; zero
    /// when nobody is hired.
    AllSucceed { value: f64 },
    /// `value` times the expected number of successes.
    PerSuccess { value: f64 },
}

impl Default for ProjectWelfare {
    fn default() -> Self {
        ProjectWelfare::AllSucceed { value: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrincipalAgentSpec {
    pub agents: Vec<AgentSpec>,
    #[serde(default)]
    pub project_welfare: ProjectWelfare,
}

#[derive(Debug, Clone)]
pub struct PrincipalAgentInstance {
    pub instance: GeneralInstance,
    /// `assignments[o][i]`: effort index of agent `i` under outcome `o`, or
    /// `None` if not hired.
    pub assignments: Vec<Vec<Option<usize>>>,
}

impl PrincipalAgentInstance {
    /// The report agent `agent` makes when declaring `efforts`.
    pub fn agent_report(&self, agent: usize, efforts: &[EffortLevel]) -> Report {
        agent_report(&self.assignments, agent, efforts)
    }

    /// Expected utility of a hired `agent` for every effort level it could
    /// actually exert, given the payment schedule in `result` and its true
    /// effort model `efforts`. Empty when the agent is not hired.
    pub fn effort_utilities(&self, result: &GeneralResult, agent: usize, efforts: &[EffortLevel]) -> Vec<f64> {
        if self.assignments[result.chosen_outcome][agent].is_none() {
            return Vec::new();
        }
        let schedule = &result.transfers[agent];
        efforts
            .iter()
            .map(|e| {
                let p = simplex::binary(e.success_prob);
                -e.cost - (p[FAIL] * schedule[FAIL] + p[SUCCEED] * schedule[SUCCEED])
            })
            .collect()
    }
}

fn agent_report(assignments: &[Vec<Option<usize>>], agent: usize, efforts: &[EffortLevel]) -> Report {
    let (values, predictions) = assignments
        .iter()
        .map(|a| match a[agent] {
            Some(k) => (-efforts[k].cost, simplex::binary(efforts[k].success_prob)),
            None => (0.0, vec![1.0]),
        })
        .unzip();
    Report::new(values, predictions)
}

fn outcome_id(spec: &PrincipalAgentSpec, assignment: &[Option<usize>]) -> String {
    let parts: Vec<String> = assignment
        .iter()
        .enumerate()
        .map(|(i, a)| match a {
            Some(k) => format!("{i}:{}", spec.agents[i].efforts[*k].name),
            None => format!("{i}:-"),
        })
        .collect();
    parts.join("|")
}

pub fn build_principal_agent_instance(spec: &PrincipalAgentSpec) -> Result<PrincipalAgentInstance> {
    if spec.agents.is_empty() {
        return Err(Error::InvalidInstance("no agents".into()));
    }
    let mut count: usize = 1;
    for (i, agent) in spec.agents.iter().enumerate() {
        if agent.efforts.is_empty() {
            return Err(Error::InvalidInstance(format!("agents[{i}] has no effort levels")));
        }
        for (k, e) in agent.efforts.iter().enumerate() {
            if !(e.cost >= 0.0 && e.cost.is_finite()) {
                return Err(invalid(
                    &format!("agents[{i}].efforts[{k}].cost"),
                    "must be finite and non-negative",
                ));
            }
            simplex::validate_probability(&format!("agents[{i}].efforts[{k}].success_prob"), e.success_prob)?;
        }
        count = count.saturating_mul(agent.efforts.len() + 1);
    }
    if count > OUTCOME_GUARD {
        return Err(Error::GuardExceeded {
            what: "hire/effort assignments".into(),
            count,
            limit: OUTCOME_GUARD,
        });
    }
    let value = match spec.project_welfare {
        ProjectWelfare::AllSucceed { value } | ProjectWelfare::PerSuccess { value } => value,
    };
    if !value.is_finite() {
        return Err(invalid("project_welfare.value", "must be finite"));
    }

    // Odometer over (skip, effort 0, effort 1, ...) for every agent.
    let mut assignments = Vec::with_capacity(count);
    let mut digits = vec![0usize; spec.agents.len()];
    loop {
        assignments.push(digits.iter().map(|&d| d.checked_sub(1)).collect::<Vec<_>>());
        let mut pos = 0;
        loop {
            if pos == digits.len() {
                break;
            }
            digits[pos] += 1;
            if digits[pos] <= spec.agents[pos].efforts.len() {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
        if pos == digits.len() {
            break;
        }
    }

    let outcomes = assignments.iter().map(|a| outcome_id(spec, a)).collect();
    let welfare = assignments
        .iter()
        .map(|a| {
            let hired: Vec<usize> = (0..a.len()).filter(|&i| a[i].is_some()).collect();
            let terms = match spec.project_welfare {
                ProjectWelfare::AllSucceed { .. } if hired.is_empty() => Vec::new(),
                ProjectWelfare::AllSucceed { value } => vec![WelfareTerm::Product {
                    coeff: value,
                    factors: hired.iter().map(|&i| Factor::new(i, SUCCEED)).collect(),
                }],
                ProjectWelfare::PerSuccess { value } => hired
                    .iter()
                    .map(|&i| WelfareTerm::Product {
                        coeff: value,
                        factors: vec![Factor::new(i, SUCCEED)],
                    })
                    .collect(),
            };
            OutcomeWelfare::Terms(terms)
        })
        .collect();
    let states = (0..spec.agents.len())
        .map(|i| {
            assignments
                .iter()
                .map(|a| match a[i] {
                    Some(_) => vec!["fail".to_string(), "succeed".to_string()],
                    None => vec!["idle".to_string()],
                })
                .collect()
        })
        .collect();
    let reports = spec
        .agents
        .iter()
        .enumerate()
        .map(|(i, agent)| agent_report(&assignments, i, &agent.efforts))
        .collect();
    let mut instance = GeneralInstance::new(outcomes, states, reports, welfare)?;
    // Without an agent, its task is treated as failed.
    for (o, a) in assignments.iter().enumerate() {
        for (i, slot) in a.iter().enumerate() {
            if slot.is_some() {
                instance.set_baseline(i, o, simplex::vertex(2, FAIL))?;
            }
        }
    }
    Ok(PrincipalAgentInstance { instance, assignments })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::general::{objectives, run_general};

    fn effort(name: &str, cost: f64, p: f64) -> EffortLevel {
        EffortLevel {
            name: name.into(),
            cost,
            success_prob: p,
        }
    }

    fn one_agent(value: f64, efforts: Vec<EffortLevel>) -> PrincipalAgentSpec {
        PrincipalAgentSpec {
            agents: vec![AgentSpec { efforts }],
            project_welfare: ProjectWelfare::AllSucceed { value },
        }
    }

    #[test]
    fn hires_at_high_effort() {
        let spec = one_agent(10.0, vec![effort("low", 1.0, 0.5), effort("high", 3.0, 0.9)]);
        let pa = build_principal_agent_instance(&spec).unwrap();
        assert_eq!(pa.instance.outcomes(), &["0:-", "0:low", "0:high"]);
        let w = objectives(&pa.instance);
        assert_eq!(w[0], 0.0);
        assert!((w[1] - 4.0).abs() < 1e-12);
        assert!((w[2] - 6.0).abs() < 1e-12);
        let r = run_general(&pa.instance).unwrap();
        assert_eq!(pa.assignments[r.chosen_outcome], vec![Some(1)]);
        let u = pa.effort_utilities(&r, 0, &spec.agents[0].efforts);
        assert!(u[1] >= u[0]);
    }

    #[test]
    fn zero_welfare_never_hires() {
        let spec = one_agent(0.0, vec![effort("low", 1.0, 0.5), effort("high", 3.0, 0.9)]);
        let pa = build_principal_agent_instance(&spec).unwrap();
        let r = run_general(&pa.instance).unwrap();
        assert_eq!(pa.assignments[r.chosen_outcome], vec![None]);
        assert!(pa.effort_utilities(&r, 0, &spec.agents[0].efforts).is_empty());
    }

    #[test]
    fn free_effort_maximizes_probability() {
        let spec = one_agent(
            5.0,
            vec![effort("a", 0.0, 0.3), effort("b", 0.0, 0.8), effort("c", 0.0, 0.6)],
        );
        let pa = build_principal_agent_instance(&spec).unwrap();
        let r = run_general(&pa.instance).unwrap();
        assert_eq!(pa.assignments[r.chosen_outcome], vec![Some(1)]);
    }

    #[test]
    fn outcome_count_and_guard() {
        let agent = AgentSpec {
            efforts: vec![effort("a", 0.0, 0.5), effort("b", 1.0, 0.7)],
        };
        let spec = PrincipalAgentSpec {
            agents: vec![agent.clone(); 3],
            project_welfare: ProjectWelfare::PerSuccess { value: 2.0 },
        };
        assert_eq!(build_principal_agent_instance(&spec).unwrap().assignments.len(), 27);
        let big = PrincipalAgentSpec {
            agents: vec![agent; 9],
            project_welfare: ProjectWelfare::default(),
        };
        assert!(matches!(
            build_principal_agent_instance(&big),
            Err(Error::GuardExceeded { count: 19683, .. })
        ));
    }
}
