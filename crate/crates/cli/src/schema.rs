//! The instance file format: one JSON document with a `kind` discriminator.

use std::path::Path;

use serde::{Deserialize, Serialize};
use truthscore::applications::{
    build_network_instance, build_principal_agent_instance, NetworkInstance, NetworkProcurementSpec,
    PrincipalAgentInstance, PrincipalAgentSpec,
};
use truthscore::general::{GeneralInstance, OutcomeWelfare, Report, WelfareTerm};
use truthscore::single_slot::SingleSlotBid;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceDoc {
    SingleSlot(SingleSlotDoc),
    General(GeneralDoc),
    Network(NetworkProcurementSpec),
    PrincipalAgent(PrincipalAgentSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingleSlotDoc {
    pub bids: Vec<SingleSlotBid>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneralDoc {
    pub outcomes: Vec<String>,
    pub bidders: Vec<BidderDoc>,
    /// Welfare terms per outcome. Omitted means zero welfare everywhere.
    #[serde(default)]
    pub welfare: Vec<Vec<WelfareTerm>>,
    /// `baselines[i][o]`: the prediction substituted for bidder `i` when it
    /// is removed. Omitted means uniform.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baselines: Option<Vec<Vec<Vec<f64>>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BidderDoc {
    /// State labels per outcome.
    pub states: Vec<Vec<String>>,
    pub values: Vec<f64>,
    pub predictions: Vec<Vec<f64>>,
}

impl GeneralDoc {
    pub fn to_instance(&self) -> CliResult<GeneralInstance> {
        let welfare = if self.welfare.is_empty() {
            vec![OutcomeWelfare::zero(); self.outcomes.len()]
        } else if self.welfare.len() != self.outcomes.len() {
            return Err(CliError::Validation(format!(
                "welfare: expected {} outcome entries, got {}",
                self.outcomes.len(),
                self.welfare.len()
            )));
        } else {
            self.welfare.iter().cloned().map(OutcomeWelfare::Terms).collect()
        };
        let states = self.bidders.iter().map(|b| b.states.clone()).collect();
        let reports = self
            .bidders
            .iter()
            .map(|b| Report::new(b.values.clone(), b.predictions.clone()))
            .collect();
        let mut instance = GeneralInstance::new(self.outcomes.clone(), states, reports, welfare)?;
        if let Some(baselines) = &self.baselines {
            if baselines.len() != self.bidders.len() {
                return Err(CliError::Validation(format!(
                    "baselines: expected {} bidders, got {}",
                    self.bidders.len(),
                    baselines.len()
                )));
            }
            for (i, per) in baselines.iter().enumerate() {
                if per.len() != self.outcomes.len() {
                    return Err(CliError::Validation(format!(
                        "baselines[{i}]: expected {} outcomes, got {}",
                        self.outcomes.len(),
                        per.len()
                    )));
                }
                for (o, b) in per.iter().enumerate() {
                    instance.set_baseline(i, o, b.clone())?;
                }
            }
        }
        Ok(instance)
    }

    /// Fails for closure-based welfare, which has no file representation.
    pub fn from_instance(instance: &GeneralInstance) -> CliResult<Self> {
        let welfare = instance
            .welfare_family()
            .iter()
            .enumerate()
            .map(|(o, w)| {
                w.terms()
                    .map(<[WelfareTerm]>::to_vec)
                    .ok_or_else(|| CliError::Validation(format!("welfare[{o}]: custom welfare cannot be written")))
            })
            .collect::<CliResult<Vec<_>>>()?;
        let bidders = instance
            .reports()
            .iter()
            .zip(instance.state_sets())
            .map(|(r, states)| BidderDoc {
                states: states.clone(),
                values: r.values.clone(),
                predictions: r.predictions.clone(),
            })
            .collect();
        Ok(Self {
            outcomes: instance.outcomes().to_vec(),
            bidders,
            welfare,
            baselines: Some(instance.baselines().to_vec()),
        })
    }
}

/// A validated instance, ready to run.
#[derive(Debug, Clone)]
pub enum Loaded {
    SingleSlot(Vec<SingleSlotBid>),
    General(GeneralInstance),
    Network(NetworkInstance),
    PrincipalAgent(PrincipalAgentInstance),
}

impl Loaded {
    pub fn kind(&self) -> &'static str {
        match self {
            Loaded::SingleSlot(_) => "single_slot",
            Loaded::General(_) => "general",
            Loaded::Network(_) => "network",
            Loaded::PrincipalAgent(_) => "principal_agent",
        }
    }

    /// The mechanism instance behind any kind other than single slot.
    pub fn general(&self) -> Option<&GeneralInstance> {
        match self {
            Loaded::SingleSlot(_) => None,
            Loaded::General(g) => Some(g),
            Loaded::Network(n) => Some(&n.instance),
            Loaded::PrincipalAgent(p) => Some(&p.instance),
        }
    }
}

pub fn parse_instance(path: &str, text: &str) -> CliResult<InstanceDoc> {
    serde_json::from_str(text).map_err(|e| CliError::Parse {
        path: path.to_string(),
        message: e.to_string(),
    })
}

pub fn validate(doc: &InstanceDoc) -> CliResult<Loaded> {
    Ok(match doc {
        InstanceDoc::SingleSlot(s) => {
            for (i, b) in s.bids.iter().enumerate() {
                b.validate(i)?;
            }
            if s.bids.is_empty() {
                return Err(truthscore::Error::EmptyBids.into());
            }
            Loaded::SingleSlot(s.bids.clone())
        }
        InstanceDoc::General(g) => Loaded::General(g.to_instance()?),
        InstanceDoc::Network(n) => Loaded::Network(build_network_instance(n)?),
        InstanceDoc::PrincipalAgent(p) => Loaded::PrincipalAgent(build_principal_agent_instance(p)?),
    })
}

/// Reads, parses and validates an instance file.
pub fn load_instance(path: &Path) -> CliResult<(InstanceDoc, Loaded)> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let doc = parse_instance(&path.display().to_string(), &text)?;
    let loaded = validate(&doc)?;
    Ok((doc, loaded))
}

pub fn write_instance(doc: &InstanceDoc) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("instance documents always serialize");
    s.push('\n');
    s
}
