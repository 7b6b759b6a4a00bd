//! Builders that compile application models into [`GeneralInstance`]s.
//!
//! [`GeneralInstance`]: crate::general::GeneralInstance

pub mod delay;
pub mod network;
pub mod principal_agent;
pub mod split_info;

/// Hard cap on enumerated outcomes (paths or assignments).
pub const OUTCOME_GUARD: usize = 10_000;

pub use delay::{build_delay_instance, DelayEdge, DelayNetworkSpec};
pub use network::{build_network_instance, simple_paths, NetworkEdge, NetworkInstance, NetworkProcurementSpec};
pub use principal_agent::{
    build_principal_agent_instance, AgentSpec, EffortLevel, PrincipalAgentInstance, PrincipalAgentSpec, ProjectWelfare,
};
pub use split_info::{build_split_info_instance, run_split_info, Merchant, QualityModel, SplitInfoDealSpec};
