//! File formats: the network/profile JSON document and the epoch CSV.
//!
//! ```json
//! {"agents":[{"id":0,"p":0.99}],"edges":[[4,5]],"profile":{"4":"5","0":"direct"},"roles":{"4":"preset"}}
//! ```
//!
//! `profile` and `roles` are optional. Agents missing from `profile` vote
//! directly; unknown keys anywhere are rejected.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::delegation::{Action, AgentId, DelegationProfile, GraphError, Network, SocialGraph};
use crate::dynamics::EpochRecord;
use crate::scenarios::{Role, Scenario};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("agent ids must be exactly 0..{n}: {problem}")]
    AgentIds { n: usize, problem: String },
    #[error("profile entry for agent {agent}: {problem}")]
    Profile { agent: AgentId, problem: String },
    #[error("roles must cover every agent exactly once")]
    Roles,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentEntry {
    pub id: AgentId,
    pub p: f64,
}

/// Profile as written in JSON: agent id → `"direct"` or the target id.
pub type ProfileMap = BTreeMap<AgentId, String>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDoc {
    pub agents: Vec<AgentEntry>,
    pub edges: Vec<[AgentId; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileMap>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roles: Option<BTreeMap<AgentId, Role>>,
}

impl NetworkDoc {
    pub fn from_network(network: &Network) -> Self {
        Self {
            agents: network.agents().map(|a| AgentEntry { id: a.id, p: a.competence }).collect(),
            edges: network.graph.edges().map(|(a, b)| [a, b]).collect(),
            profile: None,
            roles: None,
        }
    }

    pub fn from_scenario(scenario: &Scenario) -> Self {
        let mut doc = Self::from_network(&scenario.network);
        doc.roles = Some(scenario.roles.iter().copied().enumerate().collect());
        doc
    }

    pub fn with_profile(mut self, profile: &DelegationProfile) -> Self {
        self.profile = Some(profile_to_map(profile));
        self
    }

    pub fn network(&self) -> Result<Network, FormatError> {
        let n = self.agents.len();
        let mut competences = vec![None; n];
        for agent in &self.agents {
            let slot = competences.get_mut(agent.id).ok_or_else(|| FormatError::AgentIds {
                n,
                problem: format!("id {} out of range", agent.id),
            })?;
            if slot.replace(agent.p).is_some() {
                return Err(FormatError::AgentIds { n, problem: format!("id {} repeated", agent.id) });
            }
        }
        // n ids, each < n, no repeats: every slot is filled.
        let competences = competences.into_iter().map(Option::unwrap).collect();
        let edges: Vec<_> = self.edges.iter().map(|&[a, b]| (a, b)).collect();
        Ok(Network::new(SocialGraph::new(n, &edges)?, competences)?)
    }

    /// The embedded profile, or all-direct when absent.
    pub fn profile(&self) -> Result<DelegationProfile, FormatError> {
        match &self.profile {
            Some(map) => profile_from_map(map, self.agents.len()),
            None => Ok(DelegationProfile::all_direct(self.agents.len())),
        }
    }

    pub fn roles(&self) -> Result<Option<Vec<Role>>, FormatError> {
        let Some(map) = &self.roles else { return Ok(None) };
        let n = self.agents.len();
        if map.len() != n || map.keys().any(|&k| k >= n) {
            return Err(FormatError::Roles);
        }
        Ok(Some(map.values().copied().collect()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }
}

pub fn parse_network_doc(text: &str) -> Result<NetworkDoc, FormatError> {
    Ok(serde_json::from_str(text)?)
}

pub fn profile_to_map(profile: &DelegationProfile) -> ProfileMap {
    profile
        .actions()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let value = match a {
                Action::Direct => "direct".to_string(),
                Action::DelegateTo(j) => j.to_string(),
            };
            (i, value)
        })
        .collect()
}

pub fn profile_from_map(map: &ProfileMap, n: usize) -> Result<DelegationProfile, FormatError> {
    let mut profile = DelegationProfile::all_direct(n);
    for (&agent, value) in map {
        if agent >= n {
            return Err(FormatError::Profile { agent, problem: format!("no such agent (n = {n})") });
        }
        let action = match value.as_str() {
            "direct" => Action::Direct,
            other => {
                let target = other.parse::<AgentId>().map_err(|_| FormatError::Profile {
                    agent,
                    problem: format!("expected \"direct\" or an agent id, got {other:?}"),
                })?;
                Action::DelegateTo(target)
            }
        };
        profile.set(agent, action);
    }
    Ok(profile)
}

/// Parses a standalone profile file (the bare `profile` object).
pub fn parse_profile(text: &str, n: usize) -> Result<DelegationProfile, FormatError> {
    let map: ProfileMap = serde_json::from_str(text)?;
    profile_from_map(&map, n)
}

pub const EPOCH_CSV_HEADER: [&str; 6] = ["epoch", "result", "accuracy", "neg_alpha_frac", "max_weight", "guru_count"];

pub fn write_epochs_csv<W: Write>(records: &[EpochRecord], out: W) -> Result<(), FormatError> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(EPOCH_CSV_HEADER)?;
    for r in records {
        writer.write_record([
            r.epoch.to_string(),
            r.result.to_string(),
            r.accuracy.to_string(),
            r.neg_alpha_frac.to_string(),
            r.max_weight.to_string(),
            r.guru_count.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}
