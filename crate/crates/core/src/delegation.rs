//! Social graphs, delegation profiles and their resolution into guru weights.
//!
//! Agents are dense integer ids `0..n`. An edge `(i, j)` means agent `i` may
//! delegate its vote to agent `j`. A [`DelegationProfile`] assigns every agent
//! either [`Action::Direct`] or [`Action::DelegateTo`]; [`resolve`] follows each
//! chain to the agent that finally votes (the guru) and produces a [`Tally`].

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type AgentId = usize;

/// An agent and its probability of voting for the ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub id: AgentId,
    pub competence: f64,
}

/// One problem found by [`validate_graph`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    SelfLoop { agent: AgentId },
    EndpointOutOfRange { from: AgentId, to: AgentId },
    DuplicateEdge { from: AgentId, to: AgentId },
    CompetenceOutOfRange { agent: AgentId, competence: f64 },
    CompetenceCountMismatch { expected: usize, found: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SelfLoop { agent } => write!(f, "self-loop on agent {agent}"),
            Violation::EndpointOutOfRange { from, to } => {
                write!(f, "edge ({from}, {to}) has an endpoint out of range")
            }
            Violation::DuplicateEdge { from, to } => write!(f, "duplicate edge ({from}, {to})"),
            Violation::CompetenceOutOfRange { agent, competence } => {
                write!(f, "agent {agent} has competence {competence} outside [0, 1]")
            }
            Violation::CompetenceCountMismatch { expected, found } => {
                write!(f, "expected {expected} competences, found {found}")
            }
        }
    }
}

/// Result of [`validate_graph`]: empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks raw graph input without rejecting it.
pub fn validate_graph(n: usize, edges: &[(AgentId, AgentId)], competences: &[f64]) -> ValidationReport {
    let mut violations = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for &(from, to) in edges {
        if from == to {
            violations.push(Violation::SelfLoop { agent: from });
        }
        if from >= n || to >= n {
            violations.push(Violation::EndpointOutOfRange { from, to });
        }
        if !seen.insert((from, to)) {
            violations.push(Violation::DuplicateEdge { from, to });
        }
    }
    if competences.len() != n {
        violations.push(Violation::CompetenceCountMismatch {
            expected: n,
            found: competences.len(),
        });
    }
    for (agent, &competence) in competences.iter().enumerate() {
        if !(0.0..=1.0).contains(&competence) {
            violations.push(Violation::CompetenceOutOfRange { agent, competence });
        }
    }
    ValidationReport { violations }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid network: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
pub struct GraphError(pub Vec<Violation>);

/// Directed graph of permissible delegations.
///
/// Out-neighbor lists are kept sorted so that "lowest id first" orderings fall
/// out of plain iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SocialGraph {
    out: Vec<Vec<AgentId>>,
}

impl SocialGraph {
    pub fn new(n: usize, edges: &[(AgentId, AgentId)]) -> Result<Self, GraphError> {
        let report = validate_graph(n, edges, &vec![0.0; n]);
        if !report.is_valid() {
            return Err(GraphError(report.violations));
        }
        let mut out = vec![Vec::new(); n];
        for &(from, to) in edges {
            out[from].push(to);
        }
        for list in &mut out {
            list.sort_unstable();
        }
        Ok(Self { out })
    }

    /// Graph with `n` agents and no edges.
    pub fn empty(n: usize) -> Self {
        Self { out: vec![Vec::new(); n] }
    }

    pub fn n(&self) -> usize {
        self.out.len()
    }

    pub fn out_neighbors(&self, agent: AgentId) -> &[AgentId] {
        &self.out[agent]
    }

    pub fn has_edge(&self, from: AgentId, to: AgentId) -> bool {
        from < self.n() && self.out[from].binary_search(&to).is_ok()
    }

    /// All edges in `(from, to)` order.
    pub fn edges(&self) -> impl Iterator<Item = (AgentId, AgentId)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(from, tos)| tos.iter().map(move |&to| (from, to)))
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn in_degree(&self, agent: AgentId) -> usize {
        self.edges().filter(|&(_, to)| to == agent).count()
    }
}

/// A social graph together with the competence of every agent.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub graph: SocialGraph,
    pub competences: Vec<f64>,
}

impl Network {
    pub fn new(graph: SocialGraph, competences: Vec<f64>) -> Result<Self, GraphError> {
        let edges: Vec<_> = graph.edges().collect();
        let report = validate_graph(graph.n(), &edges, &competences);
        if !report.is_valid() {
            return Err(GraphError(report.violations));
        }
        Ok(Self { graph, competences })
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn agents(&self) -> impl Iterator<Item = Agent> + '_ {
        self.competences
            .iter()
            .enumerate()
            .map(|(id, &competence)| Agent { id, competence })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    Direct,
    DelegateTo(AgentId),
}

/// One action per agent. Ordering is lexicographic over the action vector
/// with `Direct` before any delegation and delegations ordered by target id.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DelegationProfile {
    actions: Vec<Action>,
}

impl DelegationProfile {
    pub fn from_actions(actions: Vec<Action>) -> Self {
        Self { actions }
    }

    pub fn all_direct(n: usize) -> Self {
        Self { actions: vec![Action::Direct; n] }
    }

    /// All-direct profile with the given `(from, to)` delegations applied.
    pub fn with_delegations(n: usize, delegations: &[(AgentId, AgentId)]) -> Self {
        let mut profile = Self::all_direct(n);
        for &(from, to) in delegations {
            profile.actions[from] = Action::DelegateTo(to);
        }
        profile
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn action(&self, agent: AgentId) -> Action {
        self.actions[agent]
    }

    pub fn set(&mut self, agent: AgentId, action: Action) {
        self.actions[agent] = action;
    }

    /// Delegations as `(from, to)` pairs in agent order.
    pub fn delegations(&self) -> impl Iterator<Item = (AgentId, AgentId)> + '_ {
        self.actions.iter().enumerate().filter_map(|(i, a)| match a {
            Action::DelegateTo(j) => Some((i, *j)),
            Action::Direct => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResolveError {
    #[error("delegation cycle through agent {agent}")]
    Cycle { agent: AgentId },
    #[error("agent {from} delegates to {to} but ({from}, {to}) is not an edge")]
    NonEdge { from: AgentId, to: AgentId },
    #[error("profile covers {profile} agents but the graph has {graph}")]
    SizeMismatch { profile: usize, graph: usize },
}

/// Resolved voting weights: every guru and the number of votes it casts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tally {
    weights: BTreeMap<AgentId, u32>,
    guru_of: Vec<AgentId>,
}

impl Tally {
    /// Guru ids in ascending order with their weights.
    pub fn weights(&self) -> &BTreeMap<AgentId, u32> {
        &self.weights
    }

    pub fn weight(&self, guru: AgentId) -> Option<u32> {
        self.weights.get(&guru).copied()
    }

    /// The agent whose direct vote carries `agent`'s vote.
    pub fn guru_of(&self, agent: AgentId) -> AgentId {
        self.guru_of[agent]
    }

    pub fn n(&self) -> usize {
        self.guru_of.len()
    }

    pub fn guru_count(&self) -> usize {
        self.weights.len()
    }

    pub fn max_weight(&self) -> u32 {
        self.weights.values().copied().max().unwrap_or(0)
    }

    pub fn gurus(&self) -> impl Iterator<Item = (AgentId, u32)> + '_ {
        self.weights.iter().map(|(&g, &w)| (g, w))
    }
}

/// Follows every delegation chain to its terminal direct voter.
pub fn resolve(graph: &SocialGraph, profile: &DelegationProfile) -> Result<Tally, ResolveError> {
    let n = graph.n();
    if profile.len() != n {
        return Err(ResolveError::SizeMismatch { profile: profile.len(), graph: n });
    }
    for (from, to) in profile.delegations() {
        if !graph.has_edge(from, to) {
            return Err(ResolveError::NonEdge { from, to });
        }
    }

    const UNSEEN: usize = usize::MAX;
    const ON_PATH: usize = usize::MAX - 1;
    let mut guru_of = vec![UNSEEN; n];
    let mut path = Vec::new();
    for start in 0..n {
        let mut cur = start;
        // Walk until we hit an agent with a known guru or a direct voter.
        let guru = loop {
            match guru_of[cur] {
                UNSEEN => {}
                ON_PATH => return Err(ResolveError::Cycle { agent: cur }),
                g => break g,
            }
            match profile.action(cur) {
                Action::Direct => break cur,
                Action::DelegateTo(next) => {
                    guru_of[cur] = ON_PATH;
                    path.push(cur);
                    cur = next;
                }
            }
        };
        guru_of[cur] = guru;
        for agent in path.drain(..) {
            guru_of[agent] = guru;
        }
    }

    let mut weights = BTreeMap::new();
    for &g in &guru_of {
        *weights.entry(g).or_insert(0) += 1;
    }
    Ok(Tally { weights, guru_of })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Correct,
    Incorrect,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::Correct => "correct",
            Decision::Incorrect => "incorrect",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VoteError {
    #[error("no vote given for guru {0}")]
    MissingVote(AgentId),
    #[error("vote given for {0}, which is not a guru")]
    ExtraVote(AgentId),
}

/// Per-guru votes (`true` = voted for the ground truth) and the aggregate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoteOutcome {
    pub votes: BTreeMap<AgentId, bool>,
    pub decision: Decision,
}

/// Weighted majority over `n` votes. A tie counts as incorrect.
pub fn weighted_majority(
    tally: &Tally,
    guru_votes: &BTreeMap<AgentId, bool>,
    n: usize,
) -> Result<Decision, VoteError> {
    if let Some(&extra) = guru_votes.keys().find(|g| !tally.weights.contains_key(g)) {
        return Err(VoteError::ExtraVote(extra));
    }
    let mut correct = 0u64;
    for (&guru, &weight) in &tally.weights {
        match guru_votes.get(&guru) {
            Some(true) => correct += u64::from(weight),
            Some(false) => {}
            None => return Err(VoteError::MissingVote(guru)),
        }
    }
    Ok(if 2 * correct > n as u64 {
        Decision::Correct
    } else {
        Decision::Incorrect
    })
}

/// Convenience wrapper bundling the votes with the decision they produce.
pub fn tally_votes(tally: &Tally, votes: BTreeMap<AgentId, bool>) -> Result<VoteOutcome, VoteError> {
    let decision = weighted_majority(tally, &votes, tally.n())?;
    Ok(VoteOutcome { votes, decision })
}
