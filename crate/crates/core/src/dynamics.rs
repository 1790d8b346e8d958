//! Repeated polls with trust learning.
//!
//! Each poll, delegating agents pick the out-neighbor they trust most. After
//! the poll the ground truth is revealed and only gurus' votes are visible, so
//! an edge `(i, j)` is credited with a success when the chain starting at `i`
//! ended at a guru who voted correctly, and a failure otherwise. Trust in an
//! edge is the Laplace-smoothed success ratio `(s + 1) / (s + f + 2)`.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use thiserror::Error;

use crate::accuracy::{stream_rng, tally_accuracy};
use crate::delegation::{resolve, weighted_majority, Action, AgentId, Decision, DelegationProfile, ResolveError, SocialGraph};
use crate::scenarios::{classify_delegation, random_scenario, DelegationClass, Role, Scenario, ScenarioConfig, ScenarioError};

/// Success/failure counts behind a trust score.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrustCounter {
    pub successes: u64,
    pub failures: u64,
}

impl TrustCounter {
    pub fn score(&self) -> f64 {
        (self.successes as f64 + 1.0) / ((self.successes + self.failures) as f64 + 2.0)
    }

    pub fn observations(&self) -> u64 {
        self.successes + self.failures
    }

    pub fn record(&mut self, success: bool) {
        if success {
            self.successes += 1;
        } else {
            self.failures += 1;
        }
    }
}

/// Trust in every edge of a graph, plus each agent's record of its own
/// direct votes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrustState {
    // Aligned with `SocialGraph::out_neighbors`.
    edges: Vec<Vec<TrustCounter>>,
    own: Vec<TrustCounter>,
}

impl TrustState {
    /// Every counter starts at zero, i.e. score 0.5.
    pub fn new(graph: &SocialGraph) -> Self {
        Self {
            edges: (0..graph.n()).map(|i| vec![TrustCounter::default(); graph.out_neighbors(i).len()]).collect(),
            own: vec![TrustCounter::default(); graph.n()],
        }
    }

    pub fn edge(&self, graph: &SocialGraph, from: AgentId, to: AgentId) -> Option<TrustCounter> {
        let slot = graph.out_neighbors(from).binary_search(&to).ok()?;
        Some(self.edges[from][slot])
    }

    pub fn score(&self, graph: &SocialGraph, from: AgentId, to: AgentId) -> Option<f64> {
        self.edge(graph, from, to).map(|c| c.score())
    }

    fn edge_mut(&mut self, graph: &SocialGraph, from: AgentId, to: AgentId) -> &mut TrustCounter {
        let slot = graph.out_neighbors(from).binary_search(&to).expect("delegation uses an edge");
        &mut self.edges[from][slot]
    }

    /// Success record of the agent's own direct votes.
    pub fn own(&self, agent: AgentId) -> TrustCounter {
        self.own[agent]
    }

    fn covers(&self, graph: &SocialGraph) -> bool {
        self.edges.len() == graph.n()
            && self.edges.iter().enumerate().all(|(i, e)| e.len() == graph.out_neighbors(i).len())
    }
}

/// Builds this poll's delegations from current trust.
///
/// Agents are visited in an order shuffled by `seed`. Each delegator tries its
/// out-neighbors by descending trust (ties to the lowest id), skipping any that
/// would close a cycle or push the receiving guru above `cap`; if none is
/// usable it votes directly. Active agents also vote directly when their own
/// record beats their most trusted neighbor.
pub fn choose_delegations(
    trust: &TrustState,
    graph: &SocialGraph,
    roles: &[Role],
    cap: Option<u32>,
    seed: u64,
) -> DelegationProfile {
    assert!(trust.covers(graph), "trust state does not match graph");
    let n = graph.n();
    let mut profile = DelegationProfile::all_direct(n);
    // carried[i]: how many votes currently flow through agent i, itself included.
    let mut carried = vec![1u32; n];

    let mut order: Vec<AgentId> = (0..n).collect();
    order.shuffle(&mut stream_rng(seed, 0));

    for agent in order {
        if roles[agent] == Role::Direct {
            continue;
        }
        let mut candidates: Vec<(AgentId, f64)> = graph
            .out_neighbors(agent)
            .iter()
            .zip(&trust.edges[agent])
            .map(|(&j, c)| (j, c.score()))
            .collect();
        candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let Some(&(_, best_score)) = candidates.first() else {
            continue;
        };
        if roles[agent] == Role::Active && trust.own(agent).score() > best_score {
            continue;
        }

        for (target, _) in candidates {
            let Some(chain) = chain_to_guru(&profile, target, agent) else {
                continue;
            };
            let guru = *chain.last().expect("chain is non-empty");
            if cap.is_some_and(|c| carried[guru] + carried[agent] > c) {
                continue;
            }
            profile.set(agent, Action::DelegateTo(target));
            for node in chain {
                carried[node] += carried[agent];
            }
            break;
        }
    }
    profile
}

/// Agents from `start` to its current guru, or `None` if the chain reaches
/// `forbidden` (delegating there would close a cycle).
fn chain_to_guru(profile: &DelegationProfile, start: AgentId, forbidden: AgentId) -> Option<Vec<AgentId>> {
    let mut chain = vec![start];
    let mut cur = start;
    loop {
        if cur == forbidden {
            return None;
        }
        match profile.action(cur) {
            Action::Direct => return Some(chain),
            Action::DelegateTo(next) => {
                chain.push(next);
                cur = next;
            }
        }
    }
}

/// One poll's measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: u64,
    pub profile: DelegationProfile,
    pub result: Decision,
    /// Exact probability that this poll's profile decides correctly.
    pub accuracy: f64,
    /// Share of delegations that are negative-α delegations.
    pub neg_alpha_frac: f64,
    pub max_weight: u32,
    pub guru_count: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Resolve(#[from] ResolveError),
    #[error("at least one epoch is required")]
    NoEpochs,
}

pub fn run_epoch(
    state: &TrustState,
    scenario: &Scenario,
    epoch: u64,
    epoch_seed: u64,
) -> (EpochRecord, TrustState) {
    let graph = &scenario.network.graph;
    let profile = choose_delegations(state, graph, &scenario.roles, scenario.cap, epoch_seed);
    run_epoch_with_profile(state, scenario, profile, epoch, epoch_seed).expect("chosen profiles are valid")
}

/// Plays one poll under a given profile and learns from its outcome.
pub fn run_epoch_with_profile(
    state: &TrustState,
    scenario: &Scenario,
    profile: DelegationProfile,
    epoch: u64,
    epoch_seed: u64,
) -> Result<(EpochRecord, TrustState), ResolveError> {
    let graph = &scenario.network.graph;
    let competences = &scenario.network.competences;
    let tally = resolve(graph, &profile)?;
    let accuracy = tally_accuracy(&tally, competences);

    let mut rng = stream_rng(epoch_seed, 1);
    let truth: bool = rng.random();
    let votes: BTreeMap<AgentId, bool> = tally
        .gurus()
        .map(|(g, _)| {
            let ballot = if rng.random::<f64>() < competences[g] { truth } else { !truth };
            (g, ballot == truth)
        })
        .collect();
    let result = weighted_majority(&tally, &votes, graph.n()).expect("votes cover every guru");

    let mut next = state.clone();
    let mut delegations = 0usize;
    let mut negative = 0usize;
    for (from, to) in profile.delegations() {
        next.edge_mut(graph, from, to).record(votes[&tally.guru_of(from)]);
        delegations += 1;
        let class = classify_delegation(competences[from], competences[to], scenario.alpha)
            .expect("scenario alpha is validated");
        if class == DelegationClass::NegativeAlpha {
            negative += 1;
        }
    }
    for (&guru, &correct) in &votes {
        next.own[guru].record(correct);
    }

    let record = EpochRecord {
        epoch,
        result,
        accuracy,
        neg_alpha_frac: if delegations == 0 { 0.0 } else { negative as f64 / delegations as f64 },
        max_weight: tally.max_weight(),
        guru_count: tally.guru_count(),
        profile,
    };
    Ok((record, next))
}

/// Runs `epochs` polls on a fixed scenario starting from neutral trust.
pub fn simulate(scenario: &Scenario, epochs: u64, seed: u64) -> Result<Vec<EpochRecord>, DynamicsError> {
    if epochs == 0 {
        return Err(DynamicsError::NoEpochs);
    }
    let mut state = TrustState::new(&scenario.network.graph);
    let mut records = Vec::with_capacity(epochs as usize);
    for epoch in 0..epochs {
        let epoch_seed = stream_rng(seed, epoch).next_u64();
        let (record, next) = run_epoch(&state, scenario, epoch, epoch_seed);
        records.push(record);
        state = next;
    }
    Ok(records)
}

/// Generates the scenario described by `config` and simulates it.
pub fn run_simulation(config: &ScenarioConfig, epochs: u64, seed: u64) -> Result<Vec<EpochRecord>, DynamicsError> {
    let scenario = random_scenario(config)?;
    simulate(&scenario, epochs, seed)
}
