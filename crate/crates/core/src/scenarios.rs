//! Named network structures, seeded random networks, and the α-delegation
//! rules.

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::accuracy::stream_rng;
use crate::delegation::{GraphError, Network, SocialGraph};

/// Default for the star's negligible constant.
pub const DEFAULT_EPSILON: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("star size must be odd and at least 3, got {0}")]
    StarSize(usize),
    #[error("epsilon must lie in (0, 0.5), got {0}")]
    Epsilon(f64),
    #[error("alpha must be non-negative, got {0}")]
    NegativeAlpha(f64),
    #[error("{name} must lie in [0, 1], got {value}")]
    Fraction { name: &'static str, value: f64 },
    #[error("guru weight cap must be at least 1")]
    ZeroCap,
    #[error("out-degree {k} is infeasible for {n} agents")]
    OutDegree { k: usize, n: usize },
    #[error("invalid competence distribution: {0}")]
    Competence(String),
    #[error("scenario needs at least one agent")]
    Empty,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarParams {
    pub n: usize,
    pub epsilon: f64,
    pub inverted: bool,
}

impl StarParams {
    pub fn new(n: usize, epsilon: f64) -> Self {
        Self { n, epsilon, inverted: false }
    }

    pub fn inverted(n: usize, epsilon: f64) -> Self {
        Self { n, epsilon, inverted: true }
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        if self.n < 3 || self.n.is_multiple_of(2) {
            return Err(ScenarioError::StarSize(self.n));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(ScenarioError::Epsilon(self.epsilon));
        }
        Ok(())
    }
}

/// Layout of a star with `n` agents: isolated agents, then the star whose
/// center is the second star member.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StarLayout {
    pub n: usize,
}

impl StarLayout {
    pub fn isolated(&self) -> std::ops::Range<usize> {
        0..(self.n - 1) / 2
    }

    pub fn center(&self) -> usize {
        (self.n - 1) / 2 + 1
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> {
        let center = self.center();
        ((self.n - 1) / 2..self.n).filter(move |&i| i != center)
    }
}

/// `(n-1)/2` isolated agents and a star of `(n+1)/2` agents whose leaves may
/// delegate to the center. Leaves have competence `1-ε`, the center `1-2ε`
/// and isolated agents `0`; the inverted variant uses `ε`, `2ε` and `1`.
pub fn make_star(params: StarParams) -> Result<Network, ScenarioError> {
    params.validate()?;
    let layout = StarLayout { n: params.n };
    let eps = params.epsilon;
    let (isolated_p, leaf_p, center_p) = if params.inverted {
        (1.0, eps, 2.0 * eps)
    } else {
        (0.0, 1.0 - eps, 1.0 - 2.0 * eps)
    };
    let mut competences = vec![leaf_p; params.n];
    for i in layout.isolated() {
        competences[i] = isolated_p;
    }
    competences[layout.center()] = center_p;
    let edges: Vec<_> = layout.leaves().map(|leaf| (leaf, layout.center())).collect();
    Ok(Network::new(SocialGraph::new(params.n, &edges)?, competences)?)
}

/// Five-agent network where delegating to the most competent neighbor is not
/// optimal. Agents are labelled 1..5 in the literature; here they are 0..4.
pub fn make_example2() -> Network {
    let graph = SocialGraph::new(5, &[(3, 1), (3, 2), (4, 2)]).expect("static graph");
    Network::new(graph, vec![1.0, 0.5, 0.7, 0.6, 0.5]).expect("static competences")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaModel {
    /// Delegate only to strictly more competent agents (by more than α).
    Kahng,
    /// Competent agents delegate upward, incompetent agents downward.
    Refined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelegationClass {
    PositiveAlpha,
    NegativeAlpha,
    NonAlpha,
}

fn check_alpha(alpha: f64) -> Result<(), ScenarioError> {
    if alpha >= 0.0 {
        Ok(())
    } else {
        Err(ScenarioError::NegativeAlpha(alpha))
    }
}

fn positive_alpha(p_i: f64, p_j: f64, alpha: f64) -> bool {
    p_i >= 0.5 && p_j > p_i + alpha
}

fn negative_alpha(p_i: f64, p_j: f64, alpha: f64) -> bool {
    p_i <= 0.5 && p_j < p_i - alpha
}

pub fn delegation_allowed(p_i: f64, p_j: f64, alpha: f64, model: AlphaModel) -> Result<bool, ScenarioError> {
    check_alpha(alpha)?;
    Ok(match model {
        AlphaModel::Kahng => p_j > p_i + alpha,
        AlphaModel::Refined => positive_alpha(p_i, p_j, alpha) || negative_alpha(p_i, p_j, alpha),
    })
}

/// At `p_i == 0.5` both branches are checked.
pub fn classify_delegation(p_i: f64, p_j: f64, alpha: f64) -> Result<DelegationClass, ScenarioError> {
    check_alpha(alpha)?;
    Ok(if positive_alpha(p_i, p_j, alpha) {
        DelegationClass::PositiveAlpha
    } else if negative_alpha(p_i, p_j, alpha) {
        DelegationClass::NegativeAlpha
    } else {
        DelegationClass::NonAlpha
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CompetenceSpec {
    Fixed { values: Vec<f64> },
    Beta { a: f64, b: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl Default for CompetenceSpec {
    fn default() -> Self {
        CompetenceSpec::Beta { a: 4.0, b: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EdgeModel {
    /// Every agent draws `k` distinct out-neighbors uniformly.
    RandomOutDegree { k: usize },
    /// Agents join in id order and link to `m` earlier agents with
    /// probability proportional to in-degree plus one.
    PreferentialAttachment { m: usize },
}

impl Default for EdgeModel {
    fn default() -> Self {
        EdgeModel::RandomOutDegree { k: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n: usize,
    pub competence: CompetenceSpec,
    pub edges: EdgeModel,
    /// Share of agents that delegate at all.
    pub preset_delegation_fraction: f64,
    /// Share of delegators whose delegation is fixed in advance.
    pub preset_share_of_delegations: f64,
    pub alpha: f64,
    pub cap: Option<u32>,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n: 100,
            competence: CompetenceSpec::default(),
            edges: EdgeModel::default(),
            preset_delegation_fraction: 0.90,
            preset_share_of_delegations: 0.95,
            alpha: 0.0,
            cap: None,
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.n == 0 {
            return Err(ScenarioError::Empty);
        }
        for (name, value) in [
            ("preset_delegation_fraction", self.preset_delegation_fraction),
            ("preset_share_of_delegations", self.preset_share_of_delegations),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ScenarioError::Fraction { name, value });
            }
        }
        check_alpha(self.alpha)?;
        if self.cap == Some(0) {
            return Err(ScenarioError::ZeroCap);
        }
        match self.edges {
            EdgeModel::RandomOutDegree { k } | EdgeModel::PreferentialAttachment { m: k } => {
                if k >= self.n {
                    return Err(ScenarioError::OutDegree { k, n: self.n });
                }
            }
        }
        match &self.competence {
            CompetenceSpec::Fixed { values } => {
                if values.len() != self.n {
                    return Err(ScenarioError::Competence(format!(
                        "{} fixed values for {} agents",
                        values.len(),
                        self.n
                    )));
                }
            }
            CompetenceSpec::Beta { a, b } => {
                if !(*a > 0.0 && *b > 0.0) {
                    return Err(ScenarioError::Competence(format!("Beta({a}, {b})")));
                }
            }
            CompetenceSpec::Uniform { lo, hi } => {
                if !(0.0 <= *lo && lo <= hi && *hi <= 1.0) {
                    return Err(ScenarioError::Competence(format!("uniform [{lo}, {hi}]")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    /// Delegates by trust alone, set up before any issue.
    Preset,
    /// Delegates, but reconsiders against its own record every poll.
    Active,
    /// Always votes directly.
    Direct,
}

/// A network plus the delegation regime that drives repeated polls.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub network: Network,
    pub roles: Vec<Role>,
    pub alpha: f64,
    pub cap: Option<u32>,
}

// Independent streams per generation stage so that, say, changing the edge
// model leaves competences untouched.
const STREAM_COMPETENCE: u64 = 0;
const STREAM_EDGES: u64 = 1;
const STREAM_ROLES: u64 = 2;

pub fn random_scenario(config: &ScenarioConfig) -> Result<Scenario, ScenarioError> {
    config.validate()?;
    let n = config.n;

    let mut rng = stream_rng(config.seed, STREAM_COMPETENCE);
    let competences: Vec<f64> = match &config.competence {
        CompetenceSpec::Fixed { values } => values.clone(),
        CompetenceSpec::Beta { a, b } => {
            let beta = Beta::new(*a, *b).map_err(|e| ScenarioError::Competence(e.to_string()))?;
            (0..n).map(|_| beta.sample(&mut rng)).collect()
        }
        CompetenceSpec::Uniform { lo, hi } => (0..n).map(|_| rng.random_range(*lo..=*hi)).collect(),
    };

    let mut rng = stream_rng(config.seed, STREAM_EDGES);
    let mut edges = Vec::new();
    match config.edges {
        EdgeModel::RandomOutDegree { k } => {
            for i in 0..n {
                // Sample from the n-1 other agents, skipping i.
                let mut picks: Vec<usize> = sample(&mut rng, n - 1, k)
                    .into_iter()
                    .map(|j| if j >= i { j + 1 } else { j })
                    .collect();
                picks.sort_unstable();
                edges.extend(picks.into_iter().map(|j| (i, j)));
            }
        }
        EdgeModel::PreferentialAttachment { m } => {
            let mut in_deg = vec![0usize; n];
            for i in 1..n {
                let mut chosen: Vec<usize> = Vec::with_capacity(m.min(i));
                while chosen.len() < m.min(i) {
                    let total: usize = (0..i).filter(|j| !chosen.contains(j)).map(|j| in_deg[j] + 1).sum();
                    let mut ticket = rng.random_range(0..total);
                    let pick = (0..i)
                        .filter(|j| !chosen.contains(j))
                        .find(|&j| {
                            let share = in_deg[j] + 1;
                            if ticket < share {
                                true
                            } else {
                                ticket -= share;
                                false
                            }
                        })
                        .expect("ticket within total");
                    chosen.push(pick);
                }
                chosen.sort_unstable();
                for j in chosen {
                    in_deg[j] += 1;
                    edges.push((i, j));
                }
            }
        }
    }

    let mut rng = stream_rng(config.seed, STREAM_ROLES);
    let roles = (0..n)
        .map(|_| {
            let delegates = rng.random::<f64>() < config.preset_delegation_fraction;
            let preset = rng.random::<f64>() < config.preset_share_of_delegations;
            match (delegates, preset) {
                (false, _) => Role::Direct,
                (true, true) => Role::Preset,
                (true, false) => Role::Active,
            }
        })
        .collect();

    let network = Network::new(SocialGraph::new(n, &edges)?, competences)?;
    Ok(Scenario { network, roles, alpha: config.alpha, cap: config.cap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn figure1_star() {
        let net = make_star(StarParams::new(7, 0.01)).unwrap();
        assert_eq!(net.competences, vec![0.0, 0.0, 0.0, 0.99, 0.98, 0.99, 0.99]);
        assert_eq!(net.graph.edges().collect::<Vec<_>>(), vec![(3, 4), (5, 4), (6, 4)]);
    }

    #[test]
    fn figure2_inverted_star() {
        let net = make_star(StarParams::inverted(7, 0.01)).unwrap();
        assert_eq!(net.competences, vec![1.0, 1.0, 1.0, 0.01, 0.02, 0.01, 0.01]);
    }

    #[test]
    fn smallest_star() {
        let net = make_star(StarParams::new(3, 0.25)).unwrap();
        assert_eq!(net.competences, vec![0.0, 0.75, 0.5]);
        assert_eq!(net.graph.edges().collect::<Vec<_>>(), vec![(1, 2)]);
    }

    #[test]
    fn star_rejects_bad_params() {
        assert_eq!(make_star(StarParams::new(6, 0.01)), Err(ScenarioError::StarSize(6)));
        assert_eq!(make_star(StarParams::new(1, 0.01)), Err(ScenarioError::StarSize(1)));
        assert_eq!(make_star(StarParams::new(7, 0.5)), Err(ScenarioError::Epsilon(0.5)));
        assert_eq!(make_star(StarParams::new(7, 0.0)), Err(ScenarioError::Epsilon(0.0)));
    }

    #[test]
    fn star_degree_structure() {
        for n in [3, 5, 7, 21, 101] {
            let net = make_star(StarParams::new(n, 0.01)).unwrap();
            let layout = StarLayout { n };
            let hubs: Vec<_> = (0..n).filter(|&i| net.graph.in_degree(i) == (n - 1) / 2).collect();
            assert_eq!(hubs, vec![layout.center()]);
            for i in layout.isolated() {
                assert!(net.graph.out_neighbors(i).is_empty());
                assert_eq!(net.graph.in_degree(i), 0);
            }
        }
    }

    #[test]
    fn example2_shape() {
        let net = make_example2();
        assert_eq!(net.graph.edge_count(), 3);
        assert_eq!(net.competences[2], 0.7);
        assert!(net.graph.out_neighbors(0).is_empty());
    }

    #[test]
    fn alpha_rules() {
        assert!(delegation_allowed(0.6, 0.9, 0.1, AlphaModel::Refined).unwrap());
        assert!(delegation_allowed(0.4, 0.2, 0.1, AlphaModel::Refined).unwrap());
        assert!(!delegation_allowed(0.1, 0.9, 0.1, AlphaModel::Refined).unwrap());
        assert!(delegation_allowed(0.1, 0.9, 0.1, AlphaModel::Kahng).unwrap());
        assert!(delegation_allowed(0.5, 0.2, 0.1, AlphaModel::Refined).unwrap());
        assert!(delegation_allowed(0.5, 0.8, 0.1, AlphaModel::Refined).unwrap());
        assert_eq!(
            delegation_allowed(0.5, 0.8, -0.1, AlphaModel::Kahng),
            Err(ScenarioError::NegativeAlpha(-0.1))
        );
    }

    #[test]
    fn classes() {
        assert_eq!(classify_delegation(0.7, 0.9, 0.1), Ok(DelegationClass::PositiveAlpha));
        assert_eq!(classify_delegation(0.3, 0.1, 0.1), Ok(DelegationClass::NegativeAlpha));
        assert_eq!(classify_delegation(0.3, 0.9, 0.1), Ok(DelegationClass::NonAlpha));
        assert!(classify_delegation(0.3, 0.9, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn refined_branches_disjoint(p_i in 0.0f64..=1.0, p_j in 0.0f64..=1.0, alpha in 1e-9f64..0.5) {
            let both = positive_alpha(p_i, p_j, alpha) && negative_alpha(p_i, p_j, alpha);
            prop_assert!(!both || p_i == 0.5);
            let class = classify_delegation(p_i, p_j, alpha).unwrap();
            let allowed = delegation_allowed(p_i, p_j, alpha, AlphaModel::Refined).unwrap();
            prop_assert_eq!(allowed, class != DelegationClass::NonAlpha);
        }
    }

    #[test]
    fn random_scenario_deterministic() {
        let config = ScenarioConfig { n: 100, seed: 1, ..Default::default() };
        assert_eq!(random_scenario(&config).unwrap(), random_scenario(&config).unwrap());
        let other = ScenarioConfig { seed: 2, ..config.clone() };
        assert_ne!(random_scenario(&config).unwrap(), random_scenario(&other).unwrap());
    }

    #[test]
    fn zero_delegation_fraction_means_all_direct() {
        let config = ScenarioConfig { n: 50, preset_delegation_fraction: 0.0, ..Default::default() };
        let s = random_scenario(&config).unwrap();
        assert!(s.roles.iter().all(|&r| r == Role::Direct));
    }

    #[test]
    fn preset_count_matches_expectation() {
        let config = ScenarioConfig { n: 1000, seed: 1, ..Default::default() };
        let s = random_scenario(&config).unwrap();
        let preset = s.roles.iter().filter(|&&r| r == Role::Preset).count() as f64;
        // Binomial(1000, 0.855): sd ≈ 11.1; allow 4 sd.
        let sd = (1000.0f64 * 0.855 * 0.145).sqrt();
        assert!((preset - 855.0).abs() < 4.0 * sd, "preset = {preset}");
    }

    #[test]
    fn random_out_degree_edges() {
        let config = ScenarioConfig { n: 30, edges: EdgeModel::RandomOutDegree { k: 4 }, ..Default::default() };
        let s = random_scenario(&config).unwrap();
        for i in 0..30 {
            assert_eq!(s.network.graph.out_neighbors(i).len(), 4);
            assert!(!s.network.graph.has_edge(i, i));
        }
        assert!(s.network.competences.iter().all(|p| (0.0..=1.0).contains(p)));
    }

    #[test]
    fn preferential_attachment_edges() {
        let config = ScenarioConfig {
            n: 40,
            edges: EdgeModel::PreferentialAttachment { m: 3 },
            competence: CompetenceSpec::Uniform { lo: 0.2, hi: 0.9 },
            ..Default::default()
        };
        let s = random_scenario(&config).unwrap();
        assert_eq!(s.network.graph.out_neighbors(0).len(), 0);
        assert_eq!(s.network.graph.out_neighbors(1), &[0]);
        for i in 3..40 {
            assert_eq!(s.network.graph.out_neighbors(i).len(), 3);
            assert!(s.network.graph.out_neighbors(i).iter().all(|&j| j < i));
        }
        assert!(s.network.competences.iter().all(|p| (0.2..=0.9).contains(p)));
    }

    #[test]
    fn infeasible_configs() {
        let too_dense = ScenarioConfig { n: 5, edges: EdgeModel::RandomOutDegree { k: 5 }, ..Default::default() };
        assert_eq!(random_scenario(&too_dense), Err(ScenarioError::OutDegree { k: 5, n: 5 }));
        let bad_fraction = ScenarioConfig { preset_delegation_fraction: 1.5, ..Default::default() };
        assert!(matches!(random_scenario(&bad_fraction), Err(ScenarioError::Fraction { .. })));
        let zero_cap = ScenarioConfig { cap: Some(0), ..Default::default() };
        assert_eq!(random_scenario(&zero_cap), Err(ScenarioError::ZeroCap));
        let fixed = ScenarioConfig {
            n: 3,
            competence: CompetenceSpec::Fixed { values: vec![0.5] },
            edges: EdgeModel::RandomOutDegree { k: 1 },
            ..Default::default()
        };
        assert!(matches!(random_scenario(&fixed), Err(ScenarioError::Competence(_))));
    }
}
