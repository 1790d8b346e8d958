//! Optimal delegation: choose the profile that maximizes the probability of
//! a correct decision, optionally subject to a cap on any guru's weight.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::accuracy::{stream_rng, tally_accuracy};
use crate::delegation::{resolve, Action, DelegationProfile, SocialGraph, Tally};

/// Largest raw search space (product of per-agent option counts) that
/// exhaustive enumeration accepts.
pub const MAX_SEARCH_SPACE: u128 = 10_000_000;

/// Objective improvements smaller than this are treated as ties.
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OdpError {
    #[error("search space of {size} profiles exceeds the limit of {MAX_SEARCH_SPACE}")]
    SearchSpaceTooLarge { size: u128 },
    #[error("cap must be at least 1")]
    ZeroCap,
    #[error("local search needs at least one iteration")]
    NoIterations,
    #[error("competence vector has {found} entries, expected {expected}")]
    CompetenceMismatch { expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OdpSolution {
    #[serde(skip)]
    pub profile: DelegationProfile,
    pub accuracy: f64,
    /// Valid profiles whose accuracy was evaluated.
    pub feasible_count: u64,
    pub cap: Option<u32>,
}

fn options(graph: &SocialGraph, agent: usize) -> impl Iterator<Item = Action> + '_ {
    std::iter::once(Action::Direct).chain(graph.out_neighbors(agent).iter().map(|&j| Action::DelegateTo(j)))
}

/// Number of raw action vectors: the product of `1 + out-degree`.
pub fn search_space_size(graph: &SocialGraph) -> u128 {
    (0..graph.n())
        .map(|i| 1 + graph.out_neighbors(i).len() as u128)
        .try_fold(1u128, |acc, k| acc.checked_mul(k))
        .unwrap_or(u128::MAX)
}

fn within_cap(tally: &Tally, cap: Option<u32>) -> bool {
    cap.is_none_or(|c| tally.max_weight() <= c)
}

/// Walks every action vector in lexicographic order (agent 0 most
/// significant), yielding the acyclic ones that satisfy the cap.
pub struct ProfileEnumerator<'a> {
    graph: &'a SocialGraph,
    cap: Option<u32>,
    digits: Vec<usize>,
    done: bool,
}

impl<'a> ProfileEnumerator<'a> {
    fn current(&self) -> DelegationProfile {
        let actions = self
            .digits
            .iter()
            .enumerate()
            .map(|(i, &d)| match d {
                0 => Action::Direct,
                d => Action::DelegateTo(self.graph.out_neighbors(i)[d - 1]),
            })
            .collect();
        DelegationProfile::from_actions(actions)
    }

    fn advance(&mut self) {
        for i in (0..self.digits.len()).rev() {
            if self.digits[i] < self.graph.out_neighbors(i).len() {
                self.digits[i] += 1;
                return;
            }
            self.digits[i] = 0;
        }
        self.done = true;
    }

    /// Next valid profile together with its resolved tally.
    pub fn next_with_tally(&mut self) -> Option<(DelegationProfile, Tally)> {
        while !self.done {
            let profile = self.current();
            self.advance();
            if let Ok(tally) = resolve(self.graph, &profile) {
                if within_cap(&tally, self.cap) {
                    return Some((profile, tally));
                }
            }
        }
        None
    }
}

impl Iterator for ProfileEnumerator<'_> {
    type Item = DelegationProfile;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_with_tally().map(|(p, _)| p)
    }
}

pub fn enumerate_profiles(graph: &SocialGraph, cap: Option<u32>) -> Result<ProfileEnumerator<'_>, OdpError> {
    if cap == Some(0) {
        return Err(OdpError::ZeroCap);
    }
    let size = search_space_size(graph);
    if size > MAX_SEARCH_SPACE {
        return Err(OdpError::SearchSpaceTooLarge { size });
    }
    Ok(ProfileEnumerator { graph, cap, digits: vec![0; graph.n()], done: false })
}

fn check_competences(graph: &SocialGraph, competences: &[f64]) -> Result<(), OdpError> {
    if competences.len() != graph.n() {
        return Err(OdpError::CompetenceMismatch { expected: graph.n(), found: competences.len() });
    }
    Ok(())
}

/// Exhaustive search. Among equally good profiles the lexicographically
/// smallest action vector wins.
pub fn solve_bruteforce(graph: &SocialGraph, competences: &[f64], cap: Option<u32>) -> Result<OdpSolution, OdpError> {
    check_competences(graph, competences)?;
    let mut profiles = enumerate_profiles(graph, cap)?;
    let mut best: Option<(DelegationProfile, f64)> = None;
    let mut feasible_count = 0u64;
    while let Some((profile, tally)) = profiles.next_with_tally() {
        feasible_count += 1;
        let accuracy = tally_accuracy(&tally, competences);
        if best.as_ref().is_none_or(|&(_, b)| accuracy > b + TIE_TOLERANCE) {
            best = Some((profile, accuracy));
        }
    }
    // All-direct is always feasible for cap >= 1, so `best` is set.
    let (profile, accuracy) = best.expect("all-direct profile is feasible");
    Ok(OdpSolution { profile, accuracy, feasible_count, cap })
}

fn evaluate(graph: &SocialGraph, competences: &[f64], profile: &DelegationProfile, cap: Option<u32>) -> Option<f64> {
    let tally = resolve(graph, profile).ok()?;
    within_cap(&tally, cap).then(|| tally_accuracy(&tally, competences))
}

/// Hill climbing over single-agent action changes with random restarts.
///
/// Each evaluated neighbor counts as one iteration. When a full pass over the
/// neighborhood finds no improvement the search restarts from a fresh random
/// profile. The all-direct profile is kept as a fallback, so the result is
/// never worse than direct voting.
pub fn solve_local_search(
    graph: &SocialGraph,
    competences: &[f64],
    cap: Option<u32>,
    iterations: u64,
    seed: u64,
) -> Result<OdpSolution, OdpError> {
    check_competences(graph, competences)?;
    if iterations == 0 {
        return Err(OdpError::NoIterations);
    }
    if cap == Some(0) {
        return Err(OdpError::ZeroCap);
    }
    let n = graph.n();
    let mut rng = stream_rng(seed, 0);

    let direct = DelegationProfile::all_direct(n);
    let direct_accuracy = evaluate(graph, competences, &direct, cap).expect("all-direct is feasible");
    let mut best = (direct, direct_accuracy);
    let mut feasible_count = 1u64;

    let moves: Vec<(usize, Action)> = (0..n).flat_map(|i| options(graph, i).map(move |a| (i, a))).collect();
    if moves.len() == n {
        // No edges: nothing to search.
        return Ok(OdpSolution { profile: best.0, accuracy: best.1, feasible_count, cap });
    }

    let mut budget = iterations;
    while budget > 0 {
        let (mut current, mut current_accuracy) = random_start(graph, competences, cap, &mut rng);
        feasible_count += 1;
        budget -= 1;
        loop {
            let mut order = moves.clone();
            order.shuffle(&mut rng);
            let mut improved = false;
            for (agent, action) in order {
                if budget == 0 {
                    break;
                }
                if current.action(agent) == action {
                    continue;
                }
                budget -= 1;
                let previous = current.action(agent);
                current.set(agent, action);
                match evaluate(graph, competences, &current, cap) {
                    Some(acc) => {
                        feasible_count += 1;
                        if acc > current_accuracy + TIE_TOLERANCE {
                            current_accuracy = acc;
                            improved = true;
                            break;
                        }
                        current.set(agent, previous);
                    }
                    None => current.set(agent, previous),
                }
            }
            if !improved || budget == 0 {
                break;
            }
        }
        if current_accuracy > best.1 + TIE_TOLERANCE {
            best = (current, current_accuracy);
        }
    }
    Ok(OdpSolution { profile: best.0, accuracy: best.1, feasible_count, cap })
}

/// Agents in random order take a random option, reverting to direct when the
/// choice would create a cycle or break the cap.
fn random_start(
    graph: &SocialGraph,
    competences: &[f64],
    cap: Option<u32>,
    rng: &mut impl Rng,
) -> (DelegationProfile, f64) {
    let n = graph.n();
    let mut profile = DelegationProfile::all_direct(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for agent in order {
        let k = graph.out_neighbors(agent).len();
        let pick = rng.random_range(0..=k);
        if pick == 0 {
            continue;
        }
        profile.set(agent, Action::DelegateTo(graph.out_neighbors(agent)[pick - 1]));
        if evaluate(graph, competences, &profile, cap).is_none() {
            profile.set(agent, Action::Direct);
        }
    }
    let accuracy = evaluate(graph, competences, &profile, cap).expect("start is feasible by construction");
    (profile, accuracy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{make_example2, make_star, StarParams};

    #[test]
    fn example2_profile_count() {
        let net = make_example2();
        assert_eq!(search_space_size(&net.graph), 6);
        assert_eq!(enumerate_profiles(&net.graph, None).unwrap().count(), 6);
    }

    #[test]
    fn empty_graph_has_one_profile() {
        let graph = SocialGraph::empty(3);
        let all: Vec<_> = enumerate_profiles(&graph, None).unwrap().collect();
        assert_eq!(all, vec![DelegationProfile::all_direct(3)]);
    }

    #[test]
    fn two_cycle_filtered() {
        let graph = SocialGraph::new(2, &[(0, 1), (1, 0)]).unwrap();
        assert_eq!(enumerate_profiles(&graph, None).unwrap().count(), 3);
    }

    #[test]
    fn enumeration_is_lexicographic() {
        let net = make_example2();
        let all: Vec<_> = enumerate_profiles(&net.graph, None).unwrap().collect();
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(all, sorted);
    }

    #[test]
    fn guard_rejects_large_space() {
        // 24 agents each with 2 options: 2^24 > 10^7.
        let edges: Vec<_> = (0..24).map(|i| (i, 24)).collect();
        let graph = SocialGraph::new(25, &edges).unwrap();
        assert!(matches!(
            enumerate_profiles(&graph, None),
            Err(OdpError::SearchSpaceTooLarge { size: 16_777_216 })
        ));
        assert!(solve_bruteforce(&graph, &[0.5; 25], None).is_err());
    }

    #[test]
    fn example2_optimum() {
        let net = make_example2();
        let sol = solve_bruteforce(&net.graph, &net.competences, None).unwrap();
        assert!((sol.accuracy - 0.85).abs() < 1e-12);
        assert_eq!(sol.profile, DelegationProfile::with_delegations(5, &[(3, 1), (4, 2)]));
        assert_eq!(sol.feasible_count, 6);
    }

    #[test]
    fn star_optimum_with_and_without_cap() {
        let net = make_star(StarParams::new(7, 0.01)).unwrap();
        let free = solve_bruteforce(&net.graph, &net.competences, None).unwrap();
        assert!((free.accuracy - 0.98).abs() < 1e-12);
        assert_eq!(free.profile, DelegationProfile::with_delegations(7, &[(3, 4), (5, 4), (6, 4)]));
        let capped = solve_bruteforce(&net.graph, &net.competences, Some(3)).unwrap();
        assert!((capped.accuracy - 0.9702).abs() < 1e-12);
        assert_eq!(capped.profile.delegations().count(), 2);
        assert_eq!(capped.cap, Some(3));
    }

    #[test]
    fn local_search_example2() {
        let net = make_example2();
        let a = solve_local_search(&net.graph, &net.competences, None, 1000, 5).unwrap();
        assert!((a.accuracy - 0.85).abs() < 1e-12);
        let b = solve_local_search(&net.graph, &net.competences, None, 1000, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn local_search_without_edges() {
        let graph = SocialGraph::empty(4);
        let sol = solve_local_search(&graph, &[0.6; 4], None, 100, 1).unwrap();
        assert_eq!(sol.profile, DelegationProfile::all_direct(4));
        assert_eq!(solve_local_search(&graph, &[0.6; 4], None, 0, 1), Err(OdpError::NoIterations));
    }
}
