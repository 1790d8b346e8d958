//! Probability that a delegation profile produces the correct decision.
//!
//! Gurus vote independently, each correct with its own competence, and cast
//! their resolved weight. The exact engine is a dynamic program over the
//! distribution of total correct weight; enumeration over all guru-vote
//! outcomes is kept as a cross-check for small instances. Monte Carlo
//! sampling derives each trial's random stream from `(seed, trial)` so results
//! do not depend on how trials are split across threads.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::delegation::{resolve, DelegationProfile, ResolveError, SocialGraph, Tally};

/// Largest guru count accepted by [`exact_accuracy_enum`].
pub const MAX_ENUM_GURUS: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactDp,
    ExactEnum,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AccuracyResult {
    pub value: f64,
    pub method: Method,
    /// Wald standard error; zero for exact methods.
    pub stderr: f64,
    /// Number of sampled polls; zero for exact methods.
    pub trials: u64,
}

impl AccuracyResult {
    fn exact(value: f64, method: Method) -> Self {
        Self { value: value.clamp(0.0, 1.0), method, stderr: 0.0, trials: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AccuracyError {
    #[error(transparent)]
    Resolve(#[from] ResolveError),
    #[error("{gurus} gurus exceed the enumeration limit of {MAX_ENUM_GURUS}")]
    TooLarge { gurus: usize },
    #[error("at least one trial is required")]
    NoTrials,
    #[error("competence vector has {found} entries, expected {expected}")]
    CompetenceMismatch { expected: usize, found: usize },
}

fn check_len(graph: &SocialGraph, competences: &[f64]) -> Result<(), AccuracyError> {
    if competences.len() != graph.n() {
        return Err(AccuracyError::CompetenceMismatch {
            expected: graph.n(),
            found: competences.len(),
        });
    }
    Ok(())
}

/// Exact probability that correct weight strictly exceeds `n / 2`, for an
/// already resolved tally.
pub fn tally_accuracy(tally: &Tally, competences: &[f64]) -> f64 {
    let n = tally.n();
    // dist[w] = P(total correct weight == w) over the gurus folded in so far.
    let mut dist = vec![0.0f64; n + 1];
    dist[0] = 1.0;
    let mut reach = 0usize;
    for (guru, weight) in tally.gurus() {
        let p = competences[guru];
        let w = weight as usize;
        for total in (0..=reach).rev() {
            let mass = dist[total];
            if mass == 0.0 {
                continue;
            }
            dist[total + w] += mass * p;
            dist[total] = mass * (1.0 - p);
        }
        reach += w;
    }
    let threshold = n / 2 + 1;
    dist[threshold..].iter().sum::<f64>().clamp(0.0, 1.0)
}

pub fn exact_accuracy_dp(
    graph: &SocialGraph,
    competences: &[f64],
    profile: &DelegationProfile,
) -> Result<AccuracyResult, AccuracyError> {
    check_len(graph, competences)?;
    let tally = resolve(graph, profile)?;
    Ok(AccuracyResult::exact(tally_accuracy(&tally, competences), Method::ExactDp))
}

/// Sums over all `2^g` guru-vote outcomes. Only practical for small `g`.
pub fn exact_accuracy_enum(
    graph: &SocialGraph,
    competences: &[f64],
    profile: &DelegationProfile,
) -> Result<AccuracyResult, AccuracyError> {
    check_len(graph, competences)?;
    let tally = resolve(graph, profile)?;
    let gurus: Vec<(f64, u64)> = tally
        .gurus()
        .map(|(g, w)| (competences[g], u64::from(w)))
        .collect();
    if gurus.len() > MAX_ENUM_GURUS {
        return Err(AccuracyError::TooLarge { gurus: gurus.len() });
    }
    let n = graph.n() as u64;
    let mut total = 0.0;
    for mask in 0u64..(1u64 << gurus.len()) {
        let mut prob = 1.0;
        let mut correct = 0u64;
        for (bit, &(p, w)) in gurus.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                prob *= p;
                correct += w;
            } else {
                prob *= 1.0 - p;
            }
        }
        if 2 * correct > n {
            total += prob;
        }
    }
    Ok(AccuracyResult::exact(total, Method::ExactEnum))
}

/// Random stream `stream` of the generator keyed by `seed`.
pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn mc_accuracy(
    graph: &SocialGraph,
    competences: &[f64],
    profile: &DelegationProfile,
    trials: u64,
    seed: u64,
) -> Result<AccuracyResult, AccuracyError> {
    check_len(graph, competences)?;
    if trials == 0 {
        return Err(AccuracyError::NoTrials);
    }
    let tally = resolve(graph, profile)?;
    let gurus: Vec<(f64, u64)> = tally
        .gurus()
        .map(|(g, w)| (competences[g], u64::from(w)))
        .collect();
    let n = graph.n() as u64;
    let base = ChaCha8Rng::seed_from_u64(seed);

    let hits: u64 = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = base.clone();
            rng.set_stream(trial);
            let correct: u64 = gurus
                .iter()
                .map(|&(p, w)| if rng.random::<f64>() < p { w } else { 0 })
                .sum();
            u64::from(2 * correct > n)
        })
        .sum();

    let value = hits as f64 / trials as f64;
    let stderr = (value * (1.0 - value) / trials as f64).sqrt();
    Ok(AccuracyResult { value, method: Method::MonteCarlo, stderr, trials })
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JuryError {
    #[error("jury size must be odd and positive, got {0}")]
    EvenOrZero(u64),
    #[error("competence {0} outside [0, 1]")]
    Competence(f64),
}

/// Probability that a simple majority of `n` independent voters, each correct
/// with probability `p`, is correct: `P(Binomial(n, p) >= (n + 1) / 2)`.
pub fn condorcet_accuracy(n: u64, p: f64) -> Result<f64, JuryError> {
    if n == 0 || n.is_multiple_of(2) {
        return Err(JuryError::EvenOrZero(n));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(JuryError::Competence(p));
    }
    if p == 0.0 || p == 1.0 {
        return Ok(p);
    }
    if p == 0.5 {
        return Ok(0.5);
    }
    // Log-space binomial terms, accumulated smallest-first after scaling by
    // the largest term.
    let (ln_p, ln_q) = (p.ln(), (1.0 - p).ln());
    let half = n.div_ceil(2);
    let mut ln_choose = 0.0f64;
    let mut ln_terms = Vec::with_capacity((n - half + 1) as usize);
    for k in 0..=n {
        if k > 0 {
            ln_choose += ((n - k + 1) as f64).ln() - (k as f64).ln();
        }
        if k >= half {
            ln_terms.push(ln_choose + k as f64 * ln_p + (n - k) as f64 * ln_q);
        }
    }
    let peak = ln_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut scaled: Vec<f64> = ln_terms.iter().map(|&t| (t - peak).exp()).collect();
    scaled.sort_by(f64::total_cmp);
    let sum: f64 = scaled.iter().sum();
    Ok((peak.exp() * sum).clamp(0.0, 1.0))
}
