//! Simulation and analysis of liquid-democracy delegation networks with a
//! binary ground truth.
//!
//! * [`delegation`]: graphs, profiles, transitive resolution, weighted majority.
//! * [`accuracy`]: exact and sampled probability of a correct decision, and
//!   Condorcet jury curves.
//! * [`scenarios`]: star and Example 2 networks, random networks, α-delegation rules.
//! * [`odp`]: optimal delegation by exhaustive search or local search.
//! * [`dynamics`]: repeated polls with trust learning.
//! * [`io`]: JSON and CSV formats.
//!
//! ```
//! use ldsim::accuracy::exact_accuracy_dp;
//! use ldsim::delegation::DelegationProfile;
//! use ldsim::scenarios::make_example2;
//!
//! let net = make_example2();
//! let profile = DelegationProfile::with_delegations(5, &[(3, 1), (4, 2)]);
//! let acc = exact_accuracy_dp(&net.graph, &net.competences, &profile).unwrap();
//! assert!((acc.value - 0.85).abs() < 1e-12);
//! ```

pub mod accuracy;
pub mod delegation;
pub mod dynamics;
pub mod io;
pub mod odp;
pub mod scenarios;

pub use accuracy::{condorcet_accuracy, exact_accuracy_dp, exact_accuracy_enum, mc_accuracy, AccuracyResult};
pub use delegation::{resolve, weighted_majority, Action, AgentId, Decision, DelegationProfile, Network, SocialGraph, Tally};
pub use odp::{solve_bruteforce, solve_local_search, OdpSolution};
