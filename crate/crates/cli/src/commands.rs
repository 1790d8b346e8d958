use std::path::Path;

use ldsim::accuracy::{condorcet_accuracy, exact_accuracy_dp, mc_accuracy, tally_accuracy, AccuracyError, AccuracyResult};
use ldsim::delegation::Network;
use ldsim::dynamics::{run_simulation, DynamicsError};
use ldsim::io::{parse_network_doc, parse_profile, profile_to_map, write_epochs_csv, NetworkDoc, ProfileMap};
use ldsim::odp::{enumerate_profiles, solve_bruteforce, solve_local_search, OdpError};
use ldsim::scenarios::{make_example2, make_star, random_scenario, EdgeModel, ScenarioConfig, ScenarioError, StarParams};
use serde::Serialize;

use crate::manifest::{emit, RunManifest};
use crate::{AccuracyArgs, CliError, DynamicsArgs, JuryArgs, Kind, OdpArgs, ScenarioArgs};

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_network(path: &Path) -> Result<(NetworkDoc, Network), CliError> {
    let doc = parse_network_doc(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let network = doc.network().map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok((doc, network))
}

fn load_config(path: &Path) -> Result<ScenarioConfig, CliError> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}

fn scenario_error(e: ScenarioError) -> CliError {
    CliError::Usage(e.to_string())
}

pub fn scenario(args: &ScenarioArgs) -> Result<(), CliError> {
    let require_n = || args.n.ok_or_else(|| CliError::Usage(format!("--kind {:?} needs --n", args.kind)));
    let doc = match args.kind {
        Kind::Star => NetworkDoc::from_network(&make_star(StarParams::new(require_n()?, args.epsilon)).map_err(scenario_error)?),
        Kind::InvertedStar => {
            NetworkDoc::from_network(&make_star(StarParams::inverted(require_n()?, args.epsilon)).map_err(scenario_error)?)
        }
        Kind::Example2 => NetworkDoc::from_network(&make_example2()),
        Kind::Random => {
            let mut config = match &args.config {
                Some(path) => load_config(path)?,
                None => ScenarioConfig { n: require_n()?, ..Default::default() },
            };
            if let Some(n) = args.n {
                config.n = n;
            }
            if let Some(k) = args.k {
                config.edges = EdgeModel::RandomOutDegree { k };
            }
            if args.config.is_none() || args.seed != 0 {
                config.seed = args.seed;
            }
            NetworkDoc::from_scenario(&random_scenario(&config).map_err(scenario_error)?)
        }
    };
    let body = doc.to_json() + "\n";
    emit(args.out.as_deref(), &body, |out| {
        let m = RunManifest::new("scenario", out, args).seed(args.seed);
        match &args.config {
            Some(c) => m.input(c),
            None => m,
        }
    })
}

fn profile_error(e: AccuracyError) -> CliError {
    match e {
        AccuracyError::Resolve(r) => CliError::InvalidProfile(r.to_string()),
        other => CliError::Usage(other.to_string()),
    }
}

#[derive(Serialize)]
struct SingleReport {
    profile: ProfileMap,
    exact: AccuracyResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    monte_carlo: Option<AccuracyResult>,
}

#[derive(Serialize)]
struct ProfileAccuracy {
    profile: ProfileMap,
    accuracy: f64,
}

#[derive(Serialize)]
struct AllProfilesReport {
    count: usize,
    min: f64,
    max: f64,
    profiles: Vec<ProfileAccuracy>,
}

pub fn accuracy(args: &AccuracyArgs) -> Result<(), CliError> {
    let (doc, net) = load_network(&args.scenario)?;
    let body = if args.all_profiles {
        let mut profiles = enumerate_profiles(&net.graph, None).map_err(odp_error)?;
        let mut rows = Vec::new();
        while let Some((profile, tally)) = profiles.next_with_tally() {
            rows.push(ProfileAccuracy { profile: profile_to_map(&profile), accuracy: tally_accuracy(&tally, &net.competences) });
        }
        let min = rows.iter().map(|r| r.accuracy).fold(f64::INFINITY, f64::min);
        let max = rows.iter().map(|r| r.accuracy).fold(f64::NEG_INFINITY, f64::max);
        pretty(&AllProfilesReport { count: rows.len(), min, max, profiles: rows })
    } else {
        let profile = match &args.profile {
            Some(path) => parse_profile(&read(path)?, net.n()).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?,
            None => doc.profile().map_err(|e| CliError::Input(e.to_string()))?,
        };
        let exact = exact_accuracy_dp(&net.graph, &net.competences, &profile).map_err(profile_error)?;
        let monte_carlo = args
            .mc
            .map(|trials| mc_accuracy(&net.graph, &net.competences, &profile, trials, args.seed))
            .transpose()
            .map_err(profile_error)?;
        pretty(&SingleReport { profile: profile_to_map(&profile), exact, monte_carlo })
    };
    emit(args.out.as_deref(), &body, |out| {
        let m = RunManifest::new("accuracy", out, args).input(&args.scenario).seed(args.seed);
        match &args.profile {
            Some(p) => m.input(p),
            None => m,
        }
    })
}

fn odp_error(e: OdpError) -> CliError {
    match e {
        OdpError::SearchSpaceTooLarge { .. } => CliError::SearchTooLarge(e.to_string()),
        other => CliError::Usage(other.to_string()),
    }
}

#[derive(Serialize)]
struct OdpReport {
    method: &'static str,
    profile: ProfileMap,
    accuracy: f64,
    feasible_count: u64,
    cap: Option<u32>,
}

pub fn odp(args: &OdpArgs) -> Result<(), CliError> {
    let (_, net) = load_network(&args.scenario)?;
    let (method, solution) = if args.heuristic {
        let s = solve_local_search(&net.graph, &net.competences, args.cap, args.iters, args.seed).map_err(odp_error)?;
        ("local-search", s)
    } else {
        ("bruteforce", solve_bruteforce(&net.graph, &net.competences, args.cap).map_err(odp_error)?)
    };
    let report = OdpReport {
        method,
        profile: profile_to_map(&solution.profile),
        accuracy: solution.accuracy,
        feasible_count: solution.feasible_count,
        cap: solution.cap,
    };
    emit(args.out.as_deref(), &pretty(&report), |out| {
        RunManifest::new("odp", out, args).input(&args.scenario).seed(args.seed)
    })
}

pub fn dynamics(args: &DynamicsArgs) -> Result<(), CliError> {
    let config = load_config(&args.config)?;
    let records = run_simulation(&config, args.epochs, args.seed).map_err(|e| match e {
        DynamicsError::Scenario(s) => CliError::Input(format!("{}: {s}", args.config.display())),
        other => CliError::Usage(other.to_string()),
    })?;
    let mut buf = Vec::new();
    write_epochs_csv(&records, &mut buf).map_err(|e| CliError::Input(e.to_string()))?;
    let body = String::from_utf8(buf).expect("CSV is UTF-8");
    emit(args.out.as_deref(), &body, |out| {
        RunManifest::new("dynamics", out, args).input(&args.config).seed(args.seed)
    })
}

pub fn jury(args: &JuryArgs) -> Result<(), CliError> {
    if args.n_max == 0 {
        return Err(CliError::Usage("--n-max must be at least 1".into()));
    }
    let mut body = String::from("n,accuracy\n");
    for n in (1..=args.n_max).step_by(2) {
        let acc = condorcet_accuracy(n, args.p).map_err(|e| CliError::Usage(e.to_string()))?;
        body.push_str(&format!("{n},{acc}\n"));
    }
    emit(args.out.as_deref(), &body, |out| RunManifest::new("jury", out, args))
}
