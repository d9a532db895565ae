//! Command-line surface for the goal-conditioned control toolkit:
//! load and validate environments, solve and evaluate the three
//! goal-reaching formulations, compute sensitivities and information
//! quantities, run the claim suite, search for counterexamples, and
//! pretrain tabular skills.
//!
//! Exit codes: 0 success, 1 claim failure, 2 input error.

mod format;
mod report;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use gclab_core::harness::{
    counterexample_search, random_suite, ClaimId, SearchConfig, SearchOutcome, SearchTarget,
    SuiteConfig,
};
use gclab_core::info::{goal_behavior_mi, phi_down, phi_up, BehaviorVariable};
use gclab_core::mdp::GoalDistribution;
use gclab_core::misl::{
    consistent_mapping, downstream_skill_distribution_at, mi_gap_bound, misl_objective,
    optimize_misl_tabular, uniform_prior, MislMode,
};
use gclab_core::policy::{compose_downstream_from, random_policy, Conditioning};
use gclab_core::sensitivity::{
    check_consistency, goal_sensitivity, objective_controllability, ConsistencyMode,
};
use gclab_core::values::{optimal_policy, solve_optimal, test_time_performance, Formulation};
use gclab_core::{FiniteMdp, GoalConditionedPolicy};

use report::sig12;

#[derive(Parser)]
#[command(
    name = "gclab",
    version,
    about = "Exact goal-conditioned control analysis for finite MDPs",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormulationKind {
    Pe,
    Et,
    Ow,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SpecKind {
    /// State at a geometric time (matches the persistent formulation).
    Sgamma,
    /// State at exactly step K (matches exact timing).
    Sk,
    /// Discounted first-visit vector (matches the opportunity window).
    Fvec,
    /// Full K-step trajectory.
    Traj,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicySource {
    /// Per-goal optimal branches assembled into one policy.
    Optimal,
    /// Seeded stochastic policy (requires --seed).
    Random,
    /// A single seeded branch reused for every goal (requires --seed).
    GoalIndependent,
}

#[derive(Subcommand)]
enum Command {
    /// Run the claim suite and write the report CSV.
    Verify {
        /// `all` or a comma-separated list of claim ids (e.g. P1,T1.1).
        #[arg(long, default_value = "all")]
        claims: String,
        /// Half-open seed range `a..b`, or a single seed.
        #[arg(long)]
        seeds: String,
        /// Comma-separated instance sizes.
        #[arg(long, default_value = "3,4,5")]
        sizes: String,
        /// Report CSV path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve a formulation for one goal (or all goals) of an environment.
    Solve {
        #[arg(long)]
        mdp: PathBuf,
        #[arg(long)]
        formulation: FormulationKind,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long = "K")]
        k: Option<usize>,
        /// Goal state id; omitted = table over all goals.
        #[arg(long)]
        goal: Option<String>,
        /// Start state id (defaults to the first state).
        #[arg(long)]
        start: Option<String>,
        /// Save the assembled optimal policy.
        #[arg(long)]
        policy_out: Option<PathBuf>,
    },
    /// Goal-sensitivity, controllability, and consistency of a policy.
    Sensitivity {
        #[arg(long)]
        mdp: PathBuf,
        #[arg(long)]
        formulation: FormulationKind,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long = "K")]
        k: Option<usize>,
        #[arg(long)]
        start: Option<String>,
        /// Policy file (`policy v1`); mutually exclusive with --policy-source.
        #[arg(long)]
        policy: Option<PathBuf>,
        #[arg(long, value_enum)]
        policy_source: Option<PolicySource>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Goal/skill-behavior mutual information with the matching bounds.
    Mi {
        #[arg(long)]
        mdp: PathBuf,
        #[arg(long)]
        spec: SpecKind,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long = "K")]
        k: Option<usize>,
        #[arg(long)]
        start: Option<String>,
        #[arg(long)]
        policy: Option<PathBuf>,
        #[arg(long, value_enum)]
        policy_source: Option<PolicySource>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Search small instances for a counterexample.
    Search {
        /// `formulation-disagreement` or `ow-control-vs-optimal`.
        #[arg(long)]
        target: String,
        #[arg(long)]
        seed: u64,
        /// Candidate budget.
        #[arg(long, default_value_t = 2000)]
        budget: usize,
        /// Write the witness environment here (`mdp v1`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabular skill pretraining and downstream evaluation.
    Misl {
        #[arg(long)]
        mdp: PathBuf,
        #[arg(long)]
        spec: SpecKind,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long = "K")]
        k: Option<usize>,
        #[arg(long = "n-z")]
        n_z: usize,
        #[arg(long)]
        start: Option<String>,
        /// `exhaustive` or `ascent`.
        #[arg(long, default_value = "ascent")]
        mode: String,
        #[arg(long)]
        seed: u64,
        /// Ascent sweep cap.
        #[arg(long, default_value_t = 100)]
        iterations: usize,
        #[arg(long)]
        policy_out: Option<PathBuf>,
    },
    /// Pretrain per formulation and tabulate sensitivity, the matching
    /// MI, and its bounds.
    Bounds {
        #[arg(long)]
        mdp: PathBuf,
        #[arg(long)]
        start: Option<String>,
        #[arg(long = "K", default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
        #[arg(long = "n-z", default_value_t = 2)]
        n_z: usize,
        #[arg(long)]
        seed: u64,
        /// Optional CSV output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Errors that map to exit code 2.
struct InputError(String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl<E: std::error::Error> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

fn fail(msg: impl Into<String>) -> InputError {
    InputError(msg.into())
}

fn cap_from_env() -> usize {
    std::env::var("GCLAB_CAP")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(1_000_000)
}

fn load_mdp(path: &Path) -> Result<FiniteMdp, InputError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| fail(format!("cannot read {}: {e}", path.display())))?;
    format::parse_mdp(&text).map_err(|e| fail(format!("{}: {e}", path.display())))
}

fn resolve_state(mdp: &FiniteMdp, name: &Option<String>) -> Result<usize, InputError> {
    match name {
        None => Ok(0),
        Some(n) => mdp
            .state_index(n)
            .ok_or_else(|| fail(format!("unknown state `{n}`"))),
    }
}

fn build_formulation(
    kind: FormulationKind,
    gamma: Option<f64>,
    k: Option<usize>,
) -> Result<Formulation, InputError> {
    let need_gamma = || gamma.ok_or_else(|| fail("this formulation requires --gamma"));
    let need_k = || k.ok_or_else(|| fail("this formulation requires --K"));
    let f = match kind {
        FormulationKind::Pe => Formulation::Pe {
            gamma: need_gamma()?,
        },
        FormulationKind::Et => Formulation::Et { k: need_k()? },
        FormulationKind::Ow => Formulation::Ow {
            k: need_k()?,
            gamma: need_gamma()?,
        },
    };
    Ok(f)
}

fn build_variable(
    kind: SpecKind,
    gamma: Option<f64>,
    k: Option<usize>,
) -> Result<BehaviorVariable, InputError> {
    let need_gamma = || gamma.ok_or_else(|| fail("this spec requires --gamma"));
    let need_k = || k.ok_or_else(|| fail("this spec requires --K"));
    Ok(match kind {
        SpecKind::Sgamma => BehaviorVariable::SGammaPlus {
            gamma: need_gamma()?,
        },
        SpecKind::Sk => BehaviorVariable::SK { k: need_k()? },
        SpecKind::Fvec => BehaviorVariable::FirstVisitVector {
            k: need_k()?,
            gamma: need_gamma()?,
        },
        SpecKind::Traj => BehaviorVariable::TrajectoryK { k: need_k()? },
    })
}

/// Loads or constructs the policy a command analyses. Seeded sources
/// refuse to run without an explicit --seed.
fn resolve_policy(
    mdp: &FiniteMdp,
    formulation: Option<&Formulation>,
    policy: &Option<PathBuf>,
    source: &Option<PolicySource>,
    seed: Option<u64>,
    cap: usize,
) -> Result<GoalConditionedPolicy, InputError> {
    match (policy, source) {
        (Some(_), Some(_)) => Err(fail("--policy and --policy-source are mutually exclusive")),
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| fail(format!("cannot read {}: {e}", path.display())))?;
            format::parse_policy(&text, mdp).map_err(|e| fail(format!("{}: {e}", path.display())))
        }
        (None, Some(PolicySource::Optimal)) => {
            let f =
                formulation.ok_or_else(|| fail("--policy-source optimal needs a formulation"))?;
            let _ = cap;
            optimal_policy(mdp, f, 10_000).map_err(InputError::from)
        }
        (None, Some(PolicySource::Random)) => {
            let seed = seed.ok_or_else(|| fail("--policy-source random requires --seed"))?;
            Ok(random_policy(mdp, Conditioning::Goals, 3, seed))
        }
        (None, Some(PolicySource::GoalIndependent)) => {
            let seed =
                seed.ok_or_else(|| fail("--policy-source goal-independent requires --seed"))?;
            let base = random_policy(mdp, Conditioning::Skills(1), 3, seed);
            let f = gclab_core::GoalToSkillMap::constant(mdp.n_states(), 0, 1);
            gclab_core::policy::compose_downstream(mdp, &base, &f).map_err(InputError::from)
        }
        (None, None) => Err(fail("provide --policy <file> or --policy-source")),
    }
}

fn parse_seeds(text: &str) -> Result<std::ops::Range<u64>, InputError> {
    if let Some((a, b)) = text.split_once("..") {
        let start: u64 = a
            .parse()
            .map_err(|_| fail(format!("bad seed range `{text}`")))?;
        let end: u64 = b
            .parse()
            .map_err(|_| fail(format!("bad seed range `{text}`")))?;
        if end <= start {
            return Ok(start..start);
        }
        Ok(start..end)
    } else {
        let s: u64 = text
            .parse()
            .map_err(|_| fail(format!("bad seed `{text}`")))?;
        Ok(s..s + 1)
    }
}

fn parse_claims(text: &str) -> Result<Option<Vec<ClaimId>>, InputError> {
    if text == "all" {
        return Ok(None);
    }
    let mut out = Vec::new();
    for token in text.split(',') {
        let token = token.trim();
        out.push(ClaimId::parse(token).ok_or_else(|| fail(format!("unknown claim id `{token}`")))?);
    }
    Ok(Some(out))
}

fn run_verify(
    claims: &str,
    seeds: &str,
    sizes: &str,
    out: &Option<PathBuf>,
    cap: usize,
) -> Result<u8, InputError> {
    let filter = parse_claims(claims)?;
    let seeds = parse_seeds(seeds)?;
    let sizes: Vec<usize> = sizes
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| fail(format!("bad size `{t}`")))
        })
        .collect::<Result<_, _>>()?;
    if sizes.contains(&0) {
        return Err(fail("sizes must be positive"));
    }
    let cfg = SuiteConfig { sizes, cap };
    let report = random_suite(seeds, &cfg, filter.as_deref());
    for check in &report.checks {
        println!(
            "{:<5} seed={:<3} {:<13} lhs={} rhs={} tol={}",
            check.claim.to_string(),
            check.seed,
            check.status.name(),
            sig12(check.lhs),
            sig12(check.rhs),
            sig12(check.tolerance),
        );
    }
    println!("{}", report.summary());
    if let Some(path) = out {
        report::write_atomically(path, &report::render_csv(&report))
            .map_err(|e| fail(format!("cannot write {}: {e}", path.display())))?;
        println!("report written to {}", path.display());
    }
    Ok(if report.all_passed() { 0 } else { 1 })
}

fn run_solve(
    mdp_path: &Path,
    kind: FormulationKind,
    gamma: Option<f64>,
    k: Option<usize>,
    goal: &Option<String>,
    start: &Option<String>,
    policy_out: &Option<PathBuf>,
) -> Result<u8, InputError> {
    let mdp = load_mdp(mdp_path)?;
    let form = build_formulation(kind, gamma, k)?;
    let start = resolve_state(&mdp, start)?;
    let goals: Vec<usize> = match goal {
        Some(name) => {
            vec![mdp
                .state_index(name)
                .ok_or_else(|| fail(format!("unknown goal `{name}`")))?]
        }
        None => (0..mdp.n_states()).collect(),
    };
    println!("{:<10} {:<14} value at start", "goal", "first action");
    let mut branches = Vec::new();
    for &g in &goals {
        let solved = solve_optimal(&mdp, &form, g, 10_000)?;
        let action = mdp.action_name(start, solved.branch.action_at(0, start));
        println!(
            "{:<10} {:<14} {}",
            mdp.state_name(g),
            action,
            sig12(solved.values[start])
        );
        branches.push(solved.branch);
    }
    if let Some(path) = policy_out {
        if goals.len() != mdp.n_states() {
            return Err(fail(
                "--policy-out needs the full per-goal table (omit --goal)",
            ));
        }
        let policy =
            GoalConditionedPolicy::from_deterministic(&mdp, mdp.states().to_vec(), &branches)
                .map_err(InputError::from)?;
        report::write_atomically(path, &format::serialize_policy(&policy, &mdp))
            .map_err(|e| fail(format!("cannot write {}: {e}", path.display())))?;
        println!("policy written to {}", path.display());
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn run_sensitivity(
    mdp_path: &Path,
    kind: FormulationKind,
    gamma: Option<f64>,
    k: Option<usize>,
    start: &Option<String>,
    policy: &Option<PathBuf>,
    source: &Option<PolicySource>,
    seed: Option<u64>,
    cap: usize,
) -> Result<u8, InputError> {
    let mdp = load_mdp(mdp_path)?;
    let form = build_formulation(kind, gamma, k)?;
    let s0 = resolve_state(&mdp, start)?;
    let pol = resolve_policy(&mdp, Some(&form), policy, source, seed, cap)?;
    if !pol.is_goal_conditioned(&mdp) {
        return Err(fail(
            "sensitivity needs a goal-conditioned policy (one branch per state)",
        ));
    }
    let u = GoalDistribution::uniform(mdp.n_states());
    let c = goal_sensitivity(&mdp, &form, &pol, s0, &u)?;
    let c_star = objective_controllability(&mdp, &form, s0, &u, cap)?;
    let j = test_time_performance(&mdp, &form, &pol, s0, &u)?;
    println!("start            {}", mdp.state_name(s0));
    println!("J (test-time)    {}", sig12(j));
    println!("C (sensitivity)  {}", sig12(c.c_value));
    println!(
        "C* (maximum)     {}{}",
        sig12(c_star.value),
        if c_star.exact {
            ""
        } else {
            "  [certified lower bound]"
        }
    );
    for mode in [
        ConsistencyMode::Plain,
        ConsistencyMode::Strong,
        ConsistencyMode::Stochastic,
    ] {
        if mode == ConsistencyMode::Stochastic && !matches!(form, Formulation::Ow { .. }) {
            continue;
        }
        let report = check_consistency(&mdp, &form, &pol, mode, &u)?;
        println!(
            "consistency {:<11} {} ({} violation(s))",
            format!("{mode:?}").to_lowercase(),
            if report.pass { "pass" } else { "fail" },
            report.violations.len()
        );
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn run_mi(
    mdp_path: &Path,
    spec: SpecKind,
    gamma: Option<f64>,
    k: Option<usize>,
    start: &Option<String>,
    policy: &Option<PathBuf>,
    source: &Option<PolicySource>,
    seed: Option<u64>,
    cap: usize,
) -> Result<u8, InputError> {
    let mdp = load_mdp(mdp_path)?;
    let var = build_variable(spec, gamma, k)?;
    let s0 = resolve_state(&mdp, start)?;
    let matching = var.matching_formulation();
    let pol = resolve_policy(&mdp, matching.as_ref(), policy, source, seed, cap)?;
    let n = mdp.n_states();
    if pol.is_goal_conditioned(&mdp) {
        let u = GoalDistribution::uniform(n);
        let mi = goal_behavior_mi(&mdp, &pol, s0, &u, &var, cap)?;
        println!("I(G; S')   {}", sig12(mi));
        if let Some(form) = &matching {
            let c = goal_sensitivity(&mdp, form, &pol, s0, &u)?.c_value;
            println!("C          {}", sig12(c));
            match var {
                BehaviorVariable::FirstVisitVector { .. } => {
                    println!(
                        "2C^2       {}",
                        sig12(gclab_core::info::ow_mi_lower_bound(c))
                    );
                }
                BehaviorVariable::SGammaPlus { .. } | BehaviorVariable::SK { .. } => {
                    let x = 1.0 / n as f64 + c;
                    let x = x.clamp(1e-15, 1.0);
                    println!("phi_down   {}", sig12(phi_down(n, x, None)?));
                    println!("phi_up     {}", sig12(phi_up(n, x, None)?));
                }
                BehaviorVariable::TrajectoryK { .. } => {}
            }
        }
    } else {
        // Skill-conditioned policy: the pretraining objective.
        let n_z = pol.n_branches();
        let mi = misl_objective(&mdp, &pol, s0, &uniform_prior(n_z), &var, cap)?;
        println!("I(Z; S')   {}", sig12(mi));
    }
    Ok(0)
}

fn run_search(
    target: &str,
    seed: u64,
    budget: usize,
    out: &Option<PathBuf>,
    cap: usize,
) -> Result<u8, InputError> {
    let target = SearchTarget::parse(target)
        .ok_or_else(|| fail(format!("unknown search target `{target}`")))?;
    let config = SearchConfig {
        budget,
        cap,
        ..SearchConfig::default()
    };
    let outcome = counterexample_search(target, &config, seed)?;
    match outcome {
        SearchOutcome::Witness(w) => {
            println!(
                "witness found after {} candidate(s): N={}, K={}, gamma={}, start={}",
                w.candidates_examined,
                w.mdp.n_states(),
                w.k,
                w.gamma,
                w.mdp.state_name(w.s0),
            );
            for (name, margin) in &w.margins {
                println!("  {name}: {}", sig12(*margin));
            }
            let replay_ok = w.replay(cap)?;
            println!(
                "certificate replay: {}",
                if replay_ok { "pass" } else { "fail" }
            );
            if let Some(path) = out {
                report::write_atomically(path, &format::serialize_mdp(&w.mdp))
                    .map_err(|e| fail(format!("cannot write {}: {e}", path.display())))?;
                println!("witness written to {}", path.display());
            }
            Ok(if replay_ok { 0 } else { 1 })
        }
        SearchOutcome::Exhausted { candidates } => {
            println!("no witness within the budget ({candidates} candidate(s) examined)");
            Ok(0)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_misl(
    mdp_path: &Path,
    spec: SpecKind,
    gamma: Option<f64>,
    k: Option<usize>,
    n_z: usize,
    start: &Option<String>,
    mode: &str,
    seed: u64,
    iterations: usize,
    policy_out: &Option<PathBuf>,
    cap: usize,
) -> Result<u8, InputError> {
    let mdp = load_mdp(mdp_path)?;
    let var = build_variable(spec, gamma, k)?;
    let s0 = resolve_state(&mdp, start)?;
    let mode = match mode {
        "exhaustive" => MislMode::Exhaustive,
        "ascent" => MislMode::Ascent {
            max_passes: iterations,
        },
        other => return Err(fail(format!("unknown mode `{other}`"))),
    };
    let (skills, objective) = optimize_misl_tabular(&mdp, &var, n_z, s0, mode, seed, cap)?;
    println!("skills     {n_z}");
    println!("objective  {}", sig12(objective));
    if let Some(form) = var.matching_formulation() {
        let f = consistent_mapping(&mdp, &form, &skills)?;
        let composed = compose_downstream_from(&mdp, &skills, &f, s0)?;
        let u = GoalDistribution::uniform(mdp.n_states());
        let j = test_time_performance(&mdp, &form, &composed, s0, &u)?;
        let c = goal_sensitivity(&mdp, &form, &composed, s0, &u)?.c_value;
        let p_f = downstream_skill_distribution_at(&f, &u, s0)?;
        println!("downstream J  {}", sig12(j));
        println!("downstream C  {}", sig12(c));
        if let Some(n_sprime) = var.outcome_cardinality(mdp.n_states()) {
            let gap = mi_gap_bound(&p_f, n_sprime)?;
            println!(
                "p_f gap    delta={} bound={}{}",
                sig12(gap.delta),
                sig12(gap.bound),
                if gap.applicable {
                    ""
                } else {
                    "  [inapplicable: more skills than outcomes]"
                }
            );
        }
    }
    if let Some(path) = policy_out {
        report::write_atomically(path, &format::serialize_policy(&skills, &mdp))
            .map_err(|e| fail(format!("cannot write {}: {e}", path.display())))?;
        println!("skill policy written to {}", path.display());
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn run_bounds(
    mdp_path: &Path,
    start: &Option<String>,
    k: usize,
    gamma: f64,
    n_z: usize,
    seed: u64,
    out: &Option<PathBuf>,
    cap: usize,
) -> Result<u8, InputError> {
    let mdp = load_mdp(mdp_path)?;
    let s0 = resolve_state(&mdp, start)?;
    let n = mdp.n_states();
    let u = GoalDistribution::uniform(n);
    let rows = [
        ("Pe", BehaviorVariable::SGammaPlus { gamma }),
        ("ET", BehaviorVariable::SK { k }),
        ("OW", BehaviorVariable::FirstVisitVector { k, gamma }),
    ];
    let mut csv = String::from("formulation,sensitivity,mi,lower,upper\n");
    println!(
        "{:<4} {:>18} {:>18} {:>18} {:>18}",
        "", "C", "matching MI", "lower bound", "upper bound"
    );
    for (name, var) in rows {
        let mode = MislMode::Ascent { max_passes: 100 };
        let (skills, _) = optimize_misl_tabular(&mdp, &var, n_z, s0, mode, seed, cap)?;
        let form = var
            .matching_formulation()
            .expect("closed formulations only");
        let f = consistent_mapping(&mdp, &form, &skills)?;
        let composed = compose_downstream_from(&mdp, &skills, &f, s0)?;
        let c = goal_sensitivity(&mdp, &form, &composed, s0, &u)?.c_value;
        let mi = goal_behavior_mi(&mdp, &composed, s0, &u, &var, cap)?;
        let (lower, upper) = match var {
            BehaviorVariable::FirstVisitVector { .. } => {
                (gclab_core::info::ow_mi_lower_bound(c), f64::NAN)
            }
            _ => {
                let x = 1.0 / n as f64 + c;
                {
                    let x = x.clamp(1e-15, 1.0);
                    (phi_down(n, x, None)?, phi_up(n, x, None)?)
                }
            }
        };
        let upper_text = if upper.is_nan() {
            "-".to_string()
        } else {
            sig12(upper)
        };
        println!(
            "{:<4} {:>18} {:>18} {:>18} {:>18}",
            name,
            sig12(c),
            sig12(mi),
            sig12(lower),
            upper_text
        );
        csv.push_str(&format!(
            "{name},{},{},{},{}\n",
            sig12(c),
            sig12(mi),
            sig12(lower),
            upper_text
        ));
    }
    if let Some(path) = out {
        report::write_atomically(path, &csv)
            .map_err(|e| fail(format!("cannot write {}: {e}", path.display())))?;
        println!("table written to {}", path.display());
    }
    Ok(0)
}

fn dispatch(cli: Cli) -> Result<u8, InputError> {
    let cap = cap_from_env();
    match &cli.command {
        Command::Verify {
            claims,
            seeds,
            sizes,
            out,
        } => run_verify(claims, seeds, sizes, out, cap),
        Command::Solve {
            mdp,
            formulation,
            gamma,
            k,
            goal,
            start,
            policy_out,
        } => run_solve(mdp, *formulation, *gamma, *k, goal, start, policy_out),
        Command::Sensitivity {
            mdp,
            formulation,
            gamma,
            k,
            start,
            policy,
            policy_source,
            seed,
        } => run_sensitivity(
            mdp,
            *formulation,
            *gamma,
            *k,
            start,
            policy,
            policy_source,
            *seed,
            cap,
        ),
        Command::Mi {
            mdp,
            spec,
            gamma,
            k,
            start,
            policy,
            policy_source,
            seed,
        } => run_mi(
            mdp,
            *spec,
            *gamma,
            *k,
            start,
            policy,
            policy_source,
            *seed,
            cap,
        ),
        Command::Search {
            target,
            seed,
            budget,
            out,
        } => run_search(target, *seed, *budget, out, cap),
        Command::Misl {
            mdp,
            spec,
            gamma,
            k,
            n_z,
            start,
            mode,
            seed,
            iterations,
            policy_out,
        } => run_misl(
            mdp,
            *spec,
            *gamma,
            *k,
            *n_z,
            start,
            mode,
            *seed,
            *iterations,
            policy_out,
            cap,
        ),
        Command::Bounds {
            mdp,
            start,
            k,
            gamma,
            n_z,
            seed,
            out,
        } => run_bounds(mdp, start, *k, *gamma, *n_z, *seed, out, cap),
    }
}

fn main() -> ExitCode {
    // Die quietly on a closed pipe (e.g. `gclab verify | head`) instead
    // of panicking mid-print.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
