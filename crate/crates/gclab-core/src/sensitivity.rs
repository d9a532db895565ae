//! Goal-sensitivity, consistency checks, objective controllability, and
//! channel-capacity empowerment.
//!
//! Goal-sensitivity averages the performance gain from conditioning on
//! the commanded goal rather than a random one. Maximizing it decomposes
//! per goal: the candidate branch for goal `g` contributes
//! `w(g)·(J(s,g,b) - A(b))` with `A(b)` the goal-agnostic value of `b`,
//! independently of the branches chosen for other goals. Exhaustive
//! maximization therefore enumerates branches once and takes per-goal
//! argmaxes, which is exact.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::math;
use crate::mdp::{FiniteMdp, GoalDistribution};
use crate::policy::{
    enumerate_deterministic_branches, Branch, DeterministicBranch, GoalConditionedPolicy,
    PolicyError,
};
use crate::values::{
    self, eval_j_branch, first_visit_time_pmf, solve_optimal, Formulation, ValueError,
};

#[derive(Debug, Clone, PartialEq)]
pub enum SensitivityError {
    Value(ValueError),
    Policy(PolicyError),
    BadParameter(String),
    UnsupportedStructure(String),
    CapExceeded { needed: u128, cap: usize },
}

impl fmt::Display for SensitivityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SensitivityError::Value(e) => write!(f, "{e}"),
            SensitivityError::Policy(e) => write!(f, "{e}"),
            SensitivityError::BadParameter(msg) => write!(f, "bad parameter: {msg}"),
            SensitivityError::UnsupportedStructure(msg) => write!(f, "{msg}"),
            SensitivityError::CapExceeded { needed, cap } => {
                write!(f, "search needs {needed} candidates, above the cap {cap}")
            }
        }
    }
}

impl core::error::Error for SensitivityError {}

impl From<ValueError> for SensitivityError {
    fn from(e: ValueError) -> Self {
        SensitivityError::Value(e)
    }
}

impl From<PolicyError> for SensitivityError {
    fn from(e: PolicyError) -> Self {
        SensitivityError::Policy(e)
    }
}

/// `J(s0, g, branch)` for every goal `g` at once. For the occupancy
/// formulations this is a single distribution computation.
pub fn branch_value_vector<B: Branch + ?Sized>(
    mdp: &FiniteMdp,
    formulation: &Formulation,
    branch: &B,
    s0: usize,
) -> Result<Vec<f64>, ValueError> {
    match formulation {
        Formulation::Pe { gamma } => {
            let (d, _) = values::behavior_distribution(
                mdp,
                branch,
                s0,
                &values::BehaviorSpec::SGammaPlus { gamma: *gamma },
            )?;
            Ok(d)
        }
        Formulation::Et { k } => {
            let (d, _) = values::behavior_distribution(
                mdp,
                branch,
                s0,
                &values::BehaviorSpec::SK { k: *k },
            )?;
            Ok(d)
        }
        Formulation::Ow { k, gamma } => {
            let mut out = Vec::with_capacity(mdp.n_states());
            for g in 0..mdp.n_states() {
                let pmf = first_visit_time_pmf(mdp, branch, s0, g, *k);
                let v: f64 = pmf
                    .iter()
                    .enumerate()
                    .map(|(i, &p)| p * math::powi(*gamma, i as u32))
                    .sum();
                out.push(v);
            }
            Ok(out)
        }
        Formulation::General(_) => {
            let mut out = Vec::with_capacity(mdp.n_states());
            for g in 0..mdp.n_states() {
                out.push(eval_j_branch(mdp, formulation, branch, s0, g)?.value);
            }
            Ok(out)
        }
    }
}

/// The goal-sensitivity of a policy at one state, with the full
/// per-(g, g') gain matrix `J(s,g,π_g) - J(s,g,π_{g'})`.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityResult {
    pub c_value: f64,
    pub gain: Vec<Vec<f64>>,
    pub p_goal: Vec<f64>,
}

pub fn goal_sensitivity(
    mdp: &FiniteMdp,
    formulation: &Formulation,
    policy: &GoalConditionedPolicy,
    s0: usize,
    p_goal: &GoalDistribution,
) -> Result<SensitivityResult, SensitivityError> {
    if !policy.is_goal_conditioned(mdp) {
        return Err(SensitivityError::Value(ValueError::NotGoalConditioned));
    }
    let n = mdp.n_states();
    // values[g'][g] = J(s0, g, branch g')
    let mut per_branch = Vec::with_capacity(n);
    for gp in 0..n {
        per_branch.push(branch_value_vector(
            mdp,
            formulation,
            &policy.branch(gp),
            s0,
        )?);
    }
    let w = p_goal.weights();
    let mut gain = vec![vec![0.0; n]; n];
    let mut c_value = 0.0;
    for g in 0..n {
        for gp in 0..n {
            let d = per_branch[g][g] - per_branch[gp][g];
            gain[g][gp] = d;
            c_value += w[g] * w[gp] * d;
        }
    }
    Ok(SensitivityResult {
        c_value,
        gain,
        p_goal: w.to_vec(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConsistencyMode {
    /// `J(s,g,π_g) ≥ J(s,g,π_{g'})` for all `s,g,g'`.
    Plain,
    /// With the factor `max{1, p(g')/p(g)}` on the right side.
    Strong,
    /// Tail dominance of the first-visit payoff against the mixture
    /// policy; defined for the windowed formulation only.
    Stochastic,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConsistencyViolation {
    Gap {
        s: usize,
        g: usize,
        g_prime: usize,
        lhs: f64,
        rhs: f64,
    },
    /// The strong factor `p(g')/p(g)` is undefined because `p(g) = 0`.
    UndefinedFactor { g: usize, g_prime: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub mode: ConsistencyMode,
    pub pass: bool,
    pub violations: Vec<ConsistencyViolation>,
}

const CONSISTENCY_SLACK: f64 = 1e-12;

pub fn check_consistency(
    mdp: &FiniteMdp,
    formulation: &Formulation,
    policy: &GoalConditionedPolicy,
    mode: ConsistencyMode,
    p_goal: &GoalDistribution,
) -> Result<ConsistencyReport, SensitivityError> {
    if !policy.is_goal_conditioned(mdp) {
        return Err(SensitivityError::Value(ValueError::NotGoalConditioned));
    }
    let n = mdp.n_states();
    let w = p_goal.weights();
    let mut violations = Vec::new();
    match mode {
        ConsistencyMode::Plain | ConsistencyMode::Strong => {
            for s in 0..n {
                // values[g'][g] = J(s, g, branch g')
                let mut per_branch = Vec::with_capacity(n);
                for gp in 0..n {
                    per_branch.push(branch_value_vector(
                        mdp,
                        formulation,
                        &policy.branch(gp),
                        s,
                    )?);
                }
                for g in 0..n {
                    for gp in 0..n {
                        let lhs = per_branch[g][g];
                        let raw = per_branch[gp][g];
                        let rhs = match mode {
                            ConsistencyMode::Plain => raw,
                            ConsistencyMode::Strong => {
                                if w[g] == 0.0 {
                                    if s == 0 {
                                        violations.push(ConsistencyViolation::UndefinedFactor {
                                            g,
                                            g_prime: gp,
                                        });
                                    }
                                    continue;
                                }
                                (w[gp] / w[g]).max(1.0) * raw
                            }
                            ConsistencyMode::Stochastic => unreachable!(),
                        };
                        if lhs + CONSISTENCY_SLACK < rhs {
                            violations.push(ConsistencyViolation::Gap {
                                s,
                                g,
                                g_prime: gp,
                                lhs,
                                rhs,
                            });
                        }
                    }
                }
            }
        }
        ConsistencyMode::Stochastic => {
            let (k, gamma) = match formulation {
                Formulation::Ow { k, gamma } => (*k, *gamma),
                _ => {
                    return Err(SensitivityError::BadParameter(
                        "stochastic consistency is defined for the windowed formulation"
                            .to_string(),
                    ))
                }
            };
            for s in 0..n {
                for g in 0..n {
                    for (t, lhs, rhs) in
                        stochastic_consistency_gaps(mdp, policy, w, s, g, k, gamma)?
                    {
                        if lhs + CONSISTENCY_SLACK < rhs {
                            violations.push(ConsistencyViolation::Gap {
                                s,
                                g,
                                g_prime: t,
                                lhs,
                                rhs,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(ConsistencyReport {
        mode,
        pass: violations.is_empty(),
        violations,
    })
}

/// Tail-probability comparisons `P_{π_g}(F_g ≥ r)` vs the mixture, one
/// triple `(t, lhs, rhs)` per distinct threshold `r = γ^(t-1)`.
pub fn stochastic_consistency_gaps(
    mdp: &FiniteMdp,
    policy: &GoalConditionedPolicy,
    weights: &[f64],
    s: usize,
    g: usize,
    k: usize,
    gamma: f64,
) -> Result<Vec<(usize, f64, f64)>, SensitivityError> {
    let n = mdp.n_states();
    // CDFs of the hit time under each branch from s.
    let mut cdfs = Vec::with_capacity(n);
    for gp in 0..n {
        let pmf = first_visit_time_pmf(mdp, &policy.branch(gp), s, g, k);
        let mut cdf = Vec::with_capacity(k);
        let mut acc = 0.0;
        for p in pmf {
            acc += p;
            cdf.push(acc);
        }
        cdfs.push(cdf);
    }
    // Thresholds r = γ^(t-1): t = 1..K for γ in (0,1); the support
    // collapses at the endpoints (γ = 0 keeps only t = 1, γ = 1 only t = K).
    let thresholds: Vec<usize> = if gamma == 0.0 {
        vec![1]
    } else if gamma == 1.0 {
        vec![k]
    } else {
        (1..=k).collect()
    };
    let mut out = Vec::with_capacity(thresholds.len());
    for t in thresholds {
        let lhs = cdfs[g][t - 1];
        let rhs: f64 = weights
            .iter()
            .zip(cdfs.iter())
            .map(|(&w, cdf)| w * cdf[t - 1])
            .sum();
        out.push((t, lhs, rhs));
    }
    Ok(out)
}

/// Maximal goal-sensitivity attainable at a state, with an exactness
/// flag: `false` means the value is a certified lower bound (cap hit, or
/// the stationary restriction for the persistent formulation under a
/// non-uniform goal distribution).
#[derive(Debug, Clone, PartialEq)]
pub struct ControllabilityResult {
    pub value: f64,
    pub exact: bool,
    pub detail: String,
}

fn formulation_slots(formulation: &Formulation) -> usize {
    match formulation {
        Formulation::Pe { .. } => 1,
        Formulation::Et { k } | Formulation::Ow { k, .. } => *k,
        Formulation::General(spec) => spec.horizon + 1,
    }
}

/// Per-goal maxima of `J(s0, g, b) - A(b)` over deterministic branches,
/// with the argmax branches. Exhaustive under the cap.
fn per_goal_incontrol_maxima(
    mdp: &FiniteMdp,
    formulation: &Formulation,
    s0: usize,
    p_goal: &GoalDistribution,
    cap: usize,
) -> Result<(Vec<DeterministicBranch>, Vec<f64>), SensitivityError> {
    let slots = formulation_slots(formulation);
    let n = mdp.n_states();
    let w = p_goal.weights();
    let mut best_margin = vec![f64::NEG_INFINITY; n];
    let mut best_branch: Vec<Option<DeterministicBranch>> = vec![None; n];
    for branch in enumerate_deterministic_branches(mdp, slots, slots == 1, cap)? {
        let jvec = branch_value_vector(mdp, formulation, &branch, s0)?;
        let agnostic: f64 = w.iter().zip(jvec.iter()).map(|(&wi, &ji)| wi * ji).sum();
        for g in 0..n {
            let margin = jvec[g] - agnostic;
            if margin > best_margin[g] + 1e-15 {
                best_margin[g] = margin;
                best_branch[g] = Some(branch.clone());
            }
        }
    }
    let branches = best_branch
        .into_iter()
        .map(|b| b.expect("enumeration is nonempty"))
        .collect();
    Ok((branches, best_margin))
}

/// Objective controllability: the maximum of goal-sensitivity over all
/// policies. Uniform-goal Pe/ET reduce exactly to `J*(s) - 1/N`; the
/// windowed formulation (and non-uniform goal weights) maximize per goal
/// over enumerated deterministic branches.
pub fn objective_controllability(
    mdp: &FiniteMdp,
    formulation: &Formulation,
    s0: usize,
    p_goal: &GoalDistribution,
    cap: usize,
) -> Result<ControllabilityResult, SensitivityError> {
    let n = mdp.n_states();
    let uniform = p_goal.is_uniform();
    match formulation {
        Formulation::Pe { .. } | Formulation::Et { .. } if uniform => {
            let mut j_star = 0.0;
            for g in 0..n {
                j_star += solve_optimal(mdp, formulation, g, usize::MAX)?.values[s0] / n as f64;
            }
            Ok(ControllabilityResult {
                value: j_star - 1.0 / n as f64,
                exact: true,
                detail: "per-goal optimal values".to_string(),
            })
        }
        _ => match per_goal_incontrol_maxima(mdp, formulation, s0, p_goal, cap) {
            Ok((_, margins)) => {
                let value: f64 = p_goal
                    .weights()
                    .iter()
                    .zip(margins.iter())
                    .map(|(&w, &m)| w * m)
                    .sum();
                // Non-stationary branches could in principle beat the
                // stationary ones enumerated for Pe when goal weights are
                // non-uniform; flag that case as a bound.
                let exact = !matches!(formulation, Formulation::Pe { .. }) || uniform;
                Ok(ControllabilityResult {
                    value,
                    exact,
                    detail: "per-goal enumeration of deterministic branches".to_string(),
                })
            }
            Err(SensitivityError::Policy(PolicyError::CapExceeded { needed, cap })) => {
                let policy = values::optimal_policy(mdp, formulation, usize::MAX)?;
                let c = goal_sensitivity(mdp, formulation, &policy, s0, p_goal)?.c_value;
                Ok(ControllabilityResult {
                    value: c,
                    exact: false,
                    detail: format!(
                        "lower bound from the assembled optimal policy; enumeration needs {needed} > cap {cap}"
                    ),
                })
            }
            Err(e) => Err(e),
        },
    }
}

/// One-step controllability at `s`: the average over actions of how
/// distinct each action's row is from the others, restricted to the
/// successor states that the action wins (argmax over actions, lowest
/// index on ties).
pub fn one_step_controllability(mdp: &FiniteMdp, s: usize) -> f64 {
    let n = mdp.n_states();
    let n_a = mdp.n_actions(s);
    // winner[sp] = argmax_a p(sp | s, a)
    let mut winner = vec![0usize; n];
    for (sp, win) in winner.iter_mut().enumerate() {
        let mut best = f64::NEG_INFINITY;
        for a in 0..n_a {
            let p = mdp.prob(s, a, sp);
            if p > best + 1e-15 {
                best = p;
                *win = a;
            }
        }
    }
    let mut total = 0.0;
    for a in 0..n_a {
        let mut delta = 0.0;
        for ap in 0..n_a {
            for sp in 0..n {
                if winner[sp] == a {
                    delta += (mdp.prob(s, a, sp) - mdp.prob(s, ap, sp)).abs();
                }
            }
        }
        total += delta / n_a as f64;
    }
    total / n as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpowermentResult {
    /// Channel capacity estimate in nats.
    pub value: f64,
    /// Width of the capacity bracket at termination.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// `K`-step empowerment: the capacity of the channel from open-loop
/// action sequences to the state at step `K`, solved by alternating
/// maximization to a 1e-10 capacity bracket. Deterministic MDPs
/// short-circuit to `log |reachable in exactly K steps|`.
pub fn klyubin_empowerment(
    mdp: &FiniteMdp,
    s0: usize,
    k: usize,
    cap: usize,
) -> Result<EmpowermentResult, SensitivityError> {
    if k == 0 {
        return Err(SensitivityError::BadParameter(
            "empowerment needs K >= 1".to_string(),
        ));
    }
    if mdp.predicates().deterministic {
        let mut layer = vec![s0];
        for _ in 0..k {
            let mut next: Vec<usize> = layer
                .iter()
                .flat_map(|&s| {
                    (0..mdp.n_actions(s)).map(move |a| {
                        mdp.deterministic_successor(s, a)
                            .expect("deterministic MDP")
                    })
                })
                .collect();
            next.sort_unstable();
            next.dedup();
            layer = next;
        }
        return Ok(EmpowermentResult {
            value: math::ln(layer.len() as f64),
            residual: 0.0,
            iterations: 0,
            converged: true,
        });
    }
    let rows = open_loop_rows(mdp, s0, k, cap)?;
    Ok(channel_capacity(&rows, 1e-10, 10_000))
}

/// Terminal-state distributions of every valid open-loop action
/// sequence. A sequence is valid when its action at each step is
/// available at every state the prefix can occupy; heterogeneous action
/// sets that break this are reported rather than guessed around.
fn open_loop_rows(
    mdp: &FiniteMdp,
    s0: usize,
    k: usize,
    cap: usize,
) -> Result<Vec<Vec<f64>>, SensitivityError> {
    let n = mdp.n_states();
    let mut rows = Vec::new();
    let mut start = vec![0.0; n];
    start[s0] = 1.0;
    // Depth-first over action names shared by the entire support.
    fn recurse(
        mdp: &FiniteMdp,
        dist: &[f64],
        depth: usize,
        k: usize,
        rows: &mut Vec<Vec<f64>>,
        cap: usize,
    ) -> Result<(), SensitivityError> {
        if depth == k {
            rows.push(dist.to_vec());
            if rows.len() > cap {
                return Err(SensitivityError::CapExceeded {
                    needed: rows.len() as u128,
                    cap,
                });
            }
            return Ok(());
        }
        let support: Vec<usize> = dist
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(s, _)| s)
            .collect();
        let first = support[0];
        for a0 in 0..mdp.n_actions(first) {
            let name = mdp.action_name(first, a0);
            let mut next = vec![0.0; mdp.n_states()];
            let mut ok = true;
            for &s in &support {
                match mdp.action_index(s, name) {
                    Some(a) => {
                        for (sp, &p) in mdp.row(s, a).iter().enumerate() {
                            next[sp] += dist[s] * p;
                        }
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                return Err(SensitivityError::UnsupportedStructure(format!(
                    "open-loop sequences are undefined: action {name} is unavailable on part of the reachable support"
                )));
            }
            recurse(mdp, &next, depth + 1, k, rows, cap)?;
        }
        Ok(())
    }
    recurse(mdp, &start, 0, k, &mut rows, cap)?;
    Ok(rows)
}

/// Discrete memoryless channel capacity by alternating maximization,
/// with the standard bracket `max_x D(ρ_x ‖ m) - Σ_x q(x) D(ρ_x ‖ m)`
/// as the stopping certificate.
pub fn channel_capacity(rows: &[Vec<f64>], tol: f64, max_iters: usize) -> EmpowermentResult {
    let n_in = rows.len();
    let mut q = vec![1.0 / n_in as f64; n_in];
    let mut lower = 0.0;
    let mut upper = f64::INFINITY;
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        let n_out = rows[0].len();
        let mut marginal = vec![0.0; n_out];
        for (x, row) in rows.iter().enumerate() {
            for (y, &p) in row.iter().enumerate() {
                marginal[y] += q[x] * p;
            }
        }
        let mut divergences = Vec::with_capacity(n_in);
        for row in rows {
            let mut d = 0.0;
            for (y, &p) in row.iter().enumerate() {
                if p > 0.0 {
                    d += p * math::ln(p / marginal[y]);
                }
            }
            divergences.push(d);
        }
        lower = q
            .iter()
            .zip(divergences.iter())
            .map(|(&qi, &di)| qi * di)
            .sum();
        upper = divergences
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        if upper - lower < tol {
            return EmpowermentResult {
                value: lower.max(0.0),
                residual: upper - lower,
                iterations,
                converged: true,
            };
        }
        let mut total = 0.0;
        for (qi, &di) in q.iter_mut().zip(divergences.iter()) {
            *qi *= math::exp(di);
            total += *qi;
        }
        for qi in q.iter_mut() {
            *qi /= total;
        }
    }
    EmpowermentResult {
        value: lower.max(0.0),
        residual: upper - lower,
        iterations,
        converged: false,
    }
}

/// A maximally in-control policy at `s0` with its goal-sensitivity.
/// Exhaustive per-goal argmax when enumeration fits the cap; otherwise a
/// coordinate-ascent lower bound flagged as inexact.
pub fn search_max_incontrol(
    mdp: &FiniteMdp,
    formulation: &Formulation,
    s0: usize,
    p_goal: &GoalDistribution,
    cap: usize,
) -> Result<(GoalConditionedPolicy, f64, bool), SensitivityError> {
    if p_goal.is_uniform() {
        if let Formulation::Pe { .. } | Formulation::Et { .. } = formulation {
            // Optimal and maximally in-control coincide for these two.
            let policy = values::optimal_policy(mdp, formulation, usize::MAX)?;
            let c = goal_sensitivity(mdp, formulation, &policy, s0, p_goal)?.c_value;
            return Ok((policy, c, true));
        }
    }
    match per_goal_incontrol_maxima(mdp, formulation, s0, p_goal, cap) {
        Ok((branches, _)) => {
            let policy =
                GoalConditionedPolicy::from_deterministic(mdp, mdp.states().to_vec(), &branches)?;
            let c = goal_sensitivity(mdp, formulation, &policy, s0, p_goal)?.c_value;
            let exact = !matches!(formulation, Formulation::Pe { .. }) || p_goal.is_uniform();
            Ok((policy, c, exact))
        }
        Err(SensitivityError::Policy(PolicyError::CapExceeded { .. })) => {
            let (policy, c) = ascent_max_incontrol(mdp, formulation, s0, p_goal)?;
            Ok((policy, c, false))
        }
        Err(e) => Err(e),
    }
}

/// Coordinate ascent on the per-goal margin `J(s0,g,b) - A(b)`, started
/// from the per-goal optimal branches.
fn ascent_max_incontrol(
    mdp: &FiniteMdp,
    formulation: &Formulation,
    s0: usize,
    p_goal: &GoalDistribution,
) -> Result<(GoalConditionedPolicy, f64), SensitivityError> {
    let n = mdp.n_states();
    let w = p_goal.weights();
    let slots = formulation_slots(formulation);
    let margin = |branch: &DeterministicBranch, g: usize| -> Result<f64, SensitivityError> {
        let jvec = branch_value_vector(mdp, formulation, branch, s0)?;
        let agnostic: f64 = w.iter().zip(jvec.iter()).map(|(&wi, &ji)| wi * ji).sum();
        Ok(jvec[g] - agnostic)
    };
    let mut branches = Vec::with_capacity(n);
    for g in 0..n {
        let base = solve_optimal(mdp, formulation, g, usize::MAX)?.branch;
        let mut current = DeterministicBranch {
            choices: (0..slots)
                .map(|t| (0..n).map(|s| base.action_at(t, s)).collect())
                .collect(),
        };
        let mut best = margin(&current, g)?;
        let mut improved = true;
        while improved {
            improved = false;
            for t in 0..slots {
                for s in 0..n {
                    let original = current.choices[t][s];
                    for a in 0..mdp.n_actions(s) {
                        if a == original {
                            continue;
                        }
                        current.choices[t][s] = a;
                        let m = margin(&current, g)?;
                        if m > best + 1e-13 {
                            best = m;
                            improved = true;
                        } else {
                            current.choices[t][s] = original;
                        }
                    }
                }
            }
        }
        branches.push(current);
    }
    let policy = GoalConditionedPolicy::from_deterministic(mdp, mdp.states().to_vec(), &branches)?;
    let c = goal_sensitivity(mdp, formulation, &policy, s0, p_goal)?.c_value;
    Ok((policy, c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp;
    use crate::policy::{self, Conditioning};
    use crate::values::optimal_policy;

    fn uncontrollable(n_states: usize, seed: u64) -> FiniteMdp {
        // Two actions with identical rows everywhere: the kernel ignores
        // actions entirely.
        let base = mdp::random_mdp(n_states, 1, n_states.min(2), seed).unwrap();
        let states = base.states().to_vec();
        let actions = vec![vec!["a0".to_string(), "a1".to_string()]; n_states];
        let kernel = (0..n_states)
            .map(|s| vec![base.row(s, 0).to_vec(), base.row(s, 0).to_vec()])
            .collect();
        FiniteMdp::new(states, actions, kernel).unwrap()
    }

    #[test]
    fn goal_independent_policy_has_zero_sensitivity() {
        let m = mdp::random_mdp(4, 2, 2, 1).unwrap();
        let base = policy::random_policy(&m, Conditioning::Skills(1), 1, 2);
        let f = policy::GoalToSkillMap::constant(4, 0, 1);
        let pol = policy::compose_downstream(&m, &base, &f).unwrap();
        let u = GoalDistribution::uniform(4);
        for form in [
            Formulation::Pe { gamma: 0.5 },
            Formulation::Et { k: 2 },
            Formulation::Ow { k: 2, gamma: 0.5 },
        ] {
            let r = goal_sensitivity(&m, &form, &pol, 0, &u).unwrap();
            assert!(r.c_value.abs() < 1e-14);
            assert!(r.gain.iter().flatten().all(|&x| x.abs() < 1e-14));
        }
    }

    #[test]
    fn uncontrollable_kernel_zeroes_everything() {
        let m = uncontrollable(4, 9);
        let u = GoalDistribution::uniform(4);
        let pol = policy::random_policy(&m, Conditioning::Goals, 1, 3);
        for form in [
            Formulation::Pe { gamma: 0.4 },
            Formulation::Et { k: 2 },
            Formulation::Ow { k: 2, gamma: 0.9 },
        ] {
            let c = goal_sensitivity(&m, &form, &pol, 0, &u).unwrap().c_value;
            assert!(c.abs() < 1e-14, "{form:?}");
            let cstar = objective_controllability(&m, &form, 0, &u, 1_000_000).unwrap();
            assert!(cstar.value.abs() < 1e-12, "{form:?}: {}", cstar.value);
        }
        assert!(one_step_controllability(&m, 0).abs() < 1e-15);
        let emp = klyubin_empowerment(&m, 0, 1, 1_000_000).unwrap();
        assert!(emp.value.abs() < 1e-9);
    }

    #[test]
    fn river_sensitivity_matches_value_identity() {
        // J = C + 1/N for the persistent formulation under uniform goals.
        let m = mdp::river(0.08, 0.2).unwrap();
        let u = GoalDistribution::uniform(5);
        let form = Formulation::Pe { gamma: 0.35 };
        let pol = optimal_policy(&m, &form, 1000).unwrap();
        let s1 = m.state_index("s1").unwrap();
        let c = goal_sensitivity(&m, &form, &pol, s1, &u).unwrap().c_value;
        let j = values::test_time_performance(&m, &form, &pol, s1, &u).unwrap();
        assert!((j - c - 0.2).abs() < 1e-12);
    }

    #[test]
    fn plain_consistency_of_goal_independent_policy() {
        let m = mdp::random_mdp(3, 2, 2, 4).unwrap();
        let base = policy::random_policy(&m, Conditioning::Skills(1), 0, 2);
        let f = policy::GoalToSkillMap::constant(3, 0, 1);
        let pol = policy::compose_downstream(&m, &base, &f).unwrap();
        let u = GoalDistribution::uniform(3);
        let report = check_consistency(
            &m,
            &Formulation::Et { k: 2 },
            &pol,
            ConsistencyMode::Plain,
            &u,
        )
        .unwrap();
        assert!(report.pass, "{:?}", report.violations);
        // Uniform goals: strong and plain coincide.
        let strong = check_consistency(
            &m,
            &Formulation::Et { k: 2 },
            &pol,
            ConsistencyMode::Strong,
            &u,
        )
        .unwrap();
        assert!(strong.pass);
    }

    #[test]
    fn stochastic_mode_requires_windowed_formulation() {
        let m = mdp::random_mdp(3, 2, 2, 4).unwrap();
        let pol = policy::random_policy(&m, Conditioning::Goals, 1, 5);
        let u = GoalDistribution::uniform(3);
        assert!(check_consistency(
            &m,
            &Formulation::Et { k: 2 },
            &pol,
            ConsistencyMode::Stochastic,
            &u
        )
        .is_err());
        let r = check_consistency(
            &m,
            &Formulation::Ow { k: 2, gamma: 0.5 },
            &pol,
            ConsistencyMode::Stochastic,
            &u,
        );
        assert!(r.is_ok());
    }

    #[test]
    fn grid_et1_controllability_from_corner() {
        // From a 2x2 corner, three distinct one-step successors:
        // C* = 3/4 - 1/4 = 1/2.
        let m = mdp::grid(2).unwrap();
        let u = GoalDistribution::uniform(4);
        let r = objective_controllability(&m, &Formulation::Et { k: 1 }, 0, &u, 1_000_000).unwrap();
        assert!(r.exact);
        assert!((r.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn one_step_controllability_matches_et1() {
        for seed in 0..20 {
            let m = mdp::random_mdp(4, 3, 2, seed).unwrap();
            let u = GoalDistribution::uniform(4);
            for s in 0..4 {
                let direct = one_step_controllability(&m, s);
                let via_solver =
                    objective_controllability(&m, &Formulation::Et { k: 1 }, s, &u, 1_000_000)
                        .unwrap();
                assert!(
                    (direct - via_solver.value).abs() < 1e-12,
                    "seed {seed} s {s}: {direct} vs {}",
                    via_solver.value
                );
            }
        }
    }

    #[test]
    fn single_action_has_zero_one_step_controllability() {
        let m = mdp::random_mdp(3, 1, 2, 7).unwrap();
        for s in 0..3 {
            assert_eq!(one_step_controllability(&m, s), 0.0);
        }
    }

    #[test]
    fn grid_empowerment_counts_reachable() {
        let m = mdp::grid(2).unwrap();
        let emp = klyubin_empowerment(&m, 0, 1, 1_000_000).unwrap();
        assert!((emp.value - math::ln(3.0)).abs() < 1e-12);
        // K = 2 reaches the whole 2x2 grid.
        let emp2 = klyubin_empowerment(&m, 0, 2, 1_000_000).unwrap();
        assert!((emp2.value - math::ln(4.0)).abs() < 1e-12);
    }

    #[test]
    fn deterministic_empowerment_matches_controllability_identity() {
        // log(1 + N·C*_ET(K)) on deterministic MDPs.
        for n in [2usize, 3] {
            let m = mdp::grid(n).unwrap();
            let u = GoalDistribution::uniform(m.n_states());
            for k in 1..=2 {
                for s in [0, m.n_states() - 1] {
                    let emp = klyubin_empowerment(&m, s, k, 1_000_000).unwrap().value;
                    let c = objective_controllability(&m, &Formulation::Et { k }, s, &u, 1_000_000)
                        .unwrap()
                        .value;
                    let rhs = math::ln(1.0 + m.n_states() as f64 * c);
                    assert!((emp - rhs).abs() < 1e-10, "grid({n}) K={k} s={s}");
                }
            }
        }
    }

    #[test]
    fn capacity_of_noiseless_binary_channel() {
        let rows = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let r = channel_capacity(&rows, 1e-10, 10_000);
        assert!(r.converged);
        assert!((r.value - math::ln(2.0)).abs() < 1e-9);
    }

    #[test]
    fn capacity_of_symmetric_channel() {
        // Binary symmetric channel with crossover 0.1:
        // C = ln 2 - h(0.1).
        let rows = vec![vec![0.9, 0.1], vec![0.1, 0.9]];
        let r = channel_capacity(&rows, 1e-12, 100_000);
        let h = -(0.1_f64 * math::ln(0.1) + 0.9 * math::ln(0.9));
        assert!((r.value - (math::ln(2.0) - h)).abs() < 1e-9);
    }

    #[test]
    fn ow_incontrol_search_is_oracle_exact_on_small_instances() {
        // The per-goal decomposition must match brute force over joint
        // deterministic branch assignments.
        for seed in 0..6 {
            let m = mdp::random_mdp(3, 2, 2, seed + 200).unwrap();
            let u = GoalDistribution::uniform(3);
            let form = Formulation::Ow { k: 2, gamma: 0.9 };
            let (_, c_fast, exact) = search_max_incontrol(&m, &form, 0, &u, 1_000_000).unwrap();
            assert!(exact);

            // Brute force: every joint assignment of branches to goals.
            let branches: Vec<DeterministicBranch> =
                enumerate_deterministic_branches(&m, 2, false, 1_000_000)
                    .unwrap()
                    .collect();
            let jvecs: Vec<Vec<f64>> = branches
                .iter()
                .map(|b| branch_value_vector(&m, &form, b, 0).unwrap())
                .collect();
            let agnostic: Vec<f64> = jvecs.iter().map(|v| v.iter().sum::<f64>() / 3.0).collect();
            let mut best = f64::NEG_INFINITY;
            let nb = branches.len();
            for i in 0..nb {
                for j in 0..nb {
                    for k in 0..nb {
                        let c = ((jvecs[i][0] - agnostic[i])
                            + (jvecs[j][1] - agnostic[j])
                            + (jvecs[k][2] - agnostic[k]))
                            / 3.0;
                        if c > best {
                            best = c;
                        }
                    }
                }
            }
            assert!(
                (c_fast - best).abs() < 1e-12,
                "seed {seed}: {c_fast} vs {best}"
            );
        }
    }

    #[test]
    fn sensitivity_bounded_by_controllability() {
        for seed in 0..10 {
            let m = mdp::random_mdp(3, 2, 2, seed + 50).unwrap();
            let u = GoalDistribution::uniform(3);
            let pol = policy::random_policy(&m, Conditioning::Goals, 2, seed);
            for form in [
                Formulation::Et { k: 2 },
                Formulation::Ow { k: 2, gamma: 0.7 },
            ] {
                let c = goal_sensitivity(&m, &form, &pol, 0, &u).unwrap().c_value;
                let cstar = objective_controllability(&m, &form, 0, &u, 1_000_000).unwrap();
                assert!(c <= cstar.value + 1e-12, "seed {seed} {form:?}");
            }
        }
    }
}
