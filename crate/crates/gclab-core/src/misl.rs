//! Skill-behavior MI objectives, downstream skill distributions, the
//! uniformity gap bound, consistency-attaining goal-to-skill maps, and a
//! small tabular pretraining optimizer.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::info::{
    self, behavior_joint, branch_conditional, BehaviorVariable, DiscreteDistribution, InfoError,
    JointDistribution, Outcome,
};
use crate::math;
use crate::mdp::{FiniteMdp, GoalDistribution};
use crate::policy::{
    compose_downstream, enumerate_deterministic_branches, DeterministicBranch,
    GoalConditionedPolicy, GoalToSkillMap, PolicyError,
};
use crate::rng::SplitMix64;
use crate::sensitivity::{branch_value_vector, SensitivityError};
use crate::values::{Formulation, ValueError};

#[derive(Debug, Clone, PartialEq)]
pub enum MislError {
    Info(InfoError),
    Policy(PolicyError),
    Value(ValueError),
    Sensitivity(SensitivityError),
    BadParameter(String),
    CapExceeded { needed: u128, cap: usize },
}

impl fmt::Display for MislError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MislError::Info(e) => write!(f, "{e}"),
            MislError::Policy(e) => write!(f, "{e}"),
            MislError::Value(e) => write!(f, "{e}"),
            MislError::Sensitivity(e) => write!(f, "{e}"),
            MislError::BadParameter(msg) => write!(f, "bad parameter: {msg}"),
            MislError::CapExceeded { needed, cap } => {
                write!(
                    f,
                    "exhaustive search needs {needed} candidates, above the cap {cap}"
                )
            }
        }
    }
}

impl core::error::Error for MislError {}

impl From<InfoError> for MislError {
    fn from(e: InfoError) -> Self {
        MislError::Info(e)
    }
}

impl From<PolicyError> for MislError {
    fn from(e: PolicyError) -> Self {
        MislError::Policy(e)
    }
}

impl From<ValueError> for MislError {
    fn from(e: ValueError) -> Self {
        MislError::Value(e)
    }
}

impl From<SensitivityError> for MislError {
    fn from(e: SensitivityError) -> Self {
        MislError::Sensitivity(e)
    }
}

/// The uniform skill prior used by pretraining.
pub fn uniform_prior(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

/// Skill-behavior MI `I(Z; S' | S_0 = s0)` under the given prior.
pub fn misl_objective(
    mdp: &FiniteMdp,
    skill_policy: &GoalConditionedPolicy,
    s0: usize,
    prior: &[f64],
    var: &BehaviorVariable,
    cap: usize,
) -> Result<f64, MislError> {
    Ok(behavior_joint(mdp, skill_policy, s0, prior, var, cap)?.mutual_information())
}

/// The skill distribution induced by commanding goals through a plain
/// map: `p_f(z) = Σ_g p_goal(g) · 1{z = f(g)}`.
pub fn downstream_skill_distribution(
    f: &GoalToSkillMap,
    p_goal: &GoalDistribution,
) -> Result<Vec<f64>, MislError> {
    if f.is_state_dependent() {
        return Err(MislError::BadParameter(
            "state-dependent maps induce one skill distribution per start state".to_string(),
        ));
    }
    downstream_skill_distribution_at(f, p_goal, 0)
}

/// Per-start-state variant for state-dependent maps.
pub fn downstream_skill_distribution_at(
    f: &GoalToSkillMap,
    p_goal: &GoalDistribution,
    s0: usize,
) -> Result<Vec<f64>, MislError> {
    let mut p_f = vec![0.0; f.n_skills()];
    for (g, &w) in p_goal.weights().iter().enumerate() {
        p_f[f.skill_for(s0, g)?] += w;
    }
    Ok(p_f)
}

/// The uniformity gap bound on `|J_MISL - I(G; S')|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapBoundResult {
    /// Total variation between the downstream skill distribution and
    /// the uniform prior.
    pub delta: f64,
    /// `h(δ) + δ·ln(N'²·(N'-1))`.
    pub bound: f64,
    /// The bound requires at most as many skills as outcomes.
    pub applicable: bool,
}

pub fn mi_gap_bound(p_f: &[f64], n_sprime: usize) -> Result<GapBoundResult, MislError> {
    if p_f.is_empty() {
        return Err(MislError::BadParameter(
            "empty skill distribution".to_string(),
        ));
    }
    if n_sprime < 2 {
        return Err(MislError::BadParameter(format!(
            "need at least 2 outcomes, got {n_sprime}"
        )));
    }
    let n_z = p_f.len();
    let delta: f64 = p_f
        .iter()
        .map(|&p| (p - 1.0 / n_z as f64).abs())
        .sum::<f64>()
        / 2.0;
    let np = n_sprime as f64;
    let bound = info::binary_entropy(delta)? + delta * math::ln(np * np * (np - 1.0));
    Ok(GapBoundResult {
        delta,
        bound,
        applicable: n_z <= n_sprime,
    })
}

/// The consistency-attaining state-dependent map:
/// `f(s0, g) = argmax_z J(s0, g, skill branch z)` with lowest-index
/// tie-break. The composed downstream policy is consistent by
/// construction.
pub fn consistent_mapping(
    mdp: &FiniteMdp,
    formulation: &Formulation,
    skill_policy: &GoalConditionedPolicy,
) -> Result<GoalToSkillMap, MislError> {
    let n = mdp.n_states();
    let n_z = skill_policy.n_branches();
    let mut assign = vec![vec![0usize; n]; n];
    for s0 in 0..n {
        // values[z][g] = J(s0, g, branch z)
        let mut per_skill = Vec::with_capacity(n_z);
        for z in 0..n_z {
            per_skill.push(branch_value_vector(
                mdp,
                formulation,
                &skill_policy.branch(z),
                s0,
            )?);
        }
        for g in 0..n {
            let mut best = f64::NEG_INFINITY;
            let mut best_z = 0;
            for (z, values) in per_skill.iter().enumerate() {
                if values[g] > best + 1e-15 {
                    best = values[g];
                    best_z = z;
                }
            }
            assign[s0][g] = best_z;
        }
    }
    Ok(GoalToSkillMap::state_dependent(assign, n_z)?)
}

/// Both sides of the goal/skill MI identity for a deterministic plain
/// map: conditioning on the goal or on the induced skill gives the same
/// information about the behavioral outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiIdentity {
    /// `I(G; S')` under the composed downstream policy.
    pub lhs: f64,
    /// `I(Z; S')` with the downstream skill prior `p_f`.
    pub rhs: f64,
    pub gap: f64,
}

pub fn verify_mi_identity(
    mdp: &FiniteMdp,
    skill_policy: &GoalConditionedPolicy,
    f: &GoalToSkillMap,
    s0: usize,
    p_goal: &GoalDistribution,
    var: &BehaviorVariable,
    cap: usize,
) -> Result<MiIdentity, MislError> {
    if f.is_state_dependent() {
        return Err(MislError::BadParameter(
            "the identity conditions on the skill alone; use a plain map".to_string(),
        ));
    }
    let composed = compose_downstream(mdp, skill_policy, f)?;
    let lhs = info::goal_behavior_mi(mdp, &composed, s0, p_goal, var, cap)?;
    let p_f = downstream_skill_distribution(f, p_goal)?;
    let rhs = behavior_joint(mdp, skill_policy, s0, &p_f, var, cap)?.mutual_information();
    Ok(MiIdentity {
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
    })
}

/// How the tabular optimizer searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MislMode {
    /// Global maximum over deterministic skill branches. Distinct
    /// branches with identical behavior collapse, and skills are
    /// assigned multisets of the distinct conditionals (the objective is
    /// invariant to skill relabeling under the uniform prior).
    Exhaustive,
    /// Seeded coordinate ascent over per-(skill, slot, state) action
    /// choices; monotone in the objective, stops at a local maximum or
    /// after `max_passes` full sweeps.
    Ascent { max_passes: usize },
}

fn variable_slots(var: &BehaviorVariable) -> usize {
    match var {
        BehaviorVariable::SGammaPlus { .. } => 1,
        BehaviorVariable::SK { k }
        | BehaviorVariable::FirstVisitVector { k, .. }
        | BehaviorVariable::TrajectoryK { k } => *k,
    }
}

/// Bit-exact key for collapsing branches with identical conditionals.
fn conditional_key(d: &DiscreteDistribution<Outcome>) -> Vec<(Outcome, u64)> {
    d.support()
        .iter()
        .cloned()
        .zip(d.probs().iter().map(|p| p.to_bits()))
        .collect()
}

fn binomial(n: u128, k: u128) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Maximizes the skill-behavior MI over deterministic tabular skill
/// policies; returns the policy and the objective value, reproducible
/// from `(seed, mode)`.
pub fn optimize_misl_tabular(
    mdp: &FiniteMdp,
    var: &BehaviorVariable,
    n_z: usize,
    s0: usize,
    mode: MislMode,
    seed: u64,
    cap: usize,
) -> Result<(GoalConditionedPolicy, f64), MislError> {
    if n_z == 0 {
        return Err(MislError::BadParameter(
            "need at least one skill".to_string(),
        ));
    }
    let slots = variable_slots(var);
    let labels = crate::policy::skill_labels(n_z);
    match mode {
        MislMode::Exhaustive => {
            let branches: Vec<DeterministicBranch> =
                enumerate_deterministic_branches(mdp, slots, slots == 1, cap)?.collect();
            // Distinct conditionals, first representative wins.
            let mut seen: BTreeMap<Vec<(Outcome, u64)>, usize> = BTreeMap::new();
            let mut distinct: Vec<(DiscreteDistribution<Outcome>, usize)> = Vec::new();
            for (i, b) in branches.iter().enumerate() {
                let cond = branch_conditional(mdp, b, s0, var, cap)?;
                let key = conditional_key(&cond);
                if let alloc::collections::btree_map::Entry::Vacant(slot) = seen.entry(key) {
                    slot.insert(distinct.len());
                    distinct.push((cond, i));
                }
            }
            let d = distinct.len() as u128;
            let combos = binomial(d + n_z as u128 - 1, n_z as u128);
            if combos > cap as u128 {
                return Err(MislError::CapExceeded {
                    needed: combos,
                    cap,
                });
            }
            // Multisets of size n_z over the distinct conditionals,
            // enumerated as non-decreasing index sequences.
            let prior = uniform_prior(n_z);
            let mut best_mi = f64::NEG_INFINITY;
            let mut best_assignment: Vec<usize> = Vec::new();
            let mut assignment = vec![0usize; n_z];
            let mut done = false;
            while !done {
                let conds: Vec<DiscreteDistribution<Outcome>> =
                    assignment.iter().map(|&i| distinct[i].0.clone()).collect();
                let mi = JointDistribution::new(prior.clone(), conds)?.mutual_information();
                if mi > best_mi + 1e-15 {
                    best_mi = mi;
                    best_assignment = assignment.clone();
                }
                done = true;
                for pos in (0..n_z).rev() {
                    if assignment[pos] + 1 < distinct.len() {
                        let bumped = assignment[pos] + 1;
                        for a in assignment.iter_mut().skip(pos) {
                            *a = bumped;
                        }
                        done = false;
                        break;
                    }
                }
            }
            let chosen: Vec<DeterministicBranch> = best_assignment
                .iter()
                .map(|&i| branches[distinct[i].1].clone())
                .collect();
            let policy = GoalConditionedPolicy::from_deterministic(mdp, labels, &chosen)?;
            Ok((policy, best_mi))
        }
        MislMode::Ascent { max_passes } => {
            let n = mdp.n_states();
            let mut rng = SplitMix64::new(seed);
            let mut choices: Vec<Vec<Vec<usize>>> = (0..n_z)
                .map(|_| {
                    (0..slots)
                        .map(|_| (0..n).map(|s| rng.next_index(mdp.n_actions(s))).collect())
                        .collect()
                })
                .collect();
            let prior = uniform_prior(n_z);
            let branch_of = |c: &Vec<Vec<usize>>| DeterministicBranch { choices: c.clone() };
            let mut conds: Vec<DiscreteDistribution<Outcome>> = choices
                .iter()
                .map(|c| branch_conditional(mdp, &branch_of(c), s0, var, cap))
                .collect::<Result<_, _>>()?;
            let mut best =
                JointDistribution::new(prior.clone(), conds.clone())?.mutual_information();
            for _pass in 0..max_passes {
                let mut improved = false;
                for z in 0..n_z {
                    for t in 0..slots {
                        for s in 0..n {
                            let original = choices[z][t][s];
                            for a in 0..mdp.n_actions(s) {
                                if a == original {
                                    continue;
                                }
                                choices[z][t][s] = a;
                                let cand =
                                    branch_conditional(mdp, &branch_of(&choices[z]), s0, var, cap)?;
                                let old = core::mem::replace(&mut conds[z], cand);
                                let mi = JointDistribution::new(prior.clone(), conds.clone())?
                                    .mutual_information();
                                if mi > best + 1e-13 {
                                    best = mi;
                                    improved = true;
                                } else {
                                    choices[z][t][s] = original;
                                    conds[z] = old;
                                }
                            }
                        }
                    }
                }
                if !improved {
                    break;
                }
            }
            let branches: Vec<DeterministicBranch> = choices
                .into_iter()
                .map(|c| DeterministicBranch { choices: c })
                .collect();
            let policy = GoalConditionedPolicy::from_deterministic(mdp, labels, &branches)?;
            Ok((policy, best))
        }
    }
}
