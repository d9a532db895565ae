//! Goal- and skill-conditioned policies, composition, mixtures, and
//! deterministic-policy enumeration for brute-force oracles.
//!
//! A policy stores a finite non-stationary prefix plus a stationary tail:
//! exact-timing and windowed objectives need exactly `K` time slots,
//! while persistent-goal optima are stationary (tail slot only). All
//! argmax ties anywhere in the crate break toward the lowest index so
//! every output is reproducible.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::mdp::FiniteMdp;
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq)]
pub enum PolicyError {
    BadDistribution {
        cond: String,
        time: String,
        state: String,
        sum: f64,
    },
    ShapeMismatch {
        detail: String,
    },
    UnmappedGoal {
        goal: String,
    },
    MissingSkill {
        skill: usize,
    },
    WrongMode {
        detail: String,
    },
    CapExceeded {
        needed: u128,
        cap: usize,
    },
}

impl fmt::Display for PolicyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyError::BadDistribution {
                cond,
                time,
                state,
                sum,
            } => {
                write!(
                    f,
                    "action probabilities at ({cond}, t={time}, {state}) sum to {sum}"
                )
            }
            PolicyError::ShapeMismatch { detail } => write!(f, "policy shape mismatch: {detail}"),
            PolicyError::UnmappedGoal { goal } => write!(f, "goal {goal} has no skill assignment"),
            PolicyError::MissingSkill { skill } => write!(f, "skill index {skill} out of range"),
            PolicyError::WrongMode { detail } => write!(f, "{detail}"),
            PolicyError::CapExceeded { needed, cap } => {
                write!(
                    f,
                    "enumeration would generate {needed} policies, above the cap {cap}"
                )
            }
        }
    }
}

impl core::error::Error for PolicyError {}

/// Read access to one conditioning branch of a policy: an action
/// distribution per (time, state), stationary from `prefix_len()` on.
pub trait Branch {
    /// Number of non-stationary slots before the stationary tail.
    fn prefix_len(&self) -> usize;
    /// Probability of action index `a` at time `t` in state `s`.
    fn prob(&self, t: usize, s: usize, a: usize) -> f64;
}

/// A deterministic branch: one action index per (slot, state). The last
/// slot doubles as the stationary tail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterministicBranch {
    pub choices: Vec<Vec<usize>>,
}

impl DeterministicBranch {
    pub fn stationary(choices: Vec<usize>) -> Self {
        Self {
            choices: vec![choices],
        }
    }

    pub fn n_slots(&self) -> usize {
        self.choices.len()
    }

    fn slot(&self, t: usize) -> &[usize] {
        &self.choices[t.min(self.choices.len() - 1)]
    }

    pub fn action_at(&self, t: usize, s: usize) -> usize {
        self.slot(t)[s]
    }
}

impl Branch for DeterministicBranch {
    fn prefix_len(&self) -> usize {
        self.choices.len() - 1
    }

    fn prob(&self, t: usize, s: usize, a: usize) -> f64 {
        if self.slot(t)[s] == a {
            1.0
        } else {
            0.0
        }
    }
}

/// A view into one branch of a [`GoalConditionedPolicy`].
#[derive(Debug, Clone, Copy)]
pub struct PolicyBranch<'a> {
    slots: &'a [Vec<Vec<f64>>],
}

impl Branch for PolicyBranch<'_> {
    fn prefix_len(&self) -> usize {
        self.slots.len() - 1
    }

    fn prob(&self, t: usize, s: usize, a: usize) -> f64 {
        self.slots[t.min(self.slots.len() - 1)][s][a]
    }
}

/// What a policy's branches are conditioned on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conditioning {
    /// One branch per goal state, labeled by state ids.
    Goals,
    /// `n` skill branches labeled `z0 .. z{n-1}`.
    Skills(usize),
}

/// A conditioned policy table: `table[c][slot][s]` is an action
/// distribution over `A(s)`, with `horizon` non-stationary slots followed
/// by one stationary tail slot.
#[derive(Debug, Clone, PartialEq)]
pub struct GoalConditionedPolicy {
    horizon: usize,
    labels: Vec<String>,
    table: Vec<Vec<Vec<Vec<f64>>>>,
}

impl GoalConditionedPolicy {
    /// Validates shapes and per-(branch, slot, state) distributions
    /// against the MDP's action sets. Distributions within 1e-9 of
    /// summing to 1 are renormalized exactly.
    pub fn from_table(
        mdp: &FiniteMdp,
        labels: Vec<String>,
        horizon: usize,
        mut table: Vec<Vec<Vec<Vec<f64>>>>,
    ) -> Result<Self, PolicyError> {
        if table.len() != labels.len() {
            return Err(PolicyError::ShapeMismatch {
                detail: format!("{} labels but {} branches", labels.len(), table.len()),
            });
        }
        for (c, branch) in table.iter_mut().enumerate() {
            if branch.len() != horizon + 1 {
                return Err(PolicyError::ShapeMismatch {
                    detail: format!(
                        "branch {} has {} slots, expected {}",
                        labels[c],
                        branch.len(),
                        horizon + 1
                    ),
                });
            }
            for (slot_idx, slot) in branch.iter_mut().enumerate() {
                if slot.len() != mdp.n_states() {
                    return Err(PolicyError::ShapeMismatch {
                        detail: format!(
                            "slot {slot_idx} of branch {} covers {} states",
                            labels[c],
                            slot.len()
                        ),
                    });
                }
                for (s, dist) in slot.iter_mut().enumerate() {
                    if dist.len() != mdp.n_actions(s) {
                        return Err(PolicyError::ShapeMismatch {
                            detail: format!(
                                "state {} has {} actions but the branch row has {}",
                                mdp.state_name(s),
                                mdp.n_actions(s),
                                dist.len()
                            ),
                        });
                    }
                    let sum: f64 = dist.iter().sum();
                    if dist.iter().any(|&p| p < 0.0) || (sum - 1.0).abs() > 1e-9 {
                        return Err(PolicyError::BadDistribution {
                            cond: labels[c].clone(),
                            time: if slot_idx == horizon {
                                "*".to_string()
                            } else {
                                format!("{slot_idx}")
                            },
                            state: mdp.state_name(s).to_string(),
                            sum,
                        });
                    }
                    // Idempotent normalization, as for kernel rows.
                    if (sum - 1.0).abs() > 1e-13 {
                        for p in dist.iter_mut() {
                            *p /= sum;
                        }
                    }
                }
            }
        }
        Ok(Self {
            horizon,
            labels,
            table,
        })
    }

    /// Wraps per-conditioning deterministic branches as a policy.
    /// Branches with fewer slots than the longest are extended by
    /// repeating their tail slot.
    pub fn from_deterministic(
        mdp: &FiniteMdp,
        labels: Vec<String>,
        branches: &[DeterministicBranch],
    ) -> Result<Self, PolicyError> {
        let slots = branches.iter().map(|b| b.n_slots()).max().unwrap_or(1);
        let mut table = Vec::with_capacity(branches.len());
        for b in branches {
            let mut branch_slots = Vec::with_capacity(slots);
            for t in 0..slots {
                let mut slot = Vec::with_capacity(mdp.n_states());
                for s in 0..mdp.n_states() {
                    let mut dist = vec![0.0; mdp.n_actions(s)];
                    dist[b.action_at(t, s)] = 1.0;
                    slot.push(dist);
                }
                branch_slots.push(slot);
            }
            table.push(branch_slots);
        }
        Self::from_table(mdp, labels, slots - 1, table)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn n_slots(&self) -> usize {
        self.horizon + 1
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n_branches(&self) -> usize {
        self.table.len()
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn branch(&self, c: usize) -> PolicyBranch<'_> {
        PolicyBranch {
            slots: &self.table[c],
        }
    }

    /// Raw action distribution at (branch, slot, state).
    pub fn slot_probs(&self, c: usize, slot: usize, s: usize) -> &[f64] {
        &self.table[c][slot][s]
    }

    /// True when branches are conditioned on goal states of `mdp`.
    pub fn is_goal_conditioned(&self, mdp: &FiniteMdp) -> bool {
        self.labels.len() == mdp.n_states()
            && self.labels.iter().zip(mdp.states()).all(|(a, b)| a == b)
    }
}

/// Skill labels `z0 .. z{n-1}`.
pub fn skill_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("z{i}")).collect()
}

/// A deterministic goal-to-skill assignment, either global or
/// conditioned on the start state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GoalToSkillMap {
    Plain {
        assign: Vec<usize>,
        n_skills: usize,
    },
    StateDependent {
        assign: Vec<Vec<usize>>,
        n_skills: usize,
    },
}

impl GoalToSkillMap {
    pub fn plain(assign: Vec<usize>, n_skills: usize) -> Result<Self, PolicyError> {
        if let Some(&z) = assign.iter().find(|&&z| z >= n_skills) {
            return Err(PolicyError::MissingSkill { skill: z });
        }
        Ok(Self::Plain { assign, n_skills })
    }

    pub fn state_dependent(assign: Vec<Vec<usize>>, n_skills: usize) -> Result<Self, PolicyError> {
        if let Some(&z) = assign.iter().flatten().find(|&&z| z >= n_skills) {
            return Err(PolicyError::MissingSkill { skill: z });
        }
        Ok(Self::StateDependent { assign, n_skills })
    }

    pub fn identity(n: usize) -> Self {
        Self::Plain {
            assign: (0..n).collect(),
            n_skills: n,
        }
    }

    pub fn constant(n_goals: usize, skill: usize, n_skills: usize) -> Self {
        Self::Plain {
            assign: vec![skill; n_goals],
            n_skills,
        }
    }

    pub fn n_skills(&self) -> usize {
        match self {
            Self::Plain { n_skills, .. } | Self::StateDependent { n_skills, .. } => *n_skills,
        }
    }

    pub fn is_state_dependent(&self) -> bool {
        matches!(self, Self::StateDependent { .. })
    }

    /// Skill assigned to `goal` when starting from `s0` (ignored in
    /// plain mode).
    pub fn skill_for(&self, s0: usize, goal: usize) -> Result<usize, PolicyError> {
        match self {
            Self::Plain { assign, .. } => {
                assign.get(goal).copied().ok_or(PolicyError::UnmappedGoal {
                    goal: format!("#{goal}"),
                })
            }
            Self::StateDependent { assign, .. } => {
                assign.get(s0).and_then(|row| row.get(goal)).copied().ok_or(
                    PolicyError::UnmappedGoal {
                        goal: format!("#{goal}"),
                    },
                )
            }
        }
    }
}

/// Builds the downstream goal-conditioned policy `π_g := π^skill_{f(g)}`
/// for a plain map. Branch tables are copied entry by entry.
pub fn compose_downstream(
    mdp: &FiniteMdp,
    skill_policy: &GoalConditionedPolicy,
    f: &GoalToSkillMap,
) -> Result<GoalConditionedPolicy, PolicyError> {
    if f.is_state_dependent() {
        return Err(PolicyError::WrongMode {
            detail: "state-dependent map requires a start state; use compose_downstream_from"
                .to_string(),
        });
    }
    compose_downstream_from(mdp, skill_policy, f, 0)
}

/// Downstream policy for goals commanded from start state `s0`
/// (state-dependent maps pick their skill per `(s0, g)`).
pub fn compose_downstream_from(
    mdp: &FiniteMdp,
    skill_policy: &GoalConditionedPolicy,
    f: &GoalToSkillMap,
    s0: usize,
) -> Result<GoalConditionedPolicy, PolicyError> {
    if f.n_skills() > skill_policy.n_branches() {
        return Err(PolicyError::MissingSkill {
            skill: skill_policy.n_branches(),
        });
    }
    // Branch tables are copied verbatim (no revalidation pass, which
    // would renormalize and shift the last ulp).
    let mut table = Vec::with_capacity(mdp.n_states());
    for g in 0..mdp.n_states() {
        let z = f.skill_for(s0, g)?;
        table.push(skill_policy.table[z].clone());
    }
    Ok(GoalConditionedPolicy {
        horizon: skill_policy.horizon(),
        labels: mdp.states().to_vec(),
        table,
    })
}

/// The goal-marginal mixture: a latent goal is drawn once at `t = 0` and
/// its branch is followed forever. Its trajectory law is the weighted
/// mixture of the branch laws, which is not representable as a per-step
/// action average; evaluators therefore mix per-branch results.
#[derive(Debug, Clone)]
pub struct MixturePolicy {
    pub policy: GoalConditionedPolicy,
    pub weights: Vec<f64>,
}

pub fn mixture_policy(policy: &GoalConditionedPolicy, weights: &[f64]) -> MixturePolicy {
    debug_assert_eq!(policy.n_branches(), weights.len());
    MixturePolicy {
        policy: policy.clone(),
        weights: weights.to_vec(),
    }
}

/// Number of deterministic branches: `Π_s N_a(s)` raised to the slot
/// count, computed in `u128` (saturating) for the cap check.
pub fn deterministic_branch_count(mdp: &FiniteMdp, slots: usize) -> u128 {
    let per_slot =
        (0..mdp.n_states()).fold(1u128, |acc, s| acc.saturating_mul(mdp.n_actions(s) as u128));
    let mut total = 1u128;
    for _ in 0..slots {
        total = total.saturating_mul(per_slot);
    }
    total
}

/// Exhaustive, duplicate-free enumeration of deterministic branches with
/// `horizon` time slots (one slot if `stationary_only`). Enumeration
/// order is an odometer over (slot, state) coordinates with the last
/// coordinate varying fastest, so index 0 picks action 0 everywhere.
pub fn enumerate_deterministic_branches(
    mdp: &FiniteMdp,
    horizon: usize,
    stationary_only: bool,
    cap: usize,
) -> Result<BranchIter<'_>, PolicyError> {
    let slots = if stationary_only { 1 } else { horizon.max(1) };
    let total = deterministic_branch_count(mdp, slots);
    if total > cap as u128 {
        return Err(PolicyError::CapExceeded { needed: total, cap });
    }
    Ok(BranchIter {
        mdp,
        slots,
        current: Some(vec![vec![0; mdp.n_states()]; slots]),
    })
}

#[derive(Debug)]
pub struct BranchIter<'a> {
    mdp: &'a FiniteMdp,
    slots: usize,
    current: Option<Vec<Vec<usize>>>,
}

impl Iterator for BranchIter<'_> {
    type Item = DeterministicBranch;

    fn next(&mut self) -> Option<Self::Item> {
        let current = self.current.as_ref()?;
        let item = DeterministicBranch {
            choices: current.clone(),
        };
        // Advance the odometer.
        let mut bumped = false;
        let mut next = current.clone();
        'outer: for t in (0..self.slots).rev() {
            for s in (0..self.mdp.n_states()).rev() {
                if next[t][s] + 1 < self.mdp.n_actions(s) {
                    next[t][s] += 1;
                    bumped = true;
                    break 'outer;
                }
                next[t][s] = 0;
            }
        }
        self.current = if bumped { Some(next) } else { None };
        Some(item)
    }
}

/// A seeded policy with strictly positive action probabilities for every
/// (branch, slot, state).
pub fn random_policy(
    mdp: &FiniteMdp,
    conditioning: Conditioning,
    horizon: usize,
    seed: u64,
) -> GoalConditionedPolicy {
    let labels = match conditioning {
        Conditioning::Goals => mdp.states().to_vec(),
        Conditioning::Skills(n) => skill_labels(n),
    };
    let mut rng = SplitMix64::new(seed);
    let mut table = Vec::with_capacity(labels.len());
    for _ in 0..labels.len() {
        let mut slots = Vec::with_capacity(horizon + 1);
        for _ in 0..=horizon {
            let mut slot = Vec::with_capacity(mdp.n_states());
            for s in 0..mdp.n_states() {
                let mut dist: Vec<f64> = (0..mdp.n_actions(s))
                    .map(|_| rng.next_positive_f64())
                    .collect();
                let sum: f64 = dist.iter().sum();
                for p in dist.iter_mut() {
                    *p /= sum;
                }
                slot.push(dist);
            }
            slots.push(slot);
        }
        table.push(slots);
    }
    GoalConditionedPolicy::from_table(mdp, labels, horizon, table)
        .expect("seeded table is valid by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp;

    #[test]
    fn enumeration_counts_match_products() {
        let one = mdp::random_mdp(1, 2, 1, 0).unwrap();
        let branches: Vec<_> = enumerate_deterministic_branches(&one, 1, true, 1000)
            .unwrap()
            .collect();
        assert_eq!(branches.len(), 2);

        let two = mdp::random_mdp(2, 2, 1, 0).unwrap();
        let stationary: Vec<_> = enumerate_deterministic_branches(&two, 1, true, 1000)
            .unwrap()
            .collect();
        assert_eq!(stationary.len(), 4);

        let nonstat: Vec<_> = enumerate_deterministic_branches(&two, 2, false, 1000)
            .unwrap()
            .collect();
        assert_eq!(nonstat.len(), 16);

        // Duplicate-free.
        let mut seen = alloc::collections::BTreeSet::new();
        for b in &nonstat {
            assert!(seen.insert(b.choices.clone()));
        }
    }

    #[test]
    fn enumeration_cap_reports_count() {
        let m = mdp::grid(2).unwrap();
        match enumerate_deterministic_branches(&m, 3, false, 100) {
            Err(PolicyError::CapExceeded { needed, cap }) => {
                assert_eq!(needed, 625u128.pow(3));
                assert_eq!(cap, 100);
            }
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn random_policy_is_seeded_and_positive() {
        let m = mdp::random_mdp(3, 2, 2, 5).unwrap();
        let a = random_policy(&m, Conditioning::Goals, 2, 9);
        let b = random_policy(&m, Conditioning::Goals, 2, 9);
        assert_eq!(a, b);
        for c in 0..a.n_branches() {
            for t in 0..a.n_slots() {
                for s in 0..m.n_states() {
                    for &p in a.slot_probs(c, t, s) {
                        assert!(p > 0.0 && p < 1.0);
                    }
                }
            }
        }
    }

    #[test]
    fn random_policy_single_action_is_degenerate() {
        let m = mdp::random_mdp(2, 1, 1, 3).unwrap();
        let p = random_policy(&m, Conditioning::Goals, 0, 1);
        for c in 0..p.n_branches() {
            for s in 0..m.n_states() {
                assert_eq!(p.slot_probs(c, 0, s), &[1.0]);
            }
        }
    }

    #[test]
    fn compose_identity_relabels_only() {
        let m = mdp::random_mdp(3, 2, 2, 11).unwrap();
        let skills = random_policy(&m, Conditioning::Skills(3), 1, 4);
        let f = GoalToSkillMap::identity(3);
        let composed = compose_downstream(&m, &skills, &f).unwrap();
        assert_eq!(composed.labels(), m.states());
        for g in 0..3 {
            for t in 0..composed.n_slots() {
                for s in 0..m.n_states() {
                    assert_eq!(composed.slot_probs(g, t, s), skills.slot_probs(g, t, s));
                }
            }
        }
    }

    #[test]
    fn compose_constant_map_collapses_branches() {
        let m = mdp::random_mdp(4, 2, 2, 2).unwrap();
        let skills = random_policy(&m, Conditioning::Skills(2), 1, 8);
        let f = GoalToSkillMap::constant(4, 1, 2);
        let composed = compose_downstream(&m, &skills, &f).unwrap();
        for g in 1..4 {
            for t in 0..composed.n_slots() {
                for s in 0..m.n_states() {
                    assert_eq!(composed.slot_probs(g, t, s), composed.slot_probs(0, t, s));
                    assert_eq!(composed.slot_probs(g, t, s), skills.slot_probs(1, t, s));
                }
            }
        }
    }

    #[test]
    fn state_dependent_compose_requires_start() {
        let m = mdp::random_mdp(2, 2, 2, 2).unwrap();
        let skills = random_policy(&m, Conditioning::Skills(2), 0, 8);
        let f = GoalToSkillMap::state_dependent(vec![vec![0, 1], vec![1, 0]], 2).unwrap();
        assert!(compose_downstream(&m, &skills, &f).is_err());
        let at0 = compose_downstream_from(&m, &skills, &f, 0).unwrap();
        let at1 = compose_downstream_from(&m, &skills, &f, 1).unwrap();
        assert_eq!(at0.slot_probs(0, 0, 0), skills.slot_probs(0, 0, 0));
        assert_eq!(at1.slot_probs(0, 0, 0), skills.slot_probs(1, 0, 0));
    }

    #[test]
    fn deterministic_branch_tail_repeats() {
        let b = DeterministicBranch {
            choices: vec![vec![0, 1], vec![1, 0]],
        };
        assert_eq!(b.action_at(0, 0), 0);
        assert_eq!(b.action_at(1, 0), 1);
        assert_eq!(b.action_at(99, 0), 1);
        assert_eq!(b.prob(99, 1, 0), 1.0);
    }
}
