//! Shared instance and policy builders for the claim checks.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::mdp::{self, FiniteMdp, GoalDistribution};
use crate::misl;
use crate::policy::{self, Conditioning, DeterministicBranch, GoalConditionedPolicy};
use crate::rng::{derive_seed, SplitMix64};
use crate::values::{Formulation, GeneralSpec};

/// A sized random MDP with its descriptor string.
pub fn random_instance(n_states: usize, seed: u64) -> (FiniteMdp, String) {
    let n_actions = 2;
    let branching = 2.min(n_states);
    let m = mdp::random_mdp(n_states, n_actions, branching, seed).expect("valid sizes");
    (
        m,
        format!("random({n_states},{n_actions},{branching}) seed={seed}"),
    )
}

/// The policy families a claim sweeps over: an arbitrary seeded policy,
/// a goal-independent one, and a skill composition picked by the
/// consistency-attaining map.
pub enum PolicyFamily {
    Random {
        horizon: usize,
    },
    GoalIndependent,
    ComposedConsistent {
        n_z: usize,
        formulation: Formulation,
        s0: usize,
    },
}

pub fn build_policy(
    mdp: &FiniteMdp,
    family: &PolicyFamily,
    seed: u64,
) -> (GoalConditionedPolicy, String) {
    match family {
        PolicyFamily::Random { horizon } => (
            policy::random_policy(mdp, Conditioning::Goals, *horizon, seed),
            format!("random-policy(h={horizon}) seed={seed}"),
        ),
        PolicyFamily::GoalIndependent => {
            let base = policy::random_policy(mdp, Conditioning::Skills(1), 1, seed);
            let f = policy::GoalToSkillMap::constant(mdp.n_states(), 0, 1);
            (
                policy::compose_downstream(mdp, &base, &f).expect("constant map composes"),
                format!("goal-independent seed={seed}"),
            )
        }
        PolicyFamily::ComposedConsistent {
            n_z,
            formulation,
            s0,
        } => {
            let (p, d) = composed_consistent_policy(mdp, formulation, *n_z, *s0, seed);
            (p, d)
        }
    }
}

/// Random skill policy composed through the argmax goal-to-skill map:
/// consistent at `s0` by construction.
pub fn composed_consistent_policy(
    mdp: &FiniteMdp,
    formulation: &Formulation,
    n_z: usize,
    s0: usize,
    seed: u64,
) -> (GoalConditionedPolicy, String) {
    let horizon = match formulation {
        Formulation::Pe { .. } => 0,
        Formulation::Et { k } | Formulation::Ow { k, .. } => k.saturating_sub(1),
        Formulation::General(spec) => spec.horizon,
    };
    let skills = policy::random_policy(mdp, Conditioning::Skills(n_z), horizon, seed);
    let f = misl::consistent_mapping(mdp, formulation, &skills).expect("mapping exists");
    let composed =
        policy::compose_downstream_from(mdp, &skills, &f, s0).expect("composition is valid");
    (
        composed,
        format!("composed-consistent(n_z={n_z}) seed={seed}"),
    )
}

/// The diagonal policy on the star environment: the branch for each arm
/// goal takes its own arm action, the hub-goal branch waits. Every
/// cross-goal value is exactly zero.
pub fn star_diagonal_policy(star: &FiniteMdp) -> GoalConditionedPolicy {
    let n = star.n_states();
    let arms = n - 1;
    let stay_at_hub = arms; // "stay" is the last hub action
    let mut branches = Vec::with_capacity(n);
    // Goal = hub: wait there.
    let mut hub_choices = vec![0usize; n];
    hub_choices[0] = stay_at_hub;
    branches.push(DeterministicBranch::stationary(hub_choices));
    for arm in 0..arms {
        let mut choices = vec![0usize; n];
        choices[0] = arm;
        branches.push(DeterministicBranch::stationary(choices));
    }
    GoalConditionedPolicy::from_deterministic(star, star.states().to_vec(), &branches)
        .expect("diagonal branches are valid")
}

/// Seeded non-uniform goal weights with the documented 1e-3 floor.
pub fn seeded_goal_distribution(n: usize, seed: u64) -> GoalDistribution {
    GoalDistribution::seeded(n, derive_seed(&[seed, 0x70]), 1e-3)
}

/// A random general-formulation table with non-negative rewards and
/// tail discounts bounded by 0.9.
pub fn random_nonneg_general(n: usize, seed: u64) -> Formulation {
    let mut rng = SplitMix64::new(derive_seed(&[seed, 0x47]));
    let horizon = 1;
    let slots = horizon + 1;
    let mut reward = vec![vec![vec![0.0; n]; n]; slots];
    let mut discount = vec![vec![vec![0.0; n]; n]; slots];
    for t in 0..slots {
        for s in 0..n {
            for g in 0..n {
                reward[t][s][g] = rng.next_f64();
                discount[t][s][g] = 0.9 * rng.next_f64();
            }
        }
    }
    Formulation::General(GeneralSpec {
        horizon,
        reward,
        discount,
    })
}

/// Shortest-path distances to `g` in a deterministic MDP, relaxed to a
/// fixpoint; `usize::MAX` marks unreachable states.
pub fn shortest_path_distances(mdp: &FiniteMdp, g: usize) -> Vec<usize> {
    let n = mdp.n_states();
    let mut dist = vec![usize::MAX; n];
    dist[g] = 0;
    loop {
        let mut changed = false;
        for s in 0..n {
            for a in 0..mdp.n_actions(s) {
                let sp = mdp.deterministic_successor(s, a).expect("deterministic");
                if dist[sp] != usize::MAX && dist[sp].saturating_add(1) < dist[s] {
                    dist[s] = dist[sp] + 1;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    dist
}

/// The stationary shortest-path branch toward `g`: at each state pick
/// the lowest-index action whose successor is strictly closer to `g`
/// (at `g` itself, the action minimizing the successor's distance, which
/// is a waiting action when one exists).
pub fn shortest_path_branch(mdp: &FiniteMdp, g: usize) -> DeterministicBranch {
    let dist = shortest_path_distances(mdp, g);
    let n = mdp.n_states();
    let mut choices = vec![0usize; n];
    for (s, choice) in choices.iter_mut().enumerate() {
        let mut best = usize::MAX;
        for a in 0..mdp.n_actions(s) {
            let sp = mdp.deterministic_successor(s, a).expect("deterministic");
            if dist[sp] < best {
                best = dist[sp];
                *choice = a;
            }
        }
    }
    DeterministicBranch::stationary(choices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::grid;

    #[test]
    fn grid_distances_and_branch() {
        let m = grid(3).unwrap();
        let g = m.state_index("r2c2").unwrap();
        let dist = shortest_path_distances(&m, g);
        assert_eq!(dist[m.state_index("r0c0").unwrap()], 4);
        assert_eq!(dist[m.state_index("r2c1").unwrap()], 1);
        let branch = shortest_path_branch(&m, g);
        // Walk from the far corner: must reach g in exactly 4 steps.
        let mut s = m.state_index("r0c0").unwrap();
        for t in 0..4 {
            let a = branch.action_at(t, s);
            s = m.deterministic_successor(s, a).unwrap();
        }
        assert_eq!(s, g);
        // At the goal the branch waits.
        let a = branch.action_at(0, g);
        assert_eq!(m.deterministic_successor(g, a).unwrap(), g);
    }

    #[test]
    fn star_diagonal_cross_values_vanish() {
        let m = crate::mdp::star(3).unwrap();
        let pol = star_diagonal_policy(&m);
        let form = Formulation::Ow { k: 2, gamma: 0.7 };
        for g in 0..4 {
            for gp in 0..4 {
                let v = crate::values::eval_j_branch(&m, &form, &pol.branch(gp), 0, g)
                    .unwrap()
                    .value;
                if g == gp {
                    assert!((v - 1.0).abs() < 1e-15, "diag {g}: {v}");
                } else {
                    assert_eq!(v, 0.0, "off-diag ({g},{gp})");
                }
            }
        }
    }
}
