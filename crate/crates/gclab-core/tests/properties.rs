//! Property tests for the structural invariants.

#![allow(clippy::needless_range_loop)]

use proptest::prelude::*;

use gclab_core::info::{behavior_joint, BehaviorVariable, Outcome};
use gclab_core::mdp::{self, GoalDistribution};
use gclab_core::policy::{
    deterministic_branch_count, enumerate_deterministic_branches, mixture_policy, random_policy,
    Conditioning,
};
use gclab_core::values::{eval_j_branch, Formulation};

proptest! {
    /// The river constructor is valid over its whole parameter square.
    #[test]
    fn river_always_validates(e1 in 0.0..=1.0f64, e2 in 0.0..=1.0f64) {
        let m = mdp::river(e1, e2).unwrap();
        prop_assert!(m.validate().is_empty());
    }

    /// Seeded kernels are pure functions of their arguments.
    #[test]
    fn random_mdp_is_deterministic(n in 1usize..6, a in 1usize..4, seed in any::<u64>()) {
        let b = n.min(2);
        let x = mdp::random_mdp(n, a, b, seed).unwrap();
        let y = mdp::random_mdp(n, a, b, seed).unwrap();
        prop_assert_eq!(x, y);
    }

    /// Enumeration produces exactly the closed-form count of policies.
    #[test]
    fn enumeration_count_matches_formula(
        n in 1usize..4,
        a in 1usize..3,
        horizon in 1usize..3,
        seed in any::<u64>(),
    ) {
        let m = mdp::random_mdp(n, a, 1, seed).unwrap();
        let expected = deterministic_branch_count(&m, horizon);
        let got = enumerate_deterministic_branches(&m, horizon, false, 1_000_000)
            .unwrap()
            .count() as u128;
        prop_assert_eq!(got, expected);
    }

    /// Goal-summed occupancy values normalize for the persistent and
    /// exact-timing objectives.
    #[test]
    fn values_normalize_over_goals(seed in any::<u64>(), gamma in 0.0..0.95f64, k in 1usize..4) {
        let m = mdp::random_mdp(4, 2, 2, seed).unwrap();
        let pol = random_policy(&m, Conditioning::Goals, 2, seed ^ 0x5bd1e995);
        let branch = pol.branch(0);
        for form in [Formulation::Pe { gamma }, Formulation::Et { k }] {
            let total: f64 = (0..4)
                .map(|g| eval_j_branch(&m, &form, &branch, 1, g).unwrap().value)
                .sum();
            prop_assert!((total - 1.0).abs() < 1e-10, "{form:?}: {total}");
        }
    }

    /// Seeded goal distributions respect their floor and normalize.
    #[test]
    fn seeded_goal_distribution_invariants(n in 2usize..8, seed in any::<u64>()) {
        let p = GoalDistribution::seeded(n, seed, 1e-3);
        prop_assert!((p.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.min_mass() >= 1e-3);
    }

    /// The mixture law equals the weighted branch laws for every event
    /// measurable from the state sequence, via exact enumeration.
    #[test]
    fn mixture_matches_weighted_branch_laws(seed in any::<u64>(), k in 1usize..4) {
        let n = 3;
        let m = mdp::random_mdp(n, 2, 2, seed).unwrap();
        let pol = random_policy(&m, Conditioning::Goals, k, seed ^ 0x9e3779b9);
        let weights = GoalDistribution::seeded(n, seed ^ 0xabcd, 1e-3);
        let mix = mixture_policy(&pol, weights.weights());

        // Route one: enumerate per-branch state-sequence laws and mix.
        let joint = behavior_joint(
            &m,
            &mix.policy,
            0,
            &mix.weights,
            &BehaviorVariable::TrajectoryK { k },
            1_000_000,
        )
        .unwrap()
        .map_outcomes(|o| match o {
            Outcome::Traj(steps) => Outcome::StateSeq(steps.iter().map(|&(_, s)| s).collect()),
            other => other.clone(),
        });
        let mixture_law = joint.marginal();

        // Route two: the weighted sum of each branch's own law, with the
        // event probabilities compared pointwise over the joint support.
        for (outcome, &p_mix) in mixture_law.support().iter().zip(mixture_law.probs()) {
            let mut weighted = 0.0;
            for (c, &w) in mix.weights.iter().enumerate() {
                weighted += w * joint.conditionals[c].prob_of(outcome);
            }
            prop_assert!((p_mix - weighted).abs() < 1e-12);
        }
        // And a nontrivial event: the chain ends in state 0.
        let ends_at_zero = |d: &gclab_core::info::DiscreteDistribution<Outcome>| -> f64 {
            d.support()
                .iter()
                .zip(d.probs())
                .filter(|(o, _)| matches!(o, Outcome::StateSeq(s) if *s.last().unwrap() == 0))
                .map(|(_, &p)| p)
                .sum()
        };
        let direct = ends_at_zero(&mixture_law);
        let weighted: f64 = mix
            .weights
            .iter()
            .zip(joint.conditionals.iter())
            .map(|(&w, c)| w * ends_at_zero(c))
            .sum();
        prop_assert!((direct - weighted).abs() < 1e-12);

        // The step-K mixture distribution evaluator agrees with the
        // enumerated law.
        let mixed = gclab_core::values::behavior_distribution_mixture(
            &m,
            &mix.policy,
            &mix.weights,
            0,
            &gclab_core::values::BehaviorSpec::SK { k },
        )
        .unwrap();
        let projected = joint
            .map_outcomes(|o| match o {
                Outcome::StateSeq(s) => Outcome::State(*s.last().unwrap()),
                other => other.clone(),
            })
            .marginal();
        for (s, &p) in mixed.iter().enumerate() {
            prop_assert!((p - projected.prob_of(&Outcome::State(s))).abs() < 1e-12);
        }
    }

    /// Composition reproduces the skill branch tables bit for bit.
    #[test]
    fn composition_is_bit_exact(seed in any::<u64>(), n_z in 1usize..4) {
        let m = mdp::random_mdp(3, 2, 2, seed).unwrap();
        let skills = random_policy(&m, Conditioning::Skills(n_z), 1, seed ^ 0x1234);
        let assign: Vec<usize> = (0..3).map(|g| g % n_z).collect();
        let f = gclab_core::GoalToSkillMap::plain(assign.clone(), n_z).unwrap();
        let composed = gclab_core::policy::compose_downstream(&m, &skills, &f).unwrap();
        for g in 0..3 {
            for t in 0..composed.n_slots() {
                for s in 0..3 {
                    prop_assert_eq!(
                        composed.slot_probs(g, t, s),
                        skills.slot_probs(assign[g], t, s)
                    );
                }
            }
        }
    }
}
