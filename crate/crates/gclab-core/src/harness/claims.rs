//! The executable claim checks. Each function runs one claim on its
//! instance family for one seed and aggregates the worst comparison into
//! a single [`ClaimCheck`].

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::harness::support::{
    build_policy, composed_consistent_policy, random_instance, random_nonneg_general,
    seeded_goal_distribution, shortest_path_branch, shortest_path_distances, star_diagonal_policy,
    PolicyFamily,
};
use crate::harness::{ClaimCheck, ClaimId, ClaimStatus, SuiteConfig};
use crate::info::{
    self, behavior_joint, decoder_errors, goal_behavior_mi, max_goal_mi_deterministic,
    ow_mi_lower_bound, ow_upper_bound, phi_down, phi_up, BehaviorVariable, Outcome,
};
use crate::math;
use crate::mdp::{self, GoalDistribution};
use crate::misl::{
    self, downstream_skill_distribution, mi_gap_bound, misl_objective, uniform_prior,
    verify_mi_identity,
};
use crate::policy::{self, Conditioning, GoalToSkillMap};
use crate::rng::{derive_seed, SplitMix64};
use crate::sensitivity::{
    check_consistency, goal_sensitivity, klyubin_empowerment, objective_controllability,
    one_step_controllability, search_max_incontrol, ConsistencyMode, ConsistencyViolation,
};
use crate::values::{
    eval_j_branch, geometric_et_value, solve_optimal, stationary_occupancy, test_time_performance,
    Formulation,
};

/// Collects comparisons and keeps the one with the smallest margin.
/// A claim passes when the worst margin is at least `-tolerance`.
pub(crate) struct Agg {
    tolerance: f64,
    worst_margin: f64,
    lhs: f64,
    rhs: f64,
    instance: String,
    checked: usize,
    skipped: usize,
    skip_reason: String,
    bound_checked: bool,
}

impl Agg {
    pub(crate) fn new(tolerance: f64) -> Self {
        Self {
            tolerance,
            worst_margin: f64::INFINITY,
            lhs: f64::NAN,
            rhs: f64::NAN,
            instance: String::new(),
            checked: 0,
            skipped: 0,
            skip_reason: String::new(),
            bound_checked: false,
        }
    }

    /// Marks that some comparison used a certified bound rather than the
    /// exact quantity; a passing claim is then reported `bound-checked`.
    pub(crate) fn mark_bound_checked(&mut self) {
        self.bound_checked = true;
    }

    fn record(&mut self, margin: f64, lhs: f64, rhs: f64, instance: &str) {
        self.checked += 1;
        if margin < self.worst_margin {
            self.worst_margin = margin;
            self.lhs = lhs;
            self.rhs = rhs;
            self.instance = instance.to_string();
        }
    }

    /// Requires `lhs ≥ rhs - tolerance`.
    pub(crate) fn geq(&mut self, lhs: f64, rhs: f64, instance: &str) {
        self.record(lhs - rhs, lhs, rhs, instance);
    }

    /// Requires `lhs ≤ rhs + tolerance`.
    pub(crate) fn leq(&mut self, lhs: f64, rhs: f64, instance: &str) {
        self.record(rhs - lhs, lhs, rhs, instance);
    }

    /// Requires `|lhs - rhs| ≤ tolerance`.
    pub(crate) fn close(&mut self, lhs: f64, rhs: f64, instance: &str) {
        self.record(-(lhs - rhs).abs(), lhs, rhs, instance);
    }

    pub(crate) fn skip(&mut self, reason: &str) {
        self.skipped += 1;
        if self.skip_reason.is_empty() {
            self.skip_reason = reason.to_string();
        }
    }

    pub(crate) fn finish(self, claim: ClaimId, seed: u64) -> ClaimCheck {
        let status = if self.checked == 0 {
            ClaimStatus::Skipped
        } else if self.worst_margin < -self.tolerance {
            ClaimStatus::Fail
        } else if self.bound_checked {
            ClaimStatus::BoundChecked
        } else {
            ClaimStatus::Pass
        };
        let mut detail = format!("{} comparison(s)", self.checked);
        if self.skipped > 0 {
            detail.push_str(&format!(
                "; {} skipped ({})",
                self.skipped, self.skip_reason
            ));
        }
        if !self.instance.is_empty() {
            detail.push_str("; tightest: ");
            detail.push_str(&self.instance);
        }
        ClaimCheck {
            claim,
            instance: self.instance.clone(),
            seed,
            lhs: self.lhs,
            rhs: self.rhs,
            tolerance: self.tolerance,
            status,
            detail,
        }
    }
}

const RIVER_EPS1: f64 = 0.08;
const RIVER_EPS2: f64 = 0.2;
const RIVER_GAMMA: f64 = 0.35;

/// The three formulations disagree on the river crossing.
pub fn check_p1(cfg: &SuiteConfig, seed: u64) -> ClaimCheck {
    let mut agg = Agg::new(1e-12);
    let m = mdp::river(RIVER_EPS1, RIVER_EPS2).expect("valid parameters");
    let s1 = m.state_index("s1").unwrap();
    let s2 = m.state_index("s2").unwrap();
    let g = m.state_index("g").unwrap();
    let (a_f, a_j) = (0usize, 1usize);
    let _ = cfg;

    // The parameter window must be nonempty and contain γ.
    let lo = math::sqrt(RIVER_EPS1).max(RIVER_EPS2);
    let hi = RIVER_EPS1 / RIVER_EPS2;
    agg.geq(RIVER_GAMMA, lo, "window lower edge");
    agg.leq(RIVER_GAMMA, hi, "window upper edge");

    let pe = solve_optimal(&m, &Formulation::Pe { gamma: RIVER_GAMMA }, g, 1000).unwrap();
    agg.close(
        pe.branch.action_at(0, s1) as f64,
        a_f as f64,
        "Pe first action at s1",
    );
    agg.close(pe.values[s1], 0.1225, "Pe optimal value");

    let et = solve_optimal(&m, &Formulation::Et { k: 2 }, g, 1000).unwrap();
    agg.close(
        et.branch.action_at(0, s1) as f64,
        a_f as f64,
        "ET first action at s1",
    );
    agg.close(
        et.branch.action_at(1, s2) as f64,
        a_j as f64,
        "ET action at s2, t=1",
    );
    agg.close(et.values[s1], 0.2, "ET optimal value");

    let ow = solve_optimal(
        &m,
        &Formulation::Ow {
            k: 2,
            gamma: RIVER_GAMMA,
        },
        g,
        1000,
    )
    .unwrap();
    agg.close(
        ow.branch.action_at(0, s1) as f64,
        a_j as f64,
        "OW first action at s1",
    );
    agg.close(ow.values[s1], 0.08, "OW optimal value");

    agg.finish(ClaimId::P1, seed)
}

/// The persistent value approaches the long-run target occupancy as the
/// discount approaches 1.
pub fn check_a1(cfg: &SuiteConfig, seed: u64) -> ClaimCheck {
    let gamma = 0.999;
    // The occupancy limit differs from the γ<1 value by O(1-γ) scaled by
    // the chain's mixing horizon; 20·(1-γ) covers the desk-scale set.
    let mut agg = Agg::new(20.0 * (1.0 - gamma));
    let form = Formulation::Pe { gamma };

    for (n, inner) in cfg.sizes.iter().flat_map(|&n| (0..2).map(move |i| (n, i))) {
        let (m, desc) = random_instance(n, derive_seed(&[seed, n as u64, inner]));
        let pol = policy::random_policy(&m, Conditioning::Goals, 0, derive_seed(&[seed, inner, 1]));
        for g in 0..n {
            let b = pol.branch(g);
            let occ = stationary_occupancy(&m, &b, g, 0);
            let pe = eval_j_branch(&m, &form, &b, 0, g).unwrap().value;
            agg.close(occ, pe, &format!("{desc} g={g}"));
        }
    }
    agg.finish(ClaimId::A1, seed)
}

/// Persistent value equals the geometric mixture of exact-timing values.
pub fn check_a2(cfg: &SuiteConfig, seed: u64) -> ClaimCheck {
    let mut agg = Agg::new(1e-9);
    for &n in &cfg.sizes {
        let (m, desc) = random_instance(n, derive_seed(&[seed, n as u64]));
        let pol = policy::random_policy(&m, Conditioning::Goals, 2, derive_seed(&[seed, 2]));
        for gamma in [0.3, 0.7] {
            for g in 0..n {
                let b = pol.branch(g);
                let pe = eval_j_branch(&m, &Formulation::Pe { gamma }, &b, 0, g)
                    .unwrap()
                    .value;
                let geo = geometric_et_value(&m, &b, 0, g, gamma, 1e-12)
                    .unwrap()
                    .value;
                agg.close(pe, geo, &format!("{desc} γ={gamma} g={g}"));
            }
        }
    }
    agg.finish(ClaimId::A2, seed)
}

/// Near-undiscounted windowed values are the shortest-path expansion
/// `1 + ε - ε·d` up to second order.
pub fn check_a3(_cfg: &SuiteConfig, seed: u64) -> ClaimCheck {
    let eps = 1e-3;
    // Comparisons are normalized by the second-order remainder of
    // (1-ε)^(d-1), so the pass threshold is one unit.
    let mut agg = Agg::new(1.0);
    for n in [2usize, 3] {
        let m = mdp::grid(n).unwrap();
        let d_max = 2 * (n - 1);
        let tol = (eps * d_max.max(1) as f64) * (eps * d_max.max(1) as f64) + 1e-12;
        for g in 0..m.n_states() {
            let branch = shortest_path_branch(&m, g);
            let dist = shortest_path_distances(&m, g);
            for s in 0..m.n_states() {
                let d = if s == g { 1 } else { dist[s] };
                let k = d.max(1);
                let v = eval_j_branch(
                    &m,
                    &Formulation::Ow {
                        k,
                        gamma: 1.0 - eps,
                    },
                    &branch,
                    s,
                    g,
                )
                .unwrap()
                .value;
                let approx = 1.0 + eps - eps * d as f64;
                agg.close(
                    (v - approx) / tol,
                    0.0,
                    &format!("grid({n}) s={s} g={g} d={d}"),
                );
            }
        }
    }
    agg.finish(ClaimId::A3, seed)
}

/// One-step problems share their optimal action sets.
pub fn check_a4(cfg: &SuiteConfig, seed: u64) -> ClaimCheck {
    let mut agg = Agg::new(0.5);
    let forms = [
        Formulation::Pe { gamma: 0.0 },
        Formulation::Et { k: 1 },
        Formulation::Ow { k: 1, gamma: 0.7 },
        Formulation::Ow { k: 3, gamma: 0.0 },
    ];
    for &n in &cfg.sizes {
        let (m, desc) = random_instance(n, derive_seed(&[seed, n as u64, 4]));
        for g in 0..n {
            let branches: Vec<_> = forms
                .iter()
                .map(|f| solve_optimal(&m, f, g, 100).unwrap().branch)
                .collect();
            let mut mismatches = 0usize;
            for s in 0..n {
                // Returned first actions coincide under the shared
                // lowest-index tie-break.
                let first = branches[0].action_at(0, s);
                if branches.iter().any(|b| b.action_at(0, s) != first) {
                    mismatches += 1;
                }
                // And the argmax sets of the one-step scores coincide.
                let q: Vec<f64> = (0..m.n_actions(s)).map(|a| m.prob(s, a, g)).collect();
                let best = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                if q[first] < best - 1e-12 {
                    mismatches += 1;
                }
            }
            agg.leq(mismatches as f64, 0.0, &format!("{desc} g={g}"));
        }
    }
    agg.finish(ClaimId::A4, seed)
}

/// Stationary-branch identity between persistent and unbounded-window
/// values.
pub fn check_a5(cfg: &SuiteConfig, seed: u64) -> ClaimCheck {
    let mut agg = Agg::new(1e-9);
    for &n in &cfg.sizes {
        let (m, desc) = random_instance(n, derive_seed(&[seed, n as u64, 5]));
        let pol = policy::random_policy(&m, Conditioning::Goals, 0, derive_seed(&[seed, 5]));
        for gamma in [0.3, 0.7] {
            // γ^K < 1e-12 certifies the unbounded-window truncation.
            let k = (math::ln(1e-12) / math::ln(gamma)) as usize + 1;
            for g in 0..n {
                let b = pol.branch(g);
                let pe = eval_j_branch(&m, &Formulation::Pe { gamma }, &b, 0, g)
                    .unwrap()
                    .value;
                let ow_sg = eval_j_branch(&m, &Formulation::Ow { k, gamma }, &b, 0, g)
                    .unwrap()
                    .value;
                let ow_gg = eval_j_branch(&m, &Formulation::Ow { k, gamma }, &b, g, g)
                    .unwrap()
                    .value;
                let rhs = (1.0 - gamma) * ow_sg / (1.0 - gamma * ow_gg);
                agg.close(pe, rhs, &format!("{desc} γ={gamma} g={g}"));
            }
        }
    }
    agg.finish(ClaimId::A5, seed)
}

/// Shortest-path branches are optimal for both the persistent and the
/// windowed formulation on deterministic grids.
pub fn check_a6(_cfg: &SuiteConfig, seed: u64) -> ClaimCheck {
    let mut agg = Agg::new(1e-12);
    for n in [2usize, 3, 4] {
        let m = mdp::grid(n).unwrap();
        for g in 0..m.n_states() {
            let sp = shortest_path_branch(&m, g);
            for gamma in [0.5, 0.9] {
                let pe_opt = solve_optimal(&m, &Formulation::Pe { gamma }, g, 1000).unwrap();
                for s in 0..m.n_states() {
                    let v = eval_j_branch(&m, &Formulation::Pe { gamma }, &sp, s, g)
                        .unwrap()
                        .value;
                    agg.close(
                        v,
                        pe_opt.values[s],
                        &format!("grid({n}) Pe γ={gamma} s={s} g={g}"),
                    );
                }
                for k in [3usize, 6] {
                    let ow_opt = solve_optimal(&m, &Formulation::Ow { k, gamma }, g, 1000).unwrap();
                    for s in 0..m.n_states() {
                        let v = eval_j_branch(&m, &Formulation::Ow { k, gamma }, &sp, s, g)
                            .unwrap()
                            .value;
                        agg.close(
                            v,
                            ow_opt.values[s],
                            &format!("grid({n}) OW K={k} γ={gamma} s={s} g={g}"),
                        );
                    }
                }
            }
        }
    }
    agg.finish(ClaimId::A6, seed)
}

/// With waiting actions, undiscounted windowed optima equal exact-timing
/// optima.
pub fn check_a7(_cfg: &SuiteConfig, seed: u64) -> ClaimCheck {
    let mut agg = Agg::new(1e-12);
    for n in [2usize, 3] {
        let m = mdp::grid(n).unwrap();
        assert!(m.predicates().has_waiting_actions);
        for k in [3usize, 6] {
            for g in 0..m.n_states() {
                let ow = solve_optimal(&m, &Formulation::Ow { k, gamma: 1.0 }, g, 1000).unwrap();
                let et = solve_optimal(&m, &Formulation::Et { k }, g, 1000).unwrap();
                for s in 0..m.n_states() {
                    agg.close(
                        ow.values[s],
                        et.values[s],
                        &format!("grid({n}) K={k} s={s} g={g}"),
                    );
                }
            }
        }
    }
    agg.finish(ClaimId::A7, seed)
}

fn t1_policies(k_hint: usize, s0: usize) -> Vec<PolicyFamily> {
    vec![
        PolicyFamily::Random { horizon: 3 },
        PolicyFamily::GoalIndependent,
        PolicyFamily::ComposedConsistent {
            n_z: 2,
            formulation: Formulation::Et { k: k_hint },
            s0,
        },
    ]
}

/// Test-time value decomposes exactly as sensitivity plus 1/N for the
/// persistent and exact-timing formulations under uniform goals.
pub fn check_t1_1(cfg: &SuiteConfig, seed: u64) -> ClaimCheck {
    let mut agg = Agg::new(1e-10);
    for &n in &cfg.sizes {
        let (m, desc) = random_instance(n, derive_seed(&[seed, n as u64, 11]));
        let u = GoalDistribution::uniform(n);
        for (i, family) in t1_policies(2, 0).iter().enumerate() {
            let (pol, pdesc) = build_policy(&m, family, derive_seed(&[seed, i as u64, 11]));
            let forms = [
                Formulation::Pe { gamma: 0.3 },
                Formulation::Pe { gamma: 0.9 },
                Formulation::Et { k: 1 },
                Formulation::Et { k: 2 },
                Formulation::Et { k: 3 },
            ];
            for form in &forms {
                let j = test_time_performance(&m, form, &pol, 0, &u).unwrap();
                let c = goal_sensitivity(&m, form, &pol, 0, &u).unwrap().c_value;
                agg.close(j, c + 1.0 / n as f64, &format!("{desc} {pdesc} {form:?}"));
            }
        }
    }
    agg.finish(ClaimId::T1_1, seed)
}

/// For windowed and non-negative-reward formulations the value dominates
/// `N/(N-1)` times the sensitivity, with equality on disjoint-reaching
/// instances.
pub fn check_t1_2(cfg: &SuiteConfig, seed: u64) -> ClaimCheck {
    let mut agg = Agg::new(1e-10);
    for &n in &cfg.sizes {
        let (m, desc) = random_instance(n, derive_seed(&[seed, n as u64, 12]));
        let u = GoalDistribution::uniform(n);
        let ratio = n as f64 / (n as f64 - 1.0);
        for (i, family) in t1_policies(2, 0).iter().enumerate() {
            let (pol, pdesc) = build_policy(&m, family, derive_seed(&[seed, i as u64, 12]));
            let mut forms = vec![
                Formulation::Ow { k: 1, gamma: 0.9 },
                Formulation::Ow { k: 2, gamma: 0.35 },
                Formulation::Ow { k: 3, gamma: 0.9 },
            ];
            if i == 0 {
                forms.push(random_nonneg_general(n, seed));
            }
            for form in &forms {
                let j = test_time_performance(&m, form, &pol, 0, &u).unwrap();
                let c = goal_sensitivity(&m, form, &pol, 0, &u).unwrap().c_value;
                agg.geq(j, ratio * c, &format!("{desc} {pdesc}"));
            }
        }
    }
    // Equality on the star instance.
    let star = mdp::star(4).unwrap();
    let pol = star_diagonal_policy(&star);
    let u = GoalDistribution::uniform(5);
    let form = Formulation::Ow { k: 2, gamma: 0.7 };
    let j = test_time_performance(&star, &form, &pol, 0, &u).unwrap();
    let c = goal_sensitivity(&star, &form, &pol, 0, &u).unwrap().c_value;
    agg.close(j, 5.0 / 4.0 * c, "star(4) equality");
    agg.finish(ClaimId::T1_2, seed)
}

/// A maximally in-control policy can be strictly suboptimal for the
/// windowed formulation, but its regret obeys the sensitivity bound.
pub fn check_t1_3(cfg: &SuiteConfig, seed: u64) -> ClaimCheck {
    let mut agg = Agg::new(1e-10);
    for &n in cfg.sizes.iter().filter(|&&n| n <= 4) {
        let (m, desc) = random_instance(n, derive_seed(&[seed, n as u64, 13]));
        let u = GoalDistribution::uniform(n);
        for (k, gamma) in [(2usize, 0.9), (2, 1.0)] {
            let form = Formulation::Ow { k, gamma };
            let (incontrol, c_star, exact) =
                search_max_incontrol(&m, &form, 0, &u, cfg.cap).unwrap();
            if !exact {
                // The regret bound stays valid with a certified lower
                // bound on the controllability (the right side only
                // grows); the claim is then bound-checked, not exact.
                agg.mark_bound_checked();
            }
            let j_incontrol = test_time_performance(&m, &form, &incontrol, 0, &u).unwrap();
            let mut j_star = 0.0;
            for g in 0..n {
                j_star += solve_optimal(&m, &form, g, 100).unwrap().values[0] / n as f64;
            }
            let inst = format!("{desc} K={k} γ={gamma}");
            agg.geq(j_star, j_incontrol, &inst);
            agg.leq(
                j_star - j_incontrol,
                1.0 - n as f64 / (n as f64 - 1.0) * c_star,
                &inst,
            );
        }
    }
    agg.finish(ClaimId::T1_3, seed)
}

/// Goal-behavior MI is lower-bounded through the error-probability
/// function for every policy.
pub fn check_t2_1(cfg: &SuiteConfig, seed: u64) -> ClaimCheck {
    let mut agg = Agg::new(1e-10);
    for &n in &cfg.sizes {
        let (m, desc) = random_instance(n, derive_seed(&[seed, n as u64, 21]));
        let u = GoalDistribution::uniform(n);
        for (i, family) in [
            PolicyFamily::Random { horizon: 2 },
            PolicyFamily::GoalIndependent,
        ]
        .iter()
        .enumerate()
        {
            let (pol, pdesc) = build_policy(&m, family, derive_seed(&[seed, i as u64, 21]));
            for (var, form) in [
                (
                    BehaviorVariable::SGammaPlus { gamma: 0.5 },
                    Formulation::Pe { gamma: 0.5 },
                ),
                (BehaviorVariable::SK { k: 2 }, Formulation::Et { k: 2 }),
            ] {
                let mi = goal_behavior_mi(&m, &pol, 0, &u, &var, cfg.cap).unwrap();
                let c = goal_sensitivity(&m, &form, &pol, 0, &u).unwrap().c_value;
                let bound = phi_down(n, (1.0 / n as f64 + c).clamp(0.0, 1.0), None).unwrap();
                agg.geq(mi, bound, &format!("{desc} {pdesc} {var:?}"));
            }
        }
    }
    // The river with each formulation-optimal policy family, under the
    // matching behavioral variable.
    let river = mdp::river(RIVER_EPS1, RIVER_EPS2).expect("valid parameters");
    let s1 = river.state_index("s1").unwrap();
    let u5 = GoalDistribution::uniform(5);
    for (var, form) in [
        (
            BehaviorVariable::SGammaPlus { gamma: RIVER_GAMMA },
            Formulation::Pe { gamma: RIVER_GAMMA },
        ),
        (BehaviorVariable::SK { k: 2 }, Formulation::Et { k: 2 }),
        (
            BehaviorVariable::FirstVisitVector {
                k: 2,
                gamma: RIVER_GAMMA,
            },
            Formulation::Ow {
                k: 2,
                gamma: RIVER_GAMMA,
            },
        ),
    ] {
        let pol = crate::values::optimal_policy(&river, &form, 1000).unwrap();
        let mi = goal_behavior_mi(&river, &pol, s1, &u5, &var, cfg.cap).unwrap();
        let c = goal_sensitivity(&river, &form, &pol, s1, &u5)
            .unwrap()
            .c_value;
        let bound = match var {
            BehaviorVariable::FirstVisitVector { .. } => ow_mi_lower_bound(c),
            _ => phi_down(5, (0.2 + c).clamp(0.0, 1.0), None).unwrap(),
        };
        agg.geq(mi, bound, &format!("river optimal {var:?}"));
    }
    agg.finish(ClaimId::T2_1, seed)
}

/// For consistent policies the MI is also upper-bounded.
pub fn check_t2_2(cfg: &SuiteConfig, seed: u64) -> ClaimCheck {
    let mut agg = Agg::new(1e-10);
    for &n in &cfg.sizes {
        let (m, desc) = random_instance(n, derive_seed(&[seed, n as u64, 22]));
        let u = GoalDistribution::uniform(n);
        for (var, form) in [
            (
                BehaviorVariable::SGammaPlus { gamma: 0.5 },
                Formulation::Pe { gamma: 0.5 },
            ),
            (BehaviorVariable::SK { k: 2 }, Formulation::Et { k: 2 }),
        ] {
            let (pol, pdesc) =
                composed_consistent_policy(&m, &form, 2, 0, derive_seed(&[seed, 22]));
            let mi = goal_behavior_mi(&m, &pol, 0, &u, &var, cfg.cap).unwrap();
            let c = goal_sensitivity(&m, &form, &pol, 0, &u).unwrap().c_value;
            let bound = phi_up(n, (1.0 / n as f64 + c).clamp(1e-12, 1.0), None).unwrap();
            agg.leq(mi, bound, &format!("{desc} {pdesc} {var:?}"));
        }
    }
    agg.finish(ClaimId::T2_2, seed)
}

/// First-visit-vector MI dominates twice the squared windowed
/// sensitivity for every policy.
pub fn check_t2_3(cfg: &SuiteConfig, seed: u64) -> ClaimCheck {
    let mut agg = Agg::new(1e-10);
    for &n in &cfg.sizes {
        let (m, desc) = random_instance(n, derive_seed(&[seed, n as u64, 23]));
        let u = GoalDistribution::uniform(n);
        for (k, gamma) in [(2usize, 0.5), (3, 0.9)] {
            let form = Formulation::Ow { k, gamma };
            for (i, family) in [
                PolicyFamily::Random { horizon: k },
                PolicyFamily::ComposedConsistent {
                    n_z: 2,
                    formulation: form.clone(),
                    s0: 0,
                },
            ]
            .iter()
            .enumerate()
            {
                let (pol, pdesc) = build_policy(&m, family, derive_seed(&[seed, i as u64, 23]));
                let mi = goal_behavior_mi(
                    &m,
                    &pol,
                    0,
                    &u,
                    &BehaviorVariable::FirstVisitVector { k, gamma },
                    cfg.cap,
                )
                .unwrap();
                let c = goal_sensitivity(&m, &form, &pol, 0, &u).unwrap().c_value;
                agg.geq(
                    mi,
                    ow_mi_lower_bound(c),
                    &format!("{desc} {pdesc} K={k} γ={gamma}"),
                );
            }
        }
    }
    agg.finish(ClaimId::T2_3, seed)
}

/// The skill-MI/goal-MI gap is controlled by the uniformity of the
/// downstream skill distribution, and vanishes for equal preimages.
pub fn check_p3(cfg: &SuiteConfig, seed: u64) -> ClaimCheck {
    let mut agg = Agg::new(1e-10);
    for &n in &cfg.sizes {
        let (m, desc) = random_instance(n, derive_seed(&[seed, n as u64, 3]));
        let u = GoalDistribution::uniform(n);
        let var = BehaviorVariable::SK { k: 2 };
        let mut rng = SplitMix64::new(derive_seed(&[seed, 0x93]));
        for trial in 0..3 {
            let n_z = 2 + rng.next_index(n - 1).min(n - 2);
            let skills = policy::random_policy(
                &m,
                Conditioning::Skills(n_z),
                2,
                derive_seed(&[seed, trial, 0x93]),
            );
            let assign: Vec<usize> = (0..n).map(|_| rng.next_index(n_z)).collect();
            let f = GoalToSkillMap::plain(assign, n_z).unwrap();
            let composed = policy::compose_downstream(&m, &skills, &f).unwrap();
            let j_misl =
                misl_objective(&m, &skills, 0, &uniform_prior(n_z), &var, cfg.cap).unwrap();
            let i_goal = goal_behavior_mi(&m, &composed, 0, &u, &var, cfg.cap).unwrap();
            let p_f = downstream_skill_distribution(&f, &u).unwrap();
            let b = mi_gap_bound(&p_f, n).unwrap();
            if !b.applicable {
                agg.skip("more skills than outcomes");
                continue;
            }
            agg.leq(
                (j_misl - i_goal).abs(),
                b.bound,
                &format!("{desc} n_z={n_z} trial={trial}"),
            );
        }
    }
    // The zero-gap case: equal preimages under uniform goals.
    let (m, desc) = random_instance(4, derive_seed(&[seed, 0x39]));
    let u = GoalDistribution::uniform(4);
    let skills = policy::random_policy(&m, Conditioning::Skills(2), 2, derive_seed(&[seed, 0x99]));
    let f = GoalToSkillMap::plain(vec![0, 0, 1, 1], 2).unwrap();
    let composed = policy::compose_downstream(&m, &skills, &f).unwrap();
    let var = BehaviorVariable::SK { k: 2 };
    let j_misl = misl_objective(&m, &skills, 0, &uniform_prior(2), &var, cfg.cap).unwrap();
    let i_goal = goal_behavior_mi(&m, &composed, 0, &u, &var, cfg.cap).unwrap();
    let mut eq = Agg::new(1e-12);
    eq.close(j_misl, i_goal, &format!("{desc} equal preimages"));
    let eq_check = eq.finish(ClaimId::P3, seed);
    let mut check = agg.finish(ClaimId::P3, seed);
    if eq_check.status == ClaimStatus::Fail {
        check.status = ClaimStatus::Fail;
        check.lhs = eq_check.lhs;
        check.rhs = eq_check.rhs;
        check.detail = eq_check.detail;
    }
    check
}

/// One-step controllability equals the exact-timing controllability at
/// horizon one.
pub fn check_b1(cfg: &SuiteConfig, seed: u64) -> ClaimCheck {
    let mut agg = Agg::new(1e-12);
    for &n in &cfg.sizes {
        for trial in 0..3u64 {
            let (m, desc) = random_instance(n, derive_seed(&[seed, n as u64, trial, 0xb1]));
            let u = GoalDistribution::uniform(n);
            for s in 0..n {
                let direct = one_step_controllability(&m, s);
                let c_star =
                    objective_controllability(&m, &Formulation::Et { k: 1 }, s, &u, cfg.cap)
                        .unwrap();
                agg.close(direct, c_star.value, &format!("{desc} s={s}"));
            }
        }
    }
    agg.finish(ClaimId::B1, seed)
}

/// Empowerment and exact-timing controllability agree on deterministic
/// environments through `log(1 + N·C*)`.
pub fn check_b2(cfg: &SuiteConfig, seed: u64) -> ClaimCheck {
    let mut agg = Agg::new(1e-10);
    let mut instances = vec![
        (mdp::grid(2).unwrap(), "grid(2)".to_string()),
        (mdp::grid(3).unwrap(), "grid(3)".to_string()),
    ];
    for trial in 0..2u64 {
        let s = derive_seed(&[seed, trial, 0xb2]);
        let m = mdp::random_mdp(4, 2, 1, s).unwrap();
        instances.push((m, format!("random-deterministic(4,2) seed={s}")));
    }
    for (m, desc) in &instances {
        let n = m.n_states();
        let u = GoalDistribution::uniform(n);
        for k in [1usize, 2] {
            for s in [0, n - 1] {
                let emp = klyubin_empowerment(m, s, k, cfg.cap).unwrap().value;
                let c = objective_controllability(m, &Formulation::Et { k }, s, &u, cfg.cap)
                    .unwrap()
                    .value;
                agg.close(
                    emp,
                    math::ln(1.0 + n as f64 * c),
                    &format!("{desc} K={k} s={s}"),
                );
            }
        }
    }
    agg.finish(ClaimId::B2, seed)
}

/// Goal-state MI never exceeds empowerment, strictly on the three-state
/// branching example.
pub fn check_c1(cfg: &SuiteConfig, seed: u64) -> ClaimCheck {
    let mut agg = Agg::new(1e-10);
    for &n in &cfg.sizes {
        let (m, desc) = random_instance(n, derive_seed(&[seed, n as u64, 0xc1]));
        let u = GoalDistribution::uniform(n);
        for k in [1usize, 2] {
            let emp = klyubin_empowerment(&m, 0, k, cfg.cap).unwrap();
            let cap_value = emp.value + emp.residual;
            for trial in 0..5u64 {
                let pol = policy::random_policy(
                    &m,
                    Conditioning::Goals,
                    k,
                    derive_seed(&[seed, trial, 0xc1]),
                );
                let mi = goal_behavior_mi(&m, &pol, 0, &u, &BehaviorVariable::SK { k }, cfg.cap)
                    .unwrap();
                agg.leq(mi, cap_value, &format!("{desc} K={k} trial={trial}"));
            }
        }
    }
    // Strictness witness: two perfectly distinguishable successors but
    // three goals. Capacity ln 2; best goal-MI h(1/3); gap > 0.05.
    let m = two_armed_branching();
    let emp = klyubin_empowerment(&m, 0, 1, cfg.cap).unwrap().value;
    let best_mi = max_goal_mi_deterministic(&m, 0, 1).unwrap();
    agg.close(emp, math::ln(2.0), "two-armed capacity");
    agg.close(
        best_mi,
        info::binary_entropy(1.0 / 3.0).unwrap(),
        "two-armed best goal MI",
    );
    agg.geq(emp - best_mi, 0.05, "two-armed strict gap");
    agg.finish(ClaimId::C1, seed)
}

/// Three states, two hub actions each surely reaching a distinct
/// absorbing target — the smallest instance where empowerment strictly
/// exceeds the best goal-state information.
fn two_armed_branching() -> mdp::FiniteMdp {
    mdp::FiniteMdp::new(
        vec!["s".to_string(), "g1".to_string(), "g2".to_string()],
        vec![
            vec!["a1".to_string(), "a2".to_string()],
            vec!["stay".to_string()],
            vec!["stay".to_string()],
        ],
        vec![
            vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
            vec![vec![0.0, 1.0, 0.0]],
            vec![vec![0.0, 0.0, 1.0]],
        ],
    )
    .expect("valid by construction")
}

/// On deterministic environments the best goal-state MI sits between the
/// error-probability bound and the reachable-set bound.
pub fn check_c2(cfg: &SuiteConfig, seed: u64) -> ClaimCheck {
    let mut agg = Agg::new(1e-10);
    for n in [2usize, 3] {
        let m = mdp::grid(n).unwrap();
        let ns = m.n_states();
        let u = GoalDistribution::uniform(ns);
        for k in [1usize, 2] {
            for s in [0, ns - 1] {
                let c_star = objective_controllability(&m, &Formulation::Et { k }, s, &u, cfg.cap)
                    .unwrap()
                    .value;
                let best = max_goal_mi_deterministic(&m, s, k).unwrap();
                let lo = phi_down(ns, (1.0 / ns as f64 + c_star).clamp(0.0, 1.0), None).unwrap();
                let hi = math::ln(1.0 + ns as f64 * c_star);
                let inst = format!("grid({n}) K={k} s={s}");
                agg.geq(best, lo, &inst);
                agg.leq(best, hi, &inst);
            }
        }
    }
    agg.finish(ClaimId::C2, seed)
}

/// Data processing: conditioning on richer behavioral variables can only
/// increase the MI.
pub fn check_c3(cfg: &SuiteConfig, seed: u64) -> ClaimCheck {
    let mut agg = Agg::new(1e-10);
    for &n in &cfg.sizes {
        let (m, desc) = random_instance(n, derive_seed(&[seed, n as u64, 0xc3]));
        let u = GoalDistribution::uniform(n);
        let k = 3;
        let gamma = 0.6;
        let pol = policy::random_policy(&m, Conditioning::Goals, k, derive_seed(&[seed, 0xc3]));
        let traj = behavior_joint(
            &m,
            &pol,
            0,
            u.weights(),
            &BehaviorVariable::TrajectoryK { k },
            cfg.cap,
        )
        .unwrap();
        let i_traj = traj.mutual_information();
        let seq = traj.map_outcomes(|o| match o {
            Outcome::Traj(steps) => Outcome::StateSeq(steps.iter().map(|&(_, s)| s).collect()),
            other => other.clone(),
        });
        let i_seq = seq.mutual_information();
        let i_sk = seq
            .map_outcomes(|o| match o {
                Outcome::StateSeq(states) => Outcome::State(*states.last().unwrap()),
                other => other.clone(),
            })
            .mutual_information();
        let i_fvec = seq
            .map_outcomes(|o| match o {
                Outcome::StateSeq(states) => {
                    let mut first = vec![None; n];
                    for (t, &s) in states.iter().enumerate() {
                        if first[s].is_none() {
                            first[s] = Some(t + 1);
                        }
                    }
                    Outcome::FVec(
                        first
                            .iter()
                            .map(|&h| info::FEntry::from_first_visit(h, gamma))
                            .collect(),
                    )
                }
                other => other.clone(),
            })
            .mutual_information();
        agg.leq(i_sk, i_seq, &format!("{desc} state vs sequence"));
        agg.leq(i_seq, i_traj, &format!("{desc} sequence vs trajectory"));
        agg.leq(i_fvec, i_seq, &format!("{desc} first-visit vs sequence"));
        // The directly enumerated first-visit joint agrees with the
        // projection route.
        let direct = goal_behavior_mi(
            &m,
            &pol,
            0,
            &u,
            &BehaviorVariable::FirstVisitVector { k, gamma },
            cfg.cap,
        )
        .unwrap();
        agg.close(direct, i_fvec, &format!("{desc} projection agreement"));
    }
    agg.finish(ClaimId::C3, seed)
}

/// The conditional upper bound on first-visit information holds whenever
/// its assumptions do; failing instances are skipped, never failed.
pub fn check_d1(cfg: &SuiteConfig, seed: u64) -> ClaimCheck {
    let mut agg = Agg::new(1e-10);
    // Guaranteed-applicable structured instance.
    let star = mdp::star(3).unwrap();
    let pol = star_diagonal_policy(&star);
    let u = GoalDistribution::uniform(4);
    let d = ow_upper_bound(&star, &pol, 0, 2, 0.5, &u, cfg.cap).unwrap();
    if let Some(bound) = d.bound {
        agg.leq(
            d.mi,
            bound,
            &format!(
                "star(3) η={:.3} δ={:.3} ε={:.3e}",
                d.eta, d.delta, d.epsilon_interference
            ),
        );
    } else {
        agg.skip("star assumptions failed unexpectedly");
    }
    // Random composed policies: check when assumptions hold.
    for &n in &cfg.sizes {
        let (m, desc) = random_instance(n, derive_seed(&[seed, n as u64, 0xd1]));
        let u = GoalDistribution::uniform(n);
        for (k, gamma) in [(2usize, 0.5), (2, 0.8)] {
            let form = Formulation::Ow { k, gamma };
            let (pol, pdesc) =
                composed_consistent_policy(&m, &form, 2, 0, derive_seed(&[seed, k as u64, 0xd1]));
            let diag = ow_upper_bound(&m, &pol, 0, k, gamma, &u, cfg.cap).unwrap();
            match diag.bound {
                Some(bound) => agg.leq(diag.mi, bound, &format!("{desc} {pdesc} K={k} γ={gamma}")),
                None => agg.skip("tail-dominance assumption failed"),
            }
        }
    }
    agg.finish(ClaimId::D1, seed)
}

/// The argmax goal-to-skill map always yields a consistent downstream
/// policy.
pub fn check_e1(cfg: &SuiteConfig, seed: u64) -> ClaimCheck {
    let mut agg = Agg::new(0.5);
    for &n in &cfg.sizes {
        let (m, desc) = random_instance(n, derive_seed(&[seed, n as u64, 0xe1]));
        let u = GoalDistribution::uniform(n);
        for form in [
            Formulation::Pe { gamma: 0.5 },
            Formulation::Et { k: 2 },
            Formulation::Ow { k: 2, gamma: 0.7 },
        ] {
            let skills =
                policy::random_policy(&m, Conditioning::Skills(2), 1, derive_seed(&[seed, 0xe1]));
            let f = misl::consistent_mapping(&m, &form, &skills).unwrap();
            for s0 in 0..n {
                let composed = policy::compose_downstream_from(&m, &skills, &f, s0).unwrap();
                let report =
                    check_consistency(&m, &form, &composed, ConsistencyMode::Plain, &u).unwrap();
                let violations_at_s0 = report
                    .violations
                    .iter()
                    .filter(|v| matches!(v, ConsistencyViolation::Gap { s, .. } if *s == s0))
                    .count();
                let inst = format!("{desc} {form:?} s0={s0}");
                agg.leq(violations_at_s0 as f64, 0.0, &inst);
                // A consistent policy has non-negative goal-sensitivity;
                // count a violation if that fails.
                let c = goal_sensitivity(&m, &form, &composed, s0, &u)
                    .unwrap()
                    .c_value;
                agg.leq(f64::from(u8::from(c < -1e-12)), 0.0, &inst);
            }
        }
    }
    agg.finish(ClaimId::E1, seed)
}

/// Identity decoding is Bayes-optimal exactly when the policy is
/// consistent.
pub fn check_f1(cfg: &SuiteConfig, seed: u64) -> ClaimCheck {
    let mut agg = Agg::new(1e-12);
    for &n in &cfg.sizes {
        let (m, desc) = random_instance(n, derive_seed(&[seed, n as u64, 0xf1]));
        let u = GoalDistribution::uniform(n);
        // Bayes never loses on arbitrary policies.
        let pol = policy::random_policy(&m, Conditioning::Goals, 2, derive_seed(&[seed, 0xf1]));
        let joint = behavior_joint(
            &m,
            &pol,
            0,
            u.weights(),
            &BehaviorVariable::SK { k: 2 },
            cfg.cap,
        )
        .unwrap();
        let (pe, pe_star) = decoder_errors(&joint).unwrap();
        agg.leq(pe_star, pe, &format!("{desc} random policy"));
        // Equality for consistent compositions, on both state variables.
        for (var, form) in [
            (BehaviorVariable::SK { k: 2 }, Formulation::Et { k: 2 }),
            (
                BehaviorVariable::SGammaPlus { gamma: 0.5 },
                Formulation::Pe { gamma: 0.5 },
            ),
        ] {
            let (cpol, pdesc) =
                composed_consistent_policy(&m, &form, 2, 0, derive_seed(&[seed, 0xf2]));
            let joint = behavior_joint(&m, &cpol, 0, u.weights(), &var, cfg.cap).unwrap();
            let (pe, pe_star) = decoder_errors(&joint).unwrap();
            agg.close(pe, pe_star, &format!("{desc} {pdesc} {var:?}"));
        }
        // Goal-independent policies: both errors are 1 - 1/N.
        let (gi, _) = build_policy(
            &m,
            &PolicyFamily::GoalIndependent,
            derive_seed(&[seed, 0xf3]),
        );
        let joint = behavior_joint(
            &m,
            &gi,
            0,
            u.weights(),
            &BehaviorVariable::SK { k: 2 },
            cfg.cap,
        )
        .unwrap();
        let (pe, pe_star) = decoder_errors(&joint).unwrap();
        agg.close(
            pe,
            1.0 - 1.0 / n as f64,
            &format!("{desc} goal-independent"),
        );
        agg.close(
            pe_star,
            1.0 - 1.0 / n as f64,
            &format!("{desc} goal-independent"),
        );
    }
    agg.finish(ClaimId::F1, seed)
}

/// Non-uniform goal weights: the value sits between the extreme masses
/// plus the sensitivity, and the windowed lower bound scales by
/// `1/(1 - p_min)`.
pub fn check_g_t1(cfg: &SuiteConfig, seed: u64) -> ClaimCheck {
    let mut agg = Agg::new(1e-10);
    for &n in &cfg.sizes {
        let (m, desc) = random_instance(n, derive_seed(&[seed, n as u64, 0x61]));
        let p = seeded_goal_distribution(n, derive_seed(&[seed, n as u64]));
        let (p_min, p_max) = (p.min_mass(), p.max_mass());
        for (i, family) in t1_policies(2, 0).iter().enumerate() {
            let (pol, pdesc) = build_policy(&m, family, derive_seed(&[seed, i as u64, 0x61]));
            for form in [Formulation::Pe { gamma: 0.4 }, Formulation::Et { k: 2 }] {
                let j = test_time_performance(&m, &form, &pol, 0, &p).unwrap();
                let c = goal_sensitivity(&m, &form, &pol, 0, &p).unwrap().c_value;
                let inst = format!("{desc} {pdesc} {form:?}");
                agg.geq(j, p_min + c, &inst);
                agg.leq(j, p_max + c, &inst);
            }
            let ow = Formulation::Ow { k: 2, gamma: 0.7 };
            let j = test_time_performance(&m, &ow, &pol, 0, &p).unwrap();
            let c = goal_sensitivity(&m, &ow, &pol, 0, &p).unwrap().c_value;
            agg.geq(j, c / (1.0 - p_min), &format!("{desc} {pdesc} windowed"));
        }
    }
    agg.finish(ClaimId::GT1, seed)
}

/// Strong consistency at the start state (within slack) for every goal
/// pair.
fn strongly_consistent_at(
    mdp: &mdp::FiniteMdp,
    form: &Formulation,
    pol: &policy::GoalConditionedPolicy,
    s0: usize,
    p: &GoalDistribution,
) -> bool {
    let n = mdp.n_states();
    let w = p.weights();
    let mut per_branch = Vec::with_capacity(n);
    for gp in 0..n {
        per_branch
            .push(crate::sensitivity::branch_value_vector(mdp, form, &pol.branch(gp), s0).unwrap());
    }
    for g in 0..n {
        for gp in 0..n {
            let factor = (w[gp] / w[g]).max(1.0);
            if per_branch[g][g] + 1e-12 < factor * per_branch[gp][g] {
                return false;
            }
        }
    }
    true
}

/// Generalized MI brackets with the goal entropy in place of `ln N`,
/// gated on strong consistency at the start state.
pub fn check_g_t2(cfg: &SuiteConfig, seed: u64) -> ClaimCheck {
    let mut agg = Agg::new(1e-10);
    // Structured instance where strong consistency holds at the hub.
    let star = mdp::star(3).unwrap();
    let pol = star_diagonal_policy(&star);
    let n = star.n_states();
    let p = seeded_goal_distribution(n, derive_seed(&[seed, 0x62]));
    let h_goal = p.entropy();
    for (var, form) in [
        (BehaviorVariable::SK { k: 2 }, Formulation::Et { k: 2 }),
        (
            BehaviorVariable::SGammaPlus { gamma: 0.5 },
            Formulation::Pe { gamma: 0.5 },
        ),
    ] {
        if !strongly_consistent_at(&star, &form, &pol, 0, &p) {
            agg.skip("star unexpectedly not strongly consistent");
            continue;
        }
        let mi = goal_behavior_mi(&star, &pol, 0, &p, &var, cfg.cap).unwrap();
        let c = goal_sensitivity(&star, &form, &pol, 0, &p).unwrap().c_value;
        let j = test_time_performance(&star, &form, &pol, 0, &p).unwrap();
        let inst = format!("star(3) {var:?}");
        agg.geq(
            mi,
            phi_down(n, j.clamp(0.0, 1.0), Some(h_goal)).unwrap(),
            &inst,
        );
        agg.geq(
            mi,
            phi_down(n, (p.min_mass() + c).clamp(0.0, 1.0), Some(h_goal)).unwrap(),
            &inst,
        );
        agg.leq(
            mi,
            phi_up(n, j.clamp(1e-12, 1.0), Some(h_goal)).unwrap(),
            &inst,
        );
        agg.leq(
            mi,
            phi_up(n, (p.max_mass() + c).clamp(1e-12, 1.0), Some(h_goal)).unwrap(),
            &inst,
        );
    }
    // The windowed Pinsker bound needs no consistency.
    for &nn in &cfg.sizes {
        let (m, desc) = random_instance(nn, derive_seed(&[seed, nn as u64, 0x62]));
        let p = seeded_goal_distribution(nn, derive_seed(&[seed, nn as u64, 1]));
        let pol = policy::random_policy(
            &m,
            Conditioning::Goals,
            2,
            derive_seed(&[seed, nn as u64, 2]),
        );
        let (k, gamma) = (2usize, 0.6);
        let mi = goal_behavior_mi(
            &m,
            &pol,
            0,
            &p,
            &BehaviorVariable::FirstVisitVector { k, gamma },
            cfg.cap,
        )
        .unwrap();
        let c = goal_sensitivity(&m, &Formulation::Ow { k, gamma }, &pol, 0, &p)
            .unwrap()
            .c_value;
        agg.geq(
            mi,
            ow_mi_lower_bound(c),
            &format!("{desc} windowed Pinsker"),
        );
        // Random composed policies occasionally satisfy strong
        // consistency; check the brackets when they do.
        for (var, form) in [(BehaviorVariable::SK { k: 2 }, Formulation::Et { k: 2 })] {
            let (cpol, pdesc) =
                composed_consistent_policy(&m, &form, 2, 0, derive_seed(&[seed, nn as u64, 3]));
            if !strongly_consistent_at(&m, &form, &cpol, 0, &p) {
                agg.skip("strong consistency fails on this instance");
                continue;
            }
            let mi = goal_behavior_mi(&m, &cpol, 0, &p, &var, cfg.cap).unwrap();
            let c = goal_sensitivity(&m, &form, &cpol, 0, &p).unwrap().c_value;
            let h = p.entropy();
            agg.geq(
                mi,
                phi_down(nn, (p.min_mass() + c).clamp(0.0, 1.0), Some(h)).unwrap(),
                &format!("{desc} {pdesc}"),
            );
            agg.leq(
                mi,
                phi_up(nn, (p.max_mass() + c).clamp(1e-12, 1.0), Some(h)).unwrap(),
                &format!("{desc} {pdesc}"),
            );
        }
    }
    agg.finish(ClaimId::GT2, seed)
}

/// Generalized decoder lemma: identity decoding stays Bayes-optimal
/// under strong consistency with non-uniform goals.
pub fn check_g_l1(cfg: &SuiteConfig, seed: u64) -> ClaimCheck {
    let mut agg = Agg::new(1e-12);
    let star = mdp::star(3).unwrap();
    let pol = star_diagonal_policy(&star);
    let n = star.n_states();
    let p = seeded_goal_distribution(n, derive_seed(&[seed, 0x63]));
    let form = Formulation::Et { k: 2 };
    if strongly_consistent_at(&star, &form, &pol, 0, &p) {
        let joint = behavior_joint(
            &star,
            &pol,
            0,
            p.weights(),
            &BehaviorVariable::SK { k: 2 },
            cfg.cap,
        )
        .unwrap();
        let (pe, pe_star) = decoder_errors(&joint).unwrap();
        agg.close(pe, pe_star, "star(3) strong-consistent equality");
    } else {
        agg.skip("star not strongly consistent");
    }
    // Bayes never loses with non-uniform priors either.
    for &nn in &cfg.sizes {
        let (m, desc) = random_instance(nn, derive_seed(&[seed, nn as u64, 0x63]));
        let p = seeded_goal_distribution(nn, derive_seed(&[seed, nn as u64, 5]));
        let pol = policy::random_policy(
            &m,
            Conditioning::Goals,
            2,
            derive_seed(&[seed, nn as u64, 6]),
        );
        let joint = behavior_joint(
            &m,
            &pol,
            0,
            p.weights(),
            &BehaviorVariable::SK { k: 2 },
            cfg.cap,
        )
        .unwrap();
        let (pe, pe_star) = decoder_errors(&joint).unwrap();
        agg.leq(pe_star, pe, desc.as_str());
    }
    agg.finish(ClaimId::GL1, seed)
}

/// The uniformity gap bound is independent of the goal distribution.
pub fn check_g_p3(cfg: &SuiteConfig, seed: u64) -> ClaimCheck {
    let mut agg = Agg::new(1e-10);
    for &n in &cfg.sizes {
        let (m, desc) = random_instance(n, derive_seed(&[seed, n as u64, 0x64]));
        let p = seeded_goal_distribution(n, derive_seed(&[seed, n as u64, 7]));
        let var = BehaviorVariable::SK { k: 2 };
        let mut rng = SplitMix64::new(derive_seed(&[seed, 0x64]));
        for trial in 0..3u64 {
            let n_z = 2.min(n);
            let skills = policy::random_policy(
                &m,
                Conditioning::Skills(n_z),
                2,
                derive_seed(&[seed, trial, 0x64]),
            );
            let assign: Vec<usize> = (0..n).map(|_| rng.next_index(n_z)).collect();
            let f = GoalToSkillMap::plain(assign, n_z).unwrap();
            let composed = policy::compose_downstream(&m, &skills, &f).unwrap();
            let j_misl =
                misl_objective(&m, &skills, 0, &uniform_prior(n_z), &var, cfg.cap).unwrap();
            let i_goal = goal_behavior_mi(&m, &composed, 0, &p, &var, cfg.cap).unwrap();
            let p_f = misl::downstream_skill_distribution_at(&f, &p, 0).unwrap();
            let b = mi_gap_bound(&p_f, n).unwrap();
            if !b.applicable {
                agg.skip("more skills than outcomes");
                continue;
            }
            agg.leq(
                (j_misl - i_goal).abs(),
                b.bound,
                &format!("{desc} trial={trial}"),
            );
            // The goal/skill identity also holds verbatim.
            let id = verify_mi_identity(&m, &skills, &f, 0, &p, &var, cfg.cap).unwrap();
            agg.leq(id.gap, 0.0, &format!("{desc} identity trial={trial}"));
        }
    }
    agg.finish(ClaimId::GP3, seed)
}
