//! Exact evaluation and optimization of the goal-reaching values.
//!
//! Three closed formulations plus a general tabular one:
//!
//! - `Pe(γ)` — persistent goal: the probability that a state sampled at
//!   a geometric time lands on the goal (normalized discounted occupancy).
//! - `ET(K)` — exact timing: the probability of being at the goal at
//!   exactly step `K`.
//! - `OW(K, γ)` — opportunity window: `E[γ^(T-1) · 1{T ≤ K}]` with `T`
//!   the first-visit time of the goal.
//! - `General` — arbitrary time/state/goal reward and discount tables
//!   with a stationary tail.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::linalg;
use crate::math;
use crate::mdp::{FiniteMdp, GoalDistribution};
use crate::policy::{Branch, DeterministicBranch, GoalConditionedPolicy};

/// Sup-norm target for value iteration and iterative occupancy solves.
pub const VI_TOLERANCE: f64 = 1e-12;
const VI_MAX_ITERS: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq)]
pub enum ValueError {
    BadParameter(String),
    HorizonCapExceeded { k: usize, cap: usize },
    NoConvergence { iterations: usize, residual: f64 },
    NotGoalConditioned,
    UnsupportedFormulation(String),
}

impl fmt::Display for ValueError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueError::BadParameter(msg) => write!(f, "bad parameter: {msg}"),
            ValueError::HorizonCapExceeded { k, cap } => {
                write!(f, "horizon {k} above cap {cap}")
            }
            ValueError::NoConvergence {
                iterations,
                residual,
            } => {
                write!(
                    f,
                    "no convergence after {iterations} iterations (residual {residual})"
                )
            }
            ValueError::NotGoalConditioned => {
                write!(f, "policy must carry one branch per goal state")
            }
            ValueError::UnsupportedFormulation(msg) => write!(f, "{msg}"),
        }
    }
}

impl core::error::Error for ValueError {}

/// Reward and discount tables `R_t(s; g)`, `γ_t(s; g)` with `horizon`
/// explicit slots and slot `horizon` as the stationary tail. The time-0
/// discount is treated as 1 regardless of the stored entries.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralSpec {
    pub horizon: usize,
    /// `reward[t][s][g]`
    pub reward: Vec<Vec<Vec<f64>>>,
    /// `discount[t][s][g]`
    pub discount: Vec<Vec<Vec<f64>>>,
}

impl GeneralSpec {
    pub fn validate(&self, n_states: usize) -> Result<(), ValueError> {
        let slots = self.horizon + 1;
        if self.reward.len() != slots || self.discount.len() != slots {
            return Err(ValueError::BadParameter(format!(
                "general tables need {slots} slots, got {} rewards and {} discounts",
                self.reward.len(),
                self.discount.len()
            )));
        }
        for table in [&self.reward, &self.discount] {
            for slot in table.iter() {
                if slot.len() != n_states || slot.iter().any(|row| row.len() != n_states) {
                    return Err(ValueError::BadParameter(
                        "general table shape mismatch".to_string(),
                    ));
                }
            }
        }
        for slot in &self.discount {
            for row in slot {
                if row.iter().any(|&g| !(0.0..=1.0).contains(&g)) {
                    return Err(ValueError::BadParameter(
                        "discount outside [0, 1]".to_string(),
                    ));
                }
            }
        }
        if self.tail_discount_bound() >= 1.0 {
            return Err(ValueError::BadParameter(
                "tail discounts must be bounded below 1 for the series to converge".to_string(),
            ));
        }
        Ok(())
    }

    /// Largest discount in the stationary tail slot.
    pub fn tail_discount_bound(&self) -> f64 {
        self.discount[self.horizon]
            .iter()
            .flat_map(|row| row.iter().cloned())
            .fold(0.0, f64::max)
    }

    /// Largest reward magnitude in the stationary tail slot.
    fn tail_reward_bound(&self) -> f64 {
        self.reward[self.horizon]
            .iter()
            .flat_map(|row| row.iter().map(|r| r.abs()))
            .fold(0.0, f64::max)
    }

    pub fn nonneg_rewards(&self) -> bool {
        self.reward
            .iter()
            .all(|slot| slot.iter().all(|row| row.iter().all(|&r| r >= 0.0)))
    }

    fn slot(&self, t: usize) -> usize {
        t.min(self.horizon)
    }
}

/// A goal-reaching task specification.
#[derive(Debug, Clone, PartialEq)]
pub enum Formulation {
    Pe { gamma: f64 },
    Et { k: usize },
    Ow { k: usize, gamma: f64 },
    General(GeneralSpec),
}

impl Formulation {
    pub fn validate(&self, n_states: usize) -> Result<(), ValueError> {
        match self {
            Formulation::Pe { gamma } => {
                if !(0.0..1.0).contains(gamma) {
                    return Err(ValueError::BadParameter(format!(
                        "Pe gamma {gamma} outside [0, 1)"
                    )));
                }
            }
            Formulation::Et { k } => {
                if *k == 0 {
                    return Err(ValueError::BadParameter(
                        "ET horizon must be at least 1".to_string(),
                    ));
                }
            }
            Formulation::Ow { k, gamma } => {
                if *k == 0 {
                    return Err(ValueError::BadParameter(
                        "OW horizon must be at least 1".to_string(),
                    ));
                }
                if !(0.0..=1.0).contains(gamma) {
                    return Err(ValueError::BadParameter(format!(
                        "OW gamma {gamma} outside [0, 1]"
                    )));
                }
            }
            Formulation::General(spec) => spec.validate(n_states)?,
        }
        Ok(())
    }

    pub fn nonneg_rewards(&self) -> bool {
        match self {
            Formulation::General(spec) => spec.nonneg_rewards(),
            _ => true,
        }
    }
}

/// How a value was computed, with the truncation certificate when one
/// applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvalMethod {
    LinearSolve,
    BackwardInduction,
    Iterative { residual: f64 },
    TruncatedSeries { tail_bound: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueResult {
    pub value: f64,
    pub method: EvalMethod,
}

/// Which behavioral variable a state distribution describes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BehaviorSpec {
    /// State at a `Geom(1-γ)` time: the normalized discounted occupancy
    /// with the first weight at `t = 1`.
    SGammaPlus { gamma: f64 },
    /// State at exactly step `K`.
    SK { k: usize },
}

/// One application of the policy-induced transition operator at time `t`.
pub fn step_distribution<B: Branch + ?Sized>(
    mdp: &FiniteMdp,
    branch: &B,
    t: usize,
    dist: &[f64],
) -> Vec<f64> {
    let n = mdp.n_states();
    let mut out = vec![0.0; n];
    for s in 0..n {
        let mass = dist[s];
        if mass == 0.0 {
            continue;
        }
        for a in 0..mdp.n_actions(s) {
            let pa = branch.prob(t, s, a);
            if pa == 0.0 {
                continue;
            }
            let w = mass * pa;
            for (sp, &p) in mdp.row(s, a).iter().enumerate() {
                if p > 0.0 {
                    out[sp] += w * p;
                }
            }
        }
    }
    out
}

/// The one-step chain matrix `q(s'|s) = Σ_a π_t(a|s) p(s'|s,a)` at time `t`.
pub fn chain_matrix<B: Branch + ?Sized>(mdp: &FiniteMdp, branch: &B, t: usize) -> Vec<Vec<f64>> {
    let n = mdp.n_states();
    let mut m = vec![vec![0.0; n]; n];
    for s in 0..n {
        for a in 0..mdp.n_actions(s) {
            let pa = branch.prob(t, s, a);
            if pa == 0.0 {
                continue;
            }
            for (sp, &p) in mdp.row(s, a).iter().enumerate() {
                if p > 0.0 {
                    m[s][sp] += pa * p;
                }
            }
        }
    }
    m
}

/// Discounted-occupancy tail from `start`: solves
/// `x = (1-γ)·start·M + γ·x·M` for the stationary chain `M`.
fn sgamma_tail(m: &[Vec<f64>], start: &[f64], gamma: f64) -> (Vec<f64>, EvalMethod) {
    let n = m.len();
    let first = linalg::vec_mat(start, m);
    if n <= 200 {
        // Row-vector system x (I - γM) = (1-γ)·first, transposed for the
        // column solver. `I - γM` is strictly row diagonally dominant for
        // γ < 1, so the solve cannot fail; the iterative branch below is
        // the documented fallback.
        let mut a = vec![vec![0.0; n]; n];
        for (i, row) in a.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = if i == j { 1.0 } else { 0.0 } - gamma * m[j][i];
            }
        }
        let b: Vec<f64> = first.iter().map(|&x| (1.0 - gamma) * x).collect();
        if let Ok(mut x) = linalg::solve(a, b) {
            for v in x.iter_mut() {
                if *v < 0.0 && *v > -1e-12 {
                    *v = 0.0;
                }
            }
            return (x, EvalMethod::LinearSolve);
        }
    }
    // Damped fixed-point iteration: x_{k+1} = (1-γ)·first + γ·x_k·M.
    let base: Vec<f64> = first.iter().map(|&x| (1.0 - gamma) * x).collect();
    let mut x = base.clone();
    let mut residual = f64::INFINITY;
    for _ in 0..VI_MAX_ITERS {
        let xm = linalg::vec_mat(&x, m);
        let next: Vec<f64> = base
            .iter()
            .zip(xm.iter())
            .map(|(&b, &t)| b + gamma * t)
            .collect();
        residual = math::sup_norm_diff(&next, &x);
        x = next;
        if residual < VI_TOLERANCE {
            break;
        }
    }
    (x, EvalMethod::Iterative { residual })
}

/// Distribution of the behavioral variable from `s0` under one branch.
pub fn behavior_distribution<B: Branch + ?Sized>(
    mdp: &FiniteMdp,
    branch: &B,
    s0: usize,
    spec: &BehaviorSpec,
) -> Result<(Vec<f64>, EvalMethod), ValueError> {
    let n = mdp.n_states();
    let mut dist = vec![0.0; n];
    dist[s0] = 1.0;
    match *spec {
        BehaviorSpec::SK { k } => {
            if k == 0 {
                return Err(ValueError::BadParameter("SK needs K >= 1".to_string()));
            }
            for t in 0..k {
                dist = step_distribution(mdp, branch, t, &dist);
            }
            Ok((dist, EvalMethod::BackwardInduction))
        }
        BehaviorSpec::SGammaPlus { gamma } => {
            if !(0.0..1.0).contains(&gamma) {
                return Err(ValueError::BadParameter(format!(
                    "gamma {gamma} outside [0, 1)"
                )));
            }
            let prefix = branch.prefix_len();
            // Exact prefix: (1-γ) Σ_{t=1..prefix} γ^(t-1) P_t.
            let mut acc = vec![0.0; n];
            let mut cur = dist;
            for t in 0..prefix {
                cur = step_distribution(mdp, branch, t, &cur);
                let w = (1.0 - gamma) * math::powi(gamma, t as u32);
                for (a, &c) in acc.iter_mut().zip(cur.iter()) {
                    *a += w * c;
                }
            }
            // Stationary tail from P_prefix, weighted by γ^prefix.
            let m = chain_matrix(mdp, branch, prefix);
            let (tail, method) = sgamma_tail(&m, &cur, gamma);
            let w = math::powi(gamma, prefix as u32);
            for (a, &t) in acc.iter_mut().zip(tail.iter()) {
                *a += w * t;
            }
            Ok((acc, method))
        }
    }
}

/// Mixture-policy behavior distribution: the weighted mixture of the
/// per-branch distributions (a latent goal drawn once, not a per-step
/// action average).
pub fn behavior_distribution_mixture(
    mdp: &FiniteMdp,
    policy: &GoalConditionedPolicy,
    weights: &[f64],
    s0: usize,
    spec: &BehaviorSpec,
) -> Result<Vec<f64>, ValueError> {
    let mut out = vec![0.0; mdp.n_states()];
    for (c, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let (d, _) = behavior_distribution(mdp, &policy.branch(c), s0, spec)?;
        for (o, &x) in out.iter_mut().zip(d.iter()) {
            *o += w * x;
        }
    }
    Ok(out)
}

/// Probability mass of the first-visit time: `pmf[t-1] = P(T_g = t)` for
/// `t = 1..=K`, computed forward with the goal made absorbing. The
/// missing mass `1 - Σ pmf` is `P(T_g > K)`.
pub fn first_visit_time_pmf<B: Branch + ?Sized>(
    mdp: &FiniteMdp,
    branch: &B,
    s0: usize,
    g: usize,
    k: usize,
) -> Vec<f64> {
    let n = mdp.n_states();
    // alive[s] = P(T_g > t, S_t = s)
    let mut alive = vec![0.0; n];
    alive[s0] = 1.0;
    let mut pmf = Vec::with_capacity(k);
    for t in 0..k {
        let next = step_distribution(mdp, branch, t, &alive);
        pmf.push(next[g]);
        alive = next;
        alive[g] = 0.0;
    }
    pmf
}

/// `E[γ^(T_g - 1) · 1{T_g ≤ K}]` by `K` backward-induction steps with the
/// goal absorbing; `0^0 := 1`, so `γ = 0` scores only first-step arrivals.
pub fn first_visit_value<B: Branch + ?Sized>(
    mdp: &FiniteMdp,
    branch: &B,
    s0: usize,
    g: usize,
    k: usize,
    gamma: f64,
) -> Result<ValueResult, ValueError> {
    if k == 0 {
        return Err(ValueError::BadParameter("OW needs K >= 1".to_string()));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(ValueError::BadParameter(format!(
            "gamma {gamma} outside [0, 1]"
        )));
    }
    let n = mdp.n_states();
    // w[s] = continuation value of not having arrived yet.
    let mut w = vec![0.0; n];
    for t in (0..k).rev() {
        let mut next = vec![0.0; n];
        for s in 0..n {
            let mut acc = 0.0;
            for a in 0..mdp.n_actions(s) {
                let pa = branch.prob(t, s, a);
                if pa == 0.0 {
                    continue;
                }
                let mut q = 0.0;
                for (sp, &p) in mdp.row(s, a).iter().enumerate() {
                    if p == 0.0 {
                        continue;
                    }
                    q += p * if sp == g { 1.0 } else { gamma * w[sp] };
                }
                acc += pa * q;
            }
            next[s] = acc;
        }
        w = next;
    }
    Ok(ValueResult {
        value: w[s0],
        method: EvalMethod::BackwardInduction,
    })
}

/// The value `J(s0, g, π_branch)` of one branch under a formulation.
pub fn eval_j_branch<B: Branch + ?Sized>(
    mdp: &FiniteMdp,
    formulation: &Formulation,
    branch: &B,
    s0: usize,
    g: usize,
) -> Result<ValueResult, ValueError> {
    formulation.validate(mdp.n_states())?;
    match formulation {
        Formulation::Pe { gamma } => {
            let (d, method) = behavior_distribution(
                mdp,
                branch,
                s0,
                &BehaviorSpec::SGammaPlus { gamma: *gamma },
            )?;
            Ok(ValueResult {
                value: d[g],
                method,
            })
        }
        Formulation::Et { k } => {
            let (d, method) = behavior_distribution(mdp, branch, s0, &BehaviorSpec::SK { k: *k })?;
            Ok(ValueResult {
                value: d[g],
                method,
            })
        }
        Formulation::Ow { k, gamma } => first_visit_value(mdp, branch, s0, g, *k, *gamma),
        Formulation::General(spec) => Ok(eval_general(mdp, spec, branch, s0, g)),
    }
}

/// Direct accumulation of the general objective
/// `Σ_{t≥1} R_t(S_t; g) Π_{k<t} γ_k(S_k; g)`, truncated once the
/// geometric tail bound drops below 1e-13.
fn eval_general<B: Branch + ?Sized>(
    mdp: &FiniteMdp,
    spec: &GeneralSpec,
    branch: &B,
    s0: usize,
    g: usize,
) -> ValueResult {
    let n = mdp.n_states();
    let tail_gamma = spec.tail_discount_bound();
    let tail_reward = spec.tail_reward_bound();
    // u[s] = E[ Π_{k<t} γ_k(S_k; g) · 1{S_t = s} ]
    let mut u = vec![0.0; n];
    u[s0] = 1.0;
    let mut value = 0.0;
    let mut t = 0usize;
    let tail_bound = loop {
        // Discount picked up when leaving time t (γ_0 ≡ 1), then step.
        let mut weighted = u.clone();
        if t > 0 {
            let slot = spec.slot(t);
            for (s, w) in weighted.iter_mut().enumerate() {
                *w *= spec.discount[slot][s][g];
            }
        }
        u = step_distribution(mdp, branch, t, &weighted);
        t += 1;
        let slot = spec.slot(t);
        for (s, &w) in u.iter().enumerate() {
            value += w * spec.reward[slot][s][g];
        }
        let mass: f64 = u.iter().sum();
        if mass == 0.0 {
            break 0.0;
        }
        if t > spec.horizon {
            let bound = mass * tail_gamma * tail_reward / (1.0 - tail_gamma);
            if bound < 1e-13 || t > VI_MAX_ITERS {
                break bound;
            }
        }
    };
    ValueResult {
        value,
        method: EvalMethod::TruncatedSeries { tail_bound },
    }
}

/// `J(s0, g, π_{g,·})` using the policy's branch for `g`.
pub fn eval_j(
    mdp: &FiniteMdp,
    formulation: &Formulation,
    policy: &GoalConditionedPolicy,
    s0: usize,
    g: usize,
) -> Result<ValueResult, ValueError> {
    if !policy.is_goal_conditioned(mdp) {
        return Err(ValueError::NotGoalConditioned);
    }
    eval_j_branch(mdp, formulation, &policy.branch(g), s0, g)
}

/// Test-time performance `Σ_g p_goal(g) · J(s0, g, π_{g,·})`.
pub fn test_time_performance(
    mdp: &FiniteMdp,
    formulation: &Formulation,
    policy: &GoalConditionedPolicy,
    s0: usize,
    p_goal: &GoalDistribution,
) -> Result<f64, ValueError> {
    if !policy.is_goal_conditioned(mdp) {
        return Err(ValueError::NotGoalConditioned);
    }
    let mut total = 0.0;
    for (g, &w) in p_goal.weights().iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        total += w * eval_j(mdp, formulation, policy, s0, g)?.value;
    }
    Ok(total)
}

/// An optimal deterministic branch together with its value at every
/// start state.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalSolution {
    pub branch: DeterministicBranch,
    pub values: Vec<f64>,
}

/// Per-formulation optimal solver. `Pe` runs value iteration on the
/// arrival-reward problem to a 1e-12 sup-norm fixed point and returns the
/// stationary greedy branch; `ET`/`OW` run backward induction over the
/// `K` slots. Argmax ties break toward the lowest action index.
pub fn solve_optimal(
    mdp: &FiniteMdp,
    formulation: &Formulation,
    g: usize,
    horizon_cap: usize,
) -> Result<OptimalSolution, ValueError> {
    formulation.validate(mdp.n_states())?;
    let n = mdp.n_states();
    match formulation {
        Formulation::Pe { gamma } => {
            let gamma = *gamma;
            let q_value = |v: &[f64], s: usize, a: usize| -> f64 {
                let mut q = 0.0;
                for (sp, &p) in mdp.row(s, a).iter().enumerate() {
                    if p == 0.0 {
                        continue;
                    }
                    q += p * ((1.0 - gamma) * if sp == g { 1.0 } else { 0.0 } + gamma * v[sp]);
                }
                q
            };
            let mut v = vec![0.0; n];
            let mut iterations = 0usize;
            // A residual of r leaves a fixed-point error of r·γ/(1-γ),
            // so the stopping residual scales with 1-γ; a stall guard
            // handles the float-precision floor near γ = 1.
            let target = (1e-13 * (1.0 - gamma)).max(1e-16);
            let mut best_residual = f64::INFINITY;
            let mut stalled = 0usize;
            loop {
                let mut next = vec![0.0; n];
                for s in 0..n {
                    let mut best = f64::NEG_INFINITY;
                    for a in 0..mdp.n_actions(s) {
                        best = best.max(q_value(&v, s, a));
                    }
                    next[s] = best;
                }
                let residual = math::sup_norm_diff(&next, &v);
                v = next;
                iterations += 1;
                if residual < target {
                    break;
                }
                if residual < best_residual {
                    best_residual = residual;
                    stalled = 0;
                } else {
                    stalled += 1;
                    if stalled > 50 {
                        break;
                    }
                }
                if iterations >= VI_MAX_ITERS {
                    return Err(ValueError::NoConvergence {
                        iterations,
                        residual,
                    });
                }
            }
            let mut choices = vec![0usize; n];
            for (s, choice) in choices.iter_mut().enumerate() {
                let mut best = f64::NEG_INFINITY;
                for a in 0..mdp.n_actions(s) {
                    let q = q_value(&v, s, a);
                    if q > best + 1e-15 {
                        best = q;
                        *choice = a;
                    }
                }
            }
            Ok(OptimalSolution {
                branch: DeterministicBranch::stationary(choices),
                values: v,
            })
        }
        Formulation::Et { k } => {
            let k = *k;
            if k > horizon_cap {
                return Err(ValueError::HorizonCapExceeded {
                    k,
                    cap: horizon_cap,
                });
            }
            let mut v: Vec<f64> = (0..n).map(|s| if s == g { 1.0 } else { 0.0 }).collect();
            let mut choices = vec![vec![0usize; n]; k];
            for t in (0..k).rev() {
                let mut next = vec![0.0; n];
                for s in 0..n {
                    let mut best = f64::NEG_INFINITY;
                    let mut best_a = 0usize;
                    for a in 0..mdp.n_actions(s) {
                        let q: f64 = mdp
                            .row(s, a)
                            .iter()
                            .enumerate()
                            .map(|(sp, &p)| p * v[sp])
                            .sum();
                        if q > best + 1e-15 {
                            best = q;
                            best_a = a;
                        }
                    }
                    next[s] = best;
                    choices[t][s] = best_a;
                }
                v = next;
            }
            Ok(OptimalSolution {
                branch: DeterministicBranch { choices },
                values: v,
            })
        }
        Formulation::Ow { k, gamma } => {
            let (k, gamma) = (*k, *gamma);
            if k > horizon_cap {
                return Err(ValueError::HorizonCapExceeded {
                    k,
                    cap: horizon_cap,
                });
            }
            let mut w = vec![0.0; n];
            let mut choices = vec![vec![0usize; n]; k];
            for t in (0..k).rev() {
                let mut next = vec![0.0; n];
                for s in 0..n {
                    let mut best = f64::NEG_INFINITY;
                    let mut best_a = 0usize;
                    for a in 0..mdp.n_actions(s) {
                        let mut q = 0.0;
                        for (sp, &p) in mdp.row(s, a).iter().enumerate() {
                            if p == 0.0 {
                                continue;
                            }
                            q += p * if sp == g { 1.0 } else { gamma * w[sp] };
                        }
                        if q > best + 1e-15 {
                            best = q;
                            best_a = a;
                        }
                    }
                    next[s] = best;
                    choices[t][s] = best_a;
                }
                w = next;
            }
            Ok(OptimalSolution {
                branch: DeterministicBranch { choices },
                values: w,
            })
        }
        Formulation::General(_) => Err(ValueError::UnsupportedFormulation(
            "optimal solving is provided for the Pe/ET/OW formulations only".to_string(),
        )),
    }
}

/// Assembles the per-goal optimal branches into one goal-conditioned
/// policy.
pub fn optimal_policy(
    mdp: &FiniteMdp,
    formulation: &Formulation,
    horizon_cap: usize,
) -> Result<GoalConditionedPolicy, ValueError> {
    let mut branches = Vec::with_capacity(mdp.n_states());
    for g in 0..mdp.n_states() {
        branches.push(solve_optimal(mdp, formulation, g, horizon_cap)?.branch);
    }
    GoalConditionedPolicy::from_deterministic(mdp, mdp.states().to_vec(), &branches)
        .map_err(|e| ValueError::BadParameter(format!("{e}")))
}

/// Cesàro-averaged occupancy of `g` from `s0`: the limit of
/// `(1/T) Σ_{t=1..T} P(S_t = g)`. Computed by doubling the partial sums
/// (`S_{2T} = S_T + S_T · M^T`), which reaches `T = 2^60` in sixty matrix
/// products and averages out periodic chains exactly.
pub fn stationary_occupancy<B: Branch + ?Sized>(
    mdp: &FiniteMdp,
    branch: &B,
    g: usize,
    s0: usize,
) -> f64 {
    let prefix = branch.prefix_len();
    let n = mdp.n_states();
    let mut dist = vec![0.0; n];
    dist[s0] = 1.0;
    for t in 0..prefix {
        dist = step_distribution(mdp, branch, t, &dist);
    }
    let m = chain_matrix(mdp, branch, prefix);
    // Repeated squaring compounds row-sum roundoff exponentially, so
    // every product is renormalized back to row-stochastic.
    let renorm = |mat: &mut Vec<Vec<f64>>| {
        for row in mat.iter_mut() {
            let sum: f64 = row.iter().sum();
            for x in row.iter_mut() {
                *x /= sum;
            }
        }
    };
    let mut avg = m.clone();
    let mut power = m;
    let mut stable_rounds = 0;
    for _ in 0..80 {
        let shifted = linalg::mat_mul(&avg, &power);
        let mut delta = 0.0_f64;
        let mut next = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                next[i][j] = 0.5 * (avg[i][j] + shifted[i][j]);
                delta = delta.max((next[i][j] - avg[i][j]).abs());
            }
        }
        renorm(&mut next);
        avg = next;
        if delta < 1e-13 {
            stable_rounds += 1;
            if stable_rounds >= 2 {
                break;
            }
        } else {
            stable_rounds = 0;
        }
        power = linalg::mat_mul(&power, &power);
        renorm(&mut power);
    }
    dist.iter().enumerate().map(|(s, &w)| w * avg[s][g]).sum()
}

/// The geometric mixture of exact-timing values
/// `Σ_{t≥1} (1-γ) γ^(t-1) · P(S_t = g)`, truncated when the geometric
/// tail drops below `tol`.
pub fn geometric_et_value<B: Branch + ?Sized>(
    mdp: &FiniteMdp,
    branch: &B,
    s0: usize,
    g: usize,
    gamma: f64,
    tol: f64,
) -> Result<ValueResult, ValueError> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(ValueError::BadParameter(format!(
            "gamma {gamma} outside [0, 1)"
        )));
    }
    if tol <= 0.0 {
        return Err(ValueError::BadParameter(
            "tolerance must be positive".to_string(),
        ));
    }
    let n = mdp.n_states();
    let mut dist = vec![0.0; n];
    dist[s0] = 1.0;
    let mut value = 0.0;
    let mut t = 0usize;
    let mut weight = 1.0 - gamma; // (1-γ)·γ^(t-1) at t = 1
    let tail_bound = loop {
        dist = step_distribution(mdp, branch, t, &dist);
        t += 1;
        value += weight * dist[g];
        weight *= gamma;
        // Remaining mass: Σ_{u>t} (1-γ)γ^(u-1) = γ^t.
        let tail = math::powi(gamma, t as u32);
        if tail < tol {
            break tail;
        }
    };
    Ok(ValueResult {
        value,
        method: EvalMethod::TruncatedSeries { tail_bound },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp;
    use crate::policy::{self, Conditioning};

    fn chain3() -> FiniteMdp {
        // s0 -> s1 -> s2 (absorbing), single action each.
        FiniteMdp::new(
            vec!["s0".into(), "s1".into(), "s2".into()],
            vec![vec!["a".into()], vec!["a".into()], vec!["a".into()]],
            vec![
                vec![vec![0.0, 1.0, 0.0]],
                vec![vec![0.0, 0.0, 1.0]],
                vec![vec![0.0, 0.0, 1.0]],
            ],
        )
        .unwrap()
    }

    fn two_cycle() -> FiniteMdp {
        FiniteMdp::new(
            vec!["a".into(), "b".into()],
            vec![vec!["x".into()], vec!["x".into()]],
            vec![vec![vec![0.0, 1.0]], vec![vec![1.0, 0.0]]],
        )
        .unwrap()
    }

    fn only_branch() -> DeterministicBranch {
        DeterministicBranch::stationary(vec![0, 0, 0])
    }

    #[test]
    fn self_loop_occupancy_is_point_mass() {
        let m = mdp::random_mdp(1, 1, 1, 0).unwrap();
        let b = DeterministicBranch::stationary(vec![0]);
        let (d, _) =
            behavior_distribution(&m, &b, 0, &BehaviorSpec::SGammaPlus { gamma: 0.7 }).unwrap();
        assert!((d[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chain_sk_reaches_the_end() {
        let m = chain3();
        let (d, _) =
            behavior_distribution(&m, &only_branch(), 0, &BehaviorSpec::SK { k: 2 }).unwrap();
        assert_eq!(d[2], 1.0);
    }

    #[test]
    fn two_cycle_discounted_occupancy() {
        // From a with γ = 0.5: mass 2/3 on b (first visit at t = 1), 1/3 on a.
        let m = two_cycle();
        let b = DeterministicBranch::stationary(vec![0, 0]);
        let (d, _) =
            behavior_distribution(&m, &b, 0, &BehaviorSpec::SGammaPlus { gamma: 0.5 }).unwrap();
        assert!((d[1] - 2.0 / 3.0).abs() < 1e-12, "{d:?}");
        assert!((d[0] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn occupancy_prefix_matches_brute_series() {
        // Non-stationary branch on a random MDP: compare the solved
        // occupancy against the truncated series.
        let m = mdp::random_mdp(4, 2, 2, 13).unwrap();
        let pol = policy::random_policy(&m, Conditioning::Goals, 3, 5);
        let branch = pol.branch(1);
        let gamma = 0.6;
        let (d, _) =
            behavior_distribution(&m, &branch, 0, &BehaviorSpec::SGammaPlus { gamma }).unwrap();
        let mut acc = [0.0; 4];
        let mut cur = vec![1.0, 0.0, 0.0, 0.0];
        for t in 0..200 {
            cur = step_distribution(&m, &branch, t, &cur);
            let w = (1.0 - gamma) * math::powi(gamma, t as u32);
            for (a, &c) in acc.iter_mut().zip(cur.iter()) {
                *a += w * c;
            }
        }
        for s in 0..4 {
            assert!(
                (d[s] - acc[s]).abs() < 1e-11,
                "state {s}: {} vs {}",
                d[s],
                acc[s]
            );
        }
    }

    #[test]
    fn first_visit_values_on_chains() {
        let m = chain3();
        let b = only_branch();
        // T = 1 from s1 to s2.
        assert_eq!(first_visit_value(&m, &b, 1, 2, 3, 0.5).unwrap().value, 1.0);
        // T = 2 from s0, γ = 0.5, K = 3 -> 0.5.
        assert_eq!(first_visit_value(&m, &b, 0, 2, 3, 0.5).unwrap().value, 0.5);
        // γ = 0 scores only first-step arrivals.
        assert_eq!(first_visit_value(&m, &b, 0, 2, 3, 0.0).unwrap().value, 0.0);
        assert_eq!(first_visit_value(&m, &b, 1, 2, 3, 0.0).unwrap().value, 1.0);
    }

    #[test]
    fn first_visit_pmf_agrees_with_backward_induction() {
        // Two independent routes to the same value: forward hit-time pmf
        // versus backward induction.
        for seed in 0..10 {
            let m = mdp::random_mdp(4, 2, 2, seed).unwrap();
            let pol = policy::random_policy(&m, Conditioning::Goals, 2, seed + 100);
            for gamma in [0.0, 0.4, 1.0] {
                for g in 0..4 {
                    let b = pol.branch(g);
                    let pmf = first_visit_time_pmf(&m, &b, 0, g, 3);
                    let from_pmf: f64 = pmf
                        .iter()
                        .enumerate()
                        .map(|(i, &p)| p * math::powi(gamma, i as u32))
                        .sum();
                    let bi = first_visit_value(&m, &b, 0, g, 3, gamma).unwrap().value;
                    assert!((from_pmf - bi).abs() < 1e-13, "seed {seed} γ {gamma} g {g}");
                }
            }
        }
    }

    #[test]
    fn river_always_forward_pe_value() {
        let m = mdp::river(0.08, 0.2).unwrap();
        let s1 = m.state_index("s1").unwrap();
        let g = m.state_index("g").unwrap();
        let forward = DeterministicBranch::stationary(vec![0, 0, 0, 0, 0]);
        let v = eval_j_branch(&m, &Formulation::Pe { gamma: 0.35 }, &forward, s1, g).unwrap();
        assert!((v.value - 0.1225).abs() < 1e-12);
    }

    #[test]
    fn river_jump_ow_value() {
        let m = mdp::river(0.08, 0.2).unwrap();
        let s1 = m.state_index("s1").unwrap();
        let g = m.state_index("g").unwrap();
        // Jump at s1 and s2, forward elsewhere.
        let jump = DeterministicBranch::stationary(vec![1, 1, 0, 0, 0]);
        let v = eval_j_branch(&m, &Formulation::Ow { k: 2, gamma: 0.35 }, &jump, s1, g).unwrap();
        assert!((v.value - 0.08).abs() < 1e-15);
        // Always-forward arrives at t = 3 > K = 2.
        let forward = DeterministicBranch::stationary(vec![0, 0, 0, 0, 0]);
        let v = eval_j_branch(&m, &Formulation::Ow { k: 2, gamma: 0.9 }, &forward, s1, g).unwrap();
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn et_values_sum_to_one_over_goals() {
        let m = mdp::random_mdp(4, 2, 2, 21).unwrap();
        let pol = policy::random_policy(&m, Conditioning::Goals, 2, 3);
        for fixed in 0..4 {
            let b = pol.branch(fixed);
            let mut total = 0.0;
            for g in 0..4 {
                total += eval_j_branch(&m, &Formulation::Et { k: 2 }, &b, 0, g)
                    .unwrap()
                    .value;
            }
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pe_values_sum_to_one_over_goals() {
        let m = mdp::random_mdp(4, 2, 2, 22).unwrap();
        let pol = policy::random_policy(&m, Conditioning::Goals, 0, 4);
        let b = pol.branch(2);
        let mut total = 0.0;
        for g in 0..4 {
            total += eval_j_branch(&m, &Formulation::Pe { gamma: 0.55 }, &b, 1, g)
                .unwrap()
                .value;
        }
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn river_optimal_policies_disagree() {
        let m = mdp::river(0.08, 0.2).unwrap();
        let s1 = m.state_index("s1").unwrap();
        let s2 = m.state_index("s2").unwrap();
        let g = m.state_index("g").unwrap();
        let (a_f, a_j) = (0, 1);

        let pe = solve_optimal(&m, &Formulation::Pe { gamma: 0.35 }, g, 1000).unwrap();
        assert_eq!(pe.branch.action_at(0, s1), a_f);
        assert_eq!(pe.branch.action_at(0, s2), a_f);
        assert!((pe.values[s1] - 0.1225).abs() < 1e-12);

        let et = solve_optimal(&m, &Formulation::Et { k: 2 }, g, 1000).unwrap();
        assert_eq!(et.branch.action_at(0, s1), a_f);
        assert_eq!(et.branch.action_at(1, s2), a_j);
        assert!((et.values[s1] - 0.2).abs() < 1e-15);

        let ow = solve_optimal(&m, &Formulation::Ow { k: 2, gamma: 0.35 }, g, 1000).unwrap();
        assert_eq!(ow.branch.action_at(0, s1), a_j);
        assert!((ow.values[s1] - 0.08).abs() < 1e-15);
    }

    #[test]
    fn test_time_performance_point_mass_equals_eval() {
        let m = mdp::random_mdp(3, 2, 2, 31).unwrap();
        let pol = policy::random_policy(&m, Conditioning::Goals, 1, 7);
        let f = Formulation::Et { k: 2 };
        let mut w = vec![0.0; 3];
        w[1] = 1.0;
        let p = GoalDistribution::new(w).unwrap();
        let tt = test_time_performance(&m, &f, &pol, 0, &p).unwrap();
        let direct = eval_j(&m, &f, &pol, 0, 1).unwrap().value;
        assert!((tt - direct).abs() < 1e-15);
    }

    #[test]
    fn goal_independent_policy_scores_one_over_n() {
        // A single branch reused for every goal: test-time value is
        // exactly 1/N for Pe and ET under uniform goals.
        let m = mdp::random_mdp(4, 2, 2, 33).unwrap();
        let base = policy::random_policy(&m, Conditioning::Skills(1), 1, 2);
        let f = policy::GoalToSkillMap::constant(4, 0, 1);
        let pol = policy::compose_downstream(&m, &base, &f).unwrap();
        let u = GoalDistribution::uniform(4);
        for form in [Formulation::Pe { gamma: 0.4 }, Formulation::Et { k: 3 }] {
            let tt = test_time_performance(&m, &form, &pol, 0, &u).unwrap();
            assert!((tt - 0.25).abs() < 1e-12, "{form:?}: {tt}");
        }
    }

    #[test]
    fn absorbing_goal_occupancy_is_one() {
        let m = chain3();
        assert!((stationary_occupancy(&m, &only_branch(), 2, 0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_cycle_occupancy_is_half() {
        let m = two_cycle();
        let b = DeterministicBranch::stationary(vec![0, 0]);
        assert!((stationary_occupancy(&m, &b, 1, 0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn occupancy_matches_long_run_window_average_oracle() {
        // Window-averaging oracle: mean of P(S_t = g) over t in (T, 2T].
        for seed in 40..44 {
            let m = mdp::random_mdp(4, 2, 2, seed).unwrap();
            let pol = policy::random_policy(&m, Conditioning::Goals, 0, seed);
            let b = pol.branch(0);
            let mut dist = vec![0.0; 4];
            dist[0] = 1.0;
            let t_burn = 4096;
            for t in 0..t_burn {
                dist = step_distribution(&m, &b, t, &dist);
            }
            let mut avg = [0.0; 4];
            let window = 4096;
            for t in 0..window {
                dist = step_distribution(&m, &b, t_burn + t, &dist);
                for (a, &d) in avg.iter_mut().zip(dist.iter()) {
                    *a += d / window as f64;
                }
            }
            for g in 0..4 {
                let occ = stationary_occupancy(&m, &b, g, 0);
                assert!(
                    (occ - avg[g]).abs() < 1e-8,
                    "seed {seed} g {g}: {occ} vs {}",
                    avg[g]
                );
            }
        }
    }

    #[test]
    fn geometric_et_matches_pe() {
        let m = mdp::river(0.08, 0.2).unwrap();
        let s1 = m.state_index("s1").unwrap();
        let g = m.state_index("g").unwrap();
        let forward = DeterministicBranch::stationary(vec![0, 0, 0, 0, 0]);
        let geo = geometric_et_value(&m, &forward, s1, g, 0.35, 1e-12).unwrap();
        assert!((geo.value - 0.1225).abs() < 1e-10);
        match geo.method {
            EvalMethod::TruncatedSeries { tail_bound } => assert!(tail_bound < 1e-12),
            other => panic!("unexpected method {other:?}"),
        }
        // γ = 0 reduces to ET(1).
        let m2 = mdp::random_mdp(3, 2, 2, 9).unwrap();
        let pol = policy::random_policy(&m2, Conditioning::Goals, 0, 11);
        let b = pol.branch(1);
        let geo0 = geometric_et_value(&m2, &b, 0, 1, 0.0, 1e-12).unwrap().value;
        let et1 = eval_j_branch(&m2, &Formulation::Et { k: 1 }, &b, 0, 1)
            .unwrap()
            .value;
        assert!((geo0 - et1).abs() < 1e-15);
    }

    #[test]
    fn general_tables_reproduce_pe() {
        // Encode Pe(γ) as a general table and compare against the exact
        // Pe evaluator.
        let m = mdp::random_mdp(3, 2, 2, 55).unwrap();
        let gamma = 0.5;
        let n = m.n_states();
        let mut reward = vec![vec![vec![0.0; n]; n]; 1];
        let discount = vec![vec![vec![gamma; n]; n]; 1];
        for s in 0..n {
            reward[0][s][s] = 1.0 - gamma;
        }
        let spec = GeneralSpec {
            horizon: 0,
            reward,
            discount,
        };
        assert!(spec.nonneg_rewards());
        let pol = policy::random_policy(&m, Conditioning::Goals, 0, 6);
        for g in 0..n {
            let general = eval_j(&m, &Formulation::General(spec.clone()), &pol, 0, g).unwrap();
            let pe = eval_j(&m, &Formulation::Pe { gamma }, &pol, 0, g).unwrap();
            assert!(
                (general.value - pe.value).abs() < 1e-11,
                "goal {g}: {} vs {}",
                general.value,
                pe.value
            );
        }
    }

    #[test]
    fn general_tail_must_contract() {
        let n = 2;
        let spec = GeneralSpec {
            horizon: 0,
            reward: vec![vec![vec![1.0; n]; n]],
            discount: vec![vec![vec![1.0; n]; n]],
        };
        assert!(spec.validate(n).is_err());
    }

    #[test]
    fn ow_value_monotone_in_k_and_gamma() {
        let m = mdp::random_mdp(4, 2, 2, 77).unwrap();
        let pol = policy::random_policy(&m, Conditioning::Goals, 3, 8);
        let b = pol.branch(2);
        let mut prev_k = 0.0;
        for k in 1..=5 {
            let v = first_visit_value(&m, &b, 0, 2, k, 0.6).unwrap().value;
            assert!(v >= prev_k - 1e-14);
            prev_k = v;
        }
        let mut prev_g = 0.0;
        for gamma in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let v = first_visit_value(&m, &b, 0, 2, 3, gamma).unwrap().value;
            assert!(v >= prev_g - 1e-14);
            prev_g = v;
        }
    }
}
