//! Exact discrete information measures, the Fano-style bound functions,
//! behavioral joint distributions, and the windowed-formulation MI
//! bounds with their assumption diagnostics.
//!
//! All logarithms are natural. `0·log 0 := 0` throughout; a
//! Kullback-Leibler divergence with mass outside the reference support
//! returns `+∞` rather than an error.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::math;
use crate::mdp::{FiniteMdp, GoalDistribution};
use crate::policy::{Branch, GoalConditionedPolicy};
use crate::sensitivity::{self, SensitivityError};
use crate::values::{self, BehaviorSpec, Formulation, ValueError};

#[derive(Debug, Clone, PartialEq)]
pub enum InfoError {
    InvalidDistribution(String),
    DomainViolation(String),
    LabelMismatch(String),
    CapExceeded { needed: u128, cap: usize },
    Value(ValueError),
    Sensitivity(SensitivityError),
}

impl fmt::Display for InfoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InfoError::InvalidDistribution(msg) => write!(f, "invalid distribution: {msg}"),
            InfoError::DomainViolation(msg) => write!(f, "domain violation: {msg}"),
            InfoError::LabelMismatch(msg) => write!(f, "label mismatch: {msg}"),
            InfoError::CapExceeded { needed, cap } => {
                write!(f, "enumeration needs {needed} leaves, above the cap {cap}")
            }
            InfoError::Value(e) => write!(f, "{e}"),
            InfoError::Sensitivity(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for InfoError {}

impl From<ValueError> for InfoError {
    fn from(e: ValueError) -> Self {
        InfoError::Value(e)
    }
}

impl From<SensitivityError> for InfoError {
    fn from(e: SensitivityError) -> Self {
        InfoError::Sensitivity(e)
    }
}

/// An exact probability vector over an ordered finite support. Labels
/// with zero mass are dropped at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution<L: Ord + Clone> {
    labels: Vec<L>,
    probs: Vec<f64>,
}

impl<L: Ord + Clone> DiscreteDistribution<L> {
    /// Aggregates `(label, mass)` pairs (duplicate labels merge) and
    /// validates the total against 1 within 1e-12.
    pub fn from_pairs<I: IntoIterator<Item = (L, f64)>>(pairs: I) -> Result<Self, InfoError> {
        let mut map: BTreeMap<L, f64> = BTreeMap::new();
        for (label, mass) in pairs {
            if mass < 0.0 {
                return Err(InfoError::InvalidDistribution(format!(
                    "negative mass {mass}"
                )));
            }
            if mass > 0.0 {
                *map.entry(label).or_insert(0.0) += mass;
            }
        }
        let sum: f64 = map.values().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(InfoError::InvalidDistribution(format!("total mass {sum}")));
        }
        let (labels, probs) = map.into_iter().unzip();
        Ok(Self { labels, probs })
    }

    pub fn support(&self) -> &[L] {
        &self.labels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob_of(&self, label: &L) -> f64 {
        match self.labels.binary_search_by(|l| l.cmp(label)) {
            Ok(i) => self.probs[i],
            Err(_) => 0.0,
        }
    }

    pub fn entropy(&self) -> f64 {
        entropy(&self.probs)
    }

    /// Weighted mixture of distributions over the same label type.
    pub fn mixture(parts: &[(f64, &Self)]) -> Result<Self, InfoError> {
        Self::from_pairs(parts.iter().flat_map(|(w, d)| {
            d.labels
                .iter()
                .cloned()
                .zip(d.probs.iter().map(move |&p| w * p))
        }))
    }

    /// Minimum probability over the support (positive by construction).
    pub fn min_support_prob(&self) -> f64 {
        self.probs.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Entropy in nats of a probability vector.
pub fn entropy(probs: &[f64]) -> f64 {
    -probs.iter().map(|&p| math::xlnx(p)).sum::<f64>()
}

/// Binary entropy `h(x) = -x ln x - (1-x) ln(1-x)` for `x` in `[0, 1]`.
pub fn binary_entropy(x: f64) -> Result<f64, InfoError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(InfoError::DomainViolation(format!(
            "binary entropy argument {x} outside [0, 1]"
        )));
    }
    Ok(-math::xlnx(x) - math::xlnx(1.0 - x))
}

/// `D(p ‖ q)`; `+∞` when `p` has mass outside the support of `q`.
pub fn kl_divergence<L: Ord + Clone>(
    p: &DiscreteDistribution<L>,
    q: &DiscreteDistribution<L>,
) -> f64 {
    let mut d = 0.0;
    for (label, &pi) in p.labels.iter().zip(p.probs.iter()) {
        let qi = q.prob_of(label);
        if qi == 0.0 {
            return f64::INFINITY;
        }
        d += pi * math::ln(pi / qi);
    }
    d.max(0.0)
}

/// Total variation distance `½ Σ |p - q|` over the joint support.
pub fn total_variation<L: Ord + Clone>(
    p: &DiscreteDistribution<L>,
    q: &DiscreteDistribution<L>,
) -> f64 {
    let mut acc = 0.0;
    for (label, &pi) in p.labels.iter().zip(p.probs.iter()) {
        acc += (pi - q.prob_of(label)).abs();
    }
    for (label, &qi) in q.labels.iter().zip(q.probs.iter()) {
        if p.prob_of(label) == 0.0 {
            acc += qi;
        }
    }
    acc / 2.0
}

/// A joint law over (conditioning label, outcome): a prior over branches
/// plus one conditional outcome distribution per branch.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution<L: Ord + Clone> {
    pub prior: Vec<f64>,
    pub conditionals: Vec<DiscreteDistribution<L>>,
}

impl<L: Ord + Clone> JointDistribution<L> {
    pub fn new(
        prior: Vec<f64>,
        conditionals: Vec<DiscreteDistribution<L>>,
    ) -> Result<Self, InfoError> {
        if prior.len() != conditionals.len() {
            return Err(InfoError::LabelMismatch(format!(
                "{} prior weights for {} conditionals",
                prior.len(),
                conditionals.len()
            )));
        }
        let sum: f64 = prior.iter().sum();
        if prior.iter().any(|&p| p < 0.0) || (sum - 1.0).abs() > 1e-12 {
            return Err(InfoError::InvalidDistribution(format!(
                "prior sums to {sum}"
            )));
        }
        Ok(Self {
            prior,
            conditionals,
        })
    }

    pub fn marginal(&self) -> DiscreteDistribution<L> {
        let parts: Vec<(f64, &DiscreteDistribution<L>)> = self
            .prior
            .iter()
            .cloned()
            .zip(self.conditionals.iter())
            .collect();
        DiscreteDistribution::mixture(&parts).expect("mixture of valid conditionals")
    }

    /// `I = H(marginal) - Σ_c prior(c) · H(conditional_c)`.
    pub fn mutual_information(&self) -> f64 {
        let h_marginal = self.marginal().entropy();
        let h_cond: f64 = self
            .prior
            .iter()
            .zip(self.conditionals.iter())
            .map(|(&w, d)| w * d.entropy())
            .sum();
        (h_marginal - h_cond).max(0.0)
    }

    /// Pushes every outcome through `f`, merging collisions; the
    /// data-processing inequality says MI cannot increase.
    pub fn map_outcomes<M: Ord + Clone>(&self, f: impl Fn(&L) -> M) -> JointDistribution<M> {
        let conditionals = self
            .conditionals
            .iter()
            .map(|d| {
                DiscreteDistribution::from_pairs(
                    d.labels.iter().map(&f).zip(d.probs.iter().cloned()),
                )
                .expect("projection preserves total mass")
            })
            .collect();
        JointDistribution {
            prior: self.prior.clone(),
            conditionals,
        }
    }
}

/// One entry of the discounted first-visit vector, encoded exactly: the
/// payoff is `γ^e` for `Hit(e)` and 0 for `Miss`. The encoding collapses
/// the outcomes that coincide at the endpoints (`γ = 0`: only a
/// first-step hit pays; `γ = 1`: every hit pays 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FEntry {
    Miss,
    Hit(u32),
}

impl FEntry {
    /// Encodes a first visit at time `t ≥ 1` (`None` = no visit within
    /// the window) under discount `gamma`.
    pub fn from_first_visit(hit: Option<usize>, gamma: f64) -> Self {
        match hit {
            None => FEntry::Miss,
            Some(t) => {
                if gamma == 0.0 {
                    if t == 1 {
                        FEntry::Hit(0)
                    } else {
                        FEntry::Miss
                    }
                } else if gamma == 1.0 {
                    FEntry::Hit(0)
                } else {
                    FEntry::Hit((t - 1) as u32)
                }
            }
        }
    }

    pub fn payoff(&self, gamma: f64) -> f64 {
        match self {
            FEntry::Miss => 0.0,
            FEntry::Hit(e) => math::powi(gamma, *e),
        }
    }
}

/// A behavioral outcome: the value of the variable `S'` observed from a
/// trajectory.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Outcome {
    /// A single state (for `S_K` and `S_{γ,+}`).
    State(usize),
    /// The per-goal discounted first-visit vector.
    FVec(Vec<FEntry>),
    /// The full trajectory `(a_0, s_1, …, a_{K-1}, s_K)`.
    Traj(Vec<(usize, usize)>),
    /// The state sequence `(s_1, …, s_K)`.
    StateSeq(Vec<usize>),
}

/// Which behavioral variable the joint is built over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BehaviorVariable {
    /// State at a `Geom(1-γ)` time.
    SGammaPlus { gamma: f64 },
    /// State at exactly step `K`.
    SK { k: usize },
    /// Discounted first-visit vector over the `K`-step window.
    FirstVisitVector { k: usize, gamma: f64 },
    /// Full `K`-step trajectory (actions and states).
    TrajectoryK { k: usize },
}

impl BehaviorVariable {
    /// The matching goal-reaching formulation, where one exists.
    pub fn matching_formulation(&self) -> Option<Formulation> {
        match *self {
            BehaviorVariable::SGammaPlus { gamma } => Some(Formulation::Pe { gamma }),
            BehaviorVariable::SK { k } => Some(Formulation::Et { k }),
            BehaviorVariable::FirstVisitVector { k, gamma } => Some(Formulation::Ow { k, gamma }),
            BehaviorVariable::TrajectoryK { .. } => None,
        }
    }

    /// Number of values `S'` can take at most (used by the skill-MI gap
    /// bound): `N_s` for state variables, unrestricted otherwise.
    pub fn outcome_cardinality(&self, n_states: usize) -> Option<usize> {
        match self {
            BehaviorVariable::SGammaPlus { .. } | BehaviorVariable::SK { .. } => Some(n_states),
            _ => None,
        }
    }
}

fn state_conditional<B: Branch + ?Sized>(
    mdp: &FiniteMdp,
    branch: &B,
    s0: usize,
    spec: &BehaviorSpec,
) -> Result<DiscreteDistribution<Outcome>, InfoError> {
    let (d, _) = values::behavior_distribution(mdp, branch, s0, spec)?;
    DiscreteDistribution::from_pairs(
        d.into_iter()
            .enumerate()
            .map(|(s, p)| (Outcome::State(s), p)),
    )
}

/// Largest per-state support size of the merged chain over the branch's
/// slots, used for the leaf-count precheck.
fn max_out_degree<B: Branch + ?Sized>(mdp: &FiniteMdp, branch: &B, slots: usize) -> usize {
    let mut worst = 1;
    for t in 0..slots.max(1) {
        let m = values::chain_matrix(mdp, branch, t);
        for row in &m {
            worst = worst.max(row.iter().filter(|&&p| p > 0.0).count());
        }
    }
    worst
}

fn fvec_conditional<B: Branch + ?Sized>(
    mdp: &FiniteMdp,
    branch: &B,
    s0: usize,
    k: usize,
    gamma: f64,
    cap: usize,
) -> Result<DiscreteDistribution<Outcome>, InfoError> {
    let degree = max_out_degree(mdp, branch, branch.prefix_len().max(1).min(k)) as u128;
    let needed = degree.saturating_pow(k as u32);
    if needed > cap as u128 {
        return Err(InfoError::CapExceeded { needed, cap });
    }
    // The first-visit vector depends only on the state path, so paths
    // are enumerated under the merged chain q_t(s'|s).
    fn recurse<B: Branch + ?Sized>(
        mdp: &FiniteMdp,
        branch: &B,
        s: usize,
        t: usize,
        k: usize,
        prob: f64,
        gamma: f64,
        first: &mut Vec<Option<usize>>,
        pairs: &mut Vec<(Outcome, f64)>,
    ) {
        if t == k {
            let fvec: Vec<FEntry> = first
                .iter()
                .map(|&h| FEntry::from_first_visit(h, gamma))
                .collect();
            pairs.push((Outcome::FVec(fvec), prob));
            return;
        }
        let n = mdp.n_states();
        let mut step = vec![0.0; n];
        for a in 0..mdp.n_actions(s) {
            let pa = branch.prob(t, s, a);
            if pa == 0.0 {
                continue;
            }
            for (sp, &p) in mdp.row(s, a).iter().enumerate() {
                step[sp] += pa * p;
            }
        }
        for (sp, &q) in step.iter().enumerate() {
            if q == 0.0 {
                continue;
            }
            let newly = first[sp].is_none();
            if newly {
                first[sp] = Some(t + 1);
            }
            recurse(mdp, branch, sp, t + 1, k, prob * q, gamma, first, pairs);
            if newly {
                first[sp] = None;
            }
        }
    }
    let mut pairs: Vec<(Outcome, f64)> = Vec::new();
    let mut first: Vec<Option<usize>> = vec![None; mdp.n_states()];
    recurse(mdp, branch, s0, 0, k, 1.0, gamma, &mut first, &mut pairs);
    DiscreteDistribution::from_pairs(pairs)
}

fn trajectory_conditional<B: Branch + ?Sized>(
    mdp: &FiniteMdp,
    branch: &B,
    s0: usize,
    k: usize,
    cap: usize,
) -> Result<DiscreteDistribution<Outcome>, InfoError> {
    let worst = (0..mdp.n_states())
        .map(|s| {
            (0..mdp.n_actions(s))
                .map(|a| mdp.row(s, a).iter().filter(|&&p| p > 0.0).count())
                .sum::<usize>()
        })
        .max()
        .unwrap_or(1) as u128;
    let needed = worst.saturating_pow(k as u32);
    if needed > cap as u128 {
        return Err(InfoError::CapExceeded { needed, cap });
    }
    fn recurse<B: Branch + ?Sized>(
        mdp: &FiniteMdp,
        branch: &B,
        s: usize,
        t: usize,
        k: usize,
        prob: f64,
        prefix: &mut Vec<(usize, usize)>,
        pairs: &mut Vec<(Outcome, f64)>,
    ) {
        if t == k {
            pairs.push((Outcome::Traj(prefix.clone()), prob));
            return;
        }
        for a in 0..mdp.n_actions(s) {
            let pa = branch.prob(t, s, a);
            if pa == 0.0 {
                continue;
            }
            for (sp, &p) in mdp.row(s, a).iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                prefix.push((a, sp));
                recurse(mdp, branch, sp, t + 1, k, prob * pa * p, prefix, pairs);
                prefix.pop();
            }
        }
    }
    let mut pairs: Vec<(Outcome, f64)> = Vec::new();
    let mut prefix: Vec<(usize, usize)> = Vec::with_capacity(k);
    recurse(mdp, branch, s0, 0, k, 1.0, &mut prefix, &mut pairs);
    DiscreteDistribution::from_pairs(pairs)
}

/// Exact distribution of the behavioral variable under one branch.
pub fn branch_conditional<B: Branch + ?Sized>(
    mdp: &FiniteMdp,
    branch: &B,
    s0: usize,
    var: &BehaviorVariable,
    cap: usize,
) -> Result<DiscreteDistribution<Outcome>, InfoError> {
    match *var {
        BehaviorVariable::SGammaPlus { gamma } => {
            state_conditional(mdp, branch, s0, &BehaviorSpec::SGammaPlus { gamma })
        }
        BehaviorVariable::SK { k } => state_conditional(mdp, branch, s0, &BehaviorSpec::SK { k }),
        BehaviorVariable::FirstVisitVector { k, gamma } => {
            fvec_conditional(mdp, branch, s0, k, gamma, cap)
        }
        BehaviorVariable::TrajectoryK { k } => trajectory_conditional(mdp, branch, s0, k, cap),
    }
}

/// The exact joint law of (conditioning label, behavioral outcome) from
/// `s0`: `prior` weights the policy's branches (goals or skills), and
/// each conditional is computed exactly.
pub fn behavior_joint(
    mdp: &FiniteMdp,
    policy: &GoalConditionedPolicy,
    s0: usize,
    prior: &[f64],
    var: &BehaviorVariable,
    cap: usize,
) -> Result<JointDistribution<Outcome>, InfoError> {
    if prior.len() != policy.n_branches() {
        return Err(InfoError::LabelMismatch(format!(
            "{} prior weights for {} branches",
            prior.len(),
            policy.n_branches()
        )));
    }
    let mut conditionals = Vec::with_capacity(policy.n_branches());
    for c in 0..policy.n_branches() {
        conditionals.push(branch_conditional(mdp, &policy.branch(c), s0, var, cap)?);
    }
    JointDistribution::new(prior.to_vec(), conditionals)
}

/// `I(G; S' | S_0 = s0)` with `G ~ p_goal` and `S'|G` from branch `G`.
pub fn goal_behavior_mi(
    mdp: &FiniteMdp,
    policy: &GoalConditionedPolicy,
    s0: usize,
    p_goal: &GoalDistribution,
    var: &BehaviorVariable,
    cap: usize,
) -> Result<f64, InfoError> {
    if !policy.is_goal_conditioned(mdp) {
        return Err(InfoError::Value(ValueError::NotGoalConditioned));
    }
    Ok(behavior_joint(mdp, policy, s0, p_goal.weights(), var, cap)?.mutual_information())
}

/// Fano-style lower-bound function
/// `Φ_down(x) = H - h(x) - (1-x)·ln(N-1)`, with `H = ln N` unless a goal
/// entropy is supplied.
pub fn phi_down(n: usize, x: f64, goal_entropy: Option<f64>) -> Result<f64, InfoError> {
    if n < 2 {
        return Err(InfoError::DomainViolation(format!(
            "need N >= 2 outcomes, got {n}"
        )));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(InfoError::DomainViolation(format!(
            "argument {x} outside [0, 1]"
        )));
    }
    let h_goal = goal_entropy.unwrap_or_else(|| math::ln(n as f64));
    Ok(h_goal - binary_entropy(x)? - (1.0 - x) * math::ln((n - 1) as f64))
}

/// Which ceiling the reverse bound uses: the defining convention is
/// `⌈y⌉ = ⌊y⌋ + 1` even at integers; the conventional ceiling is exposed
/// for sensitivity analysis only and never used by the claim suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CeilConvention {
    FloorPlusOne,
    Standard,
}

/// Reverse-Fano upper-bound function
/// `Φ_up(x) = H - (⌈1/x⌉x - 1)·⌊1/x⌋·ln⌊1/x⌋ - (1 - ⌊1/x⌋x)·⌈1/x⌉·ln⌈1/x⌉`.
pub fn phi_up(n: usize, x: f64, goal_entropy: Option<f64>) -> Result<f64, InfoError> {
    phi_up_with(n, x, goal_entropy, CeilConvention::FloorPlusOne)
}

pub fn phi_up_with(
    n: usize,
    x: f64,
    goal_entropy: Option<f64>,
    convention: CeilConvention,
) -> Result<f64, InfoError> {
    if n < 2 {
        return Err(InfoError::DomainViolation(format!(
            "need N >= 2 outcomes, got {n}"
        )));
    }
    if !(0.0..=1.0).contains(&x) || x == 0.0 {
        return Err(InfoError::DomainViolation(format!(
            "argument {x} outside (0, 1]"
        )));
    }
    let h_goal = goal_entropy.unwrap_or_else(|| math::ln(n as f64));
    let y = 1.0 / x;
    let fl = math::floor_snapped(y);
    let ce = match convention {
        CeilConvention::FloorPlusOne => fl + 1.0,
        CeilConvention::Standard => {
            if (y - fl).abs() < 1e-9 {
                fl
            } else {
                fl + 1.0
            }
        }
    };
    let ln_fl = if fl <= 1.0 { 0.0 } else { math::ln(fl) };
    let ln_ce = if ce <= 1.0 { 0.0 } else { math::ln(ce) };
    Ok(h_goal - (ce * x - 1.0) * fl * ln_fl - (1.0 - fl * x) * ce * ln_ce)
}

/// Error probabilities of the naive identity decoder and the Bayes
/// decoder for a (goal, state-valued outcome) joint. Posterior argmax
/// ties break toward the lowest goal index (the value is unaffected).
pub fn decoder_errors(joint: &JointDistribution<Outcome>) -> Result<(f64, f64), InfoError> {
    for cond in &joint.conditionals {
        if cond
            .support()
            .iter()
            .any(|o| !matches!(o, Outcome::State(_)))
        {
            return Err(InfoError::LabelMismatch(
                "identity decoding needs state-valued outcomes".to_string(),
            ));
        }
    }
    let mut correct_naive = 0.0;
    for (g, &w) in joint.prior.iter().enumerate() {
        correct_naive += w * joint.conditionals[g].prob_of(&Outcome::State(g));
    }
    let marginal = joint.marginal();
    let mut correct_bayes = 0.0;
    for outcome in marginal.support() {
        let mut best = 0.0;
        for (g, &w) in joint.prior.iter().enumerate() {
            let mass = w * joint.conditionals[g].prob_of(outcome);
            if mass > best {
                best = mass;
            }
        }
        correct_bayes += best;
    }
    Ok((1.0 - correct_naive, 1.0 - correct_bayes))
}

/// Squared-sensitivity lower bound on the first-visit-vector MI.
pub fn ow_mi_lower_bound(c_ow: f64) -> f64 {
    2.0 * c_ow * c_ow
}

/// Diagnostics for the conditional upper bound on the
/// first-visit-vector MI: the bound `(4 / (η δ²)) · C_OW + ε` holds
/// under (1) tail dominance of every goal payoff against the mixture
/// policy, (2) a positive probability floor on the mixture supports,
/// and (3) finite interference between vector components.
#[derive(Debug, Clone, PartialEq)]
pub struct OwBoundDiagnostics {
    /// Minimum support probability of the per-goal payoff under the
    /// mixture policy.
    pub eta: f64,
    /// Smallest gap between distinct payoff values
    /// (`min{γ^(K-1), γ^(K-2)(1-γ)}`, or 1 when `K = 1`).
    pub delta: f64,
    /// Exact interference: full-vector MI minus the per-goal marginal
    /// divergences.
    pub epsilon_interference: f64,
    pub c_ow: f64,
    /// Exact `I(G; F)` on this instance.
    pub mi: f64,
    pub stochastically_consistent: bool,
    pub support_floor_positive: bool,
    pub interference_finite: bool,
    /// `None` when some assumption fails (the bound is inapplicable).
    pub bound: Option<f64>,
}

impl OwBoundDiagnostics {
    pub fn assumptions_hold(&self) -> bool {
        self.stochastically_consistent && self.support_floor_positive && self.interference_finite
    }
}

/// Marginal distribution of one goal's payoff under one branch.
fn f_marginal<B: Branch + ?Sized>(
    mdp: &FiniteMdp,
    branch: &B,
    s0: usize,
    g: usize,
    k: usize,
    gamma: f64,
) -> Result<DiscreteDistribution<FEntry>, InfoError> {
    let pmf = values::first_visit_time_pmf(mdp, branch, s0, g, k);
    let hit_total: f64 = pmf.iter().sum();
    let mut pairs: Vec<(FEntry, f64)> = pmf
        .into_iter()
        .enumerate()
        .map(|(i, p)| (FEntry::from_first_visit(Some(i + 1), gamma), p))
        .collect();
    pairs.push((FEntry::Miss, 1.0 - hit_total));
    DiscreteDistribution::from_pairs(pairs)
}

/// Evaluates the conditional MI upper bound with full diagnostics.
pub fn ow_upper_bound(
    mdp: &FiniteMdp,
    policy: &GoalConditionedPolicy,
    s0: usize,
    k: usize,
    gamma: f64,
    p_goal: &GoalDistribution,
    cap: usize,
) -> Result<OwBoundDiagnostics, InfoError> {
    if !(0.0 < gamma && gamma < 1.0) {
        return Err(InfoError::DomainViolation(format!(
            "gamma {gamma} outside (0, 1)"
        )));
    }
    if !policy.is_goal_conditioned(mdp) {
        return Err(InfoError::Value(ValueError::NotGoalConditioned));
    }
    let n = mdp.n_states();
    let w = p_goal.weights();

    // Per-goal payoff marginals under every branch and under the mixture.
    let mut marginal_kl_avg = 0.0;
    let mut eta = f64::INFINITY;
    for g in 0..n {
        let mut per_branch = Vec::with_capacity(n);
        for gp in 0..n {
            per_branch.push(f_marginal(mdp, &policy.branch(gp), s0, g, k, gamma)?);
        }
        let parts: Vec<(f64, &DiscreteDistribution<FEntry>)> =
            w.iter().cloned().zip(per_branch.iter()).collect();
        let mixture = DiscreteDistribution::mixture(&parts)?;
        eta = eta.min(mixture.min_support_prob());
        marginal_kl_avg += w[g] * kl_divergence(&per_branch[g], &mixture);
    }

    let delta = if k == 1 {
        1.0
    } else {
        math::powi(gamma, (k - 1) as u32).min(math::powi(gamma, (k - 2) as u32) * (1.0 - gamma))
    };

    let mi = goal_behavior_mi(
        mdp,
        policy,
        s0,
        p_goal,
        &BehaviorVariable::FirstVisitVector { k, gamma },
        cap,
    )?;
    let epsilon = mi - marginal_kl_avg;

    let form = Formulation::Ow { k, gamma };
    let c_ow = sensitivity::goal_sensitivity(mdp, &form, policy, s0, p_goal)?.c_value;

    // Assumption 1: tail dominance at the evaluated start state.
    let mut consistent = true;
    'outer: for g in 0..n {
        for (_, lhs, rhs) in
            sensitivity::stochastic_consistency_gaps(mdp, policy, w, s0, g, k, gamma)?
        {
            if lhs + 1e-12 < rhs {
                consistent = false;
                break 'outer;
            }
        }
    }
    let support_floor_positive = eta > 0.0;
    let interference_finite = epsilon.is_finite();
    let bound = if consistent && support_floor_positive && interference_finite {
        Some(4.0 / (eta * delta * delta) * c_ow + epsilon)
    } else {
        None
    };
    Ok(OwBoundDiagnostics {
        eta,
        delta,
        epsilon_interference: epsilon,
        c_ow,
        mi,
        stochastically_consistent: consistent,
        support_floor_positive,
        interference_finite,
        bound,
    })
}

/// The maximum of `I(G; S_K)` over all goal-conditioned policies in a
/// deterministic MDP: goals distribute over the reachable endpoints as
/// evenly as possible, so the maximum is the entropy of the balanced
/// split. (The MI is convex in each conditional separately, so a
/// deterministic assignment attains the maximum.)
pub fn max_goal_mi_deterministic(mdp: &FiniteMdp, s0: usize, k: usize) -> Result<f64, InfoError> {
    if !mdp.predicates().deterministic {
        return Err(InfoError::DomainViolation(
            "closed-form maximum applies to deterministic MDPs only".to_string(),
        ));
    }
    let mut layer = vec![s0];
    for _ in 0..k {
        let mut next: Vec<usize> = layer
            .iter()
            .flat_map(|&s| {
                (0..mdp.n_actions(s))
                    .map(move |a| mdp.deterministic_successor(s, a).expect("deterministic"))
            })
            .collect();
        next.sort_unstable();
        next.dedup();
        layer = next;
    }
    let n = mdp.n_states();
    let r = layer.len().min(n);
    let lo = n / r;
    let q = n % r;
    let hi = lo + 1;
    let mut h = math::ln(n as f64);
    h -= (q as f64 * hi as f64 * math::ln(hi as f64)
        + (r - q) as f64 * lo as f64 * if lo > 1 { math::ln(lo as f64) } else { 0.0 })
        / n as f64;
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp;
    use crate::mdp::FiniteMdp;
    use crate::policy::{self, Conditioning, GoalToSkillMap};

    fn dist(pairs: &[(usize, f64)]) -> DiscreteDistribution<usize> {
        DiscreteDistribution::from_pairs(pairs.iter().cloned()).unwrap()
    }

    #[test]
    fn entropy_identities() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.5).unwrap() - math::ln(2.0)).abs() < 1e-15);
        assert!(binary_entropy(1.5).is_err());
    }

    #[test]
    fn kl_and_tv_basics() {
        let p = dist(&[(0, 0.3), (1, 0.7)]);
        let q = dist(&[(0, 0.6), (1, 0.4)]);
        assert_eq!(kl_divergence(&p, &p), 0.0);
        assert_eq!(total_variation(&p, &p), 0.0);
        assert!((total_variation(&p, &q) - 0.3).abs() < 1e-15);
        // Mass outside the support: distinguished infinity.
        let r = dist(&[(2, 1.0)]);
        assert_eq!(kl_divergence(&p, &r), f64::INFINITY);
    }

    #[test]
    fn pinsker_on_random_pairs() {
        let mut rng = crate::rng::SplitMix64::new(3);
        for _ in 0..200 {
            let mut draw = || {
                let mut v = [0.0; 4];
                let mut sum = 0.0;
                for x in v.iter_mut() {
                    *x = rng.next_positive_f64();
                    sum += *x;
                }
                dist(&[
                    (0, v[0] / sum),
                    (1, v[1] / sum),
                    (2, v[2] / sum),
                    (3, v[3] / sum),
                ])
            };
            let p = draw();
            let q = draw();
            let tv = total_variation(&p, &q);
            let kl = kl_divergence(&p, &q);
            assert!(tv * tv <= kl / 2.0 + 1e-14);
        }
    }

    #[test]
    fn mi_of_independent_and_perfect_joints() {
        let shared = dist(&[(0, 0.5), (1, 0.5)]);
        let indep = JointDistribution::new(vec![0.5, 0.5], vec![shared.clone(), shared]).unwrap();
        assert!(indep.mutual_information().abs() < 1e-15);
        let perfect =
            JointDistribution::new(vec![0.5, 0.5], vec![dist(&[(0, 1.0)]), dist(&[(1, 1.0)])])
                .unwrap();
        assert!((perfect.mutual_information() - math::ln(2.0)).abs() < 1e-15);
    }

    #[test]
    fn mi_equals_average_kl_to_marginal() {
        let joint = JointDistribution::new(
            vec![0.25, 0.75],
            vec![
                dist(&[(0, 0.9), (1, 0.1)]),
                dist(&[(0, 0.2), (1, 0.5), (2, 0.3)]),
            ],
        )
        .unwrap();
        let marginal = joint.marginal();
        let avg_kl: f64 = joint
            .prior
            .iter()
            .zip(joint.conditionals.iter())
            .map(|(&w, c)| w * kl_divergence(c, &marginal))
            .sum();
        assert!((joint.mutual_information() - avg_kl).abs() < 1e-13);
    }

    #[test]
    fn mi_bounded_by_prior_and_outcome_entropy() {
        let mut rng = crate::rng::SplitMix64::new(8);
        for _ in 0..50 {
            let mut conds = Vec::new();
            for _ in 0..3 {
                let mut v = [0.0; 3];
                let mut sum = 0.0;
                for x in v.iter_mut() {
                    *x = rng.next_positive_f64();
                    sum += *x;
                }
                conds.push(dist(&[(0, v[0] / sum), (1, v[1] / sum), (2, v[2] / sum)]));
            }
            let joint = JointDistribution::new(vec![0.2, 0.5, 0.3], conds).unwrap();
            let mi = joint.mutual_information();
            assert!(mi >= 0.0);
            assert!(mi <= entropy(&joint.prior) + 1e-12);
            assert!(mi <= math::ln(3.0) + 1e-12);
        }
    }

    #[test]
    fn phi_down_anchors() {
        for n in 2..=10 {
            assert!((phi_down(n, 1.0, None).unwrap() - math::ln(n as f64)).abs() < 1e-14);
            assert!(
                phi_down(n, 1.0 / n as f64, None).unwrap().abs() < 1e-12,
                "n = {n}"
            );
        }
        assert!(phi_down(5, 0.6, None).unwrap() > phi_down(5, 0.4, None).unwrap());
        assert!(phi_down(1, 0.5, None).is_err());
        assert!(phi_down(3, 1.2, None).is_err());
    }

    #[test]
    fn phi_up_anchors() {
        // Φ_up(1) = ln N under the floor-plus-one ceiling.
        for n in 2..=8 {
            assert!((phi_up(n, 1.0, None).unwrap() - math::ln(n as f64)).abs() < 1e-12);
        }
        // Φ_up(1/m) = ln N - ln m at integer reciprocals.
        for m in 1..=5usize {
            let got = phi_up(6, 1.0 / m as f64, None).unwrap();
            let want = math::ln(6.0) - math::ln(m as f64);
            assert!((got - want).abs() < 1e-9, "m = {m}: {got} vs {want}");
        }
        assert!(phi_up(4, 0.0, None).is_err());
    }

    #[test]
    fn phi_up_dominates_phi_down_on_grid() {
        let n = 5;
        let mut x = 1.0 / n as f64;
        while x <= 1.0 {
            let up = phi_up(n, x, None).unwrap();
            let down = phi_down(n, x, None).unwrap();
            assert!(up >= down - 1e-12, "x = {x}: {up} < {down}");
            x += 1e-3;
        }
    }

    #[test]
    fn deterministic_joint_conditionals_are_point_masses() {
        let m = mdp::grid(2).unwrap();
        let pol = crate::values::optimal_policy(&m, &Formulation::Et { k: 2 }, 100).unwrap();
        let joint = behavior_joint(
            &m,
            &pol,
            0,
            GoalDistribution::uniform(4).weights(),
            &BehaviorVariable::SK { k: 2 },
            1_000_000,
        )
        .unwrap();
        for cond in &joint.conditionals {
            assert_eq!(cond.support().len(), 1);
        }
    }

    #[test]
    fn goal_independent_policy_mi_is_zero() {
        let m = mdp::random_mdp(3, 2, 2, 17).unwrap();
        let base = policy::random_policy(&m, Conditioning::Skills(1), 1, 5);
        let pol =
            policy::compose_downstream(&m, &base, &GoalToSkillMap::constant(3, 0, 1)).unwrap();
        let u = GoalDistribution::uniform(3);
        for var in [
            BehaviorVariable::SGammaPlus { gamma: 0.5 },
            BehaviorVariable::SK { k: 2 },
            BehaviorVariable::FirstVisitVector { k: 2, gamma: 0.5 },
            BehaviorVariable::TrajectoryK { k: 2 },
        ] {
            let mi = goal_behavior_mi(&m, &pol, 0, &u, &var, 1_000_000).unwrap();
            assert!(mi.abs() < 1e-13, "{var:?}: {mi}");
        }
    }

    #[test]
    fn fvec_joint_total_mass_and_sampling_oracle() {
        // Aggregated joint mass must be exactly 1, and per-outcome masses
        // must agree with seeded Monte-Carlo rollouts within 3σ.
        let m = mdp::random_mdp(2, 2, 2, 23).unwrap();
        let pol = policy::random_policy(&m, Conditioning::Goals, 2, 31);
        let u = GoalDistribution::uniform(2);
        let k = 2;
        let gamma = 0.5;
        let joint = behavior_joint(
            &m,
            &pol,
            0,
            u.weights(),
            &BehaviorVariable::FirstVisitVector { k, gamma },
            1_000_000,
        )
        .unwrap();
        for cond in &joint.conditionals {
            let total: f64 = cond.probs().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
        // Rollout oracle for goal branch 0.
        let mut rng = crate::rng::SplitMix64::new(99);
        let trials = 200_000usize;
        let mut counts: BTreeMap<Vec<FEntry>, usize> = BTreeMap::new();
        for _ in 0..trials {
            let mut s = 0usize;
            let mut first = [None::<usize>; 2];
            for t in 0..k {
                let mut x = rng.next_f64();
                let mut a = 0;
                for cand in 0..m.n_actions(s) {
                    let p = pol.branch(0).prob(t, s, cand);
                    a = cand;
                    if x < p {
                        break;
                    }
                    x -= p;
                }
                let mut y = rng.next_f64();
                let mut sp = 0;
                for (cand, &p) in m.row(s, a).iter().enumerate() {
                    sp = cand;
                    if y < p {
                        break;
                    }
                    y -= p;
                }
                s = sp;
                if first[s].is_none() {
                    first[s] = Some(t + 1);
                }
            }
            let fvec: Vec<FEntry> = first
                .iter()
                .map(|&h| FEntry::from_first_visit(h, gamma))
                .collect();
            *counts.entry(fvec).or_insert(0) += 1;
        }
        let cond = &joint.conditionals[0];
        for (outcome, &count) in &counts {
            let p_hat = count as f64 / trials as f64;
            let p = cond.prob_of(&Outcome::FVec(outcome.clone()));
            let sigma = math::sqrt((p * (1.0 - p) / trials as f64).max(1e-12));
            assert!(
                (p_hat - p).abs() < 3.0 * sigma + 1e-3,
                "outcome {outcome:?}: model {p} vs sampled {p_hat}"
            );
        }
    }

    #[test]
    fn fentry_endpoint_collapse() {
        assert_eq!(FEntry::from_first_visit(Some(2), 0.0), FEntry::Miss);
        assert_eq!(FEntry::from_first_visit(Some(1), 0.0), FEntry::Hit(0));
        assert_eq!(FEntry::from_first_visit(Some(3), 1.0), FEntry::Hit(0));
        assert_eq!(FEntry::from_first_visit(None, 0.7), FEntry::Miss);
        assert_eq!(FEntry::from_first_visit(Some(3), 0.7), FEntry::Hit(2));
        assert!((FEntry::Hit(2).payoff(0.5) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn decoder_errors_perfect_and_uninformative() {
        // Perfect reaching: both errors zero.
        let perfect = JointDistribution::new(
            vec![0.5, 0.5],
            vec![
                DiscreteDistribution::from_pairs([(Outcome::State(0), 1.0)]).unwrap(),
                DiscreteDistribution::from_pairs([(Outcome::State(1), 1.0)]).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(decoder_errors(&perfect).unwrap(), (0.0, 0.0));

        // Goal-independent conditionals with a uniform prior over N
        // goals: both errors are 1 - 1/N.
        let n = 4;
        let m = mdp::random_mdp(n, 2, 2, 41).unwrap();
        let base = policy::random_policy(&m, Conditioning::Skills(1), 1, 3);
        let pol =
            policy::compose_downstream(&m, &base, &GoalToSkillMap::constant(n, 0, 1)).unwrap();
        let u = GoalDistribution::uniform(n);
        let joint = behavior_joint(
            &m,
            &pol,
            0,
            u.weights(),
            &BehaviorVariable::SK { k: 2 },
            1_000_000,
        )
        .unwrap();
        let (pe, pe_star) = decoder_errors(&joint).unwrap();
        assert!((pe - 0.75).abs() < 1e-12);
        assert!((pe_star - 0.75).abs() < 1e-12);
    }

    #[test]
    fn bayes_never_worse_than_identity() {
        for seed in 0..20 {
            let m = mdp::random_mdp(3, 2, 2, seed).unwrap();
            let pol = policy::random_policy(&m, Conditioning::Goals, 1, seed + 7);
            let u = GoalDistribution::uniform(3);
            let joint = behavior_joint(
                &m,
                &pol,
                0,
                u.weights(),
                &BehaviorVariable::SK { k: 2 },
                1_000_000,
            )
            .unwrap();
            let (pe, pe_star) = decoder_errors(&joint).unwrap();
            assert!(pe_star <= pe + 1e-13, "seed {seed}");
        }
    }

    #[test]
    fn data_processing_chain_via_projection() {
        for seed in 0..10 {
            let m = mdp::random_mdp(3, 2, 2, seed + 60).unwrap();
            let pol = policy::random_policy(&m, Conditioning::Goals, 3, seed);
            let u = GoalDistribution::uniform(3);
            let k = 3;
            let traj = behavior_joint(
                &m,
                &pol,
                0,
                u.weights(),
                &BehaviorVariable::TrajectoryK { k },
                1_000_000,
            )
            .unwrap();
            let state_seq = traj.map_outcomes(|o| match o {
                Outcome::Traj(steps) => Outcome::StateSeq(steps.iter().map(|&(_, s)| s).collect()),
                _ => unreachable!(),
            });
            let last = state_seq.map_outcomes(|o| match o {
                Outcome::StateSeq(seq) => Outcome::State(*seq.last().unwrap()),
                _ => unreachable!(),
            });
            let i_traj = traj.mutual_information();
            let i_seq = state_seq.mutual_information();
            let i_last = last.mutual_information();
            assert!(i_last <= i_seq + 1e-10);
            assert!(i_seq <= i_traj + 1e-10);
            // And the direct SK joint matches the projected one.
            let direct =
                goal_behavior_mi(&m, &pol, 0, &u, &BehaviorVariable::SK { k }, 1_000_000).unwrap();
            assert!((direct - i_last).abs() < 1e-10);
        }
    }

    #[test]
    fn ow_bound_zero_for_goal_independent_policy() {
        let m = mdp::random_mdp(3, 2, 2, 71).unwrap();
        let base = policy::random_policy(&m, Conditioning::Skills(1), 2, 5);
        let pol =
            policy::compose_downstream(&m, &base, &GoalToSkillMap::constant(3, 0, 1)).unwrap();
        let u = GoalDistribution::uniform(3);
        let d = ow_upper_bound(&m, &pol, 0, 2, 0.5, &u, 1_000_000).unwrap();
        assert!(d.assumptions_hold());
        assert!(d.c_ow.abs() < 1e-13);
        assert!(d.mi.abs() < 1e-13);
        assert!(d.epsilon_interference.abs() < 1e-12);
        assert!(d.bound.unwrap().abs() < 1e-10);
    }

    #[test]
    fn ow_bound_k1_uses_unit_gap() {
        let m = mdp::random_mdp(3, 2, 2, 72).unwrap();
        let pol = policy::random_policy(&m, Conditioning::Goals, 1, 6);
        let u = GoalDistribution::uniform(3);
        let d = ow_upper_bound(&m, &pol, 0, 1, 0.5, &u, 1_000_000).unwrap();
        assert_eq!(d.delta, 1.0);
    }

    #[test]
    fn max_goal_mi_matches_enumerated_assignments() {
        // Three goals over two reachable endpoints: best split is 2/1,
        // verified against enumeration of all deterministic assignments.
        let m = FiniteMdp::new(
            vec!["s".into(), "g1".into(), "g2".into()],
            vec![
                vec!["a1".into(), "a2".into()],
                vec!["stay".into()],
                vec!["stay".into()],
            ],
            vec![
                vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
                vec![vec![0.0, 1.0, 0.0]],
                vec![vec![0.0, 0.0, 1.0]],
            ],
        )
        .unwrap();
        let closed = max_goal_mi_deterministic(&m, 0, 1).unwrap();
        // Enumerate assignments of 3 goals to the 2 endpoints.
        let mut best = 0.0_f64;
        for mask in 0..8u32 {
            let conds: Vec<DiscreteDistribution<usize>> = (0..3)
                .map(|g| {
                    let endpoint = if mask & (1 << g) == 0 { 1 } else { 2 };
                    dist(&[(endpoint, 1.0)])
                })
                .collect();
            let joint = JointDistribution::new(vec![1.0 / 3.0; 3], conds).unwrap();
            best = best.max(joint.mutual_information());
        }
        assert!((closed - best).abs() < 1e-12);
        let h_third = binary_entropy(1.0 / 3.0).unwrap();
        assert!((closed - h_third).abs() < 1e-12);
    }
}
