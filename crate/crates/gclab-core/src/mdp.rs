//! Finite MDP representation, validation, and environment constructors.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::math;
use crate::rng::SplitMix64;

/// Row sums may deviate from 1 by at most this much before the kernel is
/// rejected; rows inside the tolerance are renormalized exactly so that
/// downstream arithmetic starts from clean distributions.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// A violation found while validating raw kernel data. Violations are
/// data, not failures: the validator reports all of them at once.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    RowSum {
        state: String,
        action: String,
        sum: f64,
    },
    NegativeProbability {
        state: String,
        action: String,
        next: String,
        value: f64,
    },
    EmptyActionSet {
        state: String,
    },
    DuplicateState {
        id: String,
    },
    DuplicateAction {
        state: String,
        id: String,
    },
    ShapeMismatch {
        detail: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RowSum { state, action, sum } => {
                write!(f, "row-sum {sum} at ({state}, {action})")
            }
            Violation::NegativeProbability {
                state,
                action,
                next,
                value,
            } => {
                write!(
                    f,
                    "negative probability {value} at ({state}, {action}) -> {next}"
                )
            }
            Violation::EmptyActionSet { state } => write!(f, "empty action set at {state}"),
            Violation::DuplicateState { id } => write!(f, "duplicate state id {id}"),
            Violation::DuplicateAction { state, id } => {
                write!(f, "duplicate action id {id} at {state}")
            }
            Violation::ShapeMismatch { detail } => write!(f, "shape mismatch: {detail}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MdpError {
    Invalid(Vec<Violation>),
    BadParameter(String),
}

impl fmt::Display for MdpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MdpError::Invalid(vs) => {
                write!(f, "invalid MDP ({} violation(s))", vs.len())?;
                for v in vs {
                    write!(f, "; {v}")?;
                }
                Ok(())
            }
            MdpError::BadParameter(msg) => write!(f, "bad parameter: {msg}"),
        }
    }
}

impl core::error::Error for MdpError {}

/// Structural facts about an environment that several equivalence results
/// condition on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnvPredicates {
    /// Every `(s, a)` row puts probability 1 on a single successor.
    pub deterministic: bool,
    /// Every state has an action whose row is a self-loop with probability 1.
    pub has_waiting_actions: bool,
}

/// A finite MDP: ordered states, per-state ordered action sets, and a
/// dense transition kernel. Immutable after construction; every operation
/// on it is a pure function.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMdp {
    states: Vec<String>,
    actions: Vec<Vec<String>>,
    kernel: Vec<Vec<Vec<f64>>>,
    state_index: BTreeMap<String, usize>,
}

/// Validates raw kernel data, reporting every violation found.
pub fn validate(
    states: &[String],
    actions: &[Vec<String>],
    kernel: &[Vec<Vec<f64>>],
) -> Vec<Violation> {
    let mut violations = Vec::new();
    let n = states.len();
    if n == 0 {
        violations.push(Violation::ShapeMismatch {
            detail: "no states".to_string(),
        });
        return violations;
    }
    let mut seen = BTreeMap::new();
    for s in states {
        if seen.insert(s.clone(), ()).is_some() {
            violations.push(Violation::DuplicateState { id: s.clone() });
        }
    }
    if actions.len() != n || kernel.len() != n {
        violations.push(Violation::ShapeMismatch {
            detail: format!(
                "{} states but {} action lists and {} kernel blocks",
                n,
                actions.len(),
                kernel.len()
            ),
        });
        return violations;
    }
    for (s, state) in states.iter().enumerate() {
        if actions[s].is_empty() {
            violations.push(Violation::EmptyActionSet {
                state: state.clone(),
            });
        }
        let mut seen_a = BTreeMap::new();
        for a in &actions[s] {
            if seen_a.insert(a.clone(), ()).is_some() {
                violations.push(Violation::DuplicateAction {
                    state: state.clone(),
                    id: a.clone(),
                });
            }
        }
        if kernel[s].len() != actions[s].len() {
            violations.push(Violation::ShapeMismatch {
                detail: format!(
                    "state {state} has {} actions but {} kernel rows",
                    actions[s].len(),
                    kernel[s].len()
                ),
            });
            continue;
        }
        for (a, row) in kernel[s].iter().enumerate() {
            if row.len() != n {
                violations.push(Violation::ShapeMismatch {
                    detail: format!(
                        "row ({state}, {}) has length {}, expected {n}",
                        actions[s][a],
                        row.len()
                    ),
                });
                continue;
            }
            let mut sum = 0.0;
            for (sp, &p) in row.iter().enumerate() {
                if p < 0.0 {
                    violations.push(Violation::NegativeProbability {
                        state: state.clone(),
                        action: actions[s][a].clone(),
                        next: states[sp].clone(),
                        value: p,
                    });
                }
                sum += p;
            }
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                violations.push(Violation::RowSum {
                    state: state.clone(),
                    action: actions[s][a].clone(),
                    sum,
                });
            }
        }
    }
    violations
}

impl FiniteMdp {
    /// Builds an MDP from raw parts. Rows within [`ROW_SUM_TOLERANCE`] of
    /// summing to 1 are renormalized exactly; anything worse is rejected
    /// with the full violation list.
    pub fn new(
        states: Vec<String>,
        actions: Vec<Vec<String>>,
        mut kernel: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self, MdpError> {
        let violations = validate(&states, &actions, &kernel);
        if !violations.is_empty() {
            return Err(MdpError::Invalid(violations));
        }
        // Rows already within 1e-13 of 1 are kept bit-for-bit, which
        // makes normalization idempotent (a normalized row re-ingested
        // from a file does not shift in its last ulp).
        for rows in kernel.iter_mut() {
            for row in rows.iter_mut() {
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > 1e-13 {
                    for p in row.iter_mut() {
                        *p /= sum;
                    }
                }
            }
        }
        let state_index = states
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, s)| (s, i))
            .collect();
        Ok(Self {
            states,
            actions,
            kernel,
            state_index,
        })
    }

    /// Re-runs the validator on the stored (already normalized) data.
    pub fn validate(&self) -> Vec<Violation> {
        validate(&self.states, &self.actions, &self.kernel)
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn n_actions(&self, s: usize) -> usize {
        self.actions[s].len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn state_name(&self, s: usize) -> &str {
        &self.states[s]
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.state_index.get(name).copied()
    }

    pub fn actions_of(&self, s: usize) -> &[String] {
        &self.actions[s]
    }

    pub fn action_name(&self, s: usize, a: usize) -> &str {
        &self.actions[s][a]
    }

    pub fn action_index(&self, s: usize, name: &str) -> Option<usize> {
        self.actions[s].iter().position(|a| a == name)
    }

    /// Transition row `p(· | s, a)` as a dense slice over states.
    pub fn row(&self, s: usize, a: usize) -> &[f64] {
        &self.kernel[s][a]
    }

    pub fn prob(&self, s: usize, a: usize, sp: usize) -> f64 {
        self.kernel[s][a][sp]
    }

    /// Largest per-state action count.
    pub fn max_actions(&self) -> usize {
        self.actions.iter().map(|a| a.len()).max().unwrap_or(0)
    }

    pub fn predicates(&self) -> EnvPredicates {
        let deterministic = self.kernel.iter().all(|rows| {
            rows.iter()
                .all(|row| row.iter().filter(|&&p| p > 0.0).count() == 1)
        });
        let has_waiting_actions = (0..self.n_states()).all(|s| {
            self.kernel[s].iter().any(|row| {
                row.iter()
                    .enumerate()
                    .all(|(sp, &p)| if sp == s { p == 1.0 } else { p == 0.0 })
            })
        });
        EnvPredicates {
            deterministic,
            has_waiting_actions,
        }
    }

    /// For a deterministic MDP, the unique successor of `(s, a)`.
    pub fn deterministic_successor(&self, s: usize, a: usize) -> Option<usize> {
        let row = self.row(s, a);
        let mut hit = None;
        for (sp, &p) in row.iter().enumerate() {
            if p > 0.0 {
                if hit.is_some() {
                    return None;
                }
                hit = Some(sp);
            }
        }
        hit
    }
}

/// The river-crossing environment: three bank states `s1 s2 s3` leading
/// to the goal `g` over a bridge, risky jump actions at `s1` and `s2`
/// that reach `g` with probabilities `eps1` and `eps2` (else the trap
/// `T`), and absorbing `g` and `T`.
pub fn river(eps1: f64, eps2: f64) -> Result<FiniteMdp, MdpError> {
    for (name, e) in [("eps1", eps1), ("eps2", eps2)] {
        if !(0.0..=1.0).contains(&e) || !e.is_finite() {
            return Err(MdpError::BadParameter(format!(
                "{name} = {e} outside [0, 1]"
            )));
        }
    }
    let states: Vec<String> = ["s1", "s2", "s3", "g", "T"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let n = states.len();
    let idx = |name: &str| states.iter().position(|s| s == name).unwrap();
    let (s2, s3, g, t) = (idx("s2"), idx("s3"), idx("g"), idx("T"));
    let point = |sp: usize| {
        let mut row = vec![0.0; n];
        row[sp] = 1.0;
        row
    };
    let jump = |eps: f64| {
        let mut row = vec![0.0; n];
        row[g] = eps;
        row[t] = 1.0 - eps;
        row
    };
    let actions = vec![
        vec!["a_f".to_string(), "a_j".to_string()],
        vec!["a_f".to_string(), "a_j".to_string()],
        vec!["a_f".to_string()],
        vec!["a_w".to_string()],
        vec!["a_w".to_string()],
    ];
    let kernel = vec![
        vec![point(s2), jump(eps1)],
        vec![point(s3), jump(eps2)],
        vec![point(g)],
        vec![point(g)],
        vec![point(t)],
    ];
    FiniteMdp::new(states, actions, kernel)
}

/// An `n × n` deterministic grid with actions `up down left right stay`;
/// moves off the edge clamp to the current cell. The `stay` action gives
/// every state a waiting action.
pub fn grid(n: usize) -> Result<FiniteMdp, MdpError> {
    if n == 0 {
        return Err(MdpError::BadParameter(
            "grid size must be at least 1".to_string(),
        ));
    }
    let n_states = n * n;
    let cell = |r: usize, c: usize| r * n + c;
    let states: Vec<String> = (0..n)
        .flat_map(|r| (0..n).map(move |c| format!("r{r}c{c}")))
        .collect();
    let action_names = ["up", "down", "left", "right", "stay"];
    let mut actions = Vec::with_capacity(n_states);
    let mut kernel = Vec::with_capacity(n_states);
    for r in 0..n {
        for c in 0..n {
            let mut rows = Vec::with_capacity(action_names.len());
            for name in action_names {
                let (nr, nc) = match name {
                    "up" => (r.saturating_sub(1), c),
                    "down" => ((r + 1).min(n - 1), c),
                    "left" => (r, c.saturating_sub(1)),
                    "right" => (r, (c + 1).min(n - 1)),
                    _ => (r, c),
                };
                let mut row = vec![0.0; n_states];
                row[cell(nr, nc)] = 1.0;
                rows.push(row);
            }
            actions.push(action_names.iter().map(|a| a.to_string()).collect());
            kernel.push(rows);
        }
    }
    FiniteMdp::new(states, actions, kernel)
}

/// A seeded random MDP: every `(s, a)` row has exactly `branching`
/// distinct successors with weights drawn uniformly and renormalized.
/// A pure function of its arguments — equal inputs give bit-identical
/// kernels.
pub fn random_mdp(
    n_states: usize,
    n_actions: usize,
    branching: usize,
    seed: u64,
) -> Result<FiniteMdp, MdpError> {
    if n_states == 0 || n_actions == 0 {
        return Err(MdpError::BadParameter(
            "state and action counts must be at least 1".to_string(),
        ));
    }
    if branching == 0 || branching > n_states {
        return Err(MdpError::BadParameter(format!(
            "branching {branching} outside 1..={n_states}"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let states: Vec<String> = (0..n_states).map(|i| format!("s{i}")).collect();
    let action_names: Vec<String> = (0..n_actions).map(|i| format!("a{i}")).collect();
    let mut kernel = Vec::with_capacity(n_states);
    for _ in 0..n_states {
        let mut rows = Vec::with_capacity(n_actions);
        for _ in 0..n_actions {
            // Partial Fisher-Yates picks `branching` distinct successors.
            let mut pool: Vec<usize> = (0..n_states).collect();
            for i in 0..branching {
                let j = i + rng.next_index(n_states - i);
                pool.swap(i, j);
            }
            let mut row = vec![0.0; n_states];
            let mut total = 0.0;
            let mut weights = Vec::with_capacity(branching);
            for _ in 0..branching {
                let w = rng.next_positive_f64();
                total += w;
                weights.push(w);
            }
            for (k, w) in weights.into_iter().enumerate() {
                row[pool[k]] = w / total;
            }
            rows.push(row);
        }
        kernel.push(rows);
    }
    let actions = vec![action_names; n_states];
    FiniteMdp::new(states, actions, kernel)
}

/// A star environment: a hub with one action per arm (each reaching a
/// distinct absorbing arm state surely) plus a waiting action. The
/// branch for goal `k` visits its own target and nothing else, which
/// makes every cross-goal value exactly zero — the equality case of the
/// value/sensitivity bound for windowed goal reaching.
pub fn star(arms: usize) -> Result<FiniteMdp, MdpError> {
    if arms == 0 {
        return Err(MdpError::BadParameter(
            "star needs at least one arm".to_string(),
        ));
    }
    let n = arms + 1;
    let mut states = vec!["hub".to_string()];
    states.extend((0..arms).map(|i| format!("arm{i}")));
    let mut actions = Vec::with_capacity(n);
    let mut kernel = Vec::with_capacity(n);
    let mut hub_actions: Vec<String> = (0..arms).map(|i| format!("go{i}")).collect();
    hub_actions.push("stay".to_string());
    let mut hub_rows = Vec::with_capacity(arms + 1);
    for i in 0..arms {
        let mut row = vec![0.0; n];
        row[i + 1] = 1.0;
        hub_rows.push(row);
    }
    let mut stay_row = vec![0.0; n];
    stay_row[0] = 1.0;
    hub_rows.push(stay_row);
    actions.push(hub_actions);
    kernel.push(hub_rows);
    for i in 0..arms {
        let mut row = vec![0.0; n];
        row[i + 1] = 1.0;
        actions.push(vec!["stay".to_string()]);
        kernel.push(vec![row]);
    }
    FiniteMdp::new(states, actions, kernel)
}

/// A probability vector over goal states.
#[derive(Debug, Clone, PartialEq)]
pub struct GoalDistribution {
    weights: Vec<f64>,
}

impl GoalDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self, MdpError> {
        if weights.is_empty() {
            return Err(MdpError::BadParameter(
                "empty goal distribution".to_string(),
            ));
        }
        if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(MdpError::BadParameter("negative goal weight".to_string()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(MdpError::BadParameter(format!("goal weights sum to {sum}")));
        }
        Ok(Self { weights })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            weights: vec![1.0 / n as f64; n],
        }
    }

    /// Seeded non-uniform distribution with every mass at least
    /// `min_mass`: positive draws are normalized and then mixed with the
    /// uniform so the floor holds exactly.
    pub fn seeded(n: usize, seed: u64, min_mass: f64) -> Self {
        let mut rng = SplitMix64::new(seed);
        let mut w: Vec<f64> = (0..n).map(|_| rng.next_positive_f64()).collect();
        let sum: f64 = w.iter().sum();
        for x in w.iter_mut() {
            *x /= sum;
        }
        let beta = (min_mass * n as f64 * 1.5).min(1.0);
        for x in w.iter_mut() {
            *x = (1.0 - beta) * *x + beta / n as f64;
        }
        let sum: f64 = w.iter().sum();
        for x in w.iter_mut() {
            *x /= sum;
        }
        Self { weights: w }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        let u = 1.0 / self.weights.len() as f64;
        self.weights.iter().all(|&w| (w - u).abs() < 1e-12)
    }

    pub fn min_mass(&self) -> f64 {
        self.weights.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_mass(&self) -> f64 {
        self.weights.iter().cloned().fold(0.0, f64::max)
    }

    /// Entropy in nats.
    pub fn entropy(&self) -> f64 {
        -self.weights.iter().map(|&w| math::xlnx(w)).sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_state_self_loop() -> FiniteMdp {
        FiniteMdp::new(
            vec!["s0".to_string()],
            vec![vec!["a0".to_string()]],
            vec![vec![vec![1.0]]],
        )
        .unwrap()
    }

    #[test]
    fn self_loop_is_valid() {
        let m = one_state_self_loop();
        assert!(m.validate().is_empty());
        assert_eq!(
            m.predicates(),
            EnvPredicates {
                deterministic: true,
                has_waiting_actions: true
            }
        );
    }

    #[test]
    fn row_sum_violation_names_the_row() {
        let states = vec!["s0".to_string(), "s1".to_string()];
        let actions = vec![vec!["a0".to_string()], vec!["a0".to_string()]];
        let kernel = vec![vec![vec![0.49, 0.49]], vec![vec![0.0, 1.0]]];
        let violations = validate(&states, &actions, &kernel);
        assert_eq!(violations.len(), 1);
        let msg = alloc::format!("{}", violations[0]);
        assert!(msg.contains("row-sum 0.98"), "{msg}");
        assert!(msg.contains("(s0, a0)"), "{msg}");
        assert!(FiniteMdp::new(states, actions, kernel).is_err());
    }

    #[test]
    fn negative_probability_is_reported() {
        let states = vec!["s0".to_string(), "s1".to_string()];
        let actions = vec![vec!["a0".to_string()], vec!["a0".to_string()]];
        let kernel = vec![vec![vec![-0.1, 1.1]], vec![vec![0.0, 1.0]]];
        let violations = validate(&states, &actions, &kernel);
        assert!(violations
            .iter()
            .any(|v| matches!(v, Violation::NegativeProbability { .. })));
    }

    #[test]
    fn rows_within_tolerance_renormalize_exactly() {
        let eps = 4e-10;
        let m = FiniteMdp::new(
            vec!["s0".to_string(), "s1".to_string()],
            vec![vec!["a0".to_string()], vec!["a0".to_string()]],
            vec![vec![vec![0.5 + eps, 0.5]], vec![vec![0.0, 1.0]]],
        )
        .unwrap();
        let sum: f64 = m.row(0, 0).iter().sum();
        assert!((sum - 1.0).abs() < 1e-15);
    }

    #[test]
    fn river_matches_its_construction() {
        let m = river(0.08, 0.2).unwrap();
        assert!(m.validate().is_empty());
        let (s1, g) = (m.state_index("s1").unwrap(), m.state_index("g").unwrap());
        let a_j = m.action_index(s1, "a_j").unwrap();
        assert_eq!(m.prob(s1, a_j, g), 0.08);
        assert_eq!(
            m.predicates(),
            EnvPredicates {
                deterministic: false,
                has_waiting_actions: false
            }
        );
    }

    #[test]
    fn river_degenerate_jump_lands_in_trap() {
        let m = river(0.0, 0.0).unwrap();
        let (s1, t) = (m.state_index("s1").unwrap(), m.state_index("T").unwrap());
        let a_j = m.action_index(s1, "a_j").unwrap();
        assert_eq!(m.prob(s1, a_j, t), 1.0);
    }

    #[test]
    fn river_proposition_window_is_nonempty() {
        // With eps1 = 0.08 and eps2 = 0.2 the window
        // (max{sqrt(eps1), eps2}, eps1/eps2) must be nonempty.
        let (e1, e2) = (0.08, 0.2);
        let lo = math::sqrt(e1).max(e2);
        let hi = e1 / e2;
        assert!(lo < hi, "window ({lo}, {hi}) is empty");
        assert!((lo - 0.28284271247461906).abs() < 1e-15);
        assert!((hi - 0.4).abs() < 1e-15);
    }

    #[test]
    fn grid_one_step_reachability() {
        let m = grid(2).unwrap();
        assert_eq!(m.n_states(), 4);
        let corner = m.state_index("r0c0").unwrap();
        let mut reach: Vec<usize> = (0..m.n_actions(corner))
            .map(|a| m.deterministic_successor(corner, a).unwrap())
            .collect();
        reach.sort_unstable();
        reach.dedup();
        let names: Vec<&str> = reach.iter().map(|&s| m.state_name(s)).collect();
        assert_eq!(names, vec!["r0c0", "r0c1", "r1c0"]);

        let m3 = grid(3).unwrap();
        let center = m3.state_index("r1c1").unwrap();
        let mut reach3: Vec<usize> = (0..m3.n_actions(center))
            .map(|a| m3.deterministic_successor(center, a).unwrap())
            .collect();
        reach3.sort_unstable();
        reach3.dedup();
        assert_eq!(reach3.len(), 5);
    }

    #[test]
    fn grids_are_deterministic_with_waiting() {
        for n in 1..=8 {
            let m = grid(n).unwrap();
            let p = m.predicates();
            assert!(p.deterministic, "grid({n})");
            assert!(p.has_waiting_actions, "grid({n})");
        }
    }

    #[test]
    fn random_mdp_is_a_pure_function_of_inputs() {
        let a = random_mdp(4, 2, 2, 7).unwrap();
        let b = random_mdp(4, 2, 2, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.validate().is_empty());
        let c = random_mdp(4, 2, 2, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn random_mdp_single_state_is_self_loop() {
        let m = random_mdp(1, 1, 1, 0).unwrap();
        assert_eq!(m.row(0, 0), &[1.0]);
    }

    #[test]
    fn random_mdp_rejects_bad_parameters() {
        assert!(random_mdp(3, 1, 4, 0).is_err());
        assert!(random_mdp(0, 1, 1, 0).is_err());
        assert!(river(1.5, 0.0).is_err());
    }

    #[test]
    fn goal_distribution_invariants() {
        let u = GoalDistribution::uniform(5);
        assert!(u.is_uniform());
        assert!((u.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        for seed in 0..20 {
            let p = GoalDistribution::seeded(5, seed, 1e-3);
            assert!((p.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(p.min_mass() >= 1e-3, "seed {seed}: min {}", p.min_mass());
        }
    }

    #[test]
    fn star_arms_are_absorbing_and_disjoint() {
        let m = star(3).unwrap();
        assert_eq!(m.n_states(), 4);
        let hub = m.state_index("hub").unwrap();
        for i in 0..3 {
            let arm = m.state_index(&alloc::format!("arm{i}")).unwrap();
            assert_eq!(m.prob(hub, i, arm), 1.0);
            assert_eq!(m.prob(arm, 0, arm), 1.0);
        }
    }
}
