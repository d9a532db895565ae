//! Counterexample search over small instances.
//!
//! Two targets: environments where the three formulations disagree on
//! the optimal policy, and windowed instances where the maximally
//! in-control policy is strictly suboptimal. Candidates stream
//! deterministically from the seed (a structured river family first,
//! then random kernels), so a search is reproducible and its budget is
//! a candidate count rather than wall-clock time.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::mdp::{self, FiniteMdp, GoalDistribution};
use crate::rng::{derive_seed, SplitMix64};
use crate::sensitivity::{goal_sensitivity, search_max_incontrol, SensitivityError};
use crate::values::{eval_j_branch, solve_optimal, test_time_performance, Formulation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchTarget {
    /// The per-formulation optimal branches are pairwise non-exchangeable
    /// at some (start, goal).
    FormulationDisagreement,
    /// The sensitivity maximizer is strictly suboptimal while strictly
    /// more in control than the canonical optimal policy.
    OwControlVsOptimal,
}

impl SearchTarget {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "formulation-disagreement" => Some(Self::FormulationDisagreement),
            "ow-control-vs-optimal" => Some(Self::OwControlVsOptimal),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::FormulationDisagreement => "formulation-disagreement",
            Self::OwControlVsOptimal => "ow-control-vs-optimal",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    /// Maximum number of candidate instances to examine.
    pub budget: usize,
    /// State-count range for random candidates.
    pub n_states: (usize, usize),
    pub n_actions: usize,
    pub ks: Vec<usize>,
    pub gammas: Vec<f64>,
    /// Seed the stream with the structured river family first.
    pub include_river_family: bool,
    pub cap: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            budget: 2000,
            n_states: (3, 5),
            n_actions: 2,
            ks: vec![2, 3],
            gammas: vec![0.35, 0.8, 0.9, 1.0],
            include_river_family: true,
            cap: 1_000_000,
        }
    }
}

/// A found instance with the margins that certify it. Margins are all
/// strictly positive; `replay` recomputes them from scratch.
#[derive(Debug, Clone)]
pub struct SearchWitness {
    pub mdp: FiniteMdp,
    pub target: SearchTarget,
    pub s0: usize,
    pub goal: usize,
    pub k: usize,
    pub gamma: f64,
    /// Named strict margins, all greater than `margin_floor`.
    pub margins: Vec<(String, f64)>,
    pub margin_floor: f64,
    pub candidates_examined: usize,
}

impl SearchWitness {
    /// Recomputes the certifying margins; true when all still clear the
    /// floor.
    pub fn replay(&self, cap: usize) -> Result<bool, SensitivityError> {
        let recomputed = match self.target {
            SearchTarget::FormulationDisagreement => {
                disagreement_margins(&self.mdp, self.s0, self.goal, self.k, self.gamma)?
            }
            SearchTarget::OwControlVsOptimal => {
                control_gap_margins(&self.mdp, self.s0, self.k, self.gamma, cap)?
            }
        };
        Ok(recomputed.iter().all(|&(_, m)| m > self.margin_floor))
    }
}

#[derive(Debug, Clone)]
pub enum SearchOutcome {
    Witness(SearchWitness),
    Exhausted { candidates: usize },
}

/// Margins certifying that no formulation's optimum solves the others at
/// `(s0, goal)`: for each ordered pair, how far one optimal branch falls
/// below the other formulation's optimum.
fn disagreement_margins(
    mdp: &FiniteMdp,
    s0: usize,
    goal: usize,
    k: usize,
    gamma: f64,
) -> Result<Vec<(String, f64)>, SensitivityError> {
    let forms = [
        (
            "Pe",
            Formulation::Pe {
                gamma: gamma.min(0.999),
            },
        ),
        ("ET", Formulation::Et { k }),
        ("OW", Formulation::Ow { k, gamma }),
    ];
    let solved: Vec<_> = forms
        .iter()
        .map(|(_, f)| solve_optimal(mdp, f, goal, 1000))
        .collect::<Result<_, _>>()?;
    let mut margins = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            if i == j {
                continue;
            }
            // Value of formulation j's optimum evaluated under i's task.
            let cross = eval_j_branch(mdp, &forms[i].1, &solved[j].branch, s0, goal)?.value;
            let gap = solved[i].values[s0] - cross;
            margins.push((format!("{} optimum under {}", forms[j].0, forms[i].0), gap));
        }
    }
    // Keep, per unordered pair, the larger of the two directed gaps: the
    // pair disagrees when either direction is strictly positive.
    let pairs = [(0usize, 1usize), (0, 2), (1, 2)];
    let named = ["Pe/ET", "Pe/OW", "ET/OW"];
    let mut out = Vec::new();
    for (idx, &(i, j)) in pairs.iter().enumerate() {
        let a = margins
            .iter()
            .find(|(n, _)| *n == format!("{} optimum under {}", forms[j].0, forms[i].0))
            .unwrap()
            .1;
        let b = margins
            .iter()
            .find(|(n, _)| *n == format!("{} optimum under {}", forms[i].0, forms[j].0))
            .unwrap()
            .1;
        out.push((format!("{} disagreement", named[idx]), a.max(b)));
    }
    Ok(out)
}

/// Margins certifying the control-versus-value gap on a windowed
/// instance: the optimality shortfall of the sensitivity maximizer and
/// its sensitivity advantage over the canonical optimal policy.
fn control_gap_margins(
    mdp: &FiniteMdp,
    s0: usize,
    k: usize,
    gamma: f64,
    cap: usize,
) -> Result<Vec<(String, f64)>, SensitivityError> {
    let n = mdp.n_states();
    let u = GoalDistribution::uniform(n);
    let form = Formulation::Ow { k, gamma };
    let (incontrol, c_star, exact) = search_max_incontrol(mdp, &form, s0, &u, cap)?;
    if !exact {
        return Ok(vec![(
            "enumeration incomplete".to_string(),
            f64::NEG_INFINITY,
        )]);
    }
    let optimal = crate::values::optimal_policy(mdp, &form, 1000)?;
    let j_incontrol = test_time_performance(mdp, &form, &incontrol, s0, &u)?;
    let j_optimal = test_time_performance(mdp, &form, &optimal, s0, &u)?;
    let c_optimal = goal_sensitivity(mdp, &form, &optimal, s0, &u)?.c_value;
    Ok(vec![
        (
            "optimality shortfall of the sensitivity maximizer".to_string(),
            j_optimal - j_incontrol,
        ),
        (
            "sensitivity advantage over the optimal policy".to_string(),
            c_star - c_optimal,
        ),
    ])
}

/// Streams candidate MDPs: the river family first (when enabled), then
/// seeded random kernels with sizes cycling through the configured
/// range.
fn candidate(config: &SearchConfig, seed: u64, index: usize) -> (FiniteMdp, String) {
    let river_block = if config.include_river_family { 8 } else { 0 };
    if index < river_block {
        let mut rng = SplitMix64::new(derive_seed(&[seed, index as u64, 0x5e]));
        let (e1, e2) = if index == 0 {
            (0.08, 0.2)
        } else {
            let e2 = 0.1 + 0.4 * rng.next_f64();
            // Keep the window max{√e1, e2} < e1/e2 plausibly nonempty.
            let e1 = (e2 * e2) * (1.0 + rng.next_f64());
            (e1.min(1.0), e2)
        };
        (
            mdp::river(e1, e2).expect("valid"),
            format!("river({e1:.4},{e2:.4})"),
        )
    } else {
        let span = config.n_states.1.saturating_sub(config.n_states.0) + 1;
        let n = config.n_states.0 + (index - river_block) % span;
        let s = derive_seed(&[seed, index as u64, 0x5f]);
        let m = mdp::random_mdp(n, config.n_actions, 2.min(n), s).expect("valid sizes");
        (m, format!("random({n},{},2) seed={s}", config.n_actions))
    }
}

/// Runs the search; deterministic in `(config, seed)`.
pub fn counterexample_search(
    target: SearchTarget,
    config: &SearchConfig,
    seed: u64,
) -> Result<SearchOutcome, SensitivityError> {
    let floor = match target {
        SearchTarget::FormulationDisagreement => 1e-9,
        SearchTarget::OwControlVsOptimal => 1e-6,
    };
    let mut examined = 0usize;
    for index in 0..config.budget {
        let (m, desc) = candidate(config, seed, index);
        examined += 1;
        let n = m.n_states();
        if n < 2 {
            continue;
        }
        match target {
            SearchTarget::FormulationDisagreement => {
                for &k in &config.ks {
                    for &gamma in config.gammas.iter().filter(|&&g| g < 1.0) {
                        for s0 in 0..n {
                            for goal in 0..n {
                                if s0 == goal {
                                    continue;
                                }
                                let margins = disagreement_margins(&m, s0, goal, k, gamma)?;
                                if margins.iter().all(|&(_, g)| g > floor) {
                                    return Ok(SearchOutcome::Witness(SearchWitness {
                                        mdp: m,
                                        target,
                                        s0,
                                        goal,
                                        k,
                                        gamma,
                                        margins,
                                        margin_floor: floor,
                                        candidates_examined: examined,
                                    }));
                                }
                            }
                        }
                    }
                }
            }
            SearchTarget::OwControlVsOptimal => {
                for &k in &config.ks {
                    for &gamma in &config.gammas {
                        let margins = control_gap_margins(&m, 0, k, gamma, config.cap)?;
                        if margins.iter().all(|&(_, g)| g > floor) {
                            let _ = &desc;
                            return Ok(SearchOutcome::Witness(SearchWitness {
                                mdp: m,
                                target,
                                s0: 0,
                                goal: 0,
                                k,
                                gamma,
                                margins,
                                margin_floor: floor,
                                candidates_examined: examined,
                            }));
                        }
                    }
                }
            }
        }
    }
    Ok(SearchOutcome::Exhausted {
        candidates: examined,
    })
}
