//! The claim registry: every analytical statement the crate implements
//! is registered here as an executable numerical check, keyed by a
//! stable claim id. A verification run is a deterministic function of
//! its configuration and seeds.

pub mod claims;
pub mod search;
pub(crate) mod support;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

pub use search::{counterexample_search, SearchConfig, SearchOutcome, SearchTarget, SearchWitness};
pub use support::{shortest_path_branch, shortest_path_distances, star_diagonal_policy};

/// Stable identifiers for the registered claims.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClaimId {
    P1,
    A1,
    A2,
    A3,
    A4,
    A5,
    A6,
    A7,
    T1_1,
    T1_2,
    T1_3,
    T2_1,
    T2_2,
    T2_3,
    P3,
    B1,
    B2,
    C1,
    C2,
    C3,
    D1,
    E1,
    F1,
    GT1,
    GT2,
    GL1,
    GP3,
}

impl ClaimId {
    pub fn parse(s: &str) -> Option<Self> {
        ALL_CLAIMS.iter().find(|c| c.id.name() == s).map(|c| c.id)
    }

    pub fn name(&self) -> &'static str {
        match self {
            ClaimId::P1 => "P1",
            ClaimId::A1 => "A1",
            ClaimId::A2 => "A2",
            ClaimId::A3 => "A3",
            ClaimId::A4 => "A4",
            ClaimId::A5 => "A5",
            ClaimId::A6 => "A6",
            ClaimId::A7 => "A7",
            ClaimId::T1_1 => "T1.1",
            ClaimId::T1_2 => "T1.2",
            ClaimId::T1_3 => "T1.3",
            ClaimId::T2_1 => "T2.1",
            ClaimId::T2_2 => "T2.2",
            ClaimId::T2_3 => "T2.3",
            ClaimId::P3 => "P3",
            ClaimId::B1 => "B1",
            ClaimId::B2 => "B2",
            ClaimId::C1 => "C1",
            ClaimId::C2 => "C2",
            ClaimId::C3 => "C3",
            ClaimId::D1 => "D1",
            ClaimId::E1 => "E1",
            ClaimId::F1 => "F1",
            ClaimId::GT1 => "G.T1",
            ClaimId::GT2 => "G.T2",
            ClaimId::GL1 => "G.L1",
            ClaimId::GP3 => "G.P3",
        }
    }
}

impl fmt::Display for ClaimId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClaimStatus {
    Pass,
    Fail,
    /// Only a certified bound (not the exact quantity) was available.
    BoundChecked,
    /// Hypotheses failed on every instance; nothing was checked.
    Skipped,
}

impl ClaimStatus {
    pub fn name(&self) -> &'static str {
        match self {
            ClaimStatus::Pass => "pass",
            ClaimStatus::Fail => "fail",
            ClaimStatus::BoundChecked => "bound-checked",
            ClaimStatus::Skipped => "skipped",
        }
    }
}

/// One executed check: the worst comparison of a claim on one seed.
#[derive(Debug, Clone)]
pub struct ClaimCheck {
    pub claim: ClaimId,
    /// Descriptor of the tightest instance encountered.
    pub instance: String,
    pub seed: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    pub status: ClaimStatus,
    pub detail: String,
}

/// Registry row: the claim and a self-contained statement of what it
/// checks.
#[derive(Debug, Clone, Copy)]
pub struct ClaimInfo {
    pub id: ClaimId,
    pub statement: &'static str,
}

/// Every registered claim, in canonical order.
pub const ALL_CLAIMS: &[ClaimInfo] = &[
    ClaimInfo { id: ClaimId::P1, statement: "the three goal-reaching formulations induce different optimal policies on the river crossing" },
    ClaimInfo { id: ClaimId::A1, statement: "the persistent value approaches the long-run target occupancy as the discount approaches one" },
    ClaimInfo { id: ClaimId::A2, statement: "the persistent value equals the geometric mixture of exact-timing values" },
    ClaimInfo { id: ClaimId::A3, statement: "near-undiscounted windowed values expand as one minus the scaled shortest-path length" },
    ClaimInfo { id: ClaimId::A4, statement: "the one-step specializations of all formulations share optimal action sets" },
    ClaimInfo { id: ClaimId::A5, statement: "stationary persistent values factor through unbounded-window first-visit values" },
    ClaimInfo { id: ClaimId::A6, statement: "shortest-path policies are optimal for persistent and windowed objectives in deterministic environments" },
    ClaimInfo { id: ClaimId::A7, statement: "with waiting actions, undiscounted windowed optima equal exact-timing optima" },
    ClaimInfo { id: ClaimId::T1_1, statement: "test-time value decomposes exactly as goal-sensitivity plus 1/N for persistent and exact-timing objectives" },
    ClaimInfo { id: ClaimId::T1_2, statement: "value dominates N/(N-1) times goal-sensitivity for windowed and non-negative-reward objectives, with equality on disjoint-reaching instances" },
    ClaimInfo { id: ClaimId::T1_3, statement: "a maximally in-control policy can be strictly suboptimal for the windowed objective, with regret bounded by the controllability shortfall" },
    ClaimInfo { id: ClaimId::T2_1, statement: "goal-behavior information is lower-bounded through the error-probability function for every policy" },
    ClaimInfo { id: ClaimId::T2_2, statement: "goal-behavior information is upper-bounded through the reverse error-probability function for consistent policies" },
    ClaimInfo { id: ClaimId::T2_3, statement: "first-visit-vector information dominates twice the squared windowed sensitivity" },
    ClaimInfo { id: ClaimId::P3, statement: "the skill-MI versus goal-MI gap is controlled by the uniformity of the downstream skill distribution" },
    ClaimInfo { id: ClaimId::B1, statement: "one-step controllability equals the horizon-one exact-timing controllability" },
    ClaimInfo { id: ClaimId::B2, statement: "empowerment equals log(1 + N times controllability) in deterministic environments" },
    ClaimInfo { id: ClaimId::C1, statement: "goal-state information never exceeds empowerment, strictly on the two-armed branching example" },
    ClaimInfo { id: ClaimId::C2, statement: "best goal-state information on deterministic environments sits between the Fano-style and reachable-set bounds" },
    ClaimInfo { id: ClaimId::C3, statement: "information about the goal can only grow along the trajectory-to-state processing chain" },
    ClaimInfo { id: ClaimId::D1, statement: "the conditional upper bound on first-visit information holds whenever its three assumptions hold" },
    ClaimInfo { id: ClaimId::E1, statement: "the argmax goal-to-skill map always yields a consistent downstream policy" },
    ClaimInfo { id: ClaimId::F1, statement: "identity decoding of the commanded goal is Bayes-optimal exactly for consistent policies" },
    ClaimInfo { id: ClaimId::GT1, statement: "with non-uniform goal weights the value sits between the extreme masses plus sensitivity" },
    ClaimInfo { id: ClaimId::GT2, statement: "the information brackets generalize with the goal entropy replacing log N under strong consistency" },
    ClaimInfo { id: ClaimId::GL1, statement: "identity decoding stays Bayes-optimal under strong consistency with non-uniform goals" },
    ClaimInfo { id: ClaimId::GP3, statement: "the skill-MI gap bound is unchanged by non-uniform goal distributions" },
];

/// Suite-wide knobs: instance sizes and the enumeration cap.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub sizes: Vec<usize>,
    pub cap: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            sizes: vec![3, 4, 5],
            cap: 1_000_000,
        }
    }
}

/// Executes one claim for one seed.
pub fn run_claim(id: ClaimId, cfg: &SuiteConfig, seed: u64) -> ClaimCheck {
    match id {
        ClaimId::P1 => claims::check_p1(cfg, seed),
        ClaimId::A1 => claims::check_a1(cfg, seed),
        ClaimId::A2 => claims::check_a2(cfg, seed),
        ClaimId::A3 => claims::check_a3(cfg, seed),
        ClaimId::A4 => claims::check_a4(cfg, seed),
        ClaimId::A5 => claims::check_a5(cfg, seed),
        ClaimId::A6 => claims::check_a6(cfg, seed),
        ClaimId::A7 => claims::check_a7(cfg, seed),
        ClaimId::T1_1 => claims::check_t1_1(cfg, seed),
        ClaimId::T1_2 => claims::check_t1_2(cfg, seed),
        ClaimId::T1_3 => claims::check_t1_3(cfg, seed),
        ClaimId::T2_1 => claims::check_t2_1(cfg, seed),
        ClaimId::T2_2 => claims::check_t2_2(cfg, seed),
        ClaimId::T2_3 => claims::check_t2_3(cfg, seed),
        ClaimId::P3 => claims::check_p3(cfg, seed),
        ClaimId::B1 => claims::check_b1(cfg, seed),
        ClaimId::B2 => claims::check_b2(cfg, seed),
        ClaimId::C1 => claims::check_c1(cfg, seed),
        ClaimId::C2 => claims::check_c2(cfg, seed),
        ClaimId::C3 => claims::check_c3(cfg, seed),
        ClaimId::D1 => claims::check_d1(cfg, seed),
        ClaimId::E1 => claims::check_e1(cfg, seed),
        ClaimId::F1 => claims::check_f1(cfg, seed),
        ClaimId::GT1 => claims::check_g_t1(cfg, seed),
        ClaimId::GT2 => claims::check_g_t2(cfg, seed),
        ClaimId::GL1 => claims::check_g_l1(cfg, seed),
        ClaimId::GP3 => claims::check_g_p3(cfg, seed),
    }
}

/// An executed suite: one check per (claim, seed), in registry order.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub checks: Vec<ClaimCheck>,
}

impl VerificationReport {
    pub fn counts(&self) -> (usize, usize, usize, usize) {
        let mut c = (0, 0, 0, 0);
        for check in &self.checks {
            match check.status {
                ClaimStatus::Pass => c.0 += 1,
                ClaimStatus::Fail => c.1 += 1,
                ClaimStatus::BoundChecked => c.2 += 1,
                ClaimStatus::Skipped => c.3 += 1,
            }
        }
        c
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != ClaimStatus::Fail)
    }

    pub fn summary(&self) -> String {
        let (pass, fail, bound, skipped) = self.counts();
        format!(
            "{} checks: {pass} pass, {fail} fail, {bound} bound-checked, {skipped} skipped",
            self.checks.len()
        )
    }
}

/// Runs `claims × seeds` (all claims when the filter is empty), in
/// deterministic registry order.
pub fn random_suite(
    seeds: impl Iterator<Item = u64> + Clone,
    cfg: &SuiteConfig,
    filter: Option<&[ClaimId]>,
) -> VerificationReport {
    let mut checks = Vec::new();
    for info in ALL_CLAIMS {
        if let Some(wanted) = filter {
            if !wanted.contains(&info.id) {
                continue;
            }
        }
        for seed in seeds.clone() {
            checks.push(run_claim(info.id, cfg, seed));
        }
    }
    VerificationReport { checks }
}
