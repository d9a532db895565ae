//! Exact, desk-scale analysis of goal-conditioned control in finite MDPs.
//!
//! Everything in this crate is computed exactly (linear solves, backward
//! induction, full trajectory enumeration) rather than estimated from
//! samples, so tolerances in the claim suite can be pinned at or below
//! 1e-10. The crate is `no_std`-compatible (`alloc` required); IO, file
//! formats, and the CLI live in the companion `gclab-cli` crate.
//!
//! Module map:
//!
//! - [`mdp`] — finite MDPs, validation, and environment constructors
//! - [`policy`] — goal-/skill-conditioned policies, mixtures, enumeration
//! - [`values`] — the Pe/ET/OW goal-reaching values and their solvers
//! - [`sensitivity`] — goal-sensitivity, consistency, controllability,
//!   and channel-capacity empowerment
//! - [`info`] — exact discrete information measures and the Fano-style
//!   bound functions
//! - [`misl`] — skill-behavior MI objectives and tabular pretraining
//! - [`harness`] — the claim registry, counterexample search, and the
//!   verification suite

#![cfg_attr(not(feature = "std"), no_std)]
// Index loops deliberately mirror the summation indices of the math
// they implement; recursive enumerators carry their full context.
#![allow(clippy::needless_range_loop, clippy::too_many_arguments)]

extern crate alloc;

pub mod harness;
pub mod info;
pub mod linalg;
pub mod math;
pub mod mdp;
pub mod misl;
pub mod policy;
pub mod rng;
pub mod sensitivity;
pub mod values;

pub use mdp::{FiniteMdp, GoalDistribution};
pub use policy::{DeterministicBranch, GoalConditionedPolicy, GoalToSkillMap};
pub use values::Formulation;
