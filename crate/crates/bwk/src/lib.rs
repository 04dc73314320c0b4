//! Bandits with knapsacks.
//!
//! A learner repeatedly pulls one of `m` arms. Each pull draws an outcome
//! vector (one reward plus one consumption amount per resource, all in
//! [0, 1]) from that arm's distribution. The episode ends as soon as any
//! resource's cumulative consumption exceeds its budget, or after the
//! horizon `T` runs out; reward is collected for every completed round.
//!
//! The crate provides:
//!
//! - the episode model and its standard reductions (time as a resource,
//!   uniform budgets, an explicit null arm) in [`model`];
//! - the estimate-dependent confidence radius and interval machinery in
//!   [`confidence`];
//! - the fractional-relaxation benchmark LP, its value function, and the
//!   construction of near-feasible optimal mixtures in [`lp`];
//! - multiplicative weights over resources in [`hedge`];
//! - the primal-dual policy, its deterministic variant, the phased
//!   candidate-distribution policy, and baselines in [`policies`];
//! - dynamic-pricing, procurement, and synthetic benchmark environment
//!   builders in [`envs`];
//! - price meshes and discretization-error accounting in [`discretization`];
//! - a seeded, parallel experiment runner with CSV/JSON reporting in
//!   [`harness`], and the acceptance battery behind `bwk suite` in
//!   [`suite`].

pub mod confidence;
pub mod discretization;
pub mod envs;
pub mod error;
pub mod harness;
pub mod hedge;
pub mod lp;
pub mod model;
pub mod policies;
pub mod rng;
pub mod suite;

pub use error::{Error, Result};
