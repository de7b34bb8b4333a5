//! Finite-horizon optimal excess-of-loss reinsurance and dividend payout for
//! a diffusion-approximated insurer.
//!
//! * [`claims`]: claim laws, retained moments `A`, `B`, and the root `lambda`.
//! * [`pde`]: penalty solver for the value function, a-priori bounds,
//!   invariant checks and a Markov-chain cross-check.
//! * [`boundaries`]: dividend and reinsurance barriers, region labels.
//! * [`policy`]: Monte-Carlo simulation of the feedback policy.
//! * [`config`], [`output`], [`cli`]: JSON configs, deterministic files, pipelines.

pub mod boundaries;
pub mod claims;
pub mod cli;
pub mod config;
pub mod error;
pub mod output;
pub mod pde;
pub mod policy;

pub use error::{Error, Result};
