//! Quantization of discrete memoryless channels: reduce (degrade) or enlarge
//! (upgrade) the output alphabet to at most `L` letters while tracking the
//! exact mutual-information penalty.
//!
//! The crate is organized around a validated [`Channel`] (input distribution
//! plus row-stochastic transition matrix) and its [`JointView`] (per-letter
//! output mass and posterior vector), the coordinates every algorithm works
//! in:
//!
//! * [`degrade`] — greedy-merge for arbitrary input alphabets, a
//!   cyclo-symmetry-preserving variant, and optimal binary degrading by
//!   dynamic programming. All emit a deterministic intermediate map and an
//!   exact ΔI ledger.
//! * [`upgrade`] — optimal binary upgrading (the optimal enlarged channel
//!   selects a subset of the source posteriors), greedy-split, a
//!   symmetry-preserving variant, and a Hölder-defect lower bound on the
//!   upgrading gain.
//! * [`bounds`] — closed-form envelope constants ν, μ, κ and the critical
//!   sphere-packing radius, with per-run and per-step envelope evaluators.
//! * [`functionals`] — the scalar building blocks: η, entropy, binary KL,
//!   the d₁/d₂/d distances and exact per-merge / per-split ΔI.
//! * [`oracle`] — brute-force reference implementations and seeded instance
//!   generators, used exclusively for verification.
//! * [`polar`] — a construction harness that sandwiches the mutual
//!   information of polar synthetic channels between a degraded and an
//!   upgraded chain.
//!
//! All information quantities are in nats. The crate is `no_std` (with
//! `alloc`); IO, file formats and the CLI live in the companion `channelq`
//! crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod bounds;
pub mod channel;
pub mod degrade;
pub mod functionals;
mod math;
pub mod oracle;
pub mod polar;
#[cfg(test)]
pub(crate) mod testutil;
pub mod upgrade;

pub use channel::{build_channel, Channel, ChannelError, IntermediateChannel, JointView};
pub use degrade::{
    detect_cyclo_symmetry, greedy_merge, greedy_merge_cyclo, optimal_degrade_binary,
    CycloPartition, DegradeError, DegradeResult, MergeStep,
};
pub use upgrade::{
    greedy_split, greedy_split_symmetric, optimal_phi_binary, optimal_upgrade_binary,
    upgrade_lower_bound, verify_upgraded, SplitStep, UpgradeError, UpgradeResult,
};
