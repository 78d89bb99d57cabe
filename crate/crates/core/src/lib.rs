//! Desk-scale simulator for teleportation, entanglement swapping and Bell
//! tests across long spacelike baselines.
//!
//! * [`qcore`]: exact state algebra on up to four qubits.
//! * [`protocols`]: Bell test, active/passive teleportation and entanglement
//!   swapping drivers, with exact joint tables for any measurement order.
//! * [`lhv`]: the classically correlated pair model, its 2/3 fidelity bound
//!   and the coincidence-window bias.
//! * [`spacetime`]: interval classification, boosted orderings, radar time and
//!   causal-independence certification.
//! * [`astro`]: orbit clock rates, Doppler shifts and Unruh temperatures for
//!   an ISS to Lunar Gateway link.
//! * [`harness`]: seeded streams, estimators, JSON-lines logs and the run driver.

// `!(x >= 0.0)` rejects NaN together with negatives
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod astro;
pub mod harness;
pub mod lhv;
pub mod parallel;
pub mod protocols;
pub mod qcore;
pub mod spacetime;
