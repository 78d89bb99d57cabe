//! Protocol drivers: Bell test, active and passive teleportation, and
//! entanglement swapping under any order of the spacelike measurements.
//!
//! Qubit layouts (qubit 0 leftmost):
//! * Bell test: `A, B` in `|B_xy⟩`.
//! * Teleportation: `A, B, C` in `|B₁₁⟩_AB ⊗ |ψ_in⟩_C`; Alice measures `(A, C)`.
//! * Swapping: `A, a, B, b` in `|B₀₁⟩_Aa ⊗ |B₀₁⟩_Bb`; Diana measures `(a, b)`.

mod bell;
mod experiment;
mod plan;
mod record;
mod swap;
mod teleport;

pub use bell::{bell_trial, BellTest};
pub use experiment::{
    chsh_from_table, max_ordering_spread, ordering_equivalence_table, Experiment, JointDistribution,
    JointTable, OrderingScenario, OutcomeKind, Party, PartyOutcome, PartySetting, TableEntry,
};
pub use plan::{MeasurementPlan, Schedule, Setting};
pub use record::{event_id, Agent, AgentResult, Outcome, ProtocolKind, TrialRecord};
pub use swap::{
    delayed_choice_chsh, delayed_choice_matrix, double_pair_state, moving_observer_reduced_state,
    swap_chsh_exact, swap_run, ChshChoice, DianaBasis, DianaOutcome, EntanglementSwap,
};
pub use teleport::{
    conditional_bob_expectations, exact_conditional_bloch, teleport_active, teleport_passive_trial,
    teleportation_state, ActiveTeleportation, ConditionalExpectation, InStateSpec, PassiveTeleportation,
};

use thiserror::Error;

use crate::qcore::QError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error(transparent)]
    Quantum(#[from] QError),
    #[error("invalid measurement plan: {0}")]
    InvalidPlan(String),
    #[error("invalid ordering: {0}")]
    InvalidOrdering(String),
    #[error("invalid input state: {0}")]
    InvalidInState(String),
    #[error("no records fall in bin {0}")]
    EmptyBin(String),
    #[error("measurement history {0} has zero probability")]
    ZeroProbability(String),
}
