//! Exact finite-dimensional state algebra for up to four qubits.
//!
//! Basis convention: qubit 0 is the leftmost label in a ket and the
//! slowest-varying bit of a basis index, so for three qubits the index of
//! `|q0 q1 q2⟩` is `4*q0 + 2*q1 + q2`. Every function that acts on a
//! subset of qubits takes the targets as an explicit list, and the first
//! listed target is the most significant bit of the local operator's index.

mod bell;
mod bloch;
mod density;
mod measure;
mod operator;
mod state;

pub use bell::{BellLabel, Pauli};
pub use bloch::BlochVector;
pub use density::{operator_partial_trace, DensityMatrix};
pub use measure::{
    born_probabilities, measure_projective, project, select_outcome, EmbeddedBasis,
    MeasurementOutcome, ProjectorSet,
};
pub use operator::{embed, is_hermitian, is_unitary, CMatrix, Observable};
pub use state::{apply_local, tensor, PureState};

use thiserror::Error;

pub type C64 = num_complex::Complex64;

/// Tolerance for algebraic identities (normalization, hermiticity, completeness).
pub const ALGEBRAIC_TOL: f64 = 1e-12;
/// Tolerance on negative eigenvalues when testing positive semidefiniteness.
pub const PSD_TOL: f64 = 1e-10;
/// Largest register any protocol here needs.
pub const MAX_QUBITS: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QError {
    #[error("register of {0} qubits exceeds the supported maximum of {MAX_QUBITS}")]
    TooManyQubits(usize),
    #[error("amplitude vector of length {0} is not 2^n for 1 <= n <= {MAX_QUBITS}")]
    BadLength(usize),
    #[error("state norm deviates from 1 by {0:e}")]
    NotNormalized(f64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid target qubits {targets:?} for a {n_qubits}-qubit register")]
    InvalidTargets { targets: Vec<usize>, n_qubits: usize },
    #[error("operator is not unitary (deviation {0:e})")]
    NotUnitary(f64),
    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("density matrix trace deviates from 1 by {0:e}")]
    BadTrace(f64),
    #[error("density matrix has eigenvalue {0:e} below zero")]
    NotPositive(f64),
    #[error("projectors do not sum to identity (deviation {0:e})")]
    IncompleteBasis(f64),
    #[error("expectation value has imaginary part {0:e}; operator or state is not Hermitian")]
    ImaginaryExpectation(f64),
    #[error("operation needs a single-qubit state, found {0} qubits")]
    NotSingleQubit(usize),
    #[error("observable eigenvalues are not all +1/-1")]
    NotPlusMinusOne,
    #[error("unknown observable label {0:?}")]
    UnknownObservable(String),
    #[error("outcome {0} has zero probability")]
    ZeroProbability(usize),
    #[error("invalid Bell label {0:?}")]
    BadBellLabel(String),
}

/// Bit of qubit `q` in basis index `index` of an `n`-qubit register.
#[inline]
pub(crate) fn qubit_bit(index: usize, q: usize, n: usize) -> usize {
    (index >> (n - 1 - q)) & 1
}

pub(crate) fn check_targets(targets: &[usize], n: usize) -> Result<(), QError> {
    let bad = || QError::InvalidTargets {
        targets: targets.to_vec(),
        n_qubits: n,
    };
    if targets.is_empty() {
        return Err(bad());
    }
    for (i, &t) in targets.iter().enumerate() {
        if t >= n || targets[..i].contains(&t) {
            return Err(bad());
        }
    }
    Ok(())
}

/// Local index formed by the bits of `targets` (first target most significant).
#[inline]
pub(crate) fn local_index(index: usize, targets: &[usize], n: usize) -> usize {
    targets
        .iter()
        .fold(0, |acc, &q| (acc << 1) | qubit_bit(index, q, n))
}

#[inline]
pub(crate) fn target_mask(targets: &[usize], n: usize) -> usize {
    targets.iter().fold(0, |m, &q| m | (1 << (n - 1 - q)))
}

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
