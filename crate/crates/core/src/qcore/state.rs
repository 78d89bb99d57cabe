use nalgebra::DVector;

use super::operator::{embed, qubits_of_dim, unitarity_defect, CMatrix};
use super::{c, QError, ALGEBRAIC_TOL, C64, MAX_QUBITS};
use super::DensityMatrix;

/// Normalized pure state of 1 to 4 qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl PureState {
    /// Wraps `amps`, which must already be normalized to within 1e-12.
    pub fn new(amps: Vec<C64>) -> Result<Self, QError> {
        let n_qubits = qubits_of_dim(amps.len())?;
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > ALGEBRAIC_TOL {
            return Err(QError::NotNormalized(norm - 1.0));
        }
        Ok(Self { n_qubits, amps })
    }

    /// Rescales `amps` to unit norm. Fails on the zero vector.
    pub fn normalized(mut amps: Vec<C64>) -> Result<Self, QError> {
        let n_qubits = qubits_of_dim(amps.len())?;
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if norm <= f64::MIN_POSITIVE {
            return Err(QError::NotNormalized(-1.0));
        }
        let s = 1.0 / norm.sqrt();
        amps.iter_mut().for_each(|a| *a *= s);
        Ok(Self { n_qubits, amps })
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self, QError> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(QError::TooManyQubits(n_qubits));
        }
        let dim = 1 << n_qubits;
        if index >= dim {
            return Err(QError::BadLength(index));
        }
        let mut amps = vec![c(0.0, 0.0); dim];
        amps[index] = c(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`.
    pub fn from_bloch_angles(theta: f64, phi: f64) -> Self {
        let (s, co) = (theta / 2.0).sin_cos();
        Self {
            n_qubits: 1,
            amps: vec![c(co, 0.0), C64::from_polar(s, phi)],
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<C64, QError> {
        if self.dim() != other.dim() {
            return Err(QError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨self|other⟩|²`; the phase-insensitive comparison used throughout.
    pub fn overlap(&self, other: &Self) -> Result<f64, QError> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    pub(crate) fn as_vector(&self) -> DVector<C64> {
        DVector::from_column_slice(&self.amps)
    }

    pub(crate) fn from_raw(n_qubits: usize, amps: Vec<C64>) -> Self {
        Self { n_qubits, amps }
    }

    /// Contracts `known` against qubits `targets` and renormalizes what is left:
    /// the state of the remaining qubits, in ascending qubit order, given that
    /// `targets` were found in `known`.
    pub fn factor_out(&self, targets: &[usize], known: &PureState) -> Result<PureState, QError> {
        let n = self.n_qubits;
        super::check_targets(targets, n)?;
        if known.n_qubits != targets.len() {
            return Err(QError::DimensionMismatch {
                expected: targets.len(),
                found: known.n_qubits,
            });
        }
        if targets.len() == n {
            return Err(QError::InvalidTargets {
                targets: targets.to_vec(),
                n_qubits: n,
            });
        }
        let rest: Vec<usize> = (0..n).filter(|q| !targets.contains(q)).collect();
        let mut out = vec![c(0.0, 0.0); 1 << rest.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let t = super::local_index(i, targets, n);
            let r = super::local_index(i, &rest, n);
            out[r] += known.amps[t].conj() * a;
        }
        PureState::normalized(out)
    }
}

/// Kronecker product `a ⊗ b`; `a` occupies the leading qubits.
pub fn tensor(a: &PureState, b: &PureState) -> Result<PureState, QError> {
    let n = a.n_qubits + b.n_qubits;
    if n > MAX_QUBITS {
        return Err(QError::TooManyQubits(n));
    }
    let amps = a
        .amps
        .iter()
        .flat_map(|x| b.amps.iter().map(move |y| x * y))
        .collect();
    Ok(PureState { n_qubits: n, amps })
}

/// Applies a unitary `op` to `targets`, identity on the other qubits.
pub fn apply_local(state: &PureState, op: &CMatrix, targets: &[usize]) -> Result<PureState, QError> {
    let full = embed(op, targets, state.n_qubits)?;
    let defect = unitarity_defect(op);
    if defect >= ALGEBRAIC_TOL {
        return Err(QError::NotUnitary(defect));
    }
    let v = full * state.as_vector();
    PureState::new(v.iter().copied().collect())
}
