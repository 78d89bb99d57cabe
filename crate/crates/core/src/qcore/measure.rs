use super::operator::{embed, hermiticity_defect, CMatrix};
use super::{BellLabel, DensityMatrix, Observable, PureState, QError, ALGEBRAIC_TOL, C64};

/// Complete set of orthogonal projectors on `k` qubits, one label per outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectorSet {
    n_qubits: usize,
    projectors: Vec<CMatrix>,
    labels: Vec<String>,
}

impl ProjectorSet {
    pub fn new(projectors: Vec<CMatrix>, labels: Vec<String>) -> Result<Self, QError> {
        let first = projectors.first().ok_or(QError::IncompleteBasis(1.0))?;
        let d = first.nrows();
        let n_qubits = super::operator::qubits_of_dim(d)?;
        if labels.len() != projectors.len() {
            return Err(QError::DimensionMismatch {
                expected: projectors.len(),
                found: labels.len(),
            });
        }
        let mut sum = CMatrix::zeros(d, d);
        for p in &projectors {
            if p.nrows() != d || p.ncols() != d {
                return Err(QError::DimensionMismatch {
                    expected: d,
                    found: p.nrows(),
                });
            }
            let h = hermiticity_defect(p);
            if h >= ALGEBRAIC_TOL {
                return Err(QError::NotHermitian(h));
            }
            let idem = (p * p - p).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if idem >= ALGEBRAIC_TOL {
                return Err(QError::IncompleteBasis(idem));
            }
            sum += p;
        }
        let defect = (sum - CMatrix::identity(d, d))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if defect >= ALGEBRAIC_TOL {
            return Err(QError::IncompleteBasis(defect));
        }
        Ok(Self {
            n_qubits,
            projectors,
            labels,
        })
    }

    /// Rank-one projectors onto the given (orthonormal) states.
    pub fn from_states(states: &[PureState], labels: Vec<String>) -> Result<Self, QError> {
        let ps = states
            .iter()
            .map(|s| DensityMatrix::from_pure(s).matrix().clone())
            .collect();
        Self::new(ps, labels)
    }

    /// Computational basis of `k` qubits, labelled by bit strings.
    pub fn computational(k: usize) -> Result<Self, QError> {
        let states = (0..1usize << k)
            .map(|i| PureState::basis(k, i))
            .collect::<Result<Vec<_>, _>>()?;
        let labels = (0..1usize << k).map(|i| format!("{i:0k$b}")).collect();
        Self::from_states(&states, labels)
    }

    /// The four Bell projectors in label order, labelled `B00`..`B11`.
    pub fn bell() -> Self {
        let states: Vec<_> = BellLabel::ALL.iter().map(|l| l.state()).collect();
        let labels = BellLabel::ALL.iter().map(|l| l.to_string()).collect();
        Self::from_states(&states, labels).expect("Bell basis is complete")
    }

    /// Eigenprojectors `(I ± O)/2` of a ±1-valued observable; outcome 0 is `+1`.
    pub fn from_observable(obs: &Observable) -> Result<Self, QError> {
        if !obs.is_plus_minus_one() {
            return Err(QError::NotPlusMinusOne);
        }
        let d = obs.matrix().nrows();
        let id = CMatrix::identity(d, d);
        let half = C64::new(0.5, 0.0);
        let plus = (&id + obs.matrix()) * half;
        let minus = (&id - obs.matrix()) * half;
        Self::new(vec![plus, minus], vec!["+1".into(), "-1".into()])
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    /// Lifts the set onto `targets` of an `n`-qubit register.
    pub fn embed(&self, targets: &[usize], n: usize) -> Result<EmbeddedBasis, QError> {
        if targets.len() != self.n_qubits {
            return Err(QError::DimensionMismatch {
                expected: self.n_qubits,
                found: targets.len(),
            });
        }
        let full = self
            .projectors
            .iter()
            .map(|p| embed(p, targets, n))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(EmbeddedBasis {
            n_qubits: n,
            targets: targets.to_vec(),
            full,
            labels: self.labels.clone(),
        })
    }
}

/// A projector set already lifted to the full register.
#[derive(Clone, Debug)]
pub struct EmbeddedBasis {
    n_qubits: usize,
    targets: Vec<usize>,
    full: Vec<CMatrix>,
    labels: Vec<String>,
}

impl EmbeddedBasis {
    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.full.len()
    }

    pub fn is_empty(&self) -> bool {
        self.full.is_empty()
    }

    fn check(&self, s: &PureState) -> Result<(), QError> {
        if s.n_qubits() != self.n_qubits {
            return Err(QError::DimensionMismatch {
                expected: self.n_qubits,
                found: s.n_qubits(),
            });
        }
        Ok(())
    }

    fn projected(&self, s: &PureState, k: usize) -> Vec<C64> {
        (&self.full[k] * s.as_vector()).iter().copied().collect()
    }

    pub fn probabilities(&self, s: &PureState) -> Result<Vec<f64>, QError> {
        self.check(s)?;
        Ok((0..self.full.len())
            .map(|k| self.projected(s, k).iter().map(|a| a.norm_sqr()).sum())
            .collect())
    }

    /// Renormalized post-measurement state for outcome `k` and its Born weight,
    /// or `None` when the outcome is impossible.
    pub fn project(&self, s: &PureState, k: usize) -> Result<Option<(PureState, f64)>, QError> {
        self.check(s)?;
        let v = self.projected(s, k);
        let p: f64 = v.iter().map(|a| a.norm_sqr()).sum();
        if p <= 0.0 {
            return Ok(None);
        }
        let scale = 1.0 / p.sqrt();
        let amps = v.into_iter().map(|a| a * scale).collect();
        Ok(Some((PureState::from_raw(self.n_qubits, amps), p)))
    }

    pub fn sample(&self, s: &PureState, draw: f64) -> Result<MeasurementOutcome, QError> {
        let probs = self.probabilities(s)?;
        let k = select_outcome(&probs, draw);
        let (post_state, probability) = self.project(s, k)?.ok_or(QError::ZeroProbability(k))?;
        Ok(MeasurementOutcome {
            outcome: k,
            post_state,
            probability,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementOutcome {
    pub outcome: usize,
    pub post_state: PureState,
    pub probability: f64,
}

/// Inverse-CDF choice of an outcome index for `draw ∈ [0, 1)`.
///
/// Zero-weight outcomes are never chosen, even if rounding leaves the
/// cumulative sum slightly below `draw`.
pub fn select_outcome(probs: &[f64], draw: f64) -> usize {
    let mut cum = 0.0;
    let mut last = 0;
    for (k, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        cum += p;
        last = k;
        if draw < cum {
            return k;
        }
    }
    last
}

pub fn born_probabilities(
    state: &PureState,
    basis: &ProjectorSet,
    targets: &[usize],
) -> Result<Vec<f64>, QError> {
    basis.embed(targets, state.n_qubits())?.probabilities(state)
}

pub fn project(
    state: &PureState,
    basis: &ProjectorSet,
    targets: &[usize],
    outcome: usize,
) -> Result<Option<(PureState, f64)>, QError> {
    basis.embed(targets, state.n_qubits())?.project(state, outcome)
}

/// Born-rule measurement of `targets` in `basis`, choosing the outcome from `random_draw`.
pub fn measure_projective(
    state: &PureState,
    basis: &ProjectorSet,
    targets: &[usize],
    random_draw: f64,
) -> Result<MeasurementOutcome, QError> {
    basis.embed(targets, state.n_qubits())?.sample(state, random_draw)
}
