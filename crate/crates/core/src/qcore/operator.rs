use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use nalgebra::DMatrix;

use super::{c, check_targets, local_index, target_mask, QError, ALGEBRAIC_TOL, C64, MAX_QUBITS};

pub type CMatrix = DMatrix<C64>;

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entry of `|M - M†|`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn is_hermitian(m: &CMatrix) -> bool {
    m.is_square() && hermiticity_defect(m) < ALGEBRAIC_TOL
}

pub(crate) fn unitarity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    max_abs(&(m.adjoint() * m - CMatrix::identity(n, n)))
}

pub fn is_unitary(m: &CMatrix) -> bool {
    m.is_square() && unitarity_defect(m) < ALGEBRAIC_TOL
}

pub(crate) fn qubits_of_dim(dim: usize) -> Result<usize, QError> {
    if !dim.is_power_of_two() || dim < 2 {
        return Err(QError::BadLength(dim));
    }
    let n = dim.trailing_zeros() as usize;
    if n > MAX_QUBITS {
        return Err(QError::TooManyQubits(n));
    }
    Ok(n)
}

/// Lift `op`, acting on `targets`, to the full `n`-qubit space (identity elsewhere).
pub fn embed(op: &CMatrix, targets: &[usize], n: usize) -> Result<CMatrix, QError> {
    if n > MAX_QUBITS {
        return Err(QError::TooManyQubits(n));
    }
    check_targets(targets, n)?;
    let local_dim = 1usize << targets.len();
    if op.nrows() != local_dim || op.ncols() != local_dim {
        return Err(QError::DimensionMismatch {
            expected: local_dim,
            found: op.nrows(),
        });
    }
    let dim = 1usize << n;
    let mask = target_mask(targets, n);
    Ok(CMatrix::from_fn(dim, dim, |i, j| {
        if i & !mask == j & !mask {
            op[(local_index(i, targets, n), local_index(j, targets, n))]
        } else {
            C64::new(0.0, 0.0)
        }
    }))
}

/// Hermitian operator with a human-readable label.
///
/// Config files refer to the single-qubit set by the labels `I`, `sigma_x`,
/// `sigma_y`, `sigma_z`, `sigma_plus` and `sigma_minus`; a leading `-`
/// negates. `sigma_plus`/`sigma_minus` are the rotated pair
/// `(sigma_z ± sigma_x)/√2`, not ladder operators.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    label: String,
    n_qubits: usize,
    matrix: CMatrix,
}

impl Observable {
    pub fn new(label: impl Into<String>, matrix: CMatrix) -> Result<Self, QError> {
        if !matrix.is_square() {
            return Err(QError::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let n_qubits = qubits_of_dim(matrix.nrows())?;
        let defect = hermiticity_defect(&matrix);
        if defect >= ALGEBRAIC_TOL {
            return Err(QError::NotHermitian(defect));
        }
        Ok(Self {
            label: label.into(),
            n_qubits,
            matrix,
        })
    }

    fn single(label: &str, m: [[C64; 2]; 2]) -> Self {
        Self {
            label: label.to_string(),
            n_qubits: 1,
            matrix: CMatrix::from_fn(2, 2, |i, j| m[i][j]),
        }
    }

    pub fn identity() -> Self {
        let (o, l) = (c(0.0, 0.0), c(1.0, 0.0));
        Self::single("I", [[l, o], [o, l]])
    }

    pub fn sigma_x() -> Self {
        let (o, l) = (c(0.0, 0.0), c(1.0, 0.0));
        Self::single("sigma_x", [[o, l], [l, o]])
    }

    pub fn sigma_y() -> Self {
        let o = c(0.0, 0.0);
        Self::single("sigma_y", [[o, c(0.0, -1.0)], [c(0.0, 1.0), o]])
    }

    pub fn sigma_z() -> Self {
        let (o, l) = (c(0.0, 0.0), c(1.0, 0.0));
        Self::single("sigma_z", [[l, o], [o, -l]])
    }

    /// `(sigma_z + sigma_x)/√2`.
    pub fn sigma_plus() -> Self {
        let s = c(FRAC_1_SQRT_2, 0.0);
        Self::single("sigma_plus", [[s, s], [s, -s]])
    }

    /// `(sigma_z - sigma_x)/√2`.
    pub fn sigma_minus() -> Self {
        let s = c(FRAC_1_SQRT_2, 0.0);
        Self::single("sigma_minus", [[s, -s], [-s, -s]])
    }

    pub fn from_label(label: &str) -> Result<Self, QError> {
        if let Some(rest) = label.strip_prefix('-') {
            return Ok(Self::from_label(rest)?.negated());
        }
        Ok(match label {
            "I" => Self::identity(),
            "sigma_x" => Self::sigma_x(),
            "sigma_y" => Self::sigma_y(),
            "sigma_z" => Self::sigma_z(),
            "sigma_plus" => Self::sigma_plus(),
            "sigma_minus" => Self::sigma_minus(),
            _ => return Err(QError::UnknownObservable(label.to_string())),
        })
    }

    pub fn negated(&self) -> Self {
        let label = match self.label.strip_prefix('-') {
            Some(l) => l.to_string(),
            None => format!("-{}", self.label),
        };
        Self {
            label,
            n_qubits: self.n_qubits,
            matrix: -self.matrix.clone(),
        }
    }

    /// Tensor product `self ⊗ other` (self on the leading qubits).
    pub fn kron(&self, other: &Self) -> Result<Self, QError> {
        let n = self.n_qubits + other.n_qubits;
        if n > MAX_QUBITS {
            return Err(QError::TooManyQubits(n));
        }
        Ok(Self {
            label: format!("{}⊗{}", self.label, other.label),
            n_qubits: n,
            matrix: self.matrix.kronecker(&other.matrix),
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Real eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// True when `O² = I`, i.e. every eigenvalue is ±1.
    pub fn is_plus_minus_one(&self) -> bool {
        let d = self.matrix.nrows();
        let sq = &self.matrix * &self.matrix;
        (sq - CMatrix::identity(d, d))
            .iter()
            .all(|z| z.norm() < ALGEBRAIC_TOL)
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}
