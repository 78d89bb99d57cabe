use super::operator::{hermiticity_defect, qubits_of_dim, CMatrix};
use super::{
    c, check_targets, local_index, BlochVector, Observable, PureState, QError, ALGEBRAIC_TOL, C64,
    PSD_TOL,
};

/// Hermitian, unit-trace, positive semidefinite matrix on 1 to 4 qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    m: CMatrix,
}

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self, QError> {
        if !m.is_square() {
            return Err(QError::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let n_qubits = qubits_of_dim(m.nrows())?;
        let herm = hermiticity_defect(&m);
        if herm >= ALGEBRAIC_TOL {
            return Err(QError::NotHermitian(herm));
        }
        let tr = m.trace().re;
        if (tr - 1.0).abs() > ALGEBRAIC_TOL {
            return Err(QError::BadTrace(tr - 1.0));
        }
        let min_ev = m
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_ev < -PSD_TOL {
            return Err(QError::NotPositive(min_ev));
        }
        Ok(Self { n_qubits, m })
    }

    pub fn from_pure(s: &PureState) -> Self {
        let v = s.as_vector();
        Self {
            n_qubits: s.n_qubits(),
            m: &v * v.adjoint(),
        }
    }

    /// `I / 2^n`.
    pub fn maximally_mixed(n_qubits: usize) -> Result<Self, QError> {
        let d = 1usize << n_qubits;
        if n_qubits == 0 || n_qubits > super::MAX_QUBITS {
            return Err(QError::TooManyQubits(n_qubits));
        }
        Ok(Self {
            n_qubits,
            m: CMatrix::identity(d, d) / c(d as f64, 0.0),
        })
    }

    /// `(I + r·σ)/2`; requires `|r| ≤ 1`.
    pub fn from_bloch(r: BlochVector) -> Result<Self, QError> {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                c(0.5 * (1.0 + r.z), 0.0),
                c(0.5 * r.x, -0.5 * r.y),
                c(0.5 * r.x, 0.5 * r.y),
                c(0.5 * (1.0 - r.z), 0.0),
            ],
        );
        Self::new(m)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        (&self.m * &self.m).trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.m.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Reduced state on `keep` (in the listed order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self, QError> {
        let m = operator_partial_trace(&self.m, self.n_qubits, keep)?;
        Ok(Self {
            n_qubits: keep.len(),
            m,
        })
    }

    /// `Tr(ρ O)`; rejects a result whose imaginary part exceeds 1e-12.
    pub fn expectation(&self, obs: &Observable) -> Result<f64, QError> {
        if obs.n_qubits() != self.n_qubits {
            return Err(QError::DimensionMismatch {
                expected: self.n_qubits,
                found: obs.n_qubits(),
            });
        }
        let v: C64 = (&self.m * obs.matrix()).trace();
        if v.im.abs() > ALGEBRAIC_TOL {
            return Err(QError::ImaginaryExpectation(v.im));
        }
        Ok(v.re)
    }

    pub fn bloch_vector(&self) -> Result<BlochVector, QError> {
        if self.n_qubits != 1 {
            return Err(QError::NotSingleQubit(self.n_qubits));
        }
        Ok(BlochVector::new(
            self.expectation(&Observable::sigma_x())?,
            self.expectation(&Observable::sigma_y())?,
            self.expectation(&Observable::sigma_z())?,
        ))
    }

    /// Largest entrywise distance to `other`.
    pub fn distance(&self, other: &Self) -> f64 {
        if self.m.shape() != other.m.shape() {
            return f64::INFINITY;
        }
        (&self.m - &other.m).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Partial trace of an arbitrary operator on `n` qubits onto `keep`.
///
/// Works for operators that are not states (e.g. `O ρ`), which is what the
/// delayed-choice matrices need.
pub fn operator_partial_trace(m: &CMatrix, n: usize, keep: &[usize]) -> Result<CMatrix, QError> {
    check_targets(keep, n)?;
    let dim = 1usize << n;
    if m.nrows() != dim || m.ncols() != dim {
        return Err(QError::DimensionMismatch {
            expected: dim,
            found: m.nrows(),
        });
    }
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let kd = 1usize << keep.len();
    let mut out = CMatrix::zeros(kd, kd);
    for i in 0..dim {
        for j in 0..dim {
            if local_index(i, &traced, n) != local_index(j, &traced, n) {
                continue;
            }
            out[(local_index(i, keep, n), local_index(j, keep, n))] += m[(i, j)];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{tensor, BellLabel};
    use std::f64::consts::SQRT_2;

    #[test]
    fn singlet_reduces_to_infinite_temperature() {
        let rho = BellLabel::B11.state().to_density();
        let a = rho.partial_trace(&[0]).unwrap();
        assert!(a.distance(&DensityMatrix::maximally_mixed(1).unwrap()) < 1e-12);
        assert!((a.purity() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn keep_all_is_identity_up_to_order() {
        let s = tensor(&BellLabel::B10.state(), &PureState::from_bloch_angles(0.4, 2.2)).unwrap();
        let rho = s.to_density();
        assert!(rho.partial_trace(&[0, 1, 2]).unwrap().distance(&rho) < 1e-12);
    }

    #[test]
    fn singlet_zz_and_chsh() {
        let rho = BellLabel::B11.state().to_density();
        let zz = Observable::sigma_z().kron(&Observable::sigma_z()).unwrap();
        assert!((rho.expectation(&zz).unwrap() + 1.0).abs() < 1e-12);

        let qa = Observable::sigma_z();
        let pa = Observable::sigma_x();
        let qb = Observable::sigma_plus().negated();
        let pb = Observable::sigma_minus();
        let term = |a: &Observable, b: &Observable| rho.expectation(&a.kron(b).unwrap()).unwrap();
        let s = term(&qa, &qb) + term(&pa, &qb) + term(&pa, &pb) - term(&qa, &pb);
        assert!((s - 2.0 * SQRT_2).abs() < 1e-12);
        let ii = Observable::identity().kron(&Observable::identity()).unwrap();
        assert!((rho.expectation(&ii).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bloch_vectors() {
        let z = PureState::basis(1, 0).unwrap().to_density().bloch_vector().unwrap();
        assert_eq!((z.x, z.y, z.z), (0.0, 0.0, 1.0));
        let m = DensityMatrix::maximally_mixed(1).unwrap().bloch_vector().unwrap();
        assert!(m.norm() < 1e-15);
        let (t, p) = (1.2, 5.1);
        let r = PureState::from_bloch_angles(t, p).to_density().bloch_vector().unwrap();
        let e = BlochVector::from_angles(t, p);
        assert!((r.x - e.x).abs() < 1e-12 && (r.y - e.y).abs() < 1e-12 && (r.z - e.z).abs() < 1e-12);
        assert_eq!(
            BellLabel::B00.state().to_density().bloch_vector(),
            Err(QError::NotSingleQubit(2))
        );
    }

    #[test]
    fn rejects_bad_matrices() {
        let neg = CMatrix::from_row_slice(2, 2, &[c(1.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)]);
        assert!(matches!(DensityMatrix::new(neg), Err(QError::NotPositive(_))));
        let tr = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(DensityMatrix::new(tr), Err(QError::BadTrace(_))));
        let nh = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.0), c(0.0, 0.0), c(0.5, 0.0)]);
        assert!(matches!(DensityMatrix::new(nh), Err(QError::NotHermitian(_))));
    }

    #[test]
    fn expectation_dimension_check() {
        let rho = DensityMatrix::maximally_mixed(2).unwrap();
        assert!(matches!(
            rho.expectation(&Observable::sigma_z()),
            Err(QError::DimensionMismatch { .. })
        ));
    }
}
