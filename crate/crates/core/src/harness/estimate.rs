//! Estimators with standard errors over completed trial records.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::protocols::{InStateSpec, Outcome, TrialRecord};
use crate::qcore::{BellLabel, BlochVector};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithError {
    pub value: f64,
    pub stderr: f64,
    pub n: u64,
}

impl EstimateWithError {
    /// `|value - target| / stderr`; infinite when stderr is zero and the values differ.
    pub fn sigmas_from(&self, target: f64) -> f64 {
        let d = (self.value - target).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.stderr
        }
    }

    pub fn within_sigmas(&self, target: f64, k: f64) -> bool {
        self.sigmas_from(target) <= k
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimationError {
    #[error("no records fall in bin {0}")]
    EmptyBin(String),
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::default();
        iter.into_iter().for_each(|x| s.add(x));
        s
    }
}

/// Sample mean with `s/√n`; a single sample has zero stderr.
pub fn mean_estimate<I: IntoIterator<Item = f64>>(values: I) -> Option<EstimateWithError> {
    let v: Vec<f64> = values.into_iter().collect();
    if v.is_empty() {
        return None;
    }
    let n = v.len() as f64;
    let mean = v.iter().copied().collect::<CompensatedSum>().value() / n;
    let ss = v.iter().map(|x| (x - mean).powi(2)).collect::<CompensatedSum>().value();
    let stderr = if v.len() > 1 { (ss / (n - 1.0) / n).sqrt() } else { 0.0 };
    Some(EstimateWithError {
        value: mean,
        stderr,
        n: v.len() as u64,
    })
}

/// Running mean of ±1 samples.
#[derive(Clone, Copy, Debug, Default)]
struct SignBin {
    sum: i64,
    n: u64,
}

impl SignBin {
    fn push(&mut self, s: i8) {
        self.sum += s as i64;
        self.n += 1;
    }

    fn mean(&self) -> f64 {
        self.sum as f64 / self.n as f64
    }

    /// Binomial variance of the mean, `(1 - m²)/n`.
    fn var_of_mean(&self) -> f64 {
        let m = self.mean();
        (1.0 - m * m).max(0.0) / self.n as f64
    }
}

fn sign(o: &Outcome) -> Option<i8> {
    match o {
        Outcome::Sign(s) => Some(*s),
        _ => None,
    }
}

/// `⟨Q_A Q_B⟩ + ⟨P_A Q_B⟩ + ⟨P_A P_B⟩ − ⟨Q_A P_B⟩` over accepted records whose
/// Alice and Bob settings are named `Q`/`P`, optionally keeping only records
/// where Diana found `post_select`.
pub fn chsh_estimator(
    records: &[TrialRecord],
    post_select: Option<BellLabel>,
) -> Result<EstimateWithError, EstimationError> {
    const BINS: [(&str, &str, f64); 4] = [("Q", "Q", 1.0), ("P", "Q", 1.0), ("P", "P", 1.0), ("Q", "P", -1.0)];
    let mut bins = [SignBin::default(); 4];
    for r in records.iter().filter(|r| r.accepted) {
        if let Some(label) = post_select {
            match r.diana.as_ref().map(|d| &d.outcome) {
                Some(Outcome::Bell(l)) if *l == label => {}
                _ => continue,
            }
        }
        let (Some(a), Some(b)) = (&r.alice, &r.bob) else { continue };
        let (Some(sa), Some(sb)) = (sign(&a.outcome), sign(&b.outcome)) else { continue };
        if let Some(k) = BINS.iter().position(|(qa, qb, _)| a.setting == *qa && b.setting == *qb) {
            bins[k].push(sa * sb);
        }
    }
    let mut value = 0.0;
    let mut var = 0.0;
    let mut n = 0;
    for ((qa, qb, coef), bin) in BINS.iter().zip(&bins) {
        if bin.n == 0 {
            return Err(EstimationError::EmptyBin(format!("{qa}_A {qb}_B")));
        }
        value += coef * bin.mean();
        var += bin.var_of_mean();
        n += bin.n;
    }
    Ok(EstimateWithError {
        value,
        stderr: var.sqrt(),
        n,
    })
}

pub const PAULI_SETTINGS: [&str; 3] = ["sigma_x", "sigma_y", "sigma_z"];

/// Bob's Bloch vector after the (virtual) correction, one ±1 bin per axis.
///
/// Bob's outcomes are recorded uncorrected; each is multiplied by the sign
/// that the correction `σ_{x̄,x⊕y}` for Alice's label imposes on that axis.
pub fn corrected_bloch_estimate(
    records: &[TrialRecord],
    condition: Option<BellLabel>,
) -> Result<[(f64, f64, u64); 3], EstimationError> {
    let mut bins = [SignBin::default(); 3];
    for r in records.iter().filter(|r| r.accepted) {
        let Some(Outcome::Bell(label)) = r.alice.as_ref().map(|a| &a.outcome) else { continue };
        if condition.is_some_and(|c| c != *label) {
            continue;
        }
        let Some(b) = &r.bob else { continue };
        let Some(s) = sign(&b.outcome) else { continue };
        if let Some(k) = PAULI_SETTINGS.iter().position(|p| b.setting == *p) {
            let flip = label.correction().conjugation_signs()[k];
            bins[k].push(if flip < 0.0 { -s } else { s });
        }
    }
    let mut out = [(0.0, 0.0, 0); 3];
    for (k, bin) in bins.iter().enumerate() {
        if bin.n == 0 {
            return Err(EstimationError::EmptyBin(PAULI_SETTINGS[k].to_string()));
        }
        out[k] = (bin.mean(), bin.var_of_mean(), bin.n);
    }
    Ok(out)
}

/// `½(1 + r_in·r_out)` with `r_out` reconstructed from Bob's corrected
/// conditional means; `condition: None` pools every Alice label.
pub fn fidelity_estimator(
    records: &[TrialRecord],
    condition: Option<BellLabel>,
    in_state: &InStateSpec,
) -> Result<EstimateWithError, EstimationError> {
    let bins = corrected_bloch_estimate(records, condition)?;
    let r_in = in_state.bloch().components();
    let r_out = BlochVector::new(bins[0].0, bins[1].0, bins[2].0);
    let var: f64 = (0..3).map(|k| r_in[k] * r_in[k] * bins[k].1).sum();
    Ok(EstimateWithError {
        value: BlochVector::fidelity(in_state.bloch(), r_out),
        stderr: 0.5 * var.sqrt(),
        n: bins.iter().map(|b| b.2).sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::{AgentResult, ProtocolKind};

    fn rec(i: u64, a: (&str, i8), b: (&str, i8)) -> TrialRecord {
        let mut r = TrialRecord::new(i, ProtocolKind::Bell);
        r.alice = Some(AgentResult::new(a.0, Outcome::Sign(a.1)));
        r.bob = Some(AgentResult::new(b.0, Outcome::Sign(b.1)));
        r
    }

    #[test]
    fn perfectly_correlated_records_give_two() {
        let mut rs = Vec::new();
        for (i, (sa, sb)) in [("Q", "Q"), ("P", "Q"), ("P", "P"), ("Q", "P")].iter().cycle().take(40).enumerate() {
            let s = if i % 3 == 0 { 1 } else { -1 };
            rs.push(rec(i as u64, (sa, s), (sb, s)));
        }
        let e = chsh_estimator(&rs, None).unwrap();
        assert_eq!(e.value, 2.0);
        assert_eq!(e.stderr, 0.0);
        assert_eq!(e.n, 40);
    }

    #[test]
    fn empty_bin_is_reported() {
        let rs = vec![rec(0, ("Q", 1), ("Q", 1))];
        assert!(matches!(chsh_estimator(&rs, None), Err(EstimationError::EmptyBin(_))));
    }

    #[test]
    fn unbiased_outcomes_give_half_fidelity() {
        let mut rs = Vec::new();
        let mut i = 0;
        for axis in PAULI_SETTINGS {
            for s in [1, -1] {
                let mut r = TrialRecord::new(i, ProtocolKind::TeleportPassive);
                r.alice = Some(AgentResult::new("bell_basis", Outcome::Bell(BellLabel::B11)));
                r.bob = Some(AgentResult::new(axis, Outcome::Sign(s)));
                rs.push(r);
                i += 1;
            }
        }
        let spec = InStateSpec::new(0.9, 2.0).unwrap();
        let f = fidelity_estimator(&rs, Some(BellLabel::B11), &spec).unwrap();
        assert_eq!(f.value, 0.5);
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let xs = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(xs.iter().copied().collect::<CompensatedSum>().value(), 2.0);
    }

    #[test]
    fn mean_estimate_basics() {
        let e = mean_estimate([1.0, 2.0, 3.0]).unwrap();
        assert_eq!(e.value, 2.0);
        assert!((e.stderr - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(mean_estimate(std::iter::empty()).is_none());
    }
}
