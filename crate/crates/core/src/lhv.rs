//! Classically correlated pair model of teleportation.
//!
//! Alice and Bob share a product pair pointing in opposite directions
//! `(θ̃, φ̃)` and `(π−θ̃, π+φ̃)`, drawn uniformly over the sphere. Alice's Bell
//! measurement on her half and the input photon, followed by Bob's correction,
//! averages to `r_in/3` and fidelity 2/3. Detection times that grow with the
//! angle between analyzer and hidden direction let a coincidence window
//! post-select the favourable pairs and push the fidelity above 2/3.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::num::NonZeroUsize;
use std::ops::Range;

use gauss_quad::GaussLegendre;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harness::{derive_stream, fidelity_estimator, CompensatedSum, EstimateWithError, EstimationError, PAULI_SETTINGS};
use crate::parallel::{map_trials, Execution};
use crate::protocols::{AgentResult, InStateSpec, Outcome, ProtocolError, ProtocolKind, TrialRecord};
use crate::qcore::{select_outcome, BellLabel, BlochVector, PureState, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LhvError {
    #[error("invalid model parameter: {0}")]
    InvalidModel(String),
    #[error("Pr({label}) = {p} lies outside [0, 1]")]
    ProbabilityOutOfRange { label: BellLabel, p: f64 },
    #[error("none of the {trials} trials passed the coincidence window")]
    NoAcceptedTrials { trials: u64 },
    #[error(transparent)]
    Estimation(#[from] EstimationError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

const PROB_TOL: f64 = 1e-12;

/// Hidden direction of photon A; photon B points the opposite way.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HiddenPair {
    pub theta_t: f64,
    pub phi_t: f64,
}

impl HiddenPair {
    pub fn new(theta_t: f64, phi_t: f64) -> Result<Self, LhvError> {
        if !(0.0..=PI).contains(&theta_t) || !(0.0..TAU).contains(&phi_t) {
            return Err(LhvError::InvalidModel(format!("pair direction ({theta_t}, {phi_t})")));
        }
        Ok(Self { theta_t, phi_t })
    }

    pub fn a_dir(&self) -> BlochVector {
        BlochVector::from_angles(self.theta_t, self.phi_t)
    }

    /// Direction `(π−θ̃, π+φ̃)`.
    pub fn b_dir(&self) -> BlochVector {
        BlochVector::from_angles(PI - self.theta_t, PI + self.phi_t)
    }

    pub fn a_state(&self) -> PureState {
        PureState::from_bloch_angles(self.theta_t, self.phi_t)
    }
}

/// `φ̃ = 2πu₁`, `cos θ̃ = 1 − 2u₂`.
pub fn sample_pair<R: Rng + ?Sized>(rng: &mut R) -> HiddenPair {
    let phi_t = TAU * rng.random::<f64>();
    let theta_t = (1.0 - 2.0 * rng.random::<f64>()).clamp(-1.0, 1.0).acos();
    HiddenPair { theta_t, phi_t }
}

/// `Pr(B_xy)` for Alice's Bell measurement on photon A of `pair` and the
/// input photon C, indexed by [`BellLabel::index`].
pub fn alice_outcome_probabilities(in_state: &InStateSpec, pair: &HiddenPair) -> Result<[f64; 4], LhvError> {
    let (tc, pc) = (in_state.theta, in_state.phi);
    let (tt, pt) = (pair.theta_t, pair.phi_t);
    let mut out = [0.0; 4];
    for label in BellLabel::ALL {
        let sx = if label.x() == 0 { 1.0 } else { -1.0 };
        let sy = if label.y() == 0 { 1.0 } else { -1.0 };
        // the azimuthal term flips with y, as the polar one does
        let p = 0.25
            * (1.0 + sy * (tc + sy * tt).cos() + (1.0 + sx * (pc + sy * pt).cos()) * tc.sin() * tt.sin());
        if !(-PROB_TOL..=1.0 + PROB_TOL).contains(&p) {
            return Err(LhvError::ProbabilityOutOfRange { label, p });
        }
        out[label.index()] = p.clamp(0.0, 1.0);
    }
    Ok(out)
}

/// Bob's Bloch vector after his correction for Alice's `label`.
pub fn bob_out_bloch(label: BellLabel, pair: &HiddenPair) -> BlochVector {
    let sx = if label.x() == 0 { 1.0 } else { -1.0 };
    let sy = if label.y() == 0 { 1.0 } else { -1.0 };
    let (st, ct) = pair.theta_t.sin_cos();
    let (sp, cp) = pair.phi_t.sin_cos();
    BlochVector::new(sx * cp * st, -sx * sy * sp * st, sy * ct)
}

/// Label-averaged fidelity of a single pair, `Σ Pr(B_xy) ½(1 + r_in·r_out)`.
fn pair_fidelity(in_state: &InStateSpec, pair: &HiddenPair) -> Result<f64, LhvError> {
    let probs = alice_outcome_probabilities(in_state, pair)?;
    let r_in = in_state.bloch();
    Ok(BellLabel::ALL
        .iter()
        .map(|l| probs[l.index()] * BlochVector::fidelity(r_in, bob_out_bloch(*l, pair)))
        .sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AveragingMethod {
    /// Gauss–Legendre product rule in `(cos θ̃, φ̃)`, 64 nodes per axis.
    AnalyticQuadrature,
    MonteCarlo { trials: u64, seed: u64 },
}

const QUAD_NODES: usize = 64;

fn sphere_average<const N: usize>(f: impl Fn(&HiddenPair) -> [f64; N]) -> [f64; N] {
    let rule = GaussLegendre::new(NonZeroUsize::new(QUAD_NODES).expect("nonzero"));
    let mut acc = [0.0; N];
    for (u, wu) in rule.iter() {
        // map [-1, 1] nodes onto φ̃ ∈ [0, 2π)
        for (v, wv) in rule.iter() {
            let pair = HiddenPair {
                theta_t: u.clamp(-1.0, 1.0).acos(),
                phi_t: PI * (v + 1.0),
            };
            let w = wu * wv * PI / (4.0 * PI);
            for (a, x) in acc.iter_mut().zip(f(&pair)) {
                *a += w * x;
            }
        }
    }
    acc
}

/// `⟨⟨r_out⟩⟩`: Bob's corrected Bloch vector averaged over pairs and labels.
pub fn mean_out_bloch(in_state: &InStateSpec) -> BlochVector {
    let [x, y, z] = sphere_average(|pair| {
        let probs = alice_outcome_probabilities(in_state, pair).unwrap_or([0.0; 4]);
        let mut r = [0.0; 3];
        for l in BellLabel::ALL {
            for (acc, c) in r.iter_mut().zip(bob_out_bloch(l, pair).components()) {
                *acc += probs[l.index()] * c;
            }
        }
        r
    });
    BlochVector::new(x, y, z)
}

/// Pair- and label-averaged fidelity `½(1 + r_in·⟨⟨r_out⟩⟩)`.
pub fn classical_average_fidelity(
    in_state: &InStateSpec,
    method: AveragingMethod,
) -> Result<EstimateWithError, LhvError> {
    match method {
        AveragingMethod::AnalyticQuadrature => Ok(EstimateWithError {
            value: BlochVector::fidelity(in_state.bloch(), mean_out_bloch(in_state)),
            stderr: 0.0,
            n: (QUAD_NODES * QUAD_NODES) as u64,
        }),
        AveragingMethod::MonteCarlo { trials, seed } => {
            if trials == 0 {
                return Err(LhvError::InvalidModel("Monte Carlo needs at least one trial".into()));
            }
            let mut rng = derive_stream(seed, 0);
            let (mut s, mut s2) = (CompensatedSum::default(), CompensatedSum::default());
            for _ in 0..trials {
                let f = pair_fidelity(in_state, &sample_pair(&mut rng))?;
                s.add(f);
                s2.add(f * f);
            }
            let n = trials as f64;
            let mean = s.value() / n;
            let var = (s2.value() / n - mean * mean).max(0.0);
            Ok(EstimateWithError {
                value: mean,
                stderr: (var / n).sqrt(),
                n: trials,
            })
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleConvention {
    /// Angle between Bloch vectors.
    #[default]
    Bloch,
    /// Half the Bloch angle, as between polarization directions.
    Polarization,
}

/// Detection delay uniform on `[0, T0·d²]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DelayModel {
    pub t0: f64,
    pub angle_convention: AngleConvention,
}

impl DelayModel {
    pub const EXPONENT: i32 = 2;

    pub fn new(t0: f64, angle_convention: AngleConvention) -> Result<Self, LhvError> {
        if !(t0 >= 0.0 && t0.is_finite()) {
            return Err(LhvError::InvalidModel(format!("delay scale T0 = {t0}")));
        }
        Ok(Self { t0, angle_convention })
    }

    pub fn max_delay(&self) -> f64 {
        self.t0 * self.angle(BlochVector::new(0.0, 0.0, 1.0), BlochVector::new(0.0, 0.0, -1.0)).powi(Self::EXPONENT)
    }

    fn angle(&self, a: BlochVector, b: BlochVector) -> f64 {
        let d = a.angle_to(b);
        match self.angle_convention {
            AngleConvention::Bloch => d,
            AngleConvention::Polarization => d / 2.0,
        }
    }
}

pub fn detection_delay(measure_dir: BlochVector, hidden_dir: BlochVector, model: &DelayModel, draw: f64) -> f64 {
    debug_assert!((measure_dir.norm() - 1.0).abs() < 1e-9 && (hidden_dir.norm() - 1.0).abs() < 1e-9);
    draw * model.t0 * model.angle(measure_dir, hidden_dir).powi(DelayModel::EXPONENT)
}

/// Accept a trial iff all its detection tags lie within `window` of each other.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoincidencePolicy {
    pub window: f64,
}

impl CoincidencePolicy {
    pub fn new(window: f64) -> Result<Self, LhvError> {
        if !(window >= 0.0) {
            return Err(LhvError::InvalidModel(format!("coincidence window {window}")));
        }
        Ok(Self { window })
    }

    pub fn infinite() -> Self {
        Self { window: f64::INFINITY }
    }

    pub fn accepts(&self, tags: &[f64]) -> bool {
        let lo = tags.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = tags.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        tags.is_empty() || hi - lo <= self.window
    }
}

/// Analyzer directions against which Alice's two detections are timed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AliceDelayMode {
    /// Each photon against the state the Bell outcome projects it onto,
    /// given the other photon's actual state.
    #[default]
    Label,
    /// Both photons against the antipode of the input direction, ignoring the label.
    Hidden,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimationMode {
    /// Bob's corrected Bloch vector is known per trial; F is averaged directly.
    #[default]
    PerTrialBloch,
    /// Bob measures a uniformly chosen Pauli axis; F is rebuilt from
    /// conditional means.
    SampledOutcomes,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LhvSetup {
    pub in_state: InStateSpec,
    pub delay: DelayModel,
    pub policy: CoincidencePolicy,
    pub estimation: EstimationMode,
    pub alice_delays: AliceDelayMode,
    /// Discard `B₀₀`/`B₀₁` outcomes, as a half-efficient Bell analyzer would.
    pub bell_mask: bool,
}

impl LhvSetup {
    pub fn new(in_state: InStateSpec, delay: DelayModel, policy: CoincidencePolicy) -> Self {
        Self {
            in_state,
            delay,
            policy,
            estimation: EstimationMode::default(),
            alice_delays: AliceDelayMode::default(),
            bell_mask: false,
        }
    }

    pub fn with_estimation(mut self, estimation: EstimationMode) -> Self {
        self.estimation = estimation;
        self
    }

    pub fn with_alice_delays(mut self, mode: AliceDelayMode) -> Self {
        self.alice_delays = mode;
        self
    }

    pub fn with_bell_mask(mut self, mask: bool) -> Self {
        self.bell_mask = mask;
        self
    }
}

fn bloch_of(v0: C64, v1: C64) -> BlochVector {
    let n = v0.norm_sqr() + v1.norm_sqr();
    let cross = v0.conj() * v1;
    BlochVector::new(2.0 * cross.re / n, 2.0 * cross.im / n, (v0.norm_sqr() - v1.norm_sqr()) / n)
}

/// Directions `⟨c|_C|B_xy⟩` (photon A) and `⟨a|_A|B_xy⟩` (photon C).
fn label_analyzers(label: BellLabel, a: &PureState, c: &PureState) -> (BlochVector, BlochVector) {
    let (y, ybar) = (label.y() as usize, 1 - label.y() as usize);
    let sx = if label.x() == 0 { 1.0 } else { -1.0 };
    let (a, c) = (a.amplitudes(), c.amplitudes());
    let for_a = bloch_of(c[y].conj(), c[ybar].conj() * sx);
    let mut w = [C64::new(0.0, 0.0); 2];
    w[y] = a[0].conj();
    w[ybar] = a[1].conj() * sx;
    (for_a, bloch_of(w[0], w[1]))
}

pub const DETECTOR_TAGS: [&str; 3] = ["alice_A", "alice_C", "bob_B"];

/// One trial of the model: pair, Alice's label, Bob's response and the three
/// detection tags. Draws are consumed in that order.
pub fn lhv_trial<R: Rng + ?Sized>(setup: &LhvSetup, trial_index: u64, rng: &mut R) -> Result<TrialRecord, LhvError> {
    let in_state = &setup.in_state;
    let r_in = in_state.bloch();
    let pair = sample_pair(rng);
    let probs = alice_outcome_probabilities(in_state, &pair)?;
    let label = BellLabel::from_index(select_outcome(&probs, rng.random()));
    let r_out = bob_out_bloch(label, &pair);

    let mut record = TrialRecord::new(trial_index, ProtocolKind::Lhv);
    record.alice = Some(AgentResult::new("bell_basis", Outcome::Bell(label)));

    let (bob_measure, bob_hidden) = match setup.estimation {
        EstimationMode::PerTrialBloch => {
            record.bob_bloch = Some(r_out);
            record.fidelity = Some(BlochVector::fidelity(r_in, r_out));
            (r_in, r_out)
        }
        EstimationMode::SampledOutcomes => {
            let k = select_outcome(&[1.0 / 3.0; 3], rng.random());
            let mut axis = [0.0; 3];
            axis[k] = 1.0;
            let m = BlochVector::new(axis[0], axis[1], axis[2]);
            let b = pair.b_dir();
            let sign: i8 = if rng.random::<f64>() < 0.5 * (1.0 + m.dot(b)) { 1 } else { -1 };
            record.bob = Some(AgentResult::new(PAULI_SETTINGS[k], Outcome::Sign(sign)));
            (m.scaled(sign as f64), b)
        }
    };

    let (an_a, an_c) = match setup.alice_delays {
        AliceDelayMode::Label => label_analyzers(label, &pair.a_state(), &in_state.state()),
        AliceDelayMode::Hidden => (r_in.antipode(), pair.a_dir().antipode()),
    };
    let tags = [
        detection_delay(an_a, pair.a_dir(), &setup.delay, rng.random()),
        detection_delay(an_c, r_in, &setup.delay, rng.random()),
        detection_delay(bob_measure, bob_hidden, &setup.delay, rng.random()),
    ];
    record.detection_times = Some(DETECTOR_TAGS.iter().map(|s| s.to_string()).zip(tags).collect::<BTreeMap<_, _>>());
    record.accepted = setup.policy.accepts(&tags) && (!setup.bell_mask || record.passes_bell_mask());
    record.event_refs = record.default_event_refs();
    Ok(record)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LhvSummary {
    pub f_av: EstimateWithError,
    pub acceptance_rate: f64,
    pub accepted_count: u64,
    pub trials: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LhvRun {
    pub summary: LhvSummary,
    pub records: Vec<TrialRecord>,
}

/// Summarizes already-generated records under `setup`'s estimation mode.
pub fn summarize_lhv(setup: &LhvSetup, records: &[TrialRecord]) -> Result<LhvSummary, LhvError> {
    let trials = records.len() as u64;
    let accepted: Vec<&TrialRecord> = records.iter().filter(|r| r.accepted).collect();
    if accepted.is_empty() {
        return Err(LhvError::NoAcceptedTrials { trials });
    }
    let f_av = match setup.estimation {
        EstimationMode::PerTrialBloch => {
            crate::harness::mean_estimate(accepted.iter().filter_map(|r| r.fidelity)).ok_or(
                EstimationError::EmptyBin("per-trial fidelity".into()),
            )?
        }
        EstimationMode::SampledOutcomes => fidelity_estimator(records, None, &setup.in_state)?,
    };
    Ok(LhvSummary {
        f_av,
        acceptance_rate: accepted.len() as f64 / trials as f64,
        accepted_count: accepted.len() as u64,
        trials,
    })
}

/// Runs trials `range`, each on its own stream of `seed`.
pub fn run_lhv_teleportation(
    setup: &LhvSetup,
    range: Range<u64>,
    seed: u64,
    exec: Execution,
) -> Result<LhvRun, LhvError> {
    if range.is_empty() {
        return Err(LhvError::InvalidModel("no trials requested".into()));
    }
    let records = map_trials(range, exec, |i| lhv_trial(setup, i, &mut derive_stream(seed, i)))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let summary = summarize_lhv(setup, &records)?;
    Ok(LhvRun { summary, records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::ProjectorSet;

    fn in_state(t: f64, p: f64) -> InStateSpec {
        InStateSpec::new(t, p).unwrap()
    }

    #[test]
    fn aligned_pair_probabilities() {
        let p = alice_outcome_probabilities(&in_state(0.0, 0.0), &HiddenPair::new(0.0, 0.0).unwrap()).unwrap();
        assert_eq!(p, [0.5, 0.0, 0.5, 0.0]);
    }

    #[test]
    fn probabilities_match_born_rule() {
        let bell = ProjectorSet::bell().embed(&[0, 1], 2).unwrap();
        let mut rng = derive_stream(11, 0);
        for _ in 0..200 {
            let s = InStateSpec::random(&mut rng);
            let pair = sample_pair(&mut rng);
            let product = crate::qcore::tensor(&pair.a_state(), &s.state()).unwrap();
            let born = bell.probabilities(&product).unwrap();
            let p = alice_outcome_probabilities(&s, &pair).unwrap();
            for k in 0..4 {
                assert!((born[k] - p[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bob_out_is_corrected_antipode() {
        let mut rng = derive_stream(12, 0);
        for _ in 0..100 {
            let pair = sample_pair(&mut rng);
            for l in BellLabel::ALL {
                let expect = pair.b_dir().conjugated_by(l.correction());
                let got = bob_out_bloch(l, &pair);
                assert!((got.dot(expect) - 1.0).abs() < 1e-12);
            }
        }
        assert_eq!(bob_out_bloch(BellLabel::B00, &HiddenPair::new(0.0, 0.0).unwrap()).components(), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn quadrature_gives_two_thirds() {
        for (t, p) in [(0.0, 0.0), (1.1, 4.0), (PI, 0.3)] {
            let s = in_state(t, p);
            let f = classical_average_fidelity(&s, AveragingMethod::AnalyticQuadrature).unwrap();
            assert!((f.value - 2.0 / 3.0).abs() < 1e-10);
            let r = mean_out_bloch(&s);
            let r_in = s.bloch();
            for (a, b) in r.components().iter().zip(r_in.components()) {
                assert!((a - b / 3.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn label_analyzer_for_singlet_is_antipode_of_input() {
        let s = in_state(0.7, 2.1);
        let pair = HiddenPair::new(1.9, 0.4).unwrap();
        let (for_a, for_c) = label_analyzers(BellLabel::B11, &pair.a_state(), &s.state());
        assert!((for_a.dot(s.bloch()) + 1.0).abs() < 1e-12);
        assert!((for_c.dot(pair.a_dir()) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn delay_bounds() {
        let m = DelayModel::new(2.0, AngleConvention::Bloch).unwrap();
        let z = BlochVector::new(0.0, 0.0, 1.0);
        assert_eq!(detection_delay(z, z, &m, 0.7), 0.0);
        assert!((m.max_delay() - 2.0 * PI * PI).abs() < 1e-12);
        let half = DelayModel::new(2.0, AngleConvention::Polarization).unwrap();
        assert!((half.max_delay() - 0.5 * PI * PI).abs() < 1e-12);
        assert!(DelayModel::new(-1.0, AngleConvention::Bloch).is_err());
    }

    #[test]
    fn coincidence_rule() {
        let p = CoincidencePolicy::new(1.0).unwrap();
        assert!(p.accepts(&[0.0, 0.5, 1.0]));
        assert!(!p.accepts(&[0.0, 0.5, 1.01]));
        assert!(CoincidencePolicy::infinite().accepts(&[0.0, 1e300]));
        assert!(CoincidencePolicy::new(-1.0).is_err());
    }

    #[test]
    fn zero_window_with_spread_is_an_error() {
        let setup = LhvSetup::new(
            in_state(1.0, 1.0),
            DelayModel::new(1.0, AngleConvention::Bloch).unwrap(),
            CoincidencePolicy::new(0.0).unwrap(),
        );
        let r = run_lhv_teleportation(&setup, 0..20, 1, Execution::Sequential);
        assert!(matches!(r, Err(LhvError::NoAcceptedTrials { trials: 20 })));
    }
}
