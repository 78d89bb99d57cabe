use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::harness::{EstimateWithError, PAULI_SETTINGS};
use crate::qcore::{apply_local, tensor, BellLabel, BlochVector, ProjectorSet, PureState, C64};

use super::experiment::{record_from, OutcomeKind, PartySetting};
use super::{
    Agent, AgentResult, Experiment, JointDistribution, JointTable, MeasurementPlan, OrderingScenario,
    Outcome, Party, ProtocolError, ProtocolKind, TrialRecord,
};

/// Input qubit `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InStateSpec {
    pub theta: f64,
    pub phi: f64,
}

impl InStateSpec {
    pub fn new(theta: f64, phi: f64) -> Result<Self, ProtocolError> {
        if !(0.0..=PI).contains(&theta) {
            return Err(ProtocolError::InvalidInState(format!("theta {theta} outside [0, π]")));
        }
        if !(0.0..TAU).contains(&phi) {
            return Err(ProtocolError::InvalidInState(format!("phi {phi} outside [0, 2π)")));
        }
        Ok(Self { theta, phi })
    }

    /// Uniform on the Bloch sphere.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let theta = (1.0 - 2.0 * rng.random::<f64>()).clamp(-1.0, 1.0).acos();
        let phi = TAU * rng.random::<f64>();
        Self { theta, phi }
    }

    pub fn alpha(&self) -> C64 {
        C64::new((self.theta / 2.0).cos(), 0.0)
    }

    pub fn beta(&self) -> C64 {
        C64::from_polar((self.theta / 2.0).sin(), self.phi)
    }

    pub fn state(&self) -> PureState {
        PureState::from_bloch_angles(self.theta, self.phi)
    }

    pub fn bloch(&self) -> BlochVector {
        BlochVector::from_angles(self.theta, self.phi)
    }
}

/// `|B₁₁⟩_AB ⊗ |ψ_in⟩_C` on qubits `A, B, C`.
pub fn teleportation_state(in_state: &InStateSpec) -> PureState {
    tensor(&BellLabel::B11.state(), &in_state.state()).expect("three qubits")
}

const ALICE_PAIR: [usize; 2] = [0, 2];
const BOB_QUBIT: usize = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct ActiveTeleportation {
    pub alice_outcome: BellLabel,
    pub out_state: PureState,
    pub fidelity: f64,
}

impl ActiveTeleportation {
    pub fn into_record(self, trial_index: u64) -> TrialRecord {
        let mut r = TrialRecord::new(trial_index, ProtocolKind::TeleportActive);
        r.alice = Some(AgentResult::new("bell_basis", Outcome::Bell(self.alice_outcome)));
        r.bob_bloch = self.out_state.to_density().bloch_vector().ok();
        r.fidelity = Some(self.fidelity);
        r.event_refs = r.default_event_refs();
        r
    }
}

/// Bell measurement on `(A, C)`, then Bob applies `σ_{x̄, x⊕y}` to `B`.
pub fn teleport_active<R: Rng + ?Sized>(
    in_state: &InStateSpec,
    rng: &mut R,
) -> Result<ActiveTeleportation, ProtocolError> {
    let psi0 = teleportation_state(in_state);
    let m = ProjectorSet::bell().embed(&ALICE_PAIR, 3)?.sample(&psi0, rng.random())?;
    let label = BellLabel::from_index(m.outcome);
    let corrected = apply_local(&m.post_state, label.correction().observable().matrix(), &[BOB_QUBIT])?;
    let out_state = corrected.factor_out(&ALICE_PAIR, &label.state())?;
    let fidelity = out_state.overlap(&in_state.state())?;
    Ok(ActiveTeleportation {
        alice_outcome: label,
        out_state,
        fidelity,
    })
}

/// Bob measures `B` directly (no correction), possibly before Alice's Bell
/// measurement; the correction is applied later in data analysis.
#[derive(Clone, Debug)]
pub struct PassiveTeleportation {
    in_state: InStateSpec,
    bob_plan: MeasurementPlan,
    experiment: Experiment,
}

impl PassiveTeleportation {
    pub fn new(in_state: InStateSpec, bob_plan: MeasurementPlan) -> Result<Self, ProtocolError> {
        let bob_plan = bob_plan.with_agent(Agent::Bob);
        let alice = Party::new(
            Agent::Alice,
            vec![PartySetting::new(
                "bell_basis",
                1.0,
                ProjectorSet::bell().embed(&ALICE_PAIR, 3)?,
                OutcomeKind::Bell,
            )],
        );
        let experiment = Experiment::new(teleportation_state(&in_state), vec![alice, bob_plan.party(BOB_QUBIT, 3)?])?;
        Ok(Self {
            in_state,
            bob_plan,
            experiment,
        })
    }

    pub fn in_state(&self) -> &InStateSpec {
        &self.in_state
    }

    pub fn trial<R: Rng + ?Sized>(
        &self,
        trial_index: u64,
        ordering: &OrderingScenario,
        rng: &mut R,
    ) -> Result<TrialRecord, ProtocolError> {
        let choices = [0, self.bob_plan.choose(trial_index, rng.random())];
        let outcomes = self.experiment.sample(&choices, ordering, rng)?;
        Ok(record_from(
            TrialRecord::new(trial_index, ProtocolKind::TeleportPassive),
            outcomes,
            ordering,
        ))
    }
}

impl JointDistribution for PassiveTeleportation {
    fn agents(&self) -> Vec<Agent> {
        self.experiment.agents()
    }

    fn joint_table(&self, ordering: &OrderingScenario) -> Result<JointTable, ProtocolError> {
        self.experiment.joint_table(ordering)
    }
}

pub fn teleport_passive_trial<R: Rng + ?Sized>(
    in_state: &InStateSpec,
    bob_plan: &MeasurementPlan,
    ordering: &OrderingScenario,
    trial_index: u64,
    rng: &mut R,
) -> Result<TrialRecord, ProtocolError> {
    PassiveTeleportation::new(*in_state, bob_plan.clone())?.trial(trial_index, ordering, rng)
}

/// Bob's uncorrected Bloch vector given that Alice found `condition`:
/// `⟨B|Tr_B-complement[σ_μ ρ₀]|B⟩ / ⟨B|Tr ρ₀|B⟩` for each axis.
pub fn exact_conditional_bloch(in_state: &InStateSpec, condition: BellLabel) -> Result<BlochVector, ProtocolError> {
    let psi0 = teleportation_state(in_state);
    let (post, _) = ProjectorSet::bell()
        .embed(&ALICE_PAIR, 3)?
        .project(&psi0, condition.index())?
        .ok_or_else(|| ProtocolError::ZeroProbability(condition.to_string()))?;
    Ok(post.to_density().partial_trace(&[BOB_QUBIT])?.bloch_vector()?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalExpectation {
    pub setting: String,
    pub sampled: EstimateWithError,
    pub exact: f64,
}

/// Bob's raw `⟨σ_μ⟩` per setting over accepted records where Alice found
/// `condition`, next to the exact conditional values.
pub fn conditional_bob_expectations(
    records: &[TrialRecord],
    condition: BellLabel,
    in_state: &InStateSpec,
) -> Result<Vec<ConditionalExpectation>, ProtocolError> {
    let exact = exact_conditional_bloch(in_state, condition)?.components();
    PAULI_SETTINGS
        .iter()
        .zip(exact)
        .map(|(name, exact)| {
            let mut sum = 0i64;
            let mut n = 0u64;
            for r in records.iter().filter(|r| r.accepted) {
                let alice_ok = matches!(r.alice.as_ref().map(|a| &a.outcome), Some(Outcome::Bell(l)) if *l == condition);
                if let (true, Some(b)) = (alice_ok, &r.bob) {
                    if let (true, Outcome::Sign(s)) = (b.setting == *name, &b.outcome) {
                        sum += *s as i64;
                        n += 1;
                    }
                }
            }
            if n == 0 {
                return Err(ProtocolError::EmptyBin(format!("{condition} / {name}")));
            }
            let mean = sum as f64 / n as f64;
            Ok(ConditionalExpectation {
                setting: name.to_string(),
                sampled: EstimateWithError {
                    value: mean,
                    stderr: ((1.0 - mean * mean).max(0.0) / n as f64).sqrt(),
                    n,
                },
                exact,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::derive_stream;

    #[test]
    fn in_state_validation() {
        assert!(InStateSpec::new(-0.1, 0.0).is_err());
        assert!(InStateSpec::new(0.5, TAU).is_err());
        let s = InStateSpec::new(1.0, 2.0).unwrap();
        assert!((s.alpha().norm_sqr() + s.beta().norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn north_pole_teleports_to_zero() {
        let s = InStateSpec::new(0.0, 0.0).unwrap();
        for i in 0..64 {
            let t = teleport_active(&s, &mut derive_stream(3, i)).unwrap();
            assert!((t.out_state.overlap(&PureState::basis(1, 0).unwrap()).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn active_record_carries_fidelity() {
        let s = InStateSpec::new(2.0, 1.0).unwrap();
        let r = teleport_active(&s, &mut derive_stream(3, 0)).unwrap().into_record(0);
        assert!((r.fidelity.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(r.event_refs, vec!["MA-0".to_string()]);
        assert!(r.bob.is_none());
    }

    #[test]
    fn empty_condition_bin_is_an_error() {
        let s = InStateSpec::new(1.0, 1.0).unwrap();
        let r = conditional_bob_expectations(&[], BellLabel::B11, &s);
        assert!(matches!(r, Err(ProtocolError::EmptyBin(_))));
    }
}
