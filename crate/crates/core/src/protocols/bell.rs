use rand::Rng;

use crate::qcore::BellLabel;

use super::experiment::record_from;
use super::{
    Agent, Experiment, JointDistribution, JointTable, MeasurementPlan, OrderingScenario, ProtocolError,
    ProtocolKind, TrialRecord,
};

/// Alice and Bob measuring ±1 observables on the two halves of `|B_xy⟩`.
#[derive(Clone, Debug)]
pub struct BellTest {
    label: BellLabel,
    plan_a: MeasurementPlan,
    plan_b: MeasurementPlan,
    experiment: Experiment,
}

impl BellTest {
    pub fn new(label: BellLabel, plan_a: MeasurementPlan, plan_b: MeasurementPlan) -> Result<Self, ProtocolError> {
        let plan_a = plan_a.with_agent(Agent::Alice);
        let plan_b = plan_b.with_agent(Agent::Bob);
        let experiment = Experiment::new(label.state(), vec![plan_a.party(0, 2)?, plan_b.party(1, 2)?])?;
        Ok(Self {
            label,
            plan_a,
            plan_b,
            experiment,
        })
    }

    /// The Appendix-style CHSH configuration on the singlet.
    pub fn chsh() -> Self {
        Self::new(BellLabel::B11, MeasurementPlan::chsh_alice(), MeasurementPlan::chsh_bob()).expect("valid")
    }

    pub fn label(&self) -> BellLabel {
        self.label
    }

    pub fn trial<R: Rng + ?Sized>(
        &self,
        trial_index: u64,
        ordering: &OrderingScenario,
        rng: &mut R,
    ) -> Result<TrialRecord, ProtocolError> {
        let choices = [
            self.plan_a.choose(trial_index, rng.random()),
            self.plan_b.choose(trial_index, rng.random()),
        ];
        let outcomes = self.experiment.sample(&choices, ordering, rng)?;
        Ok(record_from(TrialRecord::new(trial_index, ProtocolKind::Bell), outcomes, ordering))
    }
}

impl JointDistribution for BellTest {
    fn agents(&self) -> Vec<Agent> {
        self.experiment.agents()
    }

    fn joint_table(&self, ordering: &OrderingScenario) -> Result<JointTable, ProtocolError> {
        self.experiment.joint_table(ordering)
    }
}

/// One Bell-test trial with Alice measuring first.
pub fn bell_trial<R: Rng + ?Sized>(
    state_label: BellLabel,
    plan_a: &MeasurementPlan,
    plan_b: &MeasurementPlan,
    trial_index: u64,
    rng: &mut R,
) -> Result<TrialRecord, ProtocolError> {
    BellTest::new(state_label, plan_a.clone(), plan_b.clone())?.trial(trial_index, &OrderingScenario::alice_first(), rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::derive_stream;
    use crate::protocols::{chsh_from_table, Outcome, Setting};
    use crate::qcore::Observable;
    use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

    #[test]
    fn singlet_zz_always_opposite() {
        let z = |a| MeasurementPlan::single(a, Setting::of(Observable::sigma_z())).unwrap();
        let test = BellTest::new(BellLabel::B11, z(Agent::Alice), z(Agent::Bob)).unwrap();
        for i in 0..500 {
            let r = test.trial(i, &OrderingScenario::alice_first(), &mut derive_stream(1, i)).unwrap();
            let (Outcome::Sign(a), Outcome::Sign(b)) = (&r.alice.unwrap().outcome, &r.bob.unwrap().outcome) else {
                panic!()
            };
            assert_eq!(a * b, -1);
        }
    }

    #[test]
    fn exact_chsh_terms() {
        let t = BellTest::chsh().joint_table(&OrderingScenario::alice_first()).unwrap();
        assert!((t.total() - 1.0).abs() < 1e-12);
        assert!((chsh_from_table(&t, None).unwrap() - 2.0 * SQRT_2).abs() < 1e-12);
        // ⟨Q_A Q_B⟩ alone, from the QQ block
        let qq = |same: bool| {
            t.probability_where(|k| {
                k[0].1 == "Q" && k[1].1 == "Q" && ((k[0].2 == k[1].2) == same)
            })
        };
        let e_qq = (qq(true) - qq(false)) / (qq(true) + qq(false));
        assert!((e_qq - FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn free_function_matches_driver() {
        let a = MeasurementPlan::chsh_alice();
        let b = MeasurementPlan::chsh_bob();
        let r1 = bell_trial(BellLabel::B11, &a, &b, 9, &mut derive_stream(5, 9)).unwrap();
        let r2 = BellTest::chsh().trial(9, &OrderingScenario::alice_first(), &mut derive_stream(5, 9)).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(r1.event_refs, vec!["MA-9".to_string(), "MB-9".to_string()]);
    }
}
