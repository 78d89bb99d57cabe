use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::qcore::{
    embed, operator_partial_trace, tensor, BellLabel, CMatrix, DensityMatrix, Observable, ProjectorSet, PureState,
};

use super::experiment::{record_from, OutcomeKind, PartySetting};
use super::{
    Agent, Experiment, JointDistribution, JointTable, MeasurementPlan, OrderingScenario, Party, ProtocolError,
    ProtocolKind, TrialRecord,
};

const A: usize = 0;
const B: usize = 2;
const DIANA_PAIR: [usize; 2] = [1, 3];

/// `|B₀₁⟩_Aa ⊗ |B₀₁⟩_Bb` on qubits `A, a, B, b`.
pub fn double_pair_state() -> PureState {
    tensor(&BellLabel::B01.state(), &BellLabel::B01.state()).expect("four qubits")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DianaBasis {
    #[serde(rename = "bell_basis")]
    Bell,
    /// Computational basis of `(a, b)`.
    #[serde(rename = "product_basis")]
    Product,
}

impl DianaBasis {
    pub fn name(self) -> &'static str {
        match self {
            Self::Bell => "bell_basis",
            Self::Product => "product_basis",
        }
    }

    fn projectors(self) -> ProjectorSet {
        match self {
            Self::Bell => ProjectorSet::bell(),
            Self::Product => ProjectorSet::computational(2).expect("two qubits"),
        }
    }
}

impl fmt::Display for DianaBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DianaBasis {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bell_basis" | "bell" => Ok(Self::Bell),
            "product_basis" | "product" => Ok(Self::Product),
            _ => Err(ProtocolError::InvalidPlan(format!("unknown Diana basis {s}"))),
        }
    }
}

/// Diana's Bell (or product) measurement on `(a, b)` with Alice and Bob
/// measuring `A` and `B`.
#[derive(Clone, Debug)]
pub struct EntanglementSwap {
    diana_basis: DianaBasis,
    plan_a: MeasurementPlan,
    plan_b: MeasurementPlan,
    experiment: Experiment,
}

impl EntanglementSwap {
    pub fn new(
        diana_basis: DianaBasis,
        plan_a: MeasurementPlan,
        plan_b: MeasurementPlan,
    ) -> Result<Self, ProtocolError> {
        let plan_a = plan_a.with_agent(Agent::Alice);
        let plan_b = plan_b.with_agent(Agent::Bob);
        let kind = match diana_basis {
            DianaBasis::Bell => OutcomeKind::Bell,
            DianaBasis::Product => OutcomeKind::Product,
        };
        let diana = Party::new(
            Agent::Diana,
            vec![PartySetting::new(
                diana_basis.name(),
                1.0,
                diana_basis.projectors().embed(&DIANA_PAIR, 4)?,
                kind,
            )],
        );
        let experiment = Experiment::new(
            double_pair_state(),
            vec![plan_a.party(A, 4)?, plan_b.party(B, 4)?, diana],
        )?;
        Ok(Self {
            diana_basis,
            plan_a,
            plan_b,
            experiment,
        })
    }

    /// CHSH settings for Alice and Bob, Bell basis for Diana.
    pub fn chsh() -> Self {
        Self::new(DianaBasis::Bell, MeasurementPlan::chsh_alice(), MeasurementPlan::chsh_bob()).expect("valid")
    }

    pub fn diana_basis(&self) -> DianaBasis {
        self.diana_basis
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
            0,
        ];
        let outcomes = self.experiment.sample(&choices, ordering, rng)?;
        Ok(record_from(TrialRecord::new(trial_index, ProtocolKind::Swap), outcomes, ordering))
    }
}

impl JointDistribution for EntanglementSwap {
    fn agents(&self) -> Vec<Agent> {
        self.experiment.agents()
    }

    fn joint_table(&self, ordering: &OrderingScenario) -> Result<JointTable, ProtocolError> {
        self.experiment.joint_table(ordering)
    }
}

pub fn swap_run<R: Rng + ?Sized>(
    ordering: &OrderingScenario,
    diana_basis: DianaBasis,
    plan_a: &MeasurementPlan,
    plan_b: &MeasurementPlan,
    trial_index: u64,
    rng: &mut R,
) -> Result<TrialRecord, ProtocolError> {
    EntanglementSwap::new(diana_basis, plan_a.clone(), plan_b.clone())?.trial(trial_index, ordering, rng)
}

/// Exact CHSH value of the swapping experiment, optionally conditioned on Diana.
pub fn swap_chsh_exact(post_select: Option<BellLabel>) -> Result<f64, ProtocolError> {
    let table = EntanglementSwap::chsh().joint_table(&"MD-MA-MB".parse()?)?;
    super::chsh_from_table(&table, post_select)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChshChoice {
    Q,
    P,
}

impl ChshChoice {
    fn alice(self) -> Observable {
        match self {
            Self::Q => Observable::sigma_z(),
            Self::P => Observable::sigma_x(),
        }
    }

    fn bob(self) -> Observable {
        match self {
            Self::Q => Observable::sigma_plus().negated(),
            Self::P => Observable::sigma_minus(),
        }
    }
}

/// `⟨B_i|Tr_AB[O_A O_B ρ₀]|B_j⟩` with `i, j` running over `B₀₀ … B₁₁` of `(a, b)`.
pub fn delayed_choice_matrix(first: ChshChoice, second: ChshChoice) -> Result<[[f64; 4]; 4], ProtocolError> {
    let rho0 = double_pair_state().to_density();
    let oa = embed(first.alice().matrix(), &[A], 4)?;
    let ob = embed(second.bob().matrix(), &[B], 4)?;
    let reduced = operator_partial_trace(&(oa * ob * rho0.matrix()), 4, &DIANA_PAIR)?;
    let bells: Vec<CMatrix> = BellLabel::ALL.iter().map(|l| column(&l.state())).collect();
    let mut out = [[0.0; 4]; 4];
    for (i, bi) in bells.iter().enumerate() {
        for (j, bj) in bells.iter().enumerate() {
            let v = (bi.adjoint() * &reduced * bj)[(0, 0)];
            if v.im.abs() > crate::qcore::ALGEBRAIC_TOL {
                return Err(crate::qcore::QError::ImaginaryExpectation(v.im).into());
            }
            out[i][j] = v.re;
        }
    }
    Ok(out)
}

fn column(s: &PureState) -> CMatrix {
    CMatrix::from_column_slice(s.dim(), 1, s.amplitudes())
}

/// The CHSH combination of the four delayed-choice matrices and the value it
/// implies once Diana's `B₁₁` outcome is post-selected.
pub fn delayed_choice_chsh() -> Result<([[f64; 4]; 4], f64), ProtocolError> {
    use ChshChoice::{P, Q};
    let mut sum = [[0.0; 4]; 4];
    for (a, b, coef) in [(Q, Q, 1.0), (P, Q, 1.0), (P, P, 1.0), (Q, P, -1.0)] {
        let m = delayed_choice_matrix(a, b)?;
        for i in 0..4 {
            for j in 0..4 {
                sum[i][j] += coef * m[i][j];
            }
        }
    }
    let rho1 = DensityMatrix::from_pure(&double_pair_state()).partial_trace(&DIANA_PAIR)?;
    let b11 = column(&BellLabel::B11.state());
    let weight = (b11.adjoint() * rho1.matrix() * &b11)[(0, 0)].re;
    let k = BellLabel::B11.index();
    Ok((sum, sum[k][k] / weight))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DianaOutcome {
    Bell(BellLabel),
    /// Computational basis index of `(a, b)`, `a` first.
    Product(usize),
}

/// State of `A` after Bob measures `bob_setting` and Diana then obtains
/// `diana`. With `bob_outcome: None` Bob's result is not read, so Diana acts
/// on `Tr_B ρ₀`; with `Some(±1)` the history is conditioned on it as well.
pub fn moving_observer_reduced_state(
    bob_setting: &Observable,
    bob_outcome: Option<i8>,
    diana: DianaOutcome,
) -> Result<DensityMatrix, ProtocolError> {
    let bob_branches: Vec<usize> = match bob_outcome {
        None => vec![0, 1],
        Some(1) => vec![0],
        Some(-1) => vec![1],
        Some(_) => return Err(crate::qcore::QError::NotPlusMinusOne.into()),
    };
    let (basis, k_diana) = match diana {
        DianaOutcome::Bell(l) => (DianaBasis::Bell, l.index()),
        DianaOutcome::Product(k) if k < 4 => (DianaBasis::Product, k),
        DianaOutcome::Product(k) => {
            return Err(ProtocolError::InvalidPlan(format!("product outcome {k} out of range")))
        }
    };
    let bob = ProjectorSet::from_observable(bob_setting)?.embed(&[B], 4)?;
    let diana_basis = basis.projectors().embed(&DIANA_PAIR, 4)?;
    let psi0 = double_pair_state();
    let mut acc = CMatrix::zeros(2, 2);
    let mut total = 0.0;
    for k in bob_branches {
        let Some((after_bob, p_b)) = bob.project(&psi0, k)? else { continue };
        let Some((after_diana, p_d)) = diana_basis.project(&after_bob, k_diana)? else { continue };
        let w = p_b * p_d;
        acc += after_diana.to_density().partial_trace(&[A])?.matrix() * crate::qcore::C64::new(w, 0.0);
        total += w;
    }
    if total <= 0.0 {
        return Err(ProtocolError::ZeroProbability(format!("bob {bob_outcome:?}, diana {diana:?}")));
    }
    Ok(DensityMatrix::new(acc / crate::qcore::C64::new(total, 0.0))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    #[test]
    fn paper_corner_entries() {
        let s = 1.0 / (4.0 * SQRT_2);
        let qq = delayed_choice_matrix(ChshChoice::Q, ChshChoice::Q).unwrap();
        assert!((qq[0][0] + s).abs() < 1e-12);
        let qp = delayed_choice_matrix(ChshChoice::Q, ChshChoice::P).unwrap();
        assert!((qp[3][3] + s).abs() < 1e-12);
    }

    #[test]
    fn combination_gives_tsirelson() {
        let (sum, v) = delayed_choice_chsh().unwrap();
        assert!((sum[3][3] - 1.0 / SQRT_2).abs() < 1e-12);
        assert!((v - 2.0 * SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn exact_chsh_with_and_without_post_selection() {
        assert!((swap_chsh_exact(Some(BellLabel::B11)).unwrap() - 2.0 * SQRT_2).abs() < 1e-12);
        assert!(swap_chsh_exact(None).unwrap().abs() < 1e-12);
    }

    #[test]
    fn bell_outcomes_leave_a_maximally_mixed() {
        for l in BellLabel::ALL {
            for obs in [Observable::sigma_z(), Observable::sigma_minus()] {
                let rho = moving_observer_reduced_state(&obs, None, DianaOutcome::Bell(l)).unwrap();
                assert!(rho.distance(&DensityMatrix::maximally_mixed(1).unwrap()) < 1e-12);
                assert!((rho.purity() - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn product_outcome_leaves_a_pure() {
        let rho = moving_observer_reduced_state(&Observable::sigma_z(), None, DianaOutcome::Product(1)).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reading_bob_purifies_a() {
        // b has collapsed, so Diana's Bell measurement teleports it onto A
        for s in [1, -1] {
            let rho = moving_observer_reduced_state(&Observable::sigma_z(), Some(s), DianaOutcome::Bell(BellLabel::B11))
                .unwrap();
            assert!((rho.purity() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn basis_names_round_trip() {
        for b in [DianaBasis::Bell, DianaBasis::Product] {
            assert_eq!(b.name().parse::<DianaBasis>().unwrap(), b);
            assert_eq!(serde_json::to_string(&b).unwrap(), format!("\"{}\"", b.name()));
        }
    }
}
