use crate::qcore::{Observable, ProjectorSet};

use super::experiment::{OutcomeKind, Party, PartySetting};
use super::{Agent, ProtocolError};
use crate::qcore::ALGEBRAIC_TOL;

#[derive(Clone, Debug, PartialEq)]
pub struct Setting {
    pub name: String,
    pub observable: Observable,
}

impl Setting {
    pub fn new(name: impl Into<String>, observable: Observable) -> Self {
        Self {
            name: name.into(),
            observable,
        }
    }

    /// Named after the observable's own label.
    pub fn of(observable: Observable) -> Self {
        Self::new(observable.label().to_string(), observable)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Schedule {
    /// Independent per-trial choice with these weights.
    Random { weights: Vec<f64> },
    /// Setting `sequence[trial_index % len]`.
    Fixed { sequence: Vec<usize> },
}

/// Which single-qubit ±1 observables an agent measures and how one is chosen per trial.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementPlan {
    agent: Agent,
    settings: Vec<Setting>,
    schedule: Schedule,
}

impl MeasurementPlan {
    pub fn new(agent: Agent, settings: Vec<Setting>, schedule: Schedule) -> Result<Self, ProtocolError> {
        if settings.is_empty() {
            return Err(ProtocolError::InvalidPlan("no settings".into()));
        }
        for s in &settings {
            if s.observable.n_qubits() != 1 || !s.observable.is_plus_minus_one() {
                return Err(ProtocolError::InvalidPlan(format!(
                    "setting {} is not a single-qubit ±1 observable",
                    s.name
                )));
            }
        }
        match &schedule {
            Schedule::Random { weights } => {
                if weights.len() != settings.len() || weights.iter().any(|w| !(*w >= 0.0)) {
                    return Err(ProtocolError::InvalidPlan("one non-negative weight per setting".into()));
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > ALGEBRAIC_TOL {
                    return Err(ProtocolError::InvalidPlan(format!("weights sum to {total}")));
                }
            }
            Schedule::Fixed { sequence } => {
                if sequence.is_empty() || sequence.iter().any(|&k| k >= settings.len()) {
                    return Err(ProtocolError::InvalidPlan("fixed sequence empty or out of range".into()));
                }
            }
        }
        Ok(Self {
            agent,
            settings,
            schedule,
        })
    }

    pub fn uniform(agent: Agent, settings: Vec<Setting>) -> Result<Self, ProtocolError> {
        let w = 1.0 / settings.len().max(1) as f64;
        let weights = vec![w; settings.len()];
        Self::new(agent, settings, Schedule::Random { weights })
    }

    pub fn single(agent: Agent, setting: Setting) -> Result<Self, ProtocolError> {
        Self::new(agent, vec![setting], Schedule::Random { weights: vec![1.0] })
    }

    /// Alice's CHSH pair `Q = σ_z`, `P = σ_x`, chosen uniformly.
    pub fn chsh_alice() -> Self {
        let s = vec![
            Setting::new("Q", Observable::sigma_z()),
            Setting::new("P", Observable::sigma_x()),
        ];
        Self::uniform(Agent::Alice, s).expect("valid plan")
    }

    /// Bob's CHSH pair `Q = −σ_+`, `P = σ_−`, chosen uniformly.
    pub fn chsh_bob() -> Self {
        let s = vec![
            Setting::new("Q", Observable::sigma_plus().negated()),
            Setting::new("P", Observable::sigma_minus()),
        ];
        Self::uniform(Agent::Bob, s).expect("valid plan")
    }

    /// Uniform over `σ_x, σ_y, σ_z`, named by their labels.
    pub fn pauli_uniform(agent: Agent) -> Self {
        let s = vec![
            Setting::of(Observable::sigma_x()),
            Setting::of(Observable::sigma_y()),
            Setting::of(Observable::sigma_z()),
        ];
        Self::uniform(agent, s).expect("valid plan")
    }

    pub fn agent(&self) -> Agent {
        self.agent
    }

    pub fn settings(&self) -> &[Setting] {
        &self.settings
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn with_agent(mut self, agent: Agent) -> Self {
        self.agent = agent;
        self
    }

    /// Setting index for a trial; `draw` is only consulted by random schedules.
    pub fn choose(&self, trial_index: u64, draw: f64) -> usize {
        match &self.schedule {
            Schedule::Random { weights } => crate::qcore::select_outcome(weights, draw),
            Schedule::Fixed { sequence } => sequence[(trial_index % sequence.len() as u64) as usize],
        }
    }

    /// Long-run setting frequencies, used to weight exact tables.
    pub fn table_weights(&self) -> Vec<f64> {
        match &self.schedule {
            Schedule::Random { weights } => weights.clone(),
            Schedule::Fixed { sequence } => {
                let mut w = vec![0.0; self.settings.len()];
                for &k in sequence {
                    w[k] += 1.0 / sequence.len() as f64;
                }
                w
            }
        }
    }

    pub(crate) fn party(&self, target: usize, n: usize) -> Result<Party, ProtocolError> {
        let weights = self.table_weights();
        let settings = self
            .settings
            .iter()
            .zip(weights)
            .map(|(s, w)| {
                let basis = ProjectorSet::from_observable(&s.observable)?.embed(&[target], n)?;
                Ok(PartySetting::new(s.name.clone(), w, basis, OutcomeKind::Sign))
            })
            .collect::<Result<Vec<_>, ProtocolError>>()?;
        Ok(Party::new(self.agent, settings))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_must_sum_to_one() {
        let s = vec![Setting::of(Observable::sigma_x()), Setting::of(Observable::sigma_z())];
        let r = MeasurementPlan::new(Agent::Bob, s.clone(), Schedule::Random { weights: vec![0.5, 0.6] });
        assert!(matches!(r, Err(ProtocolError::InvalidPlan(_))));
        let r = MeasurementPlan::new(Agent::Bob, s, Schedule::Fixed { sequence: vec![] });
        assert!(matches!(r, Err(ProtocolError::InvalidPlan(_))));
    }

    #[test]
    fn fixed_sequence_cycles() {
        let s = vec![Setting::of(Observable::sigma_x()), Setting::of(Observable::sigma_z())];
        let p = MeasurementPlan::new(Agent::Bob, s, Schedule::Fixed { sequence: vec![1, 1, 0] }).unwrap();
        let picks: Vec<usize> = (0..6).map(|i| p.choose(i, 0.99)).collect();
        assert_eq!(picks, vec![1, 1, 0, 1, 1, 0]);
        let w = p.table_weights();
        assert!((w[0] - 1.0 / 3.0).abs() < 1e-15 && (w[1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_two_qubit_settings() {
        let zz = Observable::sigma_z().kron(&Observable::sigma_z()).unwrap();
        assert!(MeasurementPlan::single(Agent::Alice, Setting::of(zz)).is_err());
    }
}
