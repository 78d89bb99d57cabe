use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::qcore::{BellLabel, BlochVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Agent {
    Alice,
    Bob,
    Diana,
}

impl Agent {
    pub const ALL: [Agent; 3] = [Agent::Alice, Agent::Bob, Agent::Diana];

    /// Measurement-event name used in orderings (`MA`, `MB`, `MD`).
    pub fn event_name(self) -> &'static str {
        match self {
            Agent::Alice => "MA",
            Agent::Bob => "MB",
            Agent::Diana => "MD",
        }
    }

    pub fn from_event_name(s: &str) -> Option<Self> {
        match s {
            "MA" | "M_A" | "A" => Some(Agent::Alice),
            "MB" | "M_B" | "B" => Some(Agent::Bob),
            "MD" | "M_D" | "D" => Some(Agent::Diana),
            _ => None,
        }
    }
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Agent::Alice => "alice",
            Agent::Bob => "bob",
            Agent::Diana => "diana",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    Bell,
    TeleportActive,
    TeleportPassive,
    Swap,
    Lhv,
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok();
        f.write_str(s.as_ref().and_then(|v| v.as_str()).unwrap_or("?"))
    }
}

/// One agent's recorded result: a ±1 value, a Bell label, or a product-basis bit string.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Outcome {
    Sign(i8),
    Bell(BellLabel),
    Product(String),
}

impl Outcome {
    pub fn label(&self) -> String {
        match self {
            Outcome::Sign(1) => "+1".into(),
            Outcome::Sign(_) => "-1".into(),
            Outcome::Bell(l) => l.to_string(),
            Outcome::Product(s) => s.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentResult {
    pub setting: String,
    pub outcome: Outcome,
}

impl AgentResult {
    pub fn new(setting: impl Into<String>, outcome: Outcome) -> Self {
        Self {
            setting: setting.into(),
            outcome,
        }
    }
}

/// One run of a protocol: settings and outcomes per agent plus annotations.
///
/// `accepted` is an annotation set by post-selection policies; nothing ever
/// removes or rewrites the outcomes of a rejected record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub protocol: ProtocolKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ordering: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alice: Option<AgentResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bob: Option<AgentResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diana: Option<AgentResult>,
    /// Detector name to tag time in seconds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detection_times: Option<BTreeMap<String, f64>>,
    /// Bob's post-correction Bloch vector when it is tracked per trial.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bob_bloch: Option<BlochVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
    #[serde(default)]
    pub event_refs: Vec<String>,
    pub accepted: bool,
}

impl TrialRecord {
    pub fn new(trial_index: u64, protocol: ProtocolKind) -> Self {
        Self {
            trial_index,
            protocol,
            ordering: None,
            alice: None,
            bob: None,
            diana: None,
            detection_times: None,
            bob_bloch: None,
            fidelity: None,
            event_refs: Vec::new(),
            accepted: true,
        }
    }

    pub fn result(&self, agent: Agent) -> Option<&AgentResult> {
        match agent {
            Agent::Alice => self.alice.as_ref(),
            Agent::Bob => self.bob.as_ref(),
            Agent::Diana => self.diana.as_ref(),
        }
    }

    pub(crate) fn set_result(&mut self, agent: Agent, r: AgentResult) {
        match agent {
            Agent::Alice => self.alice = Some(r),
            Agent::Bob => self.bob = Some(r),
            Agent::Diana => self.diana = Some(r),
        }
    }

    /// Ids of this trial's measurement events, `MA-<index>` etc.
    pub fn default_event_refs(&self) -> Vec<String> {
        Agent::ALL
            .iter()
            .filter(|a| self.result(**a).is_some())
            .map(|a| event_id(*a, self.trial_index))
            .collect()
    }

    /// False when a Bell outcome in the record is one a linear-optics analyzer
    /// cannot resolve (`B00`, `B01`).
    pub fn passes_bell_mask(&self) -> bool {
        [&self.alice, &self.diana].iter().all(|r| {
            !matches!(
                r.as_ref().map(|r| &r.outcome),
                Some(Outcome::Bell(l)) if *l == BellLabel::B00 || *l == BellLabel::B01
            )
        })
    }
}

pub fn event_id(agent: Agent, trial_index: u64) -> String {
    format!("{}-{trial_index}", agent.event_name())
}
