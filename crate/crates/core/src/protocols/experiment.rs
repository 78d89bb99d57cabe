//! Sequential-conditioning engine shared by every protocol driver.
//!
//! A measurement order is executed as repeated projection and
//! renormalization in that order. Exact joint tables enumerate every
//! setting choice and outcome branch; sampling walks a single branch using
//! one uniform draw per measurement.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::qcore::{BellLabel, EmbeddedBasis, PureState};

use super::{Agent, AgentResult, Outcome, ProtocolError, TrialRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutcomeKind {
    /// Outcome 0 is `+1`, outcome 1 is `−1`.
    Sign,
    /// Outcome `k` is `BellLabel::from_index(k)`.
    Bell,
    /// Outcome is the basis label itself.
    Product,
}

#[derive(Clone, Debug)]
pub struct PartySetting {
    pub name: String,
    pub weight: f64,
    basis: EmbeddedBasis,
    kind: OutcomeKind,
}

impl PartySetting {
    pub fn new(name: impl Into<String>, weight: f64, basis: EmbeddedBasis, kind: OutcomeKind) -> Self {
        Self {
            name: name.into(),
            weight,
            basis,
            kind,
        }
    }

    fn outcome(&self, k: usize) -> Outcome {
        match self.kind {
            OutcomeKind::Sign => Outcome::Sign(if k == 0 { 1 } else { -1 }),
            OutcomeKind::Bell => Outcome::Bell(BellLabel::from_index(k)),
            OutcomeKind::Product => Outcome::Product(self.basis.labels()[k].clone()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Party {
    pub agent: Agent,
    pub settings: Vec<PartySetting>,
}

impl Party {
    pub fn new(agent: Agent, settings: Vec<PartySetting>) -> Self {
        Self { agent, settings }
    }
}

/// Execution order of the measurement events, e.g. `MB-MD-MA`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OrderingScenario {
    order: Vec<Agent>,
    spacelike: bool,
}

impl OrderingScenario {
    pub fn new(order: Vec<Agent>) -> Result<Self, ProtocolError> {
        for (i, a) in order.iter().enumerate() {
            if order[..i].contains(a) {
                return Err(ProtocolError::InvalidOrdering(format!("{a} appears twice")));
            }
        }
        if order.is_empty() {
            return Err(ProtocolError::InvalidOrdering("empty ordering".into()));
        }
        Ok(Self {
            order,
            spacelike: true,
        })
    }

    /// Records whether the events were actually checked to be pairwise spacelike.
    pub fn with_spacelike(mut self, spacelike: bool) -> Self {
        self.spacelike = spacelike;
        self
    }

    pub fn order(&self) -> &[Agent] {
        &self.order
    }

    pub fn spacelike(&self) -> bool {
        self.spacelike
    }

    pub fn name(&self) -> String {
        self.order.iter().map(|a| a.event_name()).collect::<Vec<_>>().join("-")
    }

    /// Every permutation of `agents`, in lexicographic order of the input.
    pub fn permutations(agents: &[Agent]) -> Vec<Self> {
        fn go(rest: &mut Vec<Agent>, cur: &mut Vec<Agent>, out: &mut Vec<Vec<Agent>>) {
            if rest.is_empty() {
                out.push(cur.clone());
                return;
            }
            for i in 0..rest.len() {
                let a = rest.remove(i);
                cur.push(a);
                go(rest, cur, out);
                cur.pop();
                rest.insert(i, a);
            }
        }
        let mut out = Vec::new();
        go(&mut agents.to_vec(), &mut Vec::new(), &mut out);
        out.into_iter()
            .map(|order| Self {
                order,
                spacelike: true,
            })
            .collect()
    }

    /// The six orders of `{M_A, M_B, M_D}`.
    pub fn all_swap() -> Vec<Self> {
        Self::permutations(&Agent::ALL)
    }

    /// `M_A-M_B` and `M_B-M_A`.
    pub fn all_two_party() -> Vec<Self> {
        Self::permutations(&[Agent::Alice, Agent::Bob])
    }

    pub fn alice_first() -> Self {
        Self::new(vec![Agent::Alice, Agent::Bob]).expect("valid")
    }

    fn check_covers(&self, agents: &[Agent]) -> Result<Vec<usize>, ProtocolError> {
        if self.order.len() != agents.len() {
            return Err(ProtocolError::InvalidOrdering(format!(
                "{} does not order exactly {:?}",
                self.name(),
                agents
            )));
        }
        self.order
            .iter()
            .map(|a| {
                agents.iter().position(|b| b == a).ok_or_else(|| {
                    ProtocolError::InvalidOrdering(format!("{a} takes no part in this protocol"))
                })
            })
            .collect()
    }
}

impl fmt::Display for OrderingScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for OrderingScenario {
    type Err = ProtocolError;

    /// Accepts `MA-MB-MD`, `M_A,M_B,M_D` or the compact `ABD`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = if s.contains(['-', ',']) {
            s.split(['-', ',']).map(str::trim).collect()
        } else {
            s.as_bytes()
                .iter()
                .map(|b| std::str::from_utf8(std::slice::from_ref(b)).unwrap_or(""))
                .collect()
        };
        let order = parts
            .iter()
            .map(|p| Agent::from_event_name(p).ok_or_else(|| ProtocolError::InvalidOrdering(s.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(order)
    }
}

/// One `(agent, setting, outcome)` coordinate of a joint table key.
pub type TableEntry = (Agent, String, String);

/// Exact joint probabilities over settings × outcomes, keyed in agent order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct JointTable {
    probs: BTreeMap<Vec<TableEntry>, f64>,
}

impl JointTable {
    pub fn get(&self, key: &[TableEntry]) -> f64 {
        self.probs.get(key).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<TableEntry>, &f64)> {
        self.probs.iter()
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    /// Largest entrywise difference; keys missing on one side count as zero.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let a = self.probs.iter().map(|(k, v)| (v - other.get(k)).abs());
        let b = other.probs.iter().map(|(k, v)| (v - self.get(k)).abs());
        a.chain(b).fold(0.0, f64::max)
    }

    /// Sum of the entries whose key satisfies `pred`.
    pub fn probability_where(&self, pred: impl Fn(&[TableEntry]) -> bool) -> f64 {
        self.probs.iter().filter(|(k, _)| pred(k)).map(|(_, v)| v).sum()
    }

    fn add(&mut self, key: Vec<TableEntry>, p: f64) {
        *self.probs.entry(key).or_insert(0.0) += p;
    }
}

/// Anything that can produce an exact joint table for a measurement order.
pub trait JointDistribution {
    fn agents(&self) -> Vec<Agent>;
    fn joint_table(&self, ordering: &OrderingScenario) -> Result<JointTable, ProtocolError>;
}

/// One agent's sampled result inside a trial.
#[derive(Clone, Debug, PartialEq)]
pub struct PartyOutcome {
    pub agent: Agent,
    pub setting: String,
    pub outcome: Outcome,
    pub probability: f64,
}

/// A shared initial state measured by several agents on disjoint qubits.
#[derive(Clone, Debug)]
pub struct Experiment {
    state: PureState,
    parties: Vec<Party>,
}

impl Experiment {
    pub fn new(state: PureState, mut parties: Vec<Party>) -> Result<Self, ProtocolError> {
        parties.sort_by_key(|p| p.agent);
        for w in parties.windows(2) {
            if w[0].agent == w[1].agent {
                return Err(ProtocolError::InvalidPlan(format!("{} listed twice", w[0].agent)));
            }
        }
        for p in &parties {
            if p.settings.is_empty() {
                return Err(ProtocolError::InvalidPlan(format!("{} has no settings", p.agent)));
            }
        }
        Ok(Self { state, parties })
    }

    pub fn state(&self) -> &PureState {
        &self.state
    }

    pub fn parties(&self) -> &[Party] {
        &self.parties
    }

    /// Samples one branch: `choices[i]` is the setting index of party `i`
    /// (agent order); measurements run in `ordering`, each consuming one draw.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        choices: &[usize],
        ordering: &OrderingScenario,
        rng: &mut R,
    ) -> Result<Vec<PartyOutcome>, ProtocolError> {
        let order = ordering.check_covers(&self.agents())?;
        let mut state = self.state.clone();
        let mut results: Vec<Option<PartyOutcome>> = vec![None; self.parties.len()];
        for &pi in &order {
            let party = &self.parties[pi];
            let setting = &party.settings[choices[pi]];
            let m = setting.basis.sample(&state, rng.random::<f64>())?;
            results[pi] = Some(PartyOutcome {
                agent: party.agent,
                setting: setting.name.clone(),
                outcome: setting.outcome(m.outcome),
                probability: m.probability,
            });
            state = m.post_state;
        }
        Ok(results.into_iter().flatten().collect())
    }

    /// Draws each party's setting index from its weights.
    pub fn choose_settings<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        self.parties
            .iter()
            .map(|p| {
                let w: Vec<f64> = p.settings.iter().map(|s| s.weight).collect();
                crate::qcore::select_outcome(&w, rng.random::<f64>())
            })
            .collect()
    }

    #[allow(clippy::too_many_arguments)]
    fn enumerate(
        &self,
        order: &[usize],
        choices: &[usize],
        depth: usize,
        state: &PureState,
        prob: f64,
        outcomes: &mut Vec<usize>,
        table: &mut JointTable,
    ) -> Result<(), ProtocolError> {
        if depth == order.len() {
            let key = self
                .parties
                .iter()
                .enumerate()
                .map(|(pi, p)| {
                    let s = &p.settings[choices[pi]];
                    (p.agent, s.name.clone(), s.outcome(outcomes[pi]).label())
                })
                .collect();
            table.add(key, prob);
            return Ok(());
        }
        let pi = order[depth];
        let basis = &self.parties[pi].settings[choices[pi]].basis;
        for k in 0..basis.len() {
            if let Some((post, p)) = basis.project(state, k)? {
                outcomes[pi] = k;
                self.enumerate(order, choices, depth + 1, &post, prob * p, outcomes, table)?;
            }
        }
        Ok(())
    }
}

impl JointDistribution for Experiment {
    fn agents(&self) -> Vec<Agent> {
        self.parties.iter().map(|p| p.agent).collect()
    }

    fn joint_table(&self, ordering: &OrderingScenario) -> Result<JointTable, ProtocolError> {
        let order = ordering.check_covers(&self.agents())?;
        let mut table = JointTable::default();
        let mut choices = vec![0usize; self.parties.len()];
        loop {
            let w: f64 = self
                .parties
                .iter()
                .zip(&choices)
                .map(|(p, &c)| p.settings[c].weight)
                .product();
            if w > 0.0 {
                let mut outcomes = vec![0; self.parties.len()];
                self.enumerate(&order, &choices, 0, &self.state, w, &mut outcomes, &mut table)?;
            }
            // odometer over setting choices
            let mut i = 0;
            loop {
                if i == choices.len() {
                    return Ok(table);
                }
                choices[i] += 1;
                if choices[i] < self.parties[i].settings.len() {
                    break;
                }
                choices[i] = 0;
                i += 1;
            }
        }
    }
}

/// Exact joint tables of `protocol` for each ordering, in the given order.
pub fn ordering_equivalence_table<P: JointDistribution + ?Sized>(
    protocol: &P,
    orderings: &[OrderingScenario],
) -> Result<Vec<(OrderingScenario, JointTable)>, ProtocolError> {
    orderings
        .iter()
        .map(|o| Ok((o.clone(), protocol.joint_table(o)?)))
        .collect()
}

/// Largest pairwise table difference across a set of orderings.
pub fn max_ordering_spread(tables: &[(OrderingScenario, JointTable)]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in tables.iter().enumerate() {
        for b in &tables[i + 1..] {
            worst = worst.max(a.1.max_abs_diff(&b.1));
        }
    }
    worst
}

/// CHSH combination of Alice/Bob `Q`/`P` correlators read off an exact table,
/// conditioned on Diana's Bell label when `post_select` is given.
pub fn chsh_from_table(table: &JointTable, post_select: Option<BellLabel>) -> Result<f64, ProtocolError> {
    let diana_ok = |k: &[TableEntry]| match post_select {
        None => true,
        Some(l) => k.iter().any(|(a, _, o)| *a == Agent::Diana && *o == l.to_string()),
    };
    let setting_of = |k: &[TableEntry], agent: Agent| k.iter().find(|e| e.0 == agent).cloned();
    let mut value = 0.0;
    for (qa, qb, coef) in [("Q", "Q", 1.0), ("P", "Q", 1.0), ("P", "P", 1.0), ("Q", "P", -1.0)] {
        let sel = |k: &[TableEntry]| {
            diana_ok(k)
                && setting_of(k, Agent::Alice).is_some_and(|e| e.1 == qa)
                && setting_of(k, Agent::Bob).is_some_and(|e| e.1 == qb)
        };
        let norm = table.probability_where(sel);
        if norm <= 0.0 {
            return Err(ProtocolError::EmptyBin(format!("{qa}_A {qb}_B")));
        }
        let corr = table.probability_where(|k| {
            sel(k) && {
                let sa = setting_of(k, Agent::Alice).map(|e| e.2 == "+1");
                let sb = setting_of(k, Agent::Bob).map(|e| e.2 == "+1");
                sa == sb
            }
        });
        // P(same) - P(different)
        value += coef * (2.0 * corr - norm) / norm;
    }
    Ok(value)
}

/// Fills a record from sampled party outcomes.
pub(crate) fn record_from(
    mut record: TrialRecord,
    outcomes: Vec<PartyOutcome>,
    ordering: &OrderingScenario,
) -> TrialRecord {
    for o in outcomes {
        record.set_result(o.agent, AgentResult::new(o.setting, o.outcome));
    }
    record.ordering = Some(ordering.name());
    record.event_refs = record.default_event_refs();
    record
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_names_parse() {
        let o: OrderingScenario = "MB-MD-MA".parse().unwrap();
        assert_eq!(o.order(), &[Agent::Bob, Agent::Diana, Agent::Alice]);
        assert_eq!(o.name(), "MB-MD-MA");
        assert_eq!("ADB".parse::<OrderingScenario>().unwrap().name(), "MA-MD-MB");
        assert!("MA-MA".parse::<OrderingScenario>().is_err());
        assert!("MA-MX".parse::<OrderingScenario>().is_err());
    }

    #[test]
    fn six_swap_orderings() {
        let all = OrderingScenario::all_swap();
        assert_eq!(all.len(), 6);
        let mut names: Vec<String> = all.iter().map(|o| o.name()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 6);
        assert!(all.iter().all(|o| o.spacelike()));
    }
}
