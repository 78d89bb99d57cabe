//! Flat-spacetime bookkeeping for measurement events.
//!
//! Sign convention `s² = −c²Δt² + |Δx|²`: positive is spacelike. Boosts are
//! along a single axis, which is all the 1+1-dimensional layouts here need.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::protocols::{Agent, OrderingScenario, ProtocolKind, TrialRecord};

/// Speed of light, fixed at the rounded value the link estimates use.
pub const C: f64 = 3e8;

/// `|s²| < (c · 1 µs)²` counts as lightlike.
pub const DEFAULT_LIGHTLIKE_TOL_S: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SpacetimeError {
    #[error("boost speed {0} m/s is not below c")]
    Superluminal(f64),
    #[error("boost axis must be a nonzero finite vector")]
    BadAxis,
    #[error("event {0} has non-finite coordinates")]
    NonFinite(String),
    #[error("echo at {echo} s precedes emission at {emit} s")]
    EchoBeforeEmit { emit: f64, echo: f64 },
    #[error("trial {trial} refers to unknown event {id}")]
    UnresolvedRef { trial: u64, id: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EventTag {
    #[serde(rename = "M_A")]
    MA,
    #[serde(rename = "M_B")]
    MB,
    #[serde(rename = "M_D")]
    MD,
    #[serde(rename = "emission")]
    Emission,
    #[serde(rename = "reception")]
    Reception,
    #[serde(rename = "other")]
    Other,
}

impl EventTag {
    pub fn agent(self) -> Option<Agent> {
        match self {
            Self::MA => Some(Agent::Alice),
            Self::MB => Some(Agent::Bob),
            Self::MD => Some(Agent::Diana),
            _ => None,
        }
    }

    pub fn of_agent(agent: Agent) -> Self {
        match agent {
            Agent::Alice => Self::MA,
            Agent::Bob => Self::MB,
            Agent::Diana => Self::MD,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpacetimeEvent {
    pub id: String,
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub tag: EventTag,
}

impl SpacetimeEvent {
    pub fn new(id: impl Into<String>, t: f64, [x, y, z]: [f64; 3], tag: EventTag) -> Result<Self, SpacetimeError> {
        let id = id.into();
        if ![t, x, y, z].iter().all(|v| v.is_finite()) {
            return Err(SpacetimeError::NonFinite(id));
        }
        Ok(Self { id, t, x, y, z, tag })
    }

    /// Event on the x axis.
    pub fn on_line(id: impl Into<String>, t: f64, x: f64, tag: EventTag) -> Result<Self, SpacetimeError> {
        Self::new(id, t, [x, 0.0, 0.0], tag)
    }

    pub fn position(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

/// A bookkeeper moving at `speed` (m/s, signed) along the unit `axis`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    speed: f64,
    axis: [f64; 3],
}

impl Frame {
    pub fn new(speed: f64, axis: [f64; 3]) -> Result<Self, SpacetimeError> {
        if !(speed.abs() / C < 1.0 - 1e-12) {
            return Err(SpacetimeError::Superluminal(speed));
        }
        let n = axis.iter().map(|a| a * a).sum::<f64>().sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(SpacetimeError::BadAxis);
        }
        Ok(Self {
            speed,
            axis: axis.map(|a| a / n),
        })
    }

    /// Boost along the Alice–Bob line (x axis).
    pub fn along_x(speed: f64) -> Result<Self, SpacetimeError> {
        Self::new(speed, [1.0, 0.0, 0.0])
    }

    pub fn rest() -> Self {
        Self {
            speed: 0.0,
            axis: [1.0, 0.0, 0.0],
        }
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn axis(&self) -> [f64; 3] {
        self.axis
    }

    pub fn gamma(&self) -> f64 {
        let b = self.speed / C;
        1.0 / (1.0 - b * b).sqrt()
    }

    fn parallel(&self, p: [f64; 3]) -> f64 {
        p.iter().zip(self.axis).map(|(a, b)| a * b).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalKind {
    Timelike,
    Spacelike,
    Lightlike,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalClass {
    pub kind: IntervalKind,
    /// `−c²Δt² + |Δx|²` in m².
    pub s2: f64,
}

pub fn interval_squared(e1: &SpacetimeEvent, e2: &SpacetimeEvent) -> f64 {
    let dt = e2.t - e1.t;
    let dx: f64 = e1.position().iter().zip(e2.position()).map(|(a, b)| (b - a) * (b - a)).sum();
    dx - C * C * dt * dt
}

/// Classification with a lightlike band `|s²| < (c · tol_s)²`.
pub fn classify_with_tolerance(e1: &SpacetimeEvent, e2: &SpacetimeEvent, tol_s: f64) -> IntervalClass {
    let s2 = interval_squared(e1, e2);
    let band = (C * tol_s).powi(2);
    let kind = if s2.abs() < band {
        IntervalKind::Lightlike
    } else if s2 > 0.0 {
        IntervalKind::Spacelike
    } else {
        IntervalKind::Timelike
    };
    IntervalClass { kind, s2 }
}

pub fn classify(e1: &SpacetimeEvent, e2: &SpacetimeEvent) -> IntervalClass {
    classify_with_tolerance(e1, e2, DEFAULT_LIGHTLIKE_TOL_S)
}

/// `t′ = γ(t − v x_∥/c²)`.
pub fn boost_time(e: &SpacetimeEvent, frame: &Frame) -> f64 {
    frame.gamma() * (e.t - frame.speed * frame.parallel(e.position()) / (C * C))
}

/// The event in the moving frame's coordinates.
pub fn boost_event(e: &SpacetimeEvent, frame: &Frame) -> SpacetimeEvent {
    let g = frame.gamma();
    let par = frame.parallel(e.position());
    let shift = (g - 1.0) * par - g * frame.speed * e.t;
    let p = e.position();
    let n = frame.axis;
    SpacetimeEvent {
        id: e.id.clone(),
        t: boost_time(e, frame),
        x: p[0] + shift * n[0],
        y: p[1] + shift * n[1],
        z: p[2] + shift * n[2],
        tag: e.tag,
    }
}

/// Event ids sorted by boosted time; equal times fall back to id order.
pub fn ordering_under_frame(events: &[SpacetimeEvent], frame: &Frame) -> Vec<String> {
    let mut keyed: Vec<(f64, &str)> = events.iter().map(|e| (boost_time(e, frame), e.id.as_str())).collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
    keyed.into_iter().map(|(_, id)| id.to_string()).collect()
}

/// The measurement order a bookkeeper in `frame` reports, flagged spacelike
/// only if every pair of measurement events is spacelike separated.
pub fn measurement_ordering(events: &[SpacetimeEvent], frame: &Frame) -> Result<OrderingScenario, crate::protocols::ProtocolError> {
    let ms: Vec<&SpacetimeEvent> = events.iter().filter(|e| e.tag.agent().is_some()).collect();
    let by_id: BTreeMap<&str, &SpacetimeEvent> = ms.iter().map(|e| (e.id.as_str(), *e)).collect();
    let owned: Vec<SpacetimeEvent> = ms.iter().map(|e| (*e).clone()).collect();
    let order = ordering_under_frame(&owned, frame)
        .iter()
        .filter_map(|id| by_id[id.as_str()].tag.agent())
        .collect();
    let spacelike = ms
        .iter()
        .enumerate()
        .all(|(i, a)| ms[i + 1..].iter().all(|b| classify(a, b).kind == IntervalKind::Spacelike));
    Ok(OrderingScenario::new(order)?.with_spacelike(spacelike))
}

/// Radar time and distance from a signal's emission and echo readings.
pub fn radar_coordinates(emit_time: f64, echo_time: f64) -> Result<(f64, f64), SpacetimeError> {
    if echo_time < emit_time {
        return Err(SpacetimeError::EchoBeforeEmit {
            emit: emit_time,
            echo: echo_time,
        });
    }
    Ok((0.5 * (emit_time + echo_time), 0.5 * C * (echo_time - emit_time)))
}

/// Emission and echo readings that produce radar coordinates `(t, d)`.
pub fn radar_readings(t: f64, distance: f64) -> (f64, f64) {
    (t - distance / C, t + distance / C)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCertificate {
    pub first: Agent,
    pub second: Agent,
    pub certified: bool,
    pub pairs_checked: u64,
    /// The first non-spacelike pair found, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<(String, String, IntervalKind)>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CausalReport {
    pub certified: bool,
    pub pairs: Vec<PairCertificate>,
}

/// Whether every event of one agent's collection is spacelike to every event
/// of another's, for each pair of agents appearing in `records`.
pub fn certify_causal_independence(
    records: &[TrialRecord],
    events: &BTreeMap<String, SpacetimeEvent>,
) -> Result<CausalReport, SpacetimeError> {
    let mut by_agent: BTreeMap<Agent, Vec<&SpacetimeEvent>> = BTreeMap::new();
    for r in records {
        for id in &r.event_refs {
            let e = events.get(id).ok_or_else(|| SpacetimeError::UnresolvedRef {
                trial: r.trial_index,
                id: id.clone(),
            })?;
            if let Some(a) = e.tag.agent() {
                by_agent.entry(a).or_default().push(e);
            }
        }
    }
    let agents: Vec<Agent> = by_agent.keys().copied().collect();
    let mut pairs = Vec::new();
    for (i, &a) in agents.iter().enumerate() {
        for &b in &agents[i + 1..] {
            let mut checked = 0;
            let mut witness = None;
            'outer: for ea in &by_agent[&a] {
                for eb in &by_agent[&b] {
                    checked += 1;
                    let k = classify(ea, eb).kind;
                    if k != IntervalKind::Spacelike {
                        witness = Some((ea.id.clone(), eb.id.clone(), k));
                        break 'outer;
                    }
                }
            }
            pairs.push(PairCertificate {
                first: a,
                second: b,
                certified: witness.is_none(),
                pairs_checked: checked,
                witness,
            });
        }
    }
    Ok(CausalReport {
        certified: pairs.iter().all(|p| p.certified),
        pairs,
    })
}

/// Events and the records that refer to them.
#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    pub events: Vec<SpacetimeEvent>,
    pub records: Vec<TrialRecord>,
}

impl Layout {
    pub fn event_map(&self) -> BTreeMap<String, SpacetimeEvent> {
        self.events.iter().map(|e| (e.id.clone(), e.clone())).collect()
    }
}

fn bell_train(baseline: f64, trials: u64, spacing: f64) -> Layout {
    let mut events = Vec::new();
    let mut records = Vec::new();
    for i in 0..trials {
        let t = i as f64 * spacing;
        let mut r = TrialRecord::new(i, ProtocolKind::Bell);
        for (agent, x) in [(Agent::Alice, 0.0), (Agent::Bob, baseline)] {
            let id = crate::protocols::event_id(agent, i);
            events.push(SpacetimeEvent::on_line(id.clone(), t, x, EventTag::of_agent(agent)).expect("finite"));
            r.event_refs.push(id);
        }
        records.push(r);
    }
    Layout { events, records }
}

/// A ground-scale Bell test: 1 km baseline, a trial every millisecond, so
/// later measurements sit inside earlier ones' future lightcones.
pub fn ground_layout(trials: u64) -> Layout {
    bell_train(1e3, trials, 1e-3)
}

/// An Earth–Moon Bell test: 3.85e8 m baseline, `trials` spread over 0.1 s,
/// so all of Alice's measurements are spacelike to all of Bob's.
pub fn cislunar_layout(trials: u64) -> Layout {
    bell_train(3.85e8, trials, 0.1 / trials.max(1) as f64)
}

/// Baseline of the swapping layout.
pub const SWAP_BASELINE: f64 = 3.8e8;
/// Diana's delay after the simultaneous `M_A`, `M_B`.
pub const SWAP_DIANA_DELAY: f64 = 0.2;

/// Alice at 0 and Bob at `L` measure at t = 0; Diana at `L/2` measures at
/// 0.2 s. All three pairs are spacelike; a boost above
/// `2c²·0.2/L ≈ 0.32c` reorders them to `M_B, M_D, M_A`.
pub fn swap_layout() -> Layout {
    let l = SWAP_BASELINE;
    let mut r = TrialRecord::new(0, ProtocolKind::Swap);
    let mut events = Vec::new();
    for (agent, t, x) in [(Agent::Alice, 0.0, 0.0), (Agent::Bob, 0.0, l), (Agent::Diana, SWAP_DIANA_DELAY, l / 2.0)] {
        let id = crate::protocols::event_id(agent, 0);
        events.push(SpacetimeEvent::on_line(id.clone(), t, x, EventTag::of_agent(agent)).expect("finite"));
        r.event_refs.push(id);
    }
    Layout { events, records: vec![r] }
}

/// Smallest boost speed that puts `M_D` before `M_A` in [`swap_layout`].
pub fn swap_flip_speed() -> f64 {
    2.0 * C * C * SWAP_DIANA_DELAY / SWAP_BASELINE
}

pub fn write_events<W: Write>(mut w: W, events: &[SpacetimeEvent]) -> Result<(), SpacetimeError> {
    for e in events {
        serde_json::to_writer(&mut w, e).map_err(|err| SpacetimeError::Io(err.into()))?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads JSON-lines events; blank lines are skipped.
pub fn read_events<R: BufRead>(r: R) -> Result<Vec<SpacetimeEvent>, SpacetimeError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let de = &mut serde_json::Deserializer::from_str(&line);
        let e: SpacetimeEvent = serde_path_to_error::deserialize(de).map_err(|err| SpacetimeError::Parse {
            line: i + 1,
            message: format!("{} at {}", err.inner(), err.path()),
        })?;
        out.push(SpacetimeEvent::new(e.id, e.t, [e.x, e.y, e.z], e.tag)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(id: &str, t: f64, x: f64) -> SpacetimeEvent {
        SpacetimeEvent::on_line(id, t, x, EventTag::Other).unwrap()
    }

    #[test]
    fn classification_examples() {
        let o = ev("o", 0.0, 0.0);
        assert_eq!(classify(&o, &ev("a", 0.0, 3.786e8)).kind, IntervalKind::Spacelike);
        assert_eq!(classify(&o, &ev("b", 1.3, 0.0)).kind, IntervalKind::Timelike);
        assert_eq!(classify(&o, &ev("c", 1.0, C)).kind, IntervalKind::Lightlike);
    }

    #[test]
    fn boost_flips_simultaneous_pair() {
        let f = Frame::along_x(0.1 * C).unwrap();
        assert!(boost_time(&ev("b", 0.0, 1e3), &f) < 0.0);
        assert_eq!(boost_time(&ev("a", 1.5, 7.0), &Frame::rest()), 1.5);
        assert!(Frame::along_x(C).is_err());
    }

    #[test]
    fn swap_layout_orders() {
        let l = swap_layout();
        let rest = ordering_under_frame(&l.events, &Frame::rest());
        assert_eq!(rest, ["MA-0", "MB-0", "MD-0"]);
        let fwd = measurement_ordering(&l.events, &Frame::along_x(0.5 * C).unwrap()).unwrap();
        assert_eq!(fwd.name(), "MB-MD-MA");
        assert!(fwd.spacelike());
        let back = measurement_ordering(&l.events, &Frame::along_x(-0.5 * C).unwrap()).unwrap();
        assert_eq!(back.name(), "MA-MD-MB");
        assert!((swap_flip_speed() / C - 0.3158).abs() < 1e-3);
    }

    #[test]
    fn radar_example_and_inverse() {
        let (t, d) = radar_coordinates(0.0, 2.6).unwrap();
        assert!((t - 1.3).abs() < 1e-15 && (d - 3.9e8).abs() < 1e-6);
        assert_eq!(radar_coordinates(4.0, 4.0).unwrap(), (4.0, 0.0));
        assert!(radar_coordinates(1.0, 0.5).is_err());
        let (emit, echo) = radar_readings(t, d);
        assert!((emit - 0.0).abs() < 1e-12 && (echo - 2.6).abs() < 1e-12);
    }

    #[test]
    fn certification_of_layouts() {
        let g = ground_layout(5);
        let rep = certify_causal_independence(&g.records, &g.event_map()).unwrap();
        assert!(!rep.certified);
        let s = cislunar_layout(100);
        assert!(certify_causal_independence(&s.records, &s.event_map()).unwrap().certified);
        assert!(certify_causal_independence(&[], &BTreeMap::new()).unwrap().certified);
    }

    #[test]
    fn unresolved_ref_is_an_error() {
        let g = ground_layout(2);
        assert!(matches!(
            certify_causal_independence(&g.records, &BTreeMap::new()),
            Err(SpacetimeError::UnresolvedRef { .. })
        ));
    }

    #[test]
    fn events_round_trip_jsonl() {
        let l = swap_layout();
        let mut buf = Vec::new();
        write_events(&mut buf, &l.events).unwrap();
        let back = read_events(buf.as_slice()).unwrap();
        assert_eq!(back, l.events);
        let bad = b"{\"id\":\"x\",\"t\":0,\"x\":0,\"y\":0,\"z\":0,\"tag\":\"M_Q\"}\n";
        match read_events(&bad[..]) {
            Err(SpacetimeError::Parse { line: 1, message }) => assert!(message.contains("tag")),
            other => panic!("{other:?}"),
        }
    }
}
