use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use qlink::harness::{derive_stream, read_log_from, write_log_to, LogHeader, RunLog, LOG_FORMAT_VERSION};
use qlink::lhv::{
    alice_outcome_probabilities, bob_out_bloch, lhv_trial, AngleConvention, CoincidencePolicy, DelayModel,
    HiddenPair, LhvSetup,
};
use qlink::protocols::{
    exact_conditional_bloch, max_ordering_spread, ordering_equivalence_table, teleport_active, BellTest,
    EntanglementSwap, InStateSpec, MeasurementPlan, OrderingScenario, PassiveTeleportation,
};
use qlink::qcore::{tensor, BellLabel, DensityMatrix, ProjectorSet, PureState};
use qlink::spacetime::{
    boost_event, boost_time, classify, interval_squared, radar_coordinates, radar_readings, Frame, IntervalKind,
    SpacetimeEvent, C,
};

fn in_state() -> impl Strategy<Value = InStateSpec> {
    (0.0..=PI, 0.0..TAU).prop_map(|(t, p)| InStateSpec::new(t, p).unwrap())
}

fn pair() -> impl Strategy<Value = HiddenPair> {
    (0.0..=PI, 0.0..TAU).prop_map(|(t, p)| HiddenPair::new(t, p).unwrap())
}

fn label() -> impl Strategy<Value = BellLabel> {
    (0usize..4).prop_map(BellLabel::from_index)
}

// events within a light-second of the origin, in seconds and metres
fn event(id: &'static str) -> impl Strategy<Value = SpacetimeEvent> {
    (-1.0..1.0f64, -C..C, -C..C, -C..C)
        .prop_map(move |(t, x, y, z)| SpacetimeEvent::new(id, t, [x, y, z], qlink::spacetime::EventTag::Other).unwrap())
}

fn frame() -> impl Strategy<Value = Frame> {
    (-0.95..0.95f64, -1.0..1.0f64, -1.0..1.0f64, 0.1..1.0f64)
        .prop_map(|(b, x, y, z)| Frame::new(b * C, [x, y, z]).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn active_teleportation_is_perfect(s in in_state(), seed in any::<u64>()) {
        let t = teleport_active(&s, &mut derive_stream(seed, 0)).unwrap();
        prop_assert!((t.fidelity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conditional_bloch_vectors_are_unit(s in in_state(), l in label()) {
        let r = exact_conditional_bloch(&s, l).unwrap();
        prop_assert!((r.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lhv_probabilities_are_born(s in in_state(), p in pair()) {
        let probs = alice_outcome_probabilities(&s, &p).unwrap();
        let born = ProjectorSet::bell()
            .embed(&[0, 1], 2)
            .unwrap()
            .probabilities(&tensor(&p.a_state(), &s.state()).unwrap())
            .unwrap();
        prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for k in 0..4 {
            prop_assert!((probs[k] - born[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn lhv_bob_vectors_are_unit(p in pair(), l in label()) {
        prop_assert!((bob_out_bloch(l, &p).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reduced_states_of_bell_pairs_are_mixed(l in label(), keep in 0usize..2) {
        let rho = DensityMatrix::from_pure(&l.state()).partial_trace(&[keep]).unwrap();
        prop_assert!(rho.bloch_vector().unwrap().norm() < 1e-12);
        prop_assert!((rho.purity() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pure_states_have_unit_bloch_vectors(t in 0.0..=PI, p in 0.0..TAU) {
        let r = PureState::from_bloch_angles(t, p).to_density().bloch_vector().unwrap();
        prop_assert!((r.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn interval_is_frame_invariant(a in event("a"), b in event("b"), f in frame()) {
        let s = interval_squared(&a, &b);
        let s2 = interval_squared(&boost_event(&a, &f), &boost_event(&b, &f));
        let scale = (C * (a.t - b.t)).powi(2) + 3.0 * (2.0 * C).powi(2);
        prop_assert!((s - s2).abs() <= 1e-9 * scale, "{s} vs {s2}");
    }

    #[test]
    fn timelike_order_is_preserved(a in event("a"), b in event("b"), f in frame()) {
        if classify(&a, &b).kind == IntervalKind::Timelike {
            let before = a.t < b.t;
            prop_assert_eq!(boost_time(&a, &f) < boost_time(&b, &f), before);
        }
    }

    #[test]
    fn radar_readings_invert(t in -10.0..10.0f64, d in 0.0..1e9f64) {
        let (emit, echo) = radar_readings(t, d);
        let (t2, d2) = radar_coordinates(emit, echo).unwrap();
        prop_assert!((t2 - t).abs() < 1e-12 * (1.0 + t.abs() + d / C));
        prop_assert!((d2 - d).abs() < 1e-6 * (1.0 + d));
    }

    #[test]
    fn passive_teleportation_orderings_agree(s in in_state()) {
        let tele = PassiveTeleportation::new(s, MeasurementPlan::pauli_uniform(qlink::protocols::Agent::Bob)).unwrap();
        let tables = ordering_equivalence_table(&tele, &OrderingScenario::all_two_party()).unwrap();
        prop_assert!(max_ordering_spread(&tables) < 1e-12);
    }

    #[test]
    fn wider_windows_accept_more(tags in prop::array::uniform3(0.0..1e-8f64), w1 in 0.0..1e-8f64, dw in 0.0..1e-8f64) {
        let narrow = CoincidencePolicy::new(w1).unwrap();
        let wide = CoincidencePolicy::new(w1 + dw).unwrap();
        prop_assert!(!narrow.accepts(&tags) || wide.accepts(&tags));
        prop_assert!(CoincidencePolicy::infinite().accepts(&tags));
    }

    #[test]
    fn post_selection_only_annotates(seed in any::<u64>(), w in 1e-11..1e-8f64) {
        let s = InStateSpec::new(1.0, 0.5).unwrap();
        let delay = DelayModel::new(1e-9, AngleConvention::Bloch).unwrap();
        let open = LhvSetup::new(s, delay, CoincidencePolicy::infinite());
        let gated = LhvSetup::new(s, delay, CoincidencePolicy::new(w).unwrap());
        for i in 0..20 {
            let a = lhv_trial(&open, i, &mut derive_stream(seed, i)).unwrap();
            let mut b = lhv_trial(&gated, i, &mut derive_stream(seed, i)).unwrap();
            prop_assert!(a.accepted);
            b.accepted = true;
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn logs_round_trip(seed in any::<u64>(), n in 1u64..40) {
        let s = InStateSpec::new(0.3, 2.0).unwrap();
        let records = (0..n)
            .map(|i| teleport_active(&s, &mut derive_stream(seed, i)).unwrap().into_record(i))
            .collect();
        let log = RunLog {
            header: LogHeader {
                format_version: LOG_FORMAT_VERSION,
                tool_version: "test".into(),
                seed,
                first_trial: 0,
                trials: n,
                config: serde_json::json!({}),
            },
            records,
            summary: None,
        };
        let mut buf = Vec::new();
        write_log_to(&mut buf, &log).unwrap();
        prop_assert_eq!(read_log_from(buf.as_slice()).unwrap(), log);
    }
}

#[test]
fn swap_and_bell_orderings_agree() {
    let swap = EntanglementSwap::chsh();
    let tables = ordering_equivalence_table(&swap, &OrderingScenario::all_swap()).unwrap();
    assert_eq!(tables.len(), 6);
    assert!(max_ordering_spread(&tables) < 1e-12);
    let bell = BellTest::chsh();
    let tables = ordering_equivalence_table(&bell, &OrderingScenario::all_two_party()).unwrap();
    assert!(max_ordering_spread(&tables) < 1e-12);
}
