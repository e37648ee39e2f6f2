mod common;

use std::collections::BTreeMap;

use common::*;
use proptest::prelude::*;
use relprop_core::{
    chain_combine, parse_scenario, run_scenario, to_tsv, Error, PropagationConfig, RunConfig,
    Simulator, TraceKind, TOLERANCE,
};

const CYCLES_A: &str = "
agent A rel=0.8
agent B rel=0.8
agent A' rel=0.8
agent A'' rel=0.5
judge M chain=C1 from=A to=B target=agent:A'' judged=0.9
forward M' prior=M from=B to=A'
judge J chain=C1 from=A' to=B target=msg:M' judged=1
";

const CYCLES_B: &str = "
agent A rel=0.5
agent B rel=0.9
agent A' rel=0.5
judge M chain=C1 from=A to=B target=agent:A' judged=0.9
judge M' chain=C1 from=A' to=B target=agent:A judged=0.9
";

fn sim(text: &str) -> Simulator {
    run_scenario(&parse_scenario(text).unwrap(), RunConfig::default()).unwrap()
}

fn step(sim: &mut Simulator, line: &str) -> Vec<(TraceKind, String)> {
    let event = parse_scenario(line).unwrap().pop().unwrap();
    sim.run_event(&event)
        .unwrap()
        .iter()
        .map(|r| (r.kind, r.entity.clone()))
        .collect()
}

#[test]
fn cycles_a_confirmation_runs_back_once() {
    let text = CYCLES_A.trim_end().rsplit_once('\n').unwrap().0;
    let mut s = sim(text);
    let records = step(&mut s, "judge J chain=C1 from=A' to=B target=msg:M' judged=1");
    let updated: Vec<_> = records.iter().filter(|(k, _)| *k == TraceKind::Update).map(|(_, e)| e.as_str()).collect();
    assert_eq!(updated, ["msg:M'", "agent:B", "msg:M", "agent:A"]);
    assert!(records.iter().all(|(k, _)| *k != TraceKind::Suppressed));
    for id in ["A", "B"] {
        assert!(agent_av(&s, id) > 0.8);
    }
    assert!(msg_av(&s, "M") > 0.8 && msg_av(&s, "M'") > 0.8);
    // the judgement's sender is not part of the loop
    assert_eq!(agent_av(&s, "A'"), 0.8);
}

#[test]
fn cycles_a_resend_is_suppressed() {
    let mut s = sim(CYCLES_A);
    let before = all_reliabilities(&s);
    let records = step(&mut s, "judge M2 chain=C1 from=A to=B target=agent:A'' judged=0.9");
    assert_eq!(records, [(TraceKind::Suppressed, "msg:M2".to_string())]);
    assert_eq!(all_reliabilities(&s), before);
}

#[test]
fn cycles_b_raises_each_agent_once() {
    let mut s = sim("agent A rel=0.5\nagent B rel=0.9\nagent A' rel=0.5\n");
    let first = step(&mut s, "judge M chain=C1 from=A to=B target=agent:A' judged=0.9");
    assert_eq!(first, [(TraceKind::Update, "agent:A'".to_string())]);
    let raised = agent_av(&s, "A'");
    assert!(raised > 0.5);
    let second = step(&mut s, "judge M' chain=C1 from=A' to=B target=agent:A judged=0.9");
    assert_eq!(second, [(TraceKind::Update, "agent:A".to_string())]);
    // A' speaks with its raised reliability, so A gains more than A' did
    assert!(agent_av(&s, "A") > raised);
    let again = step(&mut s, "judge M2 chain=C1 from=A to=B target=agent:A' judged=0.9");
    assert_eq!(again, [(TraceKind::Suppressed, "msg:M2".to_string())]);
    assert_eq!(agent_av(&s, "A'"), raised);
}

#[test]
fn a_fresh_chain_is_a_new_confirmation() {
    let mut s = sim(CYCLES_A);
    let before = agent_av(&s, "A");
    let records = step(&mut s, "judge J2 chain=C9 from=A' to=B target=msg:M' judged=1");
    assert_eq!(records.iter().filter(|(k, _)| *k == TraceKind::Update).count(), 4);
    assert!(agent_av(&s, "A") > before);
}

proptest! {
    #[test]
    fn closed_loops_are_quiescent(replays in 1usize..25, which in prop::collection::vec(0usize..4, 25)) {
        for base in [CYCLES_A, CYCLES_B] {
            let mut s = sim(base);
            let before = all_reliabilities(&s);
            for (i, w) in which.iter().take(replays).enumerate() {
                let line = match (base == CYCLES_A, w % 2) {
                    (true, 0) => format!("judge R{i} chain=C1 from=A' to=B target=msg:M' judged=1"),
                    (true, _) => format!("judge R{i} chain=C1 from=A to=B target=agent:A'' judged=0.9"),
                    (false, 0) => format!("judge R{i} chain=C1 from=A to=B target=agent:A' judged=0.9"),
                    (false, _) => format!("judge R{i} chain=C1 from=A' to=B target=agent:A judged=0.9"),
                };
                let records = step(&mut s, &line);
                prop_assert!(records.iter().all(|(k, _)| *k == TraceKind::Suppressed));
            }
            prop_assert_eq!(all_reliabilities(&s), before);
        }
    }
}

#[test]
fn temp_case2_agreement_and_disagreement() {
    for (value, sign) in [(-31.0, 1.0), (-21.0, -1.0)] {
        let s = sim(&format!(
            "agent O1 rel=1\nagent O2 rel=1\nagent S rel=1\n\
             send T1 from=O1 to=S topic=temp value=-31 rel=0.6\n\
             send T2 from=O2 to=S topic=temp value={value} rel=0.4\n\
             reconcile topic=temp\n"
        ));
        let d1 = msg_av(&s, "T1") - 0.6;
        let d2 = msg_av(&s, "T2") - 0.4;
        assert!(sign * d1 > 0.0 && sign * d2 > 0.0, "{value}: {d1} {d2}");
        assert!(d2.abs() > d1.abs());
    }
}

#[test]
fn temp_case31_decomposes_onto_the_chain() {
    let s = sim(
        "agent Th rel=1\nagent H rel=0.7\nagent L rel=0.6\nagent S rel=1\n\
         send R from=Th to=S topic=temp value=-31\n\
         send Mh from=H to=L topic=temp value=-31\n\
         forward Mt prior=Mh from=L to=S value=-21\n\
         observe Mt against=R\n",
    );
    let parts = vec![
        s.network().message(&mid("Mh")).unwrap().reliability().clone(),
        s.network().message(&mid("Mt")).unwrap().reliability().clone(),
    ];
    let combined = chain_combine(&parts, &PropagationConfig::default()).unwrap();
    assert!((combined.average().unwrap().value() - 0.56).abs() <= TOLERANCE);
    assert!(msg_av(&s, "Mh") < 0.7 && msg_av(&s, "Mt") < 0.6);
    assert!(agent_av(&s, "H") < 0.7 && agent_av(&s, "L") < 0.6);
    assert_eq!(agent_av(&s, "Th"), 1.0);
    assert_eq!(msg_av(&s, "R"), 1.0);
}

#[test]
fn alpha_attenuates_long_chains() {
    let mut cfg = RunConfig::default();
    cfg.propagation.alpha = 0.5;
    let s = run_scenario(
        &parse_scenario(
            "agent A rel=0.8\nagent B rel=0.6\nagent C rel=1\n\
             send M from=A to=B topic=t value=1\nforward N prior=M from=B to=C\n",
        )
        .unwrap(),
        cfg,
    )
    .unwrap();
    assert!((combined_av(&s, "N") - 0.3).abs() <= TOLERANCE);
    assert_eq!(combined_av(&s, "M"), 0.8);
}

#[test]
fn statements_follow_the_combined_reliability() {
    let mut s = sim(
        "agent A rel=0.9\nagent B rel=0.5\nagent C rel=1\n\
         send M from=A to=B topic=t value=1\nforward N prior=M from=B to=C value=2\n",
    );
    let level = |s: &Simulator, key: &str| {
        s.store()
            .statements()
            .find(|st| st.key().to_string() == key)
            .map(|st| st.reliability().average().unwrap().value())
    };
    assert_eq!(level(&s, "t=2"), Some(0.5));
    step(&mut s, "judge J from=C to=A target=msg:N judged=-1");
    let after = level(&s, "t=2").unwrap();
    assert!(after < 0.5);
    assert!((after - combined_av(&s, "N")).abs() <= TOLERANCE);
}

#[test]
fn reconcile_needs_two_live_messages() {
    let events = parse_scenario(
        "agent A rel=1\nagent B rel=1\nagent C rel=1\n\
         send M from=A to=B topic=t value=1\nforward N prior=M from=B to=C\nreconcile topic=t\n",
    )
    .unwrap();
    assert_eq!(
        run_scenario(&events, RunConfig::default()).unwrap_err(),
        Error::NotEnoughMessages { topic: "t".into(), found: 1 }
    );
}

#[test]
fn parallel_runs_do_not_interfere() {
    let texts = [CYCLES_A, CYCLES_B];
    let expected: Vec<String> = texts.iter().map(|t| to_tsv(sim(t).trace())).collect();
    let handles: Vec<_> = (0..8)
        .map(|i| {
            let text = texts[i % 2];
            std::thread::spawn(move || to_tsv(sim(text).trace()))
        })
        .collect();
    for (i, h) in handles.into_iter().enumerate() {
        assert_eq!(h.join().unwrap(), expected[i % 2]);
    }
}

/// Runs events, skipping rejected ones, and checks after each event that the
/// rejected ones left no trace.
fn run_lenient(events: &[relprop_core::ScenarioEvent]) -> Simulator {
    let mut s = Simulator::new(RunConfig::default()).unwrap();
    for e in events {
        let before = s.trace().len();
        if s.run_event(e).is_err() {
            assert_eq!(s.trace().len(), before);
        }
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn reliabilities_stay_bounded(events in scenario(40)) {
        let s = run_lenient(&events);
        for (entity, r) in all_reliabilities(&s) {
            for (dim, v) in r.iter() {
                prop_assert!((-1.0..=1.0).contains(&v.value()), "{entity} {dim} {}", v.value());
            }
        }
        for r in s.trace() {
            prop_assert!((-1.0..=1.0).contains(&r.old) && (-1.0..=1.0).contains(&r.new));
        }
    }

    #[test]
    fn trace_accounts_for_every_change(events in scenario(40)) {
        let s = run_lenient(&events);
        let default = s.config().propagation.dimension_default;
        let mut sums: BTreeMap<(String, String), f64> = BTreeMap::new();
        for r in s.trace().iter().filter(|r| r.kind == TraceKind::Update) {
            *sums.entry((r.entity.clone(), r.dimension.clone())).or_default() += r.delta();
        }
        let mut initial: BTreeMap<String, relprop_core::DimensionedReliability> = BTreeMap::new();
        for e in &events {
            if let relprop_core::ScenarioEvent::DeclareAgent { id, reliability, .. } = e {
                initial.entry(format!("agent:{id}")).or_insert_with(|| reliability.clone());
            }
        }
        for m in s.network().messages() {
            initial.insert(format!("msg:{}", m.id()), m.initial_reliability().clone());
        }
        for (entity, now) in all_reliabilities(&s) {
            let Some(start) = initial.get(&entity) else { continue };
            let (start, now) = relprop_core::align_dimensions(start, &now, default);
            for ((dim, a), (_, b)) in start.iter().zip(now.iter()) {
                let traced = sums.get(&(entity.clone(), dim.to_string())).copied().unwrap_or(0.0);
                prop_assert!(((b.value() - a.value()) - traced).abs() <= TOLERANCE, "{entity} {dim}: {} vs {traced}", b.value() - a.value());
            }
        }
        for pair in s.trace().windows(2) {
            prop_assert!(pair[0].step < pair[1].step);
        }
    }

    #[test]
    fn runs_are_deterministic(events in scenario(30)) {
        prop_assert_eq!(to_tsv(run_lenient(&events).trace()), to_tsv(run_lenient(&events).trace()));
    }

    #[test]
    fn suppressed_records_change_nothing(events in scenario(40)) {
        let s = run_lenient(&events);
        for r in s.trace().iter().filter(|r| r.kind == TraceKind::Suppressed) {
            prop_assert_eq!(r.old, r.new);
            prop_assert_eq!(r.dimension.as_str(), "-");
        }
    }
}
