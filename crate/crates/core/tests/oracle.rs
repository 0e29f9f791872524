mod common;

use common::{check_world, readers, world, NaiveState, LOCS};
use eoflow::engine::Engine;
use eoflow::expr::Value;
use eoflow::graph::EventGraph;
use eoflow::harness::{run_scenario, Perturbation, Scenario};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cascades_match_naive_fixpoint(w in world(12)) {
        let run = check_world(&w);
        prop_assert!(run.mismatch.is_none(), "{}", run.mismatch.unwrap());
    }
}

/// Rule evaluations the trace steps from `from` on should have cost: every
/// rule whose read set covers the trigger's slot at that point, plus one
/// per SetDo trigger.
fn closure_count(engine: &Engine, from: usize) -> u64 {
    let catalog = engine.catalog();
    let graph = EventGraph::import_jsonl(&engine.export_log()).unwrap();
    let mut state = NaiveState::of(engine);
    engine.trace()[from..]
        .iter()
        .map(|step| {
            let ev = &graph.events()[step.trigger_seq as usize - 1];
            let snapshot = graph.project(step.state_seq);
            for (id, _) in &state.members {
                let props = snapshot.properties(id).cloned().unwrap_or_default();
                state.values.insert(id.clone(), props);
            }
            let set_do = catalog
                .slot_event(&ev.base, &ev.property)
                .is_some_and(|e| e.set_do.is_some());
            readers(catalog, &state, &ev.base, &ev.property) as u64 + set_do as u64
        })
        .sum()
}

#[test]
fn counters_match_dependency_closure() {
    for blocks in [
        &["delivery"][..],
        &["delivery", "recharging"],
        &["delivery", "recharging", "docking"],
    ] {
        let mut e = Engine::with_blocks(blocks).unwrap();
        for (ind, prop, loc) in [
            ("Robot 1", "location", "Loc A"),
            ("Delivery 1", "objectLoc", "Loc B"),
            ("Delivery 1", "targetLoc", "Loc C"),
        ] {
            e.inject("operator", ind, prop, Value::reference(loc))
                .unwrap();
        }
        e.reset_counters();
        let from = e.trace().len();
        let mut presses = 0;
        while e.value("Delivery 1", "delivered") != Value::Bool(true) {
            let a = e
                .available_actions(None)
                .into_iter()
                .find(|a| a.available)
                .expect("an action is available until delivered");
            e.inject(
                "auto-operator",
                &a.individual,
                &a.property,
                Value::Str("1".into()),
            )
            .unwrap();
            presses += 1;
        }
        assert_eq!(presses, 4, "{blocks:?}");
        assert_eq!(
            e.counters().rule_evaluations,
            closure_count(&e, from),
            "{blocks:?}"
        );
    }
}

fn confluence_case() -> impl Strategy<Value = (usize, usize, usize, Vec<(usize, bool, usize)>)> {
    (
        0..3usize,
        0..3usize,
        0..3usize,
        prop::collection::vec((1..6usize, any::<bool>(), 0..3usize), 0..3),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn any_start_and_edits_end_delivered_on_both_arms(
        (r, o, t, mut edits) in confluence_case(),
        recharge in any::<bool>(),
        dock in any::<bool>(),
    ) {
        edits.sort_by_key(|e| e.0);
        let mut s = Scenario::new("confluence", LOCS[r], LOCS[o], LOCS[t])
            .with_extensions(eoflow::bt::Extensions { recharge, dock });
        for (step, target, loc) in edits {
            let to = LOCS[loc].to_string();
            s = s.perturb(step, if target {
                Perturbation::MoveTarget { to }
            } else {
                Perturbation::MoveObject { to }
            });
        }
        let out = run_scenario(&s).unwrap();
        prop_assert_eq!(out.agree, Some(true));
        for report in &out.reports {
            let fs = &report.final_state;
            prop_assert!(fs.delivered);
            prop_assert_eq!(&fs.object_loc, &fs.target_loc);
        }
    }
}
