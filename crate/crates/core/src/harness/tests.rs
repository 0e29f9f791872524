use super::*;

fn fired(run: &EoRun) -> Vec<&str> {
    run.fired.iter().map(|f| f.property.as_str()).collect()
}

#[test]
fn baseline_both_arms() {
    let out = run_scenario(&Scenario::builtin("baseline").unwrap()).unwrap();
    let eo = out.eo.as_ref().unwrap();
    assert_eq!(
        fired(eo),
        ["cameObjectLocation", "took", "cameTargetLocation", "put"]
    );
    assert!(eo.flags.is_empty());
    let bt = out.bt.as_ref().unwrap();
    assert_eq!(bt.ticks.len(), 5);
    assert_eq!(out.agree, Some(true));
    let fs = &eo.report.final_state;
    assert_eq!(
        (fs.object_loc.as_str(), fs.robot_loc.as_str(), fs.delivered),
        ("Loc C", "Loc C", true)
    );
    assert_eq!(fs.battery_level, None);
}

#[test]
fn battery_drop_latencies() {
    let out = run_scenario(&Scenario::builtin("battery_drop").unwrap()).unwrap();
    let (eo, bt) = (&out.reports[0], &out.reports[1]);
    assert_eq!((eo.arm, bt.arm), (Arm::Eo, Arm::Bt));
    assert_eq!(eo.preemption_latency, Some(0));
    assert_eq!(bt.preemption_latency, Some(1));
    assert_eq!((eo.recharge_episodes, bt.recharge_episodes), (1, 1));
    assert_eq!(
        eo.actions,
        [
            "cameObjectLocation",
            "took",
            "cameTargetLocation",
            "charging",
            "cameTargetLocation",
            "put"
        ]
    );
    assert_eq!(out.agree, Some(true));
    assert_eq!(eo.final_state.battery_level, Some(100.0));
}

#[test]
fn hotload_schedule_passes() {
    let report = hotload_test().unwrap();
    assert!(report.passed(), "{:?}", report.checks);
}

#[test]
fn idle_contrast() {
    let out = run_scenario(&Scenario::builtin("idle").unwrap()).unwrap();
    let (eo, bt) = (&out.reports[0], &out.reports[1]);
    assert_eq!(eo.steps, 0);
    assert_eq!(
        eo.idle,
        IdleMetrics {
            steps: 100,
            evaluations: 0
        }
    );
    let Elements::Bt {
        battery_path: Some(path),
        ..
    } = bt.elements
    else {
        panic!("tree arm reports a battery path");
    };
    assert_eq!(bt.idle.steps, 100);
    assert!(bt.idle.evaluations >= 100 * path as u64);
    assert_eq!(out.agree, Some(true));
}

#[test]
fn suite_agrees_and_replays() {
    for s in Scenario::suite() {
        let out = run_scenario(&s).unwrap();
        assert_eq!(out.agree, Some(true), "{}", s.name);
        let eo = out.eo.unwrap();
        assert!(eo.report.final_state.delivered, "{}", s.name);
        assert!(replay_check(&eo.log).passed(), "{}", s.name);
    }
}

#[test]
fn reports_are_functions_of_logs_and_traces() {
    let s = Scenario::builtin("hotload").unwrap();
    let eo = run_eo(&s).unwrap();
    assert_eq!(
        eo_metrics(&s.name, &eo.log, s.idle_steps).unwrap(),
        eo.report
    );
    let bt = run_bt(&s).unwrap();
    let stored: BtRun = serde_json::from_str(&serde_json::to_string(&bt).unwrap()).unwrap();
    assert_eq!(bt_metrics(&stored), bt_metrics(&bt));
}

#[test]
fn replay_finds_a_deleted_derived_event() {
    let eo = run_eo(&Scenario::builtin("baseline").unwrap()).unwrap();
    let lines: Vec<&str> = eo.log.lines().collect();
    let (idx, _) = lines
        .iter()
        .enumerate()
        .rev()
        .find(|(_, l)| l.contains(r#""actor":"engine""#) && l.contains(r#""property":"delivered""#))
        .unwrap();
    let mut broken: String = lines
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != idx)
        .map(|(_, l)| format!("{l}\n"))
        .collect();
    match replay_check(&broken) {
        ReplayOutcome::Diverged { seq, .. } => assert_eq!(seq, idx as u64 + 1),
        other => panic!("expected divergence, got {other:?}"),
    }
    broken.clear();
    assert_eq!(replay_check(&broken), ReplayOutcome::Pass { events: 0 });
}

#[test]
fn element_counts() {
    let engine = crate::engine::Engine::with_blocks(&["delivery"]).unwrap();
    let counts = count_elements(engine.catalog());
    let delivery = counts.iter().find(|c| c.model == "Model Delivery").unwrap();
    assert_eq!((delivery.declared, delivery.excluding_links), (9, 8));
    assert!(count_elements(&crate::bsl::Catalog::default()).is_empty());
    let location = counts.iter().find(|c| c.model == "Model Location").unwrap();
    assert_eq!(location.declared, 0);
}

#[test]
fn sweep_covers_all_configurations() {
    let rows = sweep(Extensions::default()).unwrap();
    assert_eq!(rows.len(), 27);
    for r in &rows {
        assert!(r.agree(), "{r:?}");
        assert!(r.eo.delivered);
        if r.initial.object == r.initial.target {
            assert_eq!(r.eo_actions, 0);
        }
    }
}

#[test]
fn step_budget_stalls() {
    let mut s = Scenario::builtin("baseline").unwrap();
    s.max_steps = 2;
    assert!(matches!(
        run_eo(&s),
        Err(HarnessError::ScenarioStalled {
            arm: Arm::Eo,
            step: 2,
            ..
        })
    ));
    assert!(matches!(
        run_bt(&s),
        Err(HarnessError::ScenarioStalled {
            arm: Arm::Bt,
            step: 2,
            ..
        })
    ));
}
