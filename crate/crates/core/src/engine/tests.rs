use super::*;

fn loc(name: &str) -> Value {
    Value::reference(format!("Loc {name}"))
}

fn engine(blocks: &[&str], robot: &str, object: &str, target: &str) -> Engine {
    let mut e = Engine::with_blocks(blocks).unwrap();
    e.inject("operator", "Robot 1", "location", loc(robot))
        .unwrap();
    e.inject("operator", "Delivery 1", "objectLoc", loc(object))
        .unwrap();
    e.inject("operator", "Delivery 1", "targetLoc", loc(target))
        .unwrap();
    e
}

fn available(e: &mut Engine, individual: &str) -> Vec<String> {
    e.available_actions(Some(individual))
        .into_iter()
        .filter(|a| a.available)
        .map(|a| a.property)
        .collect()
}

fn fire(e: &mut Engine, individual: &str, property: &str) -> Vec<(String, String, String)> {
    e.inject("operator", individual, property, Value::str("1"))
        .unwrap()
        .derived
        .into_iter()
        .map(|d| (d.base, d.property, d.value.render()))
        .collect()
}

fn triple(base: &str, property: &str, value: &str) -> (String, String, String) {
    (base.into(), property.into(), value.into())
}

#[test]
fn delivery_load_materializes_task_and_robot_location() {
    let e = Engine::with_blocks(&["delivery"]).unwrap();
    assert_eq!(e.value("Robot 1", "task"), Value::reference("Delivery 1"));
    assert_eq!(e.value("Robot 1", "location"), loc("A"));
    assert_eq!(e.value("Delivery 1", "robot"), Value::reference("Robot 1"));
    assert_eq!(e.value("Delivery 1", "robotLoc"), loc("A"));
    assert_eq!(e.value("Delivery 1", "delivered"), Value::Bool(false));
    let first = &e.graph().events()[0];
    assert_eq!(
        (first.base.as_str(), first.property.as_str()),
        (SYSTEM, LOAD_BLOCK)
    );
    assert_eq!(first.cause, None);
}

#[test]
fn causes_follow_the_documented_rule() {
    let e = engine(&["delivery"], "A", "B", "C");
    let events = e.graph().events();
    let block_id = &events[0].id;
    let creation = |who: &str| e.state().individual(who).unwrap().creation_id.clone();
    for ev in events.iter().skip(1) {
        let cause = ev.cause.as_deref().unwrap();
        if ev.property == MEMBERSHIP {
            assert_eq!(cause, block_id);
            assert_eq!(ev.actor, ENGINE_ACTOR);
        } else if ev.actor == "operator" {
            assert_eq!(cause, creation(&ev.base));
        }
        assert!(e.graph().get(cause).unwrap().seq < ev.seq);
    }
}

#[test]
fn baseline_delivery_sequence() {
    let mut e = engine(&["delivery"], "A", "B", "C");
    assert_eq!(available(&mut e, "Delivery 1"), ["cameObjectLocation"]);

    assert_eq!(
        fire(&mut e, "Delivery 1", "cameObjectLocation"),
        [
            triple("Robot 1", "location", "Loc B"),
            triple("Delivery 1", "robotLoc", "Loc B")
        ]
    );
    assert_eq!(available(&mut e, "Delivery 1"), ["took"]);

    assert_eq!(
        fire(&mut e, "Delivery 1", "took"),
        [triple("Delivery 1", "objectLoc", "Robot 1")]
    );
    assert_eq!(available(&mut e, "Delivery 1"), ["cameTargetLocation"]);

    assert_eq!(
        fire(&mut e, "Delivery 1", "cameTargetLocation"),
        [
            triple("Robot 1", "location", "Loc C"),
            triple("Delivery 1", "robotLoc", "Loc C")
        ]
    );
    assert_eq!(available(&mut e, "Delivery 1"), ["put"]);

    assert_eq!(
        fire(&mut e, "Delivery 1", "put"),
        [
            triple("Delivery 1", "objectLoc", "Loc C"),
            triple("Delivery 1", "delivered", "1")
        ]
    );
    assert!(available(&mut e, "Delivery 1").is_empty());
    assert_eq!(
        e.value("Delivery 1", "objectLoc"),
        e.value("Delivery 1", "targetLoc")
    );
}

#[test]
fn gates_reject_without_appending() {
    let mut e = engine(&["delivery", "recharging"], "A", "B", "C");
    let before = e.graph().len();
    assert!(matches!(
        e.inject("operator", "Delivery 1", "took", Value::str("1")),
        Err(InjectError::ConditionNotMet { .. })
    ));
    let err = e
        .inject("sensor", "Robot 1", "batteryLevel", Value::Num(150.0))
        .unwrap_err();
    assert_eq!(
        err,
        InjectError::ValueConditionViolation {
            individual: "Robot 1".into(),
            property: "batteryLevel".into(),
            value: "150".into(),
            condition: "$Value >= 0 && $Value <= 100".into(),
        }
    );
    assert!(matches!(
        e.inject("admin", "Robot 1", "station", loc("B")),
        Err(InjectError::ImmutableViolation { .. })
    ));
    assert!(matches!(
        e.inject("operator", "Robot 1", "nothing", Value::str("1")),
        Err(InjectError::UnknownSlot { .. })
    ));
    assert!(matches!(
        e.inject("operator", "Robot 1", "location", Value::str("Loc Z")),
        Err(InjectError::InvalidValue { .. })
    ));
    assert_eq!(e.graph().len(), before);
}

#[test]
fn battery_drop_switches_task_in_one_cascade() {
    let mut e = engine(&["delivery", "recharging"], "A", "B", "C");
    fire(&mut e, "Delivery 1", "cameObjectLocation");
    assert_eq!(e.value("Recharging", "charged"), Value::Num(100.0));
    let derived: Vec<_> = e
        .inject("sensor", "Robot 1", "batteryLevel", Value::Num(15.0))
        .unwrap()
        .derived
        .into_iter()
        .map(|d| (d.base, d.property, d.value.render()))
        .collect();
    assert_eq!(
        derived,
        [
            triple("Robot 1", "batteryLow", "1"),
            triple("Recharging", "charged", "15"),
            triple("Robot 1", "task", "Recharging"),
        ]
    );
    assert_eq!(available(&mut e, "Recharging"), ["cameTargetLocation"]);
    fire(&mut e, "Recharging", "cameTargetLocation");
    assert_eq!(e.value("Recharging", "robotLoc"), loc("Station"));
    assert_eq!(available(&mut e, "Recharging"), ["charging"]);
    let derived = fire(&mut e, "Recharging", "charging");
    assert_eq!(
        derived,
        [
            triple("Robot 1", "batteryLevel", "100"),
            triple("Robot 1", "batteryLow", "0"),
            triple("Recharging", "charged", "100"),
            triple("Robot 1", "task", "Delivery 1"),
        ]
    );
    assert!(available(&mut e, "Recharging").is_empty());
    assert_eq!(available(&mut e, "Delivery 1"), ["cameObjectLocation"]);
}

#[test]
fn recharging_loaded_mid_delivery_keeps_the_task() {
    let mut e = engine(&["delivery"], "A", "B", "C");
    fire(&mut e, "Delivery 1", "cameObjectLocation");
    let seq = e.graph().last_seq();
    e.load_source(corpus::RECHARGING, "operator").unwrap();
    assert!(e.graph().events()[seq as usize].seq == seq + 1);
    assert_eq!(e.value("Robot 1", "task"), Value::reference("Delivery 1"));
    assert_eq!(e.value("Robot 1", "batteryLow"), Value::Bool(false));
    assert_eq!(e.value("Recharging", "targetLoc"), loc("Station"));
    assert_eq!(available(&mut e, "Delivery 1"), ["took"]);
}

#[test]
fn recharging_loaded_with_low_battery_switches_at_load() {
    let mut e = engine(&["delivery"], "A", "B", "C");
    let text = corpus::RECHARGING.replace(": batteryLevel: 100", ": batteryLevel: 15");
    e.load_source(&text, "operator").unwrap();
    assert_eq!(e.value("Robot 1", "batteryLow"), Value::Bool(true));
    assert_eq!(e.value("Robot 1", "task"), Value::reference("Recharging"));
}

#[test]
fn docking_relocates_after_put() {
    let mut e = engine(&["delivery", "recharging"], "A", "B", "C");
    for a in ["cameObjectLocation", "took", "cameTargetLocation"] {
        fire(&mut e, "Delivery 1", a);
    }
    e.load_source(corpus::DOCKING, "operator").unwrap();
    assert_eq!(e.value("Robot 1", "location"), loc("C"));
    let derived = fire(&mut e, "Delivery 1", "put");
    assert_eq!(
        derived,
        [
            triple("Delivery 1", "objectLoc", "Loc C"),
            triple("Delivery 1", "delivered", "1"),
            triple("Robot 1", "location", "Loc Dock"),
            triple("Delivery 1", "robotLoc", "Loc Dock"),
            triple("Recharging", "robotLoc", "Loc Dock"),
        ]
    );
}

#[test]
fn docking_after_delivery_fires_only_on_future_events() {
    let mut e = engine(&["delivery"], "A", "C", "C");
    assert_eq!(e.value("Delivery 1", "delivered"), Value::Bool(true));
    let text = "Relation: Individual: dock\n: Range: Location\nRobot: Model: Model Robot\n: Relation: dock\nDeliveryTask: Model: Model Delivery\n: Attribute: delivered\n:: SetDo: ({ '$do': 'EditIndividual', '$IndividualID': $.robot, '$Condition': $Value == \"1\", 'location': $($.robot).dock})\nRobot: Individual: Robot 1\n: dock: Loc B";
    e.load_source(text, "operator").unwrap();
    assert_eq!(e.value("Robot 1", "location"), loc("A"));
}

#[test]
fn failed_loads_are_atomic() {
    let mut e = Engine::with_blocks(&["delivery", "recharging", "docking"]).unwrap();
    let len = e.graph().len();
    let catalog = e.catalog().clone();
    assert!(matches!(
        e.load_source(corpus::DOCKING, "operator"),
        Err(LoadError::Validation(_))
    ));
    assert!(matches!(
        e.load_source(
            "Robot: Individual: Robot 1\n: batteryLevel: 150",
            "operator"
        ),
        Err(LoadError::Rejected(
            InjectError::ValueConditionViolation { .. }
        ))
    ));
    assert!(matches!(
        e.load_source("Robot: Individual: Robot 1\n: station: Loc A", "operator"),
        Err(LoadError::Rejected(InjectError::ImmutableViolation { .. }))
    ));
    assert!(matches!(
        e.load_source("Robot: Bogus: x", "operator"),
        Err(LoadError::Parse(_))
    ));
    assert_eq!(e.graph().len(), len);
    assert_eq!(e.catalog(), &catalog);
}

#[test]
fn idle_engine_evaluates_nothing() {
    let mut e = engine(&["delivery", "recharging"], "A", "B", "C");
    e.reset_counters();
    let log = e.export_log();
    assert_eq!(e.counters(), Counters::default());
    assert_eq!(e.export_log(), log);
}

#[test]
fn inject_without_subscribers_evaluates_no_rule() {
    let mut e = engine(&["delivery"], "A", "B", "C");
    let text = "Attribute: Individual: note\n: DataType: String\nRobot: Model: Model Robot\n: Attribute: note";
    e.load_source(text, "operator").unwrap();
    e.reset_counters();
    let report = e
        .inject("operator", "Robot 1", "note", Value::str("hi"))
        .unwrap();
    assert!(report.derived.is_empty());
    let c = e.counters();
    assert_eq!(
        (c.rule_evaluations, c.derived_events, c.triggers),
        (0, 0, 1)
    );
}

#[test]
fn narrowed_deref_recomputes_once() {
    let mut e = engine(&["delivery"], "A", "B", "C");
    let rule = e
        .rules()
        .iter()
        .position(|r| r.host == "Delivery 1" && r.property == "robotLoc")
        .unwrap();
    let deps = e.subscriptions(rule).unwrap().clone();
    assert_eq!(
        deps.into_iter().collect::<Vec<_>>(),
        [
            Slot::exact("Delivery 1", "robot"),
            Slot::exact("Robot 1", "location")
        ]
    );
    let steps = e.trace().len();
    e.inject("operator", "Robot 1", "location", loc("B"))
        .unwrap();
    let runs = e.trace()[steps..]
        .iter()
        .flat_map(|s| s.rules.iter())
        .filter(|r| **r == rule)
        .count();
    assert_eq!(runs, 1);
}

#[test]
fn unchanged_set_value_appends_nothing() {
    let mut e = engine(&["delivery"], "A", "B", "C");
    let report = e
        .inject("operator", "Robot 1", "location", loc("A"))
        .unwrap();
    assert!(report.derived.is_empty());
}

#[test]
fn cascades_are_deterministic() {
    let run = || {
        let mut e = engine(&["delivery", "recharging", "docking"], "B", "A", "C");
        fire(&mut e, "Delivery 1", "cameObjectLocation");
        e.inject("sensor", "Robot 1", "batteryLevel", Value::Num(10.0))
            .unwrap();
        e.export_log()
    };
    assert_eq!(run(), run());
}

#[test]
fn divergent_models_hit_the_budget() {
    let mut e = Engine::new();
    let text = "Concept: Instance: Flip\nAttribute: Individual: a\n: DataType: Boolean\nAttribute: Individual: b\n: DataType: Boolean\nAttribute: Individual: go\n: DataType: Boolean\nFlip: Model: Model Flip\n: Attribute: go\n: Attribute: a\n:: SetValue: $.go && !$.b\n: Attribute: b\n:: SetValue: $.a\nFlip: Individual: F\n: SetModel: Model Flip";
    e.load_source(text, "operator").unwrap();
    e.set_budget(50);
    assert_eq!(
        e.inject("operator", "F", "go", Value::Bool(true))
            .unwrap_err(),
        InjectError::CascadeBudgetExceeded { limit: 50 }
    );
}

#[test]
fn failed_query_is_a_diagnostic() {
    let mut e = Engine::with_blocks(&["delivery"]).unwrap();
    let text = "DeliveryTask: Individual: Delivery 2\n: SetModel: Model Delivery\n: robot: Robot 1";
    e.load_source(text, "operator").unwrap();
    assert_eq!(e.value("Robot 1", "task"), Value::reference("Delivery 1"));
    let last = e.diagnostics().last().unwrap();
    assert_eq!(
        (last.individual.as_str(), last.property.as_str()),
        ("Robot 1", "task")
    );
    assert!(last.message.contains("2 individuals"));
}

#[test]
fn view_payload_reflects_availability() {
    let mut e = engine(&["delivery"], "A", "B", "C");
    assert_eq!(e.view_names(), ["View Delivery", "View Robot"]);
    let v = e.view("View Delivery").unwrap();
    assert_eq!(v.mode, "showcase");
    assert_eq!(v.individual.as_deref(), Some("Delivery 1"));
    let flags: Vec<(&str, bool)> = v
        .controls
        .iter()
        .map(|c| (c.title.as_str(), c.available))
        .collect();
    assert_eq!(
        flags,
        [
            ("Came Object Location", true),
            ("Took Object", false),
            ("Came Target Location", false),
            ("Put Object", false)
        ]
    );
    assert!(v
        .controls
        .iter()
        .all(|c| c.control_type == "button" && c.value == "1"));
    assert_eq!(v.values["robotLoc"], loc("A"));
    assert!(e.view("View Robot").unwrap().controls.is_empty());
    assert!(e.view("Nope").is_none());
}
