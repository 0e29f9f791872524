use serde::{Deserialize, Serialize};

use super::Status;

/// World state read by condition leaves and written by action leaves.
///
/// While the robot carries the object, `object_loc` holds the robot's name,
/// mirroring how the delivery model records a picked-up object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Blackboard {
    pub robot: String,
    pub robot_loc: String,
    pub object_loc: String,
    pub target_loc: String,
    pub battery_level: f64,
    pub battery_min: f64,
    pub station_loc: String,
    pub dock_loc: Option<String>,
    pub carrying: bool,
    pub delivered: bool,
}

impl Blackboard {
    pub fn new(robot_loc: &str, object_loc: &str, target_loc: &str) -> Self {
        let mut bb = Blackboard {
            robot: "Robot 1".into(),
            robot_loc: robot_loc.into(),
            object_loc: object_loc.into(),
            target_loc: target_loc.into(),
            battery_level: 100.0,
            battery_min: 20.0,
            station_loc: "Loc Station".into(),
            dock_loc: None,
            carrying: false,
            delivered: false,
        };
        bb.refresh();
        bb
    }

    pub fn with_dock(mut self, dock: &str) -> Self {
        self.dock_loc = Some(dock.into());
        self
    }

    /// Recomputes `delivered` after a change to locations.
    pub fn refresh(&mut self) {
        self.delivered = !self.carrying && self.object_loc == self.target_loc;
    }

    fn move_robot(&mut self, to: String) {
        self.robot_loc = to;
    }
}

/// Builtin predicates that condition leaves may name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    ObjectAtTarget,
    Holding,
    RobotAtObject,
    RobotAtTarget,
    BatteryOk,
    RobotAtDock,
}

impl Check {
    pub fn holds(self, bb: &Blackboard) -> bool {
        match self {
            Check::ObjectAtTarget => !bb.carrying && bb.object_loc == bb.target_loc,
            Check::Holding => bb.carrying,
            Check::RobotAtObject => bb.robot_loc == bb.object_loc,
            Check::RobotAtTarget => bb.robot_loc == bb.target_loc,
            Check::BatteryOk => bb.battery_level >= bb.battery_min,
            Check::RobotAtDock => bb.dock_loc.as_deref() == Some(bb.robot_loc.as_str()),
        }
    }
}

/// Builtin effects that action leaves may name.
///
/// An effect changes the world and reports `Running`, so each tick performs
/// at most one world change and the next tick re-checks every guard from the
/// root. `Failure` means the effect could not act.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Effect {
    MoveToObject,
    Pick,
    MoveToTarget,
    Place,
    /// Travels to the station, then charges on the following tick.
    Recharge,
    Dock,
}

impl Effect {
    pub fn apply(self, bb: &mut Blackboard) -> Status {
        match self {
            Effect::MoveToObject => {
                if bb.carrying {
                    return Status::Failure;
                }
                bb.move_robot(bb.object_loc.clone());
            }
            Effect::Pick => {
                if bb.carrying || bb.robot_loc != bb.object_loc {
                    return Status::Failure;
                }
                bb.carrying = true;
                bb.object_loc = bb.robot.clone();
            }
            Effect::MoveToTarget => bb.move_robot(bb.target_loc.clone()),
            Effect::Place => {
                if !bb.carrying {
                    return Status::Failure;
                }
                bb.carrying = false;
                bb.object_loc = bb.robot_loc.clone();
            }
            Effect::Recharge => {
                if bb.robot_loc != bb.station_loc {
                    bb.move_robot(bb.station_loc.clone());
                } else {
                    bb.battery_level = 100.0;
                }
            }
            Effect::Dock => match bb.dock_loc.clone() {
                Some(dock) => bb.move_robot(dock),
                None => return Status::Failure,
            },
        }
        bb.refresh();
        Status::Running
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pick_and_place_track_the_object() {
        let mut bb = Blackboard::new("Loc B", "Loc B", "Loc C");
        assert_eq!(Effect::Place.apply(&mut bb), Status::Failure);
        assert_eq!(Effect::Pick.apply(&mut bb), Status::Running);
        assert_eq!(bb.object_loc, "Robot 1");
        assert!(Check::Holding.holds(&bb));
        Effect::MoveToTarget.apply(&mut bb);
        Effect::Place.apply(&mut bb);
        assert_eq!(bb.object_loc, "Loc C");
        assert!(bb.delivered);
    }

    #[test]
    fn recharge_travels_then_charges() {
        let mut bb = Blackboard::new("Loc A", "Loc B", "Loc C");
        bb.battery_level = 15.0;
        assert!(!Check::BatteryOk.holds(&bb));
        Effect::Recharge.apply(&mut bb);
        assert_eq!(
            (bb.robot_loc.as_str(), bb.battery_level),
            ("Loc Station", 15.0)
        );
        Effect::Recharge.apply(&mut bb);
        assert_eq!(bb.battery_level, 100.0);
        assert!(Check::BatteryOk.holds(&bb));
    }

    #[test]
    fn dock_needs_a_dock() {
        let mut bb = Blackboard::new("Loc A", "Loc B", "Loc C");
        assert_eq!(Effect::Dock.apply(&mut bb), Status::Failure);
        let mut bb = bb.with_dock("Loc Dock");
        assert_eq!(Effect::Dock.apply(&mut bb), Status::Running);
        assert!(Check::RobotAtDock.holds(&bb));
    }
}
