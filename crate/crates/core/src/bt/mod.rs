//! Minimal behavior tree interpreter: Sequence, Fallback, condition and
//! action leaves, ticked from the root.

mod blackboard;
mod node;

pub use blackboard::{Blackboard, Check, Effect};
pub use node::{ConfigError, Kind, Node, NodeConfig, NodeKind};

use serde::{Deserialize, Serialize};

pub const BASE_TREE: &str = include_str!("../../trees/base.json");
pub const RECHARGE_BRANCH: &str = include_str!("../../trees/recharge.json");
pub const DOCK_BRANCH: &str = include_str!("../../trees/dock.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Success,
    Failure,
    Running,
}

/// Result of one tick. `visited` lists preorder node ids in visit order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tick {
    pub status: Status,
    pub visited: Vec<usize>,
}

/// A validated tree with preorder labels for traces and metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    root: Node,
    labels: Vec<String>,
    kinds: Vec<Kind>,
}

impl Tree {
    pub fn new(root: Node) -> Self {
        let mut labels = Vec::new();
        let mut kinds = Vec::new();
        fn walk(n: &Node, labels: &mut Vec<String>, kinds: &mut Vec<Kind>) {
            labels.push(n.name.clone());
            kinds.push(n.kind_tag());
            for c in n.children() {
                walk(c, labels, kinds);
            }
        }
        walk(&root, &mut labels, &mut kinds);
        Tree {
            root,
            labels,
            kinds,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Node::from_json(text).map(Tree::new)
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.labels.len() - 1
    }

    pub fn label(&self, id: usize) -> &str {
        &self.labels[id]
    }

    pub fn kind(&self, id: usize) -> Kind {
        self.kinds[id]
    }

    pub fn find(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Preorder ids from the root down to `target`, both included.
    pub fn path_to(&self, target: usize) -> Vec<usize> {
        fn go(n: &Node, id: usize, target: usize, path: &mut Vec<usize>) -> bool {
            path.push(id);
            if id == target {
                return true;
            }
            let mut next = id + 1;
            for c in n.children() {
                if go(c, next, target, path) {
                    return true;
                }
                next += c.size();
            }
            path.pop();
            false
        }
        let mut path = Vec::new();
        go(&self.root, 0, target, &mut path);
        path
    }

    pub fn tick(&self, bb: &mut Blackboard) -> Tick {
        let mut visited = Vec::new();
        let status = tick_node(&self.root, 0, bb, &mut visited);
        Tick { status, visited }
    }

    /// The action that reported `Running` in a tick, if any.
    pub fn acting_node(&self, tick: &Tick) -> Option<usize> {
        let last = *tick.visited.last()?;
        (tick.status == Status::Running && self.kinds[last] == Kind::Action).then_some(last)
    }
}

fn tick_node(n: &Node, id: usize, bb: &mut Blackboard, visited: &mut Vec<usize>) -> Status {
    visited.push(id);
    match &n.kind {
        NodeKind::Condition(c) => {
            if c.holds(bb) {
                Status::Success
            } else {
                Status::Failure
            }
        }
        NodeKind::Action(e) => e.apply(bb),
        NodeKind::Sequence(children) | NodeKind::Fallback(children) => {
            // A Sequence continues past Success, a Fallback past Failure.
            let pass = if matches!(n.kind, NodeKind::Sequence(_)) {
                Status::Success
            } else {
                Status::Failure
            };
            let mut next = id + 1;
            for c in children {
                let s = tick_node(c, next, bb, visited);
                if s != pass {
                    return s;
                }
                next += c.size();
            }
            pass
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extensions {
    #[serde(default)]
    pub recharge: bool,
    #[serde(default)]
    pub dock: bool,
}

/// Composes the benchmark tree from the bundled configs. The recharge branch
/// goes leftmost under a new Sequence root; the dock branch goes rightmost
/// under that same root, creating it when recharge is off.
pub fn build_benchmark_tree(ext: Extensions) -> Tree {
    let load = |t: &str| Node::from_json(t).expect("bundled tree config is valid");
    let base = load(BASE_TREE);
    if !ext.recharge && !ext.dock {
        return Tree::new(base);
    }
    let mut children = Vec::new();
    if ext.recharge {
        children.push(load(RECHARGE_BRANCH));
    }
    children.push(base);
    if ext.dock {
        children.push(load(DOCK_BRANCH));
    }
    Tree::new(Node::sequence("Root", children))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub ticks: usize,
    pub visits: usize,
    pub trace: Vec<Tick>,
    pub final_bb: Blackboard,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("tree did not succeed within {limit} ticks")]
pub struct TickBudgetExceeded {
    pub limit: usize,
    pub report: Box<RunReport>,
}

/// Ticks until the root succeeds. `world` runs before every tick with the
/// zero-based tick index and may change the blackboard.
pub fn run_to_completion(
    tree: &Tree,
    mut bb: Blackboard,
    mut world: impl FnMut(usize, &mut Blackboard),
    max_ticks: usize,
) -> Result<RunReport, TickBudgetExceeded> {
    assert!(max_ticks > 0, "max_ticks must be positive");
    let mut trace = Vec::new();
    for i in 0..max_ticks {
        world(i, &mut bb);
        let tick = tree.tick(&mut bb);
        let done = tick.status == Status::Success;
        trace.push(tick);
        if done {
            return Ok(report(trace, bb));
        }
    }
    Err(TickBudgetExceeded {
        limit: max_ticks,
        report: Box::new(report(trace, bb)),
    })
}

fn report(trace: Vec<Tick>, final_bb: Blackboard) -> RunReport {
    RunReport {
        ticks: trace.len(),
        visits: trace.iter().map(|t| t.visited.len()).sum(),
        trace,
        final_bb,
    }
}
