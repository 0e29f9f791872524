use serde::{Deserialize, Serialize};

use super::blackboard::{Check, Effect};

/// Node kinds of the tree-config format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Sequence,
    Fallback,
    Condition,
    Action,
}

/// On-disk shape of a node. Validated into [`Node`] on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeConfig {
    pub kind: Kind,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<Check>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effect: Option<Effect>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<NodeConfig>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("composite `{0}` has no children")]
    EmptyComposite(String),
    #[error("leaf `{0}` has children")]
    LeafWithChildren(String),
    #[error("condition `{0}` names no check")]
    MissingCheck(String),
    #[error("action `{0}` names no effect")]
    MissingEffect(String),
    #[error("`{0}` mixes check and effect fields with its kind")]
    StrayField(String),
    #[error("malformed tree config: {0}")]
    Json(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    Sequence(Vec<Node>),
    Fallback(Vec<Node>),
    Condition(Check),
    Action(Effect),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NodeConfig", into = "NodeConfig")]
pub struct Node {
    pub name: String,
    pub kind: NodeKind,
}

impl Node {
    pub fn sequence(name: impl Into<String>, children: Vec<Node>) -> Self {
        Node {
            name: name.into(),
            kind: NodeKind::Sequence(children),
        }
    }

    pub fn fallback(name: impl Into<String>, children: Vec<Node>) -> Self {
        Node {
            name: name.into(),
            kind: NodeKind::Fallback(children),
        }
    }

    pub fn condition(name: impl Into<String>, check: Check) -> Self {
        Node {
            name: name.into(),
            kind: NodeKind::Condition(check),
        }
    }

    pub fn action(name: impl Into<String>, effect: Effect) -> Self {
        Node {
            name: name.into(),
            kind: NodeKind::Action(effect),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: NodeConfig =
            serde_json::from_str(text).map_err(|e| ConfigError::Json(e.to_string()))?;
        Node::try_from(config)
    }

    pub fn children(&self) -> &[Node] {
        match &self.kind {
            NodeKind::Sequence(c) | NodeKind::Fallback(c) => c,
            _ => &[],
        }
    }

    pub fn kind_tag(&self) -> Kind {
        match self.kind {
            NodeKind::Sequence(_) => Kind::Sequence,
            NodeKind::Fallback(_) => Kind::Fallback,
            NodeKind::Condition(_) => Kind::Condition,
            NodeKind::Action(_) => Kind::Action,
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(Node::size).sum::<usize>()
    }
}

impl TryFrom<NodeConfig> for Node {
    type Error = ConfigError;

    fn try_from(c: NodeConfig) -> Result<Self, ConfigError> {
        let name = c.name;
        match c.kind {
            Kind::Sequence | Kind::Fallback => {
                if c.check.is_some() || c.effect.is_some() {
                    return Err(ConfigError::StrayField(name));
                }
                if c.children.is_empty() {
                    return Err(ConfigError::EmptyComposite(name));
                }
                let children = c
                    .children
                    .into_iter()
                    .map(Node::try_from)
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(if c.kind == Kind::Sequence {
                    Node::sequence(name, children)
                } else {
                    Node::fallback(name, children)
                })
            }
            Kind::Condition | Kind::Action if !c.children.is_empty() => {
                Err(ConfigError::LeafWithChildren(name))
            }
            Kind::Condition => match (c.check, c.effect) {
                (Some(check), None) => Ok(Node::condition(name, check)),
                (None, None) => Err(ConfigError::MissingCheck(name)),
                _ => Err(ConfigError::StrayField(name)),
            },
            Kind::Action => match (c.check, c.effect) {
                (None, Some(effect)) => Ok(Node::action(name, effect)),
                (None, None) => Err(ConfigError::MissingEffect(name)),
                _ => Err(ConfigError::StrayField(name)),
            },
        }
    }
}

impl From<Node> for NodeConfig {
    fn from(n: Node) -> Self {
        let kind = n.kind_tag();
        let (check, effect, children) = match n.kind {
            NodeKind::Sequence(c) | NodeKind::Fallback(c) => {
                (None, None, c.into_iter().map(NodeConfig::from).collect())
            }
            NodeKind::Condition(check) => (Some(check), None, Vec::new()),
            NodeKind::Action(effect) => (None, Some(effect), Vec::new()),
        };
        NodeConfig {
            kind,
            name: n.name,
            check,
            effect,
            children,
        }
    }
}
