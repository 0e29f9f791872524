use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ast::{BinaryOp, Expr, Subject, UnaryOp};
use super::Value;

/// Reserved slot carrying model membership. Creating an individual writes
/// its concept here, so queries over a model subscribe to it.
pub const MEMBERSHIP: &str = "$Instance";

/// Read access to projected graph state.
pub trait StateView {
    /// Latest value of a slot, `Value::Null` when never assigned.
    fn value(&self, individual: &str, property: &str) -> Value;

    /// Individuals created with the given model, in creation order.
    fn members(&self, model: &str) -> Vec<String>;
}

pub struct EvalContext<'a> {
    pub state: &'a dyn StateView,
    pub current: &'a str,
    /// The value of the event under validation, bound to `$Value`.
    pub value: Option<&'a Value>,
}

impl<'a> EvalContext<'a> {
    pub fn new(state: &'a dyn StateView, current: &'a str) -> Self {
        EvalContext {
            state,
            current,
            value: None,
        }
    }

    pub fn with_value(mut self, value: &'a Value) -> Self {
        self.value = Some(value);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("query over `{model}` matched no individual")]
    QueryNoMatch { model: String },
    #[error("query over `{model}` matched {count} individuals")]
    QueryAmbiguous { model: String, count: usize },
    #[error("cannot read `{property}` through non-reference {found}")]
    DerefOfNonRef { property: String, found: Value },
    #[error("cannot coerce {found} to a number")]
    CoercionFailure { found: Value },
    #[error("`$Value` is not bound in this context")]
    UnboundValue,
}

pub fn eval(e: &Expr, ctx: &EvalContext<'_>) -> Result<Value, EvalError> {
    match e {
        Expr::Literal(v) => Ok(v.clone()),
        Expr::CurrentIndividual => Ok(Value::Ref(ctx.current.to_string())),
        Expr::EventValue => ctx.value.cloned().ok_or(EvalError::UnboundValue),
        Expr::Prop { subject, property } => match subject {
            Subject::Current => Ok(ctx.state.value(ctx.current, property)),
            Subject::Deref(of) => match eval(of, ctx)? {
                Value::Ref(id) => Ok(ctx.state.value(&id, property)),
                Value::Null => Ok(Value::Null),
                found => Err(EvalError::DerefOfNonRef {
                    property: property.clone(),
                    found,
                }),
            },
        },
        Expr::Query { model, constraints } => {
            let wanted = constraints
                .iter()
                .map(|(p, e)| Ok((p.as_str(), eval(e, ctx)?)))
                .collect::<Result<Vec<_>, EvalError>>()?;
            let hits: Vec<String> = ctx
                .state
                .members(model)
                .into_iter()
                .filter(|id| {
                    wanted
                        .iter()
                        .all(|(p, v)| ctx.state.value(id, p).loose_eq(v))
                })
                .collect();
            match hits.len() {
                0 => Err(EvalError::QueryNoMatch {
                    model: model.clone(),
                }),
                1 => Ok(Value::Ref(hits.into_iter().next().unwrap_or_default())),
                count => Err(EvalError::QueryAmbiguous {
                    model: model.clone(),
                    count,
                }),
            }
        }
        Expr::Unary { op, operand } => {
            let v = eval(operand, ctx)?;
            match op {
                UnaryOp::Not => Ok(Value::Bool(!v.truthy())),
                UnaryOp::Plus => match v {
                    Value::Null => Ok(Value::Null),
                    other => other
                        .as_number()
                        .map(Value::Num)
                        .ok_or(EvalError::CoercionFailure { found: other }),
                },
            }
        }
        Expr::Binary { op, lhs, rhs } => match op {
            BinaryOp::And => {
                let l = eval(lhs, ctx)?;
                if !l.truthy() {
                    return Ok(Value::Bool(false));
                }
                Ok(Value::Bool(eval(rhs, ctx)?.truthy()))
            }
            BinaryOp::Or => {
                let l = eval(lhs, ctx)?;
                if l.truthy() {
                    return Ok(Value::Bool(true));
                }
                Ok(Value::Bool(eval(rhs, ctx)?.truthy()))
            }
            BinaryOp::Eq => Ok(Value::Bool(eval(lhs, ctx)?.loose_eq(&eval(rhs, ctx)?))),
            BinaryOp::Ne => Ok(Value::Bool(!eval(lhs, ctx)?.loose_eq(&eval(rhs, ctx)?))),
            BinaryOp::Lt | BinaryOp::Gt | BinaryOp::Le | BinaryOp::Ge => {
                let (l, r) = (eval(lhs, ctx)?, eval(rhs, ctx)?);
                let result = match (l.as_number(), r.as_number()) {
                    (Some(a), Some(b)) => match op {
                        BinaryOp::Lt => a < b,
                        BinaryOp::Gt => a > b,
                        BinaryOp::Le => a <= b,
                        _ => a >= b,
                    },
                    _ => false,
                };
                Ok(Value::Bool(result))
            }
        },
        Expr::Ternary {
            cond,
            then,
            otherwise,
        } => {
            if eval(cond, ctx)?.truthy() {
                eval(then, ctx)
            } else {
                eval(otherwise, ctx)
            }
        }
    }
}

/// A graph slot; `individual: None` subscribes to the property on every
/// individual.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Slot {
    pub individual: Option<String>,
    pub property: String,
}

impl Slot {
    pub fn exact(individual: impl Into<String>, property: impl Into<String>) -> Self {
        Slot {
            individual: Some(individual.into()),
            property: property.into(),
        }
    }

    pub fn any(property: impl Into<String>) -> Self {
        Slot {
            individual: None,
            property: property.into(),
        }
    }

    pub fn covers(&self, individual: &str, property: &str) -> bool {
        self.property == property && self.individual.as_deref().is_none_or(|i| i == individual)
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {})",
            self.individual.as_deref().unwrap_or("*"),
            self.property
        )
    }
}

/// Slots whose change can alter the value of `e` in this context.
///
/// Every operand of every operator contributes, both branches of `?:`
/// included. A dereference contributes the relation's own slots plus the
/// target property on the current referent, or on every individual when
/// the relation does not currently hold a reference. A query contributes
/// membership and its constraint properties on every individual.
pub fn dependencies(e: &Expr, ctx: &EvalContext<'_>) -> BTreeSet<Slot> {
    let mut out = BTreeSet::new();
    collect(e, ctx, &mut out);
    out
}

fn collect(e: &Expr, ctx: &EvalContext<'_>, out: &mut BTreeSet<Slot>) {
    match e {
        Expr::Literal(_) | Expr::CurrentIndividual | Expr::EventValue => {}
        Expr::Prop { subject, property } => match subject {
            Subject::Current => {
                out.insert(Slot::exact(ctx.current, property.as_str()));
            }
            Subject::Deref(of) => {
                collect(of, ctx, out);
                match eval(of, ctx) {
                    Ok(Value::Ref(id)) => out.insert(Slot::exact(id, property.as_str())),
                    _ => out.insert(Slot::any(property.as_str())),
                };
            }
        },
        Expr::Query { constraints, .. } => {
            out.insert(Slot::any(MEMBERSHIP));
            for (p, c) in constraints {
                out.insert(Slot::any(p.as_str()));
                collect(c, ctx, out);
            }
        }
        Expr::Unary { operand, .. } => collect(operand, ctx, out),
        Expr::Binary { lhs, rhs, .. } => {
            collect(lhs, ctx, out);
            collect(rhs, ctx, out);
        }
        Expr::Ternary {
            cond,
            then,
            otherwise,
        } => {
            collect(cond, ctx, out);
            collect(then, ctx, out);
            collect(otherwise, ctx, out);
        }
    }
}
