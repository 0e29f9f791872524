use serde::Serialize;

use super::Value;

/// Whose property a [`Expr::Prop`] reads.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Subject {
    /// `$.p`: the individual the rule is evaluated on.
    Current,
    /// `$(e).p`: the individual `e` evaluates to.
    Deref(Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum UnaryOp {
    /// `+` numeric coercion.
    Plus,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BinaryOp {
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
    And,
    Or,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::Lt => "<",
            BinaryOp::Gt => ">",
            BinaryOp::Le => "<=",
            BinaryOp::Ge => ">=",
            BinaryOp::And => "&&",
            BinaryOp::Or => "||",
        }
    }
}

/// Restriction expression AST.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Expr {
    Literal(Value),
    Prop {
        subject: Subject,
        property: String,
    },
    CurrentIndividual,
    /// `$Value`: the value of the event being validated or reacted to.
    EventValue,
    /// `$($EQ.$Model("M"), $EQ.p(e), ...)`: the unique individual of model
    /// `M` whose `p` equals `e` for every constraint.
    Query {
        model: String,
        constraints: Vec<(String, Expr)>,
    },
    Unary {
        op: UnaryOp,
        operand: Box<Expr>,
    },
    Binary {
        op: BinaryOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Ternary {
        cond: Box<Expr>,
        then: Box<Expr>,
        otherwise: Box<Expr>,
    },
}

impl Expr {
    pub fn prop(property: impl Into<String>) -> Self {
        Expr::Prop {
            subject: Subject::Current,
            property: property.into(),
        }
    }

    pub fn deref(of: Expr, property: impl Into<String>) -> Self {
        Expr::Prop {
            subject: Subject::Deref(Box::new(of)),
            property: property.into(),
        }
    }

    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    /// Every property name the expression mentions, including query
    /// constraint properties.
    pub fn referenced_properties(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |e| match e {
            Expr::Prop { property, .. } => out.push(property.as_str()),
            Expr::Query { constraints, .. } => {
                out.extend(constraints.iter().map(|(p, _)| p.as_str()))
            }
            _ => {}
        });
        out
    }

    pub fn referenced_models(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let Expr::Query { model, .. } = e {
                out.push(model.as_str());
            }
        });
        out
    }

    fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Prop {
                subject: Subject::Deref(inner),
                ..
            } => inner.walk(f),
            Expr::Query { constraints, .. } => {
                for (_, e) in constraints {
                    e.walk(f);
                }
            }
            Expr::Unary { operand, .. } => operand.walk(f),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.walk(f);
                rhs.walk(f);
            }
            Expr::Ternary {
                cond,
                then,
                otherwise,
            } => {
                cond.walk(f);
                then.walk(f);
                otherwise.walk(f);
            }
            _ => {}
        }
    }
}

/// The `EditIndividual` system act carried by a SetDo restriction.
///
/// Kept apart from [`Expr`] so an edit can only ever be the root of a SetDo.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EditAction {
    /// `$IndividualID`: the individual being edited.
    pub target: Expr,
    /// `$Condition`: evaluated with `$Value` bound to the triggering event.
    pub guard: Option<Expr>,
    pub assignments: Vec<(String, Expr)>,
}

impl EditAction {
    pub fn expressions(&self) -> impl Iterator<Item = &Expr> {
        std::iter::once(&self.target)
            .chain(self.guard.iter())
            .chain(self.assignments.iter().map(|(_, e)| e))
    }
}
