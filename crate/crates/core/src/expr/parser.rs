//! Recursive-descent parser for restriction expressions.
//!
//! Precedence, loosest first: `?:`, `||`, `&&`, equality (`==` `!=` `===`
//! `!==`), comparison (`<` `>` `<=` `>=`), unary (`+` `!`).

use thiserror::Error;

use super::ast::{BinaryOp, EditAction, Expr, Subject, UnaryOp};
use super::value::parse_number;
use super::Value;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("syntax error at offset {offset}: {message}")]
pub struct SyntaxError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    /// `$name`
    Dollar(String),
    /// `$.`
    DollarDot,
    /// `$(`
    DollarParen,
    Ident(String),
    Num(f64),
    Str(String),
    Punct(&'static str),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    offset: usize,
}

const PUNCTS: [&str; 22] = [
    "===", "!==", "==", "!=", "<=", ">=", "<-", "&&", "||", "(", ")", "{", "}", ",", ".", ":", "?",
    "!", "+", "<", ">", "=",
];

fn tokenize(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |offset, message: &str| SyntaxError {
        offset,
        message: message.to_string(),
    };
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c == '$' {
            match bytes.get(i + 1).map(|b| *b as char) {
                Some('.') => {
                    out.push(Token {
                        tok: Tok::DollarDot,
                        offset: start,
                    });
                    i += 2;
                }
                Some('(') => {
                    out.push(Token {
                        tok: Tok::DollarParen,
                        offset: start,
                    });
                    i += 2;
                }
                Some(n) if n.is_ascii_alphabetic() || n == '_' => {
                    i += 1;
                    let s = i;
                    while i < bytes.len() && is_ident_char(bytes[i] as char) {
                        i += 1;
                    }
                    out.push(Token {
                        tok: Tok::Dollar(src[s..i].to_string()),
                        offset: start,
                    });
                }
                _ => return Err(err(start, "dangling `$`")),
            }
            continue;
        }
        if c.is_ascii_digit() {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            let n = parse_number(&src[start..i]).ok_or_else(|| err(start, "bad number"))?;
            out.push(Token {
                tok: Tok::Num(n),
                offset: start,
            });
            continue;
        }
        if c == '"' || c == '\'' {
            i += 1;
            let s = i;
            while i < bytes.len() && bytes[i] as char != c {
                i += 1;
            }
            if i >= bytes.len() {
                return Err(err(start, "unterminated string"));
            }
            out.push(Token {
                tok: Tok::Str(src[s..i].to_string()),
                offset: start,
            });
            i += 1;
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            while i < bytes.len() && is_ident_char(bytes[i] as char) {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(src[start..i].to_string()),
                offset: start,
            });
            continue;
        }
        match PUNCTS.iter().find(|p| src[i..].starts_with(**p)) {
            Some(p) => {
                out.push(Token {
                    tok: Tok::Punct(p),
                    offset: start,
                });
                i += p.len();
            }
            None => return Err(err(start, &format!("unexpected character `{c}`"))),
        }
    }
    Ok(out)
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Self, SyntaxError> {
        Ok(Parser {
            toks: tokenize(src)?,
            pos: 0,
            end: src.len(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.offset)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, SyntaxError> {
        Err(SyntaxError {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    fn eat(&mut self, p: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Punct(q)) if *q == p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, p: &str) -> Result<(), SyntaxError> {
        if self.eat(p) {
            Ok(())
        } else {
            self.error(format!("expected `{p}`"))
        }
    }

    fn ident(&mut self) -> Result<String, SyntaxError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.error("expected property name"),
        }
    }

    fn finish(&self) -> Result<(), SyntaxError> {
        if self.pos < self.toks.len() {
            self.error("unexpected trailing input")
        } else {
            Ok(())
        }
    }

    fn expr(&mut self) -> Result<Expr, SyntaxError> {
        let cond = self.or()?;
        if self.eat("?") {
            let then = self.expr()?;
            self.expect(":")?;
            let otherwise = self.expr()?;
            return Ok(Expr::Ternary {
                cond: Box::new(cond),
                then: Box::new(then),
                otherwise: Box::new(otherwise),
            });
        }
        Ok(cond)
    }

    fn or(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.and()?;
        while self.eat("||") {
            lhs = Expr::binary(BinaryOp::Or, lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.equality()?;
        while self.eat("&&") {
            lhs = Expr::binary(BinaryOp::And, lhs, self.equality()?);
        }
        Ok(lhs)
    }

    fn equality(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.comparison()?;
        loop {
            let op = if self.eat("==") || self.eat("===") {
                BinaryOp::Eq
            } else if self.eat("!=") || self.eat("!==") {
                BinaryOp::Ne
            } else {
                return Ok(lhs);
            };
            lhs = Expr::binary(op, lhs, self.comparison()?);
        }
    }

    fn comparison(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat("<=") {
                BinaryOp::Le
            } else if self.eat(">=") {
                BinaryOp::Ge
            } else if self.eat("<") {
                BinaryOp::Lt
            } else if self.eat(">") {
                BinaryOp::Gt
            } else {
                return Ok(lhs);
            };
            lhs = Expr::binary(op, lhs, self.unary()?);
        }
    }

    fn unary(&mut self) -> Result<Expr, SyntaxError> {
        let op = if self.eat("+") {
            UnaryOp::Plus
        } else if self.eat("!") {
            UnaryOp::Not
        } else {
            return self.primary();
        };
        Ok(Expr::Unary {
            op,
            operand: Box::new(self.unary()?),
        })
    }

    fn primary(&mut self) -> Result<Expr, SyntaxError> {
        match self.bump() {
            Some(Tok::Num(n)) => Ok(Expr::Literal(Value::Num(n))),
            Some(Tok::Str(s)) => Ok(Expr::Literal(Value::Str(s))),
            Some(Tok::Ident(s)) if s == "true" => Ok(Expr::Literal(Value::Bool(true))),
            Some(Tok::Ident(s)) if s == "false" => Ok(Expr::Literal(Value::Bool(false))),
            Some(Tok::Dollar(name)) => match name.as_str() {
                "CurrentIndividual" => Ok(Expr::CurrentIndividual),
                "Value" => Ok(Expr::EventValue),
                other => {
                    self.pos -= 1;
                    self.error(format!("`${other}` is not valid here"))
                }
            },
            Some(Tok::DollarDot) => {
                let first = self.ident()?;
                self.chain(Expr::prop(first))
            }
            Some(Tok::DollarParen) => {
                let inner = if matches!(self.peek(), Some(Tok::Dollar(n)) if n == "EQ") {
                    self.query()?
                } else {
                    let e = self.expr()?;
                    self.expect(")")?;
                    if !matches!(self.peek(), Some(Tok::Punct("."))) {
                        return self.error("`$(...)` must be followed by `.property`");
                    }
                    e
                };
                self.chain(inner)
            }
            Some(Tok::Punct("(")) => {
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            _ => {
                self.pos = self.pos.saturating_sub(1);
                self.error("expected an operand")
            }
        }
    }

    /// Trailing `.p.q` turns the left-hand side into nested dereferences.
    fn chain(&mut self, mut lhs: Expr) -> Result<Expr, SyntaxError> {
        while self.eat(".") {
            let p = self.ident()?;
            lhs = Expr::deref(lhs, p);
        }
        Ok(lhs)
    }

    /// Body of `$($EQ.$Model("M"), $EQ.p(e), ...)` after the opening `$(`.
    fn query(&mut self) -> Result<Expr, SyntaxError> {
        let mut model = None;
        let mut constraints = Vec::new();
        loop {
            match self.bump() {
                Some(Tok::Dollar(n)) if n == "EQ" => {}
                _ => {
                    self.pos -= 1;
                    return self.error("expected `$EQ`");
                }
            }
            self.expect(".")?;
            match self.bump() {
                Some(Tok::Dollar(n)) if n == "Model" => {
                    self.expect("(")?;
                    match self.bump() {
                        Some(Tok::Str(s)) => model = Some(s),
                        _ => {
                            self.pos -= 1;
                            return self.error("expected model name string");
                        }
                    }
                    self.expect(")")?;
                }
                Some(Tok::Ident(p)) => {
                    self.expect("(")?;
                    let e = self.expr()?;
                    self.expect(")")?;
                    constraints.push((p, e));
                }
                _ => {
                    self.pos -= 1;
                    return self.error("expected `$Model` or a property constraint");
                }
            }
            if self.eat(")") {
                break;
            }
            self.expect(",")?;
        }
        match model {
            Some(model) => Ok(Expr::Query { model, constraints }),
            None => self.error("query without `$EQ.$Model(...)`"),
        }
    }

    fn edit_object(&mut self) -> Result<EditAction, SyntaxError> {
        let parens = self.eat("(");
        self.expect("{")?;
        let mut action = None;
        let mut target = None;
        let mut guard = None;
        let mut assignments = Vec::new();
        loop {
            if self.eat("}") {
                break;
            }
            let key = match self.bump() {
                Some(Tok::Str(k)) => k,
                _ => {
                    self.pos -= 1;
                    return self.error("expected quoted key");
                }
            };
            self.expect(":")?;
            match key.as_str() {
                "$do" => match self.bump() {
                    Some(Tok::Str(a)) => action = Some(a),
                    _ => {
                        self.pos -= 1;
                        return self.error("`$do` expects an action name");
                    }
                },
                "$IndividualID" => target = Some(self.expr()?),
                "$Condition" => guard = Some(self.expr()?),
                k if k.starts_with('$') => return self.error(format!("unknown system key `{k}`")),
                _ => assignments.push((key, self.expr()?)),
            }
            if !self.eat(",") {
                self.expect("}")?;
                break;
            }
        }
        if parens {
            self.expect(")")?;
        }
        match action.as_deref() {
            Some("EditIndividual") => {}
            Some(other) => return self.error(format!("unsupported system act `{other}`")),
            None => return self.error("missing `$do`"),
        }
        Ok(EditAction {
            target: target.unwrap_or(Expr::CurrentIndividual),
            guard,
            assignments,
        })
    }

    /// `$.p <- v` / `$.rel.p = v` shorthand.
    fn edit_shorthand(&mut self) -> Result<EditAction, SyntaxError> {
        let lhs = self.primary()?;
        if !(self.eat("<-") || self.eat("=")) {
            return self.error("expected `<-`");
        }
        let rhs = self.expr()?;
        let (target, property) = match lhs {
            Expr::Prop {
                subject: Subject::Current,
                property,
            } => (Expr::CurrentIndividual, property),
            Expr::Prop {
                subject: Subject::Deref(of),
                property,
            } => (*of, property),
            _ => return self.error("left side of `<-` must be a property"),
        };
        Ok(EditAction {
            target,
            guard: Some(Expr::binary(
                BinaryOp::Eq,
                Expr::EventValue,
                Expr::Literal(Value::str("1")),
            )),
            assignments: vec![(property, rhs)],
        })
    }
}

/// Parses a Condition / ValueCondition / SetValue / Default expression.
pub fn parse_expr(text: &str) -> Result<Expr, SyntaxError> {
    let mut p = Parser::new(text)?;
    if p.peek().is_none() {
        return p.error("empty expression");
    }
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

/// Parses a SetDo body: the `({ '$do': 'EditIndividual', ... })` object
/// form or the `$.p <- v` shorthand.
pub fn parse_action(text: &str) -> Result<EditAction, SyntaxError> {
    let mut p = Parser::new(text)?;
    let action = match p.peek() {
        Some(Tok::Punct("(")) | Some(Tok::Punct("{")) => p.edit_object()?,
        Some(_) => p.edit_shorthand()?,
        None => return p.error("empty SetDo"),
    };
    p.finish()?;
    Ok(action)
}
