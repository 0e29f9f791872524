use thiserror::Error;

use super::ast::*;
use super::lexer::{lex, LexError, Line, SourceBlock};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error("line {line}: unknown keyword `{keyword}`")]
    UnknownKeyword { line: usize, keyword: String },
    #[error("line {line}: {kind} restriction outside a model event")]
    OrphanRestriction { line: usize, kind: RestrictionKind },
    #[error("line {line}: second {kind} restriction on `{property}`")]
    DuplicateRestrictionKind {
        line: usize,
        property: String,
        kind: RestrictionKind,
    },
    #[error("line {line}: unexpected nested line")]
    UnexpectedNesting { line: usize },
    #[error("line {line}: missing name")]
    MissingName { line: usize },
}

struct Node<'a> {
    line: &'a Line,
    children: Vec<Node<'a>>,
}

fn build_tree(lines: &[Line]) -> Vec<Node<'_>> {
    fn level<'a>(lines: &'a [Line], idx: &mut usize, depth: usize) -> Vec<Node<'a>> {
        let mut out = Vec::new();
        while *idx < lines.len() && lines[*idx].depth == depth {
            let line = &lines[*idx];
            *idx += 1;
            let children = level(lines, idx, depth + 1);
            out.push(Node { line, children });
        }
        out
    }
    // The lexer guarantees each depth step is at most one, so every line
    // lands under its nearest shallower predecessor.
    let mut idx = 0;
    let mut roots = Vec::new();
    while idx < lines.len() {
        let depth = lines[idx].depth;
        roots.extend(level(lines, &mut idx, depth));
    }
    roots
}

pub fn parse_source(source: &str) -> Result<Vec<Declaration>, ParseError> {
    parse(&lex(source)?)
}

pub fn parse(block: &SourceBlock) -> Result<Vec<Declaration>, ParseError> {
    build_tree(&block.lines).iter().map(declaration).collect()
}

fn unknown(line: &Line, keyword: &str) -> ParseError {
    ParseError::UnknownKeyword {
        line: line.line,
        keyword: keyword.to_string(),
    }
}

fn name_of(line: &Line, text: &str) -> Result<String, ParseError> {
    let name = text.trim();
    if name.is_empty() {
        return Err(ParseError::MissingName { line: line.line });
    }
    Ok(name.to_string())
}

fn no_children(node: &Node<'_>) -> Result<(), ParseError> {
    match node.children.first() {
        Some(child) => Err(ParseError::UnexpectedNesting {
            line: child.line.line,
        }),
        None => Ok(()),
    }
}

fn declaration(node: &Node<'_>) -> Result<Declaration, ParseError> {
    let line = node.line;
    let Some((keyword, rest)) = line.tail.split_once(':') else {
        return Err(unknown(line, &line.tail));
    };
    let keyword = keyword.trim();
    let name = name_of(line, rest)?;
    match (line.head.as_str(), keyword) {
        ("Concept", "Instance") => {
            no_children(node)?;
            Ok(Declaration::Concept(ConceptDecl { name }))
        }
        ("Relation" | "Attribute", "Individual") => property(node, name),
        ("Concept" | "Relation" | "Attribute", _) | (_, "Instance") => Err(unknown(line, keyword)),
        (_, "Model") => model(node, name),
        ("View", "Individual") => view(node, name),
        (_, "Individual") => individual(node, name),
        _ => Err(unknown(line, keyword)),
    }
}

fn property(node: &Node<'_>, name: String) -> Result<Declaration, ParseError> {
    let prop_kind = if node.line.head == "Relation" {
        PropKind::Relation
    } else {
        PropKind::Attribute
    };
    let mut decl = PropertyDecl {
        name,
        prop_kind,
        range: None,
        data_type: None,
    };
    for child in &node.children {
        no_children(child)?;
        let l = child.line;
        match (prop_kind, l.head.as_str()) {
            (PropKind::Relation, "Range") => decl.range = Some(name_of(l, &l.tail)?),
            (PropKind::Attribute, "DataType") => {
                decl.data_type = Some(l.tail.parse().map_err(|_| unknown(l, &l.tail))?)
            }
            _ => return Err(unknown(l, &l.head)),
        }
    }
    Ok(Declaration::Property(decl))
}

fn prop_kind(head: &str) -> Option<PropKind> {
    match head {
        "Relation" => Some(PropKind::Relation),
        "Attribute" => Some(PropKind::Attribute),
        _ => None,
    }
}

fn model(node: &Node<'_>, name: String) -> Result<Declaration, ParseError> {
    let mut decl = ModelDecl {
        concept: node.line.head.clone(),
        name,
        set_model: None,
        events: Vec::new(),
    };
    for child in &node.children {
        let l = child.line;
        if let Some(kind) = prop_kind(&l.head) {
            decl.events.push(model_event(child, kind)?);
        } else if l.head == "SetModel" {
            no_children(child)?;
            decl.set_model = Some(name_of(l, &l.tail)?);
        } else if let Some(kind) = RestrictionKind::from_keyword(&l.head) {
            return Err(ParseError::OrphanRestriction { line: l.line, kind });
        } else {
            return Err(unknown(l, &l.head));
        }
    }
    Ok(Declaration::Model(decl))
}

fn model_event(node: &Node<'_>, kind: PropKind) -> Result<ModelEvent, ParseError> {
    let mut event = ModelEvent {
        prop_kind: kind,
        property: name_of(node.line, &node.line.tail)?,
        restrictions: Vec::new(),
        children: Vec::new(),
    };
    for child in &node.children {
        let l = child.line;
        if let Some(kind) = prop_kind(&l.head) {
            event.children.push(model_event(child, kind)?);
        } else if let Some(kind) = RestrictionKind::from_keyword(&l.head) {
            no_children(child)?;
            if event.restriction(kind).is_some() {
                return Err(ParseError::DuplicateRestrictionKind {
                    line: l.line,
                    property: event.property.clone(),
                    kind,
                });
            }
            event.restrictions.push(Restriction {
                kind,
                text: l.tail.clone(),
            });
        } else {
            return Err(unknown(l, &l.head));
        }
    }
    Ok(event)
}

fn individual(node: &Node<'_>, name: String) -> Result<Declaration, ParseError> {
    let mut decl = IndividualDecl {
        concept: node.line.head.clone(),
        name,
        set_model: None,
        assignments: Vec::new(),
    };
    for child in &node.children {
        no_children(child)?;
        let l = child.line;
        if l.head == "SetModel" {
            decl.set_model = Some(name_of(l, &l.tail)?);
        } else if let Some(kind) = RestrictionKind::from_keyword(&l.head) {
            return Err(ParseError::OrphanRestriction { line: l.line, kind });
        } else if prop_kind(&l.head).is_some() {
            return Err(unknown(l, &l.head));
        } else {
            decl.assignments.push(Assignment {
                property: l.head.clone(),
                value: name_of(l, &l.tail)?,
            });
        }
    }
    Ok(Declaration::Individual(decl))
}

fn view(node: &Node<'_>, name: String) -> Result<Declaration, ParseError> {
    let mut decl = ViewDecl {
        name,
        ..ViewDecl::default()
    };
    view_fields(&node.children, &mut decl)?;
    Ok(Declaration::View(decl))
}

fn view_fields(nodes: &[Node<'_>], decl: &mut ViewDecl) -> Result<(), ParseError> {
    for node in nodes {
        let l = node.line;
        let value = || name_of(l, &l.tail).map(Some);
        match l.head.as_str() {
            "Control" => {
                let mut control = Control {
                    property: name_of(l, &l.tail)?,
                    title: None,
                    control_type: None,
                    value: None,
                };
                for child in &node.children {
                    no_children(child)?;
                    let c = child.line;
                    let v = Some(name_of(c, &c.tail)?);
                    match c.head.as_str() {
                        "Title" => control.title = v,
                        "ControlType" => control.control_type = v,
                        "Value" => control.value = v,
                        other => return Err(unknown(c, other)),
                    }
                }
                decl.controls.push(control);
                continue;
            }
            "SetModel" => decl.set_model = value()?,
            "ConceptPage" => decl.concept_page = value()?,
            "IndividualID" => decl.individual_id = value()?,
            "ViewConcept" => decl.view_concept = value()?,
            "IndividualList" => decl.individual_list = value()?,
            "ViewMode" => decl.view_mode = value()?,
            "Title" => decl.title = value()?,
            "Include" => decl.include = value()?,
            "Exclude" => decl.exclude = value()?,
            other => return Err(unknown(l, other)),
        }
        view_fields(&node.children, decl)?;
    }
    Ok(())
}
