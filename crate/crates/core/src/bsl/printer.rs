use std::fmt::Write;

use super::ast::*;

/// Canonical BSL text: one line per element, expressions unwrapped,
/// one blank line between declarations.
pub fn print(decls: &[Declaration]) -> String {
    let mut out = String::new();
    for (i, decl) in decls.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        print_decl(&mut out, decl);
    }
    out
}

fn line(out: &mut String, depth: usize, head: &str, tail: &str) {
    let colons = ":".repeat(depth);
    let text = if depth == 0 {
        format!("{head}: {tail}")
    } else {
        format!("{colons} {head}: {tail}")
    };
    let _ = writeln!(out, "{}", text.trim_end());
}

fn opt(out: &mut String, depth: usize, head: &str, value: &Option<String>) {
    if let Some(v) = value {
        line(out, depth, head, v);
    }
}

fn print_decl(out: &mut String, decl: &Declaration) {
    match decl {
        Declaration::Concept(c) => line(out, 0, "Concept", &format!("Instance: {}", c.name)),
        Declaration::Property(p) => {
            line(
                out,
                0,
                &p.prop_kind.to_string(),
                &format!("Individual: {}", p.name),
            );
            opt(out, 1, "Range", &p.range);
            if let Some(t) = p.data_type {
                line(out, 1, "DataType", &t.to_string());
            }
        }
        Declaration::Model(m) => {
            line(out, 0, &m.concept, &format!("Model: {}", m.name));
            opt(out, 1, "SetModel", &m.set_model);
            for e in &m.events {
                print_event(out, 1, e);
            }
        }
        Declaration::Individual(d) => {
            line(out, 0, &d.concept, &format!("Individual: {}", d.name));
            opt(out, 1, "SetModel", &d.set_model);
            for a in &d.assignments {
                line(out, 1, &a.property, &a.value);
            }
        }
        Declaration::View(v) => {
            line(out, 0, "View", &format!("Individual: {}", v.name));
            opt(out, 1, "SetModel", &v.set_model);
            opt(out, 1, "ConceptPage", &v.concept_page);
            opt(out, 1, "IndividualID", &v.individual_id);
            opt(out, 1, "ViewConcept", &v.view_concept);
            opt(out, 2, "IndividualList", &v.individual_list);
            opt(out, 2, "ViewMode", &v.view_mode);
            opt(out, 2, "Title", &v.title);
            opt(out, 2, "Include", &v.include);
            opt(out, 2, "Exclude", &v.exclude);
            for c in &v.controls {
                line(out, 2, "Control", &c.property);
                opt(out, 3, "Title", &c.title);
                opt(out, 3, "ControlType", &c.control_type);
                opt(out, 3, "Value", &c.value);
            }
        }
    }
}

fn print_event(out: &mut String, depth: usize, e: &ModelEvent) {
    line(out, depth, &e.prop_kind.to_string(), &e.property);
    for r in &e.restrictions {
        line(out, depth + 1, r.kind.as_str(), &r.text);
    }
    for child in &e.children {
        print_event(out, depth + 1, child);
    }
}
