use serde::Serialize;
use thiserror::Error;

/// One logical line after comment stripping and continuation joining.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Line {
    /// Number of leading colons.
    pub depth: usize,
    pub head: String,
    pub tail: String,
    /// 1-based source line where this logical line starts.
    pub line: usize,
    /// Last physical line folded into it.
    pub end_line: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SourceBlock {
    pub lines: Vec<Line>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexError {
    #[error("line {line}: depth {depth} under a line of depth {parent}")]
    NonMonotonicIndent {
        line: usize,
        depth: usize,
        parent: usize,
    },
    #[error("line {line}: missing keyword or name")]
    EmptyHead { line: usize },
}

/// Restriction kinds whose tail is an expression and may wrap onto
/// following lines.
const EXPRESSION_HEADS: [&str; 5] = [
    "Condition",
    "ValueCondition",
    "SetValue",
    "SetDo",
    "Default",
];

pub fn lex(source: &str) -> Result<SourceBlock, LexError> {
    let mut lines: Vec<Line> = Vec::new();
    for (idx, raw) in source.lines().enumerate() {
        let number = idx + 1;
        let text = strip_comment(raw).trim();
        if text.is_empty() {
            continue;
        }
        let depth = text.chars().take_while(|c| *c == ':').count();
        let rest = text[depth..].trim();

        if let Some(prev) = lines.last_mut() {
            if depth == 0
                && EXPRESSION_HEADS.contains(&prev.head.as_str())
                && !looks_like_declaration(rest)
            {
                if !prev.tail.is_empty() {
                    prev.tail.push(' ');
                }
                prev.tail.push_str(rest);
                prev.end_line = number;
                continue;
            }
        }

        let parent = lines.last().map(|l| l.depth);
        if depth > parent.map_or(0, |p| p + 1) {
            return Err(LexError::NonMonotonicIndent {
                line: number,
                depth,
                parent: parent.unwrap_or(0),
            });
        }
        let (head, tail) = match rest.split_once(':') {
            Some((h, t)) => (h.trim(), t.trim()),
            None => (rest, ""),
        };
        if head.is_empty() {
            return Err(LexError::EmptyHead { line: number });
        }
        lines.push(Line {
            depth,
            head: head.to_string(),
            tail: tail.to_string(),
            line: number,
            end_line: number,
        });
    }
    Ok(SourceBlock { lines })
}

/// `Head: Instance|Individual|Model: Name`
fn looks_like_declaration(text: &str) -> bool {
    let Some((head, tail)) = text.split_once(':') else {
        return false;
    };
    let Some((keyword, _)) = tail.split_once(':') else {
        return false;
    };
    !head.trim().is_empty()
        && !head.contains(['\'', '"', '$', '('])
        && matches!(keyword.trim(), "Instance" | "Individual" | "Model")
}

fn strip_comment(line: &str) -> &str {
    let mut quote = None;
    for (i, c) in line.char_indices() {
        match (quote, c) {
            (None, '#') => return &line[..i],
            (None, '\'' | '"') => quote = Some(c),
            (Some(q), c) if c == q => quote = None,
            _ => {}
        }
    }
    line
}
