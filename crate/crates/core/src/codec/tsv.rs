//! Plain-text exchange format for encoded sequences.
//!
//! One token per line with tab-separated columns `token start end label_a
//! label_b`, followed by the sentence's relation cells as
//! `#REL<TAB>i<TAB>j<TAB>S|H` (0-based token indices). Sentences are
//! separated by a blank line.

use std::fmt::Write as _;

use super::{
    BoundaryLabel, LabeledSequence, RelationLabel, RelationMatrix, SentenceTokenization, Token,
    TypeLabel,
};
use crate::error::{Error, Result};

pub fn write_sequences(sequences: &[LabeledSequence]) -> String {
    let mut out = String::new();
    for (s, seq) in sequences.iter().enumerate() {
        if s > 0 {
            out.push('\n');
        }
        for (i, tok) in seq.tokenization.tokens.iter().enumerate() {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                tok.text,
                tok.start,
                tok.end,
                seq.labels_a[i].as_str(),
                seq.labels_b[i].as_str()
            );
        }
        for (i, j, label) in seq.relations.entries() {
            let _ = writeln!(out, "#REL\t{i}\t{j}\t{}", label.as_str());
        }
    }
    out
}

fn bad(line: usize, message: impl Into<String>) -> Error {
    Error::MalformedSequence {
        file: None,
        line,
        message: message.into(),
    }
}

fn number(field: &str, line: usize) -> Result<usize> {
    field
        .parse()
        .map_err(|_| bad(line, format!("{field:?} is not a non-negative integer")))
}

#[derive(Default)]
struct Pending {
    tokens: Vec<Token>,
    labels_a: Vec<BoundaryLabel>,
    labels_b: Vec<TypeLabel>,
    cells: Vec<(usize, usize, RelationLabel, usize)>,
}

impl Pending {
    fn finish(self) -> Result<Option<LabeledSequence>> {
        if self.tokens.is_empty() {
            if let Some(&(_, _, _, line)) = self.cells.first() {
                return Err(bad(line, "relation cell outside a sentence"));
            }
            return Ok(None);
        }
        let n = self.tokens.len();
        let mut relations = RelationMatrix::new(n);
        for (i, j, label, line) in self.cells {
            if i >= n || j >= n {
                return Err(bad(line, format!("cell ({i},{j}) outside {n} tokens")));
            }
            relations.set(i, j, label);
        }
        Ok(Some(LabeledSequence {
            tokenization: SentenceTokenization::from_tokens(self.tokens),
            labels_a: self.labels_a,
            labels_b: self.labels_b,
            relations,
        }))
    }
}

pub fn read_sequences(input: &str) -> Result<Vec<LabeledSequence>> {
    let mut sequences = Vec::new();
    let mut pending = Pending::default();
    for (idx, raw) in input.split('\n').enumerate() {
        let line = idx + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if raw.trim().is_empty() {
            sequences.extend(std::mem::take(&mut pending).finish()?);
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        if fields[0] == "#REL" {
            let [_, i, j, label] = fields[..] else {
                return Err(bad(line, "relation line needs `#REL i j S|H`"));
            };
            let label = match RelationLabel::parse(label) {
                Some(RelationLabel::O) | None => {
                    return Err(bad(line, format!("relation label {label:?} is not S or H")))
                }
                Some(l) => l,
            };
            pending
                .cells
                .push((number(i, line)?, number(j, line)?, label, line));
            continue;
        }
        let [text, start, end, a, b] = fields[..] else {
            return Err(bad(
                line,
                format!("expected 5 columns, found {}", fields.len()),
            ));
        };
        let (start, end) = (number(start, line)?, number(end, line)?);
        if start >= end {
            return Err(bad(line, format!("empty token span [{start}, {end})")));
        }
        if let Some(prev) = pending.tokens.last() {
            if start < prev.end {
                return Err(bad(line, "tokens overlap or are out of order"));
            }
        }
        pending.tokens.push(Token {
            start,
            end,
            text: text.to_string(),
        });
        pending
            .labels_a
            .push(BoundaryLabel::parse(a).ok_or_else(|| bad(line, format!("bad label_a {a:?}")))?);
        pending
            .labels_b
            .push(TypeLabel::parse(b).ok_or_else(|| bad(line, format!("bad label_b {b:?}")))?);
    }
    sequences.extend(pending.finish()?);
    Ok(sequences)
}
