//! Sentence-level sequence encoding of documents.
//!
//! Every sentence becomes one sequence. Each token gets a boundary label
//! (`O`/`B`/`I`) and a type label (`O`/`M`/`P`/`T`); each sentence carries an
//! `n x n` relation matrix whose non-`O` cells sit on the first tokens of two
//! keyphrases: `H` at (hyponym head, hypernym head), `S` on both symmetric
//! cells of a synonym pair. Decoding turns the labels back into a canonical
//! document. Anything the framing cannot express is recorded in an
//! [`AlignmentOutcome`] rather than dropped silently.

mod align;
mod sequence;
mod text;
pub mod tsv;

pub use align::{
    align_keyphrases, align_with, AlignmentOutcome, RelationDropReason, SpanDropReason, TokenSpan,
};
pub use sequence::{
    decode_document, encode_document, roundtrip_document, roundtrip_report, DecodeStats,
};
pub use text::{split_sentences, tokenize, tokenize_document};

use serde::Serialize;

use crate::model::KeyphraseType;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub start: usize,
    pub end: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceTokenization {
    pub start: usize,
    pub end: usize,
    pub tokens: Vec<Token>,
}

impl SentenceTokenization {
    /// Builds a tokenization whose sentence span is the extent of its tokens.
    pub fn from_tokens(tokens: Vec<Token>) -> Self {
        let start = tokens.first().map_or(0, |t| t.start);
        let end = tokens.last().map_or(0, |t| t.end);
        SentenceTokenization { start, end, tokens }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BoundaryLabel {
    O,
    B,
    I,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TypeLabel {
    O,
    M,
    P,
    T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RelationLabel {
    O,
    S,
    H,
}

impl BoundaryLabel {
    pub const ALL: [BoundaryLabel; 3] = [BoundaryLabel::O, BoundaryLabel::B, BoundaryLabel::I];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryLabel::O => "O",
            BoundaryLabel::B => "B",
            BoundaryLabel::I => "I",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.as_str() == s)
    }
}

impl TypeLabel {
    pub const ALL: [TypeLabel; 4] = [TypeLabel::O, TypeLabel::M, TypeLabel::P, TypeLabel::T];

    pub fn as_str(self) -> &'static str {
        match self {
            TypeLabel::O => "O",
            TypeLabel::M => "M",
            TypeLabel::P => "P",
            TypeLabel::T => "T",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.as_str() == s)
    }

    pub fn keyphrase_type(self) -> Option<KeyphraseType> {
        match self {
            TypeLabel::O => None,
            TypeLabel::M => Some(KeyphraseType::Material),
            TypeLabel::P => Some(KeyphraseType::Process),
            TypeLabel::T => Some(KeyphraseType::Task),
        }
    }
}

impl From<KeyphraseType> for TypeLabel {
    fn from(t: KeyphraseType) -> Self {
        match t {
            KeyphraseType::Material => TypeLabel::M,
            KeyphraseType::Process => TypeLabel::P,
            KeyphraseType::Task => TypeLabel::T,
        }
    }
}

impl RelationLabel {
    pub const ALL: [RelationLabel; 3] = [RelationLabel::O, RelationLabel::S, RelationLabel::H];

    pub fn as_str(self) -> &'static str {
        match self {
            RelationLabel::O => "O",
            RelationLabel::S => "S",
            RelationLabel::H => "H",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.as_str() == s)
    }
}

/// Dense row-major `n x n` grid of relation labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationMatrix {
    n: usize,
    cells: Vec<RelationLabel>,
}

impl RelationMatrix {
    pub fn new(n: usize) -> Self {
        RelationMatrix {
            n,
            cells: vec![RelationLabel::O; n * n],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> RelationLabel {
        self.cells[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, label: RelationLabel) {
        self.cells[i * self.n + j] = label;
    }

    /// Non-`O` cells in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, RelationLabel)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, l)| **l != RelationLabel::O)
            .map(move |(k, l)| (k / self.n, k % self.n, *l))
    }
}

/// One sentence with its three label layers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSequence {
    pub tokenization: SentenceTokenization,
    pub labels_a: Vec<BoundaryLabel>,
    pub labels_b: Vec<TypeLabel>,
    pub relations: RelationMatrix,
}

impl LabeledSequence {
    /// An all-`O` sequence over the given tokens.
    pub fn outside(tokenization: SentenceTokenization) -> Self {
        let n = tokenization.len();
        LabeledSequence {
            tokenization,
            labels_a: vec![BoundaryLabel::O; n],
            labels_b: vec![TypeLabel::O; n],
            relations: RelationMatrix::new(n),
        }
    }

    pub fn len(&self) -> usize {
        self.tokenization.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokenization.is_empty()
    }

    /// Lists every violated well-formedness rule; empty when the sequence is well formed.
    pub fn violations(&self) -> Vec<String> {
        let n = self.len();
        let mut out = Vec::new();
        if self.labels_a.len() != n || self.labels_b.len() != n || self.relations.size() != n {
            out.push(format!(
                "layer sizes {}/{}/{} for {n} tokens",
                self.labels_a.len(),
                self.labels_b.len(),
                self.relations.size()
            ));
            return out;
        }
        let mut prev = BoundaryLabel::O;
        for (i, (&a, &b)) in self.labels_a.iter().zip(&self.labels_b).enumerate() {
            if a == BoundaryLabel::I && prev == BoundaryLabel::O {
                out.push(format!("token {i}: I after O"));
            }
            if (a == BoundaryLabel::O) != (b == TypeLabel::O) {
                out.push(format!(
                    "token {i}: boundary {} with type {}",
                    a.as_str(),
                    b.as_str()
                ));
            }
            prev = a;
        }
        for (i, j, label) in self.relations.entries() {
            if i == j {
                out.push(format!("cell ({i},{j}) on the diagonal"));
            }
            if self.labels_a[i] != BoundaryLabel::B || self.labels_a[j] != BoundaryLabel::B {
                out.push(format!("cell ({i},{j}) not between keyphrase heads"));
            }
            if label == RelationLabel::S && self.relations.get(j, i) != RelationLabel::S {
                out.push(format!("cell ({i},{j}) S without its mirror"));
            }
        }
        out
    }
}
