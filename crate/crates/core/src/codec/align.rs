use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;

use super::SentenceTokenization;
use crate::model::{Document, Relation, RelationType};

/// Token range `[first, end)` within sentence `sentence`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct TokenSpan {
    pub sentence: usize,
    pub first: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SpanDropReason {
    /// Start or end falls inside a token or in inter-sentence whitespace.
    BoundaryMismatch,
    CrossesSentence,
    /// Shares a token with a longer aligned keyphrase.
    Overlap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RelationDropReason {
    ArgumentDropped,
    CrossSentenceRelation,
    /// Its matrix cell is already taken by another relation between the same heads.
    CellConflict,
}

/// Bookkeeping of which annotations survive the sequence framing.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AlignmentOutcome {
    pub aligned: BTreeMap<String, TokenSpan>,
    /// Aligned keyphrases whose span was widened to token boundaries.
    pub snapped: Vec<String>,
    pub dropped_spans: Vec<(String, SpanDropReason)>,
    pub dropped_relations: Vec<(Relation, RelationDropReason)>,
}

impl AlignmentOutcome {
    pub fn span_drops(&self, reason: SpanDropReason) -> usize {
        self.dropped_spans
            .iter()
            .filter(|(_, r)| *r == reason)
            .count()
    }

    pub fn relation_drops(&self, reason: RelationDropReason) -> usize {
        self.dropped_relations
            .iter()
            .filter(|(_, r)| *r == reason)
            .count()
    }
}

/// Aligns keyphrases to exact token boundaries, without snapping.
pub fn align_keyphrases(
    doc: &Document,
    tokenizations: &[SentenceTokenization],
) -> AlignmentOutcome {
    align_with(doc, tokenizations, false)
}

enum Placement {
    Exact(TokenSpan),
    Snapped(TokenSpan),
    Dropped(SpanDropReason),
}

fn place(
    tokenizations: &[SentenceTokenization],
    start: usize,
    end: usize,
    snap: bool,
) -> Placement {
    let touching: Vec<usize> = tokenizations
        .iter()
        .enumerate()
        .filter(|(_, s)| s.start < end && start < s.end)
        .map(|(i, _)| i)
        .collect();
    let sentence = match touching[..] {
        [s] => s,
        [] => return Placement::Dropped(SpanDropReason::BoundaryMismatch),
        _ => return Placement::Dropped(SpanDropReason::CrossesSentence),
    };
    let tokens = &tokenizations[sentence].tokens;
    let first = tokens.iter().position(|t| t.start == start);
    let last = tokens.iter().position(|t| t.end == end);
    if let (Some(first), Some(last)) = (first, last) {
        if first <= last {
            return Placement::Exact(TokenSpan {
                sentence,
                first,
                end: last + 1,
            });
        }
    }
    if snap {
        let overlapping: Vec<usize> = tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| t.start < end && start < t.end)
            .map(|(i, _)| i)
            .collect();
        if let (Some(&first), Some(&last)) = (overlapping.first(), overlapping.last()) {
            return Placement::Snapped(TokenSpan {
                sentence,
                first,
                end: last + 1,
            });
        }
    }
    Placement::Dropped(SpanDropReason::BoundaryMismatch)
}

/// Aligns keyphrases and relations of a valid document to `tokenizations`.
///
/// With `snap`, keyphrases that miss token boundaries are widened to the
/// tokens they overlap. Keyphrases that compete for a token are resolved in
/// favour of the longer one (ties: earlier span, then type order).
pub fn align_with(
    doc: &Document,
    tokenizations: &[SentenceTokenization],
    snap: bool,
) -> AlignmentOutcome {
    let mut outcome = AlignmentOutcome::default();
    let mut candidates = Vec::new();
    for kp in &doc.keyphrases {
        match place(tokenizations, kp.start, kp.end, snap) {
            Placement::Exact(span) => candidates.push((kp, span, false)),
            Placement::Snapped(span) => candidates.push((kp, span, true)),
            Placement::Dropped(reason) => outcome.dropped_spans.push((kp.id.clone(), reason)),
        }
    }

    candidates.sort_by(|(a, sa, _), (b, sb, _)| {
        let len_a = tokenizations[sa.sentence].tokens[sa.end - 1].end
            - tokenizations[sa.sentence].tokens[sa.first].start;
        let len_b = tokenizations[sb.sentence].tokens[sb.end - 1].end
            - tokenizations[sb.sentence].tokens[sb.first].start;
        len_b
            .cmp(&len_a)
            .then((a.start, a.end, a.ktype, &a.id).cmp(&(b.start, b.end, b.ktype, &b.id)))
    });
    let mut claimed: HashSet<(usize, usize)> = HashSet::new();
    for (kp, span, snapped) in candidates {
        if (span.first..span.end).any(|t| claimed.contains(&(span.sentence, t))) {
            outcome
                .dropped_spans
                .push((kp.id.clone(), SpanDropReason::Overlap));
            continue;
        }
        claimed.extend((span.first..span.end).map(|t| (span.sentence, t)));
        if snapped {
            outcome.snapped.push(kp.id.clone());
        }
        outcome.aligned.insert(kp.id.clone(), span);
    }
    let order: HashMap<&str, usize> = doc
        .keyphrases
        .iter()
        .enumerate()
        .map(|(i, k)| (k.id.as_str(), i))
        .collect();
    outcome
        .dropped_spans
        .sort_by_key(|(id, _)| order.get(id.as_str()).copied());
    outcome
        .snapped
        .sort_by_key(|id| order.get(id.as_str()).copied());

    let mut cells: HashSet<(usize, usize, usize)> = HashSet::new();
    for rel in &doc.relations {
        let (Some(a), Some(b)) = (
            outcome.aligned.get(&rel.arg1),
            outcome.aligned.get(&rel.arg2),
        ) else {
            outcome
                .dropped_relations
                .push((rel.clone(), RelationDropReason::ArgumentDropped));
            continue;
        };
        if a.sentence != b.sentence {
            outcome
                .dropped_relations
                .push((rel.clone(), RelationDropReason::CrossSentenceRelation));
            continue;
        }
        let mut wanted = vec![(a.sentence, a.first, b.first)];
        if rel.rtype == RelationType::SynonymOf {
            wanted.push((a.sentence, b.first, a.first));
        }
        if wanted.iter().any(|c| cells.contains(c)) {
            outcome
                .dropped_relations
                .push((rel.clone(), RelationDropReason::CellConflict));
            continue;
        }
        cells.extend(wanted);
    }
    outcome
}
