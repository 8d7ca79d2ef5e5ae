use std::collections::HashMap;

use serde::Serialize;

use super::{
    align_with, tokenize_document, AlignmentOutcome, BoundaryLabel, LabeledSequence, RelationLabel,
    TypeLabel,
};
use crate::brat::Corpus;
use crate::error::{Error, Result};
use crate::model::{
    canonicalize_document, validate_document, Document, KeyphraseType, Relation, RelationType,
    TextIndex,
};
use crate::scorer::{score_scenario, Scenario, ScoreReport};

/// Encodes a valid document as one labeled sequence per sentence.
pub fn encode_document(
    doc: &Document,
    snap: bool,
) -> Result<(Vec<LabeledSequence>, AlignmentOutcome)> {
    let report = validate_document(doc);
    if !report.is_clean() {
        return Err(Error::InvalidDocument {
            doc_id: doc.doc_id.clone(),
            count: report.errors.len(),
        });
    }
    let tokenizations = tokenize_document(&doc.text);
    let outcome = align_with(doc, &tokenizations, snap);
    let mut sequences: Vec<LabeledSequence> = tokenizations
        .into_iter()
        .map(LabeledSequence::outside)
        .collect();

    for kp in &doc.keyphrases {
        let Some(span) = outcome.aligned.get(&kp.id) else {
            continue;
        };
        let seq = &mut sequences[span.sentence];
        for t in span.first..span.end {
            seq.labels_a[t] = if t == span.first {
                BoundaryLabel::B
            } else {
                BoundaryLabel::I
            };
            seq.labels_b[t] = kp.ktype.into();
        }
    }

    // dropped relations are listed in document order; consume them one by one
    let mut dropped = outcome.dropped_relations.iter().map(|(r, _)| r).peekable();
    for rel in &doc.relations {
        if dropped.peek() == Some(&rel) {
            dropped.next();
            continue;
        }
        let a = outcome.aligned[&rel.arg1];
        let b = outcome.aligned[&rel.arg2];
        let matrix = &mut sequences[a.sentence].relations;
        match rel.rtype {
            RelationType::HyponymOf => matrix.set(a.first, b.first, RelationLabel::H),
            RelationType::SynonymOf => {
                matrix.set(a.first, b.first, RelationLabel::S);
                matrix.set(b.first, a.first, RelationLabel::S);
            }
        }
    }
    Ok((sequences, outcome))
}

/// Repairs applied while decoding possibly ill-formed label sequences.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DecodeStats {
    /// `I` labels that opened a run and were read as `B`.
    pub repaired_boundaries: usize,
    /// Runs whose type vote was tied (broken as M > P > T).
    pub type_ties: usize,
    /// Type labels on tokens outside any keyphrase, ignored.
    pub stray_types: usize,
    /// Relation cells not between two distinct keyphrase heads, ignored.
    pub ignored_cells: usize,
}

impl DecodeStats {
    pub fn total(&self) -> usize {
        self.repaired_boundaries + self.type_ties + self.stray_types + self.ignored_cells
    }

    pub fn add(&mut self, other: DecodeStats) {
        self.repaired_boundaries += other.repaired_boundaries;
        self.type_ties += other.type_ties;
        self.stray_types += other.stray_types;
        self.ignored_cells += other.ignored_cells;
    }
}

fn majority_type(labels: &[TypeLabel], stats: &mut DecodeStats) -> KeyphraseType {
    // priority order doubles as the tie-break
    let counts = [TypeLabel::M, TypeLabel::P, TypeLabel::T]
        .map(|t| (labels.iter().filter(|&&l| l == t).count(), t));
    let best = counts.iter().map(|(c, _)| *c).max().unwrap_or(0);
    let winners: Vec<TypeLabel> = counts
        .iter()
        .filter(|(c, _)| *c == best)
        .map(|(_, t)| *t)
        .collect();
    if winners.len() > 1 {
        stats.type_ties += 1;
    }
    winners[0]
        .keyphrase_type()
        .unwrap_or(KeyphraseType::Material)
}

/// Turns labeled sequences back into a canonical document over `text`.
///
/// Ill-formed label sequences are repaired, never rejected; the repairs are
/// counted in the returned [`DecodeStats`]. Only sequences that do not fit
/// the text (token offsets out of range, layer sizes off) are errors.
pub fn decode_document(
    sequences: &[LabeledSequence],
    text: &str,
    doc_id: &str,
) -> Result<(Document, DecodeStats)> {
    let text_len = TextIndex::new(text).len();
    let mut stats = DecodeStats::default();
    let mut doc = Document::new(doc_id, text);

    for (s, seq) in sequences.iter().enumerate() {
        let n = seq.len();
        if seq.labels_a.len() != n || seq.labels_b.len() != n || seq.relations.size() != n {
            return Err(Error::InconsistentSequence(format!(
                "sentence {s}: layer sizes do not match {n} tokens"
            )));
        }
        if let Some(t) = seq
            .tokenization
            .tokens
            .iter()
            .find(|t| t.start >= t.end || t.end > text_len)
        {
            return Err(Error::InconsistentSequence(format!(
                "sentence {s}: token [{}, {}) outside text of length {text_len}",
                t.start, t.end
            )));
        }

        let mut heads: HashMap<usize, String> = HashMap::new();
        let mut i = 0;
        while i < n {
            match seq.labels_a[i] {
                BoundaryLabel::O => {
                    if seq.labels_b[i] != TypeLabel::O {
                        stats.stray_types += 1;
                    }
                    i += 1;
                }
                opening => {
                    if opening == BoundaryLabel::I {
                        stats.repaired_boundaries += 1;
                    }
                    let mut j = i + 1;
                    while j < n && seq.labels_a[j] == BoundaryLabel::I {
                        j += 1;
                    }
                    let ktype = majority_type(&seq.labels_b[i..j], &mut stats);
                    let tokens = &seq.tokenization.tokens;
                    let id = doc.push_keyphrase(ktype, tokens[i].start, tokens[j - 1].end);
                    heads.insert(i, id);
                    i = j;
                }
            }
        }

        for (i, j, label) in seq.relations.entries() {
            let (Some(a), Some(b)) = (heads.get(&i), heads.get(&j)) else {
                stats.ignored_cells += 1;
                continue;
            };
            if a == b {
                stats.ignored_cells += 1;
                continue;
            }
            let rtype = match label {
                RelationLabel::H => RelationType::HyponymOf,
                RelationLabel::S => RelationType::SynonymOf,
                RelationLabel::O => continue,
            };
            doc.relations
                .push(Relation::new(rtype, a.clone(), b.clone()));
        }
    }

    let doc = canonicalize_document(&doc)?;
    Ok((doc, stats))
}

/// `decode(encode(doc))`: what survives the sequence framing.
pub fn roundtrip_document(doc: &Document, snap: bool) -> Result<Document> {
    let (sequences, _) = encode_document(doc, snap)?;
    decode_document(&sequences, &doc.text, &doc.doc_id).map(|(d, _)| d)
}

/// Scores the round trip of every document against the document itself
/// (scenario 1), giving the best score any sequence labeler can reach.
pub fn roundtrip_report(corpus: &Corpus, snap: bool) -> Result<ScoreReport> {
    let gold = corpus.canonicalized()?;
    let predicted = gold.try_map(|d| roundtrip_document(d, snap))?;
    score_scenario(&gold, &predicted, Scenario::S1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{RelationMatrix, SentenceTokenization, Token};
    use crate::fixtures::{misalignment_corpus, sample_document};
    use crate::scorer::Subtask;
    use BoundaryLabel::{B, I, O};

    #[test]
    fn third_sentence_labels() {
        let (seqs, _) = encode_document(&sample_document(), false).unwrap();
        assert_eq!(seqs.len(), 3);
        let third = &seqs[2];
        assert_eq!(third.labels_a, [O, O, O, O, O, O, B, I, I, O]);
        use TypeLabel as L;
        assert_eq!(
            third.labels_b,
            [L::O, L::O, L::O, L::O, L::O, L::O, L::M, L::M, L::M, L::O]
        );
        for seq in &seqs {
            assert!(seq.violations().is_empty(), "{:?}", seq.violations());
        }
    }

    #[test]
    fn synonym_cells_are_symmetric() {
        let doc = sample_document();
        let (seqs, outcome) = encode_document(&doc, false).unwrap();
        let crf_long = outcome.aligned["T6"];
        let crf = outcome.aligned["T7"];
        assert_eq!(crf_long.sentence, 1);
        let m = &seqs[1].relations;
        assert_eq!(m.get(crf_long.first, crf.first), RelationLabel::S);
        assert_eq!(m.get(crf.first, crf_long.first), RelationLabel::S);
        assert_eq!(m.entries().count(), 4);
    }

    #[test]
    fn roundtrip_loses_only_the_cross_sentence_relation() {
        let doc = sample_document();
        let mut expected = doc.clone();
        expected.relations.remove(0);
        assert_eq!(roundtrip_document(&doc, false).unwrap(), expected);
    }

    fn seq(
        words: &[&str],
        labels_a: Vec<BoundaryLabel>,
        labels_b: Vec<TypeLabel>,
    ) -> (LabeledSequence, String) {
        let text = words.join(" ");
        let mut tokens = Vec::new();
        let mut pos = 0;
        for w in words {
            let len = w.chars().count();
            tokens.push(Token {
                start: pos,
                end: pos + len,
                text: w.to_string(),
            });
            pos += len + 1;
        }
        let n = tokens.len();
        let s = LabeledSequence {
            tokenization: SentenceTokenization::from_tokens(tokens),
            labels_a,
            labels_b,
            relations: RelationMatrix::new(n),
        };
        (s, text)
    }

    #[test]
    fn all_outside_decodes_to_empty() {
        let (s, text) = seq(&["a", "b", "c"], vec![O; 3], vec![TypeLabel::O; 3]);
        let (doc, stats) = decode_document(&[s], &text, "d").unwrap();
        assert!(doc.is_empty());
        assert_eq!(stats, DecodeStats::default());
    }

    #[test]
    fn leading_inside_is_repaired() {
        use TypeLabel as L;
        let (s, text) = seq(
            &["x", "thin", "film"],
            vec![O, I, I],
            vec![L::O, L::M, L::M],
        );
        let (doc, stats) = decode_document(&[s], &text, "d").unwrap();
        assert_eq!(doc.keyphrases.len(), 1);
        assert_eq!(doc.keyphrases[0].surface, "thin film");
        assert_eq!(stats.repaired_boundaries, 1);
    }

    #[test]
    fn type_vote_and_tie_break() {
        use TypeLabel as L;
        let (s, text) = seq(
            &["a", "b", "c", "d"],
            vec![B, I, I, B],
            vec![L::T, L::P, L::P, L::O],
        );
        let (doc, stats) = decode_document(&[s], &text, "d").unwrap();
        assert_eq!(doc.keyphrases[0].ktype, KeyphraseType::Process);
        // second run has no type votes at all: tie among all three
        assert_eq!(doc.keyphrases[1].ktype, KeyphraseType::Material);
        assert_eq!(stats.type_ties, 1);

        let (s, text) = seq(&["a", "b"], vec![B, I], vec![L::T, L::P]);
        let (doc, _) = decode_document(&[s], &text, "d").unwrap();
        assert_eq!(doc.keyphrases[0].ktype, KeyphraseType::Process);
    }

    #[test]
    fn cells_off_heads_are_ignored() {
        use TypeLabel as L;
        let (mut s, text) = seq(&["a", "b", "c"], vec![B, I, B], vec![L::M, L::M, L::M]);
        s.relations.set(0, 2, RelationLabel::H);
        s.relations.set(1, 2, RelationLabel::S);
        s.relations.set(2, 2, RelationLabel::S);
        let (doc, stats) = decode_document(&[s], &text, "d").unwrap();
        assert_eq!(
            doc.relations,
            vec![Relation::new(RelationType::HyponymOf, "T1", "T2")]
        );
        assert_eq!(stats.ignored_cells, 2);
    }

    #[test]
    fn tokens_outside_text_are_rejected() {
        let (s, _) = seq(&["abc", "def"], vec![O, O], vec![TypeLabel::O; 2]);
        assert!(matches!(
            decode_document(&[s], "abc", "d"),
            Err(Error::InconsistentSequence(_))
        ));
    }

    #[test]
    fn misalignment_fixture_counts() {
        let corpus = misalignment_corpus();
        let mut dropped_spans = 0;
        let mut dropped_rels = 0;
        for doc in corpus.documents() {
            let (_, out) = encode_document(doc, false).unwrap();
            dropped_spans += out.dropped_spans.len();
            dropped_rels += out.dropped_relations.len();
        }
        assert_eq!((dropped_spans, dropped_rels), (1, 1));

        let report = roundtrip_report(&corpus, false).unwrap();
        let a = &report.subtasks[&Subtask::A];
        assert_eq!((a.counts.tp, a.counts.fp, a.counts.fn_), (9, 0, 1));
        let c = &report.subtasks[&Subtask::C];
        assert_eq!((c.counts.tp, c.counts.fp, c.counts.fn_), (3, 0, 1));
    }
}
