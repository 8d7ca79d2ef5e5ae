//! Reference prediction generators: the oracle round trip (upper bound),
//! uniform random labeling (lower bound) and a training-set gazetteer.

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::brat::Corpus;
use crate::codec::{
    decode_document, roundtrip_document, tokenize, tokenize_document, BoundaryLabel,
    LabeledSequence, RelationLabel, SentenceTokenization, TypeLabel,
};
use crate::error::{Error, Result};
use crate::model::{
    canonicalize_document, Document, KeyphraseType, Relation, RelationType, TextIndex,
};
use crate::scorer::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaselineKind {
    Oracle,
    Random,
    Gazetteer,
}

/// `decode(encode(doc))` for every document of a valid gold corpus.
pub fn oracle_predict(gold: &Corpus, snap: bool) -> Result<Corpus> {
    gold.try_map(|doc| roundtrip_document(&canonicalize_document(doc)?, snap))
}

/// FNV-1a, used to derive a stable per-document stream from the doc id.
fn stream_id(doc_id: &str) -> u64 {
    doc_id.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Per-document generator; independent of iteration order and thread count.
pub fn document_rng(seed: u64, doc_id: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(doc_id));
    rng
}

fn pick<T: Copy>(rng: &mut ChaCha8Rng, options: &[T]) -> T {
    *options.choose(rng).expect("non-empty options")
}

fn random_relation_label(rng: &mut ChaCha8Rng) -> Option<RelationType> {
    match pick(rng, &RelationLabel::ALL) {
        RelationLabel::O => None,
        RelationLabel::S => Some(RelationType::SynonymOf),
        RelationLabel::H => Some(RelationType::HyponymOf),
    }
}

fn random_sequence(rng: &mut ChaCha8Rng, tokenization: SentenceTokenization) -> LabeledSequence {
    let mut seq = LabeledSequence::outside(tokenization);
    let n = seq.len();
    for t in 0..n {
        seq.labels_a[t] = pick(rng, &BoundaryLabel::ALL);
    }
    for t in 0..n {
        seq.labels_b[t] = pick(rng, &TypeLabel::ALL);
    }
    // heads as decoding will see them, after I-after-O repair
    let heads: Vec<usize> = (0..n)
        .filter(|&t| match seq.labels_a[t] {
            BoundaryLabel::B => true,
            BoundaryLabel::I => t == 0 || seq.labels_a[t - 1] == BoundaryLabel::O,
            BoundaryLabel::O => false,
        })
        .collect();
    for &i in &heads {
        for &j in &heads {
            if i != j {
                let label = pick(rng, &RelationLabel::ALL);
                seq.relations.set(i, j, label);
            }
        }
    }
    seq
}

fn sentence_of(tokenizations: &[SentenceTokenization], start: usize, end: usize) -> Option<usize> {
    tokenizations
        .iter()
        .position(|s| s.start < end && start < s.end)
}

/// Random relations over every ordered pair of keyphrases sharing a sentence.
fn random_relations(rng: &mut ChaCha8Rng, doc: &mut Document) {
    let tokenizations = tokenize_document(&doc.text);
    let placed: Vec<(Option<usize>, String)> = doc
        .keyphrases
        .iter()
        .map(|k| (sentence_of(&tokenizations, k.start, k.end), k.id.clone()))
        .collect();
    for (sa, a) in &placed {
        for (sb, b) in &placed {
            if a == b || sa.is_none() || sa != sb {
                continue;
            }
            if let Some(rtype) = random_relation_label(rng) {
                doc.relations
                    .push(Relation::new(rtype, a.clone(), b.clone()));
            }
        }
    }
}

fn random_document(doc: &Document, scenario: Scenario, seed: u64) -> Result<Document> {
    let mut rng = document_rng(seed, &doc.doc_id);
    match scenario {
        Scenario::S1 => {
            let sequences: Vec<LabeledSequence> = tokenize_document(&doc.text)
                .into_iter()
                .map(|t| random_sequence(&mut rng, t))
                .collect();
            decode_document(&sequences, &doc.text, &doc.doc_id).map(|(d, _)| d)
        }
        Scenario::S2 => {
            let gold = canonicalize_document(doc)?;
            let mut pred = gold.empty_like();
            let mut seen = HashSet::new();
            for k in gold.keyphrases.iter().filter(|k| seen.insert(k.span())) {
                let ktype = pick(&mut rng, &KeyphraseType::ALL);
                pred.push_keyphrase(ktype, k.start, k.end);
            }
            random_relations(&mut rng, &mut pred);
            canonicalize_document(&pred)
        }
        Scenario::S3 => {
            let gold = canonicalize_document(doc)?;
            let mut pred = gold.clone();
            pred.relations.clear();
            random_relations(&mut rng, &mut pred);
            canonicalize_document(&pred)
        }
    }
}

/// Uniformly random predictions.
///
/// Scenario 1 labels every token of the plain text; scenarios 2 and 3 keep
/// the gold spans (and, for 3, types) of `texts` and randomize the rest.
/// Output depends only on `seed` and each doc id.
pub fn random_predict(texts: &Corpus, scenario: Scenario, seed: u64) -> Result<Corpus> {
    texts.try_map(|doc| random_document(doc, scenario, seed))
}

/// Case-folds and collapses whitespace runs to single spaces.
pub fn normalize_surface(surface: &str) -> String {
    surface
        .to_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GazetteerEntry {
    pub ktype: KeyphraseType,
    pub frequency: usize,
}

/// Normalized training surfaces with their majority type.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Gazetteer {
    entries: BTreeMap<String, GazetteerEntry>,
    max_tokens: usize,
}

impl Gazetteer {
    pub fn get(&self, normalized: &str) -> Option<&GazetteerEntry> {
        self.entries.get(normalized)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &GazetteerEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }
}

/// Collects every training keyphrase; ties in the type vote go M > P > T.
pub fn gazetteer_build(train: &Corpus) -> Result<Gazetteer> {
    if train.is_empty() {
        return Err(Error::EmptyInput("training corpus"));
    }
    let mut votes: BTreeMap<String, [usize; 3]> = BTreeMap::new();
    for doc in train.documents() {
        for kp in &doc.keyphrases {
            let key = normalize_surface(&kp.surface);
            if key.is_empty() {
                continue;
            }
            votes.entry(key).or_default()[kp.ktype as usize] += 1;
        }
    }
    let mut max_tokens = 0;
    let entries = votes
        .into_iter()
        .map(|(surface, counts)| {
            let best = *counts.iter().max().unwrap_or(&0);
            let idx = counts.iter().position(|&c| c == best).unwrap_or(0);
            let len = tokenize(&surface, (0, surface.chars().count())).len();
            max_tokens = max_tokens.max(len);
            let entry = GazetteerEntry {
                ktype: KeyphraseType::ALL[idx],
                frequency: counts.iter().sum(),
            };
            (surface, entry)
        })
        .collect();
    Ok(Gazetteer {
        entries,
        max_tokens,
    })
}

fn gazetteer_document(gaz: &Gazetteer, doc: &Document) -> Document {
    let index = TextIndex::new(&doc.text);
    let mut pred = doc.empty_like();
    for sentence in tokenize_document(&doc.text) {
        let tokens = &sentence.tokens;
        let mut i = 0;
        while i < tokens.len() {
            let longest = gaz.max_tokens.min(tokens.len() - i);
            let hit = (1..=longest).rev().find_map(|len| {
                let (start, end) = (tokens[i].start, tokens[i + len - 1].end);
                let surface = index.slice(start, end)?;
                gaz.get(&normalize_surface(surface))
                    .map(|e| (len, start, end, e.ktype))
            });
            match hit {
                Some((len, start, end, ktype)) => {
                    pred.push_keyphrase(ktype, start, end);
                    i += len;
                }
                None => i += 1,
            }
        }
    }
    pred
}

/// Longest-match, left-to-right, non-overlapping lookup at token boundaries.
pub fn gazetteer_predict(gaz: &Gazetteer, texts: &Corpus) -> Corpus {
    texts
        .try_map(|doc| Ok(gazetteer_document(gaz, doc)))
        .expect("gazetteer matching is infallible")
}
