//! Seeded synthetic corpora for benchmarks and tests.
//!
//! Generated keyphrases always sit on token boundaries and relations never
//! cross sentences, so these corpora survive the sequence round trip
//! unchanged. Keyphrase lengths follow a long-tailed mix (about 18% single
//! words, half of all mentions three words or longer, a fifth five or longer).

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::baselines::document_rng;
use crate::brat::Corpus;
use crate::model::{canonicalize_document, Document, KeyphraseType, Relation, RelationType};
use crate::parallel;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOptions {
    pub documents: usize,
    /// Inclusive range of sentences per document.
    pub sentences: (usize, usize),
    /// Inclusive range of words per sentence.
    pub words: (usize, usize),
    /// Inclusive range of keyphrases attempted per sentence.
    pub mentions_per_sentence: (usize, usize),
    /// Probability that a same-sentence, same-type keyphrase pair is related.
    pub relation_rate: f64,
    /// Probability that a keyphrase reuses a phrase from the shared pool.
    pub reuse_rate: f64,
    pub seed: u64,
}

impl Default for SynthOptions {
    /// Roughly 16 mentions per document.
    fn default() -> Self {
        SynthOptions {
            documents: 100,
            sentences: (5, 9),
            words: (14, 26),
            mentions_per_sentence: (1, 4),
            relation_rate: 0.15,
            reuse_rate: 0.75,
            seed: 0,
        }
    }
}

const SYLLABLES: &[&str] = &[
    "ka", "lo", "mi", "ne", "ra", "tu", "si", "po", "ve", "da", "zo", "fi", "gu", "he", "ja",
    "qui", "ber", "tan", "sol", "mor", "dex", "lin", "por", "cal",
];

const EXOTIC: &[&str] = &[
    "façade",
    "naïve",
    "Ångström",
    "x-ray",
    "β-decay",
    "Zr-4",
    "élan",
];

const LENGTH_WEIGHTS: [u32; 7] = [18, 31, 17, 12, 10, 7, 5];

fn word(rng: &mut ChaCha8Rng) -> String {
    if rng.gen_bool(0.03) {
        return EXOTIC.choose(rng).unwrap().to_string();
    }
    let n = rng.gen_range(1..=3);
    (0..n).map(|_| *SYLLABLES.choose(rng).unwrap()).collect()
}

fn phrase(rng: &mut ChaCha8Rng, lengths: &WeightedIndex<u32>) -> (Vec<String>, KeyphraseType) {
    let len = lengths.sample(rng) + 1;
    let words = (0..len).map(|_| word(rng)).collect();
    (words, *KeyphraseType::ALL.choose(rng).unwrap())
}

fn capitalize(w: &str) -> String {
    let mut chars = w.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

type Phrase = (Vec<String>, KeyphraseType);

fn document(opts: &SynthOptions, pool: &[Phrase], doc_id: &str) -> Document {
    let mut rng = document_rng(opts.seed, doc_id);
    let lengths = WeightedIndex::new(LENGTH_WEIGHTS).unwrap();
    let mut text = String::new();
    let mut spans: Vec<(usize, usize, KeyphraseType, usize)> = Vec::new();
    let mut pos = 0usize; // char offset

    let n_sentences = rng.gen_range(opts.sentences.0..=opts.sentences.1);
    for s in 0..n_sentences {
        let n_words = rng.gen_range(opts.words.0..=opts.words.1);
        let mut words: Vec<String> = (0..n_words).map(|_| word(&mut rng)).collect();
        // keyphrase word ranges, never touching the first word so capitalization stays outside
        let mut taken = vec![false; n_words];
        let mut placed: Vec<(usize, usize, KeyphraseType)> = Vec::new();
        let wanted = rng.gen_range(opts.mentions_per_sentence.0..=opts.mentions_per_sentence.1);
        for _ in 0..wanted {
            let (p, ktype) = if !pool.is_empty() && rng.gen_bool(opts.reuse_rate) {
                pool.choose(&mut rng).unwrap().clone()
            } else {
                phrase(&mut rng, &lengths)
            };
            if p.len() + 1 >= n_words {
                continue;
            }
            for _ in 0..10 {
                let start = rng.gen_range(1..=n_words - p.len());
                if taken[start..start + p.len()].iter().any(|t| *t) {
                    continue;
                }
                for (k, w) in p.iter().enumerate() {
                    words[start + k] = w.clone();
                    taken[start + k] = true;
                }
                placed.push((start, start + p.len(), ktype));
                break;
            }
        }
        words[0] = capitalize(&words[0]);

        if s > 0 {
            text.push(' ');
            pos += 1;
        }
        let mut word_starts = Vec::with_capacity(n_words);
        for (k, w) in words.iter().enumerate() {
            if k > 0 {
                text.push(' ');
                pos += 1;
            }
            word_starts.push(pos);
            text.push_str(w);
            pos += w.chars().count();
        }
        text.push('.');
        pos += 1;
        placed.sort();
        for (a, b, ktype) in placed {
            let end = word_starts[b - 1] + words[b - 1].chars().count();
            spans.push((word_starts[a], end, ktype, s));
        }
    }

    let mut doc = Document::new(doc_id, text);
    let ids: Vec<String> = spans
        .iter()
        .map(|&(start, end, ktype, _)| doc.push_keyphrase(ktype, start, end))
        .collect();
    for i in 0..spans.len() {
        for j in 0..spans.len() {
            let (a, b) = (&spans[i], &spans[j]);
            if i >= j || a.3 != b.3 || a.2 != b.2 || !rng.gen_bool(opts.relation_rate) {
                continue;
            }
            let rel = if rng.gen_bool(0.5) {
                Relation::new(RelationType::SynonymOf, ids[i].clone(), ids[j].clone())
            } else if rng.gen_bool(0.5) {
                Relation::new(RelationType::HyponymOf, ids[i].clone(), ids[j].clone())
            } else {
                Relation::new(RelationType::HyponymOf, ids[j].clone(), ids[i].clone())
            };
            doc.relations.push(rel);
        }
    }
    canonicalize_document(&doc).expect("generated documents are valid")
}

/// Generates `opts.documents` canonical documents named `doc0000`, `doc0001`, ...
pub fn synthetic_corpus(opts: &SynthOptions) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed_5eed);
    let lengths = WeightedIndex::new(LENGTH_WEIGHTS).unwrap();
    let pool: Vec<Phrase> = (0..(opts.documents * 6).max(8))
        .map(|_| phrase(&mut rng, &lengths))
        .collect();
    let docs = parallel::map_indexed(opts.documents, |i| {
        document(opts, &pool, &format!("doc{i:04}"))
    });
    Corpus::from_documents(docs)
}
