//! Generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use kpeval_core::model::TextIndex;
use kpeval_core::scorer::Subtask;
use kpeval_core::{Corpus, Document, KeyphraseType, Relation, RelationType};

const WORDS: &[&str] = &[
    "graph",
    "parsing",
    "Beam",
    "search",
    "x-ray",
    "façade",
    "NER",
    "(CRF)",
    "is",
    "a",
    "method",
    "3.5",
    "naïve",
    "O'Brien",
    "C++",
    "data_set",
    "Ångström",
    "corpora",
    "\"quoted\"",
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_text(rng: &mut ChaCha8Rng, words: usize) -> String {
    let mut text = String::new();
    for i in 0..words.max(1) {
        if i > 0 {
            text.push_str(if rng.gen_bool(0.1) {
                ". "
            } else if rng.gen_bool(0.05) {
                "\n"
            } else {
                " "
            });
        }
        text.push_str(WORDS.choose(rng).unwrap());
    }
    if rng.gen_bool(0.5) {
        text.push('.');
    }
    text
}

fn random_type(rng: &mut ChaCha8Rng) -> KeyphraseType {
    *KeyphraseType::ALL.choose(rng).unwrap()
}

fn random_rtype(rng: &mut ChaCha8Rng) -> RelationType {
    if rng.gen_bool(0.5) {
        RelationType::SynonymOf
    } else {
        RelationType::HyponymOf
    }
}

/// Valid but arbitrary document: spans at any char offsets, possibly
/// overlapping or duplicated, relations between any two distinct ids.
pub fn random_document(
    rng: &mut ChaCha8Rng,
    doc_id: &str,
    max_spans: usize,
    max_rels: usize,
) -> Document {
    let words = rng.gen_range(3..20);
    let text = random_text(rng, words);
    let len = text.chars().count();
    let mut doc = Document::new(doc_id, text);
    for _ in 0..rng.gen_range(0..=max_spans) {
        let start = rng.gen_range(0..len);
        let end = rng.gen_range(start + 1..=(start + 16).min(len));
        let ktype = random_type(rng);
        doc.push_keyphrase(ktype, start, end);
    }
    add_random_relations(rng, &mut doc, max_rels);
    doc
}

pub fn add_random_relations(rng: &mut ChaCha8Rng, doc: &mut Document, max_rels: usize) {
    let n = doc.keyphrases.len();
    if n < 2 {
        return;
    }
    for _ in 0..rng.gen_range(0..=max_rels) {
        let a = rng.gen_range(0..n);
        let mut b = rng.gen_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        let rtype = random_rtype(rng);
        let rel = Relation::new(
            rtype,
            doc.keyphrases[a].id.clone(),
            doc.keyphrases[b].id.clone(),
        );
        doc.relations.push(rel);
    }
}

/// A prediction near `gold`: some keyphrases kept, retyped, shifted or
/// invented; relations partly copied (SYN arguments possibly swapped) and
/// partly random.
pub fn perturb(
    rng: &mut ChaCha8Rng,
    gold: &Document,
    max_spans: usize,
    max_rels: usize,
) -> Document {
    let len = gold.text.chars().count();
    let mut pred = gold.empty_like();
    let mut id_map = Vec::new();
    for kp in &gold.keyphrases {
        if pred.keyphrases.len() >= max_spans {
            break;
        }
        let roll: f64 = rng.gen();
        let (mut start, mut end, mut ktype) = (kp.start, kp.end, kp.ktype);
        if roll < 0.2 {
            continue;
        } else if roll < 0.35 {
            ktype = random_type(rng);
        } else if roll < 0.45 {
            start = start.saturating_sub(1);
        } else if roll < 0.55 && end < len {
            end += 1;
        }
        let id = pred.push_keyphrase(ktype, start, end);
        id_map.push((kp.id.clone(), id));
    }
    while pred.keyphrases.len() < max_spans && rng.gen_bool(0.3) {
        let start = rng.gen_range(0..len);
        let end = rng.gen_range(start + 1..=(start + 16).min(len));
        let ktype = random_type(rng);
        pred.push_keyphrase(ktype, start, end);
    }
    let mapped = |id: &str| id_map.iter().find(|(g, _)| g == id).map(|(_, p)| p.clone());
    for rel in &gold.relations {
        if pred.relations.len() >= max_rels || rng.gen_bool(0.3) {
            continue;
        }
        if let (Some(a), Some(b)) = (mapped(&rel.arg1), mapped(&rel.arg2)) {
            let (a, b) = if rel.rtype == RelationType::SynonymOf && rng.gen_bool(0.5) {
                (b, a)
            } else {
                (a, b)
            };
            pred.relations.push(Relation::new(rel.rtype, a, b));
        }
    }
    let room = max_rels - pred.relations.len();
    add_random_relations(rng, &mut pred, room.min(2));
    pred
}

/// Items of one subtask as a sorted, duplicate-free list of tuples.
fn oracle_items(subtask: Subtask, doc: &Document) -> Vec<(u8, usize, usize, usize, usize, u8)> {
    let mut items = Vec::new();
    match subtask {
        Subtask::A => {
            for k in &doc.keyphrases {
                items.push((0, k.start, k.end, 0, 0, 0));
            }
        }
        Subtask::B => {
            for k in &doc.keyphrases {
                items.push((0, k.start, k.end, 0, 0, k.ktype as u8 + 1));
            }
        }
        Subtask::C => {
            let find = |id: &str| {
                doc.keyphrases
                    .iter()
                    .find(|k| k.id == id)
                    .map(|k| (k.start, k.end))
            };
            for r in &doc.relations {
                let (Some(a), Some(b)) = (find(&r.arg1), find(&r.arg2)) else {
                    continue;
                };
                let (a, b) = match r.rtype {
                    RelationType::SynonymOf => (a.min(b), a.max(b)),
                    RelationType::HyponymOf => (a, b),
                };
                let tag = if r.rtype == RelationType::SynonymOf {
                    1
                } else {
                    2
                };
                items.push((tag, a.0, a.1, b.0, b.1, 0));
            }
        }
    }
    items.sort();
    items.dedup();
    items
}

/// tp/fp/fn by comparing every gold item with every predicted item.
pub fn oracle_counts(subtask: Subtask, gold: &Document, pred: &Document) -> (usize, usize, usize) {
    let g = oracle_items(subtask, gold);
    let p = oracle_items(subtask, pred);
    let mut used = vec![false; p.len()];
    let mut tp = 0;
    for gi in &g {
        for (j, pj) in p.iter().enumerate() {
            if !used[j] && gi == pj {
                used[j] = true;
                tp += 1;
                break;
            }
        }
    }
    (tp, p.len() - tp, g.len() - tp)
}

/// Word count of a surface by a straightforward scan: runs of alphanumerics
/// joined by single `- _ . ' +`, and every other visible char on its own.
pub fn count_words(surface: &str) -> usize {
    let chars: Vec<char> = surface.chars().collect();
    let mut count = 0;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        count += 1;
        if !c.is_alphanumeric() {
            i += 1;
            continue;
        }
        i += 1;
        loop {
            if i < chars.len() && chars[i].is_alphanumeric() {
                i += 1;
            } else if i + 1 < chars.len()
                && "-_.'+".contains(chars[i])
                && chars[i + 1].is_alphanumeric()
            {
                i += 2;
            } else {
                break;
            }
        }
    }
    count
}

pub struct BruteStats {
    pub n_mentions: usize,
    pub n_unique: usize,
    pub singletons: usize,
    pub single_word: usize,
    pub ge3: usize,
    pub ge5: usize,
    /// (surface, count), sorted by count desc then surface.
    pub ranked: Vec<(String, usize)>,
}

pub fn brute_stats(corpus: &Corpus) -> BruteStats {
    let mut surfaces: Vec<String> = Vec::new();
    let (mut single_word, mut ge3, mut ge5) = (0, 0, 0);
    for doc in corpus.documents() {
        let index = TextIndex::new(&doc.text);
        for k in &doc.keyphrases {
            let surface = index.slice(k.start, k.end).unwrap();
            let words = count_words(surface);
            single_word += usize::from(words == 1);
            ge3 += usize::from(words >= 3);
            ge5 += usize::from(words >= 5);
            let lower = surface.to_lowercase();
            surfaces.push(lower.split_whitespace().collect::<Vec<_>>().join(" "));
        }
    }
    let n_mentions = surfaces.len();
    surfaces.sort();
    let mut ranked: Vec<(String, usize)> = Vec::new();
    for s in surfaces {
        match ranked.last_mut() {
            Some((last, c)) if *last == s => *c += 1,
            _ => ranked.push((s, 1)),
        }
    }
    let singletons = ranked.iter().filter(|(_, c)| *c == 1).count();
    let n_unique = ranked.len();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    BruteStats {
        n_mentions,
        n_unique,
        singletons,
        single_word,
        ge3,
        ge5,
        ranked,
    }
}

pub fn pct(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}
