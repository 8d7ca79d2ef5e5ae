//! Corpus statistics and inter-annotator agreement.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use serde::Serialize;

use crate::baselines::normalize_surface;
use crate::brat::{shared_ids, Corpus};
use crate::codec::{encode_document, tokenize};
use crate::error::{Error, Result};
use crate::model::canonicalize_document;
use crate::parallel;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub n_documents: usize,
    pub n_mentions: usize,
    /// Distinct normalized surfaces.
    pub n_unique: usize,
    /// Share of unique surfaces seen exactly once, in percent.
    pub pct_singleton: f64,
    /// Shares of mentions by token length, in percent.
    pub pct_single_word: f64,
    pub pct_len_ge3: f64,
    pub pct_len_ge5: f64,
    /// Most frequent normalized surfaces, by frequency then surface.
    pub top_k: Vec<(String, usize)>,
}

fn percent(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

pub fn corpus_stats(corpus: &Corpus, k: usize) -> CorpusStats {
    let mut n_mentions = 0;
    let mut lengths = [0usize; 3]; // ==1, >=3, >=5
    let mut freq: HashMap<String, usize> = HashMap::new();
    for doc in corpus.documents() {
        for kp in &doc.keyphrases {
            n_mentions += 1;
            let words = tokenize(&kp.surface, (0, kp.surface.chars().count())).len();
            lengths[0] += usize::from(words == 1);
            lengths[1] += usize::from(words >= 3);
            lengths[2] += usize::from(words >= 5);
            *freq.entry(normalize_surface(&kp.surface)).or_default() += 1;
        }
    }
    let singletons = freq.values().filter(|&&c| c == 1).count();
    let mut top_k: Vec<(String, usize)> = freq.iter().map(|(s, c)| (s.clone(), *c)).collect();
    top_k.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    top_k.truncate(k);
    CorpusStats {
        n_documents: corpus.len(),
        n_mentions,
        n_unique: freq.len(),
        pct_singleton: percent(singletons, freq.len()),
        pct_single_word: percent(lengths[0], n_mentions),
        pct_len_ge3: percent(lengths[1], n_mentions),
        pct_len_ge5: percent(lengths[2], n_mentions),
        top_k,
    }
}

impl fmt::Display for CorpusStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<34}{:>10}", "documents", self.n_documents)?;
        writeln!(f, "{:<34}{:>10}", "keyphrase mentions", self.n_mentions)?;
        writeln!(f, "{:<34}{:>10}", "unique keyphrases", self.n_unique)?;
        writeln!(
            f,
            "{:<34}{:>9.1}%",
            "singleton keyphrases", self.pct_singleton
        )?;
        writeln!(
            f,
            "{:<34}{:>9.1}%",
            "single-word mentions", self.pct_single_word
        )?;
        writeln!(
            f,
            "{:<34}{:>9.1}%",
            "mentions with >= 3 words", self.pct_len_ge3
        )?;
        writeln!(
            f,
            "{:<34}{:>9.1}%",
            "mentions with >= 5 words", self.pct_len_ge5
        )?;
        writeln!(f, "(noun-phrase share not computed: needs a POS tagger)")?;
        if !self.top_k.is_empty() {
            writeln!(f, "most common keyphrases:")?;
            for (surface, count) in &self.top_k {
                writeln!(f, "  {count:>6}  {surface}")?;
            }
        }
        Ok(())
    }
}

/// Cohen's kappa of two equally long label sequences.
///
/// Returns 1 when chance agreement is 1 (both raters used one and the same label throughout).
pub fn cohen_kappa<T: Eq + Hash>(labels_x: &[T], labels_y: &[T]) -> Result<f64> {
    if labels_x.len() != labels_y.len() {
        return Err(Error::LengthMismatch(labels_x.len(), labels_y.len()));
    }
    if labels_x.is_empty() {
        return Err(Error::EmptyInput("label sequences"));
    }
    let n = labels_x.len() as u128;
    let mut agree = 0u128;
    let mut marginals: HashMap<&T, (u128, u128)> = HashMap::new();
    for (x, y) in labels_x.iter().zip(labels_y) {
        agree += u128::from(x == y);
        marginals.entry(x).or_default().0 += 1;
        marginals.entry(y).or_default().1 += 1;
    }
    // kappa = (n*agree - sum cx*cy) / (n^2 - sum cx*cy), all in integers
    let chance: u128 = marginals.values().map(|(cx, cy)| cx * cy).sum();
    let denominator = n * n - chance;
    if denominator == 0 {
        return Ok(1.0);
    }
    Ok(((n * agree) as f64 - chance as f64) / denominator as f64)
}

/// Fleiss' kappa over an item x category matrix of rating counts.
pub fn fleiss_kappa(ratings: &[Vec<usize>], n_raters: usize) -> Result<f64> {
    if ratings.len() < 2 {
        return Err(Error::EmptyInput("at least two rated items"));
    }
    if n_raters < 2 {
        return Err(Error::EmptyInput("at least two raters"));
    }
    for (row, counts) in ratings.iter().enumerate() {
        let sum: usize = counts.iter().sum();
        if sum != n_raters {
            return Err(Error::RowSum {
                row,
                sum,
                expected: n_raters,
            });
        }
    }
    let items = ratings.len() as f64;
    let n = n_raters as f64;
    let categories = ratings.iter().map(Vec::len).max().unwrap_or(0);

    let p_bar = ratings
        .iter()
        .map(|row| {
            let sq: f64 = row.iter().map(|&c| (c * c) as f64).sum();
            (sq - n) / (n * (n - 1.0))
        })
        .sum::<f64>()
        / items;
    let p_e: f64 = (0..categories)
        .map(|j| {
            let total: usize = ratings
                .iter()
                .map(|row| row.get(j).copied().unwrap_or(0))
                .sum();
            let p = total as f64 / (items * n);
            p * p
        })
        .sum();
    if (1.0 - p_e).abs() < f64::EPSILON {
        return Ok(1.0);
    }
    Ok((p_bar - p_e) / (1.0 - p_e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    /// Boundary labels `O/B/I` per token.
    #[default]
    TokenA,
    /// Type labels `O/M/P/T` per token.
    TokenB,
}

impl Granularity {
    pub fn name(self) -> &'static str {
        match self {
            Granularity::TokenA => "token_a",
            Granularity::TokenB => "token_b",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementReport {
    pub kappa: f64,
    pub granularity: Granularity,
    pub n_tokens: usize,
    pub n_docs_included: usize,
    pub n_docs_excluded: usize,
    pub excluded: Vec<String>,
}

impl fmt::Display for AgreementReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "Cohen's kappa ({}): {:.4}",
            self.granularity.name(),
            self.kappa
        )?;
        writeln!(f, "tokens compared:   {}", self.n_tokens)?;
        writeln!(f, "documents used:    {}", self.n_docs_included)?;
        writeln!(
            f,
            "documents skipped: {} (no annotations on one side)",
            self.n_docs_excluded
        )
    }
}

/// Token-level Cohen's kappa between two annotations of the same texts.
///
/// Only shared documents annotated on both sides take part; both sides are
/// encoded over the same tokenization of the shared text.
pub fn agreement_report(
    corpus_x: &Corpus,
    corpus_y: &Corpus,
    granularity: Granularity,
) -> Result<AgreementReport> {
    let shared: Vec<&str> = shared_ids(corpus_x, corpus_y).into_iter().collect();
    if shared.is_empty() {
        return Err(Error::EmptyInput("documents shared by both corpora"));
    }
    let mut excluded = Vec::new();
    let mut included = Vec::new();
    for id in shared {
        let (x, y) = (corpus_x.get(id).unwrap(), corpus_y.get(id).unwrap());
        if x.text != y.text {
            return Err(Error::TextMismatch(id.to_string()));
        }
        if x.keyphrases.is_empty() || y.keyphrases.is_empty() {
            excluded.push(id.to_string());
        } else {
            included.push((x, y));
        }
    }
    if included.is_empty() {
        return Err(Error::EmptyInput("documents annotated in both corpora"));
    }

    let per_doc = parallel::map(&included, |(x, y)| -> Result<(Vec<u8>, Vec<u8>)> {
        let labels = |doc| -> Result<Vec<u8>> {
            let (seqs, _) = encode_document(&canonicalize_document(doc)?, false)?;
            Ok(seqs
                .iter()
                .flat_map(|s| match granularity {
                    Granularity::TokenA => s.labels_a.iter().map(|l| *l as u8).collect::<Vec<_>>(),
                    Granularity::TokenB => s.labels_b.iter().map(|l| *l as u8).collect(),
                })
                .collect())
        };
        Ok((labels(x)?, labels(y)?))
    });
    let mut all_x = Vec::new();
    let mut all_y = Vec::new();
    for r in per_doc {
        let (x, y) = r?;
        all_x.extend(x);
        all_y.extend(y);
    }
    if all_x.is_empty() {
        return Err(Error::EmptyInput("tokens in the shared documents"));
    }
    Ok(AgreementReport {
        kappa: cohen_kappa(&all_x, &all_y)?,
        granularity,
        n_tokens: all_x.len(),
        n_docs_included: included.len(),
        n_docs_excluded: excluded.len(),
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::sample_document;
    use crate::model::{Document, KeyphraseType};

    #[test]
    fn sample_stats() {
        let stats = corpus_stats(&Corpus::from_documents([sample_document()]), 3);
        assert_eq!(stats.n_mentions, 8);
        assert_eq!(stats.n_unique, 7);
        assert!((stats.pct_singleton - 600.0 / 7.0).abs() < 1e-12);
        assert_eq!(stats.top_k[0], ("information extraction".to_string(), 2));
        // NER, CRF -> single words; named entity recognition, conditional random fields,
        // ConLL-2003 NER corpus -> three words
        assert!((stats.pct_single_word - 25.0).abs() < 1e-12);
        assert!((stats.pct_len_ge3 - 37.5).abs() < 1e-12);
        assert_eq!(stats.pct_len_ge5, 0.0);
    }

    #[test]
    fn empty_corpus_stats() {
        let stats = corpus_stats(&Corpus::new(), 5);
        assert_eq!((stats.n_mentions, stats.n_unique), (0, 0));
        assert_eq!(stats.pct_singleton, 0.0);
        assert_eq!(stats.pct_single_word, 0.0);
        assert!(stats.top_k.is_empty());
    }

    #[test]
    fn top_k_ties_sort_by_surface() {
        let mut doc = Document::new("d", "beta alpha beta alpha gamma");
        for (s, e) in [(0, 4), (5, 10), (11, 15), (16, 21), (22, 27)] {
            doc.push_keyphrase(KeyphraseType::Task, s, e);
        }
        let stats = corpus_stats(&Corpus::from_documents([doc]), 2);
        assert_eq!(stats.top_k, vec![("alpha".into(), 2), ("beta".into(), 2)]);
    }

    #[test]
    fn cohen_examples() {
        let x = [1, 0, 1, 1, 0, 0, 1, 0, 1, 0];
        assert_eq!(cohen_kappa(&x, &x).unwrap(), 1.0);
        // 14 of 20 agree, both raters 50/50 -> p_o = 0.7, p_e = 0.5
        let a: Vec<u8> = (0..20).map(|i| u8::from(i < 10)).collect();
        let mut b = a.clone();
        for i in [0, 1, 2, 10, 11, 12] {
            b[i] = 1 - b[i];
        }
        assert!((cohen_kappa(&a, &b).unwrap() - 0.4).abs() < 1e-12);
        let flipped: Vec<i32> = x.iter().map(|v| 1 - v).collect();
        assert_eq!(cohen_kappa(&x, &flipped).unwrap(), -1.0);
    }

    #[test]
    fn cohen_errors_and_degenerate_case() {
        assert!(matches!(
            cohen_kappa(&[1, 2], &[1]),
            Err(Error::LengthMismatch(2, 1))
        ));
        assert!(matches!(
            cohen_kappa::<u8>(&[], &[]),
            Err(Error::EmptyInput(_))
        ));
        assert_eq!(cohen_kappa(&["O"; 4], &["O"; 4]).unwrap(), 1.0);
    }

    #[test]
    fn fleiss_examples() {
        let unanimous = vec![vec![3, 0], vec![0, 3], vec![3, 0]];
        assert_eq!(fleiss_kappa(&unanimous, 3).unwrap(), 1.0);
        // one unanimous item, one split item: P = 1/2, Pe = (3/4)^2 + (1/4)^2 = 5/8
        let split = vec![vec![2, 0], vec![1, 1]];
        assert!((fleiss_kappa(&split, 2).unwrap() - (-1.0 / 3.0)).abs() < 1e-12);
        // P = 1/2 = Pe
        let chance = vec![vec![2, 0], vec![0, 2], vec![1, 1], vec![1, 1]];
        assert!(fleiss_kappa(&chance, 2).unwrap().abs() < 1e-12);
    }

    #[test]
    fn fleiss_rejects_bad_rows() {
        assert!(matches!(
            fleiss_kappa(&[vec![2, 0], vec![1, 0]], 2),
            Err(Error::RowSum {
                row: 1,
                sum: 1,
                expected: 2
            })
        ));
        assert!(fleiss_kappa(&[vec![2, 0]], 2).is_err());
    }

    #[test]
    fn self_agreement_and_exclusion() {
        let sample = sample_document();
        let mut blank = sample.empty_like();
        blank.doc_id = "blank".into();
        let x = Corpus::from_documents([sample.clone(), blank.clone()]);
        let mut annotated_blank = blank.clone();
        annotated_blank.push_keyphrase(KeyphraseType::Task, 0, 11);
        let y = Corpus::from_documents([sample, annotated_blank]);

        let same = agreement_report(&x, &x, Granularity::TokenA);
        // "blank" has no annotations on either side
        assert_eq!(same.as_ref().unwrap().n_docs_excluded, 1);
        assert_eq!(same.unwrap().kappa, 1.0);

        let report = agreement_report(&x, &y, Granularity::TokenB).unwrap();
        assert_eq!(report.n_docs_included, 1);
        assert_eq!(report.excluded, vec!["blank".to_string()]);
        assert_eq!(report.kappa, 1.0);
    }

    #[test]
    fn differing_texts_are_rejected() {
        let x = Corpus::from_documents([sample_document()]);
        let mut other = sample_document();
        other.text.push(' ');
        let y = Corpus::from_documents([other]);
        assert!(matches!(
            agreement_report(&x, &y, Granularity::TokenA),
            Err(Error::TextMismatch(_))
        ));
    }
}
