//! Exact-match, micro-averaged precision / recall / F1.
//!
//! Subtask A compares untyped spans `(start, end)`, subtask B typed spans
//! `(start, end, type)`, subtask C relations `(type, arg1 span, arg2 span)`
//! where synonym pairs are unordered. Items are compared as sets per
//! document, counts are summed over documents, and only then divided.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::brat::Corpus;
use crate::error::{Error, Result};
use crate::model::{Document, KeyphraseType, RelationType};
use crate::parallel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Subtask {
    A,
    B,
    C,
}

impl Subtask {
    pub const ALL: [Subtask; 3] = [Subtask::A, Subtask::B, Subtask::C];

    pub fn name(self) -> &'static str {
        match self {
            Subtask::A => "A",
            Subtask::B => "B",
            Subtask::C => "C",
        }
    }
}

/// What a system is given: plain text (S1), gold spans (S2), gold typed spans (S3).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Scenario {
    S1,
    S2,
    S3,
}

impl Scenario {
    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(Scenario::S1),
            2 => Some(Scenario::S2),
            3 => Some(Scenario::S3),
            _ => None,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Scenario::S1 => 1,
            Scenario::S2 => 2,
            Scenario::S3 => 3,
        }
    }

    pub fn subtasks(self) -> &'static [Subtask] {
        match self {
            Scenario::S1 => &[Subtask::A, Subtask::B, Subtask::C],
            Scenario::S2 => &[Subtask::B, Subtask::C],
            Scenario::S3 => &[Subtask::C],
        }
    }
}

/// Which subtasks the overall score pools (restricted to those scored).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Pooling {
    #[default]
    Bc,
    Abc,
}

impl Pooling {
    pub fn includes(self, subtask: Subtask) -> bool {
        subtask != Subtask::A || self == Pooling::Abc
    }

    pub fn name(self) -> &'static str {
        match self {
            Pooling::Bc => "bc",
            Pooling::Abc => "abc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct MatchCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl MatchCounts {
    pub fn new(tp: usize, fp: usize, fn_: usize) -> Self {
        MatchCounts { tp, fp, fn_ }
    }
}

impl std::ops::Add for MatchCounts {
    type Output = MatchCounts;

    fn add(self, o: MatchCounts) -> MatchCounts {
        MatchCounts::new(self.tp + o.tp, self.fp + o.fp, self.fn_ + o.fn_)
    }
}

impl std::ops::AddAssign for MatchCounts {
    fn add_assign(&mut self, o: MatchCounts) {
        *self = *self + o;
    }
}

impl std::iter::Sum for MatchCounts {
    fn sum<I: Iterator<Item = MatchCounts>>(iter: I) -> Self {
        iter.fold(MatchCounts::default(), |a, b| a + b)
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// `(precision, recall, f1)`; any 0/0 is 0.
pub fn micro_scores(counts: MatchCounts) -> (f64, f64, f64) {
    let p = ratio(counts.tp, counts.tp + counts.fp);
    let r = ratio(counts.tp, counts.tp + counts.fn_);
    let f1 = if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    };
    (p, r, f1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubtaskScore {
    pub counts: MatchCounts,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl From<MatchCounts> for SubtaskScore {
    fn from(counts: MatchCounts) -> Self {
        let (precision, recall, f1) = micro_scores(counts);
        SubtaskScore {
            counts,
            precision,
            recall,
            f1,
        }
    }
}

type Span = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Item {
    Span(Span),
    Typed(Span, KeyphraseType),
    Relation(RelationType, Span, Span),
}

fn items(subtask: Subtask, doc: &Document) -> HashSet<Item> {
    match subtask {
        Subtask::A => doc
            .keyphrases
            .iter()
            .map(|k| Item::Span(k.span()))
            .collect(),
        Subtask::B => doc
            .keyphrases
            .iter()
            .map(|k| Item::Typed(k.span(), k.ktype))
            .collect(),
        Subtask::C => {
            let mut spans: HashMap<&str, Span> = HashMap::new();
            for k in &doc.keyphrases {
                spans.entry(k.id.as_str()).or_insert(k.span());
            }
            doc.relations
                .iter()
                .filter_map(|r| {
                    // unresolved arguments are validation errors; they match nothing
                    let a = *spans.get(r.arg1.as_str())?;
                    let b = *spans.get(r.arg2.as_str())?;
                    let (a, b) = if r.rtype.is_symmetric() && b < a {
                        (b, a)
                    } else {
                        (a, b)
                    };
                    Some(Item::Relation(r.rtype, a, b))
                })
                .collect()
        }
    }
}

/// Set-based tp/fp/fn of one subtask on one document pair.
pub fn count_matches(subtask: Subtask, gold: &Document, pred: &Document) -> Result<MatchCounts> {
    if gold.doc_id != pred.doc_id {
        return Err(Error::DocIdMismatch {
            gold: gold.doc_id.clone(),
            pred: pred.doc_id.clone(),
        });
    }
    let g = items(subtask, gold);
    let p = items(subtask, pred);
    let tp = g.intersection(&p).count();
    Ok(MatchCounts::new(tp, p.len() - tp, g.len() - tp))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ScoreOptions {
    pub scenario: Scenario,
    pub pooling: Pooling,
}

impl ScoreOptions {
    pub fn new(scenario: Scenario) -> Self {
        ScoreOptions {
            scenario,
            pooling: Pooling::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreReport {
    pub scenario: Scenario,
    pub pooling: Pooling,
    pub subtasks: BTreeMap<Subtask, SubtaskScore>,
    pub overall: SubtaskScore,
    pub documents: usize,
    /// Documents whose predictions deviate from what the scenario gives.
    pub diagnostics: Vec<String>,
}

/// Scores with the default B+C overall pooling.
pub fn score_scenario(gold: &Corpus, pred: &Corpus, scenario: Scenario) -> Result<ScoreReport> {
    score_with(gold, pred, ScoreOptions::new(scenario))
}

struct DocResult {
    counts: [MatchCounts; 3],
    diagnostic: Option<String>,
}

fn given_items_differ(scenario: Scenario, gold: &Document, pred: &Document) -> Option<String> {
    let subtask = match scenario {
        Scenario::S1 => return None,
        Scenario::S2 => Subtask::A,
        Scenario::S3 => Subtask::B,
    };
    let what = if subtask == Subtask::A {
        "spans"
    } else {
        "typed spans"
    };
    (items(subtask, gold) != items(subtask, pred)).then(|| {
        format!(
            "{}: predicted {what} differ from the given gold {what}",
            gold.doc_id
        )
    })
}

pub fn score_with(gold: &Corpus, pred: &Corpus, options: ScoreOptions) -> Result<ScoreReport> {
    if let Some(extra) = pred.doc_ids().find(|id| !gold.contains(id)) {
        return Err(Error::UnknownPrediction(extra.to_string()));
    }
    let docs: Vec<&Document> = gold.documents().collect();
    let per_doc = parallel::map(&docs, |g| {
        let empty;
        let p = match pred.get(&g.doc_id) {
            Some(p) => p,
            None => {
                empty = g.empty_like();
                &empty
            }
        };
        let mut counts = [MatchCounts::default(); 3];
        for (slot, subtask) in counts.iter_mut().zip(Subtask::ALL) {
            *slot = count_matches(subtask, g, p).expect("same doc id");
        }
        DocResult {
            counts,
            diagnostic: given_items_differ(options.scenario, g, p),
        }
    });

    let mut totals = [MatchCounts::default(); 3];
    let mut diagnostics = Vec::new();
    for r in per_doc {
        for (t, c) in totals.iter_mut().zip(r.counts) {
            *t += c;
        }
        diagnostics.extend(r.diagnostic);
    }

    let mut subtasks = BTreeMap::new();
    let mut pooled = MatchCounts::default();
    for &subtask in options.scenario.subtasks() {
        let counts = totals[subtask as usize];
        subtasks.insert(subtask, SubtaskScore::from(counts));
        if options.pooling.includes(subtask) {
            pooled += counts;
        }
    }
    Ok(ScoreReport {
        scenario: options.scenario,
        pooling: options.pooling,
        subtasks,
        overall: pooled.into(),
        documents: docs.len(),
        diagnostics,
    })
}

/// Scores each group of documents separately; `groups` maps doc id to group
/// name and documents without a group fall under `"-"`.
pub fn score_by_group(
    gold: &Corpus,
    pred: &Corpus,
    options: ScoreOptions,
    groups: &HashMap<String, String>,
) -> Result<BTreeMap<String, ScoreReport>> {
    if let Some(extra) = pred.doc_ids().find(|id| !gold.contains(id)) {
        return Err(Error::UnknownPrediction(extra.to_string()));
    }
    let mut split: BTreeMap<&str, (Corpus, Corpus)> = BTreeMap::new();
    for doc in gold.documents() {
        let group = groups.get(&doc.doc_id).map_or("-", String::as_str);
        let entry = split.entry(group).or_default();
        entry.0.insert(doc.clone());
        if let Some(p) = pred.get(&doc.doc_id) {
            entry.1.insert(p.clone());
        }
    }
    split
        .into_iter()
        .map(|(group, (g, p))| Ok((group.to_string(), score_with(&g, &p, options)?)))
        .collect()
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

#[derive(Debug, Clone, Serialize)]
pub struct ScoreView {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub p: f64,
    pub r: f64,
    pub f1: f64,
}

impl From<&SubtaskScore> for ScoreView {
    fn from(s: &SubtaskScore) -> Self {
        ScoreView {
            tp: s.counts.tp,
            fp: s.counts.fp,
            fn_: s.counts.fn_,
            p: round4(s.precision),
            r: round4(s.recall),
            f1: round4(s.f1),
        }
    }
}

/// Machine-readable report shape; scores rounded to 4 decimals.
#[derive(Debug, Clone, Serialize)]
pub struct ReportView {
    pub scenario: u8,
    pub pooling: &'static str,
    pub subtasks: BTreeMap<&'static str, ScoreView>,
    pub overall: ScoreView,
    pub documents: usize,
    pub diagnostics: Vec<String>,
}

impl ScoreReport {
    pub fn view(&self) -> ReportView {
        ReportView {
            scenario: self.scenario.number(),
            pooling: self.pooling.name(),
            subtasks: self
                .subtasks
                .iter()
                .map(|(k, v)| (k.name(), ScoreView::from(v)))
                .collect(),
            overall: ScoreView::from(&self.overall),
            documents: self.documents,
            diagnostics: self.diagnostics.clone(),
        }
    }

    pub fn subtask(&self, subtask: Subtask) -> Option<&SubtaskScore> {
        self.subtasks.get(&subtask)
    }
}

impl fmt::Display for ScoreReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pooled: Vec<&str> = self
            .scenario
            .subtasks()
            .iter()
            .filter(|s| self.pooling.includes(**s))
            .map(|s| s.name())
            .collect();
        writeln!(
            f,
            "Scenario {} ({} documents; overall pools {})",
            self.scenario.number(),
            self.documents,
            pooled.join("+")
        )?;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<10}{:>8}{:>8}{:>8}{:>9}{:>9}{:>9}",
            "subtask", "tp", "fp", "fn", "P", "R", "F1"
        );
        let rows = self
            .subtasks
            .iter()
            .map(|(k, v)| (k.name(), v))
            .chain(std::iter::once(("overall", &self.overall)));
        for (name, s) in rows {
            let _ = writeln!(
                out,
                "{:<10}{:>8}{:>8}{:>8}{:>9.4}{:>9.4}{:>9.4}",
                name, s.counts.tp, s.counts.fp, s.counts.fn_, s.precision, s.recall, s.f1
            );
        }
        f.write_str(&out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::sample_document;
    use crate::model::{Relation, RelationType};

    fn perturbed_prediction() -> Document {
        let mut pred = sample_document();
        pred.relations = vec![
            Relation::new(RelationType::SynonymOf, "T6", "T7"),
            Relation::new(RelationType::HyponymOf, "T2", "T1"),
        ];
        pred
    }

    #[test]
    fn identical_documents_match_fully() {
        let doc = sample_document();
        assert_eq!(
            count_matches(Subtask::C, &doc, &doc).unwrap(),
            MatchCounts::new(3, 0, 0)
        );
    }

    #[test]
    fn perturbed_relations() {
        let c = count_matches(Subtask::C, &sample_document(), &perturbed_prediction()).unwrap();
        assert_eq!(c, MatchCounts::new(1, 1, 2));
    }

    #[test]
    fn wrong_types_only_hurt_b() {
        let gold = sample_document();
        let mut pred = gold.clone();
        for k in &mut pred.keyphrases {
            k.ktype = match k.ktype {
                KeyphraseType::Material => KeyphraseType::Process,
                KeyphraseType::Process => KeyphraseType::Task,
                KeyphraseType::Task => KeyphraseType::Material,
            };
        }
        assert_eq!(
            count_matches(Subtask::A, &gold, &pred).unwrap(),
            MatchCounts::new(8, 0, 0)
        );
        assert_eq!(
            count_matches(Subtask::B, &gold, &pred).unwrap(),
            MatchCounts::new(0, 8, 8)
        );
    }

    #[test]
    fn synonym_order_is_irrelevant() {
        let gold = sample_document();
        let mut pred = gold.clone();
        for r in &mut pred.relations {
            if r.rtype == RelationType::SynonymOf {
                std::mem::swap(&mut r.arg1, &mut r.arg2);
            }
        }
        assert_eq!(
            count_matches(Subtask::C, &gold, &pred).unwrap(),
            MatchCounts::new(3, 0, 0)
        );
        // but hyponymy direction matters
        pred.relations[0] = Relation::new(RelationType::HyponymOf, "T1", "T3");
        assert_eq!(
            count_matches(Subtask::C, &gold, &pred).unwrap(),
            MatchCounts::new(2, 1, 1)
        );
    }

    #[test]
    fn doc_id_mismatch_is_an_error() {
        let gold = sample_document();
        let mut pred = gold.clone();
        pred.doc_id = "other".into();
        assert!(matches!(
            count_matches(Subtask::A, &gold, &pred),
            Err(Error::DocIdMismatch { .. })
        ));
    }

    #[test]
    fn micro_score_arithmetic() {
        let (p, r, f) = micro_scores(MatchCounts::new(1, 1, 2));
        assert!(
            (p - 0.5).abs() < 1e-15 && (r - 1.0 / 3.0).abs() < 1e-15 && (f - 0.4).abs() < 1e-15
        );
        assert_eq!(micro_scores(MatchCounts::new(0, 0, 0)), (0.0, 0.0, 0.0));
        assert_eq!(micro_scores(MatchCounts::new(5, 0, 0)), (1.0, 1.0, 1.0));
    }

    #[test]
    fn pooled_counts_across_documents() {
        // C counts (1,1,2) on one document and (1,0,0) on another
        let first = sample_document();
        let mut second = sample_document();
        second.doc_id = "second".into();
        let mut second_pred = second.clone();
        second.relations.truncate(1);
        second_pred.relations.truncate(1);
        let gold = Corpus::from_documents([first, second]);
        let pred = Corpus::from_documents([perturbed_prediction(), second_pred]);
        let report = score_scenario(&gold, &pred, Scenario::S3).unwrap();
        let c = report.subtask(Subtask::C).unwrap();
        assert_eq!(c.counts, MatchCounts::new(2, 1, 2));
        assert!((c.precision - 2.0 / 3.0).abs() < 1e-12);
        assert!((c.recall - 0.5).abs() < 1e-12);
        assert!((c.f1 - 4.0 / 7.0).abs() < 1e-12);
        assert_eq!(report.overall, *c);
    }

    #[test]
    fn scenario_subtasks_and_pooling() {
        let gold = Corpus::from_documents([sample_document()]);
        let report = score_scenario(&gold, &Corpus::new(), Scenario::S1).unwrap();
        assert_eq!(report.subtasks.len(), 3);
        assert_eq!(report.overall.counts, MatchCounts::new(0, 0, 11));
        let abc = score_with(
            &gold,
            &Corpus::new(),
            ScoreOptions {
                scenario: Scenario::S1,
                pooling: Pooling::Abc,
            },
        )
        .unwrap();
        assert_eq!(abc.overall.counts, MatchCounts::new(0, 0, 19));
        let s2 = score_scenario(&gold, &gold, Scenario::S2).unwrap();
        assert_eq!(
            s2.subtasks.keys().copied().collect::<Vec<_>>(),
            [Subtask::B, Subtask::C]
        );
    }

    #[test]
    fn unknown_prediction_is_an_error() {
        let gold = Corpus::from_documents([sample_document()]);
        let mut stray = sample_document();
        stray.doc_id = "stray".into();
        let pred = Corpus::from_documents([stray]);
        assert!(matches!(
            score_scenario(&gold, &pred, Scenario::S1),
            Err(Error::UnknownPrediction(id)) if id == "stray"
        ));
    }

    #[test]
    fn deviating_given_spans_are_diagnosed() {
        let gold = Corpus::from_documents([sample_document()]);
        let mut pred_doc = sample_document();
        pred_doc.keyphrases[7].ktype = KeyphraseType::Task;
        let pred = Corpus::from_documents([pred_doc]);
        assert!(score_scenario(&gold, &pred, Scenario::S2)
            .unwrap()
            .diagnostics
            .is_empty());
        let s3 = score_scenario(&gold, &pred, Scenario::S3).unwrap();
        assert_eq!(s3.diagnostics.len(), 1);
        // still scored as-is
        assert_eq!(s3.overall.f1, 1.0);
    }

    #[test]
    fn grouped_scores() {
        let mut other = sample_document();
        other.doc_id = "other".into();
        let gold = Corpus::from_documents([sample_document(), other]);
        let groups = HashMap::from([("sample".to_string(), "cs".to_string())]);
        let by = score_by_group(&gold, &gold, ScoreOptions::new(Scenario::S1), &groups).unwrap();
        assert_eq!(by.keys().collect::<Vec<_>>(), ["-", "cs"]);
        assert!(by.values().all(|r| r.documents == 1 && r.overall.f1 == 1.0));
    }

    #[test]
    fn text_table_uses_four_decimals() {
        let gold = Corpus::from_documents([sample_document()]);
        let pred = Corpus::from_documents([perturbed_prediction()]);
        let table = score_scenario(&gold, &pred, Scenario::S3)
            .unwrap()
            .to_string();
        assert!(table.contains("0.5000"), "{table}");
        assert!(table.contains("0.3333"));
        assert!(table.contains("0.4000"));
    }
}
