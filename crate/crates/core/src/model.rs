//! In-memory annotation model: keyphrases, relations and documents.
//!
//! Offsets everywhere count Unicode scalar values (Rust `char`s), not bytes.
//! A keyphrase covers the half-open range `[start, end)` of its document text.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum KeyphraseType {
    Material,
    Process,
    Task,
}

impl KeyphraseType {
    pub const ALL: [KeyphraseType; 3] = [
        KeyphraseType::Material,
        KeyphraseType::Process,
        KeyphraseType::Task,
    ];

    /// Name used in `.ann` files.
    pub fn name(self) -> &'static str {
        match self {
            KeyphraseType::Material => "Material",
            KeyphraseType::Process => "Process",
            KeyphraseType::Task => "Task",
        }
    }

    /// Case-insensitive lookup of a file type string.
    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for KeyphraseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `HyponymOf` is directed (arg1 is the hyponym), `SynonymOf` is symmetric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RelationType {
    HyponymOf,
    SynonymOf,
}

impl RelationType {
    pub const ALL: [RelationType; 2] = [RelationType::HyponymOf, RelationType::SynonymOf];

    pub fn name(self) -> &'static str {
        match self {
            RelationType::HyponymOf => "Hyponym-of",
            RelationType::SynonymOf => "Synonym-of",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
    }

    pub fn is_symmetric(self) -> bool {
        self == RelationType::SynonymOf
    }
}

impl fmt::Display for RelationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Keyphrase {
    pub id: String,
    pub ktype: KeyphraseType,
    pub start: usize,
    pub end: usize,
    pub surface: String,
}

impl Keyphrase {
    pub fn new(
        id: impl Into<String>,
        ktype: KeyphraseType,
        start: usize,
        end: usize,
        surface: impl Into<String>,
    ) -> Self {
        Keyphrase {
            id: id.into(),
            ktype,
            start,
            end,
            surface: surface.into(),
        }
    }

    pub fn span(&self) -> (usize, usize) {
        (self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Relation {
    pub rtype: RelationType,
    pub arg1: String,
    pub arg2: String,
}

impl Relation {
    pub fn new(rtype: RelationType, arg1: impl Into<String>, arg2: impl Into<String>) -> Self {
        Relation {
            rtype,
            arg1: arg1.into(),
            arg2: arg2.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Document {
    pub doc_id: String,
    pub text: String,
    pub keyphrases: Vec<Keyphrase>,
    pub relations: Vec<Relation>,
}

impl Document {
    pub fn new(doc_id: impl Into<String>, text: impl Into<String>) -> Self {
        Document {
            doc_id: doc_id.into(),
            text: text.into(),
            keyphrases: Vec::new(),
            relations: Vec::new(),
        }
    }

    /// Same text and id, no annotations.
    pub fn empty_like(&self) -> Self {
        Document::new(self.doc_id.clone(), self.text.clone())
    }

    pub fn keyphrase(&self, id: &str) -> Option<&Keyphrase> {
        self.keyphrases.iter().find(|k| k.id == id)
    }

    pub fn is_empty(&self) -> bool {
        self.keyphrases.is_empty() && self.relations.is_empty()
    }

    /// Adds a keyphrase, taking the surface from the text. Returns its id.
    pub fn push_keyphrase(&mut self, ktype: KeyphraseType, start: usize, end: usize) -> String {
        let id = format!("T{}", self.keyphrases.len() + 1);
        let surface = TextIndex::new(&self.text)
            .slice(start, end)
            .unwrap_or_default()
            .to_string();
        self.keyphrases
            .push(Keyphrase::new(id.clone(), ktype, start, end, surface));
        id
    }
}

/// Char-offset view over a string.
#[derive(Debug, Clone)]
pub struct TextIndex<'a> {
    text: &'a str,
    // byte offset of every char, plus the total byte length
    bytes: Vec<usize>,
}

impl<'a> TextIndex<'a> {
    pub fn new(text: &'a str) -> Self {
        let mut bytes: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
        bytes.push(text.len());
        TextIndex { text, bytes }
    }

    /// Length in chars.
    pub fn len(&self) -> usize {
        self.bytes.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn slice(&self, start: usize, end: usize) -> Option<&'a str> {
        if start > end || end > self.len() {
            return None;
        }
        Some(&self.text[self.bytes[start]..self.bytes[end]])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IssueCode {
    OffsetOutOfBounds,
    SurfaceMismatch,
    DanglingArgument,
    SelfRelation,
    DuplicateId,
    CrossTypeRelation,
    DuplicateSpan,
    MalformedLine,
    MissingAnn,
    MissingTxt,
    Unreadable,
}

impl IssueCode {
    pub fn as_str(self) -> &'static str {
        match self {
            IssueCode::OffsetOutOfBounds => "offset-out-of-bounds",
            IssueCode::SurfaceMismatch => "surface-mismatch",
            IssueCode::DanglingArgument => "dangling-argument",
            IssueCode::SelfRelation => "self-relation",
            IssueCode::DuplicateId => "duplicate-id",
            IssueCode::CrossTypeRelation => "cross-type-relation",
            IssueCode::DuplicateSpan => "duplicate-span",
            IssueCode::MalformedLine => "malformed-line",
            IssueCode::MissingAnn => "missing-ann",
            IssueCode::MissingTxt => "missing-txt",
            IssueCode::Unreadable => "unreadable",
        }
    }
}

impl fmt::Display for IssueCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Issue {
    pub doc_id: String,
    pub code: IssueCode,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}", self.doc_id, self.code, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<Issue>,
    pub warnings: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn error(&mut self, doc_id: &str, code: IssueCode, message: impl Into<String>) {
        self.errors.push(Issue {
            doc_id: doc_id.to_string(),
            code,
            message: message.into(),
        });
    }

    pub fn warning(&mut self, doc_id: &str, code: IssueCode, message: impl Into<String>) {
        self.warnings.push(Issue {
            doc_id: doc_id.to_string(),
            code,
            message: message.into(),
        });
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.errors.extend(other.errors);
        self.warnings.extend(other.warnings);
    }

    pub fn errors_for<'s>(&'s self, doc_id: &'s str) -> impl Iterator<Item = &'s Issue> + 's {
        self.errors.iter().filter(move |i| i.doc_id == doc_id)
    }
}

/// Checks every document invariant. Violations are reported, never thrown.
pub fn validate_document(doc: &Document) -> ValidationReport {
    let mut report = ValidationReport::default();
    let id = doc.doc_id.as_str();
    let index = TextIndex::new(&doc.text);

    let mut seen_ids = HashSet::new();
    let mut seen_spans = HashSet::new();
    for kp in &doc.keyphrases {
        if !seen_ids.insert(kp.id.as_str()) {
            report.error(
                id,
                IssueCode::DuplicateId,
                format!("keyphrase id {} repeated", kp.id),
            );
        }
        match index.slice(kp.start, kp.end) {
            Some(slice) if kp.start < kp.end => {
                if slice != kp.surface {
                    report.error(
                        id,
                        IssueCode::SurfaceMismatch,
                        format!(
                            "{}: surface {:?} but text [{}, {}) is {:?}",
                            kp.id, kp.surface, kp.start, kp.end, slice
                        ),
                    );
                }
            }
            _ => report.error(
                id,
                IssueCode::OffsetOutOfBounds,
                format!(
                    "{}: span [{}, {}) invalid for text of length {}",
                    kp.id,
                    kp.start,
                    kp.end,
                    index.len()
                ),
            ),
        }
        if !seen_spans.insert((kp.start, kp.end, kp.ktype)) {
            report.warning(
                id,
                IssueCode::DuplicateSpan,
                format!(
                    "{}: {} [{}, {}) annotated twice",
                    kp.id, kp.ktype, kp.start, kp.end
                ),
            );
        }
    }

    let mut by_id: HashMap<&str, &Keyphrase> = HashMap::new();
    for kp in &doc.keyphrases {
        by_id.entry(kp.id.as_str()).or_insert(kp);
    }
    for rel in &doc.relations {
        if rel.arg1 == rel.arg2 {
            report.error(
                id,
                IssueCode::SelfRelation,
                format!("{} relates {} to itself", rel.rtype, rel.arg1),
            );
        }
        let mut args = vec![rel.arg1.as_str()];
        if rel.arg2 != rel.arg1 {
            args.push(rel.arg2.as_str());
        }
        for arg in args {
            if !by_id.contains_key(arg) {
                report.error(
                    id,
                    IssueCode::DanglingArgument,
                    format!(
                        "{} {} {}: no keyphrase {}",
                        rel.rtype, rel.arg1, rel.arg2, arg
                    ),
                );
            }
        }
        if let (Some(a), Some(b)) = (by_id.get(rel.arg1.as_str()), by_id.get(rel.arg2.as_str())) {
            if a.ktype != b.ktype {
                report.warning(
                    id,
                    IssueCode::CrossTypeRelation,
                    format!(
                        "{} {} ({}) {} ({})",
                        rel.rtype, rel.arg1, a.ktype, rel.arg2, b.ktype
                    ),
                );
            }
        }
    }
    report
}

/// Produces the canonical form of a valid document.
///
/// Keyphrases are sorted by `(start, end, type)`, exact duplicates merged and
/// ids renumbered `T1..Tn` in that order; surfaces are re-read from the text.
/// Synonym pairs put the earlier keyphrase first, relations are deduplicated
/// and sorted by argument position.
pub fn canonicalize_document(doc: &Document) -> Result<Document> {
    let report = validate_document(doc);
    if !report.is_clean() {
        return Err(Error::InvalidDocument {
            doc_id: doc.doc_id.clone(),
            count: report.errors.len(),
        });
    }
    let index = TextIndex::new(&doc.text);

    let mut order: Vec<&Keyphrase> = doc.keyphrases.iter().collect();
    order.sort_by(|a, b| (a.start, a.end, a.ktype, &a.id).cmp(&(b.start, b.end, b.ktype, &b.id)));

    let mut keyphrases: Vec<Keyphrase> = Vec::with_capacity(order.len());
    let mut position: HashMap<&str, usize> = HashMap::new();
    for kp in order {
        let same_as_last = keyphrases
            .last()
            .is_some_and(|k| (k.start, k.end, k.ktype) == (kp.start, kp.end, kp.ktype));
        if !same_as_last {
            let surface = index.slice(kp.start, kp.end).unwrap_or_default();
            keyphrases.push(Keyphrase::new(
                format!("T{}", keyphrases.len() + 1),
                kp.ktype,
                kp.start,
                kp.end,
                surface,
            ));
        }
        position.insert(kp.id.as_str(), keyphrases.len() - 1);
    }

    let mut pairs: Vec<(usize, usize, RelationType)> = doc
        .relations
        .iter()
        .filter_map(|rel| {
            let a = position[rel.arg1.as_str()];
            let b = position[rel.arg2.as_str()];
            if a == b {
                // both arguments merged into one keyphrase
                return None;
            }
            let (a, b) = if rel.rtype.is_symmetric() && b < a {
                (b, a)
            } else {
                (a, b)
            };
            Some((a, b, rel.rtype))
        })
        .collect();
    pairs.sort();
    pairs.dedup();

    let relations = pairs
        .into_iter()
        .map(|(a, b, rtype)| {
            Relation::new(rtype, keyphrases[a].id.clone(), keyphrases[b].id.clone())
        })
        .collect();

    Ok(Document {
        doc_id: doc.doc_id.clone(),
        text: doc.text.clone(),
        keyphrases,
        relations,
    })
}

/// True when the document is valid and already in canonical form.
pub fn is_canonical(doc: &Document) -> bool {
    canonicalize_document(doc).is_ok_and(|c| &c == doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::sample_document as example_one;

    #[test]
    fn example_one_is_clean() {
        let report = validate_document(&example_one());
        assert!(report.errors.is_empty(), "{:?}", report.errors);
        assert!(report.warnings.is_empty(), "{:?}", report.warnings);
    }

    #[test]
    fn dangling_argument_is_one_error() {
        let mut doc = example_one();
        doc.relations
            .push(Relation::new(RelationType::HyponymOf, "T2", "T9"));
        let report = validate_document(&doc);
        assert_eq!(report.errors.len(), 1);
        assert_eq!(report.errors[0].code, IssueCode::DanglingArgument);
    }

    #[test]
    fn cross_type_relation_is_one_warning() {
        let mut doc = example_one();
        // T4 is TASK ("NER"), T8 is MATERIAL
        doc.relations
            .push(Relation::new(RelationType::HyponymOf, "T4", "T8"));
        let report = validate_document(&doc);
        assert!(report.errors.is_empty());
        assert_eq!(report.warnings.len(), 1);
        assert_eq!(report.warnings[0].code, IssueCode::CrossTypeRelation);
    }

    #[test]
    fn hard_violations_are_errors() {
        let mut doc = example_one();
        doc.keyphrases[0].end = 1000;
        doc.keyphrases[1].id = "T1".into();
        doc.keyphrases[4].surface = "information".into();
        doc.relations
            .push(Relation::new(RelationType::SynonymOf, "T5", "T5"));
        let codes: Vec<IssueCode> = validate_document(&doc)
            .errors
            .iter()
            .map(|e| e.code)
            .collect();
        assert_eq!(
            codes,
            vec![
                IssueCode::OffsetOutOfBounds,
                IssueCode::DuplicateId,
                IssueCode::SurfaceMismatch,
                IssueCode::SelfRelation,
            ]
        );
    }

    #[test]
    fn empty_span_is_out_of_bounds() {
        let mut doc = Document::new("d", "abc");
        doc.keyphrases
            .push(Keyphrase::new("T1", KeyphraseType::Task, 1, 1, ""));
        assert_eq!(
            validate_document(&doc).errors[0].code,
            IssueCode::OffsetOutOfBounds
        );
    }

    #[test]
    fn offsets_count_chars_not_bytes() {
        let mut doc = Document::new("d", "Ærø façade");
        doc.keyphrases.push(Keyphrase::new(
            "T1",
            KeyphraseType::Material,
            4,
            10,
            "façade",
        ));
        assert!(validate_document(&doc).is_clean());
    }

    #[test]
    fn synonym_pair_is_ordered_by_span() {
        let mut doc = example_one();
        doc.relations[2] = Relation::new(RelationType::SynonymOf, "T7", "T6");
        let canon = canonicalize_document(&doc).unwrap();
        assert_eq!(
            canon.relations[2],
            Relation::new(RelationType::SynonymOf, "T6", "T7")
        );
    }

    #[test]
    fn duplicate_keyphrase_is_merged() {
        let mut doc = example_one();
        let mut dup = doc.keyphrases[5].clone();
        assert_eq!((dup.start, dup.end), (279, 304));
        dup.id = "T99".into();
        doc.keyphrases.push(dup);
        doc.relations
            .push(Relation::new(RelationType::SynonymOf, "T99", "T7"));
        let canon = canonicalize_document(&doc).unwrap();
        assert_eq!(canon.keyphrases.len(), 8);
        // the relation through the duplicate collapses onto the existing one
        assert_eq!(canon, example_one());
    }

    #[test]
    fn canonical_example_is_unchanged() {
        let doc = example_one();
        assert_eq!(canonicalize_document(&doc).unwrap(), doc);
        assert!(is_canonical(&doc));
    }

    #[test]
    fn canonicalize_rejects_invalid() {
        let mut doc = example_one();
        doc.relations
            .push(Relation::new(RelationType::HyponymOf, "T1", "T42"));
        assert!(matches!(
            canonicalize_document(&doc),
            Err(Error::InvalidDocument { count: 1, .. })
        ));
    }

    #[test]
    fn type_names_are_case_insensitive() {
        assert_eq!(KeyphraseType::from_name("TASK"), Some(KeyphraseType::Task));
        assert_eq!(
            KeyphraseType::from_name("material"),
            Some(KeyphraseType::Material)
        );
        assert_eq!(KeyphraseType::from_name("Method"), None);
        assert_eq!(
            RelationType::from_name("HYPONYM-OF"),
            Some(RelationType::HyponymOf)
        );
        assert_eq!(
            RelationType::from_name("synonym-of"),
            Some(RelationType::SynonymOf)
        );
    }
}
