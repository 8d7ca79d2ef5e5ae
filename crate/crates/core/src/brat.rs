//! Paired `.txt` / `.ann` stand-off files.
//!
//! Entity lines look like `T3<TAB>Task 230 233<TAB>NER`, directed relations
//! like `R1<TAB>Hyponym-of Arg1:T2 Arg2:T0`, and synonym groups like
//! `*<TAB>Synonym-of T5 T6`. Offsets are character (Unicode scalar value)
//! offsets into the `.txt` file after stripping a leading byte-order mark.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::{
    is_canonical, validate_document, Document, IssueCode, Keyphrase, KeyphraseType, Relation,
    RelationType, TextIndex, ValidationReport,
};
use crate::parallel;

/// Documents keyed and iterated by doc id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    documents: BTreeMap<String, Document>,
}

impl Corpus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_documents(docs: impl IntoIterator<Item = Document>) -> Self {
        let mut corpus = Corpus::new();
        for doc in docs {
            corpus.insert(doc);
        }
        corpus
    }

    /// Inserts a document, returning any previous one with the same id.
    pub fn insert(&mut self, doc: Document) -> Option<Document> {
        self.documents.insert(doc.doc_id.clone(), doc)
    }

    pub fn get(&self, doc_id: &str) -> Option<&Document> {
        self.documents.get(doc_id)
    }

    pub fn contains(&self, doc_id: &str) -> bool {
        self.documents.contains_key(doc_id)
    }

    pub fn documents(&self) -> impl ExactSizeIterator<Item = &Document> {
        self.documents.values()
    }

    pub fn doc_ids(&self) -> impl ExactSizeIterator<Item = &str> {
        self.documents.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Applies `f` to every document (in parallel when enabled), keeping doc-id order.
    pub fn try_map<F>(&self, f: F) -> Result<Corpus>
    where
        F: Fn(&Document) -> Result<Document> + Sync + Send,
    {
        let docs: Vec<&Document> = self.documents.values().collect();
        let mapped = parallel::map(&docs, |d| f(d));
        mapped
            .into_iter()
            .collect::<Result<Vec<_>>>()
            .map(Corpus::from_documents)
    }

    pub fn validate(&self) -> ValidationReport {
        let docs: Vec<&Document> = self.documents.values().collect();
        let mut report = ValidationReport::default();
        for r in parallel::map(&docs, |d| validate_document(d)) {
            report.merge(r);
        }
        report
    }

    pub fn canonicalized(&self) -> Result<Corpus> {
        self.try_map(crate::model::canonicalize_document)
    }

    pub fn into_documents(self) -> impl Iterator<Item = Document> {
        self.documents.into_values()
    }
}

impl FromIterator<Document> for Corpus {
    fn from_iter<I: IntoIterator<Item = Document>>(iter: I) -> Self {
        Corpus::from_documents(iter)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnnLine {
    Entity {
        id: String,
        ktype: KeyphraseType,
        start: usize,
        end: usize,
        surface: String,
    },
    Relation {
        id: String,
        rtype: RelationType,
        arg1: String,
        arg2: String,
    },
    Equivalence {
        rtype: RelationType,
        args: Vec<String>,
    },
}

fn malformed(message: impl Into<String>) -> Error {
    Error::MalformedLine {
        file: None,
        line: 1,
        message: message.into(),
    }
}

fn parse_offset(field: &str) -> Result<usize> {
    field
        .parse::<usize>()
        .map_err(|_| malformed(format!("offset {field:?} is not a non-negative integer")))
}

/// Parses one `.ann` line (without its trailing newline).
///
/// Errors report line 1; [`parse_document_pair`] rewrites the line number.
pub fn parse_ann_line(line: &str) -> Result<AnnLine> {
    let line = line.strip_suffix('\r').unwrap_or(line);
    let (id, rest) = line
        .split_once('\t')
        .ok_or_else(|| malformed("missing tab after identifier"))?;

    match id.chars().next() {
        Some('T') => {
            let (body, surface) = rest
                .split_once('\t')
                .ok_or_else(|| malformed("entity line needs a surface column"))?;
            let fields: Vec<&str> = body.split_whitespace().collect();
            let [tname, start, end] = fields[..] else {
                return Err(malformed(format!(
                    "entity line needs `<Type> <start> <end>`, got {body:?}"
                )));
            };
            let ktype = KeyphraseType::from_name(tname)
                .ok_or_else(|| malformed(format!("unknown keyphrase type {tname:?}")))?;
            Ok(AnnLine::Entity {
                id: id.to_string(),
                ktype,
                start: parse_offset(start)?,
                end: parse_offset(end)?,
                surface: surface.to_string(),
            })
        }
        Some('R') => {
            // some tools append an empty trailing column
            let body = rest.strip_suffix('\t').unwrap_or(rest);
            let fields: Vec<&str> = body.split_whitespace().collect();
            let [rname, a1, a2] = fields[..] else {
                return Err(malformed(format!(
                    "relation line needs `<Type> Arg1:<id> Arg2:<id>`, got {body:?}"
                )));
            };
            let rtype = RelationType::from_name(rname)
                .ok_or_else(|| malformed(format!("unknown relation type {rname:?}")))?;
            let arg = |field: &str, role: &str| {
                field
                    .split_once(':')
                    .filter(|(r, id)| r.eq_ignore_ascii_case(role) && !id.is_empty())
                    .map(|(_, id)| id.to_string())
                    .ok_or_else(|| malformed(format!("expected {role}:<id>, got {field:?}")))
            };
            Ok(AnnLine::Relation {
                id: id.to_string(),
                rtype,
                arg1: arg(a1, "Arg1")?,
                arg2: arg(a2, "Arg2")?,
            })
        }
        Some('*') if id == "*" => {
            let mut fields = rest.split_whitespace();
            let rname = fields
                .next()
                .ok_or_else(|| malformed("equivalence line without type"))?;
            let rtype = match RelationType::from_name(rname) {
                Some(RelationType::SynonymOf) => RelationType::SynonymOf,
                Some(other) => return Err(malformed(format!("{other} cannot be an equivalence"))),
                None => return Err(malformed(format!("unknown relation type {rname:?}"))),
            };
            let args: Vec<String> = fields.map(str::to_string).collect();
            if args.len() < 2 {
                return Err(malformed("equivalence line needs at least two arguments"));
            }
            Ok(AnnLine::Equivalence { rtype, args })
        }
        _ => Err(malformed(format!("unknown annotation identifier {id:?}"))),
    }
}

/// Form in which a surface string is written to the surface column.
fn column_form(surface: &str) -> String {
    surface
        .chars()
        .map(|c| {
            if matches!(c, '\n' | '\r' | '\t') {
                ' '
            } else {
                c
            }
        })
        .collect()
}

pub(crate) fn strip_bom(s: &str) -> &str {
    s.strip_prefix('\u{feff}').unwrap_or(s)
}

enum Pending {
    Relation(Relation),
    Group(Vec<String>),
}

/// Assembles a document from its text and `.ann` content and validates it.
pub fn parse_document_pair(
    doc_id: &str,
    text: &str,
    ann: &str,
) -> Result<(Document, ValidationReport)> {
    let mut doc = Document::new(doc_id, strip_bom(text));
    let index = TextIndex::new(&doc.text);
    // relations and equivalence groups in file order; groups expand once all spans are known
    let mut pending: Vec<Pending> = Vec::new();

    for (lineno, line) in strip_bom(ann).split('\n').enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed = parse_ann_line(line).map_err(|e| match e {
            Error::MalformedLine { message, .. } => Error::MalformedLine {
                file: None,
                line: lineno + 1,
                message,
            },
            other => other,
        })?;
        match parsed {
            AnnLine::Entity {
                id,
                ktype,
                start,
                end,
                surface,
            } => {
                // offsets win: keep the column only when it disagrees with the text
                let surface = match index.slice(start, end) {
                    Some(slice) if column_form(slice) == surface => slice.to_string(),
                    _ => surface,
                };
                doc.keyphrases
                    .push(Keyphrase::new(id, ktype, start, end, surface));
            }
            AnnLine::Relation {
                rtype, arg1, arg2, ..
            } => pending.push(Pending::Relation(Relation::new(rtype, arg1, arg2))),
            AnnLine::Equivalence { args, .. } => pending.push(Pending::Group(args)),
        }
    }

    let spans: HashMap<&str, (usize, usize)> = doc
        .keyphrases
        .iter()
        .map(|k| (k.id.as_str(), k.span()))
        .collect();
    let mut relations = Vec::new();
    for entry in pending {
        let args = match entry {
            Pending::Relation(rel) => {
                relations.push(rel);
                continue;
            }
            Pending::Group(args) => args,
        };
        for (i, a) in args.iter().enumerate() {
            for b in &args[i + 1..] {
                let swap = matches!((spans.get(a.as_str()), spans.get(b.as_str())), (Some(x), Some(y)) if y < x);
                let (a, b) = if swap { (b, a) } else { (a, b) };
                relations.push(Relation::new(RelationType::SynonymOf, a.clone(), b.clone()));
            }
        }
    }
    drop(spans);
    doc.relations = relations;

    let report = validate_document(&doc);
    Ok((doc, report))
}

/// Writes a canonical document in stand-off form.
pub fn serialize_annotations(doc: &Document) -> Result<String> {
    if !is_canonical(doc) {
        return Err(Error::NonCanonical {
            doc_id: doc.doc_id.clone(),
        });
    }
    let mut out = String::new();
    for kp in &doc.keyphrases {
        let _ = writeln!(
            out,
            "{}\t{} {} {}\t{}",
            kp.id,
            kp.ktype,
            kp.start,
            kp.end,
            column_form(&kp.surface)
        );
    }
    let mut next_r = 1;
    for rel in &doc.relations {
        match rel.rtype {
            RelationType::HyponymOf => {
                let _ = writeln!(
                    out,
                    "R{next_r}\t{} Arg1:{} Arg2:{}",
                    rel.rtype, rel.arg1, rel.arg2
                );
                next_r += 1;
            }
            RelationType::SynonymOf => {
                let _ = writeln!(out, "*\t{} {} {}", rel.rtype, rel.arg1, rel.arg2);
            }
        }
    }
    Ok(out)
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

#[derive(Default)]
struct Listing {
    txt: BTreeMap<String, PathBuf>,
    ann: BTreeMap<String, PathBuf>,
}

fn list_dir(dir: &Path) -> Result<Listing> {
    let mut listing = Listing::default();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if !path.is_file() {
            continue;
        }
        let (Some(stem), Some(ext)) = (
            path.file_stem().and_then(|s| s.to_str()),
            path.extension().and_then(|s| s.to_str()),
        ) else {
            continue;
        };
        let stem = stem.to_string();
        match ext {
            "txt" => {
                listing.txt.insert(stem, path);
            }
            "ann" => {
                listing.ann.insert(stem, path);
            }
            _ => {}
        }
    }
    Ok(listing)
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Reads and parses the given `(doc_id, text, ann file)` triples, aggregating
/// failures into the report instead of stopping at the first one.
fn parse_many(
    items: Vec<(String, String, Option<PathBuf>)>,
    report: &mut ValidationReport,
) -> Corpus {
    let parsed = parallel::map(&items, |(doc_id, text, ann_path)| {
        let ann = match ann_path {
            Some(path) => read_to_string(path)?,
            None => String::new(),
        };
        parse_document_pair(doc_id, text, &ann).map_err(|e| match ann_path {
            Some(path) => e.in_file(file_name(path)),
            None => e,
        })
    });
    let mut corpus = Corpus::new();
    for ((doc_id, _, _), result) in items.iter().zip(parsed) {
        match result {
            Ok((doc, r)) => {
                report.merge(r);
                corpus.insert(doc);
            }
            Err(e @ Error::MalformedLine { .. }) => {
                report.error(doc_id, IssueCode::MalformedLine, e.to_string())
            }
            Err(e) => report.error(doc_id, IssueCode::Unreadable, e.to_string()),
        }
    }
    corpus
}

fn read_texts(
    listing: &Listing,
    report: &mut ValidationReport,
) -> Vec<(String, String, Option<PathBuf>)> {
    let mut items = Vec::new();
    for (stem, txt) in &listing.txt {
        match read_to_string(txt) {
            Ok(text) => items.push((stem.clone(), text, listing.ann.get(stem).cloned())),
            Err(e) => report.error(stem, IssueCode::Unreadable, e.to_string()),
        }
    }
    items
}

/// Loads every `<stem>.txt` / `<stem>.ann` pair of a directory.
///
/// Unpaired files and unparsable documents become error entries; the
/// remaining documents are still loaded. Only an unreadable directory fails.
pub fn load_corpus(dir: impl AsRef<Path>) -> Result<(Corpus, ValidationReport)> {
    let listing = list_dir(dir.as_ref())?;
    let mut report = ValidationReport::default();
    for stem in listing.txt.keys() {
        if !listing.ann.contains_key(stem) {
            report.error(
                stem,
                IssueCode::MissingAnn,
                format!("{stem}.txt has no {stem}.ann"),
            );
        }
    }
    for stem in listing.ann.keys() {
        if !listing.txt.contains_key(stem) {
            report.error(
                stem,
                IssueCode::MissingTxt,
                format!("{stem}.ann has no {stem}.txt"),
            );
        }
    }
    let items = read_texts(&listing, &mut report)
        .into_iter()
        .filter(|(_, _, ann)| ann.is_some())
        .collect();
    let corpus = parse_many(items, &mut report);
    Ok((corpus, report))
}

/// Like [`load_corpus`] but `.ann` files are optional: a text without one
/// loads as an unannotated document.
pub fn load_texts(dir: impl AsRef<Path>) -> Result<(Corpus, ValidationReport)> {
    let listing = list_dir(dir.as_ref())?;
    let mut report = ValidationReport::default();
    for stem in listing.ann.keys() {
        if !listing.txt.contains_key(stem) {
            report.error(
                stem,
                IssueCode::MissingTxt,
                format!("{stem}.ann has no {stem}.txt"),
            );
        }
    }
    let items = read_texts(&listing, &mut report);
    let corpus = parse_many(items, &mut report);
    Ok((corpus, report))
}

/// Loads a directory of predicted `.ann` files against the texts of `reference`.
///
/// Any `.txt` files in the directory are ignored. A prediction for a doc id
/// that `reference` lacks is an error.
pub fn load_predictions(
    dir: impl AsRef<Path>,
    reference: &Corpus,
) -> Result<(Corpus, ValidationReport)> {
    let listing = list_dir(dir.as_ref())?;
    if let Some(stem) = listing.ann.keys().find(|s| !reference.contains(s)) {
        return Err(Error::UnknownPrediction(stem.clone()));
    }
    let items = listing
        .ann
        .iter()
        .map(|(stem, path)| {
            let text = reference
                .get(stem)
                .map(|d| d.text.clone())
                .unwrap_or_default();
            (stem.clone(), text, Some(path.clone()))
        })
        .collect();
    let mut report = ValidationReport::default();
    let corpus = parse_many(items, &mut report);
    Ok((corpus, report))
}

/// Writes `<doc_id>.ann` (and `<doc_id>.txt` when `with_text`) for every
/// document into an existing directory. Documents must be canonical.
pub fn write_corpus(dir: impl AsRef<Path>, corpus: &Corpus, with_text: bool) -> Result<()> {
    let dir = dir.as_ref();
    for doc in corpus.documents() {
        let ann = serialize_annotations(doc)?;
        let path = dir.join(format!("{}.ann", doc.doc_id));
        fs::write(&path, ann).map_err(|e| Error::io(&path, e))?;
        if with_text {
            let path = dir.join(format!("{}.txt", doc.doc_id));
            fs::write(&path, &doc.text).map_err(|e| Error::io(&path, e))?;
        }
    }
    Ok(())
}

/// Doc ids present in both corpora.
pub fn shared_ids<'a>(a: &'a Corpus, b: &'a Corpus) -> BTreeSet<&'a str> {
    a.doc_ids().filter(|id| b.contains(id)).collect()
}
