//! Small hand-annotated documents used by tests, benchmarks and the CLI smoke tests.

use crate::brat::Corpus;
use crate::model::{Document, KeyphraseType, Relation, RelationType};

use KeyphraseType::{Material, Process, Task};
use RelationType::{HyponymOf, SynonymOf};

pub const SAMPLE_TEXT: &str = "Information extraction is the process of extracting structured data from \
unstructured text, which is relevant for several end-to-end tasks, including question answering. \
This paper addresses the tasks of named entity recognition (NER), a subtask of information \
extraction, using conditional random fields (CRF). Our method is evaluated on the ConLL-2003 NER corpus.";

/// Stand-off annotations of [`SAMPLE_TEXT`] in canonical serialized form.
pub const SAMPLE_ANN: &str = "T1\tTask 0 22\tInformation extraction
T2\tTask 150 168\tquestion answering
T3\tTask 204 228\tnamed entity recognition
T4\tTask 230 233\tNER
T5\tTask 249 271\tinformation extraction
T6\tProcess 279 304\tconditional random fields
T7\tProcess 306 309\tCRF
T8\tMaterial 343 364\tConLL-2003 NER corpus
R1\tHyponym-of Arg1:T3 Arg2:T1
*\tSynonym-of T3 T4
*\tSynonym-of T6 T7
";

/// The sample paragraph with its 8 keyphrases and 3 relations, canonical.
pub fn sample_document() -> Document {
    let mut doc = Document::new("sample", SAMPLE_TEXT);
    for (ktype, start, end) in [
        (Task, 0, 22),
        (Task, 150, 168),
        (Task, 204, 228),
        (Task, 230, 233),
        (Task, 249, 271),
        (Process, 279, 304),
        (Process, 306, 309),
        (Material, 343, 364),
    ] {
        doc.push_keyphrase(ktype, start, end);
    }
    doc.relations = vec![
        Relation::new(HyponymOf, "T3", "T1"),
        Relation::new(SynonymOf, "T3", "T4"),
        Relation::new(SynonymOf, "T6", "T7"),
    ];
    doc
}

/// Builds a document by locating the `nth` occurrence of each phrase.
fn annotate(doc_id: &str, text: &str, spans: &[(&str, usize, KeyphraseType)]) -> Document {
    let mut doc = Document::new(doc_id, text);
    for &(phrase, nth, ktype) in spans {
        let byte = text
            .match_indices(phrase)
            .nth(nth)
            .unwrap_or_else(|| panic!("{phrase:?} #{nth} not in {doc_id}"))
            .0;
        let start = text[..byte].chars().count();
        doc.push_keyphrase(ktype, start, start + phrase.chars().count());
    }
    doc
}

/// Three documents, ten keyphrases and four relations. Exactly one keyphrase
/// ("protein", inside the token "protein-ligand") does not sit on token
/// boundaries and exactly one relation crosses a sentence boundary.
pub fn misalignment_corpus() -> Corpus {
    let mut m1 = annotate(
        "m1",
        "Graph parsing uses beam search. Beam search is a heuristic search method.",
        &[
            ("Graph parsing", 0, Task),
            ("beam search", 0, Process),
            ("Beam search", 0, Process),
            ("heuristic search method", 0, Process),
        ],
    );
    m1.relations = vec![
        Relation::new(SynonymOf, "T2", "T3"),
        Relation::new(HyponymOf, "T3", "T4"),
    ];

    let m2 = annotate(
        "m2",
        "We annotate protein-ligand complexes with structural data.",
        &[("protein", 0, Material)],
    );

    let mut m3 = annotate(
        "m3",
        "Neural machine translation, a kind of machine translation, needs parallel corpora. \
         Bitexts are parallel corpora.",
        &[
            ("Neural machine translation", 0, Task),
            ("machine translation", 1, Task),
            ("parallel corpora", 0, Material),
            ("Bitexts", 0, Material),
            ("parallel corpora", 1, Material),
        ],
    );
    m3.relations = vec![
        Relation::new(HyponymOf, "T1", "T2"),
        Relation::new(SynonymOf, "T4", "T5"),
    ];

    Corpus::from_documents([m1, m2, m3])
}
