//! Toolkit for mention-level scientific keyphrase extraction corpora.
//!
//! * [`model`]: keyphrases, relations, documents, validation and canonical form
//! * [`brat`]: stand-off `.txt`/`.ann` reading and writing
//! * [`codec`]: sentence/token sequence encoding (BIO, type and relation labels)
//! * [`scorer`]: exact-match micro-averaged P/R/F1 under three scenarios
//! * [`baselines`]: oracle round trip, random labeling and gazetteer matching
//! * [`analytics`]: corpus statistics and Cohen's / Fleiss' kappa

pub mod analytics;
pub mod baselines;
pub mod brat;
pub mod codec;
pub mod error;
pub mod fixtures;
pub mod model;
pub mod parallel;
pub mod scorer;
pub mod synth;

pub use brat::Corpus;
pub use error::{Error, Result};
pub use model::{Document, Keyphrase, KeyphraseType, Relation, RelationType, ValidationReport};
