//! Mining of digital-library search logs: query extraction, place and
//! person-name recognition, knowledge-base reconciliation, evaluation against
//! a gold corpus, and reporting.

pub mod evaluate;
pub mod gazetteer;
pub mod geonames;
pub mod ingest;
pub mod kb;
pub mod lexicon;
pub mod person;
pub mod pipeline;
pub mod report;
pub mod similarity;
pub mod text;

pub use evaluate::{
    cohen_kappa, gsc_subsets, load_gsc, score_extraction, AgreementReport, Category, EvalReport, GoldCorpus, MatchMode,
    Mention,
};
pub use gazetteer::{match_places, Gazetteer, GazetteerOptions, LocationKind, PlaceMention, Span};
pub use ingest::{build_visits, corpus_stats, extract_queries, read_export, CorpusStats, LogRecord, Query, Visit};
pub use kb::{batch_reconcile, reconcile, FixtureClient, KbClient, KbMatch, KbSource, Provenance, ReconcileOptions};
pub use lexicon::{Lexicon, ParticleList, SuppressionLexicons};
pub use person::{extract_candidates, CandidateName, PersonOptions};
pub use pipeline::{extract_corpus, Resources};
pub use report::{aggregate, emit_geojson, AggregateReport};
pub use text::normalize_text;
