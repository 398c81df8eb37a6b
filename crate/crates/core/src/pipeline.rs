//! Runs place and person extraction side by side over a corpus.
//!
//! The two extractors are independent, except for a token that is both a
//! given name and a place alias. When such a token matches alone in a
//! multi-token query and no family name stands next to it, neither module
//! claims it: the place match is dropped and the query is flagged as
//! ambiguous.

use serde::{Deserialize, Serialize};

use crate::evaluate::{GoldCorpus, Mention};
use crate::gazetteer::{match_tokens, Gazetteer, PlaceMention, TokenMatch};
use crate::ingest::Query;
use crate::lexicon::{ParticleList, SuppressionLexicons};
use crate::person::{extract_spans, CandidateName, NameSpans, PersonOptions};

pub struct Resources {
    pub gazetteer: Gazetteer,
    pub lexicons: SuppressionLexicons,
    pub particles: ParticleList,
    pub person: PersonOptions,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenExtraction {
    pub places: Vec<TokenMatch>,
    pub persons: Vec<NameSpans>,
    /// Positions of given-name/alias tokens that neither module kept.
    pub ambiguous: Vec<usize>,
}

pub fn extract_tokens(tokens: &[String], res: &Resources) -> TokenExtraction {
    let persons = extract_spans(tokens, &res.lexicons, &res.particles, &res.person);
    let mut out = TokenExtraction { persons, ..Default::default() };
    for m in match_tokens(tokens, &res.gazetteer, &res.lexicons) {
        let i = m.span.start;
        let contested = tokens.len() >= 2 && m.span.len() == 1 && res.lexicons.is_given_name(&tokens[i]);
        if contested {
            out.ambiguous.push(i);
        } else {
            out.places.push(m);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmbiguousQuery {
    pub query: usize,
    pub query_text: String,
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusExtraction {
    pub places: Vec<PlaceMention>,
    pub persons: Vec<CandidateName>,
    pub ambiguous: Vec<AmbiguousQuery>,
}

/// Extraction over queries numbered in slice order.
pub fn extract_corpus(queries: &[Query], res: &Resources) -> CorpusExtraction {
    let mut out = CorpusExtraction::default();
    for (qi, q) in queries.iter().enumerate() {
        let t = extract_tokens(&q.tokens, res);
        let surface = |a: usize, b: usize| q.tokens[a..b].join(" ");
        out.places.extend(t.places.into_iter().map(|m| PlaceMention {
            query: qi,
            query_text: q.raw_text.clone(),
            surface: surface(m.span.start, m.span.end),
            span: m.span,
            location_ids: m.location_ids,
        }));
        out.persons.extend(t.persons.into_iter().map(|spans| {
            let w = spans.span();
            CandidateName { query: qi, query_text: q.raw_text.clone(), spans, surface: surface(w.start, w.end) }
        }));
        if !t.ambiguous.is_empty() {
            out.ambiguous.push(AmbiguousQuery {
                query: qi,
                query_text: q.raw_text.clone(),
                tokens: t.ambiguous.iter().map(|&i| q.tokens[i].clone()).collect(),
            });
        }
    }
    out
}

/// Place and person predictions over the gold queries, numbered like
/// `corpus.queries`.
pub fn predict_gold(corpus: &GoldCorpus, res: &Resources) -> (Vec<Mention>, Vec<Mention>) {
    let mut places = Vec::new();
    let mut persons = Vec::new();
    for (qi, q) in corpus.queries.iter().enumerate() {
        let t = extract_tokens(&q.tokens, res);
        places.extend(t.places.iter().map(|m| Mention { query: qi, span: m.span }));
        persons.extend(t.persons.iter().map(|s| Mention { query: qi, span: s.span() }));
    }
    (places, persons)
}
