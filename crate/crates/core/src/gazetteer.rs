//! Location authority file, alias index and exact longest-match place
//! extraction.
//!
//! Matching is exact on normalized token sequences: a misspelt alias never
//! matches. At each position the longest alias wins; matches never overlap.
//! A single-token match on a word that is also a given name or a common word
//! is dropped when a neighbouring token reads like a family name.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ingest::Query;
use crate::lexicon::SuppressionLexicons;
use crate::text::normalize_text;

#[derive(Debug, thiserror::Error)]
pub enum GazetteerError {
    #[error("{file} line {line}: {reason}")]
    Malformed { file: String, line: usize, reason: String },
    #[error("duplicate location id `{0}`")]
    DuplicateLocationId(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LocationKind {
    Municipality,
    District,
}

impl std::str::FromStr for LocationKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "MUNICIPALITY" => Ok(Self::Municipality),
            "DISTRICT" => Ok(Self::District),
            other => Err(format!("unknown kind `{other}`")),
        }
    }
}

impl std::fmt::Display for LocationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Municipality => "MUNICIPALITY",
            Self::District => "DISTRICT",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GazetteerEntry {
    pub location_id: String,
    pub canonical_name: String,
    pub kind: LocationKind,
    pub country: String,
    pub wikidata_id: Option<String>,
    pub latitude: Option<f64>,
    pub longitude: Option<f64>,
    pub population: Option<u64>,
    pub wikipedia_urls: BTreeMap<String, String>,
}

impl GazetteerEntry {
    pub fn coordinates(&self) -> Option<(f64, f64)> {
        self.latitude.zip(self.longitude)
    }
}

/// Normalized alias token sequence to the locations carrying it.
#[derive(Debug, Clone, Default)]
pub struct AliasIndex {
    map: HashMap<Vec<String>, BTreeSet<String>>,
    /// Longest alias length per first token; bounds the scan at a position.
    longest_by_first: HashMap<String, usize>,
}

impl AliasIndex {
    fn insert(&mut self, tokens: Vec<String>, location_id: &str) {
        if tokens.is_empty() {
            return;
        }
        let longest = self.longest_by_first.entry(tokens[0].clone()).or_insert(0);
        *longest = (*longest).max(tokens.len());
        self.map.entry(tokens).or_default().insert(location_id.to_string());
    }

    pub fn get(&self, tokens: &[String]) -> Option<&BTreeSet<String>> {
        self.map.get(tokens)
    }

    pub fn resolve(&self, text: &str) -> Option<&BTreeSet<String>> {
        self.get(&normalize_text(text))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Every (alias tokens, location ids) pair, sorted.
    pub fn entries(&self) -> Vec<(&Vec<String>, &BTreeSet<String>)> {
        let mut v: Vec<_> = self.map.iter().collect();
        v.sort();
        v
    }

    fn longest_from(&self, first: &str) -> usize {
        self.longest_by_first.get(first).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadWarnings {
    /// Alias rows naming a location absent from the locations file.
    pub unknown_location_aliases: usize,
    /// Alias rows whose location was removed by the country filter.
    pub filtered_aliases: usize,
    pub filtered_locations: usize,
    pub empty_aliases: usize,
}

#[derive(Debug, Clone, Default)]
pub struct GazetteerOptions {
    /// Keep only locations with this ISO country code.
    pub country: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    entries: BTreeMap<String, GazetteerEntry>,
    index: AliasIndex,
    pub warnings: LoadWarnings,
}

fn malformed(file: &str, line: usize, reason: impl Into<String>) -> GazetteerError {
    GazetteerError::Malformed { file: file.into(), line, reason: reason.into() }
}

fn tsv_reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().delimiter(b'\t').quoting(false).flexible(true).has_headers(true).from_reader(r)
}

fn opt(s: Option<&str>) -> Option<&str> {
    s.map(str::trim).filter(|s| !s.is_empty())
}

fn parse_wikipedia(raw: Option<&str>) -> BTreeMap<String, String> {
    opt(raw)
        .map(|s| {
            s.split('|')
                .filter_map(|kv| kv.split_once('='))
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .collect()
        })
        .unwrap_or_default()
}

fn parse_location(rec: &csv::StringRecord, line: usize) -> Result<GazetteerEntry, GazetteerError> {
    const FILE: &str = "locations";
    let field = |i: usize, name: &str| opt(rec.get(i)).ok_or_else(|| malformed(FILE, line, format!("missing {name}")));
    let location_id = field(0, "location_id")?.to_string();
    let canonical_name = field(1, "canonical_name")?.to_string();
    let kind = field(2, "kind")?.parse().map_err(|e| malformed(FILE, line, e))?;
    let country = field(3, "country")?.to_string();
    let wikidata_id = opt(rec.get(4)).map(str::to_string);
    let coord = |i: usize, name: &str, bound: f64| -> Result<Option<f64>, GazetteerError> {
        match opt(rec.get(i)) {
            None => Ok(None),
            Some(v) => {
                let x: f64 = v.parse().map_err(|_| malformed(FILE, line, format!("bad {name} `{v}`")))?;
                if !x.is_finite() || x.abs() > bound {
                    return Err(malformed(FILE, line, format!("{name} out of range: {x}")));
                }
                Ok(Some(x))
            }
        }
    };
    let latitude = coord(5, "lat", 90.0)?;
    let longitude = coord(6, "lon", 180.0)?;
    let population = match opt(rec.get(7)) {
        None => None,
        Some(v) => Some(v.parse().map_err(|_| malformed(FILE, line, format!("bad population `{v}`")))?),
    };
    if normalize_text(&canonical_name).is_empty() {
        return Err(malformed(FILE, line, "canonical name has no tokens"));
    }
    Ok(GazetteerEntry {
        location_id,
        canonical_name,
        kind,
        country,
        wikidata_id,
        latitude,
        longitude,
        population,
        wikipedia_urls: parse_wikipedia(rec.get(8)),
    })
}

impl Gazetteer {
    /// Loads the tab-separated locations and aliases files (both with a
    /// header row). Canonical names are always indexed as aliases.
    pub fn load<L: Read, A: Read>(
        locations: L,
        aliases: A,
        options: &GazetteerOptions,
    ) -> Result<Self, GazetteerError> {
        let mut gaz = Gazetteer::default();
        let mut filtered_ids = BTreeSet::new();
        for (i, rec) in tsv_reader(locations).records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| malformed("locations", line, e.to_string()))?;
            if rec.iter().all(|f| f.trim().is_empty()) {
                continue;
            }
            let entry = parse_location(&rec, line)?;
            if gaz.entries.contains_key(&entry.location_id) || filtered_ids.contains(&entry.location_id) {
                return Err(GazetteerError::DuplicateLocationId(entry.location_id));
            }
            if let Some(c) = &options.country {
                if !entry.country.eq_ignore_ascii_case(c) {
                    gaz.warnings.filtered_locations += 1;
                    filtered_ids.insert(entry.location_id);
                    continue;
                }
            }
            gaz.index.insert(normalize_text(&entry.canonical_name), &entry.location_id);
            gaz.entries.insert(entry.location_id.clone(), entry);
        }

        for (i, rec) in tsv_reader(aliases).records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| malformed("aliases", line, e.to_string()))?;
            let Some(id) = opt(rec.get(0)) else {
                if rec.iter().all(|f| f.trim().is_empty()) {
                    continue;
                }
                return Err(malformed("aliases", line, "missing location_id"));
            };
            let tokens = normalize_text(rec.get(1).unwrap_or(""));
            if tokens.is_empty() {
                gaz.warnings.empty_aliases += 1;
                continue;
            }
            if gaz.entries.contains_key(id) {
                gaz.index.insert(tokens, id);
            } else if filtered_ids.contains(id) {
                gaz.warnings.filtered_aliases += 1;
            } else {
                log::warn!("alias on line {line} references unknown location `{id}`");
                gaz.warnings.unknown_location_aliases += 1;
            }
        }
        Ok(gaz)
    }

    pub fn load_files(locations: &Path, aliases: &Path, options: &GazetteerOptions) -> Result<Self, GazetteerError> {
        Self::load(File::open(locations)?, File::open(aliases)?, options)
    }

    pub fn get(&self, location_id: &str) -> Option<&GazetteerEntry> {
        self.entries.get(location_id)
    }

    pub fn entries(&self) -> impl Iterator<Item = &GazetteerEntry> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn index(&self) -> &AliasIndex {
        &self.index
    }
}

/// Half-open token span `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start < end);
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// A place match on a bare token sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenMatch {
    pub span: Span,
    /// Sorted; more than one id means the spelling is ambiguous.
    pub location_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaceMention {
    /// Position of the query in the corpus it was drawn from.
    pub query: usize,
    pub query_text: String,
    pub span: Span,
    pub surface: String,
    pub location_ids: Vec<String>,
}

impl PlaceMention {
    pub fn is_ambiguous(&self) -> bool {
        self.location_ids.len() > 1
    }
}

impl SuppressionLexicons {
    /// Whether the token at `i` sits next to something that reads like a
    /// family name: a plausible surname on the left, or on the right after at
    /// most two common words (particles such as `van der`).
    pub fn person_context_at(&self, tokens: &[String], i: usize) -> bool {
        if tokens.len() < 2 {
            return false;
        }
        if i > 0 && self.is_plausible_surname(&tokens[i - 1]) {
            return true;
        }
        let mut j = i + 1;
        let mut skipped = 0;
        while j < tokens.len() {
            if self.is_plausible_surname(&tokens[j]) {
                return true;
            }
            if skipped < 2 && self.is_common_word(&tokens[j]) {
                skipped += 1;
                j += 1;
                continue;
            }
            break;
        }
        false
    }

    /// The first-name rule: a one-token place match is dropped when the token
    /// is a given name or common word standing in a person-like context.
    pub fn suppresses_single(&self, tokens: &[String], i: usize) -> bool {
        let t = &tokens[i];
        tokens.len() >= 2 && (self.is_given_name(t) || self.is_common_word(t)) && self.person_context_at(tokens, i)
    }
}

/// Longest-match, left-to-right, non-overlapping alias matching.
pub fn match_tokens(tokens: &[String], gaz: &Gazetteer, lex: &SuppressionLexicons) -> Vec<TokenMatch> {
    let index = gaz.index();
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let max_len = index.longest_from(&tokens[i]).min(tokens.len() - i);
        let hit = (1..=max_len).rev().find_map(|len| {
            let ids = index.get(&tokens[i..i + len])?;
            if len == 1 && lex.suppresses_single(tokens, i) {
                return None;
            }
            Some((len, ids))
        });
        match hit {
            Some((len, ids)) => {
                out.push(TokenMatch { span: Span::new(i, i + len), location_ids: ids.iter().cloned().collect() });
                i += len;
            }
            None => i += 1,
        }
    }
    out
}

pub fn match_places(
    query_index: usize,
    query: &Query,
    gaz: &Gazetteer,
    lex: &SuppressionLexicons,
) -> Vec<PlaceMention> {
    match_tokens(&query.tokens, gaz, lex)
        .into_iter()
        .map(|m| PlaceMention {
            query: query_index,
            query_text: query.raw_text.clone(),
            surface: query.tokens[m.span.start..m.span.end].join(" "),
            span: m.span,
            location_ids: m.location_ids,
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PopulationWeights {
    pub weighted: BTreeMap<String, f64>,
    /// Counted locations without a population figure, with raw counts.
    pub unweighted: BTreeMap<String, usize>,
}

/// Mentions per inhabitant. Locations lacking a (non-zero) population are
/// reported unweighted.
pub fn weight_by_population(counts: &BTreeMap<String, usize>, gaz: &Gazetteer) -> PopulationWeights {
    let mut out = PopulationWeights::default();
    for (id, &count) in counts {
        match gaz.get(id).and_then(|e| e.population).filter(|&p| p > 0) {
            Some(pop) => {
                out.weighted.insert(id.clone(), count as f64 / pop as f64);
            }
            None => {
                out.unweighted.insert(id.clone(), count);
            }
        }
    }
    out
}
