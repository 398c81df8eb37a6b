//! Reconciliation of candidate names against knowledge bases.
//!
//! Backends implement [`KbClient`]. The crate ships an offline
//! [`FixtureClient`] reading canned responses, and HTTP clients speaking the
//! Wikidata entity-search and VIAF AutoSuggest protocols over a pluggable
//! [`HttpGet`] transport. Hits at or above the acceptance threshold count as
//! matches; transport failures leave a spelling UNRESOLVED rather than NONE.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::person::CandidateName;
use crate::similarity::token_set_ratio;
use crate::text::{normalize_text, normalized_key};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum KbSource {
    Wikidata,
    Viaf,
}

impl std::fmt::Display for KbSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Wikidata => "WIKIDATA",
            Self::Viaf => "VIAF",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KbMatch {
    pub source: KbSource,
    pub entity_id: String,
    pub label: String,
    pub score: f64,
    /// Where the hit came from: a fixture key or the request URL.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<String>,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq, Serialize, Deserialize)]
pub enum KbError {
    #[error("knowledge base unavailable: {0}")]
    KbUnavailable(String),
    #[error("malformed knowledge-base response: {0}")]
    KbMalformedResponse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateLimit {
    pub max_per_second: f64,
}

impl RateLimit {
    pub fn min_interval(&self) -> Duration {
        if self.max_per_second <= 0.0 {
            Duration::ZERO
        } else {
            Duration::from_secs_f64(1.0 / self.max_per_second)
        }
    }
}

/// A name-search backend.
pub trait KbClient {
    fn source(&self) -> KbSource;
    /// Ordered hits for `name`, at most [`KbClient::page_size`] of them.
    fn search(&self, name: &str) -> Result<Vec<KbMatch>, KbError>;
    fn rate_limit(&self) -> Option<RateLimit> {
        None
    }
    fn page_size(&self) -> usize {
        10
    }
}

#[derive(Debug, Clone, Deserialize)]
struct FixtureHit {
    entity_id: String,
    label: String,
    score: f64,
    source: KbSource,
}

/// Canned responses: a JSON object from query string to a list of
/// `{entity_id, label, score, source}`. Keys are compared after
/// normalization; a client only sees hits of its own source.
#[derive(Debug, Clone)]
pub struct FixtureClient {
    source: KbSource,
    responses: HashMap<String, Vec<FixtureHit>>,
    page_size: usize,
}

impl FixtureClient {
    pub fn from_reader<R: Read>(source: KbSource, reader: R) -> Result<Self, KbError> {
        let raw: BTreeMap<String, Vec<FixtureHit>> =
            serde_json::from_reader(reader).map_err(|e| KbError::KbMalformedResponse(format!("fixture: {e}")))?;
        let mut responses: HashMap<String, Vec<FixtureHit>> = HashMap::new();
        for (k, hits) in raw {
            for h in &hits {
                if !(0.0..=1.0).contains(&h.score) || h.entity_id.is_empty() {
                    return Err(KbError::KbMalformedResponse(format!(
                        "fixture entry for `{k}` has score {} / id `{}`",
                        h.score, h.entity_id
                    )));
                }
            }
            responses.entry(normalized_key(&k)).or_default().extend(hits);
        }
        Ok(Self { source, responses, page_size: 10 })
    }

    pub fn open(source: KbSource, path: &Path) -> Result<Self, KbError> {
        let f = File::open(path).map_err(|e| KbError::KbUnavailable(format!("{}: {e}", path.display())))?;
        Self::from_reader(source, f)
    }

    /// One client per source over the same fixture file.
    pub fn pair(path: &Path) -> Result<(Self, Self), KbError> {
        Ok((Self::open(KbSource::Wikidata, path)?, Self::open(KbSource::Viaf, path)?))
    }

    pub fn with_page_size(mut self, n: usize) -> Self {
        self.page_size = n;
        self
    }
}

impl KbClient for FixtureClient {
    fn source(&self) -> KbSource {
        self.source
    }

    fn search(&self, name: &str) -> Result<Vec<KbMatch>, KbError> {
        let key = normalized_key(name);
        Ok(self
            .responses
            .get(&key)
            .into_iter()
            .flatten()
            .filter(|h| h.source == self.source)
            .take(self.page_size)
            .map(|h| KbMatch {
                source: h.source,
                entity_id: h.entity_id.clone(),
                label: h.label.clone(),
                score: h.score,
                raw: Some(format!("fixture:{key}")),
            })
            .collect())
    }

    fn page_size(&self) -> usize {
        self.page_size
    }
}

/// Minimal blocking GET used by the live clients.
pub trait HttpGet {
    fn get(&self, url: &str, params: &[(&str, &str)]) -> Result<String, KbError>;
}

pub fn build_url(base: &str, params: &[(&str, &str)]) -> String {
    let query: String = url::form_urlencoded::Serializer::new(String::new()).extend_pairs(params).finish();
    if query.is_empty() {
        base.to_string()
    } else if base.contains('?') {
        format!("{base}&{query}")
    } else {
        format!("{base}?{query}")
    }
}

#[cfg(feature = "live")]
pub mod http {
    //! `ureq`-backed transport for the live clients.
    use super::{build_url, HttpGet, KbError};

    pub struct UreqTransport {
        agent: ureq::Agent,
        user_agent: String,
    }

    impl UreqTransport {
        pub fn new(user_agent: &str, timeout: std::time::Duration) -> Self {
            let agent = ureq::Agent::config_builder().timeout_global(Some(timeout)).build().into();
            Self { agent, user_agent: user_agent.to_string() }
        }
    }

    impl HttpGet for UreqTransport {
        fn get(&self, base: &str, params: &[(&str, &str)]) -> Result<String, KbError> {
            let url = build_url(base, params);
            let mut resp = self
                .agent
                .get(&url)
                .header("User-Agent", &self.user_agent)
                .header("Accept", "application/json")
                .call()
                .map_err(|e| KbError::KbUnavailable(format!("{url}: {e}")))?;
            resp.body_mut().read_to_string().map_err(|e| KbError::KbUnavailable(format!("{url}: {e}")))
        }
    }
}

#[derive(Debug, Deserialize)]
struct WdSearchResponse {
    search: Option<Vec<WdHit>>,
    error: Option<serde_json::Value>,
}

#[derive(Debug, Deserialize)]
struct WdHit {
    id: String,
    #[serde(default)]
    label: Option<String>,
    #[serde(default)]
    aliases: Vec<String>,
    #[serde(rename = "match", default)]
    matched: Option<WdMatchInfo>,
}

#[derive(Debug, Deserialize)]
struct WdMatchInfo {
    text: String,
}

/// Parses a `wbsearchentities` response. Each hit is scored by the best
/// token-set ratio between `query` and its label, matched text or aliases.
pub fn parse_wikidata_search(body: &str, query: &str, source_url: &str) -> Result<Vec<KbMatch>, KbError> {
    let resp: WdSearchResponse =
        serde_json::from_str(body).map_err(|e| KbError::KbMalformedResponse(format!("wikidata: {e}")))?;
    if let Some(err) = resp.error {
        return Err(KbError::KbMalformedResponse(format!("wikidata error: {err}")));
    }
    let hits = resp.search.ok_or_else(|| KbError::KbMalformedResponse("wikidata: missing `search`".into()))?;
    Ok(hits
        .into_iter()
        .filter(|h| !h.id.is_empty())
        .map(|h| {
            let label = h.label.clone().unwrap_or_else(|| h.id.clone());
            let score = std::iter::once(label.as_str())
                .chain(h.matched.as_ref().map(|m| m.text.as_str()))
                .chain(h.aliases.iter().map(String::as_str))
                .map(|s| token_set_ratio(query, s))
                .fold(0.0, f64::max);
            KbMatch { source: KbSource::Wikidata, entity_id: h.id, label, score, raw: Some(source_url.into()) }
        })
        .collect())
}

#[derive(Debug, Deserialize)]
struct ViafSuggest {
    #[serde(default)]
    result: Option<Vec<ViafHit>>,
}

#[derive(Debug, Deserialize)]
struct ViafHit {
    term: String,
    #[serde(default, rename = "displayForm")]
    display_form: Option<String>,
    #[serde(default)]
    nametype: Option<String>,
    viafid: serde_json::Value,
}

/// Parses a VIAF AutoSuggest response, keeping personal names only. The
/// score is the best token-set ratio between `query` and the returned term
/// or display form, since the service reports no score of its own.
pub fn parse_viaf_autosuggest(body: &str, query: &str, source_url: &str) -> Result<Vec<KbMatch>, KbError> {
    let resp: ViafSuggest =
        serde_json::from_str(body).map_err(|e| KbError::KbMalformedResponse(format!("viaf: {e}")))?;
    let mut out = Vec::new();
    for h in resp.result.unwrap_or_default() {
        if h.nametype.as_deref().is_some_and(|t| t != "personal") {
            continue;
        }
        let id = match &h.viafid {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Number(n) => n.to_string(),
            other => return Err(KbError::KbMalformedResponse(format!("viaf: bad viafid {other}"))),
        };
        if id.is_empty() {
            continue;
        }
        let score = std::iter::once(h.term.as_str())
            .chain(h.display_form.as_deref())
            .map(|s| token_set_ratio(query, s))
            .fold(0.0, f64::max);
        out.push(KbMatch {
            source: KbSource::Viaf,
            entity_id: id,
            label: h.display_form.unwrap_or(h.term),
            score,
            raw: Some(source_url.into()),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointConfig {
    pub url: String,
    #[serde(default = "default_language")]
    pub language: String,
    #[serde(default = "default_page_size")]
    pub page_size: usize,
    #[serde(default)]
    pub max_per_second: Option<f64>,
}

fn default_language() -> String {
    "fr".into()
}

fn default_page_size() -> usize {
    10
}

/// Wikidata entity search (`action=wbsearchentities`).
pub struct WikidataClient<H> {
    pub config: EndpointConfig,
    pub http: H,
}

impl<H: HttpGet> KbClient for WikidataClient<H> {
    fn source(&self) -> KbSource {
        KbSource::Wikidata
    }

    fn search(&self, name: &str) -> Result<Vec<KbMatch>, KbError> {
        let limit = self.config.page_size.to_string();
        let params = [
            ("action", "wbsearchentities"),
            ("search", name),
            ("language", self.config.language.as_str()),
            ("uselang", self.config.language.as_str()),
            ("type", "item"),
            ("limit", limit.as_str()),
            ("format", "json"),
        ];
        let body = self.http.get(&self.config.url, &params)?;
        let mut hits = parse_wikidata_search(&body, name, &build_url(&self.config.url, &params))?;
        hits.truncate(self.config.page_size);
        Ok(hits)
    }

    fn rate_limit(&self) -> Option<RateLimit> {
        self.config.max_per_second.map(|max_per_second| RateLimit { max_per_second })
    }

    fn page_size(&self) -> usize {
        self.config.page_size
    }
}

/// VIAF AutoSuggest (`?query=`).
pub struct ViafClient<H> {
    pub config: EndpointConfig,
    pub http: H,
}

impl<H: HttpGet> KbClient for ViafClient<H> {
    fn source(&self) -> KbSource {
        KbSource::Viaf
    }

    fn search(&self, name: &str) -> Result<Vec<KbMatch>, KbError> {
        let params = [("query", name)];
        let body = self.http.get(&self.config.url, &params)?;
        let mut hits = parse_viaf_autosuggest(&body, name, &build_url(&self.config.url, &params))?;
        hits.truncate(self.config.page_size);
        Ok(hits)
    }

    fn rate_limit(&self) -> Option<RateLimit> {
        self.config.max_per_second.map(|max_per_second| RateLimit { max_per_second })
    }

    fn page_size(&self) -> usize {
        self.config.page_size
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Provenance {
    Both,
    WikidataOnly,
    ViafOnly,
    None,
    /// At least one backend failed; retry later.
    Unresolved,
}

impl Provenance {
    pub const ALL: [Provenance; 5] = [Self::Both, Self::WikidataOnly, Self::ViafOnly, Self::None, Self::Unresolved];

    pub fn from_sources(sources: &BTreeSet<KbSource>) -> Self {
        match (sources.contains(&KbSource::Wikidata), sources.contains(&KbSource::Viaf)) {
            (true, true) => Self::Both,
            (true, false) => Self::WikidataOnly,
            (false, true) => Self::ViafOnly,
            (false, false) => Self::None,
        }
    }

    pub fn is_match(self) -> bool {
        matches!(self, Self::Both | Self::WikidataOnly | Self::ViafOnly)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Both => "BOTH",
            Self::WikidataOnly => "WIKIDATA_ONLY",
            Self::ViafOnly => "VIAF_ONLY",
            Self::None => "NONE",
            Self::Unresolved => "UNRESOLVED",
        }
    }
}

impl std::str::FromStr for Provenance {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|p| p.as_str() == s).ok_or_else(|| format!("unknown provenance `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconcileOptions {
    pub threshold: f64,
    /// Per-source overrides of `threshold`.
    #[serde(default)]
    pub source_thresholds: BTreeMap<KbSource, f64>,
    /// Also look up the name with family and given parts swapped. Doubles
    /// the remote calls per spelling.
    #[serde(default)]
    pub query_inverted: bool,
}

impl Default for ReconcileOptions {
    fn default() -> Self {
        Self { threshold: 0.9, source_thresholds: BTreeMap::new(), query_inverted: false }
    }
}

impl ReconcileOptions {
    pub fn threshold_for(&self, source: KbSource) -> f64 {
        self.source_thresholds.get(&source).copied().unwrap_or(self.threshold)
    }

    pub fn validate(&self) -> Result<(), String> {
        for t in std::iter::once(self.threshold).chain(self.source_thresholds.values().copied()) {
            if !(t > 0.0 && t <= 1.0) {
                return Err(format!("threshold {t} outside (0, 1]"));
            }
        }
        Ok(())
    }
}

/// One backend's verdict on one spelling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LookupOutcome {
    pub source: KbSource,
    pub spelling: String,
    pub threshold: f64,
    pub accepted: Vec<KbMatch>,
    pub rejected: Vec<KbMatch>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpellingResult {
    pub spelling: String,
    pub matches: Vec<KbMatch>,
    pub rejected: Vec<KbMatch>,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<KbError>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconciledName {
    pub candidate: CandidateName,
    pub spelling: String,
    /// Accepted hits, all at or above the threshold.
    pub matches: Vec<KbMatch>,
    /// Hits returned by a backend but scored below the threshold.
    pub rejected: Vec<KbMatch>,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<KbError>,
}

fn sort_matches(v: &mut Vec<KbMatch>) {
    v.sort_by(|a, b| {
        a.source.cmp(&b.source).then(b.score.total_cmp(&a.score)).then_with(|| a.entity_id.cmp(&b.entity_id))
    });
    v.dedup_by(|b, a| a.source == b.source && a.entity_id == b.entity_id);
}

fn lookup_forms(spelling: &str, inverted: Option<&str>, opts: &ReconcileOptions) -> Vec<String> {
    let mut forms = vec![spelling.to_string()];
    if opts.query_inverted {
        if let Some(inv) = inverted.map(normalized_key).filter(|i| i != spelling) {
            forms.push(inv);
        }
    }
    forms
}

/// Spacing between calls to one backend.
#[derive(Debug)]
pub struct Throttle {
    interval: Duration,
    last: Option<Instant>,
}

impl Throttle {
    pub fn new(limit: Option<RateLimit>) -> Self {
        Self { interval: limit.map_or(Duration::ZERO, |l| l.min_interval()), last: None }
    }

    pub fn wait(&mut self) {
        if let Some(last) = self.last {
            let due = last + self.interval;
            let now = Instant::now();
            if due > now {
                std::thread::sleep(due - now);
            }
        }
        self.last = Some(Instant::now());
    }
}

fn query_client(
    client: &dyn KbClient,
    throttle: &mut Throttle,
    spelling: &str,
    forms: &[String],
    threshold: f64,
    calls: &mut usize,
) -> Result<LookupOutcome, KbError> {
    let mut hits = Vec::new();
    for form in forms {
        throttle.wait();
        *calls += 1;
        let mut got = client.search(form)?;
        for h in &got {
            if !(0.0..=1.0).contains(&h.score) || h.entity_id.is_empty() {
                return Err(KbError::KbMalformedResponse(format!(
                    "{} returned score {} for `{}`",
                    client.source(),
                    h.score,
                    h.entity_id
                )));
            }
        }
        got.truncate(client.page_size());
        hits.extend(got);
    }
    let (mut accepted, mut rejected): (Vec<_>, Vec<_>) = hits.into_iter().partition(|m| m.score >= threshold);
    sort_matches(&mut accepted);
    sort_matches(&mut rejected);
    rejected.retain(|r| !accepted.iter().any(|a| a.source == r.source && a.entity_id == r.entity_id));
    Ok(LookupOutcome { source: client.source(), spelling: spelling.to_string(), threshold, accepted, rejected })
}

fn combine(spelling: &str, outcomes: Vec<Result<LookupOutcome, KbError>>) -> SpellingResult {
    let mut matches = Vec::new();
    let mut rejected = Vec::new();
    let mut errors = Vec::new();
    for o in outcomes {
        match o {
            Ok(o) => {
                matches.extend(o.accepted);
                rejected.extend(o.rejected);
            }
            Err(e) => errors.push(e),
        }
    }
    sort_matches(&mut matches);
    sort_matches(&mut rejected);
    let sources: BTreeSet<KbSource> = matches.iter().map(|m| m.source).collect();
    let provenance = if errors.is_empty() { Provenance::from_sources(&sources) } else { Provenance::Unresolved };
    SpellingResult { spelling: spelling.to_string(), matches, rejected, provenance, errors }
}

fn candidate_forms(c: &CandidateName) -> (String, String) {
    let tokens = normalize_text(&c.query_text);
    let spelling = normalized_key(&c.surface);
    let whole = c.spans.span();
    let inverted = if tokens.len() >= whole.end && tokens[whole.start..whole.end].join(" ") == spelling {
        c.inverted(&tokens)
    } else {
        spelling.clone()
    };
    (spelling, inverted)
}

/// Reconciles one candidate against every client, without caching.
pub fn reconcile(candidate: &CandidateName, clients: &[&dyn KbClient], opts: &ReconcileOptions) -> ReconciledName {
    let (spelling, inverted) = candidate_forms(candidate);
    let forms = lookup_forms(&spelling, Some(&inverted), opts);
    let mut calls = 0;
    let outcomes = clients
        .iter()
        .map(|c| {
            let mut throttle = Throttle::new(c.rate_limit());
            query_client(*c, &mut throttle, &spelling, &forms, opts.threshold_for(c.source()), &mut calls)
        })
        .collect();
    let r = combine(&spelling, outcomes);
    ReconciledName {
        candidate: candidate.clone(),
        spelling,
        matches: r.matches,
        rejected: r.rejected,
        provenance: r.provenance,
        errors: r.errors,
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CacheError {
    #[error("cache io: {0}")]
    Io(#[from] std::io::Error),
    #[error("cache line {line}: {source}")]
    Parse { line: usize, source: serde_json::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct CacheKey<'a> {
    source: KbSource,
    spelling: &'a str,
    threshold_bits: u64,
}

/// Lookup outcomes keyed by (source, spelling, threshold). Optionally backed
/// by an append-only newline-delimited JSON file so long runs can resume.
#[derive(Debug, Default)]
pub struct ReconcileCache {
    entries: HashMap<(KbSource, String, u64), LookupOutcome>,
    path: Option<PathBuf>,
    writer: Option<BufWriter<File>>,
}

impl ReconcileCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Loads existing records from `path` (if present) and appends new ones.
    pub fn open(path: &Path) -> Result<Self, CacheError> {
        let mut cache = Self { path: Some(path.to_path_buf()), ..Default::default() };
        if path.exists() {
            for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let rec: LookupOutcome =
                    serde_json::from_str(&line).map_err(|source| CacheError::Parse { line: i + 1, source })?;
                cache.entries.insert((rec.source, rec.spelling.clone(), rec.threshold.to_bits()), rec);
            }
        }
        Ok(cache)
    }

    fn get(&self, key: CacheKey<'_>) -> Option<&LookupOutcome> {
        self.entries.get(&(key.source, key.spelling.to_string(), key.threshold_bits))
    }

    fn put(&mut self, outcome: LookupOutcome) -> Result<(), CacheError> {
        if let Some(path) = &self.path {
            if self.writer.is_none() {
                let f = OpenOptions::new().create(true).append(true).open(path)?;
                self.writer = Some(BufWriter::new(f));
            }
            let w = self.writer.as_mut().expect("writer opened above");
            serde_json::to_writer(&mut *w, &outcome).map_err(|source| CacheError::Parse { line: 0, source })?;
            w.write_all(b"\n")?;
            w.flush()?;
        }
        self.entries.insert((outcome.source, outcome.spelling.clone(), outcome.threshold.to_bits()), outcome);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub candidates: usize,
    pub distinct_spellings: usize,
    /// Distinct spellings per provenance class; every class is listed.
    pub provenance: BTreeMap<Provenance, usize>,
    pub matched_any_kb: usize,
    /// `matched_any_kb` over spellings that were not UNRESOLVED.
    pub matched_fraction: f64,
    pub remote_calls: usize,
    pub cache_hits: usize,
    pub errors: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BatchResult {
    pub results: Vec<ReconciledName>,
    /// One entry per distinct spelling, sorted by spelling.
    pub spellings: Vec<SpellingResult>,
    pub summary: BatchSummary,
}

/// Reconciles many candidates, querying each distinct spelling once per
/// client and fanning the result back out to every occurrence.
pub fn batch_reconcile(
    candidates: &[CandidateName],
    clients: &[&dyn KbClient],
    opts: &ReconcileOptions,
    mut cache: Option<&mut ReconcileCache>,
) -> Result<BatchResult, CacheError> {
    let mut by_spelling: BTreeMap<String, String> = BTreeMap::new();
    for c in candidates {
        let (spelling, inverted) = candidate_forms(c);
        by_spelling.entry(spelling).or_insert(inverted);
    }

    let mut throttles: Vec<Throttle> = clients.iter().map(|c| Throttle::new(c.rate_limit())).collect();
    let mut summary = BatchSummary { candidates: candidates.len(), ..Default::default() };
    let mut spellings: BTreeMap<String, SpellingResult> = BTreeMap::new();

    for (spelling, inverted) in &by_spelling {
        let forms = lookup_forms(spelling, Some(inverted), opts);
        let mut outcomes = Vec::with_capacity(clients.len());
        for (client, throttle) in clients.iter().zip(throttles.iter_mut()) {
            let threshold = opts.threshold_for(client.source());
            let key = CacheKey { source: client.source(), spelling, threshold_bits: threshold.to_bits() };
            if let Some(hit) = cache.as_ref().and_then(|c| c.get(key)) {
                summary.cache_hits += 1;
                outcomes.push(Ok(hit.clone()));
                continue;
            }
            let outcome = query_client(*client, throttle, spelling, &forms, threshold, &mut summary.remote_calls);
            match &outcome {
                Ok(o) => {
                    if let Some(c) = cache.as_mut() {
                        c.put(o.clone())?;
                    }
                }
                Err(e) => log::warn!("{} lookup of `{spelling}` failed: {e}", client.source()),
            }
            outcomes.push(outcome);
        }
        let r = combine(spelling, outcomes);
        summary.errors += r.errors.len();
        spellings.insert(spelling.clone(), r);
    }

    for p in Provenance::ALL {
        summary.provenance.insert(p, 0);
    }
    for r in spellings.values() {
        *summary.provenance.entry(r.provenance).or_default() += 1;
    }
    summary.distinct_spellings = spellings.len();
    summary.matched_any_kb = spellings.values().filter(|r| r.provenance.is_match()).count();
    let resolved = summary.distinct_spellings - summary.provenance[&Provenance::Unresolved];
    summary.matched_fraction = if resolved == 0 { 0.0 } else { summary.matched_any_kb as f64 / resolved as f64 };

    let results = candidates
        .iter()
        .map(|c| {
            let (spelling, _) = candidate_forms(c);
            let r = &spellings[&spelling];
            ReconciledName {
                candidate: c.clone(),
                spelling,
                matches: r.matches.clone(),
                rejected: r.rejected.clone(),
                provenance: r.provenance,
                errors: r.errors.clone(),
            }
        })
        .collect();

    Ok(BatchResult { results, spellings: spellings.into_values().collect(), summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gazetteer::Span;
    use crate::person::{NameOrder, NameSpans};
    use std::cell::{Cell, RefCell};

    fn candidate(text: &str) -> CandidateName {
        let n = normalize_text(text).len();
        CandidateName {
            query: 0,
            query_text: text.into(),
            spans: NameSpans {
                given: Span::new(0, 1),
                particle: None,
                surname: Span::new(1, n),
                order: NameOrder::GivenFirst,
            },
            surface: normalized_key(text),
        }
    }

    const FIXTURE: &str = r#"{
        "curer bell": [{"entity_id": "Q127332", "label": "Currer Bell", "score": 0.92, "source": "WIKIDATA"}],
        "victor guillemin": [{"entity_id": "9847974", "label": "Hugo, Victor, 1802-1885", "score": 0.55, "source": "VIAF"}],
        "guillaume archiduc": [
            {"entity_id": "62349720", "label": "Habsburg-Lothringen, Wilhelm, 1895-1949", "score": 0.93, "source": "VIAF"},
            {"entity_id": "27868318", "label": "Leopold Wilhelm, Archduke of Austria, 1614-1662", "score": 0.91, "source": "VIAF"}
        ],
        "Pole Nord": []
    }"#;

    fn clients() -> (FixtureClient, FixtureClient) {
        (
            FixtureClient::from_reader(KbSource::Wikidata, FIXTURE.as_bytes()).unwrap(),
            FixtureClient::from_reader(KbSource::Viaf, FIXTURE.as_bytes()).unwrap(),
        )
    }

    struct Counting<'a> {
        inner: &'a dyn KbClient,
        calls: Cell<usize>,
    }

    impl KbClient for Counting<'_> {
        fn source(&self) -> KbSource {
            self.inner.source()
        }
        fn search(&self, name: &str) -> Result<Vec<KbMatch>, KbError> {
            self.calls.set(self.calls.get() + 1);
            self.inner.search(name)
        }
    }

    struct Down(KbSource);

    impl KbClient for Down {
        fn source(&self) -> KbSource {
            self.0
        }
        fn search(&self, _: &str) -> Result<Vec<KbMatch>, KbError> {
            Err(KbError::KbUnavailable("connection refused".into()))
        }
    }

    #[test]
    fn pseudonym_accepted_on_wikidata() {
        let (wd, viaf) = clients();
        let r = reconcile(&candidate("curer bell"), &[&wd, &viaf], &ReconcileOptions::default());
        assert_eq!(r.provenance, Provenance::WikidataOnly);
        assert_eq!(r.matches[0].entity_id, "Q127332");
    }

    #[test]
    fn related_name_hit_rejected() {
        let (wd, viaf) = clients();
        let r = reconcile(&candidate("victor guillemin"), &[&wd, &viaf], &ReconcileOptions::default());
        assert_eq!(r.provenance, Provenance::None);
        assert!(r.matches.is_empty());
        assert_eq!(r.rejected[0].label, "Hugo, Victor, 1802-1885");
    }

    #[test]
    fn two_archdukes_on_viaf() {
        let (wd, viaf) = clients();
        let r = reconcile(&candidate("guillaume archiduc"), &[&wd, &viaf], &ReconcileOptions::default());
        assert_eq!(r.provenance, Provenance::ViafOnly);
        assert_eq!(r.matches.len(), 2);
    }

    #[test]
    fn extraction_error_finds_nothing() {
        let (wd, viaf) = clients();
        let r = reconcile(&candidate("pole nord"), &[&wd, &viaf], &ReconcileOptions::default());
        assert_eq!(r.provenance, Provenance::None);
        assert!(r.matches.is_empty() && r.rejected.is_empty());
    }

    #[test]
    fn outage_is_unresolved_not_none() {
        let (wd, _) = clients();
        let down = Down(KbSource::Viaf);
        let r = reconcile(&candidate("curer bell"), &[&wd, &down], &ReconcileOptions::default());
        assert_eq!(r.provenance, Provenance::Unresolved);
        assert!(matches!(r.errors[0], KbError::KbUnavailable(_)));
    }

    #[test]
    fn malformed_fixture_rejected() {
        let bad = r#"{"x": [{"entity_id": "Q1", "label": "x", "score": 1.5, "source": "WIKIDATA"}]}"#;
        assert!(matches!(
            FixtureClient::from_reader(KbSource::Wikidata, bad.as_bytes()),
            Err(KbError::KbMalformedResponse(_))
        ));
        assert!(FixtureClient::from_reader(KbSource::Wikidata, "[1,2]".as_bytes()).is_err());
    }

    #[test]
    fn dedup_one_call_per_client() {
        let (wd, viaf) = clients();
        let cw = Counting { inner: &wd, calls: Cell::new(0) };
        let cv = Counting { inner: &viaf, calls: Cell::new(0) };
        let cands = vec![candidate("curer bell"), candidate("Curer Bell"), candidate("curer  bell")];
        let out = batch_reconcile(&cands, &[&cw, &cv], &ReconcileOptions::default(), None).unwrap();
        assert_eq!(cw.calls.get(), 1);
        assert_eq!(cv.calls.get(), 1);
        assert_eq!(out.results.len(), 3);
        assert!(out.results.iter().all(|r| r.provenance == Provenance::WikidataOnly));
        assert_eq!(out.summary.distinct_spellings, 1);
    }

    #[test]
    fn empty_batch() {
        let (wd, viaf) = clients();
        let out = batch_reconcile(&[], &[&wd, &viaf], &ReconcileOptions::default(), None).unwrap();
        assert!(out.results.is_empty());
        assert_eq!(out.summary.remote_calls, 0);
        assert_eq!(out.summary.distinct_spellings, 0);
    }

    #[test]
    fn inverted_lookup_is_opt_in() {
        let (wd, _) = clients();
        let cw = Counting { inner: &wd, calls: Cell::new(0) };
        let opts = ReconcileOptions { query_inverted: true, ..Default::default() };
        // "bell curer" is only found through its inverted form
        let out = batch_reconcile(&[candidate("bell curer")], &[&cw], &opts, None).unwrap();
        assert_eq!(cw.calls.get(), 2);
        assert_eq!(out.results[0].provenance, Provenance::WikidataOnly);
    }

    #[test]
    fn cache_survives_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.ndjson");
        let (wd, viaf) = clients();
        let cands = vec![candidate("curer bell"), candidate("guillaume archiduc")];
        let first = {
            let mut cache = ReconcileCache::open(&path).unwrap();
            batch_reconcile(&cands, &[&wd, &viaf], &ReconcileOptions::default(), Some(&mut cache)).unwrap()
        };
        assert_eq!(first.summary.remote_calls, 4);
        let mut cache = ReconcileCache::open(&path).unwrap();
        assert_eq!(cache.len(), 4);
        let cw = Counting { inner: &wd, calls: Cell::new(0) };
        let second = batch_reconcile(&cands, &[&cw, &viaf], &ReconcileOptions::default(), Some(&mut cache)).unwrap();
        assert_eq!(cw.calls.get(), 0);
        assert_eq!(second.summary.cache_hits, 4);
        assert_eq!(first.spellings, second.spellings);
        // a different threshold is a different key
        let strict = ReconcileOptions { threshold: 0.95, ..Default::default() };
        let third = batch_reconcile(&cands, &[&cw, &viaf], &strict, Some(&mut cache)).unwrap();
        assert_eq!(cw.calls.get(), 2);
        assert_eq!(third.summary.provenance[&Provenance::None], 2);
    }

    #[test]
    fn failures_are_not_cached() {
        let mut cache = ReconcileCache::in_memory();
        let down = Down(KbSource::Wikidata);
        let out = batch_reconcile(&[candidate("curer bell")], &[&down], &ReconcileOptions::default(), Some(&mut cache))
            .unwrap();
        assert_eq!(out.summary.provenance[&Provenance::Unresolved], 1);
        assert_eq!(out.summary.matched_fraction, 0.0);
        assert!(cache.is_empty());
    }

    #[test]
    fn throttle_spaces_calls() {
        struct Slow(RefCell<Vec<Instant>>);
        impl KbClient for Slow {
            fn source(&self) -> KbSource {
                KbSource::Wikidata
            }
            fn search(&self, _: &str) -> Result<Vec<KbMatch>, KbError> {
                self.0.borrow_mut().push(Instant::now());
                Ok(vec![])
            }
            fn rate_limit(&self) -> Option<RateLimit> {
                Some(RateLimit { max_per_second: 50.0 })
            }
        }
        let slow = Slow(RefCell::new(vec![]));
        let cands: Vec<_> = ["a b", "c d", "e f", "g h"].iter().map(|s| candidate(s)).collect();
        batch_reconcile(&cands, &[&slow], &ReconcileOptions::default(), None).unwrap();
        let t = slow.0.borrow();
        for w in t.windows(2) {
            assert!(w[1] - w[0] >= Duration::from_millis(19));
        }
    }

    struct Canned(&'static str);

    impl HttpGet for Canned {
        fn get(&self, _: &str, _: &[(&str, &str)]) -> Result<String, KbError> {
            Ok(self.0.to_string())
        }
    }

    fn endpoint() -> EndpointConfig {
        EndpointConfig {
            url: "https://kb.invalid/api".into(),
            language: "fr".into(),
            page_size: 5,
            max_per_second: None,
        }
    }

    #[test]
    fn wikidata_protocol_scores_on_alias() {
        let body = r#"{"searchinfo":{"search":"curer bell"},"search":[
            {"id":"Q127332","label":"Charlotte Brontë","aliases":["Currer Bell"],
             "match":{"type":"alias","language":"en","text":"Currer Bell"}},
            {"id":"Q1","label":"Bell"}],"success":1}"#;
        let client = WikidataClient { config: endpoint(), http: Canned(body) };
        let hits = client.search("curer bell").unwrap();
        assert_eq!(hits[0].entity_id, "Q127332");
        assert!(hits[0].score > 0.9);
        assert_eq!(hits[1].score, 1.0);
        let r = reconcile(&candidate("curer bell"), &[&client], &ReconcileOptions::default());
        assert_eq!(r.provenance, Provenance::WikidataOnly);
    }

    #[test]
    fn viaf_protocol_scores_by_similarity() {
        let body = r#"{"query":"victor guillemin","result":[
            {"term":"Hugo, Victor, 1802-1885","displayForm":"Hugo, Victor, 1802-1885","nametype":"personal","viafid":"9847974"},
            {"term":"Guillemin, Victor","nametype":"personal","viafid":123},
            {"term":"Victor Guillemin (Firm)","nametype":"corporate","viafid":"5"}]}"#;
        let client = ViafClient { config: endpoint(), http: Canned(body) };
        let hits = client.search("victor guillemin").unwrap();
        assert_eq!(hits.len(), 2);
        assert!(hits[0].score < 0.9);
        assert_eq!(hits[1].entity_id, "123");
        assert_eq!(hits[1].score, 1.0);
    }

    #[test]
    fn viaf_null_result_is_empty() {
        let client = ViafClient { config: endpoint(), http: Canned(r#"{"query":"x","result":null}"#) };
        assert!(client.search("x").unwrap().is_empty());
    }

    #[test]
    fn malformed_protocol_bodies() {
        let client = WikidataClient { config: endpoint(), http: Canned("<html>") };
        assert!(matches!(client.search("x"), Err(KbError::KbMalformedResponse(_))));
        let client = WikidataClient { config: endpoint(), http: Canned(r#"{"error":{"code":"x"}}"#) };
        assert!(matches!(client.search("x"), Err(KbError::KbMalformedResponse(_))));
        let r = reconcile(&candidate("a b"), &[&client], &ReconcileOptions::default());
        assert_eq!(r.provenance, Provenance::Unresolved);
    }

    #[test]
    fn url_building() {
        assert_eq!(build_url("https://x/y", &[("q", "a b"), ("l", "fr")]), "https://x/y?q=a+b&l=fr");
        assert_eq!(build_url("https://x/y?k=1", &[("q", "é")]), "https://x/y?k=1&q=%C3%A9");
    }

    #[test]
    fn per_source_thresholds() {
        let (wd, viaf) = clients();
        let opts =
            ReconcileOptions { source_thresholds: BTreeMap::from([(KbSource::Viaf, 0.5)]), ..Default::default() };
        let r = reconcile(&candidate("victor guillemin"), &[&wd, &viaf], &opts);
        assert_eq!(r.provenance, Provenance::ViafOnly);
        assert!(opts.validate().is_ok());
        assert!(ReconcileOptions { threshold: 0.0, ..Default::default() }.validate().is_err());
    }
}
