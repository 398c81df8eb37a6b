//! Gold-standard corpus, inter-annotator agreement and extraction scoring.
//!
//! The gold file is delimited text with a header row and the columns
//! `query, entity_surface, category, is_full_name, annotator_id`, optionally
//! followed by `consensus_category` and `location_ref`. Rows of one query are
//! contiguous; a query without entities appears once with empty entity
//! columns. `location_ref` ties a LOC annotation to a gazetteer id when its
//! surface (an abbreviation or misspelling) would not resolve by itself.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::gazetteer::{Gazetteer, PlaceMention, Span};
use crate::person::CandidateName;
use crate::text::{find_subsequence, is_numeric_token, normalize_text, normalized_key};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    #[serde(rename = "PER")]
    Per,
    #[serde(rename = "PER_AMBIG")]
    PerAmbig,
    #[serde(rename = "PER_LOC")]
    PerLoc,
    #[serde(rename = "LOC")]
    Loc,
    #[serde(rename = "AMBIG")]
    Ambig,
}

impl Category {
    pub const ALL: [Category; 5] = [Self::Per, Self::PerAmbig, Self::PerLoc, Self::Loc, Self::Ambig];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Per => "PER",
            Self::PerAmbig => "PER_AMBIG",
            Self::PerLoc => "PER_LOC",
            Self::Loc => "LOC",
            Self::Ambig => "AMBIG",
        }
    }

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&c| c == self).expect("listed in ALL")
    }

    /// PER and its mixed variants: the classes that can carry a full name.
    pub fn is_person_family(self) -> bool {
        matches!(self, Self::Per | Self::PerAmbig | Self::PerLoc)
    }
}

impl std::fmt::Display for Category {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Category {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String =
            s.trim().chars().map(|c| if c == ' ' || c == '-' { '_' } else { c.to_ascii_uppercase() }).collect();
        Self::ALL.into_iter().find(|c| c.as_str() == key).ok_or_else(|| s.to_string())
    }
}

/// One annotator's reading of one entity, as found in the file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldAnnotation {
    pub query: String,
    pub surface: String,
    pub category: Category,
    pub is_full_name: bool,
    pub annotator_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgement {
    pub category: Category,
    pub is_full_name: bool,
}

/// An entity span with every annotator's judgement on it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldEntity {
    pub span: Span,
    pub surface: String,
    pub annotations: BTreeMap<String, Judgement>,
    /// `None` when the annotators disagree and no consensus was recorded.
    pub consensus: Option<Category>,
    pub is_full_name: bool,
    pub location_ref: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldQuery {
    pub text: String,
    pub tokens: Vec<String>,
    /// Sorted by span.
    pub entities: Vec<GoldEntity>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum GscWarning {
    DuplicateQuery { line: usize, query: String },
    DuplicateRow { line: usize },
    NumericQuery { line: usize, query: String },
    FullNameOnNonPerson { line: usize },
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GscError {
    #[error("gold file: {0}")]
    Csv(String),
    #[error("gold file lacks column `{0}`")]
    MissingColumn(&'static str),
    #[error("line {line}: `{surface}` overlaps another annotation in `{query}`")]
    OverlappingAnnotation { line: usize, query: String, surface: String },
    #[error("line {line}: unknown category `{value}`")]
    UnknownCategory { line: usize, value: String },
    #[error("line {line}: `{surface}` does not occur in `{query}`")]
    SurfaceNotInQuery { line: usize, query: String, surface: String },
    #[error("line {line}: consensus for `{surface}` contradicts an earlier row")]
    ConflictingConsensus { line: usize, surface: String },
    #[error("line {line}: bad is_full_name value `{value}`")]
    BadFlag { line: usize, value: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldCorpus {
    pub queries: Vec<GoldQuery>,
    pub annotators: BTreeSet<String>,
    pub warnings: Vec<GscWarning>,
}

struct Columns {
    query: usize,
    surface: usize,
    category: usize,
    full_name: usize,
    annotator: usize,
    consensus: Option<usize>,
    location_ref: Option<usize>,
}

impl Columns {
    fn resolve(header: &csv::StringRecord) -> Result<Self, GscError> {
        let find = |name: &str| header.iter().position(|h| h.trim().eq_ignore_ascii_case(name));
        let need = |name: &'static str| find(name).ok_or(GscError::MissingColumn(name));
        Ok(Self {
            query: need("query")?,
            surface: need("entity_surface")?,
            category: need("category")?,
            full_name: need("is_full_name")?,
            annotator: need("annotator_id")?,
            consensus: find("consensus_category"),
            location_ref: find("location_ref"),
        })
    }
}

fn parse_flag(raw: &str, line: usize) -> Result<bool, GscError> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "" | "0" | "false" | "no" | "n" => Ok(false),
        "1" | "true" | "yes" | "y" => Ok(true),
        _ => Err(GscError::BadFlag { line, value: raw.into() }),
    }
}

#[derive(Default)]
struct Group {
    query: Option<GoldQuery>,
    skip: bool,
    rows: HashSet<Vec<String>>,
    assigned: BTreeMap<String, Vec<Span>>,
    explicit: BTreeSet<Span>,
}

/// Reads a gold file. Repeated queries, repeated rows and digit-only queries
/// are dropped with a warning; overlapping spans, unknown categories and
/// surfaces missing from their query are errors.
pub fn load_gsc<R: Read>(reader: R, delimiter: u8) -> Result<GoldCorpus, GscError> {
    let mut rdr = csv::ReaderBuilder::new().delimiter(delimiter).flexible(true).has_headers(true).from_reader(reader);
    let header = rdr.headers().map_err(|e| GscError::Csv(e.to_string()))?.clone();
    let mut corpus = GoldCorpus::default();
    if header.iter().all(|h| h.trim().is_empty()) {
        return Ok(corpus);
    }
    let cols = Columns::resolve(&header)?;

    let mut seen_queries: HashSet<String> = HashSet::new();
    let mut current_key: Option<String> = None;
    let mut group = Group::default();

    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| GscError::Csv(format!("line {line}: {e}")))?;
        let get = |i: usize| rec.get(i).unwrap_or("").trim();
        let query_text = get(cols.query);
        if query_text.is_empty() && rec.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let key = normalized_key(query_text);

        if current_key.as_deref() != Some(key.as_str()) {
            flush(&mut corpus, &mut group);
            current_key = Some(key.clone());
            let tokens = normalize_text(query_text);
            if !seen_queries.insert(key) {
                corpus.warnings.push(GscWarning::DuplicateQuery { line, query: query_text.into() });
                group.skip = true;
            } else if tokens.is_empty() || tokens.iter().all(|t| is_numeric_token(t)) {
                corpus.warnings.push(GscWarning::NumericQuery { line, query: query_text.into() });
                group.skip = true;
            } else {
                group.query = Some(GoldQuery { text: query_text.into(), tokens, entities: Vec::new() });
            }
        }
        if group.skip {
            continue;
        }

        let surface = get(cols.surface);
        if surface.is_empty() {
            continue;
        }
        let fields: Vec<String> = rec.iter().map(|f| f.trim().to_string()).collect();
        if !group.rows.insert(fields) {
            corpus.warnings.push(GscWarning::DuplicateRow { line });
            continue;
        }
        let category: Category =
            get(cols.category).parse().map_err(|value| GscError::UnknownCategory { line, value })?;
        let mut is_full_name = parse_flag(get(cols.full_name), line)?;
        if is_full_name && !category.is_person_family() {
            corpus.warnings.push(GscWarning::FullNameOnNonPerson { line });
            is_full_name = false;
        }
        let annotator = get(cols.annotator).to_string();
        let consensus = match cols.consensus.map(get).filter(|s| !s.is_empty()) {
            None => None,
            Some(v) => Some(v.parse().map_err(|value| GscError::UnknownCategory { line, value })?),
        };
        let location_ref = cols.location_ref.map(get).filter(|s| !s.is_empty()).map(str::to_string);

        let q = group.query.as_mut().expect("group has a query");
        let needle = normalize_text(surface);
        let starts = if needle.is_empty() { Vec::new() } else { find_subsequence(&q.tokens, &needle) };
        if starts.is_empty() {
            return Err(GscError::SurfaceNotInQuery { line, query: q.text.clone(), surface: surface.into() });
        }
        let taken = group.assigned.entry(annotator.clone()).or_default();
        let span = starts
            .iter()
            .map(|&s| Span::new(s, s + needle.len()))
            .find(|sp| taken.iter().all(|t| !t.overlaps(sp)))
            .ok_or_else(|| GscError::OverlappingAnnotation { line, query: q.text.clone(), surface: surface.into() })?;
        taken.push(span);

        // different annotators may choose overlapping but unequal spans;
        // those are distinct entities
        let entity = match q.entities.iter_mut().find(|e| e.span == span) {
            Some(e) => e,
            None => {
                q.entities.push(GoldEntity {
                    span,
                    surface: needle.join(" "),
                    annotations: BTreeMap::new(),
                    consensus: None,
                    is_full_name: false,
                    location_ref: None,
                });
                q.entities.last_mut().expect("just pushed")
            }
        };
        if let Some(c) = consensus {
            if group.explicit.contains(&span) && entity.consensus != Some(c) {
                return Err(GscError::ConflictingConsensus { line, surface: surface.into() });
            }
            entity.consensus = Some(c);
            group.explicit.insert(span);
        }
        if entity.location_ref.is_none() {
            entity.location_ref = location_ref;
        }
        entity.annotations.insert(annotator.clone(), Judgement { category, is_full_name });
        corpus.annotators.insert(annotator);
    }
    flush(&mut corpus, &mut group);

    let has_consensus_column = cols.consensus.is_some();
    let annotators = corpus.annotators.clone();
    for q in &mut corpus.queries {
        for e in &mut q.entities {
            if !has_consensus_column {
                let cats: BTreeSet<Category> = e.annotations.values().map(|j| j.category).collect();
                let everyone = annotators.iter().all(|a| e.annotations.contains_key(a));
                if cats.len() == 1 && everyone {
                    e.consensus = cats.into_iter().next();
                }
            }
            e.is_full_name =
                e.annotations.values().filter(|j| e.consensus.is_none_or(|c| c == j.category)).any(|j| j.is_full_name)
                    && e.consensus.is_none_or(Category::is_person_family);
        }
    }
    Ok(corpus)
}

fn flush(corpus: &mut GoldCorpus, group: &mut Group) {
    if let Some(mut q) = std::mem::take(group).query {
        q.entities.sort_by_key(|e| e.span);
        corpus.queries.push(q);
    }
}

/// Entities seen by one annotator and not the other, matched by span.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CoAnnotation {
    pub first: String,
    pub second: String,
    pub pairs: Vec<(Category, Category)>,
    pub only_first: usize,
    pub only_second: usize,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum AgreementError {
    #[error("kappa is undefined: both annotators used one identical category (observed agreement {p_o})")]
    DegenerateTable { p_o: f64 },
    #[error("no co-annotated entities")]
    Empty,
    #[error("agreement needs exactly two annotators, found {0}")]
    AnnotatorCount(usize),
    #[error("contingency table is not square")]
    NotSquare,
}

impl GoldCorpus {
    pub fn entity_count(&self) -> usize {
        self.queries.iter().map(|q| q.entities.len()).sum()
    }

    /// Entities per consensus category; every category is listed.
    pub fn consensus_counts(&self) -> BTreeMap<Category, usize> {
        let mut out: BTreeMap<Category, usize> = Category::ALL.iter().map(|&c| (c, 0)).collect();
        for e in self.queries.iter().flat_map(|q| &q.entities) {
            if let Some(c) = e.consensus {
                *out.get_mut(&c).expect("all categories present") += 1;
            }
        }
        out
    }

    /// Entities left without consensus, for manual resolution.
    pub fn disputed(&self) -> Vec<(&GoldQuery, &GoldEntity)> {
        self.queries
            .iter()
            .flat_map(|q| q.entities.iter().filter(|e| e.consensus.is_none()).map(move |e| (q, e)))
            .collect()
    }

    /// Flat list of per-annotator rows.
    pub fn annotations(&self) -> Vec<GoldAnnotation> {
        self.queries
            .iter()
            .flat_map(|q| {
                q.entities.iter().flat_map(move |e| {
                    e.annotations.iter().map(move |(a, j)| GoldAnnotation {
                        query: q.text.clone(),
                        surface: e.surface.clone(),
                        category: j.category,
                        is_full_name: j.is_full_name,
                        annotator_id: a.clone(),
                    })
                })
            })
            .collect()
    }

    /// Category pairs over entities both annotators identified.
    pub fn co_annotation(&self) -> Result<CoAnnotation, AgreementError> {
        let mut ids = self.annotators.iter();
        let (Some(first), Some(second), None) = (ids.next(), ids.next(), ids.next()) else {
            return Err(AgreementError::AnnotatorCount(self.annotators.len()));
        };
        let mut out = CoAnnotation { first: first.clone(), second: second.clone(), ..Default::default() };
        for e in self.queries.iter().flat_map(|q| &q.entities) {
            match (e.annotations.get(first), e.annotations.get(second)) {
                (Some(a), Some(b)) => out.pairs.push((a.category, b.category)),
                (Some(_), None) => out.only_first += 1,
                (None, Some(_)) => out.only_second += 1,
                (None, None) => {}
            }
        }
        Ok(out)
    }

    pub fn agreement(&self) -> Result<AgreementReport, AgreementError> {
        let co = self.co_annotation()?;
        let mut report = cohen_kappa(&co.pairs)?;
        report.only_first = co.only_first;
        report.only_second = co.only_second;
        Ok(report)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub categories: Vec<Category>,
    /// Rows: first annotator; columns: second annotator.
    pub table: Vec<Vec<usize>>,
    pub total: usize,
    pub agreed: usize,
    pub p_o: f64,
    pub p_e: f64,
    pub kappa: f64,
    pub only_first: usize,
    pub only_second: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kappa {
    pub p_o: f64,
    pub p_e: f64,
    pub kappa: f64,
}

/// Cohen's kappa of a square contingency table.
pub fn kappa_from_table(table: &[Vec<usize>]) -> Result<Kappa, AgreementError> {
    let k = table.len();
    if table.iter().any(|r| r.len() != k) {
        return Err(AgreementError::NotSquare);
    }
    let n: usize = table.iter().flatten().sum();
    if n == 0 {
        return Err(AgreementError::Empty);
    }
    let n = n as f64;
    let diag: usize = (0..k).map(|i| table[i][i]).sum();
    let p_o = diag as f64 / n;
    let p_e: f64 = (0..k)
        .map(|i| {
            let row: usize = table[i].iter().sum();
            let col: usize = table.iter().map(|r| r[i]).sum();
            row as f64 * col as f64
        })
        .sum::<f64>()
        / (n * n);
    if (1.0 - p_e).abs() < 1e-12 {
        return Err(AgreementError::DegenerateTable { p_o });
    }
    Ok(Kappa { p_o, p_e, kappa: (p_o - p_e) / (1.0 - p_e) })
}

pub fn cohen_kappa(pairs: &[(Category, Category)]) -> Result<AgreementReport, AgreementError> {
    let k = Category::ALL.len();
    let mut table = vec![vec![0usize; k]; k];
    for &(a, b) in pairs {
        table[a.index()][b.index()] += 1;
    }
    let Kappa { p_o, p_e, kappa } = kappa_from_table(&table)?;
    Ok(AgreementReport {
        categories: Category::ALL.to_vec(),
        agreed: (0..k).map(|i| table[i][i]).sum(),
        total: pairs.len(),
        table,
        p_o,
        p_e,
        kappa,
        only_first: 0,
        only_second: 0,
    })
}

/// An extracted or gold entity: a token span in a numbered query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Mention {
    pub query: usize,
    pub span: Span,
}

impl From<&PlaceMention> for Mention {
    fn from(m: &PlaceMention) -> Self {
        Self { query: m.query, span: m.span }
    }
}

impl From<&CandidateName> for Mention {
    fn from(c: &CandidateName) -> Self {
        Self { query: c.query, span: c.spans.span() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MatchMode {
    Strict,
    Partial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub correct: usize,
    pub false_positive: usize,
    pub missed: usize,
    pub incomplete: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// False when nothing was extracted; `precision` is then reported as 0.
    pub precision_defined: bool,
    /// False when the gold set is empty; `recall` is then reported as 0.
    pub recall_defined: bool,
}

impl EvalReport {
    /// Incomplete matches weigh on precision and are also counted in
    /// `missed`, so `correct + missed` is always the gold total.
    pub fn from_counts(correct: usize, false_positive: usize, missed: usize, incomplete: usize) -> Self {
        let extracted = correct + false_positive + incomplete;
        let gold = correct + missed;
        let precision = if extracted > 0 { correct as f64 / extracted as f64 } else { 0.0 };
        let recall = if gold > 0 { correct as f64 / gold as f64 } else { 0.0 };
        let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        Self {
            correct,
            false_positive,
            missed,
            incomplete,
            precision,
            recall,
            f1,
            precision_defined: extracted > 0,
            recall_defined: gold > 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreDetail {
    pub report: EvalReport,
    pub false_positives: Vec<Mention>,
    pub missed: Vec<Mention>,
    /// (prediction, gold) pairs that overlap without being equal.
    pub incomplete: Vec<(Mention, Mention)>,
}

/// Scores predictions against gold. STRICT counts only identical spans;
/// PARTIAL further pairs each leftover prediction with an overlapping
/// leftover gold entity and calls it incomplete.
pub fn score_extraction(predictions: &[Mention], gold: &[Mention], mode: MatchMode) -> EvalReport {
    score_extraction_detailed(predictions, gold, mode).report
}

pub fn score_extraction_detailed(predictions: &[Mention], gold: &[Mention], mode: MatchMode) -> ScoreDetail {
    let preds: BTreeSet<Mention> = predictions.iter().copied().collect();
    let gold: BTreeSet<Mention> = gold.iter().copied().collect();
    let correct = preds.intersection(&gold).count();
    let mut left_gold: Vec<Mention> = gold.difference(&preds).copied().collect();
    let mut false_positives = Vec::new();
    let mut incomplete = Vec::new();
    for p in preds.difference(&gold) {
        let hit = match mode {
            MatchMode::Strict => None,
            MatchMode::Partial => left_gold.iter().position(|g| g.query == p.query && g.span.overlaps(&p.span)),
        };
        match hit {
            Some(i) => incomplete.push((*p, left_gold.remove(i))),
            None => false_positives.push(*p),
        }
    }
    let mut missed: Vec<Mention> = left_gold;
    missed.extend(incomplete.iter().map(|(_, g)| *g));
    missed.sort();
    ScoreDetail {
        report: EvalReport::from_counts(correct, false_positives.len(), missed.len(), incomplete.len()),
        false_positives,
        missed,
        incomplete,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GscSubsets {
    /// Consensus LOC entities resolving to a gazetteer location.
    pub belgian_municipal_locs: Vec<Mention>,
    /// Consensus PER-family entities flagged as full names.
    pub full_name_pers: Vec<Mention>,
}

/// Splits the gold corpus into the two extraction tasks. A LOC entity is
/// kept when its `location_ref` names a loaded location or its surface is a
/// known alias; points of interest and foreign places fall out.
pub fn gsc_subsets(corpus: &GoldCorpus, gaz: &Gazetteer) -> GscSubsets {
    let mut out = GscSubsets::default();
    for (qi, q) in corpus.queries.iter().enumerate() {
        for e in &q.entities {
            let m = Mention { query: qi, span: e.span };
            match e.consensus {
                Some(Category::Loc) => {
                    let by_ref = e.location_ref.as_deref().is_some_and(|r| gaz.get(r).is_some());
                    let by_alias = gaz.index().get(&q.tokens[e.span.start..e.span.end]).is_some();
                    if by_ref || by_alias {
                        out.belgian_municipal_locs.push(m);
                    }
                }
                Some(c) if c.is_person_family() && e.is_full_name => out.full_name_pers.push(m),
                _ => {}
            }
        }
    }
    out
}
