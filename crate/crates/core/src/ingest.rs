//! Analytics-export ingestion: rows to records, URLs to queries, records to
//! visits, visits to corpus statistics.

use std::collections::{BTreeMap, HashSet};
use std::io::Read;

use chrono::{DateTime, NaiveDateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::text::{is_numeric_token, normalize_text};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum IngestError {
    #[error("row {row}: missing column `{column}`")]
    MalformedRow { row: usize, column: String },
    #[error("row {row}: unparseable timestamp `{value}`")]
    BadTimestamp { row: usize, value: String },
    #[error("url has no query string: `{0}`")]
    UnparseableUrl(String),
    #[error("row {row}: empty url")]
    EmptyUrl { row: usize },
    #[error("export header is missing column `{0}`")]
    MissingHeaderColumn(String),
    #[error("csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for IngestError {
    fn from(e: csv::Error) -> Self {
        IngestError::Csv(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogRecord {
    pub visitor_id: String,
    pub visit_id: String,
    pub timestamp: DateTime<Utc>,
    pub url: String,
    pub custom_vars: Vec<(String, String)>,
}

/// Column names in the export header for each record field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnSchema {
    pub visitor_id: String,
    pub visit_id: String,
    pub timestamp: String,
    pub url: String,
    /// Optional; a missing custom-variables column yields empty `custom_vars`.
    pub custom_vars: String,
}

impl Default for ColumnSchema {
    fn default() -> Self {
        Self {
            visitor_id: "visitor_id".into(),
            visit_id: "visit_id".into(),
            timestamp: "timestamp".into(),
            url: "url".into(),
            custom_vars: "custom_vars".into(),
        }
    }
}

/// A [`ColumnSchema`] bound to column positions of a concrete header.
#[derive(Debug, Clone)]
pub struct ResolvedSchema {
    visitor_id: usize,
    visit_id: usize,
    timestamp: usize,
    url: usize,
    custom_vars: Option<usize>,
}

impl ColumnSchema {
    pub fn resolve(&self, header: &csv::StringRecord) -> Result<ResolvedSchema, IngestError> {
        let find = |name: &str| header.iter().position(|h| h.trim() == name);
        let need = |name: &str| find(name).ok_or_else(|| IngestError::MissingHeaderColumn(name.into()));
        Ok(ResolvedSchema {
            visitor_id: need(&self.visitor_id)?,
            visit_id: need(&self.visit_id)?,
            timestamp: need(&self.timestamp)?,
            url: need(&self.url)?,
            custom_vars: find(&self.custom_vars),
        })
    }
}

/// Accepts `YYYY-MM-DD HH:MM:SS` (read as UTC) or RFC 3339.
pub fn parse_timestamp(value: &str) -> Option<DateTime<Utc>> {
    let value = value.trim();
    if let Ok(naive) = NaiveDateTime::parse_from_str(value, "%Y-%m-%d %H:%M:%S") {
        return Some(naive.and_utc());
    }
    DateTime::parse_from_rfc3339(value).ok().map(|dt| dt.with_timezone(&Utc))
}

/// Custom variables are `|`-separated; key and value split at the first `=`,
/// or the first space when no `=` is present.
pub fn parse_custom_vars(raw: &str) -> Vec<(String, String)> {
    raw.split('|')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|entry| {
            let split = entry.find('=').or_else(|| entry.find(char::is_whitespace));
            match split {
                Some(i) => (entry[..i].trim().to_string(), entry[i + 1..].trim().to_string()),
                None => (entry.to_string(), String::new()),
            }
        })
        .collect()
}

/// Builds a [`LogRecord`] from one export row. `row` is the 1-based data row
/// number used in error messages.
pub fn parse_record(fields: &csv::StringRecord, schema: &ResolvedSchema, row: usize) -> Result<LogRecord, IngestError> {
    let get =
        |idx: usize, name: &str| fields.get(idx).ok_or_else(|| IngestError::MalformedRow { row, column: name.into() });
    let visitor_id = get(schema.visitor_id, "visitor_id")?.trim().to_string();
    let visit_id = get(schema.visit_id, "visit_id")?.trim().to_string();
    let ts_raw = get(schema.timestamp, "timestamp")?;
    let url = get(schema.url, "url")?.trim().to_string();
    let timestamp =
        parse_timestamp(ts_raw).ok_or_else(|| IngestError::BadTimestamp { row, value: ts_raw.to_string() })?;
    if url.is_empty() {
        return Err(IngestError::EmptyUrl { row });
    }
    let custom_vars = schema.custom_vars.and_then(|i| fields.get(i)).map(parse_custom_vars).unwrap_or_default();
    Ok(LogRecord { visitor_id, visit_id, timestamp, url, custom_vars })
}

/// Outcome of reading a whole export.
#[derive(Debug, Default)]
pub struct ExportRead {
    pub records: Vec<LogRecord>,
    pub rows: usize,
    pub errors: Vec<IngestError>,
}

/// Reads a delimited export with a header row. Row-level failures are
/// collected rather than aborting the read.
pub fn read_export<R: Read>(reader: R, delimiter: u8, schema: &ColumnSchema) -> Result<ExportRead, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().delimiter(delimiter).flexible(true).has_headers(true).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().all(|h| h.trim().is_empty()) {
        // an empty file has no header at all
        return Ok(ExportRead::default());
    }
    let resolved = schema.resolve(&header)?;
    let mut out = ExportRead::default();
    for (i, row) in rdr.records().enumerate() {
        out.rows += 1;
        match row.map_err(IngestError::from).and_then(|r| parse_record(&r, &resolved, i + 1)) {
            Ok(rec) => out.records.push(rec),
            Err(e) => out.errors.push(e),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SourceField {
    All,
    Any,
    Exact,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryParam {
    pub name: String,
    pub field: SourceField,
}

pub fn default_query_params() -> Vec<QueryParam> {
    [
        ("all_q", SourceField::All),
        ("any_q", SourceField::Any),
        ("exact_q", SourceField::Exact),
        ("none_q", SourceField::None),
    ]
    .into_iter()
    .map(|(name, field)| QueryParam { name: name.into(), field })
    .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub raw_text: String,
    pub tokens: Vec<String>,
    pub visit_id: String,
    pub timestamp: DateTime<Utc>,
    pub source_field: SourceField,
}

impl Query {
    /// Builds a query from decoded text, or `None` when the text has no tokens.
    pub fn new(raw_text: &str, visit_id: &str, timestamp: DateTime<Utc>, source_field: SourceField) -> Option<Self> {
        let raw_text = raw_text.trim();
        let tokens = normalize_text(raw_text);
        if tokens.is_empty() {
            return None;
        }
        Some(Self { raw_text: raw_text.to_string(), tokens, visit_id: visit_id.to_string(), timestamp, source_field })
    }

    pub fn is_numeric_only(&self) -> bool {
        self.tokens.iter().all(|t| is_numeric_token(t))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Extracted {
    pub queries: Vec<Query>,
    /// Digits-only queries dropped by this call.
    pub discarded_numeric: usize,
}

/// Pulls the search strings out of a record's URL query component.
pub fn extract_queries(record: &LogRecord, params: &[QueryParam]) -> Result<Extracted, IngestError> {
    let query_part = record
        .url
        .split_once('?')
        .map(|(_, q)| q.split('#').next().unwrap_or(""))
        .ok_or_else(|| IngestError::UnparseableUrl(record.url.clone()))?;
    let pairs: Vec<(String, String)> =
        url::form_urlencoded::parse(query_part.as_bytes()).map(|(k, v)| (k.into_owned(), v.into_owned())).collect();

    let mut out = Extracted::default();
    for param in params {
        for (_, value) in pairs.iter().filter(|(k, _)| *k == param.name) {
            let Some(q) = Query::new(value, &record.visit_id, record.timestamp, param.field) else {
                continue;
            };
            if q.is_numeric_only() {
                out.discarded_numeric += 1;
            } else {
                out.queries.push(q);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Visit {
    pub visit_id: String,
    pub visitor_id: String,
    pub queries: Vec<Query>,
}

/// Totals reported alongside the visits built from an export.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildSummary {
    pub records: usize,
    pub discarded_numeric: usize,
    pub records_without_query_string: usize,
}

fn query_order(a: &Query, b: &Query) -> std::cmp::Ordering {
    (a.timestamp, &a.raw_text, a.source_field, &a.tokens).cmp(&(b.timestamp, &b.raw_text, b.source_field, &b.tokens))
}

/// Groups records by the export's visit id. Output is sorted by visit id
/// with queries in time order, so it does not depend on input order.
pub fn build_visits<I>(records: I, params: &[QueryParam]) -> (Vec<Visit>, BuildSummary)
where
    I: IntoIterator<Item = LogRecord>,
{
    let mut groups: BTreeMap<String, Visit> = BTreeMap::new();
    let mut summary = BuildSummary::default();
    for rec in records {
        summary.records += 1;
        let visit = groups.entry(rec.visit_id.clone()).or_insert_with(|| Visit {
            visit_id: rec.visit_id.clone(),
            visitor_id: rec.visitor_id.clone(),
            queries: Vec::new(),
        });
        // smallest visitor id wins if an export disagrees with itself
        if rec.visitor_id < visit.visitor_id {
            visit.visitor_id = rec.visitor_id.clone();
        }
        match extract_queries(&rec, params) {
            Ok(ex) => {
                summary.discarded_numeric += ex.discarded_numeric;
                visit.queries.extend(ex.queries);
            }
            Err(_) => summary.records_without_query_string += 1,
        }
    }
    let mut visits: Vec<Visit> = groups.into_values().collect();
    for v in &mut visits {
        v.queries.sort_by(query_order);
    }
    (visits, summary)
}

/// Five-number-ish summary of a sample.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Population standard deviation.
    pub stddev: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    /// All-zero for an empty sample.
    pub fn of(values: &[usize]) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        let n = values.len() as f64;
        let mut sorted = values.to_vec();
        sorted.sort_unstable();
        let sum: usize = sorted.iter().sum();
        let mean = sum as f64 / n;
        let var = sorted.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / n;
        let mid = sorted.len() / 2;
        let median = if sorted.len().is_multiple_of(2) {
            (sorted[mid - 1] + sorted[mid]) as f64 / 2.0
        } else {
            sorted[mid] as f64
        };
        Self { mean, stddev: var.sqrt(), median, min: sorted[0] as f64, max: sorted[sorted.len() - 1] as f64 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub total_queries: usize,
    pub distinct_queries: usize,
    /// Visits that produced at least one query.
    pub visit_count: usize,
    /// Visits present in the export that produced no query.
    pub empty_visits: usize,
    pub distinct_per_visit: Summary,
    /// Same as `distinct_per_visit` but counting repeated queries.
    pub queries_per_visit: Summary,
    pub tokens_per_query: Summary,
    /// Cumulative: number of queries with at most `k` tokens, for every `k`
    /// from 1 to the longest query.
    pub queries_with_at_most_k_tokens: BTreeMap<usize, usize>,
}

fn case_key(q: &Query) -> String {
    q.raw_text.to_lowercase()
}

pub fn corpus_stats(visits: &[Visit]) -> CorpusStats {
    let mut distinct: HashSet<String> = HashSet::new();
    let mut distinct_per_visit = Vec::new();
    let mut per_visit = Vec::new();
    let mut token_counts = Vec::new();
    let mut empty_visits = 0;

    for v in visits {
        if v.queries.is_empty() {
            empty_visits += 1;
            continue;
        }
        let mut local: HashSet<String> = HashSet::new();
        for q in &v.queries {
            let key = case_key(q);
            local.insert(key.clone());
            distinct.insert(key);
            token_counts.push(q.tokens.len());
        }
        distinct_per_visit.push(local.len());
        per_visit.push(v.queries.len());
    }

    let max_tokens = token_counts.iter().copied().max().unwrap_or(0);
    let mut histogram = vec![0usize; max_tokens + 1];
    for &t in &token_counts {
        histogram[t] += 1;
    }
    let mut cumulative = BTreeMap::new();
    let mut running = 0;
    for (k, count) in histogram.iter().enumerate().skip(1) {
        running += count;
        cumulative.insert(k, running);
    }

    CorpusStats {
        total_queries: token_counts.len(),
        distinct_queries: distinct.len(),
        visit_count: per_visit.len(),
        empty_visits,
        distinct_per_visit: Summary::of(&distinct_per_visit),
        queries_per_visit: Summary::of(&per_visit),
        tokens_per_query: Summary::of(&token_counts),
        queries_with_at_most_k_tokens: cumulative,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE1_URL: &str = "http://opac.kbr.be/pressshow.php?adv=1&all_q=BRUXELLES&any_q=&exact_q=&none_q=&from_d=&to_d=&per_lang=&per=&lang=FR";

    fn table1_export() -> String {
        format!(
            "visitor_id\tvisit_id\ttimestamp\turl\tcustom_vars\n\
             B9A3E4383488480\t650082\t2016-01-01 08:12:45\t{TABLE1_URL}\tpageview_select_page 14-09-1894, Ed.1 p.4\n"
        )
    }

    fn record(visit: &str, ts: &str, url: &str) -> LogRecord {
        LogRecord {
            visitor_id: "v".into(),
            visit_id: visit.into(),
            timestamp: parse_timestamp(ts).unwrap(),
            url: url.into(),
            custom_vars: vec![],
        }
    }

    #[test]
    fn parses_table_one_row() {
        let read = read_export(table1_export().as_bytes(), b'\t', &ColumnSchema::default()).unwrap();
        assert!(read.errors.is_empty());
        let rec = &read.records[0];
        assert_eq!(rec.visitor_id, "B9A3E4383488480");
        assert_eq!(rec.visit_id, "650082");
        assert_eq!(rec.timestamp.to_string(), "2016-01-01 08:12:45 UTC");
        assert_eq!(rec.url, TABLE1_URL);
        assert_eq!(rec.custom_vars, vec![("pageview_select_page".to_string(), "14-09-1894, Ed.1 p.4".to_string())]);
    }

    #[test]
    fn empty_custom_vars_column() {
        let data = "visitor_id,visit_id,timestamp,url,custom_vars\na,1,2016-01-01 00:00:00,http://x/?all_q=a,\n";
        let read = read_export(data.as_bytes(), b',', &ColumnSchema::default()).unwrap();
        assert!(read.records[0].custom_vars.is_empty());
    }

    #[test]
    fn empty_file_is_empty_export() {
        let read = read_export("".as_bytes(), b',', &ColumnSchema::default()).unwrap();
        assert_eq!(read.rows, 0);
        assert!(read.records.is_empty() && read.errors.is_empty());
    }

    #[test]
    fn bad_timestamp_is_reported() {
        let data = "visitor_id,visit_id,timestamp,url\na,1,2016-13-40 99:99:99,http://x/?all_q=a\n";
        let read = read_export(data.as_bytes(), b',', &ColumnSchema::default()).unwrap();
        assert!(read.records.is_empty());
        assert!(matches!(read.errors[0], IngestError::BadTimestamp { row: 1, .. }));
    }

    #[test]
    fn short_row_is_malformed() {
        let data = "visitor_id,visit_id,timestamp,url\na,1\n";
        let read = read_export(data.as_bytes(), b',', &ColumnSchema::default()).unwrap();
        assert!(matches!(read.errors[0], IngestError::MalformedRow { .. }));
    }

    #[test]
    fn header_without_url_column() {
        let data = "visitor_id,visit_id,timestamp\n";
        let err = read_export(data.as_bytes(), b',', &ColumnSchema::default()).unwrap_err();
        assert_eq!(err, IngestError::MissingHeaderColumn("url".into()));
    }

    #[test]
    fn table_one_query() {
        let rec = record("650082", "2016-01-01 08:12:45", TABLE1_URL);
        let ex = extract_queries(&rec, &default_query_params()).unwrap();
        assert_eq!(ex.queries.len(), 1);
        let q = &ex.queries[0];
        assert_eq!(q.raw_text, "BRUXELLES");
        assert_eq!(q.tokens, vec!["bruxelles"]);
        assert_eq!(q.source_field, SourceField::All);
        assert_eq!(ex.discarded_numeric, 0);
    }

    #[test]
    fn empty_params_yield_nothing() {
        let rec = record("1", "2016-01-01 00:00:00", "http://x/p.php?all_q=&any_q=&exact_q=&none_q=");
        let ex = extract_queries(&rec, &default_query_params()).unwrap();
        assert!(ex.queries.is_empty());
    }

    #[test]
    fn digits_only_dropped_and_counted() {
        let rec = record("1", "2016-01-01 00:00:00", "http://x/p.php?all_q=14091894&any_q=");
        let ex = extract_queries(&rec, &default_query_params()).unwrap();
        assert!(ex.queries.is_empty());
        assert_eq!(ex.discarded_numeric, 1);
    }

    #[test]
    fn mixed_alphanumeric_kept_and_decoded() {
        let rec = record("1", "2016-01-01 00:00:00", "http://x/p.php?all_q=L%C3%A9opold+II&exact_q=14-18&any_q=ww1");
        let ex = extract_queries(&rec, &default_query_params()).unwrap();
        let texts: Vec<_> = ex.queries.iter().map(|q| q.raw_text.as_str()).collect();
        assert_eq!(texts, vec!["Léopold II", "ww1"]);
        assert_eq!(ex.discarded_numeric, 1);
    }

    #[test]
    fn url_without_query_string() {
        let rec = record("1", "2016-01-01 00:00:00", "http://x/index.php");
        assert!(matches!(extract_queries(&rec, &default_query_params()), Err(IngestError::UnparseableUrl(_))));
    }

    #[test]
    fn two_records_one_visit() {
        let recs = vec![
            record("650082", "2016-01-01 08:13:00", "http://x/?all_q=gand"),
            record("650082", "2016-01-01 08:12:45", "http://x/?all_q=BRUXELLES"),
        ];
        let (visits, summary) = build_visits(recs, &default_query_params());
        assert_eq!(visits.len(), 1);
        assert_eq!(summary.records, 2);
        let texts: Vec<_> = visits[0].queries.iter().map(|q| q.raw_text.as_str()).collect();
        assert_eq!(texts, vec!["BRUXELLES", "gand"]);
    }

    #[test]
    fn empty_stream() {
        let (visits, _) = build_visits(Vec::new(), &default_query_params());
        assert!(visits.is_empty());
        let stats = corpus_stats(&visits);
        assert_eq!(stats, CorpusStats::default());
    }

    #[test]
    fn one_visit_one_query_stats() {
        let (visits, _) =
            build_visits(vec![record("1", "2016-01-01 00:00:00", "http://x/?all_q=gent")], &default_query_params());
        let s = corpus_stats(&visits);
        assert_eq!(s.total_queries, 1);
        let d = s.distinct_per_visit;
        assert_eq!((d.mean, d.median, d.stddev, d.min, d.max), (1.0, 1.0, 0.0, 1.0, 1.0));
    }

    #[test]
    fn two_token_corpus() {
        let recs = (0..6)
            .map(|i| record(&format!("{}", i % 3), "2016-01-01 00:00:00", &format!("http://x/?all_q=a{i}+b")))
            .collect::<Vec<_>>();
        let (visits, _) = build_visits(recs, &default_query_params());
        let s = corpus_stats(&visits);
        assert_eq!(s.tokens_per_query.mean, 2.0);
        assert_eq!(s.tokens_per_query.stddev, 0.0);
        assert_eq!(s.queries_with_at_most_k_tokens.get(&1), Some(&0));
        assert_eq!(s.queries_with_at_most_k_tokens.get(&2), Some(&6));
    }

    #[test]
    fn distinct_is_case_insensitive() {
        let recs = vec![
            record("1", "2016-01-01 00:00:00", "http://x/?all_q=Liege"),
            record("1", "2016-01-01 00:00:01", "http://x/?all_q=LIEGE"),
            record("2", "2016-01-01 00:00:02", "http://x/?all_q=liege"),
        ];
        let (visits, _) = build_visits(recs, &default_query_params());
        let s = corpus_stats(&visits);
        assert_eq!(s.total_queries, 3);
        assert_eq!(s.distinct_queries, 1);
        assert_eq!(s.distinct_per_visit.mean, 1.0);
        assert_eq!(s.queries_per_visit.mean, 1.5);
    }

    #[test]
    fn even_median() {
        assert_eq!(Summary::of(&[1, 2, 3, 10]).median, 2.5);
    }
}
