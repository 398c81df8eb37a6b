//! One function per pipeline command. Stages talk to each other only
//! through files in the output directory.

use std::fmt;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use querylens::evaluate::{gsc_subsets, score_extraction, AgreementReport, EvalReport, MatchMode};
use querylens::ingest::{build_visits, corpus_stats, read_export, CorpusStats, Query, Visit};
use querylens::kb::{batch_reconcile, FixtureClient, KbClient, ReconcileCache, ReconcileOptions, ReconciledName};
use querylens::lexicon::{Lexicon, ParticleList, SuppressionLexicons};
use querylens::person::PersonOptions;
use querylens::pipeline::{extract_corpus, predict_gold, AmbiguousQuery, Resources};
use querylens::report::{aggregate, write_report_dir};
use querylens::{load_gsc, CandidateName, Gazetteer, GazetteerOptions, PlaceMention};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{KbBackend, PipelineConfig};

pub const CORPUS: &str = "corpus.ndjson";
pub const STATS: &str = "stats.json";
pub const INGEST_ERRORS: &str = "ingest_errors.json";
pub const PLACES: &str = "places.ndjson";
pub const AMBIGUOUS: &str = "ambiguous_queries.ndjson";
pub const PLACES_SUMMARY: &str = "extract_places.json";
pub const PERSONS: &str = "persons.ndjson";
pub const PERSONS_SUMMARY: &str = "extract_persons.json";
pub const RECONCILED: &str = "reconciled.ndjson";
pub const RECONCILE_SUMMARY: &str = "reconcile_summary.json";
pub const KB_CACHE: &str = "kb_cache.ndjson";
pub const EVALUATION: &str = "evaluation.json";
pub const REPORT_DIR: &str = "report";

/// Too many malformed export rows. Exit code 2.
#[derive(Debug)]
pub struct BudgetExceeded {
    pub malformed: usize,
    pub rows: usize,
    pub budget: f64,
}

impl fmt::Display for BudgetExceeded {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} of {} export rows are malformed, above the error budget of {}",
            self.malformed, self.rows, self.budget
        )
    }
}

impl std::error::Error for BudgetExceeded {}

/// An earlier stage's output is absent. Exit code 3.
#[derive(Debug)]
pub struct MissingStage {
    pub file: PathBuf,
    pub stage: &'static str,
}

impl fmt::Display for MissingStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} not found; run `querylens {}` first", self.file.display(), self.stage)
    }
}

impl std::error::Error for MissingStage {}

pub struct Ctx {
    pub cfg: PipelineConfig,
    pub hash: String,
}

impl Ctx {
    pub fn new(cfg: PipelineConfig) -> Self {
        let hash = cfg.hash();
        Self { cfg, hash }
    }

    fn out(&self, name: &str) -> PathBuf {
        self.cfg.out_dir.join(name)
    }

    fn prior(&self, name: &str, stage: &'static str) -> Result<PathBuf> {
        let p = self.out(name);
        if !p.exists() {
            return Err(MissingStage { file: p, stage }.into());
        }
        Ok(p)
    }

    /// Writes a JSON document stamped with the config hash.
    fn write_json(&self, name: &str, body: Value) -> Result<()> {
        let mut doc = Map::new();
        doc.insert("config_hash".into(), Value::String(self.hash.clone()));
        match body {
            Value::Object(m) => doc.extend(m),
            other => {
                doc.insert("data".into(), other);
            }
        }
        write_text(&self.out(name), &(serde_json::to_string_pretty(&doc)? + "\n"))
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_ndjson<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("writing {}", path.display()))?);
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_ndjson<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let f = File::open(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).with_context(|| format!("{}:{}", path.display(), i + 1))?);
    }
    Ok(out)
}

fn read_json(path: &Path) -> Result<Value> {
    let f = File::open(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_reader(BufReader::new(f))?)
}

fn load_resources(cfg: &PipelineConfig) -> Result<Resources> {
    let gazetteer = Gazetteer::load_files(
        cfg.need("gazetteer_locations", &cfg.gazetteer_locations)?,
        cfg.need("gazetteer_aliases", &cfg.gazetteer_aliases)?,
        &GazetteerOptions { country: cfg.country.clone() },
    )?;
    let lexicon = |name: &str, p: &Option<PathBuf>| -> Result<Lexicon> {
        let path = cfg.need(name, p)?;
        Ok(Lexicon::read(name, File::open(path).with_context(|| format!("reading {}", path.display()))?)?)
    };
    let lexicons = SuppressionLexicons::new(
        lexicon("common_words", &cfg.common_words)?,
        lexicon("given_names", &cfg.given_names)?,
    );
    let particles = match &cfg.particles {
        Some(p) => ParticleList::read(File::open(p)?)?,
        None => ParticleList::new(Vec::<String>::new()),
    };
    let person = PersonOptions { max_surname_tokens: cfg.max_surname_tokens, order: cfg.order };
    Ok(Resources { gazetteer, lexicons, particles, person })
}

fn load_queries(ctx: &Ctx) -> Result<Vec<Query>> {
    let visits: Vec<Visit> = read_ndjson(&ctx.prior(CORPUS, "ingest")?)?;
    Ok(visits.into_iter().flat_map(|v| v.queries).collect())
}

pub fn ingest(ctx: &Ctx) -> Result<()> {
    let cfg = &ctx.cfg;
    let path = cfg.need("export", &cfg.export)?;
    let file = File::open(path).with_context(|| format!("reading {}", path.display()))?;
    let read = read_export(file, cfg.delimiter as u8, &cfg.columns)?;
    let errors: Vec<String> = read.errors.iter().map(ToString::to_string).collect();
    if read.rows > 0 && errors.len() as f64 / read.rows as f64 > cfg.error_budget {
        ctx.write_json(
            INGEST_ERRORS,
            json!({
                "rows": read.rows,
                "malformed_rows": errors.len(),
                "error_budget": cfg.error_budget,
                "errors": errors,
            }),
        )?;
        return Err(BudgetExceeded { malformed: errors.len(), rows: read.rows, budget: cfg.error_budget }.into());
    }
    for e in &errors {
        log::warn!("skipped export row: {e}");
    }
    let (visits, summary) = build_visits(read.records, &cfg.query_params);
    let stats = corpus_stats(&visits);
    write_ndjson(&ctx.out(CORPUS), &visits)?;
    let mut body = serde_json::to_value(&stats)?;
    body["ingest"] = json!({
        "rows": read.rows,
        "malformed_rows": errors.len(),
        "records": summary.records,
        "discarded_numeric": summary.discarded_numeric,
        "records_without_query_string": summary.records_without_query_string,
        "errors": errors,
    });
    ctx.write_json(STATS, body)?;
    log::info!("ingested {} queries from {} visits", stats.total_queries, stats.visit_count);
    Ok(())
}

pub fn extract_places(ctx: &Ctx) -> Result<()> {
    let queries = load_queries(ctx)?;
    let res = load_resources(&ctx.cfg)?;
    let ex = extract_corpus(&queries, &res);
    write_ndjson(&ctx.out(PLACES), &ex.places)?;
    write_ndjson(&ctx.out(AMBIGUOUS), &ex.ambiguous)?;
    ctx.write_json(
        PLACES_SUMMARY,
        json!({
            "queries": queries.len(),
            "place_mentions": ex.places.len(),
            "ambiguous_spelling_mentions": ex.places.iter().filter(|p| p.is_ambiguous()).count(),
            "ambiguous_queries": ex.ambiguous.len(),
            "gazetteer_locations": res.gazetteer.len(),
            "gazetteer_aliases": res.gazetteer.index().len(),
        }),
    )?;
    log::info!("{} place mentions", ex.places.len());
    Ok(())
}

pub fn extract_persons(ctx: &Ctx) -> Result<()> {
    let queries = load_queries(ctx)?;
    let res = load_resources(&ctx.cfg)?;
    let ex = extract_corpus(&queries, &res);
    write_ndjson(&ctx.out(PERSONS), &ex.persons)?;
    let spellings: std::collections::BTreeSet<&str> = ex.persons.iter().map(|c| c.surface.as_str()).collect();
    ctx.write_json(
        PERSONS_SUMMARY,
        json!({
            "queries": queries.len(),
            "candidates": ex.persons.len(),
            "distinct_spellings": spellings.len(),
            "order": ctx.cfg.order,
        }),
    )?;
    log::info!("{} person candidates", ex.persons.len());
    Ok(())
}

fn clients(cfg: &PipelineConfig) -> Result<Vec<Box<dyn KbClient>>> {
    match cfg.kb.backend {
        KbBackend::Fixture => {
            let path = cfg.need("kb.fixture", &cfg.kb.fixture)?;
            let (wd, viaf) = FixtureClient::pair(path)?;
            Ok(vec![Box::new(wd), Box::new(viaf)])
        }
        KbBackend::Live => live_clients(cfg),
    }
}

#[cfg(feature = "live")]
fn live_clients(cfg: &PipelineConfig) -> Result<Vec<Box<dyn KbClient>>> {
    use querylens::kb::http::UreqTransport;
    use querylens::kb::{ViafClient, WikidataClient};
    let transport = || UreqTransport::new(&cfg.kb.user_agent, std::time::Duration::from_secs(cfg.kb.timeout_secs));
    let wd = cfg.kb.wikidata.clone().context("`kb.wikidata` endpoint is not configured")?;
    let viaf = cfg.kb.viaf.clone().context("`kb.viaf` endpoint is not configured")?;
    Ok(vec![
        Box::new(WikidataClient { config: wd, http: transport() }),
        Box::new(ViafClient { config: viaf, http: transport() }),
    ])
}

#[cfg(not(feature = "live"))]
fn live_clients(_: &PipelineConfig) -> Result<Vec<Box<dyn KbClient>>> {
    bail!("this binary was built without the `live` feature; use --kb-backend fixture")
}

pub fn reconcile(ctx: &Ctx) -> Result<()> {
    let cfg = &ctx.cfg;
    let persons: Vec<CandidateName> = read_ndjson(&ctx.prior(PERSONS, "extract-persons")?)?;
    let opts = ReconcileOptions {
        threshold: cfg.threshold,
        source_thresholds: cfg.kb.thresholds.clone(),
        query_inverted: cfg.kb.query_inverted,
    };
    opts.validate().map_err(anyhow::Error::msg)?;
    let owned = clients(cfg)?;
    let refs: Vec<&dyn KbClient> = owned.iter().map(|c| c.as_ref()).collect();
    // the fixture backend is free to query, so it skips the cache unless asked
    let cache_path = match (&cfg.kb.cache, cfg.kb.backend) {
        (Some(p), _) => Some(p.clone()),
        (None, KbBackend::Live) => Some(ctx.out(KB_CACHE)),
        (None, KbBackend::Fixture) => None,
    };
    let mut cache = match &cache_path {
        Some(p) => {
            if let Some(dir) = p.parent() {
                fs::create_dir_all(dir)?;
            }
            Some(ReconcileCache::open(p)?)
        }
        None => None,
    };
    let batch = batch_reconcile(&persons, &refs, &opts, cache.as_mut())?;
    write_ndjson(&ctx.out(RECONCILED), &batch.results)?;
    ctx.write_json(
        RECONCILE_SUMMARY,
        json!({
            "backend": cfg.kb.backend,
            "options": opts,
            "summary": batch.summary,
            "spellings": batch.spellings,
        }),
    )?;
    log::info!(
        "{} spellings, {} matched in at least one knowledge base",
        batch.summary.distinct_spellings,
        batch.summary.matched_any_kb
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct ModeScores {
    gold: usize,
    strict: EvalReport,
    partial: EvalReport,
}

pub fn evaluate(ctx: &Ctx) -> Result<String> {
    let cfg = &ctx.cfg;
    let path = cfg.need("gsc", &cfg.gsc)?;
    let corpus = load_gsc(File::open(path)?, cfg.gsc_delimiter as u8)?;
    let res = load_resources(cfg)?;
    let subsets = gsc_subsets(&corpus, &res.gazetteer);
    let (places, persons) = predict_gold(&corpus, &res);
    let score = |pred: &[querylens::Mention], gold: &[querylens::Mention]| ModeScores {
        gold: gold.len(),
        strict: score_extraction(pred, gold, MatchMode::Strict),
        partial: score_extraction(pred, gold, MatchMode::Partial),
    };
    let place_scores = score(&places, &subsets.belgian_municipal_locs);
    let person_scores = score(&persons, &subsets.full_name_pers);
    let agreement = corpus.agreement();
    let consensus: Map<String, Value> =
        corpus.consensus_counts().iter().map(|(c, n)| (c.as_str().to_string(), json!(n))).collect();
    let body = json!({
        "gsc": {
            "queries": corpus.queries.len(),
            "entities": corpus.entity_count(),
            "disputed": corpus.disputed().len(),
            "annotators": corpus.annotators,
            "warnings": corpus.warnings.len(),
            "consensus_counts": consensus,
        },
        "agreement": match &agreement {
            Ok(a) => serde_json::to_value(a)?,
            Err(e) => json!({ "error": e.to_string() }),
        },
        "places": place_scores,
        "persons": person_scores,
    });
    ctx.write_json(EVALUATION, body.clone())?;
    let mut table = human_table(&place_scores, &person_scores, agreement.as_ref().ok());
    table.push('\n');
    let mut doc = Map::new();
    doc.insert("config_hash".into(), Value::String(ctx.hash.clone()));
    if let Value::Object(m) = body {
        doc.extend(m);
    }
    table.push_str(&serde_json::to_string_pretty(&doc)?);
    table.push('\n');
    Ok(table)
}

fn human_table(places: &ModeScores, persons: &ModeScores, agreement: Option<&AgreementReport>) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "{:<10} {:<8} {:>5} {:>8} {:>4} {:>6} {:>6} {:>9} {:>7} {:>7}\n",
        "subset", "mode", "gold", "correct", "fp", "incmp", "missed", "precision", "recall", "f1"
    ));
    for (name, m) in [("places", places), ("persons", persons)] {
        for (mode, r) in [("strict", &m.strict), ("partial", &m.partial)] {
            s.push_str(&format!(
                "{:<10} {:<8} {:>5} {:>8} {:>4} {:>6} {:>6} {:>9.4} {:>7.4} {:>7.4}\n",
                name, mode, m.gold, r.correct, r.false_positive, r.incomplete, r.missed, r.precision, r.recall, r.f1
            ));
        }
    }
    match agreement {
        Some(a) => {
            s.push_str(&format!(
                "\nagreement: {} of {} co-annotated entities, p_o {:.4}, p_e {:.4}, kappa {:.4}\n",
                a.agreed, a.total, a.p_o, a.p_e, a.kappa
            ));
            s.push_str(&format!("{:<10}", ""));
            for c in &a.categories {
                s.push_str(&format!("{:>10}", c.as_str()));
            }
            s.push('\n');
            for (c, row) in a.categories.iter().zip(&a.table) {
                s.push_str(&format!("{:<10}", c.as_str()));
                for n in row {
                    s.push_str(&format!("{n:>10}"));
                }
                s.push('\n');
            }
        }
        None => s.push_str("\nagreement: not available\n"),
    }
    s
}

pub fn report(ctx: &Ctx) -> Result<()> {
    let places: Vec<PlaceMention> = read_ndjson(&ctx.prior(PLACES, "extract-places")?)?;
    let reconciled: Vec<ReconciledName> = read_ndjson(&ctx.prior(RECONCILED, "reconcile")?)?;
    let stats: CorpusStats = serde_json::from_value(read_json(&ctx.prior(STATS, "ingest")?)?)?;
    let ambiguous: Vec<AmbiguousQuery> = match ctx.out(AMBIGUOUS) {
        p if p.exists() => read_ndjson(&p)?,
        _ => Vec::new(),
    };
    let res = load_resources(&ctx.cfg)?;
    let agg = aggregate(&places, &reconciled, &stats, &res.gazetteer);
    let mut extra = Map::new();
    extra.insert("config_hash".into(), Value::String(ctx.hash.clone()));
    extra.insert("ambiguous_queries".into(), json!(ambiguous.len()));
    let files = write_report_dir(&agg, &res.gazetteer, &ctx.out(REPORT_DIR), &extra)?;
    log::info!("report written to {}", files.stats.parent().unwrap_or(Path::new(".")).display());
    Ok(())
}
