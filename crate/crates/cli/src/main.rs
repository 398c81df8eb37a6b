//! `querylens`: search-log entity extraction pipeline.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 malformed export rows
//! above the error budget, 3 an earlier stage's output is missing.

mod config;
mod stages;

use std::collections::HashMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use querylens::geonames;
use querylens::person::OrderMode;
use serde_json::json;

use config::{KbBackend, Overrides, PipelineConfig};
use stages::{BudgetExceeded, Ctx, MissingStage};

#[derive(Parser, Debug)]
#[command(name = "querylens", version, about = "Extract places and people from library search logs")]
struct Cli {
    /// Pipeline configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for stage outputs.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Knowledge-base acceptance threshold, in (0, 1].
    #[arg(long, global = true)]
    threshold: Option<f64>,
    #[arg(long, global = true, value_enum)]
    kb_backend: Option<KbBackend>,
    /// Keep only gazetteer locations of this country code (`*` for all).
    #[arg(long, global = true)]
    country: Option<String>,
    /// Person name orders to recognise: given-first or both.
    #[arg(long, global = true)]
    order: Option<OrderMode>,
    /// Largest tolerated share of malformed export rows.
    #[arg(long, global = true)]
    error_budget: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Read the log export and write the query corpus and its statistics.
    Ingest,
    /// Match gazetteer places in the corpus.
    ExtractPlaces,
    /// Find candidate person names in the corpus.
    ExtractPersons,
    /// Look candidate names up in the knowledge bases.
    Reconcile,
    /// Score the extractors and annotator agreement on the gold corpus.
    Evaluate,
    /// Aggregate counts into CSV, GeoJSON and JSON files.
    Report,
    /// Every stage in order.
    RunAll,
    /// Turn a GeoNames country dump into gazetteer files.
    ConvertGeonames {
        #[arg(long)]
        dump: PathBuf,
        /// Two-column TSV mapping geoname ids to location ids.
        #[arg(long)]
        id_map: Option<PathBuf>,
        #[arg(long)]
        locations: PathBuf,
        #[arg(long)]
        aliases: PathBuf,
    },
}

fn read_id_map(path: &PathBuf) -> Result<HashMap<String, String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text
        .lines()
        .filter_map(|l| l.split_once('\t'))
        .map(|(a, b)| (a.trim().to_string(), b.trim().to_string()))
        .collect())
}

fn run(cli: Cli) -> Result<()> {
    if let Command::ConvertGeonames { dump, id_map, locations, aliases } = &cli.command {
        let ids = id_map.as_ref().map(read_id_map).transpose()?.unwrap_or_default();
        let country = cli.country.as_deref().filter(|c| *c != "*");
        let summary = geonames::convert(
            File::open(dump).with_context(|| format!("reading {}", dump.display()))?,
            country,
            &ids,
            BufWriter::new(File::create(locations)?),
            BufWriter::new(File::create(aliases)?),
        )?;
        log::info!("{summary:?}");
        return Ok(());
    }

    let ov = Overrides {
        out_dir: cli.out_dir,
        threshold: cli.threshold,
        kb_backend: cli.kb_backend,
        country: cli.country,
        order: cli.order,
        error_budget: cli.error_budget,
    };
    let ctx = Ctx::new(PipelineConfig::load(cli.config.as_deref(), &ov)?);
    log::debug!("config hash {}", ctx.hash);
    match cli.command {
        Command::Ingest => stages::ingest(&ctx),
        Command::ExtractPlaces => stages::extract_places(&ctx),
        Command::ExtractPersons => stages::extract_persons(&ctx),
        Command::Reconcile => stages::reconcile(&ctx),
        Command::Evaluate => {
            print!("{}", stages::evaluate(&ctx)?);
            Ok(())
        }
        Command::Report => stages::report(&ctx),
        Command::RunAll => {
            stages::ingest(&ctx)?;
            stages::extract_places(&ctx)?;
            stages::extract_persons(&ctx)?;
            stages::reconcile(&ctx)?;
            if ctx.cfg.gsc.is_some() {
                print!("{}", stages::evaluate(&ctx)?);
            } else {
                log::info!("no gold corpus configured; skipping evaluate");
            }
            stages::report(&ctx)
        }
        Command::ConvertGeonames { .. } => unreachable!("handled above"),
    }
}

fn exit_code(err: &anyhow::Error) -> (u8, &'static str) {
    if err.downcast_ref::<BudgetExceeded>().is_some() {
        (2, "error_budget_exceeded")
    } else if err.downcast_ref::<MissingStage>().is_some() {
        (3, "missing_stage_output")
    } else {
        (1, "error")
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (code, kind) = exit_code(&err);
            let causes: Vec<String> = err.chain().map(ToString::to_string).collect();
            eprintln!("{}", json!({ "error": kind, "exit_code": code, "message": err.to_string(), "causes": causes }));
            ExitCode::from(code)
        }
    }
}
