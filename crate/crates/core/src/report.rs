//! Aggregation of extraction and reconciliation results into tables, a
//! GeoJSON layer and a statistics file.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::gazetteer::{weight_by_population, Gazetteer, LocationKind, PlaceMention};
use crate::ingest::CorpusStats;
use crate::kb::{KbSource, Provenance, ReconciledName};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaceCount {
    pub location_id: String,
    pub canonical_name: String,
    pub kind: Option<LocationKind>,
    pub mentions: usize,
    /// Mentions per inhabitant; `None` without a population figure.
    pub weighted_score: Option<f64>,
}

/// Mentions of a spelling shared by several locations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbiguousCount {
    pub surface: String,
    pub location_ids: Vec<String>,
    pub mentions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonRow {
    pub spelling: String,
    pub mentions: usize,
    pub provenance: Provenance,
    pub wikidata_ids: Vec<String>,
    pub viaf_ids: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PersonSummary {
    pub total_mentions: usize,
    pub distinct_spellings: usize,
    pub matched_any_kb: usize,
    /// Spellings per provenance class; every class is listed.
    pub provenance: BTreeMap<Provenance, usize>,
    /// Percentages of resolved spellings (UNRESOLVED left out).
    pub provenance_percent: BTreeMap<Provenance, f64>,
    pub matched_fraction: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    /// Unambiguous mentions by location id.
    pub place_counts: BTreeMap<String, PlaceCount>,
    /// Sorted by surface.
    pub ambiguous: Vec<AmbiguousCount>,
    /// All place mentions: `place_counts` plus `ambiguous`.
    pub place_mentions: usize,
    pub municipality_mentions: usize,
    /// Municipality mentions over all place mentions.
    pub municipality_share: f64,
    /// Municipality mentions over all queries in the corpus.
    pub municipality_query_ratio: f64,
    /// Counted locations lacking a population figure.
    pub unweighted_locations: Vec<String>,
    pub person_summary: PersonSummary,
    pub persons: Vec<PersonRow>,
    pub stats: CorpusStats,
}

fn ratio(n: usize, d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        n as f64 / d as f64
    }
}

pub fn aggregate(
    mentions: &[PlaceMention],
    reconciled: &[ReconciledName],
    stats: &CorpusStats,
    gaz: &Gazetteer,
) -> AggregateReport {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut ambiguous: BTreeMap<(String, Vec<String>), usize> = BTreeMap::new();
    for m in mentions {
        match m.location_ids.as_slice() {
            [] => {}
            [id] => *counts.entry(id.clone()).or_default() += 1,
            ids => *ambiguous.entry((m.surface.clone(), ids.to_vec())).or_default() += 1,
        }
    }
    let weights = weight_by_population(&counts, gaz);
    let place_counts: BTreeMap<String, PlaceCount> = counts
        .iter()
        .map(|(id, &n)| {
            let entry = gaz.get(id);
            let pc = PlaceCount {
                location_id: id.clone(),
                canonical_name: entry.map_or_else(|| id.clone(), |e| e.canonical_name.clone()),
                kind: entry.map(|e| e.kind),
                mentions: n,
                weighted_score: weights.weighted.get(id).copied(),
            };
            (id.clone(), pc)
        })
        .collect();
    let municipality_mentions: usize =
        place_counts.values().filter(|p| p.kind == Some(LocationKind::Municipality)).map(|p| p.mentions).sum();
    let place_mentions = mentions.iter().filter(|m| !m.location_ids.is_empty()).count();

    let mut by_spelling: BTreeMap<&str, (usize, &ReconciledName)> = BTreeMap::new();
    for r in reconciled {
        by_spelling.entry(r.spelling.as_str()).or_insert((0, r)).0 += 1;
    }
    let persons: Vec<PersonRow> = by_spelling
        .iter()
        .map(|(s, (n, r))| {
            let ids = |src: KbSource| -> Vec<String> {
                let set: BTreeSet<&str> =
                    r.matches.iter().filter(|m| m.source == src).map(|m| m.entity_id.as_str()).collect();
                set.into_iter().map(str::to_string).collect()
            };
            PersonRow {
                spelling: s.to_string(),
                mentions: *n,
                provenance: r.provenance,
                wikidata_ids: ids(KbSource::Wikidata),
                viaf_ids: ids(KbSource::Viaf),
            }
        })
        .collect();

    let mut provenance: BTreeMap<Provenance, usize> = Provenance::ALL.iter().map(|&p| (p, 0)).collect();
    for p in &persons {
        *provenance.get_mut(&p.provenance).expect("all classes listed") += 1;
    }
    let resolved = persons.len() - provenance[&Provenance::Unresolved];
    let matched_any_kb = persons.iter().filter(|p| p.provenance.is_match()).count();
    let provenance_percent = provenance
        .iter()
        .filter(|(p, _)| **p != Provenance::Unresolved)
        .map(|(&p, &n)| (p, 100.0 * ratio(n, resolved)))
        .collect();

    AggregateReport {
        place_counts,
        ambiguous: ambiguous
            .into_iter()
            .map(|((surface, location_ids), mentions)| AmbiguousCount { surface, location_ids, mentions })
            .collect(),
        place_mentions,
        municipality_mentions,
        municipality_share: ratio(municipality_mentions, place_mentions),
        municipality_query_ratio: ratio(municipality_mentions, stats.total_queries),
        unweighted_locations: weights.unweighted.into_keys().collect(),
        person_summary: PersonSummary {
            total_mentions: reconciled.len(),
            distinct_spellings: persons.len(),
            matched_any_kb,
            provenance,
            provenance_percent,
            matched_fraction: ratio(matched_any_kb, resolved),
        },
        persons,
        stats: stats.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoJsonOutput {
    pub document: Value,
    /// Counted locations left off the map for lack of coordinates.
    pub missing_coordinates: Vec<String>,
}

/// One Point feature per counted location, ordered by location id.
/// Coordinates are `[longitude, latitude]`.
pub fn emit_geojson(report: &AggregateReport, gaz: &Gazetteer) -> GeoJsonOutput {
    let mut features = Vec::new();
    let mut missing = Vec::new();
    for (id, pc) in &report.place_counts {
        match gaz.get(id).and_then(|e| e.coordinates()) {
            Some((lat, lon)) => features.push(json!({
                "type": "Feature",
                "id": id,
                "geometry": { "type": "Point", "coordinates": [lon, lat] },
                "properties": {
                    "location_id": id,
                    "canonical_name": pc.canonical_name,
                    "mentions": pc.mentions,
                    "weighted_score": pc.weighted_score,
                },
            })),
            None => missing.push(id.clone()),
        }
    }
    GeoJsonOutput {
        document: json!({ "type": "FeatureCollection", "features": features }),
        missing_coordinates: missing,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Bucket {
    Location,
    Ambiguous,
}

/// A line of `places.csv`. Ambiguous rows list every candidate id,
/// separated by `|`, and carry the shared spelling as name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaceCsvRow {
    pub bucket: Bucket,
    pub location_id: String,
    pub canonical_name: String,
    pub kind: Option<LocationKind>,
    pub mentions: usize,
    pub weighted_score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonCsvRow {
    pub spelling: String,
    pub mentions: usize,
    pub provenance: Provenance,
    pub wikidata_ids: String,
    pub viaf_ids: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceCsvRow {
    pub provenance: Provenance,
    pub spellings: usize,
    pub percent: Option<f64>,
}

impl AggregateReport {
    pub fn place_rows(&self) -> Vec<PlaceCsvRow> {
        let located = self.place_counts.values().map(|p| PlaceCsvRow {
            bucket: Bucket::Location,
            location_id: p.location_id.clone(),
            canonical_name: p.canonical_name.clone(),
            kind: p.kind,
            mentions: p.mentions,
            weighted_score: p.weighted_score,
        });
        let ambiguous = self.ambiguous.iter().map(|a| PlaceCsvRow {
            bucket: Bucket::Ambiguous,
            location_id: a.location_ids.join("|"),
            canonical_name: a.surface.clone(),
            kind: None,
            mentions: a.mentions,
            weighted_score: None,
        });
        located.chain(ambiguous).collect()
    }

    pub fn person_rows(&self) -> Vec<PersonCsvRow> {
        self.persons
            .iter()
            .map(|p| PersonCsvRow {
                spelling: p.spelling.clone(),
                mentions: p.mentions,
                provenance: p.provenance,
                wikidata_ids: p.wikidata_ids.join("|"),
                viaf_ids: p.viaf_ids.join("|"),
            })
            .collect()
    }

    pub fn provenance_rows(&self) -> Vec<ProvenanceCsvRow> {
        self.person_summary
            .provenance
            .iter()
            .map(|(&p, &n)| ProvenanceCsvRow {
                provenance: p,
                spellings: n,
                percent: self.person_summary.provenance_percent.get(&p).copied(),
            })
            .collect()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Writes rows with a header, even when there are none.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], header: &[&str], w: W) -> Result<(), ReportError> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wtr.write_record(header)?;
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_csv<T: serde::de::DeserializeOwned, R: Read>(r: R) -> Result<Vec<T>, ReportError> {
    let mut rdr = csv::Reader::from_reader(r);
    Ok(rdr.deserialize().collect::<Result<_, _>>()?)
}

pub const PLACES_HEADER: [&str; 6] = ["bucket", "location_id", "canonical_name", "kind", "mentions", "weighted_score"];
pub const PERSONS_HEADER: [&str; 5] = ["spelling", "mentions", "provenance", "wikidata_ids", "viaf_ids"];
pub const PROVENANCE_HEADER: [&str; 3] = ["provenance", "spellings", "percent"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportFiles {
    pub places_csv: PathBuf,
    pub persons_csv: PathBuf,
    pub provenance_csv: PathBuf,
    pub geojson: PathBuf,
    pub missing_coordinates: Option<PathBuf>,
    pub stats: PathBuf,
}

/// Writes the report directory. `extra` is merged into `stats.json`.
pub fn write_report_dir(
    report: &AggregateReport,
    gaz: &Gazetteer,
    dir: &Path,
    extra: &serde_json::Map<String, Value>,
) -> Result<ReportFiles, ReportError> {
    fs::create_dir_all(dir)?;
    let files = ReportFiles {
        places_csv: dir.join("places.csv"),
        persons_csv: dir.join("persons.csv"),
        provenance_csv: dir.join("provenance.csv"),
        geojson: dir.join("places.geojson"),
        missing_coordinates: None,
        stats: dir.join("stats.json"),
    };
    write_csv(&report.place_rows(), &PLACES_HEADER, fs::File::create(&files.places_csv)?)?;
    write_csv(&report.person_rows(), &PERSONS_HEADER, fs::File::create(&files.persons_csv)?)?;
    write_csv(&report.provenance_rows(), &PROVENANCE_HEADER, fs::File::create(&files.provenance_csv)?)?;

    let geo = emit_geojson(report, gaz);
    fs::write(&files.geojson, serde_json::to_string_pretty(&geo.document)? + "\n")?;
    let sidecar = dir.join("places_missing_coordinates.txt");
    let missing_coordinates = if geo.missing_coordinates.is_empty() {
        if sidecar.exists() {
            fs::remove_file(&sidecar)?;
        }
        None
    } else {
        log::warn!("{} locations have no coordinates; see {}", geo.missing_coordinates.len(), sidecar.display());
        fs::write(&sidecar, geo.missing_coordinates.join("\n") + "\n")?;
        Some(sidecar)
    };

    let mut stats = extra.clone();
    stats.insert("corpus".into(), serde_json::to_value(&report.stats)?);
    stats.insert(
        "places".into(),
        json!({
            "mentions": report.place_mentions,
            "located_mentions": report.place_counts.values().map(|p| p.mentions).sum::<usize>(),
            "ambiguous_mentions": report.ambiguous.iter().map(|a| a.mentions).sum::<usize>(),
            "distinct_locations": report.place_counts.len(),
            "municipality_mentions": report.municipality_mentions,
            "municipality_share": report.municipality_share,
            "municipality_query_ratio": report.municipality_query_ratio,
            "unweighted_locations": report.unweighted_locations,
            "missing_coordinates": geo.missing_coordinates,
        }),
    );
    stats.insert("persons".into(), serde_json::to_value(&report.person_summary)?);
    fs::write(&files.stats, serde_json::to_string_pretty(&stats)? + "\n")?;
    Ok(ReportFiles { missing_coordinates, ..files })
}
