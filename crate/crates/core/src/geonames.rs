//! Conversion of a GeoNames country dump into the gazetteer's locations and
//! aliases files.
//!
//! The dump is the 19-column tab-separated `geoname` table. Administrative
//! units of the fourth level become municipalities and populated places
//! become districts; other feature codes are skipped.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, BufReader, Read, Write};

use crate::gazetteer::LocationKind;
use crate::text::normalized_key;

#[derive(Debug, thiserror::Error)]
pub enum GeonamesError {
    #[error("line {line}: expected 19 columns, found {found}")]
    Columns { line: usize, found: usize },
    #[error("line {line}: bad {field} `{value}`")]
    Field { line: usize, field: &'static str, value: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeonamesPlace {
    pub geonameid: String,
    pub name: String,
    pub asciiname: String,
    pub alternatenames: Vec<String>,
    pub latitude: f64,
    pub longitude: f64,
    pub feature_code: String,
    pub country: String,
    pub population: u64,
}

pub fn kind_for(feature_code: &str) -> Option<LocationKind> {
    match feature_code {
        "ADM4" => Some(LocationKind::Municipality),
        c if c.starts_with("PPL") => Some(LocationKind::District),
        _ => None,
    }
}

pub fn parse_line(line: &str, n: usize) -> Result<GeonamesPlace, GeonamesError> {
    let f: Vec<&str> = line.split('\t').collect();
    if f.len() != 19 {
        return Err(GeonamesError::Columns { line: n, found: f.len() });
    }
    let num = |i: usize, field: &'static str| -> Result<f64, GeonamesError> {
        f[i].parse().map_err(|_| GeonamesError::Field { line: n, field, value: f[i].into() })
    };
    Ok(GeonamesPlace {
        geonameid: f[0].into(),
        name: f[1].into(),
        asciiname: f[2].into(),
        alternatenames: f[3].split(',').map(str::trim).filter(|s| !s.is_empty()).map(Into::into).collect(),
        latitude: num(4, "latitude")?,
        longitude: num(5, "longitude")?,
        feature_code: f[7].into(),
        country: f[8].into(),
        population: if f[14].is_empty() {
            0
        } else {
            f[14].parse().map_err(|_| GeonamesError::Field { line: n, field: "population", value: f[14].into() })?
        },
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConvertSummary {
    pub locations: usize,
    pub aliases: usize,
    pub skipped_feature: usize,
    pub skipped_country: usize,
}

/// Converts a dump. `id_map` renames geoname ids (for instance to official
/// municipality codes); unmapped ids are kept as they are.
pub fn convert<R: Read, L: Write, A: Write>(
    dump: R,
    country: Option<&str>,
    id_map: &HashMap<String, String>,
    mut locations: L,
    mut aliases: A,
) -> Result<ConvertSummary, GeonamesError> {
    let mut summary = ConvertSummary::default();
    let mut rows: BTreeMap<String, (GeonamesPlace, LocationKind)> = BTreeMap::new();
    for (i, line) in BufReader::new(dump).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let place = parse_line(&line, i + 1)?;
        if country.is_some_and(|c| !place.country.eq_ignore_ascii_case(c)) {
            summary.skipped_country += 1;
            continue;
        }
        let Some(kind) = kind_for(&place.feature_code) else {
            summary.skipped_feature += 1;
            continue;
        };
        let id = id_map.get(&place.geonameid).cloned().unwrap_or_else(|| place.geonameid.clone());
        rows.insert(id, (place, kind));
    }

    writeln!(locations, "location_id\tcanonical_name\tkind\tcountry\twikidata_id\tlat\tlon\tpopulation")?;
    writeln!(aliases, "location_id\talias")?;
    for (id, (p, kind)) in &rows {
        let pop = if p.population > 0 { p.population.to_string() } else { String::new() };
        writeln!(locations, "{id}\t{}\t{kind}\t{}\t\t{}\t{}\t{pop}", p.name, p.country, p.latitude, p.longitude)?;
        summary.locations += 1;
        let mut seen = BTreeSet::from([normalized_key(&p.name)]);
        for alias in std::iter::once(&p.asciiname).chain(&p.alternatenames) {
            // alternatenames mixes in codes and URLs
            if alias.contains("://") || alias.contains('\t') {
                continue;
            }
            let key = normalized_key(alias);
            if !key.is_empty() && seen.insert(key) {
                writeln!(aliases, "{id}\t{alias}")?;
                summary.aliases += 1;
            }
        }
    }
    Ok(summary)
}
