//! Pipeline configuration: a TOML file, overridden by command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use querylens::ingest::{default_query_params, ColumnSchema, QueryParam};
use querylens::kb::{EndpointConfig, KbSource};
use querylens::person::OrderMode;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum KbBackend {
    Fixture,
    Live,
}

/// Knowledge-base settings as written in the file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KbFile {
    pub backend: Option<KbBackend>,
    pub fixture: Option<PathBuf>,
    pub cache: Option<PathBuf>,
    pub query_inverted: Option<bool>,
    #[serde(default)]
    pub thresholds: BTreeMap<KbSource, f64>,
    pub user_agent: Option<String>,
    pub timeout_secs: Option<u64>,
    pub wikidata: Option<EndpointConfig>,
    pub viaf: Option<EndpointConfig>,
}

/// The file as written; every field optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub export: Option<PathBuf>,
    pub delimiter: Option<String>,
    pub columns: Option<ColumnSchema>,
    pub query_params: Option<Vec<QueryParam>>,
    pub gazetteer_locations: Option<PathBuf>,
    pub gazetteer_aliases: Option<PathBuf>,
    pub given_names: Option<PathBuf>,
    pub common_words: Option<PathBuf>,
    pub particles: Option<PathBuf>,
    pub gsc: Option<PathBuf>,
    pub gsc_delimiter: Option<String>,
    pub country: Option<String>,
    pub threshold: Option<f64>,
    pub error_budget: Option<f64>,
    pub order: Option<OrderMode>,
    pub max_surname_tokens: Option<usize>,
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub kb: KbFile,
}

/// Values given on the command line; they win over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out_dir: Option<PathBuf>,
    pub threshold: Option<f64>,
    pub kb_backend: Option<KbBackend>,
    pub country: Option<String>,
    pub order: Option<OrderMode>,
    pub error_budget: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KbConfig {
    pub backend: KbBackend,
    pub fixture: Option<PathBuf>,
    pub cache: Option<PathBuf>,
    pub query_inverted: bool,
    pub thresholds: BTreeMap<KbSource, f64>,
    pub user_agent: String,
    pub timeout_secs: u64,
    pub wikidata: Option<EndpointConfig>,
    pub viaf: Option<EndpointConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub export: Option<PathBuf>,
    pub delimiter: char,
    pub columns: ColumnSchema,
    pub query_params: Vec<QueryParam>,
    pub gazetteer_locations: Option<PathBuf>,
    pub gazetteer_aliases: Option<PathBuf>,
    pub given_names: Option<PathBuf>,
    pub common_words: Option<PathBuf>,
    pub particles: Option<PathBuf>,
    pub gsc: Option<PathBuf>,
    pub gsc_delimiter: char,
    pub country: Option<String>,
    pub threshold: f64,
    /// Largest tolerated share of malformed export rows.
    pub error_budget: f64,
    pub order: OrderMode,
    pub max_surname_tokens: usize,
    /// Where outputs go. Left out of the hash: moving the outputs does not
    /// change what they contain.
    #[serde(skip)]
    pub out_dir: PathBuf,
    pub kb: KbConfig,
}

fn parse_delimiter(s: &str) -> Result<char> {
    match s {
        "tab" | "\\t" | "\t" => Ok('\t'),
        "comma" | "," => Ok(','),
        "semicolon" | ";" => Ok(';'),
        other if other.chars().count() == 1 && other.is_ascii() => Ok(other.chars().next().unwrap()),
        other => bail!("unsupported delimiter `{other}`"),
    }
}

fn rebase(base: &Path, p: Option<PathBuf>) -> Option<PathBuf> {
    p.map(|p| if p.is_absolute() { p } else { base.join(p) })
}

impl PipelineConfig {
    /// Reads `path` (if any) and applies `ov`. Relative paths in the file
    /// are taken relative to the file's directory.
    pub fn load(path: Option<&Path>, ov: &Overrides) -> Result<Self> {
        let (file, base) = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                let file: ConfigFile =
                    toml::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?;
                let base = p.parent().map(Path::to_path_buf).unwrap_or_default();
                (file, base)
            }
            None => (ConfigFile::default(), PathBuf::new()),
        };
        Self::resolve(file, &base, ov)
    }

    pub fn resolve(file: ConfigFile, base: &Path, ov: &Overrides) -> Result<Self> {
        let kb = file.kb;
        let cfg = Self {
            export: rebase(base, file.export),
            delimiter: parse_delimiter(file.delimiter.as_deref().unwrap_or(","))?,
            columns: file.columns.unwrap_or_default(),
            query_params: file.query_params.unwrap_or_else(default_query_params),
            gazetteer_locations: rebase(base, file.gazetteer_locations),
            gazetteer_aliases: rebase(base, file.gazetteer_aliases),
            given_names: rebase(base, file.given_names),
            common_words: rebase(base, file.common_words),
            particles: rebase(base, file.particles),
            gsc: rebase(base, file.gsc),
            gsc_delimiter: parse_delimiter(file.gsc_delimiter.as_deref().unwrap_or("tab"))?,
            country: ov.country.clone().or(file.country).filter(|c| !c.is_empty() && c != "*"),
            threshold: ov.threshold.or(file.threshold).unwrap_or(0.9),
            error_budget: ov.error_budget.or(file.error_budget).unwrap_or(0.05),
            order: ov.order.or(file.order).unwrap_or(OrderMode::Both),
            max_surname_tokens: file.max_surname_tokens.unwrap_or(2),
            out_dir: ov.out_dir.clone().or(file.out_dir.map(|p| base.join(p))).unwrap_or_else(|| "out".into()),
            kb: KbConfig {
                backend: ov.kb_backend.or(kb.backend).unwrap_or(KbBackend::Fixture),
                fixture: rebase(base, kb.fixture),
                cache: rebase(base, kb.cache),
                query_inverted: kb.query_inverted.unwrap_or(false),
                thresholds: kb.thresholds,
                user_agent: kb.user_agent.unwrap_or_else(|| format!("querylens/{}", env!("CARGO_PKG_VERSION"))),
                timeout_secs: kb.timeout_secs.unwrap_or(30),
                wikidata: kb.wikidata,
                viaf: kb.viaf,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for t in std::iter::once(self.threshold).chain(self.kb.thresholds.values().copied()) {
            if !(t > 0.0 && t <= 1.0) {
                bail!("threshold {t} outside (0, 1]");
            }
        }
        if !(0.0..=1.0).contains(&self.error_budget) {
            bail!("error budget {} outside [0, 1]", self.error_budget);
        }
        if self.max_surname_tokens == 0 {
            bail!("max_surname_tokens must be at least 1");
        }
        let paths = [
            ("export", &self.export),
            ("gazetteer_locations", &self.gazetteer_locations),
            ("gazetteer_aliases", &self.gazetteer_aliases),
            ("given_names", &self.given_names),
            ("common_words", &self.common_words),
            ("particles", &self.particles),
            ("gsc", &self.gsc),
            ("kb.fixture", &self.kb.fixture),
        ];
        for (name, p) in paths {
            if let Some(p) = p {
                if !p.exists() {
                    bail!("{name}: {} does not exist", p.display());
                }
            }
        }
        Ok(())
    }

    /// A required path, or an error naming the missing setting.
    pub fn need<'a>(&self, name: &str, p: &'a Option<PathBuf>) -> Result<&'a Path> {
        p.as_deref().with_context(|| format!("`{name}` is not set in the configuration"))
    }

    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, ov: &Overrides) -> Result<PipelineConfig> {
        PipelineConfig::resolve(toml::from_str(text)?, Path::new("/base"), ov)
    }

    #[test]
    fn defaults() {
        let c = parse("", &Overrides::default()).unwrap();
        assert_eq!(c.threshold, 0.9);
        assert_eq!(c.delimiter, ',');
        assert_eq!(c.kb.backend, KbBackend::Fixture);
        assert_eq!(c.order, OrderMode::Both);
        assert_eq!(c.query_params.len(), 4);
    }

    #[test]
    fn flags_beat_file() {
        let ov = Overrides { threshold: Some(0.8), country: Some("NL".into()), ..Default::default() };
        let c = parse("threshold = 0.95\ncountry = \"BE\"\n", &ov).unwrap();
        assert_eq!(c.threshold, 0.8);
        assert_eq!(c.country.as_deref(), Some("NL"));
        let c = parse("threshold = 0.95\n", &Overrides::default()).unwrap();
        assert_eq!(c.threshold, 0.95);
    }

    #[test]
    fn threshold_range() {
        assert!(parse("threshold = 0.0", &Overrides::default()).is_err());
        assert!(parse("threshold = 1.0", &Overrides::default()).is_ok());
        assert!(parse("[kb.thresholds]\nVIAF = 1.5", &Overrides::default()).is_err());
    }

    #[test]
    fn missing_path_rejected() {
        let err = parse("export = \"nope.csv\"", &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("does not exist"));
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(parse("treshold = 0.9", &Overrides::default()).is_err());
    }

    #[test]
    fn hash_ignores_out_dir() {
        let a = parse("", &Overrides { out_dir: Some("a".into()), ..Default::default() }).unwrap();
        let b = parse("", &Overrides { out_dir: Some("b".into()), ..Default::default() }).unwrap();
        let c = parse("threshold = 0.8", &Overrides::default()).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn delimiters() {
        assert_eq!(parse_delimiter("tab").unwrap(), '\t');
        assert_eq!(parse_delimiter(";").unwrap(), ';');
        assert!(parse_delimiter("ab").is_err());
    }
}
