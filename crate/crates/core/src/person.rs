//! Full-name candidates triggered by a known given name.
//!
//! A given name licenses reading a family name next to it: to its right
//! (`august van turnhout`) or, since catalogue-style queries often put the
//! family name first, to its left (`van loo prosper`). The family name is an
//! optional particle sequence followed by one or two tokens that are neither
//! given names, common words nor particles.

use serde::{Deserialize, Serialize};

use crate::gazetteer::Span;
use crate::ingest::Query;
use crate::lexicon::{ParticleList, SuppressionLexicons};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NameOrder {
    GivenFirst,
    SurnameFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderMode {
    GivenFirst,
    Both,
}

impl std::str::FromStr for OrderMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "given-first" => Ok(Self::GivenFirst),
            "both" => Ok(Self::Both),
            other => Err(format!("unknown name order `{other}` (expected given-first|both)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersonOptions {
    pub max_surname_tokens: usize,
    pub order: OrderMode,
}

impl Default for PersonOptions {
    fn default() -> Self {
        Self { max_surname_tokens: 2, order: OrderMode::Both }
    }
}

/// Spans of one candidate over bare tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NameSpans {
    pub given: Span,
    pub particle: Option<Span>,
    pub surname: Span,
    pub order: NameOrder,
}

impl NameSpans {
    /// The whole name, given and family parts together.
    pub fn span(&self) -> Span {
        let mut start = self.given.start.min(self.surname.start);
        let mut end = self.given.end.max(self.surname.end);
        if let Some(p) = self.particle {
            start = start.min(p.start);
            end = end.max(p.end);
        }
        Span::new(start, end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateName {
    pub query: usize,
    pub query_text: String,
    #[serde(flatten)]
    pub spans: NameSpans,
    /// Tokens of the name in query order.
    pub surface: String,
}

impl CandidateName {
    /// Family-name-first rendering of a given-first surface and vice versa.
    pub fn inverted(&self, tokens: &[String]) -> String {
        let s = &self.spans;
        let family_start = s.particle.map_or(s.surname.start, |p| p.start.min(s.surname.start));
        let family = tokens[family_start..s.surname.end.max(family_start)].join(" ");
        let given = tokens[s.given.start..s.given.end].join(" ");
        match s.order {
            NameOrder::GivenFirst => format!("{family} {given}"),
            NameOrder::SurnameFirst => format!("{given} {family}"),
        }
    }
}

fn surname_token_ok(tok: &str, lex: &SuppressionLexicons, particles: &ParticleList) -> bool {
    lex.is_plausible_surname(tok) && !particles.contains_token(tok)
}

/// Every reading licensed by the rules, before overlap resolution.
pub fn enumerate_readings(
    tokens: &[String],
    lex: &SuppressionLexicons,
    particles: &ParticleList,
    opts: &PersonOptions,
) -> Vec<NameSpans> {
    let n = tokens.len();
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let ok = |t: &String| surname_token_ok(t, lex, particles);
    for g in 0..n {
        if !lex.is_given_name(&tokens[g]) || particles.contains_token(&tokens[g]) {
            continue;
        }
        let given = Span::new(g, g + 1);

        // given name, particle?, family name
        let p = g + 1;
        let plen = particles.longest_at(tokens, p).unwrap_or(0);
        let s = p + plen;
        for slen in 1..=opts.max_surname_tokens {
            if s + slen > n || !ok(&tokens[s + slen - 1]) {
                break;
            }
            out.push(NameSpans {
                given,
                particle: (plen > 0).then(|| Span::new(p, s)),
                surname: Span::new(s, s + slen),
                order: NameOrder::GivenFirst,
            });
        }

        if opts.order == OrderMode::GivenFirst {
            continue;
        }
        // particle?, family name, given name
        for slen in 1..=opts.max_surname_tokens {
            if slen > g || !ok(&tokens[g - slen]) {
                break;
            }
            let s = g - slen;
            let plen = particles.longest_ending_at(tokens, s).unwrap_or(0);
            out.push(NameSpans {
                given,
                particle: (plen > 0).then(|| Span::new(s - plen, s)),
                surname: Span::new(s, g),
                order: NameOrder::SurnameFirst,
            });
        }
    }
    out
}

/// Longest name wins; ties go to the earlier start, then to given-first
/// order, then to the earlier given name. Result is in query order.
pub fn resolve_overlaps(mut readings: Vec<NameSpans>) -> Vec<NameSpans> {
    readings.sort_by(|a, b| {
        let (sa, sb) = (a.span(), b.span());
        sb.len().cmp(&sa.len()).then(sa.start.cmp(&sb.start)).then(a.order.cmp(&b.order)).then(a.given.cmp(&b.given))
    });
    let mut kept: Vec<NameSpans> = Vec::new();
    for r in readings {
        if kept.iter().all(|k| !k.span().overlaps(&r.span())) {
            kept.push(r);
        }
    }
    kept.sort_by_key(|r| r.span().start);
    kept
}

pub fn extract_spans(
    tokens: &[String],
    lex: &SuppressionLexicons,
    particles: &ParticleList,
    opts: &PersonOptions,
) -> Vec<NameSpans> {
    resolve_overlaps(enumerate_readings(tokens, lex, particles, opts))
}

pub fn extract_candidates(
    query_index: usize,
    query: &Query,
    lex: &SuppressionLexicons,
    particles: &ParticleList,
    opts: &PersonOptions,
) -> Vec<CandidateName> {
    extract_spans(&query.tokens, lex, particles, opts)
        .into_iter()
        .map(|spans| {
            let whole = spans.span();
            CandidateName {
                query: query_index,
                query_text: query.raw_text.clone(),
                spans,
                surface: query.tokens[whole.start..whole.end].join(" "),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::Lexicon;
    use crate::text::normalize_text;

    fn lex() -> SuppressionLexicons {
        SuppressionLexicons::new(
            Lexicon::from_words("common", ["la", "le", "journal", "et", "guerre"]),
            Lexicon::from_words("given", ["august", "adeline", "pole", "prosper", "victor", "hugo", "hervé"]),
        )
    }

    fn particles() -> ParticleList {
        ParticleList::new(["van", "von", "de", "van den", "van der", "de la"])
    }

    fn run(text: &str) -> Vec<(String, NameOrder)> {
        let t = normalize_text(text);
        extract_spans(&t, &lex(), &particles(), &PersonOptions::default())
            .into_iter()
            .map(|s| {
                let w = s.span();
                (t[w.start..w.end].join(" "), s.order)
            })
            .collect()
    }

    #[test]
    fn particle_name() {
        let t = normalize_text("august van turnhout");
        let got = extract_spans(&t, &lex(), &particles(), &PersonOptions::default());
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].given, Span::new(0, 1));
        assert_eq!(got[0].particle, Some(Span::new(1, 2)));
        assert_eq!(got[0].surname, Span::new(2, 3));
    }

    #[test]
    fn two_token_particle_preferred() {
        let t = normalize_text("august van der turnhout");
        let got = extract_spans(&t, &lex(), &particles(), &PersonOptions::default());
        assert_eq!(got[0].particle, Some(Span::new(1, 3)));
    }

    #[test]
    fn single_token_query() {
        assert!(run("bruxelles").is_empty());
        assert!(run("august").is_empty());
    }

    #[test]
    fn known_false_positive_is_extracted() {
        assert_eq!(run("pole nord"), vec![("pole nord".into(), NameOrder::GivenFirst)]);
    }

    #[test]
    fn unknown_person() {
        let t = normalize_text("Adeline Pollet");
        let got = extract_spans(&t, &lex(), &particles(), &PersonOptions::default());
        assert_eq!(got[0].given, Span::new(0, 1));
        assert_eq!(got[0].surname, Span::new(1, 2));
        assert_eq!(got[0].particle, None);
    }

    #[test]
    fn inverted_order() {
        assert_eq!(run("van loo prosper"), vec![("van loo prosper".into(), NameOrder::SurnameFirst)]);
        assert_eq!(run("loo prosper"), vec![("loo prosper".into(), NameOrder::SurnameFirst)]);
        let t = normalize_text("loo prosper");
        let given_first = PersonOptions { order: OrderMode::GivenFirst, ..Default::default() };
        assert!(extract_spans(&t, &lex(), &particles(), &given_first).is_empty());
    }

    #[test]
    fn two_token_surname_and_cap() {
        assert_eq!(run("adeline pollet dubois"), vec![("adeline pollet dubois".into(), NameOrder::GivenFirst)]);
        let t = normalize_text("adeline pollet dubois");
        let one = PersonOptions { max_surname_tokens: 1, ..Default::default() };
        let got = extract_spans(&t, &lex(), &particles(), &one);
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].span(), Span::new(0, 2));
    }

    #[test]
    fn given_names_are_not_surnames() {
        // both tokens are given names: no family name to read
        assert!(run("victor hugo").is_empty());
        assert!(run("journal guerre").is_empty());
    }

    #[test]
    fn overlapping_readings_resolved() {
        // "pollet adeline dupont": adeline dupont (given-first) and pollet adeline
        // (surname-first) tie on length; the earlier start wins
        let got = run("pollet adeline dupont");
        assert_eq!(got.len(), 1);
        assert_eq!(got[0], ("pollet adeline".into(), NameOrder::SurnameFirst));
    }

    #[test]
    fn several_names_in_query_order() {
        let got = run("prosper dubois et adeline pollet");
        assert_eq!(got.iter().map(|g| g.0.as_str()).collect::<Vec<_>>(), vec!["prosper dubois", "adeline pollet"]);
    }

    #[test]
    fn inverted_rendering() {
        let t = normalize_text("august van turnhout");
        let spans = extract_spans(&t, &lex(), &particles(), &PersonOptions::default())[0];
        let c = CandidateName { query: 0, query_text: String::new(), spans, surface: t.join(" ") };
        assert_eq!(c.inverted(&t), "van turnhout august");
    }
}
