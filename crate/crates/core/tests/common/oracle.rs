//! Slow, direct re-implementations used to cross-check the library.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use querylens::gazetteer::AliasIndex;
use querylens::ingest::{CorpusStats, Query, SourceField, Summary, Visit};
use querylens::person::{NameOrder, OrderMode};
use querylens::pipeline::Resources;
use querylens::{corpus_stats, extract_candidates, match_places, normalize_text};
use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};

/// Alias table read straight from the TSV text: joined token key to ids.
pub struct OracleGazetteer {
    pub keys: HashMap<String, BTreeSet<String>>,
}

impl OracleGazetteer {
    pub fn from_tsv(locations: &str, aliases: &str, country: Option<&str>) -> Self {
        let mut keys: HashMap<String, BTreeSet<String>> = HashMap::new();
        let mut kept = HashSet::new();
        for line in locations.lines().skip(1).filter(|l| !l.trim().is_empty()) {
            let f: Vec<&str> = line.split('\t').collect();
            if country.is_some_and(|c| !f[3].eq_ignore_ascii_case(c)) {
                continue;
            }
            kept.insert(f[0].to_string());
            keys.entry(normalize_text(f[1]).join(" ")).or_default().insert(f[0].to_string());
        }
        for line in aliases.lines().skip(1).filter(|l| !l.trim().is_empty()) {
            let (id, alias) = line.split_once('\t').unwrap();
            if kept.contains(id) {
                let k = normalize_text(alias).join(" ");
                if !k.is_empty() {
                    keys.entry(k).or_default().insert(id.to_string());
                }
            }
        }
        Self { keys }
    }
}

pub struct OracleLexicons {
    pub given: HashSet<String>,
    pub common: HashSet<String>,
    pub particles: Vec<Vec<String>>,
}

impl OracleLexicons {
    fn surname_like(&self, t: &str) -> bool {
        !t.chars().all(|c| c.is_ascii_digit())
            && t.chars().any(char::is_alphabetic)
            && !self.given.contains(t)
            && !self.common.contains(t)
    }

    fn in_particle(&self, t: &str) -> bool {
        self.particles.iter().flatten().any(|p| p == t)
    }

    fn particle_at(&self, tokens: &[String], at: usize) -> usize {
        self.particles
            .iter()
            .filter(|p| tokens.len() >= at + p.len() && tokens[at..at + p.len()] == p[..])
            .map(Vec::len)
            .max()
            .unwrap_or(0)
    }

    fn particle_ending(&self, tokens: &[String], end: usize) -> usize {
        self.particles
            .iter()
            .filter(|p| end >= p.len() && tokens[end - p.len()..end] == p[..])
            .map(Vec::len)
            .max()
            .unwrap_or(0)
    }
}

fn person_context(tokens: &[String], i: usize, lex: &OracleLexicons) -> bool {
    if i >= 1 && lex.surname_like(&tokens[i - 1]) {
        return true;
    }
    // right side: up to two common words, then a surname-like token
    for skip in 0..=2 {
        let j = i + 1 + skip;
        if j >= tokens.len() {
            return false;
        }
        if tokens[i + 1..j].iter().any(|t| !lex.common.contains(t)) {
            return false;
        }
        if lex.surname_like(&tokens[j]) {
            return true;
        }
    }
    false
}

/// (start, end, ids) of every place match.
pub fn places(tokens: &[String], gaz: &OracleGazetteer, lex: &OracleLexicons) -> Vec<(usize, usize, Vec<String>)> {
    let mut out = Vec::new();
    let mut i = 0;
    'outer: while i < tokens.len() {
        for end in (i + 1..=tokens.len()).rev() {
            if let Some(ids) = gaz.keys.get(&tokens[i..end].join(" ")) {
                let single = end == i + 1;
                let t = &tokens[i];
                let suppressed = single
                    && tokens.len() >= 2
                    && (lex.given.contains(t) || lex.common.contains(t))
                    && person_context(tokens, i, lex);
                if suppressed {
                    continue;
                }
                out.push((i, end, ids.iter().cloned().collect()));
                i = end;
                continue 'outer;
            }
        }
        i += 1;
    }
    out
}

/// A person reading: (given, particle, surname, given_first), spans as
/// half-open pairs.
pub type Reading = ((usize, usize), Option<(usize, usize)>, (usize, usize), bool);

fn extent(r: &Reading) -> (usize, usize) {
    let mut lo = r.0 .0.min(r.2 .0);
    let mut hi = r.0 .1.max(r.2 .1);
    if let Some(p) = r.1 {
        lo = lo.min(p.0);
        hi = hi.max(p.1);
    }
    (lo, hi)
}

pub fn persons(tokens: &[String], lex: &OracleLexicons, max_surname: usize, both_orders: bool) -> Vec<Reading> {
    let n = tokens.len();
    let ok = |t: &String| lex.surname_like(t) && !lex.in_particle(t);
    let mut all: Vec<Reading> = Vec::new();
    if n >= 2 {
        for g in 0..n {
            if !lex.given.contains(&tokens[g]) || lex.in_particle(&tokens[g]) {
                continue;
            }
            let plen = lex.particle_at(tokens, g + 1);
            let s = g + 1 + plen;
            for slen in 1..=max_surname {
                if s + slen <= n && tokens[s..s + slen].iter().all(ok) {
                    let particle = (plen > 0).then_some((g + 1, s));
                    all.push(((g, g + 1), particle, (s, s + slen), true));
                }
            }
            if !both_orders {
                continue;
            }
            for slen in 1..=max_surname.min(g) {
                let s = g - slen;
                if tokens[s..g].iter().all(ok) {
                    let plen = lex.particle_ending(tokens, s);
                    let particle = (plen > 0).then_some((s - plen, s));
                    all.push(((g, g + 1), particle, (s, g), false));
                }
            }
        }
    }
    // repeatedly take the best reading that fits
    let mut kept: Vec<Reading> = Vec::new();
    loop {
        let free: Vec<&Reading> = all
            .iter()
            .filter(|r| {
                let (a, b) = extent(r);
                kept.iter().all(|k| {
                    let (c, d) = extent(k);
                    b <= c || d <= a
                })
            })
            .collect();
        let best = free.into_iter().min_by_key(|r| {
            let (a, b) = extent(r);
            (std::cmp::Reverse(b - a), a, !r.3, r.0)
        });
        match best {
            Some(r) => kept.push(*r),
            None => break,
        }
    }
    kept.sort_by_key(|r| extent(r).0);
    kept
}

fn summary(values: &[usize]) -> Summary {
    if values.is_empty() {
        return Summary::default();
    }
    let n = values.len() as f64;
    let mean = values.iter().map(|&v| v as f64).sum::<f64>() / n;
    let var = values.iter().map(|&v| (v as f64 - mean) * (v as f64 - mean)).sum::<f64>() / n;
    let mut s = values.to_vec();
    s.sort();
    let median =
        if s.len() % 2 == 1 { s[s.len() / 2] as f64 } else { (s[s.len() / 2 - 1] + s[s.len() / 2]) as f64 / 2.0 };
    Summary { mean, stddev: var.sqrt(), median, min: *s.first().unwrap() as f64, max: *s.last().unwrap() as f64 }
}

pub fn stats(visits: &[Visit]) -> CorpusStats {
    let all: Vec<&Query> = visits.iter().flat_map(|v| &v.queries).collect();
    let distinct: BTreeSet<String> = all.iter().map(|q| q.raw_text.to_lowercase()).collect();
    let nonempty: Vec<&Visit> = visits.iter().filter(|v| !v.queries.is_empty()).collect();
    let per_visit: Vec<usize> = nonempty.iter().map(|v| v.queries.len()).collect();
    let distinct_per_visit: Vec<usize> = nonempty
        .iter()
        .map(|v| v.queries.iter().map(|q| q.raw_text.to_lowercase()).collect::<BTreeSet<_>>().len())
        .collect();
    let lens: Vec<usize> = all.iter().map(|q| q.tokens.len()).collect();
    let longest = lens.iter().copied().max().unwrap_or(0);
    let at_most: BTreeMap<usize, usize> =
        (1..=longest).map(|k| (k, lens.iter().filter(|&&l| l <= k).count())).collect();
    CorpusStats {
        total_queries: all.len(),
        distinct_queries: distinct.len(),
        visit_count: nonempty.len(),
        empty_visits: visits.len() - nonempty.len(),
        distinct_per_visit: summary(&distinct_per_visit),
        queries_per_visit: summary(&per_visit),
        tokens_per_query: summary(&lens),
        queries_with_at_most_k_tokens: at_most,
    }
}

/// Summaries compared with a relative tolerance; counts exactly.
pub fn stats_agree(a: &CorpusStats, b: &CorpusStats) -> bool {
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * (1.0 + x.abs().max(y.abs()));
    let same = |x: &Summary, y: &Summary| {
        close(x.mean, y.mean)
            && close(x.stddev, y.stddev)
            && close(x.median, y.median)
            && x.min == y.min
            && x.max == y.max
    };
    a.total_queries == b.total_queries
        && a.distinct_queries == b.distinct_queries
        && a.visit_count == b.visit_count
        && a.empty_visits == b.empty_visits
        && a.queries_with_at_most_k_tokens == b.queries_with_at_most_k_tokens
        && same(&a.distinct_per_visit, &b.distinct_per_visit)
        && same(&a.queries_per_visit, &b.queries_per_visit)
        && same(&a.tokens_per_query, &b.tokens_per_query)
}

/// Random query text over a vocabulary, with varied case and separators.
pub fn random_text<R: Rng>(rng: &mut R, vocab: &[String], max_tokens: usize) -> String {
    let n = rng.random_range(1..=max_tokens);
    let mut s = String::new();
    for i in 0..n {
        if i > 0 {
            s.push_str([" ", " ", "-", ", ", "  ", "'"].choose(rng).unwrap());
        }
        let w = vocab.choose(rng).unwrap();
        if rng.random_bool(0.2) {
            s.push_str(&w.to_uppercase());
        } else {
            s.push_str(w);
        }
    }
    s
}

pub fn random_visits<R: Rng>(rng: &mut R, vocab: &[String], max_queries: usize) -> Vec<Visit> {
    use chrono::{TimeZone, Utc};
    use querylens::ingest::SourceField;
    let total = rng.random_range(0..=max_queries);
    let mut visits: Vec<Visit> = Vec::new();
    let mut made = 0;
    while made < total || visits.is_empty() {
        let k = rng.random_range(0..=6).min(total - made);
        let id = format!("v{}", visits.len());
        let mut queries = Vec::new();
        for j in 0..k {
            let text = if rng.random_bool(0.15) && !queries.is_empty() {
                let prev: &Query = &queries[rng.random_range(0..queries.len())];
                prev.raw_text.to_uppercase()
            } else {
                random_text(rng, vocab, 6)
            };
            let ts = Utc.timestamp_opt(1_500_000_000 + (made + j) as i64 * 60, 0).unwrap();
            if let Some(q) = Query::new(&text, &id, ts, SourceField::All) {
                queries.push(q);
            }
        }
        made += k;
        visits.push(Visit { visit_id: id, visitor_id: "u".into(), queries });
        if total == 0 {
            break;
        }
    }
    visits
}

const LETTERS: &[char] = &[
    'a', 'b', 'c', 'd', 'e', 'f', 'g', 'h', 'i', 'j', 'k', 'l', 'm', 'n', 'o', 'p', 'q', 'r', 's', 't', 'u', 'v', 'w',
    'x', 'y', 'z', 'é', 'è', 'ê', 'ë', 'à', 'â', 'ç', 'ï', 'î', 'ô', 'ö', 'ü', 'û',
];

/// One insertion, deletion or substitution.
pub fn single_edit<R: Rng>(rng: &mut R, token: &str) -> String {
    let mut chars: Vec<char> = token.chars().collect();
    loop {
        match rng.random_range(0..3) {
            0 => {
                let at = rng.random_range(0..=chars.len());
                chars.insert(at, *LETTERS.choose(rng).unwrap());
            }
            1 if chars.len() > 1 => {
                chars.remove(rng.random_range(0..chars.len()));
            }
            2 => {
                let at = rng.random_range(0..chars.len());
                chars[at] = *LETTERS.choose(rng).unwrap();
            }
            _ => continue,
        }
        return chars.iter().collect();
    }
}

/// True when some alias covers position `k` of `tokens`.
pub fn alias_covers(index: &AliasIndex, tokens: &[String], k: usize) -> bool {
    (0..=k).any(|a| (k + 1..=tokens.len()).any(|b| index.get(&tokens[a..b]).is_some()))
}

/// Outcome of editing aliases until `wanted` edits are genuine misspellings.
#[derive(Debug, Default)]
pub struct EditRun {
    pub tried: usize,
    pub accepted: usize,
    pub single_token: usize,
    /// Edited spellings with a match covering the edited token.
    pub matched: Vec<String>,
}

pub fn edit_run<R: Rng>(
    rng: &mut R,
    gaz: &querylens::Gazetteer,
    lex: &querylens::SuppressionLexicons,
    wanted: usize,
) -> EditRun {
    let index = gaz.index();
    let aliases: Vec<Vec<String>> = index.entries().into_iter().map(|(k, _)| k.clone()).collect();
    let mut run = EditRun::default();
    while run.accepted < wanted {
        run.tried += 1;
        let mut tokens = aliases.choose(rng).unwrap().clone();
        let k = rng.random_range(0..tokens.len());
        let edited = single_edit(rng, &tokens[k]);
        if edited == tokens[k] {
            continue;
        }
        tokens[k] = edited;
        // an edit that lands on another real spelling is not a misspelling
        if alias_covers(index, &tokens, k) {
            continue;
        }
        run.accepted += 1;
        let matches = querylens::gazetteer::match_tokens(&tokens, gaz, lex);
        if matches.iter().any(|m| m.span.start <= k && k < m.span.end) || (tokens.len() == 1 && !matches.is_empty()) {
            run.matched.push(tokens.join(" "));
        }
        if tokens.len() == 1 {
            run.single_token += 1;
        }
    }
    run
}

pub fn lexicons_of(res: &Resources) -> OracleLexicons {
    OracleLexicons {
        given: res.lexicons.given_names.iter().map(String::from).collect(),
        common: res.lexicons.common_words.iter().map(String::from).collect(),
        particles: res.particles.sequences().to_vec(),
    }
}

pub fn bundled_gazetteer() -> OracleGazetteer {
    let loc = std::fs::read_to_string(super::fixture("gazetteer/locations.tsv")).unwrap();
    let ali = std::fs::read_to_string(super::fixture("gazetteer/aliases.tsv")).unwrap();
    OracleGazetteer::from_tsv(&loc, &ali, Some("BE"))
}

/// Words drawn from every class the matchers care about.
pub fn vocabulary<R: Rng>(res: &Resources, rng: &mut R) -> Vec<String> {
    let mut v: Vec<String> = Vec::new();
    let aliases: Vec<String> = res.gazetteer.index().entries().into_iter().map(|(k, _)| k.join(" ")).collect();
    v.extend(aliases.choose_multiple(rng, 60).cloned());
    for (k, _) in res.gazetteer.index().entries() {
        if k.len() > 1 && rng.random_bool(0.05) {
            v.extend(k.iter().cloned());
        }
    }
    let given: Vec<&str> = res.lexicons.given_names.iter().collect();
    v.extend(given.choose_multiple(rng, 25).map(|s| s.to_string()));
    let common: Vec<&str> = res.lexicons.common_words.iter().collect();
    v.extend(common.choose_multiple(rng, 25).map(|s| s.to_string()));
    v.extend(
        ["herve", "hervé", "van", "van der", "de la", "dumont", "pollet", "1914", "xiv", "verhaeren", "la"]
            .map(String::from),
    );
    v
}

fn random_queries<R: Rng>(rng: &mut R, vocab: &[String], max_queries: usize) -> Vec<(String, Query)> {
    (0..rng.random_range(1..=max_queries))
        .filter_map(|_| {
            let text = random_text(rng, vocab, 7);
            let q = Query::new(&text, "v", chrono::DateTime::UNIX_EPOCH, SourceField::All)?;
            Some((text, q))
        })
        .collect()
}

/// Place matches against the oracle on `corpora` random corpora. Returns
/// the number of queries compared.
pub fn places_agree(seed: u64, corpora: usize, max_queries: usize) -> Result<usize, String> {
    let res = super::resources();
    let gaz = bundled_gazetteer();
    let lex = lexicons_of(&res);
    let mut rng = StdRng::seed_from_u64(seed);
    let mut seen = 0;
    for corpus in 0..corpora {
        let vocab = vocabulary(&res, &mut rng);
        for (qi, (text, q)) in random_queries(&mut rng, &vocab, max_queries).into_iter().enumerate() {
            let got: Vec<_> = match_places(qi, &q, &res.gazetteer, &res.lexicons)
                .into_iter()
                .map(|m| (m.span.start, m.span.end, m.location_ids))
                .collect();
            let want = places(&q.tokens, &gaz, &lex);
            if got != want {
                return Err(format!("corpus {corpus}, `{text}`: {got:?} != {want:?}"));
            }
            seen += 1;
        }
    }
    Ok(seen)
}

/// Person candidates against the oracle, cycling through order modes and
/// surname lengths.
pub fn persons_agree(seed: u64, corpora: usize, max_queries: usize) -> Result<usize, String> {
    let mut res = super::resources();
    let lex = lexicons_of(&res);
    let mut rng = StdRng::seed_from_u64(seed);
    let mut seen = 0;
    for corpus in 0..corpora {
        let both = corpus % 3 != 0;
        res.person.order = if both { OrderMode::Both } else { OrderMode::GivenFirst };
        res.person.max_surname_tokens = 1 + corpus % 3;
        let vocab = vocabulary(&res, &mut rng);
        for (qi, (text, q)) in random_queries(&mut rng, &vocab, max_queries).into_iter().enumerate() {
            let got: Vec<Reading> = extract_candidates(qi, &q, &res.lexicons, &res.particles, &res.person)
                .into_iter()
                .map(|c| {
                    let s = c.spans;
                    (
                        (s.given.start, s.given.end),
                        s.particle.map(|p| (p.start, p.end)),
                        (s.surname.start, s.surname.end),
                        s.order == NameOrder::GivenFirst,
                    )
                })
                .collect();
            let want = persons(&q.tokens, &lex, res.person.max_surname_tokens, both);
            if got != want {
                return Err(format!("corpus {corpus}, `{text}`: {got:?} != {want:?}"));
            }
            seen += 1;
        }
    }
    Ok(seen)
}

/// `corpus_stats` against the oracle on random visit sets.
pub fn corpus_stats_agree(seed: u64, corpora: usize, max_queries: usize) -> Result<usize, String> {
    let res = super::resources();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut seen = 0;
    for corpus in 0..corpora {
        let vocab = vocabulary(&res, &mut rng);
        let visits = random_visits(&mut rng, &vocab, max_queries);
        let got = corpus_stats(&visits);
        let want = stats(&visits);
        let total: usize = visits.iter().map(|v| v.queries.len()).sum();
        if !stats_agree(&got, &want) || got.total_queries != total {
            return Err(format!("corpus {corpus}: {got:?} != {want:?}"));
        }
        seen += total;
    }
    Ok(seen)
}
