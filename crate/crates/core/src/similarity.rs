//! String similarity used to put a score on knowledge-base hits that come
//! back without one.

use std::collections::BTreeSet;

use crate::text::{is_numeric_token, normalize_text};

fn lcs_len(a: &[char], b: &[char]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for &ca in a {
        for (j, &cb) in b.iter().enumerate() {
            cur[j + 1] = if ca == cb { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Normalized indel similarity, `2·LCS / (|a| + |b|)`, in `[0, 1]`.
/// Two empty strings score 1.
pub fn ratio(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let total = a.len() + b.len();
    if total == 0 {
        return 1.0;
    }
    2.0 * lcs_len(&a, &b) as f64 / total as f64
}

fn token_set(s: &str) -> BTreeSet<String> {
    normalize_text(s)
        .into_iter()
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()).to_string())
        .filter(|t| !t.is_empty() && !is_numeric_token(t))
        .collect()
}

fn join(parts: &[&String]) -> String {
    parts.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(" ")
}

/// Token-set ratio: compares the shared tokens against each side's shared
/// plus leftover tokens and keeps the best [`ratio`]. Word order, repeated
/// words, punctuation and purely numeric tokens (life dates in authority
/// headings) do not matter. A side whose tokens are all contained in the
/// other scores 1.
pub fn token_set_ratio(a: &str, b: &str) -> f64 {
    let sa = token_set(a);
    let sb = token_set(b);
    if sa.is_empty() || sb.is_empty() {
        return if sa.is_empty() && sb.is_empty() { 1.0 } else { 0.0 };
    }
    let inter: Vec<&String> = sa.intersection(&sb).collect();
    let only_a: Vec<&String> = sa.difference(&sb).collect();
    let only_b: Vec<&String> = sb.difference(&sa).collect();
    if !inter.is_empty() && (only_a.is_empty() || only_b.is_empty()) {
        return 1.0;
    }
    let t0 = join(&inter);
    let with = |rest: &[&String]| {
        let r = join(rest);
        if t0.is_empty() {
            r
        } else {
            format!("{t0} {r}")
        }
    };
    let t1 = with(&only_a);
    let t2 = with(&only_b);
    let mut best = ratio(&t1, &t2);
    if !t0.is_empty() {
        best = best.max(ratio(&t0, &t1)).max(ratio(&t0, &t2));
    }
    best
}
