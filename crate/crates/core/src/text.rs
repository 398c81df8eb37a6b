//! Token normalization shared by every matcher in the crate.
//!
//! Queries, gazetteer aliases, lexicon entries and gold surfaces all pass
//! through [`normalize_text`] so that equality on token sequences is the only
//! comparison the matchers need. Case is folded, diacritics are kept.

/// Characters that split tokens in addition to Unicode whitespace.
const SEPARATORS: &[char] = &[
    // hyphen and dash family
    '-', '\u{2010}', '\u{2011}', '\u{2012}', '\u{2013}', '\u{2014}', '\u{2212}', // apostrophes
    '\'', '\u{2019}', '\u{2018}', '\u{02BC}', '`', '\u{00B4}',
    // light punctuation that users type around search terms
    '"', '\u{201C}', '\u{201D}', '\u{00AB}', '\u{00BB}', ',', ';', '(', ')', '[', ']',
];

#[inline]
pub fn is_separator(c: char) -> bool {
    c.is_whitespace() || SEPARATORS.contains(&c)
}

/// Case-folds `raw` and splits it on whitespace, hyphens and apostrophes.
///
/// Never yields an empty token. An input made only of separators yields an
/// empty vector.
pub fn normalize_text(raw: &str) -> Vec<String> {
    raw.split(is_separator).filter(|t| !t.is_empty()).map(str::to_lowercase).collect()
}

/// Normalized tokens joined with single spaces; the canonical spelling key.
pub fn normalized_key(raw: &str) -> String {
    normalize_text(raw).join(" ")
}

/// True when every character of `token` is an ASCII or Unicode decimal digit.
pub fn is_numeric_token(token: &str) -> bool {
    !token.is_empty() && token.chars().all(char::is_numeric)
}

/// Locates every contiguous occurrence of `needle` in `haystack`, returning
/// the start offsets.
pub fn find_subsequence(haystack: &[String], needle: &[String]) -> Vec<usize> {
    if needle.is_empty() || needle.len() > haystack.len() {
        return Vec::new();
    }
    haystack.windows(needle.len()).enumerate().filter(|(_, w)| *w == needle).map(|(i, _)| i).collect()
}
