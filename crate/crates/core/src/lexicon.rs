//! Word lists: given names, common words, surname particles.

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Read};

use crate::text::{is_numeric_token, normalize_text};

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("reading lexicon: {0}")]
    Io(#[from] std::io::Error),
    #[error("lexicon `{0}` is empty")]
    Empty(String),
}

/// A set of normalized single-token words.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    entries: HashSet<String>,
    source: String,
    /// Lines that normalized to several tokens and were left out.
    pub skipped_multi_token: usize,
}

impl Lexicon {
    pub fn from_words<I, S>(source: &str, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut lex = Lexicon { source: source.to_string(), ..Default::default() };
        for w in words {
            lex.insert_line(w.as_ref());
        }
        lex
    }

    /// One entry per line, `#` comments and blank lines ignored.
    pub fn read<R: Read>(source: &str, reader: R) -> Result<Self, LexiconError> {
        let mut lex = Lexicon { source: source.to_string(), ..Default::default() };
        for line in BufReader::new(reader).lines() {
            lex.insert_line(&line?);
        }
        if lex.entries.is_empty() {
            return Err(LexiconError::Empty(source.to_string()));
        }
        Ok(lex)
    }

    fn insert_line(&mut self, line: &str) {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            return;
        }
        let mut toks = normalize_text(line);
        match toks.len() {
            0 => {}
            1 => {
                self.entries.insert(toks.pop().unwrap());
            }
            _ => self.skipped_multi_token += 1,
        }
    }

    pub fn contains(&self, token: &str) -> bool {
        self.entries.contains(token)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(String::as_str)
    }
}

/// Lexicons consulted by the place matcher's first-name rule and by the
/// person extractor's surname rule.
#[derive(Debug, Clone, Default)]
pub struct SuppressionLexicons {
    pub common_words: Lexicon,
    pub given_names: Lexicon,
}

impl SuppressionLexicons {
    pub fn new(common_words: Lexicon, given_names: Lexicon) -> Self {
        Self { common_words, given_names }
    }

    pub fn is_given_name(&self, token: &str) -> bool {
        self.given_names.contains(token)
    }

    pub fn is_common_word(&self, token: &str) -> bool {
        self.common_words.contains(token)
    }

    /// A token that could stand as (part of) a family name: alphabetic,
    /// neither a given name nor a common word.
    pub fn is_plausible_surname(&self, token: &str) -> bool {
        !is_numeric_token(token)
            && token.chars().any(char::is_alphabetic)
            && !self.is_given_name(token)
            && !self.is_common_word(token)
    }
}

/// Surname particles such as `van`, `van der`, `de la`, kept longest first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParticleList {
    sequences: Vec<Vec<String>>,
}

impl ParticleList {
    pub fn new<I, S>(sequences: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut seqs: Vec<Vec<String>> =
            sequences.into_iter().map(|s| normalize_text(s.as_ref())).filter(|s| !s.is_empty()).collect();
        seqs.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        seqs.dedup();
        Self { sequences: seqs }
    }

    /// One space-separated sequence per line.
    pub fn read<R: Read>(reader: R) -> Result<Self, LexiconError> {
        let lines = BufReader::new(reader)
            .lines()
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .filter(|l| !l.trim().starts_with('#'));
        let list = Self::new(lines);
        if list.sequences.is_empty() {
            return Err(LexiconError::Empty("particles".into()));
        }
        Ok(list)
    }

    pub fn sequences(&self) -> &[Vec<String>] {
        &self.sequences
    }

    /// Length of the longest particle sequence starting at `tokens[at]`.
    pub fn longest_at(&self, tokens: &[String], at: usize) -> Option<usize> {
        self.sequences
            .iter()
            .find(|seq| tokens.get(at..at + seq.len()).is_some_and(|w| w == seq.as_slice()))
            .map(Vec::len)
    }

    /// Length of the longest particle sequence ending just before `end`.
    pub fn longest_ending_at(&self, tokens: &[String], end: usize) -> Option<usize> {
        self.sequences.iter().find(|seq| end >= seq.len() && tokens[end - seq.len()..end] == seq[..]).map(Vec::len)
    }

    /// True when `token` begins any particle sequence.
    pub fn starts_particle(&self, token: &str) -> bool {
        self.sequences.iter().any(|s| s[0] == token)
    }

    pub fn contains_token(&self, token: &str) -> bool {
        self.sequences.iter().any(|s| s.iter().any(|t| t == token))
    }
}
