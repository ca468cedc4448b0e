//! Lexicon-driven acronym expansion.
//!
//! A token is a maximal run of Cyrillic letters; a token is replaced only when
//! it equals a lexicon key exactly, so "ВУЗы" is left alone by a "ВУЗ" entry.

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use crate::charset::{is_cyrillic_letter, is_cyrillic_upper, Charset};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LexiconError {
    #[error("line {line}: expected `ACRONYM<TAB>expansion`")]
    MalformedLine { line: usize },
    #[error("line {line}: key {key:?} must be two or more Cyrillic capitals")]
    BadKey { line: usize, key: String },
    #[error("line {line}: expansion for {key:?} must be non-empty normalized charset text")]
    BadExpansion { line: usize, key: String },
    #[error("line {line}: expansion for {key:?} contains the lexicon key {inner:?}")]
    Recursive { line: usize, key: String, inner: String },
    #[error("line {line}: duplicate key {key:?}")]
    DuplicateKey { line: usize, key: String },
    #[error("reading lexicon: {0}")]
    Io(String),
}

/// Acronym → expansion mapping.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AcronymLexicon {
    entries: BTreeMap<String, String>,
}

impl AcronymLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a lexicon from pairs, applying the same checks as [`AcronymLexicon::parse`].
    pub fn from_pairs<I, K, V>(pairs: I) -> Result<Self, LexiconError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        let mut lex = Self::new();
        let mut lines = Vec::new();
        for (i, (k, v)) in pairs.into_iter().enumerate() {
            let key = k.into();
            if lex.entries.contains_key(&key) {
                return Err(LexiconError::DuplicateKey { line: i + 1, key });
            }
            lex.entries.insert(key.clone(), v.into());
            lines.push((i + 1, key));
        }
        lex.check(&lines)?;
        Ok(lex)
    }

    /// Parses the `ACRONYM<TAB>expansion` file format; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut lex = Self::new();
        let mut lines = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim_end_matches('\r');
            if trimmed.trim().is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed
                .split_once('\t')
                .ok_or(LexiconError::MalformedLine { line })?;
            if lex.entries.contains_key(key) {
                return Err(LexiconError::DuplicateKey { line, key: key.to_string() });
            }
            lex.entries.insert(key.to_string(), value.to_string());
            lines.push((line, key.to_string()));
        }
        lex.check(&lines)?;
        Ok(lex)
    }

    pub fn load(path: &Path) -> Result<Self, LexiconError> {
        let text = std::fs::read_to_string(path).map_err(|e| LexiconError::Io(e.to_string()))?;
        Self::parse(&text)
    }

    fn check(&self, lines: &[(usize, String)]) -> Result<(), LexiconError> {
        let charset = Charset::bundled();
        for (line, key) in lines {
            let line = *line;
            if key.chars().count() < 2 || !key.chars().all(is_cyrillic_upper) {
                return Err(LexiconError::BadKey { line, key: key.clone() });
            }
            let value = &self.entries[key];
            let normalized = super::filter_charset(value, charset);
            if value.is_empty() || normalized != *value {
                return Err(LexiconError::BadExpansion { line, key: key.clone() });
            }
            if let Some(inner) = letter_tokens(value)
                .map(|(_, t)| t)
                .find(|t| self.entries.contains_key(*t))
            {
                return Err(LexiconError::Recursive {
                    line,
                    key: key.clone(),
                    inner: inner.to_string(),
                });
            }
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

/// Iterates `(byte offset, token)` over maximal runs of Cyrillic letters.
pub(crate) fn letter_tokens(text: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut rest = text.char_indices().peekable();
    std::iter::from_fn(move || {
        let (start, _) = rest.find(|(_, c)| is_cyrillic_letter(*c))?;
        let mut end = text.len();
        while let Some(&(i, c)) = rest.peek() {
            if !is_cyrillic_letter(c) {
                end = i;
                break;
            }
            rest.next();
        }
        Some((start, &text[start..end]))
    })
}

/// One replaced token: where it sits in the output and where it came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Replacement {
    pub out_start: usize,
    pub out_len: usize,
    pub src_start: usize,
    pub src_len: usize,
}

pub(crate) fn expand_with_offsets(text: &str, lexicon: &AcronymLexicon) -> (String, Vec<Replacement>) {
    let mut out = String::with_capacity(text.len());
    let mut replacements = Vec::new();
    let mut copied = 0;
    for (start, token) in letter_tokens(text) {
        if let Some(expansion) = lexicon.get(token) {
            out.push_str(&text[copied..start]);
            replacements.push(Replacement {
                out_start: out.len(),
                out_len: expansion.len(),
                src_start: start,
                src_len: token.len(),
            });
            out.push_str(expansion);
            copied = start + token.len();
        }
    }
    out.push_str(&text[copied..]);
    (out, replacements)
}

/// Maps a byte offset in expanded text back to the source text.
pub(crate) fn source_offset(pos: usize, replacements: &[Replacement]) -> usize {
    let mut delta: isize = 0;
    for r in replacements {
        if r.out_start + r.out_len <= pos {
            delta += r.src_len as isize - r.out_len as isize;
        } else if r.out_start <= pos {
            return r.src_start;
        } else {
            break;
        }
    }
    (pos as isize + delta) as usize
}

/// Replaces every whole-token lexicon key with its expansion.
pub fn expand_acronyms(text: &str, lexicon: &AcronymLexicon) -> String {
    expand_with_offsets(text, lexicon).0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lex() -> AcronymLexicon {
        AcronymLexicon::from_pairs([("СССР", "эс эс эс эр"), ("ВУЗ", "вуз")]).unwrap()
    }

    #[test]
    fn expands_whole_tokens_only() {
        assert_eq!(expand_acronyms("СССР", &lex()), "эс эс эс эр");
        assert_eq!(expand_acronyms("ВУЗ и ВУЗы", &lex()), "вуз и ВУЗы");
        assert_eq!(expand_acronyms("нет заглавных", &lex()), "нет заглавных");
        assert_eq!(expand_acronyms("(СССР)", &lex()), "(эс эс эс эр)");
        assert_eq!(expand_acronyms("", &lex()), "");
    }

    #[test]
    fn offsets_map_back() {
        let (out, reps) = expand_with_offsets("ВУЗ 12", &lex());
        assert_eq!(out, "вуз 12");
        let pos = out.find('1').unwrap();
        assert_eq!(source_offset(pos, &reps), "ВУЗ 12".find('1').unwrap());
    }

    #[test]
    fn parse_file() {
        let lex = AcronymLexicon::parse("# comment\nСССР\tэс эс эс эр\n\nМГУ\tэм гэ у\n").unwrap();
        assert_eq!(lex.len(), 2);
        assert_eq!(lex.get("МГУ"), Some("эм гэ у"));
    }

    #[test]
    fn parse_errors() {
        assert_eq!(
            AcronymLexicon::parse("СССР эс\n"),
            Err(LexiconError::MalformedLine { line: 1 })
        );
        assert!(matches!(
            AcronymLexicon::parse("Ссср\tэс\n"),
            Err(LexiconError::BadKey { line: 1, .. })
        ));
        assert!(matches!(
            AcronymLexicon::parse("А\tа\n"),
            Err(LexiconError::BadKey { .. })
        ));
        assert!(matches!(
            AcronymLexicon::parse("МГУ\t\n"),
            Err(LexiconError::BadExpansion { .. })
        ));
        assert!(matches!(
            AcronymLexicon::parse("МГУ\tuniversity\n"),
            Err(LexiconError::BadExpansion { .. })
        ));
        assert!(matches!(
            AcronymLexicon::parse("МГУ\tМГУ плюс\n"),
            Err(LexiconError::Recursive { .. })
        ));
        assert!(matches!(
            AcronymLexicon::parse("МГУ\tа\nМГУ\tб\n"),
            Err(LexiconError::DuplicateKey { line: 2, .. })
        ));
    }
}
