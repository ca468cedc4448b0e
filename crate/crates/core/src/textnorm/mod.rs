//! Raw text → corpus-normalized text.
//!
//! [`normalize`] runs acronym expansion, then number/date verbalization, then
//! charset filtering. Digit handling, tried in this order at every maximal
//! digit run:
//!
//! | pattern                                   | reading                                   |
//! |-------------------------------------------|-------------------------------------------|
//! | `d.m.yyyy` (1–2, 1–2, 4 digits)           | full date, a trailing "года"/"г." is absorbed |
//! | `d <month-genitive> [yyyy] [года\|г.]`    | genitive neuter day ordinal ("пятого мая"), optional genitive year + "года" |
//! | `yyyy год\|года\|году\|годом`             | masculine ordinal in the case of the noun (году → prepositional) |
//! | anything else                             | nominative masculine cardinal             |
//!
//! Deleting out-of-charset symbols can fuse two letter runs into a new token
//! ("Б/У" → "БУ"), so the lexicon is applied once more after filtering. This
//! makes the pipeline idempotent for lexicons accepted by [`AcronymLexicon`].

mod acronyms;
mod numerals;

use std::ops::Range;

use thiserror::Error;

use crate::charset::{is_cyrillic_letter, Charset};

pub use acronyms::{expand_acronyms, AcronymLexicon, LexiconError};
pub use numerals::{
    date_to_words, days_in_month, number_to_words, ordinal_to_words, Case, Gender, MorphContext,
    MAX_CARDINAL, MAX_ORDINAL, MONTHS_GENITIVE,
};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TextNormError {
    #[error("number {0} is outside the supported range")]
    OutOfRange(String),
    #[error("{day}.{month}.{year} is not a valid calendar date")]
    InvalidDate { day: u32, month: u32, year: u32 },
}

/// A verbalization failure with its byte span in the text given to [`normalize`].
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{kind} (bytes {}..{})", span.start, span.end)]
pub struct NormalizeError {
    pub kind: TextNormError,
    pub span: Range<usize>,
}

/// Drops every symbol outside `charset`, turns whitespace into spaces,
/// collapses space runs and trims both ends.
pub fn filter_charset(text: &str, charset: &Charset) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for c in text.chars() {
        if c.is_whitespace() {
            pending_space = !out.is_empty();
            continue;
        }
        if charset.contains(c) {
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            out.push(c);
        }
    }
    out
}

/// Full pipeline against the bundled charset.
pub fn normalize(text: &str, lexicon: &AcronymLexicon) -> Result<String, NormalizeError> {
    normalize_with(text, lexicon, Charset::bundled())
}

pub fn normalize_with(
    text: &str,
    lexicon: &AcronymLexicon,
    charset: &Charset,
) -> Result<String, NormalizeError> {
    let (expanded, replacements) = acronyms::expand_with_offsets(text, lexicon);
    let spoken = verbalize_numbers(&expanded).map_err(|(kind, span)| NormalizeError {
        kind,
        span: acronyms::source_offset(span.start, &replacements)
            ..acronyms::source_offset(span.end, &replacements),
    })?;
    let filtered = filter_charset(&spoken, charset);
    let fused = expand_acronyms(&filtered, lexicon);
    Ok(filter_charset(&fused, charset))
}

fn digit_run_end(bytes: &[u8], start: usize) -> usize {
    bytes[start..]
        .iter()
        .position(|b| !b.is_ascii_digit())
        .map_or(bytes.len(), |n| start + n)
}

fn parse_small(digits: &str) -> u32 {
    digits.bytes().fold(0, |acc, b| acc * 10 + u32::from(b - b'0'))
}

/// `" <word>"` at `pos`: returns the letter token and the offset after it.
fn next_word(text: &str, pos: usize) -> Option<(&str, usize)> {
    let rest = text.get(pos..)?.strip_prefix(' ')?;
    let len: usize = rest
        .chars()
        .take_while(|c| is_cyrillic_letter(*c))
        .map(char::len_utf8)
        .sum();
    (len > 0).then(|| (&rest[..len], pos + 1 + len))
}

/// Absorbs `" года"` or `" г."` following a date.
fn absorb_year_noun(text: &str, pos: usize) -> usize {
    match next_word(text, pos) {
        Some(("года", end)) => end,
        Some(("г", end)) if text[end..].starts_with('.') => end + 1,
        _ => pos,
    }
}

/// A four-digit year run starting with a space at `pos`.
fn next_year(text: &str, pos: usize) -> Option<(u32, usize)> {
    let bytes = text.as_bytes();
    if bytes.get(pos) != Some(&b' ') || !bytes.get(pos + 1).is_some_and(u8::is_ascii_digit) {
        return None;
    }
    let end = digit_run_end(bytes, pos + 1);
    let year = parse_small(&text[pos + 1..end]);
    (end - pos - 1 == 4 && year >= 1).then_some((year, end))
}

fn match_full_date(text: &str, start: usize, end: usize) -> Option<(u32, u32, u32, usize)> {
    let bytes = text.as_bytes();
    if !(1..=2).contains(&(end - start)) || bytes.get(end) != Some(&b'.') {
        return None;
    }
    let m_start = end + 1;
    if !bytes.get(m_start).is_some_and(u8::is_ascii_digit) {
        return None;
    }
    let m_end = digit_run_end(bytes, m_start);
    if !(1..=2).contains(&(m_end - m_start)) || bytes.get(m_end) != Some(&b'.') {
        return None;
    }
    let y_start = m_end + 1;
    if !bytes.get(y_start).is_some_and(u8::is_ascii_digit) {
        return None;
    }
    let y_end = digit_run_end(bytes, y_start);
    if y_end - y_start != 4 {
        return None;
    }
    Some((
        parse_small(&text[start..end]),
        parse_small(&text[m_start..m_end]),
        parse_small(&text[y_start..y_end]),
        y_end,
    ))
}

type Span = (TextNormError, Range<usize>);

/// Reads one digit construct starting at `start`; returns its words and the end offset.
fn read_number(text: &str, start: usize) -> Result<(String, usize), Span> {
    let bytes = text.as_bytes();
    let end = digit_run_end(bytes, start);
    let digits = &text[start..end];

    if let Some((day, month, year, date_end)) = match_full_date(text, start, end) {
        let words = date_to_words(day, month, year).map_err(|e| (e, start..date_end))?;
        return Ok((words, absorb_year_noun(text, date_end)));
    }

    if digits.len() <= 2 {
        if let Some((word, month_end)) = next_word(text, end) {
            if let Some(month) = MONTHS_GENITIVE.iter().position(|m| *m == word) {
                let day = parse_small(digits);
                let month = month as u32 + 1;
                let year = next_year(text, month_end);
                let check_year = year.map_or(2000, |(y, _)| y);
                let valid = days_in_month(month, check_year).is_some_and(|max| (1..=max).contains(&day));
                let consumed = year.map_or(month_end, |(_, e)| e);
                if !valid {
                    return Err((
                        TextNormError::InvalidDate { day, month, year: check_year },
                        start..consumed,
                    ));
                }
                let day_ctx = MorphContext::new(Case::Genitive, Gender::Neuter);
                let mut words = format!("{} {word}", ordinal_to_words(day, day_ctx).map_err(|e| (e, start..end))?);
                let Some((year, year_end)) = year else {
                    return Ok((words, month_end));
                };
                let year_ctx = MorphContext::new(Case::Genitive, Gender::Masculine);
                words.push(' ');
                words.push_str(&ordinal_to_words(year, year_ctx).map_err(|e| (e, start..year_end))?);
                words.push_str(" года");
                return Ok((words, absorb_year_noun(text, year_end)));
            }
        }
    }

    if digits.len() == 4 {
        if let Some((noun, _)) = next_word(text, end) {
            let case = match noun {
                "год" => Some(Case::Nominative),
                "года" => Some(Case::Genitive),
                "году" => Some(Case::Prepositional),
                "годом" => Some(Case::Instrumental),
                _ => None,
            };
            let year = parse_small(digits);
            if let (Some(case), true) = (case, year >= 1) {
                let words = ordinal_to_words(year, MorphContext::new(case, Gender::Masculine))
                    .map_err(|e| (e, start..end))?;
                return Ok((words, end));
            }
        }
    }

    let significant = digits.trim_start_matches('0');
    if significant.len() > 12 {
        return Err((TextNormError::OutOfRange(digits.to_string()), start..end));
    }
    let value: i64 = if significant.is_empty() { 0 } else { significant.parse().expect("≤ 12 ascii digits") };
    let words = number_to_words(value, MorphContext::default()).map_err(|e| (e, start..end))?;
    Ok((words, end))
}

/// Replaces every digit construct with words.
fn verbalize_numbers(text: &str) -> Result<String, Span> {
    let bytes = text.as_bytes();
    let mut out = String::with_capacity(text.len() * 2);
    let mut copied = 0;
    let mut i = 0;
    while i < bytes.len() {
        if !bytes[i].is_ascii_digit() {
            i += 1;
            continue;
        }
        out.push_str(&text[copied..i]);
        let (words, end) = read_number(text, i)?;
        if out.chars().next_back().is_some_and(char::is_alphanumeric) {
            out.push(' ');
        }
        out.push_str(&words);
        if text[end..].chars().next().is_some_and(char::is_alphanumeric) {
            out.push(' ');
        }
        copied = end;
        i = end;
    }
    out.push_str(&text[copied..]);
    Ok(out)
}
