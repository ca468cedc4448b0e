//! Manifest loading, validation, corpus statistics and histograms.
//!
//! A manifest line is `id|path|text`; paths are relative to the root passed
//! to [`load_manifest`]. A word is a maximal run of Cyrillic letters and a
//! symbol is any charset character (spaces optional, see [`CountingRules`]).

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;

use crate::audio::{wav_info, WavInfo, CORPUS_SAMPLE_RATE};
use crate::charset::{is_cyrillic_letter, is_cyrillic_upper, Charset, CharsetError};
use crate::textnorm::AcronymLexicon;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: expected `id|path|text`")]
    MalformedLine { line: usize },
    #[error("line {line}: id {id:?} must match [a-z0-9_-]+")]
    InvalidId { line: usize, id: String },
    #[error("line {line}: duplicate id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: audio file {path} does not exist")]
    MissingAudio { line: usize, path: PathBuf },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("{id}: {message}")]
    Audio { id: String, message: String },
    #[error("histogram needs at least one bin")]
    ZeroBins,
    #[error("reading manifest: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug)]
pub struct Utterance {
    pub id: String,
    pub text: String,
    pub audio_path: PathBuf,
    info: OnceLock<Result<WavInfo, String>>,
}

impl Clone for Utterance {
    fn clone(&self) -> Self {
        let info = OnceLock::new();
        if let Some(v) = self.info.get() {
            let _ = info.set(v.clone());
        }
        Self { id: self.id.clone(), text: self.text.clone(), audio_path: self.audio_path.clone(), info }
    }
}

impl Utterance {
    pub fn new(id: impl Into<String>, text: impl Into<String>, audio_path: impl Into<PathBuf>) -> Self {
        Self { id: id.into(), text: text.into(), audio_path: audio_path.into(), info: OnceLock::new() }
    }

    /// Header of the audio file, read once.
    pub fn wav_info(&self) -> Result<WavInfo, String> {
        self.info
            .get_or_init(|| wav_info(&self.audio_path).map_err(|e| e.to_string()))
            .clone()
    }

    pub fn duration(&self) -> Result<f64, CorpusError> {
        self.wav_info()
            .map(|i| i.duration())
            .map_err(|message| CorpusError::Audio { id: self.id.clone(), message })
    }
}

pub fn is_valid_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_' || b == b'-')
}

/// Parses manifest text; audio paths are resolved against `root`.
pub fn parse_manifest(text: &str, root: &Path) -> Result<Vec<Utterance>, CorpusError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if raw.is_empty() {
            continue;
        }
        let mut parts = raw.splitn(3, '|');
        let (Some(id), Some(path), Some(body)) = (parts.next(), parts.next(), parts.next()) else {
            return Err(CorpusError::MalformedLine { line });
        };
        if body.contains('|') || path.is_empty() {
            return Err(CorpusError::MalformedLine { line });
        }
        if !is_valid_id(id) {
            return Err(CorpusError::InvalidId { line, id: id.to_string() });
        }
        if !seen.insert(id.to_string()) {
            return Err(CorpusError::DuplicateId { line, id: id.to_string() });
        }
        let audio_path = root.join(path);
        if !audio_path.is_file() {
            return Err(CorpusError::MissingAudio { line, path: audio_path });
        }
        out.push(Utterance::new(id, body, audio_path));
    }
    Ok(out)
}

/// Loads a manifest; `root` defaults to the manifest's directory.
pub fn load_manifest(path: &Path, root: Option<&Path>) -> Result<Vec<Utterance>, CorpusError> {
    let text = std::fs::read_to_string(path)?;
    let base = match root {
        Some(r) => r.to_path_buf(),
        None => path.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    parse_manifest(&text, &base)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FindingKind {
    EmptyText,
    OutOfCharset { symbols: String, first_position: usize },
    CapitalRun { token: String, in_lexicon: bool },
    UnreadableAudio { message: String },
    AudioFormat { message: String },
    ZeroDuration,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub id: String,
    #[serde(flatten)]
    pub kind: FindingKind,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.id)?;
        match &self.kind {
            FindingKind::EmptyText => write!(f, "empty text"),
            FindingKind::OutOfCharset { symbols, first_position } => {
                write!(f, "symbols {symbols:?} outside the charset (first at char {first_position})")
            }
            FindingKind::CapitalRun { token, in_lexicon: true } => {
                write!(f, "acronym {token:?} was not expanded")
            }
            FindingKind::CapitalRun { token, in_lexicon: false } => {
                write!(f, "capital run {token:?} is not in the lexicon")
            }
            FindingKind::UnreadableAudio { message } => write!(f, "unreadable audio: {message}"),
            FindingKind::AudioFormat { message } => write!(f, "audio format: {message}"),
            FindingKind::ZeroDuration => write!(f, "audio has zero duration"),
        }
    }
}

/// Runs of two or more Cyrillic capitals.
fn capital_runs(text: &str) -> Vec<String> {
    let mut runs = Vec::new();
    let mut cur = String::new();
    for c in text.chars().chain(std::iter::once(' ')) {
        if is_cyrillic_upper(c) {
            cur.push(c);
        } else {
            if cur.chars().count() >= 2 {
                runs.push(cur.clone());
            }
            cur.clear();
        }
    }
    runs
}

/// Every problem in one utterance, in a fixed order.
pub fn validate_utterance(u: &Utterance, charset: &Charset, lexicon: &AcronymLexicon) -> Vec<Finding> {
    let mut found = Vec::new();
    let mut push = |kind| found.push(Finding { id: u.id.clone(), kind });
    if u.text.trim().is_empty() {
        push(FindingKind::EmptyText);
    }
    let mut bad = BTreeSet::new();
    let mut first = None;
    for (i, c) in u.text.chars().enumerate() {
        if !charset.contains(c) {
            bad.insert(c);
            first.get_or_insert(i);
        }
    }
    if let Some(first_position) = first {
        push(FindingKind::OutOfCharset { symbols: bad.into_iter().collect(), first_position });
    }
    for token in capital_runs(&u.text) {
        let in_lexicon = lexicon.contains(&token);
        push(FindingKind::CapitalRun { token, in_lexicon });
    }
    match u.wav_info() {
        Err(message) => push(FindingKind::UnreadableAudio { message }),
        Ok(info) => {
            if let Err(e) = info.check_supported() {
                push(FindingKind::AudioFormat { message: e.to_string() });
            }
            if info.sample_rate != CORPUS_SAMPLE_RATE {
                push(FindingKind::AudioFormat {
                    message: format!("{} Hz, expected {CORPUS_SAMPLE_RATE} Hz", info.sample_rate),
                });
            }
            if info.frames == 0 {
                push(FindingKind::ZeroDuration);
            }
        }
    }
    found
}

/// Exhaustive report over the corpus, in manifest order.
pub fn validate(corpus: &[Utterance], charset: &Charset, lexicon: &AcronymLexicon) -> Vec<Finding> {
    corpus
        .iter()
        .flat_map(|u| validate_utterance(u, charset, lexicon))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountingRules {
    pub count_spaces: bool,
}

impl Default for CountingRules {
    fn default() -> Self {
        Self { count_spaces: true }
    }
}

pub fn words(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| !is_cyrillic_letter(c)).filter(|w| !w.is_empty())
}

pub fn count_symbols(text: &str, charset: &Charset, rules: CountingRules) -> usize {
    text.chars()
        .filter(|c| charset.contains(*c) && (rules.count_spaces || *c != ' '))
        .count()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub sample_count: usize,
    pub total_duration: f64,
    pub total_symbols: usize,
    pub total_words: usize,
    pub unique_words: usize,
    pub min_duration: f64,
    pub max_duration: f64,
    pub min_symbols: usize,
    pub max_symbols: usize,
    pub min_words: usize,
    pub max_words: usize,
}

impl CorpusStats {
    /// Statistics from `(text, duration)` pairs.
    pub fn from_items<'a, I>(items: I, charset: &Charset, rules: CountingRules) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = (&'a str, f64)>,
    {
        let mut s = CorpusStats {
            sample_count: 0,
            total_duration: 0.0,
            total_symbols: 0,
            total_words: 0,
            unique_words: 0,
            min_duration: f64::INFINITY,
            max_duration: f64::NEG_INFINITY,
            min_symbols: usize::MAX,
            max_symbols: 0,
            min_words: usize::MAX,
            max_words: 0,
        };
        let mut vocabulary = HashSet::new();
        let mut durations = Vec::new();
        for (text, duration) in items {
            let symbols = count_symbols(text, charset, rules);
            let mut n_words = 0;
            for w in words(text) {
                n_words += 1;
                vocabulary.insert(w.to_lowercase());
            }
            s.sample_count += 1;
            durations.push(duration);
            s.total_symbols += symbols;
            s.total_words += n_words;
            s.min_duration = s.min_duration.min(duration);
            s.max_duration = s.max_duration.max(duration);
            s.min_symbols = s.min_symbols.min(symbols);
            s.max_symbols = s.max_symbols.max(symbols);
            s.min_words = s.min_words.min(n_words);
            s.max_words = s.max_words.max(n_words);
        }
        if s.sample_count == 0 {
            return Err(CorpusError::EmptyCorpus);
        }
        // Sorted summation keeps the total independent of utterance order.
        durations.sort_by(f64::total_cmp);
        s.total_duration = durations.iter().sum();
        s.unique_words = vocabulary.len();
        Ok(s)
    }

    pub fn mean_words(&self) -> f64 {
        self.total_words as f64 / self.sample_count as f64
    }

    /// `key: value` lines in the row order of the corpus table.
    pub fn to_text(&self) -> String {
        format!(
            "total_duration: {}\n\
             sample_count: {}\n\
             total_symbols: {}\n\
             total_words: {}\n\
             unique_words: {}\n\
             duration_range: {:.2} .. {:.2} s\n\
             words_range: {} .. {}\n\
             symbols_range: {} .. {}\n\
             mean_words: {:.2}\n",
            format_hms(self.total_duration),
            self.sample_count,
            self.total_symbols,
            self.total_words,
            self.unique_words,
            self.min_duration,
            self.max_duration,
            self.min_words,
            self.max_words,
            self.min_symbols,
            self.max_symbols,
            self.mean_words(),
        )
    }
}

pub fn compute_stats(corpus: &[Utterance], charset: &Charset, rules: CountingRules) -> Result<CorpusStats, CorpusError> {
    let durations = corpus
        .iter()
        .map(Utterance::duration)
        .collect::<Result<Vec<_>, _>>()?;
    CorpusStats::from_items(
        corpus.iter().map(|u| u.text.as_str()).zip(durations),
        charset,
        rules,
    )
}

/// Seconds rounded to the nearest whole second as `h:mm:ss`.
pub fn format_hms(seconds: f64) -> String {
    let total = seconds.round() as u64;
    format!("{}:{:02}:{:02}", total / 3600, total / 60 % 60, total % 60)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HistogramAxis {
    Duration,
    Symbols,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub axis: HistogramAxis,
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// Equal-width bins over `[min, max]`, the last bin closed on the right.
    /// A constant sample widens the range to `[min, min + 1]`.
    pub fn from_values(axis: HistogramAxis, values: &[f64], bins: usize) -> Result<Self, CorpusError> {
        if bins == 0 {
            return Err(CorpusError::ZeroBins);
        }
        if values.is_empty() {
            return Err(CorpusError::EmptyCorpus);
        }
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let mut hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi <= lo {
            hi = lo + 1.0;
        }
        let width = (hi - lo) / bins as f64;
        let mut edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
        edges[bins] = hi;
        let mut counts = vec![0; bins];
        for &v in values {
            let mut b = (((v - lo) / width).floor() as usize).min(bins - 1);
            // Nudge values that rounding put on the wrong side of an edge.
            while b > 0 && v < edges[b] {
                b -= 1;
            }
            while b + 1 < bins && v >= edges[b + 1] {
                b += 1;
            }
            counts[b] += 1;
        }
        Ok(Self { axis, edges, counts })
    }

    /// `lower<TAB>upper<TAB>count` per bin.
    pub fn to_tsv(&self) -> String {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{}\t{}\t{c}\n", self.edges[i], self.edges[i + 1]))
            .collect()
    }
}

pub fn histogram(
    corpus: &[Utterance],
    axis: HistogramAxis,
    bins: usize,
    charset: &Charset,
    rules: CountingRules,
) -> Result<Histogram, CorpusError> {
    let values = match axis {
        HistogramAxis::Duration => corpus.iter().map(Utterance::duration).collect::<Result<Vec<_>, _>>()?,
        HistogramAxis::Symbols => corpus
            .iter()
            .map(|u| count_symbols(&u.text, charset, rules) as f64)
            .collect(),
    };
    Histogram::from_values(axis, &values, bins)
}

pub fn encode_text(text: &str, charset: &Charset) -> Result<Vec<usize>, CharsetError> {
    charset.encode(text)
}

pub fn decode_ids(ids: &[usize], charset: &Charset) -> Result<String, CharsetError> {
    charset.decode(ids)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cs() -> &'static Charset {
        Charset::bundled()
    }

    #[test]
    fn fixture_counts() {
        let s = CorpusStats::from_items([("Привет, мир!", 1.5), ("Да", 0.75)], cs(), CountingRules::default()).unwrap();
        assert_eq!(s.total_symbols, 14);
        assert_eq!(s.total_words, 3);
        assert_eq!(s.unique_words, 3);
        assert_eq!((s.min_symbols, s.max_symbols), (2, 12));
        assert_eq!((s.min_words, s.max_words), (1, 2));
        assert_eq!(s.total_duration, 2.25);
        let no_spaces = CorpusStats::from_items([("Привет, мир!", 1.0)], cs(), CountingRules { count_spaces: false }).unwrap();
        assert_eq!(no_spaces.total_symbols, 11);
    }

    #[test]
    fn unique_words_are_case_folded() {
        let s = CorpusStats::from_items([("Да да ДА", 1.0), ("нет-нет", 1.0)], cs(), CountingRules::default()).unwrap();
        assert_eq!(s.total_words, 5);
        assert_eq!(s.unique_words, 2);
    }

    #[test]
    fn empty_corpus() {
        assert!(matches!(
            CorpusStats::from_items(std::iter::empty(), cs(), CountingRules::default()),
            Err(CorpusError::EmptyCorpus)
        ));
    }

    #[test]
    fn hms() {
        assert_eq!(format_hms(113575.0), "31:32:55");
        assert_eq!(format_hms(59.6), "0:01:00");
        assert_eq!(format_hms(0.0), "0:00:00");
    }

    #[test]
    fn histogram_binning() {
        let h = Histogram::from_values(HistogramAxis::Duration, &[1.0, 1.0, 3.0], 2).unwrap();
        assert_eq!(h.counts, vec![2, 1]);
        assert_eq!(h.edges, vec![1.0, 2.0, 3.0]);
        let h = Histogram::from_values(HistogramAxis::Symbols, &[7.0], 1).unwrap();
        assert_eq!(h.counts, vec![1]);
        let h = Histogram::from_values(HistogramAxis::Symbols, &[7.0, 7.0], 4).unwrap();
        assert_eq!(h.counts.iter().sum::<usize>(), 2);
        assert!(Histogram::from_values(HistogramAxis::Symbols, &[1.0], 0).is_err());
    }

    #[test]
    fn capital_runs_are_found() {
        assert_eq!(capital_runs("ВУЗы и СССР, А"), vec!["ВУЗ", "СССР"]);
        assert!(capital_runs("Да нет").is_empty());
    }

    #[test]
    fn ids() {
        assert!(is_valid_id("utt_0001-a"));
        assert!(!is_valid_id("Utt"));
        assert!(!is_valid_id(""));
        assert!(!is_valid_id("a b"));
    }

    #[test]
    fn encode_round_trip() {
        let ids = encode_text("Да", cs()).unwrap();
        assert_eq!(ids, vec![4, 33]);
        assert_eq!(decode_ids(&ids, cs()).unwrap(), "Да");
    }
}
