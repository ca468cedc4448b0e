//! Mean opinion score protocol: sample pool, blind survey order, rating
//! log with last-write-wins replay, and per-(kind, axis) aggregation.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MIN_SCORE: u8 = 1;
pub const MAX_SCORE: u8 = 5;

/// Score, quality label, distortion description.
pub const SCALE: [(u8, &str, &str); 5] = [
    (5, "Excellent", "Imperceptible"),
    (4, "Good", "Tangible, but non-irritating"),
    (3, "Fair", "Sensible and slightly annoying"),
    (2, "Poor", "Annoying"),
    (1, "Bad", "Annoying and unpleasant"),
];

#[derive(Debug, Error)]
pub enum MosError {
    #[error("invalid sample pool: {0}")]
    PoolInvalid(String),
    #[error("unknown sample {0:?}")]
    UnknownSample(String),
    #[error("score {0} outside 1..=5")]
    ScoreOutOfRange(i64),
    #[error("rating log line {line}: {message}")]
    CorruptLog { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Real,
    Synthesized,
}

impl Kind {
    pub const ALL: [Kind; 2] = [Kind::Real, Kind::Synthesized];

    pub fn label(self) -> &'static str {
        match self {
            Kind::Real => "Real speech",
            Kind::Synthesized => "Synthesized speech",
        }
    }
}

impl std::str::FromStr for Kind {
    type Err = MosError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "real" => Ok(Kind::Real),
            "synthesized" => Ok(Kind::Synthesized),
            other => Err(MosError::PoolInvalid(format!("unknown kind {other:?}"))),
        }
    }
}

/// Presentation order is the declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Naturalness,
    Intelligibility,
}

impl Axis {
    pub const ALL: [Axis; 2] = [Axis::Naturalness, Axis::Intelligibility];

    pub fn label(self) -> &'static str {
        match self {
            Axis::Naturalness => "Naturalness",
            Axis::Intelligibility => "Intelligibility",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PoolEntry {
    pub sample_id: String,
    pub audio_path: PathBuf,
    pub kind: Kind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SurveyCounts {
    pub real: usize,
    pub synthesized: usize,
}

impl Default for SurveyCounts {
    fn default() -> Self {
        Self { real: 9, synthesized: 11 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplePool {
    entries: Vec<PoolEntry>,
    index: HashMap<String, usize>,
}

impl SamplePool {
    pub fn new(entries: Vec<PoolEntry>, counts: SurveyCounts) -> Result<Self, MosError> {
        let mut index = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            if e.sample_id.is_empty() {
                return Err(MosError::PoolInvalid("empty sample id".into()));
            }
            if index.insert(e.sample_id.clone(), i).is_some() {
                return Err(MosError::PoolInvalid(format!("duplicate sample id {:?}", e.sample_id)));
            }
        }
        let real = entries.iter().filter(|e| e.kind == Kind::Real).count();
        let synthesized = entries.len() - real;
        if (real, synthesized) != (counts.real, counts.synthesized) {
            return Err(MosError::PoolInvalid(format!(
                "{real} real + {synthesized} synthesized, expected {} + {}",
                counts.real, counts.synthesized
            )));
        }
        Ok(Self { entries, index })
    }

    /// Lines `sample_id|kind|path`, paths relative to the file's directory.
    pub fn load(path: &Path, counts: SurveyCounts) -> Result<Self, MosError> {
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split('|').collect();
            let [id, kind, audio] = parts[..] else {
                return Err(MosError::PoolInvalid(format!("line {}: expected `id|kind|path`", i + 1)));
            };
            entries.push(PoolEntry { sample_id: id.to_string(), kind: kind.parse()?, audio_path: base.join(audio) });
        }
        Self::new(entries, counts)
    }

    pub fn entries(&self) -> &[PoolEntry] {
        &self.entries
    }

    pub fn get(&self, sample_id: &str) -> Option<&PoolEntry> {
        self.index.get(sample_id).map(|&i| &self.entries[i])
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Ordered sample ids shown to one respondent. Carries no kinds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Survey {
    pub respondent_id: String,
    pub seed: u64,
    pub samples: Vec<String>,
}

pub fn create_survey(pool: &SamplePool, respondent_id: &str, seed: u64) -> Survey {
    let mut samples: Vec<String> = pool.entries.iter().map(|e| e.sample_id.clone()).collect();
    samples.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Survey { respondent_id: respondent_id.to_string(), seed, samples }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Rating {
    pub respondent_id: String,
    pub sample_id: String,
    pub axis: Axis,
    pub score: u8,
    /// Milliseconds since the Unix epoch.
    pub timestamp: u64,
}

impl Rating {
    pub fn key(&self) -> RatingKey {
        (self.respondent_id.clone(), self.sample_id.clone(), self.axis)
    }
}

pub type RatingKey = (String, String, Axis);

pub fn check_score(score: i64) -> Result<u8, MosError> {
    if (MIN_SCORE as i64..=MAX_SCORE as i64).contains(&score) {
        Ok(score as u8)
    } else {
        Err(MosError::ScoreOutOfRange(score))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Ack {
    Stored,
    Replaced,
    Unchanged,
}

/// Append-only rating log plus its last-write-wins view.
#[derive(Debug)]
pub struct RatingStore {
    pool: SamplePool,
    log: Option<File>,
    view: HashMap<RatingKey, Rating>,
}

impl RatingStore {
    pub fn in_memory(pool: SamplePool) -> Self {
        Self { pool, log: None, view: HashMap::new() }
    }

    /// Opens or creates the log at `path`, replaying existing lines in order.
    pub fn open(pool: SamplePool, path: &Path) -> Result<Self, MosError> {
        let mut view = HashMap::new();
        if path.exists() {
            let reader = BufReader::new(File::open(path)?);
            for (i, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let corrupt = |message: String| MosError::CorruptLog { line: i + 1, message };
                let r: Rating = serde_json::from_str(&line).map_err(|e| corrupt(e.to_string()))?;
                check_score(r.score as i64).map_err(|e| corrupt(e.to_string()))?;
                if pool.get(&r.sample_id).is_none() {
                    return Err(corrupt(format!("unknown sample {:?}", r.sample_id)));
                }
                view.insert(r.key(), r);
            }
        }
        let log = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self { pool, log: Some(log), view })
    }

    pub fn pool(&self) -> &SamplePool {
        &self.pool
    }

    pub fn submit(&mut self, rating: Rating) -> Result<Ack, MosError> {
        if self.pool.get(&rating.sample_id).is_none() {
            return Err(MosError::UnknownSample(rating.sample_id));
        }
        check_score(rating.score as i64)?;
        let key = rating.key();
        let ack = match self.view.get(&key) {
            Some(old) if old.score == rating.score => return Ok(Ack::Unchanged),
            Some(_) => Ack::Replaced,
            None => Ack::Stored,
        };
        if let Some(log) = &mut self.log {
            let mut line = serde_json::to_string(&rating).expect("rating serializes");
            line.push('\n');
            log.write_all(line.as_bytes())?;
            log.flush()?;
        }
        self.view.insert(key, rating);
        Ok(ack)
    }

    pub fn len(&self) -> usize {
        self.view.len()
    }

    pub fn is_empty(&self) -> bool {
        self.view.is_empty()
    }

    /// Materialized ratings, sorted by key.
    pub fn ratings(&self) -> Vec<Rating> {
        let mut all: Vec<Rating> = self.view.values().cloned().collect();
        all.sort_by_key(|a| a.key());
        all
    }

    pub fn ratings_of(&self, respondent_id: &str) -> Vec<Rating> {
        let mut mine: Vec<Rating> = self.view.values().filter(|r| r.respondent_id == respondent_id).cloned().collect();
        mine.sort_by_key(|a| a.key());
        mine
    }

    pub fn report(&self) -> MosReport {
        aggregate(self.view.values(), &self.pool)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MosCell {
    pub kind: Kind,
    pub axis: Axis,
    pub count: usize,
    pub mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MosReport {
    pub cells: Vec<MosCell>,
}

impl MosReport {
    pub fn cell(&self, kind: Kind, axis: Axis) -> &MosCell {
        self.cells
            .iter()
            .find(|c| c.kind == kind && c.axis == axis)
            .expect("report has every cell")
    }

    /// `4.83 / 4.87` style, naturalness first; `n/a` for empty cells.
    pub fn row(&self, kind: Kind) -> String {
        Axis::ALL
            .iter()
            .map(|&a| render_mean(self.cell(kind, a).mean))
            .collect::<Vec<_>>()
            .join(" / ")
    }
}

fn render_mean(mean: Option<f64>) -> String {
    mean.map_or_else(|| "n/a".to_string(), |m| format!("{m:.2}"))
}

impl fmt::Display for MosReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<20}{:>13}{:>17}", "Type", Axis::Naturalness.label(), Axis::Intelligibility.label())?;
        for kind in Kind::ALL {
            writeln!(
                f,
                "{:<20}{:>13}{:>17}",
                kind.label(),
                render_mean(self.cell(kind, Axis::Naturalness).mean),
                render_mean(self.cell(kind, Axis::Intelligibility).mean)
            )?;
        }
        Ok(())
    }
}

/// Mean score per (kind, axis). Ratings of samples outside the pool are ignored.
pub fn aggregate<'a, I>(ratings: I, pool: &SamplePool) -> MosReport
where
    I: IntoIterator<Item = &'a Rating>,
{
    // Integer sums keep the mean independent of rating order.
    let mut sums: HashMap<(Kind, Axis), (u64, usize)> = HashMap::new();
    for r in ratings {
        if let Some(e) = pool.get(&r.sample_id) {
            let cell = sums.entry((e.kind, r.axis)).or_default();
            cell.0 += r.score as u64;
            cell.1 += 1;
        }
    }
    let mut cells = Vec::new();
    for kind in Kind::ALL {
        for axis in Axis::ALL {
            let (sum, count) = sums.get(&(kind, axis)).copied().unwrap_or_default();
            let mean = (count > 0).then(|| sum as f64 / count as f64);
            cells.push(MosCell { kind, axis, count, mean });
        }
    }
    MosReport { cells }
}

/// Respondents seen in a set of ratings.
pub fn respondents<'a, I: IntoIterator<Item = &'a Rating>>(ratings: I) -> HashSet<&'a str> {
    ratings.into_iter().map(|r| r.respondent_id.as_str()).collect()
}
