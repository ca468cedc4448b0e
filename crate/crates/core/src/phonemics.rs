//! Rule-based Russian grapheme-to-phoneme transcription.
//!
//! Inventory (version 1, 43 labels): vowels `a o u e i ɨ ə`; fifteen hard/soft
//! consonant pairs `p b t d k g f v s z x m n l r` (+ `ʲ`); the unpaired
//! `ʂ ʐ ts tɕ ɕː j`.
//!
//! Rules, applied per word (maximal run of Cyrillic letters) in this order:
//!
//! 1. Letters map to base phones; `я е ё ю` become `j` + vowel at word start,
//!    after a vowel or after `ь`/`ъ`; `и` after `ь` becomes `j i`.
//! 2. A paired consonant before `ь е ё ю я и` is soft; `ж ш ц` stay hard
//!    (and turn a following `и` into `ɨ`), `ч щ й` are inherently soft.
//! 3. A word-final voiced obstruent is devoiced.
//! 4. Regressive voicing assimilation, right to left: an obstruent takes the
//!    voicing of the obstruent after it. `v`/`vʲ` do not trigger voicing;
//!    `ts tɕ x ɕː` have no voiced partner in the inventory and are not voiced.
//! 5. Vowel reduction. Stress is the vowel followed by U+0301, else the first
//!    `ё`, else the first syllable. After a soft consonant or `j` unstressed
//!    `a e o` become `i`. After a hard consonant unstressed `a o` become `a`
//!    in the first pretonic syllable or word-initially and `ə` elsewhere;
//!    unstressed `e` becomes `ɨ` or `ə` likewise. `u i ɨ` never reduce.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::charset::{is_cyrillic_letter, Charset};

/// Combining acute accent used as an optional stress mark.
pub const STRESS_MARK: char = '\u{301}';

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PhonemicsError {
    #[error("symbol {symbol:?} at position {position} is not normalized charset text")]
    NotNormalized { symbol: char, position: usize },
    #[error("no phonemes in corpus")]
    EmptyCorpus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhoneClass {
    Vowel,
    Consonant,
}

macro_rules! phonemes {
    ($($variant:ident => $label:literal, $class:ident;)*) => {
        /// One label of the inventory.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Phoneme {
            $($variant,)*
        }

        impl Phoneme {
            /// The full inventory in canonical order.
            pub const ALL: &'static [Phoneme] = &[$(Phoneme::$variant,)*];

            pub fn label(self) -> &'static str {
                match self {
                    $(Phoneme::$variant => $label,)*
                }
            }

            pub fn class(self) -> PhoneClass {
                match self {
                    $(Phoneme::$variant => PhoneClass::$class,)*
                }
            }
        }
    };
}

phonemes! {
    A => "a", Vowel;
    O => "o", Vowel;
    U => "u", Vowel;
    E => "e", Vowel;
    I => "i", Vowel;
    Y => "ɨ", Vowel;
    Schwa => "ə", Vowel;
    P => "p", Consonant;
    Pj => "pʲ", Consonant;
    B => "b", Consonant;
    Bj => "bʲ", Consonant;
    T => "t", Consonant;
    Tj => "tʲ", Consonant;
    D => "d", Consonant;
    Dj => "dʲ", Consonant;
    K => "k", Consonant;
    Kj => "kʲ", Consonant;
    G => "g", Consonant;
    Gj => "gʲ", Consonant;
    F => "f", Consonant;
    Fj => "fʲ", Consonant;
    V => "v", Consonant;
    Vj => "vʲ", Consonant;
    S => "s", Consonant;
    Sj => "sʲ", Consonant;
    Z => "z", Consonant;
    Zj => "zʲ", Consonant;
    X => "x", Consonant;
    Xj => "xʲ", Consonant;
    M => "m", Consonant;
    Mj => "mʲ", Consonant;
    N => "n", Consonant;
    Nj => "nʲ", Consonant;
    L => "l", Consonant;
    Lj => "lʲ", Consonant;
    R => "r", Consonant;
    Rj => "rʲ", Consonant;
    Sh => "ʂ", Consonant;
    Zh => "ʐ", Consonant;
    Ts => "ts", Consonant;
    Ch => "tɕ", Consonant;
    Shch => "ɕː", Consonant;
    J => "j", Consonant;
}

/// Inventory version published with the distribution export.
pub const INVENTORY_VERSION: u32 = 1;

impl Phoneme {
    pub fn from_label(label: &str) -> Option<Phoneme> {
        Self::ALL.iter().copied().find(|p| p.label() == label)
    }

    pub fn is_vowel(self) -> bool {
        self.class() == PhoneClass::Vowel
    }

    fn soft(self) -> Phoneme {
        use Phoneme::*;
        match self {
            P => Pj,
            B => Bj,
            T => Tj,
            D => Dj,
            K => Kj,
            G => Gj,
            F => Fj,
            V => Vj,
            S => Sj,
            Z => Zj,
            X => Xj,
            M => Mj,
            N => Nj,
            L => Lj,
            R => Rj,
            other => other,
        }
    }

    /// Palatalized or inherently soft consonants (and `j`).
    pub fn is_soft(self) -> bool {
        use Phoneme::*;
        matches!(
            self,
            Pj | Bj | Tj | Dj | Kj | Gj | Fj | Vj | Sj | Zj | Xj | Mj | Nj | Lj | Rj | Ch | Shch | J
        )
    }

    pub fn is_voiced_obstruent(self) -> bool {
        use Phoneme::*;
        matches!(self, B | Bj | D | Dj | G | Gj | V | Vj | Z | Zj | Zh)
    }

    pub fn is_obstruent(self) -> bool {
        use Phoneme::*;
        self.is_voiced_obstruent()
            || matches!(self, P | Pj | T | Tj | K | Kj | F | Fj | S | Sj | X | Xj | Sh | Ts | Ch | Shch)
    }

    fn devoiced(self) -> Phoneme {
        use Phoneme::*;
        match self {
            B => P,
            Bj => Pj,
            D => T,
            Dj => Tj,
            G => K,
            Gj => Kj,
            V => F,
            Vj => Fj,
            Z => S,
            Zj => Sj,
            Zh => Sh,
            other => other,
        }
    }

    fn voiced(self) -> Phoneme {
        use Phoneme::*;
        match self {
            P => B,
            Pj => Bj,
            T => D,
            Tj => Dj,
            K => G,
            Kj => Gj,
            F => V,
            Fj => Vj,
            S => Z,
            Sj => Zj,
            Sh => Zh,
            other => other,
        }
    }

    fn triggers_voicing(self) -> bool {
        self.is_voiced_obstruent() && !matches!(self, Phoneme::V | Phoneme::Vj)
    }
}

impl fmt::Display for Phoneme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Segment {
    Phone(Phoneme),
    WordBoundary,
}

/// Transcription of a text: phones with word-boundary markers between words.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PhonemeString {
    segments: Vec<Segment>,
}

impl PhonemeString {
    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn phones(&self) -> impl Iterator<Item = Phoneme> + '_ {
        self.segments.iter().filter_map(|s| match s {
            Segment::Phone(p) => Some(*p),
            Segment::WordBoundary => None,
        })
    }

    pub fn words(&self) -> impl Iterator<Item = &[Segment]> {
        self.segments
            .split(|s| *s == Segment::WordBoundary)
            .filter(|w| !w.is_empty())
    }

    pub fn len(&self) -> usize {
        self.phones().count()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }
}

impl fmt::Display for PhonemeString {
    /// Phones separated by spaces, words by `" | "`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for seg in &self.segments {
            match seg {
                Segment::Phone(p) => {
                    if !first {
                        f.write_str(" ")?;
                    }
                    f.write_str(p.label())?;
                    first = false;
                }
                Segment::WordBoundary => {
                    f.write_str(" |")?;
                }
            }
        }
        Ok(())
    }
}

struct VowelSlot {
    pos: usize,
    stressed_mark: bool,
    yo: bool,
    soft_context: bool,
    initial: bool,
}

fn consonant_letter(c: char) -> Option<Phoneme> {
    use Phoneme::*;
    Some(match c {
        'б' => B,
        'в' => V,
        'г' => G,
        'д' => D,
        'ж' => Zh,
        'з' => Z,
        'й' => J,
        'к' => K,
        'л' => L,
        'м' => M,
        'н' => N,
        'п' => P,
        'р' => R,
        'с' => S,
        'т' => T,
        'ф' => F,
        'х' => X,
        'ц' => Ts,
        'ч' => Ch,
        'ш' => Sh,
        'щ' => Shch,
        _ => return None,
    })
}

/// `(vowel, iotated)` for a vowel letter.
fn vowel_letter(c: char) -> Option<(Phoneme, bool)> {
    use Phoneme::*;
    Some(match c {
        'а' => (A, false),
        'о' => (O, false),
        'у' => (U, false),
        'ы' => (Y, false),
        'э' => (E, false),
        'и' => (I, false),
        'я' => (A, true),
        'е' => (E, true),
        'ё' => (O, true),
        'ю' => (U, true),
        _ => return None,
    })
}

fn is_hard_only(p: Phoneme) -> bool {
    matches!(p, Phoneme::Sh | Phoneme::Zh | Phoneme::Ts)
}

fn transcribe_word(word: &[char], out: &mut Vec<Segment>) {
    let mut phones: Vec<Phoneme> = Vec::with_capacity(word.len() + 2);
    let mut vowels: Vec<VowelSlot> = Vec::new();
    let mut after_sign = false;
    let mut prev_consonant = false;

    for &raw in word {
        if raw == STRESS_MARK {
            if let Some(v) = vowels.last_mut() {
                if v.pos + 1 == phones.len() {
                    v.stressed_mark = true;
                }
            }
            continue;
        }
        let c = raw.to_lowercase().next().unwrap_or(raw);
        if let Some(p) = consonant_letter(c) {
            phones.push(p);
            prev_consonant = true;
            after_sign = false;
            continue;
        }
        match c {
            'ь' => {
                if prev_consonant {
                    let last = phones.last_mut().expect("consonant pushed");
                    *last = last.soft();
                }
                after_sign = true;
                prev_consonant = false;
            }
            'ъ' => {
                after_sign = true;
                prev_consonant = false;
            }
            _ => {
                let Some((mut vowel, iotated)) = vowel_letter(c) else { continue };
                let softens = iotated || c == 'и';
                if prev_consonant && softens {
                    let last = phones.last_mut().expect("consonant pushed");
                    if is_hard_only(*last) {
                        if c == 'и' {
                            vowel = Phoneme::Y;
                        }
                    } else {
                        *last = last.soft();
                    }
                } else if (iotated && !prev_consonant) || (c == 'и' && after_sign) {
                    phones.push(Phoneme::J);
                }
                let soft_context = phones.last().is_some_and(|p| p.is_soft());
                let initial = phones.is_empty();
                phones.push(vowel);
                vowels.push(VowelSlot {
                    pos: phones.len() - 1,
                    stressed_mark: false,
                    yo: c == 'ё',
                    soft_context,
                    initial,
                });
                prev_consonant = false;
                after_sign = false;
            }
        }
    }

    if let Some(last) = phones.last_mut() {
        *last = last.devoiced();
    }
    for i in (0..phones.len().saturating_sub(1)).rev() {
        let (cur, next) = (phones[i], phones[i + 1]);
        if !cur.is_obstruent() || !next.is_obstruent() {
            continue;
        }
        if next.is_voiced_obstruent() {
            if next.triggers_voicing() {
                phones[i] = cur.voiced();
            }
        } else {
            phones[i] = cur.devoiced();
        }
    }

    let stressed = vowels
        .iter()
        .position(|v| v.stressed_mark)
        .or_else(|| vowels.iter().position(|v| v.yo))
        .unwrap_or(0);
    for (syllable, slot) in vowels.iter().enumerate() {
        if syllable == stressed {
            continue;
        }
        let first_degree = syllable + 1 == stressed || slot.initial;
        let v = &mut phones[slot.pos];
        *v = match (*v, slot.soft_context) {
            (Phoneme::A | Phoneme::E | Phoneme::O, true) => Phoneme::I,
            (Phoneme::A | Phoneme::O, false) if first_degree => Phoneme::A,
            (Phoneme::A | Phoneme::O, false) => Phoneme::Schwa,
            (Phoneme::E, false) if first_degree => Phoneme::Y,
            (Phoneme::E, false) => Phoneme::Schwa,
            (other, _) => other,
        };
    }

    if phones.is_empty() {
        return;
    }
    if !out.is_empty() {
        out.push(Segment::WordBoundary);
    }
    out.extend(phones.into_iter().map(Segment::Phone));
}

/// Transcribes normalized text. Punctuation and spaces only separate words.
pub fn transcribe(text: &str) -> Result<PhonemeString, PhonemicsError> {
    let charset = Charset::bundled();
    if let Some((position, symbol)) = text
        .chars()
        .enumerate()
        .find(|(_, c)| !charset.contains(*c) && *c != STRESS_MARK)
    {
        return Err(PhonemicsError::NotNormalized { symbol, position });
    }
    let mut segments = Vec::new();
    let mut word: Vec<char> = Vec::new();
    for c in text.chars().chain(std::iter::once(' ')) {
        if is_cyrillic_letter(c) || (c == STRESS_MARK && !word.is_empty()) {
            word.push(c);
        } else if !word.is_empty() {
            transcribe_word(&word, &mut segments);
            word.clear();
        }
    }
    Ok(PhonemeString { segments })
}

/// Relative phoneme frequencies over a corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct PhonemeDistribution {
    counts: BTreeMap<Phoneme, u64>,
    total: u64,
}

impl PhonemeDistribution {
    /// Pools phone counts over transcriptions.
    pub fn from_transcriptions<'a, I>(items: I) -> Result<Self, PhonemicsError>
    where
        I: IntoIterator<Item = &'a PhonemeString>,
    {
        let mut counts = BTreeMap::new();
        let mut total = 0u64;
        for t in items {
            for p in t.phones() {
                *counts.entry(p).or_insert(0) += 1;
                total += 1;
            }
        }
        if total == 0 {
            return Err(PhonemicsError::EmptyCorpus);
        }
        Ok(Self { counts, total })
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, p: Phoneme) -> u64 {
        self.counts.get(&p).copied().unwrap_or(0)
    }

    pub fn frequency(&self, p: Phoneme) -> f64 {
        self.count(p) as f64 / self.total as f64
    }

    /// `(phoneme, frequency)` by descending frequency, ties in inventory order.
    pub fn sorted(&self) -> Vec<(Phoneme, f64)> {
        let mut rows: Vec<(Phoneme, u64)> = self.counts.iter().map(|(p, c)| (*p, *c)).collect();
        rows.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        rows.into_iter()
            .map(|(p, c)| (p, c as f64 / self.total as f64))
            .collect()
    }

    pub fn class_mass(&self, class: PhoneClass) -> f64 {
        self.counts
            .iter()
            .filter(|(p, _)| p.class() == class)
            .map(|(_, c)| *c as f64)
            .sum::<f64>()
            / self.total as f64
    }

    /// `phoneme<TAB>frequency` lines, most frequent first.
    pub fn to_tsv(&self) -> String {
        self.sorted()
            .into_iter()
            .map(|(p, f)| format!("{}\t{f}\n", p.label()))
            .collect()
    }
}

/// Transcribes every text and pools the counts.
pub fn phoneme_distribution<S: AsRef<str>>(texts: &[S]) -> Result<PhonemeDistribution, PhonemicsError> {
    let transcriptions = texts
        .iter()
        .map(|t| transcribe(t.as_ref()))
        .collect::<Result<Vec<_>, _>>()?;
    PhonemeDistribution::from_transcriptions(&transcriptions)
}

/// Count of words whose last phone is a voiced obstruent.
pub fn word_final_voiced_obstruents(t: &PhonemeString) -> usize {
    t.words()
        .filter(|w| matches!(w.last(), Some(Segment::Phone(p)) if p.is_voiced_obstruent()))
        .count()
}
