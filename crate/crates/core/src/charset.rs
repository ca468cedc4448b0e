//! The fixed 78-symbol text alphabet.
//!
//! Index order is the embedding row order: the 33 capital Cyrillic letters
//! (alphabetical, `Ё` after `Е`), the 33 lowercase letters, the space, the
//! ten ASCII punctuation marks `' , - ( ) . : ; ! ?` and finally the em-dash.
//! The canonical listing lives in `data/charset.v1.txt`, one symbol per line.

use std::collections::HashMap;
use std::path::Path;
use std::sync::OnceLock;

use thiserror::Error;

/// Number of symbols in the alphabet (and rows of the embedding table).
pub const CHARSET_SIZE: usize = 78;

/// Version tag of the bundled charset file.
pub const CHARSET_VERSION: u32 = 1;

/// The bundled charset file, byte for byte.
pub const CHARSET_V1: &str = include_str!("../data/charset.v1.txt");

const UPPER: &str = "АБВГДЕЁЖЗИЙКЛМНОПРСТУФХЦЧШЩЪЫЬЭЮЯ";
const LOWER: &str = "абвгдеёжзийклмнопрстуфхцчшщъыьэюя";
const PUNCT: &str = "',-().:;!?—";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CharsetError {
    #[error("charset must contain exactly {CHARSET_SIZE} symbols, found {0}")]
    WrongSize(usize),
    #[error("line {line}: expected exactly one symbol, found {found:?}")]
    BadLine { line: usize, found: String },
    #[error("duplicate symbol {0:?}")]
    Duplicate(char),
    #[error("required symbol {0:?} is missing")]
    Missing(char),
    #[error("symbol {symbol:?} at position {position} is not in the charset")]
    UnknownSymbol { symbol: char, position: usize },
    #[error("id {0} is outside [0, {CHARSET_SIZE})")]
    IndexOutOfRange(usize),
    #[error("reading charset file: {0}")]
    Io(String),
}

/// Ordered alphabet with a symbol/index bijection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Charset {
    symbols: Vec<char>,
    index: HashMap<char, usize>,
}

impl Default for Charset {
    fn default() -> Self {
        let symbols = UPPER
            .chars()
            .chain(LOWER.chars())
            .chain(std::iter::once(' '))
            .chain(PUNCT.chars())
            .collect();
        Self::from_symbols(symbols).expect("built-in charset is valid")
    }
}

impl Charset {
    /// Shared instance of the built-in charset.
    pub fn bundled() -> &'static Charset {
        static CHARSET: OnceLock<Charset> = OnceLock::new();
        CHARSET.get_or_init(Charset::default)
    }

    /// Builds a charset from an ordered symbol list, checking every invariant.
    pub fn from_symbols(symbols: Vec<char>) -> Result<Self, CharsetError> {
        if symbols.len() != CHARSET_SIZE {
            return Err(CharsetError::WrongSize(symbols.len()));
        }
        let mut index = HashMap::with_capacity(CHARSET_SIZE);
        for (i, &c) in symbols.iter().enumerate() {
            if index.insert(c, i).is_some() {
                return Err(CharsetError::Duplicate(c));
            }
        }
        for c in UPPER.chars().chain(LOWER.chars()).chain([' ']).chain(PUNCT.chars()) {
            if !index.contains_key(&c) {
                return Err(CharsetError::Missing(c));
            }
        }
        Ok(Self { symbols, index })
    }

    /// Parses the one-symbol-per-line file format. A trailing newline is allowed.
    pub fn parse(text: &str) -> Result<Self, CharsetError> {
        let body = text.strip_suffix('\n').unwrap_or(text);
        let mut symbols = Vec::new();
        for (i, line) in body.split('\n').enumerate() {
            let mut chars = line.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => symbols.push(c),
                _ => {
                    return Err(CharsetError::BadLine {
                        line: i + 1,
                        found: line.to_string(),
                    })
                }
            }
        }
        Self::from_symbols(symbols)
    }

    pub fn load(path: &Path) -> Result<Self, CharsetError> {
        let text = std::fs::read_to_string(path).map_err(|e| CharsetError::Io(e.to_string()))?;
        Self::parse(&text)
    }

    /// Serialises to the file format (78 lines, LF-terminated).
    pub fn to_file_string(&self) -> String {
        let mut out = String::with_capacity(CHARSET_SIZE * 3);
        for &c in &self.symbols {
            out.push(c);
            out.push('\n');
        }
        out
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn contains(&self, c: char) -> bool {
        self.index.contains_key(&c)
    }

    pub fn index_of(&self, c: char) -> Option<usize> {
        self.index.get(&c).copied()
    }

    pub fn symbol(&self, id: usize) -> Option<char> {
        self.symbols.get(id).copied()
    }

    /// Maps text to embedding ids.
    pub fn encode(&self, text: &str) -> Result<Vec<usize>, CharsetError> {
        text.chars()
            .enumerate()
            .map(|(position, symbol)| {
                self.index_of(symbol)
                    .ok_or(CharsetError::UnknownSymbol { symbol, position })
            })
            .collect()
    }

    pub fn decode(&self, ids: &[usize]) -> Result<String, CharsetError> {
        ids.iter()
            .map(|&id| self.symbol(id).ok_or(CharsetError::IndexOutOfRange(id)))
            .collect()
    }
}

/// True for the 66 Cyrillic letters of the alphabet.
pub fn is_cyrillic_letter(c: char) -> bool {
    matches!(c, 'А'..='я' | 'Ё' | 'ё')
}

pub fn is_cyrillic_upper(c: char) -> bool {
    matches!(c, 'А'..='Я' | 'Ё')
}
