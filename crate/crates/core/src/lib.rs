//! Russian TTS corpus tooling: text normalization, grapheme-to-phoneme
//! transcription, audio I/O, spectral features, Griffin-Lim reconstruction,
//! corpus statistics, LN-LSTM/attention primitives and MOS aggregation.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audio;
pub mod charset;
pub mod corpus;
pub mod features;
pub mod mos;
pub mod neural;
pub mod phonemics;
pub mod textnorm;
pub mod vocoder;

pub use audio::Waveform;
pub use charset::Charset;
pub use corpus::{CorpusStats, Utterance};
pub use features::{LinearSpectrogram, MelSpectrogram, StftConfig};
pub use mos::{Axis, Kind, MosReport, Rating};
pub use phonemics::{Phoneme, PhonemeString};
pub use textnorm::AcronymLexicon;
pub use vocoder::GriffinLimConfig;
