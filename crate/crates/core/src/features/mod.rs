//! STFT analysis/synthesis, linear and mel spectrograms, L1 losses and the
//! RSLF feature container.
//!
//! Frame `t` of the STFT covers original samples `t·hop − shift .. t·hop −
//! shift + fft_size`, where `shift` is `fft_size/2` with centering (the
//! signal is reflect-padded) and `(fft_size − win_length)/2` without. The
//! window of `win_length` samples sits in the middle of the FFT buffer.

mod container;
mod loss;
mod mel;

use std::sync::Arc;

use ndarray::Array2;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

use crate::audio::Waveform;

pub use container::{decode_rslf, encode_rslf, read_rslf, write_rslf, RSLF_MAGIC, RSLF_VERSION};
pub use loss::{loss_lin, loss_mel, loss_total, mean_abs_diff, LossReport};
pub use mel::{hz_to_mel, mel_spectrogram, mel_to_hz, MelConfig, MelFilterbank, MelSpectrogram};
pub use rustfft::num_complex::Complex64;

/// Complex STFT, frames × (fft_size/2 + 1).
pub type ComplexSpectrogram = Array2<Complex64>;

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("invalid STFT configuration: {0}")]
    InvalidConfig(String),
    #[error("signal of {len} samples is shorter than the {needed}-sample window")]
    SignalTooShort { len: usize, needed: usize },
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch { left: (usize, usize), right: (usize, usize) },
    #[error("cannot compare log-compressed with linear-scale mel values")]
    ScaleMismatch,
    #[error("invalid band range: {0}")]
    InvalidBandRange(String),
    #[error("invalid spectrogram: {0}")]
    InvalidSpectrogram(String),
    #[error("loss must be finite and non-negative, got {0}")]
    NegativeLoss(f64),
    #[error("feature container: {0}")]
    Container(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WindowKind {
    #[default]
    Hann,
}

impl WindowKind {
    /// Periodic window of `len` samples.
    pub fn samples(self, len: usize) -> Vec<f64> {
        match self {
            WindowKind::Hann => (0..len)
                .map(|n| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * n as f64 / len as f64).cos())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StftConfig {
    pub fft_size: usize,
    pub win_length: usize,
    pub hop_length: usize,
    pub window: WindowKind,
    pub center: bool,
}

impl Default for StftConfig {
    fn default() -> Self {
        Self {
            fft_size: 2048,
            win_length: 2048,
            hop_length: 512,
            window: WindowKind::Hann,
            center: true,
        }
    }
}

/// Largest relative ripple of the overlap-added window still accepted as constant.
pub const COLA_TOLERANCE: f64 = 1e-10;

impl StftConfig {
    pub fn new(fft_size: usize, win_length: usize, hop_length: usize) -> Result<Self, FeatureError> {
        let cfg = Self { fft_size, win_length, hop_length, ..Self::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), FeatureError> {
        let bad = |m: String| Err(FeatureError::InvalidConfig(m));
        if !self.fft_size.is_power_of_two() || self.fft_size < 2 {
            return bad(format!("fft size {} is not a power of two", self.fft_size));
        }
        if self.hop_length == 0 || self.hop_length > self.win_length || self.win_length > self.fft_size {
            return bad(format!(
                "need 0 < hop ({}) <= win ({}) <= fft ({})",
                self.hop_length, self.win_length, self.fft_size
            ));
        }
        let ripple = cola_ripple(&self.window.samples(self.win_length), self.hop_length);
        if ripple > COLA_TOLERANCE {
            return bad(format!(
                "window does not overlap-add to a constant at hop {} (ripple {ripple:.3e})",
                self.hop_length
            ));
        }
        Ok(())
    }

    pub fn n_bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    fn shift(&self) -> usize {
        if self.center {
            self.fft_size / 2
        } else {
            (self.fft_size - self.win_length) / 2
        }
    }

    pub fn n_frames(&self, len: usize) -> Result<usize, FeatureError> {
        if self.center {
            if len == 0 {
                return Err(FeatureError::SignalTooShort { len, needed: 1 });
            }
            Ok(1 + len / self.hop_length)
        } else {
            if len < self.win_length {
                return Err(FeatureError::SignalTooShort { len, needed: self.win_length });
            }
            Ok(1 + (len - self.win_length) / self.hop_length)
        }
    }

    /// Samples of a `len`-sample signal covered by a full complement of
    /// overlapping frames. Without centering the first and last
    /// `win_length − hop_length` samples are excluded.
    pub fn interior(&self, len: usize) -> std::ops::Range<usize> {
        let Ok(frames) = self.n_frames(len) else { return 0..0 };
        let covered = self.synthesis_len(frames).min(len);
        if self.center {
            0..covered
        } else {
            let edge = self.win_length - self.hop_length;
            edge.min(covered)..covered.saturating_sub(edge).max(edge.min(covered))
        }
    }

    /// Signal length [`istft`] produces for `frames` frames when none is requested.
    pub fn synthesis_len(&self, frames: usize) -> usize {
        if frames == 0 {
            return 0;
        }
        let body = self.hop_length * (frames - 1);
        if self.center {
            body
        } else {
            body + self.win_length
        }
    }
}

/// `(max − min) / mean` of the overlap-added window over one hop period.
pub fn cola_ripple(window: &[f64], hop: usize) -> f64 {
    let sums: Vec<f64> = (0..hop)
        .map(|n| window.iter().skip(n).step_by(hop).sum())
        .collect();
    let max = sums.iter().copied().fold(f64::MIN, f64::max);
    let min = sums.iter().copied().fold(f64::MAX, f64::min);
    let mean = sums.iter().sum::<f64>() / hop as f64;
    if mean <= 0.0 {
        f64::INFINITY
    } else {
        (max - min) / mean
    }
}

fn reflect(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let mut k = i.rem_euclid(period);
    if k >= n as isize {
        k = period - k;
    }
    k as usize
}

/// Reusable STFT/ISTFT plans for one configuration.
pub struct StftEngine {
    cfg: StftConfig,
    window: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    buffer: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl StftEngine {
    pub fn new(cfg: StftConfig) -> Result<Self, FeatureError> {
        cfg.validate()?;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(cfg.fft_size);
        let inverse = planner.plan_fft_inverse(cfg.fft_size);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        let mut window = vec![0.0; cfg.fft_size];
        let off = (cfg.fft_size - cfg.win_length) / 2;
        window[off..off + cfg.win_length].copy_from_slice(&cfg.window.samples(cfg.win_length));
        Ok(Self {
            cfg,
            window,
            forward,
            inverse,
            buffer: vec![Complex64::default(); cfg.fft_size],
            scratch: vec![Complex64::default(); scratch_len],
        })
    }

    pub fn config(&self) -> &StftConfig {
        &self.cfg
    }

    /// FFT-length window with the taper centred and zeros outside it.
    pub fn padded_window(&self) -> &[f64] {
        &self.window
    }

    pub fn stft(&mut self, x: &[f64]) -> Result<ComplexSpectrogram, FeatureError> {
        let cfg = self.cfg;
        let frames = cfg.n_frames(x.len())?;
        let bins = cfg.n_bins();
        let shift = cfg.shift() as isize;
        let mut out = Array2::zeros((frames, bins));
        for t in 0..frames {
            let base = (t * cfg.hop_length) as isize - shift;
            for (j, slot) in self.buffer.iter_mut().enumerate() {
                let w = self.window[j];
                let v = if w == 0.0 {
                    0.0
                } else {
                    let i = base + j as isize;
                    let i = if cfg.center { reflect(i, x.len()) } else { i as usize };
                    w * x[i]
                };
                *slot = Complex64::new(v, 0.0);
            }
            self.forward.process_with_scratch(&mut self.buffer, &mut self.scratch);
            for (k, v) in out.row_mut(t).iter_mut().enumerate() {
                *v = self.buffer[k];
            }
        }
        Ok(out)
    }

    /// Least-squares overlap-add inverse. `len` defaults to [`StftConfig::synthesis_len`].
    pub fn istft(&mut self, spec: &ComplexSpectrogram, len: Option<usize>) -> Result<Vec<f64>, FeatureError> {
        let cfg = self.cfg;
        let (frames, bins) = spec.dim();
        if bins != cfg.n_bins() {
            return Err(FeatureError::ShapeMismatch { left: (frames, bins), right: (frames, cfg.n_bins()) });
        }
        let n = cfg.fft_size;
        let total = if frames == 0 { 0 } else { cfg.hop_length * (frames - 1) + n };
        let mut num = vec![0.0; total];
        let mut den = vec![0.0; total];
        let scale = 1.0 / n as f64;
        for t in 0..frames {
            let row = spec.row(t);
            self.buffer[0] = row[0];
            for k in 1..bins {
                self.buffer[k] = row[k];
                if k < n - k {
                    self.buffer[n - k] = row[k].conj();
                }
            }
            self.inverse.process_with_scratch(&mut self.buffer, &mut self.scratch);
            let base = t * cfg.hop_length;
            for j in 0..n {
                let w = self.window[j];
                if w != 0.0 {
                    num[base + j] += w * self.buffer[j].re * scale;
                    den[base + j] += w * w;
                }
            }
        }
        let shift = cfg.shift();
        let len = len.unwrap_or_else(|| cfg.synthesis_len(frames));
        Ok((0..len)
            .map(|i| {
                let b = i + shift;
                if b < total && den[b] > f64::MIN_POSITIVE {
                    num[b] / den[b]
                } else {
                    0.0
                }
            })
            .collect())
    }
}

pub fn stft(x: &[f64], cfg: &StftConfig) -> Result<ComplexSpectrogram, FeatureError> {
    StftEngine::new(*cfg)?.stft(x)
}

pub fn istft(spec: &ComplexSpectrogram, cfg: &StftConfig, len: Option<usize>) -> Result<Vec<f64>, FeatureError> {
    StftEngine::new(*cfg)?.istft(spec, len)
}

/// Energy of the full two-sided spectrum rebuilt from one-sided frames,
/// divided by the FFT size. Equals [`windowed_energy`] by Parseval.
pub fn spectral_energy(spec: &ComplexSpectrogram, cfg: &StftConfig) -> f64 {
    let n = cfg.fft_size;
    let mut total = 0.0;
    for row in spec.rows() {
        for (k, v) in row.iter().enumerate() {
            let weight = if k == 0 || k == n / 2 { 1.0 } else { 2.0 };
            total += weight * v.norm_sqr();
        }
    }
    total / n as f64
}

/// Sum over frames of the squared windowed samples.
pub fn windowed_energy(x: &[f64], cfg: &StftConfig) -> Result<f64, FeatureError> {
    let engine = StftEngine::new(*cfg)?;
    let frames = cfg.n_frames(x.len())?;
    let shift = cfg.shift() as isize;
    let mut total = 0.0;
    for t in 0..frames {
        let base = (t * cfg.hop_length) as isize - shift;
        for (j, &w) in engine.window.iter().enumerate() {
            if w != 0.0 {
                let i = base + j as isize;
                let i = if cfg.center { reflect(i, x.len()) } else { i as usize };
                total += (w * x[i]).powi(2);
            }
        }
    }
    Ok(total)
}

/// Magnitude STFT with its analysis parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSpectrogram {
    mags: Array2<f64>,
    sample_rate: u32,
    cfg: StftConfig,
}

impl LinearSpectrogram {
    pub fn new(mags: Array2<f64>, sample_rate: u32, cfg: StftConfig) -> Result<Self, FeatureError> {
        cfg.validate()?;
        if mags.ncols() != cfg.n_bins() {
            return Err(FeatureError::InvalidSpectrogram(format!(
                "{} bins, expected {}",
                mags.ncols(),
                cfg.n_bins()
            )));
        }
        if sample_rate == 0 {
            return Err(FeatureError::InvalidSpectrogram("sample rate is zero".into()));
        }
        if mags.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(FeatureError::InvalidSpectrogram("entries must be finite and non-negative".into()));
        }
        Ok(Self { mags, sample_rate, cfg })
    }

    pub fn from_complex(spec: &ComplexSpectrogram, sample_rate: u32, cfg: StftConfig) -> Result<Self, FeatureError> {
        Self::new(spec.mapv(|c| c.norm()), sample_rate, cfg)
    }

    pub fn mags(&self) -> &Array2<f64> {
        &self.mags
    }

    pub fn into_mags(self) -> Array2<f64> {
        self.mags
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn config(&self) -> &StftConfig {
        &self.cfg
    }

    pub fn n_frames(&self) -> usize {
        self.mags.nrows()
    }

    pub fn n_bins(&self) -> usize {
        self.mags.ncols()
    }

    pub fn frame_rate(&self) -> f64 {
        f64::from(self.sample_rate) / self.cfg.hop_length as f64
    }

    pub fn bin_frequency(&self, k: usize) -> f64 {
        k as f64 * f64::from(self.sample_rate) / self.cfg.fft_size as f64
    }
}

pub fn linear_spectrogram(wave: &Waveform, cfg: &StftConfig) -> Result<LinearSpectrogram, FeatureError> {
    let spec = stft(wave.samples(), cfg)?;
    LinearSpectrogram::from_complex(&spec, wave.sample_rate(), *cfg)
}
