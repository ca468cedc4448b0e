//! Phase retrieval from a magnitude spectrogram with (fast) Griffin-Lim.
//!
//! With `A` the target magnitude, `P(X) = A·X/|X|` and `c₀ = A·e^{iφ₀}`:
//!
//! ```text
//! proj₋₁ = c₀
//! for k in 0..iterations:
//!     X_k    = stft(istft(c_k))
//!     proj_k = P(X_k)
//!     c_{k+1} = proj_k + α·(proj_k − proj_{k−1})
//! y = istft(P(c_iterations))
//! ```
//!
//! `α = 0` is the classic algorithm. `trace[k]` is the spectral convergence
//! of `istft(c_k)`, which comes for free from `X_k`.

use ndarray::{Array2, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::audio::{AudioError, Waveform};
use crate::features::{Complex64, ComplexSpectrogram, FeatureError, LinearSpectrogram, StftEngine};

/// Lower cap on reported spectral convergence.
pub const CONVERGENCE_FLOOR_DB: f64 = -100.0;

#[derive(Debug, Error)]
pub enum VocoderError {
    #[error("invalid Griffin-Lim configuration: {0}")]
    InvalidConfig(String),
    #[error("target spectrogram is all zeros")]
    ZeroTarget,
    #[error("reconstruction has {got} frames, target has {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Audio(#[from] AudioError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitPhase {
    #[default]
    Zeros,
    /// Uniform phases from a seeded ChaCha8 stream, frame-major.
    Random(u64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GriffinLimConfig {
    pub iterations: usize,
    pub alpha: f64,
    pub init: InitPhase,
}

impl Default for GriffinLimConfig {
    fn default() -> Self {
        Self { iterations: 300, alpha: 0.99, init: InitPhase::Zeros }
    }
}

impl GriffinLimConfig {
    pub fn classic(iterations: usize) -> Self {
        Self { iterations, alpha: 0.0, init: InitPhase::Zeros }
    }

    pub fn validate(&self) -> Result<(), VocoderError> {
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(VocoderError::InvalidConfig(format!("alpha {} must lie in [0, 1)", self.alpha)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub wave: Waveform,
    /// Spectral convergence in dB of each iterate before its projection.
    pub trace: Vec<f64>,
}

fn with_target_magnitude(target: &Array2<f64>, phase_of: &ComplexSpectrogram, out: &mut ComplexSpectrogram) {
    Zip::from(out).and(target).and(phase_of).for_each(|o, &a, &x| {
        let n = x.norm();
        *o = if n > 0.0 { x * (a / n) } else { Complex64::new(a, 0.0) };
    });
}

fn convergence_db(target: &Array2<f64>, rebuilt: &ComplexSpectrogram, target_norm: f64) -> f64 {
    let mut err = 0.0;
    Zip::from(target).and(rebuilt).for_each(|&a, x| err += (x.norm() - a).powi(2));
    ratio_to_db(err.sqrt() / target_norm)
}

fn ratio_to_db(ratio: f64) -> f64 {
    if ratio > 0.0 {
        (20.0 * ratio.log10()).max(CONVERGENCE_FLOOR_DB)
    } else {
        CONVERGENCE_FLOOR_DB
    }
}

pub fn griffin_lim(mag: &LinearSpectrogram, cfg: &GriffinLimConfig) -> Result<Waveform, VocoderError> {
    Ok(reconstruct(mag, cfg, false)?.wave)
}

/// Runs the iteration; the trace is filled only when `trace` is set.
pub fn reconstruct(mag: &LinearSpectrogram, cfg: &GriffinLimConfig, trace: bool) -> Result<Reconstruction, VocoderError> {
    cfg.validate()?;
    let target = mag.mags();
    let mut engine = StftEngine::new(*mag.config())?;
    let len = mag.config().synthesis_len(mag.n_frames());

    let mut c: ComplexSpectrogram = match cfg.init {
        InitPhase::Zeros => target.mapv(|a| Complex64::new(a, 0.0)),
        InitPhase::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            target.mapv(|a| Complex64::from_polar(a, rng.random_range(0.0..std::f64::consts::TAU)))
        }
    };
    let target_norm = target.iter().map(|a| a * a).sum::<f64>().sqrt();
    let mut prev = c.clone();
    let mut proj = c.clone();
    let mut history = Vec::new();

    for _ in 0..cfg.iterations {
        let y = engine.istft(&c, Some(len))?;
        let rebuilt = if len == 0 { Array2::zeros(c.dim()) } else { engine.stft(&y)? };
        if trace && target_norm > 0.0 {
            history.push(convergence_db(target, &rebuilt, target_norm));
        }
        with_target_magnitude(target, &rebuilt, &mut proj);
        Zip::from(&mut c).and(&proj).and(&prev).for_each(|c, &p, &q| {
            *c = p + (p - q) * cfg.alpha;
        });
        std::mem::swap(&mut prev, &mut proj);
    }

    with_target_magnitude(target, &c.clone(), &mut c);
    let samples = engine.istft(&c, Some(len))?;
    Ok(Reconstruction { wave: Waveform::new(samples, mag.sample_rate())?, trace: history })
}

/// `20·log10(‖|STFT(y)| − A‖_F / ‖A‖_F)`, capped below at −100 dB.
pub fn spectral_convergence(target: &LinearSpectrogram, y: &Waveform) -> Result<f64, VocoderError> {
    let a = target.mags();
    let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(VocoderError::ZeroTarget);
    }
    let cfg = target.config();
    let frames = if y.is_empty() { 0 } else { cfg.n_frames(y.len())? };
    if frames != target.n_frames() {
        return Err(VocoderError::ShapeMismatch { expected: target.n_frames(), got: frames });
    }
    let spec = StftEngine::new(*cfg)?.stft(y.samples())?;
    Ok(convergence_db(a, &spec, norm))
}
