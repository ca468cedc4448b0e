use ndarray::Array2;

use super::{FeatureError, LinearSpectrogram};

/// HTK mel scale.
pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MelConfig {
    pub bands: usize,
    pub f_min: f64,
    /// `None` means the Nyquist frequency.
    pub f_max: Option<f64>,
    pub log: bool,
    pub floor: f64,
}

impl Default for MelConfig {
    fn default() -> Self {
        Self { bands: 80, f_min: 0.0, f_max: None, log: true, floor: 1e-5 }
    }
}

/// Triangular filters with unit peak, `bands × bins`.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterbank {
    weights: Array2<f64>,
}

impl MelFilterbank {
    pub fn new(bands: usize, f_min: f64, f_max: f64, sample_rate: u32, fft_size: usize) -> Result<Self, FeatureError> {
        let nyquist = f64::from(sample_rate) / 2.0;
        if bands == 0 {
            return Err(FeatureError::InvalidBandRange("at least one band is required".into()));
        }
        if !(f_min >= 0.0 && f_min < f_max && f_max <= nyquist) {
            return Err(FeatureError::InvalidBandRange(format!(
                "need 0 <= f_min ({f_min}) < f_max ({f_max}) <= {nyquist}"
            )));
        }
        let (m_lo, m_hi) = (hz_to_mel(f_min), hz_to_mel(f_max));
        let edges: Vec<f64> = (0..bands + 2)
            .map(|i| mel_to_hz(m_lo + (m_hi - m_lo) * i as f64 / (bands + 1) as f64))
            .collect();
        let bins = fft_size / 2 + 1;
        let mut weights = Array2::zeros((bands, bins));
        for k in 0..bins {
            let f = k as f64 * f64::from(sample_rate) / fft_size as f64;
            for b in 0..bands {
                let (lo, mid, hi) = (edges[b], edges[b + 1], edges[b + 2]);
                let w = if f > lo && f <= mid {
                    (f - lo) / (mid - lo)
                } else if f > mid && f < hi {
                    (hi - f) / (hi - mid)
                } else {
                    0.0
                };
                weights[[b, k]] = w;
            }
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn bands(&self) -> usize {
        self.weights.nrows()
    }

    /// `frames × bins` magnitudes to `frames × bands`.
    pub fn apply(&self, mags: &Array2<f64>) -> Array2<f64> {
        mags.dot(&self.weights.t())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MelSpectrogram {
    values: Array2<f64>,
    log: bool,
}

impl MelSpectrogram {
    pub fn new(values: Array2<f64>, log: bool) -> Result<Self, FeatureError> {
        if values.ncols() == 0 {
            return Err(FeatureError::InvalidSpectrogram("no mel bands".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(FeatureError::InvalidSpectrogram("non-finite mel value".into()));
        }
        if !log && values.iter().any(|v| *v < 0.0) {
            return Err(FeatureError::InvalidSpectrogram("negative linear-scale mel value".into()));
        }
        Ok(Self { values, log })
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn is_log(&self) -> bool {
        self.log
    }

    pub fn n_frames(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_bands(&self) -> usize {
        self.values.ncols()
    }
}

pub fn mel_spectrogram(lin: &LinearSpectrogram, cfg: &MelConfig) -> Result<MelSpectrogram, FeatureError> {
    let f_max = cfg.f_max.unwrap_or(f64::from(lin.sample_rate()) / 2.0);
    let bank = MelFilterbank::new(cfg.bands, cfg.f_min, f_max, lin.sample_rate(), lin.config().fft_size)?;
    let mut values = bank.apply(lin.mags());
    if cfg.log {
        if !(cfg.floor > 0.0) {
            return Err(FeatureError::InvalidBandRange(format!("log floor {} must be positive", cfg.floor)));
        }
        values.mapv_inplace(|v| v.max(cfg.floor).ln());
    }
    MelSpectrogram::new(values, cfg.log)
}
