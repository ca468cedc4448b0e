//! Mono PCM16 WAV I/O, silence trimming and SNR estimation.
//!
//! Files written here are the canonical 44-byte-header layout: `RIFF` size
//! `WAVE`, a 16-byte `fmt ` chunk (PCM, 1 channel, rate, rate·2, 2, 16) and a
//! single `data` chunk of little-endian i16 samples.

use std::io::{Read, Seek};
use std::path::Path;

use thiserror::Error;

/// Rate the corpus was recorded at.
pub const CORPUS_SAMPLE_RATE: u32 = 44_100;

pub const DEFAULT_TRIM_THRESHOLD_DB: f64 = -50.0;
pub const DEFAULT_TRIM_WINDOW_MS: f64 = 20.0;
/// Window length used by [`estimate_snr`].
pub const SNR_WINDOW_MS: f64 = 20.0;

#[derive(Debug, Error)]
pub enum AudioError {
    #[error("unsupported WAV format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt WAV file: {0}")]
    CorruptFile(String),
    #[error("sample {index} = {value} is outside [-1, 1]")]
    OutOfRangeSample { index: usize, value: f64 },
    #[error("sample {index} is not finite")]
    NonFinite { index: usize },
    #[error("sample rate must be positive")]
    ZeroSampleRate,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("signal is entirely below the trim threshold")]
    EmptyAfterTrim,
    #[error("signal is degenerate for SNR estimation: {0}")]
    DegenerateSignal(String),
    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self, AudioError> {
        if sample_rate == 0 {
            return Err(AudioError::ZeroSampleRate);
        }
        if let Some(index) = samples.iter().position(|x| !x.is_finite()) {
            return Err(AudioError::NonFinite { index });
        }
        Ok(Self { samples, sample_rate })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Header facts of a WAV file, read without decoding the payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WavInfo {
    pub sample_rate: u32,
    pub channels: u16,
    pub bits_per_sample: u16,
    pub is_pcm: bool,
    pub frames: u32,
}

impl WavInfo {
    pub fn duration(&self) -> f64 {
        f64::from(self.frames) / f64::from(self.sample_rate.max(1))
    }

    /// Mono 16-bit PCM, the only layout [`read_wav`] accepts.
    pub fn check_supported(&self) -> Result<(), AudioError> {
        if !self.is_pcm {
            return Err(AudioError::UnsupportedFormat("not integer PCM".into()));
        }
        if self.channels != 1 {
            return Err(AudioError::UnsupportedFormat(format!("{} channels", self.channels)));
        }
        if self.bits_per_sample != 16 {
            return Err(AudioError::UnsupportedFormat(format!("{}-bit samples", self.bits_per_sample)));
        }
        Ok(())
    }
}

fn map_hound(e: hound::Error) -> AudioError {
    match e {
        hound::Error::IoError(io)
            if matches!(io.kind(), std::io::ErrorKind::NotFound | std::io::ErrorKind::PermissionDenied) =>
        {
            AudioError::Io(io)
        }
        hound::Error::IoError(io) => AudioError::CorruptFile(io.to_string()),
        hound::Error::FormatError(m) => AudioError::CorruptFile(m.into()),
        hound::Error::Unsupported => AudioError::UnsupportedFormat("unsupported WAV layout".into()),
        hound::Error::TooWide => AudioError::UnsupportedFormat("sample width".into()),
        other => AudioError::CorruptFile(other.to_string()),
    }
}

fn info_of<R: Read>(reader: &hound::WavReader<R>) -> WavInfo {
    let spec = reader.spec();
    WavInfo {
        sample_rate: spec.sample_rate,
        channels: spec.channels,
        bits_per_sample: spec.bits_per_sample,
        is_pcm: spec.sample_format == hound::SampleFormat::Int,
        frames: reader.duration(),
    }
}

pub fn wav_info(path: &Path) -> Result<WavInfo, AudioError> {
    let reader = hound::WavReader::open(path).map_err(map_hound)?;
    Ok(info_of(&reader))
}

pub fn read_wav(path: &Path) -> Result<Waveform, AudioError> {
    let reader = hound::WavReader::open(path).map_err(map_hound)?;
    decode(reader)
}

pub fn read_wav_from<R: Read + Seek>(source: R) -> Result<Waveform, AudioError> {
    decode(hound::WavReader::new(source).map_err(map_hound)?)
}

fn decode<R: Read>(mut reader: hound::WavReader<R>) -> Result<Waveform, AudioError> {
    let info = info_of(&reader);
    info.check_supported()?;
    let samples = reader
        .samples::<i16>()
        .map(|s| s.map(|v| f64::from(v) / 32768.0).map_err(map_hound))
        .collect::<Result<Vec<_>, _>>()?;
    Waveform::new(samples, info.sample_rate)
}

/// Quantizes to i16; 1.0 maps to 32767, -1.0 to -32768.
pub fn quantize(x: f64) -> i16 {
    (x * 32768.0).round().clamp(-32768.0, 32767.0) as i16
}

fn check_range(wave: &Waveform) -> Result<(), AudioError> {
    match wave.samples.iter().position(|x| x.abs() > 1.0) {
        Some(index) => Err(AudioError::OutOfRangeSample { index, value: wave.samples[index] }),
        None => Ok(()),
    }
}

pub fn write_wav(wave: &Waveform, path: &Path) -> Result<(), AudioError> {
    check_range(wave)?;
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    encode(wave, file)
}

/// Serialises to an in-memory WAV file.
pub fn wav_bytes(wave: &Waveform) -> Result<Vec<u8>, AudioError> {
    check_range(wave)?;
    let mut cursor = std::io::Cursor::new(Vec::with_capacity(44 + 2 * wave.len()));
    encode(wave, &mut cursor)?;
    Ok(cursor.into_inner())
}

fn encode<W: std::io::Write + Seek>(wave: &Waveform, sink: W) -> Result<(), AudioError> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: wave.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::new(sink, spec).map_err(map_hound)?;
    {
        let mut w16 = writer.get_i16_writer(wave.samples.len() as u32);
        for &x in &wave.samples {
            w16.write_sample(quantize(x));
        }
        w16.flush().map_err(map_hound)?;
    }
    writer.finalize().map_err(map_hound)
}

fn window_len(wave: &Waveform, window_ms: f64) -> usize {
    ((window_ms * f64::from(wave.sample_rate) / 1000.0).round() as usize).max(1)
}

fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

/// Cuts leading and trailing windows whose RMS is below `threshold_db` dBFS.
///
/// Leading windows are aligned to the start, trailing windows to the end, so
/// each boundary lands on the edge of the first loud window from that side.
pub fn trim_silence(wave: &Waveform, threshold_db: f64, window_ms: f64) -> Result<Waveform, AudioError> {
    if !(threshold_db < 0.0) {
        return Err(AudioError::InvalidParameter(format!("threshold {threshold_db} dB must be negative")));
    }
    if !(window_ms > 0.0) || !window_ms.is_finite() {
        return Err(AudioError::InvalidParameter(format!("window {window_ms} ms must be positive")));
    }
    let threshold = 10f64.powf(threshold_db / 20.0);
    let w = window_len(wave, window_ms);
    let x = &wave.samples;
    let n = x.len();

    let start = (0..n)
        .step_by(w)
        .find(|&s| rms(&x[s..(s + w).min(n)]) >= threshold)
        .ok_or(AudioError::EmptyAfterTrim)?;
    let end = (0..n)
        .step_by(w)
        .map(|k| n - k)
        .find(|&e| rms(&x[e.saturating_sub(w)..e]) >= threshold)
        .ok_or(AudioError::EmptyAfterTrim)?;
    Waveform::new(x[start..end.max(start)].to_vec(), wave.sample_rate)
}

/// Percentile SNR estimate in dB.
///
/// The signal is cut into non-overlapping 20 ms windows. The quietest
/// `max(1, floor(p·n))` windows are taken as noise, the rest as signal, and
/// the ratio of their mean powers is returned.
pub fn estimate_snr(wave: &Waveform, noise_percentile: f64) -> Result<f64, AudioError> {
    if !(noise_percentile > 0.0 && noise_percentile < 0.5) {
        return Err(AudioError::InvalidParameter(format!(
            "noise percentile {noise_percentile} must lie in (0, 0.5)"
        )));
    }
    let w = window_len(wave, SNR_WINDOW_MS);
    let mut powers: Vec<f64> = wave
        .samples
        .chunks_exact(w)
        .map(|c| c.iter().map(|v| v * v).sum::<f64>() / w as f64)
        .collect();
    if powers.len() < 2 {
        return Err(AudioError::DegenerateSignal("fewer than two analysis windows".into()));
    }
    powers.sort_by(f64::total_cmp);
    let k = ((noise_percentile * powers.len() as f64).floor() as usize).max(1);
    let mean = |p: &[f64]| p.iter().sum::<f64>() / p.len() as f64;
    let noise = mean(&powers[..k]);
    let signal = mean(&powers[k..]);
    if noise == 0.0 {
        return Err(AudioError::DegenerateSignal("noise power is zero".into()));
    }
    Ok(10.0 * (signal / noise).log10())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(freq: f64, seconds: f64, amp: f64) -> Vec<f64> {
        let n = (seconds * 44100.0).round() as usize;
        (0..n)
            .map(|i| amp * (2.0 * std::f64::consts::PI * freq * i as f64 / 44100.0).sin())
            .collect()
    }

    #[test]
    fn rejects_bad_waveforms() {
        assert!(matches!(Waveform::new(vec![0.0], 0), Err(AudioError::ZeroSampleRate)));
        assert!(matches!(
            Waveform::new(vec![0.0, f64::NAN], 8000),
            Err(AudioError::NonFinite { index: 1 })
        ));
    }

    #[test]
    fn header_layout_is_canonical() {
        let wave = Waveform::new(vec![0.0, 0.5, -1.0, 1.0], 44100).unwrap();
        let bytes = wav_bytes(&wave).unwrap();
        assert_eq!(bytes.len(), 44 + 8);
        assert_eq!(&bytes[0..4], b"RIFF");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 36 + 8);
        assert_eq!(&bytes[8..16], b"WAVEfmt ");
        assert_eq!(u32::from_le_bytes(bytes[16..20].try_into().unwrap()), 16);
        assert_eq!(u16::from_le_bytes(bytes[20..22].try_into().unwrap()), 1);
        assert_eq!(u16::from_le_bytes(bytes[22..24].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[24..28].try_into().unwrap()), 44100);
        assert_eq!(u32::from_le_bytes(bytes[28..32].try_into().unwrap()), 88200);
        assert_eq!(&bytes[36..40], b"data");
        let pcm: Vec<i16> = bytes[44..]
            .chunks(2)
            .map(|c| i16::from_le_bytes([c[0], c[1]]))
            .collect();
        assert_eq!(pcm, vec![0, 16384, -32768, 32767]);
    }

    #[test]
    fn out_of_range_is_an_error() {
        let wave = Waveform::new(vec![0.0, 1.5], 44100).unwrap();
        assert!(matches!(
            wav_bytes(&wave),
            Err(AudioError::OutOfRangeSample { index: 1, .. })
        ));
    }

    #[test]
    fn trim_keeps_untrimmable_signal() {
        let wave = Waveform::new(tone(440.0, 0.5, 0.5), 44100).unwrap();
        let out = trim_silence(&wave, -50.0, 20.0).unwrap();
        assert_eq!(out, wave);
    }

    #[test]
    fn trim_padded_tone() {
        let mut x = vec![0.0; 22050];
        x.extend(tone(440.0, 1.0, 0.5));
        x.extend(vec![0.0; 22050]);
        let wave = Waveform::new(x, 44100).unwrap();
        let out = trim_silence(&wave, -50.0, 20.0).unwrap();
        let w = 882;
        assert!(out.len() >= 44100 && out.len() <= 44100 + 2 * w, "{}", out.len());
        let start = wave.samples().windows(out.len()).position(|s| s == out.samples()).unwrap();
        assert!(start <= 22050 && start + w > 22050);
    }

    #[test]
    fn trim_silence_only() {
        let wave = Waveform::new(vec![0.0; 4410], 44100).unwrap();
        assert!(matches!(trim_silence(&wave, -50.0, 20.0), Err(AudioError::EmptyAfterTrim)));
        assert!(matches!(
            trim_silence(&wave, 0.0, 20.0),
            Err(AudioError::InvalidParameter(_))
        ));
    }

    #[test]
    fn snr_of_noiseless_signal_is_degenerate() {
        let mut x = vec![0.0; 8820];
        x.extend(tone(440.0, 1.8, 1.0));
        let wave = Waveform::new(x, 44100).unwrap();
        assert!(matches!(estimate_snr(&wave, 0.1), Err(AudioError::DegenerateSignal(_))));
        assert!(matches!(estimate_snr(&wave, 0.5), Err(AudioError::InvalidParameter(_))));
    }
}
