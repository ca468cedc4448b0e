use ndarray::Array2;

use super::{FeatureError, LinearSpectrogram, MelSpectrogram};

/// Mean absolute elementwise difference, accumulated row-major.
pub fn mean_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> Result<f64, FeatureError> {
    if a.dim() != b.dim() {
        return Err(FeatureError::ShapeMismatch { left: a.dim(), right: b.dim() });
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        sum += (x - y).abs();
    }
    Ok(sum / a.len() as f64)
}

pub fn loss_mel(predicted: &MelSpectrogram, target: &MelSpectrogram) -> Result<f64, FeatureError> {
    if predicted.is_log() != target.is_log() {
        return Err(FeatureError::ScaleMismatch);
    }
    mean_abs_diff(predicted.values(), target.values())
}

pub fn loss_lin(predicted: &LinearSpectrogram, target: &LinearSpectrogram) -> Result<f64, FeatureError> {
    mean_abs_diff(predicted.mags(), target.mags())
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LossReport {
    pub mel_loss: f64,
    pub lin_loss: f64,
    pub total_loss: f64,
}

pub fn loss_total(mel_loss: f64, lin_loss: f64) -> Result<LossReport, FeatureError> {
    for v in [mel_loss, lin_loss] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(FeatureError::NegativeLoss(v));
        }
    }
    Ok(LossReport { mel_loss, lin_loss, total_loss: mel_loss + lin_loss })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_offset() {
        let a = Array2::from_elem((4, 80), 2.0);
        let b = Array2::from_elem((4, 80), 3.0);
        assert_eq!(mean_abs_diff(&a, &b).unwrap(), 1.0);
        assert_eq!(mean_abs_diff(&a, &a).unwrap(), 0.0);
        let c = Array2::from_elem((3, 80), 2.0);
        assert!(matches!(mean_abs_diff(&a, &c), Err(FeatureError::ShapeMismatch { .. })));
    }

    #[test]
    fn log_and_linear_mels_do_not_mix() {
        let a = MelSpectrogram::new(Array2::zeros((2, 80)), true).unwrap();
        let b = MelSpectrogram::new(Array2::zeros((2, 80)), false).unwrap();
        assert_eq!(loss_mel(&a, &b), Err(FeatureError::ScaleMismatch));
    }

    #[test]
    fn total_is_sum() {
        assert_eq!(loss_total(0.0, 0.0).unwrap().total_loss, 0.0);
        assert_eq!(loss_total(0.3, 0.7).unwrap().total_loss, 0.3 + 0.7);
        assert!(matches!(loss_total(-0.1, 0.0), Err(FeatureError::NegativeLoss(_))));
        assert!(matches!(loss_total(f64::NAN, 0.0), Err(FeatureError::NegativeLoss(_))));
    }
}
