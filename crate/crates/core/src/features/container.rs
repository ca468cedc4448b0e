//! RSLF: `b"RSLF"`, version, rows, cols (u32 LE each), then rows·cols f32 LE
//! values in row-major order.

use std::path::Path;

use ndarray::Array2;

use super::FeatureError;

pub const RSLF_MAGIC: &[u8; 4] = b"RSLF";
pub const RSLF_VERSION: u32 = 1;
const HEADER: usize = 16;

pub fn encode_rslf(m: &Array2<f64>) -> Result<Vec<u8>, FeatureError> {
    let dim = |d: usize| u32::try_from(d).map_err(|_| FeatureError::Container(format!("dimension {d} too large")));
    let (rows32, cols32) = (dim(m.nrows())?, dim(m.ncols())?);
    let mut out = Vec::with_capacity(HEADER + 4 * m.len());
    out.extend_from_slice(RSLF_MAGIC);
    out.extend_from_slice(&RSLF_VERSION.to_le_bytes());
    out.extend_from_slice(&rows32.to_le_bytes());
    out.extend_from_slice(&cols32.to_le_bytes());
    for v in m.iter() {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    Ok(out)
}

pub fn decode_rslf(bytes: &[u8]) -> Result<Array2<f64>, FeatureError> {
    let err = |m: &str| FeatureError::Container(m.to_string());
    if bytes.len() < HEADER {
        return Err(err("truncated header"));
    }
    if &bytes[0..4] != RSLF_MAGIC {
        return Err(err("bad magic"));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
    let version = word(4);
    if version != RSLF_VERSION {
        return Err(FeatureError::Container(format!("unsupported version {version}")));
    }
    let (rows, cols) = (word(8) as usize, word(12) as usize);
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| err("dimensions overflow"))?;
    let payload = &bytes[HEADER..];
    if payload.len() != expected {
        return Err(FeatureError::Container(format!(
            "payload is {} bytes, header implies {expected}",
            payload.len()
        )));
    }
    let values = payload
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes(c.try_into().expect("4 bytes"))))
        .collect();
    Array2::from_shape_vec((rows, cols), values).map_err(|e| FeatureError::Container(e.to_string()))
}

pub fn write_rslf(path: &Path, m: &Array2<f64>) -> Result<(), FeatureError> {
    std::fs::write(path, encode_rslf(m)?).map_err(|e| FeatureError::Container(e.to_string()))
}

pub fn read_rslf(path: &Path) -> Result<Array2<f64>, FeatureError> {
    let bytes = std::fs::read(path).map_err(|e| FeatureError::Container(e.to_string()))?;
    decode_rslf(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let m = Array2::from_shape_vec((2, 3), vec![1.0, 2.0, 3.0, 4.0, 5.0, -0.5]).unwrap();
        let bytes = encode_rslf(&m).unwrap();
        assert_eq!(bytes.len(), 16 + 24);
        assert_eq!(&bytes[..4], b"RSLF");
        assert_eq!(&bytes[4..16], &[1, 0, 0, 0, 2, 0, 0, 0, 3, 0, 0, 0]);
        assert_eq!(&bytes[16..20], &1.0f32.to_le_bytes());
        assert_eq!(&bytes[36..40], &(-0.5f32).to_le_bytes());
        assert_eq!(decode_rslf(&bytes).unwrap(), m);
    }

    #[test]
    fn rejects_damage() {
        let m = Array2::<f64>::zeros((2, 2));
        let good = encode_rslf(&m).unwrap();
        assert!(decode_rslf(&good[..10]).is_err());
        assert!(decode_rslf(&good[..good.len() - 1]).is_err());
        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(decode_rslf(&bad).is_err());
        let mut bad = good;
        bad[4] = 2;
        assert!(decode_rslf(&bad).is_err());
        assert_eq!(decode_rslf(&encode_rslf(&Array2::zeros((0, 80))).unwrap()).unwrap().dim(), (0, 80));
    }
}
