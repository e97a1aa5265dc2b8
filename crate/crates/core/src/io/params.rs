use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};

use super::{FormatError, Reader};
use crate::probe::ProbeParams;

const MAGIC: [u8; 4] = *b"LCPP";
const VERSION: u16 = 1;
const NAMES: [&str; 4] = ["w1", "b1", "w2", "b2"];

/// Serializes at `f32` precision.
pub fn params_to_bytes(params: &ProbeParams) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for d in [params.input_dim(), params.hidden_dim(), params.num_labels()] {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for tensor in params.tensors() {
        for &v in tensor {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

pub fn params_from_bytes(bytes: &[u8]) -> Result<ProbeParams, FormatError> {
    let mut r = Reader::new(bytes);
    r.magic(MAGIC)?;
    let version = r.u16(0, "header")?;
    if version != VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    let input = r.u32(0, "header")? as usize;
    let hidden = r.u32(0, "header")? as usize;
    let labels = r.u32(0, "header")? as usize;
    let sizes = [hidden * input, hidden, labels * hidden, labels];
    let mut tensors = Vec::with_capacity(4);
    for (name, size) in NAMES.iter().zip(sizes) {
        let start = r.pos;
        let values = r.f32s(size, start, name)?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(FormatError::NonFiniteValue((*name).to_owned()));
        }
        tensors.push(values.into_iter().map(f64::from).collect::<Vec<f64>>());
    }
    r.finish()?;
    let b2 = Array1::from(tensors.pop().unwrap());
    let w2 = Array2::from_shape_vec((labels, hidden), tensors.pop().unwrap()).expect("sized above");
    let b1 = Array1::from(tensors.pop().unwrap());
    let w1 = Array2::from_shape_vec((hidden, input), tensors.pop().unwrap()).expect("sized above");
    ProbeParams::new(w1, b1, w2, b2).map_err(|e| FormatError::CorruptRecord {
        offset: 0,
        reason: e.to_string(),
    })
}

pub fn write_params(params: &ProbeParams, path: impl AsRef<Path>) -> Result<(), FormatError> {
    fs::write(path, params_to_bytes(params))?;
    Ok(())
}

pub fn read_params(path: impl AsRef<Path>) -> Result<ProbeParams, FormatError> {
    params_from_bytes(&fs::read(path)?)
}
