//! Binary files: trained models plus float32 debugging dumps.
//!
//! Dumps are little-endian. Spectrograms and masks start with `F, N` as u32
//! and store elements frame by frame (all bins of frame 0, then frame 1, ...).

use std::fs;
use std::path::Path;

use maskforge_core::grid::Grid;
use maskforge_core::masking::{BinaryMask, SoftMask};
use maskforge_core::mlp::{self, MlpModel, TrainingPair};
use maskforge_core::nmf::{self, NmfModel};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum SavedModel {
    Dnn(MlpModel),
    Nmf(NmfModel),
}

impl SavedModel {
    pub fn to_bytes(&self) -> Vec<u8> {
        match self {
            SavedModel::Dnn(m) => mlp::to_bytes(m),
            SavedModel::Nmf(m) => nmf::to_bytes(m),
        }
    }

    /// Dispatches on the four magic bytes.
    pub fn from_bytes(bytes: &[u8]) -> maskforge_core::Result<SavedModel> {
        match bytes.get(..4) {
            Some(b"MFGN") => nmf::from_bytes(bytes).map(SavedModel::Nmf),
            Some(_) => mlp::from_bytes(bytes).map(SavedModel::Dnn),
            None => Err(maskforge_core::Error::Truncated),
        }
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn save_model(path: impl AsRef<Path>, model: &SavedModel) -> Result<()> {
    write(path.as_ref(), &model.to_bytes())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SavedModel> {
    let path = path.as_ref();
    SavedModel::from_bytes(&read(path)?).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}

fn header(values: &[usize]) -> Vec<u8> {
    values.iter().flat_map(|&v| (v as u32).to_le_bytes()).collect()
}

fn push_f32(out: &mut Vec<u8>, values: impl IntoIterator<Item = f64>) {
    for v in values {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
}

pub fn spectrogram_dump(grid: &Grid<f64>) -> Vec<u8> {
    let mut out = header(&[grid.bins(), grid.frames()]);
    push_f32(&mut out, grid.iter().copied());
    out
}

pub fn save_spectrogram(path: impl AsRef<Path>, grid: &Grid<f64>) -> Result<()> {
    write(path.as_ref(), &spectrogram_dump(grid))
}

/// One byte (0 or 1) per element.
pub fn binary_mask_dump(mask: &BinaryMask) -> Vec<u8> {
    let mut out = header(&[mask.values.bins(), mask.values.frames()]);
    out.extend(mask.values.iter().map(|&b| b as u8));
    out
}

pub fn soft_mask_dump(mask: &SoftMask) -> Vec<u8> {
    spectrogram_dump(&mask.values)
}

pub fn save_binary_mask(path: impl AsRef<Path>, mask: &BinaryMask) -> Result<()> {
    write(path.as_ref(), &binary_mask_dump(mask))
}

/// Header `F, T, count` (u32), then each pair as `F*T` input floats followed
/// by `F*T` target floats.
pub fn training_set_dump(bins: usize, width: usize, pairs: &[TrainingPair]) -> Vec<u8> {
    let mut out = header(&[bins, width, pairs.len()]);
    for pair in pairs {
        push_f32(&mut out, pair.input.iter().copied());
        push_f32(&mut out, pair.target.iter().copied());
    }
    out
}

pub fn save_training_set(path: impl AsRef<Path>, bins: usize, width: usize, pairs: &[TrainingPair]) -> Result<()> {
    write(path.as_ref(), &training_set_dump(bins, width, pairs))
}

/// Reads a dump written by [`training_set_dump`].
pub fn parse_training_set(bytes: &[u8]) -> maskforge_core::Result<(usize, usize, Vec<TrainingPair>)> {
    use maskforge_core::Error as E;
    let word = |i: usize| -> maskforge_core::Result<usize> {
        let b = bytes.get(4 * i..4 * i + 4).ok_or(E::Truncated)?;
        Ok(u32::from_le_bytes(b.try_into().expect("4 bytes")) as usize)
    };
    let (bins, width, count) = (word(0)?, word(1)?, word(2)?);
    let len = bins * width;
    let body = &bytes[12..];
    let expected = count * 2 * len * 4;
    if body.len() < expected {
        return Err(E::Truncated);
    }
    if body.len() > expected {
        return Err(E::Corrupt("trailing bytes after training set"));
    }
    let floats: Vec<f64> = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64)
        .collect();
    let pairs = floats
        .chunks_exact(2 * len.max(1))
        .take(count)
        .map(|c| TrainingPair {
            input: c[..len].to_vec(),
            target: c[len..].to_vec(),
        })
        .collect();
    Ok((bins, width, pairs))
}
