//! Non-negative matrix factorization under the generalized KL divergence,
//! and the patch-based separation baseline built on it.
//!
//! Training factorizes a matrix whose columns are flattened class
//! spectrogram patches, `V ~ W H`, and keeps the dictionary `W`. Separation
//! stacks the vocal and non-vocal dictionaries side by side, fits only the
//! activations of a test patch matrix, and reconstructs each class from its
//! own block of dictionary columns and activations.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::Grid;
use crate::masking::{soft_ratio, SoftMask};
use crate::math::ln;
use crate::mlp::Reader;
use crate::patching::{repack_mean, PatchKind, PatchSet};
use crate::{Error, Result};

/// Floor applied inside divisions and logarithms, and to factor entries.
pub const EPS: f64 = 1e-12;

const MAGIC: &[u8; 4] = b"MFGN";

/// Dense column-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Matrix> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    /// One column per vector; all vectors must share a length.
    pub fn from_columns<C: AsRef<[f64]>>(columns: &[C]) -> Result<Matrix> {
        let first = columns.first().ok_or(Error::Empty("column list"))?;
        let rows = first.as_ref().len();
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            let c = c.as_ref();
            if c.len() != rows {
                return Err(Error::LengthMismatch {
                    expected: rows,
                    found: c.len(),
                });
            }
            data.extend_from_slice(c);
        }
        Ok(Matrix {
            rows,
            cols: columns.len(),
            data,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[col * self.rows + row]
    }

    #[inline]
    pub fn col(&self, col: usize) -> &[f64] {
        &self.data[col * self.rows..(col + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, col: usize) -> &mut [f64] {
        &mut self.data[col * self.rows..(col + 1) * self.rows]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    fn random(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
        // 1 - U[0, 1) lies in (0, 1].
        let data = (0..rows * cols).map(|_| 1.0 - rng.gen::<f64>()).collect();
        Matrix { rows, cols, data }
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for k in 0..self.cols {
                let b = other.get(k, j);
                if b == 0.0 {
                    continue;
                }
                for (d, a) in dst.iter_mut().zip(self.col(k)) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// Columns `start..end` as a new matrix.
    pub fn col_range(&self, start: usize, end: usize) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: end - start,
            data: self.data[start * self.rows..end * self.rows].to_vec(),
        }
    }

    /// Rows `start..end` as a new matrix.
    pub fn row_range(&self, start: usize, end: usize) -> Matrix {
        let mut out = Matrix::zeros(end - start, self.cols);
        for j in 0..self.cols {
            out.col_mut(j).copy_from_slice(&self.col(j)[start..end]);
        }
        out
    }

    /// Side-by-side concatenation `[self other]`.
    pub fn hstack(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows {
            return Err(Error::ShapeMismatch {
                expected: (self.rows, other.cols),
                found: (other.rows, other.cols),
            });
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols + other.cols,
            data,
        })
    }

    fn ensure_non_negative(&self, what: &'static str) -> Result<()> {
        if self.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(what));
        }
        if self.data.iter().any(|&v| v < 0.0) {
            return Err(Error::NegativeInput(what));
        }
        Ok(())
    }
}

/// Generalized KL divergence `sum V ln(V / V_hat) - V + V_hat`, with
/// `0 ln 0 = 0` and `V_hat` floored at [`EPS`].
pub fn kl_divergence(v: &Matrix, v_hat: &Matrix) -> Result<f64> {
    if (v.rows, v.cols) != (v_hat.rows, v_hat.cols) {
        return Err(Error::ShapeMismatch {
            expected: (v.rows, v.cols),
            found: (v_hat.rows, v_hat.cols),
        });
    }
    v.ensure_non_negative("target matrix")?;
    v_hat.ensure_non_negative("reconstruction")?;
    Ok(kl_unchecked(&v.data, &v_hat.data))
}

fn kl_unchecked(v: &[f64], v_hat: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&x, &y) in v.iter().zip(v_hat) {
        let y = y.max(EPS);
        if x > 0.0 {
            acc += x * ln(x / y) - x + y;
        } else {
            acc += y;
        }
    }
    acc
}

#[derive(Debug, Clone, PartialEq)]
pub struct Factorization {
    pub w: Matrix,
    pub h: Matrix,
    /// Divergence after each iteration.
    pub trace: Vec<f64>,
}

/// `R = V / max(W H, eps)`.
fn ratio(v: &Matrix, wh: &Matrix) -> Matrix {
    let data = v
        .data
        .iter()
        .zip(&wh.data)
        .map(|(&x, &y)| x / y.max(EPS))
        .collect();
    Matrix {
        rows: v.rows,
        cols: v.cols,
        data,
    }
}

/// `H <- H * (W^T R) / (W^T 1)`.
fn update_h(v: &Matrix, w: &Matrix, h: &mut Matrix) {
    let wh = w.matmul(h);
    let r = ratio(v, &wh);
    let col_sums: Vec<f64> = (0..w.cols).map(|k| w.col(k).iter().sum::<f64>().max(EPS)).collect();
    for j in 0..h.cols {
        let rj = r.col(j);
        for k in 0..w.cols {
            let num = crate::math::dot(w.col(k), rj);
            let idx = j * h.rows + k;
            h.data[idx] = (h.data[idx] * num / col_sums[k]).max(EPS);
        }
    }
}

/// `W <- W * (R H^T) / (1 H^T)`.
fn update_w(v: &Matrix, w: &mut Matrix, h: &Matrix) {
    let wh = w.matmul(h);
    let r = ratio(v, &wh);
    let rank = w.cols;
    let mut num = Matrix::zeros(w.rows, rank);
    for j in 0..h.cols {
        let rj = r.col(j);
        for k in 0..rank {
            let hk = h.get(k, j);
            if hk == 0.0 {
                continue;
            }
            for (n, x) in num.col_mut(k).iter_mut().zip(rj) {
                *n += x * hk;
            }
        }
    }
    for k in 0..rank {
        let row_sum: f64 = (0..h.cols).map(|j| h.get(k, j)).sum::<f64>().max(EPS);
        for (wv, n) in w.col_mut(k).iter_mut().zip(num.col(k)) {
            *wv = (*wv * n / row_sum).max(EPS);
        }
    }
}

/// Lee-Seung multiplicative updates for KL divergence: `H` then `W` each
/// iteration, from a seeded uniform `(0, 1]` initialization.
pub fn nmf_factorize(v: &Matrix, rank: usize, iterations: usize, seed: u64) -> Result<Factorization> {
    if rank == 0 {
        return Err(Error::InvalidConfig("rank must be at least 1"));
    }
    if v.rows == 0 || v.cols == 0 {
        return Err(Error::Empty("matrix to factorize"));
    }
    v.ensure_non_negative("matrix to factorize")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = Matrix::random(v.rows, rank, &mut rng);
    let mut h = Matrix::random(rank, v.cols, &mut rng);
    let mut trace = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        update_h(v, &w, &mut h);
        update_w(v, &mut w, &h);
        let d = kl_unchecked(&v.data, &w.matmul(&h).data);
        if d.is_nan() {
            return Err(Error::NonFinite("divergence"));
        }
        trace.push(d);
    }
    Ok(Factorization { w, h, trace })
}

/// Learns a class dictionary whose columns each sum to 1.
pub fn nmf_train_class(patches: &Matrix, rank: usize, iterations: usize, seed: u64) -> Result<Matrix> {
    let mut f = nmf_factorize(patches, rank, iterations, seed)?;
    for k in 0..rank {
        let col = f.w.col_mut(k);
        let sum: f64 = col.iter().sum();
        for x in col.iter_mut() {
            *x /= sum;
        }
    }
    Ok(f.w)
}

/// Vocal and non-vocal dictionaries over `bins x width` patches.
#[derive(Debug, Clone, PartialEq)]
pub struct NmfModel {
    pub bins: usize,
    pub width: usize,
    pub vocal: Matrix,
    pub non_vocal: Matrix,
}

impl NmfModel {
    pub fn new(bins: usize, width: usize, vocal: Matrix, non_vocal: Matrix) -> Result<NmfModel> {
        let rows = bins * width;
        for w in [&vocal, &non_vocal] {
            if w.rows != rows {
                return Err(Error::ShapeMismatch {
                    expected: (rows, w.cols),
                    found: (w.rows, w.cols),
                });
            }
            if w.cols == 0 {
                return Err(Error::InvalidConfig("dictionary has no columns"));
            }
            w.ensure_non_negative("dictionary")?;
        }
        Ok(NmfModel {
            bins,
            width,
            vocal,
            non_vocal,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NmfSeparation {
    pub vocal: Matrix,
    pub non_vocal: Matrix,
    /// Divergence of the test matrix against the full reconstruction, per
    /// iteration.
    pub trace: Vec<f64>,
}

/// Fits activations for `[W_v W_nv]` with the dictionaries frozen and
/// reconstructs each class.
pub fn nmf_separate(v: &Matrix, model: &NmfModel, iterations: usize, seed: u64) -> Result<NmfSeparation> {
    if v.rows != model.bins * model.width {
        return Err(Error::ShapeMismatch {
            expected: (model.bins * model.width, v.cols),
            found: (v.rows, v.cols),
        });
    }
    if v.cols == 0 {
        return Err(Error::Empty("test patch matrix"));
    }
    v.ensure_non_negative("test patch matrix")?;
    let w = model.vocal.hstack(&model.non_vocal)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = Matrix::random(w.cols, v.cols, &mut rng);
    let mut trace = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        update_h(v, &w, &mut h);
        let d = kl_unchecked(&v.data, &w.matmul(&h).data);
        if d.is_nan() {
            return Err(Error::NonFinite("divergence"));
        }
        trace.push(d);
    }
    let rv = model.vocal.cols;
    let vocal = model.vocal.matmul(&h.row_range(0, rv));
    let non_vocal = model.non_vocal.matmul(&h.row_range(rv, h.rows));
    Ok(NmfSeparation {
        vocal,
        non_vocal,
        trace,
    })
}

/// Soft mask per patch column, then averaged back over the sliding windows.
pub fn repack_soft_mask(
    vocal: &Matrix,
    non_vocal: &Matrix,
    offsets: &[usize],
    total_frames: usize,
    bins: usize,
    width: usize,
) -> Result<SoftMask> {
    if (vocal.rows, vocal.cols) != (non_vocal.rows, non_vocal.cols) {
        return Err(Error::ShapeMismatch {
            expected: (vocal.rows, vocal.cols),
            found: (non_vocal.rows, non_vocal.cols),
        });
    }
    if vocal.rows != bins * width {
        return Err(Error::LengthMismatch {
            expected: bins * width,
            found: vocal.rows,
        });
    }
    if offsets.len() != vocal.cols {
        return Err(Error::InvalidConfig("one offset per patch column is required"));
    }
    if offsets.iter().any(|&o| o >= total_frames.max(1)) {
        return Err(Error::InvalidConfig("patch offset beyond the spectrogram"));
    }
    vocal.ensure_non_negative("vocal reconstruction")?;
    non_vocal.ensure_non_negative("non-vocal reconstruction")?;
    let patches = (0..vocal.cols)
        .map(|j| {
            let data = vocal
                .col(j)
                .iter()
                .zip(non_vocal.col(j))
                .map(|(&a, &b)| soft_ratio(a, b))
                .collect();
            Grid::from_vec(bins, width, data)
        })
        .collect::<Result<Vec<_>>>()?;
    let set = PatchSet {
        patches,
        offsets: offsets.to_vec(),
        total_frames,
        kind: PatchKind::Prediction,
    };
    Ok(SoftMask {
        values: repack_mean(&set)?.values,
    })
}

/// Dictionary file: `"MFGN"`, then `bins, width, r_v, r_nv` as u32, then
/// `W_v` and `W_nv` column-major as f64. Little-endian throughout.
pub fn to_bytes(model: &NmfModel) -> Vec<u8> {
    let mut out = Vec::with_capacity(20 + 8 * (model.vocal.data.len() + model.non_vocal.data.len()));
    out.extend_from_slice(MAGIC);
    for n in [model.bins, model.width, model.vocal.cols, model.non_vocal.cols] {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for v in model.vocal.data.iter().chain(&model.non_vocal.data) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn from_bytes(bytes: &[u8]) -> Result<NmfModel> {
    let mut r = Reader::new(bytes);
    if r.take(4).map_err(|_| Error::BadMagic)? != MAGIC {
        return Err(Error::BadMagic);
    }
    let bins = r.u32()? as usize;
    let width = r.u32()? as usize;
    let rv = r.u32()? as usize;
    let rnv = r.u32()? as usize;
    let rows = bins.checked_mul(width).ok_or(Error::Corrupt("dimension overflow"))?;
    let nv = rows.checked_mul(rv).ok_or(Error::Corrupt("dimension overflow"))?;
    let nnv = rows.checked_mul(rnv).ok_or(Error::Corrupt("dimension overflow"))?;
    let vocal = Matrix::from_col_major(rows, rv, r.f64s(nv)?)?;
    let non_vocal = Matrix::from_col_major(rows, rnv, r.f64s(nnv)?)?;
    if !r.is_empty() {
        return Err(Error::Corrupt("trailing bytes after dictionaries"));
    }
    NmfModel::new(bins, width, vocal, non_vocal)
}
