//! Dense frequency-by-time grids.
//!
//! A [`Grid`] stores `bins x frames` values frame-major: all bins of frame 0,
//! then all bins of frame 1, and so on. That layout is also the flattening
//! order used for network inputs, so a patch flattens without copying
//! element by element.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    bins: usize,
    frames: usize,
    data: Vec<T>,
}

impl<T: Clone> Grid<T> {
    pub fn filled(bins: usize, frames: usize, value: T) -> Self {
        Grid {
            bins,
            frames,
            data: vec![value; bins * frames],
        }
    }
}

impl<T: Clone + Default> Grid<T> {
    pub fn new(bins: usize, frames: usize) -> Self {
        Self::filled(bins, frames, T::default())
    }
}

impl<T> Grid<T> {
    /// Wraps frame-major data. Fails if `data.len() != bins * frames`.
    pub fn from_vec(bins: usize, frames: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != bins * frames {
            return Err(Error::LengthMismatch {
                expected: bins * frames,
                found: data.len(),
            });
        }
        Ok(Grid { bins, frames, data })
    }

    /// Builds a grid by evaluating `f(bin, frame)` for every element.
    pub fn from_fn(bins: usize, frames: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(bins * frames);
        for t in 0..frames {
            for b in 0..bins {
                data.push(f(b, t));
            }
        }
        Grid { bins, frames, data }
    }

    #[inline]
    pub fn bins(&self) -> usize {
        self.bins
    }

    #[inline]
    pub fn frames(&self) -> usize {
        self.frames
    }

    /// `(bins, frames)`.
    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.bins, self.frames)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, bin: usize, frame: usize) -> &T {
        &self.data[frame * self.bins + bin]
    }

    #[inline]
    pub fn get_mut(&mut self, bin: usize, frame: usize) -> &mut T {
        &mut self.data[frame * self.bins + bin]
    }

    #[inline]
    pub fn frame(&self, frame: usize) -> &[T] {
        &self.data[frame * self.bins..(frame + 1) * self.bins]
    }

    #[inline]
    pub fn frame_mut(&mut self, frame: usize) -> &mut [T] {
        &mut self.data[frame * self.bins..(frame + 1) * self.bins]
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn iter(&self) -> core::slice::Iter<'_, T> {
        self.data.iter()
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            bins: self.bins,
            frames: self.frames,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn ensure_shape(&self, shape: (usize, usize)) -> Result<()> {
        if self.shape() != shape {
            return Err(Error::ShapeMismatch {
                expected: shape,
                found: self.shape(),
            });
        }
        Ok(())
    }
}

impl Grid<f64> {
    /// Largest element, or `None` for an empty grid.
    pub fn max(&self) -> Option<f64> {
        self.data.iter().copied().reduce(f64::max)
    }
}
