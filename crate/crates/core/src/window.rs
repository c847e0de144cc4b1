//! Sliding-window construction over a series segment.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::series::TimeSeries;

/// Indexed collection of `(X ∈ C×L, Y ∈ C×H)` pairs drawn from one segment.
///
/// Sample `i` reads columns `[i·stride, i·stride + L)` as the query and
/// `[i·stride + L, i·stride + L + H)` as the answer. Windows are materialized
/// on demand; the dataset itself only borrows the segment.
#[derive(Debug, Clone)]
pub struct WindowedDataset<'a> {
    segment: &'a TimeSeries,
    pub lookback: usize,
    pub horizon: usize,
    pub stride: usize,
    len: usize,
}

/// `floor((T_seg − L − H)/stride) + 1` when `T_seg ≥ L + H`, else 0.
pub fn window_count(t_seg: usize, lookback: usize, horizon: usize, stride: usize) -> usize {
    if t_seg >= lookback + horizon {
        (t_seg - lookback - horizon) / stride + 1
    } else {
        0
    }
}

impl<'a> WindowedDataset<'a> {
    pub fn new(
        segment: &'a TimeSeries,
        lookback: usize,
        horizon: usize,
        stride: usize,
    ) -> Result<Self> {
        if lookback == 0 || horizon == 0 || stride == 0 {
            return Err(Error::Invalid(format!(
                "window parameters must be positive (L={lookback}, H={horizon}, stride={stride})"
            )));
        }
        let len = window_count(segment.len(), lookback, horizon, stride);
        Ok(Self {
            segment,
            lookback,
            horizon,
            stride,
            len,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn channels(&self) -> usize {
        self.segment.channels()
    }

    /// Materializes sample `i` as `(X, Y)`.
    pub fn sample(&self, i: usize) -> (Matrix, Matrix) {
        assert!(i < self.len, "sample index {i} out of {}", self.len);
        let start = i * self.stride;
        let x = self.segment.window(start, self.lookback);
        let y = self.segment.window(start + self.lookback, self.horizon);
        (x, y)
    }

    /// Iterates `(X, Y)` pairs in index order.
    pub fn iter(&self) -> impl Iterator<Item = (Matrix, Matrix)> + '_ {
        (0..self.len).map(|i| self.sample(i))
    }

    /// Evenly strided subset of sample indices capped at `max_samples`.
    ///
    /// Closed-form fits on tens of thousands of overlapping windows are
    /// redundant; a deterministic subsample keeps them tractable.
    pub fn subsample_indices(&self, max_samples: usize) -> Vec<usize> {
        if self.len == 0 || max_samples == 0 {
            return Vec::new();
        }
        if self.len <= max_samples {
            return (0..self.len).collect();
        }
        let step = self.len.div_ceil(max_samples);
        (0..self.len).step_by(step).collect()
    }
}

/// Builds a sliding-window dataset; empty when the segment is too short.
pub fn make_windows<'a>(
    segment: &'a TimeSeries,
    lookback: usize,
    horizon: usize,
    stride: usize,
) -> Result<WindowedDataset<'a>> {
    WindowedDataset::new(segment, lookback, horizon, stride)
}
