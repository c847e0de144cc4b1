//! Closed-form linear forecasters in channel-independent (CI) and
//! channel-dependent (CD) variants.
//!
//! A forecaster maps a lookback window `X ∈ C×L` to a prediction `Ŷ ∈ C×H`.
//! CI weights see one channel at a time (the prediction for channel `c`
//! depends only on row `c`, exactly); CD weights see the flattened window.
//! Fitting solves the ridge system `(GᵀG + λI) W = GᵀT` in closed form,
//! optionally on moving-average trend/seasonal components (the DLinear
//! family) and/or under per-window reversible instance normalization.

use crate::error::{Error, Result};
use crate::linalg::{cholesky_solve, gram, gram_right, matmul_at_b, Cod, Matrix, RANK_TOL};
use crate::window::WindowedDataset;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    PlainLinear,
    DLinear,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::PlainLinear => "PlainLinear",
            Family::DLinear => "DLinear",
        }
    }

    pub fn from_name(s: &str) -> Option<Family> {
        match s {
            "PlainLinear" => Some(Family::PlainLinear),
            "DLinear" => Some(Family::DLinear),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChannelMode {
    /// Channel-independent: output channel `c` reads only input channel `c`.
    Ci,
    /// Channel-dependent: output reads the full flattened window.
    Cd,
}

impl ChannelMode {
    pub fn name(&self) -> &'static str {
        match self {
            ChannelMode::Ci => "CI",
            ChannelMode::Cd => "CD",
        }
    }

    pub fn from_name(s: &str) -> Option<ChannelMode> {
        match s {
            "CI" => Some(ChannelMode::Ci),
            "CD" => Some(ChannelMode::Cd),
            _ => None,
        }
    }
}

/// Full description of a forecaster configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecasterSpec {
    pub family: Family,
    pub channel_mode: ChannelMode,
    pub lookback: usize,
    pub horizon: usize,
    pub ridge_lambda: f64,
    /// Moving-average kernel width (DLinear only); odd, at most `lookback`.
    pub ma_kernel: usize,
    pub revin: bool,
    /// CI only: fit one weight matrix per channel instead of sharing.
    #[serde(default)]
    pub individual: bool,
    /// Append a constant feature. Off by default since windows are
    /// normalized; the intercept is penalized like every other weight.
    #[serde(default)]
    pub with_intercept: bool,
}

impl ForecasterSpec {
    pub fn plain(channel_mode: ChannelMode, lookback: usize, horizon: usize) -> Self {
        Self {
            family: Family::PlainLinear,
            channel_mode,
            lookback,
            horizon,
            ridge_lambda: 0.0,
            ma_kernel: 25,
            revin: false,
            individual: false,
            with_intercept: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lookback == 0 || self.horizon == 0 {
            return Err(Error::Invalid(format!(
                "lookback {} and horizon {} must be positive",
                self.lookback, self.horizon
            )));
        }
        if self.ridge_lambda < 0.0 || !self.ridge_lambda.is_finite() {
            return Err(Error::Invalid(format!(
                "ridge lambda {} must be non-negative",
                self.ridge_lambda
            )));
        }
        if self.family == Family::DLinear {
            if self.ma_kernel % 2 == 0 {
                return Err(Error::Invalid(format!(
                    "moving-average kernel {} must be odd",
                    self.ma_kernel
                )));
            }
            if self.ma_kernel == 0 || self.ma_kernel > self.lookback {
                return Err(Error::Invalid(format!(
                    "moving-average kernel {} outside [1, lookback={}]",
                    self.ma_kernel, self.lookback
                )));
            }
        }
        if self.individual && self.channel_mode == ChannelMode::Cd {
            return Err(Error::Invalid(
                "per-channel individual weights apply to CI mode only".into(),
            ));
        }
        Ok(())
    }

    /// Stable identifier like `PlainLinear-CD` used in reports.
    pub fn model_id(&self) -> String {
        format!("{}-{}", self.family.name(), self.channel_mode.name())
    }
}

/// Centered moving average with replicate padding; `seasonal = x − trend`
/// reconstructs the input exactly.
pub fn moving_average_decompose(x: &Matrix, kernel: usize) -> Result<(Matrix, Matrix)> {
    let len = x.cols();
    if kernel % 2 == 0 || kernel == 0 {
        return Err(Error::Invalid(format!("kernel {kernel} must be odd")));
    }
    if kernel > len {
        return Err(Error::Invalid(format!(
            "kernel {kernel} exceeds window length {len}"
        )));
    }
    let half = kernel / 2;
    let mut trend = Matrix::zeros(x.rows(), len);
    for c in 0..x.rows() {
        let row = x.row(c);
        let mut padded = Vec::with_capacity(len + 2 * half);
        padded.extend(std::iter::repeat(row[0]).take(half));
        padded.extend_from_slice(row);
        padded.extend(std::iter::repeat(row[len - 1]).take(half));
        // prefix sums keep the convolution O(len)
        let mut prefix = Vec::with_capacity(padded.len() + 1);
        prefix.push(0.0);
        for v in &padded {
            prefix.push(prefix.last().unwrap() + v);
        }
        let t_row = trend.row_mut(c);
        for (j, t) in t_row.iter_mut().enumerate() {
            *t = (prefix[j + kernel] - prefix[j]) / kernel as f64;
        }
    }
    let seasonal = Matrix::from_fn(x.rows(), len, |r, c| x.get(r, c) - trend.get(r, c));
    Ok((trend, seasonal))
}

/// Per-window per-channel statistics captured by a RevIN forward pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RevinContext {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

const REVIN_EPS: f64 = 1e-5;

/// Forward pass: per-channel z-score with epsilon inside the standard
/// deviation, so constant rows map to zeros instead of dividing by zero.
pub fn revin_forward(x: &Matrix) -> (Matrix, RevinContext) {
    let len = x.cols() as f64;
    let mut mean = Vec::with_capacity(x.rows());
    let mut scale = Vec::with_capacity(x.rows());
    for c in 0..x.rows() {
        let row = x.row(c);
        let m = row.iter().sum::<f64>() / len;
        let var = row.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / len;
        mean.push(m);
        scale.push((var + REVIN_EPS).sqrt());
    }
    let out = Matrix::from_fn(x.rows(), x.cols(), |r, c| {
        (x.get(r, c) - mean[r]) / scale[r]
    });
    (out, RevinContext { mean, scale })
}

/// Applies the stored context to another matrix (e.g. the answer segment of
/// the same window).
pub fn revin_apply(y: &Matrix, ctx: &RevinContext) -> Result<Matrix> {
    if y.rows() != ctx.mean.len() {
        return Err(Error::Shape(format!(
            "revin context has {} channels, input has {}",
            ctx.mean.len(),
            y.rows()
        )));
    }
    Ok(Matrix::from_fn(y.rows(), y.cols(), |r, c| {
        (y.get(r, c) - ctx.mean[r]) / ctx.scale[r]
    }))
}

/// Inverse pass: rescales a prediction back to the window's level.
pub fn revin_inverse(y: &Matrix, ctx: &RevinContext) -> Result<Matrix> {
    if y.rows() != ctx.mean.len() {
        return Err(Error::Shape(format!(
            "revin context has {} channels, prediction has {}",
            ctx.mean.len(),
            y.rows()
        )));
    }
    Ok(Matrix::from_fn(y.rows(), y.cols(), |r, c| {
        y.get(r, c) * ctx.scale[r] + ctx.mean[r]
    }))
}

/// A fitted forecaster: the spec plus its weight matrices.
///
/// Weight layout (each matrix maps input features × outputs):
/// * shared (`individual = false`): one matrix (PlainLinear) or
///   `[trend, seasonal]` (DLinear);
/// * individual CI: the same group repeated per channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedForecaster {
    pub spec: ForecasterSpec,
    pub weights: Vec<Matrix>,
}

fn maps_per_group(family: Family) -> usize {
    match family {
        Family::PlainLinear => 1,
        Family::DLinear => 2,
    }
}

/// Ridge solve `(GᵀG + λI) W = GᵀT`, switching to the dual form
/// `W = Gᵀ(GGᵀ + λI)⁻¹ T` when the design is wide, and falling back to
/// minimum-norm least squares at λ = 0 on singular designs.
fn ridge_solve(g: &Matrix, t: &Matrix, lambda: f64) -> Result<Matrix> {
    let (rows, cols) = (g.rows(), g.cols());
    if rows == 0 {
        return Err(Error::Invalid("empty training design".into()));
    }
    if lambda > 0.0 && rows < cols {
        let mut kernel = gram_right(g);
        kernel.add_diagonal(lambda);
        let s = cholesky_solve(&kernel, t)?;
        return Ok(matmul_at_b(g, &s));
    }
    let mut normal = gram(g);
    normal.add_diagonal(lambda);
    let rhs = matmul_at_b(g, t);
    match cholesky_solve(&normal, &rhs) {
        Ok(w) => Ok(w),
        Err(_) if lambda == 0.0 => {
            // exact-rank-deficient unregularized fit: minimum-norm solution
            let cod = Cod::factor(g, RANK_TOL);
            let mut w = Matrix::zeros(cols, t.cols());
            for out_col in 0..t.cols() {
                let b = t.column(out_col);
                let x = cod.solve(&b);
                for (i, v) in x.into_iter().enumerate() {
                    w.set(i, out_col, v);
                }
            }
            Ok(w)
        }
        Err(e) => Err(e),
    }
}

struct FeatureBlock {
    design: Matrix,
    targets: Matrix,
}

/// Assembles stacked feature rows and targets for one fit.
///
/// `group` selects the channel for individual CI fits (`None` = all).
fn assemble(
    spec: &ForecasterSpec,
    data: &WindowedDataset,
    indices: &[usize],
    group: Option<usize>,
) -> Result<FeatureBlock> {
    let c = data.channels();
    let l = spec.lookback;
    let h = spec.horizon;
    let maps = maps_per_group(spec.family);
    let intercept = usize::from(spec.with_intercept);

    let (rows, in_dim, out_dim) = match spec.channel_mode {
        ChannelMode::Ci => {
            let per_sample = if group.is_some() { 1 } else { c };
            (indices.len() * per_sample, maps * l + intercept, h)
        }
        ChannelMode::Cd => (indices.len(), maps * c * l + intercept, c * h),
    };
    let mut design = Matrix::zeros(rows, in_dim);
    let mut targets = Matrix::zeros(rows, out_dim);

    let mut row_idx = 0;
    for &i in indices {
        let (x_raw, y_raw) = data.sample(i);
        let (x, y) = if spec.revin {
            let (xn, ctx) = revin_forward(&x_raw);
            (xn, revin_apply(&y_raw, &ctx)?)
        } else {
            (x_raw, y_raw)
        };
        let parts: Vec<Matrix> = match spec.family {
            Family::PlainLinear => vec![x],
            Family::DLinear => {
                let (trend, seasonal) = moving_average_decompose(&x, spec.ma_kernel)?;
                vec![trend, seasonal]
            }
        };
        match spec.channel_mode {
            ChannelMode::Ci => {
                let channels: Vec<usize> = match group {
                    Some(ch) => vec![ch],
                    None => (0..c).collect(),
                };
                for ch in channels {
                    let row = design.row_mut(row_idx);
                    let mut col = 0;
                    for part in &parts {
                        row[col..col + l].copy_from_slice(part.row(ch));
                        col += l;
                    }
                    if spec.with_intercept {
                        row[col] = 1.0;
                    }
                    targets.row_mut(row_idx).copy_from_slice(y.row(ch));
                    row_idx += 1;
                }
            }
            ChannelMode::Cd => {
                let row = design.row_mut(row_idx);
                let mut col = 0;
                for part in &parts {
                    for ch in 0..c {
                        row[col..col + l].copy_from_slice(part.row(ch));
                        col += l;
                    }
                }
                if spec.with_intercept {
                    row[col] = 1.0;
                }
                let target_row = targets.row_mut(row_idx);
                for ch in 0..c {
                    target_row[ch * h..(ch + 1) * h].copy_from_slice(y.row(ch));
                }
                row_idx += 1;
            }
        }
    }
    Ok(FeatureBlock { design, targets })
}

/// Splits a stacked solution into per-component weight matrices
/// (trend/seasonal for DLinear), dropping the intercept row into the last
/// returned matrix's extra row when present.
fn split_weights(spec: &ForecasterSpec, stacked: Matrix, block_len: usize) -> Vec<Matrix> {
    let maps = maps_per_group(spec.family);
    if maps == 1 {
        return vec![stacked];
    }
    let out = stacked.cols();
    let mut result = Vec::with_capacity(maps);
    for m in 0..maps {
        let extra = if m == maps - 1 && spec.with_intercept {
            1
        } else {
            0
        };
        let mut w = Matrix::zeros(block_len + extra, out);
        for r in 0..block_len {
            for cc in 0..out {
                w.set(r, cc, stacked.get(m * block_len + r, cc));
            }
        }
        if extra == 1 {
            for cc in 0..out {
                w.set(block_len, cc, stacked.get(maps * block_len, cc));
            }
        }
        result.push(w);
    }
    result
}

/// Fits on every sample of the training dataset.
pub fn fit_linear_forecaster(
    spec: &ForecasterSpec,
    train: &WindowedDataset,
) -> Result<FittedForecaster> {
    let all: Vec<usize> = (0..train.len()).collect();
    fit_linear_forecaster_subset(spec, train, &all)
}

/// Fits on the given sample indices (deterministic subsampling hook for the
/// tuner).
pub fn fit_linear_forecaster_subset(
    spec: &ForecasterSpec,
    train: &WindowedDataset,
    indices: &[usize],
) -> Result<FittedForecaster> {
    spec.validate()?;
    if indices.is_empty() || train.is_empty() {
        return Err(Error::Invalid("empty training set".into()));
    }
    if train.lookback != spec.lookback || train.horizon != spec.horizon {
        return Err(Error::Shape(format!(
            "training windows are {}→{}, spec wants {}→{}",
            train.lookback, train.horizon, spec.lookback, spec.horizon
        )));
    }
    let l = spec.lookback;
    let block_len = match spec.channel_mode {
        ChannelMode::Ci => l,
        ChannelMode::Cd => train.channels() * l,
    };

    let groups: Vec<Option<usize>> = if spec.individual && spec.channel_mode == ChannelMode::Ci {
        (0..train.channels()).map(Some).collect()
    } else {
        vec![None]
    };

    let mut weights = Vec::new();
    for group in groups {
        let block = assemble(spec, train, indices, group)?;
        let stacked = ridge_solve(&block.design, &block.targets, spec.ridge_lambda)?;
        if !stacked.all_finite() {
            return Err(Error::Invalid("non-finite solution in ridge fit".into()));
        }
        weights.extend(split_weights(spec, stacked, block_len));
    }
    Ok(FittedForecaster {
        spec: *spec,
        weights,
    })
}

impl FittedForecaster {
    fn weight_group(&self, channel: usize) -> &[Matrix] {
        let maps = maps_per_group(self.spec.family);
        if self.spec.individual {
            &self.weights[channel * maps..(channel + 1) * maps]
        } else {
            &self.weights[0..maps]
        }
    }

    /// Predicts a `C×H` answer for a `C×L` query.
    pub fn predict(&self, x: &Matrix) -> Result<Matrix> {
        let spec = &self.spec;
        if x.cols() != spec.lookback {
            return Err(Error::Shape(format!(
                "window has {} columns, spec lookback is {}",
                x.cols(),
                spec.lookback
            )));
        }
        let c = x.rows();
        let l = spec.lookback;
        let h = spec.horizon;

        let (x_in, ctx) = if spec.revin {
            let (xn, ctx) = revin_forward(x);
            (xn, Some(ctx))
        } else {
            (x.clone(), None)
        };
        let parts: Vec<Matrix> = match spec.family {
            Family::PlainLinear => vec![x_in],
            Family::DLinear => {
                let (trend, seasonal) = moving_average_decompose(&x_in, spec.ma_kernel)?;
                vec![trend, seasonal]
            }
        };

        let mut out = Matrix::zeros(c, h);
        match spec.channel_mode {
            ChannelMode::Ci => {
                for ch in 0..c {
                    let group = self.weight_group(ch);
                    let out_row = out.row_mut(ch);
                    for (part, w) in parts.iter().zip(group) {
                        if w.cols() != h {
                            return Err(Error::Shape("weight/horizon mismatch".into()));
                        }
                        let feats = part.row(ch);
                        for (j, o) in out_row.iter_mut().enumerate() {
                            let mut acc = 0.0;
                            for (i, f) in feats.iter().enumerate() {
                                acc += f * w.get(i, j);
                            }
                            *o += acc;
                        }
                    }
                    if spec.with_intercept {
                        let w_last = group.last().unwrap();
                        if w_last.rows() == l + 1 {
                            for (j, o) in out_row.iter_mut().enumerate() {
                                *o += w_last.get(l, j);
                            }
                        }
                    }
                }
            }
            ChannelMode::Cd => {
                let group = self.weight_group(0);
                let block = c * l;
                let mut flat: Vec<f64> = Vec::with_capacity(block);
                let mut acc = vec![0.0; c * h];
                for (part, w) in parts.iter().zip(group) {
                    flat.clear();
                    for ch in 0..c {
                        flat.extend_from_slice(part.row(ch));
                    }
                    if w.cols() != c * h {
                        return Err(Error::Shape(format!(
                            "weights expect {} output columns, window implies {}",
                            w.cols(),
                            c * h
                        )));
                    }
                    for (i, f) in flat.iter().enumerate() {
                        if *f != 0.0 {
                            let w_row = w.row(i);
                            for (a, wv) in acc.iter_mut().zip(w_row) {
                                *a += f * wv;
                            }
                        }
                    }
                }
                if spec.with_intercept {
                    let w_last = group.last().unwrap();
                    if w_last.rows() == block + 1 {
                        for (a, wv) in acc.iter_mut().zip(w_last.row(block)) {
                            *a += wv;
                        }
                    }
                }
                for ch in 0..c {
                    out.row_mut(ch).copy_from_slice(&acc[ch * h..(ch + 1) * h]);
                }
            }
        }

        match ctx {
            Some(ctx) => revin_inverse(&out, &ctx),
            None => Ok(out),
        }
    }

    /// Mean MSE over the given samples of a windowed dataset.
    pub fn evaluate_subset(&self, data: &WindowedDataset, indices: &[usize]) -> Result<f64> {
        if indices.is_empty() {
            return Err(Error::Invalid("no evaluation windows".into()));
        }
        let mut acc = 0.0;
        for &i in indices {
            let (x, y) = data.sample(i);
            let y_hat = self.predict(&x)?;
            acc += crate::series::mse(&y, &y_hat)?;
        }
        Ok(acc / indices.len() as f64)
    }

    pub fn evaluate(&self, data: &WindowedDataset) -> Result<f64> {
        let all: Vec<usize> = (0..data.len()).collect();
        self.evaluate_subset(data, &all)
    }

    /// Serializes to JSON with full float round-trip precision.
    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string(self)?;
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<FittedForecaster> {
        let json = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&json)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use crate::series::TimeSeries;
    use crate::window::make_windows;

    fn noise_series(seed: u64, c: usize, t: usize) -> TimeSeries {
        let mut rng = SplitMix64::new(seed);
        let values = (0..c)
            .map(|_| (0..t).map(|_| rng.normal()).collect())
            .collect();
        TimeSeries::from_channels("noise", values, 0.0).unwrap()
    }

    #[test]
    fn decompose_constant_and_identity_kernel() {
        let x = Matrix::from_rows(vec![vec![3.5; 8]]);
        let (trend, seasonal) = moving_average_decompose(&x, 5).unwrap();
        for j in 0..8 {
            assert!((trend.get(0, j) - 3.5).abs() < 1e-15);
            assert!(seasonal.get(0, j).abs() < 1e-15);
        }
        let x = Matrix::from_rows(vec![vec![1.0, -2.0, 4.0]]);
        let (trend, seasonal) = moving_average_decompose(&x, 1).unwrap();
        assert_eq!(trend, x);
        assert!(seasonal.iter().all(|v| v == 0.0));
    }

    #[test]
    fn decompose_ramp_hand_convolution() {
        let x = Matrix::from_rows(vec![(0..10).map(|v| v as f64).collect()]);
        let (trend, seasonal) = moving_average_decompose(&x, 3).unwrap();
        assert!((trend.get(0, 0) - 1.0 / 3.0).abs() < 1e-15);
        for j in 1..9 {
            assert!((trend.get(0, j) - j as f64).abs() < 1e-12);
        }
        assert!((trend.get(0, 9) - 26.0 / 3.0).abs() < 1e-12);
        for j in 0..10 {
            assert!((trend.get(0, j) + seasonal.get(0, j) - j as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn decompose_rejects_bad_kernels() {
        let x = Matrix::zeros(1, 6);
        assert!(moving_average_decompose(&x, 4).is_err());
        assert!(moving_average_decompose(&x, 7).is_err());
    }

    #[test]
    fn revin_round_trip() {
        let mut rng = SplitMix64::new(21);
        let x = Matrix::from_fn(3, 16, |_, _| rng.normal() * 4.0 + 7.0);
        let (xn, ctx) = revin_forward(&x);
        let back = revin_inverse(&xn, &ctx).unwrap();
        for i in 0..3 {
            for j in 0..16 {
                assert!((back.get(i, j) - x.get(i, j)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn revin_constant_row() {
        let x = Matrix::from_rows(vec![vec![5.0; 10]]);
        let (xn, ctx) = revin_forward(&x);
        assert!(xn.iter().all(|v| v == 0.0));
        let back = revin_inverse(&xn, &ctx).unwrap();
        assert!(back.iter().all(|v| (v - 5.0).abs() < 1e-12));
    }

    #[test]
    fn revin_inverse_requires_matching_context() {
        let ctx = RevinContext {
            mean: vec![0.0],
            scale: vec![1.0],
        };
        assert!(revin_inverse(&Matrix::zeros(2, 4), &ctx).is_err());
    }

    /// Sum of sinusoids at the given frequencies (random per-channel
    /// amplitudes and phases). Every channel satisfies the same exact linear
    /// recurrence of order `2 * freqs.len()`, so a lookback of at least that
    /// length admits a perfect shared linear forecaster.
    fn sinusoid_series(seed: u64, c: usize, t: usize, freqs: &[f64]) -> TimeSeries {
        let mut rng = SplitMix64::new(seed);
        let values = (0..c)
            .map(|_| {
                let comps: Vec<(f64, f64, f64)> = freqs
                    .iter()
                    .map(|&w| (w, rng.range_f64(0.5, 1.5), rng.range_f64(0.0, 6.28)))
                    .collect();
                (0..t)
                    .map(|i| {
                        comps
                            .iter()
                            .map(|(w, a, p)| a * (w * i as f64 + p).sin())
                            .sum()
                    })
                    .collect()
            })
            .collect();
        TimeSeries::from_channels("sine", values, 0.0).unwrap()
    }

    #[test]
    fn planted_linear_map_recovered_exactly() {
        let ts = sinusoid_series(22, 2, 300, &[0.3, 0.9, 1.7, 2.4]);
        let windows = make_windows(&ts, 8, 1, 1).unwrap();
        let spec = ForecasterSpec::plain(ChannelMode::Ci, 8, 1);
        let model = fit_linear_forecaster(&spec, &windows).unwrap();
        let train_mse = model.evaluate(&windows).unwrap();
        assert!(train_mse < 1e-12, "training mse {train_mse}");
    }

    #[test]
    fn huge_lambda_shrinks_weights_to_zero() {
        let ts = noise_series(23, 2, 400);
        let windows = make_windows(&ts, 12, 4, 1).unwrap();
        let mut spec = ForecasterSpec::plain(ChannelMode::Cd, 12, 4);
        spec.ridge_lambda = 1e12;
        let model = fit_linear_forecaster(&spec, &windows).unwrap();
        for w in &model.weights {
            assert!(w.iter().all(|v| v.abs() < 1e-6));
        }
        let (x, _) = windows.sample(0);
        let pred = model.predict(&x).unwrap();
        assert!(pred.iter().all(|v| v.abs() < 1e-6));
    }

    #[test]
    fn ridge_training_ssr_monotone_in_lambda() {
        let ts = noise_series(24, 2, 300);
        let windows = make_windows(&ts, 10, 3, 1).unwrap();
        let mut last = -1.0;
        for lambda in [0.0, 1e-3, 1e-1, 1.0, 10.0, 1e3] {
            let mut spec = ForecasterSpec::plain(ChannelMode::Ci, 10, 3);
            spec.ridge_lambda = lambda;
            let model = fit_linear_forecaster(&spec, &windows).unwrap();
            let mse = model.evaluate(&windows).unwrap();
            assert!(
                mse >= last - 1e-12,
                "training mse decreased from {last} to {mse} at λ={lambda}"
            );
            last = mse;
        }
    }

    #[test]
    fn ci_prediction_ignores_other_channels() {
        let ts = noise_series(25, 3, 500);
        let windows = make_windows(&ts, 16, 8, 1).unwrap();
        let mut spec = ForecasterSpec::plain(ChannelMode::Ci, 16, 8);
        spec.ridge_lambda = 0.1;
        let model = fit_linear_forecaster(&spec, &windows).unwrap();

        let (x, _) = windows.sample(3);
        let base = model.predict(&x).unwrap();
        // scramble all rows except channel 1
        let mut rng = SplitMix64::new(26);
        let scrambled = Matrix::from_fn(
            3,
            16,
            |r, c| {
                if r == 1 {
                    x.get(r, c)
                } else {
                    rng.normal()
                }
            },
        );
        let perturbed = model.predict(&scrambled).unwrap();
        for j in 0..8 {
            assert_eq!(base.get(1, j), perturbed.get(1, j), "CI row not bit-stable");
        }
    }

    #[test]
    fn cd_matches_ci_on_channel_local_data() {
        let ts = sinusoid_series(27, 3, 400, &[0.3, 0.9, 1.7]);
        let windows = make_windows(&ts, 6, 2, 1).unwrap();
        let ci =
            fit_linear_forecaster(&ForecasterSpec::plain(ChannelMode::Ci, 6, 2), &windows).unwrap();
        let cd =
            fit_linear_forecaster(&ForecasterSpec::plain(ChannelMode::Cd, 6, 2), &windows).unwrap();
        let mse_ci = ci.evaluate(&windows).unwrap();
        let mse_cd = cd.evaluate(&windows).unwrap();
        assert!((mse_ci - mse_cd).abs() < 1e-10, "{mse_ci} vs {mse_cd}");
    }

    #[test]
    fn prediction_matches_matrix_multiply_oracle() {
        let mut rng = SplitMix64::new(28);
        let spec = ForecasterSpec::plain(ChannelMode::Ci, 5, 3);
        let w = Matrix::from_fn(5, 3, |_, _| rng.normal());
        let model = FittedForecaster {
            spec,
            weights: vec![w.clone()],
        };
        let x = Matrix::from_fn(2, 5, |_, _| rng.normal());
        let pred = model.predict(&x).unwrap();
        for ch in 0..2 {
            for j in 0..3 {
                let expected: f64 = (0..5).map(|i| x.get(ch, i) * w.get(i, j)).sum();
                assert!((pred.get(ch, j) - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_input_zero_output_without_intercept() {
        let ts = sinusoid_series(29, 2, 200, &[0.3, 0.9, 1.7]);
        let windows = make_windows(&ts, 6, 2, 1).unwrap();
        let model =
            fit_linear_forecaster(&ForecasterSpec::plain(ChannelMode::Cd, 6, 2), &windows).unwrap();
        let pred = model.predict(&Matrix::zeros(2, 6)).unwrap();
        assert!(pred.iter().all(|v| v == 0.0));
    }

    #[test]
    fn revin_makes_linear_model_shift_equivariant() {
        let ts = noise_series(30, 2, 600);
        let windows = make_windows(&ts, 24, 6, 1).unwrap();
        let mut spec = ForecasterSpec::plain(ChannelMode::Ci, 24, 6);
        spec.revin = true;
        spec.ridge_lambda = 1e-2;
        let model = fit_linear_forecaster(&spec, &windows).unwrap();

        let (x, _) = windows.sample(10);
        let base = model.predict(&x).unwrap();
        let shift = 42.0;
        let shifted_x = Matrix::from_fn(x.rows(), x.cols(), |r, c| x.get(r, c) + shift);
        let shifted_pred = model.predict(&shifted_x).unwrap();
        for i in 0..base.rows() {
            for j in 0..base.cols() {
                assert!(
                    (shifted_pred.get(i, j) - base.get(i, j) - shift).abs() < 1e-10,
                    "shift equivariance violated"
                );
            }
        }
    }

    #[test]
    fn dlinear_fits_and_decomposition_reconstructs() {
        let ts = noise_series(31, 2, 500);
        let windows = make_windows(&ts, 32, 8, 1).unwrap();
        let spec = ForecasterSpec {
            family: Family::DLinear,
            channel_mode: ChannelMode::Ci,
            lookback: 32,
            horizon: 8,
            ridge_lambda: 1e-3,
            ma_kernel: 25,
            revin: false,
            individual: false,
            with_intercept: false,
        };
        let model = fit_linear_forecaster(&spec, &windows).unwrap();
        assert_eq!(model.weights.len(), 2);
        let mse = model.evaluate(&windows).unwrap();
        assert!(mse.is_finite());
    }

    #[test]
    fn individual_ci_beats_shared_on_heterogeneous_channels() {
        // disjoint frequency triples per channel: each channel admits an
        // exact order-6 recurrence, but one shared length-6 map would need
        // to annihilate all six frequencies at once (order 12)
        let a = sinusoid_series(34, 1, 200, &[0.3, 0.9, 1.7]);
        let b = sinusoid_series(35, 1, 200, &[0.5, 1.2, 2.1]);
        let ts = TimeSeries::from_channels(
            "mixed",
            vec![a.channel(0).to_vec(), b.channel(0).to_vec()],
            0.0,
        )
        .unwrap();
        let windows = make_windows(&ts, 6, 1, 1).unwrap();

        let shared =
            fit_linear_forecaster(&ForecasterSpec::plain(ChannelMode::Ci, 6, 1), &windows).unwrap();
        let mut ind_spec = ForecasterSpec::plain(ChannelMode::Ci, 6, 1);
        ind_spec.individual = true;
        let individual = fit_linear_forecaster(&ind_spec, &windows).unwrap();
        assert_eq!(individual.weights.len(), 2);

        let mse_shared = shared.evaluate(&windows).unwrap();
        let mse_ind = individual.evaluate(&windows).unwrap();
        assert!(
            mse_ind < 1e-18,
            "individual fit should be exact, got {mse_ind}"
        );
        assert!(mse_shared > 1e-6, "shared fit unexpectedly exact");
    }

    #[test]
    fn save_load_round_trip_exact() {
        let ts = noise_series(32, 2, 300);
        let windows = make_windows(&ts, 8, 4, 1).unwrap();
        let mut spec = ForecasterSpec::plain(ChannelMode::Cd, 8, 4);
        spec.ridge_lambda = 0.37;
        let model = fit_linear_forecaster(&spec, &windows).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        model.save(&path).unwrap();
        let back = FittedForecaster::load(&path).unwrap();
        assert_eq!(model, back);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let ts = noise_series(33, 2, 200);
        let windows = make_windows(&ts, 8, 4, 1).unwrap();
        let model =
            fit_linear_forecaster(&ForecasterSpec::plain(ChannelMode::Ci, 8, 4), &windows).unwrap();
        assert!(model.predict(&Matrix::zeros(2, 9)).is_err());
    }

    #[test]
    fn spec_validation() {
        let mut spec = ForecasterSpec::plain(ChannelMode::Ci, 10, 5);
        assert!(spec.validate().is_ok());
        spec.family = Family::DLinear;
        spec.ma_kernel = 4;
        assert!(spec.validate().is_err());
        spec.ma_kernel = 11;
        assert!(spec.validate().is_err());
        spec.ma_kernel = 9;
        assert!(spec.validate().is_ok());
    }
}
