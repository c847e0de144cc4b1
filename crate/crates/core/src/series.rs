//! Multivariate series representation, CSV ingestion, chronological
//! splitting, z-score normalization, and the MSE loss.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use std::io::{BufRead, Write};
use std::path::Path;

/// A `C × T` matrix of real-valued samples with channel names and an optional
/// model-time step size (`dt = 0` for ingested real data).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub name: String,
    pub channel_names: Vec<String>,
    /// One row per channel, each of length `T`.
    values: Vec<Vec<f64>>,
    pub dt: f64,
}

impl TimeSeries {
    pub fn new(
        name: impl Into<String>,
        channel_names: Vec<String>,
        values: Vec<Vec<f64>>,
        dt: f64,
    ) -> Result<Self> {
        let name = name.into();
        if values.is_empty() {
            return Err(Error::Invalid(format!("series `{name}` has no channels")));
        }
        let t = values[0].len();
        if t == 0 {
            return Err(Error::Invalid(format!("series `{name}` has no timesteps")));
        }
        if values.iter().any(|ch| ch.len() != t) {
            return Err(Error::Shape(format!(
                "series `{name}` has channels of unequal length"
            )));
        }
        if channel_names.len() != values.len() {
            return Err(Error::Shape(format!(
                "series `{name}`: {} channel names for {} channels",
                channel_names.len(),
                values.len()
            )));
        }
        for (ch, row) in values.iter().enumerate() {
            if let Some(pos) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::Invalid(format!(
                    "series `{name}` channel {ch} has non-finite value at t={pos}"
                )));
            }
        }
        Ok(Self {
            name,
            channel_names,
            values,
            dt,
        })
    }

    /// Number of channels `C`.
    pub fn channels(&self) -> usize {
        self.values.len()
    }

    /// Number of timesteps `T`.
    pub fn len(&self) -> usize {
        self.values[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.values[c]
    }

    pub fn channels_slice(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// Contiguous sub-series over columns `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> Result<TimeSeries> {
        if start >= end || end > self.len() {
            return Err(Error::Invalid(format!(
                "slice [{start}, {end}) out of range for T={}",
                self.len()
            )));
        }
        TimeSeries::new(
            self.name.clone(),
            self.channel_names.clone(),
            self.values
                .iter()
                .map(|ch| ch[start..end].to_vec())
                .collect(),
            self.dt,
        )
    }

    /// Columns `[start, start+len)` as a `C × len` matrix.
    pub fn window(&self, start: usize, len: usize) -> Matrix {
        let mut m = Matrix::zeros(self.channels(), len);
        for (c, ch) in self.values.iter().enumerate() {
            m.row_mut(c).copy_from_slice(&ch[start..start + len]);
        }
        m
    }

    /// Builds a series from an existing channel matrix (used by generators
    /// and tests).
    pub fn from_channels(name: impl Into<String>, values: Vec<Vec<f64>>, dt: f64) -> Result<Self> {
        let names = (0..values.len()).map(|c| format!("ch{c}")).collect();
        TimeSeries::new(name, names, values, dt)
    }
}

/// Chronological split ratios; defaults to 0.7/0.1/0.2.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SplitSpec {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train: 0.7,
            val: 0.1,
            test: 0.2,
        }
    }
}

impl SplitSpec {
    pub fn new(train: f64, val: f64, test: f64) -> Result<Self> {
        let spec = Self { train, val, test };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for (label, r) in [
            ("train", self.train),
            ("val", self.val),
            ("test", self.test),
        ] {
            if !(0.0..=1.0).contains(&r) || !r.is_finite() {
                return Err(Error::Invalid(format!("{label} ratio {r} outside [0, 1]")));
            }
        }
        let sum = self.train + self.val + self.test;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Invalid(format!("split ratios sum to {sum}, not 1")));
        }
        Ok(())
    }
}

/// Loads a header-bearing CSV into a series. When `has_time_column` is set,
/// the first column is treated as an opaque timestamp and skipped.
pub fn load_csv(path: &Path, has_time_column: bool) -> Result<TimeSeries> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = std::io::BufReader::new(file);
    let mut lines = reader.lines();

    let header = match lines.next() {
        Some(line) => line.map_err(|e| Error::io(path, e))?,
        None => {
            return Err(Error::Csv {
                path: path.display().to_string(),
                row: 0,
                column: String::new(),
                reason: "empty file".into(),
            })
        }
    };
    let mut columns: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    let skip = usize::from(has_time_column);
    if columns.len() <= skip {
        return Err(Error::Csv {
            path: path.display().to_string(),
            row: 0,
            column: String::new(),
            reason: "no data columns in header".into(),
        });
    }
    let channel_names: Vec<String> = columns.split_off(skip);
    let c = channel_names.len();

    let mut values: Vec<Vec<f64>> = vec![Vec::new(); c];
    let mut row_index = 0usize;
    for line in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        row_index += 1;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != c + skip {
            return Err(Error::Csv {
                path: path.display().to_string(),
                row: row_index,
                column: String::new(),
                reason: format!("expected {} cells, found {}", c + skip, cells.len()),
            });
        }
        for (j, cell) in cells[skip..].iter().enumerate() {
            let parsed: f64 = cell.trim().parse().map_err(|_| Error::Csv {
                path: path.display().to_string(),
                row: row_index,
                column: channel_names[j].clone(),
                reason: format!("cell `{}` is not a number", cell.trim()),
            })?;
            if !parsed.is_finite() {
                return Err(Error::Csv {
                    path: path.display().to_string(),
                    row: row_index,
                    column: channel_names[j].clone(),
                    reason: format!("cell `{}` is not finite", cell.trim()),
                });
            }
            values[j].push(parsed);
        }
    }
    if row_index == 0 {
        return Err(Error::Csv {
            path: path.display().to_string(),
            row: 0,
            column: String::new(),
            reason: "no data rows".into(),
        });
    }

    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "series".into());
    TimeSeries::new(name, channel_names, values, 0.0)
}

/// Writes a series as `t,ch0,...` CSV; `t = step * dt` printed with 17
/// significant digits, values at full round-trip precision.
pub fn write_csv(series: &TimeSeries, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let mut header = String::from("t");
    for name in &series.channel_names {
        header.push(',');
        header.push_str(name);
    }
    writeln!(w, "{header}").map_err(|e| Error::io(path, e))?;
    let mut line = String::new();
    for t in 0..series.len() {
        line.clear();
        line.push_str(&format!("{:.16e}", t as f64 * series.dt));
        for c in 0..series.channels() {
            line.push(',');
            let v = series.channel(c)[t];
            line.push_str(&format!("{v}"));
        }
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

/// Splits into contiguous train/val/test segments with floor-based
/// boundaries at `floor(T·r_train)` and `floor(T·(r_train+r_val))`.
pub fn split_series(
    series: &TimeSeries,
    spec: &SplitSpec,
) -> Result<(TimeSeries, TimeSeries, TimeSeries)> {
    spec.validate()?;
    let t = series.len();
    if t < 3 {
        return Err(Error::Invalid(format!("cannot split series of length {t}")));
    }
    // floor of the exact real product; the epsilon absorbs binary rounding in
    // t·r (e.g. 60000 · 0.8 evaluating to 47999.999…)
    let boundary = |r: f64| ((t as f64 * r) + 1e-9 * t as f64).floor() as usize;
    let b1 = boundary(spec.train);
    let b2 = boundary(spec.train + spec.val);
    split_at(series, b1, b2)
}

/// Splits at explicit boundary indices (e.g. calendar-derived boundaries).
pub fn split_at(
    series: &TimeSeries,
    b1: usize,
    b2: usize,
) -> Result<(TimeSeries, TimeSeries, TimeSeries)> {
    let t = series.len();
    if b1 == 0 || b1 >= b2 || b2 >= t {
        return Err(Error::Invalid(format!(
            "split boundaries ({b1}, {b2}) produce an empty segment for T={t}"
        )));
    }
    Ok((
        series.slice(0, b1)?,
        series.slice(b1, b2)?,
        series.slice(b2, t)?,
    ))
}

/// Per-channel z-score parameters fitted on a training segment.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Normalizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Fits population (divide-by-N) per-channel statistics.
pub fn fit_normalizer(train: &TimeSeries) -> Result<Normalizer> {
    let t = train.len() as f64;
    let mut mean = Vec::with_capacity(train.channels());
    let mut std = Vec::with_capacity(train.channels());
    for c in 0..train.channels() {
        let ch = train.channel(c);
        let m = ch.iter().sum::<f64>() / t;
        let var = ch.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / t;
        if var <= 0.0 {
            return Err(Error::ZeroVariance(train.channel_names[c].clone()));
        }
        mean.push(m);
        std.push(var.sqrt());
    }
    Ok(Normalizer { mean, std })
}

/// Applies `(x - mean) / std` per channel, or its exact inverse.
pub fn apply_normalizer(
    series: &TimeSeries,
    norm: &Normalizer,
    direction: Direction,
) -> Result<TimeSeries> {
    if norm.mean.len() != series.channels() {
        return Err(Error::Shape(format!(
            "normalizer has {} channels, series has {}",
            norm.mean.len(),
            series.channels()
        )));
    }
    let values = series
        .channels_slice()
        .iter()
        .enumerate()
        .map(|(c, ch)| {
            let (m, s) = (norm.mean[c], norm.std[c]);
            match direction {
                Direction::Forward => ch.iter().map(|v| (v - m) / s).collect(),
                Direction::Inverse => ch.iter().map(|v| v * s + m).collect(),
            }
        })
        .collect();
    TimeSeries::new(
        series.name.clone(),
        series.channel_names.clone(),
        values,
        series.dt,
    )
}

/// Mean squared error over all `C·H` entries.
pub fn mse(y: &Matrix, y_hat: &Matrix) -> Result<f64> {
    if y.rows() != y_hat.rows() || y.cols() != y_hat.cols() {
        return Err(Error::Shape(format!(
            "mse shapes {}x{} vs {}x{}",
            y.rows(),
            y.cols(),
            y_hat.rows(),
            y_hat.cols()
        )));
    }
    let n = (y.rows() * y.cols()) as f64;
    let sum: f64 = y
        .iter()
        .zip(y_hat.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn series_from(values: Vec<Vec<f64>>) -> TimeSeries {
        TimeSeries::from_channels("test", values, 0.0).unwrap()
    }

    #[test]
    fn load_small_csv_with_time_column() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "date,a,b").unwrap();
        writeln!(f, "2020-01-01,1.0,4.0").unwrap();
        writeln!(f, "2020-01-02,2.0,5.0").unwrap();
        writeln!(f, "2020-01-03,3.0,6.0").unwrap();
        let ts = load_csv(f.path(), true).unwrap();
        assert_eq!(ts.channels(), 2);
        assert_eq!(ts.len(), 3);
        assert_eq!(ts.channel(0), &[1.0, 2.0, 3.0]);
        assert_eq!(ts.channel_names, vec!["a", "b"]);
        assert_eq!(ts.dt, 0.0);
    }

    #[test]
    fn load_csv_rejects_nan_cell_with_location() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "a,b").unwrap();
        writeln!(f, "1.0,2.0").unwrap();
        writeln!(f, "3.0,NaN").unwrap();
        let err = load_csv(f.path(), false).unwrap_err();
        match err {
            Error::Csv { row, column, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, "b");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn load_csv_rejects_ragged_rows() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "a,b").unwrap();
        writeln!(f, "1.0,2.0").unwrap();
        writeln!(f, "3.0").unwrap();
        assert!(matches!(
            load_csv(f.path(), false),
            Err(Error::Csv { row: 2, .. })
        ));
    }

    #[test]
    fn missing_file_reports_path() {
        let err = load_csv(Path::new("/nonexistent/x.csv"), true).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn ett_shaped_csv_loads_with_expected_dimensions() {
        // hourly transformer-load layout: date column plus 7 channels over
        // 17420 rows
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "date,HUFL,HULL,MUFL,MULL,LUFL,LULL,OT").unwrap();
        let mut rng = SplitMix64::new(2016);
        let mut line = String::new();
        for t in 0..17_420 {
            line.clear();
            line.push_str(&format!("2016-07-01 {:02}:00", t % 24));
            for _ in 0..7 {
                line.push_str(&format!(",{:.3}", rng.normal() * 5.0 + 10.0));
            }
            writeln!(f, "{line}").unwrap();
        }
        f.flush().unwrap();
        let ts = load_csv(f.path(), true).unwrap();
        assert_eq!(ts.len(), 17_420);
        assert_eq!(ts.channels(), 7);
        assert_eq!(ts.channel_names[6], "OT");
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let mut rng = SplitMix64::new(9);
        let values: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..50).map(|_| rng.normal() * 1e3).collect())
            .collect();
        let ts = TimeSeries::from_channels("rt", values, 0.05).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rt.csv");
        write_csv(&ts, &path).unwrap();
        let back = load_csv(&path, true).unwrap();
        assert_eq!(back.channels(), 3);
        assert_eq!(back.len(), 50);
        for c in 0..3 {
            assert_eq!(back.channel(c), ts.channel(c), "channel {c} not bit-exact");
        }
    }

    #[test]
    fn split_exact_division() {
        let ts = series_from(vec![(0..10).map(|v| v as f64).collect()]);
        let (tr, va, te) = split_series(&ts, &SplitSpec::default()).unwrap();
        assert_eq!((tr.len(), va.len(), te.len()), (7, 1, 2));
        assert_eq!(tr.channel(0), &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(va.channel(0), &[7.0]);
        assert_eq!(te.channel(0), &[8.0, 9.0]);
    }

    #[test]
    fn split_covers_long_series() {
        let ts = series_from(vec![vec![1.0; 60_000]]);
        let (tr, va, te) = split_series(&ts, &SplitSpec::default()).unwrap();
        assert_eq!((tr.len(), va.len(), te.len()), (42_000, 6_000, 12_000));
    }

    #[test]
    fn split_degenerate_length_errors() {
        let ts = series_from(vec![vec![1.0, 2.0]]);
        assert!(split_series(&ts, &SplitSpec::default()).is_err());
    }

    #[test]
    fn split_ratio_validation() {
        assert!(SplitSpec::new(0.5, 0.1, 0.2).is_err());
        assert!(SplitSpec::new(0.7, 0.1, 0.2).is_ok());
        assert!(SplitSpec::new(-0.1, 0.6, 0.5).is_err());
    }

    #[test]
    fn normalizer_hand_statistics() {
        let ts = series_from(vec![vec![1.0, 2.0, 3.0]]);
        let norm = fit_normalizer(&ts).unwrap();
        assert!((norm.mean[0] - 2.0).abs() < 1e-15);
        assert!((norm.std[0] - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn normalizer_rejects_constant_channel() {
        let ts = TimeSeries::new("t", vec!["flat".into()], vec![vec![5.0, 5.0, 5.0]], 0.0).unwrap();
        match fit_normalizer(&ts) {
            Err(Error::ZeroVariance(name)) => assert_eq!(name, "flat"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn normalizer_channels_are_independent() {
        let ts = series_from(vec![vec![1.0, 2.0, 3.0], vec![10.0, 20.0, 60.0]]);
        let norm = fit_normalizer(&ts).unwrap();
        assert!((norm.mean[0] - 2.0).abs() < 1e-12);
        assert!((norm.mean[1] - 30.0).abs() < 1e-12);
        assert!(norm.std[0] != norm.std[1]);
    }

    #[test]
    fn normalize_round_trip_and_train_stats() {
        let mut rng = SplitMix64::new(10);
        let values: Vec<Vec<f64>> = (0..2)
            .map(|c| {
                (0..200)
                    .map(|_| rng.normal() * (c + 1) as f64 + 3.0)
                    .collect()
            })
            .collect();
        let ts = series_from(values);
        let norm = fit_normalizer(&ts).unwrap();
        let fwd = apply_normalizer(&ts, &norm, Direction::Forward).unwrap();
        for c in 0..2 {
            let ch = fwd.channel(c);
            let m = ch.iter().sum::<f64>() / ch.len() as f64;
            let var = ch.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / ch.len() as f64;
            assert!(m.abs() < 1e-9);
            assert!((var.sqrt() - 1.0).abs() < 1e-9);
        }
        let back = apply_normalizer(&fwd, &norm, Direction::Inverse).unwrap();
        for c in 0..2 {
            for (a, b) in back.channel(c).iter().zip(ts.channel(c)) {
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
            }
        }
    }

    #[test]
    fn normalizer_channel_mismatch_errors() {
        let ts = series_from(vec![vec![1.0, 2.0]]);
        let norm = Normalizer {
            mean: vec![0.0, 0.0],
            std: vec![1.0, 1.0],
        };
        assert!(apply_normalizer(&ts, &norm, Direction::Forward).is_err());
    }

    #[test]
    fn mse_basics() {
        let y = Matrix::zeros(2, 3);
        let mut y_hat = Matrix::zeros(2, 3);
        assert_eq!(mse(&y, &y_hat).unwrap(), 0.0);
        for i in 0..2 {
            for j in 0..3 {
                y_hat.set(i, j, 1.0);
            }
        }
        assert!((mse(&y, &y_hat).unwrap() - 1.0).abs() < 1e-15);
        assert!(mse(&y, &Matrix::zeros(3, 2)).is_err());
    }

    #[test]
    fn mse_matches_elementwise_oracle() {
        let mut rng = SplitMix64::new(11);
        let a = Matrix::from_fn(3, 4, |_, _| rng.normal());
        let b = Matrix::from_fn(3, 4, |_, _| rng.normal());
        let mut acc = 0.0;
        for i in 0..3 {
            for j in 0..4 {
                let d = a.get(i, j) - b.get(i, j);
                acc += d * d;
            }
        }
        let expected = acc / 12.0;
        assert!((mse(&a, &b).unwrap() - expected).abs() < 1e-12);
    }
}
