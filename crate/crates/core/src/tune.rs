//! Seeded random hyperparameter search with the lookback window as a
//! first-class hyperparameter.
//!
//! Each trial samples a forecaster configuration, fits on the train split,
//! and scores validation MSE; the best trial (lowest validation MSE, ties to
//! the lower index) is evaluated once on the test split. Everything is a
//! pure function of `(data, space, budget, seed)`.

use crate::error::{Error, Result};
use crate::forecast::{
    fit_linear_forecaster_subset, ChannelMode, Family, FittedForecaster, ForecasterSpec,
};
use crate::parallel::par_map_indexed;
use crate::rng::SplitMix64;
use crate::series::{apply_normalizer, fit_normalizer, Direction, TimeSeries};
use crate::window::{make_windows, window_count};
use serde::{Deserialize, Serialize};

/// Hyperparameter search space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub lookbacks: Vec<usize>,
    /// Log-uniform ridge strength range `[lo, hi]`.
    pub lambda_range: (f64, f64),
    /// Moving-average kernels (odd; drawn for DLinear trials).
    pub kernels: Vec<usize>,
    pub families: Vec<Family>,
    pub modes: Vec<ChannelMode>,
    pub revin_options: Vec<bool>,
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            lookbacks: vec![96, 192, 336, 512, 720],
            lambda_range: (1e-6, 1e2),
            kernels: vec![1, 13, 25, 49],
            families: vec![Family::PlainLinear, Family::DLinear],
            modes: vec![ChannelMode::Ci, ChannelMode::Cd],
            revin_options: vec![false, true],
        }
    }
}

impl SearchSpace {
    /// Single-configuration space except for the lookback set.
    pub fn plain_linear(mode: ChannelMode) -> Self {
        Self {
            families: vec![Family::PlainLinear],
            modes: vec![mode],
            revin_options: vec![false],
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lookbacks.is_empty()
            || self.kernels.is_empty()
            || self.families.is_empty()
            || self.modes.is_empty()
            || self.revin_options.is_empty()
        {
            return Err(Error::Invalid("search space has an empty set".into()));
        }
        let (lo, hi) = self.lambda_range;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::Invalid(format!(
                "lambda range ({lo}, {hi}) must be positive and ordered"
            )));
        }
        if self.lookbacks.iter().any(|&l| l == 0) || self.kernels.iter().any(|&k| k == 0) {
            return Err(Error::Invalid(
                "lookbacks and kernels must be positive".into(),
            ));
        }
        Ok(())
    }

    fn draw(&self, rng: &mut SplitMix64, horizon: usize) -> ForecasterSpec {
        let family = *rng.choose(&self.families);
        let channel_mode = *rng.choose(&self.modes);
        let lookback = *rng.choose(&self.lookbacks);
        let (lo, hi) = self.lambda_range;
        let ridge_lambda = if lo == hi {
            lo
        } else {
            (rng.range_f64(lo.ln(), hi.ln())).exp()
        };
        let ma_kernel = *rng.choose(&self.kernels);
        let revin = *rng.choose(&self.revin_options);
        ForecasterSpec {
            family,
            channel_mode,
            lookback,
            horizon,
            ridge_lambda,
            ma_kernel,
            revin,
            individual: false,
            with_intercept: false,
        }
    }
}

/// Deterministic first draw for `(space, seed, trial_index)`.
pub fn sample_trial_config(
    space: &SearchSpace,
    seed: u64,
    trial_index: usize,
    horizon: usize,
) -> ForecasterSpec {
    let mut rng = SplitMix64::derive(seed, trial_index as u64);
    space.draw(&mut rng, horizon)
}

/// One search trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial_index: usize,
    pub spec: ForecasterSpec,
    pub val_mse: f64,
    /// Populated only for the selected trial.
    pub test_mse: Option<f64>,
    /// Wall-clock fit time; zero unless timing is enabled, keeping report
    /// bytes deterministic by default.
    pub fit_seconds: f64,
}

/// Search outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneReport {
    pub dataset: String,
    pub model_id: String,
    pub horizon: usize,
    pub budget: usize,
    pub seed: u64,
    pub trials: Vec<TrialResult>,
    /// Index of the winning trial (lowest validation MSE, ties to the
    /// lower index).
    pub best: usize,
    pub best_lookback: usize,
    /// Degenerate configuration draws that were rejected and redrawn.
    pub redraws: usize,
}

/// Engineering knobs for closed-form fitting at scale. Fits and evaluations
/// run on evenly strided window subsets; selection stays deterministic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TunerSettings {
    /// Approximate flop budget for assembling one trial's normal equations;
    /// the training-row cap is `fit_flop_budget / feature_count²`, clamped
    /// to `[min_fit_rows, max_fit_rows]`. Wide designs get fewer rows and
    /// fall through to the dual ridge solve.
    pub fit_flop_budget: f64,
    pub min_fit_rows: usize,
    pub max_fit_rows: usize,
    pub max_eval_windows: usize,
    /// Record wall-clock fit times (breaks byte-for-byte report
    /// reproducibility across machines; off by default).
    pub record_timings: bool,
}

impl Default for TunerSettings {
    fn default() -> Self {
        Self {
            fit_flop_budget: 6e9,
            min_fit_rows: 512,
            max_fit_rows: 49_152,
            max_eval_windows: 1024,
            record_timings: false,
        }
    }
}

impl TunerSettings {
    /// Training-window cap for a trial with the given feature count and
    /// rows contributed per window (C for CI stacking, 1 for CD).
    pub fn fit_window_cap(&self, feature_cols: usize, rows_per_window: usize) -> usize {
        let cols2 = (feature_cols * feature_cols) as f64;
        let rows = (self.fit_flop_budget / cols2) as usize;
        let rows = rows.clamp(self.min_fit_rows, self.max_fit_rows);
        (rows / rows_per_window).max(1)
    }
}

fn spec_fits(spec: &ForecasterSpec, train_len: usize, val_len: usize, horizon: usize) -> bool {
    spec.validate().is_ok()
        && window_count(train_len, spec.lookback, horizon, 1) > 0
        && window_count(val_len, spec.lookback, horizon, 1) > 0
}

/// Runs a `budget`-trial random search over normalized splits.
///
/// Normalization statistics come from the train segment only and are applied
/// to all three splits; reported MSEs are on the normalized scale.
pub fn run_search(
    dataset_name: &str,
    train: &TimeSeries,
    val: &TimeSeries,
    test: &TimeSeries,
    horizon: usize,
    space: &SearchSpace,
    budget: usize,
    seed: u64,
    settings: &TunerSettings,
    label: Option<&str>,
) -> Result<(TuneReport, FittedForecaster)> {
    space.validate()?;
    if budget == 0 {
        return Err(Error::Invalid("budget must be at least 1".into()));
    }
    if horizon == 0 {
        return Err(Error::Invalid("horizon must be positive".into()));
    }
    let any_fits = space.lookbacks.iter().any(|&l| {
        window_count(train.len(), l, horizon, 1) > 0 && window_count(val.len(), l, horizon, 1) > 0
    });
    if !any_fits {
        return Err(Error::Invalid(format!(
            "train segment of {} steps cannot fit any candidate lookback plus horizon {}",
            train.len(),
            horizon
        )));
    }

    let norm = fit_normalizer(train)?;
    let train_n = apply_normalizer(train, &norm, Direction::Forward)?;
    let val_n = apply_normalizer(val, &norm, Direction::Forward)?;
    let test_n = apply_normalizer(test, &norm, Direction::Forward)?;

    // deterministic per-trial streams make trials independent; models are
    // dropped after validation and the winner refit once (fitting is a pure
    // function of the data, so the refit reproduces the selected model
    // bit for bit)
    let fit_once = |spec: &ForecasterSpec| -> Result<FittedForecaster> {
        let c = train_n.channels();
        let maps = match spec.family {
            Family::PlainLinear => 1,
            Family::DLinear => 2,
        };
        let (feature_cols, rows_per_window) = match spec.channel_mode {
            ChannelMode::Ci => (maps * spec.lookback, c),
            ChannelMode::Cd => (maps * c * spec.lookback, 1),
        };
        let window_cap = settings.fit_window_cap(feature_cols, rows_per_window);
        let train_windows = make_windows(&train_n, spec.lookback, horizon, 1)?;
        let fit_idx = train_windows.subsample_indices(window_cap);
        fit_linear_forecaster_subset(spec, &train_windows, &fit_idx)
    };

    let outcomes = par_map_indexed(budget, |trial_index| -> Result<(TrialResult, usize)> {
        let mut rng = SplitMix64::derive(seed, trial_index as u64);
        let mut trial_redraws = 0usize;
        let spec = loop {
            let candidate = space.draw(&mut rng, horizon);
            if spec_fits(&candidate, train_n.len(), val_n.len(), horizon) {
                break candidate;
            }
            trial_redraws += 1;
            if trial_redraws > 10_000 {
                return Err(Error::Invalid(
                    "search space rejects every sampled configuration".into(),
                ));
            }
        };

        let started = std::time::Instant::now();
        let model = fit_once(&spec)?;
        let fit_seconds = if settings.record_timings {
            started.elapsed().as_secs_f64()
        } else {
            0.0
        };
        let val_windows = make_windows(&val_n, spec.lookback, horizon, 1)?;
        let val_idx = val_windows.subsample_indices(settings.max_eval_windows);
        let val_mse = model.evaluate_subset(&val_windows, &val_idx)?;
        Ok((
            TrialResult {
                trial_index,
                spec,
                val_mse,
                test_mse: None,
                fit_seconds,
            },
            trial_redraws,
        ))
    });

    let mut trials: Vec<TrialResult> = Vec::with_capacity(budget);
    let mut redraws = 0usize;
    for outcome in outcomes {
        let (trial, trial_redraws) = outcome?;
        redraws += trial_redraws;
        trials.push(trial);
    }
    // strict improvement keeps the lower trial index on ties
    let mut best_idx = 0;
    for t in &trials {
        if t.val_mse < trials[best_idx].val_mse {
            best_idx = t.trial_index;
        }
    }

    let model = fit_once(&trials[best_idx].spec)?;
    let test_windows = make_windows(&test_n, model.spec.lookback, horizon, 1)?;
    if test_windows.is_empty() {
        return Err(Error::Invalid(format!(
            "test segment of {} steps has no windows at lookback {}",
            test_n.len(),
            model.spec.lookback
        )));
    }
    let test_idx = test_windows.subsample_indices(settings.max_eval_windows);
    let test_mse = model.evaluate_subset(&test_windows, &test_idx)?;
    trials[best_idx].test_mse = Some(test_mse);

    let model_id = label.map(str::to_string).unwrap_or_else(|| {
        if space.families.len() == 1 && space.modes.len() == 1 {
            model.spec.model_id()
        } else {
            "Mixed".to_string()
        }
    });

    let report = TuneReport {
        dataset: dataset_name.to_string(),
        model_id,
        horizon,
        budget,
        seed,
        best: best_idx,
        best_lookback: trials[best_idx].spec.lookback,
        redraws,
        trials,
    };
    Ok((report, model))
}

impl TuneReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(json: &str) -> Result<TuneReport> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn selected_test_mse(&self) -> Option<f64> {
        self.trials[self.best].test_mse
    }
}
