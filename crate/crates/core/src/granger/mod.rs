//! Channel-dependence analysis.
//!
//! Pipeline, applied to the first `sample_len` steps of a series:
//!
//! 1. drop channels whose absolute Pearson correlation with an
//!    already-retained channel exceeds the threshold,
//! 2. difference each retained channel until an augmented Dickey-Fuller
//!    test accepts stationarity (up to `max_diff` passes),
//! 3. run a Granger F-test on every ordered channel pair,
//! 4. aggregate the average F-score and the share of rejected nulls.

pub mod fdist;

use crate::error::{Error, Result};
use crate::linalg::{lstsq_ssr, Cod, Matrix, RANK_TOL};
use crate::parallel::par_map_indexed;
use crate::series::TimeSeries;
use serde::{Deserialize, Serialize};

pub use fdist::f_upper_tail;

/// Analysis settings. `lag` is the lookback of the underlying
/// autoregressions (30, 96 and 192 are the usual choices).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrangerConfig {
    pub lag: usize,
    pub alpha: f64,
    pub pearson_threshold: f64,
    pub sample_len: usize,
    pub max_diff: usize,
}

impl GrangerConfig {
    pub fn new(lag: usize) -> Self {
        Self {
            lag,
            alpha: 0.05,
            pearson_threshold: 0.95,
            sample_len: 1000,
            max_diff: 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lag == 0 {
            return Err(Error::Invalid("lag must be positive".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Invalid(format!(
                "alpha {} outside (0, 1)",
                self.alpha
            )));
        }
        if !(self.pearson_threshold > 0.0 && self.pearson_threshold <= 1.0) {
            return Err(Error::Invalid(format!(
                "pearson threshold {} outside (0, 1]",
                self.pearson_threshold
            )));
        }
        if self.sample_len <= 3 * self.lag {
            return Err(Error::Invalid(format!(
                "sample_len {} must exceed 3·lag = {}",
                self.sample_len,
                3 * self.lag
            )));
        }
        Ok(())
    }
}

/// Pearson correlation; errors on constant input.
pub fn pearson_corr(a: &[f64], b: &[f64], label_a: &str, label_b: &str) -> Result<f64> {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        let dx = x - ma;
        let dy = y - mb;
        cov += dx * dy;
        va += dx * dx;
        vb += dy * dy;
    }
    if va == 0.0 {
        return Err(Error::ZeroVariance(label_a.into()));
    }
    if vb == 0.0 {
        return Err(Error::ZeroVariance(label_b.into()));
    }
    Ok(cov / (va.sqrt() * vb.sqrt()))
}

/// Greedy redundancy filter: scanning channels in index order, channel `j`
/// is dropped when `|corr(i, j)| > threshold` for some retained `i < j`.
pub fn pearson_filter(series: &TimeSeries, threshold: f64) -> Result<Vec<usize>> {
    let mut retained: Vec<usize> = Vec::new();
    for j in 0..series.channels() {
        let mut keep = true;
        for &i in &retained {
            let corr = pearson_corr(
                series.channel(i),
                series.channel(j),
                &series.channel_names[i],
                &series.channel_names[j],
            )?;
            if corr.abs() > threshold {
                keep = false;
                break;
            }
        }
        // a constant channel must fail loudly rather than slip through the
        // filter unpaired
        if retained.is_empty() {
            let ch = series.channel(j);
            if ch.iter().all(|v| *v == ch[0]) {
                return Err(Error::ZeroVariance(series.channel_names[j].clone()));
            }
        }
        if keep {
            retained.push(j);
        }
    }
    Ok(retained)
}

/// Regression lag order `floor(12 · (N/100)^(1/4))` (Schwert's rule).
pub fn schwert_lags(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

/// 5% critical value of the constant-only Dickey-Fuller t distribution
/// (MacKinnon response-surface approximation), for `t_obs` regression rows.
pub fn adf_crit_5pct(t_obs: usize) -> f64 {
    let t = t_obs as f64;
    -2.86154 - 2.8903 / t - 4.234 / (t * t) - 40.04 / (t * t * t)
}

/// Augmented Dickey-Fuller test with constant term and `reg_lags` lagged
/// differences. Returns `(t statistic, stationary)`; stationary means the
/// statistic falls below the 5% critical value.
pub fn adf_test(channel: &[f64], reg_lags: usize) -> Result<(f64, bool)> {
    let n = channel.len();
    if n <= reg_lags + 10 {
        return Err(Error::Invalid(format!(
            "series of length {n} too short for ADF with {reg_lags} lags"
        )));
    }
    if channel.iter().all(|v| *v == channel[0]) {
        return Err(Error::ZeroVariance("adf input".into()));
    }
    let diff: Vec<f64> = channel.windows(2).map(|w| w[1] - w[0]).collect();
    let rows = n - reg_lags - 1;
    let k = reg_lags + 2;
    let mut design = Matrix::zeros(rows, k);
    let mut target = Vec::with_capacity(rows);
    for (r, t) in (reg_lags + 1..n).enumerate() {
        let row = design.row_mut(r);
        row[0] = 1.0;
        row[1] = channel[t - 1];
        for i in 1..=reg_lags {
            row[1 + i] = diff[t - 1 - i];
        }
        target.push(diff[t - 1]);
    }

    let cod = Cod::factor(&design, RANK_TOL);
    if cod.rank() < k {
        return Err(Error::Singular(format!(
            "ADF design rank {} < {k}",
            cod.rank()
        )));
    }
    let coef = cod.solve(&target);
    let mut ssr = 0.0;
    for r in 0..rows {
        let fitted: f64 = design.row(r).iter().zip(&coef).map(|(x, c)| x * c).sum();
        let e = target[r] - fitted;
        ssr += e * e;
    }
    if rows <= k {
        return Err(Error::Singular("no residual degrees of freedom".into()));
    }
    let sigma2 = ssr / (rows - k) as f64;
    let diag = cod
        .xtx_inverse_diag()
        .ok_or_else(|| Error::Singular("ADF design rank deficient".into()))?;
    let se = (sigma2 * diag[1]).sqrt();
    if !(se > 0.0) {
        return Err(Error::Singular("zero standard error in ADF".into()));
    }
    let t_stat = coef[1] / se;
    Ok((t_stat, t_stat < adf_crit_5pct(rows)))
}

/// Differences a channel until the ADF test passes, up to `max_diff` passes.
/// Returns the transformed series (shorter by the differencing order) and
/// the order used.
pub fn make_stationary(channel: &[f64], cfg: &GrangerConfig) -> Result<(Vec<f64>, usize)> {
    let mut current = channel.to_vec();
    for order in 0..=cfg.max_diff {
        let reg_lags = schwert_lags(current.len());
        match adf_test(&current, reg_lags) {
            Ok((_, true)) => return Ok((current, order)),
            Ok((_, false)) => {}
            Err(e) => {
                // degenerate regressions (constant or collinear differences)
                // surface as a non-stationarizable channel
                return Err(Error::NotStationary {
                    channel: usize::MAX,
                    reason: format!("ADF failed at difference order {order}: {e}"),
                });
            }
        }
        if order < cfg.max_diff {
            current = current.windows(2).map(|w| w[1] - w[0]).collect();
        }
    }
    Err(Error::NotStationary {
        channel: usize::MAX,
        reason: format!("still non-stationary after {} differences", cfg.max_diff),
    })
}

/// Lagged regression design: target `y[lag..]`, rows
/// `[1, r1[t-1..t-lag], r2[t-1..t-lag], ...]` (newest lag first).
pub fn build_lag_design(
    y: &[f64],
    regressors: &[&[f64]],
    lag: usize,
) -> Result<(Matrix, Vec<f64>)> {
    let n_raw = y.len();
    if lag == 0 {
        return Err(Error::Invalid("lag must be positive".into()));
    }
    if n_raw <= lag {
        return Err(Error::Invalid(format!(
            "series length {n_raw} insufficient for lag {lag}"
        )));
    }
    if regressors.iter().any(|r| r.len() != n_raw) {
        return Err(Error::Shape("regressor length mismatch".into()));
    }
    let rows = n_raw - lag;
    let k = 1 + lag * regressors.len();
    let mut design = Matrix::zeros(rows, k);
    let mut target = Vec::with_capacity(rows);
    for (r, t) in (lag..n_raw).enumerate() {
        let row = design.row_mut(r);
        row[0] = 1.0;
        let mut col = 1;
        for reg in regressors {
            for i in 1..=lag {
                row[col] = reg[t - i];
                col += 1;
            }
        }
        target.push(y[t]);
    }
    Ok((design, target))
}

/// Least-squares coefficients and sum of squared residuals.
///
/// Rank-deficient designs are solved in the minimum-norm sense with singular
/// values below `1e-10 · max` treated as zero.
pub fn ols_fit_ssr(design: &Matrix, target: &[f64]) -> Result<(Vec<f64>, f64)> {
    if design.rows() < design.cols() {
        return Err(Error::Invalid(format!(
            "design has {} rows < {} columns",
            design.rows(),
            design.cols()
        )));
    }
    lstsq_ssr(design, target)
}

/// One directed Granger test: does `cause` help predict `effect`?
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    /// Channel being predicted (`c1`).
    pub effect: usize,
    /// Channel whose lags are added (`c2`).
    pub cause: usize,
    pub ssr_u: f64,
    pub ssr_mv: f64,
    pub f_stat: f64,
    pub p_value: f64,
    /// Numerator degrees of freedom (= number of added parameters = lag).
    pub df_num: usize,
    /// Denominator degrees of freedom (= N − k_mv).
    pub df_den: usize,
    pub rejected: bool,
}

/// `F = ((SSR_u − SSR_mv)/k_u) / (SSR_mv/df_den)`, clamped at zero.
pub fn f_statistic(ssr_u: f64, ssr_mv: f64, k_u: usize, df_den: usize) -> f64 {
    if ssr_mv == 0.0 {
        return f64::INFINITY;
    }
    let num = (ssr_u - ssr_mv).max(0.0) / k_u as f64;
    let den = ssr_mv / df_den as f64;
    num / den
}

/// Granger test of `cause → effect` on two stationary channels of equal
/// length.
pub fn granger_pair(effect: &[f64], cause: &[f64], cfg: &GrangerConfig) -> Result<PairResult> {
    cfg.validate()?;
    if effect.len() != cause.len() {
        return Err(Error::Shape(format!(
            "channel lengths differ: {} vs {}",
            effect.len(),
            cause.len()
        )));
    }
    let lag = cfg.lag;
    let n_raw = effect.len();
    if n_raw <= lag {
        return Err(Error::Invalid(format!(
            "length {n_raw} insufficient for lag {lag}"
        )));
    }
    let n = n_raw - lag;
    let k_mv = 2 * lag + 1;
    if n <= k_mv {
        return Err(Error::Invalid(format!(
            "N = {n} observations cannot fit {k_mv} multivariate parameters"
        )));
    }

    let (design_u, target) = build_lag_design(effect, &[effect], lag)?;
    let (_, ssr_u) = ols_fit_ssr(&design_u, &target)?;
    let (design_mv, target_mv) = build_lag_design(effect, &[effect, cause], lag)?;
    let (_, ssr_mv) = ols_fit_ssr(&design_mv, &target_mv)?;

    let df_den = n - k_mv;
    let f_stat = f_statistic(ssr_u, ssr_mv, lag, df_den);
    let p_value = if f_stat.is_infinite() {
        0.0
    } else {
        f_upper_tail(f_stat, lag, df_den)?
    };
    Ok(PairResult {
        effect: 0,
        cause: 0,
        ssr_u,
        ssr_mv,
        f_stat,
        p_value,
        df_num: lag,
        df_den,
        rejected: p_value < cfg.alpha,
    })
}

/// Dataset-level analysis result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrangerReport {
    pub lag: usize,
    pub alpha: f64,
    pub sample_len: usize,
    /// Channel indices surviving the Pearson filter, ascending.
    pub retained_channels: Vec<usize>,
    /// Differencing order per retained channel; `None` when the channel
    /// could not be made stationary (its pairs are skipped).
    pub diff_orders: Vec<Option<usize>>,
    pub pairs: Vec<PairResult>,
    /// Ordered pairs skipped because a channel failed stationarization.
    pub skipped_pairs: usize,
    pub avg_f: f64,
    pub pct_rejected: f64,
}

/// Runs the full pipeline on the first `sample_len` steps.
pub fn granger_analyze(series: &TimeSeries, cfg: &GrangerConfig) -> Result<GrangerReport> {
    cfg.validate()?;
    if series.len() < cfg.sample_len {
        return Err(Error::Invalid(format!(
            "series has {} steps, need sample_len = {}",
            series.len(),
            cfg.sample_len
        )));
    }
    let analysis = series.slice(0, cfg.sample_len)?;
    let retained = pearson_filter(&analysis, cfg.pearson_threshold)?;
    if retained.len() < 2 {
        return Err(Error::Invalid(format!(
            "only {} channel(s) retained by the Pearson filter; no pairs to test",
            retained.len()
        )));
    }

    let mut diff_orders: Vec<Option<usize>> = Vec::with_capacity(retained.len());
    let mut transformed: Vec<Option<Vec<f64>>> = Vec::with_capacity(retained.len());
    for &c in &retained {
        match make_stationary(analysis.channel(c), cfg) {
            Ok((vec, order)) => {
                diff_orders.push(Some(order));
                transformed.push(Some(vec));
            }
            Err(Error::NotStationary { .. }) => {
                diff_orders.push(None);
                transformed.push(None);
            }
            Err(e) => return Err(e),
        }
    }

    let usable: Vec<(usize, &Vec<f64>)> = retained
        .iter()
        .zip(&transformed)
        .filter_map(|(&c, t)| t.as_ref().map(|v| (c, v)))
        .collect();
    if usable.len() < 2 {
        return Err(Error::Invalid(
            "fewer than 2 stationarizable channels; no pairs to test".into(),
        ));
    }
    let skipped_pairs = retained.len() * (retained.len() - 1) - usable.len() * (usable.len() - 1);

    let mut jobs: Vec<(usize, usize)> = Vec::new();
    for i in 0..usable.len() {
        for j in 0..usable.len() {
            if i != j {
                jobs.push((i, j));
            }
        }
    }
    let results = par_map_indexed(jobs.len(), |idx| {
        let (i, j) = jobs[idx];
        let (c1, y) = usable[i];
        let (c2, x) = usable[j];
        let common = y.len().min(x.len());
        let y_tail = &y[y.len() - common..];
        let x_tail = &x[x.len() - common..];
        granger_pair(y_tail, x_tail, cfg).map(|mut pair| {
            pair.effect = c1;
            pair.cause = c2;
            pair
        })
    });

    let mut pairs = Vec::with_capacity(results.len());
    for res in results {
        pairs.push(res?);
    }
    let completed = pairs.len() as f64;
    let avg_f = pairs.iter().map(|p| p.f_stat).sum::<f64>() / completed;
    let rejected = pairs.iter().filter(|p| p.rejected).count() as f64;
    Ok(GrangerReport {
        lag: cfg.lag,
        alpha: cfg.alpha,
        sample_len: cfg.sample_len,
        retained_channels: retained,
        diff_orders,
        pairs,
        skipped_pairs,
        avg_f,
        pct_rejected: 100.0 * rejected / completed,
    })
}

impl GrangerReport {
    /// Pair table as CSV.
    pub fn pairs_to_csv(&self) -> String {
        let mut out =
            String::from("effect,cause,ssr_u,ssr_mv,f_stat,p_value,df_num,df_den,rejected\n");
        for p in &self.pairs {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                p.effect,
                p.cause,
                p.ssr_u,
                p.ssr_mv,
                p.f_stat,
                p.p_value,
                p.df_num,
                p.df_den,
                p.rejected
            ));
        }
        out
    }
}
