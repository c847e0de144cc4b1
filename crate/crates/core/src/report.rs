//! Aggregation of evaluation results into summary artifacts:
//! horizon-averaged MSE tables, per-dataset ranks and wins, CI-vs-CD matchup
//! counts, and best-lookback frequency histograms.

use crate::error::{Error, Result};
use crate::tune::TuneReport;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

/// Test-MSE grid keyed by `(model, dataset, horizon)`. `None` marks an
/// explicit missing entry (out-of-memory or absent run).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultsTable {
    entries: BTreeMap<(String, String, usize), Option<f64>>,
}

impl ResultsTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(
        &mut self,
        model: &str,
        dataset: &str,
        horizon: usize,
        mse: Option<f64>,
    ) -> Result<()> {
        if let Some(v) = mse {
            if !(v >= 0.0) {
                return Err(Error::Invalid(format!(
                    "MSE for ({model}, {dataset}, {horizon}) is {v}, must be ≥ 0"
                )));
            }
        }
        let key = (model.to_string(), dataset.to_string(), horizon);
        if self.entries.contains_key(&key) {
            return Err(Error::Aggregation(format!(
                "duplicate entry for ({model}, {dataset}, H={horizon})"
            )));
        }
        self.entries.insert(key, mse);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn horizons(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.entries.keys().map(|k| k.2).collect();
        set.into_iter().collect()
    }

    pub fn get(&self, model: &str, dataset: &str, horizon: usize) -> Option<Option<f64>> {
        self.entries
            .get(&(model.to_string(), dataset.to_string(), horizon))
            .copied()
    }

    /// Arithmetic mean over the listed horizons per `(model, dataset)`.
    ///
    /// A pair must either carry a value at every listed horizon or be wholly
    /// missing; partial coverage is an error naming the cell.
    pub fn average_over_horizons(
        &self,
        horizons: &[usize],
    ) -> Result<BTreeMap<(String, String), Option<f64>>> {
        if horizons.is_empty() {
            return Err(Error::Aggregation("no horizons listed".into()));
        }
        let pairs: BTreeSet<(String, String)> = self
            .entries
            .keys()
            .map(|(m, d, _)| (m.clone(), d.clone()))
            .collect();
        let mut out = BTreeMap::new();
        for (model, dataset) in pairs {
            let mut values = Vec::new();
            let mut missing = 0;
            for &h in horizons {
                match self.get(&model, &dataset, h) {
                    Some(Some(v)) => values.push(v),
                    Some(None) | None => missing += 1,
                }
            }
            if !values.is_empty() && missing > 0 {
                return Err(Error::Aggregation(format!(
                    "partial horizon coverage for ({model}, {dataset}): {} of {} horizons present",
                    values.len(),
                    horizons.len()
                )));
            }
            let avg = if values.is_empty() {
                None
            } else {
                Some(values.iter().sum::<f64>() / values.len() as f64)
            };
            out.insert((model, dataset), avg);
        }
        Ok(out)
    }
}

/// Ranks, average ranks, and win counts derived from an averaged-MSE map.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOutcome {
    /// Per-dataset ascending-MSE ranks; ties share the mean rank.
    pub ranks: BTreeMap<(String, String), f64>,
    /// Mean rank per model over the datasets where it is present.
    pub avg_rank: BTreeMap<String, f64>,
    /// Datasets on which the model attains the minimum; ties all win.
    pub wins: BTreeMap<String, u32>,
}

/// Per-dataset ranking with tie-sharing; missing models are excluded from a
/// dataset's ranking rather than ranked last.
pub fn rank_and_wins(avg: &BTreeMap<(String, String), Option<f64>>) -> Result<RankOutcome> {
    if avg.is_empty() {
        return Err(Error::Aggregation("empty results".into()));
    }
    let datasets: BTreeSet<String> = avg.keys().map(|(_, d)| d.clone()).collect();
    let models: BTreeSet<String> = avg.keys().map(|(m, _)| m.clone()).collect();

    let mut ranks = BTreeMap::new();
    let mut wins: BTreeMap<String, u32> = models.iter().map(|m| (m.clone(), 0)).collect();
    let mut rank_acc: BTreeMap<String, (f64, u32)> = BTreeMap::new();

    for dataset in &datasets {
        let mut present: Vec<(String, f64)> = models
            .iter()
            .filter_map(|m| {
                avg.get(&(m.clone(), dataset.clone()))
                    .copied()
                    .flatten()
                    .map(|v| (m.clone(), v))
            })
            .collect();
        if present.is_empty() {
            continue;
        }
        present.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));

        // group ties, assign the mean of the ranks the group spans
        let mut i = 0;
        while i < present.len() {
            let mut j = i;
            while j + 1 < present.len() && present[j + 1].1 == present[i].1 {
                j += 1;
            }
            let shared = (i + 1 + j + 1) as f64 / 2.0;
            for item in &present[i..=j] {
                ranks.insert((item.0.clone(), dataset.clone()), shared);
                let acc = rank_acc.entry(item.0.clone()).or_insert((0.0, 0));
                acc.0 += shared;
                acc.1 += 1;
            }
            i = j + 1;
        }

        let min = present[0].1;
        for (model, value) in &present {
            if *value == min {
                *wins.get_mut(model).unwrap() += 1;
            }
        }
    }

    let avg_rank = rank_acc
        .into_iter()
        .map(|(m, (sum, n))| (m, sum / n as f64))
        .collect();
    Ok(RankOutcome {
        ranks,
        avg_rank,
        wins,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grouping {
    ByModel,
    ByDataset,
}

/// Counts of winning lookback per group, aggregated across horizons.
pub fn lookback_histogram(
    reports: &[TuneReport],
    grouping: Grouping,
) -> BTreeMap<(String, usize), usize> {
    let mut counts = BTreeMap::new();
    for report in reports {
        let group = match grouping {
            Grouping::ByModel => report.model_id.clone(),
            Grouping::ByDataset => report.dataset.clone(),
        };
        *counts.entry((group, report.best_lookback)).or_insert(0) += 1;
    }
    counts
}

/// CI-vs-CD matchup counts.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchupOutcome {
    /// `(family, dataset_family) → (ci_wins, cd_wins)`; exact ties count to
    /// neither side.
    pub counts: BTreeMap<(String, String), (u32, u32)>,
    /// `(family, dataset)` pairs skipped because a variant was missing.
    pub skipped: Vec<(String, String)>,
}

/// Per model family and dataset family, counts datasets where the CI variant
/// beats the CD variant and vice versa.
pub fn ci_cd_matchup(
    avg: &BTreeMap<(String, String), Option<f64>>,
    pairing: &BTreeMap<String, (String, String)>,
    dataset_families: &BTreeMap<String, String>,
) -> Result<MatchupOutcome> {
    let datasets: BTreeSet<String> = avg.keys().map(|(_, d)| d.clone()).collect();
    let mut counts: BTreeMap<(String, String), (u32, u32)> = BTreeMap::new();
    let mut skipped = Vec::new();
    for (family, (ci_id, cd_id)) in pairing {
        for dataset in &datasets {
            let ci = avg
                .get(&(ci_id.clone(), dataset.clone()))
                .copied()
                .flatten();
            let cd = avg
                .get(&(cd_id.clone(), dataset.clone()))
                .copied()
                .flatten();
            let family_of_dataset = dataset_families
                .get(dataset)
                .cloned()
                .unwrap_or_else(|| "unknown".to_string());
            let key = (family.clone(), family_of_dataset);
            let entry = counts.entry(key).or_insert((0, 0));
            match (ci, cd) {
                (Some(ci), Some(cd)) => {
                    if ci < cd {
                        entry.0 += 1;
                    } else if cd < ci {
                        entry.1 += 1;
                    }
                }
                _ => skipped.push((family.clone(), dataset.clone())),
            }
        }
    }
    Ok(MatchupOutcome { counts, skipped })
}

/// Tie and missing-entry policies used by the aggregation, recorded in every
/// exported report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Policies {
    pub ties: String,
    pub missing: String,
}

impl Default for Policies {
    fn default() -> Self {
        Self {
            ties: "minimum shared by all tied models; tied ranks averaged".into(),
            missing: "excluded from ranking (alternative: impute worst rank; not used)".into(),
        }
    }
}

/// Exported summary artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct SummaryReport {
    /// model → dataset → horizon-averaged test MSE (missing cells omitted).
    pub avg_mse: BTreeMap<String, BTreeMap<String, f64>>,
    pub ranks: BTreeMap<String, BTreeMap<String, f64>>,
    pub avg_rank: BTreeMap<String, f64>,
    pub wins: BTreeMap<String, u32>,
    /// group → lookback → count.
    pub lookback_hist: BTreeMap<String, BTreeMap<u64, u32>>,
    /// model family → dataset family → (ci_wins, cd_wins).
    pub matchup: BTreeMap<String, BTreeMap<String, (u32, u32)>>,
    #[serde(default)]
    pub policies: Policies,
}

impl SummaryReport {
    /// Assembles the summary from per-search reports.
    pub fn from_tune_reports(reports: &[TuneReport], grouping: Grouping) -> Result<SummaryReport> {
        if reports.is_empty() {
            return Err(Error::Aggregation("no tune reports supplied".into()));
        }
        let mut table = ResultsTable::new();
        for r in reports {
            let mse = r.selected_test_mse();
            table.insert(&r.model_id, &r.dataset, r.horizon, mse)?;
        }
        let horizons = table.horizons();
        let avg = table.average_over_horizons(&horizons)?;
        let ranked = rank_and_wins(&avg)?;
        let hist = lookback_histogram(reports, grouping);

        // derive CI/CD pairing from `<family>-CI` / `<family>-CD` ids
        let mut families: BTreeMap<String, (Option<String>, Option<String>)> = BTreeMap::new();
        for (model, _) in avg.keys() {
            if let Some(fam) = model.strip_suffix("-CI") {
                families.entry(fam.to_string()).or_default().0 = Some(model.clone());
            } else if let Some(fam) = model.strip_suffix("-CD") {
                families.entry(fam.to_string()).or_default().1 = Some(model.clone());
            }
        }
        let pairing: BTreeMap<String, (String, String)> = families
            .into_iter()
            .filter_map(|(fam, (ci, cd))| Some((fam, (ci?, cd?))))
            .collect();
        let dataset_families: BTreeMap<String, String> = avg
            .keys()
            .map(|(_, d)| (d.clone(), dataset_family(d).to_string()))
            .collect();
        let matchup = ci_cd_matchup(&avg, &pairing, &dataset_families)?;

        Ok(Self::assemble(&avg, &ranked, &hist, &matchup))
    }

    pub fn assemble(
        avg: &BTreeMap<(String, String), Option<f64>>,
        ranked: &RankOutcome,
        hist: &BTreeMap<(String, usize), usize>,
        matchup: &MatchupOutcome,
    ) -> SummaryReport {
        let mut avg_mse: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        for ((m, d), v) in avg {
            if let Some(v) = v {
                avg_mse.entry(m.clone()).or_default().insert(d.clone(), *v);
            }
        }
        let mut ranks: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        for ((m, d), r) in &ranked.ranks {
            ranks.entry(m.clone()).or_default().insert(d.clone(), *r);
        }
        let mut lookback_hist: BTreeMap<String, BTreeMap<u64, u32>> = BTreeMap::new();
        for ((g, l), n) in hist {
            lookback_hist
                .entry(g.clone())
                .or_default()
                .insert(*l as u64, *n as u32);
        }
        let mut matchup_out: BTreeMap<String, BTreeMap<String, (u32, u32)>> = BTreeMap::new();
        for ((fam, dfam), counts) in &matchup.counts {
            matchup_out
                .entry(fam.clone())
                .or_default()
                .insert(dfam.clone(), *counts);
        }
        SummaryReport {
            avg_mse,
            ranks,
            avg_rank: ranked.avg_rank.clone(),
            wins: ranked.wins.clone(),
            lookback_hist,
            matchup: matchup_out,
            policies: Policies::default(),
        }
    }

    pub fn export_json(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn import_json(path: &Path) -> Result<SummaryReport> {
        let json = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&json)?)
    }

    /// Writes one CSV per table under `dir`.
    pub fn export_csv(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, content: String| -> Result<()> {
            let path = dir.join(name);
            std::fs::write(&path, content).map_err(|e| Error::io(&path, e))
        };

        let mut avg = String::from("model,dataset,avg_mse\n");
        for (m, row) in &self.avg_mse {
            for (d, v) in row {
                avg.push_str(&format!("{m},{d},{v}\n"));
            }
        }
        write("avg_mse.csv", avg)?;

        let mut ranks = String::from("model,dataset,rank\n");
        for (m, row) in &self.ranks {
            for (d, v) in row {
                ranks.push_str(&format!("{m},{d},{v}\n"));
            }
        }
        write("ranks.csv", ranks)?;

        let mut summary = String::from("model,avg_rank,wins\n");
        for (m, r) in &self.avg_rank {
            let w = self.wins.get(m).copied().unwrap_or(0);
            summary.push_str(&format!("{m},{r},{w}\n"));
        }
        write("model_summary.csv", summary)?;

        let mut hist = String::from("group,lookback,count\n");
        for (g, row) in &self.lookback_hist {
            for (l, n) in row {
                hist.push_str(&format!("{g},{l},{n}\n"));
            }
        }
        write("lookback_hist.csv", hist)?;

        let mut matchup = String::from("model_family,dataset_family,ci_wins,cd_wins\n");
        for (f, row) in &self.matchup {
            for (df, (ci, cd)) in row {
                matchup.push_str(&format!("{f},{df},{ci},{cd}\n"));
            }
        }
        write("matchup.csv", matchup)?;
        Ok(())
    }
}

/// Dataset family: the six generated ODE benchmark names form the `ode`
/// family, everything else is `standard`.
pub fn dataset_family(dataset: &str) -> &'static str {
    match crate::ode::SystemKind::from_name(dataset) {
        Some(_) => "ode",
        None => "standard",
    }
}
