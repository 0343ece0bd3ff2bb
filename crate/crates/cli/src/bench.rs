//! Benchmark sweeps: run algorithms over generated or loaded data, score
//! them, and serialize the records.
//!
//! A results file holds one record per line as space-separated `key=value`
//! pairs in a fixed key order:
//!
//! ```text
//! experiment=samples algorithm=proposed-f grid_value=500 trial=0 seed=42 status=ok metric=mean_mb_rank value=1 wall_time_ms=812.4
//! experiment=edges algorithm=iamb grid_value=20 trial=3 seed=7 status=error metric=none value=NaN wall_time_ms=0.1 message=...
//! ```
//!
//! `message` only appears on error rows and runs to the end of the line.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::time::Instant;

use mbrank_core::synth::{sweep_plan, SweepPoint};
use mbrank_core::{
    accuracy, aggregate, backward_eliminate, bahsic_eliminate, clip_ranking, forward_select, iamb, normalize_ranks,
    DataMatrix, MarkovBlanketTruth, MeasureKind,
};

use crate::config::{Algorithm, DataSource, ExperimentConfig};
use crate::error::{CliError, CliResult};
use crate::io::{read_csv, TruthFile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    Accuracy,
    MeanMbRank,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Self::Accuracy => "accuracy",
            Self::MeanMbRank => "mean_mb_rank",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Score { metric: Metric, value: f64 },
    Failed { message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub experiment: String,
    pub algorithm: Algorithm,
    pub grid_value: f64,
    pub trial: usize,
    pub seed: u64,
    pub outcome: Outcome,
    pub wall_time_ms: f64,
}

impl ResultRecord {
    pub fn is_error(&self) -> bool {
        matches!(self.outcome, Outcome::Failed { .. })
    }

    pub fn score(&self, metric: Metric) -> Option<f64> {
        match self.outcome {
            Outcome::Score { metric: m, value } if m == metric => Some(value),
            _ => None,
        }
    }

    fn sort_key(&self) -> (f64, &'static str, usize, u8, &'static str) {
        match &self.outcome {
            Outcome::Score { metric, .. } => (self.grid_value, self.algorithm.name(), self.trial, 0, metric.name()),
            Outcome::Failed { .. } => (self.grid_value, self.algorithm.name(), self.trial, 1, ""),
        }
    }

    pub fn format(&self) -> String {
        let head = format!(
            "experiment={} algorithm={} grid_value={} trial={} seed={}",
            self.experiment, self.algorithm, self.grid_value, self.trial, self.seed
        );
        match &self.outcome {
            Outcome::Score { metric, value } => {
                format!("{head} status=ok metric={metric} value={value} wall_time_ms={:.3}", self.wall_time_ms)
            }
            Outcome::Failed { message } => format!(
                "{head} status=error metric=none value=NaN wall_time_ms={:.3} message={}",
                self.wall_time_ms,
                message.replace('\n', " ")
            ),
        }
    }

    pub fn parse(line: &str) -> Result<Self, String> {
        let (fields, message) = match line.split_once(" message=") {
            Some((f, m)) => (f, Some(m.to_string())),
            None => (line, None),
        };
        let map: BTreeMap<&str, &str> = fields
            .split_whitespace()
            .map(|kv| kv.split_once('=').ok_or_else(|| format!("malformed field `{kv}`")))
            .collect::<Result<_, _>>()?;
        let get = |k: &str| map.get(k).copied().ok_or_else(|| format!("missing `{k}`"));
        let num = |k: &str| get(k).and_then(|v| v.parse::<f64>().map_err(|e| format!("{k}: {e}")));
        let outcome = match get("status")? {
            "ok" => {
                let metric = match get("metric")? {
                    "accuracy" => Metric::Accuracy,
                    "mean_mb_rank" => Metric::MeanMbRank,
                    other => return Err(format!("unknown metric `{other}`")),
                };
                Outcome::Score { metric, value: num("value")? }
            }
            "error" => Outcome::Failed { message: message.unwrap_or_default() },
            other => return Err(format!("unknown status `{other}`")),
        };
        Ok(Self {
            experiment: get("experiment")?.to_string(),
            algorithm: get("algorithm")?.parse()?,
            grid_value: num("grid_value")?,
            trial: get("trial")?.parse().map_err(|e| format!("trial: {e}"))?,
            seed: get("seed")?.parse().map_err(|e| format!("seed: {e}"))?,
            outcome,
            wall_time_ms: num("wall_time_ms")?,
        })
    }
}

fn record_order(a: &ResultRecord, b: &ResultRecord) -> Ordering {
    let (ka, kb) = (a.sort_key(), b.sort_key());
    ka.0.total_cmp(&kb.0).then_with(|| (ka.1, ka.2, ka.3, ka.4).cmp(&(kb.1, kb.2, kb.3, kb.4)))
}

/// Runs one algorithm and scores it: mean MB rank and accuracy for
/// rankings, accuracy alone for IAMB.
pub fn score_algorithm(
    algorithm: Algorithm,
    data: &DataMatrix,
    truth: &MarkovBlanketTruth,
    cfg: &ExperimentConfig,
) -> mbrank_core::Result<Vec<(Metric, f64)>> {
    let target = truth.target;
    let ranking = match algorithm {
        Algorithm::ProposedF => backward_eliminate(data, target, MeasureKind::M1, &cfg.kernel, cfg.beta)?,
        Algorithm::ProposedZ => backward_eliminate(data, target, MeasureKind::M2, &cfg.kernel, cfg.beta)?,
        Algorithm::ForwardF => forward_select(data, target, MeasureKind::M1, &cfg.kernel, None)?,
        Algorithm::ForwardZ => forward_select(data, target, MeasureKind::M2, &cfg.kernel, None)?,
        Algorithm::Bahsic => bahsic_eliminate(data, target, &cfg.kernel)?,
        Algorithm::Iamb => {
            let subset = iamb(data, target, cfg.alpha)?;
            return Ok(vec![(Metric::Accuracy, accuracy(&subset, truth)?)]);
        }
    };
    let rank = normalize_ranks(&ranking.ascending(), truth)?.mean_mb_rank;
    let acc = accuracy(&clip_ranking(&ranking, truth.mb.len())?, truth)?;
    Ok(vec![(Metric::MeanMbRank, rank), (Metric::Accuracy, acc)])
}

struct Cell<'a> {
    experiment: &'a str,
    grid_value: f64,
    trial: usize,
    seed: u64,
}

impl Cell<'_> {
    fn record(&self, algorithm: Algorithm, outcome: Outcome, wall_time_ms: f64) -> ResultRecord {
        ResultRecord {
            experiment: self.experiment.to_string(),
            algorithm,
            grid_value: self.grid_value,
            trial: self.trial,
            seed: self.seed,
            outcome,
            wall_time_ms,
        }
    }

    fn run(&self, data: mbrank_core::Result<(DataMatrix, MarkovBlanketTruth)>, cfg: &ExperimentConfig) -> Vec<ResultRecord> {
        let (data, truth) = match data {
            Ok(d) => d,
            Err(e) => {
                let message = format!("data generation failed: {e}");
                return cfg
                    .algorithms
                    .iter()
                    .map(|&a| self.record(a, Outcome::Failed { message: message.clone() }, 0.0))
                    .collect();
            }
        };
        let mut out = Vec::new();
        for &algorithm in &cfg.algorithms {
            let start = Instant::now();
            let scored = score_algorithm(algorithm, &data, &truth, cfg);
            let ms = start.elapsed().as_secs_f64() * 1e3;
            match scored {
                Ok(scores) => out.extend(
                    scores.into_iter().map(|(metric, value)| self.record(algorithm, Outcome::Score { metric, value }, ms)),
                ),
                Err(e) => out.push(self.record(algorithm, Outcome::Failed { message: e.to_string() }, ms)),
            }
        }
        out
    }
}

/// Runs a configured sweep. Trial failures become error records; only
/// configuration and input-file problems abort.
pub fn run_bench(cfg: &ExperimentConfig) -> CliResult<Vec<ResultRecord>> {
    let experiment = cfg.experiment_name();
    let mut records = Vec::new();
    match &cfg.source {
        DataSource::Synthetic { experiment: exp, grid, trials, base, fixed_samples } => {
            let plan: Vec<SweepPoint> = sweep_plan(*exp, grid, base, *trials, Some(*fixed_samples))?;
            for point in &plan {
                for trial in &point.trials {
                    let cell = Cell { experiment, grid_value: point.value, trial: trial.trial, seed: trial.seed };
                    records.extend(cell.run(trial.generate(), cfg));
                }
            }
        }
        DataSource::File { data, truth } => {
            let matrix = read_csv(data)?;
            let truth = TruthFile::read(truth)?.resolve(&matrix)?;
            if truth.mb.is_empty() {
                eprintln!("skipping target {}: empty Markov blanket", matrix.names()[truth.target]);
            } else {
                let cell = Cell { experiment, grid_value: 0.0, trial: 0, seed: 0 };
                records.extend(cell.run(Ok((matrix, truth)), cfg));
            }
        }
    }
    records.sort_by(record_order);
    Ok(records)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub grid_value: f64,
    pub algorithm: Algorithm,
    pub metric: Metric,
    pub mean: f64,
    /// `None` with fewer than two successful trials.
    pub ci95: Option<f64>,
}

pub fn aggregate_records(records: &[ResultRecord]) -> Vec<AggregateRow> {
    let mut groups: Vec<((f64, Algorithm, Metric), Vec<f64>)> = Vec::new();
    for r in records {
        if let Outcome::Score { metric, value } = r.outcome {
            let key = (r.grid_value, r.algorithm, metric);
            match groups.iter_mut().find(|(k, _)| k.0.to_bits() == key.0.to_bits() && k.1 == key.1 && k.2 == key.2) {
                Some((_, v)) => v.push(value),
                None => groups.push((key, vec![value])),
            }
        }
    }
    let mut rows: Vec<AggregateRow> = groups
        .into_iter()
        .map(|((grid_value, algorithm, metric), scores)| {
            let (mean, ci95) = match aggregate(&scores) {
                Ok(s) => (s.mean, Some(s.ci95_half_width)),
                Err(_) => (scores[0], None),
            };
            AggregateRow { grid_value, algorithm, metric, mean, ci95 }
        })
        .collect();
    rows.sort_by(|a, b| {
        a.grid_value
            .total_cmp(&b.grid_value)
            .then_with(|| a.algorithm.name().cmp(b.algorithm.name()))
            .then(a.metric.cmp(&b.metric))
    });
    rows
}

/// Mean of one (grid value, algorithm, metric) cell.
pub fn mean_of(rows: &[AggregateRow], grid_value: f64, algorithm: Algorithm, metric: Metric) -> Option<f64> {
    rows.iter()
        .find(|r| r.grid_value == grid_value && r.algorithm == algorithm && r.metric == metric)
        .map(|r| r.mean)
}

pub fn format_records(records: &[ResultRecord]) -> String {
    records.iter().map(|r| r.format() + "\n").collect()
}

pub fn format_aggregate(rows: &[AggregateRow]) -> String {
    let mut s = String::from("grid_value,algorithm,metric,mean,ci95\n");
    for r in rows {
        let ci = r.ci95.map(|c| c.to_string()).unwrap_or_default();
        s.push_str(&format!("{},{},{},{},{}\n", r.grid_value, r.algorithm, r.metric, r.mean, ci));
    }
    s
}

pub fn read_records(path: &Path) -> CliResult<Vec<ResultRecord>> {
    let text = crate::io::read_text(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| ResultRecord::parse(l).map_err(|m| CliError::parse(path, i + 1, m)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(alg: Algorithm, g: f64, trial: usize, outcome: Outcome) -> ResultRecord {
        ResultRecord { experiment: "noise".into(), algorithm: alg, grid_value: g, trial, seed: 5, outcome, wall_time_ms: 1.5 }
    }

    #[test]
    fn record_round_trip() {
        let ok = rec(Algorithm::ProposedF, 0.5, 2, Outcome::Score { metric: Metric::MeanMbRank, value: 8.0 / 3.0 });
        assert_eq!(ResultRecord::parse(&ok.format()).unwrap(), ok);
        let bad = rec(Algorithm::Iamb, 1.0, 0, Outcome::Failed { message: "matrix is not positive definite".into() });
        assert_eq!(ResultRecord::parse(&bad.format()).unwrap(), bad);
        assert!(ResultRecord::parse("experiment=x").is_err());
    }

    #[test]
    fn aggregation_groups_and_sorts() {
        let s = |v| Outcome::Score { metric: Metric::Accuracy, value: v };
        let records = vec![
            rec(Algorithm::ProposedF, 2.0, 0, s(100.0)),
            rec(Algorithm::ProposedF, 1.0, 0, s(0.0)),
            rec(Algorithm::ProposedF, 1.0, 1, s(100.0)),
            rec(Algorithm::Bahsic, 1.0, 0, s(40.0)),
            rec(Algorithm::Bahsic, 1.0, 1, Outcome::Failed { message: "x".into() }),
        ];
        let rows = aggregate_records(&records);
        assert_eq!(rows.len(), 3);
        assert_eq!((rows[0].algorithm, rows[0].mean, rows[0].ci95), (Algorithm::Bahsic, 40.0, None));
        assert_eq!(rows[1].mean, 50.0);
        assert!((rows[1].ci95.unwrap() - 98.0).abs() < 0.01);
        assert_eq!(rows[2].grid_value, 2.0);
        assert_eq!(mean_of(&rows, 1.0, Algorithm::ProposedF, Metric::Accuracy), Some(50.0));
        assert!(format_aggregate(&rows).starts_with("grid_value,algorithm,metric,mean,ci95\n1,bahsic,accuracy,40,\n"));
    }
}
