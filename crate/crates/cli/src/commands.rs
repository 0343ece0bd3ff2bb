use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use mbrank_core::{
    accuracy, backward_eliminate, bahsic_eliminate, clip_ranking, forward_select, gen_mb_dataset, iamb,
    normalize_ranks, DataMatrix, EliminationResult, Error, MarkovBlanketTruth, MeasureKind, SubsetResult,
};

use crate::bench::{aggregate_records, format_aggregate, format_records, run_bench};
use crate::config::{kernel_spec, load_config, BenchKnobs, ExperimentConfig, KernelChoice, SynthKnobs};
use crate::error::{CliError, CliResult};
use crate::io::{format_csv, read_csv, write_text, RankingFile, TruthFile};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Backward,
    Forward,
    Iamb,
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "backward" => Ok(Self::Backward),
            "forward" => Ok(Self::Forward),
            "iamb" => Ok(Self::Iamb),
            other => Err(format!("unknown method `{other}` (expected backward, forward or iamb)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RankRequest {
    pub data: PathBuf,
    pub target: String,
    pub measure: MeasureKind,
    pub method: Method,
    pub kernel: KernelChoice,
    pub sigma: Option<f64>,
    pub epsilon: f64,
    pub beta: f64,
    pub alpha: f64,
    pub out: Option<PathBuf>,
}

pub enum RankOutput {
    Ranking(EliminationResult),
    Subset(SubsetResult),
}

pub fn rank(req: &RankRequest) -> CliResult<(DataMatrix, RankOutput)> {
    let data = read_csv(&req.data)?;
    let target = data
        .index_of(&req.target)
        .ok_or_else(|| CliError::Usage(format!("target `{}` is not a column of {}", req.target, req.data.display())))?;
    let spec = kernel_spec(req.kernel, req.sigma, req.epsilon)?;
    let output = match (req.method, req.measure) {
        (Method::Iamb, _) => RankOutput::Subset(iamb(&data, target, req.alpha)?),
        (Method::Backward, MeasureKind::Hsic) => RankOutput::Ranking(bahsic_eliminate(&data, target, &spec)?),
        (Method::Backward, kind) => RankOutput::Ranking(backward_eliminate(&data, target, kind, &spec, req.beta)?),
        (Method::Forward, kind) => RankOutput::Ranking(forward_select(&data, target, kind, &spec, None)?),
    };
    Ok((data, output))
}

/// Runs `rank`, prints the result and writes it when an output path is set.
pub fn cmd_rank(req: &RankRequest) -> CliResult<()> {
    let (data, output) = rank(req)?;
    let names = data.names();
    let file = match &output {
        RankOutput::Ranking(r) => {
            println!("direction={} measure={}", r.direction().name(), req.measure);
            println!("step\tvariable\tvalue");
            for (i, (&v, value)) in r.order().iter().zip(r.step_values()).enumerate() {
                println!("{}\t{}\t{}", i + 1, names[v], value);
            }
            let ascending: Vec<&str> = r.ascending().iter().map(|&j| names[j].as_str()).collect();
            println!("ascending={}", ascending.join(","));
            RankingFile::from_result(r, &req.target, req.measure.name(), names)
        }
        RankOutput::Subset(s) => {
            let members: Vec<&str> = s.members.iter().map(|&j| names[j].as_str()).collect();
            println!("members={}", members.join(","));
            RankingFile::from_subset(s, &req.target, "iamb", names)
        }
    };
    if let Some(out) = &req.out {
        write_text(out, &file.format())?;
    }
    Ok(())
}

/// Path of the truth sidecar written next to a dataset.
pub fn default_truth_path(data: &Path) -> PathBuf {
    data.with_extension("truth")
}

pub fn cmd_synth(config: Option<&Path>, cli: SynthKnobs, out: &Path, truth: Option<&Path>) -> CliResult<()> {
    let mut knobs = SynthKnobs::default();
    if let Some(path) = config {
        load_config(path, &mut knobs, None)?;
    }
    let cfg = knobs.overridden_by(cli).to_config()?;
    let (data, mb) = gen_mb_dataset(&cfg)?;
    let truth_path = truth.map_or_else(|| default_truth_path(out), Path::to_path_buf);
    write_text(out, &format_csv(&data))?;
    write_text(&truth_path, &TruthFile::from_truth(&mb, data.names()).format())?;
    println!("wrote {} ({} rows, {} columns) and {}", out.display(), data.n_samples(), data.n_vars(), truth_path.display());
    Ok(())
}

/// Result of `bench`: whether any trial produced an error row.
pub fn cmd_bench(config: Option<&Path>, synth_cli: SynthKnobs, bench_cli: BenchKnobs) -> CliResult<bool> {
    let (mut synth, mut bench) = (SynthKnobs::default(), BenchKnobs::default());
    if let Some(path) = config {
        load_config(path, &mut synth, Some(&mut bench))?;
    }
    let cfg = ExperimentConfig::from_knobs(&synth.overridden_by(synth_cli), &bench.overridden_by(bench_cli))?;
    let records = run_bench(&cfg)?;
    let rows = aggregate_records(&records);
    let table = format_aggregate(&rows);
    match &cfg.out {
        Some(out) => write_text(out, &format_records(&records))?,
        None => print!("{}", format_records(&records)),
    }
    if let Some(path) = &cfg.aggregate {
        write_text(path, &table)?;
    }
    print!("{table}");
    let errors = records.iter().filter(|r| r.is_error()).count();
    if errors > 0 {
        eprintln!("{errors} trial(s) failed; see error rows");
    }
    Ok(errors > 0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scores {
    pub mean_mb_rank: Option<f64>,
    pub accuracy: f64,
}

/// Indexes every name mentioned by the ranking and the truth, then scores.
pub fn score(truth: &TruthFile, ranking: &RankingFile) -> CliResult<Scores> {
    if truth.mb.is_empty() {
        return Err(Error::EmptyTruth.into());
    }
    if ranking.target() != truth.target {
        return Err(CliError::Usage(format!(
            "ranking target `{}` differs from truth target `{}`",
            ranking.target(),
            truth.target
        )));
    }
    let listed: &[String] = match ranking {
        RankingFile::Ranking { order, .. } => order,
        RankingFile::Subset { members, .. } => members,
    };
    let mut index: BTreeMap<&str, usize> = BTreeMap::new();
    for name in listed.iter().chain(std::iter::once(&truth.target)) {
        let next = index.len();
        index.entry(name).or_insert(next);
    }
    let missing: Vec<String> = truth.mb.iter().filter(|n| !listed.contains(n)).cloned().collect();
    if matches!(ranking, RankingFile::Ranking { .. }) && !missing.is_empty() {
        return Err(CliError::NameMismatch(missing));
    }
    for name in &truth.mb {
        let next = index.len();
        index.entry(name).or_insert(next);
    }
    let idx = |names: &[String]| -> Vec<usize> { names.iter().map(|n| index[n.as_str()]).collect() };
    let mb = MarkovBlanketTruth::new(index[truth.target.as_str()], idx(&truth.mb))?;
    match ranking {
        RankingFile::Ranking { direction, order, values, .. } => {
            let values = if values.len() == order.len() { values.clone() } else { vec![f64::NAN; order.len()] };
            let result = EliminationResult::new(idx(order), values, *direction)?;
            let rank = normalize_ranks(&result.ascending(), &mb)?.mean_mb_rank;
            let acc = accuracy(&clip_ranking(&result, mb.mb.len())?, &mb)?;
            Ok(Scores { mean_mb_rank: Some(rank), accuracy: acc })
        }
        RankingFile::Subset { members, .. } => {
            let acc = accuracy(&SubsetResult::new(idx(members)), &mb)?;
            Ok(Scores { mean_mb_rank: None, accuracy: acc })
        }
    }
}

pub fn cmd_score(truth: &Path, ranking: &Path) -> CliResult<()> {
    let scores = score(&TruthFile::read(truth)?, &RankingFile::read(ranking)?)?;
    if let Some(rank) = scores.mean_mb_rank {
        println!("mean_mb_rank={rank}");
    }
    println!("accuracy={}", scores.accuracy);
    Ok(())
}
