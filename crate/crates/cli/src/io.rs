//! Plain-text file formats: dataset CSV, truth sidecar, ranking output.
//!
//! Floats are written with Rust's shortest round-trip representation, so a
//! written value parses back to the identical `f64`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use mbrank_core::{ColumnKind, DataMatrix, Direction, EliminationResult, MarkovBlanketTruth, SubsetResult};
use nalgebra::DMatrix;

use crate::error::{CliError, CliResult};

pub fn valid_name(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Parses a header row plus numeric rows. Columns whose values are all
/// integers are marked discrete.
pub fn parse_csv(path: &Path, text: &str) -> CliResult<DataMatrix> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| CliError::parse(path, 1, "empty file"))?;
    let names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    if let Some(bad) = names.iter().find(|n| !valid_name(n)) {
        return Err(CliError::parse(path, 1, format!("invalid column name `{bad}`")));
    }
    let d = names.len();
    let mut rows: Vec<f64> = Vec::new();
    let mut n = 0;
    for (i, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != d {
            return Err(CliError::parse(path, i + 1, format!("expected {d} fields, found {}", fields.len())));
        }
        for f in fields {
            let v: f64 = f
                .trim()
                .parse()
                .map_err(|_| CliError::parse(path, i + 1, format!("not a number: `{}`", f.trim())))?;
            if !v.is_finite() {
                return Err(CliError::parse(path, i + 1, format!("non-finite value `{}`", f.trim())));
            }
            rows.push(v);
        }
        n += 1;
    }
    if n == 0 {
        return Err(CliError::parse(path, 2, "no data rows"));
    }
    let values = DMatrix::from_row_slice(n, d, &rows);
    let kinds = (0..d)
        .map(|j| {
            if values.column(j).iter().all(|v| v.fract() == 0.0) {
                ColumnKind::Discrete
            } else {
                ColumnKind::Continuous
            }
        })
        .collect();
    Ok(DataMatrix::new(values, names, kinds)?)
}

pub fn read_csv(path: &Path) -> CliResult<DataMatrix> {
    parse_csv(path, &read_text(path)?)
}

pub fn format_csv(data: &DataMatrix) -> String {
    let mut out = data.names().join(",");
    out.push('\n');
    for row in data.values().row_iter() {
        let fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Reads `key=value` lines, skipping blanks and `#` comments. Returns the
/// pairs with their line numbers; repeated keys are an error.
pub fn parse_keyed(path: &Path, text: &str) -> CliResult<BTreeMap<String, (usize, String)>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::parse(path, i + 1, format!("expected key=value, found `{line}`")))?;
        let key = k.trim().to_string();
        if map.insert(key.clone(), (i + 1, v.trim().to_string())).is_some() {
            return Err(CliError::parse(path, i + 1, format!("duplicate key `{key}`")));
        }
    }
    Ok(map)
}

fn name_list(value: &str) -> Vec<String> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}

fn required<'a>(path: &Path, map: &'a BTreeMap<String, (usize, String)>, key: &str) -> CliResult<&'a str> {
    map.get(key)
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| CliError::parse(path, 0, format!("missing key `{key}`")))
}

/// Truth sidecar in terms of column names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthFile {
    pub target: String,
    pub mb: Vec<String>,
}

impl TruthFile {
    pub fn from_truth(truth: &MarkovBlanketTruth, names: &[String]) -> Self {
        Self { target: names[truth.target].clone(), mb: truth.mb.iter().map(|&j| names[j].clone()).collect() }
    }

    pub fn format(&self) -> String {
        format!("target={}\nmb={}\n", self.target, self.mb.join(","))
    }

    pub fn parse(path: &Path, text: &str) -> CliResult<Self> {
        let map = parse_keyed(path, text)?;
        let target = required(path, &map, "target")?.to_string();
        let mb = name_list(required(path, &map, "mb")?);
        Ok(Self { target, mb })
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        Self::parse(path, &read_text(path)?)
    }

    /// Resolves names against a dataset's columns.
    pub fn resolve(&self, data: &DataMatrix) -> CliResult<MarkovBlanketTruth> {
        let index = |n: &String| data.index_of(n).ok_or_else(|| n.clone());
        let mut missing = Vec::new();
        let target = index(&self.target).map_err(|n| missing.push(n)).ok();
        let mb: Vec<usize> = self.mb.iter().filter_map(|n| index(n).map_err(|n| missing.push(n)).ok()).collect();
        match target {
            Some(t) if missing.is_empty() => Ok(MarkovBlanketTruth::new(t, mb)?),
            _ => Err(CliError::NameMismatch(missing)),
        }
    }
}

/// Output of the `rank` command: an ordering or a subset, over names.
#[derive(Debug, Clone, PartialEq)]
pub enum RankingFile {
    Ranking { target: String, measure: String, direction: Direction, order: Vec<String>, values: Vec<f64> },
    Subset { target: String, method: String, members: Vec<String> },
}

impl RankingFile {
    pub fn from_result(result: &EliminationResult, target: &str, measure: &str, names: &[String]) -> Self {
        Self::Ranking {
            target: target.to_string(),
            measure: measure.to_string(),
            direction: result.direction(),
            order: result.order().iter().map(|&j| names[j].clone()).collect(),
            values: result.step_values().to_vec(),
        }
    }

    pub fn from_subset(subset: &SubsetResult, target: &str, method: &str, names: &[String]) -> Self {
        Self::Subset {
            target: target.to_string(),
            method: method.to_string(),
            members: subset.members.iter().map(|&j| names[j].clone()).collect(),
        }
    }

    pub fn target(&self) -> &str {
        match self {
            Self::Ranking { target, .. } | Self::Subset { target, .. } => target,
        }
    }

    pub fn format(&self) -> String {
        let mut s = String::new();
        match self {
            Self::Ranking { target, measure, direction, order, values } => {
                let values: Vec<String> = values.iter().map(f64::to_string).collect();
                let _ = write!(
                    s,
                    "kind=ranking\ntarget={target}\nmeasure={measure}\ndirection={}\norder={}\nvalues={}\n",
                    direction.name(),
                    order.join(","),
                    values.join(",")
                );
            }
            Self::Subset { target, method, members } => {
                let _ = write!(s, "kind=subset\ntarget={target}\nmethod={method}\nmembers={}\n", members.join(","));
            }
        }
        s
    }

    pub fn parse(path: &Path, text: &str) -> CliResult<Self> {
        let map = parse_keyed(path, text)?;
        let target = required(path, &map, "target")?.to_string();
        match required(path, &map, "kind")? {
            "ranking" => {
                let direction = match required(path, &map, "direction")? {
                    "backward" => Direction::Backward,
                    "forward" => Direction::Forward,
                    other => return Err(CliError::parse(path, map["direction"].0, format!("bad direction `{other}`"))),
                };
                let order = name_list(required(path, &map, "order")?);
                let (line, raw) = map.get("values").cloned().unwrap_or_default();
                let values = name_list(&raw)
                    .iter()
                    .map(|v| v.parse::<f64>().map_err(|_| CliError::parse(path, line, format!("not a number: `{v}`"))))
                    .collect::<CliResult<Vec<f64>>>()?;
                let measure = map.get("measure").map(|(_, v)| v.clone()).unwrap_or_default();
                Ok(Self::Ranking { target, measure, direction, order, values })
            }
            "subset" => {
                let members = name_list(required(path, &map, "members")?);
                let method = map.get("method").map(|(_, v)| v.clone()).unwrap_or_default();
                Ok(Self::Subset { target, method, members })
            }
            other => Err(CliError::parse(path, map["kind"].0, format!("bad kind `{other}`"))),
        }
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        Self::parse(path, &read_text(path)?)
    }
}
