//! Flat `key=value` configuration shared by config files and CLI flags.
//!
//! Every key has a flag of the same name with `_` replaced by `-`. Values
//! given on the command line override the file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use mbrank_core::synth::SpousesPerChild;
use mbrank_core::{Experiment, KernelSpec, SynthConfig};

use crate::error::{CliError, CliResult};
use crate::io::{parse_keyed, read_text};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    Bahsic,
    ForwardF,
    ForwardZ,
    Iamb,
    ProposedF,
    ProposedZ,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] =
        [Self::ProposedF, Self::ProposedZ, Self::Bahsic, Self::Iamb, Self::ForwardF, Self::ForwardZ];

    pub fn name(self) -> &'static str {
        match self {
            Self::ProposedF => "proposed-f",
            Self::ProposedZ => "proposed-z",
            Self::Bahsic => "bahsic",
            Self::Iamb => "iamb",
            Self::ForwardF => "forward-f",
            Self::ForwardZ => "forward-z",
        }
    }

    /// Whether the algorithm outputs a full ranking rather than a subset.
    pub fn is_ranking(self) -> bool {
        self != Self::Iamb
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm `{s}` (expected one of proposed-f, proposed-z, bahsic, iamb, forward-f, forward-z)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelChoice {
    Linear,
    Gaussian,
}

impl FromStr for KernelChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "linear" => Ok(Self::Linear),
            "gaussian" => Ok(Self::Gaussian),
            other => Err(format!("unknown kernel `{other}` (expected linear or gaussian)")),
        }
    }
}

/// Builds a kernel spec. A Gaussian kernel without `sigma` uses the median
/// heuristic.
pub fn kernel_spec(kernel: KernelChoice, sigma: Option<f64>, epsilon: f64) -> CliResult<KernelSpec> {
    let spec = match (kernel, sigma) {
        (KernelChoice::Linear, None) => KernelSpec::linear(),
        (KernelChoice::Linear, Some(_)) => return Err(CliError::Usage("--sigma only applies to the gaussian kernel".into())),
        (KernelChoice::Gaussian, None) => KernelSpec::gaussian_median(),
        (KernelChoice::Gaussian, Some(s)) => KernelSpec::gaussian(s)?,
    };
    Ok(spec.with_epsilon(epsilon)?)
}

/// Comma-separated list value.
#[derive(Debug, Clone, PartialEq)]
pub struct CommaList<T>(pub Vec<T>);

impl<T: FromStr> FromStr for CommaList<T>
where
    T::Err: fmt::Display,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|p| p.parse::<T>().map_err(|e| format!("`{p}`: {e}")))
            .collect::<Result<Vec<T>, String>>()
            .map(CommaList)
    }
}

macro_rules! settings {
    ($(#[$sm:meta])* $name:ident { $( $(#[$m:meta])* $field:ident : $ty:ty ),* $(,)? }) => {
        $(#[$sm])*
        #[derive(Debug, Clone, Default, Args)]
        pub struct $name {
            $( $(#[$m])* #[arg(long)] pub $field: Option<$ty>, )*
        }

        impl $name {
            pub const KEYS: &'static [&'static str] = &[$(stringify!($field)),*];

            /// Sets `key` from its text form. `Ok(false)` for keys this group
            /// does not know.
            pub fn set(&mut self, key: &str, value: &str) -> Result<bool, String> {
                match key {
                    $( stringify!($field) => {
                        self.$field = Some(value.parse::<$ty>().map_err(|e| e.to_string())?);
                        Ok(true)
                    } )*
                    _ => Ok(false),
                }
            }

            /// Field-wise merge where values in `over` win.
            pub fn overridden_by(self, over: Self) -> Self {
                Self { $( $field: over.$field.or(self.$field), )* }
            }
        }
    };
}

settings! {
    /// Generator knobs.
    SynthKnobs {
        /// Rows to generate.
        n_samples: usize,
        /// Standard deviation of the noise on Y and the children.
        noise_sd: f64,
        /// Number of extraneous columns.
        n_extraneous: usize,
        /// Extra edges among non-target columns.
        extra_edges: usize,
        /// Weight on every blanket edge.
        mb_weight: f64,
        /// Base seed.
        seed: u64,
        /// Spouses per child: one or both.
        spouses_per_child: SpousesPerChild,
    }
}

settings! {
    /// Sweep and algorithm settings.
    BenchKnobs {
        /// Swept quantity: samples, noise, edges, extraneous or weights.
        experiment: Experiment,
        /// Comma-separated algorithms.
        algorithms: CommaList<Algorithm>,
        /// Comma-separated grid values.
        grid: CommaList<f64>,
        /// Trials per grid value.
        trials: usize,
        /// Row count for every experiment except samples.
        fixed_samples: usize,
        /// Kernel family: linear or gaussian.
        kernel: KernelChoice,
        /// Fixed Gaussian bandwidth; omitted means the median heuristic.
        sigma: f64,
        /// Ridge regularizer.
        epsilon: f64,
        /// Fraction of the conditioning set kept per elimination step.
        beta: f64,
        /// IAMB significance level.
        alpha: f64,
        /// Dataset CSV to evaluate instead of generated data.
        data: PathBuf,
        /// Truth sidecar for --data.
        truth: PathBuf,
        /// Results file.
        out: PathBuf,
        /// Aggregate CSV; defaults to the results path with an `aggregate.csv` extension.
        aggregate: PathBuf,
    }
}

/// Reads a config file into the given groups, in order. Unknown keys and
/// unparseable values are reported with their line number.
pub fn load_config(path: &Path, synth: &mut SynthKnobs, bench: Option<&mut BenchKnobs>) -> CliResult<()> {
    let text = read_text(path)?;
    let mut bench = bench;
    for (key, (line, value)) in parse_keyed(path, &text)? {
        let known = match synth.set(&key, &value) {
            Ok(true) => true,
            Ok(false) => match bench.as_deref_mut() {
                Some(b) => b.set(&key, &value).map_err(|e| CliError::parse(path, line, format!("{key}: {e}")))?,
                None => false,
            },
            Err(e) => return Err(CliError::parse(path, line, format!("{key}: {e}"))),
        };
        if !known {
            return Err(CliError::parse(path, line, format!("unknown key `{key}`")));
        }
    }
    Ok(())
}

impl SynthKnobs {
    pub fn to_config(&self) -> CliResult<SynthConfig> {
        let d = SynthConfig::default();
        let cfg = SynthConfig {
            n_samples: self.n_samples.unwrap_or(d.n_samples),
            noise_sd: self.noise_sd.unwrap_or(d.noise_sd),
            n_extraneous: self.n_extraneous.unwrap_or(d.n_extraneous),
            extra_edges: self.extra_edges.unwrap_or(d.extra_edges),
            mb_weight: self.mb_weight.unwrap_or(d.mb_weight),
            seed: self.seed.unwrap_or(d.seed),
            spouses_per_child: self.spouses_per_child.unwrap_or(d.spouses_per_child),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

pub const DEFAULT_TRIALS: usize = 30;

/// Grid used when none is configured.
pub fn default_grid(experiment: Experiment) -> Vec<f64> {
    match experiment {
        Experiment::Samples => vec![50.0, 100.0, 200.0, 350.0, 500.0],
        Experiment::Noise => vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
        Experiment::Edges => vec![0.0, 20.0, 40.0, 60.0, 80.0, 100.0],
        Experiment::Extraneous => vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0],
        Experiment::Weights => vec![0.1, 0.5, 1.0, 1.5, 2.0],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Synthetic { experiment: Experiment, grid: Vec<f64>, trials: usize, base: SynthConfig, fixed_samples: usize },
    File { data: PathBuf, truth: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub source: DataSource,
    pub algorithms: Vec<Algorithm>,
    pub kernel: KernelSpec,
    pub beta: f64,
    pub alpha: f64,
    pub out: Option<PathBuf>,
    pub aggregate: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Tag written into result records.
    pub fn experiment_name(&self) -> &str {
        match &self.source {
            DataSource::Synthetic { experiment, .. } => experiment.name(),
            DataSource::File { .. } => "data",
        }
    }

    pub fn from_knobs(synth: &SynthKnobs, bench: &BenchKnobs) -> CliResult<Self> {
        let source = match (&bench.data, &bench.truth) {
            (Some(data), Some(truth)) => DataSource::File { data: data.clone(), truth: truth.clone() },
            (Some(_), None) => return Err(CliError::Usage("--data requires --truth".into())),
            (None, _) => {
                let experiment =
                    bench.experiment.ok_or_else(|| CliError::Usage("an experiment or a dataset is required".into()))?;
                let grid = bench.grid.clone().map_or_else(|| default_grid(experiment), |g| g.0);
                let trials = bench.trials.unwrap_or(DEFAULT_TRIALS);
                if grid.is_empty() {
                    return Err(CliError::Usage("grid must not be empty".into()));
                }
                if trials == 0 {
                    return Err(CliError::Usage("trials must be at least 1".into()));
                }
                let fixed_samples = bench.fixed_samples.unwrap_or(mbrank_core::synth::FIXED_SWEEP_SAMPLES);
                DataSource::Synthetic { experiment, grid, trials, base: synth.to_config()?, fixed_samples }
            }
        };
        let algorithms = bench.algorithms.clone().map_or_else(
            || vec![Algorithm::ProposedF, Algorithm::ProposedZ, Algorithm::Bahsic, Algorithm::Iamb],
            |a| a.0,
        );
        if algorithms.is_empty() {
            return Err(CliError::Usage("at least one algorithm is required".into()));
        }
        let kernel = kernel_spec(
            bench.kernel.unwrap_or(KernelChoice::Linear),
            bench.sigma,
            bench.epsilon.unwrap_or(mbrank_core::kernel::DEFAULT_EPSILON),
        )?;
        let beta = bench.beta.unwrap_or(0.0);
        if !(0.0..1.0).contains(&beta) {
            return Err(CliError::Usage(format!("beta must lie in [0, 1), got {beta}")));
        }
        let alpha = bench.alpha.unwrap_or(mbrank_core::iamb::DEFAULT_ALPHA);
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(CliError::Usage(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        let aggregate = bench.aggregate.clone().or_else(|| bench.out.as_ref().map(|o| o.with_extension("aggregate.csv")));
        Ok(Self { source, algorithms, kernel, beta, alpha, out: bench.out.clone(), aggregate })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("svm".parse::<Algorithm>().is_err());
    }

    #[test]
    fn comma_lists() {
        let CommaList(v) = "1, 2.5,".parse::<CommaList<f64>>().unwrap();
        assert_eq!(v, vec![1.0, 2.5]);
        assert!("1,x".parse::<CommaList<f64>>().is_err());
    }

    #[test]
    fn keys_match_flags() {
        assert!(SynthKnobs::KEYS.contains(&"n_samples"));
        assert!(BenchKnobs::KEYS.contains(&"epsilon"));
        let mut s = SynthKnobs::default();
        assert_eq!(s.set("noise_sd", "2.5"), Ok(true));
        assert_eq!(s.noise_sd, Some(2.5));
        assert_eq!(s.set("bogus", "1"), Ok(false));
        assert!(s.set("n_samples", "-3").is_err());
    }

    #[test]
    fn overrides_prefer_cli() {
        let file = SynthKnobs { seed: Some(1), n_samples: Some(9), ..Default::default() };
        let cli = SynthKnobs { seed: Some(7), ..Default::default() };
        let merged = file.overridden_by(cli);
        assert_eq!((merged.seed, merged.n_samples), (Some(7), Some(9)));
    }

    #[test]
    fn linear_kernel_rejects_sigma() {
        assert!(kernel_spec(KernelChoice::Linear, Some(1.0), 1e-3).is_err());
        assert!(kernel_spec(KernelChoice::Gaussian, Some(-1.0), 1e-3).is_err());
        assert!(kernel_spec(KernelChoice::Gaussian, None, 0.0).is_err());
    }
}
