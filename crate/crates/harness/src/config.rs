//! Command-line and file configuration, resolved into one fully specified
//! [`ExperimentConfig`] per experiment.
//!
//! Precedence is flag, then config file, then (for the seed only) the
//! `ONEBIT_SEED` environment variable, then the per-experiment default.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

/// Environment variable consulted when no seed is given.
pub const SEED_ENV: &str = "ONEBIT_SEED";

pub const DEFAULT_SAFETY: f64 = 10.0;

/// Number of draws for the wedge and transversal frequency experiments.
pub const FREQUENCY_DRAWS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Crofton,
    Transversal,
    SmallCells,
    Rip,
    SignProduct,
    LinearRip,
    Widths,
    Sudakov,
    Vc,
    Nets,
    MetricRatio,
    Embed,
    All,
}

impl Experiment {
    /// Every experiment that `all` expands to, in run order.
    pub const RUNNABLE: [Experiment; 12] = [
        Experiment::Crofton,
        Experiment::Transversal,
        Experiment::SmallCells,
        Experiment::Rip,
        Experiment::SignProduct,
        Experiment::LinearRip,
        Experiment::Widths,
        Experiment::Sudakov,
        Experiment::Vc,
        Experiment::Nets,
        Experiment::MetricRatio,
        Experiment::Embed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Crofton => "crofton",
            Experiment::Transversal => "transversal",
            Experiment::SmallCells => "small-cells",
            Experiment::Rip => "rip",
            Experiment::SignProduct => "sign-product",
            Experiment::LinearRip => "linear-rip",
            Experiment::Widths => "widths",
            Experiment::Sudakov => "sudakov",
            Experiment::Vc => "vc",
            Experiment::Nets => "nets",
            Experiment::MetricRatio => "metric-ratio",
            Experiment::Embed => "embed",
            Experiment::All => "all",
        }
    }

    /// Stream tag separating the random streams of different experiments.
    pub fn tag(self) -> u64 {
        0x6f6e_6562_6974_0000 | (self as u64 + 1)
    }

    /// Whether `--delta` must be given when the experiment runs alone.
    pub fn requires_delta(self) -> bool {
        matches!(
            self,
            Experiment::SmallCells
                | Experiment::Rip
                | Experiment::SignProduct
                | Experiment::LinearRip
                | Experiment::Nets
                | Experiment::MetricRatio
                | Experiment::Embed
        )
    }

    fn uses_s(self) -> bool {
        matches!(
            self,
            Experiment::SmallCells
                | Experiment::Rip
                | Experiment::SignProduct
                | Experiment::LinearRip
                | Experiment::Widths
                | Experiment::Sudakov
                | Experiment::Nets
                | Experiment::MetricRatio
        )
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Number of measurements: a fixed count or the experiment's sizing rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MSetting {
    Auto,
    Fixed(usize),
}

impl FromStr for MSetting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(MSetting::Auto);
        }
        s.parse()
            .map(MSetting::Fixed)
            .map_err(|_| format!("expected \"auto\" or a non-negative integer, got {s:?}"))
    }
}

impl fmt::Display for MSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MSetting::Auto => f.write_str("auto"),
            MSetting::Fixed(m) => write!(f, "{m}"),
        }
    }
}

impl Serialize for MSetting {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            MSetting::Auto => s.serialize_str("auto"),
            MSetting::Fixed(m) => s.serialize_u64(*m as u64),
        }
    }
}

impl<'de> Deserialize<'de> for MSetting {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(m) => Ok(MSetting::Fixed(m as usize)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Run one-bit sensing and random tessellation experiments.
#[derive(Debug, Clone, Parser)]
#[command(name = "onebit", version, about)]
pub struct Cli {
    /// Experiment to run.
    #[arg(value_enum)]
    pub experiment: Experiment,
    /// Sphere dimension (points live in R^{n+1}).
    #[arg(long)]
    pub n: Option<usize>,
    /// Sparsity level.
    #[arg(long)]
    pub s: Option<usize>,
    /// Number of measurements, or "auto".
    #[arg(long)]
    pub m: Option<MSetting>,
    /// Target accuracy in (0, 1).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Independent trials.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Master seed (falls back to ONEBIT_SEED, then 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Multiplier in the automatic measurement count.
    #[arg(long)]
    pub safety: Option<f64>,
    /// Size of the finite point set standing in for the signal set.
    #[arg(long)]
    pub net_size: Option<usize>,
    /// Monte Carlo repetitions inside each trial (width estimates).
    #[arg(long)]
    pub inner_trials: Option<usize>,
    /// Report destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// TOML file with default values for any of the flags above.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads (results do not depend on it).
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Contents of a `--config` file; every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<usize>,
    pub s: Option<usize>,
    pub m: Option<MSetting>,
    pub delta: Option<f64>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub safety: Option<f64>,
    pub net_size: Option<usize>,
    pub inner_trials: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub threads: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| HarnessError::Usage(format!("{}: {e}", path.display())))
    }
}

/// Fully resolved parameters of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n: usize,
    pub s: usize,
    pub m_setting: MSetting,
    /// Resolved measurement count (0 when the experiment takes none).
    pub m: usize,
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
    pub safety: f64,
    pub net_size: usize,
    pub inner_trials: usize,
}

/// Everything a run needs: the experiments plus output settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub runs: Vec<ExperimentConfig>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub threads: Option<usize>,
}

struct Defaults {
    n: usize,
    s: usize,
    delta: f64,
    trials: usize,
    net_size: usize,
    inner_trials: usize,
}

fn defaults(exp: Experiment) -> Defaults {
    let d = |n, s, delta, trials, net_size, inner_trials| Defaults {
        n,
        s,
        delta,
        trials,
        net_size,
        inner_trials,
    };
    match exp {
        Experiment::Crofton | Experiment::Transversal => d(3, 1, 0.1, 20, 2, 0),
        Experiment::SmallCells => d(16, 3, 0.3, 50, 300, 0),
        Experiment::Rip | Experiment::SignProduct | Experiment::LinearRip => d(64, 4, 0.2, 50, 200, 0),
        Experiment::Widths => d(64, 4, 0.2, 4, 500, 1000),
        Experiment::Sudakov => d(64, 4, 0.2, 4, 300, 1000),
        Experiment::Vc => d(2, 1, 0.1, 1, 8, 100_000),
        Experiment::Nets => d(16, 3, 0.3, 10, 400, 0),
        Experiment::MetricRatio => d(64, 4, 0.2, 20, 200, 0),
        Experiment::Embed => d(9, 1, 0.2, 50, 100, 0),
        Experiment::All => unreachable!("`all` has no parameters of its own"),
    }
}

/// `⌈safety · δ⁻² · s · ln(n/s)⌉`.
pub fn auto_m_sparse(n: usize, s: usize, delta: f64, safety: f64) -> usize {
    (safety * s as f64 * (n as f64 / s as f64).ln() / (delta * delta)).ceil() as usize
}

/// `⌈safety · δ⁻¹ · ln(net_size)⌉`.
pub fn auto_m_cells(net_size: usize, delta: f64, safety: f64) -> usize {
    (safety * (net_size as f64).ln() / delta).ceil() as usize
}

/// `⌈safety · δ⁻² · ln(net_size)⌉`.
pub fn auto_m_embed(net_size: usize, delta: f64, safety: f64) -> usize {
    (safety * (net_size as f64).ln() / (delta * delta)).ceil() as usize
}

fn resolve_m(exp: Experiment, setting: MSetting, n: usize, s: usize, delta: f64, safety: f64, net_size: usize) -> usize {
    match (exp, setting) {
        (Experiment::Widths | Experiment::Sudakov | Experiment::Vc | Experiment::Nets, _) => 0,
        (_, MSetting::Fixed(m)) => m,
        (Experiment::Crofton | Experiment::Transversal, MSetting::Auto) => FREQUENCY_DRAWS,
        (Experiment::SmallCells, MSetting::Auto) => auto_m_cells(net_size, delta, safety),
        (Experiment::Embed, MSetting::Auto) => auto_m_embed(net_size, delta, safety),
        (_, MSetting::Auto) => auto_m_sparse(n, s, delta, safety),
    }
}

fn usage(msg: impl Into<String>) -> HarnessError {
    HarnessError::Usage(msg.into())
}

impl ExperimentConfig {
    /// Defaults for `exp` with the given seed; `m` resolved automatically.
    pub fn default_for(exp: Experiment, seed: u64) -> Self {
        let d = defaults(exp);
        let m = resolve_m(exp, MSetting::Auto, d.n, d.s, d.delta, DEFAULT_SAFETY, d.net_size);
        Self {
            experiment: exp,
            n: d.n,
            s: d.s,
            m_setting: MSetting::Auto,
            m,
            delta: d.delta,
            trials: d.trials,
            seed,
            safety: DEFAULT_SAFETY,
            net_size: d.net_size,
            inner_trials: d.inner_trials,
        }
    }

    /// Recomputes `m` after parameters changed.
    pub fn resolve(mut self) -> Result<Self, HarnessError> {
        self.validate()?;
        self.m = resolve_m(
            self.experiment,
            self.m_setting,
            self.n,
            self.s,
            self.delta,
            self.safety,
            self.net_size,
        );
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let exp = self.experiment;
        if exp == Experiment::All {
            return Err(usage("`all` must be expanded before validation"));
        }
        if self.n < 1 {
            return Err(usage("--n must be at least 1"));
        }
        if exp.uses_s() && !(self.s > 0 && self.s < self.n + 1) {
            return Err(usage(format!("--s must satisfy 0 < s < n + 1 (n = {}, s = {})", self.n, self.s)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(usage(format!("--delta must lie in (0, 1), got {}", self.delta)));
        }
        if self.trials < 1 {
            return Err(usage("--trials must be at least 1"));
        }
        if !(self.safety > 0.0 && self.safety.is_finite()) {
            return Err(usage(format!("--safety must be positive, got {}", self.safety)));
        }
        match exp {
            Experiment::Vc if !(2..=onebit_core::nets::MAX_SHATTER_POINTS).contains(&self.net_size) => {
                return Err(usage("--net-size for vc must lie in 2..=22"));
            }
            Experiment::Widths | Experiment::Sudakov => {
                if !(2..=onebit_core::processes::MAX_CHOLESKY_POINTS).contains(&self.net_size) {
                    return Err(usage("--net-size for width experiments must lie in 2..=2000"));
                }
                if self.inner_trials < onebit_core::processes::MIN_WIDTH_TRIALS {
                    return Err(usage("--inner-trials must be at least 100"));
                }
            }
            _ if self.net_size < 2 && exp != Experiment::Crofton && exp != Experiment::Transversal => {
                return Err(usage("--net-size must be at least 2"));
            }
            _ => {}
        }
        let needs_m = matches!(
            exp,
            Experiment::Crofton
                | Experiment::Transversal
                | Experiment::Rip
                | Experiment::SignProduct
                | Experiment::LinearRip
                | Experiment::MetricRatio
                | Experiment::Embed
        );
        if needs_m && self.m_setting == MSetting::Fixed(0) {
            return Err(usage(format!("--m must be positive for {exp}")));
        }
        Ok(())
    }
}

/// Merges flags, the optional config file and the environment into a
/// validated [`RunConfig`].
pub fn resolve(cli: Cli, env_seed: Option<String>) -> Result<RunConfig, HarnessError> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let env_seed = match env_seed {
        Some(s) => Some(
            s.trim()
                .parse::<u64>()
                .map_err(|_| usage(format!("{SEED_ENV} must be an unsigned integer, got {s:?}")))?,
        ),
        None => None,
    };
    let seed = cli.seed.or(file.seed).or(env_seed).unwrap_or(0);
    let out = cli.out.or(file.out);
    let format = cli.format.or(file.format).unwrap_or(Format::Csv);
    let threads = cli.threads.or(file.threads);
    if threads == Some(0) {
        return Err(usage("--threads must be at least 1"));
    }
    let trials = cli.trials.or(file.trials);
    let safety = cli.safety.or(file.safety);
    let inner_trials = cli.inner_trials.or(file.inner_trials);

    let runs = if cli.experiment == Experiment::All {
        let specific = [
            ("n", cli.n.or(file.n).is_some()),
            ("s", cli.s.or(file.s).is_some()),
            ("m", cli.m.or(file.m).is_some()),
            ("delta", cli.delta.or(file.delta).is_some()),
            ("net-size", cli.net_size.or(file.net_size).is_some()),
        ];
        if let Some((name, _)) = specific.iter().find(|(_, set)| *set) {
            return Err(usage(format!(
                "--{name} is experiment specific and cannot be combined with `all`"
            )));
        }
        Experiment::RUNNABLE
            .iter()
            .map(|&exp| {
                let mut c = ExperimentConfig::default_for(exp, seed);
                c.trials = trials.unwrap_or(c.trials);
                c.safety = safety.unwrap_or(c.safety);
                c.inner_trials = inner_trials.unwrap_or(c.inner_trials);
                c.resolve()
            })
            .collect::<Result<Vec<_>, _>>()?
    } else {
        let exp = cli.experiment;
        let mut c = ExperimentConfig::default_for(exp, seed);
        c.n = cli.n.or(file.n).unwrap_or(c.n);
        c.s = cli.s.or(file.s).unwrap_or(c.s);
        c.m_setting = cli.m.or(file.m).unwrap_or(MSetting::Auto);
        match cli.delta.or(file.delta) {
            Some(d) => c.delta = d,
            None if exp.requires_delta() => {
                return Err(usage(format!("--delta is required for {exp}")));
            }
            None => {}
        }
        c.trials = trials.unwrap_or(c.trials);
        c.safety = safety.unwrap_or(c.safety);
        c.net_size = cli.net_size.or(file.net_size).unwrap_or(c.net_size);
        c.inner_trials = inner_trials.unwrap_or(c.inner_trials);
        vec![c.resolve()?]
    };
    Ok(RunConfig {
        experiment: cli.experiment,
        runs,
        out,
        format,
        threads,
    })
}
