use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use typgas::chsh::{ChshSetting, Convention};
use typgas::fock::{SectorSpec, ShellKind, Statistics};
use typgas::montecarlo::{ExperimentPlan, HistogramSpec, PairSelector, SamplingPath};

use crate::config::{DimsConfig, Fig1Config, Fig2Config, Fig3Config, Fig4Config, RunConfig};
use crate::error::{CliError, CliResult};

pub const DEFAULT_SEED: u64 = 1;
/// Over the default range `[-40, 12]` this puts `X = 0` on the grid.
pub const DEFAULT_CURVE_POINTS: usize = 2_081;

#[derive(Debug, Parser)]
#[command(
    name = "typgas",
    version,
    about = "Correlations and CHSH values of random pure states of two trapped gases",
    after_help = "Set THREADS to cap the worker pool; results do not depend on it."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sector dimensions D(M) and ln D / sqrt M.
    Dims(DimsArgs),
    /// Correlation <O_A^(p) O_B^(q)> against q.
    Fig1(Fig1Args),
    /// Variance of correlations against M.
    Fig2(Fig2Args),
    /// Distribution of (standardized) correlations with a KS distance to N(0,1).
    Fig3(Fig3Args),
    /// Distribution of <F> over D(<F> - 2) with the large-D density.
    Fig4(Fig4Args),
    /// Fast exact checks; exits with 4 if any fails.
    Selfcheck(SelfcheckArgs),
    /// Replay a config.json written by an earlier run.
    Run(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatsArg {
    Bose,
    Fermi,
}

impl From<StatsArg> for Statistics {
    fn from(s: StatsArg) -> Self {
        match s {
            StatsArg::Bose => Statistics::Bose,
            StatsArg::Fermi => Statistics::Fermi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShellArg {
    Exact,
    Below,
}

impl From<ShellArg> for ShellKind {
    fn from(s: ShellArg) -> Self {
        match s {
            ShellArg::Exact => ShellKind::Exact,
            ShellArg::Below => ShellKind::Below,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PathArg {
    Full,
    Fast,
}

impl From<PathArg> for SamplingPath {
    fn from(p: PathArg) -> Self {
        match p {
            PathArg::Full => SamplingPath::Full,
            PathArg::Fast => SamplingPath::Fast,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Relabeled,
    Literal,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Relabeled => Convention::Relabeled,
            ConventionArg::Literal => Convention::Literal,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SectorArgs {
    #[arg(long = "stats", value_enum, default_value = "bose")]
    pub statistics: StatsArg,
    #[arg(long, value_enum, default_value = "exact")]
    pub shell: ShellArg,
    #[arg(long, default_value_t = 5)]
    pub na: u32,
    #[arg(long, default_value_t = 5)]
    pub nb: u32,
    /// Quanta of A; also B's when --mb is absent.
    #[arg(long)]
    pub ma: Option<u64>,
    /// Quanta of B; also A's when --ma is absent.
    #[arg(long)]
    pub mb: Option<u64>,
}

impl SectorArgs {
    fn sectors(&self, default_m: u64) -> (SectorSpec, SectorSpec) {
        let ma = self.ma.or(self.mb).unwrap_or(default_m);
        let mb = self.mb.unwrap_or(ma);
        let spec = |n, m| SectorSpec::new(self.statistics.into(), n, m, self.shell.into());
        (spec(self.na, ma), spec(self.nb, mb))
    }
}

#[derive(Debug, Clone, Args)]
pub struct HistArgs {
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub lo: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub hi: Option<f64>,
}

impl HistArgs {
    fn apply(&self, default: HistogramSpec) -> HistogramSpec {
        HistogramSpec {
            lo: self.lo.unwrap_or(default.lo),
            hi: self.hi.unwrap_or(default.hi),
            bins: self.bins.unwrap_or(default.bins),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DimsArgs {
    #[arg(long = "stats", value_enum, default_value = "bose")]
    pub statistics: StatsArg,
    #[arg(long, default_value_t = 5)]
    pub n: u32,
    #[arg(long, default_value_t = 30)]
    pub m_max: u64,
    #[arg(long, value_enum, default_value = "exact")]
    pub shell: ShellArg,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct Fig1Args {
    #[command(flatten)]
    pub sector: SectorArgs,
    #[arg(long, default_value_t = 1000)]
    pub samples: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Mode p of O_A^(p).
    #[arg(long, default_value_t = 0)]
    pub obs_a: u32,
    /// Largest q; defaults to M_B.
    #[arg(long)]
    pub q_max: Option<u32>,
    /// Number of individual states whose full curve is written.
    #[arg(long, default_value_t = 2)]
    pub showcase: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct Fig2Args {
    #[arg(long = "stats", value_enum, default_value = "bose")]
    pub statistics: StatsArg,
    #[arg(long, value_enum, default_value = "exact")]
    pub shell: ShellArg,
    #[arg(long, default_value_t = 5)]
    pub na: u32,
    #[arg(long, default_value_t = 5)]
    pub nb: u32,
    /// Smallest M; defaults to the smallest admissible value.
    #[arg(long)]
    pub m_min: Option<u64>,
    #[arg(long, default_value_t = 20)]
    pub m_max: u64,
    #[arg(long, default_value_t = 1000)]
    pub samples: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Comma-separated pairs: `zero` for (O^(0), O^(0)), `top` for
    /// (O^(M), O^(M)), or `p:q`.
    #[arg(long, value_delimiter = ',', default_value = "zero,top", value_parser = parse_pair_selector)]
    pub pairs: Vec<PairSelector>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct Fig3Args {
    #[command(flatten)]
    pub sector: SectorArgs,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub obs_a: u32,
    #[arg(long, default_value_t = 0)]
    pub obs_b: u32,
    /// Record raw correlations instead of standardized ones.
    #[arg(long)]
    pub raw: bool,
    #[command(flatten)]
    pub hist: HistArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct Fig4Args {
    #[command(flatten)]
    pub sector: SectorArgs,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Basis indices `plus,minus` of the A pair.
    #[arg(long, value_parser = parse_index_pair, default_value = "0,1")]
    pub pair_a: (usize, usize),
    /// Basis indices `plus,minus` of the B pair.
    #[arg(long, value_parser = parse_index_pair, default_value = "0,1")]
    pub pair_b: (usize, usize),
    #[arg(long, value_enum, default_value = "relabeled")]
    pub convention: ConventionArg,
    /// Defaults to `fast` above 10^4 product states.
    #[arg(long, value_enum)]
    pub path: Option<PathArg>,
    /// Grid points of the emitted density curve.
    #[arg(long, default_value_t = DEFAULT_CURVE_POINTS)]
    pub curve_points: usize,
    #[command(flatten)]
    pub hist: HistArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SelfcheckArgs {
    /// Also write the report to DIR/selfcheck.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[command(flatten)]
    pub out: OutArgs,
}

fn parse_index_pair(s: &str) -> Result<(usize, usize), String> {
    let (p, m) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `plus,minus`, got `{s}`"))?;
    let idx = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}"));
    Ok((idx(p)?, idx(m)?))
}

fn parse_pair_selector(s: &str) -> Result<PairSelector, String> {
    match s.trim() {
        "zero" => Ok(PairSelector::ZeroMode),
        "top" => Ok(PairSelector::TopMode),
        other => {
            let (p, q) = other
                .split_once(':')
                .ok_or_else(|| format!("expected `zero`, `top` or `p:q`, got `{other}`"))?;
            let idx = |t: &str| t.trim().parse::<u32>().map_err(|e| format!("`{t}`: {e}"));
            Ok(PairSelector::Modes(idx(p)?, idx(q)?))
        }
    }
}

impl DimsArgs {
    pub fn config(&self) -> RunConfig {
        RunConfig::Dims(DimsConfig {
            statistics: self.statistics.into(),
            particles: self.n,
            shell: self.shell.into(),
            m_max: self.m_max,
        })
    }
}

impl Fig1Args {
    pub fn config(&self) -> RunConfig {
        let (a, b) = self.sector.sectors(20);
        let q_max = self
            .q_max
            .unwrap_or_else(|| u32::try_from(b.quanta).unwrap_or(u32::MAX));
        RunConfig::Fig1(Fig1Config {
            plan: ExperimentPlan::new(a, b, self.samples, self.seed),
            mode_a: self.obs_a,
            q_max,
            showcase: self.showcase,
        })
    }
}

impl Fig2Args {
    pub fn config(&self) -> RunConfig {
        let statistics = self.statistics.into();
        let shell = self.shell.into();
        let floor = SectorSpec::min_quanta(statistics, self.na, shell)
            .max(SectorSpec::min_quanta(statistics, self.nb, shell));
        RunConfig::Fig2(Fig2Config {
            statistics,
            shell,
            na: self.na,
            nb: self.nb,
            m_min: self.m_min.unwrap_or(floor),
            m_max: self.m_max,
            samples: self.samples,
            seed: self.seed,
            pairs: self.pairs.clone(),
        })
    }
}

impl Fig3Args {
    pub fn config(&self) -> RunConfig {
        let (a, b) = self.sector.sectors(20);
        let default = if self.raw {
            HistogramSpec::new(-1.0, 1.0, 200)
        } else {
            HistogramSpec::standardized()
        };
        RunConfig::Fig3(Fig3Config {
            plan: ExperimentPlan::new(a, b, self.samples, self.seed),
            modes: (self.obs_a, self.obs_b),
            standardize: !self.raw,
            histogram: self.hist.apply(default),
        })
    }
}

impl Fig4Args {
    /// Needs the sector dimensions to resolve the default sampling path.
    pub fn config(&self) -> CliResult<RunConfig> {
        let (a, b) = self.sector.sectors(10);
        let plan = ExperimentPlan::new(a, b, self.samples, self.seed);
        let path = match self.path {
            Some(p) => p.into(),
            None => SamplingPath::auto(plan.dims()?),
        };
        Ok(RunConfig::Fig4(Fig4Config {
            plan,
            setting: ChshSetting::new(self.pair_a, self.pair_b)
                .with_convention(self.convention.into()),
            path,
            histogram: self.hist.apply(HistogramSpec::chsh()),
            curve_points: self.curve_points,
        }))
    }
}

impl Command {
    /// The resolved configuration and output directory of an experiment
    /// subcommand; `None` for `selfcheck`.
    pub fn resolve(&self) -> CliResult<Option<(RunConfig, PathBuf)>> {
        let resolved = match self {
            Command::Dims(a) => (a.config(), a.out.out.clone()),
            Command::Fig1(a) => (a.config(), a.out.out.clone()),
            Command::Fig2(a) => (a.config(), a.out.out.clone()),
            Command::Fig3(a) => (a.config(), a.out.out.clone()),
            Command::Fig4(a) => (a.config()?, a.out.out.clone()),
            Command::Run(a) => (RunConfig::load(&a.config)?, a.out.out.clone()),
            Command::Selfcheck(_) => return Ok(None),
        };
        Ok(Some(resolved))
    }
}

/// Reads `THREADS`: `None` when unset, an error when not a positive integer.
pub fn threads_from_env() -> CliResult<Option<usize>> {
    match std::env::var("THREADS") {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!(
                "THREADS must be a positive integer, got `{v}`"
            ))),
        },
        Err(e) => Err(CliError::Usage(format!("THREADS: {e}"))),
    }
}
