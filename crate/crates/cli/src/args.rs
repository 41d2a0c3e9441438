use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ppcg::baselines::DEFAULT_RESTART_DIM_MULTIPLE;
use ppcg::ppcg::{default_nbuf, DEFAULT_RR_PERIOD, DEFAULT_SBSIZE, DEFAULT_TAYLOR_TERMS};
use ppcg::{BaselineOptions, OrthPolicy, OrthScheme, Projection, SolverOptions};

use crate::problem::ProblemSpec;

#[derive(Debug, Parser)]
#[command(name = "ppcg", version, about = "Block eigensolver benchmark harness")]
pub struct Cli {
    /// Worker threads for the subblock sweep and operator products.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one solver and write its convergence trace.
    Solve(SolveArgs),
    /// Run several solvers on the same problem and starting block.
    Compare(CompareArgs),
    /// Render trace files as a residual-versus-iteration plot.
    Plot(PlotArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SolverKind {
    Ppcg,
    Davidson,
    Lobpcg,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Ppcg => "ppcg",
            SolverKind::Davidson => "davidson",
            SolverKind::Lobpcg => "lobpcg",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PrecondKind {
    None,
    Jacobi,
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// mm:<path> | lap1d:<n> | lap3d:<nx,ny,nz> | well:<nx,ny,nz,depth> | rand:<n,density>
    #[arg(long)]
    pub problem: ProblemSpec,

    #[arg(long, value_enum, default_value = "none")]
    pub precond: PrecondKind,

    /// Shift subtracted from the diagonal before inverting it (jacobi only).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub shift: f64,
}

#[derive(Debug, Args)]
pub struct SolverFlags {
    #[arg(long)]
    pub k: usize,

    /// Buffer columns; defaults to ceil(0.02 k).
    #[arg(long)]
    pub nbuf: Option<usize>,

    #[arg(long, default_value_t = DEFAULT_SBSIZE)]
    pub sbsize: usize,

    /// Iterations between Rayleigh-Ritz steps, or `inf` for never.
    #[arg(long, default_value_t = RrPeriod(Some(DEFAULT_RR_PERIOD)))]
    pub rr_period: RrPeriod,

    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,

    #[arg(long)]
    pub trace_tol: Option<f64>,

    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,

    /// `every`, `every:<t>` or `adaptive:<threshold>`.
    #[arg(long, default_value = "every")]
    pub orth: OrthArg,

    /// `cholqr` or `taylor[:<terms>]`.
    #[arg(long, default_value = "cholqr")]
    pub orth_scheme: SchemeArg,

    #[arg(long)]
    pub no_project_w: bool,

    #[arg(long)]
    pub no_project_p: bool,

    /// Seeds the random initial block and the random problem generators.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Davidson restarts when its basis would exceed this many blocks.
    #[arg(long, default_value_t = DEFAULT_RESTART_DIM_MULTIPLE)]
    pub restart_multiple: usize,
}

impl SolverFlags {
    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            k: self.k,
            nbuf: self.nbuf.unwrap_or_else(|| default_nbuf(self.k)),
            sbsize: self.sbsize,
            rr_period: self.rr_period.0,
            tol: self.tol,
            trace_tol: self.trace_tol,
            max_iter: self.max_iter,
            orth_policy: self.orth.0,
            orth_scheme: self.orth_scheme.0,
            projection: Projection {
                w: !self.no_project_w,
                p: !self.no_project_p,
            },
            seed: self.seed,
        }
    }

    pub fn baseline_options(&self) -> BaselineOptions {
        BaselineOptions {
            k: self.k,
            nbuf: self.nbuf.unwrap_or_else(|| default_nbuf(self.k)),
            tol: self.tol,
            max_iter: self.max_iter,
            seed: self.seed,
            restart_dim_multiple: self.restart_multiple,
        }
    }

    /// Checks every option before any work is done.
    pub fn validate(&self) -> anyhow::Result<()> {
        self.solver_options().validate()?;
        self.baseline_options().validate()?;
        if self.max_iter == 0 {
            bail!("max-iter must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Args)]
pub struct OutputFlags {
    /// Also write a JSON mirror of each trace next to the CSV.
    #[arg(long)]
    pub json: bool,

    /// Record wall_ms as 0 so traces are reproducible byte for byte.
    #[arg(long)]
    pub no_wall_clock: bool,

    /// SVG convergence plot.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, value_enum, default_value = "ppcg")]
    pub solver: SolverKind,

    #[command(flatten)]
    pub problem: ProblemArgs,

    #[command(flatten)]
    pub solver_flags: SolverFlags,

    /// Trace CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,

    #[command(flatten)]
    pub output: OutputFlags,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Comma-separated list, e.g. `ppcg,davidson`.
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    pub solvers: Vec<SolverKind>,

    #[command(flatten)]
    pub problem: ProblemArgs,

    #[command(flatten)]
    pub solver_flags: SolverFlags,

    /// Directory receiving one `<solver>.csv` per run.
    #[arg(long)]
    pub trace_dir: Option<PathBuf>,

    #[command(flatten)]
    pub output: OutputFlags,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(required = true)]
    pub traces: Vec<PathBuf>,

    #[arg(short, long)]
    pub output: PathBuf,

    /// Horizontal axis.
    #[arg(long, value_enum, default_value = "iter")]
    pub x: XAxis,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum XAxis {
    Iter,
    Time,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RrPeriod(pub Option<usize>);

impl FromStr for RrPeriod {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s {
            "inf" | "never" => Ok(RrPeriod(None)),
            _ => Ok(RrPeriod(Some(s.parse().with_context(|| format!("bad rr period `{s}`"))?))),
        }
    }
}

impl std::fmt::Display for RrPeriod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.0 {
            Some(p) => write!(f, "{p}"),
            None => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrthArg(pub OrthPolicy);

impl FromStr for OrthArg {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        let policy = match s.split_once(':') {
            None if s == "every" => OrthPolicy::EveryIteration,
            Some(("every", t)) => OrthPolicy::EveryT(t.parse().with_context(|| format!("bad period in `{s}`"))?),
            Some(("adaptive", t)) => OrthPolicy::Adaptive(t.parse().with_context(|| format!("bad threshold in `{s}`"))?),
            None if s == "adaptive" => OrthPolicy::Adaptive(0.1),
            _ => bail!("unknown orthonormalization policy `{s}`"),
        };
        Ok(OrthArg(policy))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeArg(pub OrthScheme);

impl FromStr for SchemeArg {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        let scheme = match s.split_once(':') {
            None if s == "cholqr" => OrthScheme::CholeskyQr,
            None if s == "taylor" => OrthScheme::TaylorPolar(DEFAULT_TAYLOR_TERMS),
            Some(("taylor", n)) => OrthScheme::TaylorPolar(n.parse().with_context(|| format!("bad term count in `{s}`"))?),
            _ => bail!("unknown orthonormalization scheme `{s}`"),
        };
        Ok(SchemeArg(scheme))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rr_period_forms() {
        assert_eq!("7".parse::<RrPeriod>().unwrap(), RrPeriod(Some(7)));
        assert_eq!("inf".parse::<RrPeriod>().unwrap(), RrPeriod(None));
        assert!("x".parse::<RrPeriod>().is_err());
    }

    #[test]
    fn orth_forms() {
        assert_eq!("every".parse::<OrthArg>().unwrap().0, OrthPolicy::EveryIteration);
        assert_eq!("every:5".parse::<OrthArg>().unwrap().0, OrthPolicy::EveryT(5));
        assert_eq!("adaptive:0.2".parse::<OrthArg>().unwrap().0, OrthPolicy::Adaptive(0.2));
        assert!("sometimes".parse::<OrthArg>().is_err());
        assert_eq!("taylor:3".parse::<SchemeArg>().unwrap().0, OrthScheme::TaylorPolar(3));
        assert_eq!("cholqr".parse::<SchemeArg>().unwrap().0, OrthScheme::CholeskyQr);
    }
}
