use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context};
use num_complex::Complex64;
use ppcg::problems::{
    laplacian_1d, laplacian_3d, laplacian_plus_potential, random_hermitian, read_matrix_market, two_well_potential,
    MatrixMarket, SparseHermitian,
};

/// Where the operator comes from, as written on the command line.
#[derive(Clone, Debug, PartialEq)]
pub enum ProblemSpec {
    MatrixMarket(PathBuf),
    Laplacian1d(usize),
    Laplacian3d(usize, usize, usize),
    Well { grid: (usize, usize, usize), depth: f64 },
    Random { n: usize, density: f64 },
}

pub enum Problem {
    Real(SparseHermitian<f64>),
    Complex(SparseHermitian<Complex64>),
}

impl Problem {
    pub fn n(&self) -> usize {
        match self {
            Problem::Real(a) => a.n(),
            Problem::Complex(a) => a.n(),
        }
    }
}

fn parse_list<T: FromStr>(s: &str, count: usize, what: &str) -> anyhow::Result<Vec<T>> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != count {
        bail!("{what} expects {count} comma-separated values, got `{s}`");
    }
    parts
        .iter()
        .map(|p| p.parse::<T>().ok().with_context(|| format!("bad value `{p}` in {what}")))
        .collect()
}

fn positive(v: &[usize], what: &str) -> anyhow::Result<()> {
    if v.contains(&0) {
        bail!("{what} dimensions must be at least 1");
    }
    Ok(())
}

impl FromStr for ProblemSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .with_context(|| format!("problem `{s}` must look like <kind>:<parameters>"))?;
        let spec = match kind {
            "mm" => {
                if rest.is_empty() {
                    bail!("mm: needs a file path");
                }
                ProblemSpec::MatrixMarket(PathBuf::from(rest))
            }
            "lap1d" => {
                let v = parse_list::<usize>(rest, 1, "lap1d")?;
                positive(&v, "lap1d")?;
                ProblemSpec::Laplacian1d(v[0])
            }
            "lap3d" => {
                let v = parse_list::<usize>(rest, 3, "lap3d")?;
                positive(&v, "lap3d")?;
                ProblemSpec::Laplacian3d(v[0], v[1], v[2])
            }
            "well" => {
                let v = parse_list::<f64>(rest, 4, "well")?;
                let dims: Vec<usize> = v[..3]
                    .iter()
                    .map(|&d| if d.fract() == 0.0 && d >= 1.0 { Ok(d as usize) } else { Err(d) })
                    .collect::<Result<_, _>>()
                    .map_err(|d| anyhow::anyhow!("well grid dimension {d} is not a positive integer"))?;
                ProblemSpec::Well {
                    grid: (dims[0], dims[1], dims[2]),
                    depth: v[3],
                }
            }
            "rand" => {
                let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
                if parts.len() != 2 {
                    bail!("rand expects <n,density>, got `{rest}`");
                }
                let n: usize = parts[0].parse().with_context(|| format!("bad size `{}`", parts[0]))?;
                let density: f64 = parts[1].parse().with_context(|| format!("bad density `{}`", parts[1]))?;
                if n == 0 {
                    bail!("rand size must be at least 1");
                }
                if !(density > 0.0 && density <= 1.0) {
                    bail!("rand density must lie in (0, 1]");
                }
                ProblemSpec::Random { n, density }
            }
            _ => bail!("unknown problem kind `{kind}`"),
        };
        Ok(spec)
    }
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemSpec::MatrixMarket(p) => write!(f, "mm:{}", p.display()),
            ProblemSpec::Laplacian1d(n) => write!(f, "lap1d:{n}"),
            ProblemSpec::Laplacian3d(x, y, z) => write!(f, "lap3d:{x},{y},{z}"),
            ProblemSpec::Well { grid: (x, y, z), depth } => write!(f, "well:{x},{y},{z},{depth}"),
            ProblemSpec::Random { n, density } => write!(f, "rand:{n},{density}"),
        }
    }
}

impl ProblemSpec {
    /// Builds the operator; `seed` drives the well noise and random entries.
    pub fn build(&self, seed: u64) -> anyhow::Result<Problem> {
        let p = match self {
            ProblemSpec::MatrixMarket(path) => match read_matrix_market(path)
                .with_context(|| format!("reading {}", path.display()))?
            {
                MatrixMarket::Real(a) => Problem::Real(a),
                MatrixMarket::Complex(a) => Problem::Complex(a),
            },
            ProblemSpec::Laplacian1d(n) => Problem::Real(laplacian_1d(*n)),
            ProblemSpec::Laplacian3d(x, y, z) => Problem::Real(laplacian_3d(*x, *y, *z)),
            ProblemSpec::Well { grid: (x, y, z), depth } => {
                let v = two_well_potential(*x, *y, *z, *depth, seed);
                Problem::Real(laplacian_plus_potential(*x, *y, *z, &v)?)
            }
            ProblemSpec::Random { n, density } => Problem::Real(random_hermitian::<f64>(*n, *density, seed)?),
        };
        Ok(p)
    }
}
