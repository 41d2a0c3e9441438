use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use ppcg::problems::{jacobi_preconditioner, SparseHermitian};
use ppcg::{davidson_solve, lobpcg_solve, ppcg_solve, Field, IdentityPreconditioner, Preconditioner, SolveReport};

use crate::args::{CompareArgs, OutputFlags, PlotArgs, PrecondKind, ProblemArgs, SolveArgs, SolverFlags, SolverKind, XAxis};
use crate::plot::{render_svg, Series};
use crate::problem::{Problem, ProblemSpec};
use crate::trace::{json_path, read_csv, rows_from, to_csv, RunRecord, Staged};

pub const EXIT_CONVERGED: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_MAX_ITER: i32 = 2;

fn run_one<T: Field>(
    kind: SolverKind,
    a: &SparseHermitian<T>,
    problem: &ProblemArgs,
    flags: &SolverFlags,
) -> anyhow::Result<(SolveReport<T>, f64)> {
    let t: Box<dyn Preconditioner<T>> = match problem.precond {
        PrecondKind::None => Box::new(IdentityPreconditioner),
        PrecondKind::Jacobi => Box::new(jacobi_preconditioner(a, problem.shift)),
    };
    let start = Instant::now();
    let report = match kind {
        SolverKind::Ppcg => ppcg_solve(a, t.as_ref(), None, &flags.solver_options())?,
        SolverKind::Davidson => davidson_solve(a, t.as_ref(), None, &flags.baseline_options())?,
        SolverKind::Lobpcg => lobpcg_solve(a, t.as_ref(), None, &flags.baseline_options())?,
    };
    Ok((report, start.elapsed().as_secs_f64() * 1e3))
}

fn record<T: Field>(
    kind: SolverKind,
    spec: &ProblemSpec,
    n: usize,
    report: &SolveReport<T>,
    wall_ms: f64,
    out: &OutputFlags,
) -> RunRecord {
    RunRecord {
        version: 1,
        solver: kind.name().to_string(),
        problem: spec.to_string(),
        n,
        k: report.values.len(),
        status: report.status.to_string(),
        converged: report.status.is_converged(),
        iterations: report.iterations(),
        matvecs: report.matvecs,
        rr_solves: report.rr_solves,
        breakdowns: report.breakdowns,
        final_residual: report.final_residual(),
        wall_ms: if out.no_wall_clock { 0.0 } else { wall_ms },
        values: report.values.clone(),
        rows: rows_from(&report.trace, !out.no_wall_clock),
    }
}

fn run_record(kind: SolverKind, problem: &ProblemArgs, built: &Problem, flags: &SolverFlags, out: &OutputFlags) -> anyhow::Result<RunRecord> {
    let n = built.n();
    let rec = match built {
        Problem::Real(a) => {
            let (r, ms) = run_one(kind, a, problem, flags)?;
            record(kind, &problem.problem, n, &r, ms, out)
        }
        Problem::Complex(a) => {
            let (r, ms) = run_one(kind, a, problem, flags)?;
            record(kind, &problem.problem, n, &r, ms, out)
        }
    };
    Ok(rec)
}

fn print_summary(w: &mut impl Write, rec: &RunRecord) -> std::io::Result<()> {
    writeln!(w, "solver       {}", rec.solver)?;
    writeln!(w, "problem      {} (n = {})", rec.problem, rec.n)?;
    writeln!(w, "status       {}", rec.status)?;
    writeln!(w, "iterations   {}", rec.iterations)?;
    writeln!(w, "matvecs      {}", rec.matvecs)?;
    writeln!(w, "rr_solves    {}", rec.rr_solves)?;
    writeln!(w, "final_resid  {:.3e}", rec.final_residual)?;
    writeln!(w, "eigenvalues")?;
    for (j, v) in rec.values.iter().enumerate() {
        writeln!(w, "{:>6}  {:.16e}", j + 1, v)?;
    }
    Ok(())
}

fn stage_trace(staged: &mut Staged, path: &Path, rec: &RunRecord, json: bool) -> anyhow::Result<()> {
    staged.add(path, &to_csv(&rec.rows)?)?;
    if json {
        staged.add(&json_path(path), serde_json::to_string_pretty(rec)?.as_bytes())?;
    }
    Ok(())
}

fn series_of(label: &str, rec: &RunRecord) -> Series {
    Series {
        label: label.to_string(),
        points: rec.rows.iter().map(|r| (r.iter as f64, r.rel_resid)).collect(),
    }
}

fn exit_code(all_converged: bool) -> i32 {
    if all_converged {
        EXIT_CONVERGED
    } else {
        EXIT_MAX_ITER
    }
}

pub fn solve(args: &SolveArgs) -> anyhow::Result<i32> {
    args.solver_flags.validate()?;
    if args.output.json && args.trace.is_none() {
        bail!("--json needs --trace to know where to write");
    }
    let built = args.problem.problem.build(args.solver_flags.seed)?;
    let rec = run_record(args.solver, &args.problem, &built, &args.solver_flags, &args.output)?;

    let mut staged = Staged::default();
    if let Some(path) = &args.trace {
        stage_trace(&mut staged, path, &rec, args.output.json)?;
    }
    if let Some(path) = &args.output.plot {
        staged.add(path, render_svg(&[series_of(&rec.solver, &rec)], "iteration")?.as_bytes())?;
    }
    staged.commit()?;
    print_summary(&mut std::io::stdout().lock(), &rec)?;
    Ok(exit_code(rec.converged))
}

/// `ppcg`, `davidson`, `ppcg-2`, ... so repeated solvers get distinct files.
fn run_labels(solvers: &[SolverKind]) -> Vec<String> {
    let mut seen: HashMap<&str, usize> = HashMap::new();
    solvers
        .iter()
        .map(|s| {
            let c = seen.entry(s.name()).or_insert(0);
            *c += 1;
            if *c == 1 {
                s.name().to_string()
            } else {
                format!("{}-{}", s.name(), c)
            }
        })
        .collect()
}

pub fn compare(args: &CompareArgs) -> anyhow::Result<i32> {
    if args.solvers.len() < 2 {
        bail!("compare needs at least two solvers, got {}", args.solvers.len());
    }
    args.solver_flags.validate()?;
    if args.output.json && args.trace_dir.is_none() {
        bail!("--json needs --trace-dir to know where to write");
    }
    let built = args.problem.problem.build(args.solver_flags.seed)?;
    let labels = run_labels(&args.solvers);
    let mut records = Vec::with_capacity(args.solvers.len());
    for &kind in &args.solvers {
        records.push(run_record(kind, &args.problem, &built, &args.solver_flags, &args.output)?);
    }

    // Every solver starts from the same seeded block, so the first rows agree.
    let t0 = records[0].rows[0].trace_value;
    for (label, rec) in labels.iter().zip(&records) {
        let t = rec.rows[0].trace_value;
        if (t - t0).abs() > 1e-12 * t0.abs().max(1.0) {
            bail!("{label} started from a different block: initial trace {t} vs {t0}");
        }
    }

    let mut staged = Staged::default();
    if let Some(dir) = &args.trace_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (label, rec) in labels.iter().zip(&records) {
            stage_trace(&mut staged, &dir.join(format!("{label}.csv")), rec, args.output.json)?;
        }
    }
    if let Some(path) = &args.output.plot {
        let series: Vec<Series> = labels.iter().zip(&records).map(|(l, r)| series_of(l, r)).collect();
        staged.add(path, render_svg(&series, "iteration")?.as_bytes())?;
    }
    staged.commit()?;

    let mut out = std::io::stdout().lock();
    writeln!(out, "problem {} (n = {})", records[0].problem, records[0].n)?;
    writeln!(
        out,
        "{:<12} {:>8} {:>10} {:>10} {:>12}  {}",
        "solver", "iters", "matvecs", "wall_ms", "final_resid", "status"
    )?;
    for (label, rec) in labels.iter().zip(&records) {
        writeln!(
            out,
            "{:<12} {:>8} {:>10} {:>10.1} {:>12.3e}  {}",
            label, rec.iterations, rec.matvecs, rec.wall_ms, rec.final_residual, rec.status
        )?;
    }
    Ok(exit_code(records.iter().all(|r| r.converged)))
}

fn label_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub fn plot(args: &PlotArgs) -> anyhow::Result<i32> {
    let mut series = Vec::with_capacity(args.traces.len());
    for path in &args.traces {
        let rows = read_csv(path)?;
        let points = rows
            .iter()
            .map(|r| {
                let x = match args.x {
                    XAxis::Iter => r.iter as f64,
                    XAxis::Time => r.wall_ms / 1e3,
                };
                (x, r.rel_resid)
            })
            .collect();
        series.push(Series {
            label: label_of(path),
            points,
        });
    }
    let x_label = match args.x {
        XAxis::Iter => "iteration",
        XAxis::Time => "wall time (s)",
    };
    let svg = render_svg(&series, x_label)?;
    let mut staged = Staged::default();
    staged.add(&args.output, svg.as_bytes())?;
    staged.commit()?;
    Ok(EXIT_CONVERGED)
}

pub fn trace_paths(dir: &Path, solvers: &[SolverKind]) -> Vec<PathBuf> {
    run_labels(solvers).iter().map(|l| dir.join(format!("{l}.csv"))).collect()
}
