use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use hyperpoisson::convergence::{run_convergence, solve_level, MeshKind, RunOptions};
use hyperpoisson::field::dump_csv;
use hyperpoisson::relax::write_history_csv;
use hyperpoisson::{builtin_setup, emit_report, DirichletPenalty, ReportFormat, SolveMethod};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Solver {
    Direct,
    Cg,
    Relaxation,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Console,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Penalty {
    Stabilizing,
    Reversed,
}

/// Grid convergence study for the DG/SBP Poisson benchmarks.
#[derive(Debug, Parser)]
#[command(name = "hyperpoisson", version)]
struct Args {
    /// Benchmark problem (1, 2: 1D; 3, 4: 2D).
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=4))]
    setup: u32,

    /// Polynomial degree.
    #[arg(long, default_value_t = 2)]
    degree: usize,

    /// Elements per direction for each level, e.g. 10,20,40.
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<usize>>,

    /// Defaults to direct in 1D and cg in 2D.
    #[arg(long, value_enum)]
    solver: Option<Solver>,

    /// Relative residual tolerance for cg.
    #[arg(long, default_value_t = hyperpoisson::solvers::DEFAULT_TOL)]
    tol: f64,

    #[arg(long, value_enum, default_value = "console")]
    format: Format,

    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,

    /// Write the finest-level solution as CSV.
    #[arg(long)]
    dump_solution: Option<PathBuf>,

    /// Pseudo-time residual history of the finest level (relaxation only).
    #[arg(long)]
    residual_history: Option<PathBuf>,

    /// `uniform` or `geometric:RATIO` (largest over smallest element).
    #[arg(long, default_value = "uniform", value_parser = parse_mesh)]
    mesh: MeshKind,

    /// Orientation of the Dirichlet boundary penalty.
    #[arg(long, value_enum, default_value = "stabilizing")]
    dirichlet_penalty: Penalty,
}

fn parse_mesh(s: &str) -> Result<MeshKind, String> {
    if s == "uniform" {
        return Ok(MeshKind::Uniform);
    }
    let ratio = s
        .strip_prefix("geometric:")
        .ok_or_else(|| format!("expected `uniform` or `geometric:RATIO`, got `{s}`"))?;
    let r: f64 = ratio.parse().map_err(|e| format!("bad ratio `{ratio}`: {e}"))?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(format!("ratio must be positive, got {r}"));
    }
    Ok(MeshKind::Geometric(r))
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("HYPERPOISSON_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .map_err(|_| format!("HYPERPOISSON_THREADS must be a positive integer, got `{v}`"))?;
    if n == 0 {
        return Err("HYPERPOISSON_THREADS must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn run(args: Args) -> Result<(), Box<dyn std::error::Error>> {
    configure_threads()?;
    let setup = builtin_setup(args.setup)?;
    let mut opts = RunOptions::for_setup(&setup, args.degree);
    if let Some(levels) = args.levels {
        opts.levels = levels;
    }
    if let Some(s) = args.solver {
        opts.solver = match s {
            Solver::Direct => SolveMethod::Direct,
            Solver::Cg => SolveMethod::Cg,
            Solver::Relaxation => SolveMethod::Relaxation,
        };
    }
    opts.tol = args.tol;
    opts.mesh = args.mesh;
    opts.penalty = match args.dirichlet_penalty {
        Penalty::Stabilizing => DirichletPenalty::Stabilizing,
        Penalty::Reversed => DirichletPenalty::Reversed,
    };
    if args.residual_history.is_some() && opts.solver != SolveMethod::Relaxation {
        return Err("--residual-history requires --solver relaxation".into());
    }

    let report = run_convergence(&setup, &opts)?;
    let format = match args.format {
        Format::Console => ReportFormat::Console,
        Format::Csv => ReportFormat::Csv,
    };
    emit_report(&report, format, args.output.as_deref())?;

    if args.dump_solution.is_some() || args.residual_history.is_some() {
        let finest = *opts.levels.last().expect("levels validated as non-empty");
        let sol = solve_level(&setup, &opts, finest)?;
        if let Some(path) = args.dump_solution {
            dump_csv(&sol.mesh, &sol.phi, BufWriter::new(File::create(path)?))?;
        }
        if let Some(path) = args.residual_history {
            write_history_csv(&sol.relax_history, BufWriter::new(File::create(path)?))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = e.source();
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
