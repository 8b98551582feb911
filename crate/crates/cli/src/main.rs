//! N-1 branch outage screening from the command line.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use n1screen::fdpf::{FdpfMode, FdpfOptions};
use n1screen::ingest::{parse_cdf, parse_json_network, NetworkModel};
use n1screen::report::{write_csv, write_json, ScreeningReport};
use n1screen::{
    prepare_base, screen_all, ContingencyError, PrecondChoice, ScreenOptions, SolverKind,
};

const EXIT_FAILURES: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BASE_DIVERGED: u8 = 3;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Cdf,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Solver {
    Gpcg,
    Lud,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Precond {
    None,
    Jacobi,
    #[value(name = "ilu0-base")]
    Ilu0Base,
    #[value(name = "lu-base")]
    LuBase,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Full,
    Quick,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Emit {
    Csv,
    Json,
    Both,
}

#[derive(Debug, Parser)]
#[command(
    name = "n1screen",
    version,
    about = "N-1 branch outage screening with fast-decoupled power flow"
)]
struct Args {
    /// Network case file
    #[arg(long)]
    input: PathBuf,

    /// Input format; guessed from the file extension when omitted
    #[arg(long, value_enum)]
    format: Option<Format>,

    #[arg(long, value_enum, default_value = "gpcg")]
    solver: Solver,

    /// Preconditioner for the gpcg solver [default: lu-base]
    #[arg(long, value_enum)]
    precond: Option<Precond>,

    #[arg(long, value_enum, default_value = "full")]
    mode: Mode,

    /// Power mismatch tolerance, p.u.
    #[arg(long, default_value_t = 1e-3)]
    tol_mismatch: f64,

    /// Relative residual tolerance of each CG solve
    #[arg(long, default_value_t = 1e-8)]
    tol_cg: f64,

    #[arg(long, default_value_t = 50)]
    max_outer: usize,

    /// CG iteration cap per solve [default: twice the bus count]
    #[arg(long)]
    max_cg: Option<usize>,

    /// Worker threads [default: available parallelism]
    #[arg(long)]
    jobs: Option<usize>,

    /// Comma-separated branch ids to screen instead of all branches
    #[arg(long, value_delimiter = ',')]
    branches: Option<Vec<usize>>,

    /// Report destination; without it the report goes to standard output
    /// only when --emit is given
    #[arg(long)]
    output: Option<PathBuf>,

    /// Report format [default: from the --output extension, else csv]
    #[arg(long, value_enum)]
    emit: Option<Emit>,

    /// Write zero for every timing field
    #[arg(long)]
    zero_times: bool,

    /// Write the bus-branch graph as JSON to this path
    #[arg(long)]
    dump_graph: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(&args) {
        Ok(code) => ExitCode::from(code),
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn load(args: &Args) -> Result<NetworkModel, String> {
    let text =
        fs::read_to_string(&args.input).map_err(|e| format!("{}: {e}", args.input.display()))?;
    let format = args.format.unwrap_or_else(|| guess_format(&args.input));
    let parsed = match format {
        Format::Cdf => parse_cdf(&text),
        Format::Json => parse_json_network(&text),
    };
    parsed.map_err(|e| format!("{}: {e}", args.input.display()))
}

fn guess_format(path: &Path) -> Format {
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("json") => Format::Json,
        _ => Format::Cdf,
    }
}

fn options(args: &Args) -> ScreenOptions {
    ScreenOptions {
        solver: match args.solver {
            Solver::Gpcg => SolverKind::Gpcg,
            Solver::Lud => SolverKind::Lud,
        },
        precond: match args.precond.unwrap_or(Precond::LuBase) {
            Precond::None => PrecondChoice::None,
            Precond::Jacobi => PrecondChoice::Jacobi,
            Precond::Ilu0Base => PrecondChoice::Ilu0Base,
            Precond::LuBase => PrecondChoice::LuBase,
        },
        fdpf: FdpfOptions {
            mismatch_tol: args.tol_mismatch,
            max_outer: args.max_outer,
            mode: match args.mode {
                Mode::Full => FdpfMode::Full,
                Mode::Quick => FdpfMode::QuickPTheta,
            },
            cg_tol: args.tol_cg,
            cg_max_iter: args.max_cg,
        },
        major_threshold: 0.0,
        filter: args.branches.clone(),
    }
}

fn run(args: &Args) -> Result<u8, (u8, String)> {
    let usage = |m: String| (EXIT_USAGE, m);
    if !(args.tol_mismatch > 0.0) || !(args.tol_cg > 0.0) {
        return Err(usage("tolerances must be positive".into()));
    }
    if matches!(args.solver, Solver::Lud) && args.precond.is_some() {
        eprintln!(
            "warning: --precond is ignored by the lud solver, which factorizes every scenario"
        );
    }

    let model = load(args).map_err(usage)?;
    let opts = options(args);
    let ctx = prepare_base(&model, &opts).map_err(|e| match e {
        ContingencyError::BaseCaseDiverged(_) => (EXIT_BASE_DIVERGED, e.to_string()),
        ContingencyError::InvalidModel(ref diags) => {
            for d in diags {
                eprintln!("  {d}");
            }
            usage(e.to_string())
        }
        other => usage(other.to_string()),
    })?;

    if let Some(path) = &args.dump_graph {
        fs::write(path, ctx.graph.dump_json())
            .map_err(|e| usage(format!("{}: {e}", path.display())))?;
    }

    let workers = args
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let mut report = screen_all(&ctx, &opts, workers).map_err(|e| usage(e.to_string()))?;
    if args.zero_times {
        report.zero_times();
    }
    if report.scenarios.len() == 1 {
        describe_single(&report);
    }

    emit(args, &report).map_err(usage)?;
    println!("{}", report.summary_line());
    Ok(if report.totals.failed == 0 {
        0
    } else {
        EXIT_FAILURES
    })
}

fn emit(args: &Args, report: &ScreeningReport) -> Result<(), String> {
    let Some(path) = &args.output else {
        let stdout = io::stdout().lock();
        return match args.emit {
            None => Ok(()),
            Some(Emit::Csv) => write_csv(report, stdout)
                .map(drop)
                .map_err(|e| e.to_string()),
            Some(Emit::Json) => write_json(report, stdout)
                .map(drop)
                .map_err(|e| e.to_string()),
            Some(Emit::Both) => Err("--emit both needs --output".into()),
        };
    };
    let emit = args.emit.unwrap_or(match guess_format(path) {
        Format::Json => Emit::Json,
        Format::Cdf => Emit::Csv,
    });
    let write = |path: &Path, json: bool| -> Result<(), String> {
        let err = |e: &dyn std::fmt::Display| format!("{}: {e}", path.display());
        let mut out = BufWriter::new(File::create(path).map_err(|e| err(&e))?);
        let written = if json {
            write_json(report, &mut out)
        } else {
            write_csv(report, &mut out)
        };
        written.map_err(|e| err(&e))?;
        out.flush().map_err(|e| err(&e))
    };
    match emit {
        Emit::Csv => write(path, false),
        Emit::Json => write(path, true),
        Emit::Both => {
            write(&path.with_extension("csv"), false)?;
            write(&path.with_extension("json"), true)
        }
    }
}

fn describe_single(report: &ScreeningReport) {
    let s = &report.scenarios[0];
    eprintln!(
        "branch {} ({} - {}): converged={} outer={} cg={} time_ms={:.2}",
        s.branch_id,
        s.from_bus,
        s.to_bus,
        s.converged,
        s.outer_iterations,
        s.cg_iterations_total,
        s.time_ms
    );
    if let Some(reason) = &s.failure_reason {
        eprintln!("  failure: {reason}");
    }
    if let Some(r) = &s.redispatch {
        eprintln!(
            "  island: {} buses, {} generating, {} loaded, net injection {:.4} p.u.",
            s.deenergized_count, r.island_gen_count, r.island_load_count, r.island_net_injection
        );
        for p in &r.participants {
            eprintln!(
                "    bus {:>5} share {:.4} delta {:+.4} p.u.",
                p.bus_id, p.share, p.delta_p
            );
        }
    }
    for v in &s.violations {
        eprintln!(
            "  overload branch {:>5}: {:.4} / {:.4} p.u. ({:.1}%)",
            v.branch_id, v.flow_pu, v.limit_pu, v.percent
        );
    }
}
