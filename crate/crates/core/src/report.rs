//! CSV and JSON serialization of screening results.

use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contingency::{
    BaseCaseContext, PrecondChoice, ScenarioResult, ScreenOptions, SolverKind,
};

pub const SCHEMA_VERSION: &str = "1";
/// Violations listed per scenario in JSON output.
pub const JSON_VIOLATION_CAP: usize = 50;
pub const CSV_HEADER: [&str; 11] = [
    "branch_id",
    "from_bus",
    "to_bus",
    "islanding",
    "converged",
    "outer_iters",
    "cg_iters",
    "time_ms",
    "worst_violation_pct",
    "violation_count",
    "failure_reason",
];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Totals {
    pub tested: usize,
    pub converged: usize,
    pub failed: usize,
    pub islanding: usize,
    pub lu_failures: usize,
}

impl Totals {
    pub fn tally(scenarios: &[ScenarioResult]) -> Self {
        let mut t = Totals::default();
        for s in scenarios {
            t.tested += 1;
            if s.converged {
                t.converged += 1;
            } else {
                t.failed += 1;
            }
            t.islanding += usize::from(s.islanding);
            let lu = s
                .failure_reason
                .as_deref()
                .is_some_and(|r| r.starts_with("lu-failure"));
            t.lu_failures += usize::from(lu);
        }
        t
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaseCaseSummary {
    pub bus_count: usize,
    pub branch_count: usize,
    pub outer_iterations: usize,
    pub cg_iterations: usize,
    pub max_p_mismatch: f64,
    pub max_q_mismatch: f64,
    pub preconditioner: PrecondChoice,
    pub factorizations: usize,
    pub time_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScreeningReport {
    pub schema_version: String,
    pub case_name: String,
    pub solver: SolverKind,
    pub base_case: BaseCaseSummary,
    pub totals: Totals,
    pub total_time_ms: f64,
    pub scenarios: Vec<ScenarioResult>,
}

impl ScreeningReport {
    pub fn new(
        ctx: &BaseCaseContext,
        opts: &ScreenOptions,
        mut scenarios: Vec<ScenarioResult>,
        total_time_ms: f64,
    ) -> Self {
        scenarios.sort_by_key(|s| s.branch_id);
        let base = &ctx.base_solution;
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            case_name: ctx.graph.case_name.clone(),
            solver: opts.solver,
            base_case: BaseCaseSummary {
                bus_count: ctx.graph.vertex_count(),
                branch_count: ctx.graph.edge_count(),
                outer_iterations: base.outer_iterations,
                cg_iterations: base.total_cg_iterations,
                max_p_mismatch: base.max_p_mismatch,
                max_q_mismatch: base.max_q_mismatch,
                preconditioner: ctx.precond,
                factorizations: ctx.bprime_factorizations,
                time_ms: ctx.base_time_ms,
            },
            totals: Totals::tally(&scenarios),
            total_time_ms,
            scenarios,
        }
    }

    /// Clears every wall-clock field so output depends only on the inputs.
    pub fn zero_times(&mut self) {
        self.total_time_ms = 0.0;
        self.base_case.time_ms = 0.0;
        for s in &mut self.scenarios {
            s.time_ms = 0.0;
        }
    }

    /// `tested=<n> converged=<n> islanding=<n> failed=<n> total_ms=<t>`
    pub fn summary_line(&self) -> String {
        let t = &self.totals;
        format!(
            "tested={} converged={} islanding={} failed={} total_ms={:.2}",
            t.tested, t.converged, t.islanding, t.failed, self.total_time_ms
        )
    }
}

struct Counting<W> {
    inner: W,
    bytes: usize,
}

impl<W: Write> Write for Counting<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.bytes += n;
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

/// One CSV data row as read back.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub branch_id: usize,
    pub from_bus: u32,
    pub to_bus: u32,
    pub islanding: bool,
    pub converged: bool,
    pub outer_iters: usize,
    pub cg_iters: usize,
    pub time_ms: f64,
    pub worst_violation_pct: Option<f64>,
    pub violation_count: usize,
    pub failure_reason: Option<String>,
}

impl CsvRow {
    /// The row `write_csv` emits for `s`, at the precision it emits.
    pub fn of(s: &ScenarioResult) -> Self {
        let round = |x: f64, scale: f64| (x * scale).round() / scale;
        Self {
            branch_id: s.branch_id,
            from_bus: s.from_bus,
            to_bus: s.to_bus,
            islanding: s.islanding,
            converged: s.converged,
            outer_iters: s.outer_iterations,
            cg_iters: s.cg_iterations_total,
            time_ms: round(s.time_ms, 100.0),
            worst_violation_pct: s.worst_violation_pct().map(|p| round(p, 10.0)),
            violation_count: s.violation_count,
            failure_reason: s.failure_reason.clone(),
        }
    }
}

pub fn write_csv<W: Write>(report: &ScreeningReport, destination: W) -> Result<usize, ReportError> {
    let mut counting = Counting {
        inner: destination,
        bytes: 0,
    };
    {
        let mut w = csv::Writer::from_writer(&mut counting);
        w.write_record(CSV_HEADER)?;
        for s in &report.scenarios {
            w.write_record([
                s.branch_id.to_string(),
                s.from_bus.to_string(),
                s.to_bus.to_string(),
                s.islanding.to_string(),
                s.converged.to_string(),
                s.outer_iterations.to_string(),
                s.cg_iterations_total.to_string(),
                format!("{:.2}", s.time_ms),
                s.worst_violation_pct()
                    .map(|p| format!("{p:.1}"))
                    .unwrap_or_default(),
                s.violation_count.to_string(),
                s.failure_reason.clone().unwrap_or_default(),
            ])?;
        }
        w.flush()?;
    }
    Ok(counting.bytes)
}

pub fn read_csv<R: Read>(source: R) -> Result<Vec<CsvRow>, ReportError> {
    let mut r = csv::Reader::from_reader(source);
    let rows = r.deserialize().collect::<Result<Vec<CsvRow>, _>>()?;
    Ok(rows)
}

/// Pretty-printed JSON with at most [`JSON_VIOLATION_CAP`] violations per
/// scenario; the rest are counted in `violations_overflow`.
pub fn write_json<W: Write>(
    report: &ScreeningReport,
    destination: W,
) -> Result<usize, ReportError> {
    let mut counting = Counting {
        inner: destination,
        bytes: 0,
    };
    let mut capped = report.clone();
    for s in &mut capped.scenarios {
        if s.violations.len() > JSON_VIOLATION_CAP {
            s.violations_overflow += s.violations.len() - JSON_VIOLATION_CAP;
            s.violations.truncate(JSON_VIOLATION_CAP);
        }
    }
    serde_json::to_writer_pretty(&mut counting, &capped)?;
    counting.write_all(b"\n")?;
    counting.flush()?;
    Ok(counting.bytes)
}

pub fn read_json<R: Read>(source: R) -> Result<ScreeningReport, ReportError> {
    Ok(serde_json::from_reader(source)?)
}
