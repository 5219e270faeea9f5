//! Solver reports and the files written for them.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::case_io::write_plan;
use crate::error::{Error, Result};
use crate::metaheuristics::TraceRow;
use crate::model::{Case, ExpansionPlan};
use crate::planners::EvaluationOutcome;

/// Convergence trace of one search inside a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Phase {
    pub name: String,
    pub rows: Vec<TraceRow>,
}

/// One pass of the transmission and reactive planning loop.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopRow {
    pub iteration: usize,
    /// Objective of the AC expansion step, penalties included.
    pub tnep_cost: f64,
    pub rpp_cost: f64,
    /// Line investment plus the reactive plan objective.
    pub combined: f64,
    pub accepted: bool,
    /// Best combined cost so far.
    pub best_combined: f64,
}

/// One interior-point iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IpTraceRow {
    pub k: usize,
    pub f: f64,
    pub mu: f64,
    pub beta: f64,
    pub rho: f64,
    pub kkt: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub planner: String,
    pub seed: u64,
    pub plan: ExpansionPlan,
    pub outcome: EvaluationOutcome,
    pub phases: Vec<Phase>,
    pub loops: Vec<LoopRow>,
    pub ip_trace: Vec<IpTraceRow>,
    /// Distinct evaluator calls.
    pub evaluations: usize,
    /// Evaluator calls that failed outright.
    pub failures: usize,
    /// Canonical configuration text, enough to replay the run.
    pub params: String,
    pub notes: Vec<String>,
}

impl SolverReport {
    pub fn feasible(&self) -> bool {
        self.outcome.feasible()
    }

    /// Total cost without penalties.
    pub fn total_cost(&self) -> f64 {
        self.outcome.cost.total()
    }
}

/// Identifies the inputs of a file; appended to every output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub case_hash: String,
    pub config_hash: String,
    pub seed: u64,
}

impl Provenance {
    pub fn footer(&self) -> String {
        format!(
            "# gridplan {} case={} config={} seed={}\n",
            env!("CARGO_PKG_VERSION"),
            self.case_hash,
            self.config_hash,
            self.seed
        )
    }
}

/// Whole dollars with thousands separators.
pub fn format_money(x: f64) -> String {
    if !x.is_finite() {
        return format!("{}", x);
    }
    let neg = x < 0.0;
    let digits = format!("{:.0}", x.abs());
    let mut out = String::new();
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(ch);
    }
    if neg {
        format!("-{}", out)
    } else {
        out
    }
}

pub fn costs_csv(outcome: &EvaluationOutcome) -> String {
    let mut s = String::from("item,dollars\n");
    for (k, v) in outcome.cost.rows() {
        let _ = writeln!(s, "{},{:.2}", k, v);
    }
    let _ = writeln!(s, "penalty,{:.2}", outcome.penalty);
    let _ = writeln!(s, "objective,{:.2}", outcome.j);
    s
}

pub fn trace_csv(report: &SolverReport) -> String {
    let mut s = String::new();
    if !report.ip_trace.is_empty() {
        s.push_str("k,f,mu,beta,rho,kkt_inf,alpha\n");
        for r in &report.ip_trace {
            let _ = writeln!(s, "{},{:e},{:e},{},{:e},{:e},{}", r.k, r.f, r.mu, r.beta, r.rho, r.kkt, r.alpha);
        }
        return s;
    }
    s.push_str("phase,generation,best_J,mean_J,penalty_share\n");
    for p in &report.phases {
        for r in &p.rows {
            let _ = writeln!(s, "{},{},{:e},{:e},{}", p.name, r.iteration, r.best_j, r.mean_j, r.penalty_share);
        }
    }
    s
}

pub fn loops_csv(report: &SolverReport) -> String {
    let mut s = String::from("iteration,tnep_cost,rpp_cost,combined,accepted,best_combined\n");
    for r in &report.loops {
        let _ = writeln!(
            s,
            "{},{:.2},{:.2},{:.2},{},{:.2}",
            r.iteration, r.tnep_cost, r.rpp_cost, r.combined, r.accepted, r.best_combined
        );
    }
    s
}

/// Plain-text summary laid out like the usual result tables.
pub fn summary_text(report: &SolverReport, case: &Case) -> String {
    let o = &report.outcome;
    let mut s = String::new();
    let _ = writeln!(s, "planner   {}", report.planner);
    let _ = writeln!(s, "case      {}", case.name);
    let _ = writeln!(s, "seed      {}", report.seed);
    let _ = writeln!(s, "feasible  {}", if o.feasible() { "yes" } else { "no" });
    let _ = writeln!(s, "evaluations {}  failures {}", report.evaluations, report.failures);
    for n in &report.notes {
        let _ = writeln!(s, "{}", n);
    }
    s.push_str("\nplan\n");
    for line in write_plan(&report.plan, case).lines().skip(1) {
        let _ = writeln!(s, "  {}", line);
    }
    s.push_str("\ncosts ($)\n");
    for (k, v) in o.cost.rows() {
        if v != 0.0 || k == "total" {
            let _ = writeln!(s, "  {:<16}{:>20}", k, format_money(v));
        }
    }
    if o.penalty > 0.0 {
        let _ = writeln!(s, "  {:<16}{:>20}", "penalty", format_money(o.penalty));
    }
    let snap = &o.snapshot;
    if !snap.reserves_mw.is_empty() {
        s.push_str("\nstage  reserve MW  LOLP\n");
        for (t, r) in snap.reserves_mw.iter().enumerate() {
            let l = snap.lolp.get(t).map_or("-".to_string(), |p| format!("{:.3e}", p));
            let _ = writeln!(s, "  {:<5}{:>10.1}  {}", t + 1, r, l);
        }
    }
    if !snap.voltages.is_empty() {
        s.push_str("\nbus  V (pu)\n");
        for (b, v) in &snap.voltages {
            let _ = writeln!(s, "  {:<3}{:.4}", b, v);
        }
    }
    if !snap.flows.is_empty() {
        s.push_str("\nstage  line    circuits  flow (pu)  limit\n");
        for f in &snap.flows {
            let _ = writeln!(
                s,
                "  {:<5}{:>3}-{:<4}{:>8}  {:>9.4}  {:.4}",
                f.stage, f.from, f.to, f.circuits, f.flow, f.limit
            );
        }
    }
    if !report.loops.is_empty() {
        s.push_str("\nloop  tnep ($)  rpp ($)  combined ($)  accepted\n");
        for r in &report.loops {
            let _ = writeln!(
                s,
                "  {:<4}{:>16}{:>16}{:>16}  {}",
                r.iteration,
                format_money(r.tnep_cost),
                format_money(r.rpp_cost),
                format_money(r.combined),
                r.accepted
            );
        }
    }
    if !o.violations.is_empty() {
        s.push_str("\nviolations\n");
        for v in &o.violations {
            let _ = writeln!(s, "  {} ({:.4})", v.constraint, v.magnitude);
        }
    }
    s
}

/// Write summary.txt, plan.csv, costs.csv and trace.csv (plus loops.csv
/// for the iterative planner) into `dir`. Files are staged in a sibling
/// directory and moved into place, so `dir` either appears complete or not
/// at all. An existing `dir` is replaced only with `force`.
pub fn write_report(dir: &Path, report: &SolverReport, case: &Case, prov: &Provenance, force: bool) -> Result<Vec<PathBuf>> {
    let io = |path: &Path, e: std::io::Error| Error::Io {
        path: path.to_path_buf(),
        source: e,
    };
    if dir.exists() && !force {
        return Err(Error::Config(format!(
            "{} already exists; pass --force to replace it",
            dir.display()
        )));
    }
    let parent = dir.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(parent).map_err(|e| io(parent, e))?;
    let name = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    let staging = parent.join(format!(".{}.tmp-{}", name, std::process::id()));
    if staging.exists() {
        fs::remove_dir_all(&staging).map_err(|e| io(&staging, e))?;
    }
    fs::create_dir(&staging).map_err(|e| io(&staging, e))?;

    let footer = prov.footer();
    let mut files = vec![
        ("summary.txt", summary_text(report, case)),
        ("plan.csv", write_plan(&report.plan, case)),
        ("costs.csv", costs_csv(&report.outcome)),
        ("trace.csv", trace_csv(report)),
    ];
    if !report.loops.is_empty() {
        files.push(("loops.csv", loops_csv(report)));
    }
    let mut written = Vec::new();
    for (file, body) in files {
        let p = staging.join(file);
        fs::write(&p, format!("{}{}", body, footer)).map_err(|e| io(&p, e))?;
        written.push(dir.join(file));
    }
    if dir.exists() {
        fs::remove_dir_all(dir).map_err(|e| io(dir, e))?;
    }
    fs::rename(&staging, dir).map_err(|e| io(dir, e))?;
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn money_format() {
        assert_eq!(format_money(311e6), "311,000,000");
        assert_eq!(format_money(903_000.0), "903,000");
        assert_eq!(format_money(12.0), "12");
        assert_eq!(format_money(-1234.4), "-1,234");
        assert_eq!(format_money(0.0), "0");
    }
}
