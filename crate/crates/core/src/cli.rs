//! The `gridplan` command line.
//!
//! Exit codes: 0 success, 1 bad input or usage, 2 the best plan is
//! infeasible (or a reproduction check failed), 3 internal failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::case_io::{load_case_hashed, load_dispatch, load_plan, parse_config, sha256_hex, RunConfig, BUNDLED_CONFIGS};
use crate::economics::{dispatch_groups, unit_groups};
use crate::error::Error;
use crate::ip_tnep::ip_solve;
use crate::model::{validate_case, Case, ExpansionPlan, Topology};
use crate::planners::{
    evaluate_for, evaluate_plan, run_planner, scenario_generation, shunts_per_bus, stage_demand, Context,
    EvaluationOutcome, PlannerKind, PlannerSpec,
};
use crate::powerflow::{ac_flow_fdlf, branch_apparent_flows, AcInput, AcOptions};
use crate::reliability::{lolp, lolp_monte_carlo, OutageModel};
use crate::report::{format_money, write_report, Provenance, SolverReport};
use crate::reproduce::{format_table, run_suite, Budget, SUITES};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "gridplan", version, about = "Generation, transmission and reactive power expansion planning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Search for a minimum-cost plan and write a report directory.
    Solve(SolveArgs),
    /// Cost and check a given plan.
    Evaluate(EvaluateArgs),
    /// Load flow on the network a plan builds.
    Flow(FlowArgs),
    /// Loss-of-load probability per stage.
    Lolp(LolpArgs),
    /// Re-run a bundled reproduction suite and print a pass/fail table.
    Reproduce(ReproduceArgs),
    /// Parse and validate a case, and optionally a config and a plan.
    Validate(ValidateArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Inputs {
    /// Case file, or a bundled case name (garver6, ieee24, ieee24-weak).
    #[arg(long)]
    pub case: String,
    /// Configuration file, or a bundled name (thesis-ch2 ... thesis-ch5).
    #[arg(long)]
    pub config: Option<String>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Security {
    None,
    #[value(name = "n-1")]
    N1,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    /// Planner; overrides the one named in the configuration.
    #[arg(long)]
    pub planner: Option<String>,
    /// Random seed; overrides the configuration (default 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Draw a fresh seed instead of the configured one.
    #[arg(long, conflicts_with = "seed")]
    pub fresh_seed: bool,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "none")]
    pub security: Security,
    /// Replace an existing output directory.
    #[arg(long)]
    pub force: bool,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    /// Plan file or bundled plan name.
    #[arg(long)]
    pub plan: String,
    #[arg(long)]
    pub planner: Option<String>,
    #[arg(long, value_enum, default_value = "none")]
    pub security: Security,
    /// Generation per bus replacing the dispatch at the stages it lists.
    #[arg(long)]
    pub dispatch: Option<String>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum FlowModel {
    Dc,
    Ac,
}

#[derive(Args, Debug)]
pub struct FlowArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[arg(long)]
    pub plan: Option<String>,
    #[arg(long, value_enum, default_value = "ac")]
    pub model: FlowModel,
    /// Load scenario for the AC flow (default: the heaviest).
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub dispatch: Option<String>,
}

#[derive(Args, Debug)]
pub struct LolpArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[arg(long)]
    pub plan: Option<String>,
    /// Also estimate by Monte Carlo with this many samples.
    #[arg(long)]
    pub mc: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct ReproduceArgs {
    /// Suite name: ch2, ch3, ch4, ch5 or properties.
    pub suite: String,
    /// Fewer seeds and shorter searches.
    #[arg(long)]
    pub quick: bool,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[arg(long)]
    pub case: String,
    #[arg(long)]
    pub config: Option<String>,
    #[arg(long)]
    pub plan: Option<String>,
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } | Error::Parse { .. } | Error::Validation(_) | Error::Config(_) | Error::PlanMismatch(_) => {
            EXIT_INPUT
        }
        Error::Infeasible(_) => EXIT_INFEASIBLE,
        Error::Numerical(_) => EXIT_INTERNAL,
    }
}

/// Parse arguments, run, print, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    match std::panic::catch_unwind(|| dispatch(&cli.command)) {
        Ok(Ok(code)) => code,
        Ok(Err(e)) => {
            eprintln!("error: {}", e);
            exit_code(&e)
        }
        Err(_) => EXIT_INTERNAL,
    }
}

/// Honour GRIDPLAN_THREADS by capping the global worker pool.
fn configure_threads() {
    if let Some(n) = std::env::var("GRIDPLAN_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn dispatch(cmd: &Command) -> crate::Result<i32> {
    match cmd {
        Command::Solve(a) => cmd_solve(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Flow(a) => cmd_flow(a),
        Command::Lolp(a) => cmd_lolp(a),
        Command::Reproduce(a) => cmd_reproduce(a),
        Command::Validate(a) => cmd_validate(a),
    }
}

struct Loaded {
    case: Case,
    case_hash: String,
    cfg: RunConfig,
    cfg_hash: String,
}

fn load_inputs(i: &Inputs) -> crate::Result<Loaded> {
    let (case, case_hash) = load_case_hashed(&i.case)?;
    let (cfg, cfg_hash) = match &i.config {
        Some(spec) => {
            let path = std::path::Path::new(spec);
            let text = if path.exists() {
                std::fs::read_to_string(path).map_err(|source| Error::Io {
                    path: path.to_path_buf(),
                    source,
                })?
            } else if let Some((_, t)) = BUNDLED_CONFIGS.iter().find(|(n, _)| n == spec) {
                t.to_string()
            } else {
                return Err(Error::Io {
                    path: path.to_path_buf(),
                    source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or bundled name"),
                });
            };
            (parse_config(&text)?, sha256_hex(&text))
        }
        None => {
            let cfg = RunConfig::default();
            let h = cfg.hash();
            (cfg, h)
        }
    };
    Ok(Loaded {
        case,
        case_hash,
        cfg,
        cfg_hash,
    })
}

/// Planner chosen on the command line, else by the configuration.
enum Planner {
    Kind(PlannerKind),
    InteriorPoint,
}

fn resolve_planner(flag: Option<&str>, cfg: &RunConfig) -> crate::Result<Planner> {
    let name = flag
        .or(cfg.planner.as_deref())
        .ok_or_else(|| Error::Config("no planner given (use --planner or set `planner` in the config)".into()))?;
    if name.trim().eq_ignore_ascii_case("ip-tnep") {
        return Ok(Planner::InteriorPoint);
    }
    Ok(Planner::Kind(name.parse()?))
}

fn outcome_code(feasible: bool) -> i32 {
    if feasible {
        EXIT_OK
    } else {
        EXIT_INFEASIBLE
    }
}

pub fn cmd_solve(a: &SolveArgs) -> crate::Result<i32> {
    let l = load_inputs(&a.inputs)?;
    let seed = if a.fresh_seed {
        rand::random::<u32>() as u64
    } else {
        a.seed.unwrap_or_else(|| l.cfg.seed())
    };
    println!("seed {}", seed);
    let security = a.security == Security::N1;
    let report: SolverReport = match resolve_planner(a.planner.as_deref(), &l.cfg)? {
        Planner::InteriorPoint => ip_solve(&l.case, &l.cfg)?.report,
        Planner::Kind(kind) => {
            let spec = PlannerSpec::new(kind, &l.cfg, security)?;
            run_planner(&spec, &l.case, &l.cfg, seed)?
        }
    };
    let prov = Provenance {
        case_hash: l.case_hash,
        config_hash: l.cfg_hash,
        seed,
    };
    let files = write_report(&a.out, &report, &l.case, &prov, a.force)?;
    println!(
        "{} plan, total {} $, objective {} $",
        if report.feasible() { "feasible" } else { "infeasible" },
        format_money(report.total_cost()),
        format_money(report.outcome.j)
    );
    for f in files {
        println!("wrote {}", f.display());
    }
    print!("{}", prov.footer());
    Ok(outcome_code(report.feasible()))
}

fn breakdown_text(o: &EvaluationOutcome) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "feasible  {}", if o.feasible() { "yes" } else { "no" });
    for (k, v) in o.cost.rows() {
        let _ = writeln!(s, "{:<16}{:>20}", k, format_money(v));
    }
    let _ = writeln!(s, "{:<16}{:>20}", "penalty", format_money(o.penalty));
    let _ = writeln!(s, "{:<16}{:>20}", "objective", format_money(o.j));
    for (t, r) in o.snapshot.reserves_mw.iter().enumerate() {
        let l = o.snapshot.lolp.get(t).map_or("-".to_string(), |p| format!("{:.4e}", p));
        let _ = writeln!(s, "stage {} reserve {:.1} MW  LOLP {}", t + 1, r, l);
    }
    for v in &o.violations {
        let _ = writeln!(s, "violation: {} ({:.4})", v.constraint, v.magnitude);
    }
    s
}

pub fn cmd_evaluate(a: &EvaluateArgs) -> crate::Result<i32> {
    let l = load_inputs(&a.inputs)?;
    let kind = match resolve_planner(a.planner.as_deref(), &l.cfg)? {
        Planner::Kind(k) => k,
        Planner::InteriorPoint => PlannerKind::DcTnep,
    };
    let stages = if kind.is_static() { 1 } else { l.cfg.stages };
    let plan = load_plan(&a.plan, &l.case, stages)?;
    let dispatch = a.dispatch.as_deref().map(|d| load_dispatch(d, &l.case)).transpose()?;
    let o = evaluate_for(kind, &l.case, &l.cfg, &plan, a.security == Security::N1, dispatch.as_ref())?;
    println!("planner   {}", kind);
    print!("{}", breakdown_text(&o));
    print!(
        "{}",
        Provenance {
            case_hash: l.case_hash,
            config_hash: l.cfg_hash,
            seed: l.cfg.seed(),
        }
        .footer()
    );
    Ok(outcome_code(o.feasible()))
}

pub fn cmd_flow(a: &FlowArgs) -> crate::Result<i32> {
    let l = load_inputs(&a.inputs)?;
    let c = &l.case;
    let mut out = String::new();
    let mut ok = true;
    match a.model {
        FlowModel::Ac => {
            let plan = match &a.plan {
                Some(p) => load_plan(p, c, 1)?,
                None => ExpansionPlan::empty(c, 1),
            };
            let topo = Topology::with_additions(c, &plan.total_lines());
            let sc = match &a.scenario {
                Some(name) => c
                    .scenarios
                    .iter()
                    .find(|s| &s.name == name)
                    .cloned()
                    .ok_or_else(|| Error::Config(format!("no scenario `{}` in the case", name)))?,
                None => c.peak_scenario(),
            };
            let p_gen = scenario_generation(c, &sc)?;
            let shunts = shunts_per_bus(c, &plan.var_mvar);
            let input = AcInput {
                p_gen: &p_gen,
                scenario: &sc,
                shunt_mvar: &shunts,
            };
            let sol = ac_flow_fdlf(c, &topo, input, &AcOptions::default())?;
            ok = sol.converged;
            let _ = writeln!(
                out,
                "scenario {} (x{}), {} after {} iterations, mismatch {:.1e} pu",
                sc.name,
                sc.scale,
                if sol.converged { "converged" } else { "not converged" },
                sol.iterations,
                sol.mismatch
            );
            out.push_str("bus  V (pu)  angle (deg)  Pgen (pu)  Qgen (pu)\n");
            for (i, b) in c.buses.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{:<4} {:.4}  {:>10.3}  {:>9.4}  {:>9.4}",
                    b.id,
                    sol.v[i],
                    sol.theta[i].to_degrees(),
                    sol.p_gen[i],
                    sol.q_gen[i]
                );
            }
            out.push_str("from to  circuits  P (pu)   Q (pu)   S (pu)  limit\n");
            for f in branch_apparent_flows(c, &sol, &topo) {
                let _ = writeln!(
                    out,
                    "{:<4} {:<3} {:>8}  {:>7.4}  {:>7.4}  {:>6.4}  {:.4}",
                    f.from,
                    f.to,
                    topo.groups[f.group].count,
                    f.p_from,
                    f.q_from,
                    f.s_max(),
                    f.limit
                );
            }
        }
        FlowModel::Dc => {
            let plan = match &a.plan {
                Some(p) => load_plan(p, c, l.cfg.stages)?,
                None => ExpansionPlan::empty(c, l.cfg.stages),
            };
            let dispatch = a.dispatch.as_deref().map(|d| load_dispatch(d, c)).transpose()?;
            let spec = PlannerSpec::new(PlannerKind::TcGep, &l.cfg, false)?;
            let mut ctx = Context::new(c, &l.cfg, plan.stages(), spec.constraints());
            if let Some(d) = &dispatch {
                ctx = ctx.with_dispatch(d);
            }
            let o = evaluate_plan(&ctx, &plan)?;
            out.push_str("stage from to  circuits  flow (pu)  limit\n");
            for f in &o.snapshot.flows {
                let over = f.flow.abs() > f.limit + 1e-9;
                ok &= !over;
                let _ = writeln!(
                    out,
                    "{:<5} {:<4} {:<3} {:>8}  {:>9.4}  {:.4}{}",
                    f.stage,
                    f.from,
                    f.to,
                    f.circuits,
                    f.flow,
                    f.limit,
                    if over { "  over" } else { "" }
                );
            }
        }
    }
    print!("{}", out);
    print!(
        "{}",
        Provenance {
            case_hash: l.case_hash,
            config_hash: l.cfg_hash,
            seed: l.cfg.seed(),
        }
        .footer()
    );
    Ok(outcome_code(ok))
}

pub fn cmd_lolp(a: &LolpArgs) -> crate::Result<i32> {
    let l = load_inputs(&a.inputs)?;
    let c = &l.case;
    let plan = match &a.plan {
        Some(p) => load_plan(p, c, l.cfg.stages)?,
        None => ExpansionPlan::empty(c, l.cfg.stages),
    };
    let seed = a.seed.unwrap_or_else(|| l.cfg.seed());
    println!("seed {}", seed);
    println!("stage  peak MW  installed MW  LOLP");
    let mut ok = true;
    for t in 1..=plan.stages() {
        let groups = unit_groups(c, &plan, t);
        // Fails when the stage cannot be supplied at all.
        let _ = dispatch_groups(c, &groups, 0.0)?;
        let m = OutageModel::from_groups(&groups);
        let d = stage_demand(c, t);
        let p = lolp(&m, d);
        ok &= p <= l.cfg.lolp_max;
        let mut line = format!("{:<6} {:>8.1}  {:>12.1}  {:.6e}", t, d, m.installed_mw(), p);
        if let Some(n) = a.mc {
            let (est, se) = lolp_monte_carlo(&m, d, n, seed.wrapping_add(t as u64));
            let _ = write!(line, "  mc {:.6e} ± {:.1e}", est, se);
        }
        println!("{}", line);
    }
    print!(
        "{}",
        Provenance {
            case_hash: l.case_hash,
            config_hash: l.cfg_hash,
            seed,
        }
        .footer()
    );
    Ok(outcome_code(ok))
}

pub fn cmd_reproduce(a: &ReproduceArgs) -> crate::Result<i32> {
    if !SUITES.contains(&a.suite.as_str()) {
        eprintln!("unknown suite `{}`; valid suites: {}", a.suite, SUITES.join(", "));
        return Ok(EXIT_INPUT);
    }
    let budget = if a.quick { Budget::quick() } else { Budget::default() };
    let run = run_suite(&a.suite, &budget)?;
    print!("{}", format_table(&run.checks));
    print!(
        "{}",
        Provenance {
            case_hash: "bundled".into(),
            config_hash: "bundled".into(),
            seed: 0,
        }
        .footer()
    );
    Ok(if run.passed() { EXIT_OK } else { EXIT_INFEASIBLE })
}

pub fn cmd_validate(a: &ValidateArgs) -> crate::Result<i32> {
    let (case, hash) = load_case_hashed(&a.case)?;
    let problems = validate_case(&case);
    println!(
        "case {}: {} buses, {} branches, {} line candidates, {} generation candidates",
        case.name,
        case.buses.len(),
        case.branches.len(),
        case.line_candidates.len(),
        case.gen_candidates.len()
    );
    let mut cfg_hash = String::from("-");
    let mut stages = 1;
    if let Some(spec) = &a.config {
        let cfg = load_inputs(&Inputs {
            case: a.case.clone(),
            config: Some(spec.clone()),
        })?;
        stages = cfg.cfg.stages;
        cfg_hash = cfg.cfg_hash;
        println!("config ok");
    }
    if let Some(p) = &a.plan {
        let plan = load_plan(p, &case, stages)?;
        let bounds = plan.bound_violations(&case);
        for (what, _) in &bounds {
            println!("plan: {}", what);
        }
        println!("plan ok: {} stages", plan.stages());
    }
    for p in &problems {
        println!("problem: {}", p);
    }
    print!(
        "{}",
        Provenance {
            case_hash: hash,
            config_hash: cfg_hash,
            seed: 0,
        }
        .footer()
    );
    Ok(if problems.is_empty() { EXIT_OK } else { EXIT_INPUT })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), EXIT_INPUT);
        assert_eq!(exit_code(&Error::Infeasible("x".into())), EXIT_INFEASIBLE);
        assert_eq!(exit_code(&Error::Numerical("x".into())), EXIT_INTERNAL);
    }

    #[test]
    fn unknown_planner_is_a_usage_error() {
        let cfg = RunConfig::default();
        assert!(matches!(resolve_planner(Some("nope"), &cfg), Err(Error::Config(_))));
        assert!(matches!(resolve_planner(Some("ip-tnep"), &cfg), Ok(Planner::InteriorPoint)));
        assert!(resolve_planner(None, &cfg).is_err());
    }

    #[test]
    fn parse_solve_flags() {
        let cli = Cli::try_parse_from([
            "gridplan", "solve", "--case", "garver6", "--planner", "ac-tnep", "--seed", "7", "--security", "n-1",
        ])
        .unwrap();
        match cli.command {
            Command::Solve(a) => {
                assert_eq!(a.seed, Some(7));
                assert_eq!(a.security, Security::N1);
                assert!(!a.force);
            }
            _ => panic!(),
        }
    }
}
