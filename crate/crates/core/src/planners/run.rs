use super::*;
use crate::metaheuristics::{ga_run, pso_run, GaOutcome, PlanEncoding};
use crate::model::ExpansionPlan;
use crate::report::{LoopRow, Phase, SolverReport};

/// Independent sub-seed for the `k`-th search of a run (splitmix64).
pub fn sub_seed(seed: u64, k: u64) -> u64 {
    let mut z = seed ^ k.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

type PlanEval<'e> = dyn Fn(&ExpansionPlan) -> Result<EvaluationOutcome> + Sync + 'e;

struct GaSearch {
    plan: ExpansionPlan,
    outcome: EvaluationOutcome,
    ga: GaOutcome,
}

/// Run the GA over `enc`, completing each decoded plan with `fill` before
/// evaluation.
fn ga_search(
    case: &Case,
    cfg: &RunConfig,
    enc: &PlanEncoding,
    fill: &(dyn Fn(&mut ExpansionPlan) + Sync),
    eval: &PlanEval<'_>,
    seed: u64,
    incumbents: &[ExpansionPlan],
) -> Result<GaSearch> {
    let decode = |bits: &[bool]| {
        let mut p = enc.decode(case, bits);
        fill(&mut p);
        p
    };
    let seeds: Vec<Vec<bool>> = incumbents.iter().map(|p| enc.encode(p)).collect();
    let ga = ga_run(
        enc.len(),
        |bits: &[bool]| eval(&decode(bits)).map(|o| o.scored()).map_err(|e| e.to_string()),
        &cfg.ga,
        seed,
        &seeds,
    );
    let mut ga = ga;
    let fits = |p: &ExpansionPlan| decode(&enc.encode(p)) == *p;
    let (plan, outcome, extra) = polish(decode(&ga.best), eval, enc.gen_bits > 0, enc.line_bits > 0, &fits)?;
    ga.evaluations += extra;
    Ok(GaSearch { plan, outcome, ga })
}

/// Local clean-up of a GA incumbent. Tries single-step moves (one circuit
/// or unit fewer or more, or one unit moved to another plant in the same
/// stage) and keeps each that lowers the objective, until none does. The
/// bit-string search seldom finds these on its own since each takes several
/// coordinated flips, so e.g. a redundant circuit tends to survive. Only
/// the searched parts move, and only to plans the encoding can express.
/// Returns the extra evaluations.
fn polish(
    mut plan: ExpansionPlan,
    eval: &PlanEval<'_>,
    gen: bool,
    lines: bool,
    fits: &dyn Fn(&ExpansionPlan) -> bool,
) -> Result<(ExpansionPlan, EvaluationOutcome, usize)> {
    let mut best = eval(&plan)?;
    let mut evaluations = 1;
    let mut try_move = |plan: &mut ExpansionPlan, apply: &dyn Fn(&mut ExpansionPlan), undo: &dyn Fn(&mut ExpansionPlan)| {
        apply(plan);
        if !fits(plan) {
            undo(plan);
            return Ok(false);
        }
        evaluations += 1;
        match eval(plan) {
            Ok(o) if o.j < best.j => {
                best = o;
                Ok(true)
            }
            Ok(_) => {
                undo(plan);
                Ok(false)
            }
            Err(e) => Err(e),
        }
    };
    loop {
        let mut improved = false;
        for t in 0..if lines { plan.lines.len() } else { 0 } {
            for k in 0..plan.lines[t].len() {
                if plan.lines[t][k] > 0 {
                    improved |= try_move(&mut plan, &|p| p.lines[t][k] -= 1, &|p| p.lines[t][k] += 1)?;
                }
                improved |= try_move(&mut plan, &|p| p.lines[t][k] += 1, &|p| p.lines[t][k] -= 1)?;
            }
        }
        for t in 0..if gen { plan.gen.len() } else { 0 } {
            let n = plan.gen[t].len();
            for a in 0..n {
                if plan.gen[t][a] > 0 {
                    improved |= try_move(&mut plan, &|p| p.gen[t][a] -= 1, &|p| p.gen[t][a] += 1)?;
                }
                improved |= try_move(&mut plan, &|p| p.gen[t][a] += 1, &|p| p.gen[t][a] -= 1)?;
                for b in 0..n {
                    if a != b && plan.gen[t][a] > 0 {
                        improved |= try_move(
                            &mut plan,
                            &|p| {
                                p.gen[t][a] -= 1;
                                p.gen[t][b] += 1
                            },
                            &|p| {
                                p.gen[t][a] += 1;
                                p.gen[t][b] -= 1
                            },
                        )?;
                    }
                }
            }
        }
        if !improved {
            return Ok((plan, best, evaluations));
        }
    }
}

fn phase(name: &str, ga: &GaOutcome) -> Phase {
    Phase {
        name: name.to_string(),
        rows: ga.trace.clone(),
    }
}

/// Solve one planning problem with the engine that suits it.
pub fn run_planner(spec: &PlannerSpec, case: &Case, cfg: &RunConfig, seed: u64) -> Result<SolverReport> {
    cfg.validate()?;
    let handling = cfg.limit_handling;
    let no_fill = |_: &mut ExpansionPlan| {};
    let ctx = Context::new(case, cfg, spec.stages, spec.constraints());
    let report = |name: &str, s: GaSearch| SolverReport {
        planner: spec.kind.as_str().to_string(),
        seed,
        plan: s.plan,
        outcome: s.outcome,
        phases: vec![phase(name, &s.ga)],
        loops: Vec::new(),
        ip_trace: Vec::new(),
        evaluations: s.ga.evaluations,
        failures: s.ga.failures,
        params: cfg.canonical(),
        notes: Vec::new(),
    };
    match spec.kind {
        PlannerKind::Gep | PlannerKind::TcGep => {
            let enc = PlanEncoding::generation(case, spec.stages, handling);
            let s = ga_search(case, cfg, &enc, &no_fill, &|p| evaluate_plan(&ctx, p), seed, &[])?;
            Ok(report("ga", s))
        }
        PlannerKind::CompositeStatic | PlannerKind::CompositeDynamic => {
            let enc = PlanEncoding::composite(case, spec.stages, handling);
            let s = ga_search(case, cfg, &enc, &no_fill, &|p| evaluate_plan(&ctx, p), seed, &[])?;
            Ok(report("ga", s))
        }
        PlannerKind::DcTnep => {
            let enc = PlanEncoding::transmission(case, handling);
            let s = ga_search(case, cfg, &enc, &no_fill, &|p| evaluate_plan(&ctx, p), seed, &[])?;
            Ok(report("ga", s))
        }
        PlannerKind::AcTnep | PlannerKind::AcTnepN1 => {
            let enc = PlanEncoding::transmission(case, handling);
            let s = ga_search(case, cfg, &enc, &no_fill, &|p| evaluate_ac_tnep_with(&ctx, p), seed, &[])?;
            Ok(report("ga", s))
        }
        PlannerKind::Rpp => {
            let base = ExpansionPlan::empty(case, 1);
            let (plan, outcome, pso) = rpp_search(&ctx, &base, seed)?;
            Ok(SolverReport {
                planner: spec.kind.as_str().to_string(),
                seed,
                plan,
                outcome,
                phases: vec![Phase {
                    name: "pso".into(),
                    rows: pso.trace,
                }],
                loops: Vec::new(),
                ip_trace: Vec::new(),
                evaluations: pso.evaluations,
                failures: pso.failures,
                params: cfg.canonical(),
                notes: Vec::new(),
            })
        }
        PlannerKind::Integrated => run_integrated(case, cfg, seed, spec.security, cfg.integrated.max_loops),
    }
}

struct RppRun {
    trace: Vec<crate::metaheuristics::TraceRow>,
    failures: usize,
    evaluations: usize,
}

/// Size the reactive sources on the topology of `base` with PSO.
fn rpp_search(ctx: &Context<'_>, base: &ExpansionPlan, seed: u64) -> Result<(ExpansionPlan, EvaluationOutcome, RppRun)> {
    let case = ctx.case;
    let bounds: Vec<(f64, f64)> = case
        .var_candidates
        .iter()
        .map(|v| (v.q_min_mvar.ceil(), v.q_max_mvar.floor()))
        .collect();
    let integer = vec![true; bounds.len()];
    let with_vars = |x: &[f64]| {
        let mut p = base.clone();
        p.var_mvar = x.iter().map(|&q| q.max(0.0).round() as u32).collect();
        p
    };
    let start: Vec<f64> = base.var_mvar.iter().map(|&q| q as f64).collect();
    let out = pso_run(
        &bounds,
        &integer,
        |x: &[f64]| {
            evaluate_rpp_with(ctx, &with_vars(x))
                .map(|o| o.scored())
                .map_err(|e| e.to_string())
        },
        &ctx.cfg.pso,
        seed,
        &[start],
    );
    let plan = with_vars(&out.best);
    let outcome = evaluate_rpp_with(ctx, &plan)?;
    let evaluations = (ctx.cfg.pso.iterations + 1) * ctx.cfg.pso.population.max(1);
    Ok((
        plan,
        outcome,
        RppRun {
            trace: out.trace,
            failures: out.failures,
            evaluations,
        },
    ))
}

/// Iterative transmission and reactive planning. A DC expansion seeds
/// the first AC expansion; each loop then expands the network given the
/// current reactive placements and re-sizes the reactive sources on the
/// new network. A loop result is kept only if it lowers the combined cost,
/// and the loop stops once the relative gain drops below the configured
/// tolerance. With `max_loops = 1` this is the separate approach: one AC
/// expansion followed by one reactive plan.
pub fn run_integrated(case: &Case, cfg: &RunConfig, seed: u64, security: bool, max_loops: usize) -> Result<SolverReport> {
    cfg.validate()?;
    let handling = cfg.limit_handling;
    let enc = PlanEncoding::transmission(case, handling);
    let no_fill = |_: &mut ExpansionPlan| {};
    let dc_ctx = Context::new(case, cfg, 1, Constraints::NETWORK_ONLY);
    let dc = ga_search(case, cfg, &enc, &no_fill, &|p| evaluate_plan(&dc_ctx, p), sub_seed(seed, 0), &[])?;

    let ac_ctx = Context::new(case, cfg, 1, Constraints { security, ..Constraints::AC });
    let mut phases = vec![phase("dc-tnep", &dc.ga)];
    let mut evaluations = dc.ga.evaluations;
    let mut failures = dc.ga.failures;
    let mut loops: Vec<LoopRow> = Vec::new();
    let mut vars = vec![0u32; case.var_candidates.len()];
    let mut incumbent = dc.plan.clone();
    let mut best: Option<(ExpansionPlan, EvaluationOutcome, f64)> = None;

    for it in 1..=max_loops.max(1) {
        let v = vars.clone();
        let fill = move |p: &mut ExpansionPlan| p.var_mvar.clone_from(&v);
        let tnep = ga_search(
            case,
            cfg,
            &enc,
            &fill,
            &|p| evaluate_ac_tnep_with(&ac_ctx, p),
            sub_seed(seed, 2 * it as u64 - 1),
            std::slice::from_ref(&incumbent),
        )?;
        phases.push(phase(&format!("ac-tnep-{}", it), &tnep.ga));
        evaluations += tnep.ga.evaluations;
        failures += tnep.ga.failures;

        let (plan, rpp, run) = rpp_search(&ac_ctx, &tnep.plan, sub_seed(seed, 2 * it as u64))?;
        phases.push(Phase {
            name: format!("rpp-{}", it),
            rows: run.trace,
        });
        evaluations += run.evaluations;
        failures += run.failures;

        let tnep_cost = tnep.outcome.cost.total();
        let combined = tnep_cost + rpp.j;
        let prev = best.as_ref().map(|b| b.2);
        let accepted = prev.map_or(true, |b| combined < b);
        if accepted {
            let mut outcome = rpp.clone();
            outcome.cost.investment_line = tnep.outcome.cost.investment_line;
            outcome.j = combined;
            best = Some((plan.clone(), outcome, combined));
            vars.clone_from(&plan.var_mvar);
            incumbent = plan;
        }
        let best_combined = best.as_ref().map_or(combined, |b| b.2);
        loops.push(LoopRow {
            iteration: it,
            tnep_cost: tnep.outcome.j,
            rpp_cost: rpp.j,
            combined,
            accepted,
            best_combined,
        });
        let gain = prev.map(|p| (p - best_combined) / p);
        if matches!(gain, Some(g) if g < cfg.integrated.rel_tolerance) {
            break;
        }
    }

    let (plan, outcome, _) = best.expect("at least one loop runs");
    Ok(SolverReport {
        planner: PlannerKind::Integrated.as_str().to_string(),
        seed,
        plan,
        outcome,
        phases,
        loops,
        ip_trace: Vec::new(),
        evaluations,
        failures,
        params: cfg.canonical(),
        notes: vec![format!("security: {}", if security { "n-1" } else { "none" })],
    })
}

/// Generation first, then transmission for the fixed generation plan: the
/// sequential alternative to the composite planner.
pub fn run_separate_composite(case: &Case, cfg: &RunConfig, stages: usize, seed: u64) -> Result<SolverReport> {
    cfg.validate()?;
    let handling = cfg.limit_handling;
    let no_fill = |_: &mut ExpansionPlan| {};
    let gep_ctx = Context::new(case, cfg, stages, Constraints::GENERATION);
    let enc = PlanEncoding::generation(case, stages, handling);
    let gep = ga_search(case, cfg, &enc, &no_fill, &|p| evaluate_plan(&gep_ctx, p), sub_seed(seed, 0), &[])?;

    let net_ctx = Context::new(case, cfg, stages, Constraints::GENERATION.with_network());
    let lines = PlanEncoding::new(case, stages, 0, 5, handling);
    let gen = gep.plan.gen.clone();
    let fill = move |p: &mut ExpansionPlan| p.gen.clone_from(&gen);
    let tnep = ga_search(case, cfg, &lines, &fill, &|p| evaluate_plan(&net_ctx, p), sub_seed(seed, 1), &[])?;

    Ok(SolverReport {
        planner: "separate".into(),
        seed,
        plan: tnep.plan,
        outcome: tnep.outcome,
        phases: vec![phase("gep", &gep.ga), phase("tnep", &tnep.ga)],
        loops: Vec::new(),
        ip_trace: Vec::new(),
        evaluations: gep.ga.evaluations + tnep.ga.evaluations,
        failures: gep.ga.failures + tnep.ga.failures,
        params: cfg.canonical(),
        notes: Vec::new(),
    })
}

/// Cost and check `plan` the way planner `kind` scores its candidates.
/// Integrated plans add the line cost of the AC check to the reactive
/// evaluation. A recorded dispatch replaces the merit order where it applies.
pub fn evaluate_for(
    kind: PlannerKind,
    case: &Case,
    cfg: &RunConfig,
    plan: &ExpansionPlan,
    security: bool,
    dispatch: Option<&RecordedDispatch>,
) -> Result<EvaluationOutcome> {
    let spec = PlannerSpec::new(kind, cfg, security)?;
    let stages = if kind.is_static() { 1 } else { plan.stages().max(1) };
    let mut ctx = Context::new(case, cfg, stages, spec.constraints());
    if let Some(d) = dispatch {
        ctx = ctx.with_dispatch(d);
    }
    match kind {
        PlannerKind::AcTnep | PlannerKind::AcTnepN1 => evaluate_ac_tnep_with(&ctx, plan),
        PlannerKind::Rpp => evaluate_rpp_with(&ctx, plan),
        PlannerKind::Integrated => {
            let mut o = evaluate_rpp_with(&ctx, plan)?;
            let lines = evaluate_ac_tnep_with(&ctx, plan)?;
            o.cost.investment_line = lines.cost.investment_line;
            o.j += lines.cost.investment_line;
            Ok(o)
        }
        _ => evaluate_plan(&ctx, plan),
    }
}

