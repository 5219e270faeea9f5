//! Primal-dual interior-point solver for DC transmission expansion.
//!
//! Build decisions are relaxed through a sigmoid of a bounded argument,
//! flows carry a quadratic loss term, and the barrier problem is followed
//! with pure Newton steps, fraction-to-boundary step lengths and an
//! adaptive barrier. The relaxed solution is rounded into whole circuits,
//! repaired until the lossless DC check passes, and costed exactly.

mod nlp;
mod solver;

pub use nlp::*;
pub use solver::*;

use nalgebra::DVector;

use crate::case_io::RunConfig;
use crate::economics::{dispatch_groups, unit_groups};
use crate::error::{Error, Result};
use crate::model::{Case, ExpansionPlan};
use crate::planners::{evaluate_plan, stage_demand, Constraints, Context, EvaluationOutcome};
use crate::report::{IpTraceRow, SolverReport};

/// Net injection per bus (pu) at the stage-1 peak, dispatched the way the
/// DC evaluator does it.
pub fn peak_injections(case: &Case) -> Result<Vec<f64>> {
    let empty = ExpansionPlan::empty(case, 1);
    let groups = unit_groups(case, &empty, 1);
    let d = stage_demand(case, 1);
    let r = dispatch_groups(case, &groups, d)?;
    let total = case.total_demand_mw();
    let scale = if total > 0.0 { d / total } else { 0.0 };
    let mut net: Vec<f64> = case.buses.iter().map(|b| -b.p_demand_mw * scale / case.base_mva).collect();
    for (g, mw) in groups.iter().zip(&r.p) {
        if let Some(i) = case.bus_index(g.bus) {
            net[i] += mw / case.base_mva;
        }
    }
    Ok(net)
}

/// Everything an interior-point run produces.
#[derive(Debug, Clone)]
pub struct IpRun {
    pub report: SolverReport,
    pub converged: bool,
    pub iterations: usize,
    /// KKT residual norm at the final iterate.
    pub kkt: f64,
    /// Relaxed decision of every candidate copy.
    pub decisions: Vec<f64>,
    pub copies: Vec<CandidateCopy>,
    /// `Σ c · ED` at the final iterate, dollars.
    pub relaxed_cost: f64,
    /// Circuits added by the repair pass.
    pub repaired: usize,
}

/// Solve the relaxed problem, round it and verify the result.
pub fn ip_solve(case: &Case, cfg: &RunConfig) -> Result<IpRun> {
    cfg.validate()?;
    let opts = &cfg.ip;
    let net = peak_injections(case)?;
    let nlp = TnepNlp::new(case, &net, opts)?;

    // Flat angles; decision arguments at the lowest point the slack
    // initialization leaves consistent with the box.
    let mut x0 = DVector::zeros(nlp.n());
    for k in 0..nlp.copies.len() {
        x0[nlp.u_index(k)] = 0.25 * opts.u_max;
    }
    let mut it = IpIterate::start(&nlp, x0, opts.mu0, opts.beta0);
    let mut trace = Vec::new();
    let mut f_prev = nlp.f(&it.x);
    let mut converged = false;
    let mut k = 0;
    let mut kkt = kkt_residual(&it, &nlp, it.mu)?.norm;
    trace.push(IpTraceRow {
        k: 0,
        f: nlp.dollars(f_prev),
        mu: it.mu,
        beta: it.beta,
        rho: it.rho,
        kkt,
        alpha: 0.0,
    });
    while k < opts.max_iterations {
        k += 1;
        let (d, _) = regularized_step(&it, &nlp, it.mu)
            .map_err(|e| Error::Numerical(format!("iteration {}: {}", k, e)))?;
        let (ap, ad) = step_lengths(&it, &d, opts.gamma);
        apply_step(&mut it, &d, ap, ad);
        let f = nlp.f(&it.x);
        let dx = ap * d.x.amax();
        let df = (f - f_prev).abs();
        f_prev = f;
        let (mu, beta) = barrier_update(&it);
        // The gap alone can shrink long before the duals have caught up
        // with the primal move; keep the barrier in step with what is
        // still infeasible.
        let infeasible = kkt_residual(&it, &nlp, mu)?.infeasibility();
        it.mu = mu.max((opts.infeasibility_floor * infeasible).min(it.mu));
        it.beta = beta;
        kkt = kkt_residual(&it, &nlp, it.mu)?.norm;
        trace.push(IpTraceRow {
            k,
            f: nlp.dollars(f),
            mu: it.mu,
            beta: it.beta,
            rho: it.rho,
            kkt,
            alpha: ap,
        });
        if df < opts.eps1 && dx < opts.eps2 && it.mu < opts.eps_mu {
            converged = true;
            break;
        }
    }

    let decisions = nlp.decisions(&it.x);
    let ctx = Context::new(case, cfg, 1, Constraints::NETWORK_ONLY);
    let (plan, outcome, repaired) = round_and_repair(&ctx, &nlp.copies, &decisions, opts.round_threshold)?;
    let relaxed_cost = nlp.dollars(nlp.f(&it.x));
    let report = SolverReport {
        planner: "ip-tnep".into(),
        seed: 0,
        plan,
        outcome,
        phases: Vec::new(),
        loops: Vec::new(),
        ip_trace: trace,
        evaluations: k,
        failures: 0,
        params: cfg.canonical(),
        notes: vec![
            format!(
                "interior point {} after {} iterations (KKT {:.2e})",
                if converged { "converged" } else { "stopped" },
                k,
                kkt
            ),
            format!("relaxed cost {:.0}, repair added {} circuits", relaxed_cost, repaired),
        ],
    };
    Ok(IpRun {
        report,
        converged,
        iterations: k,
        kkt,
        decisions,
        copies: nlp.copies.clone(),
        relaxed_cost,
        repaired,
    })
}

/// Build every copy whose decision reaches `threshold`, then add the
/// highest remaining copies one at a time until the plan passes the
/// lossless DC check, then drop circuits (most expensive first) whose
/// removal keeps it passing. Corridor limits cap each corridor.
pub fn round_and_repair(
    ctx: &Context<'_>,
    copies: &[CandidateCopy],
    decisions: &[f64],
    threshold: f64,
) -> Result<(ExpansionPlan, EvaluationOutcome, usize)> {
    let case = ctx.case;
    let mut plan = ExpansionPlan::empty(case, 1);
    let mut pending: Vec<usize> = Vec::new();
    for (k, (c, &e)) in copies.iter().zip(decisions).enumerate() {
        if e >= threshold && plan.lines[0][c.corridor] < case.line_candidates[c.corridor].max_add {
            plan.lines[0][c.corridor] += 1;
        } else {
            pending.push(k);
        }
    }
    pending.sort_by(|&a, &b| decisions[b].total_cmp(&decisions[a]).then(a.cmp(&b)));
    let mut outcome = evaluate_plan(ctx, &plan)?;
    let mut repaired = 0;
    for k in pending {
        if outcome.feasible() {
            break;
        }
        let c = copies[k].corridor;
        if plan.lines[0][c] >= case.line_candidates[c].max_add {
            continue;
        }
        plan.lines[0][c] += 1;
        repaired += 1;
        outcome = evaluate_plan(ctx, &plan)?;
    }
    if outcome.feasible() {
        let mut order: Vec<usize> = (0..case.line_candidates.len()).collect();
        order.sort_by(|&a, &b| case.line_candidates[b].cost.total_cmp(&case.line_candidates[a].cost));
        for c in order {
            while plan.lines[0][c] > 0 {
                plan.lines[0][c] -= 1;
                let trial = evaluate_plan(ctx, &plan)?;
                if trial.feasible() {
                    outcome = trial;
                } else {
                    plan.lines[0][c] += 1;
                    break;
                }
            }
        }
    }
    Ok((plan, outcome, repaired))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case_io::{bundled_case, bundled_config, parse_case};

    #[test]
    fn uncongested_case_builds_nothing() {
        let c = parse_case(
            "[BASE] key value\nname ring\nmva 100\ndispatch participation\n\
             [BUS] id type v_set pd_mw\n1 slack 1.0 0\n2 load - 50\n3 load - 20\n\
             [BRANCH] from to r x capacity circuits\n1 2 0.01 0.1 2.0 1\n1 3 0.01 0.1 2.0 1\n3 2 0.01 0.1 2.0 1\n\
             [GEN_EXISTING] name bus units unit_mw\nG1 1 1 200\n\
             [LINE_CANDIDATE] from to r x capacity cost max_add\n1 2 0.01 0.1 2.0 1000000 2\n",
        )
        .unwrap();
        let cfg = RunConfig::default();
        let run = ip_solve(&c, &cfg).unwrap();
        assert!(run.converged, "{:?}", run.report.notes);
        assert!(run.decisions.iter().all(|&e| e < 1e-3), "{:?}", run.decisions);
        assert!(run.report.plan.is_empty());
        assert_eq!(run.report.outcome.cost.total(), 0.0);
    }

    #[test]
    fn garver_relaxation_rounds_to_a_feasible_plan() {
        let c = bundled_case("garver6");
        let cfg = bundled_config("thesis-ch4");
        let run = ip_solve(&c, &cfg).unwrap();
        assert!(run.report.feasible(), "{:?}", run.report.outcome.violations);
        let slack_ok = run.report.ip_trace.len() == run.iterations + 1;
        assert!(slack_ok);
    }
}
