use super::{Constraints, Context, EvaluationOutcome, FlowRecord, Snapshot, Violation};
use crate::case_io::RunConfig;
use crate::economics::{dispatch_groups, line_investment, loss_cost, unit_groups, var_install_cost, CostBreakdown};
use crate::error::Result;
use crate::model::{Case, ExpansionPlan, LoadScenario, Topology};
use crate::powerflow::{ac_flow_fdlf, ac_problems, branch_apparent_flows, n1_screen_with, AcInput, AcOptions};

const TOL: f64 = 1e-9;

/// Load scenarios to study; a case without any is studied at its base load
/// for a full year.
pub fn study_scenarios(case: &Case) -> Vec<LoadScenario> {
    if case.scenarios.is_empty() {
        vec![case.peak_scenario()]
    } else {
        case.scenarios.clone()
    }
}

/// Scheduled real generation per bus (pu) for a scenario, from the
/// existing plant dispatched against the scenario's total load.
pub fn scenario_generation(case: &Case, scenario: &LoadScenario) -> Result<Vec<f64>> {
    let empty = ExpansionPlan::empty(case, 1);
    let groups = unit_groups(case, &empty, 1);
    let demand = case.total_demand_mw() * scenario.scale;
    let r = dispatch_groups(case, &groups, demand)?;
    let mut p = vec![0.0; case.buses.len()];
    for (g, &mw) in groups.iter().zip(&r.p) {
        if let Some(i) = case.bus_index(g.bus) {
            p[i] += mw / case.base_mva;
        }
    }
    Ok(p)
}

/// Shunt rating per bus (MVAr) from a plan's reactive placements.
pub fn shunts_per_bus(case: &Case, var_mvar: &[u32]) -> Vec<f64> {
    let mut s = vec![0.0; case.buses.len()];
    for (v, &q) in case.var_candidates.iter().zip(var_mvar) {
        if let Some(i) = case.bus_index(v.bus) {
            s[i] += q as f64;
        }
    }
    s
}

/// AC feasibility of one topology over every load scenario: convergence,
/// apparent flow limits and the voltage band, plus the N-1 screen at the
/// peak scenario when `security` is set. Generator reactive limits act
/// inside the load flow (PV buses switch to PQ); the slack's own reactive
/// output is left free. Also returns the yearly loss energy and the peak
/// operating point.
pub fn ac_operating_checks(case: &Case, topo: &Topology, shunt_mvar: &[f64], security: bool) -> (Vec<Violation>, Snapshot) {
    let opts = AcOptions::default();
    let mut vio = Vec::new();
    let mut snap = Snapshot::default();
    let peak = case.peak_scenario();
    for sc in study_scenarios(case) {
        let p_gen = match scenario_generation(case, &sc) {
            Ok(p) => p,
            Err(e) => {
                vio.push(Violation::new(format!("{}: {}", sc.name, e), 1.0));
                continue;
            }
        };
        let input = AcInput {
            p_gen: &p_gen,
            scenario: &sc,
            shunt_mvar,
        };
        let sol = match ac_flow_fdlf(case, topo, input, &opts) {
            Ok(s) => s,
            Err(e) => {
                vio.push(Violation::new(format!("{}: {}", sc.name, e), 1.0));
                return (vio, snap);
            }
        };
        if !sol.converged {
            vio.push(Violation::new(format!("{}: load flow did not converge", sc.name), 1.0));
            continue;
        }
        let is_peak = sc.name == peak.name;
        for f in branch_apparent_flows(case, &sol, topo) {
            let s = f.s_max();
            if s > f.limit + TOL {
                vio.push(Violation::new(
                    format!("{}: line {}-{} at {:.4} pu > {:.4}", sc.name, f.from, f.to, s, f.limit),
                    (s - f.limit) / f.limit,
                ));
            }
            if is_peak {
                snap.flows.push(FlowRecord {
                    stage: 1,
                    from: f.from,
                    to: f.to,
                    circuits: topo.groups[f.group].count,
                    flow: s,
                    limit: f.limit,
                });
            }
        }
        let band = (case.v_max - case.v_min).max(1e-6);
        for (b, &v) in case.buses.iter().zip(&sol.v) {
            if v < case.v_min - TOL || v > case.v_max + TOL {
                vio.push(Violation::new(
                    format!("{}: bus {} voltage {:.4} pu", sc.name, b.id, v),
                    (case.v_min - v).max(v - case.v_max) / band,
                ));
            }
        }
        snap.loss_mwh += sol.losses() * case.base_mva * sc.duration_hours;
        if is_peak {
            snap.voltages = case.buses.iter().map(|b| b.id).zip(sol.v.iter().copied()).collect();
            if security {
                let (cont, _) = n1_screen_with(case, topo, |t| ac_problems(case, t, input, &opts));
                for c in cont {
                    vio.push(Violation::new(
                        format!("outage of {}-{}: {}", c.outage.from, c.outage.to, c.problems.join("; ")),
                        1.0,
                    ));
                }
            }
        }
    }
    (vio, snap)
}

fn bound_violations(plan: &ExpansionPlan, case: &Case) -> Vec<Violation> {
    plan.bound_violations(case)
        .into_iter()
        .map(|(c, m)| Violation::new(c, m))
        .collect()
}

/// AC transmission expansion: line investment plus penalties over all
/// scenarios. Reactive placements carried by the plan are in service but
/// not charged here.
pub fn evaluate_ac_tnep_with(ctx: &Context<'_>, plan: &ExpansionPlan) -> Result<EvaluationOutcome> {
    let case = ctx.case;
    plan.check_shape(case)?;
    let mut vio = bound_violations(plan, case);
    let topo = Topology::with_additions(case, &plan.total_lines());
    let shunts = shunts_per_bus(case, &plan.var_mvar);
    let (ac, snap) = ac_operating_checks(case, &topo, &shunts, ctx.constraints.security);
    vio.extend(ac);
    let cost = CostBreakdown {
        investment_line: line_investment(plan, case, &ctx.cm).iter().sum(),
        ..CostBreakdown::default()
    };
    let total = cost.total();
    Ok(EvaluationOutcome::assemble(cost, total, vio, ctx.weight, snap))
}

pub fn evaluate_ac_tnep(plan: &ExpansionPlan, case: &Case, cfg: &RunConfig, security: bool) -> Result<EvaluationOutcome> {
    let c = Constraints { security, ..Constraints::AC };
    evaluate_ac_tnep_with(&Context::new(case, cfg, plan.stages().max(1), c), plan)
}

/// Reactive power planning on the topology the plan's lines define:
/// installation cost plus the yearly cost of losses plus penalties.
pub fn evaluate_rpp_with(ctx: &Context<'_>, plan: &ExpansionPlan) -> Result<EvaluationOutcome> {
    let case = ctx.case;
    plan.check_shape(case)?;
    let mut vio = bound_violations(plan, case);
    let topo = Topology::with_additions(case, &plan.total_lines());
    let shunts = shunts_per_bus(case, &plan.var_mvar);
    let (ac, snap) = ac_operating_checks(case, &topo, &shunts, ctx.constraints.security);
    vio.extend(ac);
    let (fixed, variable) = var_install_cost(case, &plan.var_mvar);
    let cost = CostBreakdown {
        var_fixed: fixed,
        var_variable: variable,
        loss_cost: loss_cost(case, &[(snap.loss_mwh, 1.0)]),
        ..CostBreakdown::default()
    };
    let total = cost.total();
    Ok(EvaluationOutcome::assemble(cost, total, vio, ctx.weight, snap))
}

pub fn evaluate_rpp(plan: &ExpansionPlan, case: &Case, cfg: &RunConfig, security: bool) -> Result<EvaluationOutcome> {
    let c = Constraints { security, ..Constraints::AC };
    evaluate_rpp_with(&Context::new(case, cfg, 1, c), plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case_io::{bundled_case, bundled_config, bundled_plan};

    #[test]
    fn table_plan_cost() {
        let c = bundled_case("garver6");
        let cfg = bundled_config("thesis-ch4");
        let p = bundled_plan("garver-actnep", &c, 1);
        let o = evaluate_ac_tnep(&p, &c, &cfg, false).unwrap();
        assert_eq!(o.cost.investment_line, 311e6);
    }

    #[test]
    fn oversized_capacitor_is_a_violation() {
        let c = bundled_case("garver6");
        let cfg = bundled_config("thesis-ch5");
        let mut p = bundled_plan("garver-integrated", &c, 1);
        p.var_mvar = vec![50, 0, 0];
        let o = evaluate_rpp(&p, &c, &cfg, false).unwrap();
        assert!(o.violations.iter().any(|v| v.constraint.contains("size")));
    }

    #[test]
    fn base_network_is_not_enough() {
        let c = bundled_case("garver6");
        let cfg = bundled_config("thesis-ch4");
        let o = evaluate_ac_tnep(&ExpansionPlan::empty(&c, 1), &c, &cfg, false).unwrap();
        assert!(!o.feasible());
        assert_eq!(o.cost.total(), 0.0);
    }
}
