//! Discounted cost accounting and lossless economic dispatch.
//!
//! Money is in dollars throughout. Generator fixed costs arrive in
//! $/kW-month and are annualized per MW (`× 12 × 1000`); operating costs
//! arrive in $/kWh and are converted per MWh (`× 1000`).

use serde::{Deserialize, Serialize};

use crate::case_io::RunConfig;
use crate::error::{Error, Result};
use crate::model::*;

/// Exponent used when discounting the investment made at stage `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DiscountConvention {
    /// `(1+d)^(-4(t-1))`: a two-year stage offset that is itself doubled.
    #[default]
    AsPrinted,
    /// `(1+d)^(-2(t-1))`: discounting by calendar year of the stage start.
    PerYear,
    /// `(1+d)^(-2t)`: investment paid at the end of its stage.
    EndOfStage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostModel {
    pub discount_rate: f64,
    pub stages: usize,
    pub stage_years: f64,
    pub convention: DiscountConvention,
    pub reserve_min: f64,
    pub reserve_max: f64,
    pub lolp_max: f64,
}

impl CostModel {
    pub fn new(case: &Case, cfg: &RunConfig, stages: usize) -> CostModel {
        CostModel {
            discount_rate: cfg.discount_rate,
            stages,
            stage_years: case.econ.stage_years,
            convention: cfg.discount_convention,
            reserve_min: cfg.reserve_min,
            reserve_max: cfg.reserve_max,
            lolp_max: cfg.lolp_max,
        }
    }

    /// Discount factor for investments made at stage `t` (1-based).
    pub fn investment_discount(&self, t: usize) -> f64 {
        let t = t as f64;
        let e = match self.convention {
            DiscountConvention::AsPrinted => 4.0 * (t - 1.0),
            DiscountConvention::PerYear => 2.0 * (t - 1.0),
            DiscountConvention::EndOfStage => 2.0 * t,
        };
        (1.0 + self.discount_rate).powf(-e)
    }

    /// Sum of the two yearly O&M discount factors of stage `t`.
    pub fn om_discount(&self, t: usize) -> f64 {
        let tp = 2.0 * (t as f64 - 1.0);
        (0..2)
            .map(|s| (1.0 + self.discount_rate).powf(-(2.5 + tp + s as f64)))
            .sum()
    }
}

/// Discounted generator investment per stage.
pub fn gen_investment(plan: &ExpansionPlan, case: &Case, cm: &CostModel) -> Vec<f64> {
    plan.gen
        .iter()
        .enumerate()
        .map(|(t, stage)| {
            let raw: f64 = stage
                .iter()
                .zip(&case.gen_candidates)
                .map(|(&u, c)| u as f64 * c.unit_investment())
                .sum();
            raw * cm.investment_discount(t + 1)
        })
        .collect()
}

/// Discounted line investment per stage.
pub fn line_investment(plan: &ExpansionPlan, case: &Case, cm: &CostModel) -> Vec<f64> {
    plan.lines
        .iter()
        .enumerate()
        .map(|(t, stage)| raw_line_cost(stage, case) * cm.investment_discount(t + 1))
        .collect()
}

/// Undiscounted `Σ c_l n_l`.
pub fn raw_line_cost(additions: &[u32], case: &Case) -> f64 {
    additions
        .iter()
        .zip(&case.line_candidates)
        .map(|(&n, l)| n as f64 * l.cost)
        .sum()
}

/// Present value of the residual worth of every added unit at the end of
/// the horizon.
pub fn salvage_value(plan: &ExpansionPlan, case: &Case, cm: &CostModel) -> f64 {
    let big_t = plan.gen.len() as f64;
    let disc = (1.0 + cm.discount_rate).powf(-2.0 * (big_t + 1.0));
    let mut s = 0.0;
    for (t, stage) in plan.gen.iter().enumerate() {
        let exp = 2.0 * (big_t - (t as f64 + 1.0) + 1.0);
        for (&u, c) in stage.iter().zip(&case.gen_candidates) {
            if u > 0 {
                s += c.unit_investment() * c.salvage_factor.powf(exp) * u as f64;
            }
        }
    }
    disc * s
}

/// One in-service group for O&M purposes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmEntry {
    pub capacity_mw: f64,
    /// $/kW-month
    pub fixed_cost: f64,
    /// $/kWh
    pub op_cost: f64,
    /// Energy per year, MWh.
    pub ees_mwh: f64,
}

/// O&M cost of stage `t`: the yearly fixed plus variable cost, charged
/// once for each of the stage's two years with mid-year discounting.
pub fn om_cost(entries: &[OmEntry], cm: &CostModel, t: usize) -> f64 {
    let yearly: f64 = entries
        .iter()
        .map(|e| e.capacity_mw * e.fixed_cost * 12.0 * 1000.0 + e.op_cost * 1000.0 * e.ees_mwh)
        .sum();
    cm.om_discount(t) * yearly
}

/// Energy served per unit over a stage, MWh. `dispatches` holds a
/// per-unit MW vector and a duration in hours for each scenario.
pub fn expected_energy_served(dispatches: &[(Vec<f64>, f64)], stage_years: f64) -> Vec<f64> {
    let n = dispatches.first().map_or(0, |d| d.0.len());
    let mut out = vec![0.0; n];
    for (p, hours) in dispatches {
        for (o, &pi) in out.iter_mut().zip(p) {
            *o += pi * hours * stage_years;
        }
    }
    out
}

/// Quadratic cost `a P² + b P + c` ($/h, P in MW) with output limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispatchUnit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub p_min: f64,
    pub p_max: f64,
}

impl DispatchUnit {
    fn output_at(&self, lambda: f64) -> f64 {
        ((lambda - self.b) / (2.0 * self.a)).clamp(self.p_min, self.p_max)
    }

    pub fn cost(&self, p: f64) -> f64 {
        self.a * p * p + self.b * p + self.c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispatchResult {
    pub p: Vec<f64>,
    pub total_cost: f64,
    pub lambda: f64,
}

/// Equal-incremental-cost dispatch. Every unit needs `a > 0`.
pub fn economic_dispatch(units: &[DispatchUnit], demand: f64) -> Result<DispatchResult> {
    if units.is_empty() {
        return Err(Error::Infeasible("no units to dispatch".into()));
    }
    if let Some(u) = units.iter().find(|u| !(u.a > 0.0) || u.p_min > u.p_max) {
        return Err(Error::Config(format!(
            "dispatch needs a strictly convex cost and ordered limits, got {:?}",
            u
        )));
    }
    let pmin: f64 = units.iter().map(|u| u.p_min).sum();
    let pmax: f64 = units.iter().map(|u| u.p_max).sum();
    let tol = 1e-9 * pmax.abs().max(1.0);
    if demand < pmin - tol || demand > pmax + tol {
        return Err(Error::Infeasible(format!(
            "demand {:.3} MW outside dispatchable range [{:.3}, {:.3}]",
            demand, pmin, pmax
        )));
    }
    let total = |l: f64| units.iter().map(|u| u.output_at(l)).sum::<f64>();
    let mut lo = units
        .iter()
        .map(|u| 2.0 * u.a * u.p_min + u.b)
        .fold(f64::INFINITY, f64::min);
    let mut hi = units
        .iter()
        .map(|u| 2.0 * u.a * u.p_max + u.b)
        .fold(f64::NEG_INFINITY, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid) < demand {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Solve the free units exactly for the bracketed active set.
    let mut lambda = 0.5 * (lo + hi);
    let (mut fixed, mut inv, mut off) = (0.0, 0.0, 0.0);
    for u in units {
        let p = u.output_at(lambda);
        if p > u.p_min && p < u.p_max {
            inv += 1.0 / (2.0 * u.a);
            off += u.b / (2.0 * u.a);
        } else {
            fixed += p;
        }
    }
    if inv > 0.0 {
        let exact = (demand - fixed + off) / inv;
        if (exact - lambda).abs() <= 1e-6 * lambda.abs().max(1.0) {
            lambda = exact;
        }
    }
    let mut p: Vec<f64> = units.iter().map(|u| u.output_at(lambda)).collect();
    // Spread any residual left by the bracket over units with headroom.
    let mut residual = demand - p.iter().sum::<f64>();
    for (pi, u) in p.iter_mut().zip(units) {
        if residual.abs() <= 0.0 {
            break;
        }
        let room = if residual > 0.0 { u.p_max - *pi } else { u.p_min - *pi };
        let step = if residual > 0.0 { residual.min(room) } else { residual.max(room) };
        *pi += step;
        residual -= step;
    }
    let total_cost = p.iter().zip(units).map(|(&pi, u)| u.cost(pi)).sum();
    Ok(DispatchResult {
        p,
        total_cost,
        lambda,
    })
}

/// A block of identical units in service at one stage.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitGroup {
    pub name: String,
    pub bus: usize,
    pub fuel: Option<Fuel>,
    pub count: u32,
    pub unit_mw: f64,
    pub pmin_mw: f64,
    pub for_rate: f64,
    pub op_cost: f64,
    pub fixed_cost: f64,
    pub share: Option<f64>,
    /// Candidate index, or `None` for existing plant.
    pub candidate: Option<usize>,
}

impl UnitGroup {
    pub fn capacity_mw(&self) -> f64 {
        self.count as f64 * self.unit_mw
    }
}

/// Existing plant plus every candidate built by the end of stage `t`.
pub fn unit_groups(case: &Case, plan: &ExpansionPlan, t: usize) -> Vec<UnitGroup> {
    let mut out: Vec<UnitGroup> = case
        .gen_existing
        .iter()
        .filter(|g| g.units > 0)
        .map(|g| UnitGroup {
            name: g.name.clone(),
            bus: g.bus,
            fuel: g.fuel,
            count: g.units,
            unit_mw: g.unit_mw,
            pmin_mw: g.pmin_mw,
            for_rate: g.for_rate,
            op_cost: g.op_cost,
            fixed_cost: g.fixed_cost,
            share: g.share,
            candidate: None,
        })
        .collect();
    let cum = if plan.gen.is_empty() {
        vec![0; case.gen_candidates.len()]
    } else {
        plan.cumulative_gen(t)
    };
    for (i, (c, &n)) in case.gen_candidates.iter().zip(&cum).enumerate() {
        if n > 0 {
            out.push(UnitGroup {
                name: c.name.clone(),
                bus: c.bus,
                fuel: Some(c.fuel),
                count: n,
                unit_mw: c.unit_mw,
                pmin_mw: 0.0,
                for_rate: c.for_rate,
                op_cost: c.op_cost,
                fixed_cost: c.fixed_cost,
                share: None,
                candidate: Some(i),
            });
        }
    }
    out
}

/// Quadratic cost of one unit of `fuel` under the case's interpretation.
pub fn fuel_curve(case: &Case, fuel: Fuel) -> Option<(f64, f64, f64)> {
    let q = case.econ.fuel_cost.get(&fuel)?;
    Some(match case.cost_interpretation {
        CostInterpretation::AsPrinted => (q.c2, q.c1, q.c0),
        CostInterpretation::Swapped => (q.c0, q.c1, q.c2),
    })
}

/// Dispatch groups against `demand_mw` using the case's dispatch mode.
/// Identical units in a group share output equally, so a group of `n`
/// units behaves like one unit with curvature `a / n`.
pub fn dispatch_groups(case: &Case, groups: &[UnitGroup], demand_mw: f64) -> Result<DispatchResult> {
    match case.dispatch {
        DispatchMode::Economic => {
            let mut units = Vec::with_capacity(groups.len());
            for g in groups {
                let fuel = g
                    .fuel
                    .ok_or_else(|| Error::Config(format!("{} has no fuel for economic dispatch", g.name)))?;
                let (a, b, c) = fuel_curve(case, fuel).ok_or_else(|| {
                    Error::Config(format!("no cost curve for fuel {}", fuel.as_str()))
                })?;
                let n = g.count as f64;
                units.push(DispatchUnit {
                    a: a / n,
                    b,
                    c: c * n,
                    p_min: g.pmin_mw * n,
                    p_max: g.capacity_mw(),
                });
            }
            economic_dispatch(&units, demand_mw)
        }
        DispatchMode::Participation => {
            let slack_bus = case.slack_index().map(|i| case.buses[i].id);
            let mut p: Vec<f64> = groups
                .iter()
                .map(|g| g.share.map_or(0.0, |s| s * demand_mw))
                .collect();
            let assigned: f64 = p.iter().sum();
            let rest = demand_mw - assigned;
            let free: Vec<usize> = (0..groups.len())
                .filter(|&i| groups[i].share.is_none())
                .collect();
            let at_slack: Vec<usize> = free
                .iter()
                .copied()
                .filter(|&i| Some(groups[i].bus) == slack_bus)
                .collect();
            let takers = if at_slack.is_empty() { free } else { at_slack };
            let cap: f64 = takers.iter().map(|&i| groups[i].capacity_mw()).sum();
            if takers.is_empty() || cap <= 0.0 {
                return Err(Error::Infeasible("no unit absorbs the residual demand".into()));
            }
            for &i in &takers {
                p[i] = rest * groups[i].capacity_mw() / cap;
            }
            Ok(DispatchResult {
                p,
                total_cost: 0.0,
                lambda: 0.0,
            })
        }
    }
}

/// Fixed and variable cost of a reactive placement (integer MVAr per
/// candidate). A site is charged its fixed cost when anything is built.
pub fn var_install_cost(case: &Case, var_mvar: &[u32]) -> (f64, f64) {
    let mut fixed = 0.0;
    let mut variable = 0.0;
    for (v, &q) in case.var_candidates.iter().zip(var_mvar) {
        if q > 0 {
            fixed += v.fixed_cost;
            variable += v.cost_per_kvar * q as f64 * 1000.0;
        }
    }
    (fixed, variable)
}

/// Yearly cost of losses: `k_l` $/kWh times loss energy, with losses in
/// MW given per scenario alongside its duration in hours.
pub fn loss_cost(case: &Case, losses: &[(f64, f64)]) -> f64 {
    losses
        .iter()
        .map(|(mw, h)| mw * h * 1000.0 * case.econ.loss_cost_per_kwh)
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CostBreakdown {
    pub investment_gen: f64,
    pub investment_line: f64,
    pub om: f64,
    pub salvage: f64,
    pub var_fixed: f64,
    pub var_variable: f64,
    pub loss_cost: f64,
}

impl CostBreakdown {
    pub fn total(&self) -> f64 {
        self.investment_gen + self.investment_line + self.om - self.salvage
            + self.var_fixed
            + self.var_variable
            + self.loss_cost
    }

    pub fn rows(&self) -> [(&'static str, f64); 8] {
        [
            ("investment_gen", self.investment_gen),
            ("investment_line", self.investment_line),
            ("om", self.om),
            ("salvage", self.salvage),
            ("var_fixed", self.var_fixed),
            ("var_variable", self.var_variable),
            ("loss_cost", self.loss_cost),
            ("total", self.total()),
        ]
    }
}

/// Dispatch and energy of one stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StageOperation {
    pub groups: Vec<UnitGroup>,
    /// Output per group at the stage peak, MW.
    pub peak_mw: Vec<f64>,
    /// Energy per group per year, MWh.
    pub annual_mwh: Vec<f64>,
    pub om: f64,
}

/// Dispatch stage `t` at every scenario of its peak and price its O&M.
pub fn operate_stage(case: &Case, plan: &ExpansionPlan, cm: &CostModel, t: usize) -> Result<StageOperation> {
    let groups = unit_groups(case, plan, t);
    let peak = case.stage_peak_mw(t);
    let peak_dispatch = dispatch_groups(case, &groups, peak)?;
    let scenarios = if case.scenarios.is_empty() {
        vec![LoadScenario {
            name: "peak".into(),
            scale: 1.0,
            duration_hours: 8760.0,
            power_factor: 1.0,
        }]
    } else {
        case.scenarios.clone()
    };
    let peak_scale = scenarios.iter().map(|s| s.scale).fold(f64::MIN, f64::max);
    let mut per_scenario = Vec::with_capacity(scenarios.len());
    for s in &scenarios {
        let d = peak * s.scale / peak_scale;
        let p = if (s.scale - peak_scale).abs() < 1e-12 {
            peak_dispatch.p.clone()
        } else {
            dispatch_groups(case, &groups, d)?.p
        };
        per_scenario.push((p, s.duration_hours));
    }
    let annual_mwh = expected_energy_served(&per_scenario, 1.0);
    let entries: Vec<OmEntry> = groups
        .iter()
        .zip(&annual_mwh)
        .map(|(g, &e)| OmEntry {
            capacity_mw: g.capacity_mw(),
            fixed_cost: g.fixed_cost,
            op_cost: g.op_cost,
            ees_mwh: e,
        })
        .collect();
    let om = om_cost(&entries, cm, t);
    Ok(StageOperation {
        groups,
        peak_mw: peak_dispatch.p,
        annual_mwh,
        om,
    })
}

/// Full discounted cost of a plan: investment, O&M, salvage and reactive
/// installation. Loss cost needs an AC solution and is left at zero.
pub fn plan_cost_total(plan: &ExpansionPlan, case: &Case, cm: &CostModel) -> Result<CostBreakdown> {
    plan.check_shape(case)?;
    let mut b = CostBreakdown {
        investment_gen: gen_investment(plan, case, cm).iter().sum(),
        investment_line: line_investment(plan, case, cm).iter().sum(),
        salvage: salvage_value(plan, case, cm),
        ..CostBreakdown::default()
    };
    if case.dispatch == DispatchMode::Economic && !case.econ.fuel_cost.is_empty() {
        for t in 1..=plan.stages() {
            b.om += operate_stage(case, plan, cm, t)?.om;
        }
    }
    let (f, v) = var_install_cost(case, &plan.var_mvar);
    b.var_fixed = f;
    b.var_variable = v;
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case_io::{bundled_case, bundled_plan};
    use approx::assert_relative_eq;

    fn cm(conv: DiscountConvention) -> CostModel {
        CostModel {
            discount_rate: 0.085,
            stages: 3,
            stage_years: 2.0,
            convention: conv,
            reserve_min: 0.2,
            reserve_max: 0.6,
            lolp_max: 0.01,
        }
    }

    #[test]
    fn first_stage_investment_is_undiscounted() {
        for c in [DiscountConvention::AsPrinted, DiscountConvention::PerYear] {
            assert_eq!(cm(c).investment_discount(1), 1.0);
        }
        assert_relative_eq!(cm(DiscountConvention::AsPrinted).investment_discount(2), 1.085f64.powi(-4));
        assert_relative_eq!(cm(DiscountConvention::EndOfStage).investment_discount(1), 1.085f64.powi(-2));
    }

    #[test]
    fn garver_line_plans() {
        let c = bundled_case("garver6");
        let m = cm(DiscountConvention::AsPrinted);
        for (name, want) in [
            ("garver-actnep", 311e6),
            ("garver-actnep-n1", 349e6),
            ("garver-integrated", 220e6),
            ("garver-integrated-n1", 300e6),
        ] {
            let p = bundled_plan(name, &c, 1);
            assert_eq!(line_investment(&p, &c, &m)[0], want, "{}", name);
        }
    }

    #[test]
    fn var_costs() {
        let c = bundled_case("garver6");
        let (f, v) = var_install_cost(&c, &[9, 14, 7]);
        assert_eq!(f + v, 903_000.0);
        let (f, v) = var_install_cost(&c, &[8, 5, 5]);
        assert_eq!(f + v, 543_000.0);
        assert_eq!(var_install_cost(&c, &[0, 0, 0]), (0.0, 0.0));
    }

    #[test]
    fn two_unit_dispatch() {
        let u = [
            DispatchUnit { a: 0.5, b: 0.0, c: 0.0, p_min: 0.0, p_max: 10.0 },
            DispatchUnit { a: 1.0, b: 0.0, c: 0.0, p_min: 0.0, p_max: 10.0 },
        ];
        let r = economic_dispatch(&u, 3.0).unwrap();
        assert_relative_eq!(r.p[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(r.p[1], 1.0, epsilon = 1e-12);
        assert_relative_eq!(r.lambda, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn dispatch_single_and_boundary() {
        let one = [DispatchUnit { a: 0.1, b: 5.0, c: 1.0, p_min: 0.0, p_max: 50.0 }];
        assert_relative_eq!(economic_dispatch(&one, 17.5).unwrap().p[0], 17.5, epsilon = 1e-12);
        let two = [
            DispatchUnit { a: 0.1, b: 5.0, c: 0.0, p_min: 0.0, p_max: 50.0 },
            DispatchUnit { a: 0.3, b: 1.0, c: 0.0, p_min: 0.0, p_max: 20.0 },
        ];
        let r = economic_dispatch(&two, 70.0).unwrap();
        assert_eq!(r.p, vec![50.0, 20.0]);
        assert!(economic_dispatch(&two, 70.1).is_err());
    }

    #[test]
    fn ees_arithmetic() {
        assert_eq!(expected_energy_served(&[(vec![100.0], 8760.0)], 2.0), vec![1_752_000.0]);
        assert_eq!(expected_energy_served(&[(vec![0.0], 8760.0)], 2.0), vec![0.0]);
        let e = expected_energy_served(
            &[(vec![10.0], 876.0), (vec![8.0], 6132.0), (vec![5.0], 1752.0)],
            1.0,
        );
        assert_relative_eq!(e[0], 10.0 * 876.0 + 8.0 * 6132.0 + 5.0 * 1752.0);
    }

    #[test]
    fn om_fixed_only_first_stage() {
        let m = cm(DiscountConvention::AsPrinted);
        let e = [OmEntry { capacity_mw: 100.0, fixed_cost: 2.0, op_cost: 0.0, ees_mwh: 0.0 }];
        let want = 100.0 * 2.0 * 12_000.0 * (1.085f64.powf(-2.5) + 1.085f64.powf(-3.5));
        assert_relative_eq!(om_cost(&e, &m, 1), want, max_relative = 1e-14);
        let v = [OmEntry { capacity_mw: 0.0, fixed_cost: 0.0, op_cost: 0.021, ees_mwh: 1000.0 }];
        assert_relative_eq!(om_cost(&v, &m, 1), 21_000.0 * m.om_discount(1), max_relative = 1e-14);
    }

    #[test]
    fn salvage_cases() {
        let c = bundled_case("ieee24");
        let m = cm(DiscountConvention::AsPrinted);
        let mut p = ExpansionPlan::empty(&c, 3);
        assert_eq!(salvage_value(&p, &c, &m), 0.0);
        p.gen[2][0] = 1;
        let mut c1 = c.clone();
        c1.gen_candidates[0].salvage_factor = 1.0;
        let want = c.gen_candidates[0].unit_investment() * 1.085f64.powf(-8.0);
        assert_relative_eq!(salvage_value(&p, &c1, &m), want, max_relative = 1e-14);
        c1.gen_candidates[0].salvage_factor = 0.0;
        assert_eq!(salvage_value(&p, &c1, &m), 0.0);
    }

    #[test]
    fn static_composite_line_costs_under_end_of_stage() {
        let c = bundled_case("ieee24-weak");
        let m = cm(DiscountConvention::EndOfStage);
        let comp = bundled_plan("ieee24-weak-composite", &c, 1);
        let sep = bundled_plan("ieee24-weak-separate", &c, 1);
        assert_relative_eq!(line_investment(&comp, &c, &m)[0], 2.56386e7, max_relative = 5e-6);
        assert_relative_eq!(line_investment(&sep, &c, &m)[0], 3.0693e7, max_relative = 5e-6);
    }

    #[test]
    fn empty_plan_costs_only_base_om() {
        let c = bundled_case("ieee24");
        let m = cm(DiscountConvention::AsPrinted);
        let p = ExpansionPlan::empty(&c, 1);
        let b = plan_cost_total(&p, &c, &m);
        // Stage-1 peak exceeds existing capacity, so dispatch is infeasible.
        assert!(b.is_err());
        let mut c0 = c.clone();
        c0.econ.peak_mw = vec![3238.0, 3238.0];
        let b = plan_cost_total(&p, &c0, &m).unwrap();
        assert_eq!(b.investment_gen + b.investment_line + b.salvage, 0.0);
        assert!(b.om > 0.0);
        assert_eq!(b.total(), b.om);
    }
}
