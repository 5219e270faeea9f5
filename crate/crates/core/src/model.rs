//! Domain types shared by every solver: buses, branches, candidates,
//! load scenarios, expansion plans and the expanded topology.
//!
//! Everything here is a plain value. Powers are in MW/MVAr unless a field
//! name says `pu`; money is in dollars.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BusKind {
    Slack,
    Pv,
    Load,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub id: usize,
    pub kind: BusKind,
    /// Voltage setpoint in pu, present for slack and PV buses.
    pub v_setpoint: Option<f64>,
    pub p_demand_mw: f64,
    /// Reactive demand; derived from the scenario power factor when absent.
    pub q_demand_mvar: Option<f64>,
}

/// One row of the branch table. Parallel circuits may be given either as
/// repeated rows or through `circuits`.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub from: usize,
    pub to: usize,
    pub r: f64,
    pub x: f64,
    pub b_half: f64,
    /// Per-circuit flow limit in pu of the system base.
    pub capacity_pu: f64,
    pub circuits: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Fuel {
    Lng,
    Oil,
    Coal,
    Nuclear,
}

impl Fuel {
    pub const ALL: [Fuel; 4] = [Fuel::Lng, Fuel::Oil, Fuel::Coal, Fuel::Nuclear];

    pub fn as_str(self) -> &'static str {
        match self {
            Fuel::Lng => "lng",
            Fuel::Oil => "oil",
            Fuel::Coal => "coal",
            Fuel::Nuclear => "nuclear",
        }
    }

    pub fn parse(s: &str) -> Option<Fuel> {
        match s.to_ascii_lowercase().as_str() {
            "lng" => Some(Fuel::Lng),
            "oil" => Some(Fuel::Oil),
            "coal" => Some(Fuel::Coal),
            "nuclear" => Some(Fuel::Nuclear),
            _ => None,
        }
    }
}

/// A plant in service before the first planning stage.
#[derive(Debug, Clone, PartialEq)]
pub struct ExistingUnit {
    pub name: String,
    pub fuel: Option<Fuel>,
    pub bus: usize,
    pub units: u32,
    pub unit_mw: f64,
    pub pmin_mw: f64,
    pub for_rate: f64,
    /// $/kWh
    pub op_cost: f64,
    /// $/kW-month
    pub fixed_cost: f64,
    pub q_min_mvar: Option<f64>,
    pub q_max_mvar: Option<f64>,
    /// Fixed fraction of system demand for participation dispatch.
    pub share: Option<f64>,
}

impl ExistingUnit {
    pub fn capacity_mw(&self) -> f64 {
        self.units as f64 * self.unit_mw
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePlant {
    pub name: String,
    pub fuel: Fuel,
    pub bus: usize,
    pub unit_mw: f64,
    /// Maximum units over the whole horizon.
    pub max_units: u32,
    pub for_rate: f64,
    /// $/kWh
    pub op_cost: f64,
    /// $/kW-month
    pub fixed_cost: f64,
    /// $/kW
    pub capital_cost: f64,
    pub lifetime_years: f64,
    pub salvage_factor: f64,
}

impl CandidatePlant {
    /// Capital cost of one unit in dollars.
    pub fn unit_investment(&self) -> f64 {
        self.capital_cost * self.unit_mw * 1000.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateLine {
    pub from: usize,
    pub to: usize,
    pub r: f64,
    pub x: f64,
    pub b_half: f64,
    pub capacity_pu: f64,
    /// Dollars per circuit.
    pub cost: f64,
    pub max_add: u32,
}

impl CandidateLine {
    pub fn label(&self) -> String {
        format!("{}-{}", self.from, self.to)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarCandidate {
    pub bus: usize,
    pub q_min_mvar: f64,
    pub q_max_mvar: f64,
    /// Dollars per installed site.
    pub fixed_cost: f64,
    /// Dollars per kVAr.
    pub cost_per_kvar: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadScenario {
    pub name: String,
    pub scale: f64,
    pub duration_hours: f64,
    pub power_factor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadCost {
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

/// How the tabulated quadratic cost columns map onto `a·P² + b·P + c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostInterpretation {
    AsPrinted,
    Swapped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DispatchMode {
    /// Equal incremental cost dispatch using the fuel cost curves.
    Economic,
    /// PV units follow fixed shares of demand, the slack covers the rest.
    Participation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Econ {
    pub stage_years: f64,
    /// Peak demand for stage 0 (existing system) and each planning stage.
    pub peak_mw: Vec<f64>,
    pub loss_cost_per_kwh: f64,
    pub fuel_cost: BTreeMap<Fuel, QuadCost>,
    /// Fuel-mix share bounds; fuels without an entry are unconstrained.
    pub fuel_mix: BTreeMap<Fuel, (f64, f64)>,
}

impl Default for Econ {
    fn default() -> Self {
        Econ {
            stage_years: 2.0,
            peak_mw: Vec::new(),
            loss_cost_per_kwh: 0.0,
            fuel_cost: BTreeMap::new(),
            fuel_mix: BTreeMap::new(),
        }
    }
}

/// A complete study case: the network plus candidates, scenarios and
/// economic data.
#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub name: String,
    pub base_mva: f64,
    pub dispatch: DispatchMode,
    pub cost_interpretation: CostInterpretation,
    pub v_min: f64,
    pub v_max: f64,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub gen_existing: Vec<ExistingUnit>,
    pub gen_candidates: Vec<CandidatePlant>,
    pub line_candidates: Vec<CandidateLine>,
    pub var_candidates: Vec<VarCandidate>,
    pub scenarios: Vec<LoadScenario>,
    pub econ: Econ,
}

impl Case {
    pub fn bus_index(&self, id: usize) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }

    pub fn slack_index(&self) -> Option<usize> {
        self.buses.iter().position(|b| b.kind == BusKind::Slack)
    }

    pub fn total_demand_mw(&self) -> f64 {
        self.buses.iter().map(|b| b.p_demand_mw).sum()
    }

    pub fn existing_capacity_mw(&self) -> f64 {
        self.gen_existing.iter().map(|g| g.capacity_mw()).sum()
    }

    pub fn line_candidate_index(&self, from: usize, to: usize) -> Option<usize> {
        self.line_candidates
            .iter()
            .position(|l| (l.from == from && l.to == to) || (l.from == to && l.to == from))
    }

    pub fn gen_candidate_index(&self, name: &str) -> Option<usize> {
        self.gen_candidates.iter().position(|g| g.name == name)
    }

    pub fn var_candidate_index(&self, bus: usize) -> Option<usize> {
        self.var_candidates.iter().position(|v| v.bus == bus)
    }

    /// Peak demand of stage `t` (0 = existing system). Cases without a
    /// forecast use the sum of bus demands for every stage.
    pub fn stage_peak_mw(&self, t: usize) -> f64 {
        match self.econ.peak_mw.get(t) {
            Some(&d) => d,
            None => self.total_demand_mw(),
        }
    }

    /// Demand multiplier applied to bus loads at stage `t`.
    pub fn stage_scale(&self, t: usize) -> f64 {
        let base = self.total_demand_mw();
        if base > 0.0 {
            self.stage_peak_mw(t) / base
        } else {
            1.0
        }
    }

    /// The scenario with the largest load scale.
    pub fn peak_scenario(&self) -> LoadScenario {
        self.scenarios
            .iter()
            .cloned()
            .max_by(|a, b| a.scale.total_cmp(&b.scale))
            .unwrap_or(LoadScenario {
                name: "peak".into(),
                scale: 1.0,
                duration_hours: 8760.0,
                power_factor: 1.0,
            })
    }

    /// Largest single-candidate investment across generators, lines and
    /// reactive sources. Used to scale constraint penalties.
    pub fn largest_candidate_investment(&self) -> f64 {
        let g = self
            .gen_candidates
            .iter()
            .map(|c| c.unit_investment() * c.max_units as f64);
        let l = self
            .line_candidates
            .iter()
            .map(|c| c.cost * c.max_add as f64);
        let v = self
            .var_candidates
            .iter()
            .map(|c| c.fixed_cost + c.cost_per_kvar * c.q_max_mvar * 1000.0);
        g.chain(l).chain(v).fold(0.0, f64::max)
    }
}

/// A broken case invariant. Violations are data; validation never fails.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoSlack,
    MultipleSlack(Vec<usize>),
    DuplicateBus(usize),
    DanglingBus { context: String, bus: usize },
    NegativeDemand(usize),
    SetpointMismatch(usize),
    NonPositiveReactance { from: usize, to: usize },
    NonPositiveCapacity { from: usize, to: usize },
    ForcedOutageRate(String),
    NegativeCost(String),
    SalvageFactor(String),
    NoCircuitsAllowed { from: usize, to: usize },
    DuplicateName(String),
    ScenarioScale(String),
    ScenarioHours(f64),
    VarBounds(usize),
    BadParameter(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoSlack => write!(f, "no slack bus"),
            Violation::MultipleSlack(b) => write!(f, "more than one slack bus: {:?}", b),
            Violation::DuplicateBus(b) => write!(f, "bus {} defined twice", b),
            Violation::DanglingBus { context, bus } => {
                write!(f, "{} references unknown bus {}", context, bus)
            }
            Violation::NegativeDemand(b) => write!(f, "bus {} has negative demand", b),
            Violation::SetpointMismatch(b) => write!(
                f,
                "bus {} must carry a voltage setpoint iff it is slack or PV",
                b
            ),
            Violation::NonPositiveReactance { from, to } => {
                write!(f, "branch {}-{} has non-positive reactance", from, to)
            }
            Violation::NonPositiveCapacity { from, to } => {
                write!(f, "branch {}-{} has non-positive capacity", from, to)
            }
            Violation::ForcedOutageRate(n) => write!(f, "{}: forced outage rate outside [0,1)", n),
            Violation::NegativeCost(n) => write!(f, "{}: negative cost", n),
            Violation::SalvageFactor(n) => write!(f, "{}: salvage factor outside [0,1]", n),
            Violation::NoCircuitsAllowed { from, to } => {
                write!(f, "candidate corridor {}-{} allows no circuits", from, to)
            }
            Violation::DuplicateName(n) => write!(f, "duplicate name {}", n),
            Violation::ScenarioScale(n) => write!(f, "scenario {} has non-positive scale", n),
            Violation::ScenarioHours(h) => {
                write!(f, "scenario durations sum to {} h instead of 8760", h)
            }
            Violation::VarBounds(b) => write!(f, "reactive candidate at bus {} has bad bounds", b),
            Violation::BadParameter(s) => write!(f, "{}", s),
        }
    }
}

/// Check every type invariant of a case. An empty list means the case is
/// usable by all solvers.
pub fn validate_case(case: &Case) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for b in &case.buses {
        if !seen.insert(b.id) {
            out.push(Violation::DuplicateBus(b.id));
        }
        if b.p_demand_mw < 0.0 {
            out.push(Violation::NegativeDemand(b.id));
        }
        let needs = matches!(b.kind, BusKind::Slack | BusKind::Pv);
        if needs != b.v_setpoint.is_some() {
            out.push(Violation::SetpointMismatch(b.id));
        }
    }
    let slacks: Vec<usize> = case
        .buses
        .iter()
        .filter(|b| b.kind == BusKind::Slack)
        .map(|b| b.id)
        .collect();
    match slacks.len() {
        0 => out.push(Violation::NoSlack),
        1 => {}
        _ => out.push(Violation::MultipleSlack(slacks)),
    }
    if !(case.base_mva > 0.0) {
        out.push(Violation::BadParameter("base MVA must be positive".into()));
    }
    let dangling = |context: String, bus: usize, out: &mut Vec<Violation>| {
        if !seen.contains(&bus) {
            out.push(Violation::DanglingBus { context, bus });
        }
    };
    for br in &case.branches {
        let ctx = format!("branch {}-{}", br.from, br.to);
        dangling(ctx.clone(), br.from, &mut out);
        dangling(ctx, br.to, &mut out);
        if !(br.x > 0.0) {
            out.push(Violation::NonPositiveReactance { from: br.from, to: br.to });
        }
        if !(br.capacity_pu > 0.0) {
            out.push(Violation::NonPositiveCapacity { from: br.from, to: br.to });
        }
    }
    let mut names = BTreeSet::new();
    for g in &case.gen_existing {
        dangling(format!("unit {}", g.name), g.bus, &mut out);
        if !(0.0..1.0).contains(&g.for_rate) {
            out.push(Violation::ForcedOutageRate(g.name.clone()));
        }
        if g.op_cost < 0.0 || g.fixed_cost < 0.0 {
            out.push(Violation::NegativeCost(g.name.clone()));
        }
        if !names.insert(g.name.clone()) {
            out.push(Violation::DuplicateName(g.name.clone()));
        }
    }
    let mut cnames = BTreeSet::new();
    for c in &case.gen_candidates {
        dangling(format!("candidate {}", c.name), c.bus, &mut out);
        if !(0.0..1.0).contains(&c.for_rate) {
            out.push(Violation::ForcedOutageRate(c.name.clone()));
        }
        if c.op_cost < 0.0 || c.fixed_cost < 0.0 || c.capital_cost < 0.0 {
            out.push(Violation::NegativeCost(c.name.clone()));
        }
        if !(0.0..=1.0).contains(&c.salvage_factor) {
            out.push(Violation::SalvageFactor(c.name.clone()));
        }
        if !cnames.insert(c.name.clone()) {
            out.push(Violation::DuplicateName(c.name.clone()));
        }
    }
    let mut corridors = BTreeSet::new();
    for l in &case.line_candidates {
        let ctx = format!("candidate corridor {}", l.label());
        dangling(ctx.clone(), l.from, &mut out);
        dangling(ctx, l.to, &mut out);
        if l.cost < 0.0 {
            out.push(Violation::NegativeCost(l.label()));
        }
        if l.max_add < 1 {
            out.push(Violation::NoCircuitsAllowed { from: l.from, to: l.to });
        }
        if !(l.x > 0.0) {
            out.push(Violation::NonPositiveReactance { from: l.from, to: l.to });
        }
        if !(l.capacity_pu > 0.0) {
            out.push(Violation::NonPositiveCapacity { from: l.from, to: l.to });
        }
        if !corridors.insert((l.from.min(l.to), l.from.max(l.to))) {
            out.push(Violation::DuplicateName(l.label()));
        }
    }
    for v in &case.var_candidates {
        dangling("reactive candidate".into(), v.bus, &mut out);
        if v.q_min_mvar < 0.0 || v.q_max_mvar < v.q_min_mvar {
            out.push(Violation::VarBounds(v.bus));
        }
        if v.fixed_cost < 0.0 || v.cost_per_kvar < 0.0 {
            out.push(Violation::NegativeCost(format!("reactive candidate at bus {}", v.bus)));
        }
    }
    for s in &case.scenarios {
        if !(s.scale > 0.0) {
            out.push(Violation::ScenarioScale(s.name.clone()));
        }
        if !(s.power_factor > 0.0 && s.power_factor <= 1.0) {
            out.push(Violation::BadParameter(format!(
                "scenario {} power factor outside (0,1]",
                s.name
            )));
        }
    }
    if !case.scenarios.is_empty() {
        let hours: f64 = case.scenarios.iter().map(|s| s.duration_hours).sum();
        if (hours - 8760.0).abs() > 1e-6 {
            out.push(Violation::ScenarioHours(hours));
        }
    }
    if !(case.v_min < case.v_max) {
        out.push(Violation::BadParameter("voltage limits out of order".into()));
    }
    for (fuel, (lo, hi)) in &case.econ.fuel_mix {
        if !(0.0 <= *lo && lo <= hi && *hi <= 1.0) {
            out.push(Violation::BadParameter(format!(
                "fuel mix bounds for {} out of order",
                fuel.as_str()
            )));
        }
    }
    out
}

/// Additions chosen by a planner. Indices follow the candidate order of
/// the case; stages are stored 0-based (`gen[0]` is stage 1).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExpansionPlan {
    pub gen: Vec<Vec<u32>>,
    pub lines: Vec<Vec<u32>>,
    /// Integer MVAr per reactive candidate.
    pub var_mvar: Vec<u32>,
}

impl ExpansionPlan {
    pub fn empty(case: &Case, stages: usize) -> Self {
        ExpansionPlan {
            gen: vec![vec![0; case.gen_candidates.len()]; stages],
            lines: vec![vec![0; case.line_candidates.len()]; stages],
            var_mvar: vec![0; case.var_candidates.len()],
        }
    }

    pub fn stages(&self) -> usize {
        self.gen.len().max(self.lines.len())
    }

    /// Units of each candidate in service after stage `t` (1-based; 0
    /// gives all zeros). This is X_t = X_{t-1} + U_t for the candidates.
    pub fn cumulative_gen(&self, t: usize) -> Vec<u32> {
        let n = self.gen.first().map_or(0, |s| s.len());
        let mut acc = vec![0u32; n];
        for stage in self.gen.iter().take(t) {
            for (a, u) in acc.iter_mut().zip(stage) {
                *a += u;
            }
        }
        acc
    }

    pub fn cumulative_lines(&self, t: usize) -> Vec<u32> {
        let n = self.lines.first().map_or(0, |s| s.len());
        let mut acc = vec![0u32; n];
        for stage in self.lines.iter().take(t) {
            for (a, u) in acc.iter_mut().zip(stage) {
                *a += u;
            }
        }
        acc
    }

    pub fn total_lines(&self) -> Vec<u32> {
        self.cumulative_lines(self.lines.len())
    }

    /// Total installed capacity (existing plus candidates) after stage `t`.
    pub fn capacity_mw(&self, case: &Case, t: usize) -> f64 {
        let cum = self.cumulative_gen(t);
        case.existing_capacity_mw()
            + cum
                .iter()
                .zip(&case.gen_candidates)
                .map(|(&u, c)| u as f64 * c.unit_mw)
                .sum::<f64>()
    }

    pub fn is_empty(&self) -> bool {
        self.gen.iter().flatten().all(|&u| u == 0)
            && self.lines.iter().flatten().all(|&u| u == 0)
            && self.var_mvar.iter().all(|&q| q == 0)
    }

    /// Check the plan's shape against a case.
    pub fn check_shape(&self, case: &Case) -> crate::Result<()> {
        let bad = |what: &str| Err(crate::Error::PlanMismatch(what.to_string()));
        if self.gen.iter().any(|s| s.len() != case.gen_candidates.len()) {
            return bad("generator stage width differs from candidate count");
        }
        if self.lines.iter().any(|s| s.len() != case.line_candidates.len()) {
            return bad("line stage width differs from corridor count");
        }
        if self.var_mvar.len() != case.var_candidates.len() {
            return bad("reactive placement width differs from candidate count");
        }
        if self.gen.len() != self.lines.len() {
            return bad("generator and line stage counts differ");
        }
        Ok(())
    }

    /// Bound violations: construction limits, corridor limits and
    /// reactive size limits, as human-readable strings with magnitudes.
    pub fn bound_violations(&self, case: &Case) -> Vec<(String, f64)> {
        let mut out = Vec::new();
        let cum = self.cumulative_gen(self.gen.len());
        for (c, &u) in case.gen_candidates.iter().zip(&cum) {
            if u > c.max_units {
                out.push((
                    format!("{} exceeds construction limit", c.name),
                    (u - c.max_units) as f64 / c.max_units.max(1) as f64,
                ));
            }
        }
        let tot = self.total_lines();
        for (l, &n) in case.line_candidates.iter().zip(&tot) {
            if n > l.max_add {
                out.push((
                    format!("corridor {} exceeds circuit limit", l.label()),
                    (n - l.max_add) as f64 / l.max_add as f64,
                ));
            }
        }
        for (v, &q) in case.var_candidates.iter().zip(&self.var_mvar) {
            let q = q as f64;
            if q > v.q_max_mvar || q < v.q_min_mvar {
                let excess = (q - v.q_max_mvar).max(v.q_min_mvar - q);
                out.push((
                    format!("reactive source at bus {} outside size limits", v.bus),
                    excess / v.q_max_mvar.max(1.0),
                ));
            }
        }
        out
    }
}

/// Parallel circuits sharing endpoints and electrical parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitGroup {
    /// Bus indices (positions in `Case::buses`).
    pub from: usize,
    pub to: usize,
    pub r: f64,
    pub x: f64,
    pub b_half: f64,
    pub capacity_pu: f64,
    pub count: u32,
}

impl CircuitGroup {
    /// Series admittance of one circuit as (g, b) with y = g + jb.
    pub fn series_admittance(&self) -> (f64, f64) {
        let d = self.r * self.r + self.x * self.x;
        (self.r / d, -self.x / d)
    }
}

/// The in-service network at one planning state.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Topology {
    pub groups: Vec<CircuitGroup>,
}

impl Topology {
    /// Existing branches plus `additions[k]` circuits of line candidate k.
    pub fn with_additions(case: &Case, additions: &[u32]) -> Topology {
        let mut groups: Vec<CircuitGroup> = Vec::new();
        let mut push = |g: CircuitGroup| {
            if g.count == 0 {
                return;
            }
            if let Some(e) = groups.iter_mut().find(|e| {
                e.from == g.from
                    && e.to == g.to
                    && e.r == g.r
                    && e.x == g.x
                    && e.b_half == g.b_half
                    && e.capacity_pu == g.capacity_pu
            }) {
                e.count += g.count;
            } else {
                groups.push(g);
            }
        };
        for br in &case.branches {
            if let (Some(f), Some(t)) = (case.bus_index(br.from), case.bus_index(br.to)) {
                push(CircuitGroup {
                    from: f,
                    to: t,
                    r: br.r,
                    x: br.x,
                    b_half: br.b_half,
                    capacity_pu: br.capacity_pu,
                    count: br.circuits,
                });
            }
        }
        for (l, &n) in case.line_candidates.iter().zip(additions) {
            if let (Some(f), Some(t)) = (case.bus_index(l.from), case.bus_index(l.to)) {
                push(CircuitGroup {
                    from: f,
                    to: t,
                    r: l.r,
                    x: l.x,
                    b_half: l.b_half,
                    capacity_pu: l.capacity_pu,
                    count: n,
                });
            }
        }
        Topology { groups }
    }

    pub fn existing(case: &Case) -> Topology {
        Topology::with_additions(case, &[])
    }

    /// Topology in service after stage `t` of a plan.
    pub fn at_stage(case: &Case, plan: &ExpansionPlan, t: usize) -> Topology {
        Topology::with_additions(case, &plan.cumulative_lines(t))
    }

    pub fn total_circuits(&self) -> u32 {
        self.groups.iter().map(|g| g.count).sum()
    }

    /// Remove one circuit from group `k`.
    pub fn without_one(&self, k: usize) -> Topology {
        let mut t = self.clone();
        t.groups[k].count -= 1;
        if t.groups[k].count == 0 {
            t.groups.remove(k);
        }
        t
    }

    /// Connected components over `n` buses; returns a component label per bus.
    pub fn components(&self, n: usize) -> Vec<usize> {
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for g in &self.groups {
            if g.count == 0 {
                continue;
            }
            let a = find(&mut parent, g.from);
            let b = find(&mut parent, g.to);
            if a != b {
                parent[a] = b;
            }
        }
        (0..n).map(|i| find(&mut parent, i)).collect()
    }
}
