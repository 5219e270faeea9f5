use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::model::{BusKind, Case, LoadScenario, Topology};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcOptions {
    /// Largest allowed |ΔP| or |ΔQ| in pu.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub enforce_q_limits: bool,
}

impl Default for AcOptions {
    fn default() -> Self {
        AcOptions {
            tolerance: 1e-6,
            max_iterations: 100,
            enforce_q_limits: true,
        }
    }
}

/// Inputs of one AC solve besides the case and topology.
#[derive(Debug, Clone, Copy)]
pub struct AcInput<'a> {
    /// Scheduled real generation per bus in pu; the slack entry is ignored.
    pub p_gen: &'a [f64],
    pub scenario: &'a LoadScenario,
    /// Shunt capacitor rating per bus in MVAr at 1 pu voltage.
    pub shunt_mvar: &'a [f64],
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcSolution {
    pub v: Vec<f64>,
    pub theta: Vec<f64>,
    pub p_gen: Vec<f64>,
    pub q_gen: Vec<f64>,
    pub p_load: Vec<f64>,
    pub q_load: Vec<f64>,
    /// Shunt susceptance per bus in pu.
    pub shunt_b: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub mismatch: f64,
    /// Ids of PV buses held at a reactive limit.
    pub clamped: Vec<usize>,
}

impl AcSolution {
    pub fn losses(&self) -> f64 {
        self.p_gen.iter().sum::<f64>() - self.p_load.iter().sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AcError {
    /// The bus has no path to the slack bus, so B′ or B″ is singular.
    Isolated { bus: usize },
}

impl fmt::Display for AcError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AcError::Isolated { bus } => write!(f, "bus {} is isolated from the slack bus", bus),
        }
    }
}

impl std::error::Error for AcError {}

impl From<AcError> for crate::Error {
    fn from(e: AcError) -> Self {
        crate::Error::Infeasible(e.to_string())
    }
}

/// Bus admittance matrix as separate real and imaginary parts.
pub struct Ybus {
    pub g: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

pub fn build_ybus(n: usize, topo: &Topology, shunt_b: &[f64]) -> Ybus {
    let mut g = DMatrix::<f64>::zeros(n, n);
    let mut b = DMatrix::<f64>::zeros(n, n);
    for grp in &topo.groups {
        let k = grp.count as f64;
        let (gs, bs) = grp.series_admittance();
        let (i, j) = (grp.from, grp.to);
        g[(i, i)] += k * gs;
        g[(j, j)] += k * gs;
        g[(i, j)] -= k * gs;
        g[(j, i)] -= k * gs;
        b[(i, i)] += k * (bs + grp.b_half);
        b[(j, j)] += k * (bs + grp.b_half);
        b[(i, j)] -= k * bs;
        b[(j, i)] -= k * bs;
    }
    for (i, &s) in shunt_b.iter().enumerate() {
        b[(i, i)] += s;
    }
    Ybus { g, b }
}

/// Calculated injections `(P_i, Q_i)` for given voltages.
pub fn injections(y: &Ybus, v: &[f64], theta: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = v.len();
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            let (gij, bij) = (y.g[(i, j)], y.b[(i, j)]);
            if gij == 0.0 && bij == 0.0 {
                continue;
            }
            let (s, c) = (theta[i] - theta[j]).sin_cos();
            p[i] += v[i] * v[j] * (gij * c + bij * s);
            q[i] += v[i] * v[j] * (gij * s - bij * c);
        }
    }
    (p, q)
}

/// Per-bus loads in pu for a scenario.
pub fn scenario_loads(case: &Case, scenario: &LoadScenario) -> (Vec<f64>, Vec<f64>) {
    let tan = (1.0 - scenario.power_factor.powi(2)).max(0.0).sqrt() / scenario.power_factor;
    let pd: Vec<f64> = case
        .buses
        .iter()
        .map(|b| b.p_demand_mw * scenario.scale / case.base_mva)
        .collect();
    let qd = case
        .buses
        .iter()
        .zip(&pd)
        .map(|(b, &p)| match b.q_demand_mvar {
            Some(q) => q * scenario.scale / case.base_mva,
            None => p * tan,
        })
        .collect();
    (pd, qd)
}

#[derive(Clone, Copy, PartialEq)]
enum Role {
    Slack,
    Pv,
    Pq,
    /// PV bus held at a reactive limit (pu of net injection).
    Clamped(f64),
}

/// Fast-decoupled (XB) load flow from a flat start.
pub fn ac_flow_fdlf(case: &Case, topo: &Topology, input: AcInput<'_>, opts: &AcOptions) -> Result<AcSolution, AcError> {
    let n = case.buses.len();
    let slack = case.slack_index().unwrap_or(0);
    let comp = topo.components(n);
    if let Some(i) = (0..n).find(|&i| comp[i] != comp[slack]) {
        return Err(AcError::Isolated { bus: case.buses[i].id });
    }
    let base = case.base_mva;
    let (pd, qd) = scenario_loads(case, input.scenario);
    let shunt_b: Vec<f64> = (0..n)
        .map(|i| input.shunt_mvar.get(i).copied().unwrap_or(0.0) / base)
        .collect();
    let y = build_ybus(n, topo, &shunt_b);

    let mut qlim = vec![(f64::NEG_INFINITY, f64::INFINITY); n];
    let mut has_lim = vec![false; n];
    for g in &case.gen_existing {
        if let (Some(i), Some(lo), Some(hi)) = (case.bus_index(g.bus), g.q_min_mvar, g.q_max_mvar) {
            if !has_lim[i] {
                qlim[i] = (0.0, 0.0);
                has_lim[i] = true;
            }
            qlim[i].0 += lo / base;
            qlim[i].1 += hi / base;
        }
    }

    let mut role: Vec<Role> = case
        .buses
        .iter()
        .enumerate()
        .map(|(i, b)| match b.kind {
            _ if i == slack => Role::Slack,
            BusKind::Pv => Role::Pv,
            _ => Role::Pq,
        })
        .collect();
    let mut v: Vec<f64> = case.buses.iter().map(|b| b.v_setpoint.unwrap_or(1.0)).collect();
    let mut theta = vec![0.0; n];
    let psp: Vec<f64> = (0..n)
        .map(|i| input.p_gen.get(i).copied().unwrap_or(0.0) - pd[i])
        .collect();

    // B' over all non-slack buses, from series reactance only.
    let pv_idx: Vec<usize> = (0..n).filter(|&i| i != slack).collect();
    let mut bp = DMatrix::<f64>::zeros(pv_idx.len(), pv_idx.len());
    let mut pos = vec![usize::MAX; n];
    for (k, &i) in pv_idx.iter().enumerate() {
        pos[i] = k;
    }
    for grp in &topo.groups {
        let s = grp.count as f64 / grp.x;
        let (a, c) = (pos[grp.from], pos[grp.to]);
        if a != usize::MAX {
            bp[(a, a)] += s;
        }
        if c != usize::MAX {
            bp[(c, c)] += s;
        }
        if a != usize::MAX && c != usize::MAX {
            bp[(a, c)] -= s;
            bp[(c, a)] -= s;
        }
    }
    let bp_lu = bp.lu();

    let mut switches = vec![0u8; n];
    let mut iterations = 0;
    let mut converged;
    let mut mismatch;
    'outer: loop {
        let pq: Vec<usize> = (0..n)
            .filter(|&i| matches!(role[i], Role::Pq | Role::Clamped(_)))
            .collect();
        let mut bpp = DMatrix::<f64>::zeros(pq.len(), pq.len());
        for (a, &i) in pq.iter().enumerate() {
            for (c, &j) in pq.iter().enumerate() {
                bpp[(a, c)] = -y.b[(i, j)];
            }
        }
        let bpp_lu = bpp.lu();
        let qsp = |i: usize| match role[i] {
            Role::Clamped(q) => q,
            _ => -qd[i],
        };
        loop {
            let (p, q) = injections(&y, &v, &theta);
            let dp: Vec<f64> = pv_idx.iter().map(|&i| psp[i] - p[i]).collect();
            let dq: Vec<f64> = pq.iter().map(|&i| qsp(i) - q[i]).collect();
            mismatch = dp.iter().chain(&dq).fold(0.0f64, |m, x| m.max(x.abs()));
            if mismatch <= opts.tolerance {
                converged = true;
                break;
            }
            if iterations >= opts.max_iterations {
                converged = false;
                break 'outer;
            }
            iterations += 1;
            let rhs = DVector::from_iterator(dp.len(), pv_idx.iter().zip(&dp).map(|(&i, d)| d / v[i]));
            let Some(dth) = bp_lu.solve(&rhs) else {
                return Err(AcError::Isolated { bus: case.buses[pv_idx[0]].id });
            };
            for (k, &i) in pv_idx.iter().enumerate() {
                theta[i] += dth[k];
            }
            if !pq.is_empty() {
                let (_, q) = injections(&y, &v, &theta);
                let rhs = DVector::from_iterator(pq.len(), pq.iter().map(|&i| (qsp(i) - q[i]) / v[i]));
                let Some(dv) = bpp_lu.solve(&rhs) else {
                    return Err(AcError::Isolated { bus: case.buses[pq[0]].id });
                };
                for (k, &i) in pq.iter().enumerate() {
                    v[i] += dv[k];
                }
            }
        }
        if !opts.enforce_q_limits {
            break;
        }
        // Reactive limit checks on generator buses.
        let (_, q) = injections(&y, &v, &theta);
        let mut changed = false;
        for i in 0..n {
            if !has_lim[i] || switches[i] >= 2 {
                continue;
            }
            let (lo, hi) = qlim[i];
            match role[i] {
                Role::Pv => {
                    let qg = q[i] + qd[i];
                    if qg > hi + opts.tolerance {
                        role[i] = Role::Clamped(hi - qd[i]);
                    } else if qg < lo - opts.tolerance {
                        role[i] = Role::Clamped(lo - qd[i]);
                    } else {
                        continue;
                    }
                    switches[i] += 1;
                    changed = true;
                }
                Role::Clamped(qnet) => {
                    let vset = case.buses[i].v_setpoint.unwrap_or(1.0);
                    let at_max = (qnet - (hi - qd[i])).abs() < 1e-12;
                    if (at_max && v[i] > vset) || (!at_max && v[i] < vset) {
                        role[i] = Role::Pv;
                        v[i] = vset;
                        switches[i] += 1;
                        changed = true;
                    }
                }
                _ => {}
            }
        }
        if !changed {
            break;
        }
    }

    let (p, q) = injections(&y, &v, &theta);
    let mut p_gen = vec![0.0; n];
    let mut q_gen = vec![0.0; n];
    for i in 0..n {
        match role[i] {
            Role::Slack => {
                p_gen[i] = p[i] + pd[i];
                q_gen[i] = q[i] + qd[i];
            }
            Role::Pv | Role::Clamped(_) => {
                p_gen[i] = psp[i] + pd[i];
                q_gen[i] = q[i] + qd[i];
            }
            Role::Pq => {
                p_gen[i] = psp[i] + pd[i];
            }
        }
    }
    let clamped = (0..n)
        .filter(|&i| matches!(role[i], Role::Clamped(_)))
        .map(|i| case.buses[i].id)
        .collect();
    Ok(AcSolution {
        v,
        theta,
        p_gen,
        q_gen,
        p_load: pd,
        q_load: qd,
        shunt_b,
        converged,
        iterations,
        mismatch,
        clamped,
    })
}

/// Largest full-AC mismatch of a solution, re-evaluated from scratch.
pub fn ac_mismatch(case: &Case, topo: &Topology, sol: &AcSolution) -> f64 {
    let y = build_ybus(case.buses.len(), topo, &sol.shunt_b);
    let (p, q) = injections(&y, &sol.v, &sol.theta);
    let mut m = 0.0f64;
    for i in 0..p.len() {
        m = m.max((sol.p_gen[i] - sol.p_load[i] - p[i]).abs());
        m = m.max((sol.q_gen[i] - sol.q_load[i] - q[i]).abs());
    }
    m
}

/// Flow through one circuit of a group, seen from both terminals.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchFlow {
    /// Index into `Topology::groups`.
    pub group: usize,
    pub from: usize,
    pub to: usize,
    pub p_from: f64,
    pub q_from: f64,
    pub p_to: f64,
    pub q_to: f64,
    pub limit: f64,
}

impl BranchFlow {
    pub fn s_from(&self) -> f64 {
        self.p_from.hypot(self.q_from)
    }

    pub fn s_to(&self) -> f64 {
        self.p_to.hypot(self.q_to)
    }

    pub fn s_max(&self) -> f64 {
        self.s_from().max(self.s_to())
    }
}

/// Per-circuit apparent flows of every group with at least one circuit.
pub fn branch_apparent_flows(case: &Case, sol: &AcSolution, topo: &Topology) -> Vec<BranchFlow> {
    let mut out = Vec::new();
    for (k, g) in topo.groups.iter().enumerate() {
        if g.count == 0 {
            continue;
        }
        let (gs, bs) = g.series_admittance();
        let side = |i: usize, j: usize| {
            let (vi, vj) = (sol.v[i], sol.v[j]);
            let (s, c) = (sol.theta[i] - sol.theta[j]).sin_cos();
            let p = vi * vi * gs - vi * vj * (gs * c + bs * s);
            let q = -vi * vi * (bs + g.b_half) - vi * vj * (gs * s - bs * c);
            (p, q)
        };
        let (pf, qf) = side(g.from, g.to);
        let (pt, qt) = side(g.to, g.from);
        out.push(BranchFlow {
            group: k,
            from: case.buses[g.from].id,
            to: case.buses[g.to].id,
            p_from: pf,
            q_from: qf,
            p_to: pt,
            q_to: qt,
            limit: g.capacity_pu,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case_io::parse_case;

    fn two_bus(load_mw: f64) -> Case {
        parse_case(&format!(
            "[BASE] key value\nname two\nmva 100\n\
             [BUS] id type v_set pd_mw qd_mvar\n1 slack 1.0 0 0\n2 load - {} 0\n\
             [BRANCH] from to r x capacity\n1 2 0 0.1 10\n",
            load_mw
        ))
        .unwrap()
    }

    fn solve(c: &Case) -> AcSolution {
        let t = Topology::existing(c);
        let sc = c.peak_scenario();
        let z = vec![0.0; c.buses.len()];
        ac_flow_fdlf(c, &t, AcInput { p_gen: &z, scenario: &sc, shunt_mvar: &z }, &AcOptions::default()).unwrap()
    }

    #[test]
    fn zero_load_converges_immediately() {
        let s = solve(&two_bus(0.0));
        assert!(s.converged);
        assert!(s.iterations <= 2);
        assert!(s.p_gen[0].abs() < 1e-12);
    }

    #[test]
    fn two_bus_closed_form() {
        // P = V2 sin(-θ2)/x and Q balance give V2⁴ - V2² + (P x)² = 0 with zero reactive load.
        let s = solve(&two_bus(100.0));
        assert!(s.converged);
        let (p, x) = (1.0f64, 0.1f64);
        let v2 = ((1.0 + (1.0 - 4.0 * (p * x).powi(2)).sqrt()) / 2.0).sqrt();
        let th2 = -(p * x / v2).asin();
        assert!((s.v[1] - v2).abs() < 1e-6, "{} vs {}", s.v[1], v2);
        assert!((s.theta[1] - th2).abs() < 1e-6);
    }

    #[test]
    fn charging_only_branch() {
        let c = parse_case(
            "[BASE] key value\nname ch\nmva 100\n\
             [BUS] id type v_set pd_mw qd_mvar\n1 slack 1.0 0 0\n2 pv 1.0 0 0\n\
             [BRANCH] from to r x b_half capacity\n1 2 0 0.1 0.05 10\n",
        )
        .unwrap();
        let s = solve(&c);
        let t = Topology::existing(&c);
        let f = &branch_apparent_flows(&c, &s, &t)[0];
        assert!((f.s_from() - 0.05).abs() < 1e-9);
        assert!(f.p_from.abs() < 1e-9);
    }

    #[test]
    fn isolated_bus_is_named() {
        let c = parse_case(
            "[BASE] key value\nname iso\nmva 100\n\
             [BUS] id type v_set pd_mw\n1 slack 1.0 0\n2 load - 10\n3 load - 0\n\
             [BRANCH] from to x capacity\n1 2 0.1 10\n",
        )
        .unwrap();
        let t = Topology::existing(&c);
        let sc = c.peak_scenario();
        let z = vec![0.0; 3];
        let e = ac_flow_fdlf(&c, &t, AcInput { p_gen: &z, scenario: &sc, shunt_mvar: &z }, &AcOptions::default());
        assert_eq!(e.unwrap_err(), AcError::Isolated { bus: 3 });
    }
}
