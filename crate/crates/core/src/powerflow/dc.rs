use nalgebra::{DMatrix, DVector};

use crate::model::{Case, Topology};

#[derive(Debug, Clone, PartialEq)]
pub struct DcSolution {
    /// Angle per bus in radians; the slack bus is zero.
    pub theta: Vec<f64>,
    /// Real power per circuit group from `from` to `to`, pu, summed over
    /// the group's circuits.
    pub flows: Vec<f64>,
    /// Net injection per bus actually used, with the slack balancing.
    pub injections: Vec<f64>,
}

impl DcSolution {
    /// Flow on one circuit of group `k`.
    pub fn per_circuit(&self, topo: &Topology, k: usize) -> f64 {
        self.flows[k] / topo.groups[k].count as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DcFlow {
    Solved(DcSolution),
    /// Buses (by id) stranded from the slack while carrying injection.
    Islanded(Vec<usize>),
}

impl DcFlow {
    pub fn solution(&self) -> Option<&DcSolution> {
        match self {
            DcFlow::Solved(s) => Some(s),
            DcFlow::Islanded(_) => None,
        }
    }
}

const INJECTION_EPS: f64 = 1e-12;

/// Lossless DC load flow. `injections` holds net generation minus load per
/// bus in pu; the slack entry is replaced by minus the sum of the others.
pub fn dc_flow(case: &Case, topo: &Topology, injections: &[f64]) -> DcFlow {
    let n = case.buses.len();
    let slack = case.slack_index().unwrap_or(0);
    let mut inj = injections.to_vec();
    inj[slack] = 0.0;
    inj[slack] = -inj.iter().sum::<f64>();

    let comp = topo.components(n);
    let stranded: Vec<usize> = (0..n)
        .filter(|&i| comp[i] != comp[slack] && inj[i].abs() > INJECTION_EPS)
        .map(|i| case.buses[i].id)
        .collect();
    if !stranded.is_empty() {
        return DcFlow::Islanded(stranded);
    }

    // Reduced susceptance matrix over buses in the slack's component.
    let active: Vec<usize> = (0..n).filter(|&i| i != slack && comp[i] == comp[slack]).collect();
    let mut pos = vec![usize::MAX; n];
    for (k, &i) in active.iter().enumerate() {
        pos[i] = k;
    }
    let m = active.len();
    let mut b = DMatrix::<f64>::zeros(m, m);
    for g in &topo.groups {
        let y = g.count as f64 / g.x;
        let (f, t) = (pos[g.from], pos[g.to]);
        if f != usize::MAX {
            b[(f, f)] += y;
        }
        if t != usize::MAX {
            b[(t, t)] += y;
        }
        if f != usize::MAX && t != usize::MAX {
            b[(f, t)] -= y;
            b[(t, f)] -= y;
        }
    }
    let rhs = DVector::from_iterator(m, active.iter().map(|&i| inj[i]));
    let mut theta = vec![0.0; n];
    if m > 0 {
        let sol = match b.clone().cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => match b.lu().solve(&rhs) {
                Some(s) => s,
                None => return DcFlow::Islanded(active.iter().map(|&i| case.buses[i].id).collect()),
            },
        };
        for (k, &i) in active.iter().enumerate() {
            theta[i] = sol[k];
        }
    }
    let flows = topo
        .groups
        .iter()
        .map(|g| g.count as f64 / g.x * (theta[g.from] - theta[g.to]))
        .collect();
    DcFlow::Solved(DcSolution {
        theta,
        flows,
        injections: inj,
    })
}

/// Real power sent from `i` over one branch with the quadratic loss term:
/// `b θ + g θ² / 2`.
pub fn lossy_flow(b: f64, g: f64, theta_ij: f64) -> f64 {
    b * theta_ij + g * theta_ij * theta_ij / 2.0
}

/// Series conductance and susceptance magnitude of a branch.
pub fn series_gb(r: f64, x: f64) -> (f64, f64) {
    let d = r * r + x * x;
    (r / d, x / d)
}

/// Lossy flows for given angles: one entry per existing branch row (all
/// its circuits), then one per candidate corridor scaled by its
/// expansion decision `ed[k]` in [0, 1).
pub fn dc_flow_lossy(case: &Case, ed: &[f64], theta: &[f64]) -> Vec<f64> {
    let idx = |id: usize| case.bus_index(id).expect("validated case");
    let mut out = Vec::with_capacity(case.branches.len() + case.line_candidates.len());
    for br in &case.branches {
        let (g, b) = series_gb(br.r, br.x);
        let th = theta[idx(br.from)] - theta[idx(br.to)];
        out.push(br.circuits as f64 * lossy_flow(b, g, th));
    }
    for (l, &e) in case.line_candidates.iter().zip(ed) {
        let (g, b) = series_gb(l.r, l.x);
        let th = theta[idx(l.from)] - theta[idx(l.to)];
        out.push(e * lossy_flow(b, g, th));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CircuitGroup;

    pub(crate) fn ring_case() -> Case {
        crate::case_io::parse_case(
            "[BASE] key value\nname ring\nmva 100\n\
             [BUS] id type v_set pd_mw\n1 slack 1.0 0\n2 load - 100\n3 load - 0\n\
             [BRANCH] from to x capacity\n1 2 0.1 5\n1 3 0.1 5\n3 2 0.1 5\n",
        )
        .unwrap()
    }

    #[test]
    fn three_bus_ring() {
        let c = ring_case();
        let t = Topology::existing(&c);
        let s = dc_flow(&c, &t, &[1.0, -1.0, 0.0]);
        let s = s.solution().unwrap();
        let want = [2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0];
        for (f, w) in s.flows.iter().zip(want) {
            assert!((f - w).abs() < 1e-12, "{:?}", s.flows);
        }
    }

    #[test]
    fn zero_injection() {
        let c = ring_case();
        let t = Topology::existing(&c);
        let s = dc_flow(&c, &t, &[0.0; 3]);
        let s = s.solution().unwrap();
        assert!(s.theta.iter().chain(&s.flows).all(|&v| v == 0.0));
    }

    #[test]
    fn island_with_load_is_reported() {
        let c = ring_case();
        let t = Topology {
            groups: vec![CircuitGroup { from: 0, to: 2, r: 0.0, x: 0.1, b_half: 0.0, capacity_pu: 1.0, count: 1 }],
        };
        assert_eq!(dc_flow(&c, &t, &[1.0, -1.0, 0.0]), DcFlow::Islanded(vec![2]));
    }

    #[test]
    fn lossy_kernel() {
        assert_eq!(lossy_flow(10.0, 1.0, 0.0), 0.0);
        assert!((lossy_flow(10.0, 1.0, 0.1) - 1.005).abs() < 1e-15);
        let c = ring_case();
        let f = dc_flow_lossy(&c, &[], &[0.0, 0.3, 0.1]);
        assert_eq!(f.len(), 3);
    }
}
