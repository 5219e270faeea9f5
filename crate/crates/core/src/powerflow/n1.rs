use rayon::prelude::*;

use super::ac::{ac_flow_fdlf, branch_apparent_flows, AcInput, AcOptions};
use crate::model::{Case, Topology};

/// One circuit out of service.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outage {
    /// Group index in the intact topology.
    pub group: usize,
    /// Which circuit of the group (0-based).
    pub circuit: u32,
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyViolation {
    pub outage: Outage,
    pub problems: Vec<String>,
}

/// All single-circuit outages of a topology, one per circuit.
pub fn outages(case: &Case, topo: &Topology) -> Vec<Outage> {
    let mut out = Vec::new();
    for (k, g) in topo.groups.iter().enumerate() {
        for c in 0..g.count {
            out.push(Outage {
                group: k,
                circuit: c,
                from: case.buses[g.from].id,
                to: case.buses[g.to].id,
            });
        }
    }
    out
}

/// Run `check` on the topology left by every single-circuit outage and
/// keep the outages that report problems, in outage order. Returns the
/// violations and the number of evaluations performed.
pub fn n1_screen_with<F>(case: &Case, topo: &Topology, check: F) -> (Vec<ContingencyViolation>, usize)
where
    F: Fn(&Topology) -> Vec<String> + Sync,
{
    let list = outages(case, topo);
    let results: Vec<Vec<String>> = list
        .par_iter()
        .map(|o| check(&topo.without_one(o.group)))
        .collect();
    let n = results.len();
    let violations = list
        .into_iter()
        .zip(results)
        .filter(|(_, p)| !p.is_empty())
        .map(|(outage, problems)| ContingencyViolation { outage, problems })
        .collect();
    (violations, n)
}

/// Problems of one AC operating point: islanding, non-convergence, flow
/// limits and voltage limits.
pub fn ac_problems(case: &Case, topo: &Topology, input: AcInput<'_>, opts: &AcOptions) -> Vec<String> {
    let sol = match ac_flow_fdlf(case, topo, input, opts) {
        Ok(s) => s,
        Err(e) => return vec![e.to_string()],
    };
    if !sol.converged {
        return vec![format!("load flow did not converge (mismatch {:.2e})", sol.mismatch)];
    }
    let mut out = Vec::new();
    for f in branch_apparent_flows(case, &sol, topo) {
        if f.s_max() > f.limit + 1e-9 {
            out.push(format!("{}-{} loaded {:.4} pu > {:.4}", f.from, f.to, f.s_max(), f.limit));
        }
    }
    for (b, &v) in case.buses.iter().zip(&sol.v) {
        if v < case.v_min - 1e-9 || v > case.v_max + 1e-9 {
            out.push(format!("bus {} voltage {:.4} pu", b.id, v));
        }
    }
    out
}

/// AC N-1 screen at one operating point.
pub fn n1_screen(
    case: &Case,
    topo: &Topology,
    input: AcInput<'_>,
    opts: &AcOptions,
) -> (Vec<ContingencyViolation>, usize) {
    n1_screen_with(case, topo, |t| ac_problems(case, t, input, opts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case_io::parse_case;

    #[test]
    fn parallel_pair_at_forty_percent() {
        let c = parse_case(
            "[BASE] key value\nname pair\nmva 100\n\
             [BUS] id type v_set pd_mw qd_mvar\n1 slack 1.0 0 0\n2 load - 80 0\n\
             [BRANCH] from to r x capacity circuits @capacity=MVA\n1 2 0 0.01 100 2\n",
        )
        .unwrap();
        let t = Topology::existing(&c);
        let sc = c.peak_scenario();
        let z = vec![0.0; 2];
        let input = AcInput { p_gen: &z, scenario: &sc, shunt_mvar: &z };
        let (v, n) = n1_screen(&c, &t, input, &AcOptions::default());
        assert_eq!(n, 2);
        assert!(v.is_empty(), "{:?}", v);
    }

    #[test]
    fn radial_feeder_islands() {
        let c = parse_case(
            "[BASE] key value\nname radial\nmva 100\n\
             [BUS] id type v_set pd_mw qd_mvar\n1 slack 1.0 0 0\n2 load - 10 0\n\
             [BRANCH] from to x capacity\n1 2 0.1 1\n",
        )
        .unwrap();
        let t = Topology::existing(&c);
        let sc = c.peak_scenario();
        let z = vec![0.0; 2];
        let input = AcInput { p_gen: &z, scenario: &sc, shunt_mvar: &z };
        let (v, n) = n1_screen(&c, &t, input, &AcOptions::default());
        assert_eq!(n, 1);
        assert_eq!(v.len(), 1);
        assert!(v[0].problems[0].contains("isolated"));
    }
}
