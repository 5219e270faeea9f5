//! Randomised invariants of the network, reliability and encoding layers.

use gridplan::case_io::{bundled_case, LimitHandling};
use gridplan::metaheuristics::PlanEncoding;
use gridplan::model::{ExpansionPlan, Topology};
use gridplan::powerflow::dc_flow;
use gridplan::reliability::{lolp, lolp_monte_carlo, OutageModel};
use gridplan::reproduce::{lolp_enumerated, random_network};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn unit() -> impl Strategy<Value = (f64, f64)> {
    // Capacities on whole tenths of a MW, as in every case file.
    (1u32..4000, 0.0f64..0.3).prop_map(|(c, q)| (c as f64 / 10.0, q))
}

proptest! {
    #[test]
    fn lolp_matches_enumeration(units in prop::collection::vec(unit(), 1..10), frac in 0.0f64..1.2) {
        let m = OutageModel::new(units);
        let load = frac * m.installed_mw();
        let exact = lolp_enumerated(&m, load);
        prop_assert!((lolp(&m, load) - exact).abs() < 1e-9, "{} vs {}", lolp(&m, load), exact);
    }

    #[test]
    fn lolp_is_monotone_in_load(units in prop::collection::vec(unit(), 1..12), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let m = OutageModel::new(units);
        let (lo, hi) = (a.min(b) * m.installed_mw(), a.max(b) * m.installed_mw());
        prop_assert!(lolp(&m, lo) <= lolp(&m, hi) + 1e-12);
        prop_assert!((0.0..=1.0).contains(&lolp(&m, hi)));
    }

    #[test]
    fn adding_a_unit_never_raises_lolp(units in prop::collection::vec(unit(), 1..10), extra in unit(), frac in 0.1f64..1.0) {
        let m = OutageModel::new(units.clone());
        let load = frac * m.installed_mw();
        let mut more = units;
        more.push(extra);
        prop_assert!(lolp(&OutageModel::new(more), load) <= lolp(&m, load) + 1e-12);
    }

    #[test]
    fn dc_flow_balances_every_bus(seed in any::<u64>(), n in 3usize..14) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_network(&mut rng, n);
        let t = Topology::existing(&c);
        let inj: Vec<f64> = (0..n).map(|i| ((seed >> (i % 60)) & 0xff) as f64 / 100.0 - 1.2).collect();
        let sol = dc_flow(&c, &t, &inj);
        let sol = sol.solution().expect("random networks are connected");
        let mut net = sol.injections.clone();
        for (g, f) in t.groups.iter().zip(&sol.flows) {
            net[g.from] -= f;
            net[g.to] += f;
        }
        for r in net {
            prop_assert!(r.abs() < 1e-9, "residual {}", r);
        }
    }

    #[test]
    fn dc_flow_is_linear(seed in any::<u64>(), a in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_network(&mut rng, 8);
        let t = Topology::existing(&c);
        let x: Vec<f64> = (0..8).map(|i| (i as f64 * 0.37 + seed as f64 * 1e-19).sin()).collect();
        let scaled: Vec<f64> = x.iter().map(|v| a * v).collect();
        let fx = dc_flow(&c, &t, &x);
        let fs = dc_flow(&c, &t, &scaled);
        for (p, q) in fx.solution().unwrap().flows.iter().zip(&fs.solution().unwrap().flows) {
            prop_assert!((a * p - q).abs() < 1e-9);
        }
    }

    #[test]
    fn generation_encoding_round_trips(counts in prop::collection::vec(0u32..4, 1..200)) {
        let c = bundled_case("ieee24");
        let enc = PlanEncoding::generation(&c, 3, LimitHandling::Penalize);
        let mut plan = ExpansionPlan::empty(&c, 3);
        let mut it = counts.iter().cycle();
        for stage in plan.gen.iter_mut() {
            for u in stage.iter_mut() {
                *u = *it.next().unwrap();
            }
        }
        let back = enc.decode(&c, &enc.encode(&plan));
        prop_assert_eq!(back.gen, plan.gen);
    }
}

#[test]
fn monte_carlo_brackets_the_exact_value() {
    let m = OutageModel::new(vec![(400.0, 0.05), (400.0, 0.05), (350.0, 0.08), (200.0, 0.02), (150.0, 0.1)]);
    for load in [700.0, 1000.0, 1300.0] {
        let exact = lolp(&m, load);
        let (est, se) = lolp_monte_carlo(&m, load, 200_000, 5);
        assert!((est - exact).abs() <= 4.0 * se.max(1e-6), "{} vs {} (se {})", est, exact, se);
    }
}
