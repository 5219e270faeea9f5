//! Acceptance criteria. Prints one line per check with the measured and
//! expected values, then exits non-zero if any check failed. Arguments
//! filter criteria by name (`cargo test --test acceptance -- criterion_07`).
//! The statistical runs are shared with the elitism check, which inspects
//! their traces instead of searching again.

use std::process::ExitCode;

use gridplan::reproduce::{self, Budget, Check, SuiteRun};

type Criterion = (&'static str, fn(&mut Runs) -> Vec<Check>);

#[derive(Default)]
struct Runs {
    budget: Budget,
    ac_tnep: Option<SuiteRun>,
    gep: Option<SuiteRun>,
    composite: Option<SuiteRun>,
    integrated: Option<SuiteRun>,
}

fn cached(slot: &mut Option<SuiteRun>, budget: &Budget, f: fn(&Budget) -> gridplan::Result<SuiteRun>) -> SuiteRun {
    slot.get_or_insert_with(|| f(budget).expect("statistical run")).clone()
}

fn or_fail(criterion: u8, r: gridplan::Result<Vec<Check>>) -> Vec<Check> {
    r.unwrap_or_else(|e| {
        vec![Check::new(criterion, "run completes", e.to_string(), "no error".into(), false)]
    })
}

const CRITERIA: &[Criterion] = &[
    ("criterion_01_ac_plan_costs", |_| or_fail(1, reproduce::ac_plan_costs())),
    ("criterion_02_integrated_line_costs", |_| or_fail(2, reproduce::integrated_line_costs())),
    ("criterion_03_var_install_costs", |_| reproduce::var_costs()),
    ("criterion_04_stage_reserves", |_| reproduce::reserves()),
    ("criterion_05_ac_load_flow", |_| or_fail(5, reproduce::ac_load_flow())),
    ("criterion_06_dc_flow_screen", |_| or_fail(6, reproduce::dc_screen())),
    ("criterion_07_ga_ac_tnep", |r| cached(&mut r.ac_tnep, &r.budget, reproduce::ga_ac_tnep).checks),
    ("criterion_08_tc_gep_costs_more", |r| cached(&mut r.gep, &r.budget, reproduce::gep_ordering).checks),
    ("criterion_09_composite_beats_separate", |r| {
        cached(&mut r.composite, &r.budget, reproduce::composite_ordering).checks
    }),
    ("criterion_10_integrated_beats_separate", |r| {
        cached(&mut r.integrated, &r.budget, reproduce::integrated_ordering).checks
    }),
    ("criterion_11_lolp", |r| reproduce::lolp_properties(&r.budget)),
    ("criterion_12_flow_properties", |_| or_fail(12, reproduce::flow_properties())),
    ("criterion_13_interior_point", |_| or_fail(13, reproduce::ip_properties())),
    ("criterion_14_elitism", |r| {
        let b = r.budget.clone();
        let mut traces = Vec::new();
        traces.extend(cached(&mut r.ac_tnep, &b, reproduce::ga_ac_tnep).traces);
        traces.extend(cached(&mut r.gep, &b, reproduce::gep_ordering).traces);
        traces.extend(cached(&mut r.composite, &b, reproduce::composite_ordering).traces);
        traces.extend(cached(&mut r.integrated, &b, reproduce::integrated_ordering).traces);
        vec![reproduce::elitism(&traces)]
    }),
];

fn main() -> ExitCode {
    // libtest flags such as --nocapture are accepted and ignored.
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut runs = Runs::default();
    let mut failed = Vec::new();
    let mut ran = 0;
    for (name, f) in CRITERIA {
        if !filters.is_empty() && !filters.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        ran += 1;
        let checks = f(&mut runs);
        for c in &checks {
            println!(
                "criterion {:>2}: {} | {} | measured {} | expected {}",
                c.criterion,
                if c.pass { "PASS" } else { "FAIL" },
                c.label,
                c.measured,
                c.expected
            );
        }
        if checks.iter().any(|c| !c.pass) {
            failed.push(*name);
        }
    }
    println!(
        "\nacceptance: {} criteria, {} passed, {} failed",
        ran,
        ran - failed.len(),
        failed.len()
    );
    for name in &failed {
        println!("  failed: {}", name);
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
