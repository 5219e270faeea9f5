//! Case files, run configurations, plan files and the bundled datasets.
//!
//! A case file is plain text split into sections. Each section header
//! names the section and declares its columns; every following row must
//! have exactly that many whitespace-separated fields:
//!
//! ```text
//! [BRANCH] from to r x b_half capacity circuits @capacity=MVA
//! 1 2 0.04 0.4 0 120 1
//! ```
//!
//! Header options start with `@`. `@capacity=pu|MVA|MW` sets the unit of
//! capacity columns, `@money=$|k$|M$` scales money columns and
//! `@cost_basis=per_circuit|per_mw` says whether corridor prices are per
//! circuit or per MW of rating. `-` marks a missing value. `#` starts a
//! comment when it begins a line or follows whitespace.
//!
//! In memory every capacity is in pu of the case base and every price is
//! in dollars per circuit, so [`write_case`] output always reparses to an
//! identical case.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::economics::DiscountConvention;
use crate::error::{Error, Result};
use crate::metaheuristics::{GaParams, PsoParams};
use crate::model::*;

const SECTIONS: [&str; 9] = [
    "BASE",
    "BUS",
    "BRANCH",
    "GEN_EXISTING",
    "GEN_CANDIDATE",
    "LINE_CANDIDATE",
    "VAR_CANDIDATE",
    "SCENARIO",
    "ECON",
];

/// (required, optional) columns per section.
fn schema(section: &str) -> (&'static [&'static str], &'static [&'static str]) {
    match section {
        "BASE" | "ECON" => (&["key", "value"], &[]),
        "BUS" => (&["id", "type"], &["v_set", "pd_mw", "qd_mvar"]),
        "BRANCH" => (&["from", "to", "x", "capacity"], &["r", "b_half", "circuits"]),
        "GEN_EXISTING" => (
            &["name", "bus", "unit_mw"],
            &[
                "fuel",
                "units",
                "pmin_mw",
                "for_pct",
                "op_cost",
                "fixed_cost",
                "qmin_mvar",
                "qmax_mvar",
                "share",
            ],
        ),
        "GEN_CANDIDATE" => (
            &[
                "name",
                "fuel",
                "bus",
                "max_units",
                "unit_mw",
                "for_pct",
                "op_cost",
                "fixed_cost",
                "capital_cost",
            ],
            &["lifetime", "salvage"],
        ),
        "LINE_CANDIDATE" => (
            &["from", "to", "x", "capacity", "cost", "max_add"],
            &["r", "b_half"],
        ),
        "VAR_CANDIDATE" => (
            &["bus", "q_max_mvar", "fixed_cost", "cost_per_kvar"],
            &["q_min_mvar"],
        ),
        "SCENARIO" => (&["name", "scale", "hours", "power_factor"], &[]),
        _ => (&[], &[]),
    }
}

#[derive(Clone, Copy, PartialEq)]
enum CapUnit {
    Pu,
    Mva,
}

struct Header {
    name: String,
    columns: Vec<String>,
    cap: CapUnit,
    money: f64,
    per_mw: bool,
}

fn parse_header(line: &str, lineno: usize) -> Result<Header> {
    let close = line
        .find(']')
        .ok_or_else(|| Error::parse(lineno, "unterminated section header"))?;
    let name = line[1..close].trim().to_string();
    if !SECTIONS.contains(&name.as_str()) {
        return Err(Error::parse(lineno, format!("unknown section [{}]", name)));
    }
    let mut h = Header {
        name,
        columns: Vec::new(),
        cap: CapUnit::Pu,
        money: 1.0,
        per_mw: false,
    };
    for tok in line[close + 1..].split_whitespace() {
        if let Some(opt) = tok.strip_prefix('@') {
            let (k, v) = opt
                .split_once('=')
                .ok_or_else(|| Error::parse(lineno, format!("malformed option {}", tok)))?;
            match (k, v) {
                ("capacity", "pu") => h.cap = CapUnit::Pu,
                ("capacity", "MVA") | ("capacity", "MW") => h.cap = CapUnit::Mva,
                ("money", "$") => h.money = 1.0,
                ("money", "k$") => h.money = 1e3,
                ("money", "M$") => h.money = 1e6,
                ("cost_basis", "per_circuit") => h.per_mw = false,
                ("cost_basis", "per_mw") => h.per_mw = true,
                _ => return Err(Error::parse(lineno, format!("unsupported option {}", tok))),
            }
        } else {
            h.columns.push(tok.to_string());
        }
    }
    let (req, opt) = schema(&h.name);
    for c in &h.columns {
        if !req.contains(&c.as_str()) && !opt.contains(&c.as_str()) {
            return Err(Error::parse(
                lineno,
                format!("unknown column {} in [{}]", c, h.name),
            ));
        }
    }
    for r in req {
        if !h.columns.iter().any(|c| c == r) {
            return Err(Error::parse(
                lineno,
                format!("[{}] must declare column {}", h.name, r),
            ));
        }
    }
    Ok(h)
}

fn strip_comment(line: &str) -> &str {
    let bytes = line.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        if b == b'#' && (i == 0 || bytes[i - 1].is_ascii_whitespace()) {
            return &line[..i];
        }
    }
    line
}

struct Row<'a> {
    header: &'a Header,
    fields: Vec<&'a str>,
    line: usize,
}

impl<'a> Row<'a> {
    fn raw(&self, col: &str) -> Option<&'a str> {
        let i = self.header.columns.iter().position(|c| c == col)?;
        let v = self.fields[i];
        (v != "-").then_some(v)
    }

    fn text(&self, col: &str) -> Result<&'a str> {
        self.raw(col)
            .ok_or_else(|| Error::parse(self.line, format!("column {} may not be empty", col)))
    }

    fn num(&self, col: &str) -> Result<f64> {
        let s = self.text(col)?;
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::parse(self.line, format!("{}: expected a number, got {:?}", col, s)))
    }

    fn opt_num(&self, col: &str) -> Result<Option<f64>> {
        match self.raw(col) {
            None => Ok(None),
            Some(_) => self.num(col).map(Some),
        }
    }

    fn num_or(&self, col: &str, default: f64) -> Result<f64> {
        Ok(self.opt_num(col)?.unwrap_or(default))
    }

    fn int(&self, col: &str) -> Result<usize> {
        let s = self.text(col)?;
        s.parse::<usize>().map_err(|_| {
            Error::parse(self.line, format!("{}: expected a non-negative integer, got {:?}", col, s))
        })
    }

    fn int_or(&self, col: &str, default: usize) -> Result<usize> {
        match self.raw(col) {
            None => Ok(default),
            Some(_) => self.int(col),
        }
    }
}

/// Parse a case from text. The result has passed [`validate_case`].
pub fn parse_case(text: &str) -> Result<Case> {
    let mut case = Case {
        name: String::new(),
        base_mva: 100.0,
        dispatch: DispatchMode::Economic,
        cost_interpretation: CostInterpretation::AsPrinted,
        v_min: 0.95,
        v_max: 1.05,
        buses: Vec::new(),
        branches: Vec::new(),
        gen_existing: Vec::new(),
        gen_candidates: Vec::new(),
        line_candidates: Vec::new(),
        var_candidates: Vec::new(),
        scenarios: Vec::new(),
        econ: Econ {
            peak_mw: Vec::new(),
            ..Econ::default()
        },
    };
    let mut headers: Vec<Header> = Vec::new();
    let mut rows: Vec<(usize, usize, Vec<&str>)> = Vec::new();
    let mut seen_sections = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            let h = parse_header(line, lineno)?;
            if seen_sections.contains(&h.name) {
                return Err(Error::parse(lineno, format!("section [{}] repeated", h.name)));
            }
            seen_sections.push(h.name.clone());
            headers.push(h);
            continue;
        }
        let Some(h) = headers.last() else {
            return Err(Error::parse(lineno, "data before the first section header"));
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != h.columns.len() {
            return Err(Error::parse(
                lineno,
                format!(
                    "[{}] rows need {} columns, found {}",
                    h.name,
                    h.columns.len(),
                    fields.len()
                ),
            ));
        }
        rows.push((headers.len() - 1, lineno, fields));
    }
    if headers.is_empty() {
        return Err(Error::parse(1, "no sections found"));
    }
    let last_line = text.lines().count().max(1);
    for needed in ["BASE", "BUS", "BRANCH"] {
        if !seen_sections.iter().any(|s| s == needed) {
            return Err(Error::parse(last_line, format!("missing [{}] section", needed)));
        }
    }

    // BASE first so that capacities in MVA can be converted.
    let mut econ_peaks: BTreeMap<usize, f64> = BTreeMap::new();
    let mut fuel_cost: BTreeMap<Fuel, [Option<f64>; 3]> = BTreeMap::new();
    let mut mix: BTreeMap<Fuel, (f64, f64)> = BTreeMap::new();
    let ordered = rows
        .iter()
        .filter(|(h, _, _)| headers[*h].name == "BASE")
        .chain(rows.iter().filter(|(h, _, _)| headers[*h].name != "BASE"));
    for (hi, lineno, fields) in ordered {
        let h = &headers[*hi];
        let row = Row {
            header: h,
            fields: fields.clone(),
            line: *lineno,
        };
        let cap_pu = |v: f64, base: f64| match h.cap {
            CapUnit::Pu => v,
            CapUnit::Mva => v / base,
        };
        match h.name.as_str() {
            "BASE" => {
                let key = row.text("key")?;
                let val = row.text("value")?;
                match key {
                    "name" => case.name = val.to_string(),
                    "mva" => case.base_mva = row.num("value")?,
                    "v_min" => case.v_min = row.num("value")?,
                    "v_max" => case.v_max = row.num("value")?,
                    "dispatch" => {
                        case.dispatch = match val {
                            "economic" => DispatchMode::Economic,
                            "participation" => DispatchMode::Participation,
                            _ => return Err(Error::parse(*lineno, format!("unknown dispatch {}", val))),
                        }
                    }
                    "cost_interpretation" => {
                        case.cost_interpretation = match val {
                            "as_printed" => CostInterpretation::AsPrinted,
                            "swapped" => CostInterpretation::Swapped,
                            _ => {
                                return Err(Error::parse(
                                    *lineno,
                                    format!("unknown cost interpretation {}", val),
                                ))
                            }
                        }
                    }
                    _ => return Err(Error::parse(*lineno, format!("unknown [BASE] key {}", key))),
                }
            }
            "BUS" => {
                let kind = match row.text("type")? {
                    "slack" => BusKind::Slack,
                    "pv" => BusKind::Pv,
                    "load" => BusKind::Load,
                    other => return Err(Error::parse(*lineno, format!("unknown bus type {}", other))),
                };
                case.buses.push(Bus {
                    id: row.int("id")?,
                    kind,
                    v_setpoint: row.opt_num("v_set")?,
                    p_demand_mw: row.num_or("pd_mw", 0.0)?,
                    q_demand_mvar: row.opt_num("qd_mvar")?,
                });
            }
            "BRANCH" => case.branches.push(Branch {
                from: row.int("from")?,
                to: row.int("to")?,
                r: row.num_or("r", 0.0)?,
                x: row.num("x")?,
                b_half: row.num_or("b_half", 0.0)?,
                capacity_pu: cap_pu(row.num("capacity")?, case.base_mva),
                circuits: row.int_or("circuits", 1)? as u32,
            }),
            "GEN_EXISTING" => {
                let fuel = match row.raw("fuel") {
                    None => None,
                    Some(f) => Some(
                        Fuel::parse(f)
                            .ok_or_else(|| Error::parse(*lineno, format!("unknown fuel {}", f)))?,
                    ),
                };
                case.gen_existing.push(ExistingUnit {
                    name: row.text("name")?.to_string(),
                    fuel,
                    bus: row.int("bus")?,
                    units: row.int_or("units", 1)? as u32,
                    unit_mw: row.num("unit_mw")?,
                    pmin_mw: row.num_or("pmin_mw", 0.0)?,
                    for_rate: row.num_or("for_pct", 0.0)? / 100.0,
                    op_cost: row.num_or("op_cost", 0.0)?,
                    fixed_cost: row.num_or("fixed_cost", 0.0)?,
                    q_min_mvar: row.opt_num("qmin_mvar")?,
                    q_max_mvar: row.opt_num("qmax_mvar")?,
                    share: row.opt_num("share")?,
                });
            }
            "GEN_CANDIDATE" => {
                let f = row.text("fuel")?;
                case.gen_candidates.push(CandidatePlant {
                    name: row.text("name")?.to_string(),
                    fuel: Fuel::parse(f)
                        .ok_or_else(|| Error::parse(*lineno, format!("unknown fuel {}", f)))?,
                    bus: row.int("bus")?,
                    unit_mw: row.num("unit_mw")?,
                    max_units: row.int("max_units")? as u32,
                    for_rate: row.num("for_pct")? / 100.0,
                    op_cost: row.num("op_cost")?,
                    fixed_cost: row.num("fixed_cost")?,
                    capital_cost: row.num("capital_cost")?,
                    lifetime_years: row.num_or("lifetime", 0.0)?,
                    salvage_factor: row.num_or("salvage", 0.1)?,
                });
            }
            "LINE_CANDIDATE" => {
                let capacity_pu = cap_pu(row.num("capacity")?, case.base_mva);
                let mut cost = row.num("cost")? * h.money;
                if h.per_mw {
                    cost *= capacity_pu * case.base_mva;
                }
                case.line_candidates.push(CandidateLine {
                    from: row.int("from")?,
                    to: row.int("to")?,
                    r: row.num_or("r", 0.0)?,
                    x: row.num("x")?,
                    b_half: row.num_or("b_half", 0.0)?,
                    capacity_pu,
                    cost,
                    max_add: row.int("max_add")? as u32,
                });
            }
            "VAR_CANDIDATE" => case.var_candidates.push(VarCandidate {
                bus: row.int("bus")?,
                q_min_mvar: row.num_or("q_min_mvar", 0.0)?,
                q_max_mvar: row.num("q_max_mvar")?,
                fixed_cost: row.num("fixed_cost")? * h.money,
                cost_per_kvar: row.num("cost_per_kvar")? * h.money,
            }),
            "SCENARIO" => case.scenarios.push(LoadScenario {
                name: row.text("name")?.to_string(),
                scale: row.num("scale")?,
                duration_hours: row.num("hours")?,
                power_factor: row.num("power_factor")?,
            }),
            "ECON" => {
                let key = row.text("key")?;
                if let Some(t) = key.strip_prefix("peak_mw_stage_") {
                    let t: usize = t
                        .parse()
                        .map_err(|_| Error::parse(*lineno, format!("bad stage in {}", key)))?;
                    econ_peaks.insert(t, row.num("value")?);
                } else if let Some((which, fuel)) = key
                    .strip_prefix("cost_c")
                    .and_then(|r| r.split_once('_'))
                {
                    let fuel = Fuel::parse(fuel)
                        .ok_or_else(|| Error::parse(*lineno, format!("unknown fuel in {}", key)))?;
                    let slot = match which {
                        "2" => 0,
                        "1" => 1,
                        "0" => 2,
                        _ => return Err(Error::parse(*lineno, format!("unknown key {}", key))),
                    };
                    fuel_cost.entry(fuel).or_default()[slot] = Some(row.num("value")?);
                } else if let Some(rest) = key.strip_prefix("fuel_mix_") {
                    let (bound, fuel) = rest
                        .split_once('_')
                        .ok_or_else(|| Error::parse(*lineno, format!("unknown key {}", key)))?;
                    let fuel = Fuel::parse(fuel)
                        .ok_or_else(|| Error::parse(*lineno, format!("unknown fuel in {}", key)))?;
                    let e = mix.entry(fuel).or_insert((0.0, 1.0));
                    match bound {
                        "min" => e.0 = row.num("value")?,
                        "max" => e.1 = row.num("value")?,
                        _ => return Err(Error::parse(*lineno, format!("unknown key {}", key))),
                    }
                } else {
                    match key {
                        "stage_years" => case.econ.stage_years = row.num("value")?,
                        "loss_cost_per_kwh" => case.econ.loss_cost_per_kwh = row.num("value")?,
                        _ => return Err(Error::parse(*lineno, format!("unknown [ECON] key {}", key))),
                    }
                }
            }
            _ => unreachable!("section names are checked in parse_header"),
        }
    }
    for (i, (t, v)) in econ_peaks.iter().enumerate() {
        if *t != i {
            return Err(Error::parse(last_line, format!("peak_mw_stage_{} is missing", i)));
        }
        case.econ.peak_mw.push(*v);
    }
    for (fuel, c) in fuel_cost {
        match c {
            [Some(c2), Some(c1), Some(c0)] => {
                case.econ.fuel_cost.insert(fuel, QuadCost { c2, c1, c0 });
            }
            _ => {
                return Err(Error::parse(
                    last_line,
                    format!("incomplete cost coefficients for {}", fuel.as_str()),
                ))
            }
        }
    }
    case.econ.fuel_mix = mix;
    let v = validate_case(&case);
    if !v.is_empty() {
        return Err(Error::Validation(v));
    }
    Ok(case)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| x.to_string())
}

/// Serialize a case in canonical units (pu capacities, dollar prices per
/// circuit).
pub fn write_case(case: &Case) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "[BASE] key value");
    let _ = writeln!(s, "name {}", case.name);
    let _ = writeln!(s, "mva {}", case.base_mva);
    let _ = writeln!(
        s,
        "dispatch {}",
        match case.dispatch {
            DispatchMode::Economic => "economic",
            DispatchMode::Participation => "participation",
        }
    );
    let _ = writeln!(
        s,
        "cost_interpretation {}",
        match case.cost_interpretation {
            CostInterpretation::AsPrinted => "as_printed",
            CostInterpretation::Swapped => "swapped",
        }
    );
    let _ = writeln!(s, "v_min {}\nv_max {}\n", case.v_min, case.v_max);
    let _ = writeln!(s, "[BUS] id type v_set pd_mw qd_mvar");
    for b in &case.buses {
        let kind = match b.kind {
            BusKind::Slack => "slack",
            BusKind::Pv => "pv",
            BusKind::Load => "load",
        };
        let _ = writeln!(
            s,
            "{} {} {} {} {}",
            b.id,
            kind,
            opt(b.v_setpoint),
            b.p_demand_mw,
            opt(b.q_demand_mvar)
        );
    }
    let _ = writeln!(s, "\n[BRANCH] from to r x b_half capacity circuits");
    for b in &case.branches {
        let _ = writeln!(
            s,
            "{} {} {} {} {} {} {}",
            b.from, b.to, b.r, b.x, b.b_half, b.capacity_pu, b.circuits
        );
    }
    if !case.gen_existing.is_empty() {
        let _ = writeln!(
            s,
            "\n[GEN_EXISTING] name fuel bus units unit_mw pmin_mw for_pct op_cost fixed_cost qmin_mvar qmax_mvar share"
        );
        for g in &case.gen_existing {
            let _ = writeln!(
                s,
                "{} {} {} {} {} {} {} {} {} {} {} {}",
                g.name,
                g.fuel.map_or("-", |f| f.as_str()),
                g.bus,
                g.units,
                g.unit_mw,
                g.pmin_mw,
                g.for_rate * 100.0,
                g.op_cost,
                g.fixed_cost,
                opt(g.q_min_mvar),
                opt(g.q_max_mvar),
                opt(g.share)
            );
        }
    }
    if !case.gen_candidates.is_empty() {
        let _ = writeln!(
            s,
            "\n[GEN_CANDIDATE] name fuel bus max_units unit_mw for_pct op_cost fixed_cost capital_cost lifetime salvage"
        );
        for c in &case.gen_candidates {
            let _ = writeln!(
                s,
                "{} {} {} {} {} {} {} {} {} {} {}",
                c.name,
                c.fuel.as_str(),
                c.bus,
                c.max_units,
                c.unit_mw,
                c.for_rate * 100.0,
                c.op_cost,
                c.fixed_cost,
                c.capital_cost,
                c.lifetime_years,
                c.salvage_factor
            );
        }
    }
    if !case.line_candidates.is_empty() {
        let _ = writeln!(s, "\n[LINE_CANDIDATE] from to r x b_half capacity cost max_add");
        for l in &case.line_candidates {
            let _ = writeln!(
                s,
                "{} {} {} {} {} {} {} {}",
                l.from, l.to, l.r, l.x, l.b_half, l.capacity_pu, l.cost, l.max_add
            );
        }
    }
    if !case.var_candidates.is_empty() {
        let _ = writeln!(s, "\n[VAR_CANDIDATE] bus q_min_mvar q_max_mvar fixed_cost cost_per_kvar");
        for v in &case.var_candidates {
            let _ = writeln!(
                s,
                "{} {} {} {} {}",
                v.bus, v.q_min_mvar, v.q_max_mvar, v.fixed_cost, v.cost_per_kvar
            );
        }
    }
    if !case.scenarios.is_empty() {
        let _ = writeln!(s, "\n[SCENARIO] name scale hours power_factor");
        for sc in &case.scenarios {
            let _ = writeln!(
                s,
                "{} {} {} {}",
                sc.name, sc.scale, sc.duration_hours, sc.power_factor
            );
        }
    }
    let _ = writeln!(s, "\n[ECON] key value");
    let _ = writeln!(s, "stage_years {}", case.econ.stage_years);
    let _ = writeln!(s, "loss_cost_per_kwh {}", case.econ.loss_cost_per_kwh);
    for (t, d) in case.econ.peak_mw.iter().enumerate() {
        let _ = writeln!(s, "peak_mw_stage_{} {}", t, d);
    }
    for (f, c) in &case.econ.fuel_cost {
        let n = f.as_str();
        let _ = writeln!(s, "cost_c2_{} {}\ncost_c1_{} {}\ncost_c0_{} {}", n, c.c2, n, c.c1, n, c.c0);
    }
    for (f, (lo, hi)) in &case.econ.fuel_mix {
        let n = f.as_str();
        let _ = writeln!(s, "fuel_mix_min_{} {}\nfuel_mix_max_{} {}", n, lo, n, hi);
    }
    s
}

/// Bundled case files by name.
pub const BUNDLED_CASES: [(&str, &str); 3] = [
    ("garver6", include_str!("../data/cases/garver6.case")),
    ("ieee24", include_str!("../data/cases/ieee24.case")),
    ("ieee24-weak", include_str!("../data/cases/ieee24-weak.case")),
];

pub const BUNDLED_CONFIGS: [(&str, &str); 4] = [
    ("thesis-ch2", include_str!("../data/configs/thesis-ch2.toml")),
    ("thesis-ch3", include_str!("../data/configs/thesis-ch3.toml")),
    ("thesis-ch4", include_str!("../data/configs/thesis-ch4.toml")),
    ("thesis-ch5", include_str!("../data/configs/thesis-ch5.toml")),
];

pub const BUNDLED_PLANS: [(&str, &str); 11] = [
    ("ieee24-tcgep", include_str!("../data/plans/ieee24-tcgep.plan")),
    ("ieee24-gep", include_str!("../data/plans/ieee24-gep.plan")),
    ("ieee24-weak-composite", include_str!("../data/plans/ieee24-weak-composite.plan")),
    ("ieee24-weak-separate", include_str!("../data/plans/ieee24-weak-separate.plan")),
    ("ieee24-weak-dynamic-lines", include_str!("../data/plans/ieee24-weak-dynamic-lines.plan")),
    ("garver-actnep", include_str!("../data/plans/garver-actnep.plan")),
    ("garver-actnep-n1", include_str!("../data/plans/garver-actnep-n1.plan")),
    ("garver-integrated", include_str!("../data/plans/garver-integrated.plan")),
    ("garver-separate", include_str!("../data/plans/garver-separate.plan")),
    ("garver-integrated-n1", include_str!("../data/plans/garver-integrated-n1.plan")),
    ("garver-separate-n1", include_str!("../data/plans/garver-separate-n1.plan")),
];

pub const BUNDLED_DISPATCH: [(&str, &str); 2] = [
    ("ieee24-tcgep", include_str!("../data/plans/ieee24-tcgep.dispatch")),
    ("ieee24-gep", include_str!("../data/plans/ieee24-gep.dispatch")),
];

fn lookup<'a>(table: &'a [(&'a str, &'a str)], name: &str) -> Option<&'a str> {
    table.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Read a file, or fall back to a bundled entry when `spec` names one and
/// no such file exists.
fn read_source(spec: &str, bundled: &[(&str, &str)]) -> Result<String> {
    let path = Path::new(spec);
    if path.exists() {
        return std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        });
    }
    if let Some(t) = lookup(bundled, spec) {
        return Ok(t.to_string());
    }
    Err(Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or bundled name"),
    })
}

/// Load a case from a path or a bundled name (`garver6`, `ieee24`,
/// `ieee24-weak`).
pub fn load_case(spec: &str) -> Result<Case> {
    parse_case(&read_source(spec, &BUNDLED_CASES)?)
}

/// Load a case and also return the SHA-256 of its source text.
pub fn load_case_hashed(spec: &str) -> Result<(Case, String)> {
    let text = read_source(spec, &BUNDLED_CASES)?;
    Ok((parse_case(&text)?, sha256_hex(&text)))
}

pub fn bundled_case(name: &str) -> Case {
    let text = lookup(&BUNDLED_CASES, name).unwrap_or_else(|| panic!("no bundled case {}", name));
    parse_case(text).expect("bundled cases parse")
}

pub fn sha256_hex(text: &str) -> String {
    let d = Sha256::digest(text.as_bytes());
    d.iter().map(|b| format!("{:02x}", b)).collect()
}

/// How decoded counts above a limit are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LimitHandling {
    #[default]
    Clamp,
    Penalize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LoopParams {
    pub max_loops: usize,
    /// Stop when the relative improvement of the combined cost falls below this.
    pub rel_tolerance: f64,
}

impl Default for LoopParams {
    fn default() -> Self {
        LoopParams {
            max_loops: 10,
            rel_tolerance: 1e-3,
        }
    }
}

/// Options of the interior-point TNEP solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IpOptions {
    pub eps1: f64,
    pub eps2: f64,
    pub eps_mu: f64,
    /// Barrier value at the starting point.
    pub mu0: f64,
    /// The barrier is not lowered below this multiple of the primal-dual
    /// infeasibility (nor raised above its current value); 0 follows the
    /// gap-based update alone.
    pub infeasibility_floor: f64,
    pub gamma: f64,
    pub beta0: f64,
    pub alpha: f64,
    pub u_max: f64,
    pub max_iterations: usize,
    pub round_threshold: f64,
    /// Parallel candidate copies per corridor; 0 uses the corridor limit.
    pub copies: u32,
}

impl Default for IpOptions {
    fn default() -> Self {
        IpOptions {
            eps1: 1e-4,
            eps2: 1e-6,
            eps_mu: 1e-12,
            mu0: 0.1,
            infeasibility_floor: 1.0,
            gamma: 0.9995,
            beta0: 0.2,
            alpha: 1.0,
            u_max: 20.0,
            max_iterations: 300,
            round_threshold: 0.5,
            copies: 0,
        }
    }
}

/// Run configuration. Every field has a default, so an empty file is a
/// valid configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub planner: Option<String>,
    pub seed: Option<u64>,
    pub stages: usize,
    pub discount_rate: f64,
    pub discount_convention: DiscountConvention,
    pub reserve_min: f64,
    pub reserve_max: f64,
    pub lolp_max: f64,
    pub mc_samples: usize,
    /// Fitness scale in `alpha / (1 + J)`.
    pub alpha: f64,
    /// Penalty weight as a multiple of the largest candidate investment.
    pub penalty_factor: f64,
    pub limit_handling: LimitHandling,
    pub ga: GaParams,
    pub pso: PsoParams,
    pub integrated: LoopParams,
    pub ip: IpOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            planner: None,
            seed: None,
            stages: 3,
            discount_rate: 0.085,
            discount_convention: DiscountConvention::AsPrinted,
            reserve_min: 0.2,
            reserve_max: 0.6,
            lolp_max: 0.01,
            mc_samples: 400_000,
            alpha: 1e10,
            penalty_factor: 10.0,
            limit_handling: LimitHandling::Clamp,
            ga: GaParams::default(),
            pso: PsoParams::default(),
            integrated: LoopParams::default(),
            ip: IpOptions::default(),
        }
    }
}

impl RunConfig {
    /// Seed to use, falling back to 0.
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn seed_defaulted(&self) -> bool {
        self.seed.is_none()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if !prob(self.ga.p_crossover) || !prob(self.ga.p_mutation) {
            return bad("GA probabilities must lie in [0, 1]");
        }
        if self.ga.population < 2 || self.ga.population % 2 != 0 {
            return bad("GA population must be even and at least 2");
        }
        if self.ga.elites > self.ga.population {
            return bad("more elites than individuals");
        }
        if self.pso.population < 1 {
            return bad("PSO needs at least one particle");
        }
        if !(self.discount_rate > 0.0 && self.discount_rate < 1.0) {
            return bad("discount rate must lie in (0, 1)");
        }
        if self.stages < 1 {
            return bad("at least one stage is required");
        }
        if !(self.reserve_min <= self.reserve_max) {
            return bad("reserve margins out of order");
        }
        if !prob(self.lolp_max) {
            return bad("LOLP criterion must lie in [0, 1]");
        }
        if !(self.ip.gamma > 0.0 && self.ip.gamma < 1.0) {
            return bad("interior-point step factor must lie in (0, 1)");
        }
        if !(self.alpha > 0.0) {
            return bad("fitness scale must be positive");
        }
        Ok(())
    }

    /// Canonical text used for hashing.
    pub fn canonical(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }

    pub fn hash(&self) -> String {
        sha256_hex(&self.canonical())
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let line = e
            .span()
            .map(|s| text[..s.start.min(text.len())].lines().count().max(1))
            .unwrap_or(1);
        Error::parse(line, e.message().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Load a configuration from a path or bundled name (`thesis-ch2` ...).
pub fn load_config(spec: &str) -> Result<RunConfig> {
    parse_config(&read_source(spec, &BUNDLED_CONFIGS)?)
}

pub fn bundled_config(name: &str) -> RunConfig {
    let text = lookup(&BUNDLED_CONFIGS, name).unwrap_or_else(|| panic!("no bundled config {}", name));
    parse_config(text).expect("bundled configs parse")
}

/// Parse a plan file (`stage,item,count` rows). The plan gets at least
/// `min_stages` stages, more if the file mentions later ones.
pub fn parse_plan(text: &str, case: &Case, min_stages: usize) -> Result<ExpansionPlan> {
    let mut entries = Vec::new();
    let mut max_stage = min_stages.max(1);
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() || line.replace(' ', "") == "stage,item,count" {
            continue;
        }
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::parse(lineno, "plan rows need stage,item,count"));
        }
        let stage: usize = parts[0]
            .parse()
            .ok()
            .filter(|&s| s >= 1)
            .ok_or_else(|| Error::parse(lineno, format!("bad stage {:?}", parts[0])))?;
        let count: u32 = parts[2]
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad count {:?}", parts[2])))?;
        max_stage = max_stage.max(stage);
        entries.push((lineno, stage, parts[1].to_string(), count));
    }
    let mut plan = ExpansionPlan::empty(case, max_stage);
    for (lineno, stage, item, count) in entries {
        let (kind, what) = item
            .split_once(':')
            .ok_or_else(|| Error::parse(lineno, format!("item {:?} lacks a kind prefix", item)))?;
        match kind {
            "gen" => {
                let k = case
                    .gen_candidate_index(what)
                    .ok_or_else(|| Error::parse(lineno, format!("unknown candidate plant {}", what)))?;
                plan.gen[stage - 1][k] += count;
            }
            "line" => {
                let (f, t) = what
                    .split_once('-')
                    .and_then(|(f, t)| Some((f.parse().ok()?, t.parse().ok()?)))
                    .ok_or_else(|| Error::parse(lineno, format!("bad corridor {}", what)))?;
                let k = case
                    .line_candidate_index(f, t)
                    .ok_or_else(|| Error::parse(lineno, format!("unknown corridor {}", what)))?;
                plan.lines[stage - 1][k] += count;
            }
            "var" => {
                let bus: usize = what
                    .parse()
                    .map_err(|_| Error::parse(lineno, format!("bad bus {}", what)))?;
                let k = case
                    .var_candidate_index(bus)
                    .ok_or_else(|| Error::parse(lineno, format!("no reactive candidate at bus {}", bus)))?;
                plan.var_mvar[k] += count;
            }
            _ => return Err(Error::parse(lineno, format!("unknown item kind {}", kind))),
        }
    }
    Ok(plan)
}

pub fn load_plan(spec: &str, case: &Case, min_stages: usize) -> Result<ExpansionPlan> {
    parse_plan(&read_source(spec, &BUNDLED_PLANS)?, case, min_stages)
}

pub fn bundled_plan(name: &str, case: &Case, min_stages: usize) -> ExpansionPlan {
    let text = lookup(&BUNDLED_PLANS, name).unwrap_or_else(|| panic!("no bundled plan {}", name));
    parse_plan(text, case, min_stages).expect("bundled plans parse")
}

/// Write a plan as `stage,item,count` rows, omitting zero entries.
pub fn write_plan(plan: &ExpansionPlan, case: &Case) -> String {
    let mut s = String::from("stage,item,count\n");
    for (t, stage) in plan.gen.iter().enumerate() {
        for (c, &u) in case.gen_candidates.iter().zip(stage) {
            if u > 0 {
                let _ = writeln!(s, "{},gen:{},{}", t + 1, c.name, u);
            }
        }
    }
    for (t, stage) in plan.lines.iter().enumerate() {
        for (l, &n) in case.line_candidates.iter().zip(stage) {
            if n > 0 {
                let _ = writeln!(s, "{},line:{},{}", t + 1, l.label(), n);
            }
        }
    }
    for (v, &q) in case.var_candidates.iter().zip(&plan.var_mvar) {
        if q > 0 {
            let _ = writeln!(s, "1,var:{},{}", v.bus, q);
        }
    }
    s
}

/// Generation per bus fixed externally for some stages (MW), keyed by
/// 1-based stage then bus id.
pub type RecordedDispatch = BTreeMap<usize, BTreeMap<usize, f64>>;

pub fn parse_dispatch(text: &str, case: &Case) -> Result<RecordedDispatch> {
    let mut out = RecordedDispatch::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() || line.replace(' ', "") == "stage,bus,mw" {
            continue;
        }
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed = (parts.len() == 3)
            .then(|| {
                Some((
                    parts[0].parse::<usize>().ok()?,
                    parts[1].parse::<usize>().ok()?,
                    parts[2].parse::<f64>().ok()?,
                ))
            })
            .flatten();
        let Some((stage, bus, mw)) = parsed else {
            return Err(Error::parse(lineno, "dispatch rows need stage,bus,mw"));
        };
        if case.bus_index(bus).is_none() {
            return Err(Error::parse(lineno, format!("unknown bus {}", bus)));
        }
        *out.entry(stage).or_default().entry(bus).or_default() += mw;
    }
    Ok(out)
}

pub fn load_dispatch(spec: &str, case: &Case) -> Result<RecordedDispatch> {
    parse_dispatch(&read_source(spec, &BUNDLED_DISPATCH)?, case)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn garver_bundle_shape() {
        let c = bundled_case("garver6");
        assert_eq!(c.buses.len(), 6);
        assert_eq!(c.branches.len(), 15);
        let existing: u32 = c.branches.iter().map(|b| b.circuits).sum();
        assert_eq!(existing, 7);
        assert_eq!(c.line_candidates.len(), 15);
        assert!((c.total_demand_mw() - 623.2).abs() < 1e-9);
        assert_eq!(c.base_mva, 1000.0);
        assert!((c.line_candidates[0].cost - 40e6).abs() < 1e-6);
        assert!((c.branches[0].capacity_pu - 0.12).abs() < 1e-15);
    }

    #[test]
    fn ieee24_bundle_shape() {
        let c = bundled_case("ieee24");
        assert_eq!(c.buses.len(), 24);
        assert_eq!(c.branches.len(), 38);
        assert_eq!(c.gen_candidates.len(), 21);
        assert_eq!(c.line_candidates.len(), 18);
        assert_eq!(c.total_demand_mw(), 3238.0);
        assert_eq!(c.existing_capacity_mw(), 3345.0);
        // 43.9 k$/MW on a 175 MW circuit.
        assert!((c.line_candidates[0].cost - 43.9e3 * 175.0).abs() < 1e-3);
        let w = bundled_case("ieee24-weak");
        assert_eq!(w.branches.len(), 33);
    }

    #[test]
    fn empty_file_is_error_at_line_one() {
        match parse_case("") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected parse error, got {:?}", other.map(|c| c.name)),
        }
    }

    #[test]
    fn column_count_mismatch_reports_line() {
        let text = "[BASE] key value\nname x\n[BUS] id type v_set pd_mw\n1 slack 1.0\n";
        match parse_case(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {:?}", other.map(|c| c.name)),
        }
    }

    #[test]
    fn unknown_section_rejected() {
        let text = "[BASE] key value\nname x\n[WIDGETS] a b\n";
        assert!(matches!(parse_case(text), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn names_with_hash_are_not_comments() {
        assert_eq!(strip_comment("LNG#1 lng 13 # note"), "LNG#1 lng 13 ");
    }

    #[test]
    fn round_trip_bundled_cases() {
        for (name, _) in BUNDLED_CASES {
            let c = bundled_case(name);
            let again = parse_case(&write_case(&c)).unwrap();
            assert_eq!(c, again, "{}", name);
        }
    }

    #[test]
    fn bundled_configs() {
        let c2 = bundled_config("thesis-ch2");
        assert_eq!(
            (c2.ga.population, c2.ga.generations, c2.ga.p_crossover, c2.ga.p_mutation, c2.ga.elites),
            (100, 1000, 0.9, 0.01, 5)
        );
        let c5 = bundled_config("thesis-ch5");
        assert_eq!(
            (c5.pso.population, c5.pso.iterations, c5.pso.w_max, c5.pso.w_min, c5.pso.c1, c5.pso.c2),
            (80, 200, 0.9, 0.3, 2.1, 2.1)
        );
    }

    #[test]
    fn missing_seed_defaults_to_zero_and_is_flagged() {
        let c = parse_config("stages = 2\n").unwrap();
        assert_eq!(c.seed(), 0);
        assert!(c.seed_defaulted());
        assert!(!bundled_config("thesis-ch4").seed_defaulted());
    }

    #[test]
    fn config_rejects_bad_probability() {
        let e = parse_config("[ga]\np_mutation = 1.5\n").unwrap_err();
        assert!(matches!(e, Error::Config(_)));
        assert!(parse_config("bogus = 1\n").is_err());
    }

    #[test]
    fn plan_round_trip() {
        let c = bundled_case("ieee24");
        let p = bundled_plan("ieee24-tcgep", &c, 3);
        assert_eq!(p.stages(), 3);
        let again = parse_plan(&write_plan(&p, &c), &c, 3).unwrap();
        assert_eq!(p, again);
    }

    #[test]
    fn plan_with_unknown_item_fails() {
        let c = bundled_case("garver6");
        assert!(parse_plan("1,line:1-9,1\n", &c, 1).is_err());
        assert!(parse_plan("1,gen:X,1\n", &c, 1).is_err());
    }
}
