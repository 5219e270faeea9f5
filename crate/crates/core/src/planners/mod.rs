//! Planning problems: each binds a plan encoding to an evaluator and a
//! search engine.
//!
//! Evaluators return an [`EvaluationOutcome`] whose objective is the
//! discounted cost plus a quadratic penalty `W (1 + v)²` for every
//! violated constraint, where `v` is the violation's normalized magnitude
//! and `W` is `penalty_factor` times the largest candidate investment.

mod ac;
mod generation;
mod run;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

pub use ac::*;
pub use generation::*;
pub use run::*;

use crate::case_io::{RecordedDispatch, RunConfig};
use crate::economics::{CostBreakdown, CostModel};
use crate::error::{Error, Result};
use crate::model::Case;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlannerKind {
    Gep,
    TcGep,
    CompositeStatic,
    CompositeDynamic,
    DcTnep,
    AcTnep,
    AcTnepN1,
    Rpp,
    Integrated,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 9] = [
        PlannerKind::Gep,
        PlannerKind::TcGep,
        PlannerKind::CompositeStatic,
        PlannerKind::CompositeDynamic,
        PlannerKind::DcTnep,
        PlannerKind::AcTnep,
        PlannerKind::AcTnepN1,
        PlannerKind::Rpp,
        PlannerKind::Integrated,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PlannerKind::Gep => "gep",
            PlannerKind::TcGep => "tc-gep",
            PlannerKind::CompositeStatic => "composite-static",
            PlannerKind::CompositeDynamic => "composite-dynamic",
            PlannerKind::DcTnep => "dc-tnep",
            PlannerKind::AcTnep => "ac-tnep",
            PlannerKind::AcTnepN1 => "ac-tnep-n1",
            PlannerKind::Rpp => "rpp",
            PlannerKind::Integrated => "integrated",
        }
    }

    /// Planners that see a single stage regardless of the configuration.
    pub fn is_static(self) -> bool {
        !matches!(self, PlannerKind::Gep | PlannerKind::TcGep | PlannerKind::CompositeDynamic)
    }
}

impl fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PlannerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        PlannerKind::ALL
            .into_iter()
            .find(|k| k.as_str() == key)
            .ok_or_else(|| {
                let names: Vec<&str> = PlannerKind::ALL.iter().map(|k| k.as_str()).collect();
                Error::Config(format!("unknown planner `{}` (expected one of {})", s, names.join(", ")))
            })
    }
}

/// Which constraint families an evaluator enforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Constraints {
    pub reserve: bool,
    pub lolp: bool,
    pub fuel_mix: bool,
    /// DC line flow limits at each stage's peak.
    pub network: bool,
    /// AC N-1 screen at the peak scenario.
    pub security: bool,
}

impl Constraints {
    pub const GENERATION: Constraints = Constraints {
        reserve: true,
        lolp: true,
        fuel_mix: true,
        network: false,
        security: false,
    };

    pub fn with_network(self) -> Self {
        Constraints { network: true, ..self }
    }

    pub const NETWORK_ONLY: Constraints = Constraints {
        reserve: false,
        lolp: false,
        fuel_mix: false,
        network: true,
        security: false,
    };

    pub const AC: Constraints = Constraints {
        reserve: false,
        lolp: false,
        fuel_mix: false,
        network: false,
        security: false,
    };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerSpec {
    pub kind: PlannerKind,
    pub security: bool,
    pub stages: usize,
}

impl PlannerSpec {
    /// Resolve the horizon from the configuration. Static planners always
    /// plan one stage; a dynamic composite plan needs at least two.
    pub fn new(kind: PlannerKind, cfg: &RunConfig, security: bool) -> Result<Self> {
        let stages = if kind.is_static() { 1 } else { cfg.stages };
        if kind == PlannerKind::CompositeDynamic && stages < 2 {
            return Err(Error::Config(
                "the dynamic composite planner needs at least two stages".into(),
            ));
        }
        if stages < 1 {
            return Err(Error::Config("at least one stage is required".into()));
        }
        let security = security || kind == PlannerKind::AcTnepN1;
        Ok(PlannerSpec { kind, security, stages })
    }

    pub fn constraints(&self) -> Constraints {
        let c = match self.kind {
            PlannerKind::Gep => Constraints::GENERATION,
            PlannerKind::TcGep | PlannerKind::CompositeStatic | PlannerKind::CompositeDynamic => {
                Constraints::GENERATION.with_network()
            }
            PlannerKind::DcTnep => Constraints::NETWORK_ONLY,
            _ => Constraints::AC,
        };
        Constraints {
            security: self.security,
            ..c
        }
    }
}

/// One violated constraint with its normalized magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub constraint: String,
    pub magnitude: f64,
}

impl Violation {
    pub fn new(constraint: impl Into<String>, magnitude: f64) -> Self {
        Violation {
            constraint: constraint.into(),
            magnitude: magnitude.max(0.0),
        }
    }
}

/// A line loading kept for reports: per circuit, pu.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowRecord {
    pub stage: usize,
    pub from: usize,
    pub to: usize,
    pub circuits: u32,
    pub flow: f64,
    pub limit: f64,
}

/// Operating data kept alongside an evaluation for reports.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Snapshot {
    /// Installed capacity minus demand, MW, per stage.
    pub reserves_mw: Vec<f64>,
    pub lolp: Vec<f64>,
    pub flows: Vec<FlowRecord>,
    /// Bus id and voltage magnitude at the peak scenario.
    pub voltages: Vec<(usize, f64)>,
    /// Loss energy per year, MWh.
    pub loss_mwh: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationOutcome {
    /// Total cost plus penalties.
    pub j: f64,
    pub cost: CostBreakdown,
    pub violations: Vec<Violation>,
    pub penalty: f64,
    pub snapshot: Snapshot,
}

impl EvaluationOutcome {
    pub fn feasible(&self) -> bool {
        self.violations.is_empty()
    }

    fn assemble(cost: CostBreakdown, objective: f64, violations: Vec<Violation>, weight: f64, snapshot: Snapshot) -> Self {
        let penalty: f64 = violations.iter().map(|v| weight * (1.0 + v.magnitude).powi(2)).sum();
        EvaluationOutcome {
            j: objective + penalty,
            cost,
            violations,
            penalty,
            snapshot,
        }
    }

    pub fn scored(&self) -> crate::metaheuristics::Scored {
        crate::metaheuristics::Scored {
            j: self.j,
            penalty: self.penalty,
        }
    }
}

/// Shared, read-only state of an evaluator plus a LOLP memo.
pub struct Context<'a> {
    pub case: &'a Case,
    pub cfg: &'a RunConfig,
    pub cm: CostModel,
    pub constraints: Constraints,
    /// Penalty weight `W`.
    pub weight: f64,
    /// Generation per bus that replaces the dispatch at the listed stages.
    pub dispatch_override: Option<&'a RecordedDispatch>,
    lolp_memo: Mutex<HashMap<(usize, Vec<u32>), f64>>,
}

impl<'a> Context<'a> {
    pub fn new(case: &'a Case, cfg: &'a RunConfig, stages: usize, constraints: Constraints) -> Self {
        Context {
            case,
            cfg,
            cm: CostModel::new(case, cfg, stages),
            constraints,
            weight: penalty_weight(case, cfg),
            dispatch_override: None,
            lolp_memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_dispatch(mut self, d: &'a RecordedDispatch) -> Self {
        self.dispatch_override = Some(d);
        self
    }
}

pub fn penalty_weight(case: &Case, cfg: &RunConfig) -> f64 {
    let w = cfg.penalty_factor * case.largest_candidate_investment();
    if w > 0.0 {
        w
    } else {
        cfg.penalty_factor
    }
}

/// Peak demand of stage `t`, MW: the stage forecast at the heaviest load
/// scenario.
pub fn stage_demand(case: &Case, t: usize) -> f64 {
    case.stage_peak_mw(t) * case.peak_scenario().scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planner_names_round_trip() {
        for k in PlannerKind::ALL {
            assert_eq!(k.as_str().parse::<PlannerKind>().unwrap(), k);
        }
        assert!("tnep".parse::<PlannerKind>().is_err());
    }

    #[test]
    fn dynamic_needs_two_stages() {
        let cfg = RunConfig {
            stages: 1,
            ..RunConfig::default()
        };
        assert!(PlannerSpec::new(PlannerKind::CompositeDynamic, &cfg, false).is_err());
        assert_eq!(PlannerSpec::new(PlannerKind::CompositeStatic, &RunConfig::default(), false).unwrap().stages, 1);
        assert_eq!(PlannerSpec::new(PlannerKind::Gep, &RunConfig::default(), false).unwrap().stages, 3);
    }

    #[test]
    fn penalty_composition() {
        let o = EvaluationOutcome::assemble(
            CostBreakdown::default(),
            5.0,
            vec![Violation::new("a", 0.0), Violation::new("b", 1.0)],
            2.0,
            Snapshot::default(),
        );
        assert_eq!(o.penalty, 2.0 + 8.0);
        assert_eq!(o.j, 15.0);
        assert!(!o.feasible());
    }
}
