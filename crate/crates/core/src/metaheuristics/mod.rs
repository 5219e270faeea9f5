//! Seeded genetic algorithm and particle swarm engines plus the binary
//! plan encodings they search over.
//!
//! Both engines minimize an objective `J = cost + penalty` returned by a
//! pure evaluator. Evaluations run in parallel; all random draws happen on
//! one seeded stream in a fixed order, so a run depends only on its seed
//! and parameters, never on the thread count.

mod encoding;
mod ga;
mod pso;

pub use encoding::*;
pub use ga::*;
pub use pso::*;

/// Objective of one candidate solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scored {
    /// Cost plus penalties.
    pub j: f64,
    pub penalty: f64,
}

impl Scored {
    pub fn feasible(cost: f64) -> Self {
        Scored { j: cost, penalty: 0.0 }
    }

    /// Surrogate for an evaluator failure: worse than anything real.
    pub fn failed() -> Self {
        Scored {
            j: f64::MAX,
            penalty: f64::MAX,
        }
    }

    pub fn cost(&self) -> f64 {
        self.j - self.penalty
    }
}

/// `α / (1 + J)`.
pub fn fitness(j: f64, alpha: f64) -> f64 {
    alpha / (1.0 + j)
}

/// One row of a convergence trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub best_j: f64,
    pub mean_j: f64,
    /// Fraction of the population carrying a penalty.
    pub penalty_share: f64,
}

pub(crate) fn trace_row(iteration: usize, scores: &[Scored]) -> TraceRow {
    let best_j = scores.iter().map(|s| s.j).fold(f64::INFINITY, f64::min);
    let ok: Vec<f64> = scores.iter().filter(|s| s.j < f64::MAX).map(|s| s.j).collect();
    let mean_j = if ok.is_empty() {
        f64::MAX
    } else {
        ok.iter().sum::<f64>() / ok.len() as f64
    };
    let penalized = scores.iter().filter(|s| s.penalty > 0.0).count();
    TraceRow {
        iteration,
        best_j,
        mean_j,
        penalty_share: penalized as f64 / scores.len().max(1) as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fitness_values() {
        assert_eq!(fitness(0.0, 7.0), 7.0);
        assert_eq!(fitness(99.0, 100.0), 1.0);
        assert!(fitness(1.0, 3.0) > fitness(2.0, 3.0));
    }
}
