use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{trace_row, Scored, TraceRow};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsoParams {
    pub population: usize,
    pub iterations: usize,
    /// Inertia weight at the first iteration, falling linearly to `w_min`.
    pub w_max: f64,
    pub w_min: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Default for PsoParams {
    fn default() -> Self {
        PsoParams {
            population: 80,
            iterations: 200,
            w_max: 0.9,
            w_min: 0.3,
            c1: 2.1,
            c2: 2.1,
        }
    }
}

/// Velocity limit as a fraction of each dimension's range.
const V_MAX_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct PsoOutcome {
    /// Best position, with integer dimensions rounded.
    pub best: Vec<f64>,
    pub score: Scored,
    /// Row 0 is the initial swarm, then one row per iteration.
    pub trace: Vec<TraceRow>,
    pub failures: usize,
}

fn snap(x: &[f64], integer: &[bool]) -> Vec<f64> {
    x.iter()
        .zip(integer)
        .map(|(&v, &int)| if int { v.round() } else { v })
        .collect()
}

/// Minimize `eval` inside the box `bounds`. Dimensions flagged in
/// `integer` are rounded before evaluation. `initial` positions replace the
/// first random particles.
pub fn pso_run<F>(
    bounds: &[(f64, f64)],
    integer: &[bool],
    eval: F,
    params: &PsoParams,
    seed: u64,
    initial: &[Vec<f64>],
) -> PsoOutcome
where
    F: Fn(&[f64]) -> Result<Scored, String> + Sync,
{
    let dim = bounds.len();
    let n = params.population.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            bounds
                .iter()
                .map(|&(lo, hi)| if hi > lo { rng.gen_range(lo..=hi) } else { lo })
                .collect()
        })
        .collect();
    for (slot, p) in x.iter_mut().zip(initial) {
        if p.len() == dim {
            *slot = p.iter().zip(bounds).map(|(&v, &(lo, hi))| v.clamp(lo, hi)).collect();
        }
    }
    let mut v = vec![vec![0.0; dim]; n];
    let vmax: Vec<f64> = bounds.iter().map(|&(lo, hi)| V_MAX_FRACTION * (hi - lo)).collect();

    let mut failures = 0usize;
    let score_all = |x: &[Vec<f64>], failures: &mut usize| -> Vec<Scored> {
        let res: Vec<Result<Scored, String>> = x.par_iter().map(|p| eval(&snap(p, integer))).collect();
        res.into_iter()
            .map(|r| {
                r.unwrap_or_else(|_| {
                    *failures += 1;
                    Scored::failed()
                })
            })
            .collect()
    };

    let scores = score_all(&x, &mut failures);
    let mut trace = vec![trace_row(0, &scores)];
    let mut pbest = x.clone();
    let mut pscore = scores;
    let mut g = 0;
    for i in 1..n {
        if pscore[i].j < pscore[g].j {
            g = i;
        }
    }
    let mut gbest = pbest[g].clone();
    let mut gscore = pscore[g];

    let iters = params.iterations;
    for k in 1..=iters {
        let w = if iters > 1 {
            params.w_max - (params.w_max - params.w_min) * (k - 1) as f64 / (iters - 1) as f64
        } else {
            params.w_max
        };
        for i in 0..n {
            for d in 0..dim {
                let (r1, r2): (f64, f64) = (rng.gen(), rng.gen());
                let vel = w * v[i][d]
                    + params.c1 * r1 * (pbest[i][d] - x[i][d])
                    + params.c2 * r2 * (gbest[d] - x[i][d]);
                v[i][d] = vel.clamp(-vmax[d], vmax[d]);
                x[i][d] = (x[i][d] + v[i][d]).clamp(bounds[d].0, bounds[d].1);
            }
        }
        let scores = score_all(&x, &mut failures);
        trace.push(trace_row(k, &scores));
        for i in 0..n {
            if scores[i].j < pscore[i].j {
                pscore[i] = scores[i];
                pbest[i].clone_from(&x[i]);
                if scores[i].j < gscore.j {
                    gscore = scores[i];
                    gbest.clone_from(&x[i]);
                }
            }
        }
    }

    PsoOutcome {
        best: snap(&gbest, integer),
        score: gscore,
        trace,
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(x: &[f64]) -> Result<Scored, String> {
        Ok(Scored::feasible(x.iter().map(|v| (v - 1.0) * (v - 1.0)).sum()))
    }

    #[test]
    fn sphere_converges() {
        let b = vec![(-5.0, 5.0); 4];
        let p = PsoParams {
            population: 30,
            iterations: 150,
            ..PsoParams::default()
        };
        let out = pso_run(&b, &[false; 4], sphere, &p, 9, &[]);
        assert!(out.score.j < 1e-3, "{}", out.score.j);
    }

    #[test]
    fn integer_dimensions_and_bounds() {
        let b = vec![(0.0, 10.0); 3];
        let p = PsoParams {
            population: 10,
            iterations: 20,
            ..PsoParams::default()
        };
        let out = pso_run(&b, &[true; 3], sphere, &p, 2, &[]);
        assert!(out.best.iter().all(|v| v.fract() == 0.0 && (0.0..=10.0).contains(v)));
    }

    #[test]
    fn zero_iterations_keeps_initial_best() {
        let b = vec![(-5.0, 5.0); 2];
        let p = PsoParams {
            population: 5,
            iterations: 0,
            ..PsoParams::default()
        };
        let out = pso_run(&b, &[false; 2], sphere, &p, 4, &[vec![1.0, 1.0]]);
        assert_eq!(out.score.j, 0.0);
        assert_eq!(out.trace.len(), 1);
    }

    #[test]
    fn deterministic() {
        let b = vec![(-1.0, 1.0); 3];
        let p = PsoParams {
            population: 8,
            iterations: 10,
            ..PsoParams::default()
        };
        let a = pso_run(&b, &[false; 3], sphere, &p, 1, &[]);
        let c = pso_run(&b, &[false; 3], sphere, &p, 1, &[]);
        assert_eq!(a, c);
    }
}
