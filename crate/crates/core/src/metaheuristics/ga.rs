use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{trace_row, Scored, TraceRow};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaParams {
    /// Must be even.
    pub population: usize,
    pub generations: usize,
    pub p_crossover: f64,
    /// Per-bit flip probability.
    pub p_mutation: f64,
    /// Best individuals copied unchanged into the next generation.
    pub elites: usize,
}

impl Default for GaParams {
    fn default() -> Self {
        GaParams {
            population: 100,
            generations: 1000,
            p_crossover: 0.9,
            p_mutation: 0.01,
            elites: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaOutcome {
    pub best: Vec<bool>,
    pub score: Scored,
    /// Row 0 is the initial population, then one row per generation.
    pub trace: Vec<TraceRow>,
    /// Evaluator calls that returned an error.
    pub failures: usize,
    /// Distinct chromosomes evaluated.
    pub evaluations: usize,
}

fn pack(bits: &[bool]) -> Vec<u64> {
    bits.chunks(64)
        .map(|c| c.iter().fold(0u64, |a, &b| (a << 1) | u64::from(b)))
        .collect()
}

struct Memo<'f, F> {
    eval: &'f F,
    seen: HashMap<Vec<u64>, Scored>,
    failures: usize,
}

impl<F> Memo<'_, F>
where
    F: Fn(&[bool]) -> Result<Scored, String> + Sync,
{
    fn score_all(&mut self, pop: &[Vec<bool>]) -> Vec<Scored> {
        let keys: Vec<Vec<u64>> = pop.iter().map(|c| pack(c)).collect();
        let mut todo: Vec<usize> = Vec::new();
        let mut queued = std::collections::HashSet::new();
        for (i, k) in keys.iter().enumerate() {
            if !self.seen.contains_key(k) && queued.insert(k.clone()) {
                todo.push(i);
            }
        }
        let eval = self.eval;
        let fresh: Vec<Result<Scored, String>> = todo.par_iter().map(|&i| eval(&pop[i])).collect();
        for (&i, r) in todo.iter().zip(fresh) {
            let s = r.unwrap_or_else(|_| {
                self.failures += 1;
                Scored::failed()
            });
            self.seen.insert(keys[i].clone(), s);
        }
        keys.iter().map(|k| self.seen[k]).collect()
    }
}

/// Minimize `eval` over bit strings of length `len`.
///
/// Selection runs two passes of pairwise tournaments over shuffled
/// populations, winners are paired in order for uniform crossover, and
/// every bit of each child may flip. `incumbents` replace the first random
/// individuals of the initial population.
pub fn ga_run<F>(len: usize, eval: F, params: &GaParams, seed: u64, incumbents: &[Vec<bool>]) -> GaOutcome
where
    F: Fn(&[bool]) -> Result<Scored, String> + Sync,
{
    let n = params.population.max(2) & !1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pop: Vec<Vec<bool>> = (0..n).map(|_| (0..len).map(|_| rng.gen_bool(0.5)).collect()).collect();
    for (slot, inc) in pop.iter_mut().zip(incumbents) {
        if inc.len() == len {
            slot.clone_from(inc);
        }
    }
    let mut memo = Memo {
        eval: &eval,
        seen: HashMap::new(),
        failures: 0,
    };
    let mut scores = memo.score_all(&pop);
    let mut trace = vec![trace_row(0, &scores)];
    let (mut best, mut best_score) = best_of(&pop, &scores);

    for g in 1..=params.generations {
        let mut order: Vec<usize> = Vec::with_capacity(n);
        for _ in 0..2 {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            for pair in perm.chunks(2) {
                let (a, b) = (pair[0], pair[1]);
                order.push(if scores[b].j < scores[a].j { b } else { a });
            }
        }
        let mut next: Vec<Vec<bool>> = Vec::with_capacity(n);
        for pair in order.chunks(2) {
            let (mut c1, mut c2) = (pop[pair[0]].clone(), pop[pair[1]].clone());
            if rng.gen_bool(params.p_crossover) {
                for i in 0..len {
                    if rng.gen_bool(0.5) {
                        std::mem::swap(&mut c1[i], &mut c2[i]);
                    }
                }
            }
            for c in [&mut c1, &mut c2] {
                for bit in c.iter_mut() {
                    if rng.gen_bool(params.p_mutation) {
                        *bit = !*bit;
                    }
                }
            }
            next.push(c1);
            next.push(c2);
        }

        let mut ranked: Vec<usize> = (0..n).collect();
        ranked.sort_by(|&a, &b| scores[a].j.total_cmp(&scores[b].j).then(a.cmp(&b)));
        let elites: Vec<Vec<bool>> = ranked.iter().take(params.elites.min(n)).map(|&i| pop[i].clone()).collect();
        for (slot, e) in next.iter_mut().zip(elites) {
            *slot = e;
        }

        pop = next;
        scores = memo.score_all(&pop);
        trace.push(trace_row(g, &scores));
        let (b, s) = best_of(&pop, &scores);
        if s.j < best_score.j {
            best = b;
            best_score = s;
        }
    }

    GaOutcome {
        best,
        score: best_score,
        trace,
        failures: memo.failures,
        evaluations: memo.seen.len(),
    }
}

fn best_of(pop: &[Vec<bool>], scores: &[Scored]) -> (Vec<bool>, Scored) {
    let mut k = 0;
    for i in 1..pop.len() {
        if scores[i].j < scores[k].j {
            k = i;
        }
    }
    (pop[k].clone(), scores[k])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones(b: &[bool]) -> Result<Scored, String> {
        Ok(Scored::feasible(b.iter().filter(|&&x| !x).count() as f64))
    }

    fn small() -> GaParams {
        GaParams {
            population: 40,
            generations: 60,
            ..GaParams::default()
        }
    }

    #[test]
    fn one_max_is_solved() {
        let out = ga_run(30, ones, &small(), 7, &[]);
        assert_eq!(out.score.j, 0.0);
        assert_eq!(out.trace.len(), 61);
    }

    #[test]
    fn best_never_regresses() {
        let out = ga_run(40, ones, &small(), 3, &[]);
        for w in out.trace.windows(2) {
            assert!(w[1].best_j <= w[0].best_j);
        }
    }

    #[test]
    fn same_seed_same_run() {
        let a = ga_run(24, ones, &small(), 11, &[]);
        let b = ga_run(24, ones, &small(), 11, &[]);
        assert_eq!(a, b);
    }

    #[test]
    fn incumbent_survives() {
        let p = GaParams {
            generations: 0,
            ..small()
        };
        let out = ga_run(16, ones, &p, 1, &[vec![true; 16]]);
        assert_eq!(out.best, vec![true; 16]);
    }

    #[test]
    fn failures_are_counted_not_fatal() {
        let p = GaParams {
            population: 10,
            generations: 3,
            ..GaParams::default()
        };
        let out = ga_run(8, |b: &[bool]| if b[0] { Err("boom".into()) } else { ones(b) }, &p, 5, &[]);
        assert!(out.failures > 0);
        assert!(out.score.j < f64::MAX);
    }
}
