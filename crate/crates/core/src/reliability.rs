//! Loss-of-load probability for two-state generating units.
//!
//! Capacities are handled on an integer lattice of tenths of a MW, scaled
//! down by the gcd of all unit capacities, so the convolution runs over
//! dense arrays. Identical units are folded with a binomial step, and
//! units are put in a canonical order first so that the result does not
//! depend on the order in which they were listed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::economics::UnitGroup;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutageModel {
    /// (capacity MW, forced outage rate) per unit.
    pub units: Vec<(f64, f64)>,
}

impl OutageModel {
    pub fn new(units: Vec<(f64, f64)>) -> Self {
        OutageModel { units }
    }

    pub fn from_groups(groups: &[UnitGroup]) -> Self {
        let mut units = Vec::new();
        for g in groups {
            for _ in 0..g.count {
                units.push((g.unit_mw, g.for_rate));
            }
        }
        OutageModel { units }
    }

    pub fn installed_mw(&self) -> f64 {
        self.units.iter().map(|u| u.0).sum()
    }

    /// (capacity in tenths, FOR, multiplicity), sorted canonically.
    fn blocks(&self) -> Vec<(u64, f64, u32)> {
        let mut v: Vec<(u64, f64)> = self
            .units
            .iter()
            .filter(|u| u.0 > 0.0)
            .map(|&(c, f)| (tenths(c), f))
            .collect();
        v.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut out: Vec<(u64, f64, u32)> = Vec::new();
        for (c, f) in v {
            match out.last_mut() {
                Some(last) if last.0 == c && last.1 == f => last.2 += 1,
                _ => out.push((c, f, 1)),
            }
        }
        out
    }
}

fn tenths(mw: f64) -> u64 {
    (mw * 10.0).round() as u64
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn binomial_pmf(n: u32, p_up: f64) -> Vec<f64> {
    // Probability that exactly k of n units are up.
    let mut out = vec![0.0; n as usize + 1];
    let q = 1.0 - p_up;
    let mut coef = 1.0f64;
    for k in 0..=n {
        out[k as usize] = coef * p_up.powi(k as i32) * q.powi((n - k) as i32);
        coef = coef * (n - k) as f64 / (k + 1) as f64;
    }
    out
}

/// Cumulative distribution of available capacity.
#[derive(Debug, Clone, PartialEq)]
pub struct SupplyDistribution {
    /// Achievable capacities in MW, ascending.
    pub support: Vec<f64>,
    /// `Pr(S ≤ support[k])`.
    pub cdf: Vec<f64>,
}

impl SupplyDistribution {
    /// `Pr(S ≤ x)`.
    pub fn cdf_at(&self, x: f64) -> f64 {
        let k = self.support.partition_point(|&s| s <= x + 1e-9);
        if k == 0 {
            0.0
        } else {
            self.cdf[k - 1]
        }
    }

    /// `Pr(S < x)`.
    pub fn below(&self, x: f64) -> f64 {
        let k = self.support.partition_point(|&s| s < x - 1e-9);
        if k == 0 {
            0.0
        } else {
            self.cdf[k - 1]
        }
    }
}

/// Exact distribution of the available capacity `S = Σ X_i`.
pub fn convolve_outages(model: &OutageModel) -> SupplyDistribution {
    let blocks = model.blocks();
    let g = blocks.iter().fold(0, |acc, b| gcd(acc, b.0)).max(1);
    let total: u64 = blocks.iter().map(|b| b.0 / g * b.2 as u64).sum();
    let mut pmf = vec![0.0f64; total as usize + 1];
    let mut reach = vec![false; total as usize + 1];
    pmf[0] = 1.0;
    reach[0] = true;
    let mut top = 0usize;
    for &(c, f, n) in &blocks {
        let step = (c / g) as usize;
        let w = binomial_pmf(n, 1.0 - f);
        let new_top = top + step * n as usize;
        let mut next = vec![0.0f64; new_top + 1];
        let mut next_reach = vec![false; new_top + 1];
        for s in 0..=top {
            if !reach[s] {
                continue;
            }
            for (k, &wk) in w.iter().enumerate() {
                next[s + k * step] += pmf[s] * wk;
                next_reach[s + k * step] = true;
            }
        }
        pmf[..=new_top].copy_from_slice(&next);
        reach[..=new_top].copy_from_slice(&next_reach);
        top = new_top;
    }
    let mut support = Vec::new();
    let mut cdf = Vec::new();
    let mut acc = 0.0;
    for s in 0..=top {
        if reach[s] {
            acc += pmf[s];
            support.push((s as u64 * g) as f64 / 10.0);
            cdf.push(acc);
        }
    }
    SupplyDistribution { support, cdf }
}

/// `Pr(S < L)`.
///
/// Works on the outage side and keeps only outages up to `C − L`: once a
/// state's outage passes that point no further unit can bring it back, so
/// the mass beyond it is exactly the answer.
pub fn lolp(model: &OutageModel, peak_load_mw: f64) -> f64 {
    if peak_load_mw <= 0.0 {
        return 0.0;
    }
    let blocks = model.blocks();
    let g = blocks.iter().fold(0, |acc, b| gcd(acc, b.0)).max(1);
    let cap: u64 = blocks.iter().map(|b| b.0 * b.2 as u64).sum();
    // Supplies sit on whole tenths, so S ≥ L means S ≥ ⌈L⌉ in tenths.
    let load = (peak_load_mw * 10.0 - 1e-6).ceil() as u64;
    if load > cap {
        return 1.0;
    }
    // Outage O (in lattice steps) with O ≤ limit keeps the load served.
    let limit = ((cap - load) / g) as usize;
    let mut pmf = vec![0.0f64; limit + 1];
    pmf[0] = 1.0;
    let mut next = vec![0.0f64; limit + 1];
    for &(c, f, n) in &blocks {
        let step = (c / g) as usize;
        // k units down out of n.
        let w = binomial_pmf(n, f);
        next.iter_mut().for_each(|x| *x = 0.0);
        for (o, &p) in pmf.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (k, &wk) in w.iter().enumerate() {
                let t = o + k * step;
                if t > limit {
                    break;
                }
                next[t] += p * wk;
            }
        }
        std::mem::swap(&mut pmf, &mut next);
    }
    let served: f64 = pmf.iter().sum();
    (1.0 - served).clamp(0.0, 1.0)
}

/// Monte Carlo estimate of `Pr(S < L)` and its binomial standard error.
/// Samples are split into a fixed number of shards, each with its own
/// seed derived from `seed`, so the result does not depend on threads.
pub fn lolp_monte_carlo(model: &OutageModel, peak_load_mw: f64, samples: usize, seed: u64) -> (f64, f64) {
    const SHARDS: usize = 16;
    let samples = samples.max(1);
    let units = &model.units;
    let hits: usize = (0..SHARDS)
        .into_par_iter()
        .map(|shard| {
            let n = samples / SHARDS + usize::from(shard < samples % SHARDS);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (shard as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let mut count = 0;
            for _ in 0..n {
                let s: f64 = units
                    .iter()
                    .map(|&(c, f)| if rng.gen::<f64>() < f { 0.0 } else { c })
                    .sum();
                if s < peak_load_mw - 1e-9 {
                    count += 1;
                }
            }
            count
        })
        .sum();
    let p = hits as f64 / samples as f64;
    (p, (p * (1.0 - p) / samples as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_unit() {
        let m = OutageModel::new(vec![(100.0, 0.1)]);
        let d = convolve_outages(&m);
        assert_eq!(d.support, vec![0.0, 100.0]);
        assert_abs_diff_eq!(d.cdf[0], 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(d.cdf[1], 1.0, epsilon = 1e-15);
        assert_eq!(lolp(&m, 0.0), 0.0);
        assert_abs_diff_eq!(lolp(&m, 50.0), 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(lolp(&m, 100.0), 0.1, epsilon = 1e-15);
    }

    #[test]
    fn two_units() {
        let m = OutageModel::new(vec![(100.0, 0.1), (100.0, 0.1)]);
        let d = convolve_outages(&m);
        assert_abs_diff_eq!(d.cdf_at(99.0), 0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(d.cdf_at(100.0), 0.19, epsilon = 1e-15);
        assert_abs_diff_eq!(d.cdf_at(200.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn load_between_lattice_points() {
        // 100.04 MW is not met by 100 MW even though it rounds to 100.0.
        let m = OutageModel::new(vec![(100.0, 0.1), (50.0, 0.2)]);
        assert_abs_diff_eq!(lolp(&m, 100.04), 1.0 - 0.9 * 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(lolp(&m, 99.96), 0.1, epsilon = 1e-15);
    }

    #[test]
    fn load_above_installed() {
        let m = OutageModel::new(vec![(100.0, 0.1)]);
        assert_eq!(lolp(&m, 100.1), 1.0);
    }

    #[test]
    fn one_sample_is_zero_or_one() {
        let m = OutageModel::new(vec![(100.0, 0.1)]);
        let (p, _) = lolp_monte_carlo(&m, 50.0, 1, 3);
        assert!(p == 0.0 || p == 1.0);
    }
}
