use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::case_io::IpOptions;
use crate::error::{Error, Result};
use crate::model::{Case, Topology};
use crate::powerflow::series_gb;

/// Expansion decision `(e^{αu} − 1) / (e^{αu} + 1)`, i.e. `tanh(αu/2)`.
pub fn sigmoid_ed(u: f64, alpha: f64) -> f64 {
    (0.5 * alpha * u).tanh()
}

/// First derivative of [`sigmoid_ed`] with respect to `u`.
pub fn sigmoid_ed_d1(u: f64, alpha: f64) -> f64 {
    let e = sigmoid_ed(u, alpha);
    0.5 * alpha * (1.0 - e * e)
}

/// Second derivative of [`sigmoid_ed`] with respect to `u`.
pub fn sigmoid_ed_d2(u: f64, alpha: f64) -> f64 {
    -alpha * sigmoid_ed(u, alpha) * sigmoid_ed_d1(u, alpha)
}

/// A smooth problem `min f(x)` s.t. `g(x) = 0`, `h_min ≤ h(x) ≤ h_max`,
/// `x_min ≤ x ≤ x_max`.
pub trait Nlp {
    fn n(&self) -> usize;
    fn m(&self) -> usize;
    fn p(&self) -> usize;
    fn x_bounds(&self) -> (DVector<f64>, DVector<f64>);
    fn h_bounds(&self) -> (DVector<f64>, DVector<f64>);
    fn f(&self, x: &DVector<f64>) -> f64;
    fn grad_f(&self, x: &DVector<f64>) -> DVector<f64>;
    fn g(&self, x: &DVector<f64>) -> DVector<f64>;
    /// `m × n`.
    fn jac_g(&self, x: &DVector<f64>) -> DMatrix<f64>;
    fn h(&self, x: &DVector<f64>) -> DVector<f64>;
    /// `p × n`.
    fn jac_h(&self, x: &DVector<f64>) -> DMatrix<f64>;
    /// `∇²f − Σ λ_i ∇²g_i + Σ z_j ∇²h_j`.
    fn hess_lagrangian(&self, x: &DVector<f64>, lambda: &DVector<f64>, z2: &DVector<f64>) -> DMatrix<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Scale {
    /// Existing circuits in service.
    Fixed(f64),
    /// A candidate copy: index into `TnepNlp::copies`.
    Copy(usize),
}

/// A branch term `s · (σ b θ + g θ² / 2)` with `θ = θ_from − θ_to`.
#[derive(Debug, Clone, PartialEq)]
struct Element {
    from: usize,
    to: usize,
    g: f64,
    b: f64,
    scale: Scale,
    limit: f64,
}

/// One independent candidate circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateCopy {
    /// Index into `Case::line_candidates`.
    pub corridor: usize,
    /// Dollars, including the tie-breaking perturbation.
    pub cost: f64,
}

/// DC transmission expansion with quadratic losses and sigmoid-relaxed
/// build decisions. Variables are the non-slack angles followed by one
/// sigmoid argument per candidate copy. The slack bus has no balance row:
/// it takes up the losses.
///
/// The objective is scaled by the most expensive copy so that its
/// gradients are of order one; [`TnepNlp::dollars`] undoes that.
#[derive(Debug, Clone)]
pub struct TnepNlp {
    pub copies: Vec<CandidateCopy>,
    /// Variable index of each bus angle; `None` for the slack.
    theta_var: Vec<Option<usize>>,
    /// Balance row of each bus; `None` for the slack.
    row: Vec<Option<usize>>,
    n_theta: usize,
    /// Net injection per bus, pu.
    net: Vec<f64>,
    elements: Vec<Element>,
    alpha: f64,
    u_max: f64,
    theta_max: f64,
    cost_scale: f64,
}

impl TnepNlp {
    /// `net_injection` is generation minus load per bus in pu. Each
    /// corridor gets `opts.copies` copies (its own limit when zero); copy
    /// `k` costs `c (1 + 1e-6 k)` so that copies are not interchangeable.
    pub fn new(case: &Case, net_injection: &[f64], opts: &IpOptions) -> Result<TnepNlp> {
        let n_bus = case.buses.len();
        if net_injection.len() != n_bus {
            return Err(Error::Config("one injection per bus expected".into()));
        }
        let slack = case
            .slack_index()
            .ok_or_else(|| Error::Config("case has no slack bus".into()))?;
        let mut theta_var = vec![None; n_bus];
        let mut row = vec![None; n_bus];
        let mut k = 0;
        for i in 0..n_bus {
            if i != slack {
                theta_var[i] = Some(k);
                row[i] = Some(k);
                k += 1;
            }
        }
        let idx = |id: usize| {
            case.bus_index(id)
                .ok_or_else(|| Error::Config(format!("unknown bus {}", id)))
        };

        let mut elements = Vec::new();
        for br in case.branches.iter().filter(|b| b.circuits > 0) {
            let (g, b) = series_gb(br.r, br.x);
            let n = br.circuits as f64;
            elements.push(Element {
                from: idx(br.from)?,
                to: idx(br.to)?,
                g,
                b,
                scale: Scale::Fixed(n),
                limit: n * br.capacity_pu,
            });
        }
        let mut copies = Vec::new();
        for (c, l) in case.line_candidates.iter().enumerate() {
            let count = if opts.copies > 0 { opts.copies } else { l.max_add };
            let (g, b) = series_gb(l.r, l.x);
            for j in 0..count {
                elements.push(Element {
                    from: idx(l.from)?,
                    to: idx(l.to)?,
                    g,
                    b,
                    scale: Scale::Copy(copies.len()),
                    limit: l.capacity_pu,
                });
                copies.push(CandidateCopy {
                    corridor: c,
                    cost: l.cost * (1.0 + 1e-6 * j as f64),
                });
            }
        }
        let cost_scale = copies.iter().map(|c| c.cost).fold(0.0, f64::max).max(1.0);

        let all = Topology::with_additions(case, &vec![1; case.line_candidates.len()]);
        let comp = all.components(n_bus);
        if comp.iter().any(|&c| c != comp[slack]) {
            return Err(Error::Infeasible(
                "network stays disconnected even with every candidate built".into(),
            ));
        }

        Ok(TnepNlp {
            copies,
            theta_var,
            row,
            n_theta: n_bus - 1,
            net: net_injection.to_vec(),
            elements,
            alpha: opts.alpha,
            u_max: opts.u_max,
            theta_max: std::f64::consts::FRAC_PI_2,
            cost_scale,
        })
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    /// Variable index of copy `k`'s sigmoid argument.
    pub fn u_index(&self, k: usize) -> usize {
        self.n_theta + k
    }

    /// Expansion decision of every copy at `x`.
    pub fn decisions(&self, x: &DVector<f64>) -> Vec<f64> {
        (0..self.copies.len())
            .map(|k| sigmoid_ed(x[self.u_index(k)], self.alpha))
            .collect()
    }

    /// Convert a scaled objective value to dollars.
    pub fn dollars(&self, f: f64) -> f64 {
        f * self.cost_scale
    }

    fn theta(&self, e: &Element, x: &DVector<f64>) -> f64 {
        let a = self.theta_var[e.from].map_or(0.0, |i| x[i]);
        let b = self.theta_var[e.to].map_or(0.0, |i| x[i]);
        a - b
    }

    /// Scale and its first two derivatives with respect to the copy's `u`.
    fn scale(&self, e: &Element, x: &DVector<f64>) -> (f64, f64, f64, Option<usize>) {
        match e.scale {
            Scale::Fixed(n) => (n, 0.0, 0.0, None),
            Scale::Copy(k) => {
                let j = self.u_index(k);
                let u = x[j];
                (
                    sigmoid_ed(u, self.alpha),
                    sigmoid_ed_d1(u, self.alpha),
                    sigmoid_ed_d2(u, self.alpha),
                    Some(j),
                )
            }
        }
    }

    /// Gradient of `s · Q_σ` added into `out` with weight `w`.
    fn add_term_grad(&self, e: &Element, sigma: f64, x: &DVector<f64>, w: f64, out: &mut [f64]) {
        let th = self.theta(e, x);
        let (s, ds, _, uj) = self.scale(e, x);
        let dq = sigma * e.b + e.g * th;
        let q = sigma * e.b * th + 0.5 * e.g * th * th;
        if let Some(a) = self.theta_var[e.from] {
            out[a] += w * s * dq;
        }
        if let Some(b) = self.theta_var[e.to] {
            out[b] -= w * s * dq;
        }
        if let Some(j) = uj {
            out[j] += w * ds * q;
        }
    }

    /// Hessian of `s · Q_σ` added into `h` with weight `w`.
    fn add_term_hess(&self, e: &Element, sigma: f64, x: &DVector<f64>, w: f64, h: &mut DMatrix<f64>) {
        if w == 0.0 {
            return;
        }
        let th = self.theta(e, x);
        let (s, ds, dds, uj) = self.scale(e, x);
        let dq = sigma * e.b + e.g * th;
        let q = sigma * e.b * th + 0.5 * e.g * th * th;
        // Angle direction: +1 on θ_from, −1 on θ_to.
        let dirs = [(self.theta_var[e.from], 1.0), (self.theta_var[e.to], -1.0)];
        for &(i, si) in &dirs {
            let Some(i) = i else { continue };
            for &(j, sj) in &dirs {
                if let Some(j) = j {
                    h[(i, j)] += w * s * e.g * si * sj;
                }
            }
            if let Some(u) = uj {
                h[(i, u)] += w * ds * dq * si;
                h[(u, i)] += w * ds * dq * si;
            }
        }
        if let Some(u) = uj {
            h[(u, u)] += w * dds * q;
        }
    }

    fn term(&self, e: &Element, sigma: f64, x: &DVector<f64>) -> f64 {
        let th = self.theta(e, x);
        let (s, ..) = self.scale(e, x);
        s * (sigma * e.b * th + 0.5 * e.g * th * th)
    }
}

impl Nlp for TnepNlp {
    fn n(&self) -> usize {
        self.n_theta + self.copies.len()
    }

    fn m(&self) -> usize {
        self.n_theta
    }

    fn p(&self) -> usize {
        self.elements.len()
    }

    fn x_bounds(&self) -> (DVector<f64>, DVector<f64>) {
        let n = self.n();
        let lo = DVector::from_fn(n, |i, _| if i < self.n_theta { -self.theta_max } else { 0.0 });
        let hi = DVector::from_fn(n, |i, _| if i < self.n_theta { self.theta_max } else { self.u_max });
        (lo, hi)
    }

    fn h_bounds(&self) -> (DVector<f64>, DVector<f64>) {
        let hi = DVector::from_iterator(self.p(), self.elements.iter().map(|e| e.limit));
        (-hi.clone(), hi)
    }

    fn f(&self, x: &DVector<f64>) -> f64 {
        self.copies
            .iter()
            .enumerate()
            .map(|(k, c)| c.cost / self.cost_scale * sigmoid_ed(x[self.u_index(k)], self.alpha))
            .sum()
    }

    fn grad_f(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(self.n());
        for (k, c) in self.copies.iter().enumerate() {
            let j = self.u_index(k);
            g[j] = c.cost / self.cost_scale * sigmoid_ed_d1(x[j], self.alpha);
        }
        g
    }

    fn g(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(self.m());
        for (i, r) in self.row.iter().enumerate() {
            if let Some(r) = r {
                g[*r] = self.net[i];
            }
        }
        for e in &self.elements {
            if let Some(r) = self.row[e.from] {
                g[r] -= self.term(e, 1.0, x);
            }
            if let Some(r) = self.row[e.to] {
                g[r] -= self.term(e, -1.0, x);
            }
        }
        g
    }

    fn jac_g(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = self.n();
        let mut j = DMatrix::zeros(self.m(), n);
        let mut buf = vec![0.0; n];
        for e in &self.elements {
            for (bus, sigma) in [(e.from, 1.0), (e.to, -1.0)] {
                if let Some(r) = self.row[bus] {
                    buf.iter_mut().for_each(|v| *v = 0.0);
                    self.add_term_grad(e, sigma, x, -1.0, &mut buf);
                    for (c, v) in buf.iter().enumerate() {
                        j[(r, c)] += v;
                    }
                }
            }
        }
        j
    }

    fn h(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.p(), self.elements.iter().map(|e| self.term(e, 1.0, x)))
    }

    fn jac_h(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = self.n();
        let mut j = DMatrix::zeros(self.p(), n);
        let mut buf = vec![0.0; n];
        for (r, e) in self.elements.iter().enumerate() {
            buf.iter_mut().for_each(|v| *v = 0.0);
            self.add_term_grad(e, 1.0, x, 1.0, &mut buf);
            for (c, v) in buf.iter().enumerate() {
                j[(r, c)] = *v;
            }
        }
        j
    }

    fn hess_lagrangian(&self, x: &DVector<f64>, lambda: &DVector<f64>, z2: &DVector<f64>) -> DMatrix<f64> {
        let n = self.n();
        let mut h = DMatrix::zeros(n, n);
        for (k, c) in self.copies.iter().enumerate() {
            let j = self.u_index(k);
            h[(j, j)] += c.cost / self.cost_scale * sigmoid_ed_d2(x[j], self.alpha);
        }
        for (r, e) in self.elements.iter().enumerate() {
            // g rows carry minus the terms, so −λ∇²g adds +λ∇²term.
            if let Some(i) = self.row[e.from] {
                self.add_term_hess(e, 1.0, x, lambda[i], &mut h);
            }
            if let Some(i) = self.row[e.to] {
                self.add_term_hess(e, -1.0, x, lambda[i], &mut h);
            }
            self.add_term_hess(e, 1.0, x, z2[r], &mut h);
        }
        h
    }
}

/// Largest relative disagreement between the analytic derivatives and
/// central differences, each entry scaled by `max(|a|, |b|, 1e-3)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DerivativeCheck {
    pub grad_f: f64,
    pub jac_g: f64,
    pub jac_h: f64,
    pub hessian: f64,
    /// Largest `|H - Hᵀ|` entry.
    pub asymmetry: f64,
}

impl DerivativeCheck {
    pub fn worst(&self) -> f64 {
        self.grad_f.max(self.jac_g).max(self.jac_h).max(self.hessian)
    }
}

/// Compare every analytic derivative with central differences (step
/// 1e-6) at `points` random interior points. Angles are drawn from
/// ±0.3 rad, decision arguments from the lower quarter of their box where
/// the sigmoid still has curvature, and multipliers from ±2.
pub fn derivative_check(nlp: &TnepNlp, points: usize, seed: u64) -> DerivativeCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = 1e-6;
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-3);
    let (lo, hi) = nlp.x_bounds();
    let grad_l = |x: &DVector<f64>, l: &DVector<f64>, z: &DVector<f64>| {
        nlp.grad_f(x) - nlp.jac_g(x).transpose() * l + nlp.jac_h(x).transpose() * z
    };
    let mut out = DerivativeCheck::default();
    for _ in 0..points {
        let x = DVector::from_fn(nlp.n(), |i, _| {
            if i < nlp.n_theta() {
                rng.gen_range(-0.3..0.3)
            } else {
                rng.gen_range(lo[i] + 0.1..hi[i] / 4.0)
            }
        });
        let l = DVector::from_fn(nlp.m(), |_, _| rng.gen_range(-2.0..2.0));
        let z = DVector::from_fn(nlp.p(), |_, _| rng.gen_range(-2.0..2.0));
        let (gf, jg, jh) = (nlp.grad_f(&x), nlp.jac_g(&x), nlp.jac_h(&x));
        let h = nlp.hess_lagrangian(&x, &l, &z);
        out.asymmetry = out.asymmetry.max((&h - h.transpose()).amax());
        for i in 0..nlp.n() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += step;
            xm[i] -= step;
            let d = |a: f64, b: f64| (a - b) / (2.0 * step);
            out.grad_f = out.grad_f.max(rel(gf[i], d(nlp.f(&xp), nlp.f(&xm))));
            let (gp, gm) = (nlp.g(&xp), nlp.g(&xm));
            for r in 0..nlp.m() {
                out.jac_g = out.jac_g.max(rel(jg[(r, i)], d(gp[r], gm[r])));
            }
            let (hp, hm) = (nlp.h(&xp), nlp.h(&xm));
            for r in 0..nlp.p() {
                out.jac_h = out.jac_h.max(rel(jh[(r, i)], d(hp[r], hm[r])));
            }
            let col = (grad_l(&xp, &l, &z) - grad_l(&xm, &l, &z)) / (2.0 * step);
            for r in 0..nlp.n() {
                out.hessian = out.hessian.max(rel(h[(r, i)], col[r]));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case_io::bundled_case;

    #[test]
    fn sigmoid_values() {
        assert_eq!(sigmoid_ed(0.0, 1.0), 0.0);
        let e20 = (20f64.exp() - 1.0) / (20f64.exp() + 1.0);
        assert!((sigmoid_ed(20.0, 1.0) - e20).abs() < 1e-15);
        assert!((sigmoid_ed(20.0, 1.0) - 0.99999999587).abs() < 1e-11);
        assert_eq!(sigmoid_ed_d1(0.0, 1.0), 0.5);
        assert_eq!(sigmoid_ed_d1(0.0, 3.0), 1.5);
    }

    fn garver_nlp() -> TnepNlp {
        let c = bundled_case("garver6");
        let net: Vec<f64> = vec![0.1, -0.2, 0.3, -0.15, -0.25, 0.2];
        let opts = IpOptions {
            copies: 2,
            ..IpOptions::default()
        };
        TnepNlp::new(&c, &net, &opts).unwrap()
    }

    #[test]
    fn zero_decisions_cost_nothing() {
        let nlp = garver_nlp();
        let x = DVector::zeros(nlp.n());
        assert_eq!(nlp.f(&x), 0.0);
        assert!(nlp.decisions(&x).iter().all(|&e| e == 0.0));
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let r = derivative_check(&garver_nlp(), 100, 11);
        assert!(r.grad_f <= 1e-6, "{:?}", r);
        assert!(r.worst() <= 1e-5, "{:?}", r);
        assert!(r.asymmetry < 1e-12, "{:?}", r);
    }

    #[test]
    fn losses_split_between_ends() {
        // Two-bus line: what leaves bus 1 minus what arrives at bus 2 is gθ².
        let nlp = garver_nlp();
        let e = &nlp.elements[0];
        let mut x = DVector::zeros(nlp.n());
        if let Some(i) = nlp.theta_var[e.from] {
            x[i] = 0.1;
        }
        if let Some(i) = nlp.theta_var[e.to] {
            x[i] = -0.05;
        }
        let th = nlp.theta(e, &x);
        let sent = nlp.term(e, 1.0, &x);
        let received = -nlp.term(e, -1.0, &x);
        let n = match e.scale {
            Scale::Fixed(n) => n,
            Scale::Copy(_) => unreachable!(),
        };
        assert!((sent - received - n * e.g * th * th).abs() < 1e-14);
    }
}
