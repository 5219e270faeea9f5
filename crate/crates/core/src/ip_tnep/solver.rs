use nalgebra::{DMatrix, DVector};

use super::nlp::Nlp;
use crate::error::{Error, Result};

/// Primal-dual point. `s1`/`s2` are the distances of `h(x)` from its lower
/// and upper limits, `s3`/`s4` those of `x` from its box. `z1` prices the
/// lower side directly and `z1 + z2` the upper side, likewise `z3` and
/// `z3 + z4` for the box, so `z2` and `z4` may take either sign.
#[derive(Debug, Clone, PartialEq)]
pub struct IpIterate {
    pub x: DVector<f64>,
    pub s1: DVector<f64>,
    pub s2: DVector<f64>,
    pub s3: DVector<f64>,
    pub s4: DVector<f64>,
    pub lambda: DVector<f64>,
    pub z1: DVector<f64>,
    pub z2: DVector<f64>,
    pub z3: DVector<f64>,
    pub z4: DVector<f64>,
    pub mu: f64,
    /// Centering parameter used at the next barrier update.
    pub beta: f64,
    /// Complementarity gap.
    pub rho: f64,
}

impl IpIterate {
    /// Starting point: slacks pushed into the middle half of each range,
    /// duals on the `mu` central path and `λ = −1`.
    pub fn start<N: Nlp + ?Sized>(nlp: &N, x: DVector<f64>, mu: f64, beta: f64) -> IpIterate {
        let (hlo, hhi) = nlp.h_bounds();
        let (xlo, xhi) = nlp.x_bounds();
        let h = nlp.h(&x);
        let lower = |v: f64, lo: f64, width: f64| (v - lo).max(0.25 * width).min(0.75 * width);
        let s1 = DVector::from_fn(h.len(), |i, _| lower(h[i], hlo[i], hhi[i] - hlo[i]));
        let s2 = DVector::from_fn(h.len(), |i, _| hhi[i] - hlo[i] - s1[i]);
        let s3 = DVector::from_fn(x.len(), |i, _| lower(x[i], xlo[i], xhi[i] - xlo[i]));
        let s4 = DVector::from_fn(x.len(), |i, _| xhi[i] - xlo[i] - s3[i]);
        let z1 = s1.map(|s| mu / s);
        let z2 = s2.map(|s| mu / s) - &z1;
        let z3 = s3.map(|s| mu / s);
        let z4 = s4.map(|s| mu / s) - &z3;
        let mut it = IpIterate {
            lambda: DVector::from_element(nlp.m(), -1.0),
            x,
            s1,
            s2,
            s3,
            s4,
            z1,
            z2,
            z3,
            z4,
            mu,
            beta,
            rho: 0.0,
        };
        it.rho = it.gap();
        it
    }

    /// `z1ᵀs1 + (z1+z2)ᵀs2 + z3ᵀs3 + (z3+z4)ᵀs4`.
    pub fn gap(&self) -> f64 {
        self.z1.dot(&self.s1)
            + (&self.z1 + &self.z2).dot(&self.s2)
            + self.z3.dot(&self.s3)
            + (&self.z3 + &self.z4).dot(&self.s4)
    }

    fn slacks_positive(&self) -> bool {
        [&self.s1, &self.s2, &self.s3, &self.s4]
            .iter()
            .all(|s| s.iter().all(|&v| v > 0.0))
    }
}

/// Residual of the barrier KKT conditions, block by block.
#[derive(Debug, Clone, PartialEq)]
pub struct KktResidual {
    /// `∇f − J_gᵀλ + J_hᵀz2 + z4`.
    pub dual: DVector<f64>,
    /// `S1 z1 − μ`.
    pub comp1: DVector<f64>,
    /// `S2 (z1 + z2) − μ`.
    pub comp2: DVector<f64>,
    /// `S3 z3 − μ`.
    pub comp3: DVector<f64>,
    /// `S4 (z3 + z4) − μ`.
    pub comp4: DVector<f64>,
    /// `g(x)`.
    pub balance: DVector<f64>,
    /// `s1 + s2 − (h_max − h_min)`.
    pub range_h: DVector<f64>,
    /// `h(x) + s2 − h_max`.
    pub upper_h: DVector<f64>,
    /// `s3 + s4 − (x_max − x_min)`.
    pub range_x: DVector<f64>,
    /// `x + s4 − x_max`.
    pub upper_x: DVector<f64>,
    /// Infinity norm over every block.
    pub norm: f64,
}

impl KktResidual {
    /// Largest violation outside the complementarity blocks.
    pub fn infeasibility(&self) -> f64 {
        [
            &self.dual,
            &self.balance,
            &self.range_h,
            &self.upper_h,
            &self.range_x,
            &self.upper_x,
        ]
        .iter()
        .map(|b| amax(b))
        .fold(0.0, f64::max)
    }

    fn blocks(&self) -> [&DVector<f64>; 10] {
        [
            &self.dual,
            &self.comp1,
            &self.comp2,
            &self.comp3,
            &self.comp4,
            &self.balance,
            &self.range_h,
            &self.upper_h,
            &self.range_x,
            &self.upper_x,
        ]
    }
}

fn amax(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn kkt_residual<N: Nlp + ?Sized>(it: &IpIterate, nlp: &N, mu: f64) -> Result<KktResidual> {
    if !it.slacks_positive() {
        return Err(Error::Numerical("interior-point slack is not strictly positive".into()));
    }
    let (hlo, hhi) = nlp.h_bounds();
    let (xlo, xhi) = nlp.x_bounds();
    let x = &it.x;
    let dual = nlp.grad_f(x) - nlp.jac_g(x).transpose() * &it.lambda + nlp.jac_h(x).transpose() * &it.z2 + &it.z4;
    let comp = |s: &DVector<f64>, z: &DVector<f64>| s.component_mul(z).add_scalar(-mu);
    let mut r = KktResidual {
        dual,
        comp1: comp(&it.s1, &it.z1),
        comp2: comp(&it.s2, &(&it.z1 + &it.z2)),
        comp3: comp(&it.s3, &it.z3),
        comp4: comp(&it.s4, &(&it.z3 + &it.z4)),
        balance: nlp.g(x),
        range_h: &it.s1 + &it.s2 - (&hhi - &hlo),
        upper_h: nlp.h(x) + &it.s2 - &hhi,
        range_x: &it.s3 + &it.s4 - (&xhi - &xlo),
        upper_x: x + &it.s4 - &xhi,
        norm: 0.0,
    };
    r.norm = r.blocks().iter().map(|b| amax(b)).fold(0.0, f64::max);
    Ok(r)
}

/// Newton direction for every primal and dual block.
#[derive(Debug, Clone, PartialEq)]
pub struct Deltas {
    pub x: DVector<f64>,
    pub lambda: DVector<f64>,
    pub s1: DVector<f64>,
    pub s2: DVector<f64>,
    pub s3: DVector<f64>,
    pub s4: DVector<f64>,
    pub z1: DVector<f64>,
    pub z2: DVector<f64>,
    pub z3: DVector<f64>,
    pub z4: DVector<f64>,
}

/// Solve the linearized KKT system at `it` for barrier `mu`.
///
/// The slack and multiplier blocks are eliminated, leaving
/// `[A −J_gᵀ; J_g 0] [Δx; Δλ] = [r; −g]` with
/// `A = ∇²L + J_hᵀ (S1⁻¹Z1 + S2⁻¹(Z1+Z2)) J_h + S3⁻¹Z3 + S4⁻¹(Z3+Z4) + τI`.
/// The step fails with a numerical error when the reduced matrix does not
/// have the inertia of a well-posed barrier step (positive curvature on
/// the null space of `J_g`); the caller then retries with a larger `tau`.
pub fn newton_step<N: Nlp + ?Sized>(it: &IpIterate, nlp: &N, mu: f64, tau: f64) -> Result<Deltas> {
    let (hlo, hhi) = nlp.h_bounds();
    let (xlo, xhi) = nlp.x_bounds();
    let x = &it.x;
    let jg = nlp.jac_g(x);
    let jh = nlp.jac_h(x);
    let w = &it.z1 + &it.z2;
    let v = &it.z3 + &it.z4;

    let rx = -(nlp.grad_f(x) - jg.transpose() * &it.lambda + jh.transpose() * &it.z2 + &it.z4);
    let r2 = it.s1.component_mul(&it.z1).map(|p| mu - p);
    let r3 = it.s2.component_mul(&w).map(|p| mu - p);
    let r4 = it.s3.component_mul(&it.z3).map(|p| mu - p);
    let r5 = it.s4.component_mul(&v).map(|p| mu - p);
    let r6 = -nlp.g(x);
    let r7 = (&hhi - &hlo) - &it.s1 - &it.s2;
    let r8 = &hhi - &it.s2 - nlp.h(x);
    let r9 = (&xhi - &xlo) - &it.s3 - &it.s4;
    let r10 = &xhi - &it.s4 - x;

    // Δs2 = r8 − J_hΔx, Δs1 = r7 − Δs2; Δz1 = ra − S1⁻¹Z1 J_hΔx and
    // Δ(z1+z2) = rb + S2⁻¹W J_hΔx, and the same pattern for the box.
    let ra = (&r2 - it.z1.component_mul(&(&r7 - &r8))).component_div(&it.s1);
    let rb = (&r3 - w.component_mul(&r8)).component_div(&it.s2);
    let rc = (&r4 - it.z3.component_mul(&(&r9 - &r10))).component_div(&it.s3);
    let rd = (&r5 - v.component_mul(&r10)).component_div(&it.s4);
    let dh = it.z1.component_div(&it.s1) + w.component_div(&it.s2);
    let dx_diag = it.z3.component_div(&it.s3) + v.component_div(&it.s4);

    let n = nlp.n();
    let mut a = nlp.hess_lagrangian(x, &it.lambda, &it.z2);
    let mut jh_scaled = jh.clone();
    for (r, mut row) in jh_scaled.row_iter_mut().enumerate() {
        row *= dh[r];
    }
    a += jh.transpose() * jh_scaled;
    for i in 0..n {
        a[(i, i)] += dx_diag[i] + tau;
    }
    let rhs_x = &rx - jh.transpose() * (&rb - &ra) - (&rd - &rc);

    // Symmetric form [A J_gᵀ; J_g 0] [Δx; −Δλ] = [r; r6]. The step is a
    // descent step for the barrier problem only when this matrix has
    // exactly n positive and m negative eigenvalues.
    let m = nlp.m();
    let mut k = DMatrix::zeros(n + m, n + m);
    k.view_mut((0, 0), (n, n)).copy_from(&a);
    k.view_mut((n, 0), (m, n)).copy_from(&jg);
    k.view_mut((0, n), (n, m)).copy_from(&jg.transpose());
    let eig = k.clone().symmetric_eigen();
    let scale = eig.eigenvalues.amax().max(1.0);
    let pos = eig.eigenvalues.iter().filter(|&&e| e > 1e-12 * scale).count();
    let neg = eig.eigenvalues.iter().filter(|&&e| e < -1e-12 * scale).count();
    if pos != n || neg != m {
        return Err(Error::Numerical(format!(
            "reduced matrix has inertia ({}, {}, {}), expected ({}, {}, 0)",
            pos,
            neg,
            n + m - pos - neg,
            n,
            m
        )));
    }
    let mut rhs = DVector::zeros(n + m);
    rhs.rows_mut(0, n).copy_from(&rhs_x);
    rhs.rows_mut(n, m).copy_from(&r6);
    let sol = k
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("reduced matrix is singular".into()))?;
    let dx = sol.rows(0, n).into_owned();
    let dlambda = -sol.rows(n, m).into_owned();

    let jdx = &jh * &dx;
    let ds2 = &r8 - &jdx;
    let ds1 = &r7 - &ds2;
    let dz1 = &ra - it.z1.component_div(&it.s1).component_mul(&jdx);
    let dw = &rb + w.component_div(&it.s2).component_mul(&jdx);
    let dz2 = &dw - &dz1;
    let ds4 = &r10 - &dx;
    let ds3 = &r9 - &ds4;
    let dz3 = &rc - it.z3.component_div(&it.s3).component_mul(&dx);
    let dv = &rd + v.component_div(&it.s4).component_mul(&dx);
    let dz4 = &dv - &dz3;
    Ok(Deltas {
        x: dx,
        lambda: dlambda,
        s1: ds1,
        s2: ds2,
        s3: ds3,
        s4: ds4,
        z1: dz1,
        z2: dz2,
        z3: dz3,
        z4: dz4,
    })
}

fn min_ratio<'a>(pairs: impl Iterator<Item = (f64, f64)> + 'a) -> f64 {
    pairs
        .filter(|&(_, d)| d < 0.0)
        .map(|(v, d)| -v / d)
        .fold(f64::MAX, f64::min)
}

/// Fraction-to-boundary step lengths `(α_p, α_d)`. Both are set to their
/// minimum because the dual residual couples primal and dual variables.
pub fn step_lengths(it: &IpIterate, d: &Deltas, gamma: f64) -> (f64, f64) {
    let zip = |a: &DVector<f64>, b: &DVector<f64>| a.iter().copied().zip(b.iter().copied()).collect::<Vec<_>>();
    let primal = min_ratio(
        [(&it.s1, &d.s1), (&it.s2, &d.s2), (&it.s3, &d.s3), (&it.s4, &d.s4)]
            .iter()
            .flat_map(|(s, ds)| zip(s, ds)),
    );
    let w = &it.z1 + &it.z2;
    let dw = &d.z1 + &d.z2;
    let v = &it.z3 + &it.z4;
    let dv = &d.z3 + &d.z4;
    let dual = min_ratio(
        [(&it.z1, &d.z1), (&it.z3, &d.z3), (&w, &dw), (&v, &dv)]
            .iter()
            .flat_map(|(z, dz)| zip(z, dz)),
    );
    let ap = (gamma * primal).min(1.0);
    let ad = (gamma * dual).min(1.0);
    let a = ap.min(ad);
    (a, a)
}

/// Next barrier value `β ρ / (2(p+q))` and the next centering parameter
/// `max(0.95 β, 0.1)`.
pub fn barrier_update(it: &IpIterate) -> (f64, f64) {
    let pq = (it.s1.len() + it.s3.len()).max(1) as f64;
    let mu = it.beta * it.rho / (2.0 * pq);
    (mu, (0.95 * it.beta).max(0.1))
}

/// Move `it` along `d`.
pub fn apply_step(it: &mut IpIterate, d: &Deltas, alpha_p: f64, alpha_d: f64) {
    it.x += alpha_p * &d.x;
    it.s1 += alpha_p * &d.s1;
    it.s2 += alpha_p * &d.s2;
    it.s3 += alpha_p * &d.s3;
    it.s4 += alpha_p * &d.s4;
    it.lambda += alpha_d * &d.lambda;
    it.z1 += alpha_d * &d.z1;
    it.z2 += alpha_d * &d.z2;
    it.z3 += alpha_d * &d.z3;
    it.z4 += alpha_d * &d.z4;
    it.rho = it.gap();
}

/// Newton step with inertia correction: `τ` starts at `1e-8 ‖∇²L‖` and
/// grows tenfold until the reduced matrix has the right inertia. Returns the step and the `τ`
/// used.
pub fn regularized_step<N: Nlp + ?Sized>(it: &IpIterate, nlp: &N, mu: f64) -> Result<(Deltas, f64)> {
    if let Ok(d) = newton_step(it, nlp, mu, 0.0) {
        return Ok((d, 0.0));
    }
    let scale = nlp.hess_lagrangian(&it.x, &it.lambda, &it.z2).amax().max(1.0);
    let mut tau = 1e-8 * scale;
    for _ in 0..30 {
        if let Ok(d) = newton_step(it, nlp, mu, tau) {
            return Ok((d, tau));
        }
        tau *= 10.0;
    }
    Err(Error::Numerical("reduced matrix stays singular under regularization".into()))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// `min ½ Σ (x_i − a_i)²` s.t. `x_0 + x_1 = c`, `−5 ≤ x_0 − x_1 ≤ 5`,
    /// `−10 ≤ x ≤ 10`.
    pub(crate) struct Toy {
        pub a: [f64; 2],
        pub c: f64,
    }

    impl Nlp for Toy {
        fn n(&self) -> usize {
            2
        }
        fn m(&self) -> usize {
            1
        }
        fn p(&self) -> usize {
            1
        }
        fn x_bounds(&self) -> (DVector<f64>, DVector<f64>) {
            (DVector::from_element(2, -10.0), DVector::from_element(2, 10.0))
        }
        fn h_bounds(&self) -> (DVector<f64>, DVector<f64>) {
            (DVector::from_element(1, -5.0), DVector::from_element(1, 5.0))
        }
        fn f(&self, x: &DVector<f64>) -> f64 {
            0.5 * ((x[0] - self.a[0]).powi(2) + (x[1] - self.a[1]).powi(2))
        }
        fn grad_f(&self, x: &DVector<f64>) -> DVector<f64> {
            DVector::from_vec(vec![x[0] - self.a[0], x[1] - self.a[1]])
        }
        fn g(&self, x: &DVector<f64>) -> DVector<f64> {
            DVector::from_element(1, x[0] + x[1] - self.c)
        }
        fn jac_g(&self, _: &DVector<f64>) -> DMatrix<f64> {
            DMatrix::from_row_slice(1, 2, &[1.0, 1.0])
        }
        fn h(&self, x: &DVector<f64>) -> DVector<f64> {
            DVector::from_element(1, x[0] - x[1])
        }
        fn jac_h(&self, _: &DVector<f64>) -> DMatrix<f64> {
            DMatrix::from_row_slice(1, 2, &[1.0, -1.0])
        }
        fn hess_lagrangian(&self, _: &DVector<f64>, _: &DVector<f64>, _: &DVector<f64>) -> DMatrix<f64> {
            DMatrix::identity(2, 2)
        }
    }

    /// Residual of the full linearized system (before elimination).
    fn linearized_residual(it: &IpIterate, nlp: &Toy, mu: f64, d: &Deltas) -> f64 {
        let x = &it.x;
        let (hlo, hhi) = nlp.h_bounds();
        let (xlo, xhi) = nlp.x_bounds();
        let (jg, jh) = (nlp.jac_g(x), nlp.jac_h(x));
        let h = nlp.hess_lagrangian(x, &it.lambda, &it.z2);
        let w = &it.z1 + &it.z2;
        let v = &it.z3 + &it.z4;
        let rows: Vec<DVector<f64>> = vec![
            nlp.grad_f(x) + &h * &d.x - jg.transpose() * (&it.lambda + &d.lambda)
                + jh.transpose() * (&it.z2 + &d.z2)
                + &it.z4
                + &d.z4,
            (it.s1.component_mul(&it.z1) + it.s1.component_mul(&d.z1) + d.s1.component_mul(&it.z1)).add_scalar(-mu),
            (it.s2.component_mul(&w) + it.s2.component_mul(&(&d.z1 + &d.z2)) + d.s2.component_mul(&w)).add_scalar(-mu),
            (it.s3.component_mul(&it.z3) + it.s3.component_mul(&d.z3) + d.s3.component_mul(&it.z3)).add_scalar(-mu),
            (it.s4.component_mul(&v) + it.s4.component_mul(&(&d.z3 + &d.z4)) + d.s4.component_mul(&v)).add_scalar(-mu),
            nlp.g(x) + &jg * &d.x,
            &it.s1 + &it.s2 + &d.s1 + &d.s2 - (&hhi - &hlo),
            nlp.h(x) + &jh * &d.x + &it.s2 + &d.s2 - &hhi,
            &it.s3 + &it.s4 + &d.s3 + &d.s4 - (&xhi - &xlo),
            x + &d.x + &it.s4 + &d.s4 - &xhi,
        ];
        rows.iter().map(amax).fold(0.0, f64::max)
    }

    fn toy_start() -> (Toy, IpIterate) {
        let toy = Toy { a: [3.0, -1.0], c: 1.0 };
        let it = IpIterate::start(&toy, DVector::from_vec(vec![0.5, 2.0]), 0.1, 0.2);
        (toy, it)
    }

    #[test]
    fn newton_step_solves_the_full_system() {
        let (toy, it) = toy_start();
        let d = newton_step(&it, &toy, 0.05, 0.0).unwrap();
        let scale = 1.0 + it.x.amax();
        assert!(linearized_residual(&it, &toy, 0.05, &d) <= 1e-8 * scale);
    }

    #[test]
    fn stationary_point_has_zero_residual() {
        // a already satisfies the equality and every inequality is slack,
        // so x = a with all multipliers zero is exactly stationary at μ = 0.
        let toy = Toy { a: [0.8, 0.2], c: 1.0 };
        let mut it = IpIterate::start(&toy, DVector::from_vec(vec![0.8, 0.2]), 0.0, 0.2);
        it.lambda = DVector::zeros(1);
        let r = kkt_residual(&it, &toy, 0.0).unwrap();
        assert!(r.norm <= 1e-12, "{:?}", r);
    }

    #[test]
    fn slack_perturbation_moves_complementarity_linearly() {
        let (toy, it) = toy_start();
        let r0 = kkt_residual(&it, &toy, 0.05).unwrap();
        let mut p = it.clone();
        let delta = 0.125;
        p.s1[0] += delta;
        let r1 = kkt_residual(&p, &toy, 0.05).unwrap();
        assert!((r1.comp1[0] - r0.comp1[0] - it.z1[0] * delta).abs() < 1e-15);
    }

    #[test]
    fn mu_zero_complementarity_is_the_products() {
        let (toy, it) = toy_start();
        let r = kkt_residual(&it, &toy, 0.0).unwrap();
        assert_eq!(r.comp1[0], it.s1[0] * it.z1[0]);
        assert_eq!(r.comp3, it.s3.component_mul(&it.z3));
    }

    #[test]
    fn nonpositive_slack_is_rejected() {
        let (toy, mut it) = toy_start();
        it.s4[1] = 0.0;
        assert!(kkt_residual(&it, &toy, 0.1).is_err());
    }

    #[test]
    fn zero_rhs_gives_zero_step() {
        // At an exact point of the μ central path every right-hand side is
        // zero: build one from the toy minimizer with zero barrier.
        let toy = Toy { a: [0.8, 0.2], c: 1.0 };
        let mut it = IpIterate::start(&toy, DVector::from_vec(vec![0.8, 0.2]), 0.0, 0.2);
        it.lambda = DVector::zeros(1);
        let d = newton_step(&it, &toy, 0.0, 0.0).unwrap();
        for b in [&d.x, &d.lambda, &d.s1, &d.s2, &d.s3, &d.s4, &d.z1, &d.z2, &d.z3, &d.z4] {
            assert!(b.amax() < 1e-15);
        }
    }

    #[test]
    fn equality_qp_lands_in_one_step() {
        // With the barrier multipliers at zero the Newton system is the
        // KKT system of an equality-constrained QP, so one full step is exact.
        let toy = Toy { a: [3.0, -1.0], c: 1.0 };
        let mut it = IpIterate::start(&toy, DVector::from_vec(vec![0.0, 0.0]), 0.0, 0.2);
        it.lambda = DVector::zeros(1);
        let d = newton_step(&it, &toy, 0.0, 0.0).unwrap();
        apply_step(&mut it, &d, 1.0, 1.0);
        assert!((it.x[0] - 2.5).abs() < 1e-14 && (it.x[1] + 1.5).abs() < 1e-14);
        assert!((it.lambda[0] + 0.5).abs() < 1e-14);
    }

    #[test]
    fn one_dimensional_barrier_center() {
        // min ½(x − a)² on [lo, hi] with no other rows: the μ-center solves
        // x − a − μ/(x − lo) + μ/(hi − x) = 0. Newton at fixed μ from the
        // center's neighbourhood converges to it.
        struct Box1 {
            a: f64,
        }
        impl Nlp for Box1 {
            fn n(&self) -> usize {
                1
            }
            fn m(&self) -> usize {
                0
            }
            fn p(&self) -> usize {
                0
            }
            fn x_bounds(&self) -> (DVector<f64>, DVector<f64>) {
                (DVector::from_element(1, 0.0), DVector::from_element(1, 1.0))
            }
            fn h_bounds(&self) -> (DVector<f64>, DVector<f64>) {
                (DVector::zeros(0), DVector::zeros(0))
            }
            fn f(&self, x: &DVector<f64>) -> f64 {
                0.5 * (x[0] - self.a).powi(2)
            }
            fn grad_f(&self, x: &DVector<f64>) -> DVector<f64> {
                DVector::from_element(1, x[0] - self.a)
            }
            fn g(&self, _: &DVector<f64>) -> DVector<f64> {
                DVector::zeros(0)
            }
            fn jac_g(&self, _: &DVector<f64>) -> DMatrix<f64> {
                DMatrix::zeros(0, 1)
            }
            fn h(&self, _: &DVector<f64>) -> DVector<f64> {
                DVector::zeros(0)
            }
            fn jac_h(&self, _: &DVector<f64>) -> DMatrix<f64> {
                DMatrix::zeros(0, 1)
            }
            fn hess_lagrangian(&self, _: &DVector<f64>, _: &DVector<f64>, _: &DVector<f64>) -> DMatrix<f64> {
                DMatrix::identity(1, 1)
            }
        }
        // a = 1/2 is symmetric: the center is x = 1/2 for every μ, and the
        // starting point is already on it, so one step stays put exactly.
        let nlp = Box1 { a: 0.5 };
        let mu = 0.01;
        let mut it = IpIterate::start(&nlp, DVector::from_element(1, 0.5), mu, 0.2);
        let d = newton_step(&it, &nlp, mu, 0.0).unwrap();
        apply_step(&mut it, &d, 1.0, 1.0);
        assert!((it.x[0] - 0.5).abs() < 1e-15);

        // Asymmetric: a = 0.9, μ = 0.01; the center is the root in (0, 1).
        let nlp = Box1 { a: 0.9 };
        let phi = |x: f64| x - 0.9 - mu / x + mu / (1.0 - x);
        let (mut lo, mut hi) = (1e-9, 1.0 - 1e-9);
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if phi(m) > 0.0 {
                hi = m
            } else {
                lo = m
            }
        }
        let center = 0.5 * (lo + hi);
        let mut it = IpIterate::start(&nlp, DVector::from_element(1, 0.7), mu, 0.2);
        for _ in 0..30 {
            let d = newton_step(&it, &nlp, mu, 0.0).unwrap();
            let (a, _) = step_lengths(&it, &d, 0.9995);
            apply_step(&mut it, &d, a, a);
        }
        assert!((it.x[0] - center).abs() < 1e-10, "{} vs {}", it.x[0], center);
    }

    #[test]
    fn step_length_examples() {
        let (toy, it) = toy_start();
        let mut d = newton_step(&it, &toy, 0.05, 0.0).unwrap();
        for v in [&mut d.s1, &mut d.s2, &mut d.s3, &mut d.s4, &mut d.z1, &mut d.z2, &mut d.z3, &mut d.z4] {
            v.fill(0.0);
        }
        assert_eq!(step_lengths(&it, &d, 0.9995), (1.0, 1.0));

        let mut it1 = it.clone();
        it1.s1[0] = 1.0;
        d.s1[0] = -2.0;
        assert_eq!(step_lengths(&it1, &d, 0.9995), (0.49975, 0.49975));
        assert_eq!(step_lengths(&it1, &d, 0.0), (0.0, 0.0));
    }

    #[test]
    fn barrier_examples() {
        let (_, mut it) = toy_start();
        // One inequality row and one box row.
        it.s1 = DVector::from_element(1, 1.0);
        it.s3 = DVector::from_element(1, 1.0);
        it.rho = 4.0;
        it.beta = 0.2;
        let (mu, next) = barrier_update(&it);
        assert!((mu - 0.2).abs() < 1e-15);
        assert!((next - 0.19).abs() < 1e-15);

        let mut betas = vec![0.2];
        for _ in 0..40 {
            it.beta = *betas.last().unwrap();
            betas.push(barrier_update(&it).1);
        }
        assert!((betas[2] - 0.1805).abs() < 1e-15);
        assert_eq!(*betas.last().unwrap(), 0.1);
        assert!(betas.windows(2).all(|w| w[1] <= w[0]));

        it.rho = 0.0;
        assert_eq!(barrier_update(&it).0, 0.0);
    }
}
