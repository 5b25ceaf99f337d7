//! Shared test oracles, all independent of the library code paths they
//! check: a 1-D grid minimizer for the proximal maps, a dense primal-dual
//! interior-point solver for the LP/QP reformulations of the three
//! programs, and a per-index recount of the side-information profile.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use sics_core::{Objective, ObjectiveKind};

/// Minimizer of `phi` over `[lo, hi]`: a 1e-4 coarse scan followed by a
/// 1e-7 local refinement around the best coarse point.
pub fn grid_min_scalar<F: Fn(f64) -> f64>(phi: F, lo: f64, hi: f64) -> f64 {
    let coarse = 1e-4;
    let steps = ((hi - lo) / coarse).ceil() as usize;
    let mut best_u = lo;
    let mut best = phi(lo);
    for k in 1..=steps {
        let u = lo + k as f64 * coarse;
        let v = phi(u);
        if v < best {
            best = v;
            best_u = u;
        }
    }
    let fine = 1e-7;
    let start = best_u - 2.0 * coarse;
    let fsteps = (4.0 * coarse / fine).ceil() as usize;
    let mut refined = best_u;
    for k in 0..=fsteps {
        let u = start + k as f64 * fine;
        let v = phi(u);
        if v < best {
            best = v;
            refined = u;
        }
    }
    refined
}

/// `min c'z + (1/2) z'Qz  s.t.  E z = b, z >= 0`.
pub struct Lcqp {
    pub q: Option<DMatrix<f64>>,
    pub c: DVector<f64>,
    pub e: DMatrix<f64>,
    pub b: DVector<f64>,
}

/// Dense infeasible-start primal-dual interior point with fixed centering.
/// Built for the tiny reformulations used in tests; returns the primal
/// solution and the optimal objective value.
pub fn solve_lcqp(prob: &Lcqp) -> Result<(DVector<f64>, f64), String> {
    let d = prob.c.len();
    let p = prob.b.len();
    assert_eq!(prob.e.ncols(), d);
    assert_eq!(prob.e.nrows(), p);

    let mut z = DVector::from_element(d, 1.0);
    let mut lam = DVector::from_element(d, 1.0);
    let mut nu = DVector::<f64>::zeros(p);
    let sigma = 0.1;

    for _ in 0..400 {
        let qz = match &prob.q {
            Some(q) => q * &z,
            None => DVector::zeros(d),
        };
        let r_dual = &qz + &prob.c + prob.e.transpose() * &nu - &lam;
        let r_primal = &prob.e * &z - &prob.b;
        let mu = z.dot(&lam) / d as f64;
        if r_dual.amax() <= 1e-10 && r_primal.amax() <= 1e-10 && mu <= 1e-11 {
            let objective = prob.c.dot(&z) + 0.5 * z.dot(&qz);
            return Ok((z, objective));
        }

        let nsys = 2 * d + p;
        let mut kkt = DMatrix::<f64>::zeros(nsys, nsys);
        if let Some(q) = &prob.q {
            kkt.view_mut((0, 0), (d, d)).copy_from(q);
        }
        kkt.view_mut((0, d), (d, p)).copy_from(&prob.e.transpose());
        for i in 0..d {
            kkt[(i, d + p + i)] = -1.0;
        }
        kkt.view_mut((d, 0), (p, d)).copy_from(&prob.e);
        for i in 0..d {
            kkt[(d + p + i, i)] = lam[i];
            kkt[(d + p + i, d + p + i)] = z[i];
        }
        let mut rhs = DVector::<f64>::zeros(nsys);
        for i in 0..d {
            rhs[i] = -r_dual[i];
        }
        for i in 0..p {
            rhs[d + i] = -r_primal[i];
        }
        for i in 0..d {
            rhs[d + p + i] = -(z[i] * lam[i] - sigma * mu);
        }
        let delta = kkt.lu().solve(&rhs).ok_or("singular KKT system")?;
        let dz = delta.rows(0, d).into_owned();
        let dnu = delta.rows(d, p).into_owned();
        let dlam = delta.rows(d + p, d).into_owned();

        let mut alpha_primal: f64 = 1.0;
        for i in 0..d {
            if dz[i] < 0.0 {
                alpha_primal = alpha_primal.min(-z[i] / dz[i]);
            }
        }
        let mut alpha_dual: f64 = 1.0;
        for i in 0..d {
            if dlam[i] < 0.0 {
                alpha_dual = alpha_dual.min(-lam[i] / dlam[i]);
            }
        }
        let alpha_primal = (0.99 * alpha_primal).min(1.0);
        let alpha_dual = (0.99 * alpha_dual).min(1.0);
        z += alpha_primal * dz;
        nu += alpha_dual * dnu;
        lam += alpha_dual * dlam;
    }
    Err("interior point did not converge".into())
}

/// Optimal value of `min f(x) s.t. A x = y` for the given penalty, solved
/// through its nonnegative-split reformulation.
pub fn oracle_min_objective(a: &DMatrix<f64>, y: &DVector<f64>, objective: &Objective) -> f64 {
    let m = a.nrows();
    let n = a.ncols();
    match objective.kind() {
        ObjectiveKind::L1 => {
            // x = p - q, minimize 1'(p + q)
            let mut e = DMatrix::zeros(m, 2 * n);
            e.view_mut((0, 0), (m, n)).copy_from(a);
            e.view_mut((0, n), (m, n)).copy_from(&(-a));
            let prob = Lcqp {
                q: None,
                c: DVector::from_element(2 * n, 1.0),
                e,
                b: y.clone(),
            };
            solve_lcqp(&prob).expect("lp oracle").1
        }
        ObjectiveKind::L1L1 => {
            // x = p - q, x - w = r - t: constraints A(p - q) = y and
            // (p - q) - (r - t) = w; minimize 1'(p + q) + beta 1'(r + t)
            let w = objective.side_info().unwrap();
            let beta = objective.beta();
            let mut e = DMatrix::zeros(m + n, 4 * n);
            e.view_mut((0, 0), (m, n)).copy_from(a);
            e.view_mut((0, n), (m, n)).copy_from(&(-a));
            for i in 0..n {
                e[(m + i, i)] = 1.0;
                e[(m + i, n + i)] = -1.0;
                e[(m + i, 2 * n + i)] = -1.0;
                e[(m + i, 3 * n + i)] = 1.0;
            }
            let mut b = DVector::zeros(m + n);
            b.rows_mut(0, m).copy_from(y);
            b.rows_mut(m, n).copy_from(w);
            let mut c = DVector::from_element(4 * n, 1.0);
            for i in 0..2 * n {
                c[2 * n + i] = beta;
            }
            let prob = Lcqp { q: None, c, e, b };
            solve_lcqp(&prob).expect("lp oracle").1
        }
        ObjectiveKind::L1L2 => {
            // x = p - q; (beta/2)|x - w|^2 expands into a PSD quadratic in
            // (p, q), a linear term, and the constant (beta/2)|w|^2
            let w = objective.side_info().unwrap();
            let beta = objective.beta();
            let mut e = DMatrix::zeros(m, 2 * n);
            e.view_mut((0, 0), (m, n)).copy_from(a);
            e.view_mut((0, n), (m, n)).copy_from(&(-a));
            let mut q = DMatrix::zeros(2 * n, 2 * n);
            for i in 0..n {
                q[(i, i)] = beta;
                q[(n + i, n + i)] = beta;
                q[(i, n + i)] = -beta;
                q[(n + i, i)] = -beta;
            }
            let mut c = DVector::from_element(2 * n, 1.0);
            for i in 0..n {
                c[i] -= beta * w[i];
                c[n + i] += beta * w[i];
            }
            let prob = Lcqp {
                q: Some(q),
                c,
                e,
                b: y.clone(),
            };
            let (_, val) = solve_lcqp(&prob).expect("qp oracle");
            val + 0.5 * beta * w.dot(w)
        }
    }
}

/// Independent recount of every profile quantity, written directly from
/// the component definitions.
#[derive(Debug, PartialEq)]
pub struct RecountedProfile {
    pub s: usize,
    pub h: usize,
    pub h_bar: usize,
    pub r: usize,
    pub overestimate: usize,
    pub zero_both: usize,
    pub xi: i64,
    pub q: usize,
    pub k: usize,
    pub w_bar: f64,
    pub v: f64,
}

pub fn recount_profile(x: &[f64], w: &[f64]) -> RecountedProfile {
    assert_eq!(x.len(), w.len());
    let n = x.len();
    let mut out = RecountedProfile {
        s: 0,
        h: 0,
        h_bar: 0,
        r: 0,
        overestimate: 0,
        zero_both: 0,
        xi: 0,
        q: 0,
        k: 0,
        w_bar: 0.0,
        v: 0.0,
    };
    for i in 0..n {
        let (xi_, wi) = (x[i], w[i]);
        if xi_ != 0.0 {
            out.s += 1;
        }
        if (xi_ > 0.0 && xi_ < wi) || (xi_ < 0.0 && xi_ > wi) {
            out.h += 1;
        }
        if (xi_ > 0.0 && xi_ > wi) || (xi_ < 0.0 && xi_ < wi) {
            out.h_bar += 1;
        }
        if wi == xi_ && xi_ != 0.0 {
            out.r += 1;
        }
        if wi != xi_ && xi_ == 0.0 {
            out.overestimate += 1;
        }
        if wi == 0.0 && xi_ == 0.0 {
            out.zero_both += 1;
        }
        if xi_ != 0.0 || wi != xi_ {
            out.q += 1; // i in I ∪ J
        }
        if xi_ == 0.0 && wi != xi_ && wi.abs() >= 1.0 {
            out.k += 1;
        }
        if xi_ == 0.0 {
            out.w_bar = out.w_bar.max(wi.abs());
        }
        if xi_ > 0.0 {
            out.v += (1.0 + xi_ - wi) * (1.0 + xi_ - wi);
        }
        if xi_ < 0.0 {
            out.v += (1.0 + wi - xi_) * (1.0 + wi - xi_);
        }
        if xi_ != 0.0 && wi == xi_ {
            out.v += (wi.abs() - 1.0) * (wi.abs() - 1.0);
        }
    }
    out.xi = out.overestimate as i64 - out.r as i64;
    out
}
