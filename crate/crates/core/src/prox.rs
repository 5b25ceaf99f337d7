//! Closed-form proximal maps of the three separable objectives.
//!
//! Each map solves, coordinate by coordinate,
//! `argmin_u  penalty(u) + (1/(2t)) (u - v)^2` for step `t > 0`.

use nalgebra::DVector;

/// Soft threshold: `sign(v) * max(|v| - t, 0)`.
pub fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Prox of `|u|` with step `t`.
pub fn prox_l1_scalar(v: f64, t: f64) -> f64 {
    soft_threshold(v, t)
}

/// Prox of `|u| + beta |u - w|` with step `t`.
///
/// The objective is piecewise quadratic with kinks at 0 and `w`. The
/// minimizer is one of five candidates: the two kinks, or the shifted soft
/// threshold `v - t (s1 + beta s2)` in each of the three open intervals
/// where the signs `(s1, s2)` of `u` and `u - w` are constant. Near-exact
/// ties (within 1e-12) resolve to the candidate closer to 0, then to `w`.
pub fn prox_l1l1_scalar(v: f64, w: f64, beta: f64, t: f64) -> f64 {
    debug_assert!(t > 0.0 && beta > 0.0);
    let phi = |u: f64| u.abs() + beta * (u - w).abs() + (u - v) * (u - v) / (2.0 * t);

    let lo = f64::min(0.0, w);
    let hi = f64::max(0.0, w);
    let mut candidates: [f64; 5] = [lo, hi, f64::NAN, f64::NAN, f64::NAN];
    let mut count = 2;

    // (sign(u), sign(u - w), interval) for the three open regions
    let regions = [
        (-1.0, -1.0, f64::NEG_INFINITY, lo),
        (
            if w > 0.0 { 1.0 } else { -1.0 },
            if w > 0.0 { -1.0 } else { 1.0 },
            lo,
            hi,
        ),
        (1.0, 1.0, hi, f64::INFINITY),
    ];
    for &(s1, s2, left, right) in &regions {
        if left >= right {
            continue; // empty middle region when w = 0
        }
        let u = v - t * (s1 + beta * s2);
        if u > left && u < right {
            candidates[count] = u;
            count += 1;
        }
    }

    let mut best = candidates[0];
    let mut best_val = phi(best);
    for &u in &candidates[1..count] {
        let val = phi(u);
        let better = val < best_val - 1e-12
            || ((val - best_val).abs() <= 1e-12
                && (u.abs() < best.abs()
                    || (u.abs() == best.abs() && (u - w).abs() < (best - w).abs())));
        if better {
            best = u;
            best_val = val;
        }
    }
    best
}

/// Prox of `|u| + (beta/2)(u - w)^2` with step `t`: a soft threshold of
/// `(v + t beta w) / (1 + t beta)` at level `t / (1 + t beta)`.
pub fn prox_l1l2_scalar(v: f64, w: f64, beta: f64, t: f64) -> f64 {
    debug_assert!(t > 0.0 && beta > 0.0);
    let denom = 1.0 + t * beta;
    soft_threshold((v + t * beta * w) / denom, t / denom)
}

pub fn prox_l1(v: &DVector<f64>, t: f64) -> DVector<f64> {
    assert!(t > 0.0, "prox step must be positive");
    v.map(|vi| soft_threshold(vi, t))
}

pub fn prox_l1l1(v: &DVector<f64>, w: &DVector<f64>, beta: f64, t: f64) -> DVector<f64> {
    assert!(
        t > 0.0 && beta > 0.0,
        "prox step and weight must be positive"
    );
    assert_eq!(v.len(), w.len(), "prox inputs must have equal length");
    DVector::from_fn(v.len(), |i, _| prox_l1l1_scalar(v[i], w[i], beta, t))
}

pub fn prox_l1l2(v: &DVector<f64>, w: &DVector<f64>, beta: f64, t: f64) -> DVector<f64> {
    assert!(
        t > 0.0 && beta > 0.0,
        "prox step and weight must be positive"
    );
    assert_eq!(v.len(), w.len(), "prox inputs must have equal length");
    DVector::from_fn(v.len(), |i, _| prox_l1l2_scalar(v[i], w[i], beta, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn soft_threshold_basics() {
        assert_eq!(prox_l1_scalar(3.0, 1.0), 2.0);
        assert_eq!(prox_l1_scalar(-0.5, 1.0), 0.0);
        assert_eq!(prox_l1_scalar(0.0, 0.7), 0.0);
        let zeros = DVector::from_element(6, 0.0);
        assert_eq!(prox_l1(&zeros, 0.3), zeros);
    }

    #[test]
    fn l1l1_reduces_to_merged_threshold_at_zero_w() {
        for &(v, beta, t) in &[(2.5, 1.0, 0.4), (-1.1, 3.0, 0.2), (0.05, 0.5, 1.0)] {
            let merged = prox_l1_scalar(v, t * (1.0 + beta));
            assert_relative_eq!(prox_l1l1_scalar(v, 0.0, beta, t), merged, epsilon = 1e-14);
        }
    }

    #[test]
    fn l1l1_stays_at_the_kink() {
        assert_eq!(prox_l1l1_scalar(5.0, 5.0, 1.0, 0.1), 5.0);
    }

    #[test]
    fn l1l2_limits() {
        // beta -> 0 recovers the plain soft threshold
        for &v in &[-2.0, -0.3, 0.0, 0.9, 4.2] {
            let tiny = prox_l1l2_scalar(v, 1.5, 1e-12, 0.7);
            assert_relative_eq!(tiny, prox_l1_scalar(v, 0.7), epsilon = 1e-9);
        }
        // w = 0, beta = 1, t = 1: soft threshold of v/2 at 1/2
        for &v in &[-3.0, -0.9, 0.2, 2.4] {
            assert_relative_eq!(
                prox_l1l2_scalar(v, 0.0, 1.0, 1.0),
                soft_threshold(v / 2.0, 0.5),
                epsilon = 1e-14
            );
        }
    }

    proptest! {
        #[test]
        fn prox_maps_are_nonexpansive(
            a in proptest::collection::vec(-5.0f64..5.0, 8),
            b in proptest::collection::vec(-5.0f64..5.0, 8),
            w in proptest::collection::vec(-2.0f64..2.0, 8),
            beta in 0.05f64..8.0,
            t in 0.01f64..3.0,
        ) {
            let av = DVector::from_vec(a);
            let bv = DVector::from_vec(b);
            let wv = DVector::from_vec(w);
            let gap = (&av - &bv).norm() + 1e-12;
            prop_assert!((prox_l1(&av, t) - prox_l1(&bv, t)).norm() <= gap);
            prop_assert!((prox_l1l1(&av, &wv, beta, t) - prox_l1l1(&bv, &wv, beta, t)).norm() <= gap);
            prop_assert!((prox_l1l2(&av, &wv, beta, t) - prox_l1l2(&bv, &wv, beta, t)).norm() <= gap);
        }

        #[test]
        fn l1l1_candidate_is_global_minimizer(
            v in -4.0f64..4.0,
            w in -3.0f64..3.0,
            beta in 0.05f64..6.0,
            t in 0.02f64..2.5,
        ) {
            let u = prox_l1l1_scalar(v, w, beta, t);
            let phi = |u: f64| u.abs() + beta * (u - w).abs() + (u - v) * (u - v) / (2.0 * t);
            let base = phi(u);
            // sample points must not beat the returned minimizer
            for k in -400..=400 {
                let probe = k as f64 * 0.01 * 1.2;
                prop_assert!(base <= phi(probe) + 1e-9);
            }
        }
    }
}
