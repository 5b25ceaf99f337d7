//! Per-component classification of side information against the target
//! signal, and the derived scalars consumed by the measurement bounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{SideInformation, SparseSignal};

/// Classification of one index of the pair (x*, w).
///
/// The five classes partition {0..n}: `Good` and `Bad` apply where
/// `x_i != 0` and `w_i != x_i`, `EqualNonzero` where `w_i = x_i != 0`,
/// `OverestimateSupport` where `w_i != x_i = 0`, and `ZeroBoth` where both
/// vanish.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ComponentClass {
    Good,
    Bad,
    EqualNonzero,
    ZeroBoth,
    OverestimateSupport,
}

fn classify_slices(x: &[f64], w: &[f64], eps: f64) -> Result<Vec<ComponentClass>> {
    if x.len() != w.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            got: w.len(),
        });
    }
    if eps < 0.0 {
        return Err(Error::invalid("tolerance must be nonnegative"));
    }
    let is_zero = |v: f64| v.abs() <= eps;
    let equal = |a: f64, b: f64| (a - b).abs() <= eps;
    Ok(x.iter()
        .zip(w.iter())
        .map(|(&xi, &wi)| {
            if is_zero(xi) {
                if equal(wi, xi) {
                    ComponentClass::ZeroBoth
                } else {
                    ComponentClass::OverestimateSupport
                }
            } else if equal(wi, xi) {
                ComponentClass::EqualNonzero
            } else if (xi > 0.0 && wi > xi) || (xi < 0.0 && wi < xi) {
                ComponentClass::Good
            } else {
                ComponentClass::Bad
            }
        })
        .collect())
}

/// Classifies every component with exact floating-point equality, matching
/// the copy-based generators.
pub fn classify(signal: &SparseSignal, side: &SideInformation) -> Result<Vec<ComponentClass>> {
    classify_slices(signal.as_slice(), side.as_slice(), 0.0)
}

/// Classification with an equality tolerance, for externally produced data
/// where exact copies cannot be assumed. `eps = 0` reproduces [`classify`].
pub fn classify_with_tol(
    signal: &SparseSignal,
    side: &SideInformation,
    eps: f64,
) -> Result<Vec<ComponentClass>> {
    classify_slices(signal.as_slice(), side.as_slice(), eps)
}

/// Every scalar and index set the bounds consume, derived from one pair
/// (x*, w).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SideInfoProfile {
    /// Ambient dimension.
    pub n: usize,
    /// Nonzero count of the signal.
    pub s: usize,
    /// Good components.
    pub h: usize,
    /// Bad components.
    pub h_bar: usize,
    /// Components with `w_i = x_i != 0`.
    pub r: usize,
    /// Components with `w_i != x_i = 0`.
    pub overestimate: usize,
    /// `overestimate - r`; may be negative.
    pub xi: i64,
    /// Support of the signal.
    pub i_set: Vec<usize>,
    /// Indices where the two vectors differ.
    pub j_set: Vec<usize>,
    pub i_plus: Vec<usize>,
    pub i_minus: Vec<usize>,
    /// `|I ∪ J|`.
    pub q: usize,
    /// Off-support disagreement indices with `|w_i| >= 1`.
    pub k: usize,
    /// `max_{i ∉ I} |w_i|`; 0 when the signal is fully dense (see flag).
    pub w_bar: f64,
    /// False when `I` covers every index, leaving `w_bar` without a
    /// defining set.
    pub w_bar_defined: bool,
    /// Magnitude-weighted size of the sign pattern:
    /// sum of `(1 + x_i - w_i)^2` over positive entries,
    /// `(1 + w_i - x_i)^2` over negative entries, and `(|w_i| - 1)^2`
    /// over the support indices where the vectors agree.
    pub v: f64,
    /// Whether the normal-cone condition for the quadratic similarity term
    /// holds at unit weight: `w_bar < 1`, or some support index with
    /// `w_i != x_i` has `w_i - x_i != sign(x_i)`.
    pub l1l2_normal_cone_beta1: bool,
}

impl SideInfoProfile {
    /// True when some index has `x_i = w_i = 0`.
    pub fn has_zero_both_index(&self) -> bool {
        self.n > self.s + self.overestimate
    }
}

/// Computes the full profile with exact equality.
pub fn profile(signal: &SparseSignal, side: &SideInformation) -> Result<SideInfoProfile> {
    profile_with_tol(signal, side, 0.0)
}

/// Profile with an equality tolerance for externally loaded data.
pub fn profile_with_tol(
    signal: &SparseSignal,
    side: &SideInformation,
    eps: f64,
) -> Result<SideInfoProfile> {
    let classes = classify_with_tol(signal, side, eps)?;
    let x = signal.as_slice();
    let w = side.as_slice();
    let n = x.len();

    let mut h = 0usize;
    let mut h_bar = 0usize;
    let mut r = 0usize;
    let mut overestimate = 0usize;
    let mut i_set = Vec::new();
    let mut j_set = Vec::new();
    let mut i_plus = Vec::new();
    let mut i_minus = Vec::new();
    for (i, class) in classes.iter().enumerate() {
        match class {
            ComponentClass::Good => h += 1,
            ComponentClass::Bad => h_bar += 1,
            ComponentClass::EqualNonzero => r += 1,
            ComponentClass::OverestimateSupport => overestimate += 1,
            ComponentClass::ZeroBoth => {}
        }
        let on_support = !matches!(
            class,
            ComponentClass::ZeroBoth | ComponentClass::OverestimateSupport
        );
        if on_support {
            i_set.push(i);
            if x[i] > 0.0 {
                i_plus.push(i);
            } else {
                i_minus.push(i);
            }
        }
        if matches!(
            class,
            ComponentClass::Good | ComponentClass::Bad | ComponentClass::OverestimateSupport
        ) {
            j_set.push(i);
        }
    }
    let s = i_set.len();
    let q = s + overestimate; // |I ∪ J| = |I| + |I^c ∩ J|
    let k = classes
        .iter()
        .enumerate()
        .filter(|(i, c)| matches!(c, ComponentClass::OverestimateSupport) && w[*i].abs() >= 1.0)
        .count();

    let w_bar_defined = s < n;
    let w_bar = if w_bar_defined {
        classes
            .iter()
            .enumerate()
            .filter(|(_, c)| {
                matches!(
                    c,
                    ComponentClass::ZeroBoth | ComponentClass::OverestimateSupport
                )
            })
            .map(|(i, _)| w[i].abs())
            .fold(0.0, f64::max)
    } else {
        0.0
    };

    let mut v = 0.0;
    for &i in &i_plus {
        let t = 1.0 + x[i] - w[i];
        v += t * t;
    }
    for &i in &i_minus {
        let t = 1.0 + w[i] - x[i];
        v += t * t;
    }
    for (i, class) in classes.iter().enumerate() {
        if matches!(class, ComponentClass::EqualNonzero) {
            let t = w[i].abs() - 1.0;
            v += t * t;
        }
    }

    let l1l2_normal_cone_beta1 = w_bar < 1.0
        || classes.iter().enumerate().any(|(i, c)| {
            matches!(c, ComponentClass::Good | ComponentClass::Bad) && w[i] - x[i] != x[i].signum()
        });

    Ok(SideInfoProfile {
        n,
        s,
        h,
        h_bar,
        r,
        overestimate,
        xi: overestimate as i64 - r as i64,
        i_set,
        j_set,
        i_plus,
        i_minus,
        q,
        k,
        w_bar,
        w_bar_defined,
        v,
        l1l2_normal_cone_beta1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_side_info, generate_signal, MagnitudeLaw, SideInfoSpec};

    fn pair(x: &[f64], w: &[f64]) -> (SparseSignal, SideInformation) {
        (
            SparseSignal::from_slice(x).unwrap(),
            SideInformation::from_slice(w).unwrap(),
        )
    }

    #[test]
    fn definition_cases() {
        let (x, w) = pair(&[0.0, 1.0], &[0.0, 1.6]);
        assert_eq!(classify(&x, &w).unwrap()[1], ComponentClass::Good);

        let (x, w) = pair(&[0.0, 1.0], &[0.0, 0.5]);
        assert_eq!(classify(&x, &w).unwrap()[1], ComponentClass::Bad);

        let (x, w) = pair(&[0.0, 1.0], &[0.0, -0.5]);
        assert_eq!(classify(&x, &w).unwrap()[1], ComponentClass::Bad);

        let (x, w) = pair(&[0.0, -1.0], &[0.0, -1.6]);
        assert_eq!(classify(&x, &w).unwrap()[1], ComponentClass::Good);

        let (x, w) = pair(&[0.0, 0.0], &[0.0, 0.0]);
        assert_eq!(
            classify(&x, &w).unwrap(),
            vec![ComponentClass::ZeroBoth, ComponentClass::ZeroBoth]
        );

        let (x, w) = pair(&[0.0, 1.0], &[0.3, 1.0]);
        let classes = classify(&x, &w).unwrap();
        assert_eq!(classes[0], ComponentClass::OverestimateSupport);
        assert_eq!(classes[1], ComponentClass::EqualNonzero);
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let x = SparseSignal::from_slice(&[1.0, 0.0]).unwrap();
        let w = SideInformation::from_slice(&[1.0, 0.0, 0.0]).unwrap();
        assert!(classify(&x, &w).is_err());
    }

    #[test]
    fn tolerant_classification() {
        let (x, w) = pair(&[0.0, 1.0], &[1e-9, 1.0 + 1e-9]);
        let exact = classify(&x, &w).unwrap();
        assert_eq!(exact[0], ComponentClass::OverestimateSupport);
        assert_eq!(exact[1], ComponentClass::Good);
        let fuzzy = classify_with_tol(&x, &w, 1e-6).unwrap();
        assert_eq!(fuzzy[0], ComponentClass::ZeroBoth);
        assert_eq!(fuzzy[1], ComponentClass::EqualNonzero);
    }

    #[test]
    fn identical_side_info_profile() {
        let sig = generate_signal(60, 12, MagnitudeLaw::SignOnly, 5).unwrap();
        let w = generate_side_info(&sig, &SideInfoSpec::identical(12), 6).unwrap();
        let p = profile(&sig, &w).unwrap();
        assert_eq!((p.h_bar, p.h, p.r), (0, 0, 12));
        assert_eq!(p.xi, -12);
        assert_eq!(p.q, 12);
        assert_eq!(p.k, 0);
    }

    #[test]
    fn fully_dense_signal_flags_w_bar() {
        let (x, w) = pair(&[1.0, -2.0], &[1.5, -2.0]);
        let p = profile(&x, &w).unwrap();
        assert!(!p.w_bar_defined);
        assert_eq!(p.w_bar, 0.0);
        assert_eq!(p.q, 2);
    }

    #[test]
    fn set_identities_hold_on_generated_pairs() {
        for trial in 0..20 {
            let sig = generate_signal(40, 10, MagnitudeLaw::GaussianMagnitude, trial).unwrap();
            let spec = SideInfoSpec::new(3, 4, 3, 5);
            let w = generate_side_info(&sig, &spec, trial + 100).unwrap();
            let p = profile(&sig, &w).unwrap();
            assert_eq!(p.h_bar + p.h + p.r, p.s);
            assert_eq!(p.xi, p.overestimate as i64 - p.r as i64);
            let ic_and_j = p.j_set.iter().filter(|i| !p.i_set.contains(i)).count();
            assert_eq!(p.q - p.s, ic_and_j);
            let ic_and_jc = (0..p.n)
                .filter(|i| !p.i_set.contains(i) && !p.j_set.contains(i))
                .count();
            assert_eq!(p.n - p.q, ic_and_jc);
            assert!(p.k <= p.q - p.s);
            let w_inf = w.as_slice().iter().fold(0.0f64, |a, b| a.max(b.abs()));
            assert!(p.w_bar <= w_inf);
        }
    }
}
