//! Monte-Carlo estimation of the statistical dimension of the tangent
//! cones behind the three recovery objectives.
//!
//! All three penalties have separable subdifferentials at the target
//! signal, so the normal cone is the cone generated by a box, and the
//! squared distance from a Gaussian sample to that cone is a
//! one-dimensional convex minimization over the box scale. The mean of
//! that distance over samples estimates the statistical dimension, which
//! brackets the squared Gaussian width within +1.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{SideInformation, SparseSignal};
use crate::profile::profile;
use crate::solver::{Objective, ObjectiveKind};

/// Componentwise interval representation of a subdifferential at the
/// target signal, plus the admissibility of the normal-cone identity it
/// relies on.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubdifferentialBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Whether the subdifferential provably generates the whole normal
    /// cone under the objective's hypotheses.
    pub admissible: bool,
    pub notes: Vec<String>,
}

impl SubdifferentialBox {
    pub fn n(&self) -> usize {
        self.lower.len()
    }
}

/// Interval subdifferential of the objective at `signal`.
///
/// Per coordinate: the l1 part contributes `[-1, 1]` at zeros and the sign
/// elsewhere; an l1 similarity term adds the analogous `beta`-scaled
/// interval around `x_i - w_i`; a quadratic similarity term shifts by
/// `beta (x_i - w_i)`.
pub fn subdifferential_box(
    objective: &Objective,
    signal: &SparseSignal,
) -> Result<SubdifferentialBox> {
    objective.check_dims(signal.n())?;
    let x = signal.as_slice();
    let beta = objective.beta();
    let n = signal.n();
    let mut lower = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut notes = Vec::new();
    let mut admissible = true;

    let l1_interval = |xi: f64| -> (f64, f64) {
        if xi == 0.0 {
            (-1.0, 1.0)
        } else {
            (xi.signum(), xi.signum())
        }
    };

    match objective.kind() {
        ObjectiveKind::L1 => {
            for i in 0..n {
                (lower[i], upper[i]) = l1_interval(x[i]);
            }
        }
        ObjectiveKind::L1L1 => {
            let w = objective.side_info().expect("l1l1 objective has a prior");
            for i in 0..n {
                let (lo1, hi1) = l1_interval(x[i]);
                let d = x[i] - w[i];
                let (lo2, hi2) = if d == 0.0 {
                    (-beta, beta)
                } else {
                    (beta * d.signum(), beta * d.signum())
                };
                lower[i] = lo1 + lo2;
                upper[i] = hi1 + hi2;
            }
            let side = SideInformation::new(w.clone())?;
            let p = profile(signal, &side)?;
            if p.h_bar == 0 {
                admissible = false;
                notes.push(
                    "no bad component: the subdifferential may generate only part of the normal cone"
                        .into(),
                );
            }
        }
        ObjectiveKind::L1L2 => {
            let w = objective.side_info().expect("l1l2 objective has a prior");
            for i in 0..n {
                let (lo1, hi1) = l1_interval(x[i]);
                let shift = beta * (x[i] - w[i]);
                lower[i] = lo1 + shift;
                upper[i] = hi1 + shift;
            }
            let side = SideInformation::new(w.clone())?;
            let p = profile(signal, &side)?;
            let gap_condition = p
                .i_set
                .iter()
                .any(|&i| x[i] != w[i] && beta * (w[i] - x[i]) != x[i].signum());
            if !(p.w_bar < 1.0 || gap_condition) {
                admissible = false;
                notes.push(
                    "normal-cone condition fails (w_bar >= 1 and no admissible support gap)".into(),
                );
            }
        }
    }
    Ok(SubdifferentialBox {
        lower,
        upper,
        admissible,
        notes,
    })
}

/// Squared distance from `g` to the box scaled by `t >= 0`.
pub fn dist_to_scaled_box(g: &[f64], bx: &SubdifferentialBox, t: f64) -> f64 {
    assert!(t >= 0.0, "scale must be nonnegative");
    assert_eq!(g.len(), bx.n(), "sample and box must have equal length");
    let mut total = 0.0;
    for (i, &gi) in g.iter().enumerate() {
        let lo = t * bx.lower[i];
        let hi = t * bx.upper[i];
        let d = if gi > hi {
            gi - hi
        } else if gi < lo {
            lo - gi
        } else {
            0.0
        };
        total += d * d;
    }
    total
}

fn scale_derivative(g: &[f64], bx: &SubdifferentialBox, t: f64) -> f64 {
    let mut d = 0.0;
    for (i, &gi) in g.iter().enumerate() {
        let lo = t * bx.lower[i];
        let hi = t * bx.upper[i];
        if gi > hi {
            d -= 2.0 * (gi - hi) * bx.upper[i];
        } else if gi < lo {
            d += 2.0 * (lo - gi) * bx.lower[i];
        }
    }
    d
}

/// `min_{t >= 0} dist_to_scaled_box(g, bx, t)` by ternary search after
/// doubling the upper end until the derivative confirms a bracket.
fn min_dist_over_scale(g: &[f64], bx: &SubdifferentialBox) -> f64 {
    if scale_derivative(g, bx, 0.0) >= 0.0 {
        return dist_to_scaled_box(g, bx, 0.0);
    }
    let mut hi = 1.0;
    let mut guard = 0;
    while scale_derivative(g, bx, hi) < 0.0 && guard < 300 {
        hi *= 2.0;
        guard += 1;
    }
    let mut lo = 0.0;
    while hi - lo > 1e-8 * hi.max(1.0) {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if dist_to_scaled_box(g, bx, m1) < dist_to_scaled_box(g, bx, m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    dist_to_scaled_box(g, bx, 0.5 * (lo + hi))
}

/// A Monte-Carlo statistical-dimension estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WidthEstimate {
    pub delta_hat: f64,
    pub std_err: f64,
    pub samples: usize,
}

/// Deterministic pairwise sum, independent of how the values were produced.
fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// Estimates the statistical dimension of the cone polar to the cone
/// generated by `bx`.
///
/// Sample `i` draws its Gaussian vector from stream `i + 1` of a
/// counter-mode generator seeded with `seed`, and the per-sample minima are
/// reduced with a fixed pairwise order, so the result does not depend on
/// how many workers evaluate the samples.
pub fn estimate_statistical_dimension(
    bx: &SubdifferentialBox,
    samples: usize,
    seed: u64,
) -> WidthEstimate {
    assert!(samples >= 1, "at least one sample required");
    let n = bx.n();
    let dists: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64 + 1);
            let g: Vec<f64> = (0..n)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            min_dist_over_scale(&g, bx)
        })
        .collect();
    let delta_hat = pairwise_sum(&dists) / samples as f64;
    let std_err = if samples > 1 {
        let sq: Vec<f64> = dists
            .iter()
            .map(|d| (d - delta_hat) * (d - delta_hat))
            .collect();
        (pairwise_sum(&sq) / (samples as f64 - 1.0)).sqrt() / (samples as f64).sqrt()
    } else {
        0.0
    };
    WidthEstimate {
        delta_hat,
        std_err,
        samples,
    }
}

/// Builds the box for `objective` at `signal` and estimates; refuses when
/// the normal-cone identity is not guaranteed (the estimate would not be a
/// statistical dimension of the tangent cone).
pub fn estimate_for_objective(
    objective: &Objective,
    signal: &SparseSignal,
    samples: usize,
    seed: u64,
) -> Result<WidthEstimate> {
    let bx = subdifferential_box(objective, signal)?;
    if !bx.admissible {
        return Err(Error::invalid(format!(
            "subdifferential box is not admissible: {}",
            bx.notes.join("; ")
        )));
    }
    Ok(estimate_statistical_dimension(&bx, samples, seed))
}
