//! Equality-constrained recovery solver.
//!
//! All three programs minimize a separable convex penalty subject to
//! `A x = y`. The solver alternates the penalty's proximal map with the
//! projection onto the constraint set (cached Gram factorization), plus a
//! scaled dual update, until primal and dual residuals pass the tolerance
//! test. The returned iterate is the projected one, so a converged result
//! is feasible to factorization accuracy (far below `10 eps_abs sqrt(m)`).

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ProblemInstance;
use crate::prox;

/// Which penalty the program minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ObjectiveKind {
    /// `|x|_1`
    #[serde(rename = "l1")]
    L1,
    /// `|x|_1 + beta |x - w|_1`
    #[serde(rename = "l1l1")]
    L1L1,
    /// `|x|_1 + (beta/2) |x - w|_2^2`
    #[serde(rename = "l1l2")]
    L1L2,
}

impl ObjectiveKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ObjectiveKind::L1 => "l1",
            ObjectiveKind::L1L1 => "l1l1",
            ObjectiveKind::L1L2 => "l1l2",
        }
    }
}

/// A penalty instance: kind, similarity weight, and the prior vector for
/// the side-information kinds.
#[derive(Debug, Clone)]
pub struct Objective {
    kind: ObjectiveKind,
    beta: f64,
    w: Option<DVector<f64>>,
}

impl Objective {
    pub fn l1() -> Self {
        Self {
            kind: ObjectiveKind::L1,
            beta: 1.0,
            w: None,
        }
    }

    pub fn l1l1(w: DVector<f64>, beta: f64) -> Result<Self> {
        if beta <= 0.0 {
            return Err(Error::invalid("beta must be positive"));
        }
        Ok(Self {
            kind: ObjectiveKind::L1L1,
            beta,
            w: Some(w),
        })
    }

    pub fn l1l2(w: DVector<f64>, beta: f64) -> Result<Self> {
        if beta <= 0.0 {
            return Err(Error::invalid("beta must be positive"));
        }
        Ok(Self {
            kind: ObjectiveKind::L1L2,
            beta,
            w: Some(w),
        })
    }

    /// Builds the objective of the given kind for an instance's prior.
    pub fn for_kind(kind: ObjectiveKind, w: &DVector<f64>, beta: f64) -> Result<Self> {
        match kind {
            ObjectiveKind::L1 => Ok(Self::l1()),
            ObjectiveKind::L1L1 => Self::l1l1(w.clone(), beta),
            ObjectiveKind::L1L2 => Self::l1l2(w.clone(), beta),
        }
    }

    pub fn kind(&self) -> ObjectiveKind {
        self.kind
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn side_info(&self) -> Option<&DVector<f64>> {
        self.w.as_ref()
    }

    pub fn check_dims(&self, n: usize) -> Result<()> {
        match (&self.w, self.kind) {
            (None, ObjectiveKind::L1) => Ok(()),
            (Some(w), _) if w.len() == n => Ok(()),
            (Some(w), _) => Err(Error::LengthMismatch {
                expected: n,
                got: w.len(),
            }),
            (None, _) => Err(Error::invalid(
                "side-information objective without a prior vector",
            )),
        }
    }

    /// Penalty value at `x`.
    pub fn value(&self, x: &DVector<f64>) -> f64 {
        let l1: f64 = x.iter().map(|v| v.abs()).sum();
        match self.kind {
            ObjectiveKind::L1 => l1,
            ObjectiveKind::L1L1 => {
                let w = self.w.as_ref().expect("l1l1 objective has a prior");
                l1 + self.beta
                    * x.iter()
                        .zip(w.iter())
                        .map(|(a, b)| (a - b).abs())
                        .sum::<f64>()
            }
            ObjectiveKind::L1L2 => {
                let w = self.w.as_ref().expect("l1l2 objective has a prior");
                l1 + 0.5
                    * self.beta
                    * x.iter()
                        .zip(w.iter())
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
            }
        }
    }

    /// Proximal map of the penalty with step `t`.
    pub fn prox(&self, v: &DVector<f64>, t: f64) -> DVector<f64> {
        match self.kind {
            ObjectiveKind::L1 => prox::prox_l1(v, t),
            ObjectiveKind::L1L1 => prox::prox_l1l1(v, self.w.as_ref().unwrap(), self.beta, t),
            ObjectiveKind::L1L2 => prox::prox_l1l2(v, self.w.as_ref().unwrap(), self.beta, t),
        }
    }
}

/// Splitting-iteration knobs.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Splitting penalty; the prox step is its inverse.
    pub rho: f64,
    pub max_iter: usize,
    pub eps_abs: f64,
    pub eps_rel: f64,
    /// Residual-balancing penalty adaptation. Off by default so repeated
    /// runs traverse identical iterates.
    pub adaptive_rho: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rho: 1.0,
            max_iter: 20_000,
            eps_abs: 1e-8,
            eps_rel: 1e-7,
            adaptive_rho: false,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        if self.rho <= 0.0 || self.eps_abs <= 0.0 || self.eps_rel <= 0.0 || self.max_iter == 0 {
            return Err(Error::invalid(
                "solver configuration values must be positive",
            ));
        }
        Ok(())
    }
}

/// Solver output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub x_hat: Vec<f64>,
    pub objective_value: f64,
    /// `|A x_hat - y|_2 / max(1, |y|_2)`.
    pub feasibility_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `|x_hat - x*|_2 / |x*|_2` when the true signal is known.
    pub relative_error: f64,
}

/// Projection onto `{x : A x = y}` with a cached factorization of `A A^T`.
pub struct AffineProjector {
    a: DMatrix<f64>,
    y: DVector<f64>,
    chol: Cholesky<f64, Dyn>,
}

impl AffineProjector {
    /// Factorizes `A A^T`. Fails with [`Error::SingularEnsemble`] when the
    /// Gram matrix is not positive definite (rank-deficient rows).
    pub fn new(a: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        if a.nrows() != y.len() {
            return Err(Error::LengthMismatch {
                expected: a.nrows(),
                got: y.len(),
            });
        }
        let gram = &a * a.transpose();
        let chol = Cholesky::new(gram).ok_or(Error::SingularEnsemble)?;
        Ok(Self { a, y, chol })
    }

    /// `x - A^T (A A^T)^{-1} (A x - y)`: the Euclidean projection of `x`
    /// onto the solution set.
    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        let residual = &self.a * x - &self.y;
        x - self.a.transpose() * self.chol.solve(&residual)
    }

    /// The minimum-norm solution `A^T (A A^T)^{-1} y`.
    pub fn min_norm_point(&self) -> DVector<f64> {
        self.a.transpose() * self.chol.solve(&self.y)
    }

    /// Projection of `g` onto the null space of `A`.
    pub fn project_nullspace(&self, g: &DVector<f64>) -> DVector<f64> {
        let ag = &self.a * g;
        g - self.a.transpose() * self.chol.solve(&ag)
    }
}

/// Solves `min penalty(x) s.t. A x = y`.
///
/// `x_star`, when known, is used to fill `relative_error`. On
/// non-convergence the last iterate is returned with `converged = false`.
pub fn solve_system(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    x_star: Option<&DVector<f64>>,
    objective: &Objective,
    config: &SolverConfig,
) -> Result<RecoveryResult> {
    config.validate()?;
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 {
        return Err(Error::invalid("measurement matrix must be non-empty"));
    }
    objective.check_dims(n)?;

    let projector = AffineProjector::new(a.clone(), y.clone())?;
    let sqrt_n = (n as f64).sqrt();

    let mut rho = config.rho;
    let mut t = 1.0 / rho;
    let mut z = projector.min_norm_point();
    let mut u = DVector::<f64>::zeros(n);
    let mut x;
    let mut iterations = 0;
    let mut converged = false;

    for k in 1..=config.max_iter {
        x = objective.prox(&(&z - &u), t);
        let z_old = z;
        z = projector.project(&(&x + &u));
        u += &x - &z;
        iterations = k;

        let primal = (&x - &z).norm();
        let dual = rho * (&z - &z_old).norm();
        let eps_primal = sqrt_n * config.eps_abs + config.eps_rel * x.norm().max(z.norm());
        let eps_dual = sqrt_n * config.eps_abs + config.eps_rel * rho * u.norm();
        if primal <= eps_primal && dual <= eps_dual {
            converged = true;
            break;
        }

        if config.adaptive_rho && k % 50 == 0 {
            if primal > 10.0 * dual {
                rho *= 2.0;
                u /= 2.0;
            } else if dual > 10.0 * primal {
                rho /= 2.0;
                u *= 2.0;
            }
            t = 1.0 / rho;
        }
    }

    // report the projected (feasible) iterate
    let x_hat = z;
    let feasibility_residual = (a * &x_hat - y).norm() / y.norm().max(1.0);
    let relative_error = match x_star {
        Some(xs) => {
            let scale = xs.norm();
            if scale > 0.0 {
                (&x_hat - xs).norm() / scale
            } else if x_hat.norm() == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        }
        None => f64::NAN,
    };
    Ok(RecoveryResult {
        objective_value: objective.value(&x_hat),
        x_hat: x_hat.as_slice().to_vec(),
        feasibility_residual,
        iterations,
        converged,
        relative_error,
    })
}

/// Solves an assembled instance; `relative_error` compares against the
/// instance's signal.
pub fn solve(
    instance: &ProblemInstance,
    objective: &Objective,
    config: &SolverConfig,
) -> Result<RecoveryResult> {
    let a = instance.measurement_matrix();
    solve_system(
        &a,
        instance.measurements(),
        Some(instance.signal().values()),
        objective,
        config,
    )
}
