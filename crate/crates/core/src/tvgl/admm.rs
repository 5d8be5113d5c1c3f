// SPDX-License-Identifier: MIT OR Apache-2.0

//! ADMM for
//!
//! ```text
//! min  sum_t [ -log det P_t + tr(S_t P_t) + lambda * ||P_t||_od,1 ]
//!      + beta * sum_{t>=1} ||P_t - P_{t-1}||_F^2
//! ```
//!
//! Every `P_t` has one consensus copy for the lasso term and one copy per
//! neighbouring pair for the temporal term. The `P` step is the proximal
//! operator of `-log det` (closed form through an eigendecomposition, so
//! iterates are always positive definite); the copy steps are an
//! off-diagonal soft threshold and a closed-form pairwise shrinkage.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{PrecisionSequence, TvglConfig};
use crate::error::TvglError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TvglSolution {
    pub precision: PrecisionSequence,
    pub converged: bool,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Objective evaluated at the `P` iterate after every iteration.
    pub objective_trace: Vec<f64>,
}

fn soft_threshold_offdiag(m: &DMatrix<f64>, kappa: f64) -> DMatrix<f64> {
    let mut out = m.clone();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if i != j {
                let v = m[(i, j)];
                out[(i, j)] = v.signum() * (v.abs() - kappa).max(0.0);
            }
        }
    }
    out
}

/// argmin_P  -log det P + tr(S P) + (eta/2) ||P - A||_F^2.
fn logdet_prox(s: &DMatrix<f64>, a: &DMatrix<f64>, eta: f64) -> DMatrix<f64> {
    let mut m = a * eta - s;
    m = (&m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(m);
    let q = &eig.eigenvectors;
    let diag = eig
        .eigenvalues
        .map(|l| (l + (l * l + 4.0 * eta).sqrt()) / (2.0 * eta));
    let p = q * DMatrix::from_diagonal(&diag) * q.transpose();
    (&p + p.transpose()) * 0.5
}

fn log_det_spd(p: &DMatrix<f64>) -> f64 {
    match p.clone().cholesky() {
        Some(c) => 2.0 * c.l().diagonal().iter().map(|v| v.ln()).sum::<f64>(),
        None => f64::NEG_INFINITY,
    }
}

/// Objective value of a candidate sequence.
pub fn objective(covs: &[DMatrix<f64>], thetas: &[DMatrix<f64>], lambda: f64, beta: f64) -> f64 {
    let mut total = 0.0;
    for (s, p) in covs.iter().zip(thetas) {
        let l1: f64 = p
            .iter()
            .enumerate()
            .filter(|(k, _)| k % p.nrows() != k / p.nrows())
            .map(|(_, v)| v.abs())
            .sum();
        total += -log_det_spd(p) + (s * p).trace() + lambda * l1;
    }
    for w in thetas.windows(2) {
        total += beta * (&w[1] - &w[0]).norm_squared();
    }
    total
}

fn check_inputs(covs: &[DMatrix<f64>]) -> Result<usize, TvglError> {
    let d = covs.first().ok_or(TvglError::Empty)?.nrows();
    for (index, s) in covs.iter().enumerate() {
        if s.nrows() != d || s.ncols() != d {
            return Err(TvglError::ShapeMismatch {
                index,
                rows: s.nrows(),
                cols: s.ncols(),
                d,
            });
        }
        let asymmetry = (s - s.transpose()).amax();
        if !(asymmetry <= 1e-8 * s.amax().max(1.0)) {
            return Err(TvglError::NonSymmetricInput { index, asymmetry });
        }
    }
    Ok(d)
}

/// Estimates one precision matrix per covariance slice.
///
/// Hitting `max_iters` is not an error: the last iterate is returned with
/// `converged = false` and callers decide whether that is acceptable.
pub fn tvgl_solve(covs: &[DMatrix<f64>], config: &TvglConfig) -> Result<TvglSolution, TvglError> {
    config.validate()?;
    let d = check_inputs(covs)?;
    let n = covs.len();
    let rho = config.admm_rho;
    let beta = config.beta;
    let eye = DMatrix::<f64>::identity(d, d);
    let zero = DMatrix::<f64>::zeros(d, d);

    let mut theta = vec![eye.clone(); n];
    let mut z0 = theta.clone();
    let mut u0 = vec![zero.clone(); n];
    // pair p links slice p (left copy) and slice p+1 (right copy)
    let pairs = n.saturating_sub(1);
    let mut z_left = vec![eye.clone(); pairs];
    let mut z_right = vec![eye.clone(); pairs];
    let mut u_left = vec![zero.clone(); pairs];
    let mut u_right = vec![zero.clone(); pairs];

    let copies = (n + 2 * pairs) as f64;
    let entries = copies * (d * d) as f64;
    let mut trace = Vec::new();
    let mut primal = f64::INFINITY;
    let mut dual = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;

    for _ in 0..config.max_iters {
        iterations += 1;
        for t in 0..n {
            let mut target = &z0[t] - &u0[t];
            let mut m = 1.0;
            if t + 1 < n {
                target += &z_left[t] - &u_left[t];
                m += 1.0;
            }
            if t > 0 {
                target += &z_right[t - 1] - &u_right[t - 1];
                m += 1.0;
            }
            target /= m;
            theta[t] = logdet_prox(&covs[t], &target, m * rho);
        }

        let mut dual_sq = 0.0;
        for t in 0..n {
            let next = soft_threshold_offdiag(&(&theta[t] + &u0[t]), config.lambda / rho);
            dual_sq += (&next - &z0[t]).norm_squared();
            z0[t] = next;
        }
        // beta ||b' - a'||^2 + rho/2 ||a' - a||^2 + rho/2 ||b' - b||^2
        // keeps the pair sum and shrinks the difference by rho / (4 beta + rho)
        let shrink = rho / (4.0 * beta + rho);
        for p in 0..pairs {
            let a = &theta[p] + &u_left[p];
            let b = &theta[p + 1] + &u_right[p];
            let half_sum = (&a + &b) * 0.5;
            let half_diff = (&b - &a) * (0.5 * shrink);
            let left = &half_sum - &half_diff;
            let right = &half_sum + &half_diff;
            dual_sq += (&left - &z_left[p]).norm_squared() + (&right - &z_right[p]).norm_squared();
            z_left[p] = left;
            z_right[p] = right;
        }

        let mut primal_sq = 0.0;
        for t in 0..n {
            let r = &theta[t] - &z0[t];
            primal_sq += r.norm_squared();
            u0[t] += r;
        }
        for p in 0..pairs {
            let rl = &theta[p] - &z_left[p];
            let rr = &theta[p + 1] - &z_right[p];
            primal_sq += rl.norm_squared() + rr.norm_squared();
            u_left[p] += rl;
            u_right[p] += rr;
        }

        primal = (primal_sq / entries).sqrt();
        dual = rho * (dual_sq / entries).sqrt();
        trace.push(objective(covs, &theta, config.lambda, beta));
        if primal < config.primal_tol && dual < config.dual_tol {
            converged = true;
            break;
        }
    }

    if !converged {
        log::warn!(
            "tvgl: ADMM stopped after {iterations} iterations (primal {primal:.3e}, dual {dual:.3e})"
        );
    }

    Ok(TvglSolution {
        precision: PrecisionSequence::unit_slices(theta),
        converged,
        iterations,
        primal_residual: primal,
        dual_residual: dual,
        objective_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(lambda: f64, beta: f64) -> TvglConfig {
        TvglConfig {
            lambda,
            beta,
            max_iters: 5000,
            primal_tol: 1e-9,
            dual_tol: 1e-9,
            ..TvglConfig::default()
        }
    }

    #[test]
    fn identity_covariance_unpenalised() {
        let s = DMatrix::<f64>::identity(3, 3);
        let sol = tvgl_solve(&[s], &cfg(0.0, 0.0)).unwrap();
        assert!(sol.converged);
        assert!((&sol.precision.matrices[0] - DMatrix::identity(3, 3)).amax() < 1e-8);
    }

    #[test]
    fn unpenalised_recovers_inverse() {
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 0.8, 0.8, 1.0]);
        let sol = tvgl_solve(std::slice::from_ref(&s), &cfg(0.0, 0.0)).unwrap();
        let inv = s.try_inverse().unwrap();
        assert!((&sol.precision.matrices[0] - inv).amax() < 1e-6);
    }

    #[test]
    fn strong_coupling_equalises_neighbours() {
        let s = DMatrix::from_row_slice(3, 3, &[1.0, 0.3, 0.0, 0.3, 1.0, 0.2, 0.0, 0.2, 1.0]);
        let mut c = cfg(0.05, 1e5);
        c.admm_rho = 10.0;
        let sol = tvgl_solve(&[s.clone(), s], &c).unwrap();
        let m = &sol.precision.matrices;
        assert!((&m[0] - &m[1]).amax() < 1e-4);
    }

    #[test]
    fn coupling_pulls_different_slices_together() {
        let s1 = DMatrix::from_row_slice(2, 2, &[1.0, 0.7, 0.7, 1.0]);
        let s2 = DMatrix::from_row_slice(2, 2, &[1.0, -0.7, -0.7, 1.0]);
        let loose = tvgl_solve(&[s1.clone(), s2.clone()], &cfg(0.0, 0.0)).unwrap();
        let tight = tvgl_solve(&[s1, s2], &cfg(0.0, 50.0)).unwrap();
        let gap = |s: &TvglSolution| (&s.precision.matrices[0] - &s.precision.matrices[1]).norm();
        assert!(gap(&tight) < 0.2 * gap(&loose));
    }

    #[test]
    fn rejects_asymmetric_and_mismatched_input() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.1, 1.0]);
        assert!(matches!(
            tvgl_solve(&[bad], &cfg(0.1, 1.0)),
            Err(TvglError::NonSymmetricInput { index: 0, .. })
        ));
        let a = DMatrix::<f64>::identity(2, 2);
        let b = DMatrix::<f64>::identity(3, 3);
        assert!(matches!(
            tvgl_solve(&[a, b], &cfg(0.1, 1.0)),
            Err(TvglError::ShapeMismatch { index: 1, .. })
        ));
        assert_eq!(tvgl_solve(&[], &cfg(0.1, 1.0)).unwrap_err(), TvglError::Empty);
    }

    #[test]
    fn iteration_cap_reports_not_converged() {
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 0.6, 0.6, 1.0]);
        let mut c = cfg(0.1, 1.0);
        c.max_iters = 2;
        let sol = tvgl_solve(&[s.clone(), s], &c).unwrap();
        assert!(!sol.converged);
        assert_eq!(sol.iterations, 2);
        assert_eq!(sol.objective_trace.len(), 2);
    }

    #[test]
    fn prox_is_positive_definite_even_for_indefinite_targets() {
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let a = DMatrix::from_row_slice(2, 2, &[-5.0, 3.0, 3.0, -1.0]);
        let p = logdet_prox(&s, &a, 2.0);
        assert!(SymmetricEigen::new(p).eigenvalues.min() > 0.0);
    }
}
