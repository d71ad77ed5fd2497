//! Damped Gauss-Newton (Levenberg-Marquardt) least-squares engine.
//!
//! Minimizes ½‖r(x)‖² with Marquardt's diagonal scaling,
//! (JᵀJ + λ·diag(JᵀJ))·δ = −Jᵀr, multiplying λ by a fixed factor on every
//! rejected step and dividing by it on every accepted one.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub trait LeastSquaresProblem {
    fn residuals(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// Jacobian ∂r_i/∂x_j. Defaults to central differences.
    fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        central_difference_jacobian(|p| self.residuals(p), x)
    }
}

/// Central-difference Jacobian with step 1e-6·max(1, |x_j|).
pub fn central_difference_jacobian<F>(f: F, x: &[f64]) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let m = f(x)?.len();
    let mut jac = DMatrix::zeros(m, x.len());
    let mut p = x.to_vec();
    for j in 0..x.len() {
        let h = 1e-6 * x[j].abs().max(1.0);
        p[j] = x[j] + h;
        let up = f(&p)?;
        p[j] = x[j] - h;
        let down = f(&p)?;
        p[j] = x[j];
        for i in 0..m {
            jac[(i, j)] = (up[i] - down[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Relative decrease of the cost on an accepted step.
    pub ftol: f64,
    /// Infinity norm of Jᵀr.
    pub gtol: f64,
    pub initial_damping: f64,
    pub damping_factor: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            ftol: 1e-9,
            gtol: 1e-8,
            initial_damping: 1e-3,
            damping_factor: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Gradient,
    CostChange,
    ZeroResidual,
    MaxIterations,
    /// No damping level produced a decrease.
    Stalled,
}

#[derive(Debug, Clone)]
pub struct LmReport {
    pub x: Vec<f64>,
    /// ‖r‖₂ at `x`.
    pub residual_norm: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub termination: Termination,
    /// diag((JᵀJ)⁻¹) at `x`, when invertible.
    pub normal_inverse_diag: Option<Vec<f64>>,
    pub residual_count: usize,
}

impl LmReport {
    pub fn converged(&self) -> bool {
        matches!(
            self.termination,
            Termination::Gradient | Termination::CostChange | Termination::ZeroResidual
        )
    }

    /// Parameter variances σ²·diag((JᵀJ)⁻¹) with σ² = ‖r‖²/(m − n).
    pub fn variances(&self) -> Option<Vec<f64>> {
        let dof = self
            .residual_count
            .checked_sub(self.x.len())
            .filter(|&d| d > 0)?;
        let sigma2 = self.residual_norm.powi(2) / dof as f64;
        self.normal_inverse_diag
            .as_ref()
            .map(|d| d.iter().map(|v| v * sigma2).collect())
    }
}

fn cost_of(r: &[f64]) -> f64 {
    0.5 * r.iter().map(|v| v * v).sum::<f64>()
}

fn normal_inverse_diag(jac: &DMatrix<f64>) -> Option<Vec<f64>> {
    let jtj = jac.transpose() * jac;
    let inv = jtj.try_inverse()?;
    let diag: Vec<f64> = inv.diagonal().iter().copied().collect();
    diag.iter()
        .all(|v| v.is_finite() && *v >= 0.0)
        .then_some(diag)
}

pub fn minimize<P: LeastSquaresProblem + ?Sized>(
    problem: &P,
    x0: &[f64],
    opts: &LmOptions,
) -> Result<LmReport> {
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("minimize", "initial guess must be finite"));
    }
    let mut x = x0.to_vec();
    let mut r = problem.residuals(&x)?;
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain(
            "minimize",
            "residuals at the initial guess are not finite",
        ));
    }
    if r.len() < x.len() {
        return Err(Error::DegenerateFit(format!(
            "{} residuals for {} parameters",
            r.len(),
            x.len()
        )));
    }
    let mut cost = cost_of(&r);
    let mut lambda = opts.initial_damping;
    let mut iterations = 0;
    let mut jac = problem.jacobian(&x)?;
    let mut gradient_norm;

    let termination = loop {
        let rv = DVector::from_column_slice(&r);
        let grad = jac.transpose() * &rv;
        gradient_norm = grad.amax();
        if cost == 0.0 {
            break Termination::ZeroResidual;
        }
        if gradient_norm < opts.gtol {
            break Termination::Gradient;
        }
        if iterations >= opts.max_iterations {
            break Termination::MaxIterations;
        }
        iterations += 1;

        let jtj = jac.transpose() * &jac;
        let scale = jtj.diagonal().amax().max(f64::MIN_POSITIVE);
        let accepted = loop {
            if lambda > 1e16 {
                break None;
            }
            let mut a = jtj.clone();
            for j in 0..x.len() {
                a[(j, j)] += lambda * jtj[(j, j)].max(1e-12 * scale);
            }
            let step = match a.clone().cholesky() {
                Some(ch) => Some(ch.solve(&(-&grad))),
                None => a.lu().solve(&(-&grad)),
            };
            let Some(step) = step else {
                lambda *= opts.damping_factor;
                continue;
            };
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let trial_r = match problem.residuals(&trial) {
                Ok(v) if v.iter().all(|e| e.is_finite()) => v,
                _ => {
                    lambda *= opts.damping_factor;
                    continue;
                }
            };
            let trial_cost = cost_of(&trial_r);
            if trial_cost < cost {
                break Some((trial, trial_r, trial_cost));
            }
            lambda *= opts.damping_factor;
        };
        let Some((trial, trial_r, trial_cost)) = accepted else {
            break Termination::Stalled;
        };
        let relative = (cost - trial_cost) / cost;
        x = trial;
        r = trial_r;
        cost = trial_cost;
        lambda = (lambda / opts.damping_factor).max(1e-15);
        jac = problem.jacobian(&x)?;
        if relative < opts.ftol {
            let rv = DVector::from_column_slice(&r);
            gradient_norm = (jac.transpose() * rv).amax();
            break Termination::CostChange;
        }
    };

    Ok(LmReport {
        residual_norm: (2.0 * cost).sqrt(),
        gradient_norm,
        iterations,
        termination,
        normal_inverse_diag: normal_inverse_diag(&jac),
        residual_count: r.len(),
        x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Rosenbrock;

    impl LeastSquaresProblem for Rosenbrock {
        fn residuals(&self, x: &[f64]) -> Result<Vec<f64>> {
            Ok(vec![10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]])
        }
    }

    #[test]
    fn rosenbrock_converges() {
        let rep = minimize(&Rosenbrock, &[-1.2, 1.0], &LmOptions::default()).unwrap();
        assert!(rep.converged(), "{:?}", rep.termination);
        assert!((rep.x[0] - 1.0).abs() < 1e-6 && (rep.x[1] - 1.0).abs() < 1e-6);
    }

    struct Line {
        xs: Vec<f64>,
        ys: Vec<f64>,
    }

    impl LeastSquaresProblem for Line {
        fn residuals(&self, p: &[f64]) -> Result<Vec<f64>> {
            Ok(self
                .xs
                .iter()
                .zip(&self.ys)
                .map(|(x, y)| p[0] + p[1] * x - y)
                .collect())
        }
    }

    #[test]
    fn zero_residual_at_truth_stops_immediately() {
        let xs: Vec<f64> = (0..5).map(f64::from).collect();
        let ys = xs.iter().map(|x| 2.0 + 0.5 * x).collect();
        let rep = minimize(&Line { xs, ys }, &[2.0, 0.5], &LmOptions::default()).unwrap();
        assert_eq!(rep.iterations, 0);
        assert_eq!(rep.termination, Termination::ZeroResidual);
    }

    #[test]
    fn underdetermined_is_degenerate() {
        let p = Line {
            xs: vec![1.0],
            ys: vec![1.0],
        };
        assert!(matches!(
            minimize(&p, &[0.0, 0.0], &LmOptions::default()),
            Err(Error::DegenerateFit(_))
        ));
    }

    #[test]
    fn finite_difference_jacobian_of_linear_map() {
        let p = Line {
            xs: vec![0.0, 1.0, 2.0],
            ys: vec![0.0; 3],
        };
        let j = p.jacobian(&[0.3, -0.2]).unwrap();
        for i in 0..3 {
            assert!((j[(i, 0)] - 1.0).abs() < 1e-9);
            assert!((j[(i, 1)] - i as f64).abs() < 1e-9);
        }
    }
}
