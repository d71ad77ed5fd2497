//! Calibration of the effective dot linewidth γ_⊥ and the screening factor
//! from measured static on/off ratios.

use super::lm::{self, LeastSquaresProblem, LmOptions};
use super::{param, FitResult};
use crate::electrostatics::ScreeningFactor;
use crate::error::{Error, Result};
use crate::switching::SwitchModel;
use crate::units;

/// Cooperativity giving a full-contrast on/off ratio `r`, from the
/// on-resonance dip (1 + C)⁻²: C = √r − 1.
pub fn cooperativity_from_ratio(r: f64) -> Result<f64> {
    if !(r >= 1.0) || !r.is_finite() {
        return Err(Error::domain(
            "fit_contrast",
            format!("on/off ratio must be >= 1, got {r}"),
        ));
    }
    Ok(r.sqrt() - 1.0)
}

/// γ_⊥ = g²/(C·κ) for the full-contrast ratio `r`. Infinite at r = 1.
pub fn gamma_from_ratio(r: f64, coupling: f64, kappa: f64) -> Result<f64> {
    let c = cooperativity_from_ratio(r)?;
    if c == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(coupling * coupling / (c * kappa))
}

fn logistic(y: f64) -> f64 {
    1.0 / (1.0 + (-y).exp())
}

struct ContrastProblem<'a> {
    model: &'a SwitchModel,
    targets: &'a [(f64, f64)],
    v_off: f64,
    probe: f64,
}

impl ContrastProblem<'_> {
    fn model_at(&self, x: &[f64]) -> SwitchModel {
        let mut m = self.model.clone();
        m.cqed.gamma = x[0].exp();
        m.electro.screening = ScreeningFactor::new(logistic(x[1])).unwrap_or(ScreeningFactor::NONE);
        m
    }
}

impl LeastSquaresProblem for ContrastProblem<'_> {
    fn residuals(&self, x: &[f64]) -> Result<Vec<f64>> {
        let m = self.model_at(x);
        self.targets
            .iter()
            .map(|&(v, r)| Ok(m.dc_on_off(v, self.v_off, self.probe)? - r))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContrastFit {
    pub result: FitResult,
    /// `model` with the calibrated γ_⊥ and screening factor installed.
    pub model: SwitchModel,
    /// Largest |model − target| ratio error.
    pub max_ratio_error: f64,
}

/// Solves for (γ_⊥, s) so that the model's static on/off ratios between
/// `v_off` and each target voltage match `targets` = [(V, ratio)] in least
/// squares. `model.cqed.gamma` and `model.electro.screening` are ignored
/// as inputs.
pub fn fit_contrast(
    targets: &[(f64, f64)],
    model: &SwitchModel,
    v_off: f64,
    probe: f64,
) -> Result<ContrastFit> {
    if targets.len() < 2 {
        return Err(Error::domain(
            "fit_contrast",
            "need at least 2 (V, ratio) targets",
        ));
    }
    for &(v, r) in targets {
        cooperativity_from_ratio(r)?;
        if !(v >= 0.0) {
            return Err(Error::domain(
                "fit_contrast",
                format!("bias must be >= 0, got {v}"),
            ));
        }
    }
    let r_max = targets.iter().map(|t| t.1).fold(1.0, f64::max);
    let g0 = model.coupling_table.at(v_off);
    let gamma0 = gamma_from_ratio(r_max, g0, model.cqed.kappa)?;
    let gamma0 = if gamma0.is_finite() {
        gamma0
    } else {
        1e3 * model.cqed.kappa
    };

    let problem = ContrastProblem {
        model,
        targets,
        v_off,
        probe,
    };
    let report = lm::minimize(&problem, &[gamma0.ln(), 0.0], &LmOptions::default())?;
    let calibrated = problem.model_at(&report.x);
    let variances = report.variances();

    let gamma = calibrated.cqed.gamma;
    let s = calibrated.electro.screening.value();
    let residuals = problem.residuals(&report.x)?;
    let max_ratio_error = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let result = FitResult {
        parameters: vec![
            param(
                "gamma_over_2pi",
                units::ordinary(gamma),
                "GHz",
                variances
                    .as_ref()
                    .map(|v| units::ordinary(gamma).powi(2) * v[0]),
            ),
            param(
                "screening",
                s,
                "1",
                variances.as_ref().map(|v| (s * (1.0 - s)).powi(2) * v[1]),
            ),
        ],
        residual_norm: report.residual_norm,
        converged: report.converged(),
        iterations: report.iterations,
        gradient_norm: report.gradient_norm,
    };
    Ok(ContrastFit {
        result,
        model: calibrated,
        max_ratio_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::ordinary;

    #[test]
    fn closed_form_single_target() {
        let c = cooperativity_from_ratio(1.5).unwrap();
        assert!((c - 0.224_744_871).abs() < 1e-9);
        let g = gamma_from_ratio(1.5, units::angular(20.0), units::angular(40.0)).unwrap();
        assert!((ordinary(g) - 44.49).abs() < 0.01);
        assert_eq!(cooperativity_from_ratio(1.0).unwrap(), 0.0);
        assert!(gamma_from_ratio(1.0, 1.0, 1.0).unwrap().is_infinite());
        assert!(cooperativity_from_ratio(0.9).is_err());
    }
}
