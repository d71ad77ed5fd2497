use serde::{Deserialize, Serialize};

use super::{param, FitResult};
use crate::electrostatics::{field_at_cavity, ElectrostaticParams, StarkCoefficients};
use crate::error::{Error, Result};

/// Measured dot shift versus reverse bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftDataset {
    /// (reverse bias V, shift meV)
    pub points: Vec<(f64, f64)>,
    pub weights: Option<Vec<f64>>,
}

impl ShiftDataset {
    pub fn new(points: Vec<(f64, f64)>, weights: Option<Vec<f64>>) -> Result<Self> {
        const OP: &str = "ShiftDataset";
        if points.len() < 2 {
            return Err(Error::domain(OP, "need at least 2 points"));
        }
        if points.iter().any(|(v, s)| !v.is_finite() || !s.is_finite()) {
            return Err(Error::domain(OP, "non-finite point"));
        }
        let mut vs: Vec<f64> = points.iter().map(|p| p.0).collect();
        vs.sort_by(f64::total_cmp);
        if vs.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::domain(OP, "voltages must be distinct"));
        }
        if let Some(w) = &weights {
            if w.len() != points.len() || w.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
                return Err(Error::domain(OP, "weights must be positive, one per point"));
            }
        }
        Ok(Self { points, weights })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StarkFit {
    pub result: FitResult,
    pub coefficients: StarkCoefficients,
}

/// Weighted linear least squares for (μ, α) in ΔE = μF − αF², with the
/// signed field F = −|F(V)| from the depletion model.
pub fn fit_stark_curve(data: &ShiftDataset, electro: &ElectrostaticParams) -> Result<StarkFit> {
    let mut rows = Vec::with_capacity(data.points.len());
    for (i, &(v, shift)) in data.points.iter().enumerate() {
        let f = -field_at_cavity(electro, v)?;
        let w = data.weights.as_ref().map_or(1.0, |w| w[i]);
        rows.push((f, shift, w));
    }
    let with_field = rows.iter().filter(|(f, _, _)| *f != 0.0).count();
    if with_field < 3 {
        return Err(Error::DegenerateFit(format!(
            "{with_field} points with nonzero field at the dot; need at least 3"
        )));
    }

    // columns: [F, −F²]
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(f, y, w) in &rows {
        let (c1, c2) = (f, -f * f);
        a11 += w * c1 * c1;
        a12 += w * c1 * c2;
        a22 += w * c2 * c2;
        b1 += w * c1 * y;
        b2 += w * c2 * y;
    }
    let det = a11 * a22 - a12 * a12;
    if !(det > 1e-12 * a11 * a22) {
        return Err(Error::DegenerateFit(
            "fields at the dot do not separate the linear and quadratic terms".into(),
        ));
    }
    let mu = (a22 * b1 - a12 * b2) / det;
    let alpha = (a11 * b2 - a12 * b1) / det;

    let rss: f64 = rows
        .iter()
        .map(|&(f, y, w)| {
            let r = mu * f - alpha * f * f - y;
            w * r * r
        })
        .sum();
    let dof = rows.len().saturating_sub(2);
    let (var_mu, var_alpha) = if dof > 0 {
        let s2 = rss / dof as f64;
        (Some(s2 * a22 / det), Some(s2 * a11 / det))
    } else {
        (None, None)
    };

    let result = FitResult {
        parameters: vec![
            param("mu", mu, "meV um/V", var_mu),
            param("alpha", alpha, "meV um^2/V^2", var_alpha),
        ],
        residual_norm: rss.sqrt(),
        converged: true,
        iterations: 1,
        gradient_norm: 0.0,
    };
    let max_field = rows.iter().map(|r| r.0.abs()).fold(0.0, f64::max);
    Ok(StarkFit {
        result,
        coefficients: StarkCoefficients::new(mu, alpha)?.with_fitted_range(max_field),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::electrostatics::stark_shift;

    fn synth(voltages: &[f64]) -> ShiftDataset {
        let p = ElectrostaticParams::reference();
        let c = StarkCoefficients::reference();
        let pts = voltages
            .iter()
            .map(|&v| (v, stark_shift(&c, -field_at_cavity(&p, v).unwrap())))
            .collect();
        ShiftDataset::new(pts, None).unwrap()
    }

    #[test]
    fn exact_recovery() {
        let vs: Vec<f64> = (0..=20).map(|i| 0.5 * i as f64).collect();
        let fit = fit_stark_curve(&synth(&vs), &ElectrostaticParams::reference()).unwrap();
        assert!((fit.coefficients.mu + 0.009).abs() < 1e-12);
        assert!((fit.coefficients.alpha + 0.015).abs() < 1e-12);
        assert!(fit.result.residual_norm < 1e-12);
    }

    #[test]
    fn below_onset_is_degenerate() {
        let d = synth(&[0.0, 1.0, 2.0, 3.0]);
        assert!(matches!(
            fit_stark_curve(&d, &ElectrostaticParams::reference()),
            Err(Error::DegenerateFit(_))
        ));
    }

    #[test]
    fn dataset_validation() {
        assert!(ShiftDataset::new(vec![(1.0, 0.0), (1.0, 0.1)], None).is_err());
        assert!(ShiftDataset::new(vec![(1.0, 0.0), (2.0, 0.1)], Some(vec![1.0])).is_err());
        assert!(ShiftDataset::new(vec![(1.0, 0.0), (2.0, f64::NAN)], None).is_err());
    }
}
