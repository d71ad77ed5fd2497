use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use super::lm::{self, LeastSquaresProblem, LmOptions};
use super::{param, FitResult};
use crate::cqed::{reflectivity_at, reflectivity_gradient, CqedParams, Spectrum};
use crate::error::{Error, Result};
use crate::units;

/// Parameters of the reflectivity model that can be freed in a fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpectrumParam {
    CavityFreq,
    DotFreq,
    Coupling,
    Kappa,
    Gamma,
    Amplitude,
    Background,
}

impl SpectrumParam {
    pub const ALL: [SpectrumParam; 7] = [
        SpectrumParam::CavityFreq,
        SpectrumParam::DotFreq,
        SpectrumParam::Coupling,
        SpectrumParam::Kappa,
        SpectrumParam::Gamma,
        SpectrumParam::Amplitude,
        SpectrumParam::Background,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SpectrumParam::CavityFreq => "omega_c",
            SpectrumParam::DotFreq => "omega_d",
            SpectrumParam::Coupling => "g",
            SpectrumParam::Kappa => "kappa",
            SpectrumParam::Gamma => "gamma",
            SpectrumParam::Amplitude => "amplitude",
            SpectrumParam::Background => "background",
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    /// Rates are fitted in log space to keep them positive.
    fn is_log(self) -> bool {
        matches!(
            self,
            SpectrumParam::Coupling | SpectrumParam::Kappa | SpectrumParam::Gamma
        )
    }

    fn is_frequency(self) -> bool {
        !matches!(self, SpectrumParam::Amplitude | SpectrumParam::Background)
    }

    fn get(self, p: &CqedParams) -> f64 {
        match self {
            SpectrumParam::CavityFreq => p.cavity_freq,
            SpectrumParam::DotFreq => p.dot_freq,
            SpectrumParam::Coupling => p.coupling,
            SpectrumParam::Kappa => p.kappa,
            SpectrumParam::Gamma => p.gamma,
            SpectrumParam::Amplitude => p.amplitude,
            SpectrumParam::Background => p.background,
        }
    }

    fn set(self, p: &mut CqedParams, v: f64) {
        match self {
            SpectrumParam::CavityFreq => p.cavity_freq = v,
            SpectrumParam::DotFreq => p.dot_freq = v,
            SpectrumParam::Coupling => p.coupling = v,
            SpectrumParam::Kappa => p.kappa = v,
            SpectrumParam::Gamma => p.gamma = v,
            SpectrumParam::Amplitude => p.amplitude = v,
            SpectrumParam::Background => p.background = v,
        }
    }
}

impl fmt::Display for SpectrumParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SpectrumParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "omega_c" | "wc" | "cavity" => SpectrumParam::CavityFreq,
            "omega_d" | "wd" | "dot" => SpectrumParam::DotFreq,
            "g" | "coupling" => SpectrumParam::Coupling,
            "kappa" => SpectrumParam::Kappa,
            "gamma" | "gamma_perp" => SpectrumParam::Gamma,
            "amplitude" | "a" => SpectrumParam::Amplitude,
            "background" | "b" => SpectrumParam::Background,
            other => {
                return Err(Error::config(
                    "free",
                    format!("unknown spectrum parameter `{other}`"),
                ))
            }
        })
    }
}

/// Residuals of the reflectivity model against a measured spectrum, over
/// the free parameters in fit coordinates (log for rates).
#[derive(Debug, Clone)]
pub struct SpectrumProblem<'a> {
    pub spectrum: &'a Spectrum,
    pub base: CqedParams,
    pub free: Vec<SpectrumParam>,
}

impl<'a> SpectrumProblem<'a> {
    pub fn new(spectrum: &'a Spectrum, base: CqedParams, free: &[SpectrumParam]) -> Self {
        let mut free = free.to_vec();
        free.sort();
        free.dedup();
        Self {
            spectrum,
            base,
            free,
        }
    }

    pub fn encode(&self, p: &CqedParams) -> Result<Vec<f64>> {
        self.free
            .iter()
            .map(|&k| {
                let v = k.get(p);
                if k.is_log() {
                    if !(v > 0.0) {
                        return Err(Error::domain(
                            "fit_spectrum",
                            format!("free rate `{k}` must start > 0"),
                        ));
                    }
                    Ok(v.ln())
                } else {
                    Ok(v)
                }
            })
            .collect()
    }

    pub fn decode(&self, x: &[f64]) -> CqedParams {
        let mut p = self.base;
        for (&k, &v) in self.free.iter().zip(x) {
            k.set(&mut p, if k.is_log() { v.exp() } else { v });
        }
        p
    }
}

impl LeastSquaresProblem for SpectrumProblem<'_> {
    fn residuals(&self, x: &[f64]) -> Result<Vec<f64>> {
        let p = self.decode(x);
        Ok(self
            .spectrum
            .iter()
            .map(|(w, y)| reflectivity_at(&p, w) - y)
            .collect())
    }

    fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let p = self.decode(x);
        let mut jac = DMatrix::zeros(self.spectrum.len(), self.free.len());
        for (i, &w) in self.spectrum.detunings.iter().enumerate() {
            let grad = reflectivity_gradient(&p, w);
            for (j, &k) in self.free.iter().enumerate() {
                let chain = if k.is_log() { k.get(&p) } else { 1.0 };
                jac[(i, j)] = grad[k.index()] * chain;
            }
        }
        Ok(jac)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumFit {
    pub result: FitResult,
    pub params: CqedParams,
}

/// Least-squares fit of the reflectivity model to `spectrum`, varying only
/// the parameters in `free` from the starting point `initial`.
///
/// Frequencies and rates are reported as ordinary GHz (ω/2π).
/// Non-convergence is reported through `converged`, not as an error.
pub fn fit_spectrum(
    spectrum: &Spectrum,
    initial: &CqedParams,
    free: &[SpectrumParam],
) -> Result<SpectrumFit> {
    if spectrum.detunings.len() != spectrum.intensities.len() || spectrum.is_empty() {
        return Err(Error::domain("fit_spectrum", "empty or ragged spectrum"));
    }
    if spectrum
        .iter()
        .any(|(w, y)| !w.is_finite() || !y.is_finite())
    {
        return Err(Error::domain(
            "fit_spectrum",
            "spectrum contains NaN or infinite values",
        ));
    }
    if free.is_empty() {
        return Err(Error::domain("fit_spectrum", "no free parameters"));
    }
    initial.validate()?;
    let problem = SpectrumProblem::new(spectrum, *initial, free);
    let x0 = problem.encode(initial)?;
    let report = lm::minimize(&problem, &x0, &LmOptions::default())?;
    let fitted = problem.decode(&report.x);
    let variances = report.variances();

    let parameters = problem
        .free
        .iter()
        .enumerate()
        .map(|(j, &k)| {
            let v = k.get(&fitted);
            // log-space variance → linear: var(p) ≈ p²·var(ln p)
            let var = variances.as_ref().map(|vars| {
                let lin = if k.is_log() { v * v * vars[j] } else { vars[j] };
                if k.is_frequency() {
                    lin / (2.0 * std::f64::consts::PI).powi(2)
                } else {
                    lin
                }
            });
            if k.is_frequency() {
                param(
                    &format!("{}_over_2pi", k.name()),
                    units::ordinary(v),
                    "GHz",
                    var,
                )
            } else {
                param(k.name(), v, "1", var)
            }
        })
        .collect();

    Ok(SpectrumFit {
        result: FitResult {
            parameters,
            residual_norm: report.residual_norm,
            converged: report.converged(),
            iterations: report.iterations,
            gradient_norm: report.gradient_norm,
        },
        params: fitted,
    })
}
