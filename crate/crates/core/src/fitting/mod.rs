//! Parameter recovery from Stark-shift data, reflectivity spectra and
//! on/off contrast measurements.

pub mod contrast;
pub mod lm;
pub mod spectrum;
pub mod stark;

use serde::{Deserialize, Serialize};

pub use contrast::{cooperativity_from_ratio, fit_contrast, gamma_from_ratio, ContrastFit};
pub use spectrum::{fit_spectrum, SpectrumFit, SpectrumParam, SpectrumProblem};
pub use stark::{fit_stark_curve, ShiftDataset, StarkFit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitParameter {
    pub name: String,
    pub value: f64,
    pub unit: String,
    pub variance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub parameters: Vec<FitParameter>,
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    pub gradient_norm: f64,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.parameters
            .iter()
            .find(|p| p.name == name)
            .map(|p| p.value)
    }
}

fn param(name: &str, value: f64, unit: &str, variance: Option<f64>) -> FitParameter {
    FitParameter {
        name: name.to_string(),
        value,
        unit: unit.to_string(),
        variance,
    }
}
