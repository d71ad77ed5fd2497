//! Lateral Schottky contact electrostatics and the quantum-confined Stark
//! shift of the dot.
//!
//! Abrupt-junction, full-depletion approximation with uniform donor doping.
//! The contact sits at `x = 0`; the dot is at the cavity center, a distance
//! `electrode_distance_um` away. Surface states are ignored.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{self, ELEMENTARY_CHARGE, PER_CM3, UM, VACUUM_PERMITTIVITY};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElectrostaticParams {
    /// Residual donor density N_d, 1/cm³.
    pub donor_density_cm3: f64,
    /// Schottky barrier φ, V.
    pub barrier_potential_v: f64,
    pub relative_permittivity: f64,
    /// Electrode to cavity-center distance Δx, μm.
    pub electrode_distance_um: f64,
}

impl ElectrostaticParams {
    pub fn new(
        donor_density_cm3: f64,
        barrier_potential_v: f64,
        relative_permittivity: f64,
        electrode_distance_um: f64,
    ) -> Result<Self> {
        let p = Self {
            donor_density_cm3,
            barrier_potential_v,
            relative_permittivity,
            electrode_distance_um,
        };
        p.validate()?;
        Ok(p)
    }

    /// Cr/Au contact on nominally undoped MBE GaAs, 750 nm from the dot.
    pub fn reference() -> Self {
        Self {
            donor_density_cm3: 9e15,
            barrier_potential_v: 0.36,
            relative_permittivity: 12.9,
            electrode_distance_um: 0.75,
        }
    }

    pub fn validate(&self) -> Result<()> {
        const OP: &str = "ElectrostaticParams";
        if !(self.donor_density_cm3 > 0.0 && self.donor_density_cm3.is_finite()) {
            return Err(Error::domain(OP, "donor_density must be > 0"));
        }
        if !(self.barrier_potential_v > 0.0 && self.barrier_potential_v.is_finite()) {
            return Err(Error::domain(OP, "barrier_potential must be > 0"));
        }
        if !(self.relative_permittivity >= 1.0 && self.relative_permittivity.is_finite()) {
            return Err(Error::domain(OP, "relative_permittivity must be >= 1"));
        }
        if !(self.electrode_distance_um > 0.0 && self.electrode_distance_um.is_finite()) {
            return Err(Error::domain(OP, "electrode_distance must be > 0"));
        }
        Ok(())
    }

    fn permittivity(&self) -> f64 {
        VACUUM_PERMITTIVITY * self.relative_permittivity
    }

    fn charge_density(&self) -> f64 {
        ELEMENTARY_CHARGE * self.donor_density_cm3 * PER_CM3
    }

    /// Field gradient inside the depleted region, e·N_d/(ε₀ε_r), in V/μm².
    pub fn field_slope(&self) -> f64 {
        self.charge_density() / self.permittivity() * UM * UM
    }

    /// Reverse bias at which the depletion edge reaches the dot. Zero when
    /// the zero-bias depletion already covers it.
    pub fn onset_voltage(&self) -> f64 {
        let dx = self.electrode_distance_um * UM;
        let v = self.charge_density() * dx * dx / (2.0 * self.permittivity())
            - self.barrier_potential_v;
        v.max(0.0)
    }
}

fn check_bias(op: &'static str, v_reverse: f64) -> Result<()> {
    if v_reverse.is_nan() || v_reverse < 0.0 {
        return Err(Error::domain(
            op,
            format!("reverse bias must be >= 0 V, got {v_reverse}"),
        ));
    }
    Ok(())
}

/// Depletion width in μm at reverse-bias magnitude `v_reverse` (V).
///
/// x_d = sqrt(2·ε₀·ε_r·(φ + V)/(e·N_d)).
pub fn depletion_width(p: &ElectrostaticParams, v_reverse: f64) -> Result<f64> {
    check_bias("depletion_width", v_reverse)?;
    p.validate()?;
    let x =
        (2.0 * p.permittivity() * (p.barrier_potential_v + v_reverse) / p.charge_density()).sqrt();
    Ok(x / UM)
}

/// Field magnitude at the dot, V/μm. Zero until the depletion edge passes
/// the dot, then linear in `x_d − Δx`.
pub fn field_at_cavity(p: &ElectrostaticParams, v_reverse: f64) -> Result<f64> {
    let xd = depletion_width(p, v_reverse)?;
    let reach = xd - p.electrode_distance_um;
    if reach > 0.0 {
        Ok(p.field_slope() * reach)
    } else {
        Ok(0.0)
    }
}

/// Quadratic QCSE coefficients: ΔE = μ·F − α·F².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarkCoefficients {
    /// μ, meV·μm/V.
    pub mu: f64,
    /// α, meV·μm²/V².
    pub alpha: f64,
    /// Largest |F| (V/μm) covered by the data the coefficients were fitted
    /// to. Shifts beyond it are extrapolations.
    pub fitted_field_max: Option<f64>,
}

impl StarkCoefficients {
    pub fn new(mu: f64, alpha: f64) -> Result<Self> {
        if !mu.is_finite() || !alpha.is_finite() {
            return Err(Error::domain(
                "StarkCoefficients",
                "mu and alpha must be finite",
            ));
        }
        Ok(Self {
            mu,
            alpha,
            fitted_field_max: None,
        })
    }

    pub fn reference() -> Self {
        Self {
            mu: -0.009,
            alpha: -0.015,
            fitted_field_max: Some(4.2),
        }
    }

    pub fn with_fitted_range(mut self, field_max: f64) -> Self {
        self.fitted_field_max = Some(field_max);
        self
    }

    pub fn is_extrapolated(&self, field: f64) -> bool {
        matches!(self.fitted_field_max, Some(max) if field.abs() > max)
    }
}

/// Stark shift in meV for a signed field `field` (V/μm). The field points
/// toward the electrode, so physical fields at the dot are negative.
pub fn stark_shift(c: &StarkCoefficients, field: f64) -> f64 {
    c.mu * field - c.alpha * field * field
}

/// Phenomenological free-carrier screening, `s ∈ [0, 1]`, scaling the
/// Stark shift. 1 means unscreened.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScreeningFactor(f64);

impl ScreeningFactor {
    pub const NONE: ScreeningFactor = ScreeningFactor(1.0);

    pub fn new(s: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::domain(
                "ScreeningFactor",
                format!("screening factor must lie in [0, 1], got {s}"),
            ));
        }
        Ok(Self(s))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for ScreeningFactor {
    fn default() -> Self {
        Self::NONE
    }
}

pub fn apply_screening(shift_mev: f64, s: f64) -> Result<f64> {
    Ok(ScreeningFactor::new(s)?.value() * shift_mev)
}

/// Dot detuning (angular GHz) produced by reverse bias `v_reverse`.
pub fn voltage_to_detuning(
    p: &ElectrostaticParams,
    c: &StarkCoefficients,
    s: f64,
    v_reverse: f64,
) -> Result<f64> {
    let field = field_at_cavity(p, v_reverse)?;
    let shift = apply_screening(stark_shift(c, -field), s)?;
    Ok(units::mev_to_angular_ghz(shift))
}

/// Which way a positive fitted ΔE moves the dot frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftDirection {
    /// Dot frequency moves by +ΔE/ħ.
    #[default]
    AsFitted,
    /// Dot frequency moves by −ΔE/ħ (a red shift for the reference device).
    Reversed,
}

impl ShiftDirection {
    fn sign(self) -> f64 {
        match self {
            ShiftDirection::AsFitted => 1.0,
            ShiftDirection::Reversed => -1.0,
        }
    }
}

/// Complete bias → dot-frequency chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElectroConfig {
    pub params: ElectrostaticParams,
    pub stark: StarkCoefficients,
    pub screening: ScreeningFactor,
    pub direction: ShiftDirection,
}

/// Every intermediate quantity of the chain at one bias point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasPoint {
    pub voltage: f64,
    pub depletion_um: f64,
    /// Field magnitude, V/μm.
    pub field: f64,
    /// Unscreened ΔE, meV.
    pub shift_mev: f64,
    /// Dot detuning after screening and direction, angular GHz.
    pub detuning: f64,
    pub extrapolated: bool,
}

impl ElectroConfig {
    pub fn new(params: ElectrostaticParams, stark: StarkCoefficients) -> Self {
        Self {
            params,
            stark,
            screening: ScreeningFactor::NONE,
            direction: ShiftDirection::AsFitted,
        }
    }

    pub fn reference() -> Self {
        Self::new(
            ElectrostaticParams::reference(),
            StarkCoefficients::reference(),
        )
    }

    pub fn with_screening(mut self, s: ScreeningFactor) -> Self {
        self.screening = s;
        self
    }

    pub fn detuning(&self, v_reverse: f64) -> Result<f64> {
        let d = voltage_to_detuning(&self.params, &self.stark, self.screening.value(), v_reverse)?;
        Ok(self.direction.sign() * d)
    }

    pub fn evaluate(&self, v_reverse: f64) -> Result<BiasPoint> {
        let depletion_um = depletion_width(&self.params, v_reverse)?;
        let field = field_at_cavity(&self.params, v_reverse)?;
        let shift_mev = stark_shift(&self.stark, -field);
        Ok(BiasPoint {
            voltage: v_reverse,
            depletion_um,
            field,
            shift_mev,
            detuning: self.detuning(v_reverse)?,
            extrapolated: self.stark.is_extrapolated(field),
        })
    }
}
