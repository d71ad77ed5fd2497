//! Single-mode cavity QED: polariton eigenmodes, weak-probe reflectivity
//! and photoluminescence spectra, coupling-regime classification and
//! bandwidth limits.
//!
//! All rates and frequencies are angular GHz (rad/ns). Frequencies are
//! offsets from an arbitrary optical reference.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{self, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CqedParams {
    /// ω_c
    pub cavity_freq: f64,
    /// ω_d
    pub dot_freq: f64,
    /// g
    pub coupling: f64,
    /// κ, cavity field decay.
    pub kappa: f64,
    /// γ_⊥, effective transverse decay of the dot (dephasing included).
    pub gamma: f64,
    pub amplitude: f64,
    pub background: f64,
}

impl CqedParams {
    /// Builds parameters from ordinary-frequency values in GHz
    /// (i.e. ω/2π), with unit amplitude and no background.
    pub fn from_ghz(cavity: f64, dot: f64, g: f64, kappa: f64, gamma: f64) -> Self {
        Self {
            cavity_freq: units::angular(cavity),
            dot_freq: units::angular(dot),
            coupling: units::angular(g),
            kappa: units::angular(kappa),
            gamma: units::angular(gamma),
            amplitude: 1.0,
            background: 0.0,
        }
    }

    /// Dot resonant with the cavity, g/2π = 20 GHz, κ/2π = 40 GHz and the
    /// radiative γ/2π = 0.1 GHz.
    pub fn reference() -> Self {
        Self::from_ghz(0.0, 0.0, 20.0, 40.0, 0.1)
    }

    pub fn validate(&self) -> Result<()> {
        const OP: &str = "CqedParams";
        let all = [
            self.cavity_freq,
            self.dot_freq,
            self.coupling,
            self.kappa,
            self.gamma,
            self.amplitude,
            self.background,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain(OP, "parameters must be finite"));
        }
        if self.coupling < 0.0 {
            return Err(Error::domain(OP, "coupling g must be >= 0"));
        }
        if self.kappa <= 0.0 {
            return Err(Error::domain(OP, "kappa must be > 0"));
        }
        if self.gamma <= 0.0 {
            return Err(Error::domain(OP, "gamma_perp must be > 0"));
        }
        if self.amplitude <= 0.0 {
            return Err(Error::domain(OP, "amplitude must be > 0"));
        }
        if self.background < 0.0 {
            return Err(Error::domain(OP, "background must be >= 0"));
        }
        Ok(())
    }

    /// C = g²/(κγ_⊥).
    pub fn cooperativity(&self) -> f64 {
        self.coupling * self.coupling / (self.kappa * self.gamma)
    }

    /// Same parameters with every frequency shifted by `offset`.
    pub fn shifted(&self, offset: f64) -> Self {
        Self {
            cavity_freq: self.cavity_freq + offset,
            dot_freq: self.dot_freq + offset,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalFrame {
    pub reference_wavelength_nm: f64,
    pub quality_factor: Option<f64>,
}

impl OpticalFrame {
    pub fn new(reference_wavelength_nm: f64, quality_factor: Option<f64>) -> Result<Self> {
        if !(reference_wavelength_nm > 0.0 && reference_wavelength_nm.is_finite()) {
            return Err(Error::domain(
                "OpticalFrame",
                "reference wavelength must be > 0",
            ));
        }
        Ok(Self {
            reference_wavelength_nm,
            quality_factor,
        })
    }

    pub fn reference() -> Self {
        Self {
            reference_wavelength_nm: 935.0,
            quality_factor: Some(4000.0),
        }
    }
}

/// Cavity field decay rate κ = ω₀/(2Q), angular GHz.
pub fn kappa_from_q(frame: &OpticalFrame) -> Result<f64> {
    let q = frame
        .quality_factor
        .ok_or_else(|| Error::domain("kappa_from_q", "quality factor not set"))?;
    if !(q > 0.0) {
        return Err(Error::domain(
            "kappa_from_q",
            format!("Q must be > 0, got {q}"),
        ));
    }
    if !(frame.reference_wavelength_nm > 0.0) {
        return Err(Error::domain(
            "kappa_from_q",
            "reference wavelength must be > 0",
        ));
    }
    if q.is_infinite() {
        return Ok(0.0);
    }
    let omega0 =
        2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / (frame.reference_wavelength_nm * 1e-9);
    Ok(omega0 / (2.0 * q) * 1e-9)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub detunings: Vec<f64>,
    pub intensities: Vec<f64>,
}

impl Spectrum {
    pub fn new(detunings: Vec<f64>, intensities: Vec<f64>) -> Result<Self> {
        if detunings.len() != intensities.len() {
            return Err(Error::domain(
                "Spectrum",
                "grid and intensities differ in length",
            ));
        }
        check_grid("Spectrum", &detunings)?;
        if intensities.iter().any(|&y| !(y >= 0.0)) {
            return Err(Error::domain(
                "Spectrum",
                "intensities must be finite and >= 0",
            ));
        }
        Ok(Self {
            detunings,
            intensities,
        })
    }

    pub fn len(&self) -> usize {
        self.detunings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detunings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.detunings
            .iter()
            .copied()
            .zip(self.intensities.iter().copied())
    }

    /// Grid points of strict local maxima, in order.
    pub fn peaks(&self) -> Vec<f64> {
        let y = &self.intensities;
        (1..y.len().saturating_sub(1))
            .filter(|&i| y[i] > y[i - 1] && y[i] >= y[i + 1])
            .map(|i| self.detunings[i])
            .collect()
    }
}

fn check_grid(op: &'static str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::domain(op, "empty frequency grid"));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain(op, "grid contains non-finite values"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain(op, "grid must be strictly increasing"));
    }
    Ok(())
}

/// `n` evenly spaced points on `[start, stop]`.
pub fn linear_grid(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (n - 1) as f64;
            (0..n).map(|i| start + step * i as f64).collect()
        }
    }
}

/// The two hybrid modes, ordered by real part (ties by imaginary part).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolaritonModes {
    pub lower: Complex64,
    pub upper: Complex64,
}

impl PolaritonModes {
    /// Re(ω₊) − Re(ω₋).
    pub fn splitting(&self) -> f64 {
        self.upper.re - self.lower.re
    }
}

/// Eigenvalues of [[ω_c − iκ, g], [g, ω_d − iγ_⊥]] in closed form.
pub fn polariton_modes(p: &CqedParams) -> PolaritonModes {
    let mean = Complex64::new(
        0.5 * (p.cavity_freq + p.dot_freq),
        -0.5 * (p.kappa + p.gamma),
    );
    let half_diff = Complex64::new(
        0.5 * (p.cavity_freq - p.dot_freq),
        -0.5 * (p.kappa - p.gamma),
    );
    let root = (half_diff * half_diff + p.coupling * p.coupling).sqrt();
    let (a, b) = (mean + root, mean - root);
    let a_first = a.re < b.re || (a.re == b.re && a.im <= b.im);
    if a_first {
        PolaritonModes { lower: a, upper: b }
    } else {
        PolaritonModes { lower: b, upper: a }
    }
}

/// Complex cavity response κ/D at probe frequency `omega`, with
/// D = i(ω_c − ω) + κ + g²/(i(ω_d − ω) + γ_⊥).
pub(crate) fn cavity_response(p: &CqedParams, omega: f64) -> Complex64 {
    let u = Complex64::new(p.kappa, p.cavity_freq - omega);
    let w = Complex64::new(p.gamma, p.dot_freq - omega);
    p.kappa / (u + p.coupling * p.coupling / w)
}

/// Reflectivity model at one probe frequency.
pub fn reflectivity_at(p: &CqedParams, omega: f64) -> f64 {
    p.background + p.amplitude * cavity_response(p, omega).norm_sqr()
}

/// Partial derivatives of [`reflectivity_at`] with respect to
/// (ω_c, ω_d, g, κ, γ_⊥, A, b).
pub fn reflectivity_gradient(p: &CqedParams, omega: f64) -> [f64; 7] {
    let u = Complex64::new(p.kappa, p.cavity_freq - omega);
    let w = Complex64::new(p.gamma, p.dot_freq - omega);
    let g2 = p.coupling * p.coupling;
    let d = u + g2 / w;
    let t = p.kappa / d;
    let d2 = d * d;
    let w2 = w * w;
    let i = Complex64::i();

    let dt_dwc = -p.kappa / d2 * i;
    let dt_dwd = p.kappa * g2 / (d2 * w2) * i;
    let dt_dg = -p.kappa / d2 * (2.0 * p.coupling / w);
    let dt_dkappa = 1.0 / d - p.kappa / d2;
    let dt_dgamma = p.kappa * g2 / (d2 * w2);

    let dnorm = |dt: Complex64| 2.0 * p.amplitude * (t.conj() * dt).re;
    [
        dnorm(dt_dwc),
        dnorm(dt_dwd),
        dnorm(dt_dg),
        dnorm(dt_dkappa),
        dnorm(dt_dgamma),
        t.norm_sqr(),
        1.0,
    ]
}

/// Weak-probe reflectivity, I(ω) = b + A·|κ/D(ω)|².
pub fn reflectivity_spectrum(p: &CqedParams, grid: &[f64]) -> Result<Spectrum> {
    check_grid("reflectivity_spectrum", grid)?;
    p.validate()?;
    let intensities = grid.iter().map(|&w| reflectivity_at(p, w)).collect();
    Ok(Spectrum {
        detunings: grid.to_vec(),
        intensities,
    })
}

fn lorentzian(center: f64, hwhm: f64, omega: f64) -> f64 {
    let x = omega - center;
    hwhm * hwhm / (x * x + hwhm * hwhm)
}

/// Photoluminescence: two equal-weight, peak-normalized Lorentzians at the
/// polariton frequencies with half widths −Im(ω±).
pub fn pl_spectrum(p: &CqedParams, grid: &[f64]) -> Result<Spectrum> {
    check_grid("pl_spectrum", grid)?;
    p.validate()?;
    let modes = polariton_modes(p);
    let intensities = grid
        .iter()
        .map(|&w| {
            p.background
                + p.amplitude
                    * (lorentzian(modes.lower.re, -modes.lower.im, w)
                        + lorentzian(modes.upper.re, -modes.upper.im, w))
        })
        .collect();
    Ok(Spectrum {
        detunings: grid.to_vec(),
        intensities,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingRegime {
    Strong,
    Onset,
    Weak,
}

impl std::fmt::Display for CouplingRegime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CouplingRegime::Strong => "strong",
            CouplingRegime::Onset => "onset",
            CouplingRegime::Weak => "weak",
        })
    }
}

/// Relative band around g = (κ + γ_⊥)/2 classified as the onset of strong
/// coupling.
pub const ONSET_MARGIN: f64 = 0.10;

pub fn coupling_regime(p: &CqedParams) -> CouplingRegime {
    let threshold = 0.5 * (p.kappa + p.gamma);
    if p.coupling > threshold * (1.0 + ONSET_MARGIN) {
        CouplingRegime::Strong
    } else if p.coupling >= threshold * (1.0 - ONSET_MARGIN) {
        CouplingRegime::Onset
    } else {
        CouplingRegime::Weak
    }
}

/// min(g/π, κ/π) in ordinary GHz.
pub fn strong_coupling_bandwidth(p: &CqedParams) -> f64 {
    p.coupling.min(p.kappa) / std::f64::consts::PI
}

/// g²/(πκ) in ordinary GHz.
pub fn weak_coupling_bandwidth(p: &CqedParams) -> f64 {
    p.coupling * p.coupling / (std::f64::consts::PI * p.kappa)
}

/// Switching bandwidth limit (ordinary GHz) for the regime `p` is in.
pub fn max_bandwidth(p: &CqedParams) -> f64 {
    match coupling_regime(p) {
        CouplingRegime::Strong | CouplingRegime::Onset => strong_coupling_bandwidth(p),
        CouplingRegime::Weak => weak_coupling_bandwidth(p),
    }
}

/// Piecewise-linear g(V), clamped outside the anchor range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingTable {
    anchors: Vec<(f64, f64)>,
}

impl CouplingTable {
    /// Anchors are (reverse bias V, g in angular GHz) with strictly
    /// increasing voltage.
    pub fn new(anchors: Vec<(f64, f64)>) -> Result<Self> {
        if anchors.len() < 2 {
            return Err(Error::domain(
                "g_of_voltage",
                "need at least 2 anchor points",
            ));
        }
        if anchors
            .iter()
            .any(|(v, g)| !v.is_finite() || !g.is_finite() || *g < 0.0)
        {
            return Err(Error::domain(
                "g_of_voltage",
                "anchors must be finite with g >= 0",
            ));
        }
        if anchors.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::domain(
                "g_of_voltage",
                "anchor voltages must be strictly increasing",
            ));
        }
        Ok(Self { anchors })
    }

    /// Voltage-independent coupling.
    pub fn constant(g: f64) -> Self {
        Self {
            anchors: vec![(0.0, g), (1.0, g)],
        }
    }

    /// g/2π from 20 GHz at 0 V down to 15 GHz at 7 V.
    pub fn reference() -> Self {
        Self {
            anchors: vec![(0.0, units::angular(20.0)), (7.0, units::angular(15.0))],
        }
    }

    pub fn anchors(&self) -> &[(f64, f64)] {
        &self.anchors
    }

    pub fn at(&self, v: f64) -> f64 {
        let a = &self.anchors;
        let (v0, g0) = a[0];
        let (vn, gn) = a[a.len() - 1];
        if v <= v0 {
            return g0;
        }
        if v >= vn {
            return gn;
        }
        let k = a.partition_point(|(x, _)| *x <= v);
        let (xa, ya) = a[k - 1];
        let (xb, yb) = a[k];
        ya + (yb - ya) * (v - xa) / (xb - xa)
    }
}

pub fn g_of_voltage(anchors: &[(f64, f64)], v: f64) -> Result<f64> {
    Ok(CouplingTable::new(anchors.to_vec())?.at(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{angular, ordinary};

    #[test]
    fn kappa_examples() {
        let k = kappa_from_q(&OpticalFrame::reference()).unwrap();
        assert!((ordinary(k) - 40.08).abs() < 0.01, "{}", ordinary(k));
        let k = kappa_from_q(&OpticalFrame::new(935.0, Some(17000.0)).unwrap()).unwrap();
        assert!((ordinary(k) - 9.43).abs() < 0.01);
        let k = kappa_from_q(&OpticalFrame::new(935.0, Some(f64::INFINITY)).unwrap()).unwrap();
        assert_eq!(k, 0.0);
        assert!(kappa_from_q(&OpticalFrame::new(935.0, Some(0.0)).unwrap()).is_err());
        assert!(kappa_from_q(&OpticalFrame::new(935.0, None).unwrap()).is_err());
    }

    #[test]
    fn decoupled_modes_are_bare() {
        let mut p = CqedParams::from_ghz(3.0, -2.0, 0.0, 40.0, 0.1);
        p.coupling = 0.0;
        let m = polariton_modes(&p);
        assert!((m.lower - Complex64::new(p.dot_freq, -p.gamma)).norm() < 1e-12);
        assert!((m.upper - Complex64::new(p.cavity_freq, -p.kappa)).norm() < 1e-12);
    }

    #[test]
    fn onset_splitting_is_barely_resolved() {
        let m = polariton_modes(&CqedParams::reference());
        let split = ordinary(m.splitting());
        let expect = 2.0 * (20.0f64.powi(2) - ((40.0 - 0.1) / 2.0f64).powi(2)).sqrt();
        assert!((split - expect).abs() < 1e-9);
        assert!((split - 2.83).abs() < 0.01);
    }

    #[test]
    fn bare_lorentzian_peak() {
        let mut p = CqedParams::from_ghz(5.0, 0.0, 0.0, 40.0, 1.0);
        p.amplitude = 2.5;
        let s = reflectivity_spectrum(&p, &[p.cavity_freq]).unwrap();
        assert!((s.intensities[0] - 2.5).abs() < 1e-14);
        let half = reflectivity_at(&p, p.cavity_freq + p.kappa);
        assert!((half - 1.25).abs() < 1e-12);
    }

    #[test]
    fn empty_or_unsorted_grid_rejected() {
        let p = CqedParams::reference();
        assert!(reflectivity_spectrum(&p, &[]).is_err());
        assert!(pl_spectrum(&p, &[1.0, 0.0]).is_err());
        assert!(reflectivity_spectrum(&p, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn regime_examples() {
        assert_eq!(
            coupling_regime(&CqedParams::reference()),
            CouplingRegime::Onset
        );
        assert_eq!(
            coupling_regime(&CqedParams::from_ghz(0.0, 0.0, 15.0, 40.0, 0.1)),
            CouplingRegime::Weak
        );
        assert_eq!(
            coupling_regime(&CqedParams::from_ghz(0.0, 0.0, 40.0, 10.0, 0.1)),
            CouplingRegime::Strong
        );
    }

    #[test]
    fn bandwidth_examples() {
        let p = CqedParams::reference();
        assert!((max_bandwidth(&p) - 40.0).abs() < 1e-12);
        assert!((weak_coupling_bandwidth(&p) - 20.0).abs() < 1e-12);
        let mut weak = CqedParams::from_ghz(0.0, 0.0, 0.0, 40.0, 0.1);
        weak.coupling = 0.0;
        assert_eq!(max_bandwidth(&weak), 0.0);
    }

    #[test]
    fn coupling_table() {
        let anchors = [(0.0, 20.0), (7.0, 15.0)];
        assert_eq!(g_of_voltage(&anchors, 0.0).unwrap(), 20.0);
        assert!((g_of_voltage(&anchors, 3.5).unwrap() - 17.5).abs() < 1e-12);
        assert_eq!(g_of_voltage(&anchors, 10.0).unwrap(), 15.0);
        assert_eq!(g_of_voltage(&anchors, -1.0).unwrap(), 20.0);
        assert!(g_of_voltage(&anchors[..1], 1.0).is_err());
        assert!(g_of_voltage(&[(1.0, 1.0), (1.0, 2.0)], 1.0).is_err());
        let t = CouplingTable::reference();
        assert!((ordinary(t.at(3.5)) - 17.5).abs() < 1e-12);
        assert_eq!(
            CouplingTable::constant(angular(20.0)).at(14.0),
            angular(20.0)
        );
    }

    #[test]
    fn pl_decoupled_has_two_bare_lines() {
        let mut p = CqedParams::from_ghz(-50.0, 50.0, 0.0, 5.0, 2.0);
        p.coupling = 0.0;
        let grid = linear_grid(angular(-100.0), angular(100.0), 2001);
        let s = pl_spectrum(&p, &grid).unwrap();
        let peaks = s.peaks();
        assert_eq!(peaks.len(), 2);
        assert!((peaks[0] - p.cavity_freq).abs() < 1e-9);
        assert!((peaks[1] - p.dot_freq).abs() < 1e-9);
    }
}
