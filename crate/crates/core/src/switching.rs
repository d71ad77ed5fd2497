//! Time-domain electro-optic switching.
//!
//! A square-wave bias is low-pass filtered by a first-order RC line; the
//! filtered voltage detunes the dot and the probe intensity is read off
//! the steady-state reflectivity at every instant. Drive frequencies are
//! hundreds of MHz against cavity rates of tens of GHz, so the optical
//! response is evaluated quasi-statically.

use serde::{Deserialize, Serialize};

use crate::cqed::{self, CouplingTable, CqedParams};
use crate::electrostatics::ElectroConfig;
use crate::error::{Error, Result};
use crate::units::{self, VACUUM_PERMITTIVITY};

/// Square-wave bias drive and transmission-line cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    pub v_low: f64,
    pub v_high: f64,
    pub frequency_mhz: f64,
    /// Fraction of each period spent at `v_high`.
    pub duty: f64,
    /// 3 dB cutoff of the RC line, MHz.
    pub rc_cutoff_mhz: f64,
    pub cycles: usize,
    pub samples_per_cycle: usize,
}

impl DriveSpec {
    pub const MIN_CYCLES: usize = 3;
    pub const MIN_SAMPLES_PER_CYCLE: usize = 64;

    /// 0–10 V at `frequency_mhz` through a 100 MHz line.
    pub fn reference(frequency_mhz: f64) -> Self {
        Self {
            v_low: 0.0,
            v_high: 10.0,
            frequency_mhz,
            duty: 0.5,
            rc_cutoff_mhz: 100.0,
            cycles: 30,
            samples_per_cycle: 256,
        }
    }

    pub fn validate(&self) -> Result<()> {
        const OP: &str = "DriveSpec";
        if !(self.v_low >= 0.0 && self.v_high >= self.v_low && self.v_high.is_finite()) {
            return Err(Error::domain(OP, "need v_high >= v_low >= 0"));
        }
        if !(self.frequency_mhz > 0.0 && self.frequency_mhz.is_finite()) {
            return Err(Error::domain(OP, "drive frequency must be > 0"));
        }
        if !(self.duty > 0.0 && self.duty < 1.0) {
            return Err(Error::domain(OP, "duty must lie in (0, 1)"));
        }
        if !(self.rc_cutoff_mhz > 0.0 && self.rc_cutoff_mhz.is_finite()) {
            return Err(Error::domain(OP, "rc cutoff must be > 0"));
        }
        if self.cycles < Self::MIN_CYCLES {
            return Err(Error::domain(
                OP,
                format!("cycles must be >= {}", Self::MIN_CYCLES),
            ));
        }
        if self.samples_per_cycle < Self::MIN_SAMPLES_PER_CYCLE {
            return Err(Error::domain(
                OP,
                format!(
                    "samples_per_cycle must be >= {}",
                    Self::MIN_SAMPLES_PER_CYCLE
                ),
            ));
        }
        Ok(())
    }

    /// Drive period, ns.
    pub fn period_ns(&self) -> f64 {
        1e3 / self.frequency_mhz
    }

    /// RC time constant τ = 1/(2π f_c), ns.
    pub fn tau_ns(&self) -> f64 {
        1e3 / (2.0 * std::f64::consts::PI * self.rc_cutoff_mhz)
    }

    /// Unfiltered source voltage at time `t` (ns).
    pub fn source(&self, t: f64) -> f64 {
        let period = self.period_ns();
        let phase = t.rem_euclid(period);
        if phase < self.duty * period {
            self.v_high
        } else {
            self.v_low
        }
    }

    /// Uniform grid covering all cycles, `samples_per_cycle` points each.
    pub fn time_grid(&self) -> Vec<f64> {
        let dt = self.period_ns() / self.samples_per_cycle as f64;
        (0..self.cycles * self.samples_per_cycle)
            .map(|k| k as f64 * dt)
            .collect()
    }

    /// Number of leading cycles discarded as transient.
    pub fn transient_cycles(&self) -> usize {
        self.cycles.div_ceil(3)
    }

    /// Source discontinuities in `(a, b)`.
    fn edges_between(&self, a: f64, b: f64) -> Vec<f64> {
        let period = self.period_ns();
        let first = (a / period).floor() as i64;
        let last = (b / period).ceil() as i64;
        let mut edges = Vec::new();
        for n in first..=last {
            for t in [n as f64 * period, (n as f64 + self.duty) * period] {
                if t > a && t < b {
                    edges.push(t);
                }
            }
        }
        edges.sort_by(f64::total_cmp);
        edges
    }
}

/// |H(f)| of a first-order low-pass with cutoff `fc`.
pub fn rc_transfer_magnitude(f: f64, fc: f64) -> f64 {
    1.0 / (1.0 + (f / fc).powi(2)).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeTrace {
    /// ns
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl TimeTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Samples with index `>= start`.
    pub fn tail(&self, start: usize) -> TimeTrace {
        TimeTrace {
            times: self.times[start.min(self.len())..].to_vec(),
            values: self.values[start.min(self.len())..].to_vec(),
        }
    }

    /// Largest |x(t + T) − x(t)| over the trace, relative to the mean,
    /// for a period of `samples_per_cycle` samples.
    pub fn cycle_deviation(&self, samples_per_cycle: usize) -> f64 {
        let v = &self.values;
        if v.len() <= samples_per_cycle {
            return 0.0;
        }
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let worst = v
            .iter()
            .zip(&v[samples_per_cycle..])
            .map(|(a, b)| (b - a).abs())
            .fold(0.0, f64::max);
        worst / mean.abs()
    }
}

fn rk4_constant_input(v: f64, u: f64, tau: f64, h: f64) -> f64 {
    let f = |x: f64| (u - x) / tau;
    let k1 = f(v);
    let k2 = f(v + 0.5 * h * k1);
    let k3 = f(v + 0.5 * h * k2);
    let k4 = f(v + h * k3);
    v + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Integrates τ·dV_f/dt = V(t) − V_f from V_f(0) = `v_low` with classical
/// RK4, step ≤ τ/20, splitting steps at the square-wave edges. Returns
/// V_f sampled on `t_grid` (ns, strictly increasing, ≥ 0).
pub fn rc_response(d: &DriveSpec, t_grid: &[f64]) -> Result<TimeTrace> {
    d.validate()?;
    if t_grid.first().is_some_and(|&t| !(t >= 0.0)) || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain(
            "rc_response",
            "time grid must be increasing from t >= 0",
        ));
    }
    let tau = d.tau_ns();
    let max_step = tau / 20.0;
    let mut values = Vec::with_capacity(t_grid.len());
    let mut t = 0.0;
    let mut v = d.v_low;
    for &target in t_grid {
        let mut bounds = d.edges_between(t, target);
        bounds.push(target);
        for stop in bounds {
            let span = stop - t;
            if span <= 0.0 {
                continue;
            }
            let u = d.source(0.5 * (t + stop));
            let n = (span / max_step).ceil() as usize;
            let h = span / n as f64;
            for _ in 0..n {
                v = rk4_constant_input(v, u, tau, h);
            }
            t = stop;
        }
        values.push(v);
    }
    Ok(TimeTrace {
        times: t_grid.to_vec(),
        values,
    })
}

/// Amplitude of the drive-frequency Fourier component of the steady-state
/// filtered voltage, divided by that of the ideal square wave.
pub fn fundamental_attenuation(d: &DriveSpec) -> Result<f64> {
    let swing = d.v_high - d.v_low;
    if !(swing > 0.0) {
        return Err(Error::domain(
            "fundamental_attenuation",
            "drive has no swing",
        ));
    }
    let trace = rc_response(d, &d.time_grid())?;
    let start = d.transient_cycles() * d.samples_per_cycle;
    let kept = trace.tail(start);
    let omega = 2.0 * std::f64::consts::PI / d.period_ns();
    let (mut re, mut im) = (0.0, 0.0);
    for (t, v) in kept.times.iter().zip(&kept.values) {
        re += v * (omega * t).cos();
        im += v * (omega * t).sin();
    }
    let n = kept.len() as f64;
    let measured = 2.0 * (re * re + im * im).sqrt() / n;
    let ideal = 2.0 * swing * (std::f64::consts::PI * d.duty).sin() / std::f64::consts::PI;
    Ok(measured / ideal)
}

/// Everything needed to turn a bias voltage into a probe intensity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchModel {
    pub electro: ElectroConfig,
    /// Optical parameters at zero bias. `coupling` is ignored in favour of
    /// `coupling_table`.
    pub cqed: CqedParams,
    pub coupling_table: CouplingTable,
}

impl SwitchModel {
    /// Optical parameters at reverse bias `v`.
    pub fn params_at(&self, v: f64) -> Result<CqedParams> {
        Ok(CqedParams {
            dot_freq: self.cqed.dot_freq + self.electro.detuning(v)?,
            coupling: self.coupling_table.at(v),
            ..self.cqed
        })
    }

    /// Reflected probe intensity at bias `v` and probe frequency `probe`.
    pub fn intensity(&self, v: f64, probe: f64) -> Result<f64> {
        Ok(cqed::reflectivity_at(&self.params_at(v)?, probe))
    }

    /// Zero-bias dot frequency, the default probe setting.
    pub fn default_probe(&self) -> f64 {
        self.cqed.dot_freq
    }

    /// Static on/off ratio between two bias levels.
    pub fn dc_on_off(&self, v_a: f64, v_b: f64, probe: f64) -> Result<f64> {
        let a = self.intensity(v_a, probe)?;
        let b = self.intensity(v_b, probe)?;
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        if !(lo > 0.0) {
            return Err(Error::DegenerateTrace(
                "zero intensity at one bias level".into(),
            ));
        }
        Ok(hi / lo)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwitchingRun {
    /// Source voltage, full run.
    pub drive: TimeTrace,
    /// Filtered voltage at the device, full run.
    pub filtered: TimeTrace,
    /// Probe intensity, steady-state window only.
    pub intensity: TimeTrace,
    /// Index into the full-run traces where the steady-state window starts.
    pub window_start: usize,
    pub warnings: Vec<String>,
}

impl SwitchingRun {
    pub fn on_off(&self) -> Result<f64> {
        on_off_ratio(&self.intensity)
    }
}

/// Drive frequency must stay below κ/(2π·10) for the quasi-static model.
pub fn adiabatic_limit_mhz(cqed: &CqedParams) -> f64 {
    units::ordinary(cqed.kappa) / 10.0 * 1e3
}

/// Probe intensity versus time for a square-wave bias.
pub fn simulate_switching(d: &DriveSpec, model: &SwitchModel, probe: f64) -> Result<SwitchingRun> {
    d.validate()?;
    model.cqed.validate()?;
    if !probe.is_finite() {
        return Err(Error::domain(
            "simulate_switching",
            "probe frequency must be finite",
        ));
    }
    let mut warnings = Vec::new();
    let limit = adiabatic_limit_mhz(&model.cqed);
    if d.frequency_mhz > limit {
        warnings.push(format!(
            "drive frequency {} MHz exceeds the quasi-static limit {:.0} MHz (kappa/2pi/10)",
            d.frequency_mhz, limit
        ));
    }
    let grid = d.time_grid();
    let filtered = rc_response(d, &grid)?;
    let drive = TimeTrace {
        times: grid.clone(),
        values: grid.iter().map(|&t| d.source(t)).collect(),
    };
    let window_start = d.transient_cycles() * d.samples_per_cycle;
    let kept = filtered.tail(window_start);
    let values = kept
        .values
        .iter()
        .map(|&v| model.intensity(v, probe))
        .collect::<Result<Vec<_>>>()?;
    Ok(SwitchingRun {
        drive,
        filtered,
        intensity: TimeTrace {
            times: kept.times,
            values,
        },
        window_start,
        warnings,
    })
}

/// max/min of a steady-state intensity trace.
pub fn on_off_ratio(trace: &TimeTrace) -> Result<f64> {
    if trace.is_empty() {
        return Err(Error::DegenerateTrace("empty trace".into()));
    }
    let (lo, hi) = trace
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    if !(lo > 0.0) {
        return Err(Error::DegenerateTrace(format!("non-positive minimum {lo}")));
    }
    Ok(hi / lo)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBudget {
    pub active_volume_um3: f64,
    /// V/μm
    pub field: f64,
    pub relative_permittivity: f64,
}

impl EnergyBudget {
    /// 1 μm × 1 μm × 200 nm of GaAs at 5 V/μm.
    pub fn reference() -> Self {
        Self {
            active_volume_um3: 0.2,
            field: 5.0,
            relative_permittivity: 12.9,
        }
    }
}

/// Electrostatic energy ½·ε₀·ε_r·F²·V_a in fJ.
pub fn switching_energy(b: &EnergyBudget) -> Result<f64> {
    if !(b.active_volume_um3 > 0.0 && b.relative_permittivity >= 1.0 && b.field.is_finite()) {
        return Err(Error::domain(
            "switching_energy",
            "need volume > 0, eps_r >= 1, finite field",
        ));
    }
    let field = b.field * 1e6;
    let volume = b.active_volume_um3 * 1e-18;
    Ok(0.5 * VACUUM_PERMITTIVITY * b.relative_permittivity * field * field * volume * 1e15)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drive_validation() {
        let mut d = DriveSpec::reference(80.0);
        assert!(d.validate().is_ok());
        d.duty = 1.0;
        assert!(d.validate().is_err());
        let mut d = DriveSpec::reference(80.0);
        d.cycles = 2;
        assert!(d.validate().is_err());
        let mut d = DriveSpec::reference(80.0);
        d.samples_per_cycle = 63;
        assert!(d.validate().is_err());
        let mut d = DriveSpec::reference(80.0);
        d.v_low = 11.0;
        assert!(d.validate().is_err());
    }

    #[test]
    fn transfer_examples() {
        assert!((rc_transfer_magnitude(100.0, 100.0) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((rc_transfer_magnitude(150.0, 100.0) - 0.5547).abs() < 1e-4);
    }

    #[test]
    fn square_wave_passes_at_low_frequency() {
        let mut d = DriveSpec::reference(1.0);
        d.cycles = 3;
        d.samples_per_cycle = 64;
        let tr = rc_response(&d, &d.time_grid()).unwrap();
        let tail = tr.tail(d.samples_per_cycle);
        let (lo, hi) = tail
            .values
            .iter()
            .fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
        assert!(hi - lo >= 0.99 * 10.0);
    }

    #[test]
    fn on_off_of_constant_trace_is_one() {
        let t = TimeTrace {
            times: vec![0.0, 1.0, 2.0],
            values: vec![0.3; 3],
        };
        assert_eq!(on_off_ratio(&t).unwrap(), 1.0);
        let t = TimeTrace {
            times: vec![0.0, 1.0],
            values: vec![0.0, 1.0],
        };
        assert!(matches!(on_off_ratio(&t), Err(Error::DegenerateTrace(_))));
    }

    #[test]
    fn energy_examples() {
        let u = switching_energy(&EnergyBudget::reference()).unwrap();
        assert!((u - 0.2855).abs() < 1e-3, "{u}");
        let mut b = EnergyBudget::reference();
        b.field = 0.0;
        assert_eq!(switching_energy(&b).unwrap(), 0.0);
        b.field = 10.0;
        assert!((switching_energy(&b).unwrap() - 4.0 * u).abs() < 1e-12);
        b.active_volume_um3 = 0.0;
        assert!(switching_energy(&b).is_err());
    }

    #[test]
    fn edges_are_found() {
        let d = DriveSpec::reference(100.0);
        assert_eq!(d.edges_between(0.0, 10.0), vec![5.0]);
        assert_eq!(d.edges_between(4.0, 12.0), vec![5.0, 10.0]);
        assert!(d.edges_between(5.0, 6.0).is_empty());
    }
}
