//! Flat key-value run configuration (TOML syntax).
//!
//! Every key carries its unit in the name (`phi_v`, `dx_um`, ...). A value
//! may be a bare number or a string `"<number> <unit>"`, in which case the
//! unit must match the one the key declares. Frequencies and rates are
//! ordinary-frequency GHz (ω/2π). Unknown keys are rejected.
//!
//! Defaults: `screening = 1`, `duty = 0.5`, `rc_cutoff_mhz = 100`; see
//! [`KEYS`] for the full table.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use toml::Value;

use crate::cqed::{kappa_from_q, CouplingTable, CqedParams, OpticalFrame};
use crate::electrostatics::{
    ElectroConfig, ElectrostaticParams, ScreeningFactor, ShiftDirection, StarkCoefficients,
};
use crate::error::{Error, Result};
use crate::fitting::SpectrumParam;
use crate::switching::{DriveSpec, EnergyBudget};
use crate::units::angular;

pub const REFERENCE_PRESET: &str = include_str!("../../presets/paper.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Num,
    Int,
    Bool,
    Text,
    NumList,
    TextList,
}

#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    pub key: &'static str,
    /// Field the key feeds, used in error messages.
    pub field: &'static str,
    pub unit: &'static str,
    kind: Kind,
    default: Option<&'static str>,
}

const fn k(
    key: &'static str,
    field: &'static str,
    unit: &'static str,
    kind: Kind,
    default: Option<&'static str>,
) -> KeySpec {
    KeySpec {
        key,
        field,
        unit,
        kind,
        default,
    }
}

use Kind::*;

/// Every accepted key. Keys without a default are required, except `q` /
/// `kappa_ghz` (one of them), `probe_ghz` (zero-bias dot frequency), the
/// coupling anchors, the contrast targets, `contrast_v_off_v`
/// (`drive_v_low_v`), `stark_fit_field_max_v_per_um` and `out_dir`.
pub const KEYS: &[KeySpec] = &[
    k("nd_cm3", "donor_density", "1/cm^3", Num, None),
    k("phi_v", "barrier_potential", "V", Num, None),
    k("eps_r", "relative_permittivity", "1", Num, None),
    k("dx_um", "electrode_distance", "um", Num, None),
    k("mu_mev_um_per_v", "mu", "meV um/V", Num, None),
    k("alpha_mev_um2_per_v2", "alpha", "meV um^2/V^2", Num, None),
    k(
        "stark_fit_field_max_v_per_um",
        "fitted_field_max",
        "V/um",
        Num,
        None,
    ),
    k(
        "stark_direction",
        "shift_direction",
        "",
        Text,
        Some("\"as_fitted\""),
    ),
    k("screening", "screening_factor", "1", Num, Some("1")),
    k("lambda0_nm", "reference_wavelength", "nm", Num, None),
    k("q", "quality_factor", "1", Num, None),
    k("kappa_ghz", "cavity_field_decay", "GHz", Num, None),
    k("g_ghz", "coupling", "GHz", Num, None),
    k("gamma_ghz", "dot_transverse_decay", "GHz", Num, None),
    k("cavity_ghz", "cavity_freq", "GHz", Num, Some("0")),
    k("dot_ghz", "dot_freq", "GHz", Num, Some("0")),
    k("amplitude", "amplitude", "1", Num, Some("1")),
    k("background", "background", "1", Num, Some("0")),
    k("g_anchor_v", "coupling_anchor_voltages", "V", NumList, None),
    k(
        "g_anchor_ghz",
        "coupling_anchor_values",
        "GHz",
        NumList,
        None,
    ),
    k(
        "switch_track_coupling",
        "track_coupling",
        "",
        Bool,
        Some("false"),
    ),
    k("contrast_v", "contrast_voltages", "V", NumList, None),
    k("contrast_ratio", "contrast_ratios", "1", NumList, None),
    k("contrast_v_off_v", "contrast_off_voltage", "V", Num, None),
    k("drive_v_low_v", "v_low", "V", Num, Some("0")),
    k("drive_v_high_v", "v_high", "V", Num, Some("10")),
    k("drive_freq_mhz", "frequency", "MHz", Num, Some("150")),
    k("duty", "duty", "1", Num, Some("0.5")),
    k("rc_cutoff_mhz", "rc_cutoff", "MHz", Num, Some("100")),
    k("cycles", "cycles", "1", Int, Some("30")),
    k(
        "samples_per_cycle",
        "samples_per_cycle",
        "1",
        Int,
        Some("256"),
    ),
    k("probe_ghz", "probe_frequency", "GHz", Num, None),
    k("stark_v_start_v", "stark_sweep_start", "V", Num, Some("0")),
    k("stark_v_stop_v", "stark_sweep_stop", "V", Num, Some("10")),
    k("stark_v_step_v", "stark_sweep_step", "V", Num, Some("0.1")),
    k(
        "spectrum_span_ghz",
        "spectrum_span",
        "GHz",
        Num,
        Some("200"),
    ),
    k("spectrum_points", "spectrum_points", "1", Int, Some("801")),
    k(
        "spectrum_voltages_v",
        "spectrum_voltages",
        "V",
        NumList,
        Some("[0]"),
    ),
    k(
        "anticrossing_span_ghz",
        "anticrossing_span",
        "GHz",
        Num,
        Some("100"),
    ),
    k(
        "anticrossing_points",
        "anticrossing_points",
        "1",
        Int,
        Some("101"),
    ),
    k(
        "energy_field_v_per_um",
        "energy_field",
        "V/um",
        Num,
        Some("5"),
    ),
    k(
        "active_volume_um3",
        "active_volume",
        "um^3",
        Num,
        Some("0.2"),
    ),
    k("fit_noise_rel", "synthetic_noise", "1", Num, Some("0.01")),
    k(
        "fit_free",
        "free_parameters",
        "",
        TextList,
        Some("[\"g\", \"kappa\", \"gamma\"]"),
    ),
    k("seed", "seed", "1", Int, Some("0")),
    k("out_dir", "output_directory", "", Text, None),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Sweep {
    /// start, start+step, ... up to and including stop (within 1e-9 step).
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.start + self.step * i as f64).collect()
    }
}

/// Validated configuration of one run. Rates inside are angular GHz.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub electro: ElectroConfig,
    pub frame: OpticalFrame,
    pub cqed: CqedParams,
    pub coupling_anchors: Option<CouplingTable>,
    pub track_coupling: bool,
    pub contrast_targets: Vec<(f64, f64)>,
    pub contrast_v_off: f64,
    pub drive: DriveSpec,
    pub probe: Option<f64>,
    pub stark_sweep: Sweep,
    pub spectrum_span: f64,
    pub spectrum_points: usize,
    pub spectrum_voltages: Vec<f64>,
    pub anticrossing_span: f64,
    pub anticrossing_points: usize,
    pub energy: EnergyBudget,
    pub fit_noise_rel: f64,
    pub fit_free: Vec<SpectrumParam>,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
    /// Every key with the value actually used (defaults filled in).
    pub resolved: BTreeMap<String, Value>,
}

struct Doc {
    table: toml::Table,
    resolved: BTreeMap<String, Value>,
}

fn spec(key: &str) -> &'static KeySpec {
    KEYS.iter()
        .find(|s| s.key == key)
        .expect("key declared in KEYS")
}

fn err(s: &KeySpec, msg: impl Into<String>) -> Error {
    Error::config(s.key, format!("{} ({}): {}", s.field, s.unit, msg.into()))
}

fn number_with_unit(s: &KeySpec, v: &Value) -> Result<f64> {
    match v {
        Value::Integer(i) => Ok(*i as f64),
        Value::Float(f) => Ok(*f),
        Value::String(text) => {
            let text = text.trim();
            let split = text.find(char::is_whitespace).ok_or_else(|| {
                err(
                    s,
                    format!(
                        "expected a number or \"<number> {}\", got \"{text}\"",
                        s.unit
                    ),
                )
            })?;
            let (num, unit) = text.split_at(split);
            let unit = unit.trim();
            if unit != s.unit {
                return Err(err(
                    s,
                    format!("unit mismatch: expected {}, found {unit}", s.unit),
                ));
            }
            num.parse::<f64>()
                .map_err(|_| err(s, format!("`{num}` is not a number")))
        }
        other => Err(err(
            s,
            format!("expected a number, got {}", other.type_str()),
        )),
    }
}

impl Doc {
    fn raw(&self, key: &str) -> Option<Value> {
        let s = spec(key);
        match self.table.get(key) {
            Some(v) => Some(v.clone()),
            None => s.default.map(|d| {
                let text = format!("x = {d}");
                text.parse::<toml::Table>().expect("valid default")["x"].clone()
            }),
        }
    }

    fn missing(&self, key: &str) -> Error {
        err(spec(key), "missing required key")
    }

    fn opt_num(&mut self, key: &str) -> Result<Option<f64>> {
        let s = spec(key);
        let Some(v) = self.raw(key) else {
            return Ok(None);
        };
        let x = number_with_unit(s, &v)?;
        if !x.is_finite() {
            return Err(err(s, "must be finite"));
        }
        self.resolved.insert(key.into(), Value::Float(x));
        Ok(Some(x))
    }

    fn num(&mut self, key: &str) -> Result<f64> {
        self.opt_num(key)?.ok_or_else(|| self.missing(key))
    }

    fn int(&mut self, key: &str) -> Result<u64> {
        let s = spec(key);
        let v = self.raw(key).ok_or_else(|| self.missing(key))?;
        let i = match v {
            Value::Integer(i) if i >= 0 => i as u64,
            _ => return Err(err(s, "expected a non-negative integer")),
        };
        self.resolved.insert(key.into(), Value::Integer(i as i64));
        Ok(i)
    }

    fn boolean(&mut self, key: &str) -> Result<bool> {
        let s = spec(key);
        let v = self.raw(key).ok_or_else(|| self.missing(key))?;
        let b = v
            .as_bool()
            .ok_or_else(|| err(s, "expected true or false"))?;
        self.resolved.insert(key.into(), Value::Boolean(b));
        Ok(b)
    }

    fn opt_text(&mut self, key: &str) -> Result<Option<String>> {
        let s = spec(key);
        let Some(v) = self.raw(key) else {
            return Ok(None);
        };
        let t = v
            .as_str()
            .ok_or_else(|| err(s, "expected a string"))?
            .to_string();
        self.resolved.insert(key.into(), Value::String(t.clone()));
        Ok(Some(t))
    }

    fn opt_num_list(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        let s = spec(key);
        let Some(v) = self.raw(key) else {
            return Ok(None);
        };
        let arr = v.as_array().ok_or_else(|| err(s, "expected an array"))?;
        let xs = arr
            .iter()
            .map(|x| number_with_unit(s, x))
            .collect::<Result<Vec<f64>>>()?;
        if xs.iter().any(|x| !x.is_finite()) {
            return Err(err(s, "entries must be finite"));
        }
        self.resolved.insert(
            key.into(),
            Value::Array(xs.iter().map(|&x| Value::Float(x)).collect()),
        );
        Ok(Some(xs))
    }

    fn text_list(&mut self, key: &str) -> Result<Vec<String>> {
        let s = spec(key);
        let v = self.raw(key).ok_or_else(|| self.missing(key))?;
        let arr = v
            .as_array()
            .ok_or_else(|| err(s, "expected an array of strings"))?;
        let xs = arr
            .iter()
            .map(|x| {
                x.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| err(s, "expected strings"))
            })
            .collect::<Result<Vec<_>>>()?;
        self.resolved.insert(
            key.into(),
            Value::Array(xs.iter().cloned().map(Value::String).collect()),
        );
        Ok(xs)
    }
}

fn positive(key: &str, x: f64) -> Result<f64> {
    if x > 0.0 {
        Ok(x)
    } else {
        Err(err(spec(key), format!("must be > 0, got {x}")))
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::config("<document>", e.message().to_string()))?;
    for (key, value) in &table {
        let Some(s) = KEYS.iter().find(|s| s.key == key) else {
            return Err(Error::config(key.clone(), "unknown key"));
        };
        let ok = match s.kind {
            Num => matches!(
                value,
                Value::Integer(_) | Value::Float(_) | Value::String(_)
            ),
            Int => value.is_integer(),
            Bool => value.is_bool(),
            Text => value.is_str(),
            NumList | TextList => value.is_array(),
        };
        if !ok {
            return Err(err(
                s,
                format!("expected {:?}, got {}", s.kind, value.type_str()),
            ));
        }
    }
    let mut d = Doc {
        table,
        resolved: BTreeMap::new(),
    };

    // electrostatics
    let nd = positive("nd_cm3", d.num("nd_cm3")?)?;
    let phi = positive("phi_v", d.num("phi_v")?)?;
    let eps_r = d.num("eps_r")?;
    if eps_r < 1.0 {
        return Err(err(spec("eps_r"), format!("must be >= 1, got {eps_r}")));
    }
    let dx = positive("dx_um", d.num("dx_um")?)?;
    let params = ElectrostaticParams::new(nd, phi, eps_r, dx)?;

    let mut stark =
        StarkCoefficients::new(d.num("mu_mev_um_per_v")?, d.num("alpha_mev_um2_per_v2")?)?;
    if let Some(fmax) = d.opt_num("stark_fit_field_max_v_per_um")? {
        stark = stark.with_fitted_range(positive("stark_fit_field_max_v_per_um", fmax)?);
    }
    let direction = match d.opt_text("stark_direction")?.as_deref() {
        Some("as_fitted") | None => ShiftDirection::AsFitted,
        Some("reversed") => ShiftDirection::Reversed,
        Some(other) => {
            return Err(err(
                spec("stark_direction"),
                format!("expected \"as_fitted\" or \"reversed\", got \"{other}\""),
            ))
        }
    };
    let s = d.num("screening")?;
    let screening = ScreeningFactor::new(s)
        .map_err(|_| err(spec("screening"), format!("must lie in [0, 1], got {s}")))?;
    let electro = ElectroConfig {
        params,
        stark,
        screening,
        direction,
    };

    // optics
    let lambda0 = positive("lambda0_nm", d.num("lambda0_nm")?)?;
    let q = d.opt_num("q")?.map(|q| positive("q", q)).transpose()?;
    let frame = OpticalFrame::new(lambda0, q)?;
    let kappa = match d.opt_num("kappa_ghz")? {
        Some(kg) => angular(positive("kappa_ghz", kg)?),
        None if q.is_some() => kappa_from_q(&frame)?,
        None => return Err(err(spec("kappa_ghz"), "missing: set kappa_ghz or q")),
    };
    let g = d.num("g_ghz")?;
    if g < 0.0 {
        return Err(err(spec("g_ghz"), "must be >= 0"));
    }
    let gamma = positive("gamma_ghz", d.num("gamma_ghz")?)?;
    let amplitude = positive("amplitude", d.num("amplitude")?)?;
    let background = d.num("background")?;
    if background < 0.0 {
        return Err(err(spec("background"), "must be >= 0"));
    }
    let cqed = CqedParams {
        cavity_freq: angular(d.num("cavity_ghz")?),
        dot_freq: angular(d.num("dot_ghz")?),
        coupling: angular(g),
        kappa,
        gamma: angular(gamma),
        amplitude,
        background,
    };
    cqed.validate()?;

    let anchors = match (
        d.opt_num_list("g_anchor_v")?,
        d.opt_num_list("g_anchor_ghz")?,
    ) {
        (None, None) => None,
        (Some(vs), Some(gs)) if vs.len() == gs.len() => Some(
            CouplingTable::new(vs.into_iter().zip(gs.into_iter().map(angular)).collect())
                .map_err(|e| err(spec("g_anchor_v"), e.to_string()))?,
        ),
        _ => {
            return Err(err(
                spec("g_anchor_ghz"),
                "g_anchor_v and g_anchor_ghz must both be set with equal lengths",
            ))
        }
    };
    let track_coupling = d.boolean("switch_track_coupling")?;
    if track_coupling && anchors.is_none() {
        return Err(err(
            spec("switch_track_coupling"),
            "requires g_anchor_v / g_anchor_ghz",
        ));
    }

    let contrast_targets = match (
        d.opt_num_list("contrast_v")?,
        d.opt_num_list("contrast_ratio")?,
    ) {
        (None, None) => Vec::new(),
        (Some(vs), Some(rs)) if vs.len() == rs.len() => {
            if let Some(r) = rs.iter().find(|r| !(**r >= 1.0)) {
                return Err(err(
                    spec("contrast_ratio"),
                    format!("ratios must be >= 1, got {r}"),
                ));
            }
            vs.into_iter().zip(rs).collect()
        }
        _ => {
            return Err(err(
                spec("contrast_ratio"),
                "contrast_v and contrast_ratio must both be set with equal lengths",
            ))
        }
    };

    let drive = DriveSpec {
        v_low: d.num("drive_v_low_v")?,
        v_high: d.num("drive_v_high_v")?,
        frequency_mhz: d.num("drive_freq_mhz")?,
        duty: d.num("duty")?,
        rc_cutoff_mhz: d.num("rc_cutoff_mhz")?,
        cycles: d.int("cycles")? as usize,
        samples_per_cycle: d.int("samples_per_cycle")? as usize,
    };
    drive
        .validate()
        .map_err(|e| err(spec("drive_freq_mhz"), e.to_string()))?;
    let contrast_v_off = d.opt_num("contrast_v_off_v")?.unwrap_or(drive.v_low);
    let probe = d.opt_num("probe_ghz")?.map(angular);

    let stark_sweep = Sweep {
        start: d.num("stark_v_start_v")?,
        stop: d.num("stark_v_stop_v")?,
        step: positive("stark_v_step_v", d.num("stark_v_step_v")?)?,
    };
    if stark_sweep.start < 0.0 || stark_sweep.stop < stark_sweep.start {
        return Err(err(spec("stark_v_stop_v"), "need 0 <= start <= stop"));
    }
    let spectrum_span = angular(positive("spectrum_span_ghz", d.num("spectrum_span_ghz")?)?);
    let spectrum_points = d.int("spectrum_points")? as usize;
    if spectrum_points < 2 {
        return Err(err(spec("spectrum_points"), "need at least 2 points"));
    }
    let spectrum_voltages = d.opt_num_list("spectrum_voltages_v")?.unwrap_or_default();
    if spectrum_voltages.iter().any(|v| *v < 0.0) {
        return Err(err(spec("spectrum_voltages_v"), "voltages must be >= 0"));
    }
    let anticrossing_span = angular(positive(
        "anticrossing_span_ghz",
        d.num("anticrossing_span_ghz")?,
    )?);
    let anticrossing_points = d.int("anticrossing_points")? as usize;
    if anticrossing_points < 2 {
        return Err(err(spec("anticrossing_points"), "need at least 2 points"));
    }

    let energy = EnergyBudget {
        field: d.num("energy_field_v_per_um")?,
        active_volume_um3: positive("active_volume_um3", d.num("active_volume_um3")?)?,
        relative_permittivity: eps_r,
    };
    let fit_noise_rel = d.num("fit_noise_rel")?;
    if fit_noise_rel < 0.0 {
        return Err(err(spec("fit_noise_rel"), "must be >= 0"));
    }
    let fit_free = d
        .text_list("fit_free")?
        .iter()
        .map(|s| s.parse::<SpectrumParam>())
        .collect::<Result<Vec<_>>>()
        .map_err(|e| err(spec("fit_free"), e.to_string()))?;
    let seed = d.int("seed")?;
    let out_dir = d.opt_text("out_dir")?.map(PathBuf::from);

    Ok(RunConfig {
        electro,
        frame,
        cqed,
        coupling_anchors: anchors,
        track_coupling,
        contrast_targets,
        contrast_v_off,
        drive,
        probe,
        stark_sweep,
        spectrum_span,
        spectrum_points,
        spectrum_voltages,
        anticrossing_span,
        anticrossing_points,
        energy,
        fit_noise_rel,
        fit_free,
        seed,
        out_dir,
        resolved: d.resolved,
    })
}

impl RunConfig {
    pub fn reference() -> Self {
        parse_config_str(REFERENCE_PRESET).expect("bundled preset is valid")
    }

    /// Coupling table used by the switching model: the anchors when
    /// `switch_track_coupling` is set, otherwise constant at g.
    pub fn switch_coupling(&self) -> CouplingTable {
        match (&self.coupling_anchors, self.track_coupling) {
            (Some(t), true) => t.clone(),
            _ => CouplingTable::constant(self.cqed.coupling),
        }
    }

    pub fn probe_frequency(&self) -> f64 {
        self.probe.unwrap_or(self.cqed.dot_freq)
    }
}
