//! Subcommand orchestration: each `run_*` turns a validated configuration
//! into CSV tables plus a summary; [`execute`] writes them and the run
//! manifest to the output directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use toml::Value;

use crate::cqed::{
    coupling_regime, linear_grid, max_bandwidth, pl_spectrum, polariton_modes,
    reflectivity_spectrum, strong_coupling_bandwidth, weak_coupling_bandwidth, CouplingTable,
    Spectrum,
};
use crate::electrostatics::{field_at_cavity, stark_shift};
use crate::error::{Error, Result};
use crate::fitting::{self, FitResult, ShiftDataset, SpectrumParam};
use crate::io::csv::spectrum_table;
use crate::io::{self, Cell, CsvTable, RunConfig, RunManifest};
use crate::switching::{self, SwitchModel};
use crate::units::ordinary;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigSource {
    File(PathBuf),
    Preset(String),
}

pub struct LoadedConfig {
    pub config: RunConfig,
    pub source: String,
    pub bytes: Vec<u8>,
}

pub fn load_config(src: &ConfigSource) -> Result<LoadedConfig> {
    match src {
        ConfigSource::File(path) => {
            let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
            let text = String::from_utf8(bytes.clone())
                .map_err(|_| Error::config("<document>", "config is not valid UTF-8"))?;
            Ok(LoadedConfig {
                config: io::parse_config_str(&text)?,
                source: path.display().to_string(),
                bytes,
            })
        }
        ConfigSource::Preset(name) if name == "paper" => Ok(LoadedConfig {
            config: io::parse_config_str(io::REFERENCE_PRESET)?,
            source: "preset:paper".into(),
            bytes: io::REFERENCE_PRESET.as_bytes().to_vec(),
        }),
        ConfigSource::Preset(name) => Err(Error::config(
            "--preset",
            format!("unknown preset `{name}` (known: paper)"),
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitKind {
    Spectrum,
    Stark,
    Contrast,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Spectrum,
    Stark,
    Switch {
        frequency_mhz: Option<f64>,
    },
    Fit {
        kind: FitKind,
        data: Option<PathBuf>,
        free: Option<Vec<SpectrumParam>>,
    },
    Metrics,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Stark => "stark",
            Command::Switch { .. } => "switch",
            Command::Fit { .. } => "fit",
            Command::Metrics => "metrics",
        }
    }
}

/// Tables and scalar results of one subcommand, before anything is written.
#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub tables: Vec<(String, CsvTable)>,
    pub summary: BTreeMap<String, Value>,
    pub warnings: Vec<String>,
    /// Input data files read (path → bytes digest).
    pub inputs: BTreeMap<String, String>,
}

impl RunOutput {
    fn put(&mut self, key: &str, v: impl Into<Value>) {
        self.summary.insert(key.to_string(), v.into());
    }
}

fn spectrum_model(cfg: &RunConfig) -> SwitchModel {
    SwitchModel {
        electro: cfg.electro,
        cqed: cfg.cqed,
        coupling_table: cfg
            .coupling_anchors
            .clone()
            .unwrap_or_else(|| CouplingTable::constant(cfg.cqed.coupling)),
    }
}

fn spectrum_grid(cfg: &RunConfig) -> Vec<f64> {
    let c = cfg.cqed.cavity_freq;
    linear_grid(
        c - 0.5 * cfg.spectrum_span,
        c + 0.5 * cfg.spectrum_span,
        cfg.spectrum_points,
    )
}

/// Reflectivity and PL spectra at each configured bias, plus the
/// polariton anticrossing versus dot detuning.
pub fn run_spectrum(cfg: &RunConfig) -> Result<RunOutput> {
    let model = spectrum_model(cfg);
    let grid = spectrum_grid(cfg);
    let per_voltage = cfg
        .spectrum_voltages
        .par_iter()
        .map(|&v| {
            let p = model.params_at(v)?;
            Ok((
                v,
                reflectivity_spectrum(&p, &grid)?,
                pl_spectrum(&p, &grid)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut spectra = CsvTable::new(&["voltage_V", "detuning_GHz", "reflectivity", "pl"]);
    for (v, refl, pl) in &per_voltage {
        for ((w, r), p) in grid.iter().zip(&refl.intensities).zip(&pl.intensities) {
            spectra.push_nums(&[*v, ordinary(*w), *r, *p]);
        }
    }

    let c = cfg.cqed.cavity_freq;
    let offsets = linear_grid(
        -0.5 * cfg.anticrossing_span,
        0.5 * cfg.anticrossing_span,
        cfg.anticrossing_points,
    );
    let modes: Vec<_> = offsets
        .par_iter()
        .map(|&d| {
            let mut p = cfg.cqed;
            p.dot_freq = c + d;
            (d, polariton_modes(&p))
        })
        .collect();
    let mut anti = CsvTable::new(&[
        "dot_detuning_GHz",
        "lower_GHz",
        "upper_GHz",
        "lower_hwhm_GHz",
        "upper_hwhm_GHz",
    ]);
    for (d, m) in &modes {
        anti.push_nums(&[
            ordinary(*d),
            ordinary(m.lower.re - c),
            ordinary(m.upper.re - c),
            ordinary(-m.lower.im),
            ordinary(-m.upper.im),
        ]);
    }
    let (gap_at, gap) =
        modes
            .iter()
            .map(|(d, m)| (*d, m.splitting()))
            .fold(
                (0.0, f64::INFINITY),
                |acc, x| if x.1 < acc.1 { x } else { acc },
            );

    let mut out = RunOutput::default();
    out.tables.push(("spectrum.csv".into(), spectra));
    out.tables.push(("anticrossing.csv".into(), anti));
    out.put("regime", coupling_regime(&cfg.cqed).to_string());
    out.put("cooperativity", cfg.cqed.cooperativity());
    out.put(
        "vacuum_rabi_splitting_GHz",
        ordinary(polariton_modes(&cfg.cqed).splitting()),
    );
    out.put("min_gap_GHz", ordinary(gap));
    out.put("min_gap_dot_detuning_GHz", ordinary(gap_at));
    Ok(out)
}

/// Depletion width, field and Stark shift over the configured bias sweep.
pub fn run_stark(cfg: &RunConfig) -> Result<RunOutput> {
    let points = cfg
        .stark_sweep
        .points()
        .par_iter()
        .map(|&v| cfg.electro.evaluate(v))
        .collect::<Result<Vec<_>>>()?;
    let mut t = CsvTable::new(&["voltage_V", "x_d_um", "field_V_per_um", "shift_meV"]);
    for p in &points {
        t.push_nums(&[p.voltage, p.depletion_um, p.field, p.shift_mev]);
    }
    let mut out = RunOutput::default();
    out.tables.push(("stark.csv".into(), t));
    out.put("onset_voltage_V", cfg.electro.params.onset_voltage());
    let max_shift = points.iter().map(|p| p.shift_mev.abs()).fold(0.0, f64::max);
    out.put("max_abs_shift_meV", max_shift);
    let extrapolated: Vec<_> = points.iter().filter(|p| p.extrapolated).collect();
    out.put("extrapolated_points", extrapolated.len() as i64);
    if let Some(first) = extrapolated.first() {
        out.put("extrapolated_above_V", first.voltage);
        out.warnings.push(format!(
            "Stark coefficients extrapolated beyond their fitted field range for V >= {} V",
            first.voltage
        ));
    }
    Ok(out)
}

/// Calibrated switching model: runs the contrast fit when targets are
/// configured, otherwise uses the configured γ_⊥ and screening.
pub fn switch_model(cfg: &RunConfig) -> Result<(SwitchModel, Option<fitting::ContrastFit>)> {
    let base = SwitchModel {
        electro: cfg.electro,
        cqed: cfg.cqed,
        coupling_table: cfg.switch_coupling(),
    };
    if cfg.contrast_targets.is_empty() {
        return Ok((base, None));
    }
    let fit = fitting::fit_contrast(
        &cfg.contrast_targets,
        &base,
        cfg.contrast_v_off,
        cfg.probe_frequency(),
    )?;
    Ok((fit.model.clone(), Some(fit)))
}

fn fit_table(r: &FitResult) -> CsvTable {
    let mut t = CsvTable::new(&["parameter", "value", "unit", "std_error"]);
    for p in &r.parameters {
        t.push(vec![
            p.name.as_str().into(),
            p.value.into(),
            p.unit.as_str().into(),
            p.variance
                .map_or(Cell::Text(String::new()), |v| Cell::Num(v.sqrt())),
        ]);
    }
    for (name, v) in [
        ("residual_norm", r.residual_norm),
        ("converged", if r.converged { 1.0 } else { 0.0 }),
        ("iterations", r.iterations as f64),
        ("gradient_norm", r.gradient_norm),
    ] {
        t.push(vec![
            name.into(),
            v.into(),
            "1".into(),
            Cell::Text(String::new()),
        ]);
    }
    t
}

fn put_fit(out: &mut RunOutput, r: &FitResult) {
    for p in &r.parameters {
        out.put(&p.name, p.value);
    }
    out.put("residual_norm", r.residual_norm);
    out.put("converged", r.converged);
    out.put("iterations", r.iterations as i64);
}

pub fn run_switch(cfg: &RunConfig, frequency_mhz: Option<f64>) -> Result<RunOutput> {
    let (model, calibration) = switch_model(cfg)?;
    let mut drive = cfg.drive;
    if let Some(f) = frequency_mhz {
        drive.frequency_mhz = f;
    }
    let probe = cfg.probe_frequency();
    let run = switching::simulate_switching(&drive, &model, probe)?;
    let ratio = run.on_off()?;

    let mut trace = CsvTable::new(&["time_ns", "drive_V", "filtered_V", "intensity"]);
    for (k, (&t, &i)) in run
        .intensity
        .times
        .iter()
        .zip(&run.intensity.values)
        .enumerate()
    {
        let idx = run.window_start + k;
        trace.push_nums(&[t, run.drive.values[idx], run.filtered.values[idx], i]);
    }
    let mut out = RunOutput::default();
    out.tables.push(("trace.csv".into(), trace));
    if let Some(fit) = &calibration {
        out.tables
            .push(("calibration.csv".into(), fit_table(&fit.result)));
        out.put("calibration_max_ratio_error", fit.max_ratio_error);
        out.put("calibration_converged", fit.result.converged);
    }
    out.put("frequency_MHz", drive.frequency_mhz);
    out.put("on_off_ratio", ratio);
    out.put(
        "dc_on_off_ratio",
        model.dc_on_off(drive.v_high, drive.v_low, probe)?,
    );
    out.put(
        "rc_attenuation",
        switching::rc_transfer_magnitude(drive.frequency_mhz, drive.rc_cutoff_mhz),
    );
    out.put("gamma_over_2pi_GHz", ordinary(model.cqed.gamma));
    out.put("screening", model.electro.screening.value());
    out.put(
        "periodicity_error",
        run.intensity.cycle_deviation(drive.samples_per_cycle),
    );
    out.warnings.extend(run.warnings);
    Ok(out)
}

fn noisy(values: &mut [f64], rel: f64, seed: u64) {
    if rel == 0.0 {
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    for y in values.iter_mut() {
        *y += rel * y.abs() * normal.sample(&mut rng);
    }
}

/// Synthetic reflectivity spectrum from the configured parameters with
/// seeded relative Gaussian noise (intensities clamped at zero).
pub fn synthetic_spectrum(cfg: &RunConfig, seed: u64) -> Result<Spectrum> {
    let mut s = reflectivity_spectrum(&cfg.cqed, &spectrum_grid(cfg))?;
    noisy(&mut s.intensities, cfg.fit_noise_rel, seed);
    s.intensities.iter_mut().for_each(|y| *y = y.max(0.0));
    Ok(s)
}

/// Synthetic shift data over the Stark sweep, with seeded relative noise.
pub fn synthetic_shifts(cfg: &RunConfig, seed: u64) -> Result<ShiftDataset> {
    let mut pts = Vec::new();
    for v in cfg.stark_sweep.points() {
        let f = field_at_cavity(&cfg.electro.params, v)?;
        pts.push((v, stark_shift(&cfg.electro.stark, -f)));
    }
    let mut ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    noisy(&mut ys, cfg.fit_noise_rel, seed);
    for (p, y) in pts.iter_mut().zip(ys) {
        p.1 = y;
    }
    ShiftDataset::new(pts, None)
}

pub fn run_fit(
    cfg: &RunConfig,
    kind: FitKind,
    data: Option<&Path>,
    free: Option<&[SpectrumParam]>,
    seed: u64,
) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    if let Some(p) = data {
        out.inputs
            .insert(p.display().to_string(), io::manifest::file_sha256(p)?);
    }
    match kind {
        FitKind::Spectrum => {
            let spectrum = match data {
                Some(p) => io::ingest_spectrum_csv(p, Some(cfg.frame.reference_wavelength_nm))?,
                None => synthetic_spectrum(cfg, seed)?,
            };
            let free = free.unwrap_or(&cfg.fit_free);
            let fit = fitting::fit_spectrum(&spectrum, &cfg.cqed, free)?;
            let mut curve = CsvTable::new(&["detuning_GHz", "data", "model"]);
            for (w, y) in spectrum.iter() {
                curve.push_nums(&[ordinary(w), y, crate::cqed::reflectivity_at(&fit.params, w)]);
            }
            out.tables
                .push(("fit_input.csv".into(), spectrum_table(&spectrum)));
            out.tables.push(("fit.csv".into(), fit_table(&fit.result)));
            out.tables.push(("fit_curve.csv".into(), curve));
            out.put("regime", coupling_regime(&fit.params).to_string());
            put_fit(&mut out, &fit.result);
        }
        FitKind::Stark => {
            let dataset = match data {
                Some(p) => io::ingest_shift_csv(p)?,
                None => synthetic_shifts(cfg, seed)?,
            };
            let fit = fitting::fit_stark_curve(&dataset, &cfg.electro.params)?;
            let mut curve = CsvTable::new(&["voltage_V", "data", "model"]);
            for &(v, y) in &dataset.points {
                let f = field_at_cavity(&cfg.electro.params, v)?;
                curve.push_nums(&[v, y, stark_shift(&fit.coefficients, -f)]);
            }
            out.tables.push(("fit.csv".into(), fit_table(&fit.result)));
            out.tables.push(("fit_curve.csv".into(), curve));
            put_fit(&mut out, &fit.result);
        }
        FitKind::Contrast => {
            if cfg.contrast_targets.is_empty() {
                return Err(Error::config(
                    "contrast_v",
                    "contrast fit needs contrast_v / contrast_ratio",
                ));
            }
            let (model, fit) = switch_model(cfg)?;
            let fit = fit.expect("targets present");
            let probe = cfg.probe_frequency();
            let mut curve = CsvTable::new(&["voltage_V", "target", "model"]);
            for &(v, r) in &cfg.contrast_targets {
                curve.push_nums(&[v, r, model.dc_on_off(v, cfg.contrast_v_off, probe)?]);
            }
            out.tables.push(("fit.csv".into(), fit_table(&fit.result)));
            out.tables.push(("fit_curve.csv".into(), curve));
            out.put("max_ratio_error", fit.max_ratio_error);
            put_fit(&mut out, &fit.result);
        }
    }
    Ok(out)
}

/// Cavity and device figures of merit.
pub fn run_metrics(cfg: &RunConfig) -> Result<RunOutput> {
    let p = &cfg.cqed;
    let mut t = CsvTable::new(&["metric", "value", "unit"]);
    let mut out = RunOutput::default();
    let num = |t: &mut CsvTable, out: &mut RunOutput, name: &str, v: f64, unit: &str| {
        t.push(vec![name.into(), v.into(), unit.into()]);
        out.put(name, v);
    };
    if cfg.frame.quality_factor.is_some() {
        num(
            &mut t,
            &mut out,
            "kappa_from_q_over_2pi",
            ordinary(crate::cqed::kappa_from_q(&cfg.frame)?),
            "GHz",
        );
    }
    num(&mut t, &mut out, "kappa_over_2pi", ordinary(p.kappa), "GHz");
    num(&mut t, &mut out, "g_over_2pi", ordinary(p.coupling), "GHz");
    num(&mut t, &mut out, "gamma_over_2pi", ordinary(p.gamma), "GHz");
    num(&mut t, &mut out, "cooperativity", p.cooperativity(), "1");
    let regime = coupling_regime(p);
    t.push(vec!["regime".into(), regime.to_string().into(), "".into()]);
    out.put("regime", regime.to_string());
    num(
        &mut t,
        &mut out,
        "vacuum_rabi_splitting",
        ordinary(polariton_modes(p).splitting()),
        "GHz",
    );
    num(&mut t, &mut out, "max_bandwidth", max_bandwidth(p), "GHz");
    num(
        &mut t,
        &mut out,
        "strong_coupling_bandwidth",
        strong_coupling_bandwidth(p),
        "GHz",
    );
    num(
        &mut t,
        &mut out,
        "weak_coupling_bandwidth",
        weak_coupling_bandwidth(p),
        "GHz",
    );
    num(
        &mut t,
        &mut out,
        "switching_energy",
        switching::switching_energy(&cfg.energy)?,
        "fJ",
    );
    num(
        &mut t,
        &mut out,
        "onset_voltage",
        cfg.electro.params.onset_voltage(),
        "V",
    );
    num(
        &mut t,
        &mut out,
        "adiabatic_limit",
        switching::adiabatic_limit_mhz(p),
        "MHz",
    );
    out.tables.push(("metrics.csv".into(), t));
    Ok(out)
}

pub fn run_command(cmd: &Command, cfg: &RunConfig, seed: u64) -> Result<RunOutput> {
    match cmd {
        Command::Spectrum => run_spectrum(cfg),
        Command::Stark => run_stark(cfg),
        Command::Switch { frequency_mhz } => run_switch(cfg, *frequency_mhz),
        Command::Fit { kind, data, free } => {
            run_fit(cfg, *kind, data.as_deref(), free.as_deref(), seed)
        }
        Command::Metrics => run_metrics(cfg),
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub manifest: PathBuf,
    pub summary: BTreeMap<String, Value>,
    pub warnings: Vec<String>,
}

/// Loads the configuration, runs `cmd`, writes every table plus
/// `manifest.toml` into the output directory.
pub fn execute(
    cmd: &Command,
    source: &ConfigSource,
    out_dir: Option<&Path>,
    seed: Option<u64>,
) -> Result<Outcome> {
    let loaded = load_config(source)?;
    let cfg = &loaded.config;
    let seed = seed.unwrap_or(cfg.seed);
    let dir = out_dir
        .map(Path::to_path_buf)
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let mut manifest = RunManifest::new(cmd.name(), loaded.source.clone(), &loaded.bytes, seed);
    manifest.config = cfg.resolved.clone();
    manifest
        .config
        .insert("seed".into(), Value::Integer(seed as i64));

    let output = run_command(cmd, cfg, seed)?;

    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut files = Vec::new();
    for (name, table) in &output.tables {
        let path = dir.join(name);
        table.write(&path)?;
        manifest
            .outputs
            .insert(name.clone(), io::sha256_hex(table.render().as_bytes()));
        files.push(path);
    }
    manifest.inputs = output.inputs.clone();
    manifest.summary = output.summary.clone();
    manifest.warnings = output.warnings.clone();
    let manifest_path = dir.join("manifest.toml");
    manifest.write(&manifest_path)?;
    Ok(Outcome {
        out_dir: dir,
        files,
        manifest: manifest_path,
        summary: output.summary,
        warnings: output.warnings,
    })
}
