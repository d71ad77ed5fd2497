//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

mod common;

use std::path::Path;
use std::time::{Duration, Instant};

use common::*;
use num_complex::Complex64;
use qdswitch::cli::{self, switch_model, Command, ConfigSource, FitKind};
use qdswitch::cqed::*;
use qdswitch::electrostatics::*;
use qdswitch::fitting::lm::{central_difference_jacobian, LeastSquaresProblem};
use qdswitch::fitting::*;
use qdswitch::io::csv::format_number;
use qdswitch::io::RunConfig;
use qdswitch::switching::*;
use qdswitch::units::{angular, ordinary};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let r = f();
    let took = start.elapsed();
    let note = format!(
        " [{:.3} s, limit {} s]",
        took.as_secs_f64(),
        limit.as_secs_f64()
    );
    match r {
        Ok(d) if took < limit => Ok(d + &note),
        Ok(d) => Err(d + &note + " too slow"),
        Err(d) => Err(d + &note),
    }
}

fn c1_stark_magnitude() -> Outcome {
    timed(Duration::from_secs(1), || {
        let e = ElectroConfig::reference();
        let s = e.evaluate(7.0).map_err(|e| e.to_string())?.shift_mev.abs();
        check(
            (0.25..=0.35).contains(&s),
            format!("|dE(7 V)| = {s:.4} meV in [0.25, 0.35]"),
        )
    })
}

fn c2_onset() -> Outcome {
    let p = ElectrostaticParams::reference();
    let v = p.onset_voltage();
    let xd = depletion_width(&p, v).map_err(|e| e.to_string())?;
    check(
        (3.0..=4.5).contains(&v) && (xd - 0.75).abs() < 1e-9,
        format!("onset {v:.3} V in [3.0, 4.5], x_d there {xd:.6} um"),
    )
}

fn c3_kappa() -> Outcome {
    let k = kappa_from_q(&OpticalFrame::new(935.0, Some(4000.0)).unwrap())
        .map_err(|e| e.to_string())?;
    let k = ordinary(k);
    check(
        (39.0..=41.0).contains(&k),
        format!("kappa/2pi = {k:.3} GHz in [39, 41]"),
    )
}

fn c4_regime() -> Outcome {
    let p = CqedParams::from_ghz(0.0, 0.0, 20.0, 40.0, 0.1);
    let r = coupling_regime(&p);
    let s = ordinary(polariton_modes(&p).splitting());
    check(
        r == CouplingRegime::Onset && (2.0..=4.0).contains(&s),
        format!("regime {r}, splitting {s:.3} GHz in [2, 4]"),
    )
}

fn c5_contrast() -> Outcome {
    let cfg = RunConfig::reference();
    let (model, fit) = switch_model(&cfg).map_err(|e| e.to_string())?;
    let fit = fit.ok_or("preset has no contrast targets")?;
    let dc = model
        .dc_on_off(10.0, cfg.contrast_v_off, cfg.probe_frequency())
        .map_err(|e| e.to_string())?;
    check(
        fit.result.converged && fit.max_ratio_error < 0.05 && (1.4..=1.6).contains(&dc),
        format!(
            "converged {}, max residual {:.2e}, DC on/off(10 V) {dc:.4}, gamma/2pi {:.3} GHz, s {:.4}",
            fit.result.converged,
            fit.max_ratio_error,
            ordinary(model.cqed.gamma),
            model.electro.screening.value()
        ),
    )
}

fn c6_modulation() -> Outcome {
    timed(Duration::from_secs(10), || {
        let cfg = RunConfig::reference();
        let (model, _) = switch_model(&cfg).map_err(|e| e.to_string())?;
        let probe = cfg.probe_frequency();
        let ratio = |f: f64| -> Result<f64, String> {
            let mut d = cfg.drive;
            d.frequency_mhz = f;
            simulate_switching(&d, &model, probe)
                .and_then(|r| r.on_off())
                .map_err(|e| e.to_string())
        };
        let (r80, r150) = (ratio(80.0)?, ratio(150.0)?);
        check(
            (1.35..=1.5).contains(&r80) && (1.2..=1.4).contains(&r150) && r150 < r80,
            format!("on/off 80 MHz {r80:.4} in [1.35, 1.5], 150 MHz {r150:.4} in [1.2, 1.4]"),
        )
    })
}

fn c7_figures_of_merit() -> Outcome {
    let p = CqedParams::reference();
    let bw = max_bandwidth(&p);
    let weak = weak_coupling_bandwidth(&p);
    let u = switching_energy(&EnergyBudget::reference()).map_err(|e| e.to_string())?;
    check(
        (bw - 40.0).abs() < 1e-9 && (weak - 20.0).abs() < 0.05 && (0.1..=10.0).contains(&u),
        format!(
            "bandwidth {bw} GHz, weak-coupling {weak:.3} GHz, energy {u:.4} fJ (1 fJ within x10)"
        ),
    )
}

// ---- criterion 8 ----

fn poisson_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let nd = rng.random_range(1e15..1e17);
        let phi = rng.random_range(0.1..1.2);
        let eps = rng.random_range(1.0..20.0);
        let v = rng.random_range(0.0..30.0);
        let p = ElectrostaticParams::new(nd, phi, eps, 0.75).map_err(|e| e.to_string())?;
        let ours = depletion_width(&p, v).map_err(|e| e.to_string())?;
        worst = worst.max(rel(ours, poisson_depletion_um(nd, phi, eps, v)));
    }
    check(
        worst < 1e-6,
        format!("Poisson oracle x_d, 200 draws, worst rel {worst:.1e} < 1e-6"),
    )
}

fn eigen_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let p = CqedParams::from_ghz(
            rng.random_range(-100.0..100.0),
            rng.random_range(-100.0..100.0),
            rng.random_range(0.0..60.0),
            rng.random_range(0.01..80.0),
            rng.random_range(0.01..20.0),
        );
        let m = polariton_modes(&p);
        let o = schur_modes(p.cavity_freq, p.dot_freq, p.coupling, p.kappa, p.gamma);
        let scale = [p.cavity_freq, p.dot_freq, p.coupling, p.kappa, p.gamma]
            .iter()
            .fold(0.0f64, |s, x| s.max(x.abs()));
        let d = |a: Complex64, b: Complex64| (a - b).norm();
        let err =
            (d(m.lower, o[0]).max(d(m.upper, o[1]))).min(d(m.lower, o[1]).max(d(m.upper, o[0])));
        worst = worst.max(err / scale);
    }
    check(
        worst < 1e-10,
        format!("Schur eigen oracle, 1000 draws, worst rel {worst:.1e} < 1e-10"),
    )
}

fn dip_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let w0 = rng.random_range(-50.0..50.0);
        let p = CqedParams::from_ghz(
            w0,
            w0,
            rng.random_range(0.0..60.0),
            rng.random_range(0.5..80.0),
            rng.random_range(0.05..20.0),
        );
        let bare = CqedParams { coupling: 0.0, ..p };
        let ratio = reflectivity_at(&p, p.cavity_freq) / reflectivity_at(&bare, p.cavity_freq);
        worst = worst.max((ratio - (1.0 + p.cooperativity()).powi(-2)).abs());
    }
    check(
        worst < 1e-9,
        format!("dip ratio (1+C)^-2, 100 draws, worst {worst:.1e} < 1e-9"),
    )
}

fn fit_round_trips() -> Outcome {
    let e = ElectrostaticParams::reference();
    let c = StarkCoefficients::reference();
    let pts = (0..=100)
        .map(|i| {
            let v = 0.1 * i as f64;
            (v, stark_shift(&c, -field_at_cavity(&e, v).unwrap()))
        })
        .collect();
    let sf =
        fit_stark_curve(&ShiftDataset::new(pts, None).unwrap(), &e).map_err(|e| e.to_string())?;
    let stark = rel(sf.coefficients.mu, c.mu).max(rel(sf.coefficients.alpha, c.alpha));

    let truth = CqedParams::from_ghz(0.0, 0.0, 20.0, 40.0, 5.0);
    let grid = linear_grid(angular(-150.0), angular(150.0), 601);
    let data = reflectivity_spectrum(&truth, &grid).map_err(|e| e.to_string())?;
    let free = [
        SpectrumParam::Coupling,
        SpectrumParam::Kappa,
        SpectrumParam::Gamma,
    ];
    let mut spec = 0.0f64;
    for (g, k, y) in [(1.0, 1.0, 1.0), (1.2, 0.8, 1.2), (0.8, 1.2, 0.8)] {
        let start = CqedParams {
            coupling: truth.coupling * g,
            kappa: truth.kappa * k,
            gamma: truth.gamma * y,
            ..truth
        };
        let f = fit_spectrum(&data, &start, &free).map_err(|e| e.to_string())?;
        spec = spec
            .max(rel(f.params.coupling, truth.coupling))
            .max(rel(f.params.kappa, truth.kappa))
            .max(rel(f.params.gamma, truth.gamma));
    }
    check(
        stark < 1e-8 && spec < 1e-8,
        format!("noiseless fit round trips: Stark {stark:.1e}, spectrum {spec:.1e} < 1e-8"),
    )
}

fn jacobian_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let t = CqedParams {
            amplitude: rng.random_range(0.5..1.5),
            background: rng.random_range(0.0..0.1),
            ..CqedParams::from_ghz(
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(5.0..40.0),
                rng.random_range(10.0..60.0),
                rng.random_range(0.5..10.0),
            )
        };
        let grid = linear_grid(angular(-150.0), angular(150.0), 201);
        let data = reflectivity_spectrum(&t, &grid).map_err(|e| e.to_string())?;
        let problem = SpectrumProblem::new(&data, t, &SpectrumParam::ALL);
        let x = problem.encode(&t).map_err(|e| e.to_string())?;
        let a = problem.jacobian(&x).map_err(|e| e.to_string())?;
        let n =
            central_difference_jacobian(|p| problem.residuals(p), &x).map_err(|e| e.to_string())?;
        for j in 0..x.len() {
            let scale = a.column(j).amax().max(1e-12);
            for i in 0..a.nrows() {
                worst = worst.max((a[(i, j)] - n[(i, j)]).abs() / scale);
            }
        }
    }
    check(
        worst < 1e-6,
        format!("analytic Jacobian vs central differences, worst rel {worst:.1e} < 1e-6"),
    )
}

fn rc_attenuation() -> Outcome {
    let mut worst = 0.0f64;
    for f in [10.0, 50.0, 80.0, 100.0, 150.0, 300.0] {
        let d = DriveSpec::reference(f);
        let got = fundamental_attenuation(&d).map_err(|e| e.to_string())?;
        worst = worst.max(rel(got, rc_transfer_magnitude(f, d.rc_cutoff_mhz)));
    }
    check(
        worst < 0.01,
        format!("RC fundamental vs |H(f)|, worst rel {worst:.1e} < 1e-2"),
    )
}

fn csv_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..100_000 {
        let x = f64::from_bits(rng.random::<u64>());
        if !x.is_finite() {
            continue;
        }
        let back: f64 = format_number(x).parse().map_err(|e| format!("{e}"))?;
        if back != x {
            worst = worst.max(rel(back, x));
        }
    }
    check(
        worst < 1e-12,
        format!("CSV number round trip, 1e5 draws, worst rel {worst:.1e} < 1e-12"),
    )
}

fn deterministic_reruns() -> Outcome {
    let cmds = [
        Command::Spectrum,
        Command::Stark,
        Command::Switch {
            frequency_mhz: None,
        },
        Command::Fit {
            kind: FitKind::Spectrum,
            data: None,
            free: None,
        },
        Command::Fit {
            kind: FitKind::Stark,
            data: None,
            free: None,
        },
        Command::Metrics,
    ];
    let src = ConfigSource::Preset("paper".into());
    let run = |dir: &Path| -> Result<Vec<Vec<u8>>, String> {
        let mut out = Vec::new();
        for (i, c) in cmds.iter().enumerate() {
            let o = cli::execute(c, &src, Some(&dir.join(i.to_string())), Some(42))
                .map_err(|e| e.to_string())?;
            for f in o.files {
                out.push(std::fs::read(f).map_err(|e| e.to_string())?);
            }
        }
        Ok(out)
    };
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (x, y) = (run(a.path())?, run(b.path())?);
    check(
        x == y,
        format!("{} output files byte-identical across reruns", x.len()),
    )
}

fn c8_properties() -> Outcome {
    timed(Duration::from_secs(60), || {
        let parts = [
            poisson_equivalence(),
            eigen_equivalence(),
            dip_identity(),
            fit_round_trips(),
            jacobian_check(),
            rc_attenuation(),
            csv_round_trip(),
            deterministic_reruns(),
        ];
        let failed = parts.iter().filter(|p| p.is_err()).count();
        let detail = parts
            .iter()
            .map(|p| match p {
                Ok(d) => format!("\n    ok   {d}"),
                Err(d) => format!("\n    FAIL {d}"),
            })
            .collect::<String>();
        check(
            failed == 0,
            format!(
                "{} of {} property checks hold{detail}",
                parts.len() - failed,
                parts.len()
            ),
        )
    })
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 Stark magnitude", c1_stark_magnitude),
        ("2 onset voltage", c2_onset),
        ("3 kappa from Q", c3_kappa),
        ("4 regime classification", c4_regime),
        ("5 contrast calibration", c5_contrast),
        ("6 modulated switching", c6_modulation),
        ("7 figures of merit", c7_figures_of_merit),
        ("8 property suites", c8_properties),
    ];
    let mut failures = 0;
    for (name, f) in criteria {
        match f() {
            Ok(d) => println!("PASS  {name}: {d}"),
            Err(d) => {
                failures += 1;
                println!("FAIL  {name}: {d}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
