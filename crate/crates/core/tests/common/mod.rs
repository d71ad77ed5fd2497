//! Independent reference computations used by the integration tests.
//! Nothing here calls into the library's physics.
#![allow(dead_code)]

use nalgebra::Matrix2;
use num_complex::Complex64;

pub const Q_E: f64 = 1.602_176_634e-19;
pub const H_PLANCK: f64 = 6.626_070_15e-34;
pub const C_LIGHT: f64 = 299_792_458.0;
pub const EPS0: f64 = 8.854_187_812_8e-12;

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

// ---- constants ----

/// Hz per meV from E = hν.
pub fn hz_per_mev() -> f64 {
    1e-3 * Q_E / H_PLANCK
}

/// Photon energy in meV at vacuum wavelength `nm`.
pub fn photon_mev(nm: f64) -> f64 {
    H_PLANCK * C_LIGHT / (nm * 1e-9) / Q_E * 1e3
}

// ---- Poisson ----

fn rk4_poisson(psi: f64, dpsi: f64, rho_over_eps: f64, from: f64, to: f64, n: usize) -> (f64, f64) {
    // y = (ψ, ψ'), ψ'' = -ρ/ε (constant in the depletion region)
    let h = (to - from) / n as f64;
    let f = |_y: (f64, f64)| -> (f64, f64) { (_y.1, -rho_over_eps) };
    let mut y = (psi, dpsi);
    for _ in 0..n {
        let k1 = f(y);
        let k2 = f((y.0 + 0.5 * h * k1.0, y.1 + 0.5 * h * k1.1));
        let k3 = f((y.0 + 0.5 * h * k2.0, y.1 + 0.5 * h * k2.1));
        let k4 = f((y.0 + h * k3.0, y.1 + h * k3.1));
        y.0 += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        y.1 += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
    }
    y
}

/// Potential drop across a fully depleted slab of width `w` (m), found by
/// integrating Poisson's equation inward from the neutral edge where ψ = ψ' = 0.
fn poisson_drop(nd_m3: f64, eps: f64, w: f64) -> f64 {
    rk4_poisson(0.0, 0.0, Q_E * nd_m3 / eps, w, 0.0, 200)
        .0
        .abs()
}

/// Depletion width (μm) by shooting on the slab width until the potential
/// drop equals φ + V.
pub fn poisson_depletion_um(nd_cm3: f64, phi: f64, eps_r: f64, v: f64) -> f64 {
    let nd = nd_cm3 * 1e6;
    let eps = EPS0 * eps_r;
    let target = phi + v;
    let (mut lo, mut hi) = (0.0, 1e-9);
    while poisson_drop(nd, eps, hi) < target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if poisson_drop(nd, eps, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * hi {
            break;
        }
    }
    0.5 * (lo + hi) * 1e6
}

/// |E| (V/μm) at depth `x_um` by integrating the oracle solution from the
/// depletion edge.
pub fn poisson_field_v_per_um(nd_cm3: f64, phi: f64, eps_r: f64, v: f64, x_um: f64) -> f64 {
    let w = poisson_depletion_um(nd_cm3, phi, eps_r, v) * 1e-6;
    let x = x_um * 1e-6;
    if x >= w {
        return 0.0;
    }
    let (_, dpsi) = rk4_poisson(0.0, 0.0, Q_E * nd_cm3 * 1e6 / (EPS0 * eps_r), w, x, 200);
    dpsi.abs() * 1e-6
}

// ---- eigenvalues ----

/// Eigenvalues of the non-Hermitian 2×2 coupling matrix via a generic
/// complex Schur decomposition, sorted by real part.
pub fn schur_modes(wc: f64, wd: f64, g: f64, kappa: f64, gamma: f64) -> [Complex64; 2] {
    let m = Matrix2::new(
        Complex64::new(wc, -kappa),
        Complex64::new(g, 0.0),
        Complex64::new(g, 0.0),
        Complex64::new(wd, -gamma),
    );
    let ev = m.schur().eigenvalues().expect("triangular Schur form");
    let mut out = [ev[0], ev[1]];
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    out
}

// ---- quadrature ----

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
}

#[allow(clippy::too_many_arguments)]
fn adapt(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    whole: f64,
    m: f64,
    fm: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let (left, lm, flm) = simpson(f, a, fa, m, fm);
    let (right, rm, frm) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adapt(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)
        + adapt(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature of `f` on [a, b].
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fb) = (f(a), f(b));
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    adapt(f, a, fa, b, fb, whole, m, fm, tol, 50)
}

/// ∫ f over the real line via x = c + s·tan θ.
pub fn integrate_real_line(f: &dyn Fn(f64) -> f64, c: f64, s: f64, tol: f64) -> f64 {
    let half = std::f64::consts::FRAC_PI_2 * (1.0 - 1e-12);
    let g = |th: f64| {
        let t = th.tan();
        f(c + s * t) * s * (1.0 + t * t)
    };
    integrate(&g, -half, half, tol)
}

// ---- RC filter ----

/// Exact first-order low-pass response to a square wave that is high on
/// [nT, (n + duty)T), starting from `v_low` at t = 0. Times in ns, τ in ns.
pub fn rc_exact(t: f64, v_low: f64, v_high: f64, period: f64, duty: f64, tau: f64) -> f64 {
    let mut v = v_low;
    let mut t0 = 0.0;
    loop {
        let n = (t0 / period + 1e-12).floor();
        let phase = t0 - n * period;
        let (level, seg_end) = if phase < duty * period - 1e-12 {
            (v_high, n * period + duty * period)
        } else {
            (v_low, (n + 1.0) * period)
        };
        let stop = seg_end.min(t);
        v = level + (v - level) * (-(stop - t0) / tau).exp();
        if seg_end >= t {
            return v;
        }
        t0 = seg_end;
    }
}
