//! Sensor emission spectra and excitation-emission maps.
//!
//! Every `(ω_L, ω_s)` point rebuilds and rediagonalizes the full problem with
//! the sensor tuned to `ω_s`; the emission rate is `Tr[ρ₀ Σₛ⁻Σₛ⁺]`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::operators::Operator;
use crate::problem::DrivenProblem;
use crate::sweep::parallel_map;

/// Smallest eigenvalue of `ρ₀` still treated as round-off.
pub const POSITIVITY_TOLERANCE: f64 = 1e-8;

/// Emission rate `Tr[ρ σ†σ]` for a dressed sensor lowering operator `σ`.
pub fn sensor_emission(rho0: &Operator, sigma: &Operator) -> Result<f64> {
    if rho0.shape() != sigma.shape() {
        return Err(Error::Assembly(format!(
            "density matrix {:?} and sensor operator {:?} differ in shape",
            rho0.shape(),
            sigma.shape()
        )));
    }
    let a = sigma.adjoint() * sigma;
    let mut z = crate::operators::ZERO;
    let mut scale = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let t = rho0[(i, j)] * a[(j, i)];
            z += t;
            scale += t.norm();
        }
    }
    let tol = 1e-10 * scale;
    // Tr[ρA] ≥ λ_min(ρ)·Tr A for PSD A, so the positivity tolerance on ρ bounds round-off here
    let floor = POSITIVITY_TOLERANCE * crate::operators::trace(&a).re;
    if z.im.abs() > tol.max(f64::MIN_POSITIVE) {
        return Err(Error::Numerical(format!(
            "sensor emission has imaginary part {:.3e} (real {:.3e})",
            z.im, z.re
        )));
    }
    if z.re < -tol.max(floor) {
        return Err(Error::Numerical(format!("negative sensor emission {:.3e}", z.re)));
    }
    Ok(z.re.max(0.0))
}

/// Solver diagnostics for one grid point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointDiagnostics {
    pub n_floquet_used: usize,
    pub convergence_delta: f64,
    pub residual: f64,
    pub min_eigenvalue: f64,
    pub retained_states: usize,
    pub regularized: bool,
}

/// Emission at a single `(ω_L, ω_s)` with a fixed cavity truncation.
pub fn emission_at(p: &ModelParams, n_fock: usize, omega_s: f64, omega_l: f64) -> Result<(f64, PointDiagnostics)> {
    let q = ModelParams {
        omega_s,
        omega_l,
        ..p.clone()
    };
    let problem = DrivenProblem::with_fock(&q, n_fock)?;
    let sol = problem.solve()?;
    let s = sensor_emission(&sol.rho0, &problem.sensor_lowering()?)?;
    Ok((
        s,
        PointDiagnostics {
            n_floquet_used: sol.n_floquet_used,
            convergence_delta: sol.convergence_delta,
            residual: sol.residual,
            min_eigenvalue: sol.min_eigenvalue,
            retained_states: problem.eig.len(),
            regularized: sol.is_flagged(),
        },
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumCurve {
    pub omega_s_grid: Vec<f64>,
    /// Raw emission rates (arbitrary but consistent units across curves).
    pub intensity: Vec<f64>,
    pub params_snapshot: ModelParams,
    pub n_fock: usize,
    pub diagnostics: Vec<PointDiagnostics>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumMap {
    pub omega_l_grid: Vec<f64>,
    pub omega_s_grid: Vec<f64>,
    /// Row per `ω_L`, scaled so the largest entry is 1.
    pub intensity: Vec<Vec<f64>>,
    /// Raw value of the map maximum (the divisor applied to `intensity`).
    pub normalization: f64,
    pub temperature: f64,
    pub params_snapshot: ModelParams,
    pub n_fock: usize,
    pub diagnostics: Vec<PointDiagnostics>,
}

pub fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::config(name, "grid is empty"));
    }
    if grid.iter().any(|x| !x.is_finite() || *x <= 0.0) {
        return Err(Error::config(name, "grid values must be finite and positive"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config(name, "grid must be strictly ascending"));
    }
    Ok(())
}

/// Truncation shared by all points of a sweep whose largest drive frequency is `omega_l_max`.
pub fn sweep_fock(p: &ModelParams, omega_l_max: f64) -> Result<usize> {
    ModelParams {
        omega_l: omega_l_max,
        ..p.clone()
    }
    .resolve_n_fock()
}

pub fn emission_spectrum(p: &ModelParams, omega_s_grid: &[f64], workers: usize) -> Result<SpectrumCurve> {
    p.validate()?;
    check_grid("omega_s_grid", omega_s_grid)?;
    let n_fock = sweep_fock(p, p.omega_l)?;
    let points = parallel_map(omega_s_grid.len(), workers, |i| emission_at(p, n_fock, omega_s_grid[i], p.omega_l))?;
    let (intensity, diagnostics) = points.into_iter().unzip();
    Ok(SpectrumCurve {
        omega_s_grid: omega_s_grid.to_vec(),
        intensity,
        params_snapshot: p.clone(),
        n_fock,
        diagnostics,
    })
}

/// Map over `ω_L × ω_s`; failing points are reported by row-major flat index.
pub fn excitation_emission_map(
    p: &ModelParams,
    omega_l_grid: &[f64],
    omega_s_grid: &[f64],
    workers: usize,
) -> Result<SpectrumMap> {
    p.validate()?;
    check_grid("omega_L_grid", omega_l_grid)?;
    check_grid("omega_s_grid", omega_s_grid)?;
    let n_fock = sweep_fock(p, *omega_l_grid.last().expect("non-empty"))?;
    let ns = omega_s_grid.len();
    let points = parallel_map(omega_l_grid.len() * ns, workers, |k| {
        emission_at(p, n_fock, omega_s_grid[k % ns], omega_l_grid[k / ns])
    })?;
    let (raw, diagnostics): (Vec<f64>, Vec<_>) = points.into_iter().unzip();
    let normalization = raw.iter().copied().fold(0.0, f64::max);
    let scale = if normalization > 0.0 { 1.0 / normalization } else { 1.0 };
    let intensity = raw.chunks(ns).map(|row| row.iter().map(|x| x * scale).collect()).collect();
    Ok(SpectrumMap {
        omega_l_grid: omega_l_grid.to_vec(),
        omega_s_grid: omega_s_grid.to_vec(),
        intensity,
        normalization,
        temperature: p.temperature,
        params_snapshot: p.clone(),
        n_fock,
        diagnostics,
    })
}

/// Area of `intensity − baseline` over `[center − hw, center + hw]`, the
/// baseline being the straight line through the curve at the window edges.
pub fn peak_intensity(grid: &[f64], intensity: &[f64], center: f64, half_window: f64) -> Result<f64> {
    if grid.len() != intensity.len() || grid.len() < 2 {
        return Err(Error::Range("curve needs at least two points with matching lengths".into()));
    }
    if !(half_window > 0.0) {
        return Err(Error::Range(format!("half window must be positive, got {half_window}")));
    }
    let (lo, hi) = (center - half_window, center + half_window);
    let (first, last) = (grid[0], grid[grid.len() - 1]);
    if lo < first || hi > last {
        return Err(Error::Range(format!(
            "window [{lo}, {hi}] lies outside the grid [{first}, {last}]"
        )));
    }
    let interp = |x: f64| {
        let k = grid.partition_point(|g| *g < x).clamp(1, grid.len() - 1);
        let (x0, x1) = (grid[k - 1], grid[k]);
        let w = (x - x0) / (x1 - x0);
        intensity[k - 1] * (1.0 - w) + intensity[k] * w
    };
    let mut xs = vec![lo];
    let mut ys = vec![interp(lo)];
    for (x, y) in grid.iter().zip(intensity) {
        if *x > lo && *x < hi {
            xs.push(*x);
            ys.push(*y);
        }
    }
    xs.push(hi);
    ys.push(interp(hi));
    let (y_lo, y_hi) = (ys[0], ys[ys.len() - 1]);
    let baseline = |x: f64| y_lo + (y_hi - y_lo) * (x - lo) / (hi - lo);
    let mut area = 0.0;
    for k in 1..xs.len() {
        let a = ys[k - 1] - baseline(xs[k - 1]);
        let b = ys[k] - baseline(xs[k]);
        area += 0.5 * (a + b) * (xs[k] - xs[k - 1]);
    }
    Ok(area.max(0.0))
}

impl SpectrumCurve {
    pub fn peak_intensity(&self, center: f64, half_window: f64) -> Result<f64> {
        peak_intensity(&self.omega_s_grid, &self.intensity, center, half_window)
    }

    /// Indices of strict interior local maxima.
    pub fn local_maxima(&self) -> Vec<usize> {
        local_maxima(&self.intensity)
    }
}

pub fn local_maxima(y: &[f64]) -> Vec<usize> {
    (1..y.len().saturating_sub(1))
        .filter(|&i| y[i] > y[i - 1] && y[i] >= y[i + 1])
        .collect()
}

/// Golden-section search for the emission maximum in `[lo, hi]` at fixed `ω_L`.
/// Returns `(ω_s, intensity)`.
pub fn refine_peak(p: &ModelParams, n_fock: usize, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    if !(lo < hi) || !(tol > 0.0) {
        return Err(Error::Range(format!("bad refinement bracket [{lo}, {hi}] / tol {tol}")));
    }
    let f = |x: f64| emission_at(p, n_fock, x, p.omega_l).map(|r| r.0);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc > fd { (c, fc) } else { (d, fd) })
}

/// Full width at half maximum of the highest peak in the curve, by linear
/// interpolation of the half-height crossings.
pub fn fwhm(grid: &[f64], y: &[f64]) -> Option<f64> {
    let (imax, ymax) = y.iter().copied().enumerate().max_by(|a, b| a.1.total_cmp(&b.1))?;
    let half = ymax / 2.0;
    let mut left = None;
    for i in (0..imax).rev() {
        if y[i] <= half {
            let w = (half - y[i]) / (y[i + 1] - y[i]);
            left = Some(grid[i] + w * (grid[i + 1] - grid[i]));
            break;
        }
    }
    let mut right = None;
    for i in imax + 1..y.len() {
        if y[i] <= half {
            let w = (y[i - 1] - half) / (y[i - 1] - y[i]);
            right = Some(grid[i - 1] + w * (grid[i] - grid[i - 1]));
            break;
        }
    }
    Some(right? - left?)
}
