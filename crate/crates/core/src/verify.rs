//! Self-check suite run by `usc-raman verify`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::dissipation::{build_liouvillian, standard_channels};
use crate::error::Result;
use crate::floquet::nullspace_state;
use crate::model::{adaptive_n_fock, build_hamiltonian, diagonalize, drive_operator, Layout, ModelParams, MIN_CONVERGED_STATES};
use crate::operators::{hermiticity_defect, trace, trace_norm_hermitian};
use crate::problem::DrivenProblem;
use crate::propagate::propagate_oracle;
use crate::raman::RamanSystem;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }
}

type CheckFn = fn(&ModelParams) -> Result<(bool, String)>;

/// Periods integrated by the propagation cross-check (2²⁰, many relaxation times).
pub const PROPAGATION_PERIODS: f64 = 1048576.0;

/// Runs every check around `base`; numerical failures inside a check are
/// reported as a failed check rather than aborting the suite.
pub fn run_suite(base: &ModelParams) -> Vec<Check> {
    let checks: [(&'static str, CheckFn); 7] = [
        ("decoupled-ladder", decoupled_ladder),
        ("jaynes-cummings-splitting", jaynes_cummings),
        ("truncation-convergence", truncation),
        ("floquet-invariants", floquet_invariants),
        ("floquet-vs-propagation", floquet_vs_propagation),
        ("gibbs-thermal-state", gibbs),
        ("parity-selection", parity_selection),
    ];
    checks
        .iter()
        .map(|(name, f)| match f(base) {
            Ok((ok, detail)) => Check::new(name, ok, detail),
            Err(e) => Check::new(name, false, format!("error: {e}")),
        })
        .collect()
}

fn decoupled_ladder(base: &ModelParams) -> Result<(bool, String)> {
    let p = ModelParams {
        eta: 0.0,
        eta_s: 0.0,
        ..base.clone()
    };
    let n = 8;
    let eig = diagonalize(&build_hamiltonian(&p, Layout::new(n, true))?, None)?;
    let mut expect = Vec::new();
    for k in 0..n {
        for q in [-1.0, 1.0] {
            for s in [-1.0, 1.0] {
                expect.push(k as f64 * p.omega_c + q * p.omega_q / 2.0 + s * p.omega_s / 2.0);
            }
        }
    }
    expect.sort_by(f64::total_cmp);
    let err = eig
        .energies()
        .iter()
        .zip(&expect)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok((err < 1e-12, format!("max deviation {err:.3e}")))
}

fn jaynes_cummings(base: &ModelParams) -> Result<(bool, String)> {
    let eta = 1e-3;
    let p = ModelParams {
        eta,
        theta: 0.0,
        omega_q: base.omega_c,
        ..base.clone()
    };
    let eig = diagonalize(&build_hamiltonian(&p, Layout::new(8, false))?, None)?;
    let split = eig.energies()[2] - eig.energies()[1];
    let rel = (split / (2.0 * eta * p.omega_c) - 1.0).abs();
    Ok((rel < 5e-3, format!("splitting {split:.6e}, relative error {rel:.3e}")))
}

fn truncation(base: &ModelParams) -> Result<(bool, String)> {
    let n = adaptive_n_fock(base, MIN_CONVERGED_STATES, None)?;
    let a = diagonalize(&build_hamiltonian(base, Layout::new(n, false))?, None)?;
    let b = diagonalize(&build_hamiltonian(base, Layout::new(n + 4, false))?, None)?;
    let err = (0..MIN_CONVERGED_STATES)
        .map(|k| (a.energies()[k] - b.energies()[k]).abs())
        .fold(0.0, f64::max);
    Ok((err < 1e-8, format!("n_fock {n} vs {}: max level shift {err:.3e}", n + 4)))
}

fn floquet_invariants(base: &ModelParams) -> Result<(bool, String)> {
    let sol = DrivenProblem::build(base)?.solve()?;
    let tr = (trace(&sol.rho0).re - 1.0).abs();
    let herm = hermiticity_defect(&sol.rho0);
    let ok = tr < 1e-10 && herm < 1e-10 && sol.min_eigenvalue >= -1e-8 && sol.convergence_delta < 1e-8;
    Ok((
        ok,
        format!(
            "depth {}, delta {:.3e}, trace error {tr:.1e}, hermiticity {herm:.1e}, min eigenvalue {:.3e}",
            sol.n_floquet_used, sol.convergence_delta, sol.min_eigenvalue
        ),
    ))
}

fn floquet_vs_propagation(base: &ModelParams) -> Result<(bool, String)> {
    let problem = DrivenProblem::build(base)?;
    let sol = problem.solve()?;
    let period = 2.0 * PI / base.omega_l;
    let prop = propagate_oracle(&problem.parts, PROPAGATION_PERIODS * period, 64)?;
    let diff = trace_norm_hermitian(&(&sol.rho0 - &prop.rho_avg));
    Ok((
        diff < 1e-5 && prop.max_trace_error < 1e-8,
        format!("trace distance {diff:.3e}, propagation trace error {:.1e}", prop.max_trace_error),
    ))
}

fn gibbs(base: &ModelParams) -> Result<(bool, String)> {
    let t = 0.15;
    let p = ModelParams {
        temperature: t,
        drive_amplitude: 0.0,
        ..base.clone()
    };
    let n = adaptive_n_fock(&p, MIN_CONVERGED_STATES, None)?;
    let layout = Layout::new(n, false);
    let eig = diagonalize(&build_hamiltonian(&p, layout)?, None)?.truncated(MIN_CONVERGED_STATES);
    let jumps = standard_channels(&p, &eig, layout)?;
    let parts = build_liouvillian(&p, &eig, &drive_operator(&p, layout), &jumps)?;
    let rho = nullspace_state(&parts.l0)?.rho;
    let ratio = rho[(1, 1)].re / rho[(0, 0)].re;
    let expect = (-eig.transition(1, 0) / t).exp();
    let rel = (ratio / expect - 1.0).abs();
    Ok((rel < 0.2, format!("p1/p0 {ratio:.4e} vs Boltzmann {expect:.4e}, relative {rel:.2e}")))
}

fn parity_selection(base: &ModelParams) -> Result<(bool, String)> {
    let sys = RamanSystem::new(&ModelParams {
        theta: 0.0,
        ..base.clone()
    })?;
    let m10 = sys.amplitude(0, 1, base.omega_l).value.norm();
    let m30 = sys.amplitude(0, 3, base.omega_l).value.norm();
    Ok((m10 < 1e-12 && m30 > 1e-3, format!("|M_10| {m10:.3e}, |M_30| {m30:.3e}")))
}
