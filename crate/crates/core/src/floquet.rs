//! Time-averaged steady state of the periodically driven master equation.
//!
//! Writing the long-time state as `ρ(t) = Σₙ ρₙ e^{inω_L t}` and balancing
//! harmonics gives, for `n ≥ 1`,
//!
//! ```text
//! (L0 − inω_L) ρₙ   + L₊ ρₙ₋₁ + L₋ ρₙ₊₁ = 0
//! (L0 + inω_L) ρ₋ₙ  + L₋ ρ₋ₙ₊₁ + L₊ ρ₋ₙ₋₁ = 0
//! ```
//!
//! With `ρₙ = S₊ₙ ρₙ₋₁` and `ρ₋ₙ = S₋ₙ ρ₋ₙ₊₁` this closes into
//!
//! ```text
//! S₊ₙ = −[L0 − inω_L + L₋ S₊₍ₙ₊₁₎]⁻¹ L₊
//! S₋ₙ = −[L0 + inω_L + L₊ S₋₍ₙ₊₁₎]⁻¹ L₋
//! ```
//!
//! seeded with zero beyond the maximum depth, and `ρ₀` spans the kernel of
//! `L0 + L₋S₊₁ + L₊S₋₁`.

use log::warn;
use nalgebra::DMatrix;

use crate::dense::{lu_solve, matmul, svd_right};
use crate::dissipation::LiouvillianParts;
use crate::error::{Error, Result};
use crate::operators::{devectorize, trace, trace_norm_hermitian, vectorize, Operator, SuperOperator, C64};

/// Diagonal shift applied when a recursion level is numerically singular.
pub const REGULARIZATION: f64 = 1e-12;
/// Relative singular-value threshold for counting kernel dimensions.
pub const KERNEL_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct Recursion {
    pub l_eff: SuperOperator,
    /// `S₊₁`, mapping `vec ρ₀ ↦ vec ρ₁`.
    pub s_plus: DMatrix<C64>,
    /// `S₋₁`, mapping `vec ρ₀ ↦ vec ρ₋₁`.
    pub s_minus: DMatrix<C64>,
    /// Signed depths (`+n` or `−n`) whose solve needed regularization.
    pub regularized: Vec<i64>,
}

/// Runs the continued-fraction recursion down from depth `n_max`.
pub fn floquet_recursion(parts: &LiouvillianParts, n_max: usize) -> Result<Recursion> {
    if n_max < 1 {
        return Err(Error::config("n_floquet", "recursion depth must be at least 1"));
    }
    recursion(parts, n_max)
}

fn recursion(parts: &LiouvillianParts, n_max: usize) -> Result<Recursion> {
    let d2 = parts.l0.matrix().nrows();
    let l0 = parts.l0.matrix();
    let (lp, lm) = (parts.lplus.matrix(), parts.lminus.matrix());
    let mut sp = DMatrix::<C64>::zeros(d2, d2);
    let mut sm = DMatrix::<C64>::zeros(d2, d2);
    let mut regularized = Vec::new();

    let undriven = parts.lplus.max_abs() == 0.0 && parts.lminus.max_abs() == 0.0;
    if !undriven {
        for n in (1..=n_max).rev() {
            let shift = C64::new(0.0, n as f64 * parts.omega_l);
            let a = shifted(l0, -shift) + matmul(lm, &sp);
            sp = -solve(a, lp, n as i64, &mut regularized)?;
            let b = shifted(l0, shift) + matmul(lp, &sm);
            sm = -solve(b, lm, -(n as i64), &mut regularized)?;
        }
    }
    let l_eff = l0 + matmul(lm, &sp) + matmul(lp, &sm);
    Ok(Recursion {
        l_eff: SuperOperator::from_matrix(parts.dim(), l_eff)?,
        s_plus: sp,
        s_minus: sm,
        regularized,
    })
}

fn shifted(m: &DMatrix<C64>, shift: C64) -> DMatrix<C64> {
    let mut out = m.clone();
    for i in 0..out.nrows() {
        out[(i, i)] += shift;
    }
    out
}

fn solve(a: DMatrix<C64>, rhs: &DMatrix<C64>, depth: i64, regularized: &mut Vec<i64>) -> Result<DMatrix<C64>> {
    if let Some(x) = lu_solve(&a, rhs) {
        return Ok(x);
    }
    warn!("singular Floquet solve at depth {depth}; retrying with a {REGULARIZATION:e} shift");
    regularized.push(depth);
    lu_solve(&shifted(&a, C64::new(-REGULARIZATION, 0.0)), rhs)
        .ok_or_else(|| Error::Numerical(format!("Floquet solve at depth {depth} singular even after regularization")))
}

/// Kernel vector of a generator, returned as a unit-trace Hermitian density matrix.
#[derive(Clone, Debug)]
pub struct KernelState {
    pub rho: Operator,
    /// `‖L vec ρ‖₂`.
    pub residual: f64,
    pub smallest_singular: f64,
    pub second_singular: f64,
    pub largest_singular: f64,
}

/// Smallest-singular-value right vector of `l`, devectorized, Hermitized and
/// trace-normalized. Two singular values below `1e-8 · σ_max` are an error.
pub fn nullspace_state(l: &SuperOperator) -> Result<KernelState> {
    let d = l.dim();
    let (sv, v) = svd_right(l.matrix()).ok_or_else(|| Error::Numerical("SVD of the steady-state generator failed".into()))?;
    let n = sv.len();
    let largest = sv[0];
    let threshold = KERNEL_THRESHOLD * largest;
    let below = sv.iter().filter(|&&s| s <= threshold).count();
    if below >= 2 {
        return Err(Error::DegenerateSteadyState { count: below, threshold });
    }
    let v = v.column(n - 1).clone_owned();
    let raw = devectorize(&v, d);
    let mut rho = (&raw + raw.adjoint()) * C64::new(0.5, 0.0);
    let tr = trace(&rho);
    if tr.norm() < 1e-300 {
        return Err(Error::Numerical("kernel vector has zero trace".into()));
    }
    rho /= tr;
    let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let residual = (l.matrix() * vectorize(&rho)).norm();
    Ok(KernelState {
        rho,
        residual,
        smallest_singular: sv[n - 1],
        second_singular: if n >= 2 { sv[n - 2] } else { f64::INFINITY },
        largest_singular: largest,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct FloquetOptions {
    pub start_depth: usize,
    /// Stop extending once `‖ρ₀(n) − ρ₀(n−1)‖₁` drops below this.
    pub tolerance: f64,
    pub max_depth: usize,
}

impl Default for FloquetOptions {
    fn default() -> Self {
        Self {
            start_depth: 3,
            tolerance: 1e-8,
            max_depth: 12,
        }
    }
}

impl FloquetOptions {
    pub fn with_depth(depth: usize) -> Self {
        Self {
            start_depth: depth,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct FloquetSolution {
    /// Time-averaged steady state, in the eigenbasis of the Liouvillian parts.
    pub rho0: Operator,
    /// First harmonic `ρ₁` (coefficient of `e^{iω_L t}`).
    pub rho_plus: Operator,
    /// `ρ₋₁`, equal to `ρ₁†`.
    pub rho_minus: Operator,
    pub n_floquet_used: usize,
    pub residual: f64,
    pub convergence_delta: f64,
    pub min_eigenvalue: f64,
    /// Depths that needed a regularized solve; non-empty flags the result.
    pub regularized: Vec<i64>,
}

impl FloquetSolution {
    pub fn is_flagged(&self) -> bool {
        !self.regularized.is_empty()
    }
}

/// Solves at a fixed depth without the convergence extension.
pub fn solve_at_depth(parts: &LiouvillianParts, depth: usize) -> Result<FloquetSolution> {
    let rec = if depth == 0 {
        recursion(parts, 0)?
    } else {
        floquet_recursion(parts, depth)?
    };
    let kernel = nullspace_state(&rec.l_eff)?;
    let d = parts.dim();
    let v0 = vectorize(&kernel.rho);
    let rho_plus = devectorize(&(&rec.s_plus * &v0), d);
    let rho_minus = devectorize(&(&rec.s_minus * &v0), d);
    let min_eigenvalue = kernel
        .rho
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    Ok(FloquetSolution {
        rho0: kernel.rho,
        rho_plus,
        rho_minus,
        n_floquet_used: depth,
        residual: kernel.residual,
        convergence_delta: f64::NAN,
        min_eigenvalue,
        regularized: rec.regularized,
    })
}

/// Steady state with automatic depth extension: starts at `start_depth` and
/// adds one level at a time until successive `ρ₀` agree to `tolerance` in
/// trace norm (or `max_depth` is reached, with a warning).
pub fn steady_state(parts: &LiouvillianParts, options: FloquetOptions) -> Result<FloquetSolution> {
    let start = options.start_depth.max(1);
    let mut previous = solve_at_depth(parts, start - 1)?;
    let mut depth = start;
    loop {
        let mut current = solve_at_depth(parts, depth)?;
        current.convergence_delta = trace_norm_hermitian(&(&current.rho0 - &previous.rho0));
        if current.convergence_delta < options.tolerance || depth >= options.max_depth.max(start) {
            if current.convergence_delta >= options.tolerance {
                warn!(
                    "Floquet recursion stopped at depth {depth} with delta {:.3e}",
                    current.convergence_delta
                );
            }
            if current.min_eigenvalue < -1e-8 {
                warn!("steady state has eigenvalue {:.3e} below the positivity tolerance", current.min_eigenvalue);
            }
            return Ok(current);
        }
        previous = current;
        depth += 1;
    }
}
