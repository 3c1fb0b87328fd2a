//! Direct time integration of `ρ̇ = L(t)ρ`, used to cross-check the Floquet
//! recursion.
//!
//! The one-period propagator `P` is integrated once with an adaptive
//! Dormand–Prince 5(4) pair. Long times are reached by binary powers of `P`,
//! and the final period is integrated again for the time average.
//! Complex products are carried out as four real gemms, which is far faster
//! than nalgebra's generic complex path.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::dissipation::LiouvillianParts;
use crate::error::{Error, Result};
use crate::floquet::nullspace_state;
use crate::operators::{devectorize, trace, vectorize, Operator, C64};

#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-11, atol: 1e-13 }
    }
}

#[derive(Clone, Debug)]
pub struct Propagation {
    /// Average of `ρ(t)` over `[t_end − T, t_end]`.
    pub rho_avg: Operator,
    pub rho_end: Operator,
    pub rho_initial: Operator,
    /// Largest `|tr ρ(t) − 1|` over the output samples.
    pub max_trace_error: f64,
    pub steps: usize,
}

/// Integrates from the undriven steady state up to `t_end` and averages over
/// the last drive period with `samples_per_period` uniform trapezoid nodes.
pub fn propagate_oracle(parts: &LiouvillianParts, t_end: f64, samples_per_period: usize) -> Result<Propagation> {
    propagate_with(parts, t_end, samples_per_period, Tolerances::default())
}

pub fn propagate_with(
    parts: &LiouvillianParts,
    t_end: f64,
    samples_per_period: usize,
    tol: Tolerances,
) -> Result<Propagation> {
    if !(parts.omega_l > 0.0) {
        return Err(Error::config("omega_L", "propagation needs a positive drive frequency"));
    }
    let period = 2.0 * PI / parts.omega_l;
    if !(t_end >= 20.0 * period) {
        return Err(Error::config("t_end", "must cover at least 20 drive periods"));
    }
    if samples_per_period < 2 {
        return Err(Error::config("samples_per_period", "need at least 2 samples"));
    }
    let d = parts.dim();
    let rho_initial = nullspace_state(&parts.l0)?.rho;
    let generator = Generator::new(parts);
    let mut stepper = Stepper::new(tol, period / 200.0);

    // one-period propagator starting at phase zero
    let d2 = d * d;
    let mut monodromy = Split::identity(d2);
    stepper.integrate(&generator, 0.0, period, &mut monodromy)?;

    let start = t_end - period;
    let whole = (start / period).floor();
    let remainder = start - whole * period;
    let mut v = Split::from_complex(&DMatrix::from_column_slice(d2, 1, vectorize(&rho_initial).as_slice()));
    power_apply(&monodromy, whole as u64, &mut v);
    let mut t = whole * period;
    if remainder > 0.0 {
        stepper.integrate(&generator, t, t + remainder, &mut v)?;
        t += remainder;
    }

    let to_rho = |v: &Split| devectorize(&v.to_complex().column(0).into_owned(), d);
    let mut acc = Operator::zeros(d, d);
    let mut max_trace_error = 0.0f64;
    let h = period / samples_per_period as f64;
    for k in 0..=samples_per_period {
        if k > 0 {
            let target = start + k as f64 * h;
            stepper.integrate(&generator, t, target, &mut v)?;
            t = target;
        }
        let rho = to_rho(&v);
        max_trace_error = max_trace_error.max((trace(&rho) - C64::new(1.0, 0.0)).norm());
        let w = if k == 0 || k == samples_per_period { 0.5 } else { 1.0 };
        acc += rho * C64::new(w / samples_per_period as f64, 0.0);
    }
    Ok(Propagation {
        rho_avg: acc,
        rho_end: to_rho(&v),
        rho_initial,
        max_trace_error,
        steps: stepper.steps,
    })
}

fn power_apply(p: &Split, mut n: u64, v: &mut Split) {
    let mut base = p.clone();
    let mut scratch = Split::zeros(v.re.nrows(), v.re.ncols());
    let mut square = Split::zeros(p.re.nrows(), p.re.ncols());
    while n > 0 {
        if n & 1 == 1 {
            Split::mul_into(&base, v, &mut scratch);
            std::mem::swap(v, &mut scratch);
        }
        n >>= 1;
        if n > 0 {
            Split::mul_into(&base, &base, &mut square);
            std::mem::swap(&mut base, &mut square);
        }
    }
}

fn add_scaled(dst: &mut DMatrix<f64>, a: f64, x: &DMatrix<f64>) {
    dst.zip_apply(x, |d, x| *d += a * x);
}

#[derive(Clone, Debug)]
struct Split {
    re: DMatrix<f64>,
    im: DMatrix<f64>,
}

impl Split {
    fn zeros(r: usize, c: usize) -> Self {
        Self {
            re: DMatrix::zeros(r, c),
            im: DMatrix::zeros(r, c),
        }
    }

    fn identity(n: usize) -> Self {
        Self {
            re: DMatrix::identity(n, n),
            im: DMatrix::zeros(n, n),
        }
    }

    fn from_complex(m: &DMatrix<C64>) -> Self {
        Self {
            re: m.map(|z| z.re),
            im: m.map(|z| z.im),
        }
    }

    fn to_complex(&self) -> DMatrix<C64> {
        self.re.zip_map(&self.im, C64::new)
    }

    fn mul_into(a: &Split, b: &Split, out: &mut Split) {
        out.re.gemm(1.0, &a.re, &b.re, 0.0);
        out.re.gemm(-1.0, &a.im, &b.im, 1.0);
        out.im.gemm(1.0, &a.re, &b.im, 0.0);
        out.im.gemm(1.0, &a.im, &b.re, 1.0);
    }

    fn copy_from(&mut self, other: &Split) {
        self.re.copy_from(&other.re);
        self.im.copy_from(&other.im);
    }

    fn axpy(&mut self, a: f64, x: &Split) {
        add_scaled(&mut self.re, a, &x.re);
        add_scaled(&mut self.im, a, &x.im);
    }
}

struct Generator {
    l0: Split,
    lplus: Split,
    lminus: Split,
    omega: f64,
}

impl Generator {
    fn new(parts: &LiouvillianParts) -> Self {
        Self {
            l0: Split::from_complex(parts.l0.matrix()),
            lplus: Split::from_complex(parts.lplus.matrix()),
            lminus: Split::from_complex(parts.lminus.matrix()),
            omega: parts.omega_l,
        }
    }

    /// `out = L(t) y`, with `lt` as scratch for the assembled generator.
    fn apply(&self, t: f64, y: &Split, lt: &mut Split, out: &mut Split) {
        let (s, c) = (self.omega * t).sin_cos();
        // e^{iωt} L₊ + e^{−iωt} L₋
        lt.copy_from(&self.l0);
        add_scaled(&mut lt.re, c, &self.lplus.re);
        add_scaled(&mut lt.re, -s, &self.lplus.im);
        add_scaled(&mut lt.im, c, &self.lplus.im);
        add_scaled(&mut lt.im, s, &self.lplus.re);
        add_scaled(&mut lt.re, c, &self.lminus.re);
        add_scaled(&mut lt.re, s, &self.lminus.im);
        add_scaled(&mut lt.im, c, &self.lminus.im);
        add_scaled(&mut lt.im, -s, &self.lminus.re);
        Split::mul_into(lt, y, out);
    }
}

// Dormand–Prince 5(4) tableau
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Stepper {
    tol: Tolerances,
    h: f64,
    steps: usize,
}

impl Stepper {
    fn new(tol: Tolerances, h: f64) -> Self {
        Self { tol, h, steps: 0 }
    }

    fn integrate(&mut self, g: &Generator, t0: f64, t1: f64, y: &mut Split) -> Result<()> {
        let (r, c) = (y.re.nrows(), y.re.ncols());
        let n = g.l0.re.nrows();
        let mut lt = Split::zeros(n, n);
        let mut k: Vec<Split> = (0..7).map(|_| Split::zeros(r, c)).collect();
        let mut stage = Split::zeros(r, c);
        let mut err = Split::zeros(r, c);
        let span = t1 - t0;
        let h_min = 1e-14 * span.abs().max(1.0);
        let mut t = t0;
        g.apply(t, y, &mut lt, &mut k[0]);
        while t1 - t > 1e-13 * span.abs().max(1.0) {
            let h = self.h.min(t1 - t);
            for s in 1..7 {
                stage.copy_from(y);
                for (j, a) in A[s].iter().enumerate().take(s) {
                    if *a != 0.0 {
                        stage.axpy(h * a, &k[j]);
                    }
                }
                g.apply(t + C[s] * h, &stage, &mut lt, &mut k[s]);
            }
            // stage now holds the fifth-order solution (row 6 of A equals the weights)
            err.re.fill(0.0);
            err.im.fill(0.0);
            for (j, e) in E.iter().enumerate() {
                if *e != 0.0 {
                    err.axpy(h * e, &k[j]);
                }
            }
            let mut ratio = 0.0f64;
            for i in 0..err.re.len() {
                let scale_y = y.re[i].hypot(y.im[i]).max(stage.re[i].hypot(stage.im[i]));
                let e = err.re[i].hypot(err.im[i]) / (self.tol.atol + self.tol.rtol * scale_y);
                ratio = ratio.max(e);
            }
            if !ratio.is_finite() {
                return Err(Error::Integration {
                    time: t,
                    message: "non-finite state".into(),
                });
            }
            if ratio <= 1.0 {
                t += h;
                y.copy_from(&stage);
                k.swap(0, 6);
                self.steps += 1;
            }
            let factor = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
            // do not let a short final step shrink the carried step size
            if ratio <= 1.0 && h < self.h {
                self.h = self.h.max(h * factor);
            } else {
                self.h = h * factor;
            }
            if self.h < h_min {
                return Err(Error::Integration {
                    time: t,
                    message: format!("step size underflow (h = {:.3e})", self.h),
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dissipation::{build_liouvillian, dressed_jump, Channel, WeightRule};
    use crate::model::{diagonalize, ModelParams};
    use crate::operators::{pauli, trace_norm_hermitian, Axis};

    fn two_level(amplitude: f64) -> LiouvillianParts {
        let eig = diagonalize(&(pauli(Axis::Z) * C64::new(0.5, 0.0)), None).unwrap();
        let p = ModelParams {
            omega_q: 1.0,
            omega_l: 1.02,
            drive_amplitude: amplitude,
            ..ModelParams::default()
        };
        let jump = dressed_jump(&eig, &pauli(Axis::X), WeightRule::FreqRatio(1.0), Channel::Tls, 0.05).unwrap();
        build_liouvillian(&p, &eig, &pauli(Axis::X), &[jump]).unwrap()
    }

    #[test]
    fn undriven_state_is_stationary() {
        let parts = two_level(0.0);
        let period = 2.0 * PI / parts.omega_l;
        let out = propagate_oracle(&parts, 40.0 * period, 16).unwrap();
        assert!(trace_norm_hermitian(&(&out.rho_avg - &out.rho_initial)) < 1e-8);
    }

    #[test]
    fn rejects_short_horizon() {
        let parts = two_level(0.01);
        let period = 2.0 * PI / parts.omega_l;
        assert!(propagate_oracle(&parts, 10.0 * period, 16).unwrap_err().is_config());
    }

    #[test]
    fn trace_and_phase_independence() {
        let parts = two_level(0.02);
        let period = 2.0 * PI / parts.omega_l;
        let t_end = 4096.0 * period;
        let a = propagate_oracle(&parts, t_end, 32).unwrap();
        let b = propagate_oracle(&parts, t_end + 0.25 * period, 32).unwrap();
        assert!(a.max_trace_error < 1e-8 && b.max_trace_error < 1e-8);
        assert!(trace_norm_hermitian(&(&a.rho_avg - &b.rho_avg)) < 1e-6);
    }

    #[test]
    fn agrees_with_floquet_recursion() {
        let parts = two_level(0.02);
        let period = 2.0 * PI / parts.omega_l;
        let avg = propagate_oracle(&parts, 4096.0 * period, 32).unwrap().rho_avg;
        let sol = crate::floquet::steady_state(&parts, Default::default()).unwrap();
        assert!(trace_norm_hermitian(&(&avg - &sol.rho0)) < 1e-7);
    }

    #[test]
    fn powering_matches_plain_integration() {
        let parts = two_level(0.02);
        let period = 2.0 * PI / parts.omega_l;
        // 23 periods: powers 16 + 4 + 2 + 1 then one more integrated period
        let powered = propagate_oracle(&parts, 24.0 * period, 8).unwrap();
        let g = Generator::new(&parts);
        let mut stepper = Stepper::new(Tolerances::default(), period / 200.0);
        let mut v = Split::from_complex(&DMatrix::from_column_slice(4, 1, vectorize(&powered.rho_initial).as_slice()));
        stepper.integrate(&g, 0.0, 24.0 * period, &mut v).unwrap();
        let direct = devectorize(&v.to_complex().column(0).into_owned(), 2);
        assert!(trace_norm_hermitian(&(&direct - &powered.rho_end)) < 1e-9);
    }
}
