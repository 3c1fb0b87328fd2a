//! Dipole-gauge quantum Rabi model with an optional sensor qubit.
//!
//! Subsystem order is always (cavity, TLS, sensor). All frequencies are in
//! units of the cavity frequency.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{
    annihilation, embed, hermiticity_defect, lowering, pauli, Axis, Local, Operator, C64, I, ONE,
};

/// Top-two-Fock population below which a state counts as truncation-converged.
pub const FOCK_TAIL_TOLERANCE: f64 = 1e-10;
/// Number of levels the adaptive cavity truncation always converges.
pub const MIN_CONVERGED_STATES: usize = 12;
const MAX_ADAPTIVE_FOCK: usize = 160;
/// Largest cavity truncation accepted from a config.
pub const MAX_N_FOCK: usize = 512;
pub const MAX_N_FLOQUET: usize = 64;

/// Physical and numerical parameters of the driven Rabi + sensor system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelParams {
    pub omega_c: f64,
    pub omega_q: f64,
    pub omega_s: f64,
    /// Permanent-dipole mixing angle in radians.
    pub theta: f64,
    pub eta: f64,
    pub eta_s: f64,
    /// Drive amplitude Ω.
    #[serde(rename = "Omega", alias = "drive_amplitude")]
    pub drive_amplitude: f64,
    #[serde(rename = "omega_L", alias = "omega_l")]
    pub omega_l: f64,
    pub kappa: f64,
    pub gamma: f64,
    /// Sensor decay rate Γ (the filter linewidth).
    #[serde(rename = "Gamma", alias = "sensor_decay")]
    pub sensor_decay: f64,
    /// k_B T in units of ħω_c.
    #[serde(rename = "T", alias = "temperature")]
    pub temperature: f64,
    /// Cavity truncation; `None` picks it adaptively.
    pub n_fock: Option<usize>,
    /// Initial Floquet recursion depth.
    pub n_floquet: usize,
    /// Dressed states above `2 ω_L + margin` (relative to the ground state)
    /// are dropped from the driven problem; `None` keeps the full space.
    pub subspace_margin: Option<f64>,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            omega_c: 1.0,
            omega_q: 1.0,
            omega_s: 1.0,
            theta: PI / 6.0,
            eta: 0.3,
            eta_s: 1e-5,
            drive_amplitude: 5e-3,
            omega_l: 1.1,
            kappa: 1e-3,
            gamma: 1e-3,
            sensor_decay: 1e-3,
            temperature: 0.0,
            n_fock: None,
            n_floquet: 3,
            subspace_margin: Some(1.5),
        }
    }
}

impl ModelParams {
    /// Checks invariants. Returns human-readable warnings for legal but
    /// suspicious settings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let reals = [
            ("omega_c", self.omega_c),
            ("omega_q", self.omega_q),
            ("omega_s", self.omega_s),
            ("theta", self.theta),
            ("eta", self.eta),
            ("eta_s", self.eta_s),
            ("Omega", self.drive_amplitude),
            ("omega_L", self.omega_l),
            ("kappa", self.kappa),
            ("gamma", self.gamma),
            ("Gamma", self.sensor_decay),
            ("T", self.temperature),
        ];
        for (name, v) in reals {
            if !v.is_finite() {
                return Err(Error::config(name, format!("must be finite, got {v}")));
            }
        }
        for (name, v) in reals.iter().filter(|(n, _)| *n != "theta") {
            if *v < 0.0 {
                return Err(Error::config(*name, format!("must be non-negative, got {v}")));
            }
        }
        // The dressed TLS and sensor operators divide by their bare frequencies.
        for (name, v) in [("omega_c", self.omega_c), ("omega_q", self.omega_q), ("omega_s", self.omega_s)] {
            if v == 0.0 {
                return Err(Error::config(name, "must be strictly positive"));
            }
        }
        if let Some(n) = self.n_fock {
            if !(4..=MAX_N_FOCK).contains(&n) {
                return Err(Error::config("n_fock", format!("must be in 4..={MAX_N_FOCK}, got {n}")));
            }
        }
        if !(1..=MAX_N_FLOQUET).contains(&self.n_floquet) {
            return Err(Error::config("n_floquet", format!("must be in 1..={MAX_N_FLOQUET}")));
        }
        if let Some(m) = self.subspace_margin {
            if !m.is_finite() || m < 0.0 {
                return Err(Error::config("subspace_margin", format!("must be finite and non-negative, got {m}")));
            }
        }
        let mut warnings = Vec::new();
        if self.eta_s > 1e-3 {
            warnings.push(format!(
                "eta_s = {} exceeds 1e-3: sensor back-action may distort the spectrum",
                self.eta_s
            ));
        }
        Ok(warnings)
    }

    /// Energy (above the ground state) of the highest dressed state kept in the
    /// driven problem.
    pub fn working_cutoff(&self) -> Option<f64> {
        self.subspace_margin.map(|m| 2.0 * self.omega_l + m)
    }

    /// The cavity truncation to use: explicit, or chosen adaptively.
    pub fn resolve_n_fock(&self) -> Result<usize> {
        match self.n_fock {
            Some(n) => Ok(n),
            None => adaptive_n_fock(self, MIN_CONVERGED_STATES, self.working_cutoff()),
        }
    }
}

/// Shape of the composite Hilbert space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub n_fock: usize,
    pub sensor: bool,
}

impl Layout {
    pub fn new(n_fock: usize, sensor: bool) -> Self {
        Self { n_fock, sensor }
    }

    pub fn dim(&self) -> usize {
        self.n_fock * 2 * if self.sensor { 2 } else { 1 }
    }

    fn place(&self, cavity: Option<Operator>, tls: Option<Operator>, sensor: Option<Operator>) -> Operator {
        let mut locals = vec![
            cavity.map_or(Local::Identity(self.n_fock), Local::Op),
            tls.map_or(Local::Identity(2), Local::Op),
        ];
        if self.sensor {
            locals.push(sensor.map_or(Local::Identity(2), Local::Op));
        } else {
            debug_assert!(sensor.is_none(), "sensor operator on a sensor-free layout");
        }
        embed(&locals).expect("layout factors are non-empty and square")
    }

    pub fn cavity(&self, op: Operator) -> Operator {
        self.place(Some(op), None, None)
    }

    pub fn tls(&self, op: Operator) -> Operator {
        self.place(None, Some(op), None)
    }

    pub fn sensor(&self, op: Operator) -> Operator {
        assert!(self.sensor, "layout has no sensor");
        self.place(None, None, Some(op))
    }

    fn annihilation(&self) -> Operator {
        self.cavity(annihilation(self.n_fock).expect("n_fock >= 2"))
    }
}

/// `σ_p = cos θ σ_x + sin θ σ_z` on the TLS alone.
pub fn sigma_p(theta: f64) -> Operator {
    pauli(Axis::X) * C64::new(theta.cos(), 0.0) + pauli(Axis::Z) * C64::new(theta.sin(), 0.0)
}

/// Field quadrature `a + a†` on the full space.
pub fn cavity_quadrature(layout: Layout) -> Operator {
    let a = layout.annihilation();
    a.adjoint() + a
}

/// TLS `σ_x` on the full space.
pub fn tls_sigma_x(layout: Layout) -> Operator {
    layout.tls(pauli(Axis::X))
}

/// Sensor `σ_x` on the full space.
pub fn sensor_sigma_x(layout: Layout) -> Operator {
    layout.sensor(pauli(Axis::X))
}

/// Dipole-gauge electric-field operator `i(a† − a) + 2η σ_p` seen by the sensor.
pub fn field_operator(p: &ModelParams, layout: Layout) -> Operator {
    let a = layout.annihilation();
    (a.adjoint() - &a) * I + layout.tls(sigma_p(p.theta)) * C64::new(2.0 * p.eta, 0.0)
}

/// Full Hamiltonian (time-independent part)
/// `ω_c a†a + ω_q σ_z/2 + iηω_c(a† − a)σ_p [+ ω_s σ_z^s/2 + ω_c η_s (i(a† − a) + 2ησ_p) σ_x^s]`.
pub fn build_hamiltonian(p: &ModelParams, layout: Layout) -> Result<Operator> {
    p.validate()?;
    if layout.n_fock < 2 {
        return Err(Error::InvalidDimension(format!("n_fock = {} is too small", layout.n_fock)));
    }
    let a = layout.annihilation();
    let ad = a.adjoint();
    let sp = layout.tls(sigma_p(p.theta));
    let c = |x: f64| C64::new(x, 0.0);

    let mut h = &ad * &a * c(p.omega_c) + layout.tls(pauli(Axis::Z)) * c(p.omega_q / 2.0);
    h += (&ad - &a) * &sp * C64::new(0.0, p.eta * p.omega_c);
    if layout.sensor {
        h += layout.sensor(pauli(Axis::Z)) * c(p.omega_s / 2.0);
        let field = (&ad - &a) * I + &sp * c(2.0 * p.eta);
        h += field * layout.sensor(pauli(Axis::X)) * c(p.omega_c * p.eta_s);
    }
    let defect = hermiticity_defect(&h);
    if defect > 1e-12 {
        return Err(Error::NotHermitian { deviation: defect });
    }
    Ok(h)
}

/// Drive coupling `D = i(a − a†) − 2η σ_x`; the drive Hamiltonian is `Ω D cos(ω_L t)`.
pub fn drive_operator(p: &ModelParams, layout: Layout) -> Operator {
    let a = layout.annihilation();
    (&a - a.adjoint()) * I - layout.tls(pauli(Axis::X)) * C64::new(2.0 * p.eta, 0.0)
}

/// Parity `exp[iπ(a†a + σ†σ)]` on cavity ⊗ TLS, identity on the sensor.
///
/// Uses the excited-state projector `σ†σ` rather than `σ_z`; the two differ by a
/// global sign only, so the ±1 grading is the same.
pub fn parity_operator(layout: Layout) -> Operator {
    let n = Operator::from_diagonal(&nalgebra::DVector::from_fn(layout.n_fock, |k, _| C64::new(k as f64, 0.0)));
    let excited = lowering().adjoint() * lowering();
    let count = layout.cavity(n) + layout.tls(excited);
    let diag = count.diagonal().map(|z| if (z.re.round() as i64) % 2 == 0 { ONE } else { -ONE });
    Operator::from_diagonal(&diag)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

impl Parity {
    pub fn sign(self) -> Option<i8> {
        match self {
            Parity::Even => Some(1),
            Parity::Odd => Some(-1),
            Parity::Mixed => None,
        }
    }

    fn sort_key(self) -> u8 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
            Parity::Mixed => 2,
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "+1",
            Parity::Odd => "-1",
            Parity::Mixed => "mixed",
        })
    }
}

/// Energy-ordered eigendecomposition with deterministic phases.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    energies: Vec<f64>,
    states: Operator,
    parity: Vec<Parity>,
}

impl EigenSystem {
    /// Raw eigenvalues, ascending.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Eigenvalues relative to the ground state.
    pub fn shifted_energies(&self) -> Vec<f64> {
        let e0 = self.energies[0];
        self.energies.iter().map(|e| e - e0).collect()
    }

    /// Columns are eigenvectors in the bare basis.
    pub fn states(&self) -> &Operator {
        &self.states
    }

    pub fn parity(&self) -> &[Parity] {
        &self.parity
    }

    /// Bare-space dimension.
    pub fn dim(&self) -> usize {
        self.states.nrows()
    }

    /// Number of retained eigenstates.
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// `ω_{kj} = ω_k − ω_j`.
    pub fn transition(&self, k: usize, j: usize) -> f64 {
        self.energies[k] - self.energies[j]
    }

    /// Matrix elements `⟨j|op|k⟩` between retained eigenstates.
    pub fn to_eigenbasis(&self, op: &Operator) -> Operator {
        self.states.adjoint() * op * &self.states
    }

    /// Keeps the lowest `m` states.
    pub fn truncated(&self, m: usize) -> EigenSystem {
        let m = m.min(self.len());
        EigenSystem {
            energies: self.energies[..m].to_vec(),
            states: self.states.columns(0, m).into_owned(),
            parity: self.parity[..m].to_vec(),
        }
    }

    /// Keeps the states whose energy above the ground state is at most `cutoff`.
    pub fn below(&self, cutoff: f64) -> EigenSystem {
        let e0 = self.energies[0];
        let m = self.energies.iter().take_while(|e| **e - e0 <= cutoff).count();
        self.truncated(m.max(1))
    }
}

/// Diagonalizes a Hermitian matrix.
///
/// Energies ascend; ties are broken by parity label and then lexicographically
/// on the eigenvector. Each eigenvector's largest-magnitude component is made
/// real and positive. When `parity` is given, a state whose `⟨Π⟩` lies within
/// 1e-8 of ±1 gets that label, otherwise `Mixed`.
pub fn diagonalize(h: &Operator, parity: Option<&Operator>) -> Result<EigenSystem> {
    if h.nrows() != h.ncols() || h.nrows() == 0 {
        return Err(Error::InvalidDimension("Hamiltonian must be square and non-empty".into()));
    }
    let scale = crate::operators::max_abs(h).max(1.0);
    let defect = hermiticity_defect(h);
    if defect > 1e-10 * scale {
        return Err(Error::NotHermitian { deviation: defect });
    }
    let herm = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let d = h.nrows();

    let mut columns: Vec<(f64, nalgebra::DVector<C64>, Parity)> = (0..d)
        .map(|k| {
            let mut v = eig.eigenvectors.column(k).into_owned();
            fix_phase(&mut v);
            let label = match parity {
                Some(pi) => {
                    let expect = (v.adjoint() * pi * &v)[(0, 0)].re;
                    if (expect - 1.0).abs() < 1e-8 {
                        Parity::Even
                    } else if (expect + 1.0).abs() < 1e-8 {
                        Parity::Odd
                    } else {
                        Parity::Mixed
                    }
                }
                None => Parity::Mixed,
            };
            (eig.eigenvalues[k], v, label)
        })
        .collect();

    columns.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(a.2.sort_key().cmp(&b.2.sort_key()))
            .then_with(|| lexicographic(&a.1, &b.1))
    });

    let mut states = Operator::zeros(d, d);
    for (k, (_, v, _)) in columns.iter().enumerate() {
        states.set_column(k, v);
    }
    Ok(EigenSystem {
        energies: columns.iter().map(|c| c.0).collect(),
        states,
        parity: columns.iter().map(|c| c.2).collect(),
    })
}

fn fix_phase(v: &mut nalgebra::DVector<C64>) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-12))
        .expect("maximum exists");
    let phase = v[pivot].conj() / v[pivot].norm();
    *v *= phase;
    v[pivot] = C64::new(v[pivot].re, 0.0);
}

fn lexicographic(a: &nalgebra::DVector<C64>, b: &nalgebra::DVector<C64>) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

/// Largest population of the two highest Fock levels among the given states.
pub fn fock_tail(eig: &EigenSystem, layout: Layout, states: usize) -> f64 {
    let per_fock = layout.dim() / layout.n_fock;
    let n = layout.n_fock;
    (0..states.min(eig.len()))
        .map(|k| {
            let col = eig.states.column(k);
            ((n - 2) * per_fock..n * per_fock)
                .map(|i| col[i].norm_sqr())
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// Smallest cavity truncation (≥ 4) for which every required sensor-free
/// eigenstate keeps less than [`FOCK_TAIL_TOLERANCE`] population in its top
/// two Fock levels. The required states are the lowest `min_states`, plus all
/// states up to `energy_cutoff` above the ground state when given.
pub fn adaptive_n_fock(p: &ModelParams, min_states: usize, energy_cutoff: Option<f64>) -> Result<usize> {
    p.validate()?;
    let start = (min_states.div_ceil(2) + 2).max(4);
    for n in start..=MAX_ADAPTIVE_FOCK {
        let layout = Layout::new(n, false);
        let eig = diagonalize(&build_hamiltonian(p, layout)?, None)?;
        let shifted = eig.shifted_energies();
        let below = energy_cutoff.map_or(0, |c| shifted.iter().filter(|e| **e <= c).count());
        let required = min_states.max(below);
        // Need headroom above the required states for the tail to mean anything.
        if required + 4 > eig.len() {
            continue;
        }
        if fock_tail(&eig, layout, required) < FOCK_TAIL_TOLERANCE {
            return Ok(n);
        }
    }
    Err(Error::Numerical(format!(
        "no cavity truncation up to {MAX_ADAPTIVE_FOCK} converges the requested states"
    )))
}

/// Projector onto the ground state of an eigensystem, in its own eigenbasis.
pub fn ground_projector(dim: usize) -> Operator {
    let mut rho = Operator::zeros(dim, dim);
    rho[(0, 0)] = ONE;
    rho
}
