//! Golden-rule Raman theory on the sensor-free dressed states.
//!
//! The amplitude for `|i⟩ → |f⟩` with a drive photon `ω_L` in and a Raman
//! photon `ω_R = ω_L − ω_fi` out is
//!
//! ```text
//! M_fi = Σ_j X_fj X_ji [1/(ω_ji − ω_L) + 1/(ω_ji + ω_R)],   X = a + a†
//! ```
//!
//! and the line rate is `|M_fi|² p_i (1 − p_f)` with Gibbs populations.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{adaptive_n_fock, build_hamiltonian, cavity_quadrature, diagonalize, parity_operator, EigenSystem, Layout, ModelParams};
use crate::operators::{Operator, C64};
use crate::sweep::parallel_map;

/// Denominators smaller than this get the linewidth added.
pub const RESONANCE_THRESHOLD: f64 = 1e-3;
/// Intermediate states summed over, and the size of the converged set.
pub const DEFAULT_INTERMEDIATE: usize = 20;

/// `X_fj = ⟨f|a + a†|j⟩` in the energy-ordered basis.
#[derive(Clone, Debug)]
pub struct DipoleElements {
    pub x: Operator,
}

pub fn dipole_elements(eig: &EigenSystem, layout: Layout) -> DipoleElements {
    DipoleElements {
        x: eig.to_eigenbasis(&cavity_quadrature(layout)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Amplitude {
    pub value: C64,
    pub resonant: bool,
}

/// `M_fi(ω_L)` summed over the lowest `n_intermediate` states. Near-resonant
/// denominators are shifted by `i·broadening`.
pub fn raman_amplitude(
    eig: &EigenSystem,
    x: &DipoleElements,
    i: usize,
    f: usize,
    omega_l: f64,
    broadening: f64,
    n_intermediate: usize,
) -> Amplitude {
    let omega_r = omega_l - eig.transition(f, i);
    let mut resonant = false;
    let mut denom = |d: f64| {
        if d.abs() < RESONANCE_THRESHOLD {
            resonant = true;
            C64::new(d, broadening).inv()
        } else {
            C64::new(1.0 / d, 0.0)
        }
    };
    let mut m = C64::new(0.0, 0.0);
    for j in 0..n_intermediate.min(eig.len()) {
        let w_ji = eig.transition(j, i);
        let weight = denom(w_ji - omega_l) + denom(w_ji + omega_r);
        m += x.x[(f, j)] * x.x[(j, i)] * weight;
    }
    Amplitude { value: m, resonant }
}

/// Boltzmann weights of the lowest `n` levels (`p₀ = 1` at `T = 0`).
pub fn gibbs_populations(eig: &EigenSystem, temperature: f64, n: usize) -> Vec<f64> {
    let n = n.min(eig.len());
    let e = eig.shifted_energies();
    if temperature <= 0.0 {
        let mut p = vec![0.0; n];
        if n > 0 {
            p[0] = 1.0;
        }
        return p;
    }
    let w: Vec<f64> = e[..n].iter().map(|x| (-x / temperature).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LineKind {
    Stokes,
    AntiStokes,
    Rayleigh,
}

impl fmt::Display for LineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LineKind::Stokes => "stokes",
            LineKind::AntiStokes => "anti_stokes",
            LineKind::Rayleigh => "rayleigh",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RamanLine {
    pub i: usize,
    pub f: usize,
    pub omega_fi: f64,
    pub omega_r: f64,
    pub kind: LineKind,
    #[serde(serialize_with = "complex_pair")]
    pub amplitude: C64,
    pub relative_rate: f64,
    pub population_factor: f64,
    pub resonance_enhanced: bool,
}

fn complex_pair<S: Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

/// Sensor-free eigensystem with the quantities the golden-rule formulas need.
#[derive(Clone, Debug)]
pub struct RamanSystem {
    pub eig: EigenSystem,
    pub layout: Layout,
    pub x: DipoleElements,
    /// `(κ + γ)/2`, the resonant-denominator shift.
    pub broadening: f64,
    pub n_intermediate: usize,
}

impl RamanSystem {
    pub fn new(p: &ModelParams) -> Result<Self> {
        p.validate()?;
        let n_fock = match p.n_fock {
            Some(n) => n,
            None => adaptive_n_fock(p, DEFAULT_INTERMEDIATE, None)?,
        };
        let layout = Layout::new(n_fock, false);
        let eig = diagonalize(&build_hamiltonian(p, layout)?, Some(&parity_operator(layout)))?;
        let x = dipole_elements(&eig, layout);
        Ok(Self {
            n_intermediate: DEFAULT_INTERMEDIATE.min(eig.len()),
            eig,
            layout,
            x,
            broadening: (p.kappa + p.gamma) / 2.0,
        })
    }

    pub fn amplitude(&self, i: usize, f: usize, omega_l: f64) -> Amplitude {
        raman_amplitude(&self.eig, &self.x, i, f, omega_l, self.broadening, self.n_intermediate)
    }

    pub fn line(&self, i: usize, f: usize, omega_l: f64, populations: &[f64]) -> RamanLine {
        let omega_fi = self.eig.transition(f, i);
        let omega_r = omega_l - omega_fi;
        let amp = self.amplitude(i, f, omega_l);
        let population_factor = populations[i] * (1.0 - populations[f]);
        let kind = if i == f {
            LineKind::Rayleigh
        } else if omega_fi > 0.0 {
            LineKind::Stokes
        } else {
            LineKind::AntiStokes
        };
        RamanLine {
            i,
            f,
            omega_fi,
            omega_r,
            kind,
            amplitude: amp.value,
            relative_rate: amp.value.norm_sqr() * population_factor,
            population_factor,
            resonance_enhanced: amp.resonant,
        }
    }

    /// Every emitting `i ≠ f` pair below `n_states`, by descending rate.
    pub fn line_table(&self, omega_l: f64, temperature: f64, n_states: usize) -> Result<Vec<RamanLine>> {
        if n_states > self.n_intermediate || n_states < 2 {
            return Err(Error::config(
                "n_states",
                format!("must lie in [2, {}], got {n_states}", self.n_intermediate),
            ));
        }
        let pops = gibbs_populations(&self.eig, temperature, self.n_intermediate);
        let mut lines = Vec::new();
        for i in 0..n_states {
            for f in 0..n_states {
                if i == f {
                    continue;
                }
                let line = self.line(i, f, omega_l, &pops);
                if line.omega_r > 0.0 {
                    lines.push(line);
                }
            }
        }
        lines.sort_by(|a, b| {
            b.relative_rate
                .total_cmp(&a.relative_rate)
                .then(a.i.cmp(&b.i))
                .then(a.f.cmp(&b.f))
        });
        Ok(lines)
    }

    /// Sum of the rates of all lines starting in the ground state.
    pub fn ground_total_rate(&self, omega_l: f64, temperature: f64, n_states: usize) -> Result<f64> {
        Ok(self
            .line_table(omega_l, temperature, n_states)?
            .iter()
            .filter(|l| l.i == 0)
            .map(|l| l.relative_rate)
            .sum())
    }

    pub fn classify(&self, omega_s: f64, omega_l: f64, tol: f64, n_states: usize) -> Result<Feature> {
        classify_feature(omega_s, omega_l, &self.eig, tol, n_states)
    }
}

/// Spectral feature label; indices are `(f, i)` as in `stokes(1,0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Feature {
    Transition { f: usize, i: usize },
    Rayleigh,
    Stokes { f: usize, i: usize },
    AntiStokes { f: usize, i: usize },
    HyperRaman { f: usize, i: usize },
    Unclassified,
}

impl Feature {
    fn order(self) -> u8 {
        match self {
            Feature::Transition { .. } => 0,
            Feature::Rayleigh => 1,
            Feature::Stokes { .. } | Feature::AntiStokes { .. } => 2,
            Feature::HyperRaman { .. } => 3,
            Feature::Unclassified => 4,
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Feature::Transition { f, i } => write!(out, "transition({f},{i})"),
            Feature::Rayleigh => write!(out, "rayleigh"),
            Feature::Stokes { f, i } => write!(out, "stokes({f},{i})"),
            Feature::AntiStokes { f, i } => write!(out, "anti_stokes({f},{i})"),
            Feature::HyperRaman { f, i } => write!(out, "hyper_raman({f},{i})"),
            Feature::Unclassified => write!(out, "unclassified"),
        }
    }
}

impl Serialize for Feature {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Closest line within `tol` among transitions, Rayleigh, Raman and
/// hyper-Raman positions built from the lowest `n_states` levels.
pub fn classify_feature(omega_s: f64, omega_l: f64, eig: &EigenSystem, tol: f64, n_states: usize) -> Result<Feature> {
    if !(tol > 0.0) {
        return Err(Error::config("tol", "must be positive"));
    }
    if !omega_s.is_finite() || !omega_l.is_finite() {
        return Err(Error::config("query", "frequencies must be finite"));
    }
    let n = n_states.min(eig.len());
    let mut best: Option<(f64, Feature)> = None;
    let mut consider = |position: f64, feature: Feature| {
        let r = (omega_s - position).abs();
        if r >= tol {
            return;
        }
        let better = match best {
            None => true,
            Some((rb, fb)) => r < rb || (r == rb && feature.order() < fb.order()),
        };
        if better {
            best = Some((r, feature));
        }
    };
    consider(omega_l, Feature::Rayleigh);
    for i in 0..n {
        for f in 0..n {
            if i == f {
                continue;
            }
            let w = eig.transition(f, i);
            if w > 0.0 {
                consider(w, Feature::Transition { f, i });
                consider(omega_l - w, Feature::Stokes { f, i });
            } else {
                consider(omega_l - w, Feature::AntiStokes { f, i });
            }
            consider(2.0 * omega_l - w, Feature::HyperRaman { f, i });
        }
    }
    Ok(best.map_or(Feature::Unclassified, |b| b.1))
}

/// Rate of the `(i → f)` line across `θ`, rebuilding the eigensystem per point.
/// Lines with `ω_R ≤ 0` contribute zero.
pub fn theta_scan(theta_grid: &[f64], line: (usize, usize), p: &ModelParams, workers: usize) -> Result<Vec<f64>> {
    for t in theta_grid {
        if !(0.0..=std::f64::consts::FRAC_PI_2 + 1e-12).contains(t) {
            return Err(Error::config("theta_grid", format!("{t} lies outside [0, π/2]")));
        }
    }
    let (i, f) = line;
    parallel_map(theta_grid.len(), workers, |k| {
        let q = ModelParams {
            theta: theta_grid[k],
            ..p.clone()
        };
        let sys = RamanSystem::new(&q)?;
        if i.max(f) >= sys.n_intermediate {
            return Err(Error::config("line", "state index beyond the converged set"));
        }
        let pops = gibbs_populations(&sys.eig, q.temperature, sys.n_intermediate);
        let l = sys.line(i, f, q.omega_l, &pops);
        Ok(if l.omega_r > 0.0 { l.relative_rate } else { 0.0 })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Parity;
    use crate::operators::max_abs;
    use std::f64::consts::PI;

    fn params(eta: f64, theta: f64) -> ModelParams {
        ModelParams {
            eta,
            theta,
            ..ModelParams::default()
        }
    }

    #[test]
    fn decoupled_dipole_ladder() {
        let sys = RamanSystem::new(&ModelParams {
            eta: 0.0,
            theta: 0.0,
            omega_q: 0.77,
            n_fock: Some(8),
            ..ModelParams::default()
        })
        .unwrap();
        // levels: |0,g⟩, |0,e⟩(0.77), |1,g⟩(1), |1,e⟩(1.77), |2,g⟩(2)
        let x = &sys.x.x;
        assert!((x[(0, 2)].norm() - 1.0).abs() < 1e-12);
        assert!((x[(2, 4)].norm() - 2f64.sqrt()).abs() < 1e-12);
        assert!((x[(1, 3)].norm() - 1.0).abs() < 1e-12);
        assert!(x[(0, 1)].norm() < 1e-12 && x[(0, 4)].norm() < 1e-12);
    }

    #[test]
    fn dipole_is_hermitian_and_parity_odd() {
        let sys = RamanSystem::new(&params(0.3, 0.0)).unwrap();
        let x = &sys.x.x;
        assert!(max_abs(&(x - x.adjoint())) < 1e-12);
        let par = sys.eig.parity();
        for f in 0..sys.n_intermediate {
            for j in 0..sys.n_intermediate {
                if par[f] == par[j] && par[f] != Parity::Mixed {
                    assert!(x[(f, j)].norm() < 1e-12, "({f},{j})");
                }
            }
        }
    }

    #[test]
    fn parity_selection_at_zero_theta() {
        let sys = RamanSystem::new(&params(0.3, 0.0)).unwrap();
        assert!(sys.amplitude(0, 1, 1.1).value.norm() < 1e-12);
        assert!(sys.amplitude(0, 3, 1.1).value.norm() > 1e-3);
    }

    #[test]
    fn jaynes_cummings_limit_conserves_excitations() {
        let p = ModelParams {
            eta: 1e-3,
            theta: 0.0,
            ..ModelParams::default()
        };
        let sys = RamanSystem::new(&p).unwrap();
        // f = 1, 2 are the one-excitation doublet; everything above changes the
        // excitation number
        for f in 3..12 {
            let m = sys.amplitude(0, f, 1.1).value.norm();
            assert!(m < 1e-4, "|M_{f}0| = {m}");
        }
    }

    #[test]
    fn gibbs_examples() {
        let sys = RamanSystem::new(&params(0.3, PI / 6.0)).unwrap();
        assert_eq!(gibbs_populations(&sys.eig, 0.0, 5), vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        let p = gibbs_populations(&sys.eig, 0.15, 20);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let w10 = sys.eig.transition(1, 0);
        assert!((p[1] / p[0] - (-w10 / 0.15).exp()).abs() < 1e-14);
    }

    #[test]
    fn zero_temperature_lines_start_in_ground() {
        let sys = RamanSystem::new(&ModelParams::default()).unwrap();
        let table = sys.line_table(1.1, 0.0, 12).unwrap();
        let max = table[0].relative_rate;
        assert!(max > 0.0);
        for l in &table {
            // ω_R + ω_f = ω_L + ω_i
            assert!((l.omega_r + l.omega_fi - 1.1).abs() < 1e-14);
            assert!(l.omega_r > 0.0 && l.i != l.f);
            if l.i != 0 {
                assert!(l.relative_rate < 1e-10 * max);
            }
        }
        assert!(table.windows(2).all(|w| w[0].relative_rate >= w[1].relative_rate));
    }

    #[test]
    fn population_factors_obey_detailed_balance() {
        let sys = RamanSystem::new(&ModelParams::default()).unwrap();
        let pops = gibbs_populations(&sys.eig, 0.2, sys.n_intermediate);
        for (i, f) in [(0, 1), (0, 3), (1, 2)] {
            let stokes = sys.line(i, f, 2.5, &pops);
            let anti = sys.line(f, i, 2.5, &pops);
            let expected = pops[f] * (1.0 - pops[i]) / (pops[i] * (1.0 - pops[f]));
            assert!((anti.population_factor / stokes.population_factor / expected - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn anti_stokes_grows_with_temperature() {
        let sys = RamanSystem::new(&ModelParams::default()).unwrap();
        let rate = |t: f64, i, f| {
            let pops = gibbs_populations(&sys.eig, t, sys.n_intermediate);
            sys.line(i, f, 1.1, &pops).relative_rate
        };
        assert!(rate(0.15, 1, 0) > 10.0 * rate(0.05, 1, 0));
        assert!((rate(0.15, 0, 1) / rate(0.05, 0, 1) - 1.0).abs() < 0.5);
    }

    #[test]
    fn classification_examples() {
        let sys = RamanSystem::new(&ModelParams::default()).unwrap();
        let tol = 3e-3;
        let w10 = sys.eig.transition(1, 0);
        let w30 = sys.eig.transition(3, 0);
        assert_eq!(sys.classify(1.1, 1.1, tol, 12).unwrap(), Feature::Rayleigh);
        assert_eq!(sys.classify(1.1 - w10, 1.1, tol, 12).unwrap(), Feature::Stokes { f: 1, i: 0 });
        assert_eq!(
            sys.classify(2.2 - w30, 1.1, tol, 12).unwrap().to_string(),
            "hyper_raman(3,0)"
        );
        assert_eq!(sys.classify(w10, 1.1, tol, 12).unwrap(), Feature::Transition { f: 1, i: 0 });
        assert!(sys.classify(1.0, 1.1, 0.0, 12).unwrap_err().is_config());
    }

    #[test]
    fn theta_scan_selection_and_smoothness() {
        let grid: Vec<f64> = (0..=30).map(|k| k as f64 * PI / 60.0).collect();
        let at = |omega_l: f64, line| {
            theta_scan(&grid, line, &ModelParams { omega_l, ..ModelParams::default() }, 1).unwrap()
        };
        let one = at(1.1, (0, 1));
        let max = one.iter().copied().fold(0.0, f64::max);
        assert!(one[0] < 1e-20 * max);
        assert!(one[10] > 0.0);
        // (0→3) only emits once ω_L exceeds ω_30
        assert!(at(2.0, (0, 3))[0] > 0.0);

        // Away from intermediate resonances (at ω_L = 1.1 the level ω_20(θ)
        // sweeps through the drive) adjacent points stay within 10×.
        // Exact selection-rule zeros are skipped.
        for curve in [at(1.3, (0, 1)), at(1.8, (0, 3))] {
            let max = curve.iter().copied().fold(0.0, f64::max);
            let live: Vec<f64> = curve.iter().map(|r| if *r > 1e-20 * max { *r } else { 0.0 }).collect();
            for w in live.windows(2).filter(|w| w[0] > 0.0 && w[1] > 0.0) {
                let r = w[1] / w[0];
                assert!((0.1..=10.0).contains(&r), "jump {r} in {curve:?}");
            }
        }
    }
}
