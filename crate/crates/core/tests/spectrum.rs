//! Spectrum-level properties that need many driven solves.

use usc_raman::config::linspace;
use usc_raman::model::{build_hamiltonian, diagonalize, Layout, ModelParams};
use usc_raman::spectrum::{emission_at, emission_spectrum, excitation_emission_map, fwhm, local_maxima, sweep_fock};

fn omega_10(p: &ModelParams) -> f64 {
    let eig = diagonalize(&build_hamiltonian(p, Layout::new(30, false)).unwrap(), None).unwrap();
    eig.transition(1, 0)
}

#[test]
fn halving_sensor_linewidth_halves_rayleigh_width() {
    let base = ModelParams::default();
    let grid = linspace(base.omega_l - 5e-3, base.omega_l + 5e-3, 81);
    let width = |gamma_s: f64| {
        let p = ModelParams {
            sensor_decay: gamma_s,
            ..base.clone()
        };
        let c = emission_spectrum(&p, &grid, 1).unwrap();
        fwhm(&c.omega_s_grid, &c.intensity).unwrap()
    };
    let (w1, w2) = (width(1e-3), width(5e-4));
    let ratio = w1 / w2;
    assert!((ratio - 2.0).abs() < 0.4, "FWHM {w1:.3e} vs {w2:.3e}, ratio {ratio:.3}");
}

#[test]
fn stokes_peak_grows_with_coupling() {
    let gamma_s = ModelParams::default().sensor_decay;
    let mut areas = Vec::new();
    for eta in [0.1, 0.2, 0.3] {
        let p = ModelParams {
            eta,
            ..ModelParams::default()
        };
        let center = p.omega_l - omega_10(&p);
        let grid = linspace(center - 6.0 * gamma_s, center + 6.0 * gamma_s, 49);
        let c = emission_spectrum(&p, &grid, 1).unwrap();
        areas.push(c.peak_intensity(center, 5.0 * gamma_s).unwrap());
    }
    assert!(areas[0] < areas[1] && areas[1] < areas[2], "{areas:?}");
    assert!(areas[0] > 0.0);
}

#[test]
fn small_map_equals_independent_point_solves() {
    let p = ModelParams::default();
    let (wl, ws) = ([1.05, 1.1], [0.3, 0.35]);
    let map = excitation_emission_map(&p, &wl, &ws, 2).unwrap();
    let n_fock = sweep_fock(&p, 1.1).unwrap();
    assert_eq!(map.n_fock, n_fock);
    let raw: Vec<Vec<f64>> = wl
        .iter()
        .map(|&l| ws.iter().map(|&s| emission_at(&p, n_fock, s, l).unwrap().0).collect())
        .collect();
    let max = raw.iter().flatten().copied().fold(0.0, f64::max);
    assert_eq!(map.normalization, max);
    for (row_map, row_raw) in map.intensity.iter().zip(&raw) {
        for (a, b) in row_map.iter().zip(row_raw) {
            assert_eq!(a.to_bits(), (b * (1.0 / max)).to_bits());
        }
    }
}

#[test]
fn single_point_grid_is_one_solve() {
    let p = ModelParams::default();
    let c = emission_spectrum(&p, &[0.5], 1).unwrap();
    let n = sweep_fock(&p, p.omega_l).unwrap();
    assert_eq!(c.intensity, vec![emission_at(&p, n, 0.5, p.omega_l).unwrap().0]);
    assert!(c.intensity[0] > 0.0);
}

fn window_area(p: &ModelParams, center: f64) -> f64 {
    let g = p.sensor_decay;
    let c = emission_spectrum(p, &linspace(center - 6.0 * g, center + 6.0 * g, 25), 1).unwrap();
    c.peak_intensity(center, 5.0 * g).unwrap()
}

#[test]
fn anti_stokes_ridge_needs_temperature() {
    let areas = |t: f64| {
        let p = ModelParams {
            temperature: t,
            ..ModelParams::default()
        };
        let w10 = omega_10(&p);
        (window_area(&p, p.omega_l - w10), window_area(&p, p.omega_l + w10))
    };
    let (stokes_cold, anti_cold) = areas(0.0);
    let (stokes_hot, anti_hot) = areas(0.15);
    assert!(anti_cold < 0.01 * stokes_cold, "{anti_cold:.3e} vs {stokes_cold:.3e}");
    assert!(anti_hot > 10.0 * anti_cold, "{anti_hot:.3e} vs {anti_cold:.3e}");
    assert!((stokes_hot / stokes_cold - 1.0).abs() < 0.5);
}

fn peak_near(p: &ModelParams, center: f64, half: f64) -> Option<(f64, f64)> {
    let c = emission_spectrum(p, &linspace(center - half, center + half, 21), 1).unwrap();
    local_maxima(&c.intensity)
        .into_iter()
        .map(|k| (c.omega_s_grid[k], c.intensity[k]))
        .min_by(|a, b| (a.0 - center).abs().total_cmp(&(b.0 - center).abs()))
}

#[test]
fn transition_peaks_do_not_move_with_drive() {
    let p = ModelParams::default();
    let w10 = omega_10(&p);
    let xs = [1.0, 1.25, 1.5];
    let ys: Vec<f64> = xs
        .iter()
        .map(|&wl| peak_near(&ModelParams { omega_l: wl, ..p.clone() }, w10, 0.01).unwrap().0)
        .collect();
    let slope = (ys[2] - ys[0]) / (xs[2] - xs[0]);
    assert!(slope.abs() < 0.05, "{ys:?}");
    assert!(ys.iter().all(|y| (y - w10).abs() <= 1e-3), "{ys:?} vs {w10}");
}

#[test]
fn single_spectrum_feature_ordering() {
    let p = ModelParams::default();
    let w10 = omega_10(&p);
    let (_, stokes) = peak_near(&p, p.omega_l - w10, 0.005).expect("Stokes peak");
    let (_, transition) = peak_near(&p, w10, 0.005).expect("transition peak");
    let c = emission_spectrum(&p, &linspace(0.9, 1.1 + 0.05, 26), 1).unwrap();
    let strongest = local_maxima(&c.intensity)
        .into_iter()
        .map(|k| (c.omega_s_grid[k], c.intensity[k]))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("feature near the cavity frequency");
    assert!((strongest.0 - p.omega_c).abs() <= 0.1 + 1e-12, "{strongest:?}");
    assert!(stokes < strongest.1, "{stokes:.3e} vs {strongest:?}");
    assert!(transition > 0.0 && stokes > 0.0);
}
