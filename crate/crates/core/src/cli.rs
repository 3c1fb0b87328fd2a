//! Task dispatch behind the `usc-raman` binary.

use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::Serialize;

use crate::config::{load_config, ClassifyOptions, RamanOptions, RunConfig, Task, Zoom};
use crate::error::{Error, Result};
use crate::model::{adaptive_n_fock, build_hamiltonian, diagonalize, fock_tail, parity_operator, Layout, ModelParams, FOCK_TAIL_TOLERANCE, MIN_CONVERGED_STATES};
use crate::output::{fmt_f64, sidecar_path, to_json, write_atomic, Csv};
use crate::raman::RamanSystem;
use crate::spectrum::{emission_spectrum, excitation_emission_map, PointDiagnostics};
use crate::verify::run_suite;

/// Command-line overrides layered on top of the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub zoom: Option<String>,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

pub fn exit_code(e: &Error) -> i32 {
    if e.is_config() {
        EXIT_CONFIG
    } else {
        EXIT_NUMERICAL
    }
}

/// Resolves the configuration for `task` from file plus overrides.
pub fn resolve(task: Task, o: &Overrides) -> Result<RunConfig> {
    let (mut cfg, warnings) = match &o.config {
        Some(path) => load_config(path)?,
        None => (RunConfig::default(), Vec::new()),
    };
    for w in warnings {
        warn!("{w}");
    }
    if let Some(t) = cfg.task {
        if t != task {
            return Err(Error::config("task", format!("config is for `{t}` but `{task}` was requested")));
        }
    }
    cfg.task = Some(task);
    if let Some(w) = o.workers {
        cfg.workers = w;
    }
    if let Some(z) = &o.zoom {
        cfg.zoom = Some(z.parse::<Zoom>()?);
    }
    if let Some(out) = &o.out {
        cfg.output_path = Some(out.to_string_lossy().into_owned());
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Everything written for one run, before it touches the filesystem.
#[derive(Clone, Debug)]
pub struct Rendered {
    pub body: String,
    pub sidecar: String,
    pub extension: &'static str,
    /// False when a `verify` check failed.
    pub success: bool,
}

/// The config as recorded in sidecars. Worker count and output path are left
/// out so files do not depend on how a run was scheduled.
#[derive(Serialize)]
struct ResolvedConfig<'a> {
    task: Task,
    model: &'a ModelParams,
    omega_s_grid: Vec<f64>,
    #[serde(rename = "omega_L_grid")]
    omega_l_grid: Vec<f64>,
    zoom: Option<Zoom>,
    raman: &'a RamanOptions,
    classify: &'a ClassifyOptions,
}

#[derive(Serialize)]
struct Sidecar<'a, D: Serialize> {
    config: ResolvedConfig<'a>,
    n_fock: Option<usize>,
    diagnostics: D,
}

#[derive(Serialize, Default)]
struct SweepSummary {
    points: usize,
    max_n_floquet_used: usize,
    max_convergence_delta: f64,
    max_residual: f64,
    min_eigenvalue: f64,
    retained_states_min: usize,
    retained_states_max: usize,
    regularized_points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    normalization: Option<f64>,
}

fn summarize(d: &[PointDiagnostics]) -> SweepSummary {
    SweepSummary {
        points: d.len(),
        max_n_floquet_used: d.iter().map(|x| x.n_floquet_used).max().unwrap_or(0),
        max_convergence_delta: d.iter().map(|x| x.convergence_delta).fold(0.0, f64::max),
        max_residual: d.iter().map(|x| x.residual).fold(0.0, f64::max),
        min_eigenvalue: d.iter().map(|x| x.min_eigenvalue).fold(f64::INFINITY, f64::min),
        retained_states_min: d.iter().map(|x| x.retained_states).min().unwrap_or(0),
        retained_states_max: d.iter().map(|x| x.retained_states).max().unwrap_or(0),
        regularized_points: d.iter().filter(|x| x.regularized).count(),
        normalization: None,
    }
}

fn sidecar<D: Serialize>(cfg: &RunConfig, task: Task, n_fock: Option<usize>, diagnostics: D) -> Result<String> {
    to_json(&Sidecar {
        config: ResolvedConfig {
            task,
            model: &cfg.model,
            omega_s_grid: cfg.omega_s_grid()?,
            omega_l_grid: cfg.omega_l_grid()?,
            zoom: cfg.zoom,
            raman: &cfg.raman,
            classify: &cfg.classify,
        },
        n_fock,
        diagnostics,
    })
}

/// Computes a task's outputs in memory.
pub fn render(task: Task, cfg: &RunConfig) -> Result<Rendered> {
    let p = &cfg.model;
    match task {
        Task::Eigen => {
            let n = match p.n_fock {
                Some(n) => n,
                None => adaptive_n_fock(p, MIN_CONVERGED_STATES, None)?,
            };
            let layout = Layout::new(n, false);
            let eig = diagonalize(&build_hamiltonian(p, layout)?, Some(&parity_operator(layout)))?;
            let converged = (1..=eig.len())
                .take_while(|&k| fock_tail(&eig, layout, k) < FOCK_TAIL_TOLERANCE)
                .last()
                .unwrap_or(0);
            if converged < MIN_CONVERGED_STATES {
                warn!("only {converged} levels converged at n_fock = {n}");
            }
            let shifted = eig.shifted_energies();
            let mut csv = Csv::new(&["index", "energy", "energy_shifted", "parity"]);
            for (k, ((e, s), q)) in eig.energies().iter().zip(&shifted).zip(eig.parity()).take(converged).enumerate() {
                csv.row([k.to_string(), fmt_f64(*e), fmt_f64(*s), q.to_string()]);
            }
            #[derive(Serialize)]
            struct D {
                converged_levels: usize,
                fock_tail: f64,
            }
            let diag = D {
                converged_levels: converged,
                fock_tail: fock_tail(&eig, layout, converged),
            };
            Ok(Rendered {
                body: csv.into_string(),
                sidecar: sidecar(cfg, task, Some(n), diag)?,
                extension: "csv",
                success: true,
            })
        }
        Task::Spectrum => {
            let grid = cfg.omega_s_grid()?;
            let curve = emission_spectrum(p, &grid, cfg.workers)?;
            let mut csv = Csv::new(&["omega_s", "intensity"]);
            for (x, y) in curve.omega_s_grid.iter().zip(&curve.intensity) {
                csv.row([fmt_f64(*x), fmt_f64(*y)]);
            }
            Ok(Rendered {
                body: csv.into_string(),
                sidecar: sidecar(cfg, task, Some(curve.n_fock), summarize(&curve.diagnostics))?,
                extension: "csv",
                success: true,
            })
        }
        Task::Map => {
            let map = excitation_emission_map(p, &cfg.omega_l_grid()?, &cfg.omega_s_grid()?, cfg.workers)?;
            let mut csv = Csv::new(&["omega_L", "omega_s", "intensity"]);
            for (wl, row) in map.omega_l_grid.iter().zip(&map.intensity) {
                for (ws, y) in map.omega_s_grid.iter().zip(row) {
                    csv.row([fmt_f64(*wl), fmt_f64(*ws), fmt_f64(*y)]);
                }
            }
            let mut summary = summarize(&map.diagnostics);
            summary.normalization = Some(map.normalization);
            Ok(Rendered {
                body: csv.into_string(),
                sidecar: sidecar(cfg, task, Some(map.n_fock), summary)?,
                extension: "csv",
                success: true,
            })
        }
        Task::Raman => {
            let sys = RamanSystem::new(p)?;
            let lines = sys.line_table(p.omega_l, p.temperature, cfg.raman.n_states)?;
            let mut csv = Csv::new(&["i", "f", "kind", "omega_fi", "omega_R", "abs_M", "relative_rate", "flags"]);
            for l in &lines {
                csv.row([
                    l.i.to_string(),
                    l.f.to_string(),
                    l.kind.to_string(),
                    fmt_f64(l.omega_fi),
                    fmt_f64(l.omega_r),
                    fmt_f64(l.amplitude.norm()),
                    fmt_f64(l.relative_rate),
                    if l.resonance_enhanced { "resonance_enhanced".into() } else { String::new() },
                ]);
            }
            #[derive(Serialize)]
            struct D {
                lines: usize,
                resonance_enhanced: usize,
                intermediate_states: usize,
            }
            let diag = D {
                lines: lines.len(),
                resonance_enhanced: lines.iter().filter(|l| l.resonance_enhanced).count(),
                intermediate_states: sys.n_intermediate,
            };
            Ok(Rendered {
                body: csv.into_string(),
                sidecar: sidecar(cfg, task, Some(sys.layout.n_fock), diag)?,
                extension: "csv",
                success: true,
            })
        }
        Task::Classify => {
            if cfg.classify.queries.is_empty() {
                return Err(Error::config("classify.queries", "no queries given"));
            }
            let sys = RamanSystem::new(p)?;
            let tol = cfg.classify_tol();
            #[derive(Serialize)]
            struct Labeled {
                #[serde(rename = "omega_L")]
                omega_l: f64,
                omega_s: f64,
                label: String,
            }
            let labels = cfg
                .classify
                .queries
                .iter()
                .map(|q| {
                    Ok(Labeled {
                        omega_l: q.omega_l,
                        omega_s: q.omega_s,
                        label: sys.classify(q.omega_s, q.omega_l, tol, cfg.classify.n_states)?.to_string(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            #[derive(Serialize)]
            struct D {
                tol: f64,
            }
            Ok(Rendered {
                body: to_json(&labels)?,
                sidecar: sidecar(cfg, task, Some(sys.layout.n_fock), D { tol })?,
                extension: "json",
                success: true,
            })
        }
        Task::Verify => {
            let checks = run_suite(p);
            let mut body = String::new();
            for c in &checks {
                body.push_str(&format!("{} {}: {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail));
            }
            Ok(Rendered {
                body,
                sidecar: sidecar(cfg, task, None, &checks)?,
                extension: "txt",
                success: checks.iter().all(|c| c.passed),
            })
        }
    }
}

fn default_out(task: Task, ext: &str) -> PathBuf {
    PathBuf::from(format!("usc-raman-{task}.{ext}"))
}

/// Runs `task` end to end and returns the process exit code.
pub fn run(task: Task, o: &Overrides) -> i32 {
    match run_inner(task, o) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn run_inner(task: Task, o: &Overrides) -> Result<i32> {
    let cfg = resolve(task, o)?;
    info!("running {task} with {} worker(s)", cfg.workers);
    let out = render(task, &cfg)?;
    let path = cfg.output_path.as_ref().map(PathBuf::from);
    if task == Task::Verify {
        print!("{}", out.body);
    }
    let target = match (path, task) {
        (Some(p), _) => Some(p),
        (None, Task::Verify) => None,
        (None, _) => Some(default_out(task, out.extension)),
    };
    if let Some(p) = target {
        write_outputs(&p, &out)?;
        info!("wrote {}", p.display());
    }
    Ok(if out.success { EXIT_OK } else { EXIT_NUMERICAL })
}

pub fn write_outputs(path: &Path, out: &Rendered) -> Result<()> {
    write_atomic(path, out.body.as_bytes())?;
    write_atomic(&sidecar_path(path), out.sidecar.as_bytes())
}
