//! Single runs and convergence studies driven by a [`RunConfig`], with CSV
//! output.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::cases::build_case;
use crate::config::{ConfigError, Regime, RunConfig, SchemeSettings};
use crate::diagnostics::{error_norm, observed_order, run_report, ErrorReference, Norm, Quantity, RunReport};
use crate::error::SolverError;
use crate::integrate::Simulation;
use crate::mesh::{ConservedField, Grid};

#[derive(Debug, Error)]
pub enum DriverError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl DriverError {
    /// Process exit code: 2 for a non-physical abort, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            DriverError::Solver(e) if e.is_non_physical() => 2,
            _ => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> DriverError + '_ {
    move |source| DriverError::Io { path: path.to_path_buf(), source }
}

/// Full-precision (17 significant digit) number formatting used in every CSV.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Snapshot rows: `x,rho,u,p,E,sigma` in 1D, `x,y,rho,u,v,p,E,sigma` in 2D.
pub fn snapshot_csv(field: &ConservedField, sigma: &[f64]) -> crate::Result<String> {
    let g = &field.grid;
    let two_d = g.dim() == 2;
    let mut out = String::from(if two_d { "x,y,rho,u,v,p,E,sigma\n" } else { "x,rho,u,p,E,sigma\n" });
    for (k, (i, j)) in field.interior().enumerate() {
        let (x, y) = g.center(i, j);
        let w = field.primitive(i, j)?;
        let e = field.get_array(g.idx(i, j))[crate::mesh::ENERGY];
        let mut cols = vec![x];
        if two_d {
            cols.extend([y, w.rho, w.vel[0], w.vel[1]]);
        } else {
            cols.extend([w.rho, w.vel[0]]);
        }
        cols.extend([w.p, e, sigma[k]]);
        let line: Vec<String> = cols.into_iter().map(fmt_num).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    Ok(out)
}

fn write_file(path: &Path, text: &str) -> Result<(), DriverError> {
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(text.as_bytes()).map_err(io_err(path))
}

/// What a single run produced.
#[derive(Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub snapshots: Vec<PathBuf>,
    pub field: ConservedField,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.abort.is_some() {
            2
        } else {
            0
        }
    }
}

/// Snapshot times within `(0, t_final]`, ascending, always ending at `t_final`
/// (a requested `0` is kept).
fn snapshot_schedule(requested: &[f64], t_final: f64) -> Vec<f64> {
    let mut ts: Vec<f64> = requested.iter().copied().filter(|&t| t < t_final).collect();
    ts.push(t_final);
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}

/// Run one configuration, writing snapshots, the step series and a report
/// into `dir`. A non-physical state ends the run early with the abort
/// recorded in the report rather than as an error.
pub fn run(cfg: &RunConfig, dir: &Path) -> Result<RunOutcome, DriverError> {
    let case = build_case(&cfg.case, cfg.m, &cfg.case_options)?;
    let scheme = cfg.scheme.build(&case.grid)?;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut sim = Simulation::new(case.field, case.bc, scheme)?;
    let start = Instant::now();
    let mut snapshots = Vec::new();
    let mut abort = None;
    for t in snapshot_schedule(&cfg.output.snapshot_times, case.spec.t_final) {
        if let Err(e) = sim.advance_to(t) {
            if e.is_non_physical() {
                abort = Some((sim.steps + 1, e.to_string()));
                break;
            }
            return Err(e.into());
        }
        let sigma = sim.current_sigma();
        let path = dir.join(format!("snapshot_t{t:.6}.csv"));
        write_file(&path, &snapshot_csv(&sim.field, &sigma)?)?;
        snapshots.push(path);
    }
    let wall = start.elapsed();
    if cfg.output.series_stride > 0 {
        write_file(&dir.join("series.csv"), &series_csv(&sim, cfg.output.series_stride))?;
    }
    let report = run_report(&sim.history, &sim.initial_invariants, &sim.invariants(), wall, abort);
    write_file(&dir.join("report.txt"), &report.to_string())?;
    Ok(RunOutcome { report, snapshots, field: sim.field })
}

fn series_csv(sim: &Simulation, stride: usize) -> String {
    let mut out = String::from("step,t,dt,min_rho,min_p,max_speed,sigma_residual,sigma_sweeps\n");
    let last = sim.history.len().saturating_sub(1);
    for (k, h) in sim.history.iter().enumerate() {
        if h.step % stride != 0 && k != last {
            continue;
        }
        let nums: Vec<String> = [h.t, h.dt, h.min_rho, h.min_p, h.max_speed, h.sigma_residual].into_iter().map(fmt_num).collect();
        out.push_str(&format!("{},{},{}\n", h.step, nums.join(","), h.sigma_sweeps));
    }
    out
}

/// Advance one configuration and return copies of the field at each of `times`.
pub fn solve_at_times(
    case_name: &str,
    m: usize,
    cfg: &RunConfig,
    settings: &SchemeSettings,
    times: &[f64],
) -> Result<Vec<ConservedField>, DriverError> {
    let case = build_case(case_name, m, &cfg.case_options)?;
    let scheme = settings.build(&case.grid)?;
    let mut sim = Simulation::new(case.field, case.bc, scheme)?;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        sim.advance_to(t)?;
        out.push(sim.field.clone());
    }
    Ok(out)
}

/// One row of a convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub time: f64,
    pub m: usize,
    pub h: f64,
    pub alpha: f64,
    pub err_rho: f64,
    pub err_mu: f64,
    pub err_e: f64,
    /// Order against the previous row at the same time (in h, or in α for
    /// an α sweep).
    pub order: Option<f64>,
}

impl StudyRow {
    pub fn err_sum(&self) -> f64 {
        self.err_rho + self.err_mu + self.err_e
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyResult {
    pub regime: Regime,
    pub rows: Vec<StudyRow>,
}

impl StudyResult {
    pub fn rows_at(&self, time: f64) -> Vec<&StudyRow> {
        self.rows.iter().filter(|r| r.time == time).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("time,m,h,alpha,err_rho,err_mu,err_E,err_sum,order\n");
        for r in &self.rows {
            let nums: Vec<String> = [r.h, r.alpha, r.err_rho, r.err_mu, r.err_e, r.err_sum()].into_iter().map(fmt_num).collect();
            let order = r.order.map(fmt_num).unwrap_or_default();
            out.push_str(&format!("{},{},{},{}\n", fmt_num(r.time), r.m, nums.join(","), order));
        }
        out
    }
}

fn l1_errors(field: &ConservedField, reference: &ConservedField) -> crate::Result<[f64; 3]> {
    let r = ErrorReference::Field(reference);
    Ok([error_norm(field, r, Quantity::Rho, Norm::L1)?, error_norm(field, r, Quantity::Mu, Norm::L1)?, error_norm(field, r, Quantity::E, Norm::L1)?])
}

/// Run the study described by `cfg.study`: errors are L1 norms of density,
/// momentum and total energy against a self-computed reference, which is the
/// same scheme at `ref_factor` times the finest resolution (or, for an α
/// sweep, the smallest α).
pub fn run_convergence_study(cfg: &RunConfig) -> Result<StudyResult, DriverError> {
    let study = cfg.study.as_ref().ok_or_else(|| ConfigError::Validation("no [study] section".into()))?;
    let times = if study.times.is_empty() { vec![build_case(&cfg.case, cfg.m, &cfg.case_options)?.spec.t_final] } else { study.times.clone() };
    let spacing = |m: usize| -> crate::Result<f64> {
        let c = build_case(&cfg.case, m, &cfg.case_options)?;
        Ok(c.grid.max_spacing())
    };
    let alpha_of = |grid: &Grid, s: &SchemeSettings| -> crate::Result<f64> { Ok(s.build(grid)?.igr.alpha) };
    let mut rows = Vec::new();
    match study.regime {
        Regime::FixedAlpha | Regime::Joint => {
            let finest = study.resolutions[study.resolutions.len() - 1];
            let reference = solve_at_times(&cfg.case, finest * study.ref_factor, cfg, &cfg.scheme, &times)?;
            let mut per_m = Vec::new();
            for &m in &study.resolutions {
                let fields = solve_at_times(&cfg.case, m, cfg, &cfg.scheme, &times)?;
                let grid = fields[0].grid.clone();
                per_m.push((m, spacing(m)?, alpha_of(&grid, &cfg.scheme)?, fields));
            }
            for (k, &t) in times.iter().enumerate() {
                let mut pts = Vec::new();
                for (m, h, alpha, fields) in &per_m {
                    let [err_rho, err_mu, err_e] = l1_errors(&fields[k], &reference[k])?;
                    let row = StudyRow { time: t, m: *m, h: *h, alpha: *alpha, err_rho, err_mu, err_e, order: None };
                    pts.push((*h, row.err_sum()));
                    rows.push(row);
                }
                let orders = observed_order(&pts);
                let first = rows.len() - pts.len();
                for (o, row) in orders.into_iter().zip(rows[first + 1..].iter_mut()) {
                    row.order = Some(o);
                }
            }
        }
        Regime::AlphaSweep => {
            let mut alphas = study.alphas.clone();
            alphas.sort_by(|a, b| b.total_cmp(a));
            let h = spacing(cfg.m)?;
            let with_alpha = |a: f64| SchemeSettings { alpha: Some(a), ..cfg.scheme.clone() };
            let smallest = alphas[alphas.len() - 1];
            let reference = solve_at_times(&cfg.case, cfg.m, cfg, &with_alpha(smallest), &times)?;
            let runs: Vec<_> = alphas[..alphas.len() - 1]
                .iter()
                .map(|&a| solve_at_times(&cfg.case, cfg.m, cfg, &with_alpha(a), &times).map(|f| (a, f)))
                .collect::<Result<_, _>>()?;
            for (k, &t) in times.iter().enumerate() {
                let mut pts = Vec::new();
                for (a, fields) in &runs {
                    let [err_rho, err_mu, err_e] = l1_errors(&fields[k], &reference[k])?;
                    let row = StudyRow { time: t, m: cfg.m, h, alpha: *a, err_rho, err_mu, err_e, order: None };
                    pts.push((*a, row.err_sum()));
                    rows.push(row);
                }
                let orders = observed_order(&pts);
                let first = rows.len() - pts.len();
                for (o, row) in orders.into_iter().zip(rows[first + 1..].iter_mut()) {
                    row.order = Some(o);
                }
            }
        }
    }
    Ok(StudyResult { regime: study.regime, rows })
}

/// Run a study and write `study.csv` into `dir`.
pub fn run_study(cfg: &RunConfig, dir: &Path) -> Result<(StudyResult, PathBuf), DriverError> {
    let result = run_convergence_study(cfg)?;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join("study.csv");
    write_file(&path, &result.to_csv())?;
    Ok((result, path))
}

/// Wall time formatted for console output.
pub fn fmt_duration(d: Duration) -> String {
    format!("{:.3} s", d.as_secs_f64())
}
