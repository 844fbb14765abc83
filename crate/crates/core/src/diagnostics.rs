//! Error norms, conservative remapping, observed orders and run summaries.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use crate::error::{Result, SolverError};
use crate::integrate::StepRecord;
use crate::mesh::{pressure, Axis, ConservedField, Grid, Invariants, PrimitiveState, ENERGY, MOM_X, MOM_Y, NCOMP, RHO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantity {
    Rho,
    U,
    V,
    P,
    E,
    InternalEnergy,
    /// x-momentum ρu.
    Mu,
    /// y-momentum ρv.
    Mv,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::Rho => "rho",
            Quantity::U => "u",
            Quantity::V => "v",
            Quantity::P => "p",
            Quantity::E => "E",
            Quantity::InternalEnergy => "internal_energy",
            Quantity::Mu => "mu",
            Quantity::Mv => "mv",
        }
    }

    /// Value of the quantity for a conserved state.
    pub fn of_conserved(self, u: &[f64; NCOMP], gamma: f64) -> f64 {
        match self {
            Quantity::Rho => u[RHO],
            Quantity::U => u[MOM_X] / u[RHO],
            Quantity::V => u[MOM_Y] / u[RHO],
            Quantity::P => pressure(u, gamma),
            Quantity::E => u[ENERGY],
            Quantity::InternalEnergy => pressure(u, gamma) / ((gamma - 1.0) * u[RHO]),
            Quantity::Mu => u[MOM_X],
            Quantity::Mv => u[MOM_Y],
        }
    }

    pub fn of_primitive(self, w: &PrimitiveState, gamma: f64) -> f64 {
        let ke = 0.5 * w.rho * (w.vel[0] * w.vel[0] + w.vel[1] * w.vel[1]);
        match self {
            Quantity::Rho => w.rho,
            Quantity::U => w.vel[0],
            Quantity::V => w.vel[1],
            Quantity::P => w.p,
            Quantity::E => w.p / (gamma - 1.0) + ke,
            Quantity::InternalEnergy => w.p / ((gamma - 1.0) * w.rho),
            Quantity::Mu => w.rho * w.vel[0],
            Quantity::Mv => w.rho * w.vel[1],
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Quantity {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "rho" => Quantity::Rho,
            "u" => Quantity::U,
            "v" => Quantity::V,
            "p" => Quantity::P,
            "E" => Quantity::E,
            "internal_energy" | "e" => Quantity::InternalEnergy,
            "mu" => Quantity::Mu,
            "mv" => Quantity::Mv,
            other => return Err(format!("unknown quantity `{other}`")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Norm {
    L1,
    Linf,
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Norm::L1 => "L1",
            Norm::Linf => "Linf",
        })
    }
}

/// What a solution is measured against.
#[derive(Clone, Copy)]
pub enum ErrorReference<'a> {
    /// Point values at cell centres.
    Exact(&'a dyn Fn(f64, f64) -> PrimitiveState),
    /// Another solution on the same domain, remapped conservatively.
    Field(&'a ConservedField),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub quantity: Quantity,
    pub norm: Norm,
    pub value: f64,
    pub resolution: usize,
}

/// Overlap weights of source cells in each target cell along one axis (both
/// spanning the same interval), as `(source index, fraction of the target
/// cell)`. Work in source-cell units so integer ratios give exact weights.
fn overlap_weights(nt: usize, ns: usize) -> Vec<Vec<(usize, f64)>> {
    let width = ns as f64 / nt as f64;
    (0..nt)
        .map(|k| {
            let (a, b) = ((k * ns) as f64 / nt as f64, ((k + 1) * ns) as f64 / nt as f64);
            let first = (a.floor() as usize).min(ns - 1);
            let mut out = Vec::new();
            for s in first..ns {
                let (c, d) = (s as f64, (s + 1) as f64);
                if c >= b {
                    break;
                }
                let w = (b.min(d) - a.max(c)) / width;
                if w > 0.0 {
                    out.push((s, w));
                }
            }
            out
        })
        .collect()
}

/// Conservative transfer of cell averages onto `target` (same domain).
pub fn remap(field: &ConservedField, target: &Grid) -> Result<ConservedField> {
    let src = &field.grid;
    if !src.same_domain(target) {
        return Err(SolverError::IncompatibleGrids("fields cover different domains".into()));
    }
    let wx = overlap_weights(target.cells(Axis::X), src.cells(Axis::X));
    let wy = if target.dim() == 2 { overlap_weights(target.cells(Axis::Y), src.cells(Axis::Y)) } else { vec![vec![(0, 1.0)]] };
    let mut out = ConservedField::zeros(target.clone(), field.eos);
    for (j, row_w) in wy.iter().enumerate() {
        for (i, col_w) in wx.iter().enumerate() {
            let mut acc = [0.0; NCOMP];
            for &(sj, fy) in row_w {
                for &(si, fx) in col_w {
                    let u = field.get_array(src.idx(si as isize, sj as isize));
                    for c in 0..NCOMP {
                        acc[c] += fx * fy * u[c];
                    }
                }
            }
            out.set_array(target.idx(i as isize, j as isize), acc);
        }
    }
    Ok(out)
}

/// Per-cell error of `quantity` over the interior, row-major.
pub fn pointwise_error(field: &ConservedField, reference: ErrorReference<'_>, quantity: Quantity) -> Result<Vec<f64>> {
    let g = &field.grid;
    let gamma = field.eos.gamma;
    let coarse = match reference {
        ErrorReference::Field(r) => Some(remap(r, g)?),
        ErrorReference::Exact(_) => None,
    };
    Ok(field
        .interior()
        .map(|(i, j)| {
            let k = g.idx(i, j);
            let v = quantity.of_conserved(&field.get_array(k), gamma);
            let r = match (&coarse, reference) {
                (Some(c), _) => quantity.of_conserved(&c.get_array(k), gamma),
                (None, ErrorReference::Exact(f)) => {
                    let (x, y) = g.center(i, j);
                    quantity.of_primitive(&f(x, y), gamma)
                }
                (None, ErrorReference::Field(_)) => unreachable!(),
            };
            (v - r).abs()
        })
        .collect())
}

/// Discrete norm of the error: L1 weights by cell volume, L∞ is the maximum.
pub fn error_norm(field: &ConservedField, reference: ErrorReference<'_>, quantity: Quantity, norm: Norm) -> Result<f64> {
    let e = pointwise_error(field, reference, quantity)?;
    Ok(match norm {
        Norm::L1 => e.iter().sum::<f64>() * field.grid.cell_volume(),
        Norm::Linf => e.iter().cloned().fold(0.0, f64::max),
    })
}

pub fn error_report(field: &ConservedField, reference: ErrorReference<'_>, quantity: Quantity, norm: Norm) -> Result<ErrorReport> {
    Ok(ErrorReport { quantity, norm, value: error_norm(field, reference, quantity, norm)?, resolution: field.grid.nx() })
}

/// Pairwise orders `log(e_k / e_{k+1}) / log(h_k / h_{k+1})`.
pub fn observed_order(errors: &[(f64, f64)]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln()).collect()
}

/// Least-squares slope of `log e` against `log h`.
pub fn fitted_order(errors: &[(f64, f64)]) -> f64 {
    let n = errors.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = errors.iter().map(|&(h, e)| (h.ln(), e.ln())).unzip();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Summary of a run assembled from its step history.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub steps: usize,
    pub t_final: f64,
    pub min_rho: f64,
    pub min_p: f64,
    pub max_speed: f64,
    pub max_sigma_residual: f64,
    pub max_sigma_sweeps: usize,
    /// Relative drift of mass, momentum (x, y) and energy.
    pub drift: [f64; 4],
    pub wall_time: Duration,
    pub nan_seen: bool,
    /// Step at which the run stopped and why.
    pub abort: Option<(usize, String)>,
}

pub fn run_report(history: &[StepRecord], initial: &Invariants, last: &Invariants, wall_time: Duration, abort: Option<(usize, String)>) -> RunReport {
    let mut r = RunReport {
        steps: history.last().map_or(0, |h| h.step),
        t_final: history.last().map_or(0.0, |h| h.t),
        min_rho: f64::INFINITY,
        min_p: f64::INFINITY,
        max_speed: 0.0,
        max_sigma_residual: 0.0,
        max_sigma_sweeps: 0,
        drift: last.relative_drift(initial),
        wall_time,
        nan_seen: false,
        abort,
    };
    for h in history {
        r.min_rho = r.min_rho.min(h.min_rho);
        r.min_p = r.min_p.min(h.min_p);
        r.max_speed = r.max_speed.max(h.max_speed);
        r.max_sigma_residual = r.max_sigma_residual.max(h.sigma_residual);
        r.max_sigma_sweeps = r.max_sigma_sweeps.max(h.sigma_sweeps);
        r.nan_seen |= [h.dt, h.min_rho, h.min_p, h.max_speed, h.sigma_residual].iter().any(|v| v.is_nan());
    }
    r.nan_seen |= r.drift.iter().any(|v| v.is_nan());
    r
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "steps = {}", self.steps)?;
        writeln!(f, "t_final = {:.16e}", self.t_final)?;
        writeln!(f, "min_rho = {:.16e}", self.min_rho)?;
        writeln!(f, "min_p = {:.16e}", self.min_p)?;
        writeln!(f, "max_speed = {:.16e}", self.max_speed)?;
        writeln!(f, "max_sigma_residual = {:.16e}", self.max_sigma_residual)?;
        writeln!(f, "max_sigma_sweeps = {}", self.max_sigma_sweeps)?;
        for (name, d) in ["mass", "momentum_x", "momentum_y", "energy"].iter().zip(self.drift) {
            writeln!(f, "drift_{name} = {d:.16e}")?;
        }
        writeln!(f, "nan_seen = {}", self.nan_seen)?;
        match &self.abort {
            Some((step, cause)) => writeln!(f, "abort = step {step}: {cause}"),
            None => writeln!(f, "abort = none"),
        }
    }
}
