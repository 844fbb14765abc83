//! Semi-discrete right-hand side, CFL time step and SSP-RK3 stepping.

use std::fmt;
use std::str::FromStr;

use crate::error::{CellIndex, Result, SolverError};
use crate::flux::{numerical_flux, FluxKind};
use crate::igr::{solve_sigma, IgrParams, SigmaField};
use crate::lad::{lad_coefficient, lad_terms, LadParams};
use crate::mesh::{apply_boundary, pressure, total_invariants, Axis, BoundarySpec, ConservedField, Grid, Invariants, ENERGY, MOM_X, NCOMP, RHO};
use crate::reconstruct::{reconstruct_row, ReconstructionKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Igr,
    Weno5,
    Lad,
    Plain,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Igr => "igr",
            Scheme::Weno5 => "weno5",
            Scheme::Lad => "lad",
            Scheme::Plain => "plain",
        })
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "igr" => Ok(Scheme::Igr),
            "weno5" | "weno5_component" => Ok(Scheme::Weno5),
            "lad" => Ok(Scheme::Lad),
            "plain" => Ok(Scheme::Plain),
            other => Err(format!("unknown scheme `{other}`")),
        }
    }
}

pub fn default_cfl(dim: usize) -> f64 {
    if dim == 1 {
        0.4
    } else {
        0.3
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub flux_kind: FluxKind,
    pub recon: ReconstructionKind,
    pub igr: IgrParams,
    pub lad: LadParams,
    pub cfl: f64,
}

impl SchemeConfig {
    fn base(scheme: Scheme, recon: ReconstructionKind, dim: usize) -> Self {
        SchemeConfig {
            scheme,
            flux_kind: FluxKind::Rusanov,
            recon,
            igr: IgrParams { alpha: 0.0, max_sweeps: 50, rel_tol: crate::igr::default_rel_tol(dim) },
            lad: LadParams::default(),
            cfl: default_cfl(dim),
        }
    }

    /// IGR with linear5 reconstruction, Lax-Friedrichs flux and
    /// `alpha = alpha_factor * max(dx, dy)^2`.
    pub fn igr(grid: &Grid, alpha_factor: f64) -> Result<Self> {
        let mut cfg = Self::base(Scheme::Igr, ReconstructionKind::Linear5, grid.dim());
        cfg.igr = IgrParams::from_factor(grid, alpha_factor)?;
        Ok(cfg)
    }

    /// Component-wise WENO5 with Lax-Friedrichs flux.
    pub fn weno5(dim: usize) -> Self {
        Self::base(Scheme::Weno5, ReconstructionKind::Weno5Component, dim)
    }

    pub fn lad(dim: usize, lad: LadParams) -> Self {
        let mut cfg = Self::base(Scheme::Lad, ReconstructionKind::Linear5, dim);
        cfg.lad = lad;
        cfg
    }

    pub fn plain(dim: usize) -> Self {
        Self::base(Scheme::Plain, ReconstructionKind::Linear5, dim)
    }

    pub fn with_flux(mut self, kind: FluxKind) -> Self {
        self.flux_kind = kind;
        self
    }

    pub fn with_cfl(mut self, cfl: f64) -> Self {
        self.cfl = cfl;
        self
    }

    pub fn with_recon(mut self, recon: ReconstructionKind) -> Self {
        self.recon = recon;
        self
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(SolverError::InvalidParameter(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        let weno = self.recon == ReconstructionKind::Weno5Component;
        match self.scheme {
            Scheme::Igr | Scheme::Plain if weno => {
                return Err(SolverError::InvalidParameter(format!("scheme {} requires a linear reconstruction", self.scheme)))
            }
            Scheme::Weno5 if !weno => return Err(SolverError::InvalidParameter("scheme weno5 requires recon = weno5_component".into())),
            Scheme::Lad if dim != 1 => return Err(SolverError::InvalidParameter("LAD is only available in 1D".into())),
            _ => {}
        }
        IgrParams::new(self.igr.alpha, self.igr.max_sweeps, self.igr.rel_tol)?;
        LadParams::new(self.lad.coeff, self.lad.smoothing_passes)?;
        Ok(())
    }
}

/// Per-step extrema gathered while computing the time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateExtrema {
    pub min_rho: f64,
    pub min_p: f64,
    pub max_speed: f64,
    /// `sum over axes of max(|u_a| + c) / dx_a`.
    pub inverse_dt: f64,
}

/// Scan interior cells for validity and wave speeds.
pub fn state_extrema(field: &ConservedField) -> Result<StateExtrema> {
    let g = &field.grid;
    let gamma = field.eos.gamma;
    let mut ext = StateExtrema { min_rho: f64::INFINITY, min_p: f64::INFINITY, max_speed: 0.0, inverse_dt: 0.0 };
    let mut axis_max = [0.0f64; 2];
    for j in 0..g.ny() as isize {
        for i in 0..g.nx() as isize {
            let k = g.idx(i, j);
            let u = field.get_array(k);
            let p = pressure(&u, gamma);
            if !(u[RHO] > 0.0) || !(p > 0.0) || !u[MOM_X].is_finite() || !u[crate::mesh::MOM_Y].is_finite() {
                return Err(SolverError::non_physical(u[RHO], p).at_cell(CellIndex { i, j }));
            }
            let c = (gamma * p / u[RHO]).sqrt();
            let (vx, vy) = (u[MOM_X] / u[RHO], u[crate::mesh::MOM_Y] / u[RHO]);
            axis_max[0] = axis_max[0].max(vx.abs() + c);
            axis_max[1] = axis_max[1].max(vy.abs() + c);
            ext.min_rho = ext.min_rho.min(u[RHO]);
            ext.min_p = ext.min_p.min(p);
            ext.max_speed = ext.max_speed.max((vx * vx + vy * vy).sqrt());
        }
    }
    ext.inverse_dt = Axis::all(g.dim()).iter().map(|&a| axis_max[a.index()] / g.spacing(a)).sum();
    Ok(ext)
}

/// `cfl / sum_a(max(|u_a| + c) / dx_a)`.
pub fn compute_dt(field: &ConservedField, cfl: f64) -> Result<f64> {
    Ok(cfl / state_extrema(field)?.inverse_dt)
}

/// Work buffers for one right-hand-side evaluation.
#[derive(Debug, Clone)]
struct Workspace {
    flux: [Vec<f64>; NCOMP],
    left: [Vec<f64>; NCOMP],
    right: [Vec<f64>; NCOMP],
}

impl Workspace {
    fn new(grid: &Grid) -> Self {
        let n = (grid.nx() + 1) * (grid.ny() + 1);
        let row = grid.nx() + 1;
        Workspace {
            flux: std::array::from_fn(|_| vec![0.0; n]),
            left: std::array::from_fn(|_| vec![0.0; row]),
            right: std::array::from_fn(|_| vec![0.0; row]),
        }
    }
}

/// Face fluxes along `axis` into `ws.flux`, indexed like
/// [`reconstruct_field`](crate::reconstruct::reconstruct_field).
fn face_fluxes(field: &ConservedField, cfg: &SchemeConfig, axis: Axis, sigma: Option<&[f64]>, ws: &mut Workspace) -> Result<()> {
    let g = &field.grid;
    let (nx, ny) = (g.nx() as isize, g.ny() as isize);
    let stride = g.stride(axis);
    let gamma = field.eos.gamma;
    // Rows of faces; face f of a row sits on the high side of cell (i0 + f, j).
    let (i0, rows, len) = match axis {
        Axis::X => (-1, 0..ny, nx as usize + 1),
        Axis::Y => (0, -1..ny, nx as usize),
    };
    let mut offset = 0;
    for j in rows {
        let base = g.idx(i0, j);
        for c in 0..NCOMP {
            reconstruct_row(&field.data[c], base, stride, cfg.recon, &mut ws.left[c][..len], &mut ws.right[c][..len]);
        }
        for f in 0..len {
            let ul = [ws.left[0][f], ws.left[1][f], ws.left[2][f], ws.left[3][f]];
            let ur = [ws.right[0][f], ws.right[1][f], ws.right[2][f], ws.right[3][f]];
            let sig = sigma.map_or(0.0, |v| v[offset + f]);
            let flux = numerical_flux(cfg.flux_kind, &ul, &ur, sig, axis, gamma).map_err(|e| {
                let i = i0 + f as isize;
                let cell = match axis {
                    Axis::X => CellIndex { i: i + 1, j },
                    Axis::Y => CellIndex { i, j: j + 1 },
                };
                e.at_cell(cell)
            })?;
            for c in 0..NCOMP {
                ws.flux[c][offset + f] = flux[c];
            }
        }
        offset += len;
    }
    Ok(())
}

/// Evaluate dU/dt into `out` (interior, row-major). Fills ghosts of `field`
/// for time `t` and, for IGR, refreshes `sigma` from its previous value.
fn rhs_into(
    field: &mut ConservedField,
    cfg: &SchemeConfig,
    bc: &BoundarySpec,
    t: f64,
    sigma: &mut SigmaField,
    ws: &mut Workspace,
    out: &mut [Vec<f64>; NCOMP],
) -> Result<()> {
    apply_boundary(field, bc, t);
    state_extrema(field)?;
    let g = field.grid.clone();
    let (nx, ny) = (g.nx(), g.ny());
    if cfg.scheme == Scheme::Igr {
        *sigma = solve_sigma(field, bc, &cfg.igr, sigma);
    }
    for c in 0..NCOMP {
        out[c].iter_mut().for_each(|v| *v = 0.0);
    }
    for &axis in Axis::all(g.dim()) {
        let faces = (cfg.scheme == Scheme::Igr && cfg.igr.alpha > 0.0).then(|| sigma.face_values(axis, bc.is_periodic(axis)));
        face_fluxes(field, cfg, axis, faces.as_deref(), ws)?;
        let inv = 1.0 / g.spacing(axis);
        for c in 0..NCOMP {
            let f = &ws.flux[c];
            let o = &mut out[c];
            match axis {
                Axis::X => {
                    for j in 0..ny {
                        let fr = &f[j * (nx + 1)..(j + 1) * (nx + 1)];
                        let orow = &mut o[j * nx..(j + 1) * nx];
                        for i in 0..nx {
                            orow[i] -= (fr[i + 1] - fr[i]) * inv;
                        }
                    }
                }
                Axis::Y => {
                    for j in 0..ny {
                        for i in 0..nx {
                            o[j * nx + i] -= (f[(j + 1) * nx + i] - f[j * nx + i]) * inv;
                        }
                    }
                }
            }
        }
    }
    if cfg.scheme == Scheme::Lad {
        let periodic = bc.is_periodic(Axis::X);
        let zeta = lad_coefficient(field, &cfg.lad, periodic);
        for (i, t) in lad_terms(field, &zeta, periodic).into_iter().enumerate() {
            out[MOM_X][i] += t[0];
            out[ENERGY][i] += t[1];
        }
    }
    Ok(())
}

/// dU/dt per interior cell (row-major per component). Σ, if used, is solved
/// from a cold start.
pub fn semi_discrete_rhs(field: &ConservedField, cfg: &SchemeConfig, bc: &BoundarySpec, t: f64) -> Result<[Vec<f64>; NCOMP]> {
    let mut f = field.clone();
    let mut sigma = SigmaField::zeros(&field.grid);
    let mut ws = Workspace::new(&field.grid);
    let n = field.grid.interior_len();
    let mut out = std::array::from_fn(|_| vec![0.0; n]);
    rhs_into(&mut f, cfg, bc, t, &mut sigma, &mut ws, &mut out)?;
    Ok(out)
}

/// One SSP-RK3 step of a standalone field (cold Σ start).
pub fn ssp_rk3_step(field: &ConservedField, cfg: &SchemeConfig, bc: &BoundarySpec, t: f64, dt: f64) -> Result<ConservedField> {
    let mut sim = Simulation::new(field.clone(), bc.clone(), *cfg)?;
    sim.t = t;
    sim.step(dt)?;
    Ok(sim.field)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub min_rho: f64,
    pub min_p: f64,
    pub max_speed: f64,
    pub sigma_residual: f64,
    pub sigma_sweeps: usize,
}

/// A field advanced in time with one scheme and boundary specification.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub field: ConservedField,
    pub bc: BoundarySpec,
    pub cfg: SchemeConfig,
    pub t: f64,
    pub steps: usize,
    pub sigma: SigmaField,
    pub history: Vec<StepRecord>,
    pub initial_invariants: Invariants,
    ws: Workspace,
    rhs: [Vec<f64>; NCOMP],
    start: [Vec<f64>; NCOMP],
}

impl Simulation {
    pub fn new(field: ConservedField, bc: BoundarySpec, cfg: SchemeConfig) -> Result<Self> {
        cfg.validate(field.grid.dim())?;
        field.validate()?;
        let n = field.grid.interior_len();
        let sigma = SigmaField::zeros(&field.grid);
        let ws = Workspace::new(&field.grid);
        let initial_invariants = total_invariants(&field);
        Ok(Simulation {
            bc,
            cfg,
            t: 0.0,
            steps: 0,
            sigma,
            history: Vec::new(),
            initial_invariants,
            ws,
            rhs: std::array::from_fn(|_| vec![0.0; n]),
            start: std::array::from_fn(|_| vec![0.0; n]),
            field,
        })
    }

    pub fn stable_dt(&self) -> Result<f64> {
        compute_dt(&self.field, self.cfg.cfl).map_err(|e| e.at_time(self.t, None))
    }

    fn stage(&mut self, t: f64, stage: usize, dt: f64, a: f64) -> Result<()> {
        rhs_into(&mut self.field, &self.cfg, &self.bc, t, &mut self.sigma, &mut self.ws, &mut self.rhs).map_err(|e| e.at_time(t, Some(stage)))?;
        // U <- a * U0 + (1 - a) * (U + dt * L(U))
        let g = &self.field.grid;
        let (nx, ny) = (g.nx(), g.ny());
        for c in 0..NCOMP {
            let data = &mut self.field.data[c];
            for j in 0..ny {
                let base = g.idx(0, j as isize);
                let row = &mut data[base..base + nx];
                let l = &self.rhs[c][j * nx..(j + 1) * nx];
                let u0 = &self.start[c][j * nx..(j + 1) * nx];
                for i in 0..nx {
                    row[i] = a * u0[i] + (1.0 - a) * (row[i] + dt * l[i]);
                }
            }
        }
        Ok(())
    }

    /// Advance by exactly `dt`.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        let g = self.field.grid.clone();
        let nx = g.nx();
        for c in 0..NCOMP {
            for j in 0..g.ny() {
                let base = g.idx(0, j as isize);
                self.start[c][j * nx..(j + 1) * nx].copy_from_slice(&self.field.data[c][base..base + nx]);
            }
        }
        let t = self.t;
        self.stage(t, 1, dt, 0.0)?;
        self.stage(t + dt, 2, dt, 0.75)?;
        self.stage(t + 0.5 * dt, 3, dt, 1.0 / 3.0)?;
        self.t += dt;
        self.steps += 1;
        Ok(())
    }

    /// Step until `t_end`, the last step clipped to land on it exactly.
    pub fn advance_to(&mut self, t_end: f64) -> Result<()> {
        while self.t < t_end {
            let ext = state_extrema(&self.field).map_err(|e| e.at_time(self.t, None))?;
            let mut dt = self.cfg.cfl / ext.inverse_dt;
            let last = self.t + dt >= t_end * (1.0 - 1e-14);
            if last {
                dt = t_end - self.t;
            }
            self.step(dt)?;
            if last {
                self.t = t_end;
            }
            self.history.push(StepRecord {
                step: self.steps,
                t: self.t,
                dt,
                min_rho: ext.min_rho,
                min_p: ext.min_p,
                max_speed: ext.max_speed,
                sigma_residual: self.sigma.residual,
                sigma_sweeps: self.sigma.sweeps,
            });
        }
        Ok(())
    }

    /// Σ of the current state (zeros for schemes without it).
    pub fn current_sigma(&mut self) -> Vec<f64> {
        if self.cfg.scheme != Scheme::Igr {
            return vec![0.0; self.field.grid.interior_len()];
        }
        apply_boundary(&mut self.field, &self.bc, self.t);
        self.sigma = solve_sigma(&self.field, &self.bc, &self.cfg.igr, &self.sigma);
        self.sigma.sigma.clone()
    }

    pub fn invariants(&self) -> Invariants {
        total_invariants(&self.field)
    }
}
