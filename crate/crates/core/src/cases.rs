//! Benchmark problems: initial and boundary data, tanh smoothing and
//! analytic references.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Result, SolverError};
use crate::mesh::{Axis, BoundaryKind, BoundarySpec, ConservedField, EosParams, Grid, PrimitiveState, StateFn};
use crate::riemann::ShockTube;

pub const CASE_NAMES: [&str; 8] =
    ["convergence_sine", "acoustic_sine", "shu_osher", "sod", "leblanc", "riemann2d", "double_mach", "isentropic_vortex"];

pub type InitialCondition = Arc<dyn Fn(f64, f64) -> PrimitiveState + Send + Sync>;

/// Weight of the right state across a breakpoint: the tanh ramp
/// `(1 + tanh(s / eps)) / 2`, or a sharp step (right state for `s >= 0`) when `eps = 0`.
pub fn step_weight(s: f64, eps: f64) -> f64 {
    if eps > 0.0 {
        0.5 * (1.0 + (s / eps).tanh())
    } else if s >= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Componentwise `a + w * (b - a)` of primitive variables.
pub fn blend(a: &PrimitiveState, b: &PrimitiveState, w: f64) -> PrimitiveState {
    let lerp = |x: f64, y: f64| (1.0 - w) * x + w * y;
    PrimitiveState { rho: lerp(a.rho, b.rho), vel: [lerp(a.vel[0], b.vel[0]), lerp(a.vel[1], b.vel[1])], p: lerp(a.p, b.p) }
}

/// Piecewise-constant 1D data (`states.len() == breakpoints.len() + 1`,
/// breakpoints ascending) with every jump replaced by a tanh ramp of width `eps`.
pub fn tanh_smooth(breakpoints: &[f64], states: &[PrimitiveState], eps: f64) -> Result<impl Fn(f64) -> PrimitiveState> {
    if states.len() != breakpoints.len() + 1 {
        return Err(SolverError::InvalidParameter("need one more state than breakpoints".into()));
    }
    if !(eps >= 0.0) {
        return Err(SolverError::InvalidParameter(format!("smoothing width must be >= 0, got {eps}")));
    }
    let breakpoints = breakpoints.to_vec();
    let states = states.to_vec();
    // Written as a partition of unity so saturated weights reproduce the states exactly.
    Ok(move |x: f64| {
        let mut w = PrimitiveState { rho: 0.0, vel: [0.0; 2], p: 0.0 };
        let mut before = 1.0;
        for (s, state) in states.iter().enumerate() {
            let after = breakpoints.get(s).map_or(0.0, |x0| step_weight(x - x0, eps));
            let c = before - after;
            w.rho += c * state.rho;
            w.vel[0] += c * state.vel[0];
            w.vel[1] += c * state.vel[1];
            w.p += c * state.p;
            before = after;
        }
        w
    })
}

/// Four-quadrant data split at `(x0, y0)`, blended bilinearly in the per-axis
/// tanh weights. Quadrants are ordered `[sw, se, nw, ne]`.
pub fn quadrant_smooth(x0: f64, y0: f64, q: [PrimitiveState; 4], eps: f64) -> impl Fn(f64, f64) -> PrimitiveState {
    move |x, y| {
        let hx = step_weight(x - x0, eps);
        let hy = step_weight(y - y0, eps);
        let south = blend(&q[0], &q[1], hx);
        let north = blend(&q[2], &q[3], hx);
        blend(&south, &north, hy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VortexParams {
    pub strength: f64,
    pub beta: f64,
    pub gamma: f64,
    pub u_inf: f64,
    pub v_inf: f64,
    pub length: f64,
}

impl Default for VortexParams {
    fn default() -> Self {
        VortexParams { strength: 5.0, beta: 1.0, gamma: 1.4, u_inf: 0.1, v_inf: 0.0, length: 10.0 }
    }
}

impl VortexParams {
    /// Time for one pass through the periodic box.
    pub fn period(&self) -> f64 {
        self.length / self.u_inf.hypot(self.v_inf)
    }
}

/// The isentropic vortex at time `t`: the initial profile evaluated at the
/// back-advected position wrapped into the box `[-L/2, L/2)^2`.
pub fn vortex_exact(x: f64, y: f64, t: f64, v: &VortexParams) -> PrimitiveState {
    let half = 0.5 * v.length;
    let wrap = |s: f64| (s + half).rem_euclid(v.length) - half;
    let (x, y) = (wrap(x - v.u_inf * t), wrap(y - v.v_inf * t));
    let g = v.gamma;
    let e = (0.5 * v.beta * (1.0 - x * x - y * y)).exp();
    let k = v.strength / (2.0 * PI);
    let base = 1.0 - v.strength * v.strength * (g - 1.0) / (8.0 * g * PI * PI) * e * e;
    PrimitiveState { rho: base.powf(1.0 / (g - 1.0)), vel: [v.u_inf + y * k * e, v.v_inf - x * k * e], p: base.powf(g / (g - 1.0)) }
}

/// Mach 10 double-Mach-reflection data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleMach {
    pub pre: PrimitiveState,
    pub post: PrimitiveState,
    pub mach: f64,
    /// Wall foot of the shock at t = 0.
    pub x0: f64,
    /// Shock angle to the x axis.
    pub angle: f64,
}

/// Quiescent pre-shock gas with unit sound speed and the Rankine-Hugoniot
/// post-shock state of a Mach 10 shock travelling along `(sin 60°, -cos 60°)`.
pub fn double_mach_states() -> DoubleMach {
    let g = 1.4;
    let mach: f64 = 10.0;
    let pre = PrimitiveState { rho: 1.4, vel: [0.0, 0.0], p: 1.0 };
    let c = (g * pre.p / pre.rho).sqrt();
    let m2 = mach * mach;
    let rho = pre.rho * (g + 1.0) * m2 / ((g - 1.0) * m2 + 2.0);
    let p = pre.p * (1.0 + 2.0 * g / (g + 1.0) * (m2 - 1.0));
    let speed = mach * c * (1.0 - pre.rho / rho);
    let angle = PI / 3.0;
    let post = PrimitiveState { rho, vel: [speed * angle.sin(), -speed * angle.cos()], p };
    DoubleMach { pre, post, mach, x0: 1.0 / 6.0, angle }
}

impl DoubleMach {
    /// x position of the shock at height `y` and time `t`.
    pub fn shock_x(&self, y: f64, t: f64) -> f64 {
        let shock_speed = self.mach * (1.4 * self.pre.p / self.pre.rho).sqrt();
        self.x0 + (y + shock_speed * t / self.angle.cos()) * self.angle.cos() / self.angle.sin()
    }

    /// State at `(x, y, t)` smoothed across the shock over normal distance `eps`.
    pub fn state(&self, x: f64, y: f64, t: f64, eps: f64) -> PrimitiveState {
        let normal_distance = (x - self.shock_x(y, t)) * self.angle.sin();
        blend(&self.post, &self.pre, step_weight(normal_distance, eps))
    }
}

#[derive(Debug, Clone)]
pub enum Reference {
    ShockTube(ShockTube),
    Vortex(VortexParams),
}

impl Reference {
    pub fn at(&self, x: f64, y: f64, t: f64) -> PrimitiveState {
        match self {
            Reference::ShockTube(s) => s.at(x, t),
            Reference::Vortex(v) => vortex_exact(x, y, t, v),
        }
    }
}

/// Case-specific settings that may be overridden from a run configuration.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CaseOptions {
    pub eps: Option<f64>,
    pub t_final: Option<f64>,
    pub ny: Option<usize>,
    pub perturb_amp: Option<f64>,
    pub perturb_wavenumber: Option<f64>,
    pub periods: Option<f64>,
    pub amplitude: Option<f64>,
    pub wavenumber: Option<f64>,
}

#[derive(Clone)]
pub struct CaseSpec {
    pub name: String,
    pub dim: usize,
    pub gamma: f64,
    pub t_final: f64,
    pub smoothing_eps: f64,
    pub ic: InitialCondition,
    pub reference: Option<Reference>,
}

impl fmt::Debug for CaseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CaseSpec")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("gamma", &self.gamma)
            .field("t_final", &self.t_final)
            .field("smoothing_eps", &self.smoothing_eps)
            .field("reference", &self.reference)
            .finish()
    }
}

#[derive(Debug, Clone)]
pub struct Case {
    pub spec: CaseSpec,
    pub grid: Grid,
    pub field: ConservedField,
    pub bc: BoundarySpec,
}

fn prim(rho: f64, u: f64, v: f64, p: f64) -> PrimitiveState {
    PrimitiveState { rho, vel: [u, v], p }
}

fn constant(w: PrimitiveState) -> BoundaryKind {
    BoundaryKind::Dirichlet(Arc::new(move |_, _, _| w))
}

/// Build the grid, boundary data and initial field of a named case at
/// resolution `m` (cells along x).
pub fn build_case(name: &str, m: usize, opts: &CaseOptions) -> Result<Case> {
    if let Some(eps) = opts.eps {
        if !(eps >= 0.0) {
            return Err(SolverError::InvalidParameter(format!("eps must be >= 0, got {eps}")));
        }
    }
    let dim = match name {
        "riemann2d" | "double_mach" | "isentropic_vortex" => 2,
        _ if CASE_NAMES.contains(&name) => 1,
        _ => return Err(SolverError::UnknownCase(name.to_string())),
    };
    let ny = |default: usize| opts.ny.unwrap_or(default);

    let (grid, gamma, t_final, eps, ic, bc, reference): (Grid, f64, f64, f64, InitialCondition, BoundarySpec, Option<Reference>) = match name {
        "convergence_sine" => {
            let grid = Grid::new_1d(0.0, 1.0, m)?;
            let gamma = 1.4;
            let ic: InitialCondition = Arc::new(move |x, _| prim(1.0, 1.5 * (2.0 * PI * x).sin(), 0.0, (gamma - 1.0) * 4.0));
            (grid, gamma, opts.t_final.unwrap_or(0.15), 0.0, ic, BoundarySpec::periodic(), None)
        }
        "acoustic_sine" => {
            let grid = Grid::new_1d(0.0, 1.0, m)?;
            let beta = opts.amplitude.unwrap_or(0.01);
            let k = opts.wavenumber.unwrap_or(20.0);
            let ic: InitialCondition = Arc::new(move |x, _| prim(1.0, beta * (2.0 * PI * k * x).sin(), 0.0, 1.6));
            (grid, 1.4, opts.t_final.unwrap_or(0.4), 0.0, ic, BoundarySpec::periodic(), None)
        }
        "shu_osher" => {
            let grid = Grid::new_1d(0.0, 1.0, m)?;
            let eps = opts.eps.unwrap_or(2.0 * grid.spacing(Axis::X));
            let post = prim(27.0 / 7.0, 4.0 * 35f64.sqrt() / 9.0, 0.0, 31.0 / 3.0);
            let x0 = 0.1;
            let ic: InitialCondition = Arc::new(move |x, _| {
                let pre = prim(1.0 + 0.2 * (16.0 * PI * x).sin(), 0.0, 0.0, 1.0);
                blend(&post, &pre, step_weight(x - x0, eps))
            });
            let bc = BoundarySpec::new([constant(post), BoundaryKind::ZeroGradient], [BoundaryKind::ZeroGradient, BoundaryKind::ZeroGradient])?;
            (grid, 1.4, opts.t_final.unwrap_or(0.18), eps, ic, bc, None)
        }
        "sod" => {
            let grid = Grid::new_1d(0.0, 1.0, m)?;
            let eps = opts.eps.unwrap_or(4.0 * grid.spacing(Axis::X));
            let (l, r) = (prim(1.0, 0.0, 0.0, 1.0), prim(0.125, 0.0, 0.0, 0.1));
            let f = tanh_smooth(&[0.5], &[l, r], eps)?;
            let tube = ShockTube::new(l, r, 0.5, EosParams::new(1.4)?)?;
            (grid, 1.4, opts.t_final.unwrap_or(0.2), eps, Arc::new(move |x, _| f(x)), BoundarySpec::zero_gradient(), Some(Reference::ShockTube(tube)))
        }
        "leblanc" => {
            let grid = Grid::new_1d(0.0, 9.0, m)?;
            let h = grid.spacing(Axis::X);
            let eps = opts.eps.unwrap_or(5.0 * h);
            let (l, r) = (prim(1.0, 0.0, 0.0, 1.0 / 15.0), prim(1e-3, 0.0, 0.0, 2.0 / 3.0 * 1e-9));
            // The left state fills exactly the first cell.
            let x_b = h;
            let f = tanh_smooth(&[x_b], &[l, r], eps)?;
            let tube = ShockTube::new(l, r, x_b, EosParams::new(5.0 / 3.0)?)?;
            let inflow: StateFn = Arc::new(move |x, _, t| tube.at(x, t));
            let bc = BoundarySpec::new(
                [BoundaryKind::Dirichlet(inflow), BoundaryKind::ZeroGradient],
                [BoundaryKind::ZeroGradient, BoundaryKind::ZeroGradient],
            )?;
            (grid, 5.0 / 3.0, opts.t_final.unwrap_or(6.0), eps, Arc::new(move |x, _| f(x)), bc, Some(Reference::ShockTube(tube)))
        }
        "riemann2d" => {
            let grid = Grid::new_2d((0.0, 1.0), (0.0, 1.0), (m, ny(m)))?;
            let eps = opts.eps.unwrap_or(2.0 * grid.max_spacing());
            let amp = opts.perturb_amp.unwrap_or(0.05);
            let kappa = opts.perturb_wavenumber.unwrap_or(25.0);
            let quads = [prim(0.138, 1.206, 1.206, 0.029), prim(0.532, 0.0, 1.206, 0.3), prim(0.532, 1.206, 0.0, 0.3), prim(1.5, 0.0, 0.0, 1.5)];
            let base = quadrant_smooth(0.75, 0.75, quads, eps);
            let ic: InitialCondition = Arc::new(move |x, y| {
                let mut w = base(x, y);
                w.rho *= 1.0 + amp * (2.0 * PI * kappa * x).sin() * (2.0 * PI * kappa * y).sin();
                w
            });
            (grid, 1.4, opts.t_final.unwrap_or(0.8), eps, ic, BoundarySpec::zero_gradient(), None)
        }
        "double_mach" => {
            let grid = Grid::new_2d((0.0, 4.0), (0.0, 1.0), (m, ny((m / 4).max(1))))?;
            let eps = opts.eps.unwrap_or(4.0 * grid.max_spacing());
            let dm = double_mach_states();
            let ic: InitialCondition = Arc::new(move |x, y| dm.state(x, y, 0.0, eps));
            let top: StateFn = Arc::new(move |x, y, t| dm.state(x, y, t, eps));
            let bottom = BoundaryKind::Split { at: dm.x0, below: Box::new(constant(dm.post)), above: Box::new(BoundaryKind::ReflectiveWall) };
            let bc = BoundarySpec::new([constant(dm.post), BoundaryKind::ZeroGradient], [bottom, BoundaryKind::Dirichlet(top)])?;
            (grid, 1.4, opts.t_final.unwrap_or(0.2), eps, ic, bc, None)
        }
        "isentropic_vortex" => {
            let v = VortexParams::default();
            let half = 0.5 * v.length;
            let grid = Grid::new_2d((-half, half), (-half, half), (m, ny(m)))?;
            let t_final = opts.t_final.unwrap_or(opts.periods.unwrap_or(4.0) * v.period());
            let ic: InitialCondition = Arc::new(move |x, y| vortex_exact(x, y, 0.0, &v));
            (grid, v.gamma, t_final, 0.0, ic, BoundarySpec::periodic(), Some(Reference::Vortex(v)))
        }
        _ => unreachable!(),
    };
    if !(t_final > 0.0) {
        return Err(SolverError::InvalidParameter(format!("t_final must be positive, got {t_final}")));
    }
    let eos = EosParams::new(gamma)?;
    let ic_sample = ic.clone();
    let field = ConservedField::from_fn(grid.clone(), eos, move |x, y| ic_sample(x, y));
    field.validate()?;
    let spec = CaseSpec { name: name.to_string(), dim, gamma, t_final, smoothing_eps: eps, ic, reference };
    Ok(Case { spec, grid, field, bc })
}
