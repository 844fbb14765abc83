//! Exact ideal-gas Riemann solver (two-wave pressure iteration).
//!
//! Used only as a reference solution for shock-tube diagnostics.

use crate::error::{Result, SolverError};
use crate::mesh::{EosParams, PrimitiveState};

const MAX_NEWTON: usize = 100;
const F_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Wave {
    Shock { speed: f64 },
    Rarefaction { head: f64, tail: f64 },
}

/// Star-region solution of a 1D Riemann problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarRegion {
    pub p: f64,
    pub u: f64,
    pub rho_left: f64,
    pub rho_right: f64,
    pub left_wave: Wave,
    pub right_wave: Wave,
    /// Residual of the pressure function at `p`.
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Side {
    rho: f64,
    u: f64,
    p: f64,
    c: f64,
}

/// Pressure function of one side and its derivative.
fn pressure_function(p: f64, s: &Side, g: f64) -> (f64, f64) {
    if p > s.p {
        let a = 2.0 / ((g + 1.0) * s.rho);
        let b = (g - 1.0) / (g + 1.0) * s.p;
        let q = (a / (p + b)).sqrt();
        ((p - s.p) * q, q * (1.0 - 0.5 * (p - s.p) / (b + p)))
    } else {
        let z = (g - 1.0) / (2.0 * g);
        let ratio = p / s.p;
        (2.0 * s.c / (g - 1.0) * (ratio.powf(z) - 1.0), ratio.powf(-(g + 1.0) / (2.0 * g)) / (s.rho * s.c))
    }
}

/// Total pressure function `f_L(p) + f_R(p) + (u_R - u_L)`, whose root is p*.
pub fn pressure_residual(p: f64, wl: &PrimitiveState, wr: &PrimitiveState, eos: &EosParams) -> f64 {
    let (l, r) = (side(wl, eos), side(wr, eos));
    pressure_function(p, &l, eos.gamma).0 + pressure_function(p, &r, eos.gamma).0 + (r.u - l.u)
}

fn side(w: &PrimitiveState, eos: &EosParams) -> Side {
    Side { rho: w.rho, u: w.vel[0], p: w.p, c: (eos.gamma * w.p / w.rho).sqrt() }
}

/// Solve for the star region; Newton iteration from the two-rarefaction guess.
pub fn solve_star(wl: &PrimitiveState, wr: &PrimitiveState, eos: &EosParams) -> Result<StarRegion> {
    wl.validate()?;
    wr.validate()?;
    let g = eos.gamma;
    let (l, r) = (side(wl, eos), side(wr, eos));
    if 2.0 / (g - 1.0) * (l.c + r.c) <= r.u - l.u {
        return Err(SolverError::VacuumGenerated);
    }

    let z = (g - 1.0) / (2.0 * g);
    let guess = ((l.c + r.c - 0.5 * (g - 1.0) * (r.u - l.u)) / (l.c / l.p.powf(z) + r.c / r.p.powf(z))).powf(1.0 / z);
    let mut p = guess.max(1e-14 * l.p.min(r.p));
    let mut iterations = 0;
    let residual = loop {
        let (fl, dl) = pressure_function(p, &l, g);
        let (fr, dr) = pressure_function(p, &r, g);
        let f = fl + fr + (r.u - l.u);
        if f.abs() <= F_TOL {
            break f;
        }
        if iterations == MAX_NEWTON {
            return Err(SolverError::NoConvergence(MAX_NEWTON));
        }
        iterations += 1;
        let mut next = p - f / (dl + dr);
        if next <= 0.0 {
            next = 0.1 * p;
        }
        if (next - p).abs() <= 4.0 * f64::EPSILON * p {
            p = next;
            let f = pressure_residual(p, wl, wr, eos);
            if f.abs() <= F_TOL {
                break f;
            }
            return Err(SolverError::NoConvergence(iterations));
        }
        p = next;
    };

    let (fl, _) = pressure_function(p, &l, g);
    let (fr, _) = pressure_function(p, &r, g);
    let u = 0.5 * (l.u + r.u) + 0.5 * (fr - fl);
    let g6 = (g - 1.0) / (g + 1.0);

    let (rho_left, left_wave) = if p > l.p {
        let ratio = p / l.p;
        let speed = l.u - l.c * ((g + 1.0) / (2.0 * g) * ratio + z).sqrt();
        (l.rho * (ratio + g6) / (g6 * ratio + 1.0), Wave::Shock { speed })
    } else {
        let ratio = p / l.p;
        let c_star = l.c * ratio.powf(z);
        (l.rho * ratio.powf(1.0 / g), Wave::Rarefaction { head: l.u - l.c, tail: u - c_star })
    };
    let (rho_right, right_wave) = if p > r.p {
        let ratio = p / r.p;
        let speed = r.u + r.c * ((g + 1.0) / (2.0 * g) * ratio + z).sqrt();
        (r.rho * (ratio + g6) / (g6 * ratio + 1.0), Wave::Shock { speed })
    } else {
        let ratio = p / r.p;
        let c_star = r.c * ratio.powf(z);
        (r.rho * ratio.powf(1.0 / g), Wave::Rarefaction { head: r.u + r.c, tail: u + c_star })
    };

    Ok(StarRegion { p, u, rho_left, rho_right, left_wave, right_wave, residual, iterations })
}

/// Sample an already-solved Riemann problem at similarity coordinate `xi = x/t`.
pub fn sample(star: &StarRegion, wl: &PrimitiveState, wr: &PrimitiveState, eos: &EosParams, xi: f64) -> PrimitiveState {
    let g = eos.gamma;
    let prim = |rho, u, p| PrimitiveState { rho, vel: [u, 0.0], p };
    if xi <= star.u {
        let l = side(wl, eos);
        match star.left_wave {
            Wave::Shock { speed } => {
                if xi <= speed {
                    prim(l.rho, l.u, l.p)
                } else {
                    prim(star.rho_left, star.u, star.p)
                }
            }
            Wave::Rarefaction { head, tail } => {
                if xi <= head {
                    prim(l.rho, l.u, l.p)
                } else if xi >= tail {
                    prim(star.rho_left, star.u, star.p)
                } else {
                    let c = 2.0 / (g + 1.0) * (l.c + 0.5 * (g - 1.0) * (l.u - xi));
                    let ratio = c / l.c;
                    prim(
                        l.rho * ratio.powf(2.0 / (g - 1.0)),
                        2.0 / (g + 1.0) * (l.c + 0.5 * (g - 1.0) * l.u + xi),
                        l.p * ratio.powf(2.0 * g / (g - 1.0)),
                    )
                }
            }
        }
    } else {
        let r = side(wr, eos);
        match star.right_wave {
            Wave::Shock { speed } => {
                if xi >= speed {
                    prim(r.rho, r.u, r.p)
                } else {
                    prim(star.rho_right, star.u, star.p)
                }
            }
            Wave::Rarefaction { head, tail } => {
                if xi >= head {
                    prim(r.rho, r.u, r.p)
                } else if xi <= tail {
                    prim(star.rho_right, star.u, star.p)
                } else {
                    let c = 2.0 / (g + 1.0) * (r.c - 0.5 * (g - 1.0) * (r.u - xi));
                    let ratio = c / r.c;
                    prim(
                        r.rho * ratio.powf(2.0 / (g - 1.0)),
                        2.0 / (g + 1.0) * (-r.c + 0.5 * (g - 1.0) * r.u + xi),
                        r.p * ratio.powf(2.0 * g / (g - 1.0)),
                    )
                }
            }
        }
    }
}

/// Self-similar solution of the Riemann problem `(wl, wr)` at `xi = x/t`.
pub fn exact_riemann(wl: &PrimitiveState, wr: &PrimitiveState, eos: &EosParams, xi: f64) -> Result<PrimitiveState> {
    let star = solve_star(wl, wr, eos)?;
    Ok(sample(&star, wl, wr, eos, xi))
}

/// A solved shock tube, sampled at positions and times.
#[derive(Debug, Clone, Copy)]
pub struct ShockTube {
    pub left: PrimitiveState,
    pub right: PrimitiveState,
    pub x0: f64,
    pub eos: EosParams,
    pub star: StarRegion,
}

impl ShockTube {
    pub fn new(left: PrimitiveState, right: PrimitiveState, x0: f64, eos: EosParams) -> Result<Self> {
        let star = solve_star(&left, &right, &eos)?;
        Ok(ShockTube { left, right, x0, eos, star })
    }

    pub fn at(&self, x: f64, t: f64) -> PrimitiveState {
        if t <= 0.0 {
            return if x < self.x0 { self.left } else { self.right };
        }
        sample(&self.star, &self.left, &self.right, &self.eos, (x - self.x0) / t)
    }
}
