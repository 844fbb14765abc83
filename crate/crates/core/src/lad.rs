//! Localized artificial bulk viscosity (1D baseline).

use crate::error::{Result, SolverError};
use crate::mesh::{Axis, ConservedField, MOM_X, RHO};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadParams {
    pub coeff: f64,
    pub smoothing_passes: usize,
}

impl Default for LadParams {
    fn default() -> Self {
        LadParams { coeff: 2.0, smoothing_passes: 1 }
    }
}

impl LadParams {
    pub fn new(coeff: f64, smoothing_passes: usize) -> Result<Self> {
        if !(coeff >= 0.0) || !coeff.is_finite() {
            return Err(SolverError::InvalidParameter(format!("LAD coefficient must be >= 0, got {coeff}")));
        }
        Ok(LadParams { coeff, smoothing_passes })
    }
}

/// Interior velocities with one ghost on each side (index 0 is the left ghost).
fn padded_velocity(field: &ConservedField) -> Vec<f64> {
    let g = &field.grid;
    (-1..=g.nx() as isize)
        .map(|i| {
            let k = g.idx(i, 0);
            field.data[MOM_X][k] / field.data[RHO][k]
        })
        .collect()
}

fn extend(v: &[f64], periodic: bool) -> Vec<f64> {
    let n = v.len();
    let (lo, hi) = if periodic { (v[n - 1], v[0]) } else { (v[0], v[n - 1]) };
    let mut out = Vec::with_capacity(n + 2);
    out.push(lo);
    out.extend_from_slice(v);
    out.push(hi);
    out
}

/// Bulk viscosity ζ* per interior cell. Needs filled ghosts; `periodic`
/// selects wrap-around over edge copies for the smoothing stencil.
pub fn lad_coefficient(field: &ConservedField, params: &LadParams, periodic: bool) -> Vec<f64> {
    let g = &field.grid;
    assert_eq!(g.dim(), 1, "LAD is one-dimensional");
    let dx = g.spacing(Axis::X);
    let u = padded_velocity(field);
    let mut s: Vec<f64> = (0..g.nx())
        .map(|i| {
            let div = (u[i + 2] - u[i]) / (2.0 * dx);
            field.data[RHO][g.idx(i as isize, 0)] * (-div).max(0.0)
        })
        .collect();
    for _ in 0..params.smoothing_passes {
        let e = extend(&s, periodic);
        s = (0..s.len()).map(|i| 0.25 * e[i] + 0.5 * e[i + 1] + 0.25 * e[i + 2]).collect();
    }
    let scale = params.coeff * dx * dx;
    s.iter_mut().for_each(|z| *z *= scale);
    s
}

/// Right-hand-side additions `[momentum, energy]` per interior cell.
pub fn lad_terms(field: &ConservedField, zeta: &[f64], periodic: bool) -> Vec<[f64; 2]> {
    let g = &field.grid;
    let dx = g.spacing(Axis::X);
    let u = padded_velocity(field);
    let z = extend(zeta, periodic);
    // d[k] is the diffusive flux through the face left of cell k.
    let d: Vec<f64> = (0..=g.nx()).map(|k| 0.5 * (z[k] + z[k + 1]) * (u[k + 1] - u[k]) / dx).collect();
    (0..g.nx())
        .map(|i| {
            let mom = (d[i + 1] - d[i]) / dx;
            [mom, mom * u[i + 1]]
        })
        .collect()
}
