//! Uniform Cartesian grids, conserved/primitive states, the ideal-gas
//! equation of state, ghost-cell boundary filling and conservation sums.
//!
//! Fields are stored structure-of-arrays: one padded array per conserved
//! component (density, x/y momentum, total energy). A 1D grid keeps a single
//! row and no ghost layers in y; its y-momentum array stays identically zero.

use std::fmt;
use std::sync::Arc;

use crate::error::{CellIndex, Result, SolverError};

/// Halo width shared by every kernel in the crate.
pub const GHOST_WIDTH: usize = 3;

/// Number of stored conserved components (rho, rho*u, rho*v, E).
pub const NCOMP: usize = 4;
pub const RHO: usize = 0;
pub const MOM_X: usize = 1;
pub const MOM_Y: usize = 2;
pub const ENERGY: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
        }
    }

    pub fn momentum(self) -> usize {
        match self {
            Axis::X => MOM_X,
            Axis::Y => MOM_Y,
        }
    }

    pub fn all(dim: usize) -> &'static [Axis] {
        if dim == 1 {
            &[Axis::X]
        } else {
            &[Axis::X, Axis::Y]
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisExtent {
    pub min: f64,
    pub max: f64,
    pub cells: usize,
}

impl AxisExtent {
    pub fn length(&self) -> f64 {
        self.max - self.min
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    axes: [AxisExtent; 2],
    spacing: [f64; 2],
    ghost: usize,
}

impl Grid {
    pub fn new_1d(x_min: f64, x_max: f64, cells: usize) -> Result<Self> {
        let x = AxisExtent { min: x_min, max: x_max, cells };
        Self::build(1, [x, AxisExtent { min: 0.0, max: 1.0, cells: 1 }])
    }

    pub fn new_2d(x: (f64, f64), y: (f64, f64), cells: (usize, usize)) -> Result<Self> {
        let ax = AxisExtent { min: x.0, max: x.1, cells: cells.0 };
        let ay = AxisExtent { min: y.0, max: y.1, cells: cells.1 };
        Self::build(2, [ax, ay])
    }

    fn build(dim: usize, axes: [AxisExtent; 2]) -> Result<Self> {
        let ghost = GHOST_WIDTH;
        let mut spacing = [1.0; 2];
        for (a, ext) in axes.iter().enumerate().take(dim) {
            if !(ext.max > ext.min) || !ext.min.is_finite() || !ext.max.is_finite() {
                return Err(SolverError::InvalidParameter(format!("axis {a}: empty extent [{}, {}]", ext.min, ext.max)));
            }
            if ext.cells < 2 * ghost {
                return Err(SolverError::InvalidParameter(format!("axis {a}: {} cells is fewer than twice the ghost width {ghost}", ext.cells)));
            }
            spacing[a] = (ext.max - ext.min) / ext.cells as f64;
        }
        Ok(Grid { dim, axes, spacing, ghost })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ghost(&self) -> usize {
        self.ghost
    }

    pub fn extent(&self, axis: Axis) -> AxisExtent {
        self.axes[axis.index()]
    }

    pub fn cells(&self, axis: Axis) -> usize {
        self.axes[axis.index()].cells
    }

    pub fn nx(&self) -> usize {
        self.axes[0].cells
    }

    /// Cell count in y; 1 for a 1D grid.
    pub fn ny(&self) -> usize {
        if self.dim == 1 {
            1
        } else {
            self.axes[1].cells
        }
    }

    pub fn spacing(&self, axis: Axis) -> f64 {
        self.spacing[axis.index()]
    }

    /// Largest spacing over the active axes.
    pub fn max_spacing(&self) -> f64 {
        if self.dim == 1 {
            self.spacing[0]
        } else {
            self.spacing[0].max(self.spacing[1])
        }
    }

    pub fn cell_volume(&self) -> f64 {
        if self.dim == 1 {
            self.spacing[0]
        } else {
            self.spacing[0] * self.spacing[1]
        }
    }

    pub fn interior_len(&self) -> usize {
        self.nx() * self.ny()
    }

    /// Padded row length (x direction).
    pub fn px(&self) -> usize {
        self.nx() + 2 * self.ghost
    }

    /// Padded column length (y direction); 1 in 1D.
    pub fn py(&self) -> usize {
        if self.dim == 1 {
            1
        } else {
            self.ny() + 2 * self.ghost
        }
    }

    pub fn padded_len(&self) -> usize {
        self.px() * self.py()
    }

    /// Index offset between neighbours along `axis` in padded storage.
    pub fn stride(&self, axis: Axis) -> usize {
        match axis {
            Axis::X => 1,
            Axis::Y => self.px(),
        }
    }

    fn y_ghost(&self) -> isize {
        if self.dim == 1 {
            0
        } else {
            self.ghost as isize
        }
    }

    /// Padded storage index of interior-coordinate cell (i, j).
    #[inline]
    pub fn idx(&self, i: isize, j: isize) -> usize {
        let g = self.ghost as isize;
        ((j + self.y_ghost()) * self.px() as isize + i + g) as usize
    }

    pub fn center(&self, i: isize, j: isize) -> (f64, f64) {
        let x = self.axes[0].min + (i as f64 + 0.5) * self.spacing[0];
        let y = if self.dim == 1 { 0.0 } else { self.axes[1].min + (j as f64 + 0.5) * self.spacing[1] };
        (x, y)
    }

    /// Interior cell centres along x.
    pub fn x_centers(&self) -> Vec<f64> {
        (0..self.nx() as isize).map(|i| self.center(i, 0).0).collect()
    }

    /// Same axes and resolution, ignoring nothing else.
    pub fn same_domain(&self, other: &Grid) -> bool {
        self.dim == other.dim
            && (0..self.dim).all(|a| {
                let (s, o) = (self.axes[a], other.axes[a]);
                (s.min - o.min).abs() <= 1e-12 * s.length() && (s.max - o.max).abs() <= 1e-12 * s.length()
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EosParams {
    pub gamma: f64,
}

impl EosParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma > 1.0 && gamma.is_finite() {
            Ok(EosParams { gamma })
        } else {
            Err(SolverError::InvalidParameter(format!("gamma must exceed 1, got {gamma}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimitiveState {
    pub rho: f64,
    pub vel: [f64; 2],
    pub p: f64,
}

impl PrimitiveState {
    /// Validated constructor; rejects non-positive density or pressure.
    pub fn new(rho: f64, vel: [f64; 2], p: f64) -> Result<Self> {
        let w = PrimitiveState { rho, vel, p };
        w.validate()?;
        Ok(w)
    }

    pub fn new_1d(rho: f64, u: f64, p: f64) -> Result<Self> {
        Self::new(rho, [u, 0.0], p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rho > 0.0 && self.p > 0.0 && self.vel.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(SolverError::non_physical(self.rho, self.p))
        }
    }

    pub fn speed(&self) -> f64 {
        self.vel[0].hypot(self.vel[1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservedState {
    pub rho: f64,
    pub mom: [f64; 2],
    pub energy: f64,
}

impl ConservedState {
    pub fn to_array(self) -> [f64; NCOMP] {
        [self.rho, self.mom[0], self.mom[1], self.energy]
    }

    pub fn from_array(a: [f64; NCOMP]) -> Self {
        ConservedState { rho: a[RHO], mom: [a[MOM_X], a[MOM_Y]], energy: a[ENERGY] }
    }

    /// Reflection across a plane normal to `axis`.
    pub fn mirrored(mut self, axis: Axis) -> Self {
        self.mom[axis.index()] = -self.mom[axis.index()];
        self
    }

    pub fn internal_energy(&self) -> f64 {
        self.energy - 0.5 * (self.mom[0] * self.mom[0] + self.mom[1] * self.mom[1]) / self.rho
    }
}

/// Pressure from conserved components; no validation.
#[inline]
pub fn pressure(u: &[f64; NCOMP], gamma: f64) -> f64 {
    (gamma - 1.0) * (u[ENERGY] - 0.5 * (u[MOM_X] * u[MOM_X] + u[MOM_Y] * u[MOM_Y]) / u[RHO])
}

pub fn cons_to_prim(u: &ConservedState, eos: &EosParams) -> Result<PrimitiveState> {
    let arr = u.to_array();
    let p = pressure(&arr, eos.gamma);
    if !(u.rho > 0.0) || !(p > 0.0) {
        return Err(SolverError::non_physical(u.rho, p));
    }
    Ok(PrimitiveState { rho: u.rho, vel: [u.mom[0] / u.rho, u.mom[1] / u.rho], p })
}

pub fn prim_to_cons(w: &PrimitiveState, eos: &EosParams) -> ConservedState {
    let kinetic = 0.5 * w.rho * (w.vel[0] * w.vel[0] + w.vel[1] * w.vel[1]);
    ConservedState { rho: w.rho, mom: [w.rho * w.vel[0], w.rho * w.vel[1]], energy: w.p / (eos.gamma - 1.0) + kinetic }
}

pub fn sound_speed(w: &PrimitiveState, eos: &EosParams) -> f64 {
    (eos.gamma * w.p / w.rho).sqrt()
}

/// Cell-averaged conserved variables on a padded grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ConservedField {
    pub grid: Grid,
    pub eos: EosParams,
    pub data: [Vec<f64>; NCOMP],
}

impl ConservedField {
    pub fn zeros(grid: Grid, eos: EosParams) -> Self {
        let n = grid.padded_len();
        ConservedField { grid, eos, data: std::array::from_fn(|_| vec![0.0; n]) }
    }

    /// Sample a primitive-state function at interior cell centres.
    pub fn from_fn(grid: Grid, eos: EosParams, f: impl Fn(f64, f64) -> PrimitiveState) -> Self {
        let mut field = Self::zeros(grid, eos);
        for j in 0..field.grid.ny() as isize {
            for i in 0..field.grid.nx() as isize {
                let (x, y) = field.grid.center(i, j);
                let u = prim_to_cons(&f(x, y), &eos);
                field.set(i, j, u);
            }
        }
        field
    }

    #[inline]
    pub fn get(&self, i: isize, j: isize) -> ConservedState {
        ConservedState::from_array(self.get_array(self.grid.idx(i, j)))
    }

    #[inline]
    pub fn get_array(&self, k: usize) -> [f64; NCOMP] {
        [self.data[0][k], self.data[1][k], self.data[2][k], self.data[3][k]]
    }

    #[inline]
    pub fn set(&mut self, i: isize, j: isize, u: ConservedState) {
        let k = self.grid.idx(i, j);
        self.set_array(k, u.to_array());
    }

    #[inline]
    pub fn set_array(&mut self, k: usize, u: [f64; NCOMP]) {
        for (c, v) in u.into_iter().enumerate() {
            self.data[c][k] = v;
        }
    }

    pub fn primitive(&self, i: isize, j: isize) -> Result<PrimitiveState> {
        cons_to_prim(&self.get(i, j), &self.eos).map_err(|e| e.at_cell(CellIndex { i, j }))
    }

    /// Interior cells in row-major order.
    pub fn interior(&self) -> impl Iterator<Item = (isize, isize)> + '_ {
        let nx = self.grid.nx() as isize;
        let ny = self.grid.ny() as isize;
        (0..ny).flat_map(move |j| (0..nx).map(move |i| (i, j)))
    }

    /// Check every interior cell against the state invariants.
    pub fn validate(&self) -> Result<()> {
        for (i, j) in self.interior() {
            self.primitive(i, j)?;
        }
        Ok(())
    }

    /// Values of one component over the interior, row-major.
    pub fn interior_component(&self, comp: usize) -> Vec<f64> {
        self.interior().map(|(i, j)| self.data[comp][self.grid.idx(i, j)]).collect()
    }
}

/// Boundary data as a function of (x, y, t).
pub type StateFn = Arc<dyn Fn(f64, f64, f64) -> PrimitiveState + Send + Sync>;

#[derive(Clone)]
pub enum BoundaryKind {
    Periodic,
    ZeroGradient,
    ReflectiveWall,
    Dirichlet(StateFn),
    /// Switch between two kinds along the side at tangential coordinate `at`.
    Split {
        at: f64,
        below: Box<BoundaryKind>,
        above: Box<BoundaryKind>,
    },
}

impl fmt::Debug for BoundaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryKind::Periodic => write!(f, "Periodic"),
            BoundaryKind::ZeroGradient => write!(f, "ZeroGradient"),
            BoundaryKind::ReflectiveWall => write!(f, "ReflectiveWall"),
            BoundaryKind::Dirichlet(_) => write!(f, "Dirichlet(..)"),
            BoundaryKind::Split { at, below, above } => {
                write!(f, "Split {{ at: {at}, below: {below:?}, above: {above:?} }}")
            }
        }
    }
}

impl BoundaryKind {
    fn resolve(&self, tangential: f64) -> &BoundaryKind {
        match self {
            BoundaryKind::Split { at, below, above } => {
                if tangential < *at {
                    below.resolve(tangential)
                } else {
                    above.resolve(tangential)
                }
            }
            k => k,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BoundarySpec {
    /// Indexed `[axis][side]` with side 0 = low, 1 = high.
    sides: [[BoundaryKind; 2]; 2],
}

impl BoundarySpec {
    pub fn new(x: [BoundaryKind; 2], y: [BoundaryKind; 2]) -> Result<Self> {
        let spec = BoundarySpec { sides: [x, y] };
        for (a, pair) in spec.sides.iter().enumerate() {
            let lo = matches!(pair[0], BoundaryKind::Periodic);
            let hi = matches!(pair[1], BoundaryKind::Periodic);
            if lo != hi {
                return Err(SolverError::InvalidParameter(format!("axis {a}: periodic boundary must be paired on both sides")));
            }
        }
        Ok(spec)
    }

    pub fn uniform(kind: BoundaryKind) -> Self {
        let k = || kind.clone();
        Self::new([k(), k()], [k(), k()]).expect("uniform boundary is always paired")
    }

    pub fn periodic() -> Self {
        Self::uniform(BoundaryKind::Periodic)
    }

    pub fn zero_gradient() -> Self {
        Self::uniform(BoundaryKind::ZeroGradient)
    }

    pub fn side(&self, axis: Axis, high: bool) -> &BoundaryKind {
        &self.sides[axis.index()][high as usize]
    }

    pub fn is_periodic(&self, axis: Axis) -> bool {
        matches!(self.sides[axis.index()][0], BoundaryKind::Periodic)
    }
}

/// Fill every ghost cell of `field` for time `t`.
///
/// The x direction is filled first over interior rows, then the y direction
/// over full padded rows, so corners inherit the x-filled values.
pub fn apply_boundary(field: &mut ConservedField, bc: &BoundarySpec, t: f64) {
    let grid = field.grid.clone();
    let g = grid.ghost() as isize;
    let nx = grid.nx() as isize;
    let ny = grid.ny() as isize;

    for j in 0..ny {
        for (high, kind) in [(false, bc.side(Axis::X, false)), (true, bc.side(Axis::X, true))] {
            for k in 0..g {
                let ghost = if high { nx + k } else { -1 - k };
                let (_, y) = grid.center(ghost, j);
                let src = match kind.resolve(y) {
                    BoundaryKind::Periodic => Source::Copy(if high { k } else { nx - 1 - k }, j),
                    BoundaryKind::ZeroGradient => Source::Copy(if high { nx - 1 } else { 0 }, j),
                    BoundaryKind::ReflectiveWall => Source::Mirror(if high { nx - 1 - k } else { k }, j),
                    BoundaryKind::Dirichlet(f) => Source::State(f.clone()),
                    BoundaryKind::Split { .. } => unreachable!("resolved above"),
                };
                fill_ghost(field, ghost, j, src, Axis::X, t);
            }
        }
    }

    if grid.dim() == 1 {
        return;
    }
    for i in -g..nx + g {
        for (high, kind) in [(false, bc.side(Axis::Y, false)), (true, bc.side(Axis::Y, true))] {
            for k in 0..g {
                let ghost = if high { ny + k } else { -1 - k };
                let (x, _) = grid.center(i, ghost);
                let src = match kind.resolve(x) {
                    BoundaryKind::Periodic => Source::Copy(i, if high { k } else { ny - 1 - k }),
                    BoundaryKind::ZeroGradient => Source::Copy(i, if high { ny - 1 } else { 0 }),
                    BoundaryKind::ReflectiveWall => Source::Mirror(i, if high { ny - 1 - k } else { k }),
                    BoundaryKind::Dirichlet(f) => Source::State(f.clone()),
                    BoundaryKind::Split { .. } => unreachable!("resolved above"),
                };
                fill_ghost(field, i, ghost, src, Axis::Y, t);
            }
        }
    }
}

enum Source {
    Copy(isize, isize),
    Mirror(isize, isize),
    State(StateFn),
}

fn fill_ghost(field: &mut ConservedField, i: isize, j: isize, src: Source, axis: Axis, t: f64) {
    let dst = field.grid.idx(i, j);
    let value = match src {
        Source::Copy(si, sj) => field.get_array(field.grid.idx(si, sj)),
        Source::Mirror(si, sj) => {
            let mut u = field.get_array(field.grid.idx(si, sj));
            u[axis.momentum()] = -u[axis.momentum()];
            u
        }
        Source::State(f) => {
            let (x, y) = field.grid.center(i, j);
            prim_to_cons(&f(x, y, t), &field.eos).to_array()
        }
    };
    field.set_array(dst, value);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Invariants {
    pub mass: f64,
    pub momentum: [f64; 2],
    pub energy: f64,
}

impl Invariants {
    pub fn to_array(self) -> [f64; 4] {
        [self.mass, self.momentum[0], self.momentum[1], self.energy]
    }

    /// Componentwise |self - reference| / |reference|; absolute when the
    /// reference component is zero.
    pub fn relative_drift(&self, reference: &Invariants) -> [f64; 4] {
        let a = self.to_array();
        let b = reference.to_array();
        std::array::from_fn(|k| {
            let d = (a[k] - b[k]).abs();
            if b[k] != 0.0 {
                d / b[k].abs()
            } else {
                d
            }
        })
    }
}

/// Interior sums of cell averages times cell volume, accumulated row-major.
pub fn total_invariants(field: &ConservedField) -> Invariants {
    let mut sums = [0.0; NCOMP];
    for (i, j) in field.interior() {
        let u = field.get_array(field.grid.idx(i, j));
        for c in 0..NCOMP {
            sums[c] += u[c];
        }
    }
    let vol = field.grid.cell_volume();
    Invariants { mass: sums[RHO] * vol, momentum: [sums[MOM_X] * vol, sums[MOM_Y] * vol], energy: sums[ENERGY] * vol }
}
