use std::fmt;

use thiserror::Error;

/// Location of a cell in interior coordinates (ghost cells have negative or
/// out-of-range indices).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellIndex {
    pub i: isize,
    pub j: isize,
}

impl fmt::Display for CellIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.i, self.j)
    }
}

/// Offending values attached to a [`SolverError::NonPhysicalState`].
#[derive(Debug, Clone, PartialEq)]
pub struct NonPhysicalInfo {
    pub cell: Option<CellIndex>,
    pub time: Option<f64>,
    pub stage: Option<usize>,
    pub rho: f64,
    pub p: f64,
}

impl fmt::Display for NonPhysicalInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rho = {:e}, p = {:e}", self.rho, self.p)?;
        if let Some(c) = self.cell {
            write!(f, " at cell {c}")?;
        }
        if let Some(t) = self.time {
            write!(f, ", t = {t}")?;
        }
        if let Some(s) = self.stage {
            write!(f, ", RK stage {s}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("non-physical state: {0}")]
    NonPhysicalState(Box<NonPhysicalInfo>),
    #[error("exact Riemann solver: initial data generates vacuum")]
    VacuumGenerated,
    #[error("exact Riemann solver: no convergence after {0} Newton iterations")]
    NoConvergence(usize),
    #[error("unknown case `{0}`")]
    UnknownCase(String),
    #[error("incompatible grids: {0}")]
    IncompatibleGrids(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl SolverError {
    pub fn non_physical(rho: f64, p: f64) -> Self {
        SolverError::NonPhysicalState(Box::new(NonPhysicalInfo { cell: None, time: None, stage: None, rho, p }))
    }

    /// Attach location to a non-physical state error; other variants pass through.
    pub fn at_cell(self, cell: CellIndex) -> Self {
        match self {
            SolverError::NonPhysicalState(mut info) => {
                info.cell.get_or_insert(cell);
                SolverError::NonPhysicalState(info)
            }
            other => other,
        }
    }

    pub fn at_time(self, time: f64, stage: Option<usize>) -> Self {
        match self {
            SolverError::NonPhysicalState(mut info) => {
                info.time.get_or_insert(time);
                if info.stage.is_none() {
                    info.stage = stage;
                }
                SolverError::NonPhysicalState(info)
            }
            other => other,
        }
    }

    pub fn is_non_physical(&self) -> bool {
        matches!(self, SolverError::NonPhysicalState(_))
    }
}

pub type Result<T> = std::result::Result<T, SolverError>;
