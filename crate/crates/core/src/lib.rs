pub mod cases;
pub mod config;
pub mod diagnostics;
pub mod driver;
pub mod error;
pub mod flux;
pub mod igr;
pub mod integrate;
pub mod lad;
pub mod mesh;
pub mod reconstruct;
pub mod riemann;

pub use error::{Result, SolverError};
