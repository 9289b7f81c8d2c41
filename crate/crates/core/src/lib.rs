//! Image and height-field smoothing with a total normal curvature
//! regularizer, total variation and a quadratic fidelity term, minimized by
//! operator splitting on a periodic grid.

pub mod curvature;
pub mod error;
pub mod grid;
pub mod io;
pub mod metrics;
pub mod solver;
pub mod spectral;
pub mod synth;

pub use curvature::DirectionSet;
pub use error::{Error, Result};
pub use grid::{GridSpec, ScalarField, Scheme, TensorField, VectorField};
pub use solver::{InitMode, IterationReport, SolverConfig, SolverOutput, SolverState, TncSolver};
pub use synth::{PatternKind, PatternSpec};
