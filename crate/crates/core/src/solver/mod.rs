//! Time stepping: the direct L1/WSGD scheme with its full history sum and
//! the fast scheme with a sum-of-exponentials history recurrence.

mod grid;
mod linear;
mod spec;
mod stepper;

pub use grid::{Discretization, Scheme, TimeCoefficients, MIN_INTERVALS};
pub use linear::{PathChoice, SolverPath, DENSE_LIMIT};
pub use spec::{ProblemSpec, ScalarFn, SpaceTimeFn};
pub use stepper::{
    solve, solve_with_observer, RunReport, SolutionField, SolverOptions, Storage, TimeStepper,
};
