//! Gram assembly, the precision-escalating minimum-norm solve and the
//! problems built on it.

mod eigen;
mod factor;
mod gram;
mod quadratic;
mod solve;
mod successive;

pub use eigen::{extreme_coefficients, extreme_coefficients_converged, EigenPair};
pub use factor::{Ldl, NonPositivePivot};
pub use gram::{assemble_gram, GramMatrix};
pub use quadratic::{solve_quadratic, QuadraticError, QuadraticOptions, QuadraticProblem};
pub use solve::{
    norm_squared, relative_residual, solve, solve_constraints, solve_exact, Solution, SolveError, SolverOptions,
    DEFAULT_MAX_DIGITS, DEFAULT_TOL,
};
pub use successive::{extend_gram, successive_constraint_value, successive_value_mp};
