//! Adding one constraint to an already solved problem.
//!
//! The solution for `N` constraints already takes some value `c` on a new
//! functional. Imposing exactly `a_{N+1} = c` leaves the solution unchanged;
//! any other target raises the squared norm quadratically in `a_{N+1} − c`.

use num_complex::Complex64;

use super::gram::GramMatrix;
use super::solve::Solution;
use crate::constraints::{kernel_inner_mp, ConstraintError, ConstraintSet, Kernel, PhysicalConfig};
use crate::mp::MpComplex;

/// `c = Σ_r λ_r T(new, r)` at the solution's precision.
pub fn successive_value_mp(cfg: &PhysicalConfig, kernels: &[Kernel], solution: &Solution, new: &Kernel) -> MpComplex {
    let prec = solution.prec_bits();
    let mut acc = MpComplex::zero(prec);
    let owned;
    let lambdas = if solution.lambdas_mp().len() == kernels.len() {
        solution.lambdas_mp()
    } else {
        owned = solution
            .lambdas
            .iter()
            .map(|&l| MpComplex::from_c64(prec, l))
            .collect::<Vec<_>>();
        &owned
    };
    for (k, l) in kernels.iter().zip(lambdas) {
        acc += &(&kernel_inner_mp(cfg, new, k, prec) * l);
    }
    acc
}

/// Value the solution of `cs` already takes on the functional `new`.
pub fn successive_constraint_value(
    cfg: &PhysicalConfig,
    cs: &ConstraintSet,
    solution: &Solution,
    new: &Kernel,
) -> Result<Complex64, ConstraintError> {
    Ok(successive_value_mp(cfg, &cs.kernels()?, solution, new).to_c64())
}

/// Gram matrix of `gram`'s kernels plus `new`, at the same precision.
pub fn extend_gram(gram: &GramMatrix, new: &Kernel) -> GramMatrix {
    let mut kernels = gram.kernels().to_vec();
    kernels.push(*new);
    GramMatrix::from_kernels(gram.cfg(), &kernels, gram.prec_bits())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::solve::{solve_constraints, SolverOptions};
    use crate::special::sinc_f64;

    #[test]
    fn repeated_kernel_returns_its_target() {
        let cfg = PhysicalConfig::new(1.0, 1.0, 6.0).unwrap();
        let cs = ConstraintSet::point_amplitude(
            vec![-1.0, 0.2, 1.5],
            vec![
                Complex64::new(1.0, 0.5),
                Complex64::new(-0.3, 0.0),
                Complex64::new(0.0, 2.0),
            ],
        );
        let (_, sol) = solve_constraints(&cfg, &cs, &SolverOptions::default()).unwrap();
        for k in 0..3 {
            let c = successive_constraint_value(&cfg, &cs, &sol, &cs.kernel(k).unwrap()).unwrap();
            assert!((c - cs.values[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn single_point_gives_sinc() {
        let cfg = PhysicalConfig::new(1.0, 1.0, 6.0).unwrap();
        let cs = ConstraintSet::point_amplitude(vec![0.0], vec![Complex64::new(1.0, 0.0)]);
        let (_, sol) = solve_constraints(&cfg, &cs, &SolverOptions::default()).unwrap();
        for &x in &[0.4, 1.9, -2.7] {
            let c = successive_constraint_value(&cfg, &cs, &sol, &Kernel::Point { x }).unwrap();
            assert!((c.re - sinc_f64(x)).abs() < 1e-15 && c.im.abs() < 1e-15);
        }
    }
}
