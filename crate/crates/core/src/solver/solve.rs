use num_complex::Complex64;
use rug::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::factor::Ldl;
use super::gram::GramMatrix;
use crate::constraints::{ConstraintError, ConstraintSet, PhysicalConfig};
use crate::mp::{bits_to_digits, digits_to_bits, vec_dot, vec_norm, MpComplex, DEFAULT_DIGITS};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_DIGITS: u32 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Demanded relative residual `‖Tλ − a‖ / ‖a‖`.
    pub tol: f64,
    pub start_digits: u32,
    pub max_digits: u32,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: DEFAULT_TOL,
            start_digits: DEFAULT_DIGITS,
            max_digits: DEFAULT_MAX_DIGITS,
        }
    }
}

impl SolverOptions {
    /// Digit schedule: start, doubling, capped at `max_digits`.
    pub fn digit_schedule(&self) -> Vec<u32> {
        let mut out = vec![self.start_digits.min(self.max_digits)];
        while let Some(&last) = out.last() {
            if last >= self.max_digits {
                break;
            }
            out.push((last * 2).min(self.max_digits));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error("target vector is zero")]
    ZeroTargets,
    #[error("invalid solver option: {0}")]
    InvalidOptions(String),
    #[error("target vector has length {got}, Gram matrix has dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("residual {residual:e} still above tolerance at {digits} digits")]
    PrecisionExhausted { digits: u32, residual: f64 },
    #[error("non-positive pivot {pivot:e} at step {step} ({digits} digits)")]
    NotPositiveDefinite { step: usize, pivot: f64, digits: u32 },
}

impl SolveError {
    /// Stable machine-readable name of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            SolveError::Constraint(_) => "InvalidConstraints",
            SolveError::ZeroTargets => "ZeroTargets",
            SolveError::InvalidOptions(_) => "InvalidOptions",
            SolveError::DimensionMismatch { .. } => "DimensionMismatch",
            SolveError::PrecisionExhausted { .. } => "PrecisionExhausted",
            SolveError::NotPositiveDefinite { .. } => "NotPositiveDefinite",
        }
    }

    /// True for precondition failures, as opposed to numerical failures.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            SolveError::Constraint(_)
                | SolveError::ZeroTargets
                | SolveError::InvalidOptions(_)
                | SolveError::DimensionMismatch { .. }
        )
    }
}

/// Lagrange multipliers and diagnostics of a minimum-norm solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Solution {
    pub lambdas: Vec<Complex64>,
    pub norm_sq: f64,
    pub residual: f64,
    pub condition_estimate: f64,
    pub precision_digits_used: u32,
    #[serde(skip)]
    lambdas_mp: Vec<MpComplex>,
    #[serde(skip)]
    prec: u32,
}

impl Solution {
    /// Multipliers at the precision of the final solve.
    pub fn lambdas_mp(&self) -> &[MpComplex] {
        &self.lambdas_mp
    }

    pub fn prec_bits(&self) -> u32 {
        if self.prec > 0 {
            self.prec
        } else {
            digits_to_bits(self.precision_digits_used)
        }
    }

    /// Rebuild from double-precision multipliers (e.g. after deserializing).
    pub fn restore_mp(&mut self) {
        if self.lambdas_mp.len() != self.lambdas.len() {
            let prec = self.prec_bits();
            self.lambdas_mp = self.lambdas.iter().map(|&l| MpComplex::from_c64(prec, l)).collect();
        }
    }

    /// Solution assembled from externally computed multipliers.
    pub fn from_parts(lambdas: Vec<MpComplex>, norm_sq: f64, residual: f64, condition_estimate: f64) -> Self {
        let prec = lambdas.first().map(MpComplex::prec).unwrap_or(113);
        Solution {
            lambdas: lambdas.iter().map(MpComplex::to_c64).collect(),
            norm_sq,
            residual,
            condition_estimate,
            precision_digits_used: bits_to_digits(prec),
            lambdas_mp: lambdas,
            prec,
        }
    }
}

fn check_options(opts: &SolverOptions) -> Result<(), SolveError> {
    if !(opts.tol.is_finite() && opts.tol > 0.0) {
        return Err(SolveError::InvalidOptions(format!(
            "tol must be positive, got {}",
            opts.tol
        )));
    }
    if opts.start_digits == 0 || opts.max_digits < opts.start_digits {
        return Err(SolveError::InvalidOptions(format!(
            "need 0 < start_digits <= max_digits, got {} and {}",
            opts.start_digits, opts.max_digits
        )));
    }
    Ok(())
}

/// Solve `T λ = a` with precision escalation.
pub fn solve(gram: &GramMatrix, a: &[Complex64], opts: &SolverOptions) -> Result<Solution, SolveError> {
    let a_mp: Vec<MpComplex> = a.iter().map(|&v| MpComplex::from_c64(53, v)).collect();
    solve_exact(gram, &a_mp, opts)
}

/// [`solve`] for targets given at extended precision.
pub fn solve_exact(gram: &GramMatrix, a: &[MpComplex], opts: &SolverOptions) -> Result<Solution, SolveError> {
    check_options(opts)?;
    if a.len() != gram.dim() {
        return Err(SolveError::DimensionMismatch {
            expected: gram.dim(),
            got: a.len(),
        });
    }
    if a.iter().all(MpComplex::is_zero) {
        return Err(SolveError::ZeroTargets);
    }
    let mut last = None;
    for digits in opts.digit_schedule() {
        let prec = digits_to_bits(digits);
        let g = gram.at_precision(prec);
        let at_max = digits >= opts.max_digits;
        match solve_once(&g, a, digits) {
            Ok(sol) if sol.residual <= opts.tol => return Ok(sol),
            Ok(sol) => {
                last = Some(SolveError::PrecisionExhausted {
                    digits,
                    residual: sol.residual,
                })
            }
            // an indefinite pivot below the precision cap is treated as
            // rounding noise and answered with more digits
            Err(e) => {
                if at_max {
                    return Err(e);
                }
                last = Some(e);
            }
        }
    }
    Err(last.expect("schedule is nonempty"))
}

fn solve_once(g: &GramMatrix, a: &[MpComplex], digits: u32) -> Result<Solution, SolveError> {
    let prec = g.prec_bits();
    let ldl = Ldl::factor(g).map_err(|e| SolveError::NotPositiveDefinite {
        step: e.step,
        pivot: e.pivot,
        digits,
    })?;
    let a_w: Vec<MpComplex> = a.iter().map(|v| v.with_prec(prec)).collect();
    let lambdas = ldl.solve(&a_w);
    let residual = relative_residual(g, &lambdas, &a_w);
    let norm = vec_dot(&a_w, &lambdas, prec);
    Ok(Solution {
        lambdas: lambdas.iter().map(MpComplex::to_c64).collect(),
        norm_sq: norm.re.to_f64(),
        residual,
        condition_estimate: ldl.pivot_ratio(),
        precision_digits_used: digits,
        lambdas_mp: lambdas,
        prec,
    })
}

/// `‖T x − a‖ / ‖a‖` at the matrix precision.
pub fn relative_residual(g: &GramMatrix, x: &[MpComplex], a: &[MpComplex]) -> f64 {
    let prec = g.prec_bits();
    let tx = g.mul_vec(x);
    let r: Vec<MpComplex> = tx.iter().zip(a).map(|(u, v)| u - v).collect();
    let num = vec_norm(&r, prec);
    let den = vec_norm(a, prec);
    Float::with_val(prec, num / den).to_f64()
}

/// Assemble and solve for the targets stored in `cs`.
pub fn solve_constraints(
    cfg: &PhysicalConfig,
    cs: &ConstraintSet,
    opts: &SolverOptions,
) -> Result<(GramMatrix, Solution), SolveError> {
    check_options(opts)?;
    let gram = GramMatrix::assemble(cfg, cs, opts.start_digits)?;
    let sol = solve(&gram, &cs.values, opts)?;
    Ok((gram, sol))
}

/// `Re(a† λ)`, the squared norm of the minimum-norm solution.
///
/// The imaginary part vanishes up to the solve residual; it is checked in
/// debug builds.
pub fn norm_squared(solution: &Solution, a: &[Complex64]) -> f64 {
    let prec = solution.prec_bits();
    let a_mp: Vec<MpComplex> = a.iter().map(|&v| MpComplex::from_c64(prec, v)).collect();
    let lam: Vec<MpComplex> = if solution.lambdas_mp.len() == a.len() {
        solution.lambdas_mp.clone()
    } else {
        solution.lambdas.iter().map(|&l| MpComplex::from_c64(prec, l)).collect()
    };
    let v = vec_dot(&a_mp, &lam, prec);
    let re = v.re.to_f64();
    debug_assert!(
        v.im.to_f64().abs() <= 1e-6 * re.abs().max(f64::MIN_POSITIVE),
        "a†λ has imaginary part {}",
        v.im
    );
    re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::Kernel;
    use std::f64::consts::PI;

    fn unit() -> PhysicalConfig {
        PhysicalConfig::new(1.0, 1.0, 2.0 * PI).unwrap()
    }

    #[test]
    fn one_by_one() {
        let cfg = unit();
        let cs = ConstraintSet::point_amplitude(vec![0.0], vec![Complex64::new(1.0, 0.0)]);
        let (g, sol) = solve_constraints(&cfg, &cs, &SolverOptions::default()).unwrap();
        assert!((g.get(0, 0).to_c64().re - 1.0 / PI).abs() < 1e-16);
        assert!((sol.lambdas[0].re - PI).abs() < 1e-14);
        assert!((sol.norm_sq - PI).abs() < 1e-14);
        assert_eq!(sol.precision_digits_used, 34);
        assert!((norm_squared(&sol, &cs.values) - PI).abs() < 1e-14);
    }

    #[test]
    fn diagonal_two_by_two() {
        let cfg = unit();
        let cs = ConstraintSet::point_amplitude(vec![0.0, PI], vec![Complex64::new(1.0, 0.0); 2]);
        let (_, sol) = solve_constraints(&cfg, &cs, &SolverOptions::default()).unwrap();
        for l in &sol.lambdas {
            assert!((l - PI).norm() < 1e-14);
        }
        assert!((sol.norm_sq - 2.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn rejects_bad_inputs() {
        let cfg = unit();
        let g = GramMatrix::from_kernels(&cfg, &[Kernel::Point { x: 0.0 }], 113);
        let opts = SolverOptions::default();
        assert_eq!(
            solve(&g, &[Complex64::new(0.0, 0.0)], &opts).unwrap_err(),
            SolveError::ZeroTargets
        );
        assert!(matches!(
            solve(&g, &[], &opts),
            Err(SolveError::DimensionMismatch { .. })
        ));
        let bad = SolverOptions { tol: -1.0, ..opts };
        assert!(solve(&g, &[Complex64::new(1.0, 0.0)], &bad)
            .unwrap_err()
            .is_validation());
    }

    #[test]
    fn schedule_doubles_to_cap() {
        let s = SolverOptions::default().digit_schedule();
        assert_eq!(s, vec![34, 68, 136, 272, 544, 1088, 2176, 4096]);
    }

    #[test]
    fn duplicate_kernels_fail_at_cap() {
        let cfg = unit();
        let g = GramMatrix::from_kernels(&cfg, &[Kernel::Point { x: 0.5 }, Kernel::Point { x: 0.5 }], 113);
        let opts = SolverOptions {
            max_digits: 68,
            ..Default::default()
        };
        let err = solve(&g, &[Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)], &opts).unwrap_err();
        assert_eq!(err.kind(), "NotPositiveDefinite");
    }

    #[test]
    fn escalates_for_ill_conditioned_system() {
        let cfg = unit();
        let nodes = cfg.equidistant_nodes(15);
        let vals = nodes
            .iter()
            .map(|&x| Complex64::new((2.0 * x).cos(), (2.0 * x).sin()))
            .collect();
        let cs = ConstraintSet::point_amplitude(nodes, vals);
        let opts = SolverOptions {
            start_digits: 16,
            ..Default::default()
        };
        let (_, sol) = solve_constraints(&cfg, &cs, &opts).unwrap();
        assert!(sol.precision_digits_used > 16);
        assert!(sol.residual <= 1e-10);
    }
}
