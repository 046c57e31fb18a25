//! Smallest eigenpair of the Gram matrix by inverse iteration.
//!
//! The coefficient vector `q` of unit length that minimizes `q† T q` gives the
//! most strongly superoscillating plane-wave combination for the given nodes;
//! its squared norm is the smallest eigenvalue.

use num_complex::Complex64;
use rug::Float;
use serde::{Deserialize, Serialize};

use super::factor::Ldl;
use super::gram::GramMatrix;
use super::solve::{SolveError, SolverOptions};
use crate::mp::{digits_to_bits, log2_abs, vec_dot, vec_norm, MpComplex};

const MAX_ITER: usize = 500;
const RESIDUAL_TOL: f64 = 1e-12;
const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenPair {
    pub eigenvalue: f64,
    pub eigenvector: Vec<Complex64>,
    /// `‖Tq − νq‖ / ‖T‖_F`.
    pub residual: f64,
    /// Next eigenvalue up, from deflated iteration.
    pub second_eigenvalue: Option<f64>,
    /// Two smallest eigenvalues coincide to `1e-12` relative; the vector is
    /// then whichever one the fixed seed converges to.
    pub degenerate: bool,
    pub precision_digits: u32,
    #[serde(skip)]
    eigenvector_mp: Vec<MpComplex>,
}

impl EigenPair {
    pub fn eigenvector_mp(&self) -> &[MpComplex] {
        &self.eigenvector_mp
    }
}

/// Deterministic seed with nonzero overlap on both parity sectors.
fn seed(n: usize, prec: u32) -> Vec<MpComplex> {
    (0..n)
        .map(|k| MpComplex::from_real(Float::with_val(prec, 1) / (k as u32 + 1)))
        .collect()
}

fn normalize(v: &mut [MpComplex], prec: u32) {
    let nrm = vec_norm(v, prec);
    for x in v.iter_mut() {
        *x = x.div_real(&nrm);
    }
}

fn project_out(v: &mut [MpComplex], q: &[MpComplex], prec: u32) {
    let c = vec_dot(q, v, prec);
    for (x, qi) in v.iter_mut().zip(q) {
        *x -= &(qi * &c);
    }
}

/// Multiply by a unit phase so that the first non-negligible component is
/// real and positive.
fn fix_phase(v: &mut [MpComplex], prec: u32) {
    let max = v.iter().map(|x| log2_abs(&x.abs())).fold(f64::NEG_INFINITY, f64::max);
    if let Some(lead) = v.iter().find(|x| log2_abs(&x.abs()) > max - 27.0).cloned() {
        let r = lead.abs();
        let phase = lead.conj().div_real(&r);
        for x in v.iter_mut() {
            *x = (&*x * &phase).with_prec(prec);
        }
    }
}

struct Iterated {
    value: Float,
    vector: Vec<MpComplex>,
    residual: f64,
}

fn iterate(g: &GramMatrix, ldl: &Ldl, deflate: Option<&[MpComplex]>, t_norm: f64) -> Iterated {
    let prec = g.prec_bits();
    let mut q = seed(g.dim(), prec);
    if let Some(d) = deflate {
        project_out(&mut q, d, prec);
    }
    normalize(&mut q, prec);
    let mut best = None;
    for _ in 0..MAX_ITER {
        let mut y = ldl.solve(&q);
        if let Some(d) = deflate {
            project_out(&mut y, d, prec);
        }
        normalize(&mut y, prec);
        q = y;
        let tq = g.mul_vec(&q);
        let nu = vec_dot(&q, &tq, prec).re;
        let r: Vec<MpComplex> = tq.iter().zip(&q).map(|(a, b)| a - &b.scale(&nu)).collect();
        let residual = vec_norm(&r, prec).to_f64() / t_norm;
        let done = residual <= RESIDUAL_TOL;
        best = Some(Iterated {
            value: nu,
            vector: q.clone(),
            residual,
        });
        if done {
            break;
        }
    }
    best.expect("at least one iteration")
}

/// Smallest eigenpair at the Gram matrix's own precision.
pub fn extreme_coefficients(gram: &GramMatrix) -> Result<EigenPair, SolveError> {
    let prec = gram.prec_bits();
    let ldl = Ldl::factor(gram).map_err(|e| SolveError::NotPositiveDefinite {
        step: e.step,
        pivot: e.pivot,
        digits: gram.precision_digits(),
    })?;
    let t_norm = gram.frobenius_norm();
    let first = iterate(gram, &ldl, None, t_norm);
    let mut vector = first.vector;
    fix_phase(&mut vector, prec);
    let (second, degenerate) = if gram.dim() > 1 {
        let s = iterate(gram, &ldl, Some(&vector), t_norm).value;
        let gap = Float::with_val(prec, &s - &first.value).to_f64().abs();
        (Some(s.to_f64()), gap <= DEGENERACY_TOL * s.to_f64().abs())
    } else {
        (None, false)
    };
    Ok(EigenPair {
        eigenvalue: first.value.to_f64(),
        eigenvector: vector.iter().map(MpComplex::to_c64).collect(),
        residual: first.residual,
        second_eigenvalue: second,
        degenerate,
        precision_digits: gram.precision_digits(),
        eigenvector_mp: vector,
    })
}

/// Repeat [`extreme_coefficients`] at doubling precision until the
/// eigenvalue is stable to `rel_tol` between consecutive precisions.
pub fn extreme_coefficients_converged(
    gram: &GramMatrix,
    opts: &SolverOptions,
    rel_tol: f64,
) -> Result<EigenPair, SolveError> {
    let mut prev: Option<EigenPair> = None;
    let mut last_err = None;
    for digits in opts.digit_schedule() {
        let g = gram.at_precision(digits_to_bits(digits));
        match extreme_coefficients(&g) {
            Ok(pair) => {
                if let Some(p) = &prev {
                    let change = (pair.eigenvalue - p.eigenvalue).abs() / pair.eigenvalue.abs();
                    if change <= rel_tol {
                        return Ok(pair);
                    }
                }
                prev = Some(pair);
            }
            Err(e) => last_err = Some(e),
        }
    }
    match (prev, last_err) {
        (Some(p), _) => Err(SolveError::PrecisionExhausted {
            digits: p.precision_digits,
            residual: p.residual,
        }),
        (None, Some(e)) => Err(e),
        (None, None) => unreachable!("schedule is nonempty"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{Kernel, PhysicalConfig};

    #[test]
    fn one_by_one_is_the_entry() {
        let cfg = PhysicalConfig::new(1.0, 1.0, 4.0).unwrap();
        let g = GramMatrix::from_kernels(&cfg, &[Kernel::Point { x: 0.3 }], 128);
        let e = extreme_coefficients(&g).unwrap();
        assert!((e.eigenvalue - std::f64::consts::FRAC_1_PI).abs() < 1e-16);
        assert_eq!(e.eigenvector, vec![Complex64::new(1.0, 0.0)]);
        assert!(e.second_eigenvalue.is_none());
    }

    #[test]
    fn symmetric_pair_is_antisymmetric() {
        let cfg = PhysicalConfig::new(1.0, 1.0, 4.0).unwrap();
        let d = 0.6;
        let g = GramMatrix::from_kernels(&cfg, &[Kernel::Point { x: -d }, Kernel::Point { x: d }], 128);
        let t = g.to_c64();
        assert!(t[0][1].re > 0.0);
        let e = extreme_coefficients(&g).unwrap();
        assert!((e.eigenvalue - (t[0][0].re - t[0][1].norm())).abs() < 1e-15);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((e.eigenvector[0] - Complex64::new(s, 0.0)).norm() < 1e-12);
        assert!((e.eigenvector[1] + Complex64::new(s, 0.0)).norm() < 1e-12);
        assert!(!e.degenerate);
    }

    #[test]
    fn degenerate_spectrum_is_flagged() {
        // sinc(π) = 0: identity-like Gram matrix
        let cfg = PhysicalConfig::new(1.0, 1.0, 8.0).unwrap();
        let pi = std::f64::consts::PI;
        let g = GramMatrix::from_kernels(
            &cfg,
            &[Kernel::Point { x: -pi / 2.0 }, Kernel::Point { x: pi / 2.0 }],
            128,
        );
        let e = extreme_coefficients(&g).unwrap();
        assert!(e.degenerate);
    }
}
