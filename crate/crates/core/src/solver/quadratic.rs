//! Minimum norm under `N` linear and `M` quadratic constraints.
//!
//! Stationarity gives
//!
//! ```text
//! ψ̂(p) = s Σ λ_k χ_k(p) / (1 + s Σ Re(μ_k Ξ_k(p))),   s = (2πħ)^{-1/2}
//! ```
//!
//! and the multipliers are fixed by substituting this back into
//!
//! ```text
//! a_k = s ∫ ψ̂ conj(χ_k) dp,    b_k = s ∫ |ψ̂|² conj(Ξ_k) dp.
//! ```
//!
//! That system is solved in double precision by damped Gauss–Newton on the
//! real and imaginary parts, with a minimum-norm least-squares step so that
//! directions the residual does not see (the imaginary part of `μ` for a real
//! `Ξ`) stay at zero. The linear solution is the starting point.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::solve::{solve_constraints, SolveError, SolverOptions};
use crate::constraints::{ConstraintSet, Kernel, PhysicalConfig};
use crate::quadrature::{Adaptive, Tolerance};

const POLE_SAMPLES: usize = 4001;
const POLE_FLOOR: f64 = 1e-6;
const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadraticError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("invalid quadratic problem: {0}")]
    Invalid(String),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("denominator vanishes inside the band near p = {p}")]
    DenominatorVanishing { p: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub solver: SolverOptions,
}

impl Default for QuadraticOptions {
    fn default() -> Self {
        QuadraticOptions {
            tol: 1e-10,
            max_iter: 50,
            solver: SolverOptions::default(),
        }
    }
}

/// Problem data plus, once solved, the multipliers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticProblem {
    pub linear: ConstraintSet,
    pub quadratic_kernels: Vec<Kernel>,
    pub quadratic_targets: Vec<Complex64>,
    #[serde(default)]
    pub lambdas: Vec<Complex64>,
    #[serde(default)]
    pub mus: Vec<Complex64>,
    #[serde(default)]
    pub residual: f64,
    #[serde(default)]
    pub iterations: usize,
}

impl QuadraticProblem {
    pub fn new(linear: ConstraintSet, quadratic_kernels: Vec<Kernel>, quadratic_targets: Vec<Complex64>) -> Self {
        QuadraticProblem {
            linear,
            quadratic_kernels,
            quadratic_targets,
            lambdas: Vec::new(),
            mus: Vec::new(),
            residual: f64::NAN,
            iterations: 0,
        }
    }

    fn model<'a>(&'a self, cfg: &'a PhysicalConfig) -> Result<Model<'a>, QuadraticError> {
        Ok(Model {
            cfg,
            chi: self.linear.kernels().map_err(SolveError::from)?,
            xi: &self.quadratic_kernels,
        })
    }

    /// `1 + s Σ Re(μ_k Ξ_k(p))`.
    pub fn denominator(&self, cfg: &PhysicalConfig, p: f64) -> f64 {
        denominator(cfg, &self.quadratic_kernels, &self.mus, p)
    }

    /// `ψ̂(p)`, zero outside the band.
    pub fn momentum(&self, cfg: &PhysicalConfig, p: f64) -> Complex64 {
        if p.abs() > cfg.p_max {
            return Complex64::new(0.0, 0.0);
        }
        let s = inv_sqrt_2pi_hbar(cfg);
        let kernels = self.linear.kernels().unwrap_or_default();
        let num: Complex64 = kernels
            .iter()
            .zip(&self.lambdas)
            .map(|(k, l)| l * k.momentum(cfg, p))
            .sum();
        num * s / self.denominator(cfg, p)
    }

    /// `∫ |ψ̂|² dp` by adaptive quadrature.
    pub fn norm_sq(&self, cfg: &PhysicalConfig) -> f64 {
        Adaptive::default()
            .integrate(
                |p| self.momentum(cfg, p).norm_sqr(),
                &[-cfg.p_max, 0.0, cfg.p_max],
                Tolerance::new(0.0, 1e-12),
            )
            .value
    }
}

fn inv_sqrt_2pi_hbar(cfg: &PhysicalConfig) -> f64 {
    1.0 / (2.0 * std::f64::consts::PI * cfg.hbar).sqrt()
}

fn denominator(cfg: &PhysicalConfig, xi: &[Kernel], mus: &[Complex64], p: f64) -> f64 {
    let s = inv_sqrt_2pi_hbar(cfg);
    1.0 + s * xi
        .iter()
        .zip(mus)
        .map(|(k, m)| (m * k.momentum(cfg, p)).re)
        .sum::<f64>()
}

struct Model<'a> {
    cfg: &'a PhysicalConfig,
    chi: Vec<Kernel>,
    xi: &'a [Kernel],
}

struct Evaluation {
    residual: DVector<f64>,
    jacobian: Option<DMatrix<f64>>,
}

impl Model<'_> {
    fn n(&self) -> usize {
        self.chi.len()
    }

    fn m(&self) -> usize {
        self.xi.len()
    }

    fn unpack(&self, theta: &DVector<f64>) -> (Vec<Complex64>, Vec<Complex64>) {
        let c = |i: usize| Complex64::new(theta[2 * i], theta[2 * i + 1]);
        let lam = (0..self.n()).map(c).collect();
        let mu = (self.n()..self.n() + self.m()).map(c).collect();
        (lam, mu)
    }

    fn pack(lam: &[Complex64], mu: &[Complex64]) -> DVector<f64> {
        DVector::from_iterator(
            2 * (lam.len() + mu.len()),
            lam.iter().chain(mu).flat_map(|z| [z.re, z.im]),
        )
    }

    /// Smallest denominator on a uniform band grid, with its location.
    fn min_denominator(&self, mu: &[Complex64]) -> (f64, f64) {
        let pm = self.cfg.p_max;
        (0..POLE_SAMPLES)
            .map(|i| -pm + 2.0 * pm * i as f64 / (POLE_SAMPLES - 1) as f64)
            .map(|p| (denominator(self.cfg, self.xi, mu, p), p))
            .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a })
    }

    fn evaluate(&self, theta: &DVector<f64>, a: &[Complex64], b: &[Complex64], jac: bool) -> Evaluation {
        let (n, m) = (self.n(), self.m());
        let vars = 2 * (n + m);
        let (lam, mu) = self.unpack(theta);
        let s = inv_sqrt_2pi_hbar(self.cfg);
        let width = if jac { (n + m) * (1 + vars) } else { n + m };
        let integrand = |p: f64| -> Vec<Complex64> {
            let chi: Vec<Complex64> = self.chi.iter().map(|k| k.momentum(self.cfg, p)).collect();
            let xi: Vec<Complex64> = self.xi.iter().map(|k| k.momentum(self.cfg, p)).collect();
            let num: Complex64 = chi.iter().zip(&lam).map(|(c, l)| l * c).sum::<Complex64>() * s;
            let den = 1.0 + s * xi.iter().zip(&mu).map(|(x, u)| (u * x).re).sum::<f64>();
            let psi = num / den;
            let mut out = Vec::with_capacity(width);
            out.extend(chi.iter().map(|c| psi * c.conj() * s));
            out.extend(xi.iter().map(|x| x.conj() * (psi.norm_sqr() * s)));
            if jac {
                let dpsi: Vec<Complex64> = chi
                    .iter()
                    .flat_map(|c| {
                        let d = c * (s / den);
                        [d, d * Complex64::i()]
                    })
                    .chain(
                        xi.iter()
                            .flat_map(|x| [-psi * (s * x.re / den), psi * (s * x.im / den)]),
                    )
                    .collect();
                for c in &chi {
                    out.extend(dpsi.iter().map(|d| d * c.conj() * s));
                }
                for x in &xi {
                    out.extend(dpsi.iter().map(|d| x.conj() * (2.0 * (psi.conj() * d).re * s)));
                }
            }
            out
        };
        let pm = self.cfg.p_max;
        let q = Adaptive::default().integrate(integrand, &[-pm, 0.0, pm], Tolerance::new(1e-15, 1e-13));
        let v = q.value;
        let targets = a.iter().chain(b);
        let residual = DVector::from_iterator(
            2 * (n + m),
            v[..n + m].iter().zip(targets).flat_map(|(got, want)| {
                let d = got - want;
                [d.re, d.im]
            }),
        );
        let jacobian = jac.then(|| {
            let mut j = DMatrix::zeros(vars, vars);
            for c in 0..n + m {
                for k in 0..vars {
                    let d = v[n + m + c * vars + k];
                    j[(2 * c, k)] = d.re;
                    j[(2 * c + 1, k)] = d.im;
                }
            }
            j
        });
        Evaluation { residual, jacobian }
    }
}

/// Solve for `(λ, μ)`. With no quadratic constraints the linear solution is
/// returned unchanged.
pub fn solve_quadratic(
    qp: &QuadraticProblem,
    cfg: &PhysicalConfig,
    opts: &QuadraticOptions,
) -> Result<QuadraticProblem, QuadraticError> {
    if qp.quadratic_kernels.len() != qp.quadratic_targets.len() {
        return Err(QuadraticError::Invalid(format!(
            "{} quadratic kernels but {} targets",
            qp.quadratic_kernels.len(),
            qp.quadratic_targets.len()
        )));
    }
    if !(opts.tol.is_finite() && opts.tol > 0.0) {
        return Err(QuadraticError::Invalid(format!(
            "tol must be positive, got {}",
            opts.tol
        )));
    }
    let (_, linear) = solve_constraints(cfg, &qp.linear, &opts.solver)?;
    let mut out = qp.clone();
    if qp.quadratic_kernels.is_empty() {
        out.lambdas = linear.lambdas;
        out.mus = Vec::new();
        out.residual = linear.residual;
        out.iterations = 0;
        return Ok(out);
    }

    let model = qp.model(cfg)?;
    let a = &qp.linear.values;
    let b = &qp.quadratic_targets;
    let scale = a
        .iter()
        .chain(b)
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);
    let mu0 = vec![Complex64::new(0.0, 0.0); b.len()];
    let mut theta = Model::pack(&linear.lambdas, &mu0);
    let mut eval = model.evaluate(&theta, a, b, true);
    let mut rnorm = eval.residual.norm();
    let mut iterations = 0;
    while rnorm > opts.tol * scale {
        if iterations >= opts.max_iter {
            return Err(QuadraticError::NoConvergence {
                iterations,
                residual: rnorm / scale,
            });
        }
        iterations += 1;
        let j = eval.jacobian.take().expect("jacobian requested");
        let svd = j.svd(true, true);
        let smax = svd.singular_values.max();
        let step = svd
            .solve(&(-&eval.residual), 1e-13 * smax)
            .map_err(|e| QuadraticError::Invalid(e.to_string()))?;
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial = &theta + &step * t;
            let (_, mu) = model.unpack(&trial);
            if model.min_denominator(&mu).0 > POLE_FLOOR {
                let e = model.evaluate(&trial, a, b, true);
                let r = e.residual.norm();
                if r < rnorm {
                    accepted = Some((trial, e, r));
                    break;
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((th, e, r)) => {
                theta = th;
                eval = e;
                rnorm = r;
            }
            None => {
                return Err(QuadraticError::NoConvergence {
                    iterations,
                    residual: rnorm / scale,
                })
            }
        }
    }
    let (lam, mu) = model.unpack(&theta);
    let (dmin, at) = model.min_denominator(&mu);
    if dmin <= POLE_FLOOR {
        return Err(QuadraticError::DenominatorVanishing { p: at });
    }
    out.lambdas = lam;
    out.mus = mu;
    out.residual = rnorm / scale;
    out.iterations = iterations;
    Ok(out)
}
