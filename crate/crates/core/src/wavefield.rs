//! Evaluating constructed waves, the slit projection and momentum statistics.
//!
//! Superoscillating solutions are sums of kernels with huge coefficients of
//! alternating sign, so position and momentum values are summed at extended
//! precision with enough extra bits to absorb the cancellation, then rounded.

use num_complex::Complex64;
use rayon::prelude::*;
use rug::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constraints::{
    cancellation_bits, probe_inner_batch, ConstraintError, ConstraintSet, Kernel, PhysicalConfig,
};
use crate::mp::{real, MpComplex};
use crate::quadrature::{breaks_with, Adaptive, GaussLegendre, Tolerance};
use crate::solver::Solution;

const EVAL_GUARD_BITS: u32 = 64;
/// Boundary values below this fraction of the in-slit maximum count as zero.
pub const BOUNDARY_JUMP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WaveError {
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error("wave is numerically zero inside the slit")]
    ZeroInSlit,
    #[error("wave jumps at the slit edge (|Ψ(edge)|/max|Ψ| = {ratio:e}) and spectral fallback is disabled")]
    BoundaryJump { ratio: f64 },
    #[error("spectral tail mass {tail:e} above tolerance at cutoff {cutoff}")]
    SpectralTail { cutoff: f64, tail: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// `ψ^(u)` exactly as constructed.
    Raw,
    /// `ψ^(u) / ‖ψ^(u)‖`, with the norm taken from the Gram identity.
    UnitNorm,
}

/// Anything that can be evaluated on the real line with derivatives.
pub trait PositionWave: Sync {
    fn value(&self, x: f64) -> Complex64;

    fn derivative(&self, x: f64, n: u32) -> Complex64;

    /// Points where quadrature should split (nodes, edges).
    fn break_points(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// `ψ(x) = (2πħ)^{-1/2} Σ λ_k χ_k(x)` and its transform.
#[derive(Debug, Clone)]
pub struct WaveField {
    cfg: PhysicalConfig,
    kernels: Vec<Kernel>,
    lambdas: Vec<MpComplex>,
    norm_sq: f64,
    normalization: Normalization,
    eval_prec: u32,
}

impl WaveField {
    pub fn new(
        cfg: &PhysicalConfig,
        cs: &ConstraintSet,
        solution: &Solution,
        normalization: Normalization,
    ) -> Result<Self, WaveError> {
        let kernels = cs.kernels()?;
        let mut sol = solution.clone();
        sol.restore_mp();
        Ok(Self::from_parts(
            cfg,
            kernels,
            sol.lambdas_mp().to_vec(),
            sol.norm_sq,
            normalization,
        ))
    }

    /// Wave from raw multipliers; `norm_sq` must be `‖ψ^(u)‖²`.
    pub fn from_parts(
        cfg: &PhysicalConfig,
        kernels: Vec<Kernel>,
        lambdas: Vec<MpComplex>,
        norm_sq: f64,
        normalization: Normalization,
    ) -> Self {
        let base = lambdas.iter().map(MpComplex::prec).max().unwrap_or(113).max(113);
        let pm = cfg.p_max;
        let h = cfg.hbar;
        // bound on Σ|λ_k| sup|χ_k| against the typical size of ψ
        let terms: f64 = kernels
            .iter()
            .zip(&lambdas)
            .map(|(k, l)| {
                let sup = match *k {
                    Kernel::Point { .. } => 2.0 * pm,
                    Kernel::Derivative { order, .. } => 2.0 * pm * (pm / h).powi(order as i32) / (order as f64 + 1.0),
                    Kernel::Interval { start, end } => 2.0 * pm * (end - start),
                };
                let (m, e) = l.abs().to_f64_exp();
                m.abs() * sup * (e as f64).exp2()
            })
            .sum::<f64>()
            / (2.0 * std::f64::consts::PI * h);
        let typical = (norm_sq.max(f64::MIN_POSITIVE) * pm / (std::f64::consts::PI * h)).sqrt();
        let lost = cancellation_bits(&real(64, terms.max(f64::MIN_POSITIVE)), &real(64, typical));
        WaveField {
            cfg: *cfg,
            kernels,
            lambdas,
            norm_sq,
            normalization,
            eval_prec: base + lost + EVAL_GUARD_BITS,
        }
    }

    pub fn with_normalization(&self, normalization: Normalization) -> Self {
        WaveField {
            normalization,
            ..self.clone()
        }
    }

    pub fn cfg(&self) -> &PhysicalConfig {
        &self.cfg
    }

    pub fn kernels(&self) -> &[Kernel] {
        &self.kernels
    }

    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// Binary precision used for summing kernel contributions.
    pub fn eval_prec(&self) -> u32 {
        self.eval_prec
    }

    fn scale(&self) -> f64 {
        match self.normalization {
            Normalization::Raw => 1.0,
            Normalization::UnitNorm => 1.0 / self.norm_sq.sqrt(),
        }
    }

    /// `ψ^{(n)}(x)` at extended precision, before normalization.
    pub fn derivative_mp(&self, x: f64, n: u32) -> MpComplex {
        let prec = self.eval_prec;
        let inner = probe_inner_batch(&self.cfg, x, n, &self.kernels, prec);
        let mut acc = MpComplex::zero(prec);
        for (t, l) in inner.iter().zip(&self.lambdas) {
            acc += &(t * l);
        }
        acc
    }

    pub fn eval_position(&self, x: f64) -> Complex64 {
        self.derivative_mp(x, 0).to_c64() * self.scale()
    }

    /// `ψ^{(n)}(x)` from the closed-form kernel derivatives.
    pub fn derivative(&self, x: f64, n: u32) -> Complex64 {
        self.derivative_mp(x, n).to_c64() * self.scale()
    }

    /// `ψ^{(n)}(x)` by quadrature of `(ip/ħ)^n ψ̂(p) e^{ipx/ħ}` over the band;
    /// an independent route to [`WaveField::derivative`].
    pub fn derivative_by_quadrature(&self, x: f64, n: u32, rel_tol: f64) -> Complex64 {
        let h = self.cfg.hbar;
        let pm = self.cfg.p_max;
        let s = 1.0 / (2.0 * std::f64::consts::PI * h).sqrt();
        let f =
            |p: f64| Complex64::new(0.0, p / h).powu(n) * self.eval_momentum(p) * Complex64::from_polar(s, p * x / h);
        Adaptive::default()
            .integrate(f, &[-pm, 0.0, pm], Tolerance::new(1e-300, rel_tol))
            .value
    }

    /// `ψ̂(p)`, exactly zero outside the band.
    pub fn eval_momentum(&self, p: f64) -> Complex64 {
        if p.abs() > self.cfg.p_max {
            return Complex64::new(0.0, 0.0);
        }
        let prec = self.eval_prec;
        let pf = Float::with_val(prec, p);
        let mut acc = MpComplex::zero(prec);
        for (k, l) in self.kernels.iter().zip(&self.lambdas) {
            acc += &(&k.momentum_mp(&self.cfg, &pf, prec) * l);
        }
        let s = 1.0 / (2.0 * std::f64::consts::PI * self.cfg.hbar).sqrt();
        acc.to_c64() * (s * self.scale())
    }

    /// Each constraint functional re-evaluated directly on `ψ^(u)`.
    pub fn constraint_values(&self) -> Vec<Complex64> {
        let raw = self.with_normalization(Normalization::Raw);
        self.kernels
            .iter()
            .map(|k| match *k {
                Kernel::Point { x } => raw.eval_position(x),
                Kernel::Derivative { anchor, order } => raw.derivative(anchor, order),
                Kernel::Interval { start, end } => {
                    Adaptive::default()
                        .integrate(|x| raw.eval_position(x), &[start, end], Tolerance::new(1e-300, 1e-13))
                        .value
                }
            })
            .collect()
    }
}

impl PositionWave for WaveField {
    fn value(&self, x: f64) -> Complex64 {
        self.eval_position(x)
    }

    fn derivative(&self, x: f64, n: u32) -> Complex64 {
        WaveField::derivative(self, x, n)
    }

    fn break_points(&self) -> Vec<f64> {
        self.kernels.iter().flat_map(Kernel::support_points).collect()
    }
}

/// The minimum-uncertainty template with momentum expectation `pbar`:
/// `Φ(x) = √(2/L) cos(π(x−c)/L) e^{i(x−c)p̄/ħ}` inside the slit, zero outside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdealTemplate {
    pub cfg: PhysicalConfig,
    pub pbar: f64,
}

impl IdealTemplate {
    pub fn new(cfg: &PhysicalConfig, pbar: f64) -> Self {
        IdealTemplate { cfg: *cfg, pbar }
    }

    /// `Φ^{(m)}(x)` from `cos(πu/L) e^{iup̄/ħ} = ½(e^{iβ₊u} + e^{iβ₋u})`.
    pub fn derivative_at(&self, x: f64, m: u32) -> Complex64 {
        let l = self.cfg.slit_width();
        let u = x - self.cfg.slit_center;
        if u.abs() >= 0.5 * l {
            return Complex64::new(0.0, 0.0);
        }
        let k = self.pbar / self.cfg.hbar;
        let q = std::f64::consts::PI / l;
        let amp = (2.0 / l).sqrt() * 0.5;
        [k + q, k - q]
            .iter()
            .map(|&b| Complex64::new(0.0, b).powu(m) * Complex64::from_polar(1.0, b * u))
            .sum::<Complex64>()
            * amp
    }

    pub fn delta_x(&self) -> f64 {
        let pi2 = std::f64::consts::PI.powi(2);
        self.cfg.slit_width() * ((pi2 - 6.0) / (12.0 * pi2)).sqrt()
    }

    pub fn delta_p(&self) -> f64 {
        std::f64::consts::PI * self.cfg.hbar / self.cfg.slit_width()
    }
}

impl PositionWave for IdealTemplate {
    fn value(&self, x: f64) -> Complex64 {
        self.derivative_at(x, 0)
    }

    fn derivative(&self, x: f64, n: u32) -> Complex64 {
        self.derivative_at(x, n)
    }

    fn break_points(&self) -> Vec<f64> {
        let (a, b) = self.cfg.slit_bounds();
        vec![a, self.cfg.slit_center, b]
    }
}

pub fn ideal_template(cfg: &PhysicalConfig, pbar: f64) -> IdealTemplate {
    IdealTemplate::new(cfg, pbar)
}

/// `Ψ = P_s ψ / ‖P_s ψ‖`: the part of a wave inside the slit, renormalized.
pub struct EmergingWave<'a> {
    source: &'a dyn PositionWave,
    pub slit: (f64, f64),
    pub renorm_factor: f64,
    breaks: Vec<f64>,
}

impl<'a> EmergingWave<'a> {
    pub fn source(&self) -> &'a dyn PositionWave {
        self.source
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn value(&self, x: f64) -> Complex64 {
        if x < self.slit.0 || x > self.slit.1 {
            return Complex64::new(0.0, 0.0);
        }
        self.source.value(x) * self.renorm_factor
    }

    pub fn derivative(&self, x: f64, n: u32) -> Complex64 {
        if x < self.slit.0 || x > self.slit.1 {
            return Complex64::new(0.0, 0.0);
        }
        self.source.derivative(x, n) * self.renorm_factor
    }

    /// `max |Ψ|` over a uniform grid of the slit.
    pub fn max_abs(&self, points: usize) -> f64 {
        uniform_grid(self.slit.0, self.slit.1, points)
            .into_par_iter()
            .map(|x| self.value(x).norm())
            .reduce(|| 0.0, f64::max)
    }

    /// `max(|Ψ(a)|, |Ψ(b)|) / max |Ψ|`.
    pub fn boundary_jump(&self) -> f64 {
        let edge = self.value(self.slit.0).norm().max(self.value(self.slit.1).norm());
        edge / self.max_abs(2001)
    }
}

impl PositionWave for EmergingWave<'_> {
    fn value(&self, x: f64) -> Complex64 {
        EmergingWave::value(self, x)
    }

    fn derivative(&self, x: f64, n: u32) -> Complex64 {
        EmergingWave::derivative(self, x, n)
    }

    fn break_points(&self) -> Vec<f64> {
        self.breaks.clone()
    }
}

/// Slit projection of `w` onto the configured slit of `cfg`.
pub fn project_slit<'a>(w: &'a dyn PositionWave, cfg: &PhysicalConfig) -> Result<EmergingWave<'a>, WaveError> {
    let (a, b) = cfg.slit_bounds();
    let breaks = breaks_with(a, b, w.break_points());
    let q = Adaptive::default().integrate(|x| w.value(x).norm_sqr(), &breaks, Tolerance::new(1e-300, 1e-12));
    let norm = q.value.sqrt();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(WaveError::ZeroInSlit);
    }
    Ok(EmergingWave {
        source: w,
        slit: (a, b),
        renorm_factor: 1.0 / norm,
        breaks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StatsMethod {
    PositionDerivative,
    SpectralQuadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumStats {
    pub p_mean: f64,
    pub p_std: f64,
    pub method: StatsMethod,
    /// `max(|Ψ(a)|, |Ψ(b)|) / max |Ψ|`.
    pub boundary_jump: f64,
    /// In-slit formulas `ħ Im∫Ψ*Ψ'` and `√(ħ²∫|Ψ'|² − ⟨p⟩²)`, always reported.
    pub p_mean_in_slit: f64,
    pub p_std_in_slit: f64,
    /// Momentum cutoff of the spectral estimate.
    pub cutoff: Option<f64>,
    pub tail_mass: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatsOptions {
    pub allow_spectral: bool,
    pub tail_tol: f64,
    /// Give up doubling the cutoff beyond this multiple of `p_max`.
    pub max_cutoff_factor: f64,
}

impl Default for StatsOptions {
    fn default() -> Self {
        StatsOptions {
            allow_spectral: true,
            tail_tol: 1e-8,
            max_cutoff_factor: 4096.0,
        }
    }
}

/// `(⟨p⟩, Δp)` from `∫Ψ*Ψ'` and `∫|Ψ'|²` over the slit.
fn in_slit_moments(e: &EmergingWave, hbar: f64) -> (f64, f64) {
    let q = Adaptive::default().integrate(
        |x| {
            let v = e.source.value(x);
            let d = e.source.derivative(x, 1);
            vec![
                Complex64::new(v.norm_sqr(), 0.0),
                v.conj() * d,
                Complex64::new(d.norm_sqr(), 0.0),
            ]
        },
        &e.breaks,
        Tolerance::new(1e-300, 1e-12),
    );
    let mass = q.value[0].re;
    let mean = hbar * q.value[1].im / mass;
    let second = hbar * hbar * q.value[2].re / mass;
    (mean, (second - mean * mean).max(0.0).sqrt())
}

/// `⟨x⟩` and `Δx` of the emerging wave.
pub fn position_stats(e: &EmergingWave) -> (f64, f64) {
    let q = Adaptive::default().integrate(
        |x| {
            let w = e.source.value(x).norm_sqr();
            vec![w, x * w, x * x * w]
        },
        &e.breaks,
        Tolerance::new(1e-300, 1e-13),
    );
    let mean = q.value[1] / q.value[0];
    let var = q.value[2] / q.value[0] - mean * mean;
    (mean, var.max(0.0).sqrt())
}

struct SampledSlit {
    nodes: Vec<f64>,
    // w_j Ψ(x_j)
    weighted: Vec<Complex64>,
}

fn sample_slit(e: &EmergingWave, cutoff: f64, hbar: f64) -> SampledSlit {
    const NODES_PER_PANEL: usize = 24;
    let rule = GaussLegendre::new(NODES_PER_PANEL);
    let target = 8.0 * hbar / cutoff;
    let mut edges = Vec::new();
    for w in e.breaks.windows(2) {
        let panels = ((w[1] - w[0]) / target).ceil().max(1.0) as usize;
        for i in 0..panels {
            let a = w[0] + (w[1] - w[0]) * i as f64 / panels as f64;
            let b = w[0] + (w[1] - w[0]) * (i + 1) as f64 / panels as f64;
            edges.push((a, b));
        }
    }
    let pts: Vec<(f64, f64)> = edges
        .iter()
        .flat_map(|&(a, b)| rule.mapped(a, b).collect::<Vec<_>>())
        .collect();
    let weighted: Vec<Complex64> = pts.par_iter().map(|&(x, wt)| e.value(x) * wt).collect();
    SampledSlit {
        nodes: pts.iter().map(|p| p.0).collect(),
        weighted,
    }
}

/// `Ψ̂(p)` from samples, by Gauss–Legendre on the slit.
fn spectral_value(s: &SampledSlit, p: f64, hbar: f64) -> Complex64 {
    let norm = 1.0 / (2.0 * std::f64::consts::PI * hbar).sqrt();
    s.nodes
        .iter()
        .zip(&s.weighted)
        .map(|(&x, &v)| v * Complex64::from_polar(1.0, -p * x / hbar))
        .sum::<Complex64>()
        * norm
}

fn spectral_moments(
    e: &EmergingWave,
    cfg: &PhysicalConfig,
    opts: &StatsOptions,
) -> Result<(f64, f64, f64, f64), WaveError> {
    let h = cfg.hbar;
    let mut cutoff = 16.0 * cfg.p_max;
    loop {
        let s = sample_slit(e, cutoff, h);
        // split the band so each panel spans a few oscillations of Ψ̂
        let width = e.slit.1 - e.slit.0;
        let period = 2.0 * std::f64::consts::PI * h / width;
        let panels = ((2.0 * cutoff / (4.0 * period)).ceil() as usize).max(2);
        let breaks: Vec<f64> = (0..=panels)
            .map(|i| -cutoff + 2.0 * cutoff * i as f64 / panels as f64)
            .collect();
        let pieces: Vec<Vec<f64>> = breaks
            .par_windows(2)
            .map(|w| {
                Adaptive::default()
                    .integrate(
                        |p| {
                            let d = spectral_value(&s, p, h).norm_sqr();
                            vec![d, p * d, p * p * d]
                        },
                        &[w[0], w[1]],
                        Tolerance::new(1e-14 / panels as f64, 1e-11),
                    )
                    .value
            })
            .collect();
        let mut m = [0.0; 3];
        for piece in &pieces {
            for (acc, v) in m.iter_mut().zip(piece) {
                *acc += v;
            }
        }
        let tail = 1.0 - m[0];
        if tail.abs() < opts.tail_tol || cutoff >= opts.max_cutoff_factor * cfg.p_max {
            if tail.abs() >= opts.tail_tol {
                return Err(WaveError::SpectralTail { cutoff, tail });
            }
            let mean = m[1] / m[0];
            let std = (m[2] / m[0] - mean * mean).max(0.0).sqrt();
            return Ok((mean, std, cutoff, tail));
        }
        cutoff *= 2.0;
    }
}

/// Momentum expectation and spread of the emerging wave.
pub fn momentum_stats(e: &EmergingWave, cfg: &PhysicalConfig, opts: &StatsOptions) -> Result<MomentumStats, WaveError> {
    let jump = e.boundary_jump();
    let (mean_in, std_in) = in_slit_moments(e, cfg.hbar);
    if jump < BOUNDARY_JUMP_TOL {
        return Ok(MomentumStats {
            p_mean: mean_in,
            p_std: std_in,
            method: StatsMethod::PositionDerivative,
            boundary_jump: jump,
            p_mean_in_slit: mean_in,
            p_std_in_slit: std_in,
            cutoff: None,
            tail_mass: None,
        });
    }
    if !opts.allow_spectral {
        return Err(WaveError::BoundaryJump { ratio: jump });
    }
    let (mean, std, cutoff, tail) = spectral_moments(e, cfg, opts)?;
    Ok(MomentumStats {
        p_mean: mean,
        p_std: std,
        method: StatsMethod::SpectralQuadrature,
        boundary_jump: jump,
        p_mean_in_slit: mean_in,
        p_std_in_slit: std_in,
        cutoff: Some(cutoff),
        tail_mass: Some(tail),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Part {
    Real,
    Imag,
}

/// Sign changes of the chosen part on the open interval `(a, b)`, refining a
/// midpoint grid until the count agrees across two successive refinements.
pub fn zero_crossings<F>(f: F, part: Part, a: f64, b: f64) -> usize
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let count = |n: usize| -> usize {
        let h = (b - a) / n as f64;
        let vals: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let z = f(a + (i as f64 + 0.5) * h);
                match part {
                    Part::Real => z.re,
                    Part::Imag => z.im,
                }
            })
            .collect();
        let mut last = 0.0f64;
        let mut crossings = 0;
        for v in vals {
            if v != 0.0 {
                if last != 0.0 && (v > 0.0) != (last > 0.0) {
                    crossings += 1;
                }
                last = v;
            }
        }
        crossings
    };
    let mut n = 512;
    let mut prev = count(n);
    let mut stable = 0;
    while n < 1 << 20 {
        n *= 2;
        let c = count(n);
        if c == prev {
            stable += 1;
            if stable == 2 {
                break;
            }
        } else {
            stable = 0;
        }
        prev = c;
    }
    prev
}

/// `n` equally spaced points from `a` to `b` inclusive.
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let h = (b - a) / (n - 1) as f64;
    (0..n).map(|i| if i + 1 == n { b } else { a + i as f64 * h }).collect()
}

/// `(x, f(x))` on a uniform grid, evaluated in parallel.
pub fn sample<F>(f: F, a: f64, b: f64, n: usize) -> Vec<(f64, Complex64)>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    uniform_grid(a, b, n).into_par_iter().map(|x| (x, f(x))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve_constraints, SolverOptions};
    use std::f64::consts::PI;

    fn unit() -> PhysicalConfig {
        PhysicalConfig::new(1.0, 1.0, 2.0 * PI).unwrap()
    }

    #[test]
    fn single_point_wave() {
        let cfg = unit();
        let cs = ConstraintSet::point_amplitude(vec![0.0], vec![Complex64::new(1.0, 0.0)]);
        let (_, sol) = solve_constraints(&cfg, &cs, &SolverOptions::default()).unwrap();
        let w = WaveField::new(&cfg, &cs, &sol, Normalization::Raw).unwrap();
        assert!((w.eval_position(0.0) - 1.0).norm() < 1e-15);
        let expect = PI / (2.0 * PI).sqrt();
        assert!((w.eval_momentum(0.4).re - expect).abs() < 1e-15);
        assert_eq!(w.eval_momentum(1.0001), Complex64::new(0.0, 0.0));
        let d = w.derivative_by_quadrature(0.7, 1, 1e-12);
        assert!((d - w.derivative(0.7, 1)).norm() < 1e-12);
    }

    #[test]
    fn template_properties() {
        let cfg = unit();
        let t = ideal_template(&cfg, 2.0);
        assert_eq!(t.value(PI), Complex64::new(0.0, 0.0));
        assert_eq!(t.value(-PI), Complex64::new(0.0, 0.0));
        assert!(t.value(0.0).im == 0.0 && t.value(0.0).re > 0.0);
        // derivative against a central difference
        let x = 0.37;
        let h = 1e-5;
        let fd = (t.value(x + h) - t.value(x - h)) / (2.0 * h);
        assert!((fd - t.derivative_at(x, 1)).norm() < 1e-8);
        let e = project_slit(&t, &cfg).unwrap();
        assert!((e.renorm_factor - 1.0).abs() < 1e-12);
        assert!((t.delta_x() / cfg.slit_width() - 0.18).abs() < 0.005);
        assert!((t.delta_x() * t.delta_p() - 0.57).abs() < 0.005);
    }

    #[test]
    fn crossings_of_simple_functions() {
        let cfg = unit();
        let t = ideal_template(&cfg, 0.0);
        assert_eq!(zero_crossings(|x| t.value(x), Part::Real, -PI, PI), 0);
        assert_eq!(zero_crossings(|_| Complex64::new(1.0, 0.0), Part::Real, -1.0, 1.0), 0);
        assert_eq!(
            zero_crossings(|x| Complex64::new(x.sin(), 0.0), Part::Real, 0.5, 10.0),
            3
        );
    }

    #[test]
    fn grid_is_uniform_and_inclusive() {
        let g = uniform_grid(-1.0, 1.0, 5);
        assert_eq!(g, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }
}
