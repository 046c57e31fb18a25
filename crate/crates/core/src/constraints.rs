//! Constraint families, their kernels `χ_k` and closed-form Gram entries.
//!
//! Every kernel is one of three shapes in momentum space:
//!
//! * a point amplitude at `x`: `χ(p) = e^{-ipx/ħ}`
//! * an `n`-th derivative at anchor `x₀`: `χ(p) = (-ip/ħ)^n e^{-ipx₀/ħ}`
//! * an interval area over `[a, b]`: `χ(p) = ∫_a^b e^{-ipx/ħ} dx`
//!
//! A point amplitude is the order-zero derivative, so point-like pairs share
//! one formula built on `I_n(z) = ∫_{-1}^{1} t^n e^{izt} dt`. Interval pairs
//! integrate that formula once (`Si`) or twice (`z Si(z) + cos z`) in closed
//! form. All extended-precision routines take a target precision in bits and
//! add their own guard bits against the cancellation they know about.

use num_complex::Complex64;
use rug::ops::Pow;
use rug::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mp::{log2_abs, pi, MpComplex};
use crate::special::{moment_integrals, sinc_f64, sinc_second_antiderivative, sine_integral};

const GUARD_BITS: u32 = 32;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstraintError {
    #[error("invalid physical config: {field} must be positive and finite (got {value})")]
    InvalidConfig { field: &'static str, value: f64 },
    #[error("constraint set is empty")]
    Empty,
    #[error("{family:?} expects {expected} nodes, got {got}")]
    NodeCount {
        family: ConstraintFamily,
        expected: usize,
        got: usize,
    },
    #[error("nodes must be strictly increasing (nodes[{index}] = {value})")]
    NotIncreasing { index: usize, value: f64 },
    #[error("nodes[{index}] = {value} lies outside the slit [{lo}, {hi}]")]
    OutsideSlit { index: usize, value: f64, lo: f64, hi: f64 },
    #[error("non-finite entry in {field}[{index}]")]
    NonFinite { field: &'static str, index: usize },
    #[error("kernel index {index} out of range for N = {len}")]
    IndexOutOfRange { index: usize, len: usize },
}

/// Units and slit geometry shared by every computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConfig {
    pub hbar: f64,
    pub p_max: f64,
    /// `L/2`.
    pub slit_half_width: f64,
    #[serde(default)]
    pub slit_center: f64,
}

impl PhysicalConfig {
    /// Slit of width `l` centred at the origin.
    pub fn new(hbar: f64, p_max: f64, l: f64) -> Result<Self, ConstraintError> {
        let cfg = PhysicalConfig {
            hbar,
            p_max,
            slit_half_width: 0.5 * l,
            slit_center: 0.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConstraintError> {
        for (field, value) in [
            ("hbar", self.hbar),
            ("p_max", self.p_max),
            ("slit_half_width", self.slit_half_width),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ConstraintError::InvalidConfig { field, value });
            }
        }
        if !self.slit_center.is_finite() {
            return Err(ConstraintError::InvalidConfig {
                field: "slit_center",
                value: self.slit_center,
            });
        }
        Ok(())
    }

    pub fn slit_width(&self) -> f64 {
        2.0 * self.slit_half_width
    }

    pub fn slit_bounds(&self) -> (f64, f64) {
        (
            self.slit_center - self.slit_half_width,
            self.slit_center + self.slit_half_width,
        )
    }

    /// Shortest wavelength in the band, `2πħ/p_max`.
    pub fn lambda_min(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.hbar / self.p_max
    }

    /// `N` equidistant nodes from slit edge to slit edge inclusive.
    pub fn equidistant_nodes(&self, n: usize) -> Vec<f64> {
        if n == 1 {
            return vec![self.slit_center];
        }
        (0..n)
            .map(|k| {
                let s = 2.0 * k as f64 / (n - 1) as f64 - 1.0;
                self.slit_center + self.slit_half_width * s
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstraintFamily {
    PointAmplitude,
    DerivativeAtPoint,
    IntervalArea,
}

/// A family tag, its nodes and the complex targets `a_k`.
///
/// Node meaning depends on the family: the `x_k` for point amplitudes, a
/// single anchor for derivatives (orders `0..N` implied), the `N+1`
/// partition endpoints for interval areas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub family: ConstraintFamily,
    pub nodes: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl ConstraintSet {
    pub fn point_amplitude(nodes: Vec<f64>, values: Vec<Complex64>) -> Self {
        ConstraintSet {
            family: ConstraintFamily::PointAmplitude,
            nodes,
            values,
        }
    }

    pub fn derivative_at_point(anchor: f64, values: Vec<Complex64>) -> Self {
        ConstraintSet {
            family: ConstraintFamily::DerivativeAtPoint,
            nodes: vec![anchor],
            values,
        }
    }

    pub fn interval_area(edges: Vec<f64>, values: Vec<Complex64>) -> Self {
        ConstraintSet {
            family: ConstraintFamily::IntervalArea,
            nodes: edges,
            values,
        }
    }

    /// Number of constraints `N`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn validate(&self, cfg: &PhysicalConfig) -> Result<(), ConstraintError> {
        cfg.validate()?;
        let n = self.len();
        if n == 0 {
            return Err(ConstraintError::Empty);
        }
        let expected = match self.family {
            ConstraintFamily::PointAmplitude => n,
            ConstraintFamily::DerivativeAtPoint => 1,
            ConstraintFamily::IntervalArea => n + 1,
        };
        if self.nodes.len() != expected {
            return Err(ConstraintError::NodeCount {
                family: self.family,
                expected,
                got: self.nodes.len(),
            });
        }
        for (index, v) in self.values.iter().enumerate() {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(ConstraintError::NonFinite { field: "values", index });
            }
        }
        let (lo, hi) = cfg.slit_bounds();
        let slack = 1e-12 * cfg.slit_width();
        for (index, &value) in self.nodes.iter().enumerate() {
            if !value.is_finite() {
                return Err(ConstraintError::NonFinite { field: "nodes", index });
            }
            if value < lo - slack || value > hi + slack {
                return Err(ConstraintError::OutsideSlit { index, value, lo, hi });
            }
            if index > 0 && value <= self.nodes[index - 1] {
                return Err(ConstraintError::NotIncreasing { index, value });
            }
        }
        Ok(())
    }

    /// Kernel of constraint `k` (0-based).
    pub fn kernel(&self, k: usize) -> Result<Kernel, ConstraintError> {
        if k >= self.len() {
            return Err(ConstraintError::IndexOutOfRange {
                index: k,
                len: self.len(),
            });
        }
        let out_of_range = || ConstraintError::IndexOutOfRange {
            index: k,
            len: self.len(),
        };
        Ok(match self.family {
            ConstraintFamily::PointAmplitude => Kernel::Point {
                x: *self.nodes.get(k).ok_or_else(out_of_range)?,
            },
            ConstraintFamily::DerivativeAtPoint => Kernel::Derivative {
                anchor: *self.nodes.first().ok_or_else(out_of_range)?,
                order: k as u32,
            },
            ConstraintFamily::IntervalArea => Kernel::Interval {
                start: *self.nodes.get(k).ok_or_else(out_of_range)?,
                end: *self.nodes.get(k + 1).ok_or_else(out_of_range)?,
            },
        })
    }

    pub fn kernels(&self) -> Result<Vec<Kernel>, ConstraintError> {
        (0..self.len()).map(|k| self.kernel(k)).collect()
    }
}

/// One constraint functional, independent of the set it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kernel {
    Point { x: f64 },
    Derivative { anchor: f64, order: u32 },
    Interval { start: f64, end: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Space {
    Position,
    Momentum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub value: Complex64,
    pub space: Space,
}

impl Kernel {
    /// `(x, n)` for point-like kernels.
    fn point_like(&self) -> Option<(f64, u32)> {
        match *self {
            Kernel::Point { x } => Some((x, 0)),
            Kernel::Derivative { anchor, order } => Some((anchor, order)),
            Kernel::Interval { .. } => None,
        }
    }

    /// Locations where the kernel is concentrated; used as quadrature breaks.
    pub fn support_points(&self) -> Vec<f64> {
        match *self {
            Kernel::Point { x } => vec![x],
            Kernel::Derivative { anchor, .. } => vec![anchor],
            Kernel::Interval { start, end } => vec![start, end],
        }
    }

    /// `χ(p)` in double precision.
    pub fn momentum(&self, cfg: &PhysicalConfig, p: f64) -> Complex64 {
        let h = cfg.hbar;
        match *self {
            Kernel::Point { x } => Complex64::from_polar(1.0, -p * x / h),
            Kernel::Derivative { anchor, order } => {
                Complex64::new(0.0, -p / h).powu(order) * Complex64::from_polar(1.0, -p * anchor / h)
            }
            Kernel::Interval { start, end } => {
                let w = end - start;
                let m = 0.5 * (start + end);
                Complex64::from_polar(w * sinc_f64(p * w / (2.0 * h)), -p * m / h)
            }
        }
    }

    /// `χ(p)` at `prec` bits.
    pub fn momentum_mp(&self, cfg: &PhysicalConfig, p: &Float, prec: u32) -> MpComplex {
        let w = prec + GUARD_BITS;
        let h = Float::with_val(w, cfg.hbar);
        let out = match *self {
            Kernel::Point { .. } | Kernel::Derivative { .. } => {
                let (x, n) = self.point_like().expect("point-like");
                let theta = -Float::with_val(w, p * Float::with_val(w, x)) / &h;
                let phase = MpComplex::cis(&Float::with_val(w, theta));
                // (-ip/ħ)^n
                let mag = Float::with_val(w, p / &h).pow(n);
                phase.scale(&mag).mul_i_pow(-(n as i64))
            }
            Kernel::Interval { start, end } => {
                let a = Float::with_val(w, start);
                let b = Float::with_val(w, end);
                let width = Float::with_val(w, &b - &a);
                let mid = Float::with_val(w, &a + &b) / 2u32;
                let arg = Float::with_val(w, p * &width) / Float::with_val(w, &h * 2u32);
                let s = crate::special::sinc(&arg, w);
                let theta = -Float::with_val(w, p * &mid) / &h;
                MpComplex::cis(&Float::with_val(w, theta)).scale(&Float::with_val(w, &width * &s))
            }
        };
        out.with_prec(prec)
    }

    /// `d^n χ(x)/dx^n` at `prec` bits, where
    /// `χ(x) = (2πħ)^{-1/2} ∫_{-p_max}^{p_max} χ(p) e^{ipx/ħ} dp`.
    pub fn position_derivative_mp(&self, cfg: &PhysicalConfig, x: &Float, n: u32, prec: u32) -> MpComplex {
        let probe = PointLike { x: x.clone(), n };
        let w = prec + GUARD_BITS;
        let root = Float::with_val(w, pi(w) * 2u32 * cfg.hbar).sqrt();
        let v = match *self {
            Kernel::Interval { start, end } => interval_point(cfg, start, end, &probe, w).conj(),
            _ => {
                let (xb, nb) = self.point_like().expect("point-like");
                point_point(cfg, &probe, &PointLike::new(xb, nb, w), w)
            }
        };
        v.scale(&root).with_prec(prec)
    }

    /// `χ(x)` in double precision (evaluated at 113 bits and rounded).
    pub fn position(&self, cfg: &PhysicalConfig, x: f64) -> Complex64 {
        let prec = 113;
        self.position_derivative_mp(cfg, &Float::with_val(prec, x), 0, prec)
            .to_c64()
    }

    pub fn evaluate(&self, cfg: &PhysicalConfig, space: Space, arg: f64) -> KernelValue {
        let value = match space {
            Space::Position => self.position(cfg, arg),
            Space::Momentum => self.momentum(cfg, arg),
        };
        KernelValue { value, space }
    }
}

/// `(1/2πħ) ∫_{-p_max}^{p_max} conj(χ_a(p)) χ_b(p) dp` at `prec` bits.
pub fn kernel_inner_mp(cfg: &PhysicalConfig, a: &Kernel, b: &Kernel, prec: u32) -> MpComplex {
    let w = prec + GUARD_BITS;
    let v = match (*a, *b) {
        (Kernel::Interval { start: a0, end: a1 }, Kernel::Interval { start: b0, end: b1 }) => {
            interval_interval(cfg, (a0, a1), (b0, b1), w)
        }
        (Kernel::Interval { start, end }, _) => {
            let (xb, nb) = b.point_like().expect("point-like");
            interval_point(cfg, start, end, &PointLike::new(xb, nb, w), w)
        }
        (_, Kernel::Interval { start, end }) => {
            let (xa, na) = a.point_like().expect("point-like");
            interval_point(cfg, start, end, &PointLike::new(xa, na, w), w).conj()
        }
        _ => {
            let (xa, na) = a.point_like().expect("point-like");
            let (xb, nb) = b.point_like().expect("point-like");
            point_point(cfg, &PointLike::new(xa, na, w), &PointLike::new(xb, nb, w), w)
        }
    };
    v.with_prec(prec)
}

/// `kernel_inner_mp(probe, k)` for every `k`, with `probe` the `n`-th
/// derivative at `x`. Point-like kernels sharing an anchor share one moment
/// evaluation, which makes derivative-family sums cost a single series.
pub fn probe_inner_batch(cfg: &PhysicalConfig, x: f64, n: u32, kernels: &[Kernel], prec: u32) -> Vec<MpComplex> {
    let w = prec + GUARD_BITS;
    let probe = Kernel::Derivative { anchor: x, order: n };
    let mut anchors: Vec<(f64, u32)> = Vec::new();
    for k in kernels {
        if let Some((xb, nb)) = k.point_like() {
            match anchors.iter_mut().find(|(a, _)| *a == xb) {
                Some(entry) => entry.1 = entry.1.max(nb),
                None => anchors.push((xb, nb)),
            }
        }
    }
    let p = Float::with_val(w, cfg.p_max);
    let h = Float::with_val(w, cfg.hbar);
    let ratio = Float::with_val(w, &p / &h);
    let xf = Float::with_val(w, x);
    let moments: Vec<Vec<MpComplex>> = anchors
        .iter()
        .map(|&(xb, nb)| {
            let z = Float::with_val(w, Float::with_val(w, &xf - xb) * &ratio);
            moment_integrals(&z, (n + nb) as usize, w)
        })
        .collect();
    let base = Float::with_val(w, &p / (pi(w) * 2u32 * &h));
    kernels
        .iter()
        .map(|k| match k.point_like() {
            Some((xb, nb)) => {
                let slot = anchors.iter().position(|(a, _)| *a == xb).expect("anchor recorded");
                let m = n + nb;
                let scale = Float::with_val(w, &base * Float::with_val(w, ratio.clone().pow(m)));
                moments[slot][m as usize]
                    .scale(&scale)
                    .mul_i_pow(n as i64 - nb as i64)
                    .with_prec(prec)
            }
            None => kernel_inner_mp(cfg, &probe, k, prec),
        })
        .collect()
}

struct PointLike {
    x: Float,
    n: u32,
}

impl PointLike {
    fn new(x: f64, n: u32, prec: u32) -> Self {
        PointLike {
            x: Float::with_val(prec, x),
            n,
        }
    }
}

/// Shared point-like formula:
/// `(P/2πħ) i^{n_a} (-i)^{n_b} (P/ħ)^{n_a+n_b} I_{n_a+n_b}(P(x_a-x_b)/ħ)`.
fn point_point(cfg: &PhysicalConfig, a: &PointLike, b: &PointLike, w: u32) -> MpComplex {
    let n = a.n + b.n;
    let p = Float::with_val(w, cfg.p_max);
    let h = Float::with_val(w, cfg.hbar);
    let ratio = Float::with_val(w, &p / &h);
    let dx = Float::with_val(w, &a.x - &b.x);
    let z = Float::with_val(w, &dx * &ratio);
    let moments = moment_integrals(&z, n as usize, w);
    let scale = Float::with_val(w, &p / (pi(w) * 2u32 * &h)) * ratio.pow(n);
    moments[n as usize]
        .scale(&Float::with_val(w, scale))
        .mul_i_pow(a.n as i64 - b.n as i64)
}

/// Interval `[a0, a1]` against a point-like kernel `b`:
/// `(P/2πħ)(-i)^{n_b}(P/ħ)^{n_b}(ħ/P)[J(z1) - J(z0)]`, with `J` the
/// antiderivative of `I_{n_b}`.
fn interval_point(cfg: &PhysicalConfig, a0: f64, a1: f64, b: &PointLike, w: u32) -> MpComplex {
    let ratio_f = cfg.p_max / cfg.hbar;
    // J(z1) - J(z0) loses about log2(1/Δz) bits when the interval is narrow
    let dz = ((a1 - a0) * ratio_f).abs();
    let guard = if dz < 1.0 { (-dz.log2()).ceil() as u32 } else { 0 } + GUARD_BITS;
    let wp = w + guard;
    let p = Float::with_val(wp, cfg.p_max);
    let h = Float::with_val(wp, cfg.hbar);
    let ratio = Float::with_val(wp, &p / &h);
    let anti = |edge: f64| -> MpComplex {
        let z = Float::with_val(wp, (Float::with_val(wp, edge) - &b.x) * &ratio);
        if b.n == 0 {
            MpComplex::from_real(Float::with_val(wp, sine_integral(&z, wp) * 2u32))
        } else {
            let m = moment_integrals(&z, b.n as usize - 1, wp);
            m[b.n as usize - 1].mul_i_pow(-1)
        }
    };
    let diff = &anti(a1) - &anti(a0);
    // (P/2πħ)(ħ/P) = 1/2π
    let scale = Float::with_val(wp, ratio.pow(b.n)) / (pi(wp) * 2u32);
    diff.scale(&scale).mul_i_pow(-(b.n as i64)).with_prec(w)
}

/// Two intervals: `(ħ/πP)[G(u(a1-b0)) - G(u(a0-b0)) - G(u(a1-b1)) + G(u(a0-b1))]`.
fn interval_interval(cfg: &PhysicalConfig, a: (f64, f64), b: (f64, f64), w: u32) -> MpComplex {
    let ratio_f = cfg.p_max / cfg.hbar;
    let u_max = [a.1 - b.0, a.0 - b.0, a.1 - b.1, a.0 - b.1]
        .iter()
        .map(|d| (d * ratio_f).abs())
        .fold(1.0, f64::max);
    let wa = ((a.1 - a.0) * ratio_f).abs().min(1.0);
    let wb = ((b.1 - b.0) * ratio_f).abs().min(1.0);
    let guard = (u_max * u_max / (wa * wb)).log2().ceil().max(0.0) as u32 + GUARD_BITS;
    let wp = w + guard;
    let ratio = Float::with_val(wp, cfg.p_max) / Float::with_val(wp, cfg.hbar);
    let g = |lhs: f64, rhs: f64| {
        let d = Float::with_val(wp, Float::with_val(wp, lhs) - Float::with_val(wp, rhs));
        sinc_second_antiderivative(&Float::with_val(wp, &d * &ratio), wp)
    };
    let mut sum = g(a.1, b.0);
    sum -= g(a.0, b.0);
    sum -= g(a.1, b.1);
    sum += g(a.0, b.1);
    let scale = Float::with_val(wp, pi(wp) * &ratio);
    let v = Float::with_val(wp, sum / scale);
    MpComplex::from_real(v).with_prec(w)
}

/// Rough bit count lost when summing `Σ c_k v_k` whose result has magnitude
/// `result` while the terms have combined magnitude `terms`.
pub fn cancellation_bits(terms: &Float, result: &Float) -> u32 {
    let lost = log2_abs(terms) - log2_abs(result);
    if lost.is_finite() && lost > 0.0 {
        lost.ceil() as u32
    } else {
        0
    }
}

/// `χ_k(p)` for constraint `k` (0-based) of `cs`.
pub fn kernel_momentum(
    cfg: &PhysicalConfig,
    cs: &ConstraintSet,
    k: usize,
    p: f64,
) -> Result<Complex64, ConstraintError> {
    Ok(cs.kernel(k)?.momentum(cfg, p))
}

/// `χ_k(x)` for constraint `k` (0-based) of `cs`.
pub fn kernel_position(
    cfg: &PhysicalConfig,
    cs: &ConstraintSet,
    k: usize,
    x: f64,
) -> Result<Complex64, ConstraintError> {
    Ok(cs.kernel(k)?.position(cfg, x))
}

/// `T_kr` at `prec` bits.
pub fn gram_entry_mp(
    cfg: &PhysicalConfig,
    cs: &ConstraintSet,
    k: usize,
    r: usize,
    prec: u32,
) -> Result<MpComplex, ConstraintError> {
    Ok(kernel_inner_mp(cfg, &cs.kernel(k)?, &cs.kernel(r)?, prec))
}

/// `T_kr` rounded to double precision.
pub fn gram_entry(cfg: &PhysicalConfig, cs: &ConstraintSet, k: usize, r: usize) -> Result<Complex64, ConstraintError> {
    Ok(gram_entry_mp(cfg, cs, k, r, 113)?.to_c64())
}
