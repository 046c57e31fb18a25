//! Extended-precision real and complex scalars backed by MPFR.
//!
//! Gram matrices built from superoscillation constraints are ill-conditioned
//! (condition numbers of 1e20 and beyond are routine), so every quantity that
//! feeds the solve or a cancellation-prone evaluation is carried as an
//! [`MpComplex`] at an explicit binary precision.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use rug::float::Constant;
use rug::Float;

/// Decimal digits of the default working precision (IEEE quad precision).
pub const DEFAULT_DIGITS: u32 = 34;

const LOG2_10: f64 = std::f64::consts::LOG2_10;

/// Binary precision carrying at least `digits` significant decimal digits.
pub fn digits_to_bits(digits: u32) -> u32 {
    ((digits.max(1) as f64) * LOG2_10).ceil() as u32
}

/// Decimal digits represented by `bits` of binary precision (rounded down).
pub fn bits_to_digits(bits: u32) -> u32 {
    ((bits as f64) / LOG2_10).floor() as u32
}

pub fn real(prec: u32, v: f64) -> Float {
    Float::with_val(prec, v)
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

/// `log2 |v|` for a finite nonzero value, `-inf` for zero.
pub fn log2_abs(v: &Float) -> f64 {
    if v.is_zero() {
        return f64::NEG_INFINITY;
    }
    // to_f64_exp avoids overflow for magnitudes outside the f64 range
    let (m, e) = v.to_f64_exp();
    m.abs().log2() + e as f64
}

/// Complex number with MPFR real and imaginary parts of equal precision.
#[derive(Clone, PartialEq)]
pub struct MpComplex {
    pub re: Float,
    pub im: Float,
}

impl MpComplex {
    pub fn zero(prec: u32) -> Self {
        MpComplex {
            re: Float::new(prec),
            im: Float::new(prec),
        }
    }

    pub fn one(prec: u32) -> Self {
        MpComplex {
            re: Float::with_val(prec, 1),
            im: Float::new(prec),
        }
    }

    pub fn from_parts(re: Float, im: Float) -> Self {
        MpComplex { re, im }
    }

    pub fn from_real(re: Float) -> Self {
        let prec = re.prec();
        MpComplex {
            re,
            im: Float::new(prec),
        }
    }

    pub fn from_c64(prec: u32, c: Complex64) -> Self {
        MpComplex {
            re: Float::with_val(prec, c.re),
            im: Float::with_val(prec, c.im),
        }
    }

    /// `e^{i theta}`.
    pub fn cis(theta: &Float) -> Self {
        let (s, c) = theta.clone().sin_cos(Float::new(theta.prec()));
        MpComplex { re: c, im: s }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    /// Copy rounded (or exactly extended) to `prec` bits.
    pub fn with_prec(&self, prec: u32) -> Self {
        MpComplex {
            re: Float::with_val(prec, &self.re),
            im: Float::with_val(prec, &self.im),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        MpComplex {
            re: self.re.clone(),
            im: Float::with_val(self.im.prec(), -&self.im),
        }
    }

    /// Multiply by `i^k`.
    pub fn mul_i_pow(&self, k: i64) -> Self {
        match k.rem_euclid(4) {
            0 => self.clone(),
            1 => MpComplex {
                re: Float::with_val(self.im.prec(), -&self.im),
                im: self.re.clone(),
            },
            2 => -self,
            _ => MpComplex {
                re: self.im.clone(),
                im: Float::with_val(self.re.prec(), -&self.re),
            },
        }
    }

    pub fn scale(&self, f: &Float) -> Self {
        let p = self.prec();
        MpComplex {
            re: Float::with_val(p, &self.re * f),
            im: Float::with_val(p, &self.im * f),
        }
    }

    pub fn div_real(&self, f: &Float) -> Self {
        let p = self.prec();
        MpComplex {
            re: Float::with_val(p, &self.re / f),
            im: Float::with_val(p, &self.im / f),
        }
    }

    /// `|z|^2`.
    pub fn norm_sqr(&self) -> Float {
        let p = self.prec();
        let mut out = Float::with_val(p, self.re.square_ref());
        out += Float::with_val(p, self.im.square_ref());
        out
    }

    pub fn abs(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.re.hypot_ref(&self.im))
    }

    /// `1 / z`; infinite components for `z = 0`.
    pub fn recip(&self) -> Self {
        let d = self.norm_sqr();
        let p = self.prec();
        MpComplex {
            re: Float::with_val(p, &self.re / &d),
            im: Float::with_val(p, -Float::with_val(p, &self.im / &d)),
        }
    }

    /// `conj(self) * other`, the Hermitian inner-product term.
    pub fn conj_mul(&self, other: &MpComplex) -> Self {
        let p = self.prec().max(other.prec());
        let mut re = Float::with_val(p, &self.re * &other.re);
        re += Float::with_val(p, &self.im * &other.im);
        let mut im = Float::with_val(p, &self.re * &other.im);
        im -= Float::with_val(p, &self.im * &other.re);
        MpComplex { re, im }
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

impl fmt::Debug for MpComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}i)", self.re, self.im)
    }
}

impl<'a> Add<&'a MpComplex> for &'a MpComplex {
    type Output = MpComplex;
    fn add(self, rhs: &'a MpComplex) -> MpComplex {
        let p = self.prec().max(rhs.prec());
        MpComplex {
            re: Float::with_val(p, &self.re + &rhs.re),
            im: Float::with_val(p, &self.im + &rhs.im),
        }
    }
}

impl<'a> Sub<&'a MpComplex> for &'a MpComplex {
    type Output = MpComplex;
    fn sub(self, rhs: &'a MpComplex) -> MpComplex {
        let p = self.prec().max(rhs.prec());
        MpComplex {
            re: Float::with_val(p, &self.re - &rhs.re),
            im: Float::with_val(p, &self.im - &rhs.im),
        }
    }
}

impl<'a> Mul<&'a MpComplex> for &'a MpComplex {
    type Output = MpComplex;
    fn mul(self, rhs: &'a MpComplex) -> MpComplex {
        let p = self.prec().max(rhs.prec());
        let mut re = Float::with_val(p, &self.re * &rhs.re);
        re -= Float::with_val(p, &self.im * &rhs.im);
        let mut im = Float::with_val(p, &self.re * &rhs.im);
        im += Float::with_val(p, &self.im * &rhs.re);
        MpComplex { re, im }
    }
}

impl Neg for &MpComplex {
    type Output = MpComplex;
    fn neg(self) -> MpComplex {
        MpComplex {
            re: Float::with_val(self.re.prec(), -&self.re),
            im: Float::with_val(self.im.prec(), -&self.im),
        }
    }
}

impl AddAssign<&MpComplex> for MpComplex {
    fn add_assign(&mut self, rhs: &MpComplex) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl SubAssign<&MpComplex> for MpComplex {
    fn sub_assign(&mut self, rhs: &MpComplex) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

/// Euclidean norm of a complex vector, as f64.
pub fn vec_norm(v: &[MpComplex], prec: u32) -> Float {
    let mut acc = Float::new(prec);
    for z in v {
        acc += z.norm_sqr();
    }
    acc.sqrt()
}

/// `sum conj(a_k) b_k`.
pub fn vec_dot(a: &[MpComplex], b: &[MpComplex], prec: u32) -> MpComplex {
    let mut acc = MpComplex::zero(prec);
    for (x, y) in a.iter().zip(b) {
        acc += &x.conj_mul(y);
    }
    acc
}
