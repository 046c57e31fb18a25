//! Special functions at arbitrary precision.
//!
//! Everything reduces to the moment integrals
//! `I_n(z) = ∫_{-1}^{1} t^n e^{izt} dt`, the sine integral `Si(z)` and the
//! second antiderivative of `sinc`, `G(z) = z Si(z) + cos z`.
//!
//! The power series used for small arguments are entire but alternate in sign,
//! so they are summed with `~log2(e)·|z|` guard bits; large arguments switch
//! to the upward recurrence for `I_n`, which is stable once `|z| > n`.

use rug::Float;

use crate::mp::{log2_abs, MpComplex};

const GUARD_BITS: u32 = 32;

fn series_guard(zabs: f64) -> u32 {
    (zabs * std::f64::consts::LOG2_E).ceil() as u32 + GUARD_BITS
}

/// `I_n(z)` for `n = 0..=max_order`, rounded to `prec` bits.
///
/// `I_n` is real for even `n` and purely imaginary for odd `n`.
pub fn moment_integrals(z: &Float, max_order: usize, prec: u32) -> Vec<MpComplex> {
    let zabs = z.to_f64().abs();
    if z.is_zero() {
        return (0..=max_order)
            .map(|n| {
                if n % 2 == 0 {
                    MpComplex::from_real(Float::with_val(prec, 2) / (n as u32 + 1))
                } else {
                    MpComplex::zero(prec)
                }
            })
            .collect();
    }
    let raw = if zabs > max_order as f64 + 2.0 {
        moments_recurrence(z, max_order, prec + GUARD_BITS + 8)
    } else {
        moments_series(z, max_order, prec + series_guard(zabs))
    };
    raw.into_iter().map(|v| v.with_prec(prec)).collect()
}

fn moments_series(z: &Float, max_order: usize, wprec: u32) -> Vec<MpComplex> {
    let zw = Float::with_val(wprec, z);
    let zabs = zw.to_f64().abs();
    let mut out: Vec<MpComplex> = (0..=max_order).map(|_| MpComplex::zero(wprec)).collect();
    // stop once past the peak term and below the leading-term resolution
    let floor = -(wprec as f64) + zabs.min(1.0).log2() - 2.0;
    let mut t = Float::with_val(wprec, 1);
    let mut j: usize = 0;
    loop {
        let twice = Float::with_val(wprec, &t * 2u32);
        let mut n = j % 2;
        while n <= max_order {
            let term = Float::with_val(wprec, &twice / (n + j + 1) as u32);
            let slot = &mut out[n];
            match j % 4 {
                0 => slot.re += &term,
                1 => slot.im += &term,
                2 => slot.re -= &term,
                _ => slot.im -= &term,
            }
            n += 2;
        }
        j += 1;
        t *= &zw;
        t /= j as u32;
        if (j as f64) > zabs && log2_abs(&t) < floor {
            break;
        }
    }
    out
}

fn moments_recurrence(z: &Float, max_order: usize, wprec: u32) -> Vec<MpComplex> {
    let zw = Float::with_val(wprec, z);
    let (s, c) = zw.clone().sin_cos(Float::new(wprec));
    let even_term = Float::with_val(wprec, &s * 2u32) / &zw;
    let odd_term = -(Float::with_val(wprec, &c * 2u32) / &zw);
    let mut out = Vec::with_capacity(max_order + 1);
    out.push(MpComplex::from_real(even_term.clone()));
    for m in 1..=max_order {
        let prev: &MpComplex = &out[m - 1];
        let factor = Float::with_val(wprec, m as u32) / &zw;
        // (i m / z) * prev
        let mut re = -Float::with_val(wprec, &prev.im * &factor);
        let mut im = Float::with_val(wprec, &prev.re * &factor);
        if m % 2 == 0 {
            re += &even_term;
        } else {
            im += &odd_term;
        }
        out.push(MpComplex::from_parts(re, im));
    }
    out
}

/// `sinc(z) = sin z / z` with `sinc(0) = 1`.
pub fn sinc(z: &Float, prec: u32) -> Float {
    if z.is_zero() {
        return Float::with_val(prec, 1);
    }
    let w = prec + GUARD_BITS;
    let zw = Float::with_val(w, z);
    let s = Float::with_val(w, zw.sin_ref());
    Float::with_val(prec, s / zw)
}

/// Sine integral `Si(z) = ∫_0^z sin t / t dt`.
pub fn sine_integral(z: &Float, prec: u32) -> Float {
    if z.is_zero() {
        return Float::new(prec);
    }
    let zabs = z.to_f64().abs();
    let wprec = prec + series_guard(zabs);
    let zw = Float::with_val(wprec, z);
    let z2 = Float::with_val(wprec, zw.square_ref());
    let floor = -(wprec as f64) + zabs.min(1.0).log2() - 2.0;
    let mut acc = Float::new(wprec);
    // t = z^{2n+1} / (2n+1)!
    let mut t = zw.clone();
    let mut n: u32 = 0;
    loop {
        let term = Float::with_val(wprec, &t / (2 * n + 1));
        if n.is_multiple_of(2) {
            acc += &term;
        } else {
            acc -= &term;
        }
        t *= &z2;
        t /= (2 * n + 2) * (2 * n + 3);
        n += 1;
        if (2 * n) as f64 > zabs && log2_abs(&t) < floor {
            break;
        }
    }
    Float::with_val(prec, acc)
}

/// `G(z) = z Si(z) + cos z`, so that `G'' = sinc` and `G(0) = 1`.
pub fn sinc_second_antiderivative(z: &Float, prec: u32) -> Float {
    let w = prec + GUARD_BITS;
    let zw = Float::with_val(w, z);
    let si = sine_integral(&zw, w);
    let mut g = Float::with_val(w, &zw * &si);
    g += Float::with_val(w, zw.cos_ref());
    Float::with_val(prec, g)
}

/// `sinc` in double precision.
pub fn sinc_f64(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        let z2 = z * z;
        1.0 - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad_moment(n: usize, z: f64) -> (f64, f64) {
        // composite Simpson with many panels; integrand is smooth on [-1, 1]
        let m = 20000;
        let h = 2.0 / m as f64;
        let mut re = 0.0;
        let mut im = 0.0;
        for i in 0..=m {
            let t = -1.0 + i as f64 * h;
            let w = if i == 0 || i == m {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let tn = t.powi(n as i32);
            re += w * tn * (z * t).cos();
            im += w * tn * (z * t).sin();
        }
        (re * h / 3.0, im * h / 3.0)
    }

    #[test]
    fn moments_match_direct_quadrature() {
        for &z in &[0.0, 1e-7, 0.3, -1.7, 4.0, 9.5, -25.0, 60.0] {
            let zf = Float::with_val(128, z);
            let got = moment_integrals(&zf, 8, 128);
            for (n, v) in got.iter().enumerate() {
                let (re, im) = quad_moment(n, z);
                let v = v.to_c64();
                assert!((v.re - re).abs() < 1e-11, "re I_{n}({z}) = {} vs {re}", v.re);
                assert!((v.im - im).abs() < 1e-11, "im I_{n}({z}) = {} vs {im}", v.im);
            }
        }
    }

    #[test]
    fn series_and_recurrence_agree_at_switchover() {
        // max_order 6 switches branches at |z| = 8
        for &z in &[7.9, 8.1, 8.0001] {
            let zf = Float::with_val(256, z);
            let s = moments_series(&zf, 6, 256 + series_guard(z));
            let r = moments_recurrence(&zf, 6, 256 + 40);
            for (a, b) in s.iter().zip(&r) {
                let d = (a - b).abs();
                assert!(log2_abs(&d) < -240.0, "mismatch {d}");
            }
        }
    }

    #[test]
    fn sinc_zero_and_pi() {
        assert_eq!(sinc(&Float::new(64), 64), 1);
        let p = crate::mp::pi(200);
        assert!(log2_abs(&sinc(&p, 200)) < -190.0);
        assert_eq!(sinc_f64(0.0), 1.0);
    }

    #[test]
    fn sine_integral_reference_values() {
        // Si(1) and Si(10), Abramowitz & Stegun table 5.1
        let si1 = sine_integral(&Float::with_val(128, 1), 128).to_f64();
        assert!((si1 - 0.946_083_070_367_183).abs() < 1e-15);
        let si10 = sine_integral(&Float::with_val(128, 10), 128).to_f64();
        assert!((si10 - 1.658_347_594_218_874).abs() < 1e-15);
        let neg = sine_integral(&Float::with_val(128, -10), 128).to_f64();
        assert_eq!(neg, -si10);
    }

    #[test]
    fn second_antiderivative_of_sinc() {
        let prec = 160;
        // finite-difference second derivative at a few points
        for &z in &[0.0, 0.7, -3.0, 12.0] {
            let h = Float::with_val(prec, Float::i_exp(1, -30));
            let zc = Float::with_val(prec, z);
            let g = |x: Float| sinc_second_antiderivative(&x, prec);
            let gp = g(Float::with_val(prec, &zc + &h));
            let gm = g(Float::with_val(prec, &zc - &h));
            let g0 = g(zc.clone());
            let second = (gp + gm - Float::with_val(prec, &g0 * 2u32)) / Float::with_val(prec, h.square_ref());
            let expect = sinc(&zc, prec);
            assert!((second.to_f64() - expect.to_f64()).abs() < 1e-12, "z={z}");
        }
        assert_eq!(sinc_second_antiderivative(&Float::new(64), 64), 1);
    }
}
