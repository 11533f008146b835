//! The additive character `e(t) = exp(2 pi i t)` and exactly reduced phases.
//!
//! Quadratic phases such as `k^2 x / 2` lose all fractional digits once `k^2 x`
//! is large. [`frac_mul`] reduces `n * x` modulo 1 from the binary expansion of
//! `x`, so the only rounding left is the final conversion to `f64`.

use num_complex::Complex64;
use std::f64::consts::TAU;

/// Fractional part in `[0, 1)`.
#[inline]
pub fn frac(t: f64) -> f64 {
    let r = t - t.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// `e(t) = exp(2 pi i t)`, with `t` reduced mod 1 before the trigonometric call.
#[inline]
pub fn e(t: f64) -> Complex64 {
    let (s, c) = (TAU * frac(t)).sin_cos();
    Complex64::new(c, s)
}

fn decode(x: f64) -> (u64, i32, bool) {
    let bits = x.to_bits();
    let negative = bits >> 63 != 0;
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let mant = bits & ((1u64 << 52) - 1);
    if exp == 0 {
        (mant, -1074, negative)
    } else {
        (mant | (1u64 << 52), exp - 1075, negative)
    }
}

fn scale_pow2(v: f64, k: i32) -> f64 {
    // v * 2^k without overflowing the intermediate power
    let mut v = v;
    let mut k = k;
    while k < -1000 {
        v *= 2f64.powi(-1000);
        k += 1000;
    }
    v * 2f64.powi(k)
}

/// Fractional part of `n * x`, exact up to one final rounding.
pub fn frac_mul(n: i64, x: f64) -> f64 {
    if n == 0 || x == 0.0 || !x.is_finite() {
        return 0.0;
    }
    let (m, ex, neg_x) = decode(x);
    if ex >= 0 {
        return 0.0;
    }
    let negative = neg_x ^ (n < 0);
    let prod = (n.unsigned_abs() as u128) * (m as u128);
    let sh = (-ex) as u32;
    let r = if sh >= 127 {
        scale_pow2(prod as f64, ex)
    } else {
        let mask = (1u128 << sh) - 1;
        scale_pow2((prod & mask) as f64, ex)
    };
    let r = if r >= 1.0 { 0.0 } else { r };
    if negative && r > 0.0 {
        let s = 1.0 - r;
        if s >= 1.0 {
            0.0
        } else {
            s
        }
    } else {
        r
    }
}

/// `(n^2 / 2) * x mod 1`, exact up to one rounding.
#[inline]
pub fn half_square_phase(n: i64, x: f64) -> f64 {
    frac_mul(n * n, 0.5 * x)
}
