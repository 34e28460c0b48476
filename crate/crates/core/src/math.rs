//! Thin wrappers over `libm` so every build of this crate, `std` or not,
//! evaluates transcendentals through the same code path. Keystream bytes are
//! bit-exact functions of the trajectory, so the math must not silently
//! switch between platform libm and soft-float implementations.

#![allow(dead_code)]

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn log2(x: f64) -> f64 {
    libm::log2(x)
}

#[inline]
pub fn log10(x: f64) -> f64 {
    libm::log10(x)
}

#[inline]
pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn acos(x: f64) -> f64 {
    libm::acos(x)
}

#[inline]
pub fn cbrt(x: f64) -> f64 {
    libm::cbrt(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn hypot3(a: f64, b: f64, c: f64) -> f64 {
    sqrt(a * a + b * b + c * c)
}

/// `base^exp` by binary exponentiation; `libm::pow` is avoided for integer
/// exponents so results stay products of exact squarings.
#[inline]
pub fn powi(base: f64, exp: i32) -> f64 {
    let mut n = exp.unsigned_abs();
    let mut b = base;
    let mut acc = 1.0;
    while n > 0 {
        if n & 1 == 1 {
            acc *= b;
        }
        b *= b;
        n >>= 1;
    }
    if exp < 0 {
        1.0 / acc
    } else {
        acc
    }
}

#[inline]
pub fn powf(base: f64, exp: f64) -> f64 {
    libm::pow(base, exp)
}

/// Fractional part of a non-negative value.
#[inline]
pub fn fract(x: f64) -> f64 {
    x - floor(x)
}
