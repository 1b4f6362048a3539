//! Exact rational scalars shared across the crate.
//!
//! [`Rational`] is an arbitrary-precision `p/q` kept in canonical form
//! (positive denominator, gcd 1) by every arithmetic operation.  The
//! helpers here cover the textual form used throughout the CLI
//! (`p/q`, with `/q` omitted for integers) and a conversion to `f64`
//! that stays accurate when numerator and denominator are individually
//! far outside the `f64` exponent range.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

/// Rational from an integer pair. Panics on a zero denominator.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Rational from an integer.
pub fn rat_int(n: i64) -> Rational {
    Rational::from(BigInt::from(n))
}

/// Canonical text form: `p/q`, with the `/q` omitted when q = 1.
pub fn format_rational(r: &Rational) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse the canonical `p/q` (or bare `p`) form.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = |reason: &str| Error::InvalidRational {
        input: s.to_string(),
        reason: reason.to_string(),
    };
    let mut parts = s.splitn(2, '/');
    let numer: BigInt = parts
        .next()
        .unwrap_or("")
        .trim()
        .parse()
        .map_err(|_| bad("numerator is not an integer"))?;
    let denom: BigInt = match parts.next() {
        Some(d) => d
            .trim()
            .parse()
            .map_err(|_| bad("denominator is not an integer"))?,
        None => BigInt::from(1),
    };
    if denom.is_zero() {
        return Err(bad("denominator is zero"));
    }
    Ok(Rational::new(numer, denom))
}

/// Nearest-`f64` conversion.
///
/// The quotient is first scaled by a power of two so that the integer
/// division carries ~64 significant bits, then converted and rescaled;
/// the result is within a couple of ulps regardless of how large the
/// numerator and denominator are individually.
pub fn rational_to_f64(r: &Rational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let num = r.numer().abs();
    let den = r.denom().clone();
    let shift = 64 - (num.bits() as i64 - den.bits() as i64);
    let q = if shift >= 0 {
        (num << shift as u64) / den
    } else {
        num / (den << (-shift) as u64)
    };
    // Scale in two halves: 2^scale alone can leave the f64 range even
    // when the final product does not.
    let scale = (-shift).clamp(-4000, 4000) as i32;
    let (h1, h2) = (scale / 2, scale - scale / 2);
    let v = q.to_f64().unwrap_or(f64::INFINITY) * 2f64.powi(h1) * 2f64.powi(h2);
    if r.is_negative() {
        -v
    } else {
        v
    }
}

/// Exact conversion from a finite `f64` (every finite double is a binary
/// rational).
pub fn rational_from_f64(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or_else(|| Error::InvalidParams(format!("{x} is not finite")))
}
