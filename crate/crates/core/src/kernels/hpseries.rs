//! Power series with rational term ratios, summed in big-integer fixed point.
//!
//! The kernels' hypergeometric series alternate with terms of size up to
//! e^{|z|} while the sum is of order e^{−|z|}, so double precision loses
//! everything near |z| = 30. Summing in fixed point with enough guard bits
//! avoids the cancellation; the working precision is raised until the bits
//! lost to cancellation are covered.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// slope·j + offset, evaluated at the term index j.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinearFactor {
    pub slope: i64,
    pub offset: i64,
}

impl LinearFactor {
    pub const fn new(slope: i64, offset: i64) -> Self {
        Self { slope, offset }
    }

    pub const fn constant(c: i64) -> Self {
        Self { slope: 0, offset: c }
    }

    fn at(&self, j: u64) -> i128 {
        self.slope as i128 * j as i128 + self.offset as i128
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub value: f64,
    pub terms: usize,
    /// Bits of cancellation between the largest term and the sum.
    pub bits_lost: u64,
}

const MAX_TERMS: u64 = 200_000;
const GUARD_BITS: u64 = 96;

/// Σ_{j≥0} t_j with t_0 = 1 and t_{j+1} = t_j · z · Π num(j) / Π den(j).
///
/// Stops when |t_j| ≤ 1e-16·|S| for three consecutive decreasing terms, or
/// when a numerator factor vanishes (terminating series).
pub fn sum_ratio_series(num: &[LinearFactor], den: &[LinearFactor], z: f64) -> Result<SeriesSum> {
    if !z.is_finite() {
        return Err(Error::Domain(format!("series argument {z} is not finite")));
    }
    if z == 0.0 {
        return Ok(SeriesSum {
            value: 1.0,
            terms: 1,
            bits_lost: 0,
        });
    }
    let mut precision = GUARD_BITS + 64 + (3.0 * z.abs()).ceil() as u64;
    for _ in 0..6 {
        let (value, terms, lost) = sum_fixed(num, den, z, precision)?;
        if lost + GUARD_BITS <= precision {
            return Ok(SeriesSum {
                value,
                terms,
                bits_lost: lost,
            });
        }
        precision = lost + GUARD_BITS + 64;
    }
    Err(Error::Precision(format!(
        "series at z = {z} needs more than {precision} bits"
    )))
}

fn sum_fixed(num: &[LinearFactor], den: &[LinearFactor], z: f64, precision: u64) -> Result<(f64, usize, u64)> {
    let (mant, exp) = decompose(z);
    let mant = BigInt::from(mant);
    let mut t = BigInt::from(1) << precision;
    let mut sum = t.clone();
    let mut max_bits = t.bits();
    let mut prev_bits = t.bits();
    let mut small_run = 0;
    let mut terms = 1usize;
    for j in 0..MAX_TERMS {
        let mut n = BigInt::from(1);
        for f in num {
            n *= f.at(j);
        }
        if n.is_zero() {
            break;
        }
        let mut d = BigInt::from(1);
        for f in den {
            let v = f.at(j);
            if v == 0 {
                return Err(Error::Parameter(format!(
                    "denominator factor {}·j + {} vanishes at j = {j}",
                    f.slope, f.offset
                )));
            }
            d *= v;
        }
        t = t * &mant * n;
        if exp >= 0 {
            t <<= exp as usize;
        } else {
            d <<= (-exp) as usize;
        }
        t /= d;
        sum += &t;
        terms += 1;
        let tb = t.bits();
        max_bits = max_bits.max(tb);
        if t.is_zero() {
            break;
        }
        if tb < prev_bits && tb + 54 <= sum.bits() {
            small_run += 1;
            if small_run >= 3 {
                break;
            }
        } else {
            small_run = 0;
        }
        prev_bits = tb;
        if j + 1 == MAX_TERMS {
            return Err(Error::Precision(format!(
                "series did not converge in {MAX_TERMS} terms at z = {z}"
            )));
        }
    }
    let lost = max_bits.saturating_sub(sum.bits());
    Ok((fixed_to_f64(&sum, precision), terms, lost))
}

/// z = mant · 2^exp with an integer mantissa.
fn decompose(z: f64) -> (i64, i64) {
    let bits = z.to_bits();
    let sign = if bits >> 63 == 0 { 1 } else { -1 };
    let e = ((bits >> 52) & 0x7ff) as i64;
    let frac = (bits & ((1u64 << 52) - 1)) as i64;
    let (m, e) = if e == 0 {
        (frac, -1074)
    } else {
        (frac | (1i64 << 52), e - 1075)
    };
    // strip trailing zeros so small exponents stay small
    let tz = m.trailing_zeros().min(52) as i64;
    (sign * (m >> tz), e + tz)
}

fn fixed_to_f64(x: &BigInt, precision: u64) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let bits = x.bits();
    let shift = bits.saturating_sub(64);
    let top = (x.abs() >> shift as usize).to_f64().unwrap_or(f64::INFINITY);
    let v = ldexp(top, shift as i64 - precision as i64);
    if x.is_negative() {
        -v
    } else {
        v
    }
}

pub(crate) fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_series() {
        // e^z: t_{j+1} = t_j z / (j+1)
        for &z in &[1.0, -1.0, 0.3, -30.0, 30.0, -45.5] {
            let s = sum_ratio_series(&[], &[LinearFactor::new(1, 1)], z).unwrap();
            let want = f64::exp(z);
            assert!((s.value - want).abs() <= 4e-16 * want, "z={z}: {} vs {want}", s.value);
        }
    }

    #[test]
    fn cancellation_is_reported() {
        let s = sum_ratio_series(&[], &[LinearFactor::new(1, 1)], -30.0).unwrap();
        assert!(s.bits_lost > 80);
    }

    #[test]
    fn terminating_series() {
        // (1 + z)^2 = Σ (−2)_j (−z)^j / j!
        let s = sum_ratio_series(&[LinearFactor::new(1, -2)], &[LinearFactor::new(1, 1)], -0.5).unwrap();
        assert!((s.value - 2.25).abs() < 1e-15);
        assert_eq!(s.terms, 3);
    }

    #[test]
    fn vanishing_denominator() {
        let r = sum_ratio_series(&[], &[LinearFactor::new(1, -2)], 0.5);
        assert!(matches!(r, Err(Error::Parameter(_))));
    }

    #[test]
    fn decompose_roundtrip() {
        for &z in &[1.0, -3.75, 1e-300, 5e-324, 123456.789, -0.1] {
            let (m, e) = decompose(z);
            assert_eq!(ldexp(m as f64, e), z);
        }
    }
}
