//! Real special functions: log-gamma, signed gamma, digamma, harmonic
//! numbers and an Euler–Maclaurin Riemann zeta.
//!
//! Everything here is a pure function of its arguments.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Euler–Mascheroni constant γ.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Lanczos coefficients, g = 7, nine terms.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// B_{2k} for k = 1..=7.
const BERNOULLI_EVEN: [f64; 7] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
];

/// sin(πx) with the argument reduced exactly before multiplying by π.
pub fn sin_pi(x: f64) -> f64 {
    let mut y = x % 2.0;
    if y > 1.0 {
        y -= 2.0;
    } else if y < -1.0 {
        y += 2.0;
    }
    // y in [-1, 1]; fold onto [-1/2, 1/2]
    if y > 0.5 {
        y = 1.0 - y;
    } else if y < -0.5 {
        y = -1.0 - y;
    }
    (PI * y).sin()
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

fn ln_gamma_lanczos(x: f64) -> f64 {
    // valid for x >= 0.5
    let z = x - 1.0;
    let mut a = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (z + 0.5) * t.ln() - t + a.ln()
}

fn ln_gamma_stirling(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut corr = 0.0;
    let mut p = inv;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate().take(6) {
        let k2 = 2.0 * (k as f64 + 1.0);
        corr += b / (k2 * (k2 - 1.0)) * p;
        p *= inv2;
    }
    (x - 0.5) * x.ln() - x + LN_SQRT_2PI + corr
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    Ok(ln_gamma_pos(x))
}

fn ln_gamma_pos(x: f64) -> f64 {
    if x < 0.5 {
        ln_gamma_lanczos(x + 1.0) - x.ln()
    } else if x < 15.0 {
        ln_gamma_lanczos(x)
    } else {
        ln_gamma_stirling(x)
    }
}

/// Γ(x) as `(sign, ln|Γ(x)|)`. Negative arguments go through the reflection
/// formula; non-positive integers are poles.
pub fn gamma_signed(x: f64) -> Result<(f64, f64)> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("gamma_signed: non-finite argument {x}")));
    }
    if is_nonpositive_integer(x) {
        return Err(Error::Pole {
            location: x,
            detail: format!("Γ has a pole at {}", x as i64),
        });
    }
    if x > 0.0 {
        return Ok((1.0, ln_gamma_pos(x)));
    }
    // Γ(x) = π / (sin(πx) Γ(1-x))
    let s = sin_pi(x);
    let ln_abs = PI.ln() - s.abs().ln() - ln_gamma_pos(1.0 - x);
    Ok((s.signum(), ln_abs))
}

/// Γ(x) as a plain value (may overflow to ±inf).
pub fn gamma(x: f64) -> Result<f64> {
    let (s, l) = gamma_signed(x)?;
    Ok(s * l.exp())
}

/// 1/Γ(x), zero at the poles of Γ.
pub fn rgamma(x: f64) -> f64 {
    match gamma_signed(x) {
        Ok((s, l)) => s * (-l).exp(),
        Err(_) => 0.0,
    }
}

/// ψ(x) = d/dx ln Γ(x) for x > 0.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("digamma requires x > 0, got {x}")));
    }
    let mut acc = 0.0;
    let mut y = x;
    while y < 12.0 {
        acc -= 1.0 / y;
        y += 1.0;
    }
    let inv2 = 1.0 / (y * y);
    let mut p = inv2;
    let mut series = 0.0;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        series += b / (2.0 * (k as f64 + 1.0)) * p;
        p *= inv2;
    }
    Ok(acc + y.ln() - 0.5 / y - series)
}

/// H_n = Σ_{k=1}^{n} 1/k, summed exactly (compensated) up to 10^6.
pub fn harmonic(n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    if n > 1_000_000 {
        return digamma(n as f64 + 1.0).expect("positive argument") + EULER_GAMMA;
    }
    let mut sum = 0.0;
    let mut comp = 0.0;
    for k in (1..=n).rev() {
        let y = 1.0 / k as f64 - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Relative residual |lhs − rhs|/|lhs| of the Gauss multiplication formula
/// Γ(hz+b) = h^{hz+b−1/2} (2π)^{(1−h)/2} Π_{l=0}^{h−1} Γ(z + (b+l)/h).
pub fn gauss_multiplication_check(h: u32, z: f64, b: f64) -> Result<f64> {
    if h == 0 {
        return Err(Error::Domain("multiplication formula needs h >= 1".into()));
    }
    let hf = h as f64;
    let (sl, ll) = gamma_signed(hf * z + b)?;
    let mut sr = 1.0;
    let mut lr = (hf * z + b - 0.5) * hf.ln() + 0.5 * (1.0 - hf) * (2.0 * PI).ln();
    for l in 0..h {
        let (s, g) = gamma_signed(z + (b + l as f64) / hf)?;
        sr *= s;
        lr += g;
    }
    if sl != sr {
        return Ok(2.0);
    }
    Ok((lr - ll).exp_m1().abs())
}

/// Which quantity `riemann_zeta` returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZetaOrder {
    Value,
    Derivative,
}

const EM_TERMS: usize = 20;

/// Riemann ζ(s) or ζ'(s) by Euler–Maclaurin summation with N = 20 explicit
/// terms and Bernoulli corrections through B_12.
///
/// Below s = −1 the explicit terms k^{−s} cancel badly against the
/// remainder, so the value is taken from the functional equation
/// ζ(s) = 2^s π^{s−1} sin(πs/2) Γ(1−s) ζ(1−s) instead.
pub fn riemann_zeta(s: f64, order: ZetaOrder) -> Result<f64> {
    if s == 1.0 {
        return Err(Error::Pole {
            location: 1.0,
            detail: "Riemann zeta pole".into(),
        });
    }
    if !s.is_finite() {
        return Err(Error::Domain(format!("riemann_zeta: non-finite s {s}")));
    }
    if s < -1.0 {
        return riemann_zeta_reflected(s, order);
    }
    riemann_zeta_em(s, order)
}

fn riemann_zeta_reflected(s: f64, order: ZetaOrder) -> Result<f64> {
    let a = (s * std::f64::consts::LN_2 + (s - 1.0) * PI.ln() + ln_gamma_pos(1.0 - s)).exp();
    let sin = sin_pi(0.5 * s);
    let z1 = riemann_zeta_em(1.0 - s, ZetaOrder::Value)?;
    match order {
        ZetaOrder::Value => Ok(a * sin * z1),
        ZetaOrder::Derivative => {
            let cos = sin_pi(0.5 * s + 0.5);
            let dz1 = riemann_zeta_em(1.0 - s, ZetaOrder::Derivative)?;
            let dl = std::f64::consts::LN_2 + PI.ln() - digamma(1.0 - s)?;
            Ok(a * (dl * sin * z1 + 0.5 * PI * cos * z1 - sin * dz1))
        }
    }
}

fn riemann_zeta_em(s: f64, order: ZetaOrder) -> Result<f64> {
    let n = EM_TERMS as f64;
    let ln_n = n.ln();
    let deriv = order == ZetaOrder::Derivative;

    let mut sum = 0.0;
    for k in 1..EM_TERMS {
        let kf = k as f64;
        let t = kf.powf(-s);
        sum += if deriv { -kf.ln() * t } else { t };
    }

    let n1s = n.powf(1.0 - s);
    let ns = n.powf(-s);
    if deriv {
        sum += n1s * (-ln_n / (s - 1.0) - 1.0 / ((s - 1.0) * (s - 1.0)));
        sum += -0.5 * ln_n * ns;
    } else {
        sum += n1s / (s - 1.0) + 0.5 * ns;
    }

    // Σ_j B_{2j}/(2j)! · (s)_{2j−1} · N^{−s−2j+1}
    let mut fact = 1.0;
    for j in 1..=6usize {
        let two_j = 2 * j;
        fact *= ((two_j - 1) * two_j) as f64;
        let b = BERNOULLI_EVEN[j - 1];
        let (poch, dpoch) = rising_with_derivative(s, two_j - 1);
        let pw = n.powf(-s - two_j as f64 + 1.0);
        sum += if deriv {
            b / fact * (dpoch - poch * ln_n) * pw
        } else {
            b / fact * poch * pw
        };
    }
    Ok(sum)
}

/// (s)_k = s(s+1)…(s+k−1) together with its s-derivative.
fn rising_with_derivative(s: f64, k: usize) -> (f64, f64) {
    let mut p = 1.0;
    let mut dp = 0.0;
    for i in 0..k {
        let f = s + i as f64;
        dp = dp * f + p;
        p *= f;
    }
    (p, dp)
}

/// Beta function B(a, b) for positive arguments.
pub fn beta(a: f64, b: f64) -> Result<f64> {
    Ok((ln_gamma(a)? + ln_gamma(b)? - ln_gamma(a + b)?).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn ln_gamma_examples() {
        assert!(ln_gamma(1.0).unwrap().abs() < 1e-15);
        assert!(rel(ln_gamma(5.0).unwrap(), 24f64.ln()) < 1e-14);
        assert!(rel(ln_gamma(0.5).unwrap(), 0.5 * PI.ln()) < 1e-14);
        assert!(matches!(ln_gamma(0.0), Err(Error::Domain(_))));
        assert!(matches!(ln_gamma(-1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn ln_gamma_large_and_small() {
        // Γ(1e-3) = 999.4237724845955 (Γ(1+x)/x)
        assert!(rel(ln_gamma(1e-3).unwrap(), 999.423_772_484_595_5_f64.ln()) < 1e-13);
        // Stirling against Lanczos at the switch point
        assert!(rel(ln_gamma_stirling(15.0), ln_gamma_lanczos(15.0)) < 1e-14);
        // ln Γ(1e6) = 1e6 ln 1e6 − 1e6 − ½ ln 1e6 + ½ ln 2π + 1/(12e6)
        let x: f64 = 1e6;
        let expect = x * x.ln() - x - 0.5 * x.ln() + LN_SQRT_2PI + 1.0 / (12.0 * x);
        assert!(rel(ln_gamma(x).unwrap(), expect) < 1e-14);
    }

    #[test]
    fn gamma_signed_examples() {
        let (s, l) = gamma_signed(-0.5).unwrap();
        assert_eq!(s, -1.0);
        assert!(rel(l, (2.0 * PI.sqrt()).ln()) < 1e-14);
        let (s, l) = gamma_signed(2.0).unwrap();
        assert_eq!(s, 1.0);
        assert!(l.abs() < 1e-15);
        let (s, l) = gamma_signed(-1.5).unwrap();
        assert_eq!(s, 1.0);
        assert!(rel(l, (4.0 * PI.sqrt() / 3.0).ln()) < 1e-14);
    }

    #[test]
    fn gamma_poles_carry_location() {
        for k in 0..5 {
            match gamma_signed(-(k as f64)) {
                Err(Error::Pole { location, .. }) => assert_eq!(location, -(k as f64)),
                other => panic!("expected pole, got {other:?}"),
            }
        }
        assert_eq!(rgamma(-3.0), 0.0);
    }

    #[test]
    fn digamma_and_harmonic() {
        assert!((digamma(1.0).unwrap() + EULER_GAMMA).abs() < 1e-14);
        assert!((harmonic(3) - 11.0 / 6.0).abs() < 1e-15);
        assert_eq!(harmonic(0), 0.0);
        assert!(digamma(0.0).is_err());
        for n in [1u64, 2, 7, 100, 1000, 9_999, 10_000] {
            let r = digamma(n as f64 + 1.0).unwrap() - harmonic(n) + EULER_GAMMA;
            assert!(r.abs() < 1e-12, "n={n} residual {r}");
        }
    }

    #[test]
    fn digamma_harmonic_dense_range() {
        let mut worst: f64 = 0.0;
        for n in 0..=10_000u64 {
            let r = digamma(n as f64 + 1.0).unwrap() - harmonic(n) + EULER_GAMMA;
            worst = worst.max(r.abs());
        }
        assert!(worst < 1e-12, "worst {worst}");
    }

    #[test]
    fn multiplication_formula_examples() {
        assert!(gauss_multiplication_check(1, 2.0, 0.3).unwrap() < 1e-15);
        assert!(gauss_multiplication_check(2, 1.5, 1.0).unwrap() <= 1e-11);
        assert!(gauss_multiplication_check(3, 0.7, 0.5).unwrap() <= 1e-11);
    }

    #[test]
    fn multiplication_formula_with_paper_exponent_fails() {
        // the printed constant (2π)^{(1−n)/2} only agrees when n = h
        let h = 3.0_f64;
        let (z, b) = (0.7, 0.5);
        let lhs = ln_gamma(h * z + b).unwrap();
        let mut rhs = (h * z + b - 0.5) * h.ln() + 0.5 * (1.0 - 1.0) * (2.0 * PI).ln();
        for l in 0..3 {
            rhs += ln_gamma(z + (b + l as f64) / h).unwrap();
        }
        assert!((lhs - rhs).abs() > 1.0);
    }

    #[test]
    fn riemann_zeta_examples() {
        let z2 = riemann_zeta(2.0, ZetaOrder::Value).unwrap();
        assert!((z2 - PI * PI / 6.0).abs() < 1e-12);
        let z4 = riemann_zeta(4.0, ZetaOrder::Value).unwrap();
        assert!((z4 - PI.powi(4) / 90.0).abs() < 1e-12);
        assert!((riemann_zeta(0.0, ZetaOrder::Value).unwrap() + 0.5).abs() < 1e-13);
        assert!((riemann_zeta(-1.0, ZetaOrder::Value).unwrap() + 1.0 / 12.0).abs() < 1e-13);
        assert!((riemann_zeta(-5.0, ZetaOrder::Value).unwrap() + 1.0 / 252.0).abs() < 1e-15);
        assert!((riemann_zeta(-3.0, ZetaOrder::Value).unwrap() - 1.0 / 120.0).abs() < 1e-15);
        let d0 = riemann_zeta(0.0, ZetaOrder::Derivative).unwrap();
        assert!((d0 + 0.5 * (2.0 * PI).ln()).abs() < 1e-11);
        assert!(matches!(riemann_zeta(1.0, ZetaOrder::Value), Err(Error::Pole { .. })));
    }

    #[test]
    fn riemann_zeta_against_direct_sum() {
        // direct sum with integral tail for s > 1
        for &s in &[1.5, 2.5, 3.0, 6.0, 10.0] {
            let n = 200_000usize;
            let mut sum = 0.0;
            for k in (1..=n).rev() {
                sum += (k as f64).powf(-s);
            }
            let nf = n as f64;
            sum += nf.powf(1.0 - s) / (s - 1.0) - 0.5 * nf.powf(-s) + s / 12.0 * nf.powf(-s - 1.0);
            let z = riemann_zeta(s, ZetaOrder::Value).unwrap();
            assert!((z - sum).abs() < 1e-10, "s={s}: {z} vs {sum}");
            // derivative by central differences of the oracle itself
            let h = 1e-5;
            let fd = (riemann_zeta(s + h, ZetaOrder::Value).unwrap()
                - riemann_zeta(s - h, ZetaOrder::Value).unwrap())
                / (2.0 * h);
            let d = riemann_zeta(s, ZetaOrder::Derivative).unwrap();
            assert!((d - fd).abs() < 1e-8, "s={s}: {d} vs {fd}");
        }
    }

    #[test]
    fn riemann_zeta_functional_equation() {
        // ζ(1−s) = 2 (2π)^{−s} cos(πs/2) Γ(s) ζ(s)
        for &s in &[2.5, 3.5, 4.25, 5.5, 6.0] {
            let lhs = riemann_zeta(1.0 - s, ZetaOrder::Value).unwrap();
            let rhs = 2.0 * (2.0 * PI).powf(-s) * (PI * s / 2.0).cos()
                * gamma(s).unwrap()
                * riemann_zeta(s, ZetaOrder::Value).unwrap();
            assert!((lhs - rhs).abs() < 1e-10, "s={s}");
        }
    }

    #[test]
    fn beta_integral() {
        assert!((beta(2.0, 2.0).unwrap() - 1.0 / 6.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn reflection_consistency(x in -10.0f64..10.0) {
            prop_assume!((x - x.round()).abs() > 1e-6);
            let (s1, l1) = gamma_signed(x).unwrap();
            let (s2, l2) = gamma_signed(1.0 - x).unwrap();
            let prod = s1 * s2 * (l1 + l2).exp();
            let expect = PI / sin_pi(x);
            prop_assert!(rel(prod, expect) < 1e-11);
        }

        #[test]
        fn recurrence(x in 1e-3f64..50.0) {
            let g1 = ln_gamma(x + 1.0).unwrap();
            let g0 = ln_gamma(x).unwrap();
            prop_assert!((g1 - g0 - x.ln()).exp_m1().abs() < 1e-12);
        }

        #[test]
        fn multiplication_grid(h in 1u32..=5, z in 0.05f64..10.0, b in 0.0f64..2.0) {
            prop_assert!(gauss_multiplication_check(h, z, b).unwrap() <= 1e-11);
        }
    }
}
