use num_rational::Ratio;

use super::hpseries::{sum_ratio_series, LinearFactor};
use super::KernelIndex;
use crate::error::{Error, Result};
use crate::specfun::{gamma_signed, ln_gamma};

/// Largest |λτ^h| accepted by the series path.
pub const Z_MAX: f64 = 30.0;

/// 𝓀_{n,m}(τ, λ) = prefactor · τ^{leading_power} · ₕFₕ(a; b; z), z = −λτ^h.
#[derive(Debug, Clone, PartialEq)]
pub struct HypKernelParams {
    pub prefactor: f64,
    pub leading_power: u32,
    pub a_list: Vec<Ratio<i64>>,
    pub b_list: Vec<Ratio<i64>>,
    pub z: f64,
}

/// Parameters from the Taylor series of e^{−λτ^h}, regrouped with the Gauss
/// multiplication formula. The first surviving term has index
/// k0 = max(0, ⌈(m+1)/h⌉); successive terms have ratio
/// z·Π_{l=1}^{h}(hk+n+l) / (Π_{l=0}^{h−1}(hk−m+l)·(k+1)).
pub fn hyp_params(idx: KernelIndex, lambda: f64, tau: f64) -> Result<HypKernelParams> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("eigenvalue {lambda} must be positive")));
    }
    if !(tau >= 0.0) {
        return Err(Error::Domain(format!("τ = {tau} must be non-negative")));
    }
    let h = idx.h as i64;
    let n = idx.n as i64;
    let m = idx.m as i64;
    let k0 = idx.first_series_index() as i64;
    let a_list: Vec<Ratio<i64>> = (1..=h).map(|l| Ratio::new(h * k0 + n + l, h)).collect();
    let mut b_list: Vec<Ratio<i64>> = (0..h).map(|l| Ratio::new(h * k0 - m + l, h)).collect();
    b_list.push(Ratio::from_integer(k0 + 1));
    // one lower parameter equals 1 and supplies the j! of the ₕFₕ normalization
    let unit = b_list
        .iter()
        .position(|b| *b == Ratio::from_integer(1))
        .expect("a lower parameter equals 1");
    b_list.remove(unit);
    b_list.sort();

    let (s1, l1) = gamma_signed((n + h * k0 + 1) as f64)?;
    let (s2, l2) = gamma_signed((h * k0 - m) as f64)?;
    let lk = ln_gamma((k0 + 1) as f64)?;
    let sign = -s1 * s2 * if k0 % 2 == 0 { 1.0 } else { -1.0 };
    let prefactor = sign * (l1 - l2 - lk + k0 as f64 * lambda.ln()).exp();
    Ok(HypKernelParams {
        prefactor,
        leading_power: idx.leading_power(),
        a_list,
        b_list,
        z: -lambda * tau.powi(idx.h as i32),
    })
}

/// ₚFₚ(a; b; z) = Σ Π(a)_j / Π(b)_j · z^j / j! for rational parameters.
pub fn hyp_pfq(a: &[Ratio<i64>], b: &[Ratio<i64>], z: f64) -> Result<f64> {
    let mut num = Vec::with_capacity(a.len() + b.len());
    let mut den = Vec::with_capacity(a.len() + b.len() + 1);
    for r in a {
        num.push(LinearFactor::new(*r.denom(), *r.numer()));
        den.push(LinearFactor::constant(*r.denom()));
    }
    for r in b {
        if r.is_integer() && *r.numer() <= 0 {
            return Err(Error::Parameter(format!("lower parameter {r} is a non-positive integer")));
        }
        den.push(LinearFactor::new(*r.denom(), *r.numer()));
        num.push(LinearFactor::constant(*r.denom()));
    }
    den.push(LinearFactor::new(1, 1));
    Ok(sum_ratio_series(&num, &den, z)?.value)
}

/// 𝓀_{n,m}(τ, λ) through the hypergeometric representation.
pub fn mode_kernel_hyp(idx: KernelIndex, lambda: f64, tau: f64) -> Result<f64> {
    let p = hyp_params(idx, lambda, tau)?;
    if p.z.abs() > Z_MAX {
        return Err(Error::Window {
            z: p.z.abs(),
            limit: Z_MAX,
        });
    }
    if tau == 0.0 {
        return Ok(if p.leading_power == 0 { p.prefactor } else { 0.0 });
    }
    let f = hyp_pfq(&p.a_list, &p.b_list, p.z)?;
    Ok(p.prefactor * tau.powi(p.leading_power as i32) * f)
}

/// 𝓀_{n,m}(τ, λ) for real order h > 0 by its termwise series
/// −Σ_k (−λ)^k Γ(n+hk+1) / (k! Γ(hk−m)) τ^{hk−m−1}, summed in double
/// precision. Only reliable for moderate λτ^h.
pub fn kernel_series_real_order(n: u32, h: f64, m: i32, lambda: f64, tau: f64) -> Result<f64> {
    if !(h > 0.0) || !(lambda > 0.0) || !(tau > 0.0) {
        return Err(Error::Domain("series kernel needs h, λ, τ > 0".into()));
    }
    let z = lambda * tau.powf(h);
    if z > Z_MAX {
        return Err(Error::Window { z, limit: Z_MAX });
    }
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut small = 0;
    for k in 0..10_000u32 {
        let kf = k as f64;
        let b = h * kf - m as f64;
        let t = match gamma_signed(b) {
            Err(_) => 0.0,
            Ok((sb, lb)) => {
                let la = ln_gamma(n as f64 + h * kf + 1.0)?;
                let lk = ln_gamma(kf + 1.0)?;
                let sign = -sb * if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * (la - lb - lk + kf * lambda.ln() + (b - 1.0) * tau.ln()).exp()
            }
        };
        let y = t - comp;
        let s = sum + y;
        comp = (s - sum) - y;
        sum = s;
        if kf > z && t.abs() <= 1e-17 * sum.abs() {
            small += 1;
            if small >= 3 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::Precision("real-order kernel series did not converge".into()))
}

#[cfg(test)]
mod tests {
    use super::super::mode_kernel_polyexp;
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn r(p: i64, q: i64) -> Ratio<i64> {
        Ratio::new(p, q)
    }

    #[test]
    fn parameters_for_n1_h2_m0() {
        let p = hyp_params(KernelIndex::new(1, 2, 0).unwrap(), 1.5, 0.5).unwrap();
        assert_eq!(p.a_list, vec![r(2, 1), r(5, 2)]);
        assert_eq!(p.b_list, vec![r(3, 2), r(2, 1)]);
        assert_eq!(p.leading_power, 1);
        assert!((p.prefactor - 6.0 * 1.5).abs() < 1e-13);
        // second series term: 6λτ · (−5/3)λτ²
        let f1: f64 = (2.0 * 2.5) / (1.5 * 2.0);
        assert!((f1 - 5.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn negative_depth_leading_coefficient() {
        for (n, h, mu) in [(1u32, 2u32, 1i32), (2, 2, 2), (3, 1, 2), (3, 3, 1)] {
            let idx = KernelIndex::new(n, h, -mu).unwrap();
            let p = hyp_params(idx, 2.0, 0.1).unwrap();
            let want = -crate::specfun::gamma(n as f64 + 1.0).unwrap()
                / crate::specfun::gamma(mu as f64).unwrap();
            assert!((p.prefactor - want).abs() < 1e-12 * want.abs());
            assert_eq!(p.leading_power, (mu - 1) as u32);
        }
    }

    #[test]
    fn zero_at_origin() {
        let v = mode_kernel_hyp(KernelIndex::new(1, 2, 0).unwrap(), 1.0, 0.0).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn window_enforced() {
        let r = mode_kernel_hyp(KernelIndex::new(1, 2, 0).unwrap(), 1.0, 6.0);
        assert!(matches!(r, Err(Error::Window { .. })));
    }

    #[test]
    fn confluent_special_case() {
        // ₁F₁(1; 2; z) = (e^z − 1)/z
        for &z in &[-25.0, -1.0, 0.5, 10.0] {
            let v = hyp_pfq(&[r(1, 1)], &[r(2, 1)], z).unwrap();
            let want = f64::exp_m1(z) / z;
            assert!((v - want).abs() <= 1e-15 * want.abs());
        }
        assert!(matches!(
            hyp_pfq(&[r(1, 1)], &[r(-2, 1)], 0.5),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn agrees_with_polyexp_at_window_edge() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(0..=3u32);
            let h = rng.gen_range(1..=3u32);
            let m = rng.gen_range(-(n as i32)..=4);
            let lambda = rng.gen_range(0.5..10.0);
            let z = rng.gen_range(25.0..30.0f64);
            let tau = (z / lambda).powf(1.0 / h as f64);
            let idx = KernelIndex::new(n, h, m).unwrap();
            let pe = mode_kernel_polyexp(idx, lambda).unwrap().value(tau);
            let hy = mode_kernel_hyp(idx, lambda, tau).unwrap();
            let rel = (hy - pe).abs() / pe.abs().max(1e-300);
            assert!(rel <= 1e-9, "n={n} h={h} m={m} λ={lambda} τ={tau}: {hy} vs {pe}");
        }
    }

    #[test]
    fn real_order_series_matches_integer_case() {
        let idx = KernelIndex::new(1, 2, 0).unwrap();
        for &tau in &[0.1, 0.7, 1.5] {
            let pe = mode_kernel_polyexp(idx, 1.3).unwrap().value(tau);
            let s = kernel_series_real_order(1, 2.0, 0, 1.3, tau).unwrap();
            assert!((s - pe).abs() < 1e-12 * (1.0 + pe.abs()));
        }
    }

    proptest! {
        #[test]
        fn taylor_terms_match(n in 0u32..4, h in 1u32..4, m in 0i32..5, lambda in 0.5f64..10.0) {
            // the first series coefficient equals the polyexp Taylor coefficient
            let idx = KernelIndex::new(n, h, m).unwrap();
            let p = hyp_params(idx, lambda, 0.0).unwrap();
            let pe = mode_kernel_polyexp(idx, lambda).unwrap();
            let c = pe.taylor_coefficient(p.leading_power);
            prop_assert!((p.prefactor - c).abs() <= 1e-12 * c.abs());
        }
    }
}
