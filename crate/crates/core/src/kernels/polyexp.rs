use super::KernelIndex;
use crate::error::{Error, Result};

/// Σ c_p τ^p · e^{−λτ^h} with distinct non-negative integer powers.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyExpFunction {
    terms: Vec<(u32, f64)>,
    decay: f64,
    order: u32,
}

impl PolyExpFunction {
    /// Builds the function, merging equal powers and dropping zero coefficients.
    pub fn new(mut terms: Vec<(u32, f64)>, decay: f64, order: u32) -> Self {
        terms.sort_by_key(|t| t.0);
        let mut merged: Vec<(u32, f64)> = Vec::with_capacity(terms.len());
        for (p, c) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == p => last.1 += c,
                _ => merged.push((p, c)),
            }
        }
        merged.retain(|t| t.1 != 0.0);
        Self {
            terms: merged,
            decay,
            order,
        }
    }

    pub fn terms(&self) -> &[(u32, f64)] {
        &self.terms
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coefficient(&self, power: u32) -> f64 {
        self.terms
            .iter()
            .find(|t| t.0 == power)
            .map_or(0.0, |t| t.1)
    }

    pub fn value(&self, tau: f64) -> f64 {
        let e = (-self.decay * tau.powi(self.order as i32)).exp();
        self.terms.iter().map(|&(p, c)| c * tau.powi(p as i32)).sum::<f64>() * e
    }

    /// Σ|c_p|τ^p e^{−λτ^h}: the scale of the terms before cancellation.
    pub fn magnitude(&self, tau: f64) -> f64 {
        let e = (-self.decay * tau.powi(self.order as i32)).exp();
        self.terms.iter().map(|&(p, c)| c.abs() * tau.powi(p as i32)).sum::<f64>() * e
    }

    /// Exact τ-derivative: cτ^p ↦ cpτ^{p−1} − hλcτ^{p+h−1}.
    pub fn derivative(&self) -> Self {
        let h = self.order;
        let mut out = Vec::with_capacity(2 * self.terms.len());
        for &(p, c) in &self.terms {
            if p > 0 {
                out.push((p - 1, c * p as f64));
            }
            out.push((p + h - 1, -(h as f64) * self.decay * c));
        }
        Self::new(out, self.decay, h)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(
            self.terms.iter().map(|&(p, c)| (p, c * factor)).collect(),
            self.decay,
            self.order,
        )
    }

    /// Taylor coefficient of τ^k at 0.
    pub fn taylor_coefficient(&self, k: u32) -> f64 {
        // e^{−λτ^h} = Σ_j (−λ)^j τ^{hj}/j!
        let mut sum = 0.0;
        for &(p, c) in &self.terms {
            if p > k || (k - p) % self.order != 0 {
                continue;
            }
            let j = (k - p) / self.order;
            let mut w = 1.0;
            for i in 1..=j {
                w *= -self.decay / i as f64;
            }
            sum += c * w;
        }
        sum
    }
}

/// λ-independent form of 𝓀_{n,m}: τ^{n−N} Σ_j C_j x^j e^{−x} with x = λτ^h and
/// integer C_j.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelShape {
    idx: KernelIndex,
    coeffs: Vec<i128>,
    j_min: usize,
    // f64 copies of C_{j_min..}, their absolute values
    poly: Vec<f64>,
    poly_abs: Vec<f64>,
}

impl KernelShape {
    pub fn new(idx: KernelIndex) -> Result<Self> {
        let n = idx.n as i64;
        let h = idx.h as i64;
        let steps = idx.derivatives() as i64;
        let mut c: Vec<i128> = vec![1];
        for d in 0..steps {
            let mut next = vec![0i128; c.len() + 1];
            for (j, &cj) in c.iter().enumerate() {
                if cj == 0 {
                    continue;
                }
                let p = n - d + h * j as i64;
                let overflow = || Error::Range {
                    power: (p.max(0)) as usize,
                };
                let a = cj.checked_mul(p as i128).ok_or_else(overflow)?;
                next[j] = next[j].checked_add(a).ok_or_else(overflow)?;
                let b = cj.checked_mul(-(h as i128)).ok_or_else(overflow)?;
                next[j + 1] = next[j + 1].checked_add(b).ok_or_else(overflow)?;
            }
            c = next;
        }
        for v in c.iter_mut() {
            *v = -*v;
        }
        let j_min = c.iter().position(|&v| v != 0).unwrap_or(c.len());
        let poly: Vec<f64> = c[j_min.min(c.len())..].iter().map(|&v| v as f64).collect();
        let poly_abs = poly.iter().map(|v| v.abs()).collect();
        Ok(Self {
            idx,
            coeffs: c,
            j_min,
            poly,
            poly_abs,
        })
    }

    pub fn index(&self) -> KernelIndex {
        self.idx
    }

    /// Integer coefficients C_j of x^j.
    pub fn coefficients(&self) -> &[i128] {
        &self.coeffs
    }

    /// Exponent n − N of the τ prefactor.
    pub fn base_power(&self) -> i64 {
        self.idx.n as i64 - self.idx.derivatives() as i64
    }

    /// Lowest τ power carrying a nonzero coefficient.
    pub fn min_power(&self) -> u32 {
        (self.base_power() + self.idx.h as i64 * self.j_min as i64) as u32
    }

    /// Degree of the polynomial in x after factoring out x^{j_min}.
    pub fn reduced_degree(&self) -> usize {
        self.poly.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_empty()
    }

    pub fn polyexp(&self, lambda: f64) -> Result<PolyExpFunction> {
        let mut terms = Vec::new();
        for (j, &cj) in self.coeffs.iter().enumerate() {
            if cj == 0 {
                continue;
            }
            let p = self.base_power() + self.idx.h as i64 * j as i64;
            let c = cj as f64 * lambda.powi(j as i32);
            if !c.is_finite() {
                return Err(Error::Range { power: p as usize });
            }
            terms.push((p as u32, c));
        }
        Ok(PolyExpFunction::new(terms, lambda, self.idx.h))
    }

    /// (value, magnitude) of one mode at τ, given τ^{min_power} precomputed.
    #[inline]
    pub fn eval_mode(&self, lambda: f64, tau_h: f64, tau_pmin: f64) -> (f64, f64) {
        if self.poly.is_empty() {
            return (0.0, 0.0);
        }
        let x = lambda * tau_h;
        let mut v = 0.0;
        let mut a = 0.0;
        for (c, ca) in self.poly.iter().zip(&self.poly_abs).rev() {
            v = v * x + c;
            a = a * x + ca;
        }
        let pre = tau_pmin * lambda.powi(self.j_min as i32) * (-x).exp();
        (v * pre, a * pre)
    }

    /// x beyond which |C|(x)e^{−x} stays below e^{−θ}·max(1, Σ|C_j|), the mode
    /// cutoff that absorbs the polynomial factor.
    pub fn cutoff_x(&self, theta: f64) -> f64 {
        let d = self.reduced_degree() as f64 + self.j_min as f64;
        if d == 0.0 {
            return theta;
        }
        let mut x = theta;
        for _ in 0..50 {
            x = theta + d * x.max(1.0).ln();
        }
        x
    }
}

/// 𝓀_{n,m}(·, λ) as an exact polyexp function.
pub fn mode_kernel_polyexp(idx: KernelIndex, lambda: f64) -> Result<PolyExpFunction> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("eigenvalue {lambda} must be positive")));
    }
    KernelShape::new(idx)?.polyexp(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gamma;
    use proptest::prelude::*;

    fn idx(n: u32, h: u32, m: i32) -> KernelIndex {
        KernelIndex::new(n, h, m).unwrap()
    }

    #[test]
    fn first_kernels() {
        let k = mode_kernel_polyexp(idx(0, 2, 0), 1.7).unwrap();
        assert_eq!(k.terms(), &[(1, 2.0 * 1.7)]);
        let k = mode_kernel_polyexp(idx(1, 2, 0), 1.3).unwrap();
        assert_eq!(k.terms(), &[(1, 6.0 * 1.3), (3, -4.0 * 1.3 * 1.3)]);
        let k = mode_kernel_polyexp(idx(1, 2, 0), 1.0).unwrap();
        assert!((k.value(1.0) - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn initial_slope_is_gamma_ratio() {
        let lambda = 2.5;
        let k = mode_kernel_polyexp(idx(1, 2, 0), lambda).unwrap();
        assert_eq!(k.coefficient(0), 0.0);
        assert_eq!(k.coefficient(1), gamma(4.0).unwrap() * lambda);
    }

    #[test]
    fn successive_depths_differ_by_one_derivative() {
        for n in 0..4 {
            for h in 1..4 {
                for m in -(n as i32)..5 {
                    let lambda = 1.25;
                    let a = mode_kernel_polyexp(idx(n, h, m), lambda).unwrap();
                    let b = mode_kernel_polyexp(idx(n, h, m + 1), lambda).unwrap();
                    assert_eq!(a.derivative(), b, "n={n} h={h} m={m}");
                }
            }
        }
    }

    #[test]
    fn no_terms_below_series_start() {
        for n in 0..4 {
            for h in 1..4 {
                for m in 0..9 {
                    let i = idx(n, h, m);
                    let k = mode_kernel_polyexp(i, 0.8).unwrap();
                    let start = i.leading_power();
                    for t in 0..start {
                        assert_eq!(k.taylor_coefficient(t), 0.0, "n={n} h={h} m={m} t={t}");
                    }
                    assert!(k.taylor_coefficient(start) != 0.0);
                }
            }
        }
    }

    #[test]
    fn overflow_is_range_error() {
        assert!(matches!(
            KernelShape::new(idx(0, 3, 60)),
            Err(Error::Range { .. })
        ));
    }

    #[test]
    fn shape_matches_polyexp() {
        let shape = KernelShape::new(idx(2, 3, 1)).unwrap();
        let lambda: f64 = 3.1;
        let tau: f64 = 0.7;
        let pe = shape.polyexp(lambda).unwrap();
        let (v, a) = shape.eval_mode(lambda, tau.powi(3), tau.powi(shape.min_power() as i32));
        assert!((v - pe.value(tau)).abs() <= 1e-13 * pe.magnitude(tau));
        assert!((a - pe.magnitude(tau)).abs() <= 1e-13 * a);
    }

    proptest! {
        // finite-difference check of the derivative recurrence
        #[test]
        fn derivative_matches_finite_difference(n in 0u32..3, h in 1u32..4, lambda in 0.5f64..4.0, tau in 0.2f64..1.5) {
            let k = mode_kernel_polyexp(idx(n, h, 0), lambda).unwrap();
            let d = k.derivative();
            let e = 1e-5;
            let fd = (k.value(tau + e) - k.value(tau - e)) / (2.0 * e);
            prop_assert!((fd - d.value(tau)).abs() <= 1e-6 * (1.0 + d.magnitude(tau)));
        }
    }
}
