//! Operator models described by their spectrum.
//!
//! An [`OperatorModel`] carries the dimension `n` and order `h` of the
//! operator together with a source of eigenvalues. Enumeration is always in
//! ascending order with multiplicities expanded.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of modes a single enumeration may visit.
pub const DEFAULT_MODE_BUDGET: usize = 20_000_000;

/// λ_k = c·(k + offset)^p + shift for k = 1, 2, …, each with the same
/// multiplicity. A shift plays the role of a mass term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLaw {
    pub c: f64,
    pub p: f64,
    #[serde(default)]
    pub offset: f64,
    #[serde(default)]
    pub shift: f64,
    #[serde(default = "one")]
    pub multiplicity: u32,
}

fn one() -> u32 {
    1
}

impl PowerLaw {
    pub fn new(c: f64, p: f64) -> Self {
        Self {
            c,
            p,
            offset: 0.0,
            shift: 0.0,
            multiplicity: 1,
        }
    }

    pub fn eigenvalue(&self, k: u64) -> f64 {
        self.c * (k as f64 + self.offset).powf(self.p) + self.shift
    }

    fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::ModelInvalid(format!("power law scale c = {} must be > 0", self.c)));
        }
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(Error::ModelInvalid(format!("growth exponent p = {} must be > 0", self.p)));
        }
        if !(self.offset > -1.0) || !self.shift.is_finite() || !(self.eigenvalue(1) > 0.0) {
            return Err(Error::ModelInvalid(format!(
                "offset {} and shift {} give a non-positive first eigenvalue",
                self.offset, self.shift
            )));
        }
        if self.multiplicity == 0 {
            return Err(Error::ModelInvalid("multiplicity must be positive".into()));
        }
        Ok(())
    }

    /// Smallest k with λ_k > lambda.
    fn first_index_above(&self, lambda: f64) -> u64 {
        let guess = ((lambda - self.shift) / self.c).powf(1.0 / self.p) - self.offset;
        let mut k = if guess.is_finite() && guess > 1.0 { guess.floor() as u64 } else { 1 };
        k = k.max(1);
        while k > 1 && self.eigenvalue(k - 1) > lambda {
            k -= 1;
        }
        while self.eigenvalue(k) <= lambda {
            k += 1;
        }
        k
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectrumSource {
    /// Eigenvalue/multiplicity pairs.
    Explicit { eigenvalues: Vec<(f64, u32)> },
    /// −d²/dx² on [0, L] with Dirichlet conditions: λ_k = (kπ/L)².
    DirichletInterval { length: f64 },
    KnownSequence(PowerLaw),
    /// Symmetric tridiagonal matrix. A finite matrix has the heat-trace
    /// asymptotics of a finite spectrum, so ζ(0) and ζ'(0) only describe the
    /// matrix itself, not the continuum operator it may discretize.
    TridiagonalMatrix {
        diagonal: Vec<f64>,
        off_diagonal: Vec<f64>,
    },
}

/// The operator D at trace level: dimension, order and spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorModel {
    n: u32,
    h: u32,
    source: SpectrumSource,
    // sorted, merged (λ, multiplicity) for finite sources
    finite: Option<Vec<(f64, u32)>>,
}

/// Eigenvalues up to a cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSlice {
    pub eigenvalues: Vec<f64>,
    pub cutoff: f64,
    pub complete: bool,
}

impl OperatorModel {
    pub fn new(n: u32, h: u32, source: SpectrumSource) -> Result<Self> {
        if h == 0 {
            return Err(Error::ModelInvalid("order h must be a positive integer".into()));
        }
        let finite = match &source {
            SpectrumSource::Explicit { eigenvalues } => Some(merge_pairs(eigenvalues)?),
            SpectrumSource::DirichletInterval { length } => {
                if !(*length > 0.0 && length.is_finite()) {
                    return Err(Error::ModelInvalid(format!("interval length {length} must be > 0")));
                }
                if n != 1 || h != 2 {
                    return Err(Error::ModelInvalid(
                        "a Dirichlet interval has n = 1 and h = 2".into(),
                    ));
                }
                None
            }
            SpectrumSource::KnownSequence(law) => {
                law.validate()?;
                None
            }
            SpectrumSource::TridiagonalMatrix {
                diagonal,
                off_diagonal,
            } => {
                let eig = tridiagonal_eigenvalues(diagonal, off_diagonal)?;
                if !(eig[0] > 0.0) {
                    return Err(Error::ModelInvalid(format!(
                        "matrix is not positive definite (smallest eigenvalue {:e})",
                        eig[0]
                    )));
                }
                let pairs: Vec<(f64, u32)> = eig.into_iter().map(|l| (l, 1)).collect();
                Some(merge_pairs(&pairs)?)
            }
        };
        Ok(Self {
            n,
            h,
            source,
            finite,
        })
    }

    pub fn explicit(n: u32, h: u32, eigenvalues: Vec<(f64, u32)>) -> Result<Self> {
        Self::new(n, h, SpectrumSource::Explicit { eigenvalues })
    }

    pub fn dirichlet_interval(length: f64) -> Result<Self> {
        Self::new(1, 2, SpectrumSource::DirichletInterval { length })
    }

    pub fn known_sequence(n: u32, h: u32, law: PowerLaw) -> Result<Self> {
        Self::new(n, h, SpectrumSource::KnownSequence(law))
    }

    pub fn tridiagonal(n: u32, h: u32, diagonal: Vec<f64>, off_diagonal: Vec<f64>) -> Result<Self> {
        Self::new(
            n,
            h,
            SpectrumSource::TridiagonalMatrix {
                diagonal,
                off_diagonal,
            },
        )
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn h(&self) -> u32 {
        self.h
    }

    pub fn source(&self) -> &SpectrumSource {
        &self.source
    }

    /// Power-law generator behind the model, if any.
    pub fn power_law(&self) -> Option<PowerLaw> {
        match &self.source {
            SpectrumSource::DirichletInterval { length } => {
                Some(PowerLaw::new((std::f64::consts::PI / length).powi(2), 2.0))
            }
            SpectrumSource::KnownSequence(law) => Some(law.clone()),
            _ => None,
        }
    }

    /// Merged (λ, multiplicity) list when the spectrum is finite.
    pub fn finite_spectrum(&self) -> Option<&[(f64, u32)]> {
        self.finite.as_deref()
    }

    pub fn lambda_min(&self) -> f64 {
        match &self.finite {
            Some(f) => f[0].0,
            None => self.power_law().expect("infinite source is a power law").eigenvalue(1),
        }
    }

    /// Visit every eigenvalue λ ≤ cutoff in ascending order as `(λ, multiplicity)`.
    /// Returns the number of distinct eigenvalues visited.
    pub fn for_each_mode<F: FnMut(f64, u32)>(&self, cutoff: f64, budget: usize, mut f: F) -> Result<usize> {
        if let Some(pairs) = &self.finite {
            let mut count = 0;
            for &(l, m) in pairs.iter().take_while(|(l, _)| *l <= cutoff) {
                f(l, m);
                count += 1;
            }
            return Ok(count);
        }
        let law = self.power_law().expect("infinite source is a power law");
        let needed = law.first_index_above(cutoff) - 1;
        if needed as usize > budget {
            return Err(Error::Budget {
                detail: format!(
                    "{needed} modes needed below Λ = {cutoff:e}, budget is {budget}"
                ),
                value: f64::NAN,
                estimate: f64::INFINITY,
            });
        }
        for k in 1..=needed {
            f(law.eigenvalue(k), law.multiplicity);
        }
        Ok(needed as usize)
    }

    /// Collect the eigenvalues ≤ cutoff with multiplicities expanded.
    pub fn eigenvalues_up_to(&self, cutoff: f64) -> Result<SpectrumSlice> {
        if !(cutoff > 0.0) {
            return Err(Error::Domain(format!("cutoff must be positive, got {cutoff}")));
        }
        let mut eigenvalues = Vec::new();
        self.for_each_mode(cutoff, DEFAULT_MODE_BUDGET, |l, m| {
            eigenvalues.extend(std::iter::repeat(l).take(m as usize));
        })?;
        Ok(SpectrumSlice {
            eigenvalues,
            cutoff,
            complete: true,
        })
    }

    /// Upper bound on Σ_{λ > cutoff} mult·envelope(λ), where `envelope(λ)`
    /// bounds the absolute contribution of a single mode and decays at least
    /// like e^{−λ·const} past the cutoff.
    pub fn tail_bound<F: Fn(f64) -> f64>(&self, cutoff: f64, envelope: F) -> Result<f64> {
        if let Some(pairs) = &self.finite {
            let mut sum = 0.0;
            for &(l, m) in pairs.iter().filter(|(l, _)| *l > cutoff) {
                sum += m as f64 * envelope(l);
            }
            return Ok(sum);
        }
        let law = self.power_law().expect("infinite source is a power law");
        let mult = law.multiplicity as f64;
        let mut k = law.first_index_above(cutoff);
        let mut sum = 0.0;
        let mut prev = f64::INFINITY;
        for _ in 0..100_000 {
            let t = mult * envelope(law.eigenvalue(k));
            if !t.is_finite() {
                return Err(Error::Unsupported("tail envelope is not finite".into()));
            }
            sum += t;
            if t <= 1e-18 * sum || t == 0.0 {
                // remaining terms decrease at least geometrically with the last ratio
                let r = if prev.is_finite() && prev > 0.0 { t / prev } else { 0.5 };
                if r < 1.0 {
                    sum += t * r / (1.0 - r);
                    return Ok(sum);
                }
            }
            prev = t;
            k += 1;
        }
        Err(Error::Unsupported("tail bound did not converge".into()))
    }

    /// ζ_D(s) = Σ λ^{−s} directly, with an error bound for the truncated tail.
    pub fn direct_sum(&self, s: f64) -> Result<(f64, f64)> {
        if let Some(pairs) = &self.finite {
            let mut sum = 0.0;
            let mut comp = 0.0;
            for &(l, m) in pairs {
                let y = m as f64 * l.powf(-s) - comp;
                let t = sum + y;
                comp = (t - sum) - y;
                sum = t;
            }
            return Ok((sum, 4.0 * f64::EPSILON * sum.abs()));
        }
        let law = self.power_law().expect("infinite source is a power law");
        let sigma = law.p * s;
        if !(sigma > 1.0) {
            return Err(Error::Domain(format!(
                "direct sum diverges: p·s = {sigma} ≤ 1"
            )));
        }
        let mult = law.multiplicity as f64;
        if law.shift == 0.0 {
            let (h, err) = hurwitz_tail_sum(sigma, law.offset);
            let scale = mult * law.c.powf(-s);
            return Ok((scale * h, scale * err));
        }
        // explicit head, then (1 + u)^{−s} expanded in u = shift/(c(k+a)^p) for the tail
        let mut k0: u64 = 40;
        while (law.shift / (law.c * (k0 as f64 + law.offset).powf(law.p))).abs() > 0.05 {
            k0 *= 2;
        }
        let mut head = 0.0;
        for k in (1..k0).rev() {
            head += law.eigenvalue(k).powf(-s);
        }
        let u = law.shift / law.c;
        let a = law.offset + (k0 - 1) as f64;
        let mut tail = 0.0;
        let mut err = 0.0;
        let mut binom = 1.0;
        for j in 0..60 {
            let (hz, e) = hurwitz_tail_sum(law.p * (s + j as f64), a);
            let term = binom * u.powi(j) * hz;
            tail += term;
            err += (binom * u.powi(j)).abs() * e;
            if term.abs() < 1e-18 * tail.abs() {
                break;
            }
            binom *= (-s - j as f64) / (j + 1) as f64;
        }
        let scale = law.c.powf(-s);
        let value = mult * (head + scale * tail);
        Ok((value, mult * scale * err + 8.0 * f64::EPSILON * value.abs()))
    }
}

fn merge_pairs(pairs: &[(f64, u32)]) -> Result<Vec<(f64, u32)>> {
    if pairs.is_empty() {
        return Err(Error::ModelInvalid("empty spectrum".into()));
    }
    let mut v = pairs.to_vec();
    for &(l, m) in &v {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::ModelInvalid(format!("non-positive eigenvalue {l}")));
        }
        if m == 0 {
            return Err(Error::ModelInvalid(format!("eigenvalue {l} has multiplicity 0")));
        }
    }
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, u32)> = Vec::with_capacity(v.len());
    for (l, m) in v {
        match merged.last_mut() {
            Some(last) if last.0 == l => last.1 += m,
            _ => merged.push((l, m)),
        }
    }
    Ok(merged)
}

/// Σ_{k≥1} (k + a)^{−σ} for σ > 1 by explicit summation plus an
/// Euler–Maclaurin remainder; returns (value, bound on the remainder error).
fn hurwitz_tail_sum(sigma: f64, a: f64) -> (f64, f64) {
    const B: [f64; 6] = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
    ];
    let n_terms: u64 = 40;
    let mut sum = 0.0;
    for k in (1..n_terms).rev() {
        sum += (k as f64 + a).powf(-sigma);
    }
    let x = n_terms as f64 + a;
    sum += x.powf(1.0 - sigma) / (sigma - 1.0) + 0.5 * x.powf(-sigma);
    let mut fact = 1.0;
    let mut poch = 1.0;
    for (j, b) in B.iter().enumerate() {
        let two_j = 2 * (j + 1);
        fact *= ((two_j - 1) * two_j) as f64;
        // (σ)_{2j−1}
        poch = (0..two_j - 1).fold(1.0, |acc, i| acc * (sigma + i as f64));
        sum += b / fact * poch * x.powf(-sigma - two_j as f64 + 1.0);
    }
    // next Bernoulli term bounds the remainder
    let b14 = 7.0 / 6.0;
    let next = b14 / (fact * 13.0 * 14.0) * poch * (sigma + 11.0) * (sigma + 12.0)
        * x.powf(-sigma - 13.0);
    (sum, next.abs() + 8.0 * f64::EPSILON * sum.abs())
}

/// Number of eigenvalues of the symmetric tridiagonal matrix strictly below `x`
/// (negative pivots of the LDLᵀ factorization of T − x).
pub fn sturm_count(diagonal: &[f64], off_diagonal: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diagonal.len() {
        let e2 = if i == 0 { 0.0 } else { off_diagonal[i - 1] * off_diagonal[i - 1] };
        q = diagonal[i] - x - if i == 0 { 0.0 } else { e2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (diagonal[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// All eigenvalues of a symmetric tridiagonal matrix by Sturm bisection, ascending.
pub fn tridiagonal_eigenvalues(diagonal: &[f64], off_diagonal: &[f64]) -> Result<Vec<f64>> {
    let n = diagonal.len();
    if n == 0 {
        return Err(Error::ModelInvalid("empty tridiagonal matrix".into()));
    }
    if off_diagonal.len() + 1 != n {
        return Err(Error::ModelInvalid(format!(
            "off-diagonal has {} entries, expected {}",
            off_diagonal.len(),
            n - 1
        )));
    }
    if diagonal.iter().chain(off_diagonal).any(|v| !v.is_finite()) {
        return Err(Error::ModelInvalid("non-finite matrix entry".into()));
    }
    // Gershgorin bounds
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off_diagonal[i - 1].abs() } else { 0.0 }
            + if i + 1 < n { off_diagonal[i].abs() } else { 0.0 };
        lo = lo.min(diagonal[i] - r);
        hi = hi.max(diagonal[i] + r);
    }
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        // k-th eigenvalue: smallest x with count(x) > k
        let (mut a, mut b) = (lo - f64::EPSILON * scale, hi + f64::EPSILON * scale);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b || b - a <= 2.0 * f64::EPSILON * scale {
                break;
            }
            if sturm_count(diagonal, off_diagonal, mid) > k {
                b = mid;
            } else {
                a = mid;
            }
        }
        out.push(0.5 * (a + b));
    }
    Ok(out)
}

/// Read a tridiagonal matrix from two whitespace-separated columns
/// (diagonal, off-diagonal); the off-diagonal entry of the last row is optional
/// and ignored.
pub fn parse_tridiagonal(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut diag = Vec::new();
    let mut off = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() || fields.len() > 2 {
            return Err(Error::Config(format!(
                "line {}: expected 1 or 2 columns, found {}",
                lineno + 1,
                fields.len()
            )));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| Error::Config(format!("line {}: {e}: {s:?}", lineno + 1)))
        };
        diag.push(parse(fields[0])?);
        off.push(if fields.len() == 2 { Some(parse(fields[1])?) } else { None });
    }
    let n = diag.len();
    let mut offs = Vec::with_capacity(n.saturating_sub(1));
    for (i, o) in off.into_iter().enumerate().take(n.saturating_sub(1)) {
        offs.push(o.ok_or_else(|| {
            Error::Config(format!("row {} is missing its off-diagonal entry", i + 1))
        })?);
    }
    Ok((diag, offs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn dirichlet_enumeration() {
        let m = OperatorModel::dirichlet_interval(PI).unwrap();
        let s = m.eigenvalues_up_to(10.0).unwrap();
        assert_eq!(s.eigenvalues.len(), 3);
        for (got, want) in s.eigenvalues.iter().zip([1.0, 4.0, 9.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(s.complete);
    }

    #[test]
    fn explicit_multiplicity_expansion() {
        let m = OperatorModel::explicit(1, 2, vec![(2.0, 3)]).unwrap();
        let s = m.eigenvalues_up_to(5.0).unwrap();
        assert_eq!(s.eigenvalues, vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn explicit_is_sorted_and_merged() {
        let m = OperatorModel::explicit(1, 2, vec![(3.0, 1), (1.0, 1), (3.0, 2)]).unwrap();
        assert_eq!(m.finite_spectrum().unwrap(), &[(1.0, 1), (3.0, 3)]);
        assert_eq!(m.eigenvalues_up_to(10.0).unwrap().eigenvalues, vec![1.0, 3.0, 3.0, 3.0]);
    }

    #[test]
    fn tridiagonal_three_by_three() {
        let m = OperatorModel::tridiagonal(1, 2, vec![2.0; 3], vec![-1.0; 2]).unwrap();
        let s = m.eigenvalues_up_to(4.0).unwrap();
        let want = [2.0 - 2f64.sqrt(), 2.0, 2.0 + 2f64.sqrt()];
        assert_eq!(s.eigenvalues.len(), 3);
        for (got, w) in s.eigenvalues.iter().zip(want) {
            assert!((got - w).abs() < 1e-14, "{got} vs {w}");
        }
    }

    #[test]
    fn tridiagonal_matches_closed_form_spectrum() {
        // tridiag(2, −1) of size N: 2 − 2cos(kπ/(N+1))
        let n = 60;
        let eig = tridiagonal_eigenvalues(&vec![2.0; n], &vec![-1.0; n - 1]).unwrap();
        for (k, got) in eig.iter().enumerate() {
            let want = 2.0 - 2.0 * ((k + 1) as f64 * PI / (n + 1) as f64).cos();
            assert!((got - want).abs() < 1e-13);
        }
        // count below x equals the Sturm count exactly
        for &x in &[0.01, 0.5, 1.7, 3.99] {
            let c = eig.iter().filter(|&&l| l < x).count();
            assert_eq!(c, sturm_count(&vec![2.0; n], &vec![-1.0; n - 1], x));
        }
    }

    #[test]
    fn rejects_non_positive_spectra() {
        assert!(matches!(
            OperatorModel::explicit(1, 2, vec![(0.0, 1)]),
            Err(Error::ModelInvalid(_))
        ));
        assert!(matches!(
            OperatorModel::tridiagonal(1, 2, vec![1.0, 1.0], vec![2.0]),
            Err(Error::ModelInvalid(_))
        ));
        assert!(OperatorModel::dirichlet_interval(-1.0).is_err());
        assert!(OperatorModel::new(2, 2, SpectrumSource::DirichletInterval { length: 1.0 }).is_err());
    }

    #[test]
    fn prefix_stability_under_doubling() {
        let m = OperatorModel::known_sequence(
            1,
            1,
            PowerLaw {
                c: 0.7,
                p: 1.3,
                offset: 0.25,
                shift: 0.0,
                multiplicity: 2,
            },
        )
        .unwrap();
        let mut cutoff = 3.0;
        let mut prev = m.eigenvalues_up_to(cutoff).unwrap().eigenvalues;
        for _ in 0..6 {
            cutoff *= 2.0;
            let next = m.eigenvalues_up_to(cutoff).unwrap().eigenvalues;
            assert_eq!(&next[..prev.len()], &prev[..]);
            assert!(next.windows(2).all(|w| w[0] <= w[1]));
            prev = next;
        }
    }

    #[test]
    fn explicit_tail_is_zero_beyond_spectrum() {
        let m = OperatorModel::explicit(1, 2, vec![(1.0, 1), (2.0, 1)]).unwrap();
        assert_eq!(m.tail_bound(5.0, |l| (-l).exp()).unwrap(), 0.0);
    }

    #[test]
    fn dirichlet_tail_bound_vs_brute_force() {
        let m = OperatorModel::dirichlet_interval(PI).unwrap();
        let tau: f64 = 0.5;
        let cutoff = 45.0 / (tau * tau);
        let env = |l: f64| (-l * tau * tau).exp();
        let bound = m.tail_bound(cutoff, env).unwrap();
        let mut head = 0.0;
        let mut brute_tail = 0.0;
        m.for_each_mode(4.0 * cutoff, usize::MAX, |l, _| {
            if l <= cutoff {
                head += env(l);
            } else {
                brute_tail += env(l);
            }
        })
        .unwrap();
        assert!(bound >= brute_tail);
        assert!(bound <= 1e-12 * head);
    }

    #[test]
    fn tail_bound_decreases_with_cutoff() {
        let m = OperatorModel::known_sequence(1, 2, PowerLaw::new(1.0, 2.0)).unwrap();
        let tau: f64 = 1.0;
        let env = |l: f64| l * (-l * tau * tau).exp();
        let b1 = m.tail_bound(30.0, env).unwrap();
        let b2 = m.tail_bound(60.0, env).unwrap();
        assert!(b1 > 0.0 && b2 > 0.0 && b2 < b1);
    }

    #[test]
    fn direct_sums() {
        let m = OperatorModel::explicit(1, 2, vec![(1.0, 1), (2.0, 1), (3.0, 1)]).unwrap();
        let (v, _) = m.direct_sum(1.0).unwrap();
        assert!((v - 11.0 / 6.0).abs() < 1e-15);
        let d = OperatorModel::dirichlet_interval(PI).unwrap();
        let (v, e) = d.direct_sum(1.0).unwrap();
        assert!((v - PI * PI / 6.0).abs() < 1e-13 && e < 1e-12);
        let (v, _) = d.direct_sum(2.0).unwrap();
        assert!((v - PI.powi(4) / 90.0).abs() < 1e-13);
        // ζ_R(1.5)
        let (v, _) = d.direct_sum(0.75).unwrap();
        assert!((v - 2.612_375_348_685_488).abs() < 1e-12);
        assert!(matches!(d.direct_sum(0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn shifted_sequence() {
        let law = PowerLaw {
            shift: 0.75,
            ..PowerLaw::new(1.0, 2.0)
        };
        let m = OperatorModel::known_sequence(1, 2, law.clone()).unwrap();
        let s = m.eigenvalues_up_to(10.0).unwrap();
        assert_eq!(s.eigenvalues, vec![1.75, 4.75, 9.75]);
        for &sv in &[0.8, 1.0, 2.5] {
            let (v, e) = m.direct_sum(sv).unwrap();
            let brute: f64 = (1..2_000_000u64).rev().map(|k| law.eigenvalue(k).powf(-sv)).sum();
            // brute-force tail beyond 2e6 is below 1e-6 for these s only when 2s − 1 is not small
            let tail_est = (2_000_000f64).powf(1.0 - 2.0 * sv) / (2.0 * sv - 1.0);
            assert!((v - brute - tail_est).abs() < 1e-9 + 1e-3 * tail_est, "s={sv}: {v} vs {brute}");
            assert!(e < 1e-12);
        }
        let bad = PowerLaw {
            shift: -1.0,
            ..PowerLaw::new(1.0, 2.0)
        };
        assert!(OperatorModel::known_sequence(1, 2, bad).is_err());
    }

    #[test]
    fn parse_two_columns() {
        let (d, o) = parse_tridiagonal("2 -1\n2 -1\n2\n").unwrap();
        assert_eq!(d, vec![2.0, 2.0, 2.0]);
        assert_eq!(o, vec![-1.0, -1.0]);
        assert!(parse_tridiagonal("2 -1\n2\n2\n").is_err());
        assert!(parse_tridiagonal("2 x\n").is_err());
    }
}
