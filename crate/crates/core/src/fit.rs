//! Least-squares polynomial fits on a geometric grid near τ = 0.

use crate::error::{Error, Result};

/// A polynomial p(τ) = Σ c_i (τ/scale)^i fitted by least squares.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyFit {
    pub coeffs: Vec<f64>,
    pub scale: f64,
    /// Root-mean-square residual of the fit.
    pub residual_rms: f64,
    /// Propagated data noise in the value at 0: Σ|w_i|·noise_i.
    pub noise_at_zero: f64,
}

impl PolyFit {
    pub fn value_at_zero(&self) -> f64 {
        self.coeffs[0]
    }

    /// Coefficient of τ^i in the unscaled variable.
    pub fn monomial(&self, i: usize) -> f64 {
        self.coeffs[i] / self.scale.powi(i as i32)
    }

    pub fn eval(&self, tau: f64) -> f64 {
        let v = tau / self.scale;
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * v + c)
    }
}

/// Geometric grid of `count` points spanning [lo, hi].
pub fn geometric_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let r = (hi / lo).ln() / (count - 1) as f64;
    (0..count).map(|i| lo * (r * i as f64).exp()).collect()
}

/// Fit a polynomial of the given degree to (x_i, y_i) by modified
/// Gram–Schmidt QR. `noise[i]` is an absolute error bound on `y[i]`.
pub fn fit_polynomial(x: &[f64], y: &[f64], noise: &[f64], degree: usize) -> Result<PolyFit> {
    let rows = x.len();
    let cols = degree + 1;
    if rows < cols || y.len() != rows || noise.len() != rows {
        return Err(Error::Domain(format!(
            "polynomial fit of degree {degree} needs at least {cols} samples, got {rows}"
        )));
    }
    let scale = x.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if !(scale > 0.0) {
        return Err(Error::Domain("fit abscissae are all zero".into()));
    }
    // columns of the scaled Vandermonde matrix
    let mut q: Vec<Vec<f64>> = (0..cols)
        .map(|j| x.iter().map(|&xi| (xi / scale).powi(j as i32)).collect())
        .collect();
    let mut r = vec![vec![0.0; cols]; cols];
    for j in 0..cols {
        for k in 0..j {
            let d: f64 = q[k].iter().zip(&q[j]).map(|(a, b)| a * b).sum();
            r[k][j] += d;
            let qk = q[k].clone();
            for (v, a) in q[j].iter_mut().zip(&qk) {
                *v -= d * a;
            }
        }
        let norm = q[j].iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::Precision("rank-deficient polynomial fit".into()));
        }
        r[j][j] = norm;
        for v in q[j].iter_mut() {
            *v /= norm;
        }
    }
    let qty: Vec<f64> = (0..cols)
        .map(|j| q[j].iter().zip(y).map(|(a, b)| a * b).sum())
        .collect();
    let mut coeffs = vec![0.0; cols];
    for i in (0..cols).rev() {
        let s: f64 = (i + 1..cols).map(|k| r[i][k] * coeffs[k]).sum();
        coeffs[i] = (qty[i] - s) / r[i][i];
    }
    // weights of the intercept: w = Q R^{-T} e_0
    let mut g = vec![0.0; cols];
    for i in 0..cols {
        let s: f64 = (0..i).map(|k| r[k][i] * g[k]).sum();
        g[i] = (if i == 0 { 1.0 } else { 0.0 } - s) / r[i][i];
    }
    let mut noise_at_zero = 0.0;
    for (i, ni) in noise.iter().enumerate() {
        let w: f64 = (0..cols).map(|k| q[k][i] * g[k]).sum();
        noise_at_zero += w.abs() * ni;
    }
    let fit = PolyFit {
        coeffs,
        scale,
        residual_rms: 0.0,
        noise_at_zero,
    };
    let ss: f64 = x.iter().zip(y).map(|(&xi, &yi)| (fit.eval(xi) - yi).powi(2)).sum();
    Ok(PolyFit {
        residual_rms: (ss / rows as f64).sqrt(),
        ..fit
    })
}

/// Limit of a smooth function at 0 from samples on [tau_min, 8·tau_min].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrapolation {
    pub value: f64,
    pub error: f64,
}

pub const FIT_POINTS: usize = 12;
pub const FIT_DEGREE: usize = 4;

/// Extrapolate `f` to τ = 0. `f` returns (value, absolute noise bound).
pub fn extrapolate_to_zero<F>(tau_min: f64, mut f: F) -> Result<Extrapolation>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    let xs = geometric_grid(tau_min, 8.0 * tau_min, FIT_POINTS);
    let mut ys = Vec::with_capacity(xs.len());
    let mut noise = Vec::with_capacity(xs.len());
    for &x in &xs {
        let (v, e) = f(x)?;
        ys.push(v);
        noise.push(e);
    }
    let hi = fit_polynomial(&xs, &ys, &noise, FIT_DEGREE)?;
    let lo = fit_polynomial(&xs, &ys, &noise, FIT_DEGREE - 1)?;
    let value = hi.value_at_zero();
    let error = (value - lo.value_at_zero()).abs() + hi.noise_at_zero + 4.0 * hi.residual_rms;
    Ok(Extrapolation { value, error })
}
