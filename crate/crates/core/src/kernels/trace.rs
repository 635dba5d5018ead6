use rayon::prelude::*;
use serde::Serialize;

use super::polyexp::KernelShape;
use super::KernelIndex;
use crate::error::{Error, Result};
use crate::fit::{extrapolate_to_zero, Extrapolation};
use crate::spectrum::OperatorModel;

/// Modes with λτ^h beyond this (after absorbing the polynomial factor) are
/// dropped and bounded instead.
pub const DEFAULT_THETA: f64 = 45.0;
pub const DEFAULT_TAU_MIN: f64 = 0.01;

const PARALLEL_MODES: usize = 16_384;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions {
    pub theta: f64,
    pub tau_min: f64,
    pub mode_budget: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            theta: DEFAULT_THETA,
            tau_min: DEFAULT_TAU_MIN,
            mode_budget: crate::spectrum::DEFAULT_MODE_BUDGET,
        }
    }
}

/// One evaluation of a trace at τ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceSample {
    pub tau: f64,
    pub value: f64,
    pub modes_used: usize,
    /// Upper bound on the magnitude of the dropped modes.
    pub truncation_bound: f64,
    /// Σ over modes of the term magnitudes before cancellation.
    pub magnitude: f64,
    /// Rounding error estimate for `value`.
    pub roundoff: f64,
}

impl TraceSample {
    /// Total absolute uncertainty: truncation plus rounding.
    pub fn uncertainty(&self) -> f64 {
        self.truncation_bound + self.roundoff
    }
}

fn check_index(model: &OperatorModel, idx: KernelIndex) -> Result<()> {
    if model.n() != idx.n || model.h() != idx.h {
        return Err(Error::Domain(format!(
            "kernel index (n={}, h={}) does not match the model (n={}, h={})",
            idx.n,
            idx.h,
            model.n(),
            model.h()
        )));
    }
    Ok(())
}

/// Ordered compensated sum of per-mode (value, magnitude) pairs. Parallel
/// evaluation only changes who computes each term, never the summation order.
fn mode_sum<F>(model: &OperatorModel, cutoff: f64, budget: usize, f: F) -> Result<(f64, f64, usize)>
where
    F: Fn(f64) -> (f64, f64) + Sync,
{
    let mut modes: Vec<(f64, u32)> = Vec::new();
    model.for_each_mode(cutoff, budget, |l, m| modes.push((l, m)))?;
    let terms: Vec<(f64, f64)> = if modes.len() > PARALLEL_MODES {
        modes.par_iter().map(|&(l, m)| scale(f(l), m)).collect()
    } else {
        modes.iter().map(|&(l, m)| scale(f(l), m)).collect()
    };
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut mag = 0.0;
    for (v, a) in terms {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        mag += a;
    }
    let count = modes.iter().map(|&(_, m)| m as usize).sum();
    Ok((sum, mag, count))
}

fn scale((v, a): (f64, f64), m: u32) -> (f64, f64) {
    (v * m as f64, a * m as f64)
}

/// Bound on the summed magnitude of modes with λ > cutoff in 𝓚_{n,m}(τ, D).
pub fn weyl_tail_bound(model: &OperatorModel, idx: KernelIndex, cutoff: f64, tau: f64) -> Result<f64> {
    check_index(model, idx)?;
    let shape = KernelShape::new(idx)?;
    let tau_h = tau.powi(idx.h as i32);
    let tau_p = tau.powi(shape.min_power() as i32);
    model.tail_bound(cutoff, |l| shape.eval_mode(l, tau_h, tau_p).1)
}

/// 𝓚_{n,m}(τ, D) = Σ_λ 𝓀_{n,m}(τ, λ).
pub fn trace_modified(model: &OperatorModel, idx: KernelIndex, tau: f64, opts: &TraceOptions) -> Result<TraceSample> {
    check_index(model, idx)?;
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("τ = {tau} must be positive")));
    }
    let shape = KernelShape::new(idx)?;
    let tau_h = tau.powi(idx.h as i32);
    let tau_p = tau.powi(shape.min_power() as i32);
    let cutoff = shape.cutoff_x(opts.theta) / tau_h;
    let (value, magnitude, modes_used) =
        mode_sum(model, cutoff, opts.mode_budget, |l| shape.eval_mode(l, tau_h, tau_p))?;
    let truncation_bound = model.tail_bound(cutoff, |l| shape.eval_mode(l, tau_h, tau_p).1)?;
    let roundoff = (shape.reduced_degree() as f64 + 8.0) * f64::EPSILON * magnitude
        + f64::EPSILON * value.abs();
    Ok(TraceSample {
        tau,
        value,
        modes_used,
        truncation_bound,
        magnitude,
        roundoff,
    })
}

/// K(t, D) = Σ e^{−tλ}.
pub fn heat_trace(model: &OperatorModel, t: f64, opts: &TraceOptions) -> Result<TraceSample> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("t = {t} must be positive")));
    }
    let cutoff = opts.theta / t;
    let env = |l: f64| {
        let e = (-t * l).exp();
        (e, e)
    };
    let (value, magnitude, modes_used) = mode_sum(model, cutoff, opts.mode_budget, env)?;
    let truncation_bound = model.tail_bound(cutoff, |l| (-t * l).exp())?;
    Ok(TraceSample {
        tau: t,
        value,
        modes_used,
        truncation_bound,
        magnitude,
        roundoff: 4.0 * f64::EPSILON * magnitude,
    })
}

/// 𝓚_{n,m}(0, D). Finite spectra give the exact power-0 coefficient; otherwise
/// the trace is extrapolated from [τ_min, 8τ_min].
pub fn small_tau_value(model: &OperatorModel, idx: KernelIndex, opts: &TraceOptions) -> Result<Extrapolation> {
    check_index(model, idx)?;
    let shape = KernelShape::new(idx)?;
    if let Some(pairs) = model.finite_spectrum() {
        let mut sum = 0.0;
        let mut mag = 0.0;
        for &(l, m) in pairs {
            let c = shape.polyexp(l)?.coefficient(0) * m as f64;
            sum += c;
            mag += c.abs();
        }
        return Ok(Extrapolation {
            value: sum,
            error: 4.0 * f64::EPSILON * mag,
        });
    }
    extrapolate_to_zero(opts.tau_min, |tau| {
        let s = trace_modified(model, idx, tau, opts)?;
        Ok((s.value, s.uncertainty()))
    })
}

#[cfg(test)]
mod tests {
    use super::super::mode_kernel_polyexp;
    use super::*;
    use crate::spectrum::PowerLaw;
    use std::f64::consts::PI;

    fn idx(n: u32, h: u32, m: i32) -> KernelIndex {
        KernelIndex::new(n, h, m).unwrap()
    }

    #[test]
    fn single_mode_trace() {
        let model = OperatorModel::explicit(1, 2, vec![(1.0, 1)]).unwrap();
        let s = trace_modified(&model, idx(1, 2, 0), 1.0, &TraceOptions::default()).unwrap();
        assert!((s.value - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(s.modes_used, 1);
        assert_eq!(s.truncation_bound, 0.0);
    }

    #[test]
    fn trace_is_linear_over_modes() {
        let pairs = vec![(0.7, 1), (1.9, 2), (4.4, 1)];
        let model = OperatorModel::explicit(2, 3, pairs.clone()).unwrap();
        let i = idx(2, 3, 1);
        for &tau in &[0.3, 0.9, 1.4] {
            let s = trace_modified(&model, i, tau, &TraceOptions::default()).unwrap();
            let want: f64 = pairs
                .iter()
                .map(|&(l, m)| m as f64 * mode_kernel_polyexp(i, l).unwrap().value(tau))
                .sum();
            assert!((s.value - want).abs() <= 1e-14 * s.magnitude);
        }
    }

    #[test]
    fn empty_head_has_positive_bound() {
        let model = OperatorModel::dirichlet_interval(PI).unwrap();
        let s = trace_modified(&model, idx(1, 2, 0), 20.0, &TraceOptions::default()).unwrap();
        assert_eq!(s.value, 0.0);
        assert_eq!(s.modes_used, 0);
        assert!(s.truncation_bound > 0.0);
    }

    #[test]
    fn heat_trace_examples() {
        let opts = TraceOptions::default();
        let m = OperatorModel::explicit(1, 2, vec![(1.0, 1), (2.0, 1), (3.0, 1)]).unwrap();
        let s = heat_trace(&m, 1.0, &opts).unwrap();
        let want = (-1.0f64).exp() + (-2.0f64).exp() + (-3.0f64).exp();
        assert!((s.value - want).abs() < 1e-15);

        let d = OperatorModel::dirichlet_interval(PI).unwrap();
        let s = heat_trace(&d, 1.0, &opts).unwrap();
        let want: f64 = (1..=40).map(|k| (-(k * k) as f64).exp()).sum();
        assert!((s.value - want).abs() < 1e-15);

        let t: f64 = 0.01;
        let s = heat_trace(&d, t, &opts).unwrap();
        let brute: f64 = (1..=2000).map(|k| (-t * (k * k) as f64).exp()).sum();
        assert!((s.value - brute).abs() < 1e-12);
        assert!((s.value - (0.5 * (PI / t).sqrt() - 0.5)).abs() < 1e-6);

        let s = heat_trace(&d, 30.0, &opts).unwrap();
        assert!((s.value / (-30.0f64).exp() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_tau_limits() {
        let opts = TraceOptions::default();
        let e = OperatorModel::explicit(1, 2, vec![(2.5, 1)]).unwrap();
        let i = idx(1, 2, -1);
        let v = small_tau_value(&e, i, &opts).unwrap();
        assert_eq!(v.value, mode_kernel_polyexp(i, 2.5).unwrap().coefficient(0));

        // τK(τ²) = √π/2 − τ/2 + exponentially small terms
        let d = OperatorModel::dirichlet_interval(PI).unwrap();
        let v = small_tau_value(&d, idx(1, 2, 0), &opts).unwrap();
        assert!(v.value.abs() < 1e-8 && v.error < 1e-6, "{v:?}");
        // 𝓚_{1,−1} = −∂_τ[τK(τ²)] → 1/2
        let v = small_tau_value(&d, idx(1, 2, -1), &opts).unwrap();
        assert!((v.value - 0.5).abs() < 1e-8, "{v:?}");
    }

    #[test]
    fn riemann_sequence_small_tau() {
        // λ_k = k, n = h = 1: τK(τ) = τ/(e^τ − 1) = 1 − τ/2 + τ²/12 − …,
        // so 𝓚_{1,−1}(0) = 1/2 and 𝓚_{1,0}(0) = −1/6
        let model = OperatorModel::known_sequence(1, 1, PowerLaw::new(1.0, 1.0)).unwrap();
        let opts = TraceOptions::default();
        let v = small_tau_value(&model, idx(1, 1, -1), &opts).unwrap();
        assert!((v.value - 0.5).abs() < 1e-7 && (v.value - 0.5).abs() <= v.error, "{v:?}");
        let v = small_tau_value(&model, idx(1, 1, 0), &opts).unwrap();
        assert!((v.value + 1.0 / 6.0).abs() < 1e-7 && (v.value + 1.0 / 6.0).abs() <= v.error, "{v:?}");
    }

    #[test]
    fn index_mismatch() {
        let d = OperatorModel::dirichlet_interval(PI).unwrap();
        assert!(trace_modified(&d, idx(1, 3, 0), 1.0, &TraceOptions::default()).is_err());
    }

    #[test]
    fn tail_bound_covers_dropped_modes() {
        let d = OperatorModel::dirichlet_interval(PI).unwrap();
        let i = idx(1, 2, 2);
        let tau: f64 = 0.2;
        let opts = TraceOptions::default();
        let s = trace_modified(&d, i, tau, &opts).unwrap();
        let wide = trace_modified(&d, i, tau, &TraceOptions { theta: 200.0, ..opts }).unwrap();
        assert!((s.value - wide.value).abs() <= s.truncation_bound + s.roundoff + wide.roundoff);
        assert!(s.truncation_bound <= 1e-15 * s.magnitude);
    }
}
