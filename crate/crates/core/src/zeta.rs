//! Evaluation of ζ_D(s) on the whole real line.
//!
//! For s > n/h the eigenvalue sum converges. Elsewhere
//!
//! ζ_D(s) = (−1)^{n+m} hΓ(hs−n) / (Γ(s)Γ(hs+m+1)) · ∫_0^∞ τ^{hs+m} 𝓚_{n,m}(τ) dτ
//!
//! which holds whenever hs + m > −1. The prefactor has poles at the lattice
//! points s = (n−j)/h; there either ζ_D has a genuine pole or the integral
//! vanishes and the singularity is removable.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{heat_trace, small_tau_value, trace_modified, KernelIndex, TraceOptions};
use crate::quadrature::{integrate_trace, Decay, QuadratureOptions, QuadratureResult, Sample, Weight};
use crate::spectrum::OperatorModel;
use crate::specfun::{gamma_signed, harmonic, sin_pi, EULER_GAMMA};

/// Distance from a lattice point inside which offsets are used.
pub const LATTICE_EPS: f64 = 1e-3;
/// Margin above n/h required by the direct and heat-integral routes.
pub const DIRECT_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaOptions {
    pub trace: TraceOptions,
    pub quad: QuadratureOptions,
    pub lattice_eps: f64,
}

impl Default for ZetaOptions {
    fn default() -> Self {
        Self {
            trace: TraceOptions::default(),
            quad: QuadratureOptions {
                tol_abs: 1e-11,
                tol_rel: 1e-10,
                ..QuadratureOptions::default()
            },
            lattice_eps: LATTICE_EPS,
        }
    }
}

impl ZetaOptions {
    fn quad(&self) -> QuadratureOptions {
        QuadratureOptions {
            tau_min: self.trace.tau_min,
            ..self.quad
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuationPlan {
    pub s: f64,
    pub m: i32,
    /// Nearest point (n−j)/h, j ≥ 0, if any lies at or below n/h.
    pub lattice_point: Option<f64>,
    pub lattice_distance: f64,
    /// Offsets from s at which the formula is evaluated; empty for a plain
    /// evaluation at s.
    pub epsilon_offsets: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Direct,
    HeatIntegral,
    Continued,
    LatticeOffset,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZetaValue {
    pub s: f64,
    pub value: f64,
    pub error_estimate: f64,
    pub route: Route,
    pub plan: Option<ContinuationPlan>,
    pub modes_max: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidueRoute {
    /// 1/Γ(s₀) = 0 or the sine factor vanishes.
    Trivial,
    /// ∫𝓚_{n,−μ} for s₀ > 0.
    Integral,
    /// ∫𝓚_{n,m} and 𝓚_{n,m−1}(0) for s₀ < 0.
    IntegralAndBoundary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidueReport {
    pub k: u32,
    pub s0: f64,
    pub residue: f64,
    pub residue_error: f64,
    /// Second, independent value for s₀ < 0 (boundary form).
    pub boundary_residue: Option<f64>,
    pub boundary_error: Option<f64>,
    /// a_k = residue·Γ(s₀); absent when Γ(s₀) is infinite.
    pub a_k: Option<f64>,
    pub a_k_error: Option<f64>,
    pub route: ResidueRoute,
}

struct Integral {
    value: f64,
    error: f64,
    evaluations: usize,
    modes_max: usize,
}

fn decay(model: &OperatorModel) -> Decay {
    Decay {
        lambda_min: model.lambda_min(),
        h: model.h() as f64,
    }
}

/// ∫_0^∞ w(τ) 𝓚_{n,m}(τ) dτ.
fn kernel_integral(model: &OperatorModel, m: i32, weight: Weight, opts: &ZetaOptions) -> Result<Integral> {
    let idx = KernelIndex::new(model.n(), model.h(), m)?;
    let mut modes_max = 0;
    let r: QuadratureResult = integrate_trace(
        |tau| {
            let s = trace_modified(model, idx, tau, &opts.trace)?;
            modes_max = modes_max.max(s.modes_used);
            Ok(s)
        },
        weight,
        decay(model),
        &opts.quad(),
    )?;
    Ok(Integral {
        value: r.value,
        error: r.error_estimate,
        evaluations: r.evaluations,
        modes_max,
    })
}

/// Smallest admissible parts-depth at s: max(0, smallest m with hs + m > −0.95).
pub fn minimal_depth(h: u32, s: f64) -> i32 {
    let m = (-0.95 - h as f64 * s).floor() as i32 + 1;
    m.max(0)
}

/// Nearest lattice point (n−j)/h with j ≥ 0 and its index j.
fn nearest_lattice(n: u32, h: u32, s: f64) -> Option<(u32, f64)> {
    let j = (n as f64 - h as f64 * s).round();
    if j < 0.0 {
        return None;
    }
    Some((j as u32, (n as f64 - j) / h as f64))
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// (−1)^{n+m} hΓ(hs−n) / (Γ(s)Γ(hs+m+1)). Near a lattice point p that is a
/// non-positive integer, Γ(hs−n)/Γ(s) is taken from the reflected form
/// Γ(1−s) sin(πs) / (Γ(1+n−hs) sin(π(hs−n))), whose sine ratio has the finite
/// limit (−1)^{p−hp+n}/h.
fn prefactor(n: u32, h: u32, m: i32, s: f64, eps: f64) -> Result<f64> {
    let hf = h as f64;
    let nf = n as f64;
    let (g3s, g3) = gamma_signed(hf * s + m as f64 + 1.0)?;
    let parity = if (n as i32 + m).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    if let Some((_, p)) = nearest_lattice(n, h, s) {
        if is_nonpositive_integer(p) && (s - p).abs() < eps {
            let d = s - p;
            let e = (p - hf * p + nf) as i64;
            let sign = if e.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let ratio = if d == 0.0 {
                sign / hf
            } else {
                sign * sin_pi(d) / sin_pi(hf * d)
            };
            let (g1s, g1) = gamma_signed(1.0 - s)?;
            let (g2s, g2) = gamma_signed(1.0 + nf - hf * s)?;
            return Ok(parity * hf * ratio * g1s * g2s * g3s * (g1 - g2 - g3).exp());
        }
    }
    let (g1s, g1) = gamma_signed(hf * s - nf).map_err(|_| Error::Pole {
        location: s,
        detail: "prefactor pole on the representation lattice".into(),
    })?;
    let (g2s, g2) = match gamma_signed(s) {
        Ok(v) => v,
        // 1/Γ(s) = 0 away from the lattice cannot happen for integer h
        Err(_) => return Ok(0.0),
    };
    Ok(parity * hf * g1s * g2s * g3s * (g1 - g2 - g3).exp())
}

/// The continuation formula evaluated at s with depth m, no lattice logic
/// beyond the reflected prefactor.
fn continued_at(model: &OperatorModel, s: f64, m: i32, opts: &ZetaOptions) -> Result<(f64, f64, usize, usize)> {
    let h = model.h() as f64;
    if !(h * s + m as f64 > -1.0) {
        return Err(Error::Domain(format!(
            "depth m = {m} is outside its strip at s = {s} (need hs + m > −1)"
        )));
    }
    let pre = prefactor(model.n(), model.h(), m, s, opts.lattice_eps)?;
    let i = kernel_integral(model, m, Weight::Power(h * s + m as f64), opts)?;
    let value = pre * i.value;
    let error = pre.abs() * i.error + 16.0 * f64::EPSILON * value.abs();
    Ok((value, error, i.evaluations, i.modes_max))
}

/// Plan for s: depth, nearest lattice point and offsets.
pub fn plan(model: &OperatorModel, s: f64, m_override: Option<i32>, opts: &ZetaOptions) -> ContinuationPlan {
    let lattice = nearest_lattice(model.n(), model.h(), s);
    let (lattice_point, lattice_distance) = match lattice {
        Some((_, p)) => (Some(p), (s - p).abs()),
        None => (None, f64::INFINITY),
    };
    let mut offsets = Vec::new();
    if let Some(p) = lattice_point {
        if !is_nonpositive_integer(p) && lattice_distance < opts.lattice_eps {
            let e = if lattice_distance <= 1e-14 {
                opts.lattice_eps
            } else {
                2.0 * opts.lattice_eps
            };
            offsets = vec![-2.0 * e, -e, e, 2.0 * e];
        }
    }
    let lowest = s + offsets.first().copied().unwrap_or(0.0);
    let m = m_override.unwrap_or_else(|| minimal_depth(model.h(), lowest));
    ContinuationPlan {
        s,
        m,
        lattice_point,
        lattice_distance,
        epsilon_offsets: offsets,
    }
}

/// ζ_D(s) through the modified heat kernel.
pub fn zeta_continued(model: &OperatorModel, s: f64, m_override: Option<i32>, opts: &ZetaOptions) -> Result<ZetaValue> {
    if !s.is_finite() {
        return Err(Error::Domain(format!("s = {s} is not finite")));
    }
    let mut plan = plan(model, s, m_override, opts);
    if !plan.epsilon_offsets.is_empty() {
        let p = plan.lattice_point.expect("offsets imply a lattice point");
        let j = (model.n() as f64 - model.h() as f64 * p).round() as u32;
        let res = residue_at(model, j, opts)?;
        let regular = res.residue.abs() <= 1e-6 + 5.0 * res.residue_error;
        if !regular {
            if plan.lattice_distance <= 1e-14 {
                return Err(Error::Pole {
                    location: p,
                    detail: format!(
                        "ζ has a pole here with residue {:.6e}; use residue_at",
                        res.residue
                    ),
                });
            }
            // near a genuine pole the formula is evaluated as is
            plan.epsilon_offsets.clear();
        } else {
            let mut vals = Vec::with_capacity(4);
            let mut evaluations = 0;
            let mut modes_max = 0;
            for &o in &plan.epsilon_offsets {
                let (v, e, ev, mm) = continued_at(model, s + o, plan.m, opts)?;
                vals.push((v, e));
                evaluations += ev;
                modes_max = modes_max.max(mm);
            }
            let e = plan.epsilon_offsets[2];
            // even averages cancel the odd terms; Richardson removes the e² term
            let a1 = 0.5 * (vals[1].0 + vals[2].0);
            let a2 = 0.5 * (vals[0].0 + vals[3].0);
            let value = (4.0 * a1 - a2) / 3.0;
            let noise = (2.0 * (vals[1].1 + vals[2].1) + 0.5 * (vals[0].1 + vals[3].1)) / 3.0;
            let truncation = 16.0 * e * e * (a1 - a2).abs() / 3.0;
            return Ok(ZetaValue {
                s,
                value,
                error_estimate: noise + truncation,
                route: Route::LatticeOffset,
                plan: Some(plan),
                modes_max,
                evaluations,
            });
        }
    }
    let (value, error, evaluations, modes_max) = continued_at(model, s, plan.m, opts)?;
    Ok(ZetaValue {
        s,
        value,
        error_estimate: error,
        route: Route::Continued,
        plan: Some(plan),
        modes_max,
        evaluations,
    })
}

fn check_convergent(model: &OperatorModel, s: f64) -> Result<()> {
    let edge = model.n() as f64 / model.h() as f64;
    if model.finite_spectrum().is_none() && !(s > edge + DIRECT_MARGIN) {
        return Err(Error::Domain(format!(
            "s = {s} is not above n/h + {DIRECT_MARGIN} = {}",
            edge + DIRECT_MARGIN
        )));
    }
    Ok(())
}

/// Σ λ^{−s} with a bounded tail.
pub fn zeta_direct(model: &OperatorModel, s: f64) -> Result<ZetaValue> {
    check_convergent(model, s)?;
    let (value, error_estimate) = model.direct_sum(s)?;
    Ok(ZetaValue {
        s,
        value,
        error_estimate,
        route: Route::Direct,
        plan: None,
        modes_max: model.finite_spectrum().map_or(0, |f| f.len()),
        evaluations: 0,
    })
}

/// (1/Γ(s)) ∫ t^{s−1} K(t) dt, computed as (h/Γ(s)) ∫ τ^{hs−1−n} · τ^n K(τ^h) dτ.
pub fn zeta_heat_integral(model: &OperatorModel, s: f64, opts: &ZetaOptions) -> Result<ZetaValue> {
    check_convergent(model, s)?;
    let n = model.n() as i32;
    let h = model.h() as f64;
    let mut modes_max = 0;
    let r = integrate_trace(
        |tau: f64| {
            let k = heat_trace(model, tau.powf(h), &opts.trace)?;
            modes_max = modes_max.max(k.modes_used);
            let scale = tau.powi(n);
            Ok(Sample {
                value: scale * k.value,
                noise: scale * k.uncertainty(),
                magnitude: scale * (k.magnitude + k.truncation_bound),
            })
        },
        Weight::Power(h * s - 1.0 - n as f64),
        decay(model),
        &opts.quad(),
    )?;
    let (gs, lg) = gamma_signed(s)?;
    let pre = gs * h * (-lg).exp();
    let value = pre * r.value;
    Ok(ZetaValue {
        s,
        value,
        error_estimate: pre.abs() * r.error_estimate + 8.0 * f64::EPSILON * value.abs(),
        route: Route::HeatIntegral,
        plan: None,
        modes_max,
        evaluations: r.evaluations,
    })
}

/// ζ_D(s) by the cheapest applicable route: the direct sum above n/h, the
/// continuation otherwise.
pub fn zeta(model: &OperatorModel, s: f64, opts: &ZetaOptions) -> Result<ZetaValue> {
    let edge = model.n() as f64 / model.h() as f64;
    if s > edge + DIRECT_MARGIN || (model.finite_spectrum().is_some() && s > 0.0) {
        zeta_direct(model, s)
    } else {
        zeta_continued(model, s, None, opts)
    }
}

/// ζ_D(0) = (1/n!) ∫ 𝓚_{n,0} dτ.
pub fn zeta_at_zero(model: &OperatorModel, opts: &ZetaOptions) -> Result<ZetaValue> {
    let i = kernel_integral(model, 0, Weight::Power(0.0), opts)?;
    let (_, lf) = gamma_signed(model.n() as f64 + 1.0)?;
    let inv = (-lf).exp();
    Ok(ZetaValue {
        s: 0.0,
        value: inv * i.value,
        error_estimate: inv * i.error,
        route: Route::Continued,
        plan: Some(ContinuationPlan {
            s: 0.0,
            m: 0,
            lattice_point: Some(0.0),
            lattice_distance: 0.0,
            epsilon_offsets: Vec::new(),
        }),
        modes_max: i.modes_max,
        evaluations: i.evaluations,
    })
}

/// ζ'_D(0) = (1/n!) ∫ (γ + hH_n + h ln τ) 𝓚_{n,0} dτ.
pub fn zeta_prime_at_zero(model: &OperatorModel, opts: &ZetaOptions) -> Result<ZetaValue> {
    let n = model.n();
    let h = model.h() as f64;
    let i = kernel_integral(model, 0, Weight::Power(0.0), opts)?;
    let l = kernel_integral(model, 0, Weight::PowerLog(0.0), opts)?;
    let (_, lf) = gamma_signed(n as f64 + 1.0)?;
    let inv = (-lf).exp();
    let c = EULER_GAMMA + h * harmonic(n as u64);
    Ok(ZetaValue {
        s: 0.0,
        value: inv * (c * i.value + h * l.value),
        error_estimate: inv * (c.abs() * i.error + h * l.error),
        route: Route::Continued,
        plan: None,
        modes_max: i.modes_max.max(l.modes_max),
        evaluations: i.evaluations + l.evaluations,
    })
}

/// exp(−ζ'_D(0)) with its propagated error.
pub fn det_zeta(model: &OperatorModel, opts: &ZetaOptions) -> Result<(f64, f64)> {
    let zp = zeta_prime_at_zero(model, opts)?;
    let det = (-zp.value).exp();
    Ok((det, det * zp.error_estimate))
}

/// Residue of ζ_D at s₀ = (n−k)/h.
pub fn residue_at(model: &OperatorModel, k: u32, opts: &ZetaOptions) -> Result<ResidueReport> {
    let n = model.n();
    let h = model.h();
    let s0 = (n as f64 - k as f64) / h as f64;
    let trivial = |s0: f64| ResidueReport {
        k,
        s0,
        residue: 0.0,
        residue_error: 0.0,
        boundary_residue: None,
        boundary_error: None,
        a_k: None,
        a_k_error: None,
        route: ResidueRoute::Trivial,
    };
    if k == n {
        return Ok(trivial(s0));
    }
    let a_k_of = |res: f64, err: f64| -> (Option<f64>, Option<f64>) {
        match gamma_signed(s0) {
            Ok((sg, lg)) => {
                let g = sg * lg.exp();
                (Some(res * g), Some(err * g.abs()))
            }
            Err(_) => (None, None),
        }
    };
    if k < n {
        // s₀ > 0, μ = n − k
        let mu = n - k;
        let i = kernel_integral(model, -(mu as i32), Weight::Power(0.0), opts)?;
        let (_, l1) = gamma_signed(mu as f64 / h as f64)?;
        let (_, l2) = gamma_signed(1.0 + n as f64 - mu as f64)?;
        let f = (-l1 - l2).exp();
        let residue = f * i.value;
        let residue_error = f * i.error;
        let (a_k, a_k_error) = a_k_of(residue, residue_error);
        return Ok(ResidueReport {
            k,
            s0,
            residue,
            residue_error,
            boundary_residue: None,
            boundary_error: None,
            a_k,
            a_k_error,
            route: ResidueRoute::Integral,
        });
    }
    // s₀ < 0, m = k − n
    let m = k - n;
    if m % h == 0 {
        let mut r = trivial(s0);
        let (a_k, a_k_error) = a_k_of(0.0, 0.0);
        r.a_k = a_k;
        r.a_k_error = a_k_error;
        return Ok(r);
    }
    let (_, lg1) = gamma_signed((h + m) as f64 / h as f64)?;
    let (_, lg2) = gamma_signed(1.0 + (n + m) as f64)?;
    let f = sin_pi(m as f64 / h as f64) * (lg1 - lg2).exp() / std::f64::consts::PI;
    let i = kernel_integral(model, m as i32, Weight::Power(0.0), opts)?;
    let residue = -f * i.value;
    let residue_error = f.abs() * i.error;
    let idx = KernelIndex::new(n, h, m as i32 - 1)?;
    let b = small_tau_value(model, idx, &opts.trace)?;
    let boundary = f * b.value;
    let boundary_error = f.abs() * b.error;
    let tol = 3.0 * (residue_error + boundary_error) + 1e-12;
    if (residue - boundary).abs() > tol {
        return Err(Error::Inconsistency(format!(
            "residue at s = {s0}: integral form {residue:.12e} ± {residue_error:.1e}, boundary form {boundary:.12e} ± {boundary_error:.1e}"
        )));
    }
    let (a_k, a_k_error) = a_k_of(residue, residue_error);
    Ok(ResidueReport {
        k,
        s0,
        residue,
        residue_error,
        boundary_residue: Some(boundary),
        boundary_error: Some(boundary_error),
        a_k,
        a_k_error,
        route: ResidueRoute::IntegralAndBoundary,
    })
}

/// Seeley–DeWitt coefficient a_k: residue·Γ(s₀) where Γ(s₀) is finite,
/// otherwise the Taylor coefficient of τ^n K(τ^h) at τ^k, read off
/// 𝓚_{n,k−n−1}(0) = −k!·a_k.
pub fn seeley_coefficient(model: &OperatorModel, k: u32, opts: &ZetaOptions) -> Result<(f64, f64)> {
    let n = model.n();
    let h = model.h();
    let s0 = (n as f64 - k as f64) / h as f64;
    if !is_nonpositive_integer(s0) {
        let r = residue_at(model, k, opts)?;
        return Ok((r.a_k.unwrap_or(0.0), r.a_k_error.unwrap_or(0.0)));
    }
    if k == 0 {
        // n = 0: a_0 = K(0⁺), the number of modes
        let e = crate::fit::extrapolate_to_zero(opts.trace.tau_min, |t| {
            let s = heat_trace(model, t, &opts.trace)?;
            Ok((s.value, s.uncertainty()))
        })?;
        return Ok((e.value, e.error));
    }
    let idx = KernelIndex::new(n, h, k as i32 - n as i32 - 1)?;
    let v = small_tau_value(model, idx, &opts.trace)?;
    let (_, lk) = gamma_signed(k as f64 + 1.0)?;
    let inv = (-lk).exp();
    let (a, e) = (-v.value * inv, v.error * inv);
    if !(e < 1e-3 * a.abs().max(1.0)) {
        return Err(Error::Precision(format!(
            "small-τ fit for a_{k} has error {e:.2e} against value {a:.6e}"
        )));
    }
    Ok((a, e))
}
