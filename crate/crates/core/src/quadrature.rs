//! Integration of trace functions over (0, ∞).
//!
//! The range is split into a bridge [0, τ_b], where a polynomial fitted on
//! [τ_b, 8τ_b] is integrated against the weight in closed form, adaptive
//! Gauss–Kronrod panels on [τ_b, T], and a tail beyond T that is bounded
//! rather than computed. τ_b starts at τ_min and is halved (at most six
//! times) while the bridge error dominates and keeps improving.

use crate::error::{Error, Result};
use crate::fit::{fit_polynomial, geometric_grid, FIT_DEGREE, FIT_POINTS};
use crate::kernels::TraceSample;
use crate::spectrum::tridiagonal_eigenvalues;
use crate::specfun::{gamma, ln_gamma};

/// Weight multiplying the integrand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weight {
    /// τ^α
    Power(f64),
    /// τ^α ln τ
    PowerLog(f64),
}

impl Weight {
    fn alpha(&self) -> f64 {
        match *self {
            Weight::Power(a) | Weight::PowerLog(a) => a,
        }
    }

    fn at(&self, tau: f64) -> f64 {
        match *self {
            Weight::Power(a) => tau.powf(a),
            Weight::PowerLog(a) => tau.powf(a) * tau.ln(),
        }
    }

    /// ∫_0^a τ^{α+i} (ln τ) dτ.
    fn moment(&self, a: f64, i: usize) -> f64 {
        let b = self.alpha() + i as f64 + 1.0;
        let base = a.powf(b) / b;
        match self {
            Weight::Power(_) => base,
            Weight::PowerLog(_) => base * (a.ln() - 1.0 / b),
        }
    }

    /// ∫_0^a |w(τ)| dτ.
    fn abs_moment(&self, a: f64) -> f64 {
        match self {
            Weight::Power(_) => self.moment(a, 0),
            Weight::PowerLog(_) => self.moment(a, 0).abs(),
        }
    }
}

/// One integrand value with an absolute noise bound and the scale of the
/// terms it was summed from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub value: f64,
    pub noise: f64,
    pub magnitude: f64,
}

impl From<f64> for Sample {
    fn from(value: f64) -> Self {
        Self {
            value,
            noise: 0.0,
            magnitude: value.abs(),
        }
    }
}

impl From<TraceSample> for Sample {
    fn from(s: TraceSample) -> Self {
        Self {
            value: s.value,
            noise: s.uncertainty(),
            magnitude: s.magnitude + s.truncation_bound,
        }
    }
}

/// Exponential decay of the integrand: |f(τ)| ≲ poly(τ)·e^{−λ_min τ^h}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decay {
    pub lambda_min: f64,
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub tol_abs: f64,
    pub tol_rel: f64,
    pub tau_min: f64,
    /// Maximum number of integrand evaluations.
    pub budget: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            tol_abs: 1e-12,
            tol_rel: 1e-11,
            tau_min: crate::kernels::DEFAULT_TAU_MIN,
            budget: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub bridge_contribution: f64,
    pub upper_limit: f64,
    pub tail_bound: f64,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    /// Part of the error that bisection cannot remove: noise plus roundoff.
    floor: f64,
    frozen: bool,
}

struct Counter<'a, F> {
    f: &'a mut F,
    weight: Weight,
    evaluations: usize,
    budget: usize,
}

impl<'a, F, S> Counter<'a, F>
where
    F: FnMut(f64) -> Result<S>,
    S: Into<Sample>,
{
    fn raw(&mut self, tau: f64) -> Result<Sample> {
        self.evaluations += 1;
        Ok((self.f)(tau)?.into())
    }

    /// w(τ)f(τ) and its noise.
    fn weighted(&mut self, tau: f64) -> Result<(f64, f64)> {
        let s = self.raw(tau)?;
        let w = self.weight.at(tau);
        Ok((w * s.value, w.abs() * s.noise))
    }

    fn gk15(&mut self, a: f64, b: f64) -> Result<Panel> {
        let c = 0.5 * (a + b);
        let hl = 0.5 * (b - a);
        let (fc, nc) = self.weighted(c)?;
        let mut resg = fc * WG[3];
        let mut resk = fc * WGK[7];
        let mut resabs = resk.abs();
        let mut noise = WGK[7] * nc;
        let mut fv1 = [0.0; 7];
        let mut fv2 = [0.0; 7];
        for j in 0..7 {
            let x = hl * XGK[j];
            let (f1, n1) = self.weighted(c - x)?;
            let (f2, n2) = self.weighted(c + x)?;
            fv1[j] = f1;
            fv2[j] = f2;
            resk += WGK[j] * (f1 + f2);
            resabs += WGK[j] * (f1.abs() + f2.abs());
            noise += WGK[j] * (n1 + n2);
            if j % 2 == 1 {
                resg += WG[j / 2] * (f1 + f2);
            }
        }
        let reskh = 0.5 * resk;
        let mut resasc = WGK[7] * (fc - reskh).abs();
        for j in 0..7 {
            resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
        }
        let value = resk * hl;
        resabs *= hl;
        resasc *= hl;
        let mut error = ((resk - resg) * hl).abs();
        if resasc != 0.0 && error != 0.0 {
            error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
        }
        let roundoff = 50.0 * f64::EPSILON * resabs;
        if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            error = error.max(roundoff);
        }
        let noise = noise * hl;
        Ok(Panel {
            a,
            b,
            value,
            error: error + noise,
            floor: noise + roundoff,
            frozen: false,
        })
    }

    fn check_budget(&self, value: f64, estimate: f64) -> Result<()> {
        if self.evaluations > self.budget {
            return Err(Error::Budget {
                detail: format!("{} integrand evaluations", self.evaluations),
                value,
                estimate,
            });
        }
        Ok(())
    }
}

/// ∫_0^∞ w(τ) f(τ) dτ for a trace-like f that is smooth at 0 and decays like
/// e^{−λ_min τ^h}.
pub fn integrate_trace<F, S>(mut f: F, weight: Weight, decay: Decay, opts: &QuadratureOptions) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> Result<S>,
    S: Into<Sample>,
{
    if !(weight.alpha() > -1.0) {
        return Err(Error::Domain(format!(
            "weight exponent {} must exceed −1",
            weight.alpha()
        )));
    }
    if !(decay.lambda_min > 0.0 && decay.h > 0.0) {
        return Err(Error::Domain("decay needs λ_min > 0 and h > 0".into()));
    }
    let tau_min = opts.tau_min;
    if !(tau_min > 0.0) {
        return Err(Error::Domain(format!("τ_min = {tau_min} must be positive")));
    }
    let mut ctr = Counter {
        f: &mut f,
        weight,
        evaluations: 0,
        budget: opts.budget,
    };

    // bridge on [0, τ_b]; τ_b starts at τ_min and halves while the bridge
    // error would dominate the tolerance
    let fixed_target = 0.25 * opts.tol_abs;
    let mut tau_b = tau_min;
    let (mut bridge, mut bridge_err) = bridge_integral(&mut ctr, tau_b)?;
    while bridge_err > fixed_target.max(0.25 * opts.tol_rel * bridge.abs()) && tau_b > tau_min / 64.0 {
        // smaller edges cost more modes and carry more rounding noise; keep
        // halving only while the error actually improves
        let (v, e) = bridge_integral(&mut ctr, 0.5 * tau_b)?;
        if e >= bridge_err {
            break;
        }
        tau_b *= 0.5;
        bridge = v;
        bridge_err = e;
    }

    // upper limit: past the polynomial maximum and with a tail below tol/10
    let tail_target = 0.1 * opts.tol_abs;
    let mut x = 8.0;
    let (upper, tail_bound) = loop {
        let t = (x / decay.lambda_min).powf(1.0 / decay.h);
        if t >= 16.0 * tau_b {
            let s1 = ctr.raw(t)?;
            let s2 = ctr.raw(1.25 * t)?;
            let w1 = weight.at(t).abs() * (s1.magnitude + s1.noise);
            let w2 = weight.at(1.25 * t).abs() * (s2.magnitude + s2.noise);
            let drop = (-0.5 * decay.lambda_min * ((1.25 * t).powf(decay.h) - t.powf(decay.h))).exp();
            let bound = w1 * 2.0 / (decay.lambda_min * decay.h * t.powf(decay.h - 1.0));
            if w2 <= w1 * drop && bound <= tail_target {
                break (t, bound);
            }
        }
        x += 8.0;
        if x > 2000.0 {
            return Err(Error::Budget {
                detail: "no upper limit found where the integrand has decayed".into(),
                value: f64::NAN,
                estimate: f64::INFINITY,
            });
        }
    };

    // geometric initial panels, ratio ≈ 2
    let count = ((upper / tau_b).log2().ceil() as usize).max(2);
    let edges = geometric_grid(tau_b, upper, count + 1);
    let mut panels = Vec::with_capacity(4 * count);
    for w in edges.windows(2) {
        panels.push(ctr.gk15(w[0], w[1])?);
    }
    loop {
        let (value, error) = totals(&panels);
        let total = value + bridge;
        let err = error + bridge_err + tail_bound;
        let target = opts.tol_abs.max(opts.tol_rel * total.abs());
        // splitting panels cannot reduce the bridge or tail parts
        let panel_target = (target - bridge_err - tail_bound).max(0.05 * target);
        if err <= target || error <= panel_target {
            break;
        }
        ctr.check_budget(total, err)?;
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.frozen)
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .map(|(i, _)| i);
        let Some(i) = worst else { break };
        let p = panels[i];
        // the noise floor cannot be refined away; neither can vanishing panels
        if p.error <= 2.0 * p.floor || p.b - p.a <= 1e-12 * p.b {
            panels[i].frozen = true;
            continue;
        }
        let mid = 0.5 * (p.a + p.b);
        let left = ctr.gk15(p.a, mid)?;
        let right = ctr.gk15(mid, p.b)?;
        panels[i] = left;
        panels.insert(i + 1, right);
    }
    let (value, error) = totals(&panels);
    Ok(QuadratureResult {
        value: value + bridge,
        error_estimate: error + bridge_err + tail_bound,
        evaluations: ctr.evaluations,
        bridge_contribution: bridge,
        upper_limit: upper,
        tail_bound,
    })
}

/// Polynomial fit of f on [a, 8a] integrated against the weight over [0, a].
/// The error is the change against one degree higher plus propagated noise.
fn bridge_integral<F, S>(ctr: &mut Counter<'_, F>, a: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<S>,
    S: Into<Sample>,
{
    let xs = geometric_grid(a, 8.0 * a, FIT_POINTS);
    let mut ys = Vec::with_capacity(xs.len());
    let mut ns = Vec::with_capacity(xs.len());
    for &x in &xs {
        let s = ctr.raw(x)?;
        ys.push(s.value);
        ns.push(s.noise);
    }
    let weight = ctr.weight;
    let integral = |degree: usize| -> Result<(f64, f64)> {
        let fit = fit_polynomial(&xs, &ys, &ns, degree)?;
        let v = (0..=degree).map(|i| fit.monomial(i) * weight.moment(a, i)).sum::<f64>();
        let noise = (fit.noise_at_zero + 4.0 * fit.residual_rms) * weight.abs_moment(a);
        Ok((v, noise))
    };
    let (v, noise) = integral(FIT_DEGREE)?;
    let (v_hi, _) = integral(FIT_DEGREE + 1)?;
    Ok((v, (v - v_hi).abs() + noise))
}

fn totals(panels: &[Panel]) -> (f64, f64) {
    let mut v = 0.0;
    let mut comp = 0.0;
    let mut e = 0.0;
    for p in panels {
        let y = p.value - comp;
        let t = v + y;
        comp = (t - v) - y;
        v = t;
        e += p.error;
    }
    (v, e)
}

/// Gauss rule for ∫_0^1 g(x)(1−x)^{b−1} dx.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub b: f64,
}

pub const JACOBI_ORDER: usize = 40;

impl JacobiRule {
    /// Nodes from the eigenvalues of the Jacobi matrix of P^{(b−1, 0)} (Sturm
    /// bisection), weights from the orthonormal recurrence, mapped to [0, 1].
    pub fn new(b: f64, order: usize) -> Result<Self> {
        if !(b > 0.0) {
            return Err(Error::Domain(format!("Jacobi exponent b = {b} must be positive")));
        }
        let alpha = b - 1.0;
        let beta = 0.0;
        let ab = alpha + beta;
        let diag: Vec<f64> = (0..order)
            .map(|k| {
                let k = k as f64;
                let s = 2.0 * k + ab;
                if k == 0.0 {
                    (beta - alpha) / (ab + 2.0)
                } else {
                    (beta * beta - alpha * alpha) / (s * (s + 2.0))
                }
            })
            .collect();
        let off: Vec<f64> = (1..order)
            .map(|k| {
                let k = k as f64;
                let s = 2.0 * k + ab;
                (4.0 * k * (k + alpha) * (k + beta) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0))).sqrt()
            })
            .collect();
        let t = tridiagonal_eigenvalues(&diag, &off)?;
        let mu0 = (ab + 1.0) * std::f64::consts::LN_2 + ln_gamma(alpha + 1.0)? + ln_gamma(beta + 1.0)?
            - ln_gamma(ab + 2.0)?;
        let mu0 = mu0.exp();
        let mut nodes = Vec::with_capacity(order);
        let mut weights = Vec::with_capacity(order);
        let map = 2f64.powf(-alpha - 1.0);
        for &x in &t {
            let mut p_prev = 0.0;
            let mut p = 1.0;
            let mut sum = 1.0;
            for k in 0..order - 1 {
                let sb_prev = if k == 0 { 0.0 } else { off[k - 1] };
                let next = ((x - diag[k]) * p - sb_prev * p_prev) / off[k];
                p_prev = p;
                p = next;
                sum += p * p;
            }
            nodes.push(0.5 * (1.0 + x));
            weights.push(mu0 / sum * map);
        }
        Ok(Self { nodes, weights, b })
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut g: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * g(x)).sum()
    }
}

/// ∫_0^1 f(x)(1−x)^{b−1} dx with the order-40 Jacobi rule.
pub fn integrate_unit_jacobi<F: FnMut(f64) -> f64>(f: F, b: f64) -> Result<f64> {
    Ok(JacobiRule::new(b, JACOBI_ORDER)?.integrate(f))
}

/// Γ(a+1)Γ(b)/Γ(a+1+b), the value of ∫_0^1 x^a (1−x)^{b−1} dx.
pub fn beta_moment(a: f64, b: f64) -> Result<f64> {
    if a + 1.0 + b > 170.0 {
        return Ok((ln_gamma(a + 1.0)? + ln_gamma(b)? - ln_gamma(a + 1.0 + b)?).exp());
    }
    Ok(gamma(a + 1.0)? * gamma(b)? / gamma(a + 1.0 + b)?)
}
