//! Single-mode modified heat kernels 𝓀_{n,m}(τ, λ) = −∂_τ^{n+m+1}[τ^n e^{−λτ^h}]
//! and their traces over a spectrum.

mod hpseries;
mod hyp;
mod polyexp;
mod trace;

pub use hpseries::{sum_ratio_series, LinearFactor, SeriesSum};
pub use hyp::{
    hyp_params, hyp_pfq, kernel_series_real_order, mode_kernel_hyp, HypKernelParams, Z_MAX,
};
pub use polyexp::{mode_kernel_polyexp, KernelShape, PolyExpFunction};
pub use trace::{
    heat_trace, small_tau_value, trace_modified, weyl_tail_bound, TraceOptions, TraceSample,
    DEFAULT_THETA, DEFAULT_TAU_MIN,
};

use crate::error::{Error, Result};

/// (n, h, m): dimension, order and parts-depth of a modified kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KernelIndex {
    pub n: u32,
    pub h: u32,
    pub m: i32,
}

impl KernelIndex {
    pub fn new(n: u32, h: u32, m: i32) -> Result<Self> {
        if h == 0 {
            return Err(Error::Domain("order h must be ≥ 1".into()));
        }
        if m < -(n as i32) {
            return Err(Error::Domain(format!("parts-depth m = {m} below −n = −{n}")));
        }
        Ok(Self { n, h, m })
    }

    /// Number of derivatives taken, n + m + 1.
    pub fn derivatives(&self) -> u32 {
        (self.n as i32 + self.m + 1) as u32
    }

    /// (q, r) with m = qh + r, 0 ≤ r < h, for m ≥ 0.
    pub fn qr(&self) -> Option<(u32, u32)> {
        (self.m >= 0).then(|| (self.m as u32 / self.h, self.m as u32 % self.h))
    }

    /// μ = −m for m < 0.
    pub fn mu(&self) -> Option<u32> {
        (self.m < 0).then(|| (-self.m) as u32)
    }

    /// Index of the first nonvanishing series term: max(0, ⌈(m+1)/h⌉).
    pub fn first_series_index(&self) -> u32 {
        if self.m < 0 {
            0
        } else {
            (self.m as u32 + 1).div_ceil(self.h)
        }
    }

    /// Exponent of τ in the leading small-τ term, h·k0 − m − 1.
    pub fn leading_power(&self) -> u32 {
        (self.h as i64 * self.first_series_index() as i64 - self.m as i64 - 1) as u32
    }
}
