//! Scalar LLR kernels and path-metric updates.

use serde::{Deserialize, Serialize};

/// Magnitude at which stage-0 LLRs are clipped.
pub const LLR_CLAMP: f64 = 40.0;

/// Check-node rule used by the `f` recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckNode {
    /// `ln((e^{α+β} + 1) / (e^α + e^β))`.
    #[default]
    Exact,
    /// `sign(α)·sign(β)·min(|α|, |β|)`.
    MinSum,
}

pub fn saturate(llr: f64) -> f64 {
    llr.clamp(-LLR_CLAMP, LLR_CLAMP)
}

/// `ln(1 + e^x)` without overflow for large `x`.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Exact check-node combination, evaluated as
/// `sign(α)sign(β)min(|α|,|β|) + ln(1+e^{−|α+β|}) − ln(1+e^{−|α−β|})`.
#[inline]
pub fn f_op(alpha: f64, beta: f64) -> f64 {
    f_min_sum(alpha, beta) + (-(alpha + beta).abs()).exp().ln_1p()
        - (-(alpha - beta).abs()).exp().ln_1p()
}

#[inline]
pub fn f_min_sum(alpha: f64, beta: f64) -> f64 {
    let m = alpha.abs().min(beta.abs());
    if (alpha < 0.0) != (beta < 0.0) {
        -m
    } else {
        m
    }
}

/// Variable-node combination `(−1)^u·α + β`.
#[inline]
pub fn g_op(alpha: f64, beta: f64, u: u8) -> f64 {
    if u == 0 {
        beta + alpha
    } else {
        beta - alpha
    }
}

/// Penalty `ln(1 + e^{(2v−1)λ})` for deciding `v` against decision LLR `λ`.
#[inline]
pub fn decision_penalty(llr: f64, v: u8) -> f64 {
    softplus(if v == 0 { -llr } else { llr })
}

/// `φ(μ, λ, v) = μ + ln(1 + e^{(2v−1)λ})`.
#[inline]
pub fn phi_metric(mu: f64, llr: f64, v: u8) -> f64 {
    mu + decision_penalty(llr, v)
}

/// `φ̃(μ, λ_c, λ_s, v) = μ + ln(1 + e^{(2v−1)λ_c}) + ln(1 + e^{(2v−1)λ_s})`.
#[inline]
pub fn phi_tilde_metric(mu: f64, llr_channel: f64, llr_source: f64, v: u8) -> f64 {
    mu + decision_penalty(llr_channel, v) + decision_penalty(llr_source, v)
}
