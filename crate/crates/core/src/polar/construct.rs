//! Code construction by Gaussian approximation of density evolution.
//!
//! Each synthetic bit channel is modelled by a consistent Gaussian LLR with
//! mean `m` (variance `2m`). A variable-node combination doubles the mean, a
//! check-node combination maps `m` to `φ⁻¹(1 − (1 − φ(m))²)`, with the
//! two-segment approximation
//!
//! ```text
//! φ(x) = exp(−0.4527·x^0.86 + 0.0218)                      0 < x < 10
//! φ(x) = sqrt(π/x) · exp(−x/4) · (1 − 10/(7x))             x ≥ 10
//! ```
//!
//! and `φ(0) = 1`. Everything is evaluated in the log domain so that means in
//! the thousands do not underflow, and `φ⁻¹` is found by bisection.

use super::spec::{check_probability, ChannelCodeSpec, SourceCodeSpec};
use crate::error::{invalid, Result};

const PHI_SWITCH: f64 = 10.0;

/// `ln φ(x)` for the two-segment approximation, clamped to `≤ 0`.
pub fn ga_phi_ln(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < PHI_SWITCH {
        (-0.4527 * x.powf(0.86) + 0.0218).min(0.0)
    } else {
        0.5 * (std::f64::consts::PI / x).ln() - x / 4.0 + (1.0 - 10.0 / (7.0 * x)).ln()
    }
}

fn ga_phi_ln_inverse(target: f64) -> f64 {
    if target >= 0.0 {
        return 0.0;
    }
    // ln φ(x) ≈ −x/4 for large x, so 8|t| + 40 always brackets the root.
    let mut lo = 0.0;
    let mut hi = 8.0 * -target + 40.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ga_phi_ln(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi.max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Mean LLR after a check-node combination of two channels of mean `m`.
pub fn ga_check_node(m: f64) -> f64 {
    if m <= 0.0 {
        return 0.0;
    }
    let l = ga_phi_ln(m);
    // 1 − (1 − φ)² = φ(2 − φ)
    ga_phi_ln_inverse(l + (2.0 - l.exp()).ln())
}

/// Evolved mean LLR of each of the `2^n` bit channels of `x = u·F^{⊗n}`,
/// starting from `initial_mean` on every transmitted bit. Index `i` is the
/// natural-order position of `u_i`: the most significant bit of `i` selects
/// the first combination applied to the physical channel.
pub fn ga_mean_llrs(n: u32, initial_mean: f64) -> Vec<f64> {
    let mut means = vec![initial_mean];
    for _ in 0..n {
        let mut next = Vec::with_capacity(means.len() * 2);
        for &m in &means {
            next.push(ga_check_node(m));
            next.push(2.0 * m);
        }
        means = next;
    }
    means
}

/// Converts an Eb/N0 per source bit into Es/N0 per channel symbol for
/// overall rate `rate = N_s / N_c`.
pub fn esn0_from_ebn0(ebn0_db: f64, rate: f64) -> f64 {
    ebn0_db + 10.0 * rate.log10()
}

/// Builds a channel code of length `2^n` with `k` information bits.
///
/// `design_esn0_db` is the design SNR per channel symbol; the initial mean
/// LLR of BPSK over AWGN is `2/σ² = 4·Es/N0`. A sweep at Eb/N0 per source bit
/// passes [`esn0_from_ebn0`]`(ebn0, R)`, giving `4·R·Eb/N0`. The `k` indices
/// with the largest mean are chosen, ties going to the larger index.
pub fn construct_channel_code(n: u32, k: usize, design_esn0_db: f64) -> Result<ChannelCodeSpec> {
    let len = 1usize << n;
    if k == 0 || k > len {
        return invalid(format!("channel K = {} must lie in 1..={}", k, len));
    }
    if !design_esn0_db.is_finite() {
        return invalid("design SNR must be finite");
    }
    let m0 = 4.0 * 10f64.powf(design_esn0_db / 10.0);
    let means = ga_mean_llrs(n, m0);
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by(|&a, &b| means[b].total_cmp(&means[a]).then(b.cmp(&a)));
    let mut info = order[..k].to_vec();
    info.sort_unstable();
    ChannelCodeSpec::new(n, info)
}

/// Initial mean LLR used for source-set construction: twice the prior LLR
/// magnitude `ln((1 − p)/p)`.
pub fn source_initial_mean(p: f64) -> f64 {
    2.0 * ((1.0 - p) / p).ln()
}

/// Builds a source code of length `2^n` whose high-entropy set is the `k`
/// least reliable indices under the constant source prior, ties going to
/// the smaller index.
pub fn construct_source_code(n: u32, k: usize, p: f64) -> Result<SourceCodeSpec> {
    let len = 1usize << n;
    check_probability(p)?;
    if k == 0 || k > len {
        return invalid(format!("source K = {} must lie in 1..={}", k, len));
    }
    let means = ga_mean_llrs(n, source_initial_mean(p));
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by(|&a, &b| means[a].total_cmp(&means[b]).then(a.cmp(&b)));
    let mut high = order[..k].to_vec();
    high.sort_unstable();
    SourceCodeSpec::new(n, high, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_segments() {
        assert_eq!(ga_phi_ln(0.0), 0.0);
        assert!(ga_phi_ln(1.0) < 0.0);
        // strictly decreasing away from the switch point
        let xs = [0.5, 1.0, 3.0, 9.9, 10.5, 50.0, 500.0, 5000.0];
        for w in xs.windows(2) {
            assert!(ga_phi_ln(w[1]) < ga_phi_ln(w[0]));
        }
    }

    #[test]
    fn inverse_round_trips() {
        for &x in &[0.3, 1.0, 4.0, 9.0, 12.0, 100.0, 3000.0] {
            let back = ga_phi_ln_inverse(ga_phi_ln(x));
            assert!((back - x).abs() < 1e-6 * x.max(1.0), "{} -> {}", x, back);
        }
    }

    #[test]
    fn check_node_degrades() {
        for &m in &[0.1, 1.0, 5.0, 20.0, 1000.0] {
            let c = ga_check_node(m);
            assert!(c > 0.0 && c < m, "m = {}, check = {}", m, c);
        }
        // large-mean regime: loses about 4 ln 2 in mean
        let m = 2000.0;
        assert!((m - ga_check_node(m) - 4.0 * 2f64.ln()).abs() < 0.05);
    }

    #[test]
    fn channel_construction_examples() {
        for snr in [-5.0, 0.0, 2.0, 10.0] {
            assert_eq!(construct_channel_code(2, 1, snr).unwrap().info(), &[3]);
        }
        assert_eq!(construct_channel_code(3, 8, 1.0).unwrap().info(), &[0, 1, 2, 3, 4, 5, 6, 7]);
        // natural order: u3 (binary 10) is more reliable than u2 (binary 01)
        assert_eq!(construct_channel_code(2, 2, 1.0).unwrap().info(), &[2, 3]);
        assert!(construct_channel_code(2, 0, 1.0).is_err());
        assert!(construct_channel_code(2, 5, 1.0).is_err());
    }

    #[test]
    fn source_construction_examples() {
        assert_eq!(construct_source_code(2, 1, 0.11).unwrap().high_entropy(), &[0]);
        assert_eq!(construct_source_code(2, 4, 0.11).unwrap().high_entropy(), &[0, 1, 2, 3]);
        assert_eq!(construct_source_code(2, 2, 0.07).unwrap().high_entropy(), &[0, 1]);
        assert!(construct_source_code(2, 1, 0.5).is_err());
        assert!(construct_source_code(2, 1, 0.0).is_err());
        assert!(construct_source_code(2, 0, 0.1).is_err());
    }

    #[test]
    fn esn0_conversion() {
        assert!((esn0_from_ebn0(2.0, 0.5) - (2.0 - 3.0103)).abs() < 1e-4);
        assert_eq!(esn0_from_ebn0(1.5, 1.0), 1.5);
    }
}
