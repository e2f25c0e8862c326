//! Bernoulli source, BPSK modulation and the AWGN channel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bits::BitBlock;
use crate::decode::LLR_CLAMP;
use crate::error::{invalid, Result};
use crate::polar::SourceCodeSpec;

/// Draws `len` i.i.d. Bernoulli(`p`) bits from a ChaCha8 stream keyed by `seed`.
pub fn generate_source(len: usize, p: f64, seed: u64) -> Result<BitBlock> {
    if !(p > 0.0 && p < 0.5) {
        return invalid(format!("source probability p = {} must lie in (0, 0.5)", p));
    }
    if len == 0 {
        return invalid("source length must be positive");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    BitBlock::from_bools((0..len).map(|_| rng.random_bool(p)))
}

/// Source word for `spec`; see [`generate_source`].
pub fn generate_source_for(spec: &SourceCodeSpec, seed: u64) -> Result<BitBlock> {
    generate_source(spec.len(), spec.p(), seed)
}

/// Noise variance per real dimension for unit-energy BPSK at `ebn0_db` per
/// source bit and overall rate `rate` (source bits per channel symbol).
pub fn noise_variance(ebn0_db: f64, rate: f64) -> Result<f64> {
    if !(rate > 0.0) || !rate.is_finite() {
        return invalid(format!("rate {} must be positive", rate));
    }
    Ok(1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0)))
}

/// Maps 0 → +1 and 1 → −1.
pub fn bpsk(x: &[u8]) -> Vec<f64> {
    x.iter().map(|&b| if b == 0 { 1.0 } else { -1.0 }).collect()
}

/// Transmits `x` over BPSK-AWGN and returns the stage-0 LLRs `2y/σ²`.
pub fn channel_pass(x: &BitBlock, ebn0_db: f64, rate: f64, seed: u64) -> Result<Vec<f64>> {
    let var = noise_variance(ebn0_db, rate)?;
    let sigma = var.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(bpsk(x)
        .into_iter()
        .map(|s| {
            let n: f64 = rng.sample(StandardNormal);
            2.0 * (s + sigma * n) / var
        })
        .collect())
}

/// Noise-free LLRs at the saturation level, `+40` for a 0 and `−40` for a 1.
pub fn noiseless_llrs(x: &BitBlock) -> Vec<f64> {
    x.iter().map(|&b| if b == 0 { LLR_CLAMP } else { -LLR_CLAMP }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variance_closed_form() {
        let v = noise_variance(2.0, 0.5).unwrap();
        assert!((v - 0.630_957_344_480_193_2).abs() < 1e-12);
        assert!((v.sqrt() - 0.794_328_234_724_281_5).abs() < 1e-12);
        assert!(noise_variance(2.0, 0.0).is_err());
        assert!(noise_variance(2.0, -1.0).is_err());
    }

    #[test]
    fn source_validation_and_determinism() {
        assert!(generate_source(8, 0.5, 1).is_err());
        assert!(generate_source(8, 0.0, 1).is_err());
        assert_eq!(generate_source(64, 0.07, 9).unwrap(), generate_source(64, 0.07, 9).unwrap());
        assert_eq!(generate_source(4096, 1e-9, 3).unwrap().weight(), 0);
    }

    #[test]
    fn source_mean_within_six_sigma() {
        // 10^6 draws at p = 0.07: σ = sqrt(p(1-p)/n) ≈ 2.55e-4, 6σ ≈ 1.53e-3;
        // the tighter ±5e-4 window is about 2σ.
        let n = 1_000_000;
        let mut ones = 0;
        for chunk in 0..100u64 {
            ones += generate_source(n / 100, 0.07, 0xABCD + chunk).unwrap().weight();
        }
        let mean = ones as f64 / n as f64;
        assert!((mean - 0.07).abs() < 0.0005, "mean {}", mean);
    }

    #[test]
    fn noise_calibration() {
        let x = BitBlock::zeros(1 << 16);
        let var = noise_variance(1.0, 0.5).unwrap();
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let mut count = 0.0;
        for seed in 0..16 {
            for l in channel_pass(&x, 1.0, 0.5, seed).unwrap() {
                let y = l * var / 2.0 - 1.0;
                sum += y;
                sum_sq += y * y;
                count += 1.0;
            }
        }
        let mean = sum / count;
        let emp = sum_sq / count - mean * mean;
        assert!(count >= 1e6);
        assert!((emp / var - 1.0).abs() < 0.01, "empirical {} vs {}", emp, var);
    }

    #[test]
    fn high_snr_llr_signs() {
        let x = BitBlock::new(vec![0, 1, 1, 0, 1, 0, 0, 0]).unwrap();
        let llrs = channel_pass(&x, 60.0, 0.5, 7).unwrap();
        for (l, b) in llrs.iter().zip(x.iter()) {
            assert_eq!(*l < 0.0, *b == 1);
        }
        let sat = noiseless_llrs(&x);
        assert!(sat.iter().all(|l| l.abs() == LLR_CLAMP));
    }
}
