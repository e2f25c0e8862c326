//! Decoders checked against exhaustive and probability-domain oracles.

use dpolar::decode::reference::{jscl_decode_naive, leaf_llr, sc_decode};
use dpolar::decode::{
    jscl_decode, scl_decode, sep_scl_decode, CheckNode, DecoderOptions, JointDecoder,
    SourceDecoder,
};
use dpolar::polar::{
    compress_source, construct_source_code, dpolar_encode, polar_transform, ChannelCodeSpec,
    SourceCodeSpec,
};
use dpolar::simulate::{channel_pass, generate_source, noiseless_llrs};
use dpolar::trellis::CompoundTrellis;
use dpolar::BitBlock;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TIE: f64 = 1e-9;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_subset(r: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut v = sample(r, n, k).into_vec();
    v.sort_unstable();
    v
}

fn random_llrs(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.random_range(-6.0..6.0)).collect()
}

/// `P(x_j = b)` implied by an LLR.
fn bit_prob(llr: f64, b: u8) -> f64 {
    if b == 0 {
        1.0 / (1.0 + (-llr).exp())
    } else {
        1.0 / (1.0 + llr.exp())
    }
}

fn likelihood(llrs: &[f64], x: &[u8]) -> f64 {
    llrs.iter().zip(x).map(|(&l, &b)| bit_prob(l, b)).product()
}

/// Decision LLR of leaf `decided.len()` by summing codeword likelihoods
/// over every completion of the input word.
fn brute_leaf_llr(llrs: &[f64], decided: &[u8]) -> f64 {
    let n = llrs.len();
    let i = decided.len();
    let free = n - i - 1;
    let mut mass = [0.0; 2];
    for b in 0..2u8 {
        for tail in 0..1u64 << free {
            let mut u = decided.to_vec();
            u.push(b);
            u.extend((0..free).map(|k| ((tail >> k) & 1) as u8));
            mass[b as usize] += likelihood(llrs, polar_transform(&u).unwrap().as_slice());
        }
    }
    (mass[0] / mass[1]).ln()
}

fn source_log_prior(s: &[u8], p: f64) -> f64 {
    let w = s.iter().filter(|&&b| b == 1).count() as f64;
    w * p.ln() + (s.len() as f64 - w) * (1.0 - p).ln()
}

fn channel_log_likelihood(llrs: &[f64], x: &[u8]) -> f64 {
    llrs.iter().zip(x).map(|(&l, &b)| bit_prob(l, b).ln()).sum()
}

/// Exhaustive joint MAP over all source words: returns the best word and
/// the best and runner-up scores.
fn joint_map(
    llrs: &[f64],
    source: &SourceCodeSpec,
    channel: &ChannelCodeSpec,
) -> (BitBlock, f64, f64) {
    let ns = source.len();
    let mut best = (BitBlock::zeros(ns), f64::NEG_INFINITY);
    let mut second = f64::NEG_INFINITY;
    for word in 0..1u64 << ns {
        let s = BitBlock::from_word(word, ns);
        let x = dpolar_encode(&s, source, channel).unwrap();
        let score = channel_log_likelihood(llrs, &x) + source_log_prior(&s, source.p());
        if score > best.1 {
            second = best.1;
            best = (s, score);
        } else if score > second {
            second = score;
        }
    }
    (best.0, best.1, second)
}

fn toy_code() -> (SourceCodeSpec, ChannelCodeSpec) {
    (
        SourceCodeSpec::new(2, vec![0, 2], 0.07).unwrap(),
        ChannelCodeSpec::new(2, vec![1, 3]).unwrap(),
    )
}

fn random_codes(r: &mut ChaCha8Rng, max_ns_log: u32, max_nc_log: u32) -> (SourceCodeSpec, ChannelCodeSpec) {
    let ns_log = r.random_range(1..=max_ns_log);
    let nc_log = r.random_range(1..=max_nc_log);
    let (ns, nc) = (1usize << ns_log, 1usize << nc_log);
    let k = r.random_range(1..=ns.min(nc));
    let p = r.random_range(0.02..0.3);
    let source = SourceCodeSpec::new(ns_log, random_subset(r, ns, k), p).unwrap();
    let frozen: Vec<u8> = (0..nc - k).map(|_| r.random_range(0..2u8)).collect();
    let channel = ChannelCodeSpec::new(nc_log, random_subset(r, nc, k))
        .unwrap()
        .with_frozen_values(frozen)
        .unwrap();
    (source, channel)
}

fn noisy_frame(
    r: &mut ChaCha8Rng,
    source: &SourceCodeSpec,
    channel: &ChannelCodeSpec,
    ebn0_db: f64,
) -> (BitBlock, Vec<f64>) {
    let s = generate_source(source.len(), source.p(), r.random()).unwrap();
    let x = dpolar_encode(&s, source, channel).unwrap();
    let rate = source.len() as f64 / channel.len() as f64;
    (s, channel_pass(&x, ebn0_db, rate, r.random()).unwrap())
}

#[test]
fn decision_llr_worked_example() {
    let llrs = [1.0, 2.0, 3.0, 4.0];
    let l = leaf_llr(&llrs, &[], CheckNode::Exact);
    assert!((l - 0.634_688).abs() < 1e-6, "{}", l);
    assert!((brute_leaf_llr(&llrs, &[]) - l).abs() < 1e-12);
}

#[test]
fn decision_llrs_match_probability_domain() {
    let mut r = rng(1);
    for _ in 0..40 {
        let n = 1 << r.random_range(1..=4);
        let llrs = random_llrs(&mut r, n);
        let i = r.random_range(0..n);
        let decided: Vec<u8> = (0..i).map(|_| r.random_range(0..2u8)).collect();
        let a = leaf_llr(&llrs, &decided, CheckNode::Exact);
        let b = brute_leaf_llr(&llrs, &decided);
        assert!((a - b).abs() < 1e-9, "n={} i={} {} vs {}", n, i, a, b);
    }
}

#[test]
fn noise_free_round_trip() {
    let (source, channel) = toy_code();
    let trellis = CompoundTrellis::new(&source, &channel).unwrap();
    for word in 0..16 {
        let s = BitBlock::from_word(word, 4);
        let x = dpolar_encode(&s, &source, &channel).unwrap();
        let c_h = compress_source(&s, &source).unwrap();
        // only words determined by c_H survive noiseless decoding
        let out = jscl_decode(&noiseless_llrs(&x), &trellis, &source, DecoderOptions::new(16)).unwrap();
        let mut dec = SourceDecoder::new(&source, DecoderOptions::new(16)).unwrap();
        assert_eq!(out.s_hat, dec.decode(&c_h).unwrap().s_hat);
    }

    let source = construct_source_code(6, 40, 0.05).unwrap();
    let channel = ChannelCodeSpec::new(7, (50..90).collect()).unwrap();
    let trellis = CompoundTrellis::new(&source, &channel).unwrap();
    let mut joint = JointDecoder::new(&trellis, &source, DecoderOptions::new(8)).unwrap();
    let mut src = SourceDecoder::new(&source, DecoderOptions::new(8)).unwrap();
    for seed in 0..50 {
        let s = generate_source(64, 0.05, seed).unwrap();
        let x = dpolar_encode(&s, &source, &channel).unwrap();
        let expect = src.decode(&compress_source(&s, &source).unwrap()).unwrap().s_hat;
        assert_eq!(joint.decode(&noiseless_llrs(&x)).unwrap().s_hat, expect);
    }
}

#[test]
fn toy_code_full_list_is_joint_map() {
    let (source, channel) = toy_code();
    let trellis = CompoundTrellis::new(&source, &channel).unwrap();
    let mut dec = JointDecoder::new(&trellis, &source, DecoderOptions::new(16)).unwrap();
    let mut r = rng(2);
    for _ in 0..2000 {
        let (_, llrs) = noisy_frame(&mut r, &source, &channel, 1.0);
        let (map, best, second) = joint_map(&llrs, &source, &channel);
        let out = dec.decode(&llrs).unwrap();
        assert!(out.s_hat == map || best - second < TIE);
    }
}

#[test]
fn full_list_is_joint_map_on_random_codes() {
    let mut r = rng(3);
    for _ in 0..150 {
        let (source, channel) = random_codes(&mut r, 3, 4);
        let trellis = CompoundTrellis::new(&source, &channel).unwrap();
        let full = 1 << source.len();
        let mut dec = JointDecoder::new(&trellis, &source, DecoderOptions::new(full)).unwrap();
        for _ in 0..10 {
            let ebn0 = r.random_range(-2.0..4.0);
            let (_, llrs) = noisy_frame(&mut r, &source, &channel, ebn0);
            let (map, best, second) = joint_map(&llrs, &source, &channel);
            let out = dec.decode(&llrs).unwrap();
            assert!(out.s_hat == map || best - second < TIE);
            // with a full list the winning metric is exactly −ln P(x|y)·P(s)
            let x = dpolar_encode(&out.s_hat, &source, &channel).unwrap();
            let score = channel_log_likelihood(&llrs, &x) + source_log_prior(&out.s_hat, source.p());
            assert!((out.metric + score).abs() < 1e-9);
        }
    }
}

#[test]
fn list_of_one_reproduces_sc() {
    let mut r = rng(4);
    for _ in 0..60 {
        let n_log = r.random_range(1..=7);
        let n = 1usize << n_log;
        let k = r.random_range(1..=n);
        let frozen: Vec<u8> = (0..n - k).map(|_| r.random_range(0..2u8)).collect();
        let code = ChannelCodeSpec::new(n_log, random_subset(&mut r, n, k))
            .unwrap()
            .with_frozen_values(frozen)
            .unwrap();
        let llrs = random_llrs(&mut r, n);
        let sc = sc_decode(&llrs, &code).unwrap();
        let scl = scl_decode(&llrs, &code, DecoderOptions::new(1)).unwrap();
        assert_eq!(scl.u_hat, sc);
    }
}

#[test]
fn channel_full_list_is_ml() {
    let mut r = rng(5);
    for _ in 0..100 {
        let k = r.random_range(1..=8);
        let code = ChannelCodeSpec::new(3, random_subset(&mut r, 8, k)).unwrap();
        let llrs = random_llrs(&mut r, 8);
        let out = scl_decode(&llrs, &code, DecoderOptions::new(1 << k)).unwrap();
        let mut scores: Vec<(f64, u64)> = (0..1u64 << k)
            .map(|w| {
                let info = BitBlock::from_word(w, k);
                let x = dpolar::polar::channel_encode(&info, &code).unwrap().x;
                (channel_log_likelihood(&llrs, &x), w)
            })
            .collect();
        scores.sort_by(|a, b| b.0.total_cmp(&a.0));
        let ml = BitBlock::from_word(scores[0].1, k);
        assert!(out.info == ml || scores[0].0 - scores[1].0 < TIE);
    }
}

#[test]
fn source_full_list_is_map() {
    let mut r = rng(6);
    for _ in 0..60 {
        let n_log = r.random_range(1..=4);
        let n = 1usize << n_log;
        let k = r.random_range(0..n).max(1);
        let p = r.random_range(0.02..0.4);
        let source = SourceCodeSpec::new(n_log, random_subset(&mut r, n, k), p).unwrap();
        let s = generate_source(n, p, r.random()).unwrap();
        let c_h = compress_source(&s, &source).unwrap();
        let mut dec = SourceDecoder::new(&source, DecoderOptions::new(1 << (n - k))).unwrap();
        let out = dec.decode(&c_h).unwrap();
        let mut scores: Vec<(f64, u64)> = (0..1u64 << n)
            .filter(|&w| compress_source(&BitBlock::from_word(w, n), &source).unwrap() == c_h)
            .map(|w| (source_log_prior(BitBlock::from_word(w, n).as_slice(), p), w))
            .collect();
        scores.sort_by(|a, b| b.0.total_cmp(&a.0));
        let map = BitBlock::from_word(scores[0].1, n);
        let tied = scores.len() > 1 && scores[0].0 - scores[1].0 < TIE;
        assert!(out.s_hat == map || tied);
        assert!((out.metric + scores[0].0).abs() < 1e-9 || tied);
    }
}

#[test]
fn production_decoder_matches_naive_reference() {
    let mut r = rng(7);
    for case in 0..200 {
        let (source, channel) = random_codes(&mut r, 4, 5);
        let trellis = CompoundTrellis::new(&source, &channel).unwrap();
        let list = 1 << r.random_range(0..4);
        let kernel = if case % 4 == 3 { CheckNode::MinSum } else { CheckNode::Exact };
        let mut opts = DecoderOptions::new(list);
        opts.check_node = kernel;
        let mut dec = JointDecoder::new(&trellis, &source, opts).unwrap();
        for _ in 0..5 {
            let ebn0 = r.random_range(-2.0..3.0);
            let (_, llrs) = noisy_frame(&mut r, &source, &channel, ebn0);
            let out = dec.decode(&llrs).unwrap();
            let (s, metric) = jscl_decode_naive(&llrs, &trellis, &source, list, kernel).unwrap();
            assert_eq!(out.s_hat, s, "case {}", case);
            assert_eq!(out.metric.to_bits(), metric.to_bits(), "case {}", case);
        }
    }
}

#[test]
fn trace_monotone_pruned_and_counted() {
    let source = construct_source_code(5, 18, 0.07).unwrap();
    let channel = ChannelCodeSpec::new(6, random_subset(&mut rng(8), 64, 18)).unwrap();
    let trellis = CompoundTrellis::new(&source, &channel).unwrap();
    let list = 8;
    let mut dec = JointDecoder::new(&trellis, &source, DecoderOptions::new(list)).unwrap();
    let mut r = rng(9);
    for _ in 0..20 {
        let (_, llrs) = noisy_frame(&mut r, &source, &channel, 0.0);
        let (out, trace) = dec.decode_traced(&llrs).unwrap();
        assert_eq!(trace.len(), trellis.len());
        assert_eq!((out.terms.channel, out.terms.source), (64, 32));
        for rec in &trace {
            assert_eq!(rec.parent_jpms.len(), rec.surviving_jpms.len());
            for (parent, child) in rec.parent_jpms.iter().zip(&rec.surviving_jpms) {
                assert!(child >= parent);
            }
            let mut kept = rec.surviving_jpms.clone();
            kept.sort_by(f64::total_cmp);
            let mut all = rec.candidate_jpms.clone();
            all.sort_by(f64::total_cmp);
            all.truncate(list);
            assert_eq!(kept, all, "level {}", rec.phi);
        }
        let last = trace.last().unwrap();
        let best = last.surviving_jpms.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(out.metric, best);
    }
}

#[test]
fn full_list_metric_is_a_lower_bound() {
    let mut r = rng(10);
    for _ in 0..40 {
        let (source, channel) = random_codes(&mut r, 3, 4);
        let trellis = CompoundTrellis::new(&source, &channel).unwrap();
        let (_, llrs) = noisy_frame(&mut r, &source, &channel, 0.5);
        let full = jscl_decode(&llrs, &trellis, &source, DecoderOptions::new(1 << source.len())).unwrap();
        for list in [1, 2, 4] {
            let out = jscl_decode(&llrs, &trellis, &source, DecoderOptions::new(list)).unwrap();
            assert!(full.metric <= out.metric + 1e-12);
        }
    }
}

#[test]
fn separate_decoding_without_compression_is_channel_scl() {
    let mut r = rng(11);
    let source = SourceCodeSpec::new(4, (0..16).collect(), 0.1).unwrap();
    let channel = ChannelCodeSpec::new(5, random_subset(&mut r, 32, 16)).unwrap();
    for _ in 0..30 {
        let (_, llrs) = noisy_frame(&mut r, &source, &channel, 1.0);
        let info = scl_decode(&llrs, &channel, DecoderOptions::new(4)).unwrap().info;
        let s = sep_scl_decode(&llrs, &source, &channel, DecoderOptions::new(4)).unwrap();
        assert_eq!(s, polar_transform(&info).unwrap());
    }
}

#[test]
fn invalid_inputs_rejected() {
    let (source, channel) = toy_code();
    let trellis = CompoundTrellis::new(&source, &channel).unwrap();
    assert!(JointDecoder::new(&trellis, &source, DecoderOptions::new(0)).is_err());
    assert!(jscl_decode(&[0.0; 3], &trellis, &source, DecoderOptions::new(2)).is_err());
    assert!(scl_decode(&[0.0; 8], &channel, DecoderOptions::new(2)).is_err());
    let other = SourceCodeSpec::new(2, vec![0], 0.07).unwrap();
    assert!(sep_scl_decode(&[0.0; 4], &other, &channel, DecoderOptions::new(2)).is_err());
    assert!(JointDecoder::new(&trellis, &other, DecoderOptions::new(2)).is_err());
    let mut dec = SourceDecoder::new(&source, DecoderOptions::new(2)).unwrap();
    assert!(dec.decode(&BitBlock::zeros(3)).is_err());
}

/// `H(c_i | c_1^{i−1})` for every `i`, by exhaustive enumeration.
fn conditional_entropies(n_log: u32, p: f64) -> Vec<f64> {
    let n = 1usize << n_log;
    // probability of every c, indexed with c_1 as the most significant bit
    let mut mass = vec![0.0; 1 << n];
    for word in 0..1u64 << n {
        let s = BitBlock::from_word(word, n);
        let c = polar_transform(&s).unwrap();
        let key = c.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
        mass[key] = source_log_prior(&s, p).exp();
    }
    let entropy = |m: &[f64]| -> f64 { m.iter().filter(|&&q| q > 0.0).map(|&q| -q * q.log2()).sum() };
    let mut joint = vec![entropy(&mass)];
    while mass.len() > 1 {
        mass = mass.chunks(2).map(|c| c[0] + c[1]).collect();
        joint.push(entropy(&mass));
    }
    joint.reverse(); // joint[i] = H(c_1^i)
    (0..n).map(|i| joint[i + 1] - joint[i]).collect()
}

#[test]
fn source_construction_tracks_conditional_entropy() {
    for p in [0.04, 0.07, 0.11, 0.2] {
        for n_log in [2, 3] {
            let h = conditional_entropies(n_log, p);
            let n = h.len();
            for k in 1..n {
                let spec = construct_source_code(n_log, k, p).unwrap();
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| h[b].total_cmp(&h[a]));
                let threshold = h[order[k - 1]];
                for &i in spec.high_entropy() {
                    assert!(h[i] >= threshold - 1e-12, "p={} n={} k={}", p, n, k);
                }
            }
        }
    }
    for p in [0.04, 0.07] {
        let h = conditional_entropies(4, p);
        let mut sorted = h.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        for k in [4, 6, 8, 10] {
            let spec = construct_source_code(4, k, p).unwrap();
            let captured: f64 = spec.high_entropy().iter().map(|&i| h[i]).sum();
            let best: f64 = sorted[..k].iter().sum();
            assert!(captured >= 0.99 * best, "p={} k={}: {} of {}", p, k, captured, best);
        }
    }
}
