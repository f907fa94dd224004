//! Randomized invariants: converter geometry, distribution structure, the
//! entropy ordering chain, extractor linearity, and bit-container algebra.

use proptest::prelude::*;
use qrng_entropy::pipeline::{
    discard_msbs, entropy_after_discard, extract, lhl_output_length, BitString, ExtractorConfig,
    Provenance, SampleBlock,
};
use qrng_entropy::{
    discretize_conditional, discretize_marginal, min_entropy_average, min_entropy_unconditional,
    min_entropy_worst_case, qcnr_to_sigma_e, sigma_e_to_qcnr, AdcConfig, ExcursionBound,
    NoiseModel,
};

fn adc_strategy(max_bits: u32) -> impl Strategy<Value = AdcConfig> {
    (1..=max_bits, 0.2f64..8.0).prop_map(|(n, r)| AdcConfig::new(n, r).unwrap())
}

fn finite_model_strategy() -> impl Strategy<Value = NoiseModel> {
    (0.01f64..4.0, -0.5f64..0.5)
        .prop_map(|(sigma, d)| NoiseModel::from_sigma_e(sigma).unwrap().with_offset(d).unwrap())
}

proptest! {
    #[test]
    fn bin_centers_round_trip_through_digitize(adc in adc_strategy(10)) {
        for code in adc.min_code()..=adc.max_code() {
            prop_assert_eq!(adc.digitize(adc.bin_center(code)), code);
        }
    }

    #[test]
    fn digitize_is_monotone(adc in adc_strategy(12), a in -30.0f64..30.0, b in -30.0f64..30.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(adc.digitize(lo) <= adc.digitize(hi));
        prop_assert!((adc.min_code()..=adc.max_code()).contains(&adc.digitize(a)));
    }

    #[test]
    fn marginal_distributions_are_normalized(
        model in finite_model_strategy(),
        adc in adc_strategy(12),
    ) {
        let dist = discretize_marginal(&model, &adc).unwrap();
        prop_assert!((dist.total_mass() - 1.0).abs() < 1e-10);
        prop_assert!(dist.probabilities().iter().all(|&p| (0.0..=1.0).contains(&p)));
        let enumerated = dist.probabilities().iter().cloned().fold(0.0, f64::max);
        prop_assert_eq!(dist.max_probability(), enumerated);
    }

    #[test]
    fn centered_conditionals_mirror_about_the_acceptance_midpoint(
        sigma in 0.01f64..2.0,
        adc in adc_strategy(8),
        e in -8.0f64..8.0,
    ) {
        // Reflecting the shift about -delta/2 maps code i to -1 - i, which
        // swaps the two end bins and mirrors the interior.
        let model = NoiseModel::from_sigma_e(sigma).unwrap();
        let fwd = discretize_conditional(&model, &adc, e).unwrap();
        let bwd = discretize_conditional(&model, &adc, -adc.bin_width() - e).unwrap();
        for code in adc.min_code()..=adc.max_code() {
            let mirrored = -1 - code;
            prop_assert!(
                (fwd.probability(code) - bwd.probability(mirrored)).abs() < 1e-12,
                "code {} vs {}", code, mirrored
            );
        }
    }

    #[test]
    fn qcnr_and_sigma_conversions_round_trip(q in -60.0f64..60.0, sigma in 1e-3f64..1e3) {
        let back = sigma_e_to_qcnr(qcnr_to_sigma_e(q));
        prop_assert!((back - q).abs() < 1e-9);
        let back = qcnr_to_sigma_e(sigma_e_to_qcnr(sigma));
        prop_assert!((back - sigma).abs() < 1e-9 * sigma);
    }

    #[test]
    fn entropy_after_discard_stays_clamped(
        h in 0.0f64..24.0,
        n in 1u32..=24,
        drop in 0u32..8,
    ) {
        let keep = n.saturating_sub(drop).max(1);
        let kept = entropy_after_discard(h, n, keep);
        prop_assert!(kept >= 0.0);
        prop_assert!(kept <= keep as f64);
        prop_assert!(kept <= h);
    }

    #[test]
    fn leftover_hash_length_is_monotone(
        t in 0.0f64..5_000.0,
        extra in 0.0f64..500.0,
        log_eps_a in 1u32..200,
        log_eps_b in 1u32..200,
    ) {
        let (tight, loose) = if log_eps_a >= log_eps_b {
            (log_eps_a, log_eps_b)
        } else {
            (log_eps_b, log_eps_a)
        };
        let eps_tight = 2f64.powi(-(tight as i32));
        let eps_loose = 2f64.powi(-(loose as i32));
        let l = lhl_output_length(t, eps_tight).unwrap();
        prop_assert!(l <= t as usize);
        prop_assert!(lhl_output_length(t + extra, eps_tight).unwrap() >= l);
        prop_assert!(lhl_output_length(t, eps_loose).unwrap() >= l);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn entropy_figures_obey_the_ordering_chain(
        sigma in 0.05f64..2.0,
        d in -0.2f64..0.2,
        pad in 0.0f64..0.5,
        k in 8.0f64..20.0,
        n in 2u32..=6,
        r in 0.8f64..6.0,
    ) {
        let model = NoiseModel::from_sigma_e(sigma).unwrap().with_offset(d).unwrap();
        let adc = AdcConfig::new(n, r).unwrap();
        let bound = ExcursionBound::new(k, d.abs() + pad).unwrap();
        let worst = min_entropy_worst_case(&model, &adc, &bound);
        let avg = min_entropy_average(&model, &adc).unwrap();
        let unc = min_entropy_unconditional(&model, &adc);
        prop_assert!(worst >= 0.0);
        prop_assert!(worst <= avg + 1e-9, "worst {} avg {}", worst, avg);
        prop_assert!(avg <= unc + 1e-9, "avg {} unc {}", avg, unc);
        prop_assert!(unc <= n as f64 + 1e-9);
    }

    #[test]
    fn worst_case_entropy_shrinks_as_the_excursion_grows(
        sigma in 0.05f64..2.0,
        n in 2u32..=8,
        r in 0.8f64..6.0,
        k in 0.0f64..12.0,
        dk in 0.1f64..8.0,
        dm in 0.0f64..0.4,
        ddm in 0.05f64..0.4,
    ) {
        let model = NoiseModel::from_sigma_e(sigma).unwrap();
        let adc = AdcConfig::new(n, r).unwrap();
        let base = min_entropy_worst_case(&model, &adc, &ExcursionBound::new(k, dm).unwrap());
        let wider_k = min_entropy_worst_case(&model, &adc, &ExcursionBound::new(k + dk, dm).unwrap());
        let wider_d = min_entropy_worst_case(&model, &adc, &ExcursionBound::new(k, dm + ddm).unwrap());
        prop_assert!(wider_k <= base + 1e-12);
        prop_assert!(wider_d <= base + 1e-12);
    }

    #[test]
    fn average_entropy_does_not_grow_with_classical_noise_above_the_bin_scale(
        n in 4u32..=8,
        r in 1.0f64..5.0,
        d in -0.2f64..0.2,
        sigma in 0.05f64..2.0,
        grow in 1.05f64..4.0,
    ) {
        // Below the bin-width scale the conditional peak is pinned to the
        // aligned-bin value and smoothing can only lower it, so the trend is
        // only asserted once the noise spans at least two bins.
        let adc = AdcConfig::new(n, r).unwrap();
        let sigma = sigma.max(2.0 * adc.bin_width());
        let narrow = NoiseModel::from_sigma_e(sigma).unwrap().with_offset(d).unwrap();
        let wide = NoiseModel::from_sigma_e(sigma * grow).unwrap().with_offset(d).unwrap();
        let h_narrow = min_entropy_average(&narrow, &adc).unwrap();
        let h_wide = min_entropy_average(&wide, &adc).unwrap();
        prop_assert!(h_wide <= h_narrow + 1e-9, "{} -> {}", h_narrow, h_wide);
    }
}

proptest! {
    #[test]
    fn bitstring_round_trips_bytes(bytes in proptest::collection::vec(any::<u8>(), 0..200)) {
        let bits = BitString::from_bytes(&bytes, bytes.len() * 8);
        prop_assert_eq!(bits.len(), bytes.len() * 8);
        prop_assert_eq!(bits.to_bytes(), bytes.clone());
        for (i, &byte) in bytes.iter().enumerate() {
            for b in 0..8 {
                prop_assert_eq!(bits.get(i * 8 + b), byte >> b & 1 == 1);
            }
        }
    }

    #[test]
    fn bitstring_counts_match_naive_enumeration(
        bools in proptest::collection::vec(any::<bool>(), 1..300),
        lag in 0usize..310,
        start_frac in 0.0f64..1.0,
    ) {
        let bits = BitString::from_bools(&bools);
        prop_assert_eq!(bits.count_ones(), bools.iter().filter(|&&b| b).count());

        let naive_overlap = if lag < bools.len() {
            (0..bools.len() - lag).filter(|&i| bools[i] && bools[i + lag]).count()
        } else {
            0
        };
        prop_assert_eq!(bits.overlap_ones(lag), naive_overlap);

        let start = (start_frac * bools.len() as f64) as usize;
        let len = bools.len() - start;
        let naive_range = bools[start..].iter().filter(|&&b| b).count();
        prop_assert_eq!(bits.count_ones_range(start, len), naive_range);
    }

    #[test]
    fn bitstring_xor_is_pointwise(
        pair in proptest::collection::vec((any::<bool>(), any::<bool>()), 1..200),
    ) {
        let a = BitString::from_bools(&pair.iter().map(|p| p.0).collect::<Vec<_>>());
        let b = BitString::from_bools(&pair.iter().map(|p| p.1).collect::<Vec<_>>());
        let x = a.xor(&b);
        prop_assert_eq!(x.len(), pair.len());
        for (i, &(p, q)) in pair.iter().enumerate() {
            prop_assert_eq!(x.get(i), p ^ q);
        }
    }

    #[test]
    fn extracted_words_match_bit_reads(
        bools in proptest::collection::vec(any::<bool>(), 1..300),
        offset_frac in 0.0f64..1.0,
    ) {
        let bits = BitString::from_bools(&bools);
        let offset = (offset_frac * bools.len() as f64) as usize;
        let len = bools.len() - offset;
        let words = bits.extract_words(offset, len);
        prop_assert_eq!(words.len(), len.div_ceil(64));
        for (i, &b) in bools[offset..].iter().enumerate() {
            prop_assert_eq!(words[i / 64] >> (i % 64) & 1 == 1, b);
        }
        for i in len..words.len() * 64 {
            prop_assert_eq!(words[i / 64] >> (i % 64) & 1, 0);
        }
    }
}

fn byte_block(bytes: &[u8]) -> SampleBlock {
    SampleBlock {
        samples: bytes.iter().map(|&b| b as i8 as i32).collect(),
        adc: AdcConfig::new(8, 1.0).unwrap(),
        provenance: Provenance::Simulated,
        calibration: None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn toeplitz_extraction_is_linear_over_xor(
        x in proptest::collection::vec(any::<u8>(), 4..48),
        y_seed in any::<u64>(),
        in_words in 1usize..4,
        seed_entropy in any::<u64>(),
    ) {
        let in_bits = in_words * 16;
        let out_bits = in_bits / 2;
        let mut seed = BitString::new();
        let mut state = seed_entropy | 1;
        while seed.len() < in_bits + out_bits - 1 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            seed.push_bits(state, (in_bits + out_bits - 1 - seed.len()).min(64) as u32);
        }
        let cfg = ExtractorConfig::keep_half(out_bits as f64 * 2.0, 2f64.powi(-32), in_bits)
            .unwrap()
            .with_seed(seed)
            .unwrap();

        let mut y = x.clone();
        let mut state = y_seed;
        for b in &mut y {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            *b = (state >> 32) as u8;
        }
        let z: Vec<u8> = x.iter().zip(&y).map(|(a, b)| a ^ b).collect();

        let out_x = extract(&byte_block(&x), &cfg).unwrap();
        let out_y = extract(&byte_block(&y), &cfg).unwrap();
        let out_z = extract(&byte_block(&z), &cfg).unwrap();
        prop_assert_eq!(out_x.blocks, x.len() * 8 / in_bits);
        prop_assert_eq!(&out_x.bits.xor(&out_y.bits), &out_z.bits);
    }

    #[test]
    fn msb_discard_keeps_the_low_bits_and_the_bin_width(
        codes in proptest::collection::vec(-2048i32..2048, 1..100),
        keep in 1u32..=12,
    ) {
        let block = SampleBlock {
            samples: codes.clone(),
            adc: AdcConfig::new(12, 3.0).unwrap(),
            provenance: Provenance::Simulated,
            calibration: None,
        };
        let kept = discard_msbs(&block, keep).unwrap();
        prop_assert_eq!(kept.adc.n_bits(), keep);
        prop_assert!((kept.adc.bin_width() - block.adc.bin_width()).abs() < 1e-15);
        for (&before, &after) in codes.iter().zip(&kept.samples) {
            let mask = (1i64 << keep) - 1;
            let low = (before as i64) & mask;
            let expected = if low >= 1i64 << (keep - 1) { low - (1i64 << keep) } else { low };
            prop_assert_eq!(after as i64, expected);
            prop_assert!((kept.adc.min_code()..=kept.adc.max_code()).contains(&after));
        }
    }
}
