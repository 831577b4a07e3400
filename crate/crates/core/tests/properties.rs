//! Property tests over the algebraic invariants of channels, series and
//! allocation.

use std::collections::BTreeMap;

use proptest::prelude::*;

use fpec_core::{
    allocate_shots, fit_zero_noise, GammaSeries, PauliString, StochasticPauliChannel,
    TruncationPolicy, ZnePoint,
};

fn arb_channel() -> impl Strategy<Value = StochasticPauliChannel> {
    (1usize..=2, 0.0f64..0.3, proptest::collection::vec(0.01f64..1.0, 1..8), any::<u64>())
        .prop_map(|(n, eps, weights, seed)| {
            let words = 4usize.pow(n as u32);
            let total: f64 = weights.iter().sum();
            let mut probs = BTreeMap::new();
            let mut index = (seed % (words as u64 - 1) + 1) as usize;
            for w in &weights {
                probs.insert(PauliString::from_index(n, index), eps * w / total);
                index = index % (words - 1) + 1;
            }
            StochasticPauliChannel::from_probs(n, probs).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inversion_round_trips(channel in arb_channel()) {
        let quasi = channel.invert().unwrap();
        let product = quasi.ptm_diagonal().entrywise_product(&channel.ptm_diagonal());
        for entry in product {
            prop_assert!((entry - 1.0).abs() < 1e-10);
        }
        if !quasi.terms.is_empty() {
            prop_assert!((quasi.coeff_norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn series_norm_matches_closed_form(
        eps1 in 0.0f64..0.4,
        eps2 in 0.0f64..0.4,
        l in 0usize..60,
    ) {
        let series = GammaSeries::new(eps1, eps2, l).unwrap();
        let direct: f64 = (0..=l).map(|k| series.gamma(k).abs()).sum();
        let closed = series.total_norm();
        prop_assert!((direct - closed).abs() <= 1e-10 * closed);
        let signed: f64 = (0..=l).map(|k| series.gamma(k)).sum();
        let expected = (1.0 + eps1 - eps2).powi(l as i32);
        prop_assert!((signed - expected).abs() <= 1e-10 * closed);
    }

    #[test]
    fn allocation_conserves_shots(
        eps1 in 0.001f64..0.3,
        eps2 in 0.001f64..0.3,
        l in 1usize..40,
        truncation in 0usize..6,
        budget in 1u64..20_000,
    ) {
        let series = GammaSeries::new(eps1, eps2, l).unwrap();
        let truncation = truncation.min(l);
        let budget = budget.max(truncation as u64 + 1);
        let plan = allocate_shots(&series, truncation, budget, TruncationPolicy::ShotLimited)
            .unwrap();
        prop_assert_eq!(plan.shots.iter().sum::<u64>(), budget);
        prop_assert!(plan.shots.iter().all(|&m| m >= 1));
    }

    #[test]
    fn exponential_fit_inverts_synthetic_decay(
        amplitude in 0.1f64..2.0,
        rate in -0.3f64..0.8,
        gap in 0.5f64..5.0,
    ) {
        let y = |scale: f64| amplitude * (-rate * scale).exp();
        let points = vec![
            ZnePoint { scale: 1.0, mean: y(1.0), std_error: None },
            ZnePoint { scale: 1.0 + gap, mean: y(1.0 + gap), std_error: None },
        ];
        let (_, extrapolated, _) = fit_zero_noise(&points).unwrap();
        prop_assert!((extrapolated - amplitude).abs() < 1e-9 * amplitude.max(1.0));
    }
}
