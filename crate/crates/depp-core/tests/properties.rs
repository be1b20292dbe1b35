//! Property-based tests over random states, parameters and parser input.

use depp_core::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn gram_state(reals: &[f64]) -> DensityMatrix {
    let g = DMatrix::<C64>::from_fn(4, 4, |i, j| {
        Complex64::new(reals[2 * (4 * i + j)], reals[2 * (4 * i + j) + 1])
    });
    let m = &g * g.adjoint() + DMatrix::<C64>::identity(4, 4) * Complex64::new(1e-9, 0.0);
    let tr = m.diagonal().sum().re;
    DensityMatrix::new(m / Complex64::new(tr, 0.0)).unwrap()
}

proptest! {
    #[test]
    fn purification_is_deterministic_for_any_state(reals in prop::collection::vec(-1.0f64..1.0, 32)) {
        let rho_p = gram_state(&reals);
        let spatial = make_spatial_state(&SourceConfig::ideal()).to_density();
        let rr = one_step_depp(&rho_p, &spatial).unwrap();
        prop_assert!((rr.acceptance_probability - 1.0).abs() < 1e-10);
        for rec in &rr.patterns {
            if let Some(f) = rec.corrected_fidelity {
                prop_assert!((f - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn pattern_distribution_is_normalized(reals in prop::collection::vec(-1.0f64..1.0, 32),
                                          r in 0.0f64..3.0,
                                          theta in 0.0f64..std::f64::consts::TAU) {
        let rho_p = gram_state(&reals);
        let spatial = make_spatial_state(&SourceConfig::new(r, theta).unwrap()).to_density();
        let rr = one_step_depp(&rho_p, &spatial).unwrap();
        let total: f64 = rr.pattern_probabilities().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn recurrence_stays_in_range(f in 0.0f64..=1.0) {
        let fp = bennett_recurrence(f);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&fp));
        let p = bennett_success_probability(f);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&p));
    }

    #[test]
    fn parser_never_panics(text in "\\PC{0,512}") {
        let _ = parse_scenario(&text);
    }

    #[test]
    fn parser_handles_arbitrary_bytes(bytes in prop::collection::vec(any::<u8>(), 0..512)) {
        let text = String::from_utf8_lossy(&bytes);
        let _ = parse_scenario(&text);
    }

    #[test]
    fn wilson_interval_contains_the_point_estimate(count in 0u64..1000, extra in 0u64..1000) {
        let shots = count + extra.max(1);
        let (lo, hi) = wilson_interval(count, shots);
        let phat = count as f64 / shots as f64;
        prop_assert!(lo <= phat + 1e-12 && phat <= hi + 1e-12);
        prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
    }

    #[test]
    fn sampling_counts_always_total_shots(shots in 1u64..5000, seed in any::<u64>()) {
        let spatial = make_spatial_state(&SourceConfig::ideal()).to_density();
        let rr = one_step_depp(&DensityMatrix::maximally_mixed(4), &spatial).unwrap();
        let report = sample_patterns(&rr, shots, seed).unwrap();
        prop_assert_eq!(report.counts.iter().sum::<u64>(), shots);
    }

    #[test]
    fn canonical_json_is_idempotent(f in 0.0f64..1.0, shots in 0u64..100, seed in any::<u64>()) {
        let f1 = (1.0 - f) / 3.0;
        let text = format!(
            "[noise.polarization]\nmodel = bell_diagonal\nF = {f}\nF1 = {f1}\nF2 = {f1}\nF3 = {f1}\n[protocol]\nname = one_step_depp\n[run]\nshots = {shots}\nseed = {seed}\n"
        );
        // formatted weights may not sum to 1 exactly at this precision
        if let Ok(cfg) = parse_scenario(&text) {
            let out = run_scenario(&cfg, None).unwrap();
            let first = serialize_result(&cfg, &out);
            let parsed: serde_json::Value = serde_json::from_str(&first).unwrap();
            prop_assert_eq!(canonical_json(&parsed), first);
        }
    }
}
