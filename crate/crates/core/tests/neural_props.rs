use ndarray::{Array1, Array2};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ruspeech_core::neural::{
    attention_weights, grad_check, layer_norm, ln_lstm_step, AttentionParams, LnLstmParams, GRAD_CHECK_OPS,
};

#[test]
fn gradients_match_finite_differences_over_100_seeds() {
    for op in GRAD_CHECK_OPS {
        let mut worst: f64 = 0.0;
        for seed in 0..100 {
            let report = grad_check(op, seed, 1e-5).unwrap();
            assert_eq!(report.op, op);
            if op == "embed" {
                assert_eq!(report.max_rel_err, 0.0, "seed {seed}");
            }
            assert!(report.max_rel_err <= 1e-4, "{op} seed {seed}: {:?}", report.tensors);
            worst = worst.max(report.max_rel_err);
        }
        eprintln!("{op}: worst relative error {worst:.3e}");
    }
}

#[test]
fn report_is_deterministic() {
    assert_eq!(grad_check("ln_lstm_step", 9, 1e-5).unwrap(), grad_check("ln_lstm_step", 9, 1e-5).unwrap());
}

fn vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-50.0f64..50.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn layer_norm_moments(v in prop::collection::vec(-1e3f64..1e3, 2..64)) {
        let x = Array1::from_vec(v);
        let (n, sigma) = layer_norm(x.view());
        let len = n.len() as f64;
        let mean = n.sum() / len;
        prop_assert!(mean.abs() <= 1e-9);
        let var = n.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / len;
        if sigma > 1e-5 {
            prop_assert!((var - 1.0).abs() <= 1e-6);
        } else {
            prop_assert!(var <= 1.0);
        }
    }

    #[test]
    fn constant_block_normalizes_to_zero(c in -1e3f64..1e3, n in 1usize..32) {
        let (v, _) = layer_norm(Array1::from_elem(n, c).view());
        prop_assert!(v.iter().all(|x| x.abs() <= 1e-9));
    }

    #[test]
    fn attention_is_a_distribution(seed in any::<u64>(), t in 1usize..20, q in vector(3)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = AttentionParams::random(3, 4, 5, &mut rng);
        let memory = Array2::from_shape_fn((t, 4), |(i, j)| ((i * 7 + j * 3) % 11) as f64 - 5.0);
        let w = attention_weights(&Array1::from_vec(q), &memory, &p).unwrap();
        prop_assert_eq!(w.len(), t);
        prop_assert!(w.iter().all(|v| *v >= 0.0 && *v <= 1.0));
        prop_assert!((w.sum() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn lstm_outputs_are_bounded(seed in any::<u64>(), x in vector(3), h in vector(4)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = LnLstmParams::random(3, 4, &mut rng);
        let (h1, c1) = ln_lstm_step(&Array1::from_vec(x), &Array1::from_vec(h), &Array1::zeros(4), &p).unwrap();
        prop_assert!(h1.iter().all(|v| v.abs() < 1.0));
        prop_assert!(c1.iter().all(|v| v.abs() < 1.0));
    }
}
