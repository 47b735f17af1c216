use proptest::prelude::*;
use qdeploy::fairness::{bias_pairs_in, estimate_lipschitz, is_fair, pair_distances, PairSelection};
use qdeploy::noise::DeviceModel;
use qdeploy::qnn::{build_qnn, synthetic_dataset, Arch, EvalMode};

fn setup(params: &[f64], seed: u64) -> (qdeploy::qnn::QnnModel, qdeploy::qnn::Dataset) {
    let model = build_qnn(Arch::Dac22, 2, 1, params).unwrap();
    (model, synthetic_dataset(2, 10, 0, 0.0, seed).unwrap())
}

fn params() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, Arch::Dac22.param_count(2, 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_pair_respects_k_hat(p in params(), seed in any::<u64>()) {
        let (model, data) = setup(&p, seed);
        let dev = DeviceModel::builtin("toy4").unwrap();
        let est = estimate_lipschitz(&model, &dev, &data, PairSelection::Exhaustive, EvalMode::default()).unwrap();
        for pair in &est.pairs {
            prop_assert!(pair.output_distance <= est.k_hat * pair.input_distance + 1e-9);
        }
    }

    #[test]
    fn fair_models_have_no_bias_pairs(p in params(), seed in any::<u64>(), eps in 0.01f64..1.0, delta in 0.01f64..1.0) {
        let (model, data) = setup(&p, seed);
        let ideal = DeviceModel::ideal(2);
        let pairs = pair_distances(&model, &ideal, &data, PairSelection::Exhaustive, EvalMode::default()).unwrap();
        let k = qdeploy::fairness::lipschitz_from_pairs(pairs.clone()).k_hat;
        if is_fair(k, eps, delta) {
            prop_assert!(bias_pairs_in(&pairs, eps, delta).unwrap().is_empty());
        }
    }

    #[test]
    fn bias_pairs_monotone_in_thresholds(p in params(), seed in any::<u64>(), eps in 0.05f64..1.0, delta in 0.05f64..1.0, shrink in 0.1f64..1.0) {
        let (model, data) = setup(&p, seed);
        let ideal = DeviceModel::ideal(2);
        let pairs = pair_distances(&model, &ideal, &data, PairSelection::Exhaustive, EvalMode::default()).unwrap();
        let base = bias_pairs_in(&pairs, eps, delta).unwrap();
        let looser_delta = bias_pairs_in(&pairs, eps, delta * shrink).unwrap();
        let tighter_eps = bias_pairs_in(&pairs, eps * shrink, delta).unwrap();
        prop_assert!(base.iter().all(|b| looser_delta.contains(b)));
        prop_assert!(tighter_eps.iter().all(|b| base.contains(b)));
    }
}
