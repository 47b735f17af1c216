//! Bias pairs, Lipschitz estimates and the depolarized relation.

use qdeploy::fairness::{estimate_lipschitz, find_bias_pairs, group_sensitivity, is_fair, noisy_lipschitz, PairSelection};
use qdeploy::noise::DeviceModel;
use qdeploy::qnn::{fit_params, synthetic_dataset, Arch, EvalMode, FitConfig};

fn main() -> qdeploy::Result<()> {
    let data = synthetic_dataset(2, 16, 0, 0.0, 4)?;
    let model = fit_params(Arch::Dac22, 1, &data, &FitConfig::default())?;
    let mode = EvalMode::default();
    let ideal = DeviceModel::ideal(2);
    let base = estimate_lipschitz(&model, &ideal, &data, PairSelection::Exhaustive, mode)?;
    println!("noiseless k_hat {:.4} at {:?}", base.k_hat, base.argmax_pair);
    for p in [0.1, 0.3] {
        let dev = DeviceModel::new("uniform", 2, &[((0, 1), p)])?;
        let k = estimate_lipschitz(&model, &dev, &data, PairSelection::Exhaustive, mode)?.k_hat;
        println!("p = {p}: k_hat {k:.4}, predicted {:.4}", noisy_lipschitz(base.k_hat, p)?);
    }
    let pairs = find_bias_pairs(&model, &ideal, &data, 0.3, 0.05, mode)?;
    println!("{} bias pairs at eps 0.3, delta 0.05", pairs.len());
    println!("(0.3, 0.05)-fair: {}", is_fair(base.k_hat, 0.3, 0.05));
    for g in group_sensitivity(&model, &ideal, &data, "f0", mode)? {
        println!("group {}: {:.4} ({:.2}x)", g.group, g.mean_output_distance, g.relative);
    }
    Ok(())
}
