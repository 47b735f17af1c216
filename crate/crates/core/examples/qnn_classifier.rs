//! Fit a small classifier and compare ideal and noisy accuracy.

use qdeploy::noise::DeviceModel;
use qdeploy::qnn::{accuracy, fit_params, predict, synthetic_dataset, Arch, EvalMode, FitConfig, Split};

fn main() -> qdeploy::Result<()> {
    let data = synthetic_dataset(4, 48, 48, 0.05, 1)?;
    let ideal = DeviceModel::ideal(4);
    let device = DeviceModel::builtin("toy4")?;
    let mode = EvalMode::default();
    for arch in [Arch::C14, Arch::Qmlp, Arch::Date22, Arch::Dac22] {
        let model = fit_params(arch, 2, &data, &FitConfig::default())?;
        println!(
            "{:>6}: train {:.3}  test {:.3}  test on toy4 {:.3}",
            arch.name(),
            accuracy(&model, &data, Split::Train, &ideal, mode)?,
            accuracy(&model, &data, Split::Test, &ideal, mode)?,
            accuracy(&model, &data, Split::Test, &device, mode)?,
        );
        let p = predict(&model, &data.features[0], &device, mode)?;
        println!("        row 0 → label {} (score {:.3}, truth {})", p.label, p.score, data.labels[0]);
    }
    Ok(())
}
