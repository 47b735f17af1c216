//! Gradient-free fitter used to produce small trained fixtures.

use std::f64::consts::PI;

use rand::Rng as _;

use super::{build_qnn, Arch, Dataset, QnnModel, Split};
use crate::error::{Error, Result};
use crate::quantum::{measure, run_statevector, Shots, StateVector};
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub sweeps: usize,
    /// Trial offsets, each tried with both signs on every coordinate.
    pub steps: Vec<f64>,
    pub measure_qubit: usize,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            sweeps: 2,
            steps: vec![PI / 2.0, PI / 4.0, PI / 8.0, PI / 16.0],
            measure_qubit: 0,
            seed: 0,
        }
    }
}

/// Training accuracy plus a small margin term that breaks plateaus.
fn objective(model: &QnnModel, data: &Dataset) -> Result<f64> {
    let rows = data.rows(Split::Train);
    let mut correct = 0usize;
    let mut margin = 0.0;
    for &r in &rows {
        let c = model.full_circuit(&data.features[r])?;
        let sv = run_statevector(&c, &StateVector::zero_state(model.num_qubits))?;
        let score = measure(&sv, &[model.measure_qubit], Shots::Exact)?.prob(1);
        let y = data.labels[r];
        correct += usize::from(u8::from(score >= 0.5) == y);
        margin += if y == 1 { score - 0.5 } else { 0.5 - score };
    }
    let n = rows.len() as f64;
    Ok(correct as f64 / n + 1e-3 * margin / n)
}

/// Coordinate descent of noiseless training accuracy.
pub fn fit_params(arch: Arch, layers: usize, data: &Dataset, cfg: &FitConfig) -> Result<QnnModel> {
    if data.train.is_empty() {
        return Err(Error::Dataset("train split is empty".into()));
    }
    let d = data.num_features();
    let mut rng = seed::rng(cfg.seed);
    let mut params: Vec<f64> = (0..arch.param_count(d, layers)).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let build = |p: &[f64]| build_qnn(arch, d, layers, p)?.with_measure_qubit(cfg.measure_qubit);
    let mut best = objective(&build(&params)?, data)?;
    for _ in 0..cfg.sweeps {
        for &step in &cfg.steps {
            for i in 0..params.len() {
                for delta in [step, -step] {
                    let old = params[i];
                    params[i] = old + delta;
                    let f = objective(&build(&params)?, data)?;
                    if f > best {
                        best = f;
                    } else {
                        params[i] = old;
                    }
                }
            }
        }
    }
    build(&params)
}
