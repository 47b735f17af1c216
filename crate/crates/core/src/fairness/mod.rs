//! Individual fairness: bias pairs, empirical Lipschitz constants, and the
//! error-rate proxy.
//!
//! Inputs are compared by the trace distance of their encoded states,
//! outputs by the total-variation distance of the measured distributions.

mod report;

pub use report::{write_bias_pairs_csv, write_group_csv, write_lipschitz_csv};

use rand::seq::index::sample;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::noise::{mitigate_readout, simulate_noisy_with, DeviceModel};
use crate::qnn::{encode_state, Dataset, EvalMode, QnnModel};
use crate::quantum::{total_variation, trace_distance_pure, OutcomeDistribution, Shots, StateVector};
use crate::seed;

/// Inputs closer than this are treated as identical.
pub const DEGENERATE_DISTANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairDistance {
    pub i: usize,
    pub j: usize,
    pub input_distance: f64,
    pub output_distance: f64,
}

impl PairDistance {
    pub fn ratio(&self) -> Option<f64> {
        (self.input_distance > DEGENERATE_DISTANCE).then(|| self.output_distance / self.input_distance)
    }
}

/// A pair within `eps` at the input whose outputs differ by at least `delta`.
pub type BiasPair = PairDistance;

#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzEstimate {
    /// Largest output/input ratio seen, clamped to 1.
    pub k_hat: f64,
    pub argmax_pair: Option<(usize, usize)>,
    pub pairs_examined: usize,
    /// Pairs skipped because their encodings coincide.
    pub degenerate_pairs: usize,
    pub pairs: Vec<PairDistance>,
}

/// Which row pairs to examine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairSelection {
    Exhaustive,
    Sample { count: usize, seed: u64 },
}

/// Noisy output distribution of `model` on `x`, readout mitigated.
pub fn output_distribution(model: &QnnModel, x: &[f64], device: &DeviceModel, mode: EvalMode) -> Result<OutcomeDistribution> {
    let c = model.full_circuit(x)?;
    let q = [model.measure_qubit];
    let raw = simulate_noisy_with(mode.backend, &c, device, &StateVector::zero_state(model.num_qubits), &q, mode.shots)?;
    mitigate_readout(&raw, device, &q)
}

fn row_outputs(model: &QnnModel, device: &DeviceModel, data: &Dataset, mode: EvalMode) -> Result<Vec<OutcomeDistribution>> {
    (0..data.len())
        .into_par_iter()
        .map(|r| {
            let m = match mode.shots {
                Shots::Sampled { shots, seed: s } => EvalMode {
                    shots: Shots::Sampled {
                        shots,
                        seed: seed::derive_indexed(s, &[r as u64]),
                    },
                    ..mode
                },
                Shots::Exact => mode,
            };
            output_distribution(model, &data.features[r], device, m)
        })
        .collect()
}

fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect()
}

fn select_pairs(n: usize, selection: PairSelection) -> Vec<(usize, usize)> {
    let all = all_pairs(n);
    match selection {
        PairSelection::Exhaustive => all,
        PairSelection::Sample { count, seed: s } if count < all.len() => {
            let mut idx = sample(&mut seed::rng(s), all.len(), count).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(|k| all[k]).collect()
        }
        PairSelection::Sample { .. } => all,
    }
}

/// Input and output distances for the selected pairs of rows of `data`.
pub fn pair_distances(
    model: &QnnModel,
    device: &DeviceModel,
    data: &Dataset,
    selection: PairSelection,
    mode: EvalMode,
) -> Result<Vec<PairDistance>> {
    if data.len() < 2 {
        return Err(Error::Dataset("fairness analysis needs at least two rows".into()));
    }
    let states: Vec<StateVector> = data.features.iter().map(|x| encode_state(x)).collect::<Result<_>>()?;
    let outputs = row_outputs(model, device, data, mode)?;
    select_pairs(data.len(), selection)
        .into_par_iter()
        .map(|(i, j)| {
            Ok(PairDistance {
                i,
                j,
                input_distance: trace_distance_pure(&states[i], &states[j])?,
                output_distance: total_variation(&outputs[i], &outputs[j])?,
            })
        })
        .collect()
}

fn check_threshold(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} = {v} must lie in (0, 1]")))
    }
}

/// Bias pairs among precomputed distances.
pub fn bias_pairs_in(pairs: &[PairDistance], eps: f64, delta: f64) -> Result<Vec<BiasPair>> {
    check_threshold("eps", eps)?;
    check_threshold("delta", delta)?;
    Ok(pairs
        .iter()
        .filter(|p| p.input_distance <= eps && p.output_distance >= delta)
        .copied()
        .collect())
}

/// Every unordered row pair with input distance ≤ `eps` and output distance
/// ≥ `delta`.
pub fn find_bias_pairs(
    model: &QnnModel,
    device: &DeviceModel,
    data: &Dataset,
    eps: f64,
    delta: f64,
    mode: EvalMode,
) -> Result<Vec<BiasPair>> {
    check_threshold("eps", eps)?;
    check_threshold("delta", delta)?;
    bias_pairs_in(&pair_distances(model, device, data, PairSelection::Exhaustive, mode)?, eps, delta)
}

/// Max-ratio estimate over precomputed distances.
pub fn lipschitz_from_pairs(pairs: Vec<PairDistance>) -> LipschitzEstimate {
    let mut k_hat = 0.0;
    let mut argmax = None;
    let mut degenerate = 0;
    for p in &pairs {
        match p.ratio() {
            Some(r) if r > k_hat || argmax.is_none() => {
                k_hat = r.max(k_hat);
                argmax = Some((p.i, p.j));
            }
            Some(_) => {}
            None => degenerate += 1,
        }
    }
    LipschitzEstimate {
        k_hat: k_hat.min(1.0),
        argmax_pair: argmax,
        pairs_examined: pairs.len() - degenerate,
        degenerate_pairs: degenerate,
        pairs,
    }
}

/// Empirical lower bound on the Lipschitz constant.
pub fn estimate_lipschitz(
    model: &QnnModel,
    device: &DeviceModel,
    data: &Dataset,
    selection: PairSelection,
    mode: EvalMode,
) -> Result<LipschitzEstimate> {
    Ok(lipschitz_from_pairs(pair_distances(model, device, data, selection, mode)?))
}

/// Lipschitz constant under a global depolarizing rate `p`.
pub fn noisy_lipschitz(k_star: f64, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("rate {p} outside [0, 1]")));
    }
    if !(k_star > 0.0 && k_star <= 1.0) {
        return Err(Error::invalid(format!("Lipschitz constant {k_star} outside (0, 1]")));
    }
    Ok((1.0 - p) * k_star)
}

/// `(eps, delta)`-fair iff `delta ≥ K·eps`.
pub fn is_fair(k_star: f64, eps: f64, delta: f64) -> bool {
    delta >= k_star * eps
}

/// The error rate itself serves as the fairness score.
pub fn fairness_score(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("rate {p} outside [0, 1]")));
    }
    Ok(p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupSensitivity {
    pub group: String,
    /// Mean output distance over rows when only this group's features are
    /// mirrored (`x → 1 − x`).
    pub mean_output_distance: f64,
    /// `mean_output_distance` divided by the reference group's.
    pub relative: f64,
}

/// Per-group output sensitivity, normalized to `reference`.
pub fn group_sensitivity(
    model: &QnnModel,
    device: &DeviceModel,
    data: &Dataset,
    reference: &str,
    mode: EvalMode,
) -> Result<Vec<GroupSensitivity>> {
    if data.is_empty() {
        return Err(Error::Dataset("empty dataset".into()));
    }
    if !data.groups.iter().any(|(g, _)| g == reference) {
        return Err(Error::invalid(format!("unknown reference group {reference}")));
    }
    let base = row_outputs(model, device, data, mode)?;
    let means: Vec<f64> = data
        .groups
        .iter()
        .map(|(_, members)| {
            let total = (0..data.len())
                .into_par_iter()
                .map(|r| {
                    let mut x = data.features[r].clone();
                    for &k in members {
                        x[k] = 1.0 - x[k];
                    }
                    total_variation(&base[r], &output_distribution(model, &x, device, mode)?)
                })
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .sum::<f64>();
            Ok(total / data.len() as f64)
        })
        .collect::<Result<_>>()?;
    let ref_idx = data.groups.iter().position(|(g, _)| g == reference).expect("checked");
    let denom = means[ref_idx];
    Ok(data
        .groups
        .iter()
        .zip(&means)
        .map(|((g, _), &m)| GroupSensitivity {
            group: g.clone(),
            mean_output_distance: m,
            relative: if denom > 0.0 { m / denom } else { f64::NAN },
        })
        .collect())
}
