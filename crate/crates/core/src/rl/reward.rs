//! Deployment rewards: a weighted sum of the error-rate fairness proxy and
//! accuracy, with memoization on selection prefixes.

use std::collections::HashMap;

use crate::circuit::{recombine, Circuit, Partition};
use crate::error::{Error, Result};
use crate::fairness::fairness_score;
use crate::noise::{accumulate_p, estimate_p_detailed, Backend, DeviceModel};
use crate::qnn::{accuracy, Dataset, EvalMode, QnnModel, Split};
use crate::seed;
use crate::synthesis::CandidateList;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardWeights {
    pub alpha: f64,
    pub beta: f64,
}

impl RewardWeights {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha >= 0.0 && beta >= 0.0) || alpha + beta == 0.0 {
            return Err(Error::invalid(format!("reward weights ({alpha}, {beta}) must be non-negative, not both zero")));
        }
        Ok(Self { alpha, beta })
    }
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self { alpha: 0.5, beta: 0.5 }
    }
}

/// `α·fairness + β·accuracy`.
pub fn compute_reward(fairness: f64, accuracy: f64, w: RewardWeights) -> f64 {
    w.alpha * fairness + w.beta * accuracy
}

/// Anything that scores a selection prefix (one candidate ordinal per
/// leading partition).
pub trait RewardSource {
    fn reward(&mut self, selections: &[usize]) -> Result<f64>;
}

/// Rewards looked up from a table that must cover every visited prefix.
#[derive(Debug, Clone, Default)]
pub struct PrecomputedRewards {
    table: HashMap<Vec<usize>, f64>,
}

impl PrecomputedRewards {
    pub fn new(table: HashMap<Vec<usize>, f64>) -> Self {
        Self { table }
    }

    /// Evaluate `f` on every non-empty prefix of the selection space.
    pub fn enumerate(list_sizes: &[usize], mut f: impl FnMut(&[usize]) -> Result<f64>) -> Result<Self> {
        let mut table = HashMap::new();
        let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
        for &size in list_sizes {
            let mut next = Vec::with_capacity(frontier.len() * size);
            for prefix in &frontier {
                for c in 0..size {
                    let mut s = prefix.clone();
                    s.push(c);
                    table.insert(s.clone(), f(&s)?);
                    next.push(s);
                }
            }
            frontier = next;
        }
        Ok(Self { table })
    }

    pub fn get(&self, selections: &[usize]) -> Option<f64> {
        self.table.get(selections).copied()
    }

    /// Best complete selection, lowest ordinals on ties.
    pub fn best_complete(&self, depth: usize) -> Option<(Vec<usize>, f64)> {
        let mut best: Option<(Vec<usize>, f64)> = None;
        let mut keys: Vec<&Vec<usize>> = self.table.keys().filter(|k| k.len() == depth).collect();
        keys.sort();
        for k in keys {
            let r = self.table[k];
            if best.as_ref().is_none_or(|(_, b)| r > *b) {
                best = Some((k.clone(), r));
            }
        }
        best
    }
}

impl RewardSource for PrecomputedRewards {
    fn reward(&mut self, selections: &[usize]) -> Result<f64> {
        self.get(selections)
            .ok_or_else(|| Error::invalid(format!("no precomputed reward for {selections:?}")))
    }
}

/// Completion rule for partitions not yet selected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fill {
    /// The partition's exact original sub-circuit.
    #[default]
    Original,
    /// Nothing.
    Identity,
}

/// How the fairness term is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FairnessSource {
    /// Twirled estimation circuits with the given twirls and shots.
    Estimated { twirls: usize, shots: usize },
    /// Closed-form layer accumulation.
    Accumulated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardSettings {
    pub weights: RewardWeights,
    pub fill: Fill,
    pub fairness: FairnessSource,
    pub eval: EvalMode,
    pub split: Split,
    pub seed: u64,
}

impl Default for RewardSettings {
    fn default() -> Self {
        Self {
            weights: RewardWeights::default(),
            fill: Fill::Original,
            fairness: FairnessSource::Estimated { twirls: 16, shots: 8192 },
            eval: EvalMode::default(),
            split: Split::Train,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardBreakdown {
    pub accuracy: f64,
    pub p: f64,
    pub reward: f64,
}

/// Circuit for a selection prefix, the rest filled per `fill`.
pub fn deployment_circuit(
    partitions: &[Partition],
    lists: &[CandidateList],
    selections: &[usize],
    fill: Fill,
    num_qubits: usize,
) -> Result<Circuit> {
    if selections.len() > partitions.len() || lists.len() != partitions.len() {
        return Err(Error::invalid("selection longer than the partition list"));
    }
    let empties: Vec<Circuit> = partitions.iter().map(|p| Circuit::new(p.width())).collect();
    let mut chosen: Vec<&Circuit> = Vec::with_capacity(partitions.len());
    for (i, p) in partitions.iter().enumerate() {
        let c = match selections.get(i) {
            Some(&s) => {
                &lists[i]
                    .get(s)
                    .ok_or_else(|| Error::invalid(format!("candidate {s} out of range for partition {i}")))?
                    .circuit
            }
            None => match fill {
                Fill::Original => &p.sub_circuit,
                Fill::Identity => &empties[i],
            },
        };
        chosen.push(c);
    }
    recombine(partitions, &chosen, num_qubits)
}

/// Accuracy, error rate and reward of a deployed circuit.
pub fn evaluate_circuit(
    circuit: &Circuit,
    model: &QnnModel,
    device: &DeviceModel,
    data: &Dataset,
    settings: &RewardSettings,
    seed: u64,
) -> Result<RewardBreakdown> {
    let deployed = model.with_circuit(circuit.clone())?;
    let acc = accuracy(&deployed, data, settings.split, device, settings.eval)?;
    let p = match settings.fairness {
        FairnessSource::Estimated { twirls, shots } => {
            let backend = settings.eval.backend;
            estimate_p_detailed(circuit, device, twirls, shots, seed, backend)?.p_hat
        }
        FairnessSource::Accumulated => accumulate_p(circuit, device)?.p_total,
    };
    let fairness = fairness_score(p)?;
    Ok(RewardBreakdown {
        accuracy: acc,
        p,
        reward: compute_reward(fairness, acc, settings.weights),
    })
}

/// Rewards by simulation, memoized on the selection tuple.
pub struct DeploymentEnv<'a> {
    pub partitions: &'a [Partition],
    pub lists: &'a [CandidateList],
    pub model: &'a QnnModel,
    pub device: &'a DeviceModel,
    pub data: &'a Dataset,
    pub settings: RewardSettings,
    cache: HashMap<Vec<usize>, RewardBreakdown>,
}

impl<'a> DeploymentEnv<'a> {
    pub fn new(
        partitions: &'a [Partition],
        lists: &'a [CandidateList],
        model: &'a QnnModel,
        device: &'a DeviceModel,
        data: &'a Dataset,
        settings: RewardSettings,
    ) -> Result<Self> {
        if partitions.len() != lists.len() {
            return Err(Error::DimensionMismatch {
                expected: partitions.len(),
                actual: lists.len(),
            });
        }
        if matches!(settings.eval.backend, Backend::Density) {
            crate::quantum::check_density_cap(model.num_qubits)?;
        }
        Ok(Self {
            partitions,
            lists,
            model,
            device,
            data,
            settings,
            cache: HashMap::new(),
        })
    }

    pub fn evaluations(&self) -> usize {
        self.cache.len()
    }

    /// Seed for estimating one selection, independent of visiting order.
    fn selection_seed(&self, selections: &[usize]) -> u64 {
        let idx: Vec<u64> = std::iter::once(selections.len() as u64)
            .chain(selections.iter().map(|&s| s as u64))
            .collect();
        seed::derive_indexed(self.settings.seed, &idx)
    }

    pub fn breakdown(&mut self, selections: &[usize]) -> Result<RewardBreakdown> {
        if let Some(b) = self.cache.get(selections) {
            return Ok(*b);
        }
        let circuit = deployment_circuit(self.partitions, self.lists, selections, self.settings.fill, self.model.num_qubits)?;
        let b = evaluate_circuit(&circuit, self.model, self.device, self.data, &self.settings, self.selection_seed(selections))?;
        self.cache.insert(selections.to_vec(), b);
        Ok(b)
    }
}

impl RewardSource for DeploymentEnv<'_> {
    fn reward(&mut self, selections: &[usize]) -> Result<f64> {
        Ok(self.breakdown(selections)?.reward)
    }
}
