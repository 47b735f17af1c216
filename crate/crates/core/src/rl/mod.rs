//! Deep-Q search over per-partition candidate choices.
//!
//! A state is a partial deployment; its features are the real and imaginary
//! parts of the partial circuit's unitary. Actions index a global list of
//! all candidates; each state may only pick from its partition's slice.

mod network;
mod reward;

pub use network::{Optimizer, OptimizerKind, ValueNetwork};
pub use reward::{
    compute_reward, deployment_circuit, evaluate_circuit, DeploymentEnv, FairnessSource, Fill, PrecomputedRewards,
    RewardBreakdown, RewardSettings, RewardSource, RewardWeights,
};

use std::collections::HashMap;
use std::ops::Range;
use std::path::Path;
use std::sync::Arc;

use rand::seq::index::sample;
use rand::Rng as _;

use crate::circuit::Partition;
use crate::error::{Error, Result};
use crate::quantum::{circuit_unitary, ComplexMatrix, UnitaryMatrix, C64};
use crate::seed::{self, SeedStreams};
use crate::synthesis::CandidateList;

/// Real/imaginary split of a unitary, laid out `(row, col, channel)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateTensor {
    dim: usize,
    data: Vec<f64>,
}

impl StateTensor {
    pub fn from_unitary(u: &UnitaryMatrix) -> Self {
        let dim = u.dim();
        let data = u.matrix().data().iter().flat_map(|z| [z.re, z.im]).collect();
        Self { dim, data }
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.dim, self.dim, 2)
    }

    pub fn get(&self, row: usize, col: usize, channel: usize) -> f64 {
        self.data[(row * self.dim + col) * 2 + channel]
    }

    pub fn flat(&self) -> &[f64] {
        &self.data
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.data
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        let data = self.data.chunks_exact(2).map(|c| C64::new(c[0], c[1])).collect();
        ComplexMatrix::from_vec(self.dim, self.dim, data).expect("square by construction")
    }
}

/// Per-partition candidate unitaries lifted to the full register.
#[derive(Debug, Clone)]
pub struct ActionSpace {
    num_qubits: usize,
    lifted: Vec<Vec<UnitaryMatrix>>,
    offsets: Vec<usize>,
}

impl ActionSpace {
    pub fn new(num_qubits: usize, lifted: Vec<Vec<UnitaryMatrix>>) -> Result<Self> {
        if lifted.is_empty() || lifted.iter().any(|l| l.is_empty()) {
            return Err(Error::invalid("every partition needs at least one candidate"));
        }
        if lifted.iter().flatten().any(|u| u.num_qubits() != num_qubits) {
            return Err(Error::invalid("candidate unitaries must span the full register"));
        }
        let mut offsets = vec![0];
        for l in &lifted {
            offsets.push(offsets.last().expect("seeded") + l.len());
        }
        Ok(Self {
            num_qubits,
            lifted,
            offsets,
        })
    }

    pub fn from_candidates(partitions: &[Partition], lists: &[CandidateList], num_qubits: usize) -> Result<Self> {
        if partitions.len() != lists.len() {
            return Err(Error::DimensionMismatch {
                expected: partitions.len(),
                actual: lists.len(),
            });
        }
        let lifted = partitions
            .iter()
            .zip(lists)
            .map(|(p, l)| {
                l.candidates
                    .iter()
                    .map(|c| circuit_unitary(&p.lift(&c.circuit, num_qubits)?))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Self::new(num_qubits, lifted)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_partitions(&self) -> usize {
        self.lifted.len()
    }

    pub fn list_sizes(&self) -> Vec<usize> {
        self.lifted.iter().map(Vec::len).collect()
    }

    /// Total candidate count, the value network's output width.
    pub fn total(&self) -> usize {
        *self.offsets.last().expect("non-empty")
    }

    pub fn input_width(&self) -> usize {
        2 << (2 * self.num_qubits)
    }

    pub fn slice(&self, partition: usize) -> Result<Range<usize>> {
        if partition >= self.num_partitions() {
            return Err(Error::InvalidState("terminal state has no actions".into()));
        }
        Ok(self.offsets[partition]..self.offsets[partition + 1])
    }
}

/// A partial deployment.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub next_partition: usize,
    pub selections: Vec<usize>,
    pub partial_unitary: UnitaryMatrix,
}

impl AgentState {
    pub fn blank(num_qubits: usize) -> Self {
        Self {
            next_partition: 0,
            selections: Vec::new(),
            partial_unitary: UnitaryMatrix::identity(num_qubits),
        }
    }

    pub fn is_terminal(&self, space: &ActionSpace) -> bool {
        self.next_partition >= space.num_partitions()
    }

    /// Choose candidate `ordinal` for the next partition.
    pub fn advance(&self, space: &ActionSpace, ordinal: usize) -> Result<Self> {
        let list = space
            .lifted
            .get(self.next_partition)
            .ok_or_else(|| Error::InvalidState("terminal state has no actions".into()))?;
        let u = list
            .get(ordinal)
            .ok_or_else(|| Error::invalid(format!("candidate {ordinal} out of range")))?;
        let mut selections = self.selections.clone();
        selections.push(ordinal);
        Ok(Self {
            next_partition: self.next_partition + 1,
            selections,
            partial_unitary: u.compose(&self.partial_unitary)?,
        })
    }
}

pub fn state_tensor(s: &AgentState) -> StateTensor {
    StateTensor::from_unitary(&s.partial_unitary)
}

pub fn action_slice(s: &AgentState, space: &ActionSpace) -> Result<Range<usize>> {
    space.slice(s.next_partition)
}

/// ε-greedy within `slice`; greedy ties go to the lowest index.
pub fn select_action(q: &[f64], slice: Range<usize>, epsilon: f64, rng: &mut seed::Rng) -> Result<usize> {
    if slice.is_empty() || slice.end > q.len() {
        return Err(Error::invalid(format!("bad action slice {slice:?} for {} values", q.len())));
    }
    if rng.gen::<f64>() < epsilon {
        return Ok(rng.gen_range(slice));
    }
    Ok(argmax(q, slice))
}

fn argmax(q: &[f64], slice: Range<usize>) -> usize {
    let mut best = slice.start;
    for i in slice {
        if q[i] > q[best] {
            best = i;
        }
    }
    best
}

fn slice_max(q: &[f64], slice: Range<usize>) -> f64 {
    q[argmax(q, slice)]
}

pub fn td_target(reward: f64, next_q_max: Option<f64>, gamma: f64) -> f64 {
    match next_q_max {
        Some(q) => reward + gamma * q,
        None => reward,
    }
}

pub fn td_loss(prediction: f64, target: f64) -> f64 {
    (target - prediction).powi(2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Arc<Vec<f64>>,
    pub action: usize,
    pub reward: f64,
    /// Next state's features and action slice; `None` when terminal.
    pub next: Option<(Arc<Vec<f64>>, Range<usize>)>,
}

/// Fixed-capacity FIFO of transitions.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    head: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity: capacity.max(1),
            items: Vec::new(),
            head: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.head] = t;
            self.head = (self.head + 1) % self.capacity;
        }
    }

    /// Up to `n` distinct transitions.
    pub fn sample(&self, n: usize, rng: &mut seed::Rng) -> Vec<&Transition> {
        let n = n.min(self.items.len());
        sample(rng, self.items.len(), n).into_iter().map(|i| &self.items[i]).collect()
    }
}

/// One update of `policy` on the mean squared TD error of `batch`, with
/// targets from `target`. Returns the loss before the update.
pub fn train_step(
    policy: &mut ValueNetwork,
    target: &ValueNetwork,
    batch: &[&Transition],
    gamma: f64,
    lr: f64,
    opt: &mut Optimizer,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::invalid("empty training batch"));
    }
    let (loss, grad) = td_loss_and_gradient(policy, target, batch, gamma)?;
    if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::Diverged(format!("TD loss {loss} over a batch of {}", batch.len())));
    }
    opt.step(policy.params_mut(), &grad, lr);
    Ok(loss)
}

/// Mean squared TD error and its gradient with respect to `policy`.
pub fn td_loss_and_gradient(
    policy: &ValueNetwork,
    target: &ValueNetwork,
    batch: &[&Transition],
    gamma: f64,
) -> Result<(f64, Vec<f64>)> {
    let b = batch.len() as f64;
    let mut grad = vec![0.0; policy.params().len()];
    let mut loss = 0.0;
    for t in batch {
        let next_max = match &t.next {
            Some((s, slice)) => Some(slice_max(&target.forward(s)?, slice.clone())),
            None => None,
        };
        let y = td_target(t.reward, next_max, gamma);
        let a = t.action;
        let out = policy.backward(
            &t.state,
            |q| {
                let mut g = vec![0.0; q.len()];
                g[a] = 2.0 * (q[a] - y) / b;
                g
            },
            &mut grad,
        )?;
        loss += td_loss(out[a], y);
    }
    Ok((loss / b, grad))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Episodes; one episode is one complete deployment.
    pub iterations: usize,
    pub learning_rate: f64,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_final: f64,
    pub target_sync_period: usize,
    pub replay_capacity: usize,
    pub batch_size: usize,
    /// Leading episodes that act uniformly at random; `None` means a tenth
    /// of `iterations`.
    pub warmup_episodes: Option<usize>,
    pub hidden: Vec<usize>,
    pub optimizer: OptimizerKind,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            iterations: 1000,
            learning_rate: 1e-3,
            gamma: 0.99,
            epsilon_start: 0.05,
            epsilon_final: 1e-2,
            target_sync_period: 10,
            replay_capacity: 1000,
            batch_size: 32,
            warmup_episodes: None,
            hidden: vec![256, 128],
            optimizer: OptimizerKind::adam(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::Config(format!("gamma {} outside [0, 1)", self.gamma)));
        }
        if !unit(self.epsilon_start) || !unit(self.epsilon_final) {
            return Err(Error::Config("epsilons must lie in [0, 1]".into()));
        }
        if self.iterations == 0 || self.batch_size == 0 || self.target_sync_period == 0 {
            return Err(Error::Config("iterations, batch_size and target_sync_period must be positive".into()));
        }
        if !(self.learning_rate >= 0.0) {
            return Err(Error::Config(format!("learning rate {} is negative", self.learning_rate)));
        }
        Ok(())
    }

    pub fn epsilon_at(&self, episode: usize) -> f64 {
        if self.iterations <= 1 {
            return self.epsilon_start;
        }
        let t = episode.min(self.iterations - 1) as f64 / (self.iterations - 1) as f64;
        self.epsilon_start + (self.epsilon_final - self.epsilon_start) * t
    }

    pub fn warmup(&self) -> usize {
        self.warmup_episodes.unwrap_or(self.iterations / 10)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeStats {
    pub episode: usize,
    /// Mean pre-update TD loss of the episode's training steps.
    pub loss: f64,
    /// Mean over decision steps of the largest q-value in the acting slice.
    pub max_q: f64,
    /// Sum of the per-step rewards.
    pub episode_reward: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub best_selection: Vec<usize>,
    pub best_reward: f64,
    pub curves: Vec<EpisodeStats>,
    pub policy: ValueNetwork,
}

/// Episode loop: random first action, ε-greedy afterwards, one replay
/// training step per environment step, periodic target sync.
pub fn run_search(space: &ActionSpace, rewards: &mut dyn RewardSource, cfg: &TrainConfig) -> Result<SearchResult> {
    cfg.validate()?;
    let streams = SeedStreams::new(cfg.seed);
    let mut sizes = vec![space.input_width()];
    sizes.extend(&cfg.hidden);
    sizes.push(space.total());
    let mut policy = ValueNetwork::new(&sizes, streams.init())?;
    let mut target = policy.clone();
    let mut opt = Optimizer::new(cfg.optimizer, policy.params().len());
    let mut explore = seed::rng(streams.exploration());
    let mut replay_rng = seed::rng(streams.replay());
    let mut replay = ReplayBuffer::new(cfg.replay_capacity);
    let mut tensors: HashMap<Vec<usize>, (Arc<Vec<f64>>, AgentState)> = HashMap::new();
    let blank = AgentState::blank(space.num_qubits());
    tensors.insert(Vec::new(), (Arc::new(state_tensor(&blank).into_flat()), blank));

    let depth = space.num_partitions();
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut curves = Vec::with_capacity(cfg.iterations);
    for episode in 0..cfg.iterations {
        let eps = cfg.epsilon_at(episode);
        let random_phase = episode < cfg.warmup();
        let mut selections: Vec<usize> = Vec::with_capacity(depth);
        let (mut losses, mut max_qs, mut total_reward) = (Vec::new(), Vec::new(), 0.0);
        for step in 0..depth {
            let slice = space.slice(step)?;
            let (features, state) = tensors[&selections].clone();
            let q = policy.forward(&features)?;
            max_qs.push(slice_max(&q, slice.clone()));
            let action = if step == 0 || random_phase {
                explore.gen_range(slice.clone())
            } else {
                select_action(&q, slice.clone(), eps, &mut explore)?
            };
            selections.push(action - slice.start);
            let reward = rewards.reward(&selections)?;
            total_reward += reward;
            if !tensors.contains_key(&selections) {
                let next = state.advance(space, action - slice.start)?;
                tensors.insert(selections.clone(), (Arc::new(state_tensor(&next).into_flat()), next));
            }
            let next = (step + 1 < depth).then(|| {
                let nslice = space.slice(step + 1).expect("non-terminal");
                (tensors[&selections].0.clone(), nslice)
            });
            replay.push(Transition {
                state: features,
                action,
                reward,
                next,
            });
            if step + 1 == depth && best.as_ref().is_none_or(|(_, b)| reward > *b) {
                best = Some((selections.clone(), reward));
            }
            let batch = replay.sample(cfg.batch_size, &mut replay_rng);
            losses.push(train_step(&mut policy, &target, &batch, cfg.gamma, cfg.learning_rate, &mut opt)?);
        }
        if (episode + 1) % cfg.target_sync_period == 0 {
            target.copy_from(&policy);
        }
        curves.push(EpisodeStats {
            episode,
            loss: losses.iter().sum::<f64>() / losses.len() as f64,
            max_q: max_qs.iter().sum::<f64>() / max_qs.len() as f64,
            episode_reward: total_reward,
        });
    }
    let (best_selection, best_reward) = best.expect("at least one episode");
    Ok(SearchResult {
        best_selection,
        best_reward,
        curves,
        policy,
    })
}

pub fn write_curves_csv(path: impl AsRef<Path>, curves: &[EpisodeStats]) -> Result<()> {
    let path = path.as_ref();
    let wrap = |e: csv::Error| Error::io(path, e.into());
    let mut w = csv::Writer::from_path(path).map_err(wrap)?;
    w.write_record(["episode", "loss", "max_q", "episode_reward"]).map_err(wrap)?;
    for c in curves {
        w.write_record([
            c.episode.to_string(),
            crate::circuit::fmt_f64(c.loss),
            crate::circuit::fmt_f64(c.max_q),
            crate::circuit::fmt_f64(c.episode_reward),
        ])
        .map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `partition,candidate` rows.
pub fn write_selection(path: impl AsRef<Path>, selection: &[usize]) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::from("partition,candidate\n");
    for (i, s) in selection.iter().enumerate() {
        text.push_str(&format!("{i},{s}\n"));
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_selection(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1).filter(|(_, l)| !l.trim().is_empty()) {
        let bad = || Error::Parse {
            line: i + 1,
            msg: format!("expected `{},<ordinal>`", out.len()),
        };
        let (p, c) = line.split_once(',').ok_or_else(bad)?;
        if p.trim().parse::<usize>().ok() != Some(out.len()) {
            return Err(bad());
        }
        out.push(c.trim().parse().map_err(|_| bad())?);
    }
    Ok(out)
}
