//! Approximate re-synthesis of partitions into candidate lists.
//!
//! For every CNOT budget `k` and CNOT placement pattern a [`SynthesisTemplate`]
//! is fitted to the partition's target unitary. Every fit that lands within
//! `eps_syn` becomes a [`Candidate`].

mod io;
mod optimize;
mod template;

pub use io::{read_candidate_lists, write_candidate_lists};
pub use optimize::{Descent, OptimizerConfig};
pub use template::{block_pairs, SynthesisTemplate};

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::circuit::{cnot_count, depth, Circuit, Partition};
use crate::error::{Error, Result};
use crate::quantum::{circuit_unitary, UnitaryMatrix, C64};
use crate::seed;

/// √(max(0, 1 − |Tr(u†v)|²/d²)); zero iff `u = v` up to global phase.
///
/// Evaluated as `(1 − |z|)(1 + |z|)` with `1 − |z| = ‖W − e^{iφ}I‖²/2d`,
/// `W = u†v`, `z = Tr W / d`, which avoids cancellation near zero.
pub fn hs_distance(u: &UnitaryMatrix, v: &UnitaryMatrix) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            actual: v.dim(),
        });
    }
    let d = u.dim();
    let w = u.matrix().adjoint().matmul(v.matrix())?;
    let tr = w.trace();
    let phase = if tr.norm() > 0.0 { tr / tr.norm() } else { C64::new(1.0, 0.0) };
    let mut gap = 0.0;
    for r in 0..d {
        for c in 0..d {
            let z = if r == c { w[(r, c)] - phase } else { w[(r, c)] };
            gap += z.norm_sqr();
        }
    }
    let one_minus = (gap / (2.0 * d as f64)).min(1.0);
    let abs_z = (tr.norm() / d as f64).min(1.0);
    Ok((one_minus * (1.0 + abs_z)).max(0.0).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub circuit: Circuit,
    pub distance: f64,
    pub cnots: usize,
    pub depth: usize,
}

impl Candidate {
    /// Wrap a circuit, measuring its distance to `target` from scratch.
    pub fn evaluate(circuit: Circuit, target: &UnitaryMatrix) -> Result<Self> {
        let distance = hs_distance(target, &circuit_unitary(&circuit)?)?;
        Ok(Self {
            cnots: cnot_count(&circuit),
            depth: depth(&circuit),
            circuit,
            distance,
        })
    }
}

/// Candidates for one partition sorted by CNOT count, then distance.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateList {
    pub partition_index: usize,
    pub candidates: Vec<Candidate>,
}

impl CandidateList {
    pub fn new(partition_index: usize, mut candidates: Vec<Candidate>) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::invalid(format!("candidate list for partition {partition_index} is empty")));
        }
        sort_candidates(&mut candidates);
        Ok(Self {
            partition_index,
            candidates,
        })
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn get(&self, ordinal: usize) -> Option<&Candidate> {
        self.candidates.get(ordinal)
    }
}

fn sort_candidates(c: &mut [Candidate]) {
    c.sort_by(|a, b| a.cnots.cmp(&b.cnots).then(a.distance.total_cmp(&b.distance)));
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisConfig {
    pub eps_syn: f64,
    /// Largest CNOT budget; `None` picks 4 for 2-qubit and 8 for 3-qubit blocks.
    pub k_max: Option<usize>,
    pub optimizer: OptimizerConfig,
    pub max_candidates: usize,
    pub max_patterns: usize,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self {
            eps_syn: 1e-2,
            k_max: None,
            optimizer: OptimizerConfig::default(),
            max_candidates: 9,
            max_patterns: 20,
        }
    }
}

impl SynthesisConfig {
    pub fn with_eps(eps_syn: f64) -> Self {
        Self {
            eps_syn,
            ..Self::default()
        }
    }

    pub fn k_max_for(&self, width: usize) -> usize {
        match (width, self.k_max) {
            (0 | 1, _) => 0,
            (_, Some(k)) => k,
            (2, None) => 4,
            (_, None) => 8,
        }
    }
}

/// Fit `template` to `target` from several seeded starts.
///
/// Returns the best fit if its independently recomputed distance is within
/// `eps_syn`. Starts stop early once one reaches `eps_syn / 10`.
pub fn fit_template(
    template: &SynthesisTemplate,
    target: &UnitaryMatrix,
    eps_syn: f64,
    opt: &OptimizerConfig,
    seed: u64,
) -> Result<Option<Candidate>> {
    if eps_syn <= 0.0 || eps_syn.is_nan() {
        return Err(Error::invalid(format!("eps_syn must be positive, got {eps_syn}")));
    }
    let objective = optimize::Objective::new(template, target)?;
    let stop = (eps_syn / 10.0).powi(2);
    let mut best: Option<optimize::Fit> = None;
    for start in 0..opt.starts.max(1) {
        let x0 = optimize::random_start(template.num_params(), seed::derive_indexed(seed, &[start as u64]));
        let fit = optimize::minimize(&objective, x0, opt, stop)?;
        let better = best.as_ref().is_none_or(|b| fit.infidelity < b.infidelity);
        if better {
            best = Some(fit);
        }
        if best.as_ref().is_some_and(|b| b.infidelity < stop) {
            break;
        }
    }
    let best = best.expect("at least one start");
    let candidate = Candidate::evaluate(template.build(&best.params)?, target)?;
    Ok((candidate.distance <= eps_syn).then_some(candidate))
}

/// CNOT placement patterns for a block of `width` qubits with `k` CNOTs.
pub fn placement_patterns(width: usize, k: usize, max_patterns: usize, seed: u64) -> Vec<Vec<(usize, usize)>> {
    let pairs = block_pairs(width);
    if k == 0 {
        return vec![Vec::new()];
    }
    if pairs.len() == 1 {
        return vec![vec![pairs[0]; k]];
    }
    let total = (pairs.len() as u128).checked_pow(k as u32);
    let decode = |mut code: u128| {
        let mut seq = vec![pairs[0]; k];
        for slot in seq.iter_mut().rev() {
            *slot = pairs[(code % pairs.len() as u128) as usize];
            code /= pairs.len() as u128;
        }
        seq
    };
    match total {
        Some(t) if t <= max_patterns as u128 => (0..t).map(decode).collect(),
        _ => {
            let mut rng = seed::rng(seed);
            let mut seen = std::collections::BTreeSet::new();
            let mut out = Vec::with_capacity(max_patterns);
            while out.len() < max_patterns {
                let seq: Vec<(usize, usize)> = (0..k).map(|_| *pairs.choose(&mut rng).expect("pairs")).collect();
                if seen.insert(seq.clone()) {
                    out.push(seq);
                }
            }
            out
        }
    }
}

/// Candidate list for one partition.
///
/// Budgets are tried in increasing `k`; once the list holds
/// `max_candidates` entries no larger budget can enter the truncated sorted
/// list, so the scan stops there.
pub fn generate_candidates(p: &Partition, cfg: &SynthesisConfig, seed: u64) -> Result<CandidateList> {
    let width = p.width();
    let k_max = cfg.k_max_for(width);
    let mut found: Vec<Candidate> = Vec::new();
    for k in 0..=k_max {
        let patterns = placement_patterns(width, k, cfg.max_patterns, seed::derive_indexed(seed, &[k as u64, u64::MAX]));
        let fits: Vec<Result<Option<Candidate>>> = patterns
            .into_par_iter()
            .enumerate()
            .map(|(idx, placement)| {
                let template = SynthesisTemplate::new(width, placement)?;
                fit_template(
                    &template,
                    &p.target_unitary,
                    cfg.eps_syn,
                    &cfg.optimizer,
                    seed::derive_indexed(seed, &[k as u64, idx as u64]),
                )
            })
            .collect();
        for fit in fits {
            if let Some(c) = fit? {
                if !found.iter().any(|f| f.circuit == c.circuit) {
                    found.push(c);
                }
            }
        }
        if found.len() >= cfg.max_candidates {
            break;
        }
    }
    if found.is_empty() {
        return Err(Error::SynthesisFailed {
            partition: p.index,
            eps_syn: cfg.eps_syn,
            k_max,
        });
    }
    sort_candidates(&mut found);
    found.truncate(cfg.max_candidates);
    CandidateList::new(p.index, found)
}

/// Candidate lists for all partitions, in partition order.
pub fn synthesize_all(partitions: &[Partition], cfg: &SynthesisConfig, seed: u64) -> Result<Vec<CandidateList>> {
    partitions
        .par_iter()
        .map(|p| generate_candidates(p, cfg, seed::derive_indexed(seed, &[p.index as u64])))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{partition, Gate};
    use crate::quantum::{ComplexMatrix, GateKind};

    fn cnot_target() -> UnitaryMatrix {
        UnitaryMatrix::new(GateKind::Cnot.matrix(&[])).unwrap()
    }

    #[test]
    fn hs_distance_examples() {
        let i4 = UnitaryMatrix::identity(2);
        assert_eq!(hs_distance(&i4, &i4).unwrap(), 0.0);
        let cz = UnitaryMatrix::new(ComplexMatrix::diag(&[1.0.into(), 1.0.into(), 1.0.into(), (-1.0).into()])).unwrap();
        assert!((hs_distance(&i4, &cz).unwrap() - 0.75f64.sqrt()).abs() < 1e-12);
        let phased = UnitaryMatrix::new(ComplexMatrix::identity(4).scale(C64::from_polar(1.0, 0.7))).unwrap();
        assert!(hs_distance(&i4, &phased).unwrap() < 1e-12);
        assert!(hs_distance(&i4, &UnitaryMatrix::identity(1)).is_err());
    }

    #[test]
    fn fit_identity_with_no_cnots() {
        let t = SynthesisTemplate::new(2, vec![]).unwrap();
        let c = fit_template(&t, &UnitaryMatrix::identity(2), 1e-5, &OptimizerConfig::default(), 1)
            .unwrap()
            .expect("identity is a product of local gates");
        assert!(c.distance < 1e-6);
    }

    #[test]
    fn cnot_needs_one_cnot() {
        let t0 = SynthesisTemplate::new(2, vec![]).unwrap();
        assert!(fit_template(&t0, &cnot_target(), 1e-2, &OptimizerConfig::default(), 3).unwrap().is_none());
        let t1 = SynthesisTemplate::new(2, vec![(0, 1)]).unwrap();
        let c = fit_template(&t1, &cnot_target(), 1e-5, &OptimizerConfig::default(), 3).unwrap().unwrap();
        assert!(c.distance < 1e-6);
        assert_eq!(c.cnots, 1);
    }

    #[test]
    fn fit_rejects_bad_budget_and_dims() {
        let t = SynthesisTemplate::new(2, vec![]).unwrap();
        assert!(fit_template(&t, &UnitaryMatrix::identity(2), 0.0, &OptimizerConfig::default(), 0).is_err());
        assert!(fit_template(&t, &UnitaryMatrix::identity(3), 1e-2, &OptimizerConfig::default(), 0).is_err());
    }

    #[test]
    fn candidate_lists_examples() {
        let id = Circuit::from_gates(2, vec![Gate::u3(0, 0.0, 0.0, 0.0), Gate::u3(1, 0.0, 0.0, 0.0)]).unwrap();
        let p = &partition(&id, 2).unwrap()[0];
        let cfg = SynthesisConfig {
            k_max: Some(2),
            ..SynthesisConfig::with_eps(1e-2)
        };
        let list = generate_candidates(p, &cfg, 11).unwrap();
        assert_eq!(list.candidates[0].cnots, 0);

        let cx = Circuit::from_gates(2, vec![Gate::cnot(0, 1)]).unwrap();
        let p = &partition(&cx, 2).unwrap()[0];
        let cfg = SynthesisConfig {
            k_max: Some(2),
            ..SynthesisConfig::with_eps(1e-5)
        };
        let list = generate_candidates(p, &cfg, 11).unwrap();
        assert_eq!(list.candidates.iter().map(|c| c.cnots).min(), Some(1));
        for w in list.candidates.windows(2) {
            assert!((w[0].cnots, w[0].distance) <= (w[1].cnots, w[1].distance));
        }
    }

    #[test]
    fn empty_result_is_an_error() {
        let cx = Circuit::from_gates(2, vec![Gate::cnot(0, 1)]).unwrap();
        let p = &partition(&cx, 2).unwrap()[0];
        let cfg = SynthesisConfig {
            k_max: Some(0),
            ..SynthesisConfig::with_eps(1e-3)
        };
        assert!(matches!(generate_candidates(p, &cfg, 0), Err(Error::SynthesisFailed { .. })));
    }

    #[test]
    fn placement_patterns_enumerate_then_sample() {
        assert_eq!(placement_patterns(2, 3, 20, 0), vec![vec![(0, 1); 3]]);
        assert_eq!(placement_patterns(3, 2, 20, 0).len(), 9);
        let sampled = placement_patterns(3, 4, 20, 7);
        assert_eq!(sampled.len(), 20);
        assert_eq!(sampled, placement_patterns(3, 4, 20, 7));
        assert_eq!(placement_patterns(3, 0, 20, 0), vec![Vec::new()]);
    }
}
