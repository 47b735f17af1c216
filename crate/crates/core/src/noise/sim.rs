use rayon::prelude::*;

use super::{accumulate_p, estimation_circuit, randomized_compile, DeviceModel, NoiseTrace};
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::quantum::state::{marginalize, sample_or_exact};
use crate::quantum::{
    check_density_cap, run_statevector, DensityMatrix, Measurable, OutcomeDistribution, Shots, StateVector,
    SIMULATION_QUBIT_CAP,
};
use crate::seed;

/// How noisy evolution is carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    /// Gate-by-gate density-matrix evolution with depolarizing after each
    /// two-qubit layer.
    #[default]
    Density,
    /// Ideal statevector probabilities mixed with the uniform distribution.
    /// Identical to `Density` for global depolarizing noise, and cheaper.
    Mixture,
}

/// `p[t] → Σ_t p[t]·m[t][r]` on one bit of a probability vector.
fn act_on_bit(probs: &mut [f64], nbits: usize, bit: usize, m: &[[f64; 2]; 2]) {
    let stride = 1usize << (nbits - 1 - bit);
    for base in 0..probs.len() {
        if base & stride != 0 {
            continue;
        }
        let (p0, p1) = (probs[base], probs[base | stride]);
        probs[base] = p0 * m[0][0] + p1 * m[1][0];
        probs[base | stride] = p0 * m[0][1] + p1 * m[1][1];
    }
}

fn check_measured(dist: &OutcomeDistribution, device: &DeviceModel, qubits: &[usize]) -> Result<()> {
    if dist.num_bits() != qubits.len() {
        return Err(Error::DimensionMismatch {
            expected: qubits.len(),
            actual: dist.num_bits(),
        });
    }
    crate::quantum::state::check_qubits(qubits, device.num_qubits())
}

/// Push a distribution over `qubits` through the readout confusion.
pub fn apply_readout(dist: &OutcomeDistribution, device: &DeviceModel, qubits: &[usize]) -> Result<OutcomeDistribution> {
    check_measured(dist, device, qubits)?;
    let mut p = dist.probs().to_vec();
    for (bit, &q) in qubits.iter().enumerate() {
        act_on_bit(&mut p, qubits.len(), bit, &device.readout(q)?);
    }
    Ok(OutcomeDistribution::new_unchecked(p))
}

/// Undo readout confusion with the inverse tensor-product matrix, then clip
/// negative entries and renormalize.
pub fn mitigate_readout(
    dist: &OutcomeDistribution,
    device: &DeviceModel,
    qubits: &[usize],
) -> Result<OutcomeDistribution> {
    check_measured(dist, device, qubits)?;
    let mut p = dist.probs().to_vec();
    for (bit, &q) in qubits.iter().enumerate() {
        let m = device.readout(q)?;
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det.abs() < 1e-12 {
            return Err(Error::SingularConfusion(q));
        }
        let inv = [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]];
        act_on_bit(&mut p, qubits.len(), bit, &inv);
    }
    p.iter_mut().for_each(|v| *v = v.max(0.0));
    let total: f64 = p.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidState("mitigated distribution vanished".into()));
    }
    Ok(OutcomeDistribution::new_unchecked(p.into_iter().map(|v| v / total).collect()))
}

/// Noisy execution on the density-matrix backend.
pub fn simulate_noisy(
    circuit: &Circuit,
    device: &DeviceModel,
    input: &StateVector,
    qubits: &[usize],
    shots: Shots,
) -> Result<OutcomeDistribution> {
    simulate_noisy_with(Backend::Density, circuit, device, input, qubits, shots)
}

fn noisy_probabilities(backend: Backend, circuit: &Circuit, device: &DeviceModel, input: &StateVector) -> Result<Vec<f64>> {
    let n = circuit.num_qubits();
    if input.num_qubits() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: input.num_qubits(),
        });
    }
    let trace = accumulate_p(circuit, device)?;
    mixed_or_evolved(backend, circuit, &trace, input)
}

fn noisy_density(circuit: &Circuit, trace: &NoiseTrace, input: &StateVector) -> Result<DensityMatrix> {
    check_density_cap(circuit.num_qubits())?;
    let mut order: Vec<(usize, f64)> = trace.apply_after.iter().copied().zip(trace.layer_rates.iter().copied()).collect();
    order.sort_by_key(|&(i, _)| i);
    let mut rho = input.to_density();
    let mut next = 0;
    for (i, g) in circuit.gates().iter().enumerate() {
        rho.apply_gate(&g.qubits, &g.kind.matrix(&g.params));
        while next < order.len() && order[next].0 == i {
            rho.depolarize_in_place(order[next].1);
            next += 1;
        }
    }
    Ok(rho)
}

fn mixed_or_evolved(backend: Backend, circuit: &Circuit, trace: &NoiseTrace, input: &StateVector) -> Result<Vec<f64>> {
    let n = circuit.num_qubits();
    match backend {
        Backend::Density => Ok(noisy_density(circuit, trace, input)?.basis_probabilities()),
        Backend::Mixture => {
            if n > SIMULATION_QUBIT_CAP {
                return Err(Error::QubitCap(n, SIMULATION_QUBIT_CAP));
            }
            Ok(mix_uniform(run_statevector(circuit, input)?.probabilities(), trace.p_total))
        }
    }
}

fn mix_uniform(ideal: Vec<f64>, p: f64) -> Vec<f64> {
    let share = p / ideal.len() as f64;
    ideal.into_iter().map(|q| (1.0 - p) * q + share).collect()
}

/// Noisy execution: gate noise, readout confusion on `qubits`, then exact
/// probabilities or seeded shot sampling.
pub fn simulate_noisy_with(
    backend: Backend,
    circuit: &Circuit,
    device: &DeviceModel,
    input: &StateVector,
    qubits: &[usize],
    shots: Shots,
) -> Result<OutcomeDistribution> {
    if qubits.is_empty() {
        return Err(Error::invalid("no qubits to measure"));
    }
    let n = circuit.num_qubits();
    crate::quantum::state::check_qubits(qubits, n)?;
    let full = noisy_probabilities(backend, circuit, device, input)?;
    let marginal = OutcomeDistribution::new_unchecked(marginalize(&full, n, qubits));
    let read = apply_readout(&marginal, device, qubits)?;
    sample_or_exact(read.probs().to_vec(), shots)
}

/// Outcome of an effective-rate estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct PEstimate {
    pub p_hat: f64,
    /// Mean all-zeros probability over twirls.
    pub survival: f64,
    /// Binomial standard error of `p_hat` over all shots.
    pub std_error: f64,
    pub per_twirl_survival: Vec<f64>,
}

/// Effective depolarizing rate of `circuit` on `device`.
pub fn estimate_p(circuit: &Circuit, device: &DeviceModel, r_twirls: usize, shots: usize, seed: u64) -> Result<f64> {
    Ok(estimate_p_detailed(circuit, device, r_twirls, shots, seed, Backend::Density)?.p_hat)
}

/// Each twirl of the estimation circuit runs noisily, is followed by the exact
/// (noise-free) inverse of its own unitary, and is read out with mitigation.
/// `p̂ = (1 − P0)/(1 − 2⁻ⁿ)` from the mean survival `P0`.
pub fn estimate_p_detailed(
    circuit: &Circuit,
    device: &DeviceModel,
    r_twirls: usize,
    shots: usize,
    seed: u64,
    backend: Backend,
) -> Result<PEstimate> {
    if r_twirls == 0 || shots == 0 {
        return Err(Error::invalid("estimate_p needs at least one twirl and one shot"));
    }
    let n = circuit.num_qubits();
    let est = estimation_circuit(circuit);
    let qubits: Vec<usize> = (0..n).collect();
    let zero = StateVector::zero_state(n);
    let survivals: Vec<f64> = (0..r_twirls as u64)
        .into_par_iter()
        .map(|r| {
            let twirled = randomized_compile(&est, seed::derive_indexed(seed, &[r, 0]));
            let undone = undo_ideally(backend, &twirled, device, &zero)?;
            let read = apply_readout(&OutcomeDistribution::new_unchecked(undone), device, &qubits)?;
            let sampled = sample_or_exact(
                read.probs().to_vec(),
                Shots::Sampled {
                    shots,
                    seed: seed::derive_indexed(seed, &[r, 1]),
                },
            )?;
            Ok(mitigate_readout(&sampled, device, &qubits)?.prob(0))
        })
        .collect::<Result<_>>()?;
    let survival = survivals.iter().sum::<f64>() / r_twirls as f64;
    let norm = 1.0 - 0.5f64.powi(n as i32);
    let total_shots = (r_twirls * shots) as f64;
    Ok(PEstimate {
        p_hat: ((1.0 - survival) / norm).clamp(0.0, 1.0),
        survival,
        std_error: (survival * (1.0 - survival) / total_shots).sqrt() / norm,
        per_twirl_survival: survivals,
    })
}

/// Basis probabilities after noisy `c` followed by its exact inverse.
fn undo_ideally(backend: Backend, c: &Circuit, device: &DeviceModel, input: &StateVector) -> Result<Vec<f64>> {
    let trace = accumulate_p(c, device)?;
    match backend {
        Backend::Density => {
            let mut rho = noisy_density(c, &trace, input)?;
            for g in c.inverse().gates() {
                rho.apply_gate(&g.qubits, &g.kind.matrix(&g.params));
            }
            Ok(rho.basis_probabilities())
        }
        Backend::Mixture => {
            // The noise-free inverse commutes with the global channel.
            let round_trip = c.concat(&c.inverse())?;
            Ok(mix_uniform(run_statevector(&round_trip, input)?.probabilities(), trace.p_total))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use crate::quantum::{measure, GateKind};

    const CONF: [[f64; 2]; 2] = [[0.98, 0.02], [0.03, 0.97]];

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn zero_error_device_matches_noiseless() {
        let c = Circuit::from_gates(
            3,
            vec![Gate::one(GateKind::H, 0), Gate::cnot(0, 1), Gate::u3(2, 0.7, 0.1, 0.2), Gate::cnot(1, 2)],
        )
        .unwrap();
        let d = DeviceModel::ideal(3);
        let input = StateVector::zero_state(3);
        let noisy = simulate_noisy(&c, &d, &input, &[0, 1, 2], Shots::Exact).unwrap();
        let ideal = measure(&run_statevector(&c, &input).unwrap(), &[0, 1, 2], Shots::Exact).unwrap();
        assert!(close(noisy.probs(), ideal.probs(), 1e-9));
    }

    #[test]
    fn readout_only() {
        let d = DeviceModel::ideal(1).with_readout(0, CONF).unwrap();
        let out = simulate_noisy(&Circuit::new(1), &d, &StateVector::zero_state(1), &[0], Shots::Exact).unwrap();
        assert!(close(out.probs(), &[0.98, 0.02], 1e-12));
        let back = mitigate_readout(&out, &d, &[0]).unwrap();
        assert!(close(back.probs(), &[1.0, 0.0], 1e-9));
    }

    #[test]
    fn single_cnot_depolarized() {
        let d = DeviceModel::new("e", 2, &[((0, 1), 0.1)]).unwrap();
        let c = Circuit::from_gates(2, vec![Gate::cnot(0, 1)]).unwrap();
        for backend in [Backend::Density, Backend::Mixture] {
            let out = simulate_noisy_with(backend, &c, &d, &StateVector::zero_state(2), &[0, 1], Shots::Exact).unwrap();
            assert!(close(out.probs(), &[0.925, 0.025, 0.025, 0.025], 1e-12));
        }
    }

    #[test]
    fn backends_agree() {
        let d = DeviceModel::builtin("toy4").unwrap();
        let c = Circuit::from_gates(
            4,
            vec![
                Gate::u3(0, 0.3, 0.2, 0.1),
                Gate::one(GateKind::H, 2),
                Gate::cnot(0, 1),
                Gate::cnot(2, 3),
                Gate::new(GateKind::Rxx, vec![1, 2], vec![0.4]).unwrap(),
                Gate::u3(3, 1.3, 0.0, 0.5),
                Gate::new(GateKind::Crx, vec![3, 0], vec![0.9]).unwrap(),
            ],
        )
        .unwrap();
        let input = StateVector::zero_state(4);
        let a = simulate_noisy_with(Backend::Density, &c, &d, &input, &[0, 3], Shots::Exact).unwrap();
        let b = simulate_noisy_with(Backend::Mixture, &c, &d, &input, &[0, 3], Shots::Exact).unwrap();
        assert!(close(a.probs(), b.probs(), 1e-12));
    }

    #[test]
    fn mitigation_fixed_points() {
        let d = DeviceModel::ideal(2);
        let dist = OutcomeDistribution::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert!(close(mitigate_readout(&dist, &d, &[0, 1]).unwrap().probs(), dist.probs(), 1e-15));
        let sym = d.with_readout(0, [[0.9, 0.1], [0.1, 0.9]]).unwrap();
        let uniform = OutcomeDistribution::new(vec![0.5, 0.5]).unwrap();
        assert!(close(mitigate_readout(&uniform, &sym, &[0]).unwrap().probs(), &[0.5, 0.5], 1e-15));
        let singular = DeviceModel::ideal(1).with_readout(0, [[0.5, 0.5], [0.5, 0.5]]).unwrap();
        assert!(matches!(
            mitigate_readout(&uniform, &singular, &[0]),
            Err(Error::SingularConfusion(0))
        ));
    }

    #[test]
    fn estimate_p_trivial_cases() {
        let c = Circuit::from_gates(3, vec![Gate::cnot(0, 1), Gate::u3(2, 0.2, 0.0, 0.0), Gate::cnot(1, 2)]).unwrap();
        assert_eq!(estimate_p(&c, &DeviceModel::ideal(3), 4, 512, 1).unwrap(), 0.0);
        let noisy = DeviceModel::fully_connected("n", 3, 0.05).unwrap();
        assert_eq!(estimate_p(&Circuit::new(3), &noisy, 4, 512, 1).unwrap(), 0.0);
        assert!(estimate_p(&c, &noisy, 0, 512, 1).is_err());
    }

    #[test]
    fn estimate_p_backends_agree_exactly_per_seed() {
        let d = DeviceModel::builtin("toy4").unwrap();
        let c = Circuit::from_gates(4, vec![Gate::cnot(0, 1), Gate::cnot(2, 3), Gate::cnot(1, 2)]).unwrap();
        let a = estimate_p_detailed(&c, &d, 4, 2048, 9, Backend::Density).unwrap();
        let b = estimate_p_detailed(&c, &d, 4, 2048, 9, Backend::Mixture).unwrap();
        assert!((a.p_hat - b.p_hat).abs() < 1e-2);
    }
}
