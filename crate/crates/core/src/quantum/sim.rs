use super::state::{check_qubits, StateVector, UnitaryMatrix, DENSITY_QUBIT_CAP, SIMULATION_QUBIT_CAP};
use super::{DensityMatrix, GateKind};
use crate::circuit::Circuit;
use crate::error::{Error, Result};

/// Apply a single gate to a pure state.
pub fn apply_gate(state: &StateVector, gate: GateKind, qubits: &[usize], params: &[f64]) -> Result<StateVector> {
    check_qubits(qubits, state.num_qubits())?;
    if qubits.len() != gate.num_qubits() || params.len() != gate.num_params() {
        return Err(Error::GateArity {
            gate: gate.name(),
            expected: gate.num_qubits(),
            expected_params: gate.num_params(),
            qubits: qubits.len(),
            params: params.len(),
        });
    }
    let mut out = state.clone();
    let n = out.num_qubits();
    super::state::apply_matrix(out.amps_mut(), n, qubits, &gate.matrix(params));
    Ok(out)
}

/// Product of the gate unitaries, first gate applied first (rightmost factor).
pub fn circuit_unitary(circuit: &Circuit) -> Result<UnitaryMatrix> {
    let n = circuit.num_qubits();
    if n > SIMULATION_QUBIT_CAP {
        return Err(Error::QubitCap(n, SIMULATION_QUBIT_CAP));
    }
    let mut u = UnitaryMatrix::identity(n);
    for g in circuit.gates() {
        u.apply_gate_left(&g.qubits, &g.kind.matrix(&g.params));
    }
    Ok(u)
}

/// Noiseless evolution of `input` through `circuit`.
pub fn run_statevector(circuit: &Circuit, input: &StateVector) -> Result<StateVector> {
    let n = circuit.num_qubits();
    if n > SIMULATION_QUBIT_CAP {
        return Err(Error::QubitCap(n, SIMULATION_QUBIT_CAP));
    }
    if input.num_qubits() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: input.num_qubits(),
        });
    }
    let mut s = input.clone();
    for g in circuit.gates() {
        super::state::apply_matrix(s.amps_mut(), n, &g.qubits, &g.kind.matrix(&g.params));
    }
    Ok(s)
}

pub(crate) fn check_density_cap(n: usize) -> Result<()> {
    if n > DENSITY_QUBIT_CAP {
        return Err(Error::QubitCap(n, DENSITY_QUBIT_CAP));
    }
    Ok(())
}

/// Noiseless density-matrix evolution.
pub fn run_density(circuit: &Circuit, rho: &DensityMatrix) -> Result<DensityMatrix> {
    check_density_cap(circuit.num_qubits())?;
    let mut out = rho.clone();
    for g in circuit.gates() {
        out.apply_gate(&g.qubits, &g.kind.matrix(&g.params));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use crate::quantum::matrix::ComplexMatrix;

    #[test]
    fn apply_gate_examples() {
        let zero = StateVector::zero_state(1);
        let one = apply_gate(&zero, GateKind::X, &[0], &[]).unwrap();
        assert_eq!(one, StateVector::basis(1, 1).unwrap());

        let s10 = StateVector::basis(2, 0b10).unwrap();
        let s11 = apply_gate(&s10, GateKind::Cnot, &[0, 1], &[]).unwrap();
        assert_eq!(s11, StateVector::basis(2, 0b11).unwrap());

        let s = apply_gate(&zero, GateKind::H, &[0], &[]).unwrap();
        let same = apply_gate(&s, GateKind::U3, &[0], &[0.0, 0.0, 0.0]).unwrap();
        assert!(same
            .amplitudes()
            .iter()
            .zip(s.amplitudes())
            .all(|(a, b)| (a - b).norm() < 1e-15));
    }

    #[test]
    fn apply_gate_rejects_bad_operands() {
        let s = StateVector::zero_state(2);
        assert!(apply_gate(&s, GateKind::X, &[2], &[]).is_err());
        assert!(apply_gate(&s, GateKind::Cnot, &[1, 1], &[]).is_err());
        assert!(apply_gate(&s, GateKind::Cnot, &[0], &[]).is_err());
    }

    #[test]
    fn circuit_unitary_examples() {
        assert_eq!(circuit_unitary(&Circuit::new(2)).unwrap(), UnitaryMatrix::identity(2));
        let xx = Circuit::from_gates(1, vec![Gate::one(GateKind::X, 0), Gate::one(GateKind::X, 0)]).unwrap();
        assert!(circuit_unitary(&xx).unwrap().matrix().max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
        let cx = Circuit::from_gates(2, vec![Gate::cnot(0, 1)]).unwrap();
        assert_eq!(circuit_unitary(&cx).unwrap().matrix(), &GateKind::Cnot.matrix(&[]));
    }

    #[test]
    fn embedding_respects_big_endian_order() {
        // CNOT with control 1, target 0 maps |01⟩ to |11⟩.
        let c = Circuit::from_gates(2, vec![Gate::cnot(1, 0)]).unwrap();
        let out = run_statevector(&c, &StateVector::basis(2, 0b01).unwrap()).unwrap();
        assert_eq!(out, StateVector::basis(2, 0b11).unwrap());
    }

    #[test]
    fn density_matches_statevector() {
        let c = Circuit::from_gates(
            3,
            vec![Gate::u3(0, 0.3, 0.2, 0.9), Gate::cnot(0, 2), Gate::ry(1, 1.1), Gate::cnot(2, 1)],
        )
        .unwrap();
        let psi = run_statevector(&c, &StateVector::zero_state(3)).unwrap();
        let rho = run_density(&c, &DensityMatrix::zero_state(3)).unwrap();
        assert!(rho.matrix().max_abs_diff(psi.to_density().matrix()) < 1e-12);
    }

    #[test]
    fn cap_enforced() {
        assert!(circuit_unitary(&Circuit::new(13)).is_err());
        assert!(run_density(&Circuit::new(9), &DensityMatrix::zero_state(1)).is_err());
    }
}
