//! Circuit representation and structural metrics.

mod partition;
mod text;

pub use partition::{partition, recombine, space_size, Partition};
pub(crate) use text::fmt_f64;
pub use text::{parse_circuit, read_circuit, write_circuit};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::GateKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub params: Vec<f64>,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: Vec<usize>, params: Vec<f64>) -> Result<Self> {
        if qubits.len() != kind.num_qubits() || params.len() != kind.num_params() {
            return Err(Error::GateArity {
                gate: kind.name(),
                expected: kind.num_qubits(),
                expected_params: kind.num_params(),
                qubits: qubits.len(),
                params: params.len(),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid(format!("non-finite angle in {kind}")));
        }
        if qubits.len() == 2 && qubits[0] == qubits[1] {
            return Err(Error::DuplicateQubit(qubits[0]));
        }
        Ok(Self { kind, qubits, params })
    }

    pub fn one(kind: GateKind, q: usize) -> Self {
        Self::new(kind, vec![q], vec![]).expect("parameterless one-qubit gate")
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self::new(GateKind::Cnot, vec![control, target], vec![]).expect("cnot")
    }

    pub fn u3(q: usize, theta: f64, phi: f64, lambda: f64) -> Self {
        Self::new(GateKind::U3, vec![q], vec![theta, phi, lambda]).expect("u3")
    }

    pub fn ry(q: usize, theta: f64) -> Self {
        Self::new(GateKind::Ry, vec![q], vec![theta]).expect("ry")
    }

    pub fn is_two_qubit(&self) -> bool {
        self.qubits.len() == 2
    }

    /// Gate implementing the adjoint unitary.
    pub fn inverse(&self) -> Self {
        let p = &self.params;
        let (kind, params) = match self.kind {
            GateKind::U3 => (GateKind::U3, vec![-p[0], -p[2], -p[1]]),
            GateKind::U2 => (GateKind::U3, vec![-std::f64::consts::FRAC_PI_2, -p[1], -p[0]]),
            k => (k, p.iter().map(|a| -a).collect()),
        };
        Self {
            kind,
            qubits: self.qubits.clone(),
            params,
        }
    }

    /// Same gate with operands renamed through `map`.
    pub fn remapped(&self, map: impl Fn(usize) -> usize) -> Self {
        Self {
            kind: self.kind,
            qubits: self.qubits.iter().map(|&q| map(q)).collect(),
            params: self.params.clone(),
        }
    }
}

/// Ordered gate list over `num_qubits` qubits. The first gate acts first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            gates: Vec::new(),
        }
    }

    pub fn from_gates(num_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut c = Self::new(num_qubits);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        crate::quantum::state::check_qubits(&gate.qubits, self.num_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.num_qubits != self.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                actual: other.num_qubits,
            });
        }
        self.gates.extend(other.gates.iter().cloned());
        Ok(())
    }

    pub fn concat(&self, other: &Circuit) -> Result<Circuit> {
        let mut out = self.clone();
        out.append(other)?;
        Ok(out)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn without_gate(&self, index: usize) -> Circuit {
        let mut out = self.clone();
        out.gates.remove(index);
        out
    }

    /// Reversed circuit of inverted gates.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    /// ASAP layering: each gate goes into the earliest layer after the last
    /// layer touching any of its qubits. Returns gate indices per layer.
    pub fn layers(&self) -> Vec<Vec<usize>> {
        asap_layers(self.num_qubits, self.gates.iter().enumerate().map(|(i, g)| (i, g.qubits.as_slice())))
    }

    /// ASAP layering of the two-qubit gates alone (gate indices into `self`).
    pub fn two_qubit_layers(&self) -> Vec<Vec<usize>> {
        asap_layers(
            self.num_qubits,
            self.gates
                .iter()
                .enumerate()
                .filter(|(_, g)| g.is_two_qubit())
                .map(|(i, g)| (i, g.qubits.as_slice())),
        )
    }
}

fn asap_layers<'a>(num_qubits: usize, gates: impl Iterator<Item = (usize, &'a [usize])>) -> Vec<Vec<usize>> {
    let mut next_free = vec![0usize; num_qubits];
    let mut layers: Vec<Vec<usize>> = Vec::new();
    for (idx, qubits) in gates {
        let layer = qubits.iter().map(|&q| next_free[q]).max().unwrap_or(0);
        if layer == layers.len() {
            layers.push(Vec::new());
        }
        layers[layer].push(idx);
        for &q in qubits {
            next_free[q] = layer + 1;
        }
    }
    layers
}

/// Number of two-qubit gates.
pub fn cnot_count(circuit: &Circuit) -> usize {
    circuit.gates.iter().filter(|g| g.is_two_qubit()).count()
}

pub fn depth(circuit: &Circuit) -> usize {
    circuit.layers().len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_undoes_every_gate_kind() {
        use crate::quantum::circuit_unitary;
        let c = Circuit::from_gates(
            2,
            vec![
                Gate::u3(0, 0.3, -1.1, 2.0),
                Gate::new(GateKind::U2, vec![1], vec![0.4, 1.7]).unwrap(),
                Gate::ry(0, 0.9),
                Gate::new(GateKind::Rxx, vec![0, 1], vec![0.5]).unwrap(),
                Gate::new(GateKind::Rzz, vec![1, 0], vec![-0.8]).unwrap(),
                Gate::new(GateKind::Crx, vec![0, 1], vec![1.3]).unwrap(),
                Gate::one(GateKind::H, 1),
                Gate::one(GateKind::Y, 0),
                Gate::cnot(1, 0),
            ],
        )
        .unwrap();
        let u = circuit_unitary(&c.concat(&c.inverse()).unwrap()).unwrap();
        assert!(u.matrix().max_abs_diff(&crate::quantum::ComplexMatrix::identity(4)) < 1e-12);
    }

    #[test]
    fn cnot_count_examples() {
        assert_eq!(cnot_count(&Circuit::new(3)), 0);
        let c = Circuit::from_gates(
            3,
            vec![Gate::one(GateKind::H, 0), Gate::cnot(0, 1), Gate::cnot(1, 2)],
        )
        .unwrap();
        assert_eq!(cnot_count(&c), 2);
        let only_local = Circuit::from_gates(2, vec![Gate::one(GateKind::X, 0), Gate::u3(1, 0.1, 0.2, 0.3)]).unwrap();
        assert_eq!(cnot_count(&only_local), 0);
    }

    #[test]
    fn depth_examples() {
        assert_eq!(depth(&Circuit::new(2)), 0);
        let serial =
            Circuit::from_gates(1, vec![Gate::one(GateKind::X, 0), Gate::one(GateKind::H, 0), Gate::one(GateKind::Z, 0)])
                .unwrap();
        assert_eq!(depth(&serial), 3);
        let parallel = Circuit::from_gates(2, vec![Gate::one(GateKind::X, 0), Gate::one(GateKind::X, 1)]).unwrap();
        assert_eq!(depth(&parallel), 1);
    }

    #[test]
    fn two_qubit_layers_skip_local_gates() {
        let c = Circuit::from_gates(
            4,
            vec![Gate::cnot(0, 1), Gate::one(GateKind::X, 2), Gate::cnot(2, 3), Gate::cnot(1, 2)],
        )
        .unwrap();
        assert_eq!(c.two_qubit_layers(), vec![vec![0, 2], vec![3]]);
        assert_eq!(c.layers(), vec![vec![0, 1], vec![2], vec![3]]);
    }

    #[test]
    fn push_validates() {
        let mut c = Circuit::new(2);
        assert!(c.push(Gate::cnot(0, 2)).is_err());
        assert!(Gate::new(GateKind::Cnot, vec![1, 1], vec![]).is_err());
        assert!(Gate::new(GateKind::U3, vec![0], vec![0.1]).is_err());
        assert!(Gate::new(GateKind::Ry, vec![0], vec![f64::NAN]).is_err());
    }
}
