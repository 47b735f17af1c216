//! Estimation circuits and Pauli twirling.

use rand::Rng as _;

use crate::circuit::{Circuit, Gate};
use crate::quantum::{ComplexMatrix, GateKind};
use crate::seed;

const PAULIS: [GateKind; 4] = [GateKind::Id, GateKind::X, GateKind::Y, GateKind::Z];

/// The two-qubit gates of `c` in their original order.
pub fn estimation_circuit(c: &Circuit) -> Circuit {
    let gates = c.gates().iter().filter(|g| g.is_two_qubit()).cloned().collect();
    Circuit::from_gates(c.num_qubits(), gates).expect("subset of a valid circuit")
}

fn pauli2(a: usize, b: usize) -> ComplexMatrix {
    PAULIS[a].matrix(&[]).kron(&PAULIS[b].matrix(&[]))
}

/// Pauli frames `(before, after)` with `after · G · before = G` up to phase.
///
/// For Clifford gates all 16 two-qubit Paulis qualify. For the continuous
/// rotations only those whose conjugate is again a Pauli are kept.
pub fn twirl_frames(gate: &Gate) -> Vec<([usize; 2], [usize; 2])> {
    let g = gate.kind.matrix(&gate.params);
    let g_adj = g.adjoint();
    let mut frames = Vec::new();
    for a in 0..4 {
        for b in 0..4 {
            let conj = g.matmul(&pauli2(a, b)).and_then(|m| m.matmul(&g_adj)).expect("4x4");
            for c in 0..4 {
                for d in 0..4 {
                    let overlap = pauli2(c, d).inner(&conj).expect("4x4").norm() / 4.0;
                    if (overlap - 1.0).abs() < 1e-9 {
                        frames.push(([a, b], [c, d]));
                    }
                }
            }
        }
    }
    frames
}

fn push_paulis(out: &mut Vec<Gate>, qubits: &[usize], paulis: [usize; 2]) {
    for (&q, &p) in qubits.iter().zip(&paulis) {
        if p != 0 {
            out.push(Gate::one(PAULIS[p], q));
        }
    }
}

/// Surround every two-qubit gate with a random Pauli frame.
///
/// The total unitary is preserved up to global phase, the two-qubit gates
/// and their order are unchanged, and identity frames are left out.
pub fn randomized_compile(c: &Circuit, seed: u64) -> Circuit {
    let mut rng = seed::rng(seed);
    let mut cnot_frames: Option<Vec<([usize; 2], [usize; 2])>> = None;
    let mut gates = Vec::with_capacity(c.len() * 3);
    for g in c.gates() {
        if !g.is_two_qubit() {
            gates.push(g.clone());
            continue;
        }
        let frames = if g.kind == GateKind::Cnot {
            cnot_frames.get_or_insert_with(|| twirl_frames(g)).clone()
        } else {
            twirl_frames(g)
        };
        let (before, after) = frames[rng.gen_range(0..frames.len())];
        push_paulis(&mut gates, &g.qubits, before);
        gates.push(g.clone());
        push_paulis(&mut gates, &g.qubits, after);
    }
    Circuit::from_gates(c.num_qubits(), gates).expect("twirled circuit uses the same qubits")
}
