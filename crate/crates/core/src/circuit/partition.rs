use std::collections::BTreeSet;

use super::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::quantum::{circuit_unitary, UnitaryMatrix};

/// A contiguous block of the input circuit acting on at most `s_blk` qubits.
///
/// `qubits` is ascending; local qubit `i` of `sub_circuit` is global
/// qubit `qubits[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub index: usize,
    pub qubits: Vec<usize>,
    pub sub_circuit: Circuit,
    pub target_unitary: UnitaryMatrix,
}

impl Partition {
    fn build(index: usize, touched: &BTreeSet<usize>, gates: &[Gate]) -> Result<Self> {
        let qubits: Vec<usize> = touched.iter().copied().collect();
        let local = |q: usize| qubits.binary_search(&q).expect("touched qubit");
        let sub = Circuit::from_gates(qubits.len(), gates.iter().map(|g| g.remapped(local)).collect())?;
        let target_unitary = circuit_unitary(&sub)?;
        Ok(Self {
            index,
            qubits,
            sub_circuit: sub,
            target_unitary,
        })
    }

    pub fn width(&self) -> usize {
        self.qubits.len()
    }

    /// Map a circuit over this partition's local qubits onto global indices.
    pub fn lift(&self, local: &Circuit, num_qubits: usize) -> Result<Circuit> {
        if local.num_qubits() != self.width() {
            return Err(Error::DimensionMismatch {
                expected: self.width(),
                actual: local.num_qubits(),
            });
        }
        Circuit::from_gates(num_qubits, local.gates().iter().map(|g| g.remapped(|q| self.qubits[q])).collect())
    }
}

/// Greedy temporal scan: grow the current block while the union of touched
/// qubits stays within `s_blk`, otherwise start a new block.
pub fn partition(circuit: &Circuit, s_blk: usize) -> Result<Vec<Partition>> {
    if s_blk < 2 {
        return Err(Error::invalid(format!("block size must be at least 2, got {s_blk}")));
    }
    let mut blocks: Vec<(BTreeSet<usize>, Vec<Gate>)> = Vec::new();
    let mut touched = BTreeSet::new();
    let mut current: Vec<Gate> = Vec::new();
    for g in circuit.gates() {
        if g.qubits.len() > s_blk {
            return Err(Error::GateTooWide {
                width: g.qubits.len(),
                s_blk,
            });
        }
        let grown = touched.union(&g.qubits.iter().copied().collect()).count();
        if grown > s_blk {
            blocks.push((std::mem::take(&mut touched), std::mem::take(&mut current)));
        }
        touched.extend(g.qubits.iter().copied());
        current.push(g.clone());
    }
    if !current.is_empty() {
        blocks.push((touched, current));
    }
    blocks
        .iter()
        .enumerate()
        .map(|(i, (t, gates))| Partition::build(i, t, gates))
        .collect()
}

/// Map each selection back to global qubits and concatenate in order.
pub fn recombine(partitions: &[Partition], selections: &[&Circuit], num_qubits: usize) -> Result<Circuit> {
    if partitions.len() != selections.len() {
        return Err(Error::DimensionMismatch {
            expected: partitions.len(),
            actual: selections.len(),
        });
    }
    let mut out = Circuit::new(num_qubits);
    for (p, sel) in partitions.iter().zip(selections) {
        out.append(&p.lift(sel, num_qubits)?)?;
    }
    Ok(out)
}

/// Number of complete deployments: the product of the list lengths.
pub fn space_size(lengths: impl IntoIterator<Item = usize>) -> Result<u128> {
    let mut total: u128 = 1;
    for (i, len) in lengths.into_iter().enumerate() {
        if len == 0 {
            return Err(Error::SynthesisFailed {
                partition: i,
                eps_syn: f64::NAN,
                k_max: 0,
            });
        }
        total = total
            .checked_mul(len as u128)
            .ok_or_else(|| Error::invalid("design space size overflows u128"))?;
    }
    Ok(total)
}
