use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};

/// Fixed skeleton with U3 layers on every qubit between single CNOTs.
///
/// With `k` CNOTs the layout is `U3-layer, CNOT, U3-layer, …, CNOT, U3-layer`,
/// giving `3·n·(k+1)` free angles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthesisTemplate {
    num_qubits: usize,
    placements: Vec<(usize, usize)>,
}

impl SynthesisTemplate {
    pub fn new(num_qubits: usize, placements: Vec<(usize, usize)>) -> Result<Self> {
        if !(1..=3).contains(&num_qubits) {
            return Err(Error::invalid(format!("templates cover 1 to 3 qubits, got {num_qubits}")));
        }
        for &(c, t) in &placements {
            if c == t || c >= num_qubits || t >= num_qubits {
                return Err(Error::invalid(format!("bad CNOT placement ({c}, {t})")));
            }
        }
        Ok(Self { num_qubits, placements })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn k_cnots(&self) -> usize {
        self.placements.len()
    }

    pub fn placements(&self) -> &[(usize, usize)] {
        &self.placements
    }

    pub fn num_params(&self) -> usize {
        3 * self.num_qubits * (self.k_cnots() + 1)
    }

    pub fn build(&self, params: &[f64]) -> Result<Circuit> {
        if params.len() != self.num_params() {
            return Err(Error::DimensionMismatch {
                expected: self.num_params(),
                actual: params.len(),
            });
        }
        let n = self.num_qubits;
        let mut chunks = params.chunks_exact(3);
        let mut gates = Vec::with_capacity(self.num_params() / 3 + self.k_cnots());
        let u3_layer = |gates: &mut Vec<Gate>, chunks: &mut std::slice::ChunksExact<'_, f64>| {
            for q in 0..n {
                let a = chunks.next().expect("param count checked");
                gates.push(Gate::u3(q, a[0], a[1], a[2]));
            }
        };
        u3_layer(&mut gates, &mut chunks);
        for &(c, t) in &self.placements {
            gates.push(Gate::cnot(c, t));
            u3_layer(&mut gates, &mut chunks);
        }
        Circuit::from_gates(n, gates)
    }
}

/// Unordered qubit pairs of a block, each oriented low → high.
pub fn block_pairs(num_qubits: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for a in 0..num_qubits {
        for b in (a + 1)..num_qubits {
            pairs.push((a, b));
        }
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::cnot_count;

    #[test]
    fn param_count_law() {
        for n in 1..=3 {
            for k in 0..4 {
                let pairs = if n == 1 { vec![] } else { vec![(0, 1); k] };
                let t = SynthesisTemplate::new(n, pairs.clone()).unwrap();
                if n > 1 {
                    assert_eq!(t.num_params(), 3 * n * (k + 1));
                    let c = t.build(&vec![0.0; t.num_params()]).unwrap();
                    assert_eq!(cnot_count(&c), k);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_placements() {
        assert!(SynthesisTemplate::new(2, vec![(0, 0)]).is_err());
        assert!(SynthesisTemplate::new(2, vec![(0, 2)]).is_err());
        assert!(SynthesisTemplate::new(4, vec![]).is_err());
    }

    #[test]
    fn pairs_of_three() {
        assert_eq!(block_pairs(3), vec![(0, 1), (0, 2), (1, 2)]);
    }
}
