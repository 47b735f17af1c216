//! Variational classifiers: angle encoder, layered templates, measurement
//! head, and noisy accuracy.

mod dataset;
mod fit;

pub use dataset::{load_dataset, read_dataset_schema, synthetic_dataset, Dataset, DatasetSchema, Split};
pub use fit::{fit_params, FitConfig};

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::noise::{mitigate_readout, simulate_noisy_with, Backend, DeviceModel};
use crate::quantum::{run_statevector, GateKind, Shots, StateVector};
use crate::seed;

/// Template family. Three use parameterized ring entanglers, `Date22` plain
/// CNOTs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Arch {
    /// Controlled-RX ring.
    C14,
    /// RZZ ring.
    Qmlp,
    /// CNOT ring, no entangler angles.
    Date22,
    /// RXX ring.
    Dac22,
}

impl Arch {
    pub const ALL: [Arch; 4] = [Arch::C14, Arch::Qmlp, Arch::Date22, Arch::Dac22];

    pub fn name(self) -> &'static str {
        match self {
            Arch::C14 => "c14",
            Arch::Qmlp => "qmlp",
            Arch::Date22 => "date22",
            Arch::Dac22 => "dac22",
        }
    }

    fn entangler(self) -> GateKind {
        match self {
            Arch::C14 => GateKind::Crx,
            Arch::Qmlp => GateKind::Rzz,
            Arch::Date22 => GateKind::Cnot,
            Arch::Dac22 => GateKind::Rxx,
        }
    }

    /// Angles per layer on `d` qubits.
    pub fn params_per_layer(self, d: usize) -> usize {
        3 * d + self.entangler().num_params() * ring_edges(d).len()
    }

    pub fn param_count(self, d: usize, layers: usize) -> usize {
        self.params_per_layer(d) * layers
    }
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Arch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Arch::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown architecture {s}")))
    }
}

/// Nearest-neighbour ring `k → k+1 mod d`; a single edge for `d = 2`.
pub fn ring_edges(d: usize) -> Vec<(usize, usize)> {
    match d {
        0 | 1 => Vec::new(),
        2 => vec![(0, 1)],
        _ => (0..d).map(|k| (k, (k + 1) % d)).collect(),
    }
}

/// `RY(π·x_k)` on qubit `k` for every feature.
pub fn encode(x: &[f64]) -> Result<Circuit> {
    if x.is_empty() {
        return Err(Error::invalid("empty feature row"));
    }
    let mut c = Circuit::new(x.len());
    for (k, &v) in x.iter().enumerate() {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::invalid(format!("feature {k} = {v} outside [0, 1]")));
        }
        c.push(Gate::ry(k, PI * v))?;
    }
    Ok(c)
}

/// Encoded input state `E(x)|0…0⟩`.
pub fn encode_state(x: &[f64]) -> Result<StateVector> {
    run_statevector(&encode(x)?, &StateVector::zero_state(x.len()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct QnnModel {
    pub arch: Arch,
    pub num_qubits: usize,
    pub layers: usize,
    pub params: Vec<f64>,
    pub measure_qubit: usize,
    /// Trained circuit without the encoder; replaced by a deployment.
    pub circuit: Circuit,
}

pub fn build_qnn(arch: Arch, d: usize, layers: usize, params: &[f64]) -> Result<QnnModel> {
    if d == 0 {
        return Err(Error::invalid("a classifier needs at least one qubit"));
    }
    let expected = arch.param_count(d, layers);
    if params.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            actual: params.len(),
        });
    }
    let edges = ring_edges(d);
    let mut c = Circuit::new(d);
    let mut it = params.iter().copied();
    let mut next = || it.next().expect("length checked");
    for _ in 0..layers {
        for q in 0..d {
            c.push(Gate::u3(q, next(), next(), next()))?;
        }
        let kind = arch.entangler();
        for &(a, b) in &edges {
            let p = (0..kind.num_params()).map(|_| next()).collect();
            c.push(Gate::new(kind, vec![a, b], p)?)?;
        }
    }
    Ok(QnnModel {
        arch,
        num_qubits: d,
        layers,
        params: params.to_vec(),
        measure_qubit: 0,
        circuit: c,
    })
}

/// How predictions are simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EvalMode {
    pub backend: Backend,
    pub shots: Shots,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: u8,
    /// Mitigated probability of reading 1 on the measured qubit.
    pub score: f64,
}

impl QnnModel {
    pub fn with_measure_qubit(mut self, q: usize) -> Result<Self> {
        if q >= self.num_qubits {
            return Err(Error::QubitOutOfRange {
                qubit: q,
                num_qubits: self.num_qubits,
            });
        }
        self.measure_qubit = q;
        Ok(self)
    }

    /// Same model running `circuit` in place of its trained circuit.
    pub fn with_circuit(&self, circuit: Circuit) -> Result<Self> {
        if circuit.num_qubits() != self.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                actual: circuit.num_qubits(),
            });
        }
        Ok(Self {
            circuit,
            ..self.clone()
        })
    }

    pub fn full_circuit(&self, x: &[f64]) -> Result<Circuit> {
        if x.len() != self.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                actual: x.len(),
            });
        }
        encode(x)?.concat(&self.circuit)
    }
}

/// Score = P(measure_qubit reads 1) after readout mitigation; label 1 iff
/// score ≥ 0.5.
pub fn predict(model: &QnnModel, x: &[f64], device: &DeviceModel, mode: EvalMode) -> Result<Prediction> {
    let c = model.full_circuit(x)?;
    let q = [model.measure_qubit];
    let raw = simulate_noisy_with(mode.backend, &c, device, &StateVector::zero_state(model.num_qubits), &q, mode.shots)?;
    let score = mitigate_readout(&raw, device, &q)?.prob(1);
    Ok(Prediction {
        label: u8::from(score >= 0.5),
        score,
    })
}

/// Fraction of rows in `split` predicted correctly.
pub fn accuracy(model: &QnnModel, data: &Dataset, split: Split, device: &DeviceModel, mode: EvalMode) -> Result<f64> {
    let rows = data.rows(split);
    if rows.is_empty() {
        return Err(Error::Dataset(format!("{split:?} split is empty")));
    }
    let correct = rows
        .par_iter()
        .map(|&r| {
            let mode = match mode.shots {
                Shots::Sampled { shots, seed: s } => EvalMode {
                    shots: Shots::Sampled {
                        shots,
                        seed: seed::derive_indexed(s, &[r as u64]),
                    },
                    ..mode
                },
                Shots::Exact => mode,
            };
            Ok(usize::from(predict(model, &data.features[r], device, mode)?.label == data.labels[r]))
        })
        .collect::<Result<Vec<usize>>>()?
        .into_iter()
        .sum::<usize>();
    Ok(correct as f64 / rows.len() as f64)
}

/// One angle per line at 17 significant digits.
pub fn write_params(path: impl AsRef<Path>, params: &[f64]) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::new();
    for p in params {
        text.push_str(&crate::circuit::fmt_f64(*p));
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_params(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_params(&text)
}

pub fn parse_params(text: &str) -> Result<Vec<f64>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| {
            l.trim().parse::<f64>().map_err(|e| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::cnot_count;
    use crate::quantum::{measure, C64};

    #[test]
    fn encode_examples() {
        let s = encode_state(&[0.0, 0.0]).unwrap();
        assert_eq!(s.probabilities(), vec![1.0, 0.0, 0.0, 0.0]);
        let one = encode_state(&[1.0]).unwrap();
        assert!((one.probabilities()[1] - 1.0).abs() < 1e-15);
        let half = encode_state(&[0.5]).unwrap();
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        assert!((half.inner(&StateVector::from_amplitudes(vec![h, h]).unwrap()).unwrap().norm() - 1.0).abs() < 1e-12);
        assert!(encode(&[1.2]).is_err());
    }

    #[test]
    fn template_arithmetic() {
        let m = build_qnn(Arch::Date22, 4, 1, &vec![0.0; 12]).unwrap();
        assert_eq!(cnot_count(&m.circuit), 4);
        assert_eq!(Arch::C14.param_count(4, 1), 3 * 4 + 4);
        assert_eq!(Arch::Qmlp.param_count(2, 3), 3 * (6 + 1));
        let empty = build_qnn(Arch::Dac22, 3, 0, &[]).unwrap();
        assert!(empty.circuit.is_empty());
        assert_eq!(empty.full_circuit(&[0.1, 0.2, 0.3]).unwrap(), encode(&[0.1, 0.2, 0.3]).unwrap());
        assert!(build_qnn(Arch::C14, 4, 1, &[0.0; 3]).is_err());
        for a in Arch::ALL {
            assert_eq!(a.name().parse::<Arch>().unwrap(), a);
        }
    }

    #[test]
    fn predict_examples() {
        let ideal = DeviceModel::ideal(2);
        let mut flip = build_qnn(Arch::Date22, 2, 0, &[]).unwrap();
        flip.circuit.push(Gate::one(GateKind::X, 0)).unwrap();
        let p = predict(&flip, &[0.0, 0.0], &ideal, EvalMode::default()).unwrap();
        assert_eq!((p.label, p.score), (1, 1.0));

        let blank = build_qnn(Arch::Date22, 2, 0, &[]).unwrap();
        let p = predict(&blank, &[0.0, 0.0], &ideal, EvalMode::default()).unwrap();
        assert_eq!((p.label, p.score), (0, 0.0));

        let dead = DeviceModel::new("dead", 2, &[((0, 1), 1.0)]).unwrap();
        let m = build_qnn(Arch::Date22, 2, 1, &[0.3; 6]).unwrap();
        for x in [[0.0, 0.0], [0.7, 0.2], [1.0, 1.0]] {
            let p = predict(&m, &x, &dead, EvalMode::default()).unwrap();
            assert!((p.score - 0.5).abs() < 1e-12);
            assert_eq!(p.label, 1);
        }
    }

    #[test]
    fn noiseless_score_matches_statevector() {
        let m = build_qnn(Arch::Qmlp, 3, 2, &(0..Arch::Qmlp.param_count(3, 2)).map(|i| 0.1 * i as f64).collect::<Vec<_>>())
            .unwrap()
            .with_measure_qubit(2)
            .unwrap();
        let x = [0.2, 0.9, 0.4];
        let sv = run_statevector(&m.full_circuit(&x).unwrap(), &StateVector::zero_state(3)).unwrap();
        let want = measure(&sv, &[2], Shots::Exact).unwrap().prob(1);
        let got = predict(&m, &x, &DeviceModel::ideal(3), EvalMode::default()).unwrap().score;
        assert!((want - got).abs() < 1e-12);
    }

    #[test]
    fn params_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.txt");
        let p = vec![0.1, -1.0 / 3.0, std::f64::consts::PI, 1e-300];
        write_params(&path, &p).unwrap();
        assert_eq!(read_params(&path).unwrap(), p);
        assert!(parse_params("0.1\nabc\n").is_err());
    }
}
