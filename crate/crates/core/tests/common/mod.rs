//! Shared helpers: an independent dense simulator built on nalgebra and
//! proptest strategies for random circuits.
#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use proptest::prelude::*;
use qdeploy::circuit::{Circuit, Gate};
use qdeploy::quantum::{ComplexMatrix, GateKind, StateVector, UnitaryMatrix};

pub type M = DMatrix<C>;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn from_rows(n: usize, v: &[C]) -> M {
    M::from_row_slice(n, n, v)
}

fn x() -> M {
    from_rows(2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

fn z() -> M {
    from_rows(2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

fn u3(t: f64, p: f64, l: f64) -> M {
    let (co, si) = ((t / 2.0).cos(), (t / 2.0).sin());
    from_rows(
        2,
        &[c(co, 0.), -C::from_polar(si, l), C::from_polar(si, p), C::from_polar(co, p + l)],
    )
}

fn rotation(gen: &M, t: f64) -> M {
    let id = M::identity(gen.nrows(), gen.ncols());
    id * c((t / 2.0).cos(), 0.) - gen * c(0., (t / 2.0).sin())
}

fn controlled(g: &M) -> M {
    let mut m = M::zeros(4, 4);
    m[(0, 0)] = c(1., 0.);
    m[(1, 1)] = c(1., 0.);
    for r in 0..2 {
        for col in 0..2 {
            m[(2 + r, 2 + col)] = g[(r, col)];
        }
    }
    m
}

/// Local matrix of a gate, first operand as the most significant bit.
pub fn gate_matrix(kind: GateKind, p: &[f64]) -> M {
    match kind {
        GateKind::Id => M::identity(2, 2),
        GateKind::X => x(),
        GateKind::Y => from_rows(2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]),
        GateKind::Z => z(),
        GateKind::H => x().map(|_| c(0., 0.)) + (x() + z()) * c(1.0 / 2f64.sqrt(), 0.),
        GateKind::Ry => u3(p[0], 0.0, 0.0),
        GateKind::U2 => u3(PI / 2.0, p[0], p[1]),
        GateKind::U3 => u3(p[0], p[1], p[2]),
        GateKind::Cnot => controlled(&x()),
        GateKind::Rxx => rotation(&x().kronecker(&x()), p[0]),
        GateKind::Rzz => rotation(&z().kronecker(&z()), p[0]),
        GateKind::Crx => controlled(&rotation(&x(), p[0])),
    }
}

fn bit(index: usize, n: usize, q: usize) -> usize {
    (index >> (n - 1 - q)) & 1
}

/// Embed a local gate acting on `qubits` of an `n`-qubit register.
pub fn embed(g: &M, qubits: &[usize], n: usize) -> M {
    let dim = 1 << n;
    let sub = |i: usize| qubits.iter().fold(0, |acc, &q| (acc << 1) | bit(i, n, q));
    let rest_mask: usize = qubits.iter().fold(dim - 1, |m, &q| m & !(1 << (n - 1 - q)));
    M::from_fn(dim, dim, |r, col| {
        if r & rest_mask == col & rest_mask {
            g[(sub(r), sub(col))]
        } else {
            c(0., 0.)
        }
    })
}

pub fn oracle_unitary(circuit: &Circuit) -> M {
    let n = circuit.num_qubits();
    let mut u = M::identity(1 << n, 1 << n);
    for g in circuit.gates() {
        u = embed(&gate_matrix(g.kind, &g.params), &g.qubits, n) * u;
    }
    u
}

pub fn to_nalgebra(m: &ComplexMatrix) -> M {
    M::from_row_slice(m.rows(), m.rows(), m.data())
}

pub fn of_unitary(u: &UnitaryMatrix) -> M {
    to_nalgebra(u.matrix())
}

pub fn max_abs_diff(a: &M, b: &M) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max |a − e^{iφ} b|` with the phase fitted from the trace.
pub fn diff_up_to_phase(a: &M, b: &M) -> f64 {
    let t = (b.adjoint() * a).trace();
    let phase = if t.norm() > 1e-12 { t / t.norm() } else { c(1., 0.) };
    max_abs_diff(a, &(b * phase))
}

/// Phase-invariant distance `sqrt(1 − |Tr(a†b)|²/d²)`, evaluated through
/// `1 − |z| = ‖a†b − φI‖²/2d` to avoid cancellation near zero.
pub fn oracle_hs(a: &M, b: &M) -> f64 {
    let d = a.nrows() as f64;
    let w = a.adjoint() * b;
    let z = w.trace() / d;
    let phase = if z.norm() > 0.0 { z / z.norm() } else { c(1., 0.) };
    let gap = (&w - M::identity(w.nrows(), w.ncols()) * phase).iter().map(|e| e.norm_sqr()).sum::<f64>();
    ((gap / (2.0 * d)).min(1.0) * (1.0 + z.norm())).sqrt()
}

pub fn oracle_state(circuit: &Circuit) -> Vec<C> {
    let u = oracle_unitary(circuit);
    u.column(0).iter().copied().collect()
}

pub fn state_of(v: &[C]) -> StateVector {
    StateVector::from_amplitudes(v.to_vec()).unwrap()
}

const KINDS: [GateKind; 12] = [
    GateKind::Id,
    GateKind::X,
    GateKind::Y,
    GateKind::Z,
    GateKind::H,
    GateKind::Ry,
    GateKind::U2,
    GateKind::U3,
    GateKind::Cnot,
    GateKind::Rxx,
    GateKind::Rzz,
    GateKind::Crx,
];

fn raw_gate() -> impl Strategy<Value = (usize, usize, usize, Vec<f64>)> {
    (0..KINDS.len(), 0usize..16, 1usize..16, prop::collection::vec(-PI..PI, 3))
}

fn realize(n: usize, (k, a, off, p): (usize, usize, usize, Vec<f64>)) -> Gate {
    let kind = KINDS[k];
    let q0 = a % n;
    let qs = if kind.num_qubits() == 2 && n > 1 {
        vec![q0, (q0 + 1 + off % (n - 1)) % n]
    } else if kind.num_qubits() == 2 {
        return Gate::ry(q0, p[0]);
    } else {
        vec![q0]
    };
    Gate::new(kind, qs, p[..kind.num_params()].to_vec()).unwrap()
}

/// Random circuits over the full gate set on `qubits` qubits.
pub fn circuit_on(qubits: std::ops::RangeInclusive<usize>, max_gates: usize) -> impl Strategy<Value = Circuit> {
    (qubits, prop::collection::vec(raw_gate(), 0..=max_gates))
        .prop_map(|(n, raw)| Circuit::from_gates(n, raw.into_iter().map(|r| realize(n, r)).collect()).unwrap())
}

/// Random circuits on exactly `n` qubits.
pub fn circuit_n(n: usize, max_gates: usize) -> impl Strategy<Value = Circuit> {
    circuit_on(n..=n, max_gates)
}
