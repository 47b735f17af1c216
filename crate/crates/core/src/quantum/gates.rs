//! Gate set: the native `U3`/`U2`/`CNOT` set, Paulis and `H`, and the
//! rotations used by the classifier templates.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::matrix::{ComplexMatrix, C64, I, ONE, ZERO};
use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    /// Identity; only produced by twirling as an explicit no-op slot.
    Id,
    X,
    Y,
    Z,
    H,
    /// `RY(θ)`
    Ry,
    /// `U2(φ, λ) = U3(π/2, φ, λ)`
    U2,
    /// `U3(θ, φ, λ)`
    U3,
    /// Controlled-NOT, control first.
    Cnot,
    /// `exp(-iθ/2 · X⊗X)`
    Rxx,
    /// `exp(-iθ/2 · Z⊗Z)`
    Rzz,
    /// Controlled `RX(θ)`, control first.
    Crx,
}

impl GateKind {
    pub const ALL: [GateKind; 12] = [
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

    pub fn num_qubits(self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Rxx | GateKind::Rzz | GateKind::Crx => 2,
            _ => 1,
        }
    }

    pub fn num_params(self) -> usize {
        match self {
            GateKind::U3 => 3,
            GateKind::U2 => 2,
            GateKind::Ry | GateKind::Rxx | GateKind::Rzz | GateKind::Crx => 1,
            _ => 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Id => "I",
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::H => "H",
            GateKind::Ry => "RY",
            GateKind::U2 => "U2",
            GateKind::U3 => "U3",
            GateKind::Cnot => "CNOT",
            GateKind::Rxx => "RXX",
            GateKind::Rzz => "RZZ",
            GateKind::Crx => "CRX",
        }
    }

    pub fn is_pauli(self) -> bool {
        matches!(self, GateKind::Id | GateKind::X | GateKind::Y | GateKind::Z)
    }

    /// Unitary of the gate on its own operands (2×2 or 4×4, control first).
    pub fn matrix(self, params: &[f64]) -> ComplexMatrix {
        debug_assert_eq!(params.len(), self.num_params());
        match self {
            GateKind::Id => ComplexMatrix::identity(2),
            GateKind::X => ComplexMatrix::from_rows(&[&[ZERO, ONE], &[ONE, ZERO]]),
            GateKind::Y => ComplexMatrix::from_rows(&[&[ZERO, -I], &[I, ZERO]]),
            GateKind::Z => ComplexMatrix::diag(&[ONE, -ONE]),
            GateKind::H => {
                let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                ComplexMatrix::from_rows(&[&[h, h], &[h, -h]])
            }
            GateKind::Ry => {
                let (s, c) = (params[0] / 2.0).sin_cos();
                ComplexMatrix::from_rows(&[&[c.into(), (-s).into()], &[s.into(), c.into()]])
            }
            GateKind::U2 => u3(FRAC_PI_2, params[0], params[1]),
            GateKind::U3 => u3(params[0], params[1], params[2]),
            GateKind::Cnot => ComplexMatrix::from_rows(&[
                &[ONE, ZERO, ZERO, ZERO],
                &[ZERO, ONE, ZERO, ZERO],
                &[ZERO, ZERO, ZERO, ONE],
                &[ZERO, ZERO, ONE, ZERO],
            ]),
            GateKind::Rxx => {
                let (s, c) = (params[0] / 2.0).sin_cos();
                let c = C64::new(c, 0.0);
                let ms = C64::new(0.0, -s);
                ComplexMatrix::from_rows(&[
                    &[c, ZERO, ZERO, ms],
                    &[ZERO, c, ms, ZERO],
                    &[ZERO, ms, c, ZERO],
                    &[ms, ZERO, ZERO, c],
                ])
            }
            GateKind::Rzz => {
                let half = params[0] / 2.0;
                let m = C64::from_polar(1.0, -half);
                let p = C64::from_polar(1.0, half);
                ComplexMatrix::diag(&[m, p, p, m])
            }
            GateKind::Crx => {
                let (s, c) = (params[0] / 2.0).sin_cos();
                let c = C64::new(c, 0.0);
                let ms = C64::new(0.0, -s);
                ComplexMatrix::from_rows(&[
                    &[ONE, ZERO, ZERO, ZERO],
                    &[ZERO, ONE, ZERO, ZERO],
                    &[ZERO, ZERO, c, ms],
                    &[ZERO, ZERO, ms, c],
                ])
            }
        }
    }

    /// Partial derivative of [`GateKind::matrix`] with respect to parameter `idx`.
    pub fn matrix_derivative(self, params: &[f64], idx: usize) -> ComplexMatrix {
        match (self, idx) {
            (GateKind::U3, _) => u3_derivative(params[0], params[1], params[2], idx),
            (GateKind::U2, _) => u3_derivative(FRAC_PI_2, params[0], params[1], idx + 1),
            (GateKind::Ry, 0) => {
                let (s, c) = (params[0] / 2.0).sin_cos();
                ComplexMatrix::from_rows(&[
                    &[(-s / 2.0).into(), (-c / 2.0).into()],
                    &[(c / 2.0).into(), (-s / 2.0).into()],
                ])
            }
            _ => {
                // Central difference for the two-qubit rotations.
                let h = 1e-6;
                let mut plus = params.to_vec();
                let mut minus = params.to_vec();
                plus[idx] += h;
                minus[idx] -= h;
                self.matrix(&plus)
                    .sub(&self.matrix(&minus))
                    .expect("same shape")
                    .scale(C64::new(0.5 / h, 0.0))
            }
        }
    }
}

fn u3(theta: f64, phi: f64, lambda: f64) -> ComplexMatrix {
    let (s, c) = (theta / 2.0).sin_cos();
    ComplexMatrix::from_rows(&[
        &[C64::new(c, 0.0), -C64::from_polar(s, lambda)],
        &[C64::from_polar(s, phi), C64::from_polar(c, phi + lambda)],
    ])
}

fn u3_derivative(theta: f64, phi: f64, lambda: f64, idx: usize) -> ComplexMatrix {
    let (s, c) = (theta / 2.0).sin_cos();
    match idx {
        0 => ComplexMatrix::from_rows(&[
            &[C64::new(-s / 2.0, 0.0), -C64::from_polar(c / 2.0, lambda)],
            &[C64::from_polar(c / 2.0, phi), C64::from_polar(-s / 2.0, phi + lambda)],
        ]),
        1 => ComplexMatrix::from_rows(&[
            &[ZERO, ZERO],
            &[I * C64::from_polar(s, phi), I * C64::from_polar(c, phi + lambda)],
        ]),
        2 => ComplexMatrix::from_rows(&[
            &[ZERO, -I * C64::from_polar(s, lambda)],
            &[ZERO, I * C64::from_polar(c, phi + lambda)],
        ]),
        _ => panic!("U3 has three parameters"),
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let upper = s.to_ascii_uppercase();
        let kind = match upper.as_str() {
            "CX" => GateKind::Cnot,
            "ID" => GateKind::Id,
            other => *GateKind::ALL
                .iter()
                .find(|k| k.name() == other)
                .ok_or_else(|| Error::invalid(format!("unknown gate `{s}`")))?,
        };
        Ok(kind)
    }
}
