//! Line-oriented circuit format.
//!
//! ```text
//! qubits 3
//! U3 0 1.5707963267948966e0,0.0000000000000000e0,3.1415926535897931e0
//! CNOT 0,1
//! ```
//!
//! Angles are written with 17 significant digits so parsing restores the
//! exact bit pattern. Blank lines and `#` comments are ignored.

use std::fmt::Write as _;
use std::path::Path;

use super::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::quantum::GateKind;

pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_circuit(circuit: &Circuit) -> String {
    let mut out = format!("qubits {}\n", circuit.num_qubits());
    for g in circuit.gates() {
        let qubits: Vec<String> = g.qubits.iter().map(|q| q.to_string()).collect();
        write!(out, "{} {}", g.kind.name(), qubits.join(",")).unwrap();
        if !g.params.is_empty() {
            let params: Vec<String> = g.params.iter().map(|&p| fmt_f64(p)).collect();
            write!(out, " {}", params.join(",")).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut circuit: Option<Circuit> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line: lineno + 1, msg };
        let mut tokens = line.split_whitespace();
        let head = tokens.next().expect("non-empty line");
        match circuit.as_mut() {
            None => {
                if head != "qubits" {
                    return Err(err("expected `qubits N` header".into()));
                }
                let n = tokens
                    .next()
                    .and_then(|t| t.parse::<usize>().ok())
                    .ok_or_else(|| err("bad qubit count".into()))?;
                circuit = Some(Circuit::new(n));
            }
            Some(c) => {
                let kind: GateKind = head.parse().map_err(|e: Error| err(e.to_string()))?;
                let qubits = tokens
                    .next()
                    .ok_or_else(|| err("missing qubit list".into()))?
                    .split(',')
                    .map(|t| t.parse::<usize>().map_err(|_| err(format!("bad qubit `{t}`"))))
                    .collect::<Result<Vec<_>>>()?;
                let params = match tokens.next() {
                    Some(list) => list
                        .split(',')
                        .map(|t| t.parse::<f64>().map_err(|_| err(format!("bad angle `{t}`"))))
                        .collect::<Result<Vec<_>>>()?,
                    None => Vec::new(),
                };
                if tokens.next().is_some() {
                    return Err(err("trailing tokens".into()));
                }
                let gate = Gate::new(kind, qubits, params).map_err(|e| err(e.to_string()))?;
                c.push(gate).map_err(|e| err(e.to_string()))?;
            }
        }
    }
    circuit.ok_or(Error::Parse {
        line: 0,
        msg: "empty circuit file".into(),
    })
}

pub fn read_circuit(path: impl AsRef<Path>) -> Result<Circuit> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_circuit(&text)
}
