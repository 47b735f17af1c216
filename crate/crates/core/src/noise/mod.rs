//! Device descriptions, error accumulation, and noisy execution.
//!
//! Gate noise is modelled per layer of concurrent two-qubit gates: a layer
//! costs the sum of its edges' error rates plus crosstalk for every declared
//! pair of edges active together, and acts as a global depolarizing channel.

mod device;
mod sim;
mod twirl;

pub use device::{Crosstalk, DeviceModel};
pub use sim::{
    apply_readout, estimate_p, estimate_p_detailed, mitigate_readout, simulate_noisy, simulate_noisy_with, Backend,
    PEstimate,
};
pub use twirl::{estimation_circuit, randomized_compile, twirl_frames};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};

/// Per-layer depolarizing rates of a circuit and their composition.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseTrace {
    pub layer_rates: Vec<f64>,
    pub p_total: f64,
    /// Index of the last gate of each layer, where its channel is applied.
    pub apply_after: Vec<usize>,
}

/// Rate of one layer of concurrent two-qubit gates.
pub fn layer_error_rate(layer: &[&Gate], device: &DeviceModel) -> Result<f64> {
    let mut edges = Vec::with_capacity(layer.len());
    let mut rate = 0.0;
    for g in layer {
        if !g.is_two_qubit() {
            return Err(Error::invalid(format!("{} in a two-qubit layer", g.kind)));
        }
        let (a, b) = (g.qubits[0], g.qubits[1]);
        let id = device.edge_id(a, b)?;
        rate += device.cnot_error(a, b)?;
        edges.push(id);
    }
    for (i, &e1) in edges.iter().enumerate() {
        for &e2 in &edges[i + 1..] {
            rate += device.crosstalk_between(e1, e2);
        }
    }
    Ok(rate.clamp(0.0, 1.0))
}

/// Layer rates of `circuit` composed as `1 − p_total = Π (1 − p_layer)`.
pub fn accumulate_p(circuit: &Circuit, device: &DeviceModel) -> Result<NoiseTrace> {
    if circuit.num_qubits() > device.num_qubits() {
        return Err(Error::invalid(format!(
            "circuit on {} qubits does not fit device {} with {}",
            circuit.num_qubits(),
            device.name(),
            device.num_qubits()
        )));
    }
    let mut layer_rates = Vec::new();
    let mut apply_after = Vec::new();
    let mut survive = 1.0;
    for layer in circuit.two_qubit_layers() {
        let gates: Vec<&Gate> = layer.iter().map(|&i| &circuit.gates()[i]).collect();
        let r = layer_error_rate(&gates, device)?;
        survive *= 1.0 - r;
        layer_rates.push(r);
        apply_after.push(*layer.iter().max().expect("non-empty layer"));
    }
    Ok(NoiseTrace {
        layer_rates,
        p_total: (1.0 - survive).clamp(0.0, 1.0),
        apply_after,
    })
}
