//! Bell state: statevector, density matrix, sampling and distances.

use qdeploy::circuit::{parse_circuit, Circuit, Gate};
use qdeploy::quantum::{
    circuit_unitary, depolarize, measure, run_density, run_statevector, trace_distance, DensityMatrix, GateKind, Shots,
    StateVector,
};

fn main() -> qdeploy::Result<()> {
    let bell = parse_circuit("qubits 2\nH 0\nCNOT 0,1\n")?;
    let psi = run_statevector(&bell, &StateVector::zero_state(2))?;
    println!("amplitudes {:?}", psi.amplitudes());
    println!("exact  {:?}", measure(&psi, &[0, 1], Shots::Exact)?.probs());
    println!("sampled {:?}", measure(&psi, &[0, 1], Shots::Sampled { shots: 1000, seed: 3 })?.probs());

    let rho = run_density(&bell, &DensityMatrix::zero_state(2))?;
    let noisy = depolarize(&rho, 0.2)?;
    println!("trace distance to 20% depolarized copy: {:.4}", trace_distance(&rho, &noisy)?);

    let mut c = Circuit::new(1);
    c.push(Gate::one(GateKind::H, 0))?;
    c.push(Gate::new(GateKind::U3, vec![0], vec![0.3, 0.1, -0.4])?)?;
    let u = circuit_unitary(&c)?;
    println!("U {:?}", u.matrix());
    Ok(())
}
