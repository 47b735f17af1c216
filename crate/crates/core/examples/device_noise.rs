//! Device catalog, accumulated error rates and twirled estimation.

use qdeploy::circuit::{Circuit, Gate};
use qdeploy::noise::{accumulate_p, estimate_p_detailed, randomized_compile, Backend, DeviceModel};
use qdeploy::quantum::circuit_unitary;
use qdeploy::synthesis::hs_distance;

fn main() -> qdeploy::Result<()> {
    for name in DeviceModel::catalog() {
        let d = DeviceModel::builtin(name)?;
        println!(
            "{name:>7}: {} qubits, {} edges, mean cnot error {:.4}",
            d.num_qubits(),
            d.coupling_edges().count(),
            d.mean_cnot_error()
        );
    }

    let device = DeviceModel::builtin("toy4")?;
    let mut c = Circuit::new(4);
    for (a, b) in [(0, 1), (2, 3), (1, 2), (0, 3), (0, 2)] {
        c.push(Gate::ry(a, 0.3))?;
        c.push(Gate::cnot(a, b))?;
    }
    let trace = accumulate_p(&c, &device)?;
    println!("layer rates {:?}", trace.layer_rates);
    println!("accumulated p {:.5}", trace.p_total);

    let est = estimate_p_detailed(&c, &device, 16, 8192, 5, Backend::Density)?;
    println!("estimated p {:.5} ± {:.5}", est.p_hat, est.std_error);

    let twirled = randomized_compile(&c, 9);
    let d = hs_distance(&circuit_unitary(&twirled)?, &circuit_unitary(&c)?)?;
    println!("twirled circuit: {} gates, distance {d:.1e}", twirled.len());
    Ok(())
}
