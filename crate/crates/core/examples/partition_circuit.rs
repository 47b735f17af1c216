//! Split a circuit into small blocks and stitch them back together.

use qdeploy::circuit::{partition, recombine, space_size, write_circuit, Circuit};
use qdeploy::qnn::{build_qnn, Arch};
use qdeploy::quantum::circuit_unitary;
use qdeploy::synthesis::hs_distance;

fn main() -> qdeploy::Result<()> {
    let arch = Arch::Dac22;
    let params: Vec<f64> = (0..arch.param_count(4, 2)).map(|i| 0.1 * i as f64).collect();
    let model = build_qnn(arch, 4, 2, &params)?;
    print!("{}", write_circuit(&model.circuit));

    for s_blk in [2, 3] {
        let parts = partition(&model.circuit, s_blk)?;
        println!("s_blk {s_blk}: {} partitions", parts.len());
        for p in &parts {
            println!("  #{} qubits {:?}, {} gates", p.index, p.qubits, p.sub_circuit.len());
        }
        let originals: Vec<&Circuit> = parts.iter().map(|p| &p.sub_circuit).collect();
        let back = recombine(&parts, &originals, 4)?;
        let d = hs_distance(&circuit_unitary(&back)?, &circuit_unitary(&model.circuit)?)?;
        println!("  recombined distance {d:.2e}");
    }
    println!("8 partitions x 9 candidates: {}", space_size([9; 8])?);
    Ok(())
}
