//! Candidate lists for a CNOT, an identity and a random 2-qubit block.

use qdeploy::circuit::{partition, Circuit, Gate};
use qdeploy::quantum::GateKind;
use qdeploy::synthesis::{generate_candidates, SynthesisConfig};

fn block(gates: Vec<Gate>) -> qdeploy::Result<Circuit> {
    Circuit::from_gates(2, gates)
}

fn main() -> qdeploy::Result<()> {
    let targets = [
        ("cnot", block(vec![Gate::cnot(0, 1)])?),
        ("identity", block(vec![Gate::one(GateKind::Id, 0), Gate::one(GateKind::Id, 1)])?),
        (
            "rxx",
            block(vec![
                Gate::new(GateKind::U3, vec![0], vec![0.4, 1.1, -0.2])?,
                Gate::new(GateKind::Rxx, vec![0, 1], vec![0.7])?,
                Gate::ry(1, 0.9),
            ])?,
        ),
    ];
    for eps in [1e-2, 1e-5] {
        let cfg = SynthesisConfig::with_eps(eps);
        for (name, c) in &targets {
            let p = partition(c, 2)?.remove(0);
            let list = generate_candidates(&p, &cfg, 42)?;
            let summary: Vec<String> = list
                .candidates
                .iter()
                .map(|c| format!("{}cx/{:.1e}", c.cnots, c.distance))
                .collect();
            println!("eps {eps:.0e} {name:>8}: {}", summary.join(" "));
        }
    }
    Ok(())
}
