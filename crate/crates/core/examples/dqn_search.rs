//! Deep-Q search over a precomputed 2 x 3 reward table.

use qdeploy::quantum::{circuit_unitary, UnitaryMatrix};
use qdeploy::rl::{run_search, ActionSpace, PrecomputedRewards, TrainConfig};
use qdeploy::synthesis::SynthesisTemplate;

fn main() -> qdeploy::Result<()> {
    let template = SynthesisTemplate::new(2, vec![(0, 1)])?;
    let unitary = |k: usize| -> qdeploy::Result<UnitaryMatrix> {
        let params: Vec<f64> = (0..template.num_params()).map(|i| 0.37 * (i * (k + 1)) as f64).collect();
        circuit_unitary(&template.build(&params)?)
    };
    let lifted = vec![(0..3).map(unitary).collect::<qdeploy::Result<Vec<_>>>()?, (3..6).map(unitary).collect::<qdeploy::Result<Vec<_>>>()?];
    let space = ActionSpace::new(2, lifted)?;
    let mut table = PrecomputedRewards::enumerate(&space.list_sizes(), |s| {
        let v = s.iter().enumerate().map(|(i, &c)| ((i + 2) * (c + 1) % 5) as f64).sum::<f64>();
        Ok(0.5 + 0.02 * v)
    })?;
    let (best, reward) = table.best_complete(2).expect("non-empty");
    println!("brute force: {best:?} → {reward:.3}");

    let cfg = TrainConfig {
        iterations: 200,
        hidden: vec![64, 32],
        seed: 1,
        ..TrainConfig::default()
    };
    let r = run_search(&space, &mut table, &cfg)?;
    println!("search:      {:?} → {:.3}", r.best_selection, r.best_reward);
    for c in r.curves.iter().step_by(40) {
        println!("episode {:>3}: loss {:.2e}  max_q {:.3}  reward {:.3}", c.episode, c.loss, c.max_q, c.episode_reward);
    }
    Ok(())
}
