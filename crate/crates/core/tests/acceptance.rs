//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! `cargo test --release --test acceptance`

mod common;

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::{oracle_hs, oracle_unitary};
use qdeploy::circuit::{cnot_count, partition, space_size, Circuit, Gate};
use qdeploy::fairness::{estimate_lipschitz, PairSelection};
use qdeploy::noise::{accumulate_p, estimate_p_detailed, randomized_compile, Backend, DeviceModel};
use qdeploy::pipeline::{prepare, run_experiment, ExperimentConfig, Scheme};
use qdeploy::qnn::{build_qnn, fit_params, synthetic_dataset, Arch, EvalMode, FitConfig};
use qdeploy::quantum::{circuit_unitary, GateKind};
use qdeploy::rl::{
    compute_reward, run_search, td_loss_and_gradient, ActionSpace, DeploymentEnv, PrecomputedRewards, RewardSettings,
    RewardSource, RewardWeights, TrainConfig, Transition, ValueNetwork,
};
use qdeploy::synthesis::{generate_candidates, hs_distance, SynthesisConfig, SynthesisTemplate};
use rand::Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/toy4").join(name)
}

fn reward_arithmetic() -> Outcome {
    let w = RewardWeights::new(0.5, 0.5).unwrap();
    let a = compute_reward(0.5546, 0.732, w);
    let b = compute_reward(0.5101, 0.656, w);
    check(
        (a - 0.6433).abs() < 1e-4 && (b - 0.58335).abs() < 1e-4,
        format!("got {a:.5} and {b:.5}, expected 0.64330 and 0.58335"),
    )
}

fn design_space() -> Outcome {
    let s = space_size([9usize; 8]).map_err(|e| e.to_string())?;
    check(s == 43_046_721, format!("{s}"))
}

fn noisy_lipschitz_ratio() -> Outcome {
    let data = synthetic_dataset(2, 16, 0, 0.0, 21).unwrap();
    let model = fit_params(Arch::Dac22, 1, &data, &FitConfig::default()).unwrap();
    let mode = EvalMode::default();
    let base = estimate_lipschitz(&model, &DeviceModel::ideal(2), &data, PairSelection::Exhaustive, mode).unwrap();
    let mut parts = Vec::new();
    let mut ok = base.k_hat > 0.0;
    for p in [0.1, 0.3] {
        let dev = DeviceModel::new("uniform", 2, &[((0, 1), p)]).unwrap();
        let k = estimate_lipschitz(&model, &dev, &data, PairSelection::Exhaustive, mode).unwrap().k_hat;
        let ratio = k / base.k_hat;
        ok &= (ratio - (1.0 - p)).abs() <= 0.02;
        parts.push(format!("p={p}: ratio {ratio:.6}"));
    }
    check(ok, parts.join(", "))
}

fn chain(n: usize) -> Circuit {
    let mut c = Circuit::new(n);
    for q in 0..n {
        c.push(Gate::new(GateKind::U3, vec![q], vec![0.3 + q as f64, 0.2, -0.5]).unwrap()).unwrap();
    }
    for q in 0..n - 1 {
        c.push(Gate::cnot(q, q + 1)).unwrap();
        c.push(Gate::ry(q + 1, 0.7)).unwrap();
    }
    c
}

fn p_recovery() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for n in 2..=4 {
        let c = chain(n);
        let layers = c.two_qubit_layers().len() as f64;
        for p_star in [0.01, 0.05, 0.1, 0.2] {
            let rate = 1.0 - (1.0 - p_star as f64).powf(1.0 / layers);
            let dev = DeviceModel::fully_connected("uniform", n, rate).unwrap();
            let injected = accumulate_p(&c, &dev).unwrap().p_total;
            let est = estimate_p_detailed(&c, &dev, 16, 8192, 1000 + n as u64, Backend::Density).unwrap();
            let z = (est.p_hat - p_star).abs() / est.std_error;
            ok &= (injected - p_star).abs() < 1e-12 && z <= 3.0;
            parts.push(format!("n{n} p{p_star}: {:.4} ({z:.1}σ)", est.p_hat));
        }
    }
    check(ok, parts.join(", "))
}

fn twirling_identity() -> Outcome {
    let mut c = Circuit::new(4);
    let pairs = [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 3), (2, 1), (3, 2), (0, 3), (1, 0)];
    for (i, &(a, b)) in pairs.iter().enumerate() {
        c.push(Gate::new(GateKind::U3, vec![a], vec![0.1 * i as f64, 0.4, -0.3]).unwrap()).unwrap();
        c.push(Gate::cnot(a, b)).unwrap();
    }
    assert_eq!(cnot_count(&c), 10);
    let u = circuit_unitary(&c).unwrap();
    let mut worst: f64 = 0.0;
    for seed in 0..1000 {
        let t = circuit_unitary(&randomized_compile(&c, seed)).unwrap();
        worst = worst.max(hs_distance(&t, &u).unwrap());
    }
    check(worst < 1e-9, format!("worst distance {worst:.2e} over 1000 compilations"))
}

fn synthesis_budget() -> Outcome {
    let template = SynthesisTemplate::new(2, vec![(0, 1), (1, 0), (0, 1)]).unwrap();
    let mut rng = qdeploy::seed::rng(606);
    let targets: Vec<Circuit> = (0..50)
        .map(|_| {
            let p: Vec<f64> = (0..template.num_params()).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
            template.build(&p).unwrap()
        })
        .collect();
    let mut worst_ratio: f64 = 0.0;
    let mut total = 0;
    for eps in [1e-2, 1e-5] {
        let cfg = SynthesisConfig::with_eps(eps);
        for (i, t) in targets.iter().enumerate() {
            let p = partition(t, 2).unwrap().remove(0);
            let target = oracle_unitary(&p.sub_circuit);
            let list = generate_candidates(&p, &cfg, i as u64).map_err(|e| e.to_string())?;
            for cand in &list.candidates {
                let d = oracle_hs(&oracle_unitary(&cand.circuit), &target);
                worst_ratio = worst_ratio.max(d / eps);
                total += 1;
            }
        }
    }
    let cfg = SynthesisConfig::with_eps(1e-2);
    let cnot = partition(&Circuit::from_gates(2, vec![Gate::cnot(0, 1)]).unwrap(), 2).unwrap().remove(0);
    let min_cx = generate_candidates(&cnot, &cfg, 1).unwrap().candidates.iter().map(|c| c.cnots).min();
    let id = Circuit::from_gates(2, vec![Gate::one(GateKind::Id, 0), Gate::one(GateKind::Id, 1)]).unwrap();
    let id = partition(&id, 2).unwrap().remove(0);
    let has_zero = generate_candidates(&id, &cfg, 1).unwrap().candidates.iter().any(|c| c.cnots == 0);
    check(
        worst_ratio <= 1.0 && min_cx == Some(1) && has_zero,
        format!("{total} candidates, worst distance/eps {worst_ratio:.3}, CNOT min {min_cx:?}, identity 0-CNOT {has_zero}"),
    )
}

fn dql_optimality() -> Outcome {
    let mut c = Circuit::new(3);
    for q in 0..2 {
        c.push(Gate::new(GateKind::U3, vec![q], vec![0.8 + q as f64, -0.3, 0.5]).unwrap()).unwrap();
    }
    c.push(Gate::new(GateKind::Crx, vec![0, 1], vec![1.1]).unwrap()).unwrap();
    c.push(Gate::new(GateKind::U3, vec![2], vec![0.4, 0.9, -1.2]).unwrap()).unwrap();
    c.push(Gate::new(GateKind::Crx, vec![1, 2], vec![-0.7]).unwrap()).unwrap();
    c.push(Gate::ry(1, 0.6)).unwrap();
    let params = vec![0.0; Arch::C14.param_count(3, 1)];
    let model = build_qnn(Arch::C14, 3, 1, &params).unwrap().with_circuit(c.clone()).unwrap();
    let data = synthetic_dataset(3, 24, 0, 0.05, 8).unwrap();
    let device = DeviceModel::builtin("toy4").unwrap();
    let parts = partition(&c, 2).unwrap();
    let cfg = SynthesisConfig {
        max_candidates: 3,
        ..SynthesisConfig::default()
    };
    let lists = qdeploy::synthesis::synthesize_all(&parts, &cfg, 5).unwrap();
    let sizes: Vec<usize> = lists.iter().map(|l| l.len()).collect();
    if sizes != [3, 3] {
        return Err(format!("instance has list sizes {sizes:?}"));
    }
    let mut env = DeploymentEnv::new(&parts, &lists, &model, &device, &data, RewardSettings::default()).unwrap();
    let mut table = PrecomputedRewards::enumerate(&sizes, |s| env.reward(s)).unwrap();
    let (opt, best) = table.best_complete(2).unwrap();
    let space = ActionSpace::from_candidates(&parts, &lists, 3).unwrap();
    let mut hits = 0;
    for seed in 0..10 {
        let cfg = TrainConfig {
            iterations: 200,
            seed,
            ..TrainConfig::default()
        };
        let r = run_search(&space, &mut table, &cfg).unwrap();
        hits += usize::from((r.best_reward - best).abs() <= 1e-9);
    }
    check(hits >= 8, format!("optimum {opt:?} ({best:.4}) found on {hits}/10 seeds"))
}

fn mean<T>(xs: &[T], f: impl Fn(&T) -> f64) -> f64 {
    xs.iter().map(f).sum::<f64>() / xs.len() as f64
}

fn training_signal() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for name in ["toy4.cfg", "toy4_qmlp.cfg"] {
        let dir = tempfile::tempdir().unwrap();
        let over = [("output".to_string(), dir.path().to_string_lossy().into_owned())];
        let cfg = ExperimentConfig::load_with(fixture(name), &over).unwrap();
        let scheme = *cfg.schemes.iter().find(|s| matches!(s, Scheme::Rl(_))).expect("an RL scheme");
        let e = prepare(&cfg).map_err(|e| e.to_string())?;
        let curves = e.run_scheme(scheme).map_err(|e| e.to_string())?.curves.expect("curves");
        let (head, tail) = (&curves[..10], &curves[curves.len() - 10..]);
        let (l0, l1) = (mean(head, |c| c.loss), mean(tail, |c| c.loss));
        let (q0, q1) = (mean(head, |c| c.max_q), mean(tail, |c| c.max_q));
        ok &= l1 <= 0.5 * l0 && q1 >= q0;
        parts.push(format!("{name}: loss {l0:.2e}→{l1:.2e}, max_q {q0:.3}→{q1:.3}"));
    }
    check(ok, parts.join("; "))
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        for k in i..=j {
            r[idx[k]] = (i + j) as f64 / 2.0;
        }
        i = j + 1;
    }
    r
}

fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let (mx, my) = (mean(&rx, |v| *v), mean(&ry, |v| *v));
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum::<f64>().sqrt();
    let sy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum::<f64>().sqrt();
    cov / (sx * sy)
}

fn fairness_trend() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let over = [("output".to_string(), dir.path().to_string_lossy().into_owned())];
    let cfg = ExperimentConfig::load_with(fixture("toy4.cfg"), &over).unwrap();
    let e = prepare(&cfg).map_err(|e| e.to_string())?;
    let mut sel: Vec<usize> = e.lists.iter().map(|l| l.len() - 1).collect();
    let mut sweep = Vec::new();
    loop {
        let c = e.circuit_for(&sel).unwrap();
        sweep.push((cnot_count(&c) as f64, accumulate_p(&c, &e.device).unwrap().p_total));
        let step = e.lists.iter().enumerate().find_map(|(i, l)| {
            let cur = l.candidates[sel[i]].cnots;
            (0..l.len()).filter(|&k| l.candidates[k].cnots < cur).max_by_key(|&k| l.candidates[k].cnots).map(|k| (i, k))
        });
        match step {
            Some((i, k)) => sel[i] = k,
            None => break,
        }
    }
    let (x, y): (Vec<f64>, Vec<f64>) = sweep.iter().copied().unzip();
    let rho = spearman(&x, &y);
    let monotone = sweep.windows(2).all(|w| w[1].1 <= w[0].1);
    check(
        (rho - 1.0).abs() < 1e-12 && monotone,
        format!("{} deployments, CNOTs {}→{}, Spearman {rho:.6}", sweep.len(), x[0], x[x.len() - 1]),
    )
}

fn gradient_check() -> Outcome {
    let mut rng = qdeploy::seed::rng(10);
    let mut worst: f64 = 0.0;
    for draw in 0..100u64 {
        let sizes = [8, 16, 12, 5];
        let policy = ValueNetwork::new(&sizes, draw).unwrap();
        let target = ValueNetwork::new(&sizes, draw + 1000).unwrap();
        let batch: Vec<Transition> = (0..4)
            .map(|i| Transition {
                state: Arc::new((0..8).map(|_| rng.gen_range(-1.0..1.0)).collect()),
                action: rng.gen_range(0..5),
                reward: rng.gen_range(0.0..1.0),
                next: (i % 2 == 0).then(|| (Arc::new((0..8).map(|_| rng.gen_range(-1.0..1.0)).collect()), 2..5)),
            })
            .collect();
        let refs: Vec<&Transition> = batch.iter().collect();
        let (_, analytic) = td_loss_and_gradient(&policy, &target, &refs, 0.99).unwrap();
        let h = 1e-6;
        let mut fd = vec![0.0; analytic.len()];
        for (k, slot) in fd.iter_mut().enumerate() {
            let (mut p, mut m) = (policy.clone(), policy.clone());
            p.params_mut()[k] += h;
            m.params_mut()[k] -= h;
            let lp = td_loss_and_gradient(&p, &target, &refs, 0.99).unwrap().0;
            let lm = td_loss_and_gradient(&m, &target, &refs, 0.99).unwrap().0;
            *slot = (lp - lm) / (2.0 * h);
        }
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let diff: Vec<f64> = fd.iter().zip(&analytic).map(|(a, b)| a - b).collect();
        worst = worst.max(norm(&diff) / norm(&fd).max(norm(&analytic)));
    }
    check(worst < 1e-4, format!("worst relative error {worst:.2e} over 100 draws"))
}

fn reproducibility() -> Outcome {
    let run = || -> Result<Vec<u8>, String> {
        let dir = tempfile::tempdir().unwrap();
        let over = [("output".to_string(), dir.path().to_string_lossy().into_owned())];
        let cfg = ExperimentConfig::load_with(fixture("toy4.cfg"), &over).map_err(|e| e.to_string())?;
        run_experiment(&cfg).map_err(|e| e.to_string())?;
        std::fs::read(dir.path().join("reports.csv")).map_err(|e| e.to_string())
    };
    let (a, b) = (run()?, run()?);
    check(a == b, format!("{} bytes, identical: {}", a.len(), a == b))
}

fn main() {
    let criteria: [(u32, &str, u64, fn() -> Outcome); 11] = [
        (1, "reward arithmetic", 1, reward_arithmetic),
        (2, "design-space size", 1, design_space),
        (3, "noisy Lipschitz ratio", 60, noisy_lipschitz_ratio),
        (4, "error-rate recovery", 120, p_recovery),
        (5, "twirling identity", 60, twirling_identity),
        (6, "synthesis budget", 600, synthesis_budget),
        (7, "search optimality", 900, dql_optimality),
        (8, "training signal", 900, training_signal),
        (9, "fairness trend", 60, fairness_trend),
        (10, "gradient check", 60, gradient_check),
        (11, "pipeline reproducibility", 600, reproducibility),
    ];
    let only: Option<u32> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut failed = 0;
    for (n, name, limit, f) in criteria {
        if only.is_some_and(|o| o != n) {
            continue;
        }
        let t = Instant::now();
        let outcome = f();
        let dt = t.elapsed();
        let in_time = dt <= Duration::from_secs(limit);
        let (pass, detail) = match outcome {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        failed += usize::from(!pass);
        println!(
            "criterion {n:>2} {}: {name}: {detail} [{:.2}s of {limit}s]",
            if pass { "PASS" } else { "FAIL" },
            dt.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
