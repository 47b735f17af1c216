//! End-to-end runs: load inputs, partition, synthesize (with an on-disk
//! cache), deploy under each scheme and report.

mod config;
mod report;

pub use config::{DataSource, ExperimentConfig, Scheme, OUTPUT_ENV};
pub use report::{
    emit_report, format_table, read_json_reports, reports_to_csv, reports_to_json, DeploymentReport, ReportFormat,
    CSV_COLUMNS,
};

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng as _;
use sha2::{Digest, Sha256};

use crate::circuit::{cnot_count, depth, partition, space_size, write_circuit, Circuit, Partition};
use crate::error::{Error, Result};
use crate::fairness::{
    estimate_lipschitz, find_bias_pairs, group_sensitivity, write_bias_pairs_csv, write_group_csv,
    write_lipschitz_csv, LipschitzEstimate, PairSelection,
};
use crate::noise::DeviceModel;
use crate::qnn::{
    build_qnn, fit_params, load_dataset, read_dataset_schema, read_params, synthetic_dataset, Dataset, FitConfig,
    QnnModel, Split,
};
use crate::rl::{
    deployment_circuit, evaluate_circuit, run_search, write_curves_csv, write_selection, ActionSpace, DeploymentEnv,
    EpisodeStats, RewardSettings, RewardWeights, TrainConfig,
};
use crate::seed::{self, SeedStreams};
use crate::synthesis::{read_candidate_lists, synthesize_all, write_candidate_lists, CandidateList};

/// Everything a scheme needs, built once per run.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub device: DeviceModel,
    pub data: Dataset,
    pub model: QnnModel,
    pub partitions: Vec<Partition>,
    pub lists: Vec<CandidateList>,
    pub space_size: u128,
    /// Whether the candidate lists came from the cache.
    pub cache_hit: bool,
}

fn stage<T>(cfg: &ExperimentConfig, name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        e @ Error::Stage { .. } => e,
        e => Error::Stage {
            stage: name,
            config_hash: cfg.short_hash().to_string(),
            source: Box::new(e),
        },
    })
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn streams(cfg: &ExperimentConfig) -> SeedStreams {
    SeedStreams::new(cfg.seed)
}

pub fn load_data(cfg: &ExperimentConfig) -> Result<Dataset> {
    let seed = streams(cfg).named("data");
    let data = match &cfg.data {
        DataSource::Synthetic { train, test, noise } => synthetic_dataset(cfg.qubits, *train, *test, *noise, seed)?,
        DataSource::Schema(path) => {
            let schema = read_dataset_schema(path)?;
            let csv = schema
                .csv
                .clone()
                .ok_or_else(|| Error::Config(format!("{} names no csv file", path.display())))?;
            load_dataset(csv, &schema, seed)?
        }
    };
    if data.num_features() != cfg.qubits {
        return Err(Error::Dataset(format!(
            "{} features for a {}-qubit model",
            data.num_features(),
            cfg.qubits
        )));
    }
    Ok(data)
}

/// Model from the params file, or fitted on the training split.
pub fn load_model(cfg: &ExperimentConfig, data: &Dataset) -> Result<QnnModel> {
    match &cfg.params {
        Some(p) => build_qnn(cfg.arch, cfg.qubits, cfg.layers, &read_params(p)?)?.with_measure_qubit(cfg.measure_qubit),
        None => fit_params(
            cfg.arch,
            cfg.layers,
            data,
            &FitConfig {
                measure_qubit: cfg.measure_qubit,
                seed: streams(cfg).named("fit"),
                ..FitConfig::default()
            },
        ),
    }
}

pub fn load_device(cfg: &ExperimentConfig) -> Result<DeviceModel> {
    let device = DeviceModel::resolve(&cfg.device)?;
    if device.num_qubits() < cfg.qubits {
        return Err(Error::Config(format!(
            "device {} has {} qubits, model needs {}",
            device.name(),
            device.num_qubits(),
            cfg.qubits
        )));
    }
    Ok(device)
}

/// Cache directory for a model's candidate lists under `cfg`.
pub fn synthesis_cache_dir(cfg: &ExperimentConfig, model: &QnnModel) -> PathBuf {
    let mut h = Sha256::new();
    h.update(write_circuit(&model.circuit));
    h.update(format!("s_blk={}\n{:?}\nseed={}\n", cfg.s_blk, cfg.synthesis, streams(cfg).synthesis()));
    let digest = hex(&h.finalize());
    cfg.output.join("cache").join(format!("synth-{}", &digest[..16]))
}

fn cached_lists(dir: &Path, partitions: &[Partition]) -> Option<Vec<CandidateList>> {
    let lists = read_candidate_lists(dir).ok()?;
    let fits = lists.len() == partitions.len()
        && lists
            .iter()
            .zip(partitions)
            .all(|(l, p)| l.candidates.iter().all(|c| c.circuit.num_qubits() == p.width()));
    fits.then_some(lists)
}

/// Load inputs, partition, and synthesize or reuse cached candidates.
pub fn prepare(cfg: &ExperimentConfig) -> Result<Experiment> {
    let device = stage(cfg, "load", load_device(cfg))?;
    let data = stage(cfg, "load", load_data(cfg))?;
    let model = stage(cfg, "load", load_model(cfg, &data))?;
    let partitions = stage(cfg, "partition", partition(&model.circuit, cfg.s_blk))?;
    let dir = synthesis_cache_dir(cfg, &model);
    let (lists, cache_hit) = match cached_lists(&dir, &partitions) {
        Some(l) => (l, true),
        None => {
            let lists = stage(
                cfg,
                "synthesize",
                synthesize_all(&partitions, &cfg.synthesis, streams(cfg).synthesis()),
            )?;
            stage(cfg, "synthesize", write_candidate_lists(&dir, &lists))?;
            (lists, false)
        }
    };
    let space_size = stage(cfg, "synthesize", space_size(lists.iter().map(CandidateList::len)))?;
    Ok(Experiment {
        config: cfg.clone(),
        device,
        data,
        model,
        partitions,
        lists,
        space_size,
        cache_hit,
    })
}

/// Fewest CNOTs per partition, ties by distance then ordinal.
pub fn baseline_min_cnot(lists: &[CandidateList]) -> Result<Vec<usize>> {
    if lists.is_empty() {
        return Err(Error::invalid("no candidate lists"));
    }
    lists
        .iter()
        .map(|l| {
            (0..l.len())
                .min_by(|&a, &b| {
                    let (x, y) = (&l.candidates[a], &l.candidates[b]);
                    x.cnots.cmp(&y.cnots).then(x.distance.total_cmp(&y.distance)).then(a.cmp(&b))
                })
                .ok_or_else(|| Error::invalid(format!("partition {} has no candidates", l.partition_index)))
        })
        .collect()
}

/// Uniform seeded pick per partition.
pub fn baseline_random(lists: &[CandidateList], seed: u64) -> Vec<usize> {
    let mut rng = seed::rng(seed);
    lists.iter().map(|l| rng.gen_range(0..l.len().max(1))).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeOutcome {
    pub report: DeploymentReport,
    pub selection: Vec<usize>,
    pub circuit: Circuit,
    pub curves: Option<Vec<EpisodeStats>>,
}

impl Experiment {
    /// Split used for reported accuracy: test rows when there are any.
    pub fn report_split(&self) -> Split {
        if self.data.test.is_empty() {
            Split::Train
        } else {
            Split::Test
        }
    }

    fn settings(&self, weights: RewardWeights, split: Split, seed: u64) -> RewardSettings {
        RewardSettings {
            weights,
            fill: self.config.fill,
            fairness: self.config.fairness,
            eval: self.config.eval,
            split,
            seed,
        }
    }

    /// Evaluate a complete deployment as a report row.
    pub fn evaluate(&self, scheme: &str, circuit: &Circuit, weights: RewardWeights, started: Instant) -> Result<DeploymentReport> {
        let seed = streams(&self.config).named("evaluate");
        let settings = self.settings(weights, self.report_split(), seed);
        let b = evaluate_circuit(circuit, &self.model, &self.device, &self.data, &settings, seed)?;
        Ok(DeploymentReport {
            scheme: scheme.to_string(),
            accuracy: b.accuracy,
            fairness: b.p,
            reward: b.reward,
            alpha: weights.alpha,
            beta: weights.beta,
            cnots: cnot_count(circuit),
            depth: depth(circuit),
            space_size: self.space_size,
            wall_time_s: started.elapsed().as_secs_f64(),
            config_hash: self.config.hash().to_string(),
        })
    }

    pub fn circuit_for(&self, selection: &[usize]) -> Result<Circuit> {
        deployment_circuit(&self.partitions, &self.lists, selection, self.config.fill, self.model.num_qubits)
    }

    /// Deep-Q search with the given weights; rewards on the training split.
    pub fn search(&self, weights: RewardWeights, train: &TrainConfig) -> Result<crate::rl::SearchResult> {
        let space = ActionSpace::from_candidates(&self.partitions, &self.lists, self.model.num_qubits)?;
        let settings = self.settings(weights, Split::Train, streams(&self.config).twirling());
        let mut env = DeploymentEnv::new(&self.partitions, &self.lists, &self.model, &self.device, &self.data, settings)?;
        run_search(&space, &mut env, train)
    }

    pub fn run_scheme(&self, scheme: Scheme) -> Result<SchemeOutcome> {
        let started = Instant::now();
        let weights = self.config.weights_for(scheme);
        let (selection, curves) = match scheme {
            Scheme::Quest => (baseline_min_cnot(&self.lists)?, None),
            Scheme::Random => (baseline_random(&self.lists, streams(&self.config).named("random")), None),
            Scheme::Rl(_) => {
                let train = TrainConfig {
                    seed: streams(&self.config).named(&scheme.to_string()),
                    ..self.config.train.clone()
                };
                let r = self.search(weights, &train)?;
                (r.best_selection, Some(r.curves))
            }
        };
        let circuit = self.circuit_for(&selection)?;
        let report = self.evaluate(&scheme.to_string(), &circuit, weights, started)?;
        Ok(SchemeOutcome {
            report,
            selection,
            circuit,
            curves,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub experiment: Experiment,
    pub outcomes: Vec<SchemeOutcome>,
}

impl ExperimentRun {
    pub fn reports(&self) -> Vec<DeploymentReport> {
        self.outcomes.iter().map(|o| o.report.clone()).collect()
    }
}

/// Write reports, curves, selections and circuits under the output directory.
pub fn write_outputs(run: &ExperimentRun) -> Result<()> {
    let out = &run.experiment.config.output;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let reports = run.reports();
    emit_report(&reports, ReportFormat::Csv, out.join("reports.csv"))?;
    emit_report(&reports, ReportFormat::Json, out.join("reports.json"))?;
    for o in &run.outcomes {
        let dir = out.join(&o.report.scheme);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        write_selection(dir.join("selection.csv"), &o.selection)?;
        let path = dir.join("circuit.txt");
        std::fs::write(&path, write_circuit(&o.circuit)).map_err(|e| Error::io(&path, e))?;
        if let Some(c) = &o.curves {
            write_curves_csv(out.join(format!("curves_{}.csv", o.report.scheme)), c)?;
        }
    }
    Ok(())
}

/// Run every configured scheme and write the outputs.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentRun> {
    let experiment = prepare(cfg)?;
    let mut outcomes = Vec::with_capacity(cfg.schemes.len());
    for &s in &cfg.schemes {
        outcomes.push(stage(cfg, "deploy", experiment.run_scheme(s))?);
    }
    let run = ExperimentRun { experiment, outcomes };
    stage(cfg, "report", write_outputs(&run))?;
    Ok(run)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSummary {
    pub bias_pairs: usize,
    pub noiseless: LipschitzEstimate,
    pub on_device: LipschitzEstimate,
    pub files: Vec<PathBuf>,
}

/// Bias pairs, Lipschitz estimates and group sensitivity of the trained
/// model, written to `<output>/fairness/`.
pub fn fairness_scan(cfg: &ExperimentConfig) -> Result<ScanSummary> {
    let device = stage(cfg, "load", load_device(cfg))?;
    let data = stage(cfg, "load", load_data(cfg))?;
    let model = stage(cfg, "load", load_model(cfg, &data))?;
    let mode = cfg.eval;
    let run = || -> Result<ScanSummary> {
        let dir = cfg.output.join("fairness");
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let pairs = find_bias_pairs(&model, &device, &data, cfg.scan_eps, cfg.scan_delta, mode)?;
        let ideal = DeviceModel::ideal(device.num_qubits());
        let noiseless = estimate_lipschitz(&model, &ideal, &data, PairSelection::Exhaustive, mode)?;
        let on_device = estimate_lipschitz(&model, &device, &data, PairSelection::Exhaustive, mode)?;
        let reference = data.groups.first().map(|(g, _)| g.clone()).expect("at least one group");
        let groups = group_sensitivity(&model, &device, &data, &reference, mode)?;
        let files = vec![
            dir.join("bias_pairs.csv"),
            dir.join("lipschitz_noiseless.csv"),
            dir.join("lipschitz_device.csv"),
            dir.join("groups.csv"),
        ];
        write_bias_pairs_csv(&files[0], &pairs)?;
        write_lipschitz_csv(&files[1], &noiseless)?;
        write_lipschitz_csv(&files[2], &on_device)?;
        write_group_csv(&files[3], &groups)?;
        Ok(ScanSummary {
            bias_pairs: pairs.len(),
            noiseless,
            on_device,
            files,
        })
    };
    stage(cfg, "fairness-scan", run())
}
