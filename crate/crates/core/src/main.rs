use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use qdeploy::pipeline::{
    fairness_scan, format_table, prepare, read_json_reports, reports_to_csv, reports_to_json, run_experiment,
    ExperimentConfig, ReportFormat,
};
use qdeploy::rl::read_selection;
use qdeploy::Result;

#[derive(Parser)]
#[command(name = "qdeploy", version, about = "Deploy quantum classifiers onto simulated noisy devices")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args)]
struct Common {
    /// Experiment file (`key = value` lines).
    config: PathBuf,
    /// Comma-separated schemes, e.g. `quest,rl3`.
    #[arg(long)]
    scheme: Option<String>,
    /// Catalog device name or device TOML path.
    #[arg(long)]
    device: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Any other `key=value` override; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Verb {
    /// Partition and synthesize candidate lists into the cache.
    Synthesize(Common),
    /// Run every configured scheme and write reports.
    Deploy(Common),
    /// Evaluate the trained circuit, or a saved selection.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        selection: Option<PathBuf>,
    },
    /// Print the reports of a finished run.
    Report {
        #[command(flatten)]
        common: Common,
        /// `table`, `csv` or `json`.
        #[arg(long, default_value = "table")]
        format: String,
    },
    /// Bias pairs, Lipschitz estimates and group sensitivity.
    FairnessScan(Common),
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut overrides = Vec::new();
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| qdeploy::Error::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
            overrides.push((k.trim().to_string(), v.trim().to_string()));
        }
        if let Some(s) = &self.scheme {
            overrides.push(("schemes".into(), s.clone()));
        }
        if let Some(d) = &self.device {
            let d = match std::fs::canonicalize(d) {
                Ok(p) if p.is_file() => p.to_string_lossy().into_owned(),
                _ => d.clone(),
            };
            overrides.push(("device".into(), d));
        }
        if let Some(s) = self.seed {
            overrides.push(("seed".into(), s.to_string()));
        }
        ExperimentConfig::load_with(&self.config, &overrides)
    }
}

fn run(verb: Verb) -> Result<()> {
    match verb {
        Verb::Synthesize(c) => {
            let cfg = c.load()?;
            let e = prepare(&cfg)?;
            println!("config {}", cfg.short_hash());
            for (p, l) in e.partitions.iter().zip(&e.lists) {
                let cnots: Vec<usize> = l.candidates.iter().map(|c| c.cnots).collect();
                println!("partition {:>3} qubits {:?}: {} candidates, cnots {:?}", p.index, p.qubits, l.len(), cnots);
            }
            println!("space size {}{}", e.space_size, if e.cache_hit { " (cached)" } else { "" });
        }
        Verb::Deploy(c) => {
            let cfg = c.load()?;
            let run = run_experiment(&cfg)?;
            print!("{}", format_table(&run.reports()));
            println!("wrote {}", cfg.output.display());
        }
        Verb::Evaluate { common, selection } => {
            let cfg = common.load()?;
            let e = prepare(&cfg)?;
            let started = Instant::now();
            let weights = cfg.weights_for(cfg.schemes[0]);
            let (name, circuit) = match selection {
                Some(path) => ("selection", e.circuit_for(&read_selection(path)?)?),
                None => ("trained", e.model.circuit.clone()),
            };
            print!("{}", format_table(&[e.evaluate(name, &circuit, weights, started)?]));
        }
        Verb::Report { common, format } => {
            let cfg = common.load()?;
            let reports = read_json_reports(cfg.output.join("reports.json"))?;
            match format.as_str() {
                "table" => print!("{}", format_table(&reports)),
                f => match f.parse::<ReportFormat>()? {
                    ReportFormat::Csv => print!("{}", reports_to_csv(&reports)),
                    ReportFormat::Json => println!("{}", reports_to_json(&reports)?),
                },
            }
        }
        Verb::FairnessScan(c) => {
            let cfg = c.load()?;
            let s = fairness_scan(&cfg)?;
            println!("bias pairs (eps {}, delta {}): {}", cfg.scan_eps, cfg.scan_delta, s.bias_pairs);
            println!("k_hat noiseless {:.6}", s.noiseless.k_hat);
            println!("k_hat on device {:.6}", s.on_device.k_hat);
            for f in &s.files {
                println!("wrote {}", f.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.verb) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
