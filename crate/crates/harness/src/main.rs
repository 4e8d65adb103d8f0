use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use muskat_core::decompose::{decompose, sigma_sweep};
use muskat_core::initial::InitialData;
use muskat_core::io::{read_snapshot, write_snapshot};
use muskat_core::norms::{NormReport, NormRequest};
use muskat_core::{run, run_decomposed, InterfaceField, Probe};
use muskatlab::calibration::{frozen, Calibration, DEFAULT_MARGIN};
use muskatlab::config::default_data;
use muskatlab::output::{write_battery, write_result};
use muskatlab::plots::experiment_script;
use muskatlab::result::{versions, Environment, Manifest};
use muskatlab::{
    exit_code, run_battery, run_experiment, summary_table, worker_budget, Document, ExperimentKind,
    ExperimentSpec, DEFAULT_BATTERY,
};

#[derive(Parser)]
#[command(name = "muskatlab", version, about = "Muskat numerical laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the `[run]` table from `[initial]` (or a snapshot).
    Run {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value = "out/run")]
        out: PathBuf,
    },
    /// Split initial data into a small-slope rough part and a smooth part.
    Decompose {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 0.1)]
        sigma: f64,
        /// Smoothness index of the smooth part (default `2 + d/2`).
        #[arg(long)]
        s_star: Option<f64>,
        /// Also evolve both parts and record the Lipschitz diagnostics.
        #[arg(long)]
        evolve: bool,
        #[arg(long, default_value = "out/decompose")]
        out: PathBuf,
    },
    /// Print norms of initial data or a snapshot as JSON.
    Norms {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_delimiter = ',')]
        sobolev: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        holder: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        gradient_holder: Vec<f64>,
    },
    /// Run every `[[experiment]]` of a configuration file.
    Battery {
        #[command(flatten)]
        battery: BatteryArgs,
        #[arg(long, default_value = "out/battery")]
        out: PathBuf,
        /// Calibration file; overrides the one named in the configuration.
        #[arg(long)]
        calibration: Option<PathBuf>,
        /// Run every assertion that needs a calibrated constant as report-only.
        #[arg(long)]
        no_calibration: bool,
    },
    /// Run a battery without calibration and freeze its constants.
    Calibrate {
        #[command(flatten)]
        battery: BatteryArgs,
        #[arg(long, default_value_t = DEFAULT_MARGIN)]
        margin: f64,
        #[arg(long, default_value = "calibration.json")]
        out: PathBuf,
    },
    /// Shrink the regularization along a schedule from `[initial]`.
    Continuation {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value = "out/continuation")]
        out: PathBuf,
    },
    /// Perturbation gain of the `[run]` table around `[initial]`.
    Stability {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        calibration: Option<PathBuf>,
        #[arg(long, default_value = "out/stability")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Source {
    /// Configuration file providing `[run]` and `[initial]`.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Snapshot (`.msk`) used as initial data instead of `[initial]`.
    #[arg(long)]
    snapshot: Option<PathBuf>,
}

#[derive(Args)]
struct BatteryArgs {
    /// Configuration file with `[[experiment]]` entries.
    config: Option<PathBuf>,
    /// Use the built-in default battery.
    #[arg(long, conflicts_with = "config")]
    default: bool,
    /// Concurrent experiments (capped by MUSKATLAB_THREADS).
    #[arg(long)]
    workers: Option<usize>,
}

impl Source {
    fn document(&self) -> anyhow::Result<Document> {
        Ok(match &self.config {
            Some(p) => Document::load(p)?,
            None => Document::default(),
        })
    }

    fn field(&self, doc: &Document) -> anyhow::Result<InterfaceField> {
        if let Some(p) = &self.snapshot {
            return read_snapshot(p).with_context(|| format!("reading {}", p.display()));
        }
        let grid = doc.run.grid()?;
        let data = doc.initial.clone().unwrap_or(InitialData::RandomSmooth {
            seed: 0,
            max_mode: 8,
            amplitude: 1.0,
        });
        Ok(data.build(grid)?)
    }

    /// Experiment of `kind` over the document's run and data.
    fn experiment(&self, kind: ExperimentKind) -> anyhow::Result<ExperimentSpec> {
        if self.snapshot.is_some() {
            bail!("this command takes its data from [initial]; snapshots are not accepted");
        }
        let doc = self.document()?;
        let run = doc.run.clone();
        let data = doc.initial.clone().map_or_else(|| default_data(kind), |d| vec![d]);
        let mut spec = ExperimentSpec::new(kind, run);
        spec.data = data;
        spec.validate("experiment")?;
        Ok(spec)
    }
}

impl BatteryArgs {
    fn document(&self) -> anyhow::Result<Document> {
        match (&self.config, self.default) {
            (Some(p), _) => Ok(Document::load(p)?),
            (None, true) => Ok(Document::parse(DEFAULT_BATTERY, "default battery")?),
            (None, false) => bail!("give a configuration file or --default"),
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Run { source, out } => cmd_run(&source, &out),
        Command::Decompose {
            source,
            sigma,
            s_star,
            evolve,
            out,
        } => cmd_decompose(&source, sigma, s_star, evolve, &out),
        Command::Norms {
            source,
            sobolev,
            holder,
            gradient_holder,
        } => {
            let doc = source.document()?;
            let f = source.field(&doc)?;
            let request = NormRequest {
                sobolev,
                holder,
                gradient_holder,
                triebel: Vec::new(),
            };
            let report = NormReport::compute(&f, &request, 0.0)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(0)
        }
        Command::Battery {
            battery,
            out,
            calibration,
            no_calibration,
        } => {
            let doc = battery.document()?;
            let cal = if no_calibration {
                None
            } else if let Some(p) = calibration.or(doc.calibration.clone()) {
                Some(Calibration::load(&p)?)
            } else if battery.default {
                Some(frozen()?)
            } else {
                None
            };
            if cal.is_none() {
                eprintln!("note: no calibration; calibrated assertions are report-only");
            }
            let specs = doc.resolve()?;
            let results = run_battery(&specs, cal.as_ref(), worker_budget(battery.workers.or(doc.workers)))?;
            let summary = summary_table(&results);
            write_battery(&out, &results, &summary)?;
            print!("{summary}");
            Ok(exit_code(&results))
        }
        Command::Calibrate {
            battery,
            margin,
            out,
        } => {
            let doc = battery.document()?;
            let specs = doc.resolve()?;
            let results = run_battery(&specs, None, worker_budget(battery.workers.or(doc.workers)))?;
            print!("{}", summary_table(&results));
            let source = match &battery.config {
                Some(p) => p.display().to_string(),
                None => "--default".to_string(),
            };
            let command = format!("muskatlab calibrate {source} --margin {margin}");
            let cal = Calibration::from_results(&results, margin, &command)?;
            std::fs::write(&out, cal.to_json()?).with_context(|| format!("writing {}", out.display()))?;
            println!("wrote {} constants to {}", cal.constants.len(), out.display());
            Ok(0)
        }
        Command::Continuation { source, out } => {
            let spec = source.experiment(ExperimentKind::Continuation)?;
            single(&spec, None, &out)
        }
        Command::Stability {
            source,
            calibration,
            out,
        } => {
            let spec = source.experiment(ExperimentKind::Stability)?;
            let cal = calibration.map(|p| Calibration::load(&p)).transpose()?;
            single(&spec, cal.as_ref(), &out)
        }
    }
}

fn single(spec: &ExperimentSpec, cal: Option<&Calibration>, out: &Path) -> anyhow::Result<i32> {
    let result = run_experiment(spec, cal);
    let dir = write_result(out, &result)?;
    let summary = summary_table(std::slice::from_ref(&result));
    print!("{summary}");
    println!("results in {}", dir.display());
    Ok(exit_code(std::slice::from_ref(&result)))
}

fn cmd_run(source: &Source, out: &Path) -> anyhow::Result<i32> {
    let doc = source.document()?;
    let f0 = source.field(&doc)?;
    let cfg = doc.run.solver_config();
    let probes = [Probe::L2, Probe::Linf, Probe::Max, Probe::Min, Probe::Lip];
    let r = run(&f0, &cfg, &probes)?;
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("series.csv"), r.series.to_csv())?;
    write_snapshot(&out.join("initial.msk"), &f0)?;
    write_snapshot(&out.join("final.msk"), r.final_field())?;
    let mut spec = ExperimentSpec::new(ExperimentKind::MaxPrinciple, doc.run.clone());
    spec.name = "run".into();
    let manifest = Manifest {
        name: "run".into(),
        kind: spec.kind,
        spec,
        environment: Environment::current(),
        versions: versions(),
        statistics: Default::default(),
        records: [("stats".to_string(), serde_json::to_value(&r.stats)?)].into(),
        notes: r.abort.iter().map(|a| format!("aborted at t = {}: {}", a.t, a.message)).collect(),
        calibration_used: Default::default(),
        calibration_samples: Default::default(),
        series_files: vec!["series.csv".into()],
        snapshot_files: vec!["initial.msk".into(), "final.msk".into()],
        node_count: r.stats.node_count,
        steps: r.stats.steps,
        wall_seconds: r.stats.wall_seconds,
    };
    std::fs::write(out.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    std::fs::write(out.join("plot.py"), experiment_script(&manifest))?;
    println!("{} probe rows, {} steps; results in {}", r.series.len(), r.stats.steps, out.display());
    Ok(if r.abort.is_some() { 1 } else { 0 })
}

fn cmd_decompose(source: &Source, sigma: f64, s_star: Option<f64>, evolve: bool, out: &Path) -> anyhow::Result<i32> {
    let doc = source.document()?;
    let f0 = source.field(&doc)?;
    let s_star = s_star.unwrap_or(2.0 + f0.grid().dim() as f64 / 2.0);
    let d = decompose(&f0, sigma, s_star)?;
    let sweep = sigma_sweep(&f0, s_star)?;
    std::fs::create_dir_all(out)?;
    write_snapshot(&out.join("rough.msk"), &d.rough)?;
    write_snapshot(&out.join("smooth.msk"), &d.smooth)?;
    let mut report = serde_json::json!({
        "sigma_requested": d.sigma_requested,
        "sigma_achieved": d.sigma_achieved,
        "smooth_norm": d.smooth_norm,
        "s_star": d.s_star,
        "cutoff_k": d.cutoff_k,
        "sweep": sweep,
        "grad_f1_norm": "max_j sup_x |partial_j F_1|",
    });
    if evolve {
        let r = run_decomposed(&d.rough, &d.smooth, &doc.run.solver_config())?;
        std::fs::write(out.join("lipschitz.csv"), r.series.to_csv())?;
        if let Some(a) = &r.abort {
            report["abort"] = serde_json::json!({ "t": a.t, "message": a.message });
        }
    }
    std::fs::write(out.join("decomposition.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    println!(
        "K = {}, sigma = {:.6e}, smooth norm = {:.6e}; results in {}",
        d.cutoff_k,
        d.sigma_achieved,
        d.smooth_norm,
        out.display()
    );
    Ok(0)
}
