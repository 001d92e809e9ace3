// Negated comparisons are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use krylov_qrc::error::{Error, Result};
use krylov_qrc::experiments::sweep::{ensemble_timescales, TIMESCALES_FILE};
use krylov_qrc::experiments::{
    finite_diff_v, pearson, report, sweep, zeno_overlay, ExperimentConfig, GridBox, Metric,
    SweepGrid,
};
use krylov_qrc::krylov::{ComplexityProfile, RankTolerance};
use krylov_qrc::quantum::ising::{IsingModel, DEFAULT_FIELD};
use krylov_qrc::quantum::pauli::parse_pauli_label;

#[derive(Parser)]
#[command(
    name = "krylov-qrc",
    version,
    about = "Krylov observability and capacity sweeps of Ising quantum reservoirs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw an ensemble of random Ising Hamiltonians and write them as JSON.
    GenHamiltonians(GenArgs),
    /// Sweep the total information processing capacity over (T, V).
    SweepIpc(ExperimentArgs),
    /// Sweep the Krylov observability over (T, V).
    SweepObservability(ExperimentArgs),
    /// Operator complexity of one observable over time.
    Complexity(ComplexityArgs),
    /// Zeno and Heisenberg times of the ensemble, with overlay tables.
    Timescales(ExperimentArgs),
    /// Pearson correlation between two grids.
    Correlate(CorrelateArgs),
    /// Forward differences of a grid along the multiplexing axis.
    DiffV(DiffArgs),
    /// Summarize a run directory.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenArgs {
    /// First coupling seed; the ensemble uses consecutive seeds.
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 4)]
    n_sites: usize,
    #[arg(long, default_value_t = DEFAULT_FIELD)]
    field: f64,
    #[arg(long, default_value = "hamiltonians.json")]
    out: PathBuf,
}

/// Flags mirroring the experiment configuration; a `--config` file
/// overrides them.
#[derive(Args)]
struct ExperimentArgs {
    /// TOML experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// First coupling seed of the ensemble.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    ensemble_size: Option<usize>,
    #[arg(long)]
    n_sites: Option<usize>,
    /// Comma-separated clock cycles.
    #[arg(long, value_delimiter = ',')]
    t_values: Option<Vec<f64>>,
    /// Comma-separated multiplexing values.
    #[arg(long, value_delimiter = ',')]
    v_values: Option<Vec<usize>>,
    /// Comma-separated Pauli labels such as `Z_1,Z_2`.
    #[arg(long, value_delimiter = ',')]
    observables: Option<Vec<String>>,
    #[arg(long)]
    noise_eta: Option<f64>,
    #[arg(long)]
    washout: Option<usize>,
    #[arg(long)]
    input_seed: Option<u64>,
    #[arg(long)]
    max_degree: Option<usize>,
    #[arg(long)]
    max_delay: Option<usize>,
    #[arg(long)]
    train_len: Option<usize>,
    #[arg(long)]
    test_len: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ComplexityArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    n_sites: usize,
    #[arg(long, default_value_t = DEFAULT_FIELD)]
    field: f64,
    #[arg(long, default_value = "Z_1")]
    observable: String,
    #[arg(long, default_value_t = 40.0)]
    t_max: f64,
    #[arg(long, default_value_t = 400)]
    steps: usize,
    #[arg(long, default_value = "complexity.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct CorrelateArgs {
    a: PathBuf,
    b: PathBuf,
}

#[derive(Args)]
struct DiffArgs {
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    dir: PathBuf,
}

impl ExperimentArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let file = self
            .config
            .as_deref()
            .map(std::fs::read_to_string)
            .transpose()?;
        let file_has_seed = file
            .as_deref()
            .map(|t| t.parse::<toml::Table>().map(|tbl| tbl.contains_key("seed")))
            .transpose()
            .map_err(|e| Error::Config(e.to_string()))?
            .unwrap_or(false);
        let seed = match self.seed {
            Some(s) => s,
            None if file_has_seed => 0,
            None => {
                return Err(Error::Config(
                    "--seed is required (or `seed` in the config file)".into(),
                ))
            }
        };
        let mut cfg = ExperimentConfig::new(
            seed,
            self.t_values
                .clone()
                .unwrap_or_else(|| (1..=10).map(|i| 4.0 * i as f64).collect()),
            self.v_values
                .clone()
                .unwrap_or_else(|| (0..6).map(|i| 10 + 20 * i).collect()),
        );
        if let Some(v) = self.ensemble_size {
            cfg.ensemble_size = v;
        }
        if let Some(v) = self.n_sites {
            cfg.n_sites = v;
        }
        if let Some(v) = &self.observables {
            cfg.observables = v.clone();
        }
        if let Some(v) = self.noise_eta {
            cfg.noise_eta = v;
        }
        if let Some(v) = self.washout {
            cfg.washout = v;
        }
        if let Some(v) = self.input_seed {
            cfg.input_seed = v;
        }
        if let Some(v) = self.max_degree {
            cfg.ipc.max_degree = v;
        }
        if let Some(v) = self.max_delay {
            cfg.ipc.max_delay = v;
        }
        if let Some(v) = self.train_len {
            cfg.ipc.train_len = v;
        }
        if let Some(v) = self.test_len {
            cfg.ipc.test_len = v;
        }
        if let Some(v) = &self.out {
            cfg.output_dir = v.clone();
        }
        match file {
            Some(text) => ExperimentConfig::overlay_toml(&cfg, &text),
            None => {
                cfg.validate()?;
                Ok(cfg)
            }
        }
    }
}

fn write_config(cfg: &ExperimentConfig, dir: &Path, metric: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(
        dir.join(format!("config_{metric}.toml")),
        cfg.to_toml_string()?,
    )?;
    Ok(())
}

fn run_sweep(args: &ExperimentArgs, metric: Metric) -> Result<()> {
    let cfg = args.resolve()?;
    write_config(&cfg, &cfg.output_dir, metric.name())?;
    let outcome = sweep(&cfg, metric)?;
    for path in outcome.persist(&cfg.output_dir)? {
        println!("wrote {}", path.display());
    }
    println!(
        "{} cells in {:.1} s",
        outcome.runtime.cells, outcome.runtime.wall_seconds
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenHamiltonians(a) => {
            let models = (0..a.count as u64)
                .map(|i| IsingModel::random(a.n_sites, a.field, a.seed + i))
                .collect::<Result<Vec<_>>>()?;
            std::fs::write(&a.out, serde_json::to_string_pretty(&models)?)?;
            println!("wrote {} Hamiltonians to {}", models.len(), a.out.display());
        }
        Command::SweepIpc(a) => run_sweep(&a, Metric::IpcTotal)?,
        Command::SweepObservability(a) => run_sweep(&a, Metric::KrylovObservability)?,
        Command::Complexity(a) => {
            if a.steps == 0 || !(a.t_max > 0.0) {
                return Err(Error::InvalidArgument(
                    "complexity needs positive --t-max and --steps".into(),
                ));
            }
            let h = IsingModel::random(a.n_sites, a.field, a.seed)?.hamiltonian()?;
            let op = parse_pauli_label(&a.observable, a.n_sites)?;
            let profile = ComplexityProfile::new(&h, &op, RankTolerance::DEFAULT)?;
            let mut text = format!("# grade={}\nt,complexity\n", profile.basis().grade());
            for j in 0..=a.steps {
                let t = a.t_max * j as f64 / a.steps as f64;
                text.push_str(&format!("{t},{}\n", profile.complexity(t)?));
            }
            std::fs::write(&a.out, text)?;
            println!("wrote {}", a.out.display());
        }
        Command::Timescales(a) => {
            let cfg = a.resolve()?;
            std::fs::create_dir_all(&cfg.output_dir)?;
            let ts = ensemble_timescales(&cfg)?;
            let path = cfg.output_dir.join(TIMESCALES_FILE);
            std::fs::write(&path, serde_json::to_string_pretty(&ts)?)?;
            println!("wrote {}", path.display());
            let bounds = GridBox {
                t_min: cfg.t_values[0],
                t_max: *cfg.t_values.last().expect("validated axis"),
                v_min: cfg.v_values[0] as f64,
                v_max: *cfg.v_values.last().expect("validated axis") as f64,
            };
            if ts.zeno_mean.is_finite() {
                let overlay = zeno_overlay(ts.zeno_mean.0, bounds, Some(ts.heisenberg_time))?;
                overlay.write_line_csv(&cfg.output_dir.join("zeno_overlay.csv"))?;
                overlay.write_marker_csv(&cfg.output_dir.join("heisenberg_marker.csv"))?;
            }
            println!(
                "mean Zeno time {}, mean Heisenberg time {}",
                ts.zeno_mean.0, ts.heisenberg_time
            );
        }
        Command::Correlate(a) => {
            let p = pearson(&SweepGrid::read_csv(&a.a)?, &SweepGrid::read_csv(&a.b)?)?;
            println!("{p}");
        }
        Command::DiffV(a) => {
            finite_diff_v(&SweepGrid::read_csv(&a.input)?)?.write_csv(&a.out)?;
            println!("wrote {}", a.out.display());
        }
        Command::Report(a) => {
            let summary = report(&a.dir)?;
            summary.write(&a.dir)?;
            print!("{}", summary.to_text());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
