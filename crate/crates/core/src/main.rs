use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use gridsense::harness::{
    run_experiment_on, summarize, write_outputs, ConfigOverrides, ExperimentConfig, Scalar, SeedSpec, Summary,
};
use gridsense::Error;

/// Simulates bandit sampling of smart-meter voltages on a radial feeder and
/// reports regret against clairvoyant sampling.
#[derive(Debug, Parser)]
#[command(name = "gridsense", version)]
struct Cli {
    /// Case file (MATPOWER `.m` or native `.json`); `case33bw` uses the bundled feeder.
    #[arg(long)]
    case: Option<String>,
    /// matpower | native (default: by extension).
    #[arg(long)]
    format: Option<String>,
    /// spectral-ucb | lin-ucb | random | round-robin | all, or a comma list.
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long)]
    budget: Option<usize>,
    /// Spectral regularization strength β.
    #[arg(long)]
    beta: Option<f64>,
    /// ℓ₂ regularization strength λ.
    #[arg(long)]
    lambda: Option<f64>,
    /// Start the spectral learner from λI + |Λ|.
    #[arg(long)]
    hybrid: bool,
    /// theoretical | FLOAT.
    #[arg(long)]
    explore: Option<String>,
    /// δ of the theoretical exploration schedule.
    #[arg(long)]
    confidence_delta: Option<f64>,
    /// unity | kappa=FLOAT | random.
    #[arg(long)]
    pf: Option<String>,
    #[arg(long)]
    pf_alpha_min: Option<f64>,
    /// uniform | truncgauss | twopoint.
    #[arg(long)]
    dist: Option<String>,
    /// Width of the per-node injection range, pu.
    #[arg(long)]
    delta_span: Option<f64>,
    /// Seed count or comma-separated list.
    #[arg(long)]
    seeds: Option<String>,
    /// lindistflow | ac.
    #[arg(long)]
    ground_truth: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML or JSON file with the same keys as the flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Cli {
    fn overrides(&self) -> ConfigOverrides {
        ConfigOverrides {
            case: self.case.clone(),
            format: self.format.clone(),
            algo: self.algo.clone(),
            horizon: self.horizon,
            budget: self.budget,
            beta: self.beta,
            lambda: self.lambda,
            hybrid: self.hybrid.then_some(true),
            explore: self.explore.clone().map(Scalar::Text),
            confidence_delta: self.confidence_delta,
            pf: self.pf.clone(),
            pf_alpha_min: self.pf_alpha_min,
            dist: self.dist.clone(),
            delta_span: self.delta_span,
            seeds: self.seeds.clone().map(SeedSpec::Text),
            ground_truth: self.ground_truth.clone(),
            nominal_mode: None,
            out: self.out.clone(),
        }
    }
}

fn print_summary(cfg: &ExperimentConfig, summary: &Summary) {
    println!(
        "horizon {}  budget {}  seeds {}  digest {}",
        cfg.horizon,
        cfg.budget,
        cfg.seeds.len(),
        cfg.digest()
    );
    let table = |label: &str, finals: &[gridsense::harness::FinalStats]| {
        println!("{label}");
        println!("  {:<13} {:>12} {:>12} {:>12} {:>10} {:>10}", "algo", "median R_m", "q25", "q75", "R_m/m", "R_m/2/(m/2)");
        for f in finals {
            println!(
                "  {:<13} {:>12.6} {:>12.6} {:>12.6} {:>10.3e} {:>10.3e}",
                f.algo.name(),
                f.median_final,
                f.q25_final,
                f.q75_final,
                f.rate_full,
                f.rate_half
            );
        }
    };
    table("LinDistFlow regret", &summary.finals);
    if !summary.finals_ac.is_empty() {
        table("AC regret", &summary.finals_ac);
    }
}

fn run(cli: &Cli) -> Result<(), Error> {
    let file = match &cli.config {
        Some(path) => ConfigOverrides::from_file(path)?,
        None => ConfigOverrides::default(),
    };
    let cfg = ExperimentConfig::resolve(file.merge(cli.overrides()))?;
    let case = cfg.load_case()?;
    let traces = run_experiment_on(&cfg, &case)?;
    let summary = summarize(&traces)?;
    write_outputs(&cfg.out, &traces, &summary, case.node_ids())?;
    print_summary(&cfg, &summary);
    println!("wrote {}", cfg.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Config(_)) => {
            eprintln!("gridsense: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("gridsense: {e}");
            ExitCode::FAILURE
        }
    }
}
