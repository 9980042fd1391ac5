use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use toric_harmonic::harness::experiments::{convergence_run, flow_duality_run, ConvergenceRun};
use toric_harmonic::harness::suites::{self, CriterionOutcome, Diagnostic};
use toric_harmonic::harness::{rate_fit, ExperimentConfig, HarnessError, Norm, Result};

#[derive(Parser, Debug)]
#[command(name = "toric-harmonic", version, about = "Harmonic maps into toric Kähler metrics and their Bergman approximants")]
struct Cli {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV, .dat and snapshot files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Comma-separated level list, e.g. 8,16,32,64.
    #[arg(long, global = true, value_delimiter = ',')]
    levels: Option<Vec<i64>>,
    /// ρ nodes per axis (geodesic, disc), N cells (flow-duality) or ρ nodes (legendre-check).
    #[arg(long, global = true)]
    resolution: Option<usize>,
    /// Interior window: keep points with every ℓ_r ≥ this value.
    #[arg(long, global = true)]
    window: Option<f64>,
    /// Write flow snapshots every this many steps.
    #[arg(long, global = true)]
    snapshot_every: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Geodesic on CP¹ over the interval: C⁰/C¹/C² convergence of the approximants.
    Geodesic,
    /// Loop on CP¹ over the disc: C⁰ convergence, Poisson cross-check, HCMA residual.
    Disc,
    /// Heat flow of symplectic potentials against the Eells–Sampson residual.
    FlowDuality,
    /// Norming-constant and kernel diagnostics.
    Diagnostics {
        #[arg(value_enum, default_value = "all")]
        which: Which,
    },
    /// Legendre round trip and gradient/Hessian duality.
    LegendreCheck,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Which {
    Szego,
    Localization,
    PeakAsymptotics,
    RatioBounds,
    Norming,
    All,
}

fn config(cli: &Cli, default: ExperimentConfig) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_json(&fs::read_to_string(path)?)?,
        None => default,
    };
    if let Some(levels) = &cli.levels {
        cfg.levels = levels.clone();
    }
    if let Some(n) = cli.resolution {
        cfg.resolution.rho_nodes = n;
    }
    if let Some(w) = cli.window {
        cfg.window = w;
    }
    if cli.out != Path::new("out") || cfg.output.is_none() {
        cfg.output = Some(cli.out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_report(run: &ConvergenceRun, dir: &Path, name: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    run.report.write_csv(File::create(dir.join(format!("{name}.csv")))?)?;
    run.report.write_dat(File::create(dir.join(format!("{name}.dat")))?)?;
    let fits = [Norm::C0, Norm::C0Raw]
        .into_iter()
        .chain(Norm::DERIVATIVES)
        .filter_map(|n| rate_fit(&run.report, n).ok().map(|f| (n.name(), f)))
        .collect::<Vec<_>>();
    fs::write(dir.join(format!("{name}_rates.json")), serde_json::to_string_pretty(&fits)?)?;
    Ok(())
}

fn run(cli: &Cli) -> Result<Vec<CriterionOutcome>> {
    match &cli.command {
        Command::Geodesic => {
            let cfg = config(cli, ExperimentConfig::geodesic(0.1))?;
            let run = convergence_run(&cfg)?;
            write_report(&run, cfg.output.as_deref().unwrap_or(&cli.out), "geodesic")?;
            suites::geodesic_suite(&run)
        }
        Command::Disc => {
            let cfg = config(cli, ExperimentConfig::disc_loop(0.05))?;
            let run = convergence_run(&cfg)?;
            write_report(&run, cfg.output.as_deref().unwrap_or(&cli.out), "disc")?;
            suites::disc_suite(&run, &cfg)
        }
        Command::FlowDuality => {
            let cells = cli.resolution.unwrap_or(8);
            let tau_end = 2.0 / (cells * cells) as f64;
            let dir = cli.out.join("flow");
            if cli.snapshot_every.is_some() {
                fs::create_dir_all(&dir)?;
            }
            let mut write_snapshot = |step: usize, state: &toric_harmonic::flows::FlowState| -> Result<()> {
                for y in 0..state.domain().node_count() {
                    let text = state.snapshot(y)?;
                    fs::write(dir.join(format!("snapshot_s{step:05}_y{y:03}.pot")), text)?;
                }
                Ok(())
            };
            let coarse = flow_duality_run(cells, 6 * cells + 1, tau_end, cli.snapshot_every, &mut write_snapshot)?;
            let fine = flow_duality_run(2 * cells, 12 * cells + 1, tau_end, None, &mut |_, _| Ok(()))?;
            fs::create_dir_all(&cli.out)?;
            let mut csv = csv::Writer::from_path(cli.out.join("flow_duality.csv"))?;
            csv.write_record(["cells", "dtau", "steps", "sup", "mean"])?;
            for (c, r) in [(cells, &coarse), (2 * cells, &fine)] {
                csv.write_record([
                    c.to_string(),
                    format!("{:e}", r.dtau),
                    r.steps.to_string(),
                    format!("{:.10e}", r.residual.sup),
                    format!("{:.10e}", r.residual.mean),
                ])?;
            }
            csv.flush()?;
            Ok(vec![suites::flow_suite(&coarse, &fine)])
        }
        Command::Diagnostics { which } => {
            let window = cli.window.unwrap_or(0.1);
            let list: Vec<Diagnostic> = match which {
                Which::Szego => vec![Diagnostic::Szego],
                Which::Localization => vec![Diagnostic::Localization],
                Which::PeakAsymptotics => vec![Diagnostic::PeakAsymptotics],
                Which::RatioBounds => vec![Diagnostic::RatioBounds],
                Which::Norming => vec![],
                Which::All => Diagnostic::ALL.to_vec(),
            };
            let mut out = Vec::new();
            if matches!(which, Which::Norming | Which::All) {
                out.extend(suites::norming_suite()?);
            }
            for d in list {
                out.push(suites::diagnostics_suite(d, window)?);
            }
            fs::create_dir_all(&cli.out)?;
            fs::write(cli.out.join("diagnostics.json"), serde_json::to_string_pretty(&out)?)?;
            Ok(out)
        }
        Command::LegendreCheck => suites::legendre_suite(cli.resolution.unwrap_or(2001)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcomes) => {
            for o in &outcomes {
                println!("{o}");
            }
            if outcomes.iter().all(|o| o.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            let e: HarnessError = e;
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
