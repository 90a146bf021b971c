use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use dmrecon_core::experiments::{run_all, self_check, BiasModel, CorrelationMode};
use dmrecon_core::io::{parse_config, parse_number, write_matrix, write_results_csv, MatrixFormat, SEED_ENV};
use dmrecon_core::metrics::mean_square_error;
use dmrecon_core::{CouplingConfig, Method, StateSpec};

#[derive(Parser)]
#[command(name = "dmrecon", version, about = "Direct density-matrix reconstruction with qubit pointers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scenario of a configuration file and write results.csv.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to the config's output_dir, then ./results.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides root_seed.
        #[arg(long, env = SEED_ENV)]
        seed: Option<u64>,
    },
    /// Reconstruct one state from exact or sampled correlations and print it.
    Exact {
        /// pure:<label>, mixed, family:p=<p>,psi=<label> or random:seed=<n>
        #[arg(long)]
        state: String,
        /// Coupling strength, e.g. 0.3 or pi/2.
        #[arg(long)]
        theta: String,
        /// Pointer B strength if different from pointer A.
        #[arg(long)]
        theta_b: Option<String>,
        #[arg(long, default_value = "I")]
        method: String,
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Draw this many events per setting instead of using exact correlations.
        #[arg(long)]
        events: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        bias_epsilon: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run the built-in consistency checks.
    Validate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Machine,
}

fn strength(text: &str) -> anyhow::Result<f64> {
    parse_number(text).map_err(anyhow::Error::msg)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Run { config, out, seed } => {
            let text = fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let mut doc = match parse_config(&text) {
                Ok(doc) => doc,
                Err(errors) => {
                    for e in &errors.0 {
                        eprintln!("{}:{e}", config.display());
                    }
                    return Ok(ExitCode::from(2));
                }
            };
            if let Some(seed) = seed {
                doc.root_seed = seed;
            }
            let dir = out
                .or_else(|| doc.output_dir.as_ref().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("results"));
            let rows = run_all(&doc.scenarios, doc.root_seed)?;
            fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join("results.csv");
            let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            write_results_csv(&rows, std::io::BufWriter::new(file))?;
            println!(
                "{} scenarios, {} rows, root seed {} -> {}",
                doc.scenarios.len(),
                rows.len(),
                doc.root_seed,
                path.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Exact {
            state,
            theta,
            theta_b,
            method,
            d,
            events,
            seed,
            bias_epsilon,
            format,
        } => {
            let spec: StateSpec = state.parse()?;
            let rho = spec.build(d)?;
            let method: Method = method.parse()?;
            let theta_a = strength(&theta)?;
            let theta_b = theta_b.as_deref().map(strength).transpose()?.unwrap_or(theta_a);
            if theta_a == 0.0 || theta_b == 0.0 {
                bail!("theta = 0 makes N_AB = d/(4 sin(theta_A) sin(theta_B)) singular");
            }
            let cfg = CouplingConfig::new(d, theta_a, theta_b)?;
            let bias = if bias_epsilon == 0.0 {
                BiasModel::none()
            } else {
                BiasModel::new(bias_epsilon, 1.0)?
            };
            let (mode, n) = match events {
                Some(n) => (CorrelationMode::Sampled, n),
                None => (CorrelationMode::Exact, 0),
            };
            let result = dmrecon_core::experiments::reconstruct_point(&rho, &cfg, method, mode, n, seed, &bias)?;
            let format = match format {
                Format::Text => MatrixFormat::Text,
                Format::Machine => MatrixFormat::Machine,
            };
            match &result.finalized {
                Some(f) => {
                    print!("{}", write_matrix(f.matrix(), format));
                    if matches!(format, MatrixFormat::Text) {
                        println!("trace distance {:.3e}", f.trace_distance(&rho)?);
                        if mode == CorrelationMode::Sampled {
                            println!("delta rho {:.3e}", mean_square_error(&result.element_errors));
                        }
                    }
                }
                None => {
                    eprintln!("estimate has vanishing trace; raw estimate:");
                    print!("{}", write_matrix(&result.raw, format));
                    return Ok(ExitCode::from(1));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { seed } => {
            let checks = self_check(seed)?;
            let mut ok = true;
            for c in &checks {
                let tag = if c.passed() { "PASS" } else { "FAIL" };
                println!("{tag} {}: max error {:.2e} (tolerance {:.0e})", c.name, c.max_error, c.tolerance);
                ok &= c.passed();
            }
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}
