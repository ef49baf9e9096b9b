use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{error::ErrorKind, Parser, Subcommand};

use eprb::config::{parse_angle, parse_config, ExperimentConfig, Protocol};
use eprb::experiment::{run_experiment, with_threads};
use eprb::io::{format_real, read_pairs};
use eprb::postselect::{acceptance_probability, toy_postselect, ToyCriterion};
use eprb::stats::{gill_conjecture_experiment, GillProtocol};
use eprb::{quantum_correlation, sawtooth_oracle, Error};

/// Event-by-event EPRB simulator.
#[derive(Debug, Parser)]
#[command(name = "eprb", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment described by a config file and write
    /// events.csv, sweep.csv and summary.json.
    Simulate {
        config: PathBuf,
        /// Output directory (overrides `output_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Master seed (overrides `seed`).
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; results do not depend on this.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Analytic reference values.
    Oracle {
        #[command(subcommand)]
        which: Oracle,
    },
    /// Repeat an unselected experiment and count runs with |S| > 2.
    Gill {
        #[arg(long)]
        runs: usize,
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Post-select a file of (x, y) pairs by their sum.
    Toy {
        /// plus2, minus2 or zero
        #[arg(long)]
        criterion: ToyCriterion,
        pairs: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum Oracle {
    /// Sawtooth and quantum correlations at settings a, b (radians).
    Corr {
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
    },
    /// Probability that a pair survives window w, given the two squared
    /// sines and r_min.
    Accept {
        s1sq: f64,
        s2sq: f64,
        w: f64,
        rmin: f64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("eprb: {e}");
            ExitCode::from(if e.is_usage() { 1 } else { 2 })
        }
    }
}

fn load_config(path: &Path) -> eprb::Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

fn run(command: Command) -> eprb::Result<()> {
    match command {
        Command::Simulate {
            config,
            out,
            seed,
            threads,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(dir) = out {
                cfg.output_dir = dir;
            }
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let summary = run_experiment(&cfg, threads)?;
            println!("events {}", summary.event_count);
            println!(
                "unselected S {} (fixed placement {})",
                format_real(summary.unselected.s_max_over_sign_placements),
                format_real(summary.unselected.s_value)
            );
            for row in &summary.windows {
                let s = row
                    .report
                    .as_ref()
                    .map_or("NA".to_string(), |r| format_real(r.s_max_over_sign_placements));
                let flag = if row.insufficient() { " insufficient" } else { "" };
                println!(
                    "W/T {} S {} retention {}{}",
                    format_real(row.window_over_t),
                    s,
                    format_real(row.retention_min()),
                    flag
                );
            }
            println!("wrote {}", cfg.output_dir.display());
            Ok(())
        }
        Command::Oracle { which } => {
            match which {
                Oracle::Corr { a, b } => {
                    let a = parse_angle(&a)?;
                    let b = parse_angle(&b)?;
                    println!("sawtooth {}", format_real(sawtooth_oracle(a, b)));
                    println!("quantum {}", format_real(quantum_correlation(a, b)));
                }
                Oracle::Accept { s1sq, s2sq, w, rmin } => {
                    let inside = |v: f64| (0.0..=1.0).contains(&v);
                    if !inside(s1sq) || !inside(s2sq) {
                        return Err(Error::Config("squared sines must lie in [0, 1]".into()));
                    }
                    if !(w.is_finite() && w >= 0.0) {
                        return Err(Error::Config("window must be a nonnegative number".into()));
                    }
                    if !(0.0..1.0).contains(&rmin) {
                        return Err(Error::Config("r_min must lie in [0, 1)".into()));
                    }
                    println!("{}", format_real(acceptance_probability(s1sq, s2sq, w, rmin)));
                }
            }
            Ok(())
        }
        Command::Gill {
            runs,
            config,
            seed,
            threads,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let protocol = match cfg.protocol {
                Protocol::P1 => GillProtocol::P1,
                Protocol::P2Extracted => GillProtocol::P2Extracted,
                Protocol::P2 => GillProtocol::P2Full,
                Protocol::Augmented => {
                    return Err(Error::Config(
                        "gill needs protocol p1, p2 or p2-extracted".into(),
                    ))
                }
            };
            let model = cfg.model();
            let outcome = with_threads(threads, || {
                gill_conjecture_experiment(
                    runs,
                    cfg.n_per_setting,
                    &cfg.settings,
                    cfg.schedule,
                    protocol,
                    &model,
                    cfg.seed,
                )
            })??;
            let m = outcome.runs.len() as f64;
            let violations = (outcome.violation_fraction * m).round() as u64;
            let band = 3.0 * (0.25 / m).sqrt();
            println!("runs {}", outcome.runs.len());
            println!("violations {violations}");
            println!("violation_fraction {}", format_real(outcome.violation_fraction));
            println!("one_sided_fraction {}", format_real(outcome.one_sided_fraction));
            println!("band_3se {}", format_real(band));
            Ok(())
        }
        Command::Toy { criterion, pairs } => {
            let samples = read_pairs(&pairs)?;
            let sel = toy_postselect(&samples, criterion)?;
            let e = &sel.estimate;
            println!("criterion {criterion}");
            println!("input {}", samples.len());
            println!("retained {}", sel.retained.len());
            println!("n_pp {}", e.n_pp);
            println!("n_pm {}", e.n_pm);
            println!("n_mp {}", e.n_mp);
            println!("n_mm {}", e.n_mm);
            println!("E {}", format_real(e.e_value));
            Ok(())
        }
    }
}
