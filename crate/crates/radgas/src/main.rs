use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use radgas::diagnostics::fit_loglog;
use radgas::harness::config::parse_config;
use radgas::harness::presets::{run_preset, PRESET_NAMES};
use radgas::harness::runner::{linear_table, run_experiment};
use radgas::harness::sweep::{parse_plan, sweep};
use radgas::harness::verify::{verify, EXIT_OPERATIONAL, EXIT_PASS};

#[derive(Parser)]
#[command(name = "radgas", about = "Pseudo-spectral radiating-gas laboratory")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one experiment from a JSON config
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a canned theorem preset
    Preset {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a plan of experiments, up to --jobs concurrently
    Sweep {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a decay exponent from a CSV time series
    Fit {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        quantity: String,
        #[arg(long)]
        t_lo: f64,
        #[arg(long)]
        t_hi: f64,
    },
    /// Check every run summary in a directory; exit 0/1/2
    Verify { dir: PathBuf },
    /// Emit the dispersion-relation table m(xi), exp(t m(xi)) as CSV
    Linear {
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, value_delimiter = ',')]
        k: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        t: Vec<f64>,
    },
}

fn csv_fit(path: &PathBuf, quantity: &str, t_lo: f64, t_hi: f64) -> Result<(), String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty CSV")?;
    let cols: Vec<&str> = header.split(',').collect();
    let qi = cols
        .iter()
        .position(|&c| c == quantity)
        .ok_or_else(|| format!("column '{quantity}' not in {cols:?}"))?;
    let mut pts = Vec::new();
    for (ln, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(format!("row {} has {} fields, expected {}", ln + 2, fields.len(), cols.len()));
        }
        let t: f64 = fields[0].parse().map_err(|e| format!("row {}: {e}", ln + 2))?;
        let y: f64 = fields[qi].parse().map_err(|e| format!("row {}: {e}", ln + 2))?;
        if t >= t_lo && t <= t_hi {
            pts.push((t, y));
        }
    }
    let (slope, stderr, r2) = fit_loglog(&pts).map_err(|e| e.to_string())?;
    println!(
        "quantity {quantity}: slope {slope:.6} (stderr {stderr:.2e}, r2 {r2:.6}, {} samples in [{t_lo}, {t_hi}])",
        pts.len()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::Run { config, out } => match parse_config(&config).and_then(|cfg| {
            run_experiment(&cfg, out.as_deref())
        }) {
            Ok(s) => {
                println!(
                    "{}: verdict {} ({} fits, {} monitors, {} steps, {:.2} s)",
                    s.name,
                    if s.verdict { "pass" } else { "FAIL" },
                    s.fits.len(),
                    s.monitors.len(),
                    s.steps,
                    s.wall_time_s
                );
                if s.verdict { EXIT_PASS } else { 1 }
            }
            Err(e) => {
                eprintln!("run: {e}");
                EXIT_OPERATIONAL
            }
        },
        Cmd::Preset { name, out } => match run_preset(&name, out.as_deref()) {
            Ok(s) => {
                for f in &s.fits {
                    println!(
                        "  {}: theory {:.4} measured {:.4} +/- {:.3} -> {:?}",
                        f.id, f.fit.theory, f.fit.slope, f.fit.tolerance, f.fit.verdict
                    );
                }
                for m in &s.monitors {
                    println!("  {}: {}", m.name, if m.pass { "pass" } else { "FAIL" });
                }
                println!("{name}: verdict {}", if s.verdict { "pass" } else { "FAIL" });
                if s.verdict { EXIT_PASS } else { 1 }
            }
            Err(e) => {
                eprintln!("preset: {e} (known presets: {})", PRESET_NAMES.join(", "));
                EXIT_OPERATIONAL
            }
        },
        Cmd::Sweep { plan, jobs, out } => match parse_plan(&plan).and_then(|p| {
            sweep(&p, jobs, out.as_deref())
        }) {
            Ok(agg) => {
                println!(
                    "sweep: {} summaries, {} failures, all_pass = {}",
                    agg.summaries.len(),
                    agg.failures.len(),
                    agg.all_pass
                );
                if agg.all_pass { EXIT_PASS } else { 1 }
            }
            Err(e) => {
                eprintln!("sweep: {e}");
                EXIT_OPERATIONAL
            }
        },
        Cmd::Fit { csv, quantity, t_lo, t_hi } => match csv_fit(&csv, &quantity, t_lo, t_hi) {
            Ok(()) => EXIT_PASS,
            Err(e) => {
                eprintln!("fit: {e}");
                EXIT_OPERATIONAL
            }
        },
        Cmd::Verify { dir } => {
            let rep = verify(&dir);
            print!("{}", rep.table);
            rep.exit_code
        }
        Cmd::Linear { n, k, t } => {
            print!("{}", linear_table(n, &k, &t));
            EXIT_PASS
        }
    };
    ExitCode::from(code as u8)
}
