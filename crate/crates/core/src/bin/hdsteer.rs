use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use hdsteer::certify::certified_schmidt_number;
use hdsteer::quantum::{make_assemblage, BipartiteState, MeasurementSet};
use hdsteer::report::{
    fig3_default, fig3_rows, table1_rows, table2_cells, table2_rows, table3_cells, table3_rows,
    validation_rows, write_rows, Format, Row, SubsetPolicy,
};
use hdsteer::sdp::incompat::incompatibility_eta_g_with;
use hdsteer::sdp::ipm::{InteriorPoint, IpmSettings};
use hdsteer::sdp::steering::steering_robustness_with;
use hdsteer::sdp::{SdpConfig, SdpSolution};
use hdsteer::Result;

#[derive(Parser)]
#[command(
    name = "hdsteer",
    version,
    about = "Steering robustness, incompatibility bounds and Schmidt-number certificates"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Largest d^k for which deterministic strategies are enumerated
    #[arg(long, global = true, default_value_t = 4000)]
    max_strategies: usize,
    /// Worker threads for per-cell work (0 = all cores)
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
    /// Seed for randomised suites
    #[arg(long, global = true, default_value_t = 2024)]
    seed: u64,
    /// Write to this file instead of stdout
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Solver convergence tolerance
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    #[arg(long, global = true)]
    max_iterations: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Subsets {
    /// The first k bases of the construction
    First,
    /// The k-subset with the highest SR at full visibility
    Best,
}

impl From<Subsets> for SubsetPolicy {
    fn from(s: Subsets) -> Self {
        match s {
            Subsets::First => SubsetPolicy::First,
            Subsets::Best => SubsetPolicy::Best,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Steering-robustness ceilings for k measurements and Schmidt number n
    Table1 {
        #[arg(long, default_value_t = 8)]
        kmax: usize,
        #[arg(long, default_value_t = 6)]
        nmax: usize,
    },
    /// SR of the maximally entangled state with k MUBs in dimension d
    Table2 {
        #[arg(long, value_enum, default_value_t = Subsets::Best)]
        subsets: Subsets,
    },
    /// Noise thresholds of the dimension certificates
    Table3 {
        #[arg(long, value_enum, default_value_t = Subsets::Best)]
        subsets: Subsets,
    },
    /// SR(v) lines and bound levels for d = 4
    Fig3 {
        #[arg(long, default_value_t = 21)]
        samples: usize,
    },
    /// Smallest Schmidt number compatible with a steering-robustness lower bound
    Certify {
        #[arg(long)]
        sr: f64,
        #[arg(long)]
        k: usize,
    },
    /// Steering robustness of the isotropic state with k MUBs
    Sr {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1.0)]
        v: f64,
    },
    /// Generalised incompatibility robustness of k MUBs
    Eta {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        k: usize,
    },
    /// Randomised cross-checks of solvers, estimator and parent constructions
    Validate {
        #[arg(long, default_value_t = 20)]
        count: usize,
    },
}

fn config(c: &Common) -> Result<SdpConfig> {
    let mut cfg = SdpConfig::from_env()?.with_cap(c.max_strategies);
    // explicit solver settings select the built-in interior-point engine
    if c.tolerance.is_some() || c.max_iterations.is_some() {
        let mut settings = IpmSettings::default();
        settings.tolerance = c.tolerance.unwrap_or(settings.tolerance);
        settings.max_iterations = c.max_iterations.unwrap_or(settings.max_iterations);
        cfg.solver = Arc::new(InteriorPoint::new(settings));
    }
    Ok(cfg)
}

fn scalar_report(
    out: &mut dyn Write,
    format: OutFormat,
    label: &str,
    sol: &SdpSolution,
    secs: f64,
) -> Result<()> {
    match format {
        OutFormat::Json => {
            let v = json!({
                "quantity": label,
                "value": sol.value,
                "gap": sol.gap,
                "status": sol.status,
                "seconds": secs,
                "diagnostics": sol.diagnostics,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
        }
        OutFormat::Csv => {
            writeln!(out, "{label} = {:.10}", sol.value)?;
            writeln!(out, "gap = {:.3e}", sol.gap)?;
            writeln!(
                out,
                "status = {:?}, iterations = {}",
                sol.status, sol.diagnostics.iterations
            )?;
            writeln!(out, "time = {secs:.3} s")?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let c = &cli.common;
    let format = match c.format {
        OutFormat::Csv => Format::Csv,
        OutFormat::Json => Format::Json,
    };
    let mut out: Box<dyn Write> = match &c.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    };
    let cfg = config(c)?;
    let rows: Vec<Row> = match cli.command {
        Command::Table1 { kmax, nmax } => table1_rows(kmax, nmax)?,
        Command::Table2 { subsets } => table2_rows(&table2_cells(), subsets.into(), &cfg, c.jobs)?,
        Command::Table3 { subsets } => table3_rows(&table3_cells(), subsets.into(), &cfg, c.jobs)?,
        Command::Fig3 { samples } => fig3_rows(&fig3_default(samples, &cfg)?),
        Command::Validate { count } => {
            let rows = validation_rows(c.seed, count, &cfg)?;
            write_rows(&rows, format, &mut out)?;
            out.flush()?;
            if rows.iter().any(|r| r.source != "pass") {
                return Err(hdsteer::Error::Consistency(
                    "validation checks failed".into(),
                ));
            }
            return Ok(());
        }
        Command::Certify { sr, k } => {
            let cert = certified_schmidt_number(sr, k)?;
            match c.format {
                OutFormat::Json => writeln!(out, "{}", serde_json::to_string_pretty(&cert)?)?,
                OutFormat::Csv => {
                    writeln!(out, "sr_lower = {sr}, k = {k}")?;
                    for e in &cert.witness_trace {
                        let verdict = if e.excluded { "excluded" } else { "allowed" };
                        writeln!(
                            out,
                            "  n = {:<3} ceiling {:.6} ({}) {verdict}",
                            e.n,
                            e.sr_ceiling,
                            e.source.as_str()
                        )?;
                    }
                    if let Some(w) = cert.closed_form_n {
                        writeln!(out, "closed-form witness: n >= {w:.6}")?;
                    }
                    for w in &cert.warnings {
                        writeln!(out, "warning: {w}")?;
                    }
                    writeln!(out, "certified_n = {}", cert.certified_n)?;
                }
            }
            out.flush()?;
            return Ok(());
        }
        Command::Sr { d, k, v } => {
            let start = Instant::now();
            let asm = make_assemblage(
                &BipartiteState::isotropic(d, v)?,
                &MeasurementSet::mubs(d, k)?,
            )?;
            let sol = steering_robustness_with(&asm, &cfg)?;
            scalar_report(
                &mut out,
                c.format,
                "SR",
                &sol,
                start.elapsed().as_secs_f64(),
            )?;
            out.flush()?;
            return Ok(());
        }
        Command::Eta { d, k } => {
            let start = Instant::now();
            let sol = incompatibility_eta_g_with(&MeasurementSet::mubs(d, k)?, &cfg)?;
            scalar_report(
                &mut out,
                c.format,
                "eta_g",
                &sol,
                start.elapsed().as_secs_f64(),
            )?;
            out.flush()?;
            return Ok(());
        }
    };
    write_rows(&rows, format, &mut out)?;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
