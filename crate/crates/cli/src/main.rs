use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use steklov::experiments::{run, ExperimentName, ExperimentRecord, ExperimentSpec, Status, Thresholds};
use steklov::weights::ArcKind;
use steklov::WeightFamily;

/// Exit code for rejected input, distinct from the run outcomes.
const EXIT_INPUT: u8 = 4;

#[derive(Parser)]
#[command(
    name = "steklov",
    version,
    about = "Numerical experiments for orthogonal polynomials with Muckenhoupt weights"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// A_2 characteristic of Fisher–Hartwig weights across β
    A2(Common),
    /// Orthonormality and leading-coefficient checks of the Szegő recursion
    Opuc(Common),
    /// Polynomial entropy against its limit
    Entropy(Common),
    /// Strong Szegő errors ‖φ_n* − D⁻¹‖ in L^p_w
    Szego(Common),
    /// Growth of ‖Φ_n‖ in L^p_w for Fisher–Hartwig weights
    Steklov(Common),
    /// Distance between weighted Riesz projections under weight perturbation
    Continuity(Common),
    /// Clark family, dual weight and entropy invariance
    Clark(Common),
    /// Norm probes of the orthogonal projection onto degree < n
    Projection(Common),
    /// Empirical boundedness threshold against the A_2 characteristic
    Pcr(Common),
    /// List the experiment names and their default configurations
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Arcs {
    Dyadic,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    FisherHartwig,
    BernsteinSzego,
    Constant,
}

#[derive(Args)]
struct Common {
    /// log2 of the number of grid nodes
    #[arg(long, default_value_t = 14)]
    grid_log2: u32,
    /// Weight family; Fisher–Hartwig sweeps over --beta
    #[arg(long, value_enum)]
    family: Option<Family>,
    /// Fisher–Hartwig exponents (comma separated)
    #[arg(long, value_delimiter = ',')]
    beta: Option<Vec<f64>>,
    /// Bernstein–Szegő parameter, |a| < 1
    #[arg(long, default_value_t = 0.5)]
    a: f64,
    /// Largest degree; the degree grid doubles up to it
    #[arg(long)]
    nmax: Option<usize>,
    /// Explicit degree grid (comma separated), overrides --nmax
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Exponents p (comma separated)
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    /// Target A_2 characteristics for `pcr` (comma separated)
    #[arg(long, value_delimiter = ',')]
    t: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random starts per norm estimate
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, value_enum, default_value_t = Arcs::Dyadic)]
    arcs: Arcs,
    /// Write the table here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Alternative thresholds file (TOML, same layout as the bundled one)
    #[arg(long)]
    thresholds: Option<PathBuf>,
    /// Suppress the summary on stderr
    #[arg(long)]
    quiet: bool,
}

fn build_spec(name: ExperimentName, c: &Common) -> ExperimentSpec {
    let mut spec = ExperimentSpec::new(name);
    spec.grid_log2 = c.grid_log2;
    spec.seed = c.seed;
    spec.arcs = match c.arcs {
        Arcs::Dyadic => ArcKind::Dyadic,
        Arcs::Full => ArcKind::Full,
    };
    match c.family {
        Some(Family::BernsteinSzego) => {
            spec.betas.clear();
            spec.family = WeightFamily::BernsteinSzego { a: c.a };
        }
        Some(Family::Constant) => {
            spec.betas.clear();
            spec.family = WeightFamily::Constant { value: 1.0 };
        }
        Some(Family::FisherHartwig) | None => {}
    }
    if let Some(b) = &c.beta {
        spec.betas = b.clone();
    }
    if let Some(n) = &c.n {
        spec.n_grid = n.clone();
    } else if let Some(nmax) = c.nmax {
        let start = spec.n_grid.first().copied().unwrap_or(1).min(nmax).max(1);
        spec.n_grid = std::iter::successors(Some(start), |n| Some(n * 2))
            .take_while(|&n| n <= nmax)
            .collect();
        if spec.n_grid.last() != Some(&nmax) {
            spec.n_grid.push(nmax);
        }
    }
    if let Some(p) = &c.p {
        spec.p_grid = p.clone();
    }
    if let Some(t) = &c.t {
        spec.t_grid = t.clone();
    }
    if let Some(trials) = c.trials {
        spec.trials = trials;
    }
    spec
}

fn write_csv(rec: &ExperimentRecord, out: Box<dyn Write>) -> Result<(), Box<dyn std::error::Error>> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&rec.columns)?;
    for row in &rec.rows {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn write_json(rec: &ExperimentRecord, mut out: Box<dyn Write>) -> Result<(), Box<dyn std::error::Error>> {
    let fit = rec.fits.first().map(|f| {
        json!({
            "exponent": f.exponent,
            "r2": f.r2,
            "predicted_exponent": f.predicted_exponent,
            "pass": f.pass,
        })
    });
    let doc = json!({
        "experiment": rec.name,
        "version": rec.version,
        "seed": rec.seed,
        "grid_log2": rec.grid_log2,
        "status": rec.status,
        "wall_time_s": rec.wall_time_s,
        "spec": rec.spec,
        "rows": rec.row_maps(),
        "fit": fit,
        "fits": rec.fits,
        "checks": rec.checks,
        "failure": rec.failure,
    });
    serde_json::to_writer_pretty(&mut out, &doc)?;
    writeln!(out)?;
    Ok(())
}

fn exit_code(status: Status) -> u8 {
    match status {
        Status::Pass => 0,
        Status::Error => 1,
        Status::Flagged => 2,
        Status::Fail => 3,
    }
}

fn input_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_INPUT)
}

fn execute(name: ExperimentName, c: &Common) -> ExitCode {
    let thresholds = match &c.thresholds {
        None => Thresholds::frozen(),
        Some(path) => match std::fs::read_to_string(path)
            .map_err(|e| e.to_string())
            .and_then(|t| Thresholds::from_toml(&t).map_err(|e| e.to_string()))
        {
            Ok(t) => t,
            Err(e) => return input_error(format!("{}: {e}", path.display())),
        },
    };
    let spec = build_spec(name, c);
    let record = match run(&spec, &thresholds) {
        Ok(r) => r,
        Err(e) => return input_error(e),
    };
    let out: Box<dyn Write> = match &c.out {
        None => Box::new(io::stdout().lock()),
        Some(path) => match File::create(path) {
            Ok(f) => Box::new(io::BufWriter::new(f)),
            Err(e) => return input_error(format!("{}: {e}", path.display())),
        },
    };
    let written = match c.format {
        Format::Csv => write_csv(&record, out),
        Format::Json => write_json(&record, out),
    };
    if let Err(e) = written {
        eprintln!("error: writing output failed: {e}");
        return ExitCode::from(1);
    }
    if !c.quiet {
        eprint!("{}", record.summary());
    }
    ExitCode::from(exit_code(record.status))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (name, common) = match &cli.command {
        Command::A2(c) => (ExperimentName::A2Scaling, c),
        Command::Opuc(c) => (ExperimentName::OpucOrthonormality, c),
        Command::Entropy(c) => (ExperimentName::EntropyLimit, c),
        Command::Szego(c) => (ExperimentName::StrongSzego, c),
        Command::Steklov(c) => (ExperimentName::FhGrowth, c),
        Command::Continuity(c) => (ExperimentName::Continuity, c),
        Command::Clark(c) => (ExperimentName::ClarkDuality, c),
        Command::Projection(c) => (ExperimentName::ProjectionBound, c),
        Command::Pcr(c) => (ExperimentName::PcrUpperTrend, c),
        Command::List => {
            for name in ExperimentName::ALL {
                let spec = ExperimentSpec::new(name);
                println!(
                    "{name}: betas {:?}, n {:?}, p {:?}, t {:?}",
                    spec.betas, spec.n_grid, spec.p_grid, spec.t_grid
                );
            }
            return ExitCode::SUCCESS;
        }
    };
    execute(name, common)
}
