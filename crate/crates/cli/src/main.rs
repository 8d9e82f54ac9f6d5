//! `chanopt` — estimate neighborhood Wi-Fi pain and pick channel allocations.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 solver error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use chanopt::harness::{self, ExperimentSpec};
use chanopt::io::{self, MatrixDocument};
use chanopt::solver::{solve_with, SolverReportDocument};
use chanopt::synth::{self, Layout, SynthConfig};
use chanopt::{estimation::EstimationConfig, Error, Neighborhood, SolverKind};

#[derive(Parser)]
#[command(name = "chanopt", version, about = "Neighborhood Wi-Fi channel optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate U, S, S^b, and P matrices from telemetry CSVs.
    Estimate {
        /// Usage CSVs (one or more; concatenated).
        #[arg(long, required = true, num_args = 1..)]
        usage: Vec<PathBuf>,
        #[arg(long)]
        scans: PathBuf,
        #[arg(long)]
        macmap: PathBuf,
        /// Estimation config JSON; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Channel count recorded in the emitted documents.
        #[arg(long, default_value_t = 2, value_parser = channels_parser())]
        channels: usize,
        /// Output directory for u.json, s.json, sb.json, p.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve a pain matrix for a channel allocation.
    Solve {
        /// Pain matrix document (p.json).
        #[arg(long)]
        pain: PathBuf,
        /// Channel count; defaults to the document's num_channels.
        #[arg(long, value_parser = channels_parser())]
        channels: Option<usize>,
        #[arg(long, value_parser = parse_solver)]
        solver: SolverKind,
        /// Overrides any seed in --config.
        #[arg(long)]
        seed: Option<u64>,
        /// Solver config JSON; missing fields take defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the solver report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-evaluate an allocation against a pain matrix.
    Evaluate {
        #[arg(long)]
        pain: PathBuf,
        /// Allocation document, or a solver report to take it from.
        #[arg(long)]
        allocation: PathBuf,
    },
    /// Run a train/test experiment described by a spec file.
    Pipeline {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Generate a synthetic neighborhood dataset.
    Synth {
        /// Layout: grid:<rows>x<cols> or building:<floors>x<units>.
        #[arg(long, default_value = "building:2x4", value_parser = parse_layout)]
        layout: Layout,
        #[arg(long, default_value_t = 1.5)]
        radius: f64,
        #[arg(long, default_value_t = 0.5)]
        sigma: f64,
        #[arg(long, default_value_t = 4)]
        train_days: usize,
        #[arg(long, default_value_t = 1)]
        test_days: usize,
        #[arg(long, default_value_t = 2, value_parser = channels_parser())]
        channels: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory; also receives a ready-to-run experiment.json.
        #[arg(long)]
        out: PathBuf,
    },
}

fn channels_parser() -> clap::builder::RangedU64ValueParser<usize> {
    clap::builder::RangedU64ValueParser::<usize>::new().range(2..)
}

fn parse_solver(s: &str) -> Result<SolverKind, String> {
    s.parse::<SolverKind>().map_err(|e| e.to_string())
}

fn parse_layout(s: &str) -> Result<Layout, String> {
    let err = || format!("`{s}` is not grid:<rows>x<cols> or building:<floors>x<units>");
    let (kind, dims) = s.split_once(':').ok_or_else(err)?;
    let (a, b) = dims.split_once('x').ok_or_else(err)?;
    let a: usize = a.parse().map_err(|_| err())?;
    let b: usize = b.parse().map_err(|_| err())?;
    match kind {
        "grid" => Ok(Layout::Grid { rows: a, cols: b }),
        "building" => Ok(Layout::Building {
            floors: a,
            units_per_floor: b,
        }),
        _ => Err(err()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_solver_error() { 3 } else { 2 })
        }
    }
}

fn run(command: Command) -> chanopt::Result<()> {
    match command {
        Command::Estimate {
            usage,
            scans,
            macmap,
            config,
            channels,
            out,
        } => estimate(&usage, &scans, &macmap, config.as_deref(), channels, &out),
        Command::Solve {
            pain,
            channels,
            solver,
            seed,
            config,
            out,
        } => solve(&pain, channels, solver, seed, config.as_deref(), out.as_deref()),
        Command::Evaluate { pain, allocation } => evaluate(&pain, &allocation),
        Command::Pipeline { spec } => pipeline(&spec),
        Command::Synth {
            layout,
            radius,
            sigma,
            train_days,
            test_days,
            channels,
            seed,
            out,
        } => generate_synth(layout, radius, sigma, train_days, test_days, channels, seed, &out),
    }
}

fn estimate(
    usage: &[PathBuf],
    scans: &Path,
    macmap: &Path,
    config: Option<&Path>,
    channels: usize,
    out: &Path,
) -> chanopt::Result<()> {
    let cfg: EstimationConfig = match config {
        Some(path) => io::read_json(path)?,
        None => EstimationConfig::default(),
    };
    let est = harness::estimate_from_files(usage, scans, macmap, &cfg, channels)?;
    std::fs::create_dir_all(out).map_err(|e| Error::Io {
        path: out.to_path_buf(),
        source: e,
    })?;
    for (name, matrix) in [
        ("u.json", &est.u),
        ("s.json", &est.s),
        ("sb.json", &est.s_b),
        ("p.json", &est.p),
    ] {
        let doc = MatrixDocument::from_pain(&est.neighborhood, matrix)?;
        io::write_json(&out.join(name), &doc)?;
    }
    println!(
        "estimated {} homes -> {}/{{u,s,sb,p}}.json",
        est.neighborhood.num_homes(),
        out.display()
    );
    Ok(())
}

fn solve(
    pain: &Path,
    channels: Option<usize>,
    solver: SolverKind,
    seed: Option<u64>,
    config: Option<&Path>,
    out: Option<&Path>,
) -> chanopt::Result<()> {
    let doc: MatrixDocument = io::read_json(pain)?;
    let num_channels = channels.unwrap_or(doc.num_channels);
    if num_channels < 2 {
        return Err(Error::Invalid {
            what: "solve request",
            why: format!("num_channels must be at least 2, got {num_channels}"),
        });
    }
    let (_, p) = doc.to_pain()?;
    let neighborhood = Neighborhood::new(doc.home_ids.clone(), num_channels)?;
    let cfg: serde_json::Value = match config {
        Some(path) => io::read_json(path)?,
        None => serde_json::Value::Null,
    };
    let report = solve_with(solver, &p, num_channels, &cfg, seed)?;
    if let Some(out) = out {
        io::write_json(out, &report.to_document(&neighborhood)?)?;
    }
    println!("{}", report.objective);
    Ok(())
}

fn evaluate(pain: &Path, allocation: &Path) -> chanopt::Result<()> {
    let pain_doc: MatrixDocument = io::read_json(pain)?;
    let (_, p) = pain_doc.to_pain()?;

    // Accept either a bare allocation document or a full solver report.
    let value: serde_json::Value = io::read_json(allocation)?;
    let alloc_doc: MatrixDocument = serde_json::from_value(value.clone())
        .or_else(|_| {
            serde_json::from_value::<SolverReportDocument>(value).map(|r| r.allocation)
        })
        .map_err(|e| Error::Json {
            path: allocation.to_path_buf(),
            message: e.to_string(),
        })?;
    if alloc_doc.home_ids != pain_doc.home_ids {
        return Err(Error::Invalid {
            what: "evaluate request",
            why: "allocation and pain documents list different homes".into(),
        });
    }
    let (_, alloc) = alloc_doc.to_allocation()?;
    let breakdown = p.per_home_pain(&alloc)?;
    let output = serde_json::json!({
        "home_ids": pain_doc.home_ids,
        "per_home": breakdown.per_home,
        "total": breakdown.total,
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&output).expect("json serializes")
    );
    Ok(())
}

fn pipeline(spec_path: &Path) -> chanopt::Result<()> {
    let spec: ExperimentSpec = io::read_json(spec_path)?;
    let base = spec_path.parent().unwrap_or(Path::new("."));
    let report = harness::run_pipeline(&spec, base)?;
    for (name, outcome) in &report.solvers {
        println!(
            "{name}: train_pain_per_day={} test_pain={}",
            outcome.train_pain_per_day, outcome.test_pain
        );
    }
    println!(
        "report written to {}",
        harness::resolve(base, &spec.output_path).display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn generate_synth(
    layout: Layout,
    radius: f64,
    sigma: f64,
    train_days: usize,
    test_days: usize,
    channels: usize,
    seed: u64,
    out: &Path,
) -> chanopt::Result<()> {
    let n_homes = layout.capacity();
    let cfg = SynthConfig {
        n_homes,
        layout,
        sensing_radius: radius,
        base_usage_profile: synth::random_base_profiles(n_homes, seed),
        day_noise_sigma: sigma,
        n_train_days: train_days,
        n_test_days: test_days,
        num_channels: channels,
        seed,
    };
    let data = synth::generate(&cfg)?;
    data.write_to_dir(out)?;

    let spec = ExperimentSpec {
        train_day_dirs: (0..train_days).map(synth::usage_file_name).collect(),
        test_day_dirs: (train_days..train_days + test_days)
            .map(synth::usage_file_name)
            .collect(),
        scans: "scans.csv".into(),
        macmap: "macmap.csv".into(),
        num_channels: channels,
        estimation: EstimationConfig::default(),
        solvers: vec![
            harness::SolverEntry {
                name: None,
                solver: SolverKind::Anneal,
                config: serde_json::Value::Null,
            },
            harness::SolverEntry {
                name: None,
                solver: SolverKind::BranchAndBound,
                config: serde_json::Value::Null,
            },
        ],
        seed,
        output_path: "report.json".into(),
    };
    io::write_json(&out.join("experiment.json"), &spec)?;
    println!(
        "wrote {} homes, {} days to {} (experiment.json included)",
        n_homes,
        train_days + test_days,
        out.display()
    );
    Ok(())
}
