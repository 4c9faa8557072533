use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use modqd::genome::Descriptor;
use modqd::runner::{self, io, ExperimentConfig, SweepSpec};
use modqd::search::AlgorithmKind;

#[derive(Parser)]
#[command(name = "modqd", version, about = "Evolve modular robot bodies and gaits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run repetitions of one algorithm and write per-repetition CSVs.
    Run(RunArgs),
    /// Grid-search the variation parameters.
    Sweep(SweepArgs),
    /// Re-simulate a genome file or verify an archive dump.
    Replay(ReplayArgs),
}

#[derive(Args)]
struct Overrides {
    /// TOML config; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    algorithm: Option<AlgorithmKind>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    init_size: Option<usize>,
    /// Charge the initial population against the generation budget.
    #[arg(long)]
    strict_budget: bool,
    /// Evaluate on a single thread.
    #[arg(long)]
    serial: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Overrides {
    fn apply(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(a) = self.algorithm {
            cfg.algorithm = a;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.repetitions {
            cfg.repetitions = v;
        }
        if let Some(v) = self.generations {
            cfg.generations = v;
        }
        if let Some(v) = self.batch_size {
            cfg.batch_size = v;
        }
        if self.init_size.is_some() {
            cfg.init_size = self.init_size;
        }
        cfg.strict_budget |= self.strict_budget;
        if self.serial {
            cfg.parallel = false;
        }
        if let Some(out) = &self.out {
            cfg.out = out.clone();
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    overrides: Overrides,
    /// Algorithms to sweep; all three when omitted.
    #[arg(long = "algorithms", value_enum, value_delimiter = ',')]
    algorithms: Vec<AlgorithmKind>,
    /// TOML file with `p_morph`, `p_cross`, `p_ctrl` and `sigma` arrays.
    #[arg(long)]
    grid: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    /// A genome JSON file, or an `archive.csv` dump.
    input: PathBuf,
    /// Pick one elite `M,J` from an archive dump.
    #[arg(long, value_parser = parse_cell)]
    cell: Option<Descriptor>,
    /// Write the root trajectory CSV here.
    #[arg(long)]
    trajectory: Option<PathBuf>,
    /// Config supplying the simulator and morphology limits.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn parse_cell(s: &str) -> Result<Descriptor, String> {
    let (m, j) = s.split_once(',').ok_or("expected M,J")?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("`{v}`: {e}"));
    Ok(Descriptor::new(parse(m)?, parse(j)?))
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let cfg = args.overrides.apply()?;
    let summaries = runner::run(&cfg)?;
    for s in summaries {
        let f = &s.final_stats;
        println!(
            "rep {:02} seed {} evaluations {} max_fitness {} qd_score {} coverage {:.4} -> {}",
            s.repetition,
            s.seed,
            f.evaluations,
            f.max_fitness,
            f.qd_score,
            f.coverage,
            s.dir.display()
        );
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let base = args.overrides.apply()?;
    let spec = match &args.grid {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            toml::from_str::<SweepSpec>(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => SweepSpec::default(),
    };
    let algorithms = if args.algorithms.is_empty() { AlgorithmKind::ALL.to_vec() } else { args.algorithms };
    let entries = runner::sweep(&base, &spec, &algorithms, base.repetitions)?;
    runner::write_sweep(&base.out, &entries)?;
    for e in entries.iter().filter(|e| e.rank == 1) {
        let v = &e.variation;
        println!(
            "{}: p_morph {} p_cross {} p_ctrl {} sigma {} (median max_fitness {})",
            e.algorithm, v.p_morph, v.p_cross, v.p_ctrl, v.sigma, e.median_max_fitness
        );
    }
    Ok(())
}

fn cmd_replay(args: ReplayArgs) -> Result<()> {
    let cfg = match &args.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    let is_archive = args.input.extension().is_some_and(|e| e == "csv");
    if !is_archive {
        if args.cell.is_some() {
            bail!("--cell needs an archive.csv input");
        }
        let genome = runner::load_genome(&args.input)?;
        let replay = runner::replay(&genome, &cfg.limits, &cfg.sim);
        println!("descriptor {} fitness {}", replay.descriptor, replay.result.fitness);
        if let Some(path) = &args.trajectory {
            io::write_trajectory(path, replay.result.trajectory.as_deref().unwrap_or_default())?;
        }
        return Ok(());
    }

    if let Some(cell) = args.cell {
        let rows = io::read_archive(&args.input)?;
        let row = rows
            .iter()
            .find(|r| r.descriptor == cell)
            .with_context(|| format!("no elite in cell {cell}"))?;
        let replay = runner::replay(&row.genome, &cfg.limits, &cfg.sim);
        println!("descriptor {} recorded {} replayed {}", replay.descriptor, row.fitness, replay.result.fitness);
        if let Some(path) = &args.trajectory {
            io::write_trajectory(path, replay.result.trajectory.as_deref().unwrap_or_default())?;
        }
        if replay.result.fitness.to_bits() != row.fitness.to_bits() || replay.descriptor != row.descriptor {
            bail!("replay does not reproduce cell {cell}");
        }
        return Ok(());
    }

    if args.trajectory.is_some() {
        bail!("--trajectory with an archive needs --cell");
    }
    let checks = runner::verify_archive(&args.input, &cfg.limits, &cfg.sim)?;
    let failed: Vec<_> = checks.iter().filter(|c| !c.matches()).collect();
    for c in &failed {
        eprintln!(
            "mismatch in cell {}: recorded {} replayed {} ({})",
            c.descriptor, c.recorded, c.replayed, c.replayed_descriptor
        );
    }
    println!("{} elites, {} reproduced", checks.len(), checks.len() - failed.len());
    if !failed.is_empty() {
        bail!("{} elites did not reproduce", failed.len());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Replay(a) => cmd_replay(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
