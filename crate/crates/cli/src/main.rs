//! Command-line front end for the belief benchmark: run full experiment
//! grids, extract single posterior beliefs, or validate configuration files.

mod config;
mod output;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use robust_belief::{
    run_experiment, run_experiment_observed, AcquisitionTrace, BeliefGrid, DivergenceSpec,
    ExperimentConfig, Method, ProblemSpec, RunObserver,
};

use crate::output::RunManifest;

#[derive(Parser)]
#[command(
    name = "robust-belief",
    version,
    about = "Benchmark classifier-based and generative density-ratio estimators \
             for divergence-penalized belief updates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file and write a result table.
    Run(RunArgs),
    /// Compute one posterior belief (and acquisition trace) for a single
    /// seed, divergence, and method.
    Belief(BeliefArgs),
    /// Check a config file and print the resolved settings without running.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to a TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for the manifest and result table.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Replace the configured seed list with seeds 0..N.
    #[arg(long)]
    seeds: Option<u64>,
    /// Cap the worker thread count (env: ROBUST_BELIEF_THREADS).
    #[arg(long)]
    threads: Option<usize>,
    /// Override a config key, e.g. --override bayesopt.n_total=40.
    /// May be given multiple times.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Also write every reference belief, posterior belief, and acquisition
    /// trace under <out>/dumps/.
    #[arg(long)]
    dump_beliefs: bool,
}

#[derive(Args)]
struct BeliefArgs {
    /// Path to a TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// One of the methods configured in the file.
    #[arg(long)]
    method: String,
    /// One of the divergences configured in the file.
    #[arg(long)]
    divergence: String,
    /// Seed for data simulation and the estimation pipeline.
    #[arg(long)]
    seed: u64,
    /// Output directory for belief.csv (and trace.csv where applicable).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Cap the worker thread count (env: ROBUST_BELIEF_THREADS).
    #[arg(long)]
    threads: Option<usize>,
    /// Override a config key. May be given multiple times.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Path to a TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override a config key. May be given multiple times.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Belief(args) => cmd_belief(args),
        Command::Validate(args) => cmd_validate(args),
    };
    std::process::exit(code);
}

/// Exit status for configuration problems (parse errors, invalid settings,
/// unconfigured names).
const EXIT_CONFIG: i32 = 2;
/// Exit status for runs that completed with one or more failed cells.
const EXIT_PARTIAL: i32 = 3;

fn init_threads(flag: Option<usize>) {
    let from_env = std::env::var("ROBUST_BELIEF_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    if let Some(n) = flag.or(from_env) {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
        {
            log::warn!("thread pool already initialized: {e}");
        }
    }
}

/// Read, override, and resolve a config file; on any problem print every
/// diagnostic and return the config exit status.
fn load_config(
    path: &Path,
    overrides: &[String],
    seeds_flag: Option<u64>,
) -> Result<(String, ExperimentConfig), i32> {
    let contents = match fs::read_to_string(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return Err(EXIT_CONFIG);
        }
    };
    let (echo, file) = match config::parse_with_overrides(&contents, overrides, seeds_flag) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error in {}: {e}", path.display());
            return Err(EXIT_CONFIG);
        }
    };
    match file.resolve() {
        Ok(c) => Ok((echo, c)),
        Err(violations) => {
            eprintln!("config {} is invalid:", path.display());
            for v in &violations {
                eprintln!("  - {v}");
            }
            Err(EXIT_CONFIG)
        }
    }
}

/// Writes belief and trace artifacts for every cell of an observed run.
struct DumpObserver {
    spec: ProblemSpec,
    dir: PathBuf,
}

impl DumpObserver {
    fn dump(&self, name: String, contents: String) {
        let path = self.dir.join(name);
        if let Err(e) = output::write_atomic(&path, &contents) {
            log::warn!("could not write {}: {e}", path.display());
        }
    }
}

impl RunObserver for DumpObserver {
    fn on_true_belief(&mut self, seed: u64, divergence: &DivergenceSpec, belief: &BeliefGrid) {
        self.dump(
            format!("true_belief_{}_seed{}.csv", divergence.name(), seed),
            output::belief_csv(&self.spec, belief),
        );
    }

    fn on_trace(&mut self, seed: u64, method: Method, trace: &AcquisitionTrace) {
        self.dump(
            format!("trace_{}_seed{}.csv", method.name(), seed),
            output::trace_csv(&self.spec, trace),
        );
    }

    fn on_belief(
        &mut self,
        seed: u64,
        divergence: &DivergenceSpec,
        method: Method,
        belief: &BeliefGrid,
    ) {
        self.dump(
            format!(
                "belief_{}_{}_seed{}.csv",
                divergence.name(),
                method.name(),
                seed
            ),
            output::belief_csv(&self.spec, belief),
        );
    }
}

fn cmd_run(args: RunArgs) -> i32 {
    init_threads(args.threads);
    let (echo, config) = match load_config(&args.config, &args.overrides, args.seeds) {
        Ok(x) => x,
        Err(code) => return code,
    };

    if let Err(e) = fs::create_dir_all(&args.out) {
        eprintln!("error: cannot create {}: {e}", args.out.display());
        return 1;
    }
    let manifest = RunManifest::new(&args.config, &args.out, &echo);
    if let Err(e) = manifest.write_to(&args.out.join("manifest.json")) {
        eprintln!("error: {e:#}");
        return 1;
    }

    eprintln!(
        "running {}: {} seeds x {} divergences x {} methods",
        config.problem.label,
        config.seeds.len(),
        config.divergences.len(),
        config.methods.len()
    );

    let table = if args.dump_beliefs {
        let mut observer = DumpObserver {
            spec: config.problem.clone(),
            dir: args.out.join("dumps"),
        };
        run_experiment_observed(&config, &mut observer)
    } else {
        run_experiment(&config)
    };
    let table = match table {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };

    let results_path = args.out.join("results.csv");
    if let Err(e) = output::write_atomic(&results_path, &table.to_csv()) {
        eprintln!("error: {e:#}");
        return 1;
    }
    println!("wrote {}", results_path.display());

    let failures = table.failed_cells();
    if failures.is_empty() {
        0
    } else {
        eprintln!("{} cell(s) failed:", failures.len());
        for (process, divergence, seed, message) in &failures {
            eprintln!("  - {process}/{divergence} seed {seed}: {message}");
        }
        EXIT_PARTIAL
    }
}

/// Captures the artifacts of the single cell a belief run computes.
#[derive(Default)]
struct CaptureObserver {
    belief: Option<BeliefGrid>,
    trace: Option<AcquisitionTrace>,
}

impl RunObserver for CaptureObserver {
    fn on_trace(&mut self, _seed: u64, _method: Method, trace: &AcquisitionTrace) {
        self.trace = Some(trace.clone());
    }

    fn on_belief(
        &mut self,
        _seed: u64,
        _divergence: &DivergenceSpec,
        _method: Method,
        belief: &BeliefGrid,
    ) {
        self.belief = Some(belief.clone());
    }
}

fn cmd_belief(args: BeliefArgs) -> i32 {
    init_threads(args.threads);
    let (_, config) = match load_config(&args.config, &args.overrides, None) {
        Ok(x) => x,
        Err(code) => return code,
    };

    let method = match config
        .methods
        .iter()
        .find(|m| m.name() == args.method)
        .copied()
    {
        Some(m) => m,
        None => {
            let valid: Vec<&str> = config.methods.iter().map(|m| m.name()).collect();
            eprintln!(
                "error: method '{}' is not configured; configured methods: {}",
                args.method,
                valid.join(", ")
            );
            return EXIT_CONFIG;
        }
    };
    let divergence = match config
        .divergences
        .iter()
        .find(|d| d.name() == args.divergence)
        .cloned()
    {
        Some(d) => d,
        None => {
            let valid: Vec<String> = config.divergences.iter().map(|d| d.name()).collect();
            eprintln!(
                "error: divergence '{}' is not configured; configured divergences: {}",
                args.divergence,
                valid.join(", ")
            );
            return EXIT_CONFIG;
        }
    };

    // A one-cell run reproduces exactly the artifacts of the full grid:
    // data simulation and per-method randomness are keyed by seed and
    // method name alone, never by which other cells are present.
    let cell = ExperimentConfig {
        divergences: vec![divergence],
        methods: vec![method],
        seeds: vec![args.seed],
        ..config
    };
    let mut capture = CaptureObserver::default();
    let table = match run_experiment_observed(&cell, &mut capture) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let failures = table.failed_cells();
    if !failures.is_empty() {
        for (process, divergence, seed, message) in &failures {
            eprintln!("error: {process}/{divergence} seed {seed}: {message}");
        }
        return EXIT_PARTIAL;
    }
    let Some(belief) = capture.belief else {
        eprintln!("error: run produced no belief");
        return 1;
    };

    let belief_path = args.out.join("belief.csv");
    if let Err(e) = output::write_atomic(&belief_path, &output::belief_csv(&cell.problem, &belief))
    {
        eprintln!("error: {e:#}");
        return 1;
    }
    println!("wrote {}", belief_path.display());

    if method.uses_trace() {
        let Some(trace) = capture.trace else {
            eprintln!("error: run produced no acquisition trace");
            return 1;
        };
        let trace_path = args.out.join("trace.csv");
        if let Err(e) = output::write_atomic(&trace_path, &output::trace_csv(&cell.problem, &trace))
        {
            eprintln!("error: {e:#}");
            return 1;
        }
        println!("wrote {}", trace_path.display());
    }
    0
}

fn cmd_validate(args: ValidateArgs) -> i32 {
    let (echo, config) = match load_config(&args.config, &args.overrides, None) {
        Ok(x) => x,
        Err(code) => return code,
    };
    println!("# resolved configuration ({})", args.config.display());
    print!("{echo}");
    println!(
        "# ok: {} cells ({} seeds x {} divergences x {} methods)",
        config.seeds.len() * config.divergences.len() * config.methods.len(),
        config.seeds.len(),
        config.divergences.len(),
        config.methods.len()
    );
    0
}
