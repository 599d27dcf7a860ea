//! Command line front end.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use bnsl_core::oracle::{brute_force_optimum, MAX_ORDER_VARIABLES};
use bnsl_core::{
    solve_with, ClusterOrder, Instance, Monitor, ScoreConvention, SolverConfig, Status,
};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::report::{render, Format, RunStats};
use crate::scorefile::{parse_scores, write_scores};
use crate::scorer::{enumerate_domains, Dataset};
use crate::synth::{random_instance, six_edge_network, InstanceShape};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_TIMEOUT: i32 = 3;

/// Largest instance `verify` accepts.
pub const VERIFY_MAX_VARIABLES: usize = 6;
const _: () = assert!(VERIFY_MAX_VARIABLES <= MAX_ORDER_VARIABLES);

#[derive(Parser, Debug)]
#[command(
    name = "bnsl",
    version,
    about = "Exact Bayesian network structure learning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Find a minimum-cost acyclic network for a score file.
    Solve(SolveArgs),
    /// Compute BIC local scores of a CSV dataset.
    Score {
        csv: PathBuf,
        #[arg(long, default_value_t = 3)]
        max_parents: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare the solver with exhaustive enumeration on a small score file.
    Verify {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Convention::Auto)]
        score_convention: Convention,
    },
    /// Write a random cost-convention score file to stdout.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        max_values: usize,
        #[arg(long, default_value_t = 3)]
        max_parents: usize,
        #[arg(long, default_value_t = 20)]
        max_cost: u32,
    },
    /// Write a CSV sample of a random six-variable, six-edge network to stdout.
    Sample {
        #[arg(long, default_value_t = 5000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(clap::Args, Debug)]
struct SolveArgs {
    file: PathBuf,
    /// Stop after this many seconds and report the best network found.
    #[arg(long, value_name = "SEC")]
    time_limit: Option<f64>,
    /// Replace propagation by a plain acyclicity check.
    #[arg(long)]
    no_gac: bool,
    #[arg(long, value_enum, default_value_t = Order::Heuristic)]
    cluster_order: Order,
    /// Use the checker's whole failure set as cluster.
    #[arg(long)]
    no_minimise: bool,
    #[arg(long, value_enum, default_value_t = Convention::Auto)]
    score_convention: Convention,
    #[arg(long, value_enum, default_value_t = Output::Text)]
    out: Output,
    #[arg(long, value_name = "PATH")]
    stats_json: Option<PathBuf>,
    /// Compute the cluster bound only at every k-th depth.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    lb_every_k: u64,
    #[arg(long)]
    pool_max: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Order {
    Heuristic,
    Chrono,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Convention {
    Auto,
    Cost,
    Loglik,
}

impl Convention {
    fn get(self) -> Option<ScoreConvention> {
        match self {
            Convention::Auto => None,
            Convention::Cost => Some(ScoreConvention::Cost),
            Convention::Loglik => Some(ScoreConvention::LogLikelihood),
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Output {
    Text,
    Dot,
    Csv,
}

/// Stops the search once a wall-clock budget is spent.
pub struct Deadline {
    start: Instant,
    limit: Option<Duration>,
}

impl Deadline {
    pub fn new(limit: Option<Duration>) -> Self {
        Self {
            start: Instant::now(),
            limit,
        }
    }
}

impl Monitor for Deadline {
    fn should_stop(&mut self) -> bool {
        self.limit.is_some_and(|l| self.start.elapsed() >= l)
    }
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn load(path: &PathBuf, convention: Convention) -> Result<Instance, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    parse_scores(&text, convention.get()).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

/// Runs the command line `args` (program name first) and returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(Failure(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::Solve(args) => solve_cmd(args, out),
        Command::Score {
            csv,
            max_parents,
            out: target,
        } => {
            let file =
                fs::File::open(&csv).map_err(|e| Failure(format!("{}: {e}", csv.display())))?;
            let data = Dataset::from_csv(file)?;
            let instance = enumerate_domains(&data, max_parents)?;
            fs::write(&target, write_scores(&instance))
                .map_err(|e| Failure(format!("{}: {e}", target.display())))?;
            writeln!(
                out,
                "wrote {} variables, {} parent sets to {}",
                instance.n(),
                instance.total_domain_size(),
                target.display()
            )?;
            Ok(EXIT_OK)
        }
        Command::Verify {
            file,
            score_convention,
        } => {
            let instance = load(&file, score_convention)?;
            if instance.n() > VERIFY_MAX_VARIABLES {
                return Err(Failure(format!(
                    "verify accepts at most {VERIFY_MAX_VARIABLES} variables, file has {}",
                    instance.n()
                )));
            }
            let solved = solve_with(&instance, &SolverConfig::default(), &mut ())
                .incumbent
                .map(|inc| instance.network_cost(&inc.parents));
            let oracle = brute_force_optimum(&instance)?.map(|inc| inc.cost);
            let show = |c: Option<f64>| c.map_or("infeasible".to_string(), |c| c.to_string());
            let same = match (solved, oracle) {
                (Some(a), Some(b)) => (a - b).abs() <= instance.eps(),
                (None, None) => true,
                _ => false,
            };
            let word = if same { "MATCH" } else { "MISMATCH" };
            writeln!(
                out,
                "{word} solver={} oracle={}",
                show(solved),
                show(oracle)
            )?;
            Ok(if same { EXIT_OK } else { EXIT_INFEASIBLE })
        }
        Command::Generate {
            n,
            seed,
            max_values,
            max_parents,
            max_cost,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let shape = InstanceShape {
                n,
                min_values: 1,
                max_values,
                max_parents,
                max_cost,
                with_empty: true,
            };
            out.write_all(write_scores(&random_instance(&mut rng, shape)).as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::Sample { samples, seed } => {
            if samples == 0 {
                return Err(Failure("--samples must be positive".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let net = six_edge_network(&mut rng);
            let data = net.sample(&mut rng, samples);
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(data.names())?;
            for s in 0..data.n_samples() {
                w.write_record((0..data.n_vars()).map(|v| data.column(v)[s].to_string()))?;
            }
            out.write_all(&w.into_inner().map_err(|e| Failure(e.to_string()))?)?;
            Ok(EXIT_OK)
        }
    }
}

fn solve_cmd(args: SolveArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let instance = load(&args.file, args.score_convention)?;
    let config = SolverConfig {
        gac: !args.no_gac,
        cluster_order: match args.cluster_order {
            Order::Heuristic => ClusterOrder::Heuristic,
            Order::Chrono => ClusterOrder::Chronological,
        },
        minimise: !args.no_minimise,
        lb_every_k: args.lb_every_k as usize,
        pool_max: args.pool_max.unwrap_or(usize::MAX),
        ..SolverConfig::default()
    };
    let limit = match args.time_limit {
        Some(t) if !(t.is_finite() && t >= 0.0) => {
            return Err(Failure(format!("invalid time limit {t}")));
        }
        t => t.map(Duration::from_secs_f64),
    };
    let mut deadline = Deadline::new(limit);
    let solution = solve_with(&instance, &config, &mut deadline);
    let wall = deadline.start.elapsed();
    let format = match args.out {
        Output::Text => Format::Text,
        Output::Dot => Format::Dot,
        Output::Csv => Format::Csv,
    };
    out.write_all(render(&instance, &solution, format).as_bytes())?;
    if let Some(path) = &args.stats_json {
        let stats = RunStats::new(&instance, &solution, wall);
        fs::write(path, stats.to_json() + "\n")
            .map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    }
    Ok(match solution.status {
        Status::Optimal => EXIT_OK,
        Status::Infeasible => EXIT_INFEASIBLE,
        Status::Interrupted => EXIT_TIMEOUT,
    })
}
