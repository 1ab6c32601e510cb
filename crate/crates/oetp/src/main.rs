//! Command-line tool around the timetabling toolkit: instance generation,
//! validation, statistics, heuristics, the exact solver pipeline, MILP
//! export and solution checking.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use oetp_core::gen::{generate_instance, instance_stats, DegreeShape, GeneratorConfig};
use oetp_core::heuristics::{
    greedy_assign, local_search_improve, restrict_pool, CandidateOrder, GreedyPolicy, KeptReason,
    ScheduleChoice,
};
use oetp_core::solver::{branch_and_bound, Clock, Limits, StepRule, Termination};
use oetp_core::{Instance, Solution, SolveConfig};
use serde::Serialize;
use thiserror::Error;

use oetp::clock::StdClock;
use oetp::io::{self, DocumentError};
use oetp::mps::{self, ExportError, MpsOptions};
use oetp::report::{events_csv, PoolSummary, RunReport};

const EXIT_CODES_HELP: &str = "Exit codes:
  0  success
  1  file system error
  2  malformed input document
  3  validation failure (invalid instance, config or infeasible solution)
  4  solver contract violation
  5  limits reached without a feasible result";

#[derive(Parser)]
#[command(
    name = "oetp",
    version,
    about = "Assign exam candidates to schedules under shared resource capacities",
    after_help = EXIT_CODES_HELP
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic instance document
    Generate(GenerateArgs),
    /// Check an instance document against the model invariants
    Validate(ValidateArgs),
    /// Print aggregate statistics of an instance
    Stats(StatsArgs),
    /// Run the constructive heuristic (plus improvement pass) and write a solution
    Greedy(GreedyArgs),
    /// Full pipeline: greedy, improvement, pool restriction, branch and bound
    Solve(SolveArgs),
    /// Export the MILP as free-format MPS, optionally with a warm-start file
    Export(ExportArgs),
    /// Evaluate a solution document against an instance
    Check(CheckArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    /// Fewest compatible schedules first
    MostConstrained,
    /// Candidate id order
    Input,
}

impl From<OrderArg> for CandidateOrder {
    fn from(value: OrderArg) -> Self {
        match value {
            OrderArg::MostConstrained => CandidateOrder::MostConstrainedFirst,
            OrderArg::Input => CandidateOrder::InputOrder,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ChoiceArg {
    /// Keep the tightest consumed resource as slack as possible
    MaxMinResidual,
    /// First schedule that fits, in id order
    FirstFeasible,
}

impl From<ChoiceArg> for ScheduleChoice {
    fn from(value: ChoiceArg) -> Self {
        match value {
            ChoiceArg::MaxMinResidual => ScheduleChoice::MaxMinResidual,
            ChoiceArg::FirstFeasible => ScheduleChoice::FirstFeasible,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DegreeShapeArg {
    Uniform,
    Skewed,
}

impl From<DegreeShapeArg> for DegreeShape {
    fn from(value: DegreeShapeArg) -> Self {
        match value {
            DegreeShapeArg::Uniform => DegreeShape::Uniform,
            DegreeShapeArg::Skewed => DegreeShape::Skewed,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    /// Destination instance document
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 7804)]
    candidates: u32,
    #[arg(long, default_value_t = 7759)]
    schedules: u32,
    #[arg(long, default_value_t = 103)]
    resources: u32,
    /// Total number of compatibility relations (hit exactly)
    #[arg(long, default_value_t = 1_123_321)]
    relations: u64,
    /// Minimum resources consumed per schedule
    #[arg(long, default_value_t = 1)]
    usage_min: u32,
    /// Maximum resources consumed per schedule
    #[arg(long, default_value_t = 4)]
    usage_max: u32,
    /// Total capacity relative to the demand of assigning everyone
    #[arg(long, default_value_t = 1.0)]
    capacity_factor: f64,
    /// How candidate compatibility spreads over schedules
    #[arg(long, value_enum, default_value_t = DegreeShapeArg::Uniform)]
    degree_shape: DegreeShapeArg,
}

#[derive(Args)]
struct ValidateArgs {
    /// Instance document to check
    #[arg(long)]
    input: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    /// Instance document to summarize
    #[arg(long)]
    input: PathBuf,
    /// Write JSON here instead of standard output
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GreedyArgs {
    /// Instance document
    #[arg(long)]
    input: PathBuf,
    /// Destination solution document
    #[arg(long)]
    output: PathBuf,
    /// Seed for randomized tie-breaking (omit for id-order ties)
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = OrderArg::MostConstrained)]
    greedy_order: OrderArg,
    #[arg(long, value_enum, default_value_t = ChoiceArg::MaxMinResidual)]
    greedy_choice: ChoiceArg,
    /// Skip the ejection-chain improvement pass
    #[arg(long)]
    no_local_search: bool,
    /// Improvement budget: fit checks plus ejection attempts
    #[arg(long, default_value_t = 200_000)]
    ls_budget: u64,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance document
    #[arg(long)]
    input: PathBuf,
    /// Destination solution document; the run report lands beside it
    #[arg(long)]
    output: PathBuf,
    /// Seed for randomized greedy tie-breaking (omit for id-order ties)
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = OrderArg::MostConstrained)]
    greedy_order: OrderArg,
    #[arg(long, value_enum, default_value_t = ChoiceArg::MaxMinResidual)]
    greedy_choice: ChoiceArg,
    /// Skip the ejection-chain improvement pass
    #[arg(long)]
    no_local_search: bool,
    /// Improvement budget: fit checks plus ejection attempts
    #[arg(long, default_value_t = 200_000)]
    ls_budget: u64,
    /// Extra unsaturated schedules kept beyond the incumbent's
    #[arg(long, default_value_t = 100)]
    pool_extra: usize,
    /// Wall-clock budget for the whole pipeline, in seconds
    #[arg(long, default_value_t = 1200.0)]
    time_limit_s: f64,
    /// Stop branch and bound after this many explored nodes
    #[arg(long)]
    node_limit: Option<u64>,
    /// Subgradient steps for the root bound
    #[arg(long, default_value_t = 200)]
    root_iters: u32,
    /// Subgradient steps per node refinement
    #[arg(long, default_value_t = 30)]
    node_iters: u32,
    /// Initial subgradient step scale
    #[arg(long, default_value_t = 2.0)]
    mu0: f64,
    /// Halve the step scale after this many non-improving steps
    #[arg(long, default_value_t = 20)]
    halve_after: u32,
    /// Also write the restricted model (MPS) here, warm start beside it
    #[arg(long)]
    emit_mps: Option<PathBuf>,
    /// Use minimization convention in emitted MPS
    #[arg(long)]
    negate_objective: bool,
    /// Write the search event trace here as CSV
    #[arg(long)]
    log_csv: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    /// Instance document
    #[arg(long)]
    input: PathBuf,
    /// Destination MPS file
    #[arg(long)]
    output: PathBuf,
    /// Solution document to export as a warm start beside the model (.mst)
    #[arg(long)]
    solution: Option<PathBuf>,
    /// Use minimization convention (-1 costs, no OBJSENSE section)
    #[arg(long)]
    negate_objective: bool,
}

#[derive(Args)]
struct CheckArgs {
    /// Instance document
    #[arg(long)]
    input: PathBuf,
    /// Solution document to evaluate
    #[arg(long)]
    solution: PathBuf,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Document {
        path: PathBuf,
        source: DocumentError,
    },
    #[error("generator config: {0}")]
    Generator(String),
    #[error("validation failed: {0}")]
    Infeasible(String),
    #[error("solver contract: {0}")]
    Solver(String),
    #[error("limits reached without a feasible result")]
    LimitsWithoutSolution,
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Document { source, .. } => {
                if source.is_syntactic() {
                    2
                } else {
                    3
                }
            }
            CliError::Generator(_) | CliError::Infeasible(_) => 3,
            CliError::Solver(_) => 4,
            CliError::LimitsWithoutSolution => 5,
        }
    }
}

fn read_to_string(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_instance(path: &Path) -> Result<Instance, CliError> {
    io::parse_instance(&read_to_string(path)?).map_err(|source| CliError::Document {
        path: path.to_path_buf(),
        source,
    })
}

fn read_solution(path: &Path, instance: &Instance) -> Result<Solution, CliError> {
    io::parse_solution(&read_to_string(path)?, instance).map_err(|source| CliError::Document {
        path: path.to_path_buf(),
        source,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => run_generate(args),
        Command::Validate(args) => run_validate(args),
        Command::Stats(args) => run_stats(args),
        Command::Greedy(args) => run_greedy(args),
        Command::Solve(args) => run_solve(args),
        Command::Export(args) => run_export(args),
        Command::Check(args) => run_check(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run_generate(args: GenerateArgs) -> Result<(), CliError> {
    let config = GeneratorConfig {
        seed: args.seed,
        num_candidates: args.candidates,
        num_schedules: args.schedules,
        num_resources: args.resources,
        target_relations: args.relations,
        resources_per_schedule: (args.usage_min, args.usage_max),
        capacity_factor: args.capacity_factor,
        degree_shape: args.degree_shape.into(),
    };
    let instance =
        generate_instance(&config).map_err(|err| CliError::Generator(err.to_string()))?;
    write_file(&args.output, &io::serialize_instance(&instance))?;
    println!(
        "generated {} candidates, {} schedules, {} resources, {} relations (seed {})",
        instance.num_candidates(),
        instance.num_schedules(),
        instance.num_resources(),
        instance.relations(),
        args.seed
    );
    println!("wrote instance to {}", args.output.display());
    Ok(())
}

fn run_validate(args: ValidateArgs) -> Result<(), CliError> {
    let instance = read_instance(&args.input)?;
    println!(
        "valid: {} candidates, {} schedules, {} resources, {} relations",
        instance.num_candidates(),
        instance.num_schedules(),
        instance.num_resources(),
        instance.relations()
    );
    Ok(())
}

#[derive(Serialize)]
struct StatsDocument {
    num_candidates: usize,
    num_schedules: usize,
    num_resources: usize,
    relations: u64,
    mean_compat_degree: f64,
    capacity_total: i64,
    compat_degree_histogram: Vec<u64>,
    usage_size_histogram: Vec<u64>,
    /// `null` where a resource has demand but zero capacity.
    demand_supply_ratio: Vec<Option<f64>>,
}

fn run_stats(args: StatsArgs) -> Result<(), CliError> {
    let instance = read_instance(&args.input)?;
    let stats = instance_stats(&instance);
    let doc = StatsDocument {
        num_candidates: stats.num_candidates,
        num_schedules: stats.num_schedules,
        num_resources: stats.num_resources,
        relations: stats.relations,
        mean_compat_degree: stats.mean_compat_degree(),
        capacity_total: stats.capacity_total,
        compat_degree_histogram: stats.compat_degree_histogram,
        usage_size_histogram: stats.usage_size_histogram,
        demand_supply_ratio: stats
            .demand_supply_ratio
            .iter()
            .map(|&x| x.is_finite().then_some(x))
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("stats serialization cannot fail");
    text.push('\n');
    match &args.output {
        Some(path) => {
            write_file(path, &text)?;
            println!("wrote stats to {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn greedy_policy(order: OrderArg, choice: ChoiceArg, seed: Option<u64>) -> GreedyPolicy {
    GreedyPolicy {
        candidate_order: order.into(),
        schedule_choice: choice.into(),
        tie_seed: seed,
    }
}

fn run_greedy(args: GreedyArgs) -> Result<(), CliError> {
    let instance = read_instance(&args.input)?;
    let n = instance.num_candidates();
    let policy = greedy_policy(args.greedy_order, args.greedy_choice, args.seed);
    let greedy = greedy_assign(&instance, &policy);
    println!("greedy: {} / {} assigned", greedy.value(), n);
    let solution = if args.no_local_search {
        greedy
    } else {
        let improved = local_search_improve(&instance, &greedy, args.ls_budget);
        println!("local search: {} / {} assigned", improved.value(), n);
        improved
    };
    write_file(&args.output, &io::serialize_solution(&solution))?;
    println!("wrote solution to {}", args.output.display());
    Ok(())
}

fn report_path_for(output: &Path) -> PathBuf {
    output.with_extension("report.json")
}

fn run_solve(args: SolveArgs) -> Result<(), CliError> {
    let clock = StdClock::new();
    let instance = read_instance(&args.input)?;
    let n = instance.num_candidates();

    let policy = greedy_policy(args.greedy_order, args.greedy_choice, args.seed);
    let greedy = greedy_assign(&instance, &policy);
    println!("greedy: {} / {} assigned", greedy.value(), n);

    let incumbent = if args.no_local_search {
        greedy.clone()
    } else {
        let improved = local_search_improve(&instance, &greedy, args.ls_budget);
        println!("local search: {} / {} assigned", improved.value(), n);
        improved
    };

    let (restriction, sub) = restrict_pool(&instance, &incumbent, args.pool_extra);
    let used = restriction
        .kept()
        .iter()
        .filter(|&&(_, reason)| reason == KeptReason::UsedByIncumbent)
        .count();
    println!(
        "pool: kept {} schedules ({} used + {} extra)",
        restriction.len(),
        used,
        restriction.len() - used
    );

    if let Some(mps_path) = &args.emit_mps {
        let options = MpsOptions {
            negate_objective: args.negate_objective,
        };
        write_file(mps_path, &mps::export_mps(&sub, &options))?;
        let warm = mps::export_warm_start(&sub, &incumbent)
            .map_err(|err| CliError::Solver(err.to_string()))?;
        let mst_path = mps_path.with_extension("mst");
        write_file(&mst_path, &warm)?;
        println!(
            "wrote model to {} and warm start to {}",
            mps_path.display(),
            mst_path.display()
        );
    }

    let config = SolveConfig {
        limits: Limits {
            time_limit_secs: Some(args.time_limit_s),
            node_limit: args.node_limit,
        },
        step: StepRule {
            mu0: args.mu0,
            halve_after: args.halve_after,
        },
        root_iterations: args.root_iters,
        node_iterations: args.node_iters,
        log_events: args.log_csv.is_some(),
    };
    let report = branch_and_bound(&sub, Some(&incumbent), &config, &clock)
        .map_err(|err| CliError::Solver(err.to_string()))?;

    let evaluation = instance
        .evaluate(&report.incumbent)
        .map_err(|err| CliError::Solver(err.to_string()))?;
    if !evaluation.feasible {
        return Err(if report.termination == Termination::Optimal {
            CliError::Solver("solver returned an infeasible solution".into())
        } else {
            CliError::LimitsWithoutSolution
        });
    }

    write_file(&args.output, &io::serialize_solution(&report.incumbent))?;
    let run_report = RunReport::new(
        &instance,
        greedy.value(),
        (!args.no_local_search).then(|| incumbent.value()),
        Some(PoolSummary {
            kept_schedules: restriction.len(),
            used_by_incumbent: used,
            extra_requested: args.pool_extra,
        }),
        &report,
    );
    let report_path = report_path_for(&args.output);
    write_file(&report_path, &run_report.render())?;
    if let Some(csv_path) = &args.log_csv {
        write_file(csv_path, &events_csv(&report.events))?;
    }

    println!(
        "solver: {} / {} assigned ({}, nodes {}, restricted-pool bound {})",
        report.incumbent.value(),
        n,
        report.termination,
        report.nodes_explored,
        report.bound.integer_bound
    );
    println!(
        "proven optimal on restricted pool: {}",
        report.proven_optimal
    );
    println!("wrote solution to {}", args.output.display());
    println!("wrote report to {}", report_path.display());
    println!("wall time: {:.2} s", clock.elapsed_secs());
    Ok(())
}

fn run_export(args: ExportArgs) -> Result<(), CliError> {
    let instance = read_instance(&args.input)?;
    let options = MpsOptions {
        negate_objective: args.negate_objective,
    };
    write_file(&args.output, &mps::export_mps(&instance, &options))?;
    println!(
        "wrote model to {} ({} columns, {} constraint rows)",
        args.output.display(),
        instance.relations(),
        instance.num_resources() + instance.num_candidates()
    );

    if let Some(solution_path) = &args.solution {
        let solution = read_solution(solution_path, &instance)?;
        let warm = mps::export_warm_start(&instance, &solution).map_err(|err| match err {
            ExportError::Model(_) | ExportError::Infeasible { .. } => {
                CliError::Infeasible(err.to_string())
            }
        })?;
        let mst_path = args.output.with_extension("mst");
        write_file(&mst_path, &warm)?;
        println!(
            "wrote warm start to {} ({} entries)",
            mst_path.display(),
            solution.value()
        );
    }
    Ok(())
}

fn run_check(args: CheckArgs) -> Result<(), CliError> {
    let instance = read_instance(&args.input)?;
    let solution = read_solution(&args.solution, &instance)?;
    let evaluation = instance
        .evaluate(&solution)
        .map_err(|err| CliError::Infeasible(err.to_string()))?;
    if evaluation.feasible {
        println!(
            "feasible: {} / {} candidates assigned",
            evaluation.value,
            instance.num_candidates()
        );
        Ok(())
    } else {
        const SHOWN: usize = 8;
        for violation in evaluation.violations.iter().take(SHOWN) {
            eprintln!("violation: {violation}");
        }
        if evaluation.violations.len() > SHOWN {
            eprintln!("… and {} more", evaluation.violations.len() - SHOWN);
        }
        Err(CliError::Infeasible(format!(
            "{} constraint violations",
            evaluation.violations.len()
        )))
    }
}
