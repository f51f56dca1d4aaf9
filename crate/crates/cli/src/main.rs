//! Command-line harness: single runs, the multi-level protocol, parameter
//! grid search, program execution against problem sets, set generation, and
//! trajectory export.
//!
//! All persisted outputs (run logs, reports, CSV tables) are deterministic
//! functions of the configuration and seeds; timing goes to stderr only.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use loopsynth_core::benchmarks::{self, generate_set, Benchmark, GeneratedSet, Split};
use loopsynth_core::harness::{
    self, default_levels, desk_levels, grid_csv, grid_search, log_record, problem_set_seed,
    run_protocol, Algorithm, BenchmarkReport, GridSpec, ProtocolConfig, ProtocolLevel,
};
use loopsynth_core::isa::{self, MachineProfile};
use loopsynth_core::scoring::{self, read_problem_set};
use loopsynth_core::tis100::{self, TargetImage};

#[derive(Parser)]
#[command(
    name = "loopsynth",
    about = "Stochastic synthesis of low-level looping programs from input/output examples",
    version
)]
struct Cli {
    /// Defaults file with `key = value` lines mirroring the long flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One synthesis run; prints a summary and optionally appends a log line.
    Run(RunArgs),
    /// The multi-level run protocol with a report over all runs.
    Protocol(ProtocolArgs),
    /// Parameter grid search over the operator probabilities and period.
    Grid(GridArgs),
    /// Execute a program file against a problem set or target image.
    Exec(ExecArgs),
    /// Generate a problem-set file (or a target-image file).
    Gen(GenArgs),
    /// Export (evaluations, train %, test %) trajectories from a run log.
    Trace(TraceArgs),
    /// List benchmarks and profiles.
    List,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    benchmark: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// delayed-acceptance (da) or basic-hillclimbing (bh).
    #[arg(long)]
    algorithm: Option<String>,
    /// Period length I in evaluations.
    #[arg(long)]
    period: Option<u64>,
    #[arg(long)]
    max_periods: Option<u64>,
    #[arg(long)]
    swap_p: Option<f64>,
    #[arg(long)]
    double_p: Option<f64>,
    #[arg(long)]
    copy_p: Option<f64>,
    #[arg(long)]
    train_count: Option<usize>,
    #[arg(long)]
    test_count: Option<usize>,
    /// Profile override for the image puzzles (tis100-p21 ... tis100-p1999).
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProtocolArgs {
    #[arg(long)]
    benchmark: Option<String>,
    #[arg(long)]
    seed_base: Option<u64>,
    /// Desk-scale preset: one level of 10 runs, I=75k, 4 periods.
    #[arg(long)]
    desk: bool,
    /// Explicit level as `runs,period,max_periods`; repeatable, in order.
    #[arg(long = "level")]
    levels: Vec<String>,
    /// Single-level override: run count (with --period / --max-periods).
    #[arg(long)]
    runs: Option<u64>,
    #[arg(long)]
    period: Option<u64>,
    #[arg(long)]
    max_periods: Option<u64>,
    #[arg(long)]
    algorithm: Option<String>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    train_count: Option<usize>,
    #[arg(long)]
    test_count: Option<usize>,
    /// Skip the natural-termination extension of capped successful runs.
    #[arg(long)]
    no_extend: bool,
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    /// Comma-separated benchmark names; defaults to the five warm-up
    /// problems.
    #[arg(long)]
    benchmarks: Option<String>,
    #[arg(long)]
    runs_per_cell: Option<u64>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    seed_base: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExecArgs {
    /// Program file in the canonical text format.
    #[arg(long)]
    program: PathBuf,
    /// Problem-set file produced by `gen`.
    #[arg(long)]
    problems: Option<PathBuf>,
    /// Target-image file (30x18 digit grid) for TIS-100 programs.
    #[arg(long)]
    image: Option<PathBuf>,
    #[arg(long)]
    cycle_bound: Option<u64>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    benchmark: Option<String>,
    /// train or test.
    #[arg(long)]
    split: Option<String>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TraceArgs {
    /// Run log (JSON lines) produced by `run` or `protocol`.
    #[arg(long)]
    log: PathBuf,
    #[arg(long)]
    benchmark: Option<String>,
    /// Seed base the log was produced with (to regenerate its sets).
    #[arg(long)]
    seed_base: Option<u64>,
    #[arg(long)]
    train_count: Option<usize>,
    #[arg(long)]
    test_count: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// `key = value` defaults, lowest-priority configuration layer.
struct Config(HashMap<String, String>);

impl Config {
    fn load(path: Option<&Path>) -> Result<Config> {
        let mut map = HashMap::new();
        if let Some(path) = path {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            for (i, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| anyhow!("{}:{}: expected key = value", path.display(), i + 1))?;
                map.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        Ok(Config(map))
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| anyhow!("config key `{key}`: cannot parse `{raw}`")),
        }
    }

    fn string(&self, key: &str) -> Option<String> {
        self.0.get(key).cloned()
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = dispatch(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(2);
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let config = Config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Run(args) => cmd_run(args, &config),
        Command::Protocol(args) => cmd_protocol(args, &config),
        Command::Grid(args) => cmd_grid(args, &config),
        Command::Exec(args) => cmd_exec(args),
        Command::Gen(args) => cmd_gen(args, &config),
        Command::Trace(args) => cmd_trace(args, &config),
        Command::List => cmd_list(),
    }
}

fn parse_benchmark(name: &str) -> Result<Benchmark> {
    Benchmark::from_name(name).ok_or_else(|| {
        let names: Vec<_> = benchmarks::ALL.iter().map(|b| b.name()).collect();
        anyhow!("unknown benchmark `{name}`; valid names: {}", names.join(", "))
    })
}

fn parse_profile(name: &str) -> Result<&'static MachineProfile> {
    MachineProfile::from_name(name).ok_or_else(|| {
        let names: Vec<_> = MachineProfile::all().iter().map(|p| p.name()).collect();
        anyhow!("unknown profile `{name}`; valid names: {}", names.join(", "))
    })
}

fn parse_algorithm(name: &str) -> Result<Algorithm> {
    Algorithm::from_name(name).ok_or_else(|| {
        anyhow!("unknown algorithm `{name}`; use delayed-acceptance (da) or basic-hillclimbing (bh)")
    })
}

/// Output directory: flag, then config, then LOOPSYNTH_OUT.
fn out_dir(flag: Option<PathBuf>, config: &Config) -> Option<PathBuf> {
    flag.or_else(|| config.string("out").map(PathBuf::from))
        .or_else(|| std::env::var_os("LOOPSYNTH_OUT").map(PathBuf::from))
}

fn write_out(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn required_benchmark(flag: Option<String>, config: &Config) -> Result<Benchmark> {
    let name = flag
        .or_else(|| config.string("benchmark"))
        .ok_or_else(|| anyhow!("--benchmark is required"))?;
    parse_benchmark(&name)
}

fn resolve_profile(
    benchmark: Benchmark,
    flag: Option<String>,
    config: &Config,
) -> Result<Option<&'static MachineProfile>> {
    let name = flag.or_else(|| config.string("profile"));
    match name {
        None => Ok(None),
        Some(name) => {
            let profile = parse_profile(&name)?;
            if profile.kind != benchmark.profile().kind {
                bail!(
                    "profile `{}` does not fit benchmark `{}`",
                    profile.name(),
                    benchmark.name()
                );
            }
            Ok(Some(profile))
        }
    }
}

fn cmd_run(args: RunArgs, config: &Config) -> Result<()> {
    let benchmark = required_benchmark(args.benchmark, config)?;
    let seed = args.seed.or(config.get("seed")?).unwrap_or(0);
    let algorithm = match args.algorithm.or_else(|| config.string("algorithm")) {
        Some(name) => parse_algorithm(&name)?,
        None => Algorithm::DelayedAcceptance,
    };
    let level = ProtocolLevel {
        runs: 1,
        period: args.period.or(config.get("period")?).unwrap_or(75_000),
        max_periods: args.max_periods.or(config.get("max-periods")?).unwrap_or(4),
    };
    let proto = ProtocolConfig {
        seed_base: seed,
        levels: vec![level],
        algorithm,
        swap_p: args.swap_p.or(config.get("swap-p")?).unwrap_or(0.1),
        double_p: args.double_p.or(config.get("double-p")?).unwrap_or(0.9),
        copy_p: args.copy_p.or(config.get("copy-p")?).unwrap_or(0.5),
        threads: 1,
        train_count: args.train_count.or(config.get("train-count")?).unwrap_or(200),
        test_count: args.test_count.or(config.get("test-count")?).unwrap_or(2000),
        extend_for_smallest: false,
        profile_override: resolve_profile(benchmark, args.profile, config)?,
    };
    let started = Instant::now();
    let (report, outcomes) = run_protocol(benchmark, &proto);
    let outcome = &outcomes[0];
    println!("benchmark: {}", benchmark.name());
    println!("algorithm: {}", algorithm.name());
    println!("seed: {} (run seed {})", seed, outcome.seed);
    println!("evaluations: {}", outcome.record.total_evaluations);
    println!("halt: {:?}", outcome.record.halt);
    println!("train_success: {}", outcome.record.train_success);
    println!("final_score: {}", outcome.record.final_score);
    if let Some(size) = outcome.smallest_size {
        println!("smallest_size: {size}");
    }
    if let Some(gen) = outcome.generalizes {
        println!("generalizes: {gen}");
    }
    if let Some((size, cycles)) = report.tis_best {
        println!("tis_best: {size} instructions, {cycles} cycles");
    }
    if let Some(dir) = out_dir(args.out, config) {
        let record = log_record(benchmark, &proto, report.level_index, outcome);
        let path = write_out(&dir, "runs.jsonl", &harness::write_run_log(&[record]))?;
        println!("log: {}", path.display());
    }
    eprintln!("completed in {:.1}s", started.elapsed().as_secs_f64());
    Ok(())
}

fn parse_levels(args: &ProtocolArgs, config: &Config) -> Result<Vec<ProtocolLevel>> {
    if !args.levels.is_empty() {
        return args
            .levels
            .iter()
            .map(|spec| {
                let parts: Vec<_> = spec.split(',').collect();
                if parts.len() != 3 {
                    bail!("--level expects `runs,period,max_periods`, got `{spec}`");
                }
                Ok(ProtocolLevel {
                    runs: parts[0].trim().parse()?,
                    period: parts[1].trim().parse()?,
                    max_periods: parts[2].trim().parse()?,
                })
            })
            .collect();
    }
    if args.desk {
        return Ok(desk_levels());
    }
    if args.runs.is_some() || args.period.is_some() || args.max_periods.is_some() {
        return Ok(vec![ProtocolLevel {
            runs: args.runs.or(config.get("runs")?).unwrap_or(10),
            period: args.period.or(config.get("period")?).unwrap_or(75_000),
            max_periods: args.max_periods.or(config.get("max-periods")?).unwrap_or(4),
        }]);
    }
    Ok(default_levels())
}

fn cmd_protocol(args: ProtocolArgs, config: &Config) -> Result<()> {
    let benchmark = required_benchmark(args.benchmark.clone(), config)?;
    let levels = parse_levels(&args, config)?;
    let algorithm = match args.algorithm.clone().or_else(|| config.string("algorithm")) {
        Some(name) => parse_algorithm(&name)?,
        None => Algorithm::DelayedAcceptance,
    };
    let proto = ProtocolConfig {
        seed_base: args.seed_base.or(config.get("seed-base")?).unwrap_or(0),
        levels,
        algorithm,
        threads: args.threads.or(config.get("threads")?).unwrap_or(1),
        train_count: args.train_count.or(config.get("train-count")?).unwrap_or(200),
        test_count: args.test_count.or(config.get("test-count")?).unwrap_or(2000),
        extend_for_smallest: !args.no_extend,
        profile_override: resolve_profile(benchmark, args.profile.clone(), config)?,
        ..Default::default()
    };
    let started = Instant::now();
    let (report, outcomes) = run_protocol(benchmark, &proto);
    print_report(&report);
    if let Some(dir) = out_dir(args.out, config) {
        let records: Vec<_> = outcomes
            .iter()
            .map(|o| log_record(benchmark, &proto, report.level_index, o))
            .collect();
        let log_path = write_out(&dir, "runs.jsonl", &harness::write_run_log(&records))?;
        let csv = format!("{}\n{}\n", BenchmarkReport::csv_header(), report.csv_row());
        let csv_path = write_out(&dir, "report.csv", &csv)?;
        let json_path = write_out(
            &dir,
            "report.json",
            &format!("{}\n", serde_json::to_string_pretty(&report)?),
        )?;
        println!("log: {}", log_path.display());
        println!("report: {}, {}", csv_path.display(), json_path.display());
    }
    eprintln!("completed in {:.1}s", started.elapsed().as_secs_f64());
    Ok(())
}

fn print_report(report: &BenchmarkReport) {
    println!("benchmark: {}", report.benchmark);
    println!("algorithm: {}", report.algorithm.name());
    println!(
        "level: {} ({} runs, I={}, max {} periods)",
        report.level_index + 1,
        report.runs,
        report.level.period,
        report.level.max_periods
    );
    println!(
        "train_success: {}/{} ({:.1}%)",
        report.train_successes,
        report.runs,
        report.pct_train()
    );
    println!(
        "generalize_perfectly: {}/{} ({:.1}%)",
        report.generalize_successes,
        report.runs,
        report.pct_generalize()
    );
    if let Some(size) = report.smallest_size {
        println!("smallest_program: {size} instructions");
    }
    if let Some((size, cycles)) = report.tis_best {
        println!("tis_best: {size} instructions, {cycles} cycles");
    }
}

fn cmd_grid(args: GridArgs, config: &Config) -> Result<()> {
    let names = args
        .benchmarks
        .or_else(|| config.string("benchmarks"))
        .unwrap_or_else(|| benchmarks::PRELIMINARY.map(|b| b.name()).join(","));
    let selected: Vec<Benchmark> =
        names.split(',').map(|n| parse_benchmark(n.trim())).collect::<Result<_>>()?;
    let spec = GridSpec {
        runs_per_cell: args.runs_per_cell.or(config.get("runs-per-cell")?).unwrap_or(100),
        budget: args.budget.or(config.get("budget")?).unwrap_or(300_000),
        ..Default::default()
    };
    let seed_base = args.seed_base.or(config.get("seed-base")?).unwrap_or(0);
    let threads = args.threads.or(config.get("threads")?).unwrap_or(1);
    let started = Instant::now();
    let cells = grid_search(&selected, &spec, seed_base, threads);
    let csv = grid_csv(&cells);
    for line in csv.lines().take(11) {
        println!("{line}");
    }
    if let Some(dir) = out_dir(args.out, config) {
        let path = write_out(&dir, "grid.csv", &csv)?;
        println!("grid: {}", path.display());
    }
    eprintln!("completed in {:.1}s", started.elapsed().as_secs_f64());
    Ok(())
}

fn cmd_exec(args: ExecArgs) -> Result<()> {
    let text = fs::read_to_string(&args.program)
        .with_context(|| format!("reading {}", args.program.display()))?;
    let (profile, program) =
        isa::parse_with_profile(&text).map_err(|e| anyhow!("{}: {e}", args.program.display()))?;
    match (args.problems, args.image) {
        (Some(path), None) => {
            let set_text =
                fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let set = read_problem_set(&set_text).map_err(|e| anyhow!("{}: {e}", path.display()))?;
            if set.profile.name() != profile.name() {
                bail!(
                    "program profile `{}` does not match problem set profile `{}`",
                    profile.name(),
                    set.profile.name()
                );
            }
            print!("{}", scoring::describe_score(&program, &set));
        }
        (None, Some(path)) => {
            let image_text =
                fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let target =
                TargetImage::parse(&image_text).map_err(|e| anyhow!("{}: {e}", path.display()))?;
            let bound = args.cycle_bound.unwrap_or(10_000);
            let out = tis100::execute(&program, profile, &target, bound);
            println!("solved: {}", out.solved);
            println!("best_match: {} / {}", out.best_match, tis100::IMAGE_PIXELS);
            println!("cycles_used: {}", out.cycles_used);
            println!("size: {}", program.effective_size(profile));
        }
        _ => bail!("exec needs exactly one of --problems or --image"),
    }
    Ok(())
}

fn cmd_gen(args: GenArgs, config: &Config) -> Result<()> {
    let benchmark = required_benchmark(args.benchmark, config)?;
    let split = match args.split.or_else(|| config.string("split")) {
        None => Split::Train,
        Some(name) => {
            Split::from_name(&name).ok_or_else(|| anyhow!("split must be `train` or `test`"))?
        }
    };
    let count =
        args.count.or(config.get("count")?).unwrap_or_else(|| split.default_count());
    let seed = args.seed.or(config.get("seed")?).unwrap_or(0);
    let (contents, default_name) = match generate_set(benchmark, split, count, seed) {
        GeneratedSet::X86(set) => (
            scoring::write_problem_set(&set),
            format!("{}.{}.problems", benchmark.name(), split.name()),
        ),
        GeneratedSet::Tis(problem) => {
            (problem.target.render(), format!("{}.image", benchmark.name()))
        }
    };
    match args.out.or_else(|| config.string("out").map(PathBuf::from)) {
        Some(path) if path.extension().is_some() || path.file_name().is_some() => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
            println!("wrote {}", path.display());
        }
        _ => {
            let dir = out_dir(None, config).unwrap_or_else(|| PathBuf::from("."));
            let path = write_out(&dir, &default_name, &contents)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn cmd_trace(args: TraceArgs, config: &Config) -> Result<()> {
    let text = fs::read_to_string(&args.log)
        .with_context(|| format!("reading {}", args.log.display()))?;
    let records = harness::read_run_log(&text)?;
    if records.is_empty() {
        bail!("run log is empty");
    }
    let benchmark = match args.benchmark.or_else(|| config.string("benchmark")) {
        Some(name) => parse_benchmark(&name)?,
        None => parse_benchmark(&records[0].benchmark)?,
    };
    if benchmark.is_image() {
        bail!("trajectory export applies to problem-set benchmarks");
    }
    let seed_base = args.seed_base.or(config.get("seed-base")?).unwrap_or(0);
    let train_count = args.train_count.or(config.get("train-count")?).unwrap_or(200);
    let test_count = args.test_count.or(config.get("test-count")?).unwrap_or(2000);
    let train = generate_set(
        benchmark,
        Split::Train,
        train_count,
        problem_set_seed(seed_base, benchmark, Split::Train),
    )
    .unwrap_x86();
    let test = generate_set(
        benchmark,
        Split::Test,
        test_count,
        problem_set_seed(seed_base, benchmark, Split::Test),
    )
    .unwrap_x86();
    let rows = harness::export_trajectory(&records, train.max_score(), &test)
        .map_err(|e| anyhow!("parsing logged program: {e}"))?;
    let csv = harness::trajectory_csv(&rows);
    match out_dir(args.out, config) {
        Some(dir) => {
            let path = write_out(&dir, "trajectory.csv", &csv)?;
            println!("trajectory: {} ({} rows)", path.display(), rows.len());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_list() -> Result<()> {
    println!("benchmarks:");
    for b in benchmarks::ALL {
        println!("  {:<18} [{}]  {}", b.name(), b.profile().name(), b.description());
    }
    println!("\nprofiles:");
    for p in MachineProfile::all() {
        println!(
            "  {:<13} S={} O={} P={} R={}",
            p.name(),
            p.program_len,
            p.opcode_count,
            p.operand_count,
            p.reg_count
        );
    }
    Ok(())
}
