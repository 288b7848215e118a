use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use evotree::engine::Speedup;
use evotree::evolver::ExhaustedPolicy;
use evotree::format::{records_csv, write_roles, write_script, write_tree};
use evotree::generate::{gen_wings, TailShape};
use evotree::labeling::{InitialHypothesis, TrueLabeling};
use evotree::scenario::{run_scenario, EvolverSpec, InitSpec, RunLength, ScenarioConfig, TreeSpec};
use evotree::script::{make_wings_script, make_wings_script_with, swap_lower_bound, wings_distance, wings_goal, wings_opt, WingsRouting};
use evotree::sweep::{aggregate_csv, run_sweep, Family, SweepSpec};
use evotree::verify::{run_checks, CheckLevel};

/// Label tracking on trees whose labels are swapped by an evolver.
#[derive(Parser)]
#[command(name = "evotree", version)]
struct Cli {
    /// Directory for output files. Falls back to the config file's `out_dir`,
    /// then to $EVOTREE_OUT_DIR, then to the current directory.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its per-iteration CSV and summary JSON.
    Simulate(SimulateArgs),
    /// Run a grid of scenarios and write one aggregate row per cell.
    Sweep(SweepArgs),
    /// Generate the wings swap script and report its length next to the formula.
    AdversaryScript(ScriptArgs),
    /// Run the brute-force verification suite.
    Verify(VerifyArgs),
}

fn parse_policy(s: &str) -> Result<ExhaustedPolicy, String> {
    match s {
        "hold" => Ok(ExhaustedPolicy::Hold),
        "halt" => Ok(ExhaustedPolicy::Halt),
        other => Err(format!("unknown policy `{other}` (expected hold or halt)")),
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON config file; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// path:n=N | balanced:n=N,arity=K | random:n=N,k=K | wings:alpha=A,beta=B,tails=leaves|chain | file:PATH
    #[arg(long)]
    tree: Option<TreeSpec>,
    /// idle | uniform | greedy[:sample=S] | wings-script | script:PATH
    #[arg(long)]
    evolver: Option<EvolverSpec>,
    /// Evolver slowdown c = p/q >= 1.
    #[arg(long)]
    speedup: Option<Speedup>,
    /// exact | reversed | random | all-at:V
    #[arg(long)]
    init: Option<InitSpec>,
    /// default | N | log:K | script-end
    #[arg(long)]
    iterations: Option<RunLength>,
    /// What a script evolver does when its script runs out: hold | halt.
    #[arg(long, value_parser = parse_policy)]
    on_exhausted: Option<ExhaustedPolicy>,
    #[arg(long)]
    seed: Option<u64>,
    /// Stop after this many tracker steps (default 2e9).
    #[arg(long)]
    max_steps: Option<u64>,
    /// Output file stem.
    #[arg(long, default_value = "run")]
    name: String,
}

/// Config file for `simulate`. Every field is optional.
#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateFile {
    tree: Option<TreeSpec>,
    evolver: Option<EvolverSpec>,
    speedup: Option<Speedup>,
    init: Option<InitSpec>,
    run_length: Option<RunLength>,
    on_exhausted: Option<ExhaustedPolicy>,
    seed: Option<u64>,
    max_steps: Option<u64>,
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON sweep spec; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// path | balanced[:arity=K] | random[:k=K] | wings[:beta=B,tails=T]
    #[arg(long)]
    family: Option<Family>,
    /// Comma-separated tree sizes (target vertex counts for wings).
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    speedups: Option<Vec<Speedup>>,
    #[arg(long, value_delimiter = ',')]
    evolvers: Option<Vec<EvolverSpec>>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    init: Option<InitSpec>,
    #[arg(long)]
    iterations: Option<RunLength>,
    #[arg(long, value_parser = parse_policy)]
    on_exhausted: Option<ExhaustedPolicy>,
    #[arg(long)]
    seed: Option<u64>,
    /// Per-run tracker step cap (default 2e9).
    #[arg(long)]
    max_steps: Option<u64>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Aggregate CSV path; defaults to `sweep.csv` in the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    family: Option<Family>,
    sizes: Option<Vec<usize>>,
    speedups: Option<Vec<Speedup>>,
    evolvers: Option<Vec<EvolverSpec>>,
    repetitions: Option<usize>,
    init: Option<InitSpec>,
    run_length: Option<RunLength>,
    on_exhausted: Option<ExhaustedPolicy>,
    seed: Option<u64>,
    max_steps: Option<u64>,
}

#[derive(Copy, Clone, ValueEnum)]
enum RoutingArg {
    /// Shortest routing available for the tail shape.
    Auto,
    BufferRotation,
    LeafParking,
}

#[derive(Args)]
struct ScriptArgs {
    #[arg(long)]
    alpha: usize,
    #[arg(long)]
    beta: usize,
    #[arg(long, default_value_t = TailShape::Leaves)]
    tails: TailShape,
    #[arg(long, value_enum, default_value_t = RoutingArg::Auto)]
    routing: RoutingArg,
    /// Script path; the tree and role files are written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// quick | full
    #[arg(long, default_value = "quick")]
    level: CheckLevel,
}

const OUT_DIR_ENV: &str = "EVOTREE_OUT_DIR";

fn resolve_dir(flag: Option<PathBuf>, file: Option<PathBuf>) -> PathBuf {
    flag.or(file)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn simulate(args: SimulateArgs, out_dir: Option<PathBuf>) -> Result<ExitCode> {
    let file: SimulateFile = match &args.config {
        Some(p) => read_json(p)?,
        None => SimulateFile::default(),
    };
    let config = ScenarioConfig {
        tree: args.tree.or(file.tree).unwrap_or(TreeSpec::Path { n: 64 }),
        evolver: args.evolver.or(file.evolver).unwrap_or(EvolverSpec::Uniform),
        speedup: args.speedup.or(file.speedup).unwrap_or(Speedup::integer(2)?),
        init: args.init.or(file.init).unwrap_or(InitSpec(InitialHypothesis::Exact)),
        run_length: args.iterations.or(file.run_length).unwrap_or(RunLength::Default),
        on_exhausted: args.on_exhausted.or(file.on_exhausted).unwrap_or_default(),
        seed: args.seed.or(file.seed).unwrap_or(0),
        max_steps: args.max_steps.or(file.max_steps),
    };
    let dir = resolve_dir(out_dir, file.out_dir);

    let run = run_scenario(&config)?;
    let csv_path = dir.join(format!("{}.csv", args.name));
    let json_path = dir.join(format!("{}.summary.json", args.name));
    write(&csv_path, &records_csv(&config.echo(), &run.outcome.records))?;
    let summary = serde_json::to_string_pretty(&run.summary)?;
    write(&json_path, &format!("{summary}\n"))?;
    println!("{summary}");
    eprintln!("wrote {} and {}", csv_path.display(), json_path.display());

    let v = &run.summary.lemma_violations;
    if v.step_identity > 0 || run.summary.audit_failures > 0 {
        eprintln!("error: step identity or distance audit failed");
        return Ok(ExitCode::FAILURE);
    }
    if run.summary.truncated {
        eprintln!("warning: step cap reached after {} iterations", run.summary.iterations);
    }
    Ok(ExitCode::SUCCESS)
}

fn sweep(args: SweepArgs, out_dir: Option<PathBuf>) -> Result<ExitCode> {
    let file: SweepFile = match &args.config {
        Some(p) => read_json(p)?,
        None => SweepFile::default(),
    };
    let spec = SweepSpec {
        family: args.family.or(file.family).unwrap_or(Family::Path),
        sizes: args.sizes.or(file.sizes).unwrap_or_else(|| vec![64, 256, 1024]),
        speedups: args.speedups.or(file.speedups).unwrap_or(vec![Speedup::integer(2)?]),
        evolvers: args.evolvers.or(file.evolvers).unwrap_or(vec![EvolverSpec::Uniform]),
        repetitions: args.reps.or(file.repetitions).unwrap_or(1),
        init: args.init.or(file.init).unwrap_or(InitSpec(InitialHypothesis::Reversed)),
        run_length: args.iterations.or(file.run_length).unwrap_or(RunLength::Default),
        on_exhausted: args.on_exhausted.or(file.on_exhausted).unwrap_or_default(),
        seed: args.seed.or(file.seed).unwrap_or(0),
        max_steps: args.max_steps.or(file.max_steps),
    };
    if spec.repetitions == 0 {
        bail!("--reps must be at least 1");
    }
    let result = run_sweep(&spec, args.jobs);
    let csv = aggregate_csv(&spec, &result.rows);
    let path = args
        .out
        .unwrap_or_else(|| resolve_dir(out_dir, None).join("sweep.csv"));
    write(&path, &csv)?;
    print!("{}", csv.lines().skip(1).map(|l| format!("{l}\n")).collect::<String>());
    eprintln!("wrote {}", path.display());
    for row in result.rows.iter().filter(|r| r.failures > 0) {
        eprintln!("cell n={} c={} {}: {}", row.n, row.c, row.evolver, row.errors.join("; "));
    }
    Ok(if result.failures() > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    })
}

fn adversary_script(args: ScriptArgs, out_dir: Option<PathBuf>) -> Result<ExitCode> {
    let w = gen_wings(args.alpha, args.beta, args.tails)?;
    let fixed = match args.routing {
        RoutingArg::Auto => None,
        RoutingArg::BufferRotation => Some(WingsRouting::BufferRotation),
        RoutingArg::LeafParking => Some(WingsRouting::LeafParking),
    };
    let (script, routing) = match fixed {
        None => {
            let ws = make_wings_script(&w);
            (ws.script, ws.routing)
        }
        Some(r) => match make_wings_script_with(&w, r) {
            Some(s) => (s, r),
            None => bail!("routing {r:?} is not available for {} tails", args.tails),
        },
    };
    let n = w.tree().len();
    let opt = wings_opt(args.alpha, args.beta);
    let lower = swap_lower_bound(w.tree(), &TrueLabeling::identity(n), &wings_goal(&w));

    let path = args.out.unwrap_or_else(|| {
        resolve_dir(out_dir, None).join(format!("wings_a{}_b{}.script", args.alpha, args.beta))
    });
    write(&path, &write_script(&script))?;
    write(&path.with_extension("tree"), &write_tree(w.tree()))?;
    write(&path.with_extension("roles"), &write_roles(&w))?;

    println!("alpha={} beta={} tails={} n={n}", args.alpha, args.beta, args.tails);
    println!("routing={routing:?}");
    println!("m={} opt={opt}", script.len());
    println!("D(T1,T0)={} lower_bound={lower}", wings_distance(args.alpha, args.beta));
    eprintln!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn verify(args: VerifyArgs) -> ExitCode {
    let rows = run_checks(args.level);
    for row in &rows {
        println!("{row}");
    }
    let failed = rows.iter().filter(|r| !r.passed).count();
    println!("{} checks, {failed} failed", rows.len());
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn main() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate(a) => simulate(a, cli.out_dir),
        Command::Sweep(a) => sweep(a, cli.out_dir),
        Command::AdversaryScript(a) => adversary_script(a, cli.out_dir),
        Command::Verify(a) => Ok(verify(a)),
    }
}
