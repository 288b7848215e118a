//! Parameter sweeps: sizes × speedups × evolvers, repeated with derived seeds.

use std::fmt::Write as _;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::Speedup;
use crate::evolver::ExhaustedPolicy;
use crate::generate::TailShape;
use crate::scenario::{derive_seed, run_scenario, EvolverSpec, InitSpec, RunLength, ScenarioConfig, Summary, TreeSpec};

/// Tree family of a sweep; each size becomes one tree.
///
/// For wings the size is a target vertex count: `α = max(1, round((n-1)/(β+1)))`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Family {
    Path,
    Balanced { arity: usize },
    Random { max_degree: usize },
    Wings { beta: usize, tails: TailShape },
}

impl Family {
    pub fn tree(&self, size: usize) -> TreeSpec {
        match *self {
            Family::Path => TreeSpec::Path { n: size },
            Family::Balanced { arity } => TreeSpec::Balanced { n: size, arity },
            Family::Random { max_degree } => TreeSpec::Random { n: size, max_degree },
            Family::Wings { beta, tails } => {
                let alpha = ((size.saturating_sub(1) as f64 / (beta + 1) as f64).round() as usize).max(1);
                TreeSpec::Wings { alpha, beta, tails }
            }
        }
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        // Reuse the tree-spec parser with a placeholder size.
        let probe = match s.split_once(':') {
            Some(("wings", rest)) => format!("wings:alpha=1,{rest}"),
            Some((name, rest)) => format!("{name}:n=1,{rest}"),
            None if s == "wings" => "wings:alpha=1,beta=4".to_string(),
            None => format!("{s}:n=1"),
        };
        match probe.parse::<TreeSpec>().map_err(|e| e.to_string())? {
            TreeSpec::Path { .. } => Ok(Family::Path),
            TreeSpec::Balanced { arity, .. } => Ok(Family::Balanced { arity }),
            TreeSpec::Random { max_degree, .. } => Ok(Family::Random { max_degree }),
            TreeSpec::Wings { beta, tails, .. } => Ok(Family::Wings { beta, tails }),
            TreeSpec::File(_) => Err("file trees cannot be swept".into()),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Path => write!(f, "path"),
            Family::Balanced { arity } => write!(f, "balanced:arity={arity}"),
            Family::Random { max_degree } => write!(f, "random:k={max_degree}"),
            Family::Wings { beta, tails } => write!(f, "wings:beta={beta},tails={tails}"),
        }
    }
}

impl TryFrom<String> for Family {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Family> for String {
    fn from(f: Family) -> String {
        f.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub family: Family,
    pub sizes: Vec<usize>,
    pub speedups: Vec<Speedup>,
    pub evolvers: Vec<EvolverSpec>,
    pub repetitions: usize,
    pub init: InitSpec,
    pub run_length: RunLength,
    pub on_exhausted: ExhaustedPolicy,
    pub seed: u64,
    #[serde(default)]
    pub max_steps: Option<u64>,
}

/// One (size, speedup, evolver) combination.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub index: usize,
    pub size: usize,
    pub speedup: Speedup,
    pub evolver: EvolverSpec,
}

impl SweepSpec {
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &size in &self.sizes {
            for &speedup in &self.speedups {
                for evolver in &self.evolvers {
                    out.push(Cell {
                        index: out.len(),
                        size,
                        speedup,
                        evolver: evolver.clone(),
                    });
                }
            }
        }
        out
    }

    /// Config of repetition `rep` of `cell`; seeds differ for every (cell, rep).
    pub fn config(&self, cell: &Cell, rep: usize) -> ScenarioConfig {
        ScenarioConfig {
            tree: self.family.tree(cell.size),
            evolver: cell.evolver.clone(),
            speedup: cell.speedup,
            init: self.init,
            run_length: self.run_length,
            on_exhausted: self.on_exhausted,
            seed: derive_seed(derive_seed(self.seed, cell.index as u64), rep as u64),
            max_steps: self.max_steps,
        }
    }
}

/// Aggregate over the successful repetitions of one cell.
#[allow(non_snake_case)]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRow {
    pub n: usize,
    pub c: String,
    pub evolver: String,
    pub runs: usize,
    pub failures: usize,
    pub steady_mean_D: f64,
    pub D_over_n: f64,
    pub max_load: f64,
    pub max_load_over_sqrt_n: f64,
    /// `final_D / n²`, filled for wings trees.
    pub D_over_n2: Option<f64>,
    pub lemma_violations: usize,
    pub errors: Vec<String>,
}

pub struct SweepResult {
    pub rows: Vec<CellRow>,
    pub summaries: Vec<Vec<Summary>>,
}

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.rows.iter().map(|r| r.failures).sum()
    }
}

/// Runs every repetition of every cell on a pool of `jobs` threads
/// (0 = rayon default). Results are ordered, so output is deterministic.
pub fn run_sweep(spec: &SweepSpec, jobs: usize) -> SweepResult {
    let cells = spec.cells();
    let tasks: Vec<(usize, usize)> = cells
        .iter()
        .flat_map(|c| (0..spec.repetitions).map(move |r| (c.index, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool");
    let results: Vec<Result<Summary, String>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(c, r)| {
                match run_scenario(&spec.config(&cells[c], r)) {
                    Ok(run) if run.summary.truncated => {
                        Err(format!("rep {r}: step cap reached after {} iterations", run.summary.iterations))
                    }
                    Ok(run) => Ok(run.summary),
                    Err(e) => Err(format!("rep {r}: {e}")),
                }
            })
            .collect()
    });

    let mut rows = Vec::with_capacity(cells.len());
    let mut summaries = Vec::with_capacity(cells.len());
    let mut it = results.into_iter();
    for cell in &cells {
        let mut ok = Vec::new();
        let mut errors = Vec::new();
        for _ in 0..spec.repetitions {
            match it.next().expect("one result per task") {
                Ok(s) => ok.push(s),
                Err(e) => errors.push(e),
            }
        }
        rows.push(aggregate(cell, &ok, errors));
        summaries.push(ok);
    }
    SweepResult { rows, summaries }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = xs.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    if count == 0 {
        f64::NAN
    } else {
        sum / count as f64
    }
}

fn aggregate(cell: &Cell, ok: &[Summary], errors: Vec<String>) -> CellRow {
    let n = ok.first().map_or(cell.size, |s| s.n);
    let steady = mean(ok.iter().filter_map(|s| s.steady_state_mean_D));
    let load = mean(ok.iter().filter_map(|s| s.steady_state_max_load.map(f64::from)));
    let d_n2 = ok
        .iter()
        .any(|s| s.final_D_over_n2.is_some())
        .then(|| mean(ok.iter().filter_map(|s| s.final_D_over_n2)));
    CellRow {
        n,
        c: cell.speedup.to_string(),
        evolver: cell.evolver.to_string(),
        runs: ok.len(),
        failures: errors.len(),
        steady_mean_D: steady,
        D_over_n: steady / n as f64,
        max_load: load,
        max_load_over_sqrt_n: load / (n as f64).sqrt(),
        D_over_n2: d_n2,
        lemma_violations: ok
            .iter()
            .map(|s| s.lemma_violations.step_identity + s.lemma_violations.length_bound)
            .sum(),
        errors,
    }
}

pub const AGGREGATE_HEADER: &str =
    "n,c,evolver,runs,failures,steady_mean_D,D_over_n,max_load,max_load_over_sqrt_n,D_over_n2,lemma_violations,errors";

fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:.6}")
    }
}

/// Aggregate CSV with a `# config: ...` echo line.
pub fn aggregate_csv(spec: &SweepSpec, rows: &[CellRow]) -> String {
    let echo = serde_json::to_string(spec).expect("spec serializes");
    let mut s = format!("# config: {echo}\n{AGGREGATE_HEADER}\n");
    for r in rows {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.c,
            r.evolver,
            r.runs,
            r.failures,
            num(r.steady_mean_D),
            num(r.D_over_n),
            num(r.max_load),
            num(r.max_load_over_sqrt_n),
            r.D_over_n2.map(num).unwrap_or_default(),
            r.lemma_violations,
            r.errors.join("; ").replace(',', ";"),
        )
        .unwrap();
    }
    s
}
