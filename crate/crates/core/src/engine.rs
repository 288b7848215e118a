//! The tracking algorithm interleaved with an evolver on an exact rational clock.
//!
//! Time model: the tracker takes one step at every integer time `1, 2, 3, ...`;
//! the evolver's `k`-th turn happens at time `k·p/q` for speedup `c = p/q`.
//! When both fall on the same instant the evolver goes first. All clock
//! comparisons are done on integers (`k·p` against `m·q`).
//!
//! The tracker processes labels in cyclic order. For the current label it
//! asks the oracle about the label's hypothesized vertex; a `NextEdge` answer
//! moves the hypothesis one hop, an `AtTarget` answer advances to the next
//! label. An iteration ends when the tracker wraps from label `n-1` to 0.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evolver::{Evolver, EvolverAction};
use crate::labeling::{LabelState, LabelingError};
use crate::oracle::{oracle_query, OracleAnswer};
use crate::tree::{LabelId, Tree, VertexId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpeedupError {
    #[error("speedup must be written as p/q with positive integers, got `{0}`")]
    Syntax(String),
    #[error("speedup {p}/{q} is below 1")]
    BelowOne { p: u64, q: u64 },
    #[error("speedup terms must be positive")]
    Zero,
}

/// Exact rational speedup `c = p/q >= 1`, stored in lowest terms.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Speedup {
    p: u64,
    q: u64,
}

impl Speedup {
    pub fn new(p: u64, q: u64) -> Result<Self, SpeedupError> {
        if p == 0 || q == 0 {
            return Err(SpeedupError::Zero);
        }
        if p < q {
            return Err(SpeedupError::BelowOne { p, q });
        }
        let g = gcd(p, q);
        Ok(Speedup { p: p / g, q: q / g })
    }

    pub fn integer(c: u64) -> Result<Self, SpeedupError> {
        Speedup::new(c, 1)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn as_f64(&self) -> f64 {
        self.p as f64 / self.q as f64
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl fmt::Display for Speedup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl FromStr for Speedup {
    type Err = SpeedupError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (p, q) = s
            .trim()
            .split_once('/')
            .ok_or_else(|| SpeedupError::Syntax(s.to_string()))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| SpeedupError::Syntax(s.to_string()))
        };
        Speedup::new(parse(p)?, parse(q)?)
    }
}

impl TryFrom<String> for Speedup {
    type Error = SpeedupError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Speedup> for String {
    fn from(s: Speedup) -> String {
        s.to_string()
    }
}

/// Per-iteration metrics.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// 1-based iteration number.
    pub j: u64,
    /// Total distance when the iteration started.
    pub d_start: u64,
    /// Hypothesis moves made during the iteration.
    pub moves: u64,
    /// Tracker steps taken during the iteration.
    pub steps: u64,
    /// Evolver turns that fell inside the iteration.
    pub evolver_steps: u64,
    /// Largest vertex load seen during the iteration.
    pub max_load: u32,
    /// Global tracker step count when the iteration ended.
    pub step_index: u64,
    /// Largest total distance seen during the iteration.
    pub peak_distance: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Moved { label: LabelId, from: VertexId, to: VertexId },
    Fixed { label: LabelId },
}

/// Position of the tracker inside its cyclic pass over the labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrackerState {
    /// Label currently being chased.
    pub label: usize,
    /// 1-based number of the iteration in progress.
    pub iteration: u64,
    steps: u64,
    moves: u64,
    evolver_steps: u64,
    d_start: u64,
    peak_distance: u64,
    peak_load: u32,
}

impl TrackerState {
    fn new(d_start: u64, load: u32) -> Self {
        TrackerState {
            label: 0,
            iteration: 1,
            steps: 0,
            moves: 0,
            evolver_steps: 0,
            d_start,
            peak_distance: d_start,
            peak_load: load,
        }
    }
}

/// When a run stops.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Horizon {
    /// After this many completed iterations.
    Iterations(u64),
    /// After every event scheduled at a time `<= num/den`.
    Time { num: u64, den: u64 },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("evolver produced an invalid swap: {0}")]
    InvalidSwap(#[from] LabelingError),
    #[error("the run needs at least one iteration")]
    EmptyBudget,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditStats {
    pub checks: u64,
    pub failures: u64,
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    /// Recompute the distance from scratch every this many tracker steps.
    pub audit_every: Option<u64>,
    /// Stop after this many tracker steps even if the horizon is not reached.
    /// An adversary with `c <= 2` can keep an iteration from ever ending.
    pub max_tracker_steps: Option<u64>,
}

impl RunOptions {
    /// No audits and no step cap.
    pub fn unchecked() -> Self {
        RunOptions {
            audit_every: None,
            max_tracker_steps: None,
        }
    }

    pub fn with_step_cap(mut self, cap: u64) -> Self {
        self.max_tracker_steps = Some(cap);
        self
    }

    /// Audits every `10·n` steps.
    pub fn for_tree(tree: &Tree) -> Self {
        RunOptions {
            audit_every: Some(10 * tree.len() as u64),
            max_tracker_steps: None,
        }
    }
}

/// Iteration budget `max(50, 4·⌈log₂ n⌉)`.
pub fn default_iteration_budget(n: usize) -> u64 {
    let log = (usize::BITS - n.saturating_sub(1).leading_zeros()) as u64;
    (4 * log).max(50)
}

/// Owns everything one run mutates.
pub struct Simulation<'t, E: Evolver> {
    tree: &'t Tree,
    state: LabelState,
    evolver: E,
    speedup: Speedup,
    tracker: TrackerState,
    tracker_steps: u64,
    evolver_turns: u64,
    evolver_swaps: u64,
    records: Vec<IterationRecord>,
    options: RunOptions,
    audits: AuditStats,
    peak_distance: u64,
    peak_load: u32,
    halted: bool,
    truncated: bool,
}

impl<'t, E: Evolver> Simulation<'t, E> {
    pub fn new(tree: &'t Tree, state: LabelState, evolver: E, speedup: Speedup, options: RunOptions) -> Self {
        let d = state.total();
        let load = state.hypothesis().max_vertex_load();
        Simulation {
            tree,
            state,
            evolver,
            speedup,
            tracker: TrackerState::new(d, load),
            tracker_steps: 0,
            evolver_turns: 0,
            evolver_swaps: 0,
            records: Vec::new(),
            options,
            audits: AuditStats::default(),
            peak_distance: d,
            peak_load: load,
            halted: false,
            truncated: false,
        }
    }

    pub fn state(&self) -> &LabelState {
        &self.state
    }

    pub fn tracker(&self) -> &TrackerState {
        &self.tracker
    }

    pub fn records(&self) -> &[IterationRecord] {
        &self.records
    }

    pub fn tracker_steps(&self) -> u64 {
        self.tracker_steps
    }

    pub fn evolver_turns(&self) -> u64 {
        self.evolver_turns
    }

    /// One tracker step: exactly one oracle query, then a move or a fix.
    pub fn algorithm_step(&mut self) -> StepOutcome {
        let n = self.tree.len();
        let label = LabelId::new(self.tracker.label);
        let at = self.state.hypothesis().vertex_of(label);
        let outcome = match oracle_query(self.tree, self.state.truth(), label, at) {
            OracleAnswer::NextEdge(from, to) => {
                let before = self.state.distance().label(label);
                self.state.advance_toward_truth(label, to);
                debug_assert_eq!(
                    self.tree.distance(self.state.truth().vertex_of(label), to) + 1,
                    before
                );
                self.tracker.moves += 1;
                let load = self.state.hypothesis().max_vertex_load();
                self.tracker.peak_load = self.tracker.peak_load.max(load);
                self.peak_load = self.peak_load.max(load);
                StepOutcome::Moved { label, from, to }
            }
            OracleAnswer::AtTarget => StepOutcome::Fixed { label },
        };
        self.tracker.steps += 1;
        self.tracker_steps += 1;

        if let StepOutcome::Fixed { .. } = outcome {
            self.tracker.label += 1;
            if self.tracker.label == n {
                self.close_iteration();
            }
        }

        if let Some(every) = self.options.audit_every {
            if every > 0 && self.tracker_steps.is_multiple_of(every) {
                self.audit();
            }
        }
        outcome
    }

    /// One evolver turn. Returns `false` if the evolver asked to halt.
    pub fn evolver_turn(&mut self) -> Result<bool, EngineError> {
        let action = self
            .evolver
            .next_action(self.tree, self.state.truth(), self.state.hypothesis());
        match action {
            EvolverAction::Halt => {
                self.halted = true;
                return Ok(false);
            }
            EvolverAction::Hold => {}
            EvolverAction::Swap(u, v) => {
                self.state.apply_true_swap(self.tree, u, v)?;
                self.evolver_swaps += 1;
                let d = self.state.total();
                self.tracker.peak_distance = self.tracker.peak_distance.max(d);
                self.peak_distance = self.peak_distance.max(d);
            }
        }
        self.evolver_turns += 1;
        self.tracker.evolver_steps += 1;
        Ok(true)
    }

    fn close_iteration(&mut self) {
        let t = &self.tracker;
        self.records.push(IterationRecord {
            j: t.iteration,
            d_start: t.d_start,
            moves: t.moves,
            steps: t.steps,
            evolver_steps: t.evolver_steps,
            max_load: t.peak_load,
            step_index: self.tracker_steps,
            peak_distance: t.peak_distance,
        });
        let next = t.iteration + 1;
        self.tracker = TrackerState::new(self.state.total(), self.state.hypothesis().max_vertex_load());
        self.tracker.iteration = next;
    }

    fn audit(&mut self) {
        self.audits.checks += 1;
        if !self.state.audit(self.tree) {
            self.audits.failures += 1;
            debug_assert!(false, "incremental distance diverged from recomputation");
        }
    }

    /// True when the next event on the clock is an evolver turn.
    fn evolver_is_next(&self) -> bool {
        let evo = (self.evolver_turns + 1) as u128 * self.speedup.p as u128;
        let alg = (self.tracker_steps + 1) as u128 * self.speedup.q as u128;
        evo <= alg
    }

    /// Runs until the horizon is reached or the evolver halts.
    pub fn run(mut self, horizon: Horizon) -> Result<RunOutcome, EngineError> {
        if horizon == Horizon::Iterations(0) {
            return Err(EngineError::EmptyBudget);
        }
        let (p, q) = (self.speedup.p as u128, self.speedup.q as u128);
        while !self.halted {
            let evolver_next = self.evolver_is_next();
            if let Horizon::Time { num, den } = horizon {
                let (num, den) = (num as u128, den as u128);
                // Event time as a fraction: evolver k·p/q, tracker m/1.
                let beyond = if evolver_next {
                    (self.evolver_turns as u128 + 1) * p * den > num * q
                } else {
                    (self.tracker_steps as u128 + 1) * den > num
                };
                if beyond {
                    break;
                }
            }
            if evolver_next {
                self.evolver_turn()?;
            } else {
                if self.options.max_tracker_steps.is_some_and(|cap| self.tracker_steps >= cap) {
                    self.truncated = true;
                    break;
                }
                self.algorithm_step();
                if let Horizon::Iterations(budget) = horizon {
                    if self.records.len() as u64 >= budget {
                        break;
                    }
                }
            }
        }
        self.audit();
        Ok(self.finish())
    }

    fn finish(self) -> RunOutcome {
        let n = self.tree.len();
        let final_distance = self.state.total();
        RunOutcome {
            n,
            speedup: self.speedup,
            records: self.records,
            tracker_steps: self.tracker_steps,
            evolver_turns: self.evolver_turns,
            evolver_swaps: self.evolver_swaps,
            final_distance,
            peak_distance: self.peak_distance,
            max_load_over_run: self.peak_load,
            audits: self.audits,
            halted: self.halted,
            truncated: self.truncated,
            state: self.state,
        }
    }
}

/// Everything a finished run reports.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub n: usize,
    pub speedup: Speedup,
    pub records: Vec<IterationRecord>,
    pub tracker_steps: u64,
    pub evolver_turns: u64,
    pub evolver_swaps: u64,
    pub final_distance: u64,
    pub peak_distance: u64,
    pub max_load_over_run: u32,
    pub audits: AuditStats,
    pub halted: bool,
    /// The step cap stopped the run before its horizon.
    pub truncated: bool,
    pub state: LabelState,
}

impl RunOutcome {
    pub fn lemma_report(&self) -> LemmaReport {
        check_lemma_bounds(&self.records, self.n, self.speedup)
    }
}

/// Iterations that break the step-count identity or the iteration-length bound.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaReport {
    /// Iterations where `steps != n + moves`.
    pub step_identity: Vec<u64>,
    /// Iterations where `steps < c/(2+c)·(D_j + n) - 2`.
    pub length_bound: Vec<u64>,
}

impl LemmaReport {
    pub fn is_clean(&self) -> bool {
        self.step_identity.is_empty() && self.length_bound.is_empty()
    }
}

/// Checks `dt_j = n + A_j` exactly and `dt_j >= c/(2+c)·(D_j + n) - 2` for every record.
pub fn check_lemma_bounds(records: &[IterationRecord], n: usize, speedup: Speedup) -> LemmaReport {
    let (p, q) = (speedup.p as u128, speedup.q as u128);
    let mut report = LemmaReport::default();
    for r in records {
        if r.steps != n as u64 + r.moves {
            report.step_identity.push(r.j);
        }
        // dt >= p/(2q+p)·(D+n) - 2  <=>  (dt + 2)(2q + p) >= p(D + n)
        let lhs = (r.steps as u128 + 2) * (2 * q + p);
        let rhs = p * (r.d_start as u128 + n as u128);
        if lhs < rhs {
            report.length_bound.push(r.j);
        }
    }
    report
}

fn tail(records: &[IterationRecord]) -> &[IterationRecord] {
    let keep = records.len().div_ceil(4).max(1).min(records.len());
    &records[records.len() - keep..]
}

/// Mean of `D_j` over the last quarter of the iterations.
pub fn steady_state_mean(records: &[IterationRecord]) -> Option<f64> {
    if records.is_empty() {
        return None;
    }
    let t = tail(records);
    Some(t.iter().map(|r| r.d_start as f64).sum::<f64>() / t.len() as f64)
}

/// Largest per-iteration vertex load over the last quarter of the iterations.
pub fn steady_state_max_load(records: &[IterationRecord]) -> Option<u32> {
    tail(records).iter().map(|r| r.max_load).max()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolver::{IdleEvolver, UniformEvolver};
    use crate::generate::gen_path;
    use crate::labeling::{HypothesisLabeling, TrueLabeling};

    fn exact_state(tree: &Tree) -> LabelState {
        let truth = TrueLabeling::identity(tree.len());
        let hyp = HypothesisLabeling::exact(&truth);
        LabelState::new(tree, truth, hyp).unwrap()
    }

    /// Counts events on the schedule alone.
    struct CountingEvolver;
    impl Evolver for CountingEvolver {
        fn next_action(
            &mut self,
            _: &Tree,
            _: &TrueLabeling,
            _: &HypothesisLabeling,
        ) -> EvolverAction {
            EvolverAction::Hold
        }
    }

    fn schedule(p: u64, q: u64, time: u64) -> (u64, u64) {
        let t = gen_path(8).unwrap();
        let sim = Simulation::new(
            &t,
            exact_state(&t),
            CountingEvolver,
            Speedup::new(p, q).unwrap(),
            RunOptions::unchecked(),
        );
        let out = sim.run(Horizon::Time { num: time, den: 1 }).unwrap();
        (out.tracker_steps, out.evolver_turns)
    }

    #[test]
    fn speedup_parsing() {
        assert_eq!("3/2".parse::<Speedup>().unwrap(), Speedup::new(3, 2).unwrap());
        assert_eq!("4/2".parse::<Speedup>().unwrap().to_string(), "2/1");
        assert!(matches!("0.9".parse::<Speedup>(), Err(SpeedupError::Syntax(_))));
        assert!(matches!("2/3".parse::<Speedup>(), Err(SpeedupError::BelowOne { .. })));
        assert!(matches!("0/0".parse::<Speedup>(), Err(SpeedupError::Zero)));
        assert!("2".parse::<Speedup>().is_err());
    }

    #[test]
    fn schedule_counts() {
        assert_eq!(schedule(2, 1, 10), (10, 5));
        assert_eq!(schedule(3, 2, 6), (6, 4));
        assert_eq!(schedule(1, 1, 7), (7, 7));
    }

    #[test]
    fn exact_start_iteration_takes_n_steps() {
        let t = gen_path(16).unwrap();
        let sim = Simulation::new(
            &t,
            exact_state(&t),
            IdleEvolver,
            Speedup::integer(2).unwrap(),
            RunOptions::for_tree(&t),
        );
        let out = sim.run(Horizon::Iterations(3)).unwrap();
        assert_eq!(out.records.len(), 3);
        for r in &out.records {
            assert_eq!(r.steps, 16);
            assert_eq!(r.moves, 0);
            assert_eq!(r.d_start, 0);
        }
        assert!(out.lemma_report().is_clean());
    }

    #[test]
    fn single_displaced_label_takes_three_moves_and_a_fix() {
        let t = gen_path(6).unwrap();
        let truth = TrueLabeling::identity(6);
        let mut pos = truth.positions().to_vec();
        pos[0] = VertexId(3);
        let hyp = HypothesisLabeling::from_positions(6, pos).unwrap();
        let state = LabelState::new(&t, truth, hyp).unwrap();
        let mut sim = Simulation::new(&t, state, IdleEvolver, Speedup::integer(2).unwrap(), RunOptions::for_tree(&t));
        for _ in 0..3 {
            assert!(matches!(sim.algorithm_step(), StepOutcome::Moved { .. }));
        }
        assert_eq!(sim.algorithm_step(), StepOutcome::Fixed { label: LabelId(0) });
        assert_eq!(sim.state().total(), 0);
        assert_eq!(sim.tracker().label, 1);
    }

    #[test]
    fn lemma_identities_hold_under_random_evolver() {
        let t = gen_path(40).unwrap();
        let sim = Simulation::new(
            &t,
            exact_state(&t),
            UniformEvolver::new(3),
            Speedup::new(5, 2).unwrap(),
            RunOptions::for_tree(&t),
        );
        let out = sim.run(Horizon::Iterations(30)).unwrap();
        assert!(out.lemma_report().is_clean());
        assert_eq!(out.audits.failures, 0);
        assert!(out.audits.checks > 0);
    }

    #[test]
    fn lemma_check_flags_bad_records() {
        let bad = IterationRecord {
            j: 1,
            d_start: 1000,
            moves: 0,
            steps: 11,
            evolver_steps: 0,
            max_load: 1,
            step_index: 11,
            peak_distance: 1000,
        };
        let report = check_lemma_bounds(&[bad], 10, Speedup::integer(2).unwrap());
        assert_eq!(report.step_identity, vec![1]);
        assert_eq!(report.length_bound, vec![1]);
    }

    #[test]
    fn step_cap_stops_a_stalled_run() {
        // On a single edge at c = 1 every swap undoes the tracker's last move.
        let t = gen_path(2).unwrap();
        let truth = TrueLabeling::identity(2);
        let hyp = HypothesisLabeling::from_positions(2, vec![VertexId(1), VertexId(0)]).unwrap();
        let state = LabelState::new(&t, truth, hyp).unwrap();
        let sim = Simulation::new(
            &t,
            state,
            crate::evolver::UniformEvolver::new(1),
            Speedup::integer(1).unwrap(),
            RunOptions::for_tree(&t).with_step_cap(10_000),
        );
        let out = sim.run(Horizon::Iterations(1)).unwrap();
        assert!(out.truncated);
        assert_eq!(out.tracker_steps, 10_000);
        assert!(out.records.is_empty());
    }

    #[test]
    fn default_budget() {
        assert_eq!(default_iteration_budget(64), 50);
        assert_eq!(default_iteration_budget(1 << 20), 80);
        assert_eq!(default_iteration_budget(4097), 52);
    }

    #[test]
    fn steady_state_uses_last_quarter() {
        let recs: Vec<IterationRecord> = (1..=8)
            .map(|j| IterationRecord {
                j,
                d_start: j * 10,
                moves: 0,
                steps: 0,
                evolver_steps: 0,
                max_load: j as u32,
                step_index: 0,
                peak_distance: 0,
            })
            .collect();
        assert_eq!(steady_state_mean(&recs), Some(75.0));
        assert_eq!(steady_state_max_load(&recs), Some(8));
        assert_eq!(steady_state_mean(&[]), None);
    }
}
