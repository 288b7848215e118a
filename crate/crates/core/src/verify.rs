//! Brute-force reference implementations, independent of the ancestor tables.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generate::{gen_path, gen_random_bounded, gen_wings, TailShape};
use crate::labeling::{HypothesisLabeling, InitialHypothesis, LabelState, TrueLabeling};
use crate::oracle::{oracle_query, OracleAnswer};
use crate::script::{make_wings_script, wings_distance, wings_goal, wings_opt};
use crate::tree::{LabelId, Tree, VertexId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("first edge from a vertex to itself is undefined (vertex {0})")]
    SameVertex(VertexId),
    #[error("configuration search supports at most 16 vertices, got {0}")]
    TooLarge(usize),
    #[error("labelings have sizes {start} and {goal} but the tree has {n} vertices")]
    SizeMismatch { n: usize, start: usize, goal: usize },
    #[error("configuration search exceeded its budget of {budget} nodes")]
    BudgetExceeded { budget: usize },
}

/// Default node budget for [`min_swaps_bfs`].
pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

fn bfs_from(tree: &Tree, source: VertexId) -> Vec<u32> {
    let mut dist = vec![u32::MAX; tree.len()];
    let mut queue = VecDeque::new();
    dist[source.index()] = 0;
    queue.push_back(source);
    while let Some(x) = queue.pop_front() {
        for &y in tree.neighbors(x) {
            if dist[y.index()] == u32::MAX {
                dist[y.index()] = dist[x.index()] + 1;
                queue.push_back(y);
            }
        }
    }
    dist
}

pub fn bfs_distance(tree: &Tree, u: VertexId, v: VertexId) -> u32 {
    bfs_from(tree, v)[u.index()]
}

/// First edge on the path from `u` to `w`, found by a BFS rooted at `w`.
pub fn bfs_first_edge(tree: &Tree, u: VertexId, w: VertexId) -> Result<(VertexId, VertexId), VerifyError> {
    if u == w {
        return Err(VerifyError::SameVertex(u));
    }
    let dist = bfs_from(tree, w);
    let next = tree
        .neighbors(u)
        .iter()
        .copied()
        .find(|y| dist[y.index()] + 1 == dist[u.index()])
        .expect("connected tree has a neighbor closer to the target");
    Ok((u, next))
}

/// Sum over labels of BFS distances between true and hypothesized vertices.
pub fn naive_total_distance(tree: &Tree, truth: &TrueLabeling, hyp: &HypothesisLabeling) -> u64 {
    (0..truth.len())
        .map(|l| {
            let label = LabelId::new(l);
            bfs_distance(tree, truth.vertex_of(label), hyp.vertex_of(label)) as u64
        })
        .sum()
}

/// Vertex `v` holds the label in nibble `v`.
fn pack(labeling: &TrueLabeling) -> u64 {
    let mut key = 0u64;
    for v in 0..labeling.len() {
        key |= (labeling.label_at(VertexId::new(v)).0 as u64) << (4 * v);
    }
    key
}

fn swap_nibbles(key: u64, a: usize, b: usize) -> u64 {
    let x = (key >> (4 * a)) & 0xf;
    let y = (key >> (4 * b)) & 0xf;
    let cleared = key & !(0xf << (4 * a)) & !(0xf << (4 * b));
    cleared | (y << (4 * a)) | (x << (4 * b))
}

/// Exact minimum number of edge swaps from `start` to `goal`, by breadth-first
/// search over permutations. Counts visited configurations against `budget`.
pub fn min_swaps_bfs(
    tree: &Tree,
    start: &TrueLabeling,
    goal: &TrueLabeling,
    budget: usize,
) -> Result<u64, VerifyError> {
    let n = tree.len();
    if n > 16 {
        return Err(VerifyError::TooLarge(n));
    }
    if start.len() != n || goal.len() != n {
        return Err(VerifyError::SizeMismatch {
            n,
            start: start.len(),
            goal: goal.len(),
        });
    }
    let edges: Vec<(usize, usize)> = tree.edges().iter().map(|&(u, v)| (u.index(), v.index())).collect();
    let (from, to) = (pack(start), pack(goal));
    if from == to {
        return Ok(0);
    }
    let mut depth: HashMap<u64, u64> = HashMap::new();
    depth.insert(from, 0);
    let mut queue = VecDeque::from([from]);
    while let Some(key) = queue.pop_front() {
        let d = depth[&key];
        for &(a, b) in &edges {
            let next = swap_nibbles(key, a, b);
            if next == to {
                return Ok(d + 1);
            }
            if !depth.contains_key(&next) {
                if depth.len() >= budget {
                    return Err(VerifyError::BudgetExceeded { budget });
                }
                depth.insert(next, d + 1);
                queue.push_back(next);
            }
        }
    }
    unreachable!("every permutation is reachable by swaps on a connected tree");
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckLevel {
    /// Oracle, distance and metric checks on small trees.
    Quick,
    /// Adds configuration searches on tiny wings trees and script checks.
    Full,
}

impl std::str::FromStr for CheckLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "quick" => Ok(CheckLevel::Quick),
            "full" => Ok(CheckLevel::Full),
            other => Err(format!("unknown level `{other}` (expected quick or full)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{mark}  {:<34} {}", self.name, self.detail)
    }
}

/// Random trees of mixed shape used by the checks.
pub fn sample_trees(count: usize, max_n: usize, seed: u64) -> Vec<Tree> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(2..=max_n);
            let k = rng.gen_range(2..=n.max(3));
            gen_random_bounded(n, k, rng.gen()).expect("valid parameters")
        })
        .collect()
}

/// Oracle answers against BFS first edges. Exhaustive over (label, vertex)
/// for `n <= 16`, otherwise `samples` random queries per tree.
pub fn check_oracle(trees: &[Tree], samples: usize, seed: u64) -> (u64, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut checked, mut mismatches) = (0u64, 0u64);
    for tree in trees {
        let n = tree.len();
        let truth = TrueLabeling::random(n, &mut rng);
        let mut probe = |label: usize, u: usize| {
            let (label, u) = (LabelId::new(label), VertexId::new(u));
            let target = truth.vertex_of(label);
            let expected = match bfs_first_edge(tree, u, target) {
                Err(VerifyError::SameVertex(_)) => OracleAnswer::AtTarget,
                Err(e) => panic!("{e}"),
                Ok((a, b)) => OracleAnswer::NextEdge(a, b),
            };
            checked += 1;
            if oracle_query(tree, &truth, label, u) != expected {
                mismatches += 1;
            }
        };
        if n <= 16 {
            for label in 0..n {
                for u in 0..n {
                    probe(label, u);
                }
            }
        } else {
            for _ in 0..samples {
                probe(rng.gen_range(0..n), rng.gen_range(0..n));
            }
        }
    }
    (checked, mismatches)
}

/// Indexed distances against BFS over all vertex pairs.
pub fn check_distances(trees: &[Tree]) -> (u64, u64) {
    let (mut checked, mut mismatches) = (0u64, 0u64);
    for tree in trees {
        for v in 0..tree.len() {
            let dist = bfs_from(tree, VertexId::new(v));
            for (u, &d) in dist.iter().enumerate() {
                checked += 1;
                if tree.distance(VertexId::new(u), VertexId::new(v)) != d {
                    mismatches += 1;
                }
            }
        }
    }
    (checked, mismatches)
}

/// Random interleaving of true swaps and hypothesis moves; the incremental
/// total is compared with [`naive_total_distance`] every `audit_every` ops.
/// Returns `(audits, mismatches)`.
pub fn check_incremental(tree: &Tree, ops: usize, audit_every: usize, seed: u64) -> (u64, u64) {
    let n = tree.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth = TrueLabeling::random(n, &mut rng);
    let hyp = InitialHypothesis::Random.build(&truth, &mut rng).expect("sizes match");
    let mut state = LabelState::new(tree, truth, hyp).expect("sizes match");
    let edges = tree.edges().to_vec();
    let (mut audits, mut mismatches) = (0u64, 0u64);
    for step in 1..=ops {
        if rng.gen_bool(0.5) && !edges.is_empty() {
            let (u, v) = edges[rng.gen_range(0..edges.len())];
            state.apply_true_swap(tree, u, v).expect("edge");
        } else {
            let label = LabelId::new(rng.gen_range(0..n));
            let nbrs = tree.neighbors(state.hypothesis().vertex_of(label));
            if nbrs.is_empty() {
                continue;
            }
            let to = nbrs[rng.gen_range(0..nbrs.len())];
            state.apply_hypothesis_move(tree, label, to).expect("adjacent");
        }
        if step % audit_every.max(1) == 0 || step == ops {
            audits += 1;
            if naive_total_distance(tree, state.truth(), state.hypothesis()) != state.total() {
                mismatches += 1;
            }
        }
    }
    (audits, mismatches)
}

/// Runs the brute-force suite and returns one row per check.
pub fn run_checks(level: CheckLevel) -> Vec<CheckResult> {
    let mut out = Vec::new();

    let small = sample_trees(20, 16, 11);
    let (checked, bad) = check_oracle(&small, 0, 12);
    out.push(CheckResult::new(
        "oracle vs bfs (n<=16, exhaustive)",
        bad == 0,
        format!("{checked} queries, {bad} mismatches"),
    ));

    let (checked, bad) = check_distances(&small);
    out.push(CheckResult::new(
        "distance vs bfs (all pairs)",
        bad == 0,
        format!("{checked} pairs, {bad} mismatches"),
    ));

    let path4 = gen_path(4).expect("path");
    let truth = TrueLabeling::identity(4);
    let reversed = InitialHypothesis::Reversed
        .build(&truth, &mut ChaCha8Rng::seed_from_u64(0))
        .expect("sizes match");
    let zero = naive_total_distance(&path4, &truth, &HypothesisLabeling::exact(&truth));
    let rev = naive_total_distance(&path4, &truth, &reversed);
    out.push(CheckResult::new(
        "naive distance fixtures",
        zero == 0 && rev == 8,
        format!("identical {zero}, reversed 4-path {rev}"),
    ));

    let (audits, bad) = check_incremental(&small[0], 2_000, 10, 13);
    out.push(CheckResult::new(
        "incremental vs naive distance",
        bad == 0,
        format!("{audits} audits, {bad} mismatches"),
    ));

    if level == CheckLevel::Full {
        let larger = sample_trees(20, 64, 21);
        let (checked, bad) = check_oracle(&larger, 2_000, 22);
        out.push(CheckResult::new(
            "oracle vs bfs (n<=64, sampled)",
            bad == 0,
            format!("{checked} queries, {bad} mismatches"),
        ));

        let mut script_rows = 0;
        let mut script_bad = Vec::new();
        for alpha in 1..=4 {
            for beta in 2..=4 {
                for tails in [TailShape::Leaves, TailShape::Chain] {
                    let w = gen_wings(alpha, beta, tails).expect("valid");
                    let ws = make_wings_script(&w);
                    let mut t = TrueLabeling::identity(w.tree().len());
                    let reached = ws.script.apply(w.tree(), &mut t).is_ok() && t == wings_goal(&w);
                    script_rows += 1;
                    if !reached || ws.script.len() as u64 > ws.opt {
                        script_bad.push(format!("({alpha},{beta},{tails})"));
                    }
                }
            }
        }
        out.push(CheckResult::new(
            "wings scripts reach T1 within opt",
            script_bad.is_empty(),
            if script_bad.is_empty() {
                format!("{script_rows} instances")
            } else {
                format!("failing: {}", script_bad.join(" "))
            },
        ));

        for (alpha, beta) in [(1, 2), (2, 2)] {
            for tails in [TailShape::Leaves, TailShape::Chain] {
                let w = gen_wings(alpha, beta, tails).expect("valid");
                let n = w.tree().len();
                let t0 = TrueLabeling::identity(n);
                let t1 = wings_goal(&w);
                let name = format!("min swaps wings({alpha},{beta},{tails})");
                match (
                    min_swaps_bfs(w.tree(), &t0, &t1, DEFAULT_NODE_BUDGET),
                    min_swaps_bfs(w.tree(), &t1, &t0, DEFAULT_NODE_BUDGET),
                ) {
                    (Ok(fwd), Ok(back)) => {
                        let d = wings_distance(alpha, beta);
                        let opt = wings_opt(alpha, beta);
                        let ok = fwd == back && 2 * fwd >= d && fwd <= opt;
                        out.push(CheckResult::new(
                            name,
                            ok,
                            format!("min {fwd} (reverse {back}), D/2 {}, opt {opt}", d as f64 / 2.0),
                        ));
                    }
                    (a, b) => out.push(CheckResult::new(name, false, format!("{a:?} / {b:?}"))),
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::gen_balanced;

    fn vid(i: usize) -> VertexId {
        VertexId::new(i)
    }

    #[test]
    fn first_edge_on_short_path() {
        let t = gen_path(3).unwrap();
        assert_eq!(bfs_first_edge(&t, vid(0), vid(2)), Ok((vid(0), vid(1))));
        assert_eq!(bfs_first_edge(&t, vid(1), vid(1)), Err(VerifyError::SameVertex(vid(1))));
    }

    #[test]
    fn bfs_distance_matches_index_on_random_pairs() {
        let t = gen_random_bounded(64, 4, 9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let (u, v) = (vid(rng.gen_range(0..64)), vid(rng.gen_range(0..64)));
            assert_eq!(bfs_distance(&t, u, v), t.distance(u, v));
        }
    }

    #[test]
    fn min_swaps_trivial_cases() {
        let t = gen_path(2).unwrap();
        let id = TrueLabeling::identity(2);
        assert_eq!(min_swaps_bfs(&t, &id, &id, 10), Ok(0));
        let sw = TrueLabeling::from_positions(vec![vid(1), vid(0)]).unwrap();
        assert_eq!(min_swaps_bfs(&t, &id, &sw, 10), Ok(1));
    }

    #[test]
    fn reversing_a_path_takes_the_inversion_count() {
        // Adjacent transpositions on a path: minimum is the number of inversions.
        for n in 2..=6 {
            let t = gen_path(n).unwrap();
            let id = TrueLabeling::identity(n);
            let rev = TrueLabeling::from_positions((0..n).rev().map(vid).collect()).unwrap();
            assert_eq!(min_swaps_bfs(&t, &id, &rev, DEFAULT_NODE_BUDGET), Ok((n * (n - 1) / 2) as u64));
        }
    }

    #[test]
    fn min_swaps_reports_budget_and_size() {
        let t = gen_path(6).unwrap();
        let id = TrueLabeling::identity(6);
        let rev = TrueLabeling::from_positions((0..6).rev().map(vid).collect()).unwrap();
        assert_eq!(
            min_swaps_bfs(&t, &id, &rev, 5),
            Err(VerifyError::BudgetExceeded { budget: 5 })
        );
        let big = gen_path(17).unwrap();
        let id17 = TrueLabeling::identity(17);
        assert_eq!(min_swaps_bfs(&big, &id17, &id17, 5), Err(VerifyError::TooLarge(17)));
    }

    #[test]
    fn wings_one_two_bounds() {
        let w = gen_wings(1, 2, TailShape::Leaves).unwrap();
        let t0 = TrueLabeling::identity(w.tree().len());
        let m = min_swaps_bfs(w.tree(), &t0, &wings_goal(&w), DEFAULT_NODE_BUDGET).unwrap();
        assert!(2 * m >= wings_distance(1, 2));
        assert!(m <= wings_opt(1, 2));
    }

    #[test]
    fn naive_distance_fixtures() {
        let t = gen_balanced(7, 2).unwrap();
        let truth = TrueLabeling::identity(7);
        assert_eq!(naive_total_distance(&t, &truth, &HypothesisLabeling::exact(&truth)), 0);
    }

    #[test]
    fn quick_checks_pass() {
        for row in run_checks(CheckLevel::Quick) {
            assert!(row.passed, "{row}");
        }
    }
}
