//! Evolvers: the agents that swap true labels across tree edges.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::labeling::{HypothesisLabeling, TrueLabeling};
use crate::script::SwapScript;
use crate::tree::{Tree, VertexId};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum EvolverAction {
    Swap(VertexId, VertexId),
    /// Spend the turn without changing anything.
    Hold,
    /// The evolver has nothing left to do and the run should stop.
    Halt,
}

/// An evolver is consulted once per evolver turn. It may inspect both the
/// truth and the tracker's hypothesis, so adaptive adversaries fit here.
pub trait Evolver: Send {
    fn next_action(&mut self, tree: &Tree, truth: &TrueLabeling, hyp: &HypothesisLabeling) -> EvolverAction;
}

impl<E: Evolver + ?Sized> Evolver for Box<E> {
    fn next_action(&mut self, tree: &Tree, truth: &TrueLabeling, hyp: &HypothesisLabeling) -> EvolverAction {
        (**self).next_action(tree, truth, hyp)
    }
}

/// Never swaps.
#[derive(Clone, Debug, Default)]
pub struct IdleEvolver;

impl Evolver for IdleEvolver {
    fn next_action(&mut self, _: &Tree, _: &TrueLabeling, _: &HypothesisLabeling) -> EvolverAction {
        EvolverAction::Hold
    }
}

/// Picks each of the `n - 1` edges with probability `1 / (n - 1)`.
#[derive(Clone, Debug)]
pub struct UniformEvolver {
    rng: ChaCha8Rng,
}

impl UniformEvolver {
    pub fn new(seed: u64) -> Self {
        UniformEvolver {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Evolver for UniformEvolver {
    fn next_action(&mut self, tree: &Tree, _: &TrueLabeling, _: &HypothesisLabeling) -> EvolverAction {
        let edges = tree.edges();
        if edges.is_empty() {
            return EvolverAction::Hold;
        }
        let (u, v) = edges[self.rng.gen_range(0..edges.len())];
        EvolverAction::Swap(u, v)
    }
}

/// Samples candidate edges and swaps the one that increases the distance most.
///
/// With `sample_size >= n - 1` every edge is scanned in order; otherwise
/// `sample_size` edges are drawn with replacement. Ties go to the first candidate.
#[derive(Clone, Debug)]
pub struct GreedyEvolver {
    rng: ChaCha8Rng,
    sample_size: usize,
}

impl GreedyEvolver {
    pub fn new(seed: u64, sample_size: usize) -> Self {
        GreedyEvolver {
            rng: ChaCha8Rng::seed_from_u64(seed),
            sample_size: sample_size.max(1),
        }
    }

    /// Change in total distance if the labels across `(u, v)` were swapped.
    pub fn swap_gain(tree: &Tree, truth: &TrueLabeling, hyp: &HypothesisLabeling, u: VertexId, v: VertexId) -> i64 {
        // Each label moves one hop: closer iff its hypothesis lies on the far side.
        let step = |from: VertexId, to: VertexId| {
            let h = hyp.vertex_of(truth.label_at(from));
            if tree.on_side_of(from, to, h) {
                -1
            } else {
                1
            }
        };
        step(u, v) + step(v, u)
    }
}

impl Evolver for GreedyEvolver {
    fn next_action(&mut self, tree: &Tree, truth: &TrueLabeling, hyp: &HypothesisLabeling) -> EvolverAction {
        let edges = tree.edges();
        if edges.is_empty() {
            return EvolverAction::Hold;
        }
        let mut best: Option<((VertexId, VertexId), i64)> = None;
        let mut consider = |e: (VertexId, VertexId)| {
            let gain = Self::swap_gain(tree, truth, hyp, e.0, e.1);
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((e, gain));
            }
        };
        if self.sample_size >= edges.len() {
            edges.iter().copied().for_each(&mut consider);
        } else {
            for _ in 0..self.sample_size {
                consider(edges[self.rng.gen_range(0..edges.len())]);
            }
        }
        let ((u, v), _) = best.expect("at least one candidate");
        EvolverAction::Swap(u, v)
    }
}

/// What a scripted evolver does once its script runs out.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExhaustedPolicy {
    /// Keep taking turns without swapping.
    #[default]
    Hold,
    /// Signal the run to stop.
    Halt,
}

/// Replays a fixed script.
#[derive(Clone, Debug)]
pub struct ScriptedEvolver {
    script: SwapScript,
    cursor: usize,
    policy: ExhaustedPolicy,
}

impl ScriptedEvolver {
    pub fn new(script: SwapScript, policy: ExhaustedPolicy) -> Self {
        ScriptedEvolver {
            script,
            cursor: 0,
            policy,
        }
    }

    pub fn remaining(&self) -> usize {
        self.script.len() - self.cursor
    }
}

impl Evolver for ScriptedEvolver {
    fn next_action(&mut self, _: &Tree, _: &TrueLabeling, _: &HypothesisLabeling) -> EvolverAction {
        match self.script.get(self.cursor) {
            Some((u, v)) => {
                self.cursor += 1;
                EvolverAction::Swap(u, v)
            }
            None => match self.policy {
                ExhaustedPolicy::Hold => EvolverAction::Hold,
                ExhaustedPolicy::Halt => EvolverAction::Halt,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::gen_path;

    fn vid(i: usize) -> VertexId {
        VertexId::new(i)
    }

    #[test]
    fn uniform_frequencies_on_three_path() {
        let t = gen_path(3).unwrap();
        let truth = TrueLabeling::identity(3);
        let hyp = HypothesisLabeling::exact(&truth);
        let mut e = UniformEvolver::new(2024);
        let draws = 100_000;
        let mut first = 0usize;
        for _ in 0..draws {
            match e.next_action(&t, &truth, &hyp) {
                EvolverAction::Swap(u, v) if (u, v) == (vid(0), vid(1)) => first += 1,
                EvolverAction::Swap(..) => {}
                other => panic!("unexpected {other:?}"),
            }
        }
        let freq = first as f64 / draws as f64;
        assert!((freq - 0.5).abs() <= 0.01, "frequency {freq}");
    }

    #[test]
    fn uniform_is_seed_deterministic() {
        let t = gen_path(10).unwrap();
        let truth = TrueLabeling::identity(10);
        let hyp = HypothesisLabeling::exact(&truth);
        let mut a = UniformEvolver::new(5);
        let mut b = UniformEvolver::new(5);
        for _ in 0..200 {
            assert_eq!(a.next_action(&t, &truth, &hyp), b.next_action(&t, &truth, &hyp));
        }
    }

    #[test]
    fn greedy_finds_a_double_increase() {
        let t = gen_path(4).unwrap();
        let truth = TrueLabeling::identity(4);
        // Labels 0 and 1 are hypothesized away from the truth; only edge (2,3)
        // has both labels correctly placed.
        let hyp = HypothesisLabeling::from_positions(4, vec![vid(1), vid(0), vid(2), vid(3)]).unwrap();
        let mut g = GreedyEvolver::new(0, 16);
        match g.next_action(&t, &truth, &hyp) {
            EvolverAction::Swap(u, v) => {
                assert_eq!(GreedyEvolver::swap_gain(&t, &truth, &hyp, u, v), 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn swap_gain_matches_distances() {
        use crate::generate::gen_random_bounded;
        use crate::labeling::InitialHypothesis;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for seed in 0..20 {
            let t = gen_random_bounded(40, 4, seed).unwrap();
            let truth = TrueLabeling::random(40, &mut rng);
            let hyp = InitialHypothesis::Random.build(&truth, &mut rng).unwrap();
            for &(u, v) in t.edges() {
                let hu = hyp.vertex_of(truth.label_at(u));
                let hv = hyp.vertex_of(truth.label_at(v));
                let before = t.distance(u, hu) as i64 + t.distance(v, hv) as i64;
                let after = t.distance(v, hu) as i64 + t.distance(u, hv) as i64;
                assert_eq!(GreedyEvolver::swap_gain(&t, &truth, &hyp, u, v), after - before);
                assert_eq!(GreedyEvolver::swap_gain(&t, &truth, &hyp, v, u), after - before);
            }
        }
    }

    #[test]
    fn scripted_replays_then_follows_policy() {
        let t = gen_path(4).unwrap();
        let truth = TrueLabeling::identity(4);
        let hyp = HypothesisLabeling::exact(&truth);
        let swaps = vec![(vid(0), vid(1)), (vid(2), vid(3)), (vid(1), vid(2))];
        let mut s = ScriptedEvolver::new(SwapScript::new(swaps.clone()), ExhaustedPolicy::Halt);
        for &(u, v) in &swaps {
            assert_eq!(s.next_action(&t, &truth, &hyp), EvolverAction::Swap(u, v));
        }
        assert_eq!(s.next_action(&t, &truth, &hyp), EvolverAction::Halt);

        let mut s = ScriptedEvolver::new(SwapScript::new(swaps), ExhaustedPolicy::Hold);
        for _ in 0..3 {
            s.next_action(&t, &truth, &hyp);
        }
        assert_eq!(s.remaining(), 0);
        assert_eq!(s.next_action(&t, &truth, &hyp), EvolverAction::Hold);
    }
}
