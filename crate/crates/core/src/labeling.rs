//! True and hypothesized labelings and the distance between them.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tree::{LabelId, Tree, VertexId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LabelingError {
    #[error("labeling has {got} entries, tree has {expected} vertices")]
    SizeMismatch { expected: usize, got: usize },
    #[error("vertex {0} is outside the tree")]
    VertexOutOfRange(VertexId),
    #[error("label {0} is outside the label set")]
    LabelOutOfRange(LabelId),
    #[error("vertex {0} is assigned more than one label in a true labeling")]
    NotBijective(VertexId),
    #[error("({0}, {1}) is not a tree edge")]
    NotAnEdge(VertexId, VertexId),
}

/// Bijective label → vertex map, kept together with its inverse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrueLabeling {
    label_to_vertex: Vec<VertexId>,
    vertex_to_label: Vec<LabelId>,
}

impl TrueLabeling {
    /// Label `i` at vertex `i`.
    pub fn identity(n: usize) -> Self {
        TrueLabeling {
            label_to_vertex: (0..n).map(VertexId::new).collect(),
            vertex_to_label: (0..n).map(LabelId::new).collect(),
        }
    }

    /// Builds from `positions[label] = vertex`, which must be a permutation.
    pub fn from_positions(positions: Vec<VertexId>) -> Result<Self, LabelingError> {
        let n = positions.len();
        let mut vertex_to_label = vec![LabelId(u32::MAX); n];
        for (label, &v) in positions.iter().enumerate() {
            if v.index() >= n {
                return Err(LabelingError::VertexOutOfRange(v));
            }
            if vertex_to_label[v.index()].0 != u32::MAX {
                return Err(LabelingError::NotBijective(v));
            }
            vertex_to_label[v.index()] = LabelId::new(label);
        }
        Ok(TrueLabeling {
            label_to_vertex: positions,
            vertex_to_label,
        })
    }

    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        let mut positions: Vec<VertexId> = (0..n).map(VertexId::new).collect();
        positions.shuffle(rng);
        TrueLabeling::from_positions(positions).expect("shuffle is a permutation")
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.label_to_vertex.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.label_to_vertex.is_empty()
    }

    #[inline]
    pub fn vertex_of(&self, label: LabelId) -> VertexId {
        self.label_to_vertex[label.index()]
    }

    #[inline]
    pub fn label_at(&self, v: VertexId) -> LabelId {
        self.vertex_to_label[v.index()]
    }

    pub fn positions(&self) -> &[VertexId] {
        &self.label_to_vertex
    }

    /// Exchanges the labels at `u` and `v` without checking adjacency.
    #[inline]
    pub(crate) fn exchange(&mut self, u: VertexId, v: VertexId) -> (LabelId, LabelId) {
        let a = self.vertex_to_label[u.index()];
        let b = self.vertex_to_label[v.index()];
        self.vertex_to_label.swap(u.index(), v.index());
        self.label_to_vertex[a.index()] = v;
        self.label_to_vertex[b.index()] = u;
        (a, b)
    }

    /// Swaps the labels across tree edge `(u, v)`.
    pub fn swap_edge(&mut self, tree: &Tree, u: VertexId, v: VertexId) -> Result<(), LabelingError> {
        if !tree.is_edge(u, v) {
            return Err(LabelingError::NotAnEdge(u, v));
        }
        self.exchange(u, v);
        Ok(())
    }
}

/// Label → vertex map with no injectivity requirement.
///
/// Occupancy counts are kept per vertex, plus a histogram of occupancies so
/// the maximum load is available in O(1) after each move.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HypothesisLabeling {
    label_to_vertex: Vec<VertexId>,
    occupancy: Vec<u32>,
    load_histogram: Vec<u32>,
    max_load: u32,
}

impl HypothesisLabeling {
    pub fn from_positions(vertex_count: usize, positions: Vec<VertexId>) -> Result<Self, LabelingError> {
        let mut occupancy = vec![0u32; vertex_count];
        for &v in &positions {
            if v.index() >= vertex_count {
                return Err(LabelingError::VertexOutOfRange(v));
            }
            occupancy[v.index()] += 1;
        }
        let mut load_histogram = vec![0u32; positions.len() + 2];
        for &o in &occupancy {
            load_histogram[o as usize] += 1;
        }
        let max_load = occupancy.iter().copied().max().unwrap_or(0);
        Ok(HypothesisLabeling {
            label_to_vertex: positions,
            occupancy,
            load_histogram,
            max_load,
        })
    }

    /// A hypothesis identical to `truth`.
    pub fn exact(truth: &TrueLabeling) -> Self {
        HypothesisLabeling::from_positions(truth.len(), truth.positions().to_vec())
            .expect("true labeling is in range")
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.label_to_vertex.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.label_to_vertex.is_empty()
    }

    #[inline]
    pub fn vertex_of(&self, label: LabelId) -> VertexId {
        self.label_to_vertex[label.index()]
    }

    pub fn positions(&self) -> &[VertexId] {
        &self.label_to_vertex
    }

    #[inline]
    pub fn occupancy(&self, v: VertexId) -> u32 {
        self.occupancy[v.index()]
    }

    /// Largest number of labels hypothesized at a single vertex.
    #[inline]
    pub fn max_vertex_load(&self) -> u32 {
        self.max_load
    }

    #[inline]
    pub(crate) fn relocate(&mut self, label: LabelId, to: VertexId) {
        let from = self.label_to_vertex[label.index()];
        if from == to {
            return;
        }
        let o = self.occupancy[from.index()] as usize;
        self.load_histogram[o] -= 1;
        self.load_histogram[o - 1] += 1;
        self.occupancy[from.index()] -= 1;
        if o as u32 == self.max_load && self.load_histogram[o] == 0 {
            self.max_load -= 1;
        }

        let o = self.occupancy[to.index()] as usize;
        self.load_histogram[o] -= 1;
        self.load_histogram[o + 1] += 1;
        self.occupancy[to.index()] += 1;
        if o as u32 + 1 > self.max_load {
            self.max_load = o as u32 + 1;
        }
        self.label_to_vertex[label.index()] = to;
    }
}

/// Starting hypothesis configurations.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum InitialHypothesis {
    /// Copy of the truth, distance 0.
    Exact,
    /// Label `i` placed where label `n-1-i` truly sits; reverses a path.
    Reversed,
    /// Every label at one vertex.
    AllAt { vertex: u32 },
    /// Each label at an independent uniformly random vertex.
    Random,
}

impl InitialHypothesis {
    pub fn build(
        &self,
        truth: &TrueLabeling,
        rng: &mut impl Rng,
    ) -> Result<HypothesisLabeling, LabelingError> {
        let n = truth.len();
        let positions: Vec<VertexId> = match *self {
            InitialHypothesis::Exact => truth.positions().to_vec(),
            InitialHypothesis::Reversed => (0..n)
                .map(|l| truth.vertex_of(LabelId::new(n - 1 - l)))
                .collect(),
            InitialHypothesis::AllAt { vertex } => vec![VertexId(vertex); n],
            InitialHypothesis::Random => (0..n).map(|_| VertexId::new(rng.gen_range(0..n))).collect(),
        };
        HypothesisLabeling::from_positions(n, positions)
    }
}

/// Per-label distances between truth and hypothesis and their sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceState {
    per_label: Vec<u32>,
    total: u64,
}

impl DistanceState {
    pub fn compute(tree: &Tree, truth: &TrueLabeling, hyp: &HypothesisLabeling) -> Self {
        let per_label: Vec<u32> = truth
            .positions()
            .iter()
            .zip(hyp.positions())
            .map(|(&t, &h)| tree.distance(t, h))
            .collect();
        let total = per_label.iter().map(|&d| d as u64).sum();
        DistanceState { per_label, total }
    }

    #[inline]
    pub fn total(&self) -> u64 {
        self.total
    }

    #[inline]
    pub fn label(&self, label: LabelId) -> u32 {
        self.per_label[label.index()]
    }

    pub fn per_label(&self) -> &[u32] {
        &self.per_label
    }

    #[inline]
    fn set(&mut self, label: LabelId, d: u32) -> i64 {
        let old = std::mem::replace(&mut self.per_label[label.index()], d);
        let delta = d as i64 - old as i64;
        self.total = (self.total as i64 + delta) as u64;
        delta
    }
}

/// Sum of tree distances between two placements of the same label set.
pub fn placement_distance(tree: &Tree, a: &[VertexId], b: &[VertexId]) -> u64 {
    assert_eq!(a.len(), b.len(), "placements must cover the same labels");
    a.iter().zip(b).map(|(&x, &y)| tree.distance(x, y) as u64).sum()
}

/// Truth, hypothesis and their incrementally maintained distance.
#[derive(Clone, Debug)]
pub struct LabelState {
    truth: TrueLabeling,
    hyp: HypothesisLabeling,
    dist: DistanceState,
}

impl LabelState {
    pub fn new(tree: &Tree, truth: TrueLabeling, hyp: HypothesisLabeling) -> Result<Self, LabelingError> {
        for got in [truth.len(), hyp.len()] {
            if got != tree.len() {
                return Err(LabelingError::SizeMismatch {
                    expected: tree.len(),
                    got,
                });
            }
        }
        let dist = DistanceState::compute(tree, &truth, &hyp);
        Ok(LabelState { truth, hyp, dist })
    }

    pub fn truth(&self) -> &TrueLabeling {
        &self.truth
    }

    pub fn hypothesis(&self) -> &HypothesisLabeling {
        &self.hyp
    }

    pub fn distance(&self) -> &DistanceState {
        &self.dist
    }

    #[inline]
    pub fn total(&self) -> u64 {
        self.dist.total
    }

    pub fn into_parts(self) -> (TrueLabeling, HypothesisLabeling) {
        (self.truth, self.hyp)
    }

    /// Swaps the true labels across edge `(u, v)`; returns the change in total distance.
    pub fn apply_true_swap(&mut self, tree: &Tree, u: VertexId, v: VertexId) -> Result<i64, LabelingError> {
        if !tree.is_edge(u, v) {
            return Err(LabelingError::NotAnEdge(u, v));
        }
        let (a, b) = self.truth.exchange(u, v);
        let da = tree.distance(v, self.hyp.vertex_of(a));
        let db = tree.distance(u, self.hyp.vertex_of(b));
        Ok(self.dist.set(a, da) + self.dist.set(b, db))
    }

    /// Moves `label` in the hypothesis to the adjacent vertex `to`; returns the change (±1).
    pub fn apply_hypothesis_move(&mut self, tree: &Tree, label: LabelId, to: VertexId) -> Result<i64, LabelingError> {
        if label.index() >= self.hyp.len() {
            return Err(LabelingError::LabelOutOfRange(label));
        }
        let from = self.hyp.vertex_of(label);
        if !tree.is_edge(from, to) {
            return Err(LabelingError::NotAnEdge(from, to));
        }
        self.hyp.relocate(label, to);
        let d = tree.distance(self.truth.vertex_of(label), to);
        Ok(self.dist.set(label, d))
    }

    /// Moves `label` one step along a hop already known to approach its true vertex.
    #[inline]
    pub(crate) fn advance_toward_truth(&mut self, label: LabelId, to: VertexId) {
        self.hyp.relocate(label, to);
        let d = self.dist.per_label[label.index()] - 1;
        self.dist.set(label, d);
    }

    /// Recomputes the distance from scratch and reports whether it matches the incremental one.
    pub fn audit(&self, tree: &Tree) -> bool {
        DistanceState::compute(tree, &self.truth, &self.hyp) == self.dist
    }
}

/// Maximum vertex load of a hypothesis.
pub fn max_vertex_load(hyp: &HypothesisLabeling) -> u32 {
    hyp.max_vertex_load()
}
