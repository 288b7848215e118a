//! Swap scripts: fixed sequences of adjacent swaps, plus generators for the
//! path-reversal and wings lower-bound adversaries.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generate::{TailShape, WingsTree};
use crate::labeling::{placement_distance, TrueLabeling};
use crate::tree::{LabelId, Tree, VertexId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScriptError {
    #[error("script entry {index}: ({u}, {v}) is not a tree edge")]
    NotAnEdge { index: usize, u: VertexId, v: VertexId },
    #[error("script is for {expected} vertices, labeling has {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("reversal scripts need a path tree")]
    NotAPath,
}

/// Ordered list of tree edges whose labels are swapped one after another.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwapScript {
    swaps: Vec<(VertexId, VertexId)>,
}

impl SwapScript {
    pub fn new(swaps: Vec<(VertexId, VertexId)>) -> Self {
        SwapScript { swaps }
    }

    pub fn len(&self) -> usize {
        self.swaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.swaps.is_empty()
    }

    pub fn swaps(&self) -> &[(VertexId, VertexId)] {
        &self.swaps
    }

    pub fn get(&self, i: usize) -> Option<(VertexId, VertexId)> {
        self.swaps.get(i).copied()
    }

    pub fn validate(&self, tree: &Tree) -> Result<(), ScriptError> {
        for (index, &(u, v)) in self.swaps.iter().enumerate() {
            if !tree.is_edge(u, v) {
                return Err(ScriptError::NotAnEdge { index, u, v });
            }
        }
        Ok(())
    }

    /// Applies every swap in order to `labeling`.
    pub fn apply(&self, tree: &Tree, labeling: &mut TrueLabeling) -> Result<(), ScriptError> {
        if labeling.len() != tree.len() {
            return Err(ScriptError::SizeMismatch {
                expected: tree.len(),
                got: labeling.len(),
            });
        }
        self.validate(tree)?;
        for &(u, v) in &self.swaps {
            labeling.exchange(u, v);
        }
        Ok(())
    }

    /// The same swaps in reverse order; undoes `self`.
    pub fn reversed(&self) -> SwapScript {
        SwapScript {
            swaps: self.swaps.iter().rev().copied().collect(),
        }
    }
}

/// Bubble-sort sequence of `n(n-1)/2` swaps that reverses the labels on a path.
pub fn make_reversal_script(tree: &Tree) -> Result<SwapScript, ScriptError> {
    let order = tree.path_order().ok_or(ScriptError::NotAPath)?;
    if order.len() < 2 {
        return Err(ScriptError::NotAPath);
    }
    let mut rec = Recorder::default();
    rec.reverse_path(&order);
    Ok(rec.finish())
}

/// Swap budget `(β+1)(α(α+1)/2 + 2α)` for carrying the wings configuration T0 to T1.
pub fn wings_opt(alpha: usize, beta: usize) -> u64 {
    let (a, b) = (alpha as u64, beta as u64);
    (b + 1) * (a * (a + 1) / 2 + 2 * a)
}

/// Distance `βα(α+1)` between T1 and T0.
pub fn wings_distance(alpha: usize, beta: usize) -> u64 {
    let (a, b) = (alpha as u64, beta as u64);
    b * a * (a + 1)
}

/// T1: every wing's label block moved to the next wing (cyclically) at the
/// same depths; center and tail labels unchanged. T0 is the identity.
pub fn wings_goal(wings: &WingsTree) -> TrueLabeling {
    let n = wings.tree().len();
    let mut positions: Vec<VertexId> = (0..n).map(VertexId::new).collect();
    for wing in 0..wings.beta() {
        let next = (wing + 1) % wings.beta();
        for depth in 1..=wings.alpha() {
            let label = wings.wing_vertex(wing, depth).index();
            positions[label] = wings.wing_vertex(next, depth);
        }
    }
    TrueLabeling::from_positions(positions).expect("cyclic shift is a permutation")
}

/// How a wings script routes the label blocks.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WingsRouting {
    /// Wing 0 plus the center act as a buffer that trades blocks with each
    /// other wing in turn. Length `α(α+1) + (β-1)α²`; uses no tail vertex.
    BufferRotation,
    /// Blocks pass through the tail leaves one label at a time, each
    /// wing/leaves exchange costing `α(α+1)/2 + 2α`. Requires leaf tails.
    LeafParking,
}

#[derive(Clone, Debug)]
pub struct WingsScript {
    pub script: SwapScript,
    pub routing: WingsRouting,
    /// Formula budget, for side-by-side reporting with `script.len()`.
    pub opt: u64,
}

/// Shortest available routing from T0 (identity) to [`wings_goal`].
pub fn make_wings_script(wings: &WingsTree) -> WingsScript {
    let mut best = (buffer_rotation(wings), WingsRouting::BufferRotation);
    if wings.tails() == TailShape::Leaves {
        let leaf = leaf_parking(wings);
        if leaf.len() < best.0.len() {
            best = (leaf, WingsRouting::LeafParking);
        }
    }
    WingsScript {
        script: best.0,
        routing: best.1,
        opt: wings_opt(wings.alpha(), wings.beta()),
    }
}

/// Builds a specific routing; `None` if it does not apply to this tree.
pub fn make_wings_script_with(wings: &WingsTree, routing: WingsRouting) -> Option<SwapScript> {
    match routing {
        WingsRouting::BufferRotation => Some(buffer_rotation(wings)),
        WingsRouting::LeafParking if wings.tails() == TailShape::Leaves => Some(leaf_parking(wings)),
        WingsRouting::LeafParking => None,
    }
}

fn buffer_rotation(w: &WingsTree) -> SwapScript {
    let (alpha, beta) = (w.alpha(), w.beta());
    let mut rec = Recorder::default();
    // Buffer path: wing 0 from its tip to the center.
    let mut buffer: Vec<VertexId> = (1..=alpha).rev().map(|d| w.wing_vertex(0, d)).collect();
    buffer.push(w.center());
    // [W0^α .. W0^1, C] becomes [C, W0^1 .. W0^α]: the center label parks at the
    // tip and the block reads outward-to-inward in depth order.
    rec.reverse_path(&buffer);
    for wing in 1..beta {
        // The α buffer slots nearest the center, then the wing outward.
        let mut path: Vec<VertexId> = buffer[1..].to_vec();
        path.extend((1..=alpha).map(|d| w.wing_vertex(wing, d)));
        rec.exchange_blocks(&path, alpha);
    }
    rec.reverse_path(&buffer);
    rec.finish()
}

fn leaf_parking(w: &WingsTree) -> SwapScript {
    let (alpha, beta) = (w.alpha(), w.beta());
    let n = w.tree().len();
    let center = w.center();
    let leaves: Vec<VertexId> = (1..=alpha).map(|q| w.tail_vertex(q)).collect();
    let home = |label: LabelId| VertexId::new(label.index());
    let block = |wing: usize| -> Vec<LabelId> {
        (1..=alpha)
            .map(|d| LabelId::new(w.wing_vertex(wing, d).index()))
            .collect()
    };

    let mut rec = Recorder::tracking(TrueLabeling::identity(n));

    // Each round empties one wing into the leaves while the leaves feed it the
    // labels it must end up holding, deepest first.
    let last = beta - 1;
    let mut rounds: Vec<(usize, Vec<LabelId>)> = Vec::with_capacity(beta + 1);
    // Opening round: the leaf labels themselves fill the last wing.
    let leaf_labels: Vec<LabelId> = leaves.iter().map(|&v| LabelId::new(v.index())).collect();
    rounds.push((last, leaf_labels.iter().rev().copied().collect()));
    for wing in 0..last {
        let incoming = block((wing + beta - 1) % beta);
        rounds.push((wing, incoming.into_iter().rev().collect()));
    }
    rounds.push((last, block(last - 1).into_iter().rev().collect()));
    let final_round = rounds.len() - 1;

    for (round, (wing, incoming)) in rounds.into_iter().enumerate() {
        let slots: Vec<VertexId> = (1..=alpha).map(|d| w.wing_vertex(wing, d)).collect();
        for (k, &want) in incoming.iter().enumerate() {
            // Lift the outgoing label at depth k+1 to the wing's first slot.
            for d in (0..k).rev() {
                rec.swap(slots[d], slots[d + 1]);
            }
            rec.swap(center, slots[0]);
            let outgoing = rec.label_at(center);
            let source = rec.vertex_of(want);
            if round == final_round && source != home(outgoing) {
                // Leaf labels must land on their own leaf: route through it.
                let target = home(outgoing);
                rec.swap(center, target);
                rec.swap(center, source);
            } else {
                rec.swap(center, source);
            }
            debug_assert_eq!(rec.label_at(center), want);
            rec.swap(center, slots[0]);
        }
    }
    rec.finish()
}

/// Collects swaps, optionally replaying them on a labeling to answer
/// "where is label x now" while a routing is being built.
#[derive(Default)]
struct Recorder {
    swaps: Vec<(VertexId, VertexId)>,
    state: Option<TrueLabeling>,
}

impl Recorder {
    fn tracking(start: TrueLabeling) -> Self {
        Recorder {
            swaps: Vec::new(),
            state: Some(start),
        }
    }

    fn swap(&mut self, u: VertexId, v: VertexId) {
        self.swaps.push((u, v));
        if let Some(s) = self.state.as_mut() {
            s.exchange(u, v);
        }
    }

    fn label_at(&self, v: VertexId) -> LabelId {
        self.state.as_ref().expect("tracking recorder").label_at(v)
    }

    fn vertex_of(&self, l: LabelId) -> VertexId {
        self.state.as_ref().expect("tracking recorder").vertex_of(l)
    }

    /// Reverses the labels along consecutive path vertices: `k(k-1)/2` swaps.
    fn reverse_path(&mut self, path: &[VertexId]) {
        let k = path.len();
        for i in 0..k.saturating_sub(1) {
            for j in 0..k - 1 - i {
                self.swap(path[j], path[j + 1]);
            }
        }
    }

    /// Moves the first `left` labels of `path` past the rest, keeping the
    /// internal order of both blocks: `left · (len - left)` swaps.
    fn exchange_blocks(&mut self, path: &[VertexId], left: usize) {
        let right = path.len() - left;
        for i in (0..left).rev() {
            for j in i..i + right {
                self.swap(path[j], path[j + 1]);
            }
        }
    }

    fn finish(self) -> SwapScript {
        SwapScript::new(self.swaps)
    }
}

/// Lower bound on any script carrying `start` to `goal`: each swap changes the
/// total distance by at most two.
pub fn swap_lower_bound(tree: &Tree, start: &TrueLabeling, goal: &TrueLabeling) -> u64 {
    placement_distance(tree, start.positions(), goal.positions()).div_ceil(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{gen_balanced, gen_path, gen_wings};

    #[test]
    fn reversal_script_lengths() {
        let t = gen_path(2).unwrap();
        assert_eq!(make_reversal_script(&t).unwrap().len(), 1);
        let t = gen_path(4).unwrap();
        let s = make_reversal_script(&t).unwrap();
        assert_eq!(s.len(), 6);
        let mut lab = TrueLabeling::identity(4);
        s.apply(&t, &mut lab).unwrap();
        let want: Vec<_> = (0..4).rev().map(VertexId::new).collect();
        assert_eq!(lab.positions(), &want[..]);
        let exact = TrueLabeling::identity(4);
        assert_eq!(placement_distance(&t, lab.positions(), exact.positions()), 8);
    }

    #[test]
    fn reversal_rejects_non_path() {
        let t = gen_balanced(7, 2).unwrap();
        assert_eq!(make_reversal_script(&t).unwrap_err(), ScriptError::NotAPath);
    }

    #[test]
    fn opt_formula_values() {
        assert_eq!(wings_opt(2, 3), 28);
        assert_eq!(wings_opt(1, 2), 9);
        assert_eq!(wings_distance(2, 3), 18);
    }

    #[test]
    fn wings_scripts_reach_goal() {
        for tails in [TailShape::Leaves, TailShape::Chain] {
            for alpha in 1..=5 {
                for beta in 2..=5 {
                    let w = gen_wings(alpha, beta, tails).unwrap();
                    let goal = wings_goal(&w);
                    for routing in [WingsRouting::BufferRotation, WingsRouting::LeafParking] {
                        let Some(s) = make_wings_script_with(&w, routing) else {
                            continue;
                        };
                        let mut lab = TrueLabeling::identity(w.tree().len());
                        s.apply(w.tree(), &mut lab).unwrap();
                        assert_eq!(lab, goal, "{routing:?} alpha={alpha} beta={beta} {tails}");
                    }
                }
            }
        }
    }

    #[test]
    fn routing_lengths_match_closed_forms() {
        for alpha in 1..=6usize {
            for beta in 2..=6usize {
                let w = gen_wings(alpha, beta, TailShape::Leaves).unwrap();
                let buf = make_wings_script_with(&w, WingsRouting::BufferRotation).unwrap();
                assert_eq!(buf.len(), alpha * (alpha + 1) + (beta - 1) * alpha * alpha);
                let leaf = make_wings_script_with(&w, WingsRouting::LeafParking).unwrap();
                let unit = alpha * (alpha + 1) / 2 + 2 * alpha;
                if beta % 2 == 1 {
                    assert_eq!(leaf.len() as u64, wings_opt(alpha, beta));
                } else {
                    assert!(leaf.len() <= (beta + 1) * unit + alpha / 2, "alpha={alpha} beta={beta}");
                }
            }
        }
    }

    #[test]
    fn script_and_reverse_restore_start() {
        let w = gen_wings(3, 3, TailShape::Leaves).unwrap();
        let s = make_wings_script(&w).script;
        let mut lab = TrueLabeling::identity(w.tree().len());
        s.apply(w.tree(), &mut lab).unwrap();
        s.reversed().apply(w.tree(), &mut lab).unwrap();
        assert_eq!(lab, TrueLabeling::identity(w.tree().len()));
    }

    #[test]
    fn invalid_entries_are_reported() {
        let t = gen_path(3).unwrap();
        let s = SwapScript::new(vec![(VertexId(0), VertexId(1)), (VertexId(0), VertexId(2))]);
        assert_eq!(
            s.validate(&t).unwrap_err(),
            ScriptError::NotAnEdge {
                index: 1,
                u: VertexId(0),
                v: VertexId(2)
            }
        );
    }
}
