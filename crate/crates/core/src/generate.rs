//! Tree families: paths, complete k-ary trees, random bounded-degree trees and
//! the wings/tails lower-bound construction.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::tree::{Tree, TreeError, VertexId};

/// Path `0 - 1 - ... - n-1`.
pub fn gen_path(n: usize) -> Result<Tree, TreeError> {
    if n < 2 {
        return Err(TreeError::InvalidParameters(format!("path needs n >= 2, got {n}")));
    }
    let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
    Tree::from_edges(n, &edges)
}

/// Complete `arity`-ary tree in breadth-first numbering: the parent of `v` is `(v - 1) / arity`.
pub fn gen_balanced(n: usize, arity: usize) -> Result<Tree, TreeError> {
    if n < 2 {
        return Err(TreeError::InvalidParameters(format!("balanced tree needs n >= 2, got {n}")));
    }
    if arity < 1 {
        return Err(TreeError::InvalidParameters("arity must be >= 1".into()));
    }
    let edges: Vec<_> = (1..n).map(|v| ((v - 1) / arity, v)).collect();
    Tree::from_edges(n, &edges)
}

/// Random tree with maximum degree at most `k`.
///
/// Vertices are attached in order `1..n`, each to a uniformly chosen earlier
/// vertex whose degree is still below `k`.
pub fn gen_random_bounded(n: usize, k: usize, seed: u64) -> Result<Tree, TreeError> {
    if n < 2 {
        return Err(TreeError::InvalidParameters(format!("random tree needs n >= 2, got {n}")));
    }
    if k < 2 && !(k == 1 && n == 2) {
        return Err(TreeError::InvalidParameters(format!(
            "no tree on {n} vertices has maximum degree {k}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut degree = vec![0usize; n];
    // Vertices that can still accept a child; swap_remove keeps picks O(1).
    let mut open = vec![0usize];
    let mut slot = vec![usize::MAX; n];
    slot[0] = 0;
    let mut edges = Vec::with_capacity(n - 1);
    for v in 1..n {
        let pick = rng.gen_range(0..open.len());
        let u = open[pick];
        edges.push((u, v));
        for w in [u, v] {
            degree[w] += 1;
            if degree[w] >= k && slot[w] != usize::MAX {
                let i = slot[w];
                open.swap_remove(i);
                if i < open.len() {
                    slot[open[i]] = i;
                }
                slot[w] = usize::MAX;
            }
        }
        if degree[v] < k {
            slot[v] = open.len();
            open.push(v);
        }
    }
    Tree::from_edges(n, &edges)
}

/// How the α tail vertices hang off the center of a wings tree.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailShape {
    /// α separate leaves adjacent to the center.
    #[default]
    Leaves,
    /// A single path of α vertices starting at the center.
    Chain,
}

impl fmt::Display for TailShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TailShape::Leaves => "leaves",
            TailShape::Chain => "chain",
        })
    }
}

impl FromStr for TailShape {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "leaves" => Ok(TailShape::Leaves),
            "chain" => Ok(TailShape::Chain),
            other => Err(format!("unknown tail shape `{other}` (expected leaves or chain)")),
        }
    }
}

/// Role of a vertex in a wings tree.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum WingsRole {
    Center,
    /// Depth is 1-based distance from the center.
    Wing { wing: usize, depth: usize },
    /// 1-based tail position.
    Tail { index: usize },
}

impl WingsRole {
    pub fn name(&self) -> &'static str {
        match self {
            WingsRole::Center => "center",
            WingsRole::Wing { .. } => "wing",
            WingsRole::Tail { .. } => "tail",
        }
    }
}

/// Center, β wings (paths of α vertices) and α tail vertices.
///
/// Vertex numbering: the center is 0, wing `i` at depth `p` is
/// `1 + i·α + (p - 1)`, tail `q` is `1 + β·α + (q - 1)`.
#[derive(Clone, Debug)]
pub struct WingsTree {
    tree: Tree,
    alpha: usize,
    beta: usize,
    tails: TailShape,
}

impl WingsTree {
    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn into_tree(self) -> Tree {
        self.tree
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn beta(&self) -> usize {
        self.beta
    }

    pub fn tails(&self) -> TailShape {
        self.tails
    }

    pub fn center(&self) -> VertexId {
        VertexId(0)
    }

    /// Vertex of wing `wing` (0-based) at `depth` (1-based).
    pub fn wing_vertex(&self, wing: usize, depth: usize) -> VertexId {
        debug_assert!(wing < self.beta && (1..=self.alpha).contains(&depth));
        VertexId::new(1 + wing * self.alpha + depth - 1)
    }

    /// Tail vertex `index` (1-based).
    pub fn tail_vertex(&self, index: usize) -> VertexId {
        debug_assert!((1..=self.alpha).contains(&index));
        VertexId::new(1 + self.beta * self.alpha + index - 1)
    }

    pub fn role(&self, v: VertexId) -> WingsRole {
        let i = v.index();
        let wing_end = 1 + self.beta * self.alpha;
        if i == 0 {
            WingsRole::Center
        } else if i < wing_end {
            WingsRole::Wing {
                wing: (i - 1) / self.alpha,
                depth: (i - 1) % self.alpha + 1,
            }
        } else {
            WingsRole::Tail { index: i - wing_end + 1 }
        }
    }

    pub fn roles(&self) -> impl Iterator<Item = (VertexId, WingsRole)> + '_ {
        (0..self.tree.len()).map(|i| {
            let v = VertexId::new(i);
            (v, self.role(v))
        })
    }
}

/// Vertex count of the wings construction: `αβ + α + 1`.
pub fn wings_vertex_count(alpha: usize, beta: usize) -> usize {
    alpha * beta + alpha + 1
}

pub fn gen_wings(alpha: usize, beta: usize, tails: TailShape) -> Result<WingsTree, TreeError> {
    if alpha < 1 {
        return Err(TreeError::InvalidParameters(format!("wings need alpha >= 1, got {alpha}")));
    }
    if beta < 2 {
        return Err(TreeError::InvalidParameters(format!(
            "wings need beta >= 2 for a non-trivial cyclic shift, got {beta}"
        )));
    }
    let n = wings_vertex_count(alpha, beta);
    let mut edges = Vec::with_capacity(n - 1);
    for wing in 0..beta {
        let mut prev = 0;
        for depth in 1..=alpha {
            let v = 1 + wing * alpha + depth - 1;
            edges.push((prev, v));
            prev = v;
        }
    }
    let tail_start = 1 + beta * alpha;
    for q in 0..alpha {
        let v = tail_start + q;
        let anchor = match tails {
            TailShape::Leaves => 0,
            TailShape::Chain if q == 0 => 0,
            TailShape::Chain => v - 1,
        };
        edges.push((anchor, v));
    }
    Ok(WingsTree {
        tree: Tree::from_edges(n, &edges)?,
        alpha,
        beta,
        tails,
    })
}
