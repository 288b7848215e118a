//! Fixed tree topology with binary-lifting ancestor tables.
//!
//! The tree is rooted at vertex 0. Every query (distance, lowest common
//! ancestor, first hop toward a target) runs in `O(log n)` against the
//! precomputed depth and doubling tables.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense vertex identifier in `[0, n)`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub const fn new(index: usize) -> Self {
        VertexId(index as u32)
    }

    #[inline]
    pub const fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Dense label identifier in `[0, n)`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelId(pub u32);

impl LabelId {
    #[inline]
    pub const fn new(index: usize) -> Self {
        LabelId(index as u32)
    }

    #[inline]
    pub const fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for LabelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("a tree needs at least one vertex")]
    Empty,
    #[error("vertex count {0} exceeds the supported maximum")]
    TooLarge(usize),
    #[error("edge ({u}, {v}) references a vertex outside [0, {n})")]
    VertexOutOfRange { u: usize, v: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("edge ({0}, {1}) closes a cycle")]
    Cycle(usize, usize),
    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("invalid generator parameters: {0}")]
    InvalidParameters(String),
}

/// Immutable undirected tree rooted at vertex 0.
#[derive(Clone, Debug)]
pub struct Tree {
    adjacency: Vec<Vec<VertexId>>,
    edges: Vec<(VertexId, VertexId)>,
    parent: Vec<VertexId>,
    depth: Vec<u32>,
    // ancestors[k][v] is the 2^k-th ancestor of v, saturating at the root.
    ancestors: Vec<Vec<VertexId>>,
    // Preorder entry index and subtree end (exclusive) per vertex.
    enter: Vec<u32>,
    exit: Vec<u32>,
    max_degree: usize,
}

impl Tree {
    /// Builds a tree on `n` vertices from an undirected edge list.
    ///
    /// Rejects out-of-range endpoints, self-loops, duplicate edges, cycles and
    /// disconnected input. Edge order is preserved by [`Tree::edges`].
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Tree, TreeError> {
        if n == 0 {
            return Err(TreeError::Empty);
        }
        if n > u32::MAX as usize / 2 {
            return Err(TreeError::TooLarge(n));
        }

        let mut seen = HashSet::with_capacity(edges.len());
        let mut dsu = DisjointSets::new(n);
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(TreeError::VertexOutOfRange { u, v, n });
            }
            if u == v {
                return Err(TreeError::SelfLoop(u));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(TreeError::DuplicateEdge(u, v));
            }
            if !dsu.union(u, v) {
                return Err(TreeError::Cycle(u, v));
            }
            adjacency[u].push(VertexId::new(v));
            adjacency[v].push(VertexId::new(u));
        }
        if dsu.components > 1 {
            return Err(TreeError::Disconnected {
                components: dsu.components,
            });
        }

        let mut parent = vec![VertexId(0); n];
        let mut depth = vec![0u32; n];
        let mut visited = vec![false; n];
        let mut queue = VecDeque::with_capacity(n);
        visited[0] = true;
        queue.push_back(0usize);
        while let Some(u) = queue.pop_front() {
            for &w in &adjacency[u] {
                let w = w.index();
                if !visited[w] {
                    visited[w] = true;
                    parent[w] = VertexId::new(u);
                    depth[w] = depth[u] + 1;
                    queue.push_back(w);
                }
            }
        }

        let levels = (usize::BITS - n.leading_zeros()).max(1) as usize;
        let mut ancestors = Vec::with_capacity(levels);
        ancestors.push(parent.clone());
        for k in 1..levels {
            let prev = &ancestors[k - 1];
            let next: Vec<VertexId> = (0..n).map(|v| prev[prev[v].index()]).collect();
            ancestors.push(next);
        }

        let mut enter = vec![0u32; n];
        let mut exit = vec![0u32; n];
        let mut clock = 0u32;
        let mut stack = vec![(0usize, 0usize)];
        enter[0] = 0;
        clock += 1;
        while let Some(&mut (u, ref mut next)) = stack.last_mut() {
            if let Some(&w) = adjacency[u].get(*next) {
                *next += 1;
                let w = w.index();
                if w != 0 && parent[w].index() == u {
                    enter[w] = clock;
                    clock += 1;
                    stack.push((w, 0));
                }
            } else {
                exit[u] = clock;
                stack.pop();
            }
        }

        let max_degree = adjacency.iter().map(Vec::len).max().unwrap_or(0);
        let edges = edges
            .iter()
            .map(|&(u, v)| (VertexId::new(u), VertexId::new(v)))
            .collect();

        Ok(Tree {
            adjacency,
            edges,
            parent,
            depth,
            ancestors,
            enter,
            exit,
            max_degree,
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    #[inline]
    pub fn root(&self) -> VertexId {
        VertexId(0)
    }

    /// Edges in construction order.
    #[inline]
    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adjacency[v.index()]
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v.index()].len()
    }

    #[inline]
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Parent of `v`; `None` for the root.
    #[inline]
    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        if v.index() == 0 {
            None
        } else {
            Some(self.parent[v.index()])
        }
    }

    #[inline]
    pub fn depth(&self, v: VertexId) -> u32 {
        self.depth[v.index()]
    }

    #[inline]
    pub fn contains(&self, v: VertexId) -> bool {
        v.index() < self.len()
    }

    #[inline]
    pub fn is_edge(&self, u: VertexId, v: VertexId) -> bool {
        u != v
            && self.contains(u)
            && self.contains(v)
            && (self.parent[u.index()] == v && u.index() != 0
                || self.parent[v.index()] == u && v.index() != 0)
    }

    /// True when `a` lies on the path from `b` to the root (including `a == b`).
    #[inline]
    pub fn is_ancestor(&self, a: VertexId, b: VertexId) -> bool {
        let (ea, eb) = (self.enter[a.index()], self.enter[b.index()]);
        ea <= eb && eb < self.exit[a.index()]
    }

    /// For adjacent `u`, `v`: whether `x` is on `v`'s side of the edge.
    #[inline]
    pub fn on_side_of(&self, u: VertexId, v: VertexId, x: VertexId) -> bool {
        if v.index() != 0 && self.parent[v.index()] == u {
            self.is_ancestor(v, x)
        } else {
            !self.is_ancestor(u, x)
        }
    }

    /// Ancestor of `v` at depth `target_depth` (which must not exceed `depth(v)`).
    pub fn level_ancestor(&self, v: VertexId, target_depth: u32) -> VertexId {
        let d = self.depth[v.index()];
        debug_assert!(target_depth <= d);
        let mut climb = d - target_depth;
        let mut cur = v;
        let mut k = 0;
        while climb > 0 {
            if climb & 1 == 1 {
                cur = self.ancestors[k][cur.index()];
            }
            climb >>= 1;
            k += 1;
        }
        cur
    }

    pub fn lca(&self, u: VertexId, v: VertexId) -> VertexId {
        let (du, dv) = (self.depth(u), self.depth(v));
        let (mut a, mut b) = if du >= dv {
            (self.level_ancestor(u, dv), v)
        } else {
            (u, self.level_ancestor(v, du))
        };
        if a == b {
            return a;
        }
        for level in self.ancestors.iter().rev() {
            let (pa, pb) = (level[a.index()], level[b.index()]);
            if pa != pb {
                a = pa;
                b = pb;
            }
        }
        self.parent[a.index()]
    }

    /// Number of edges on the path between `u` and `v`.
    #[inline]
    pub fn distance(&self, u: VertexId, v: VertexId) -> u32 {
        if u == v {
            return 0;
        }
        let w = self.lca(u, v);
        self.depth(u) + self.depth(v) - 2 * self.depth(w)
    }

    /// First vertex after `from` on the path toward `to`, or `None` when they coincide.
    ///
    /// If `to` lies below `from`, the hop is the ancestor of `to` one level under
    /// `from`; otherwise the path leaves through the parent.
    pub fn first_hop(&self, from: VertexId, to: VertexId) -> Option<VertexId> {
        if from == to {
            return None;
        }
        if self.is_ancestor(from, to) {
            Some(self.level_ancestor(to, self.depth(from) + 1))
        } else {
            Some(self.parent[from.index()])
        }
    }

    /// True when every vertex has degree at most two.
    pub fn is_path(&self) -> bool {
        self.max_degree <= 2
    }

    /// Vertices of a path tree in order from one endpoint to the other.
    pub fn path_order(&self) -> Option<Vec<VertexId>> {
        if !self.is_path() {
            return None;
        }
        if self.len() == 1 {
            return Some(vec![VertexId(0)]);
        }
        let start = (0..self.len()).find(|&v| self.adjacency[v].len() == 1)?;
        let mut order = Vec::with_capacity(self.len());
        let mut prev = usize::MAX;
        let mut cur = start;
        loop {
            order.push(VertexId::new(cur));
            let next = self.adjacency[cur]
                .iter()
                .map(|w| w.index())
                .find(|&w| w != prev);
            match next {
                Some(w) => {
                    prev = cur;
                    cur = w;
                }
                None => break,
            }
        }
        Some(order)
    }
}

struct DisjointSets {
    parent: Vec<usize>,
    rank: Vec<u8>,
    components: usize,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
            rank: vec![0; n],
            components: n,
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        self.components -= 1;
        true
    }
}
