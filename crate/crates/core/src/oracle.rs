//! Directional oracle: where is a label relative to a probed vertex?

use serde::{Deserialize, Serialize};

use crate::labeling::TrueLabeling;
use crate::tree::{LabelId, Tree, VertexId};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleAnswer {
    /// The label truly resides at the probed vertex.
    AtTarget,
    /// First edge `(u, v)` on the path from the probed vertex `u` to the label.
    NextEdge(VertexId, VertexId),
}

pub fn oracle_query(tree: &Tree, truth: &TrueLabeling, label: LabelId, u: VertexId) -> OracleAnswer {
    match tree.first_hop(u, truth.vertex_of(label)) {
        None => OracleAnswer::AtTarget,
        Some(v) => OracleAnswer::NextEdge(u, v),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_along_the_path() {
        // u=0 -- v=1 -- w=2, with a side branch at 0.
        let t = Tree::from_edges(4, &[(0, 1), (1, 2), (0, 3)]).unwrap();
        let truth = TrueLabeling::identity(4);
        let x = LabelId(2);
        assert_eq!(
            oracle_query(&t, &truth, x, VertexId(0)),
            OracleAnswer::NextEdge(VertexId(0), VertexId(1))
        );
        assert_eq!(
            oracle_query(&t, &truth, x, VertexId(3)),
            OracleAnswer::NextEdge(VertexId(3), VertexId(0))
        );
        assert_eq!(oracle_query(&t, &truth, x, VertexId(2)), OracleAnswer::AtTarget);
    }
}
