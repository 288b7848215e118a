//! Plain-text file formats: edge lists, wings roles, labelings, scripts and
//! per-iteration CSV records. Parsers skip blank lines and `#` comments.

use std::fmt::Write as _;

use thiserror::Error;

use crate::engine::IterationRecord;
use crate::generate::{WingsRole, WingsTree};
use crate::labeling::{LabelingError, TrueLabeling};
use crate::script::SwapScript;
use crate::tree::{Tree, TreeError, VertexId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing header line")]
    MissingHeader,
    #[error("header declares {declared} entries but {found} were given")]
    CountMismatch { declared: usize, found: usize },
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Labeling(#[from] LabelingError),
}

/// Column header of the per-iteration CSV.
pub const RECORDS_HEADER: &str = "j,D_j,A_j,dt_j,evolver_steps,max_load,step_index";

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_ints<const K: usize>(line: usize, text: &str) -> Result<[usize; K], FormatError> {
    let parts: Vec<&str> = text.split_whitespace().collect();
    if parts.len() != K {
        return Err(FormatError::Parse {
            line,
            message: format!("expected {K} integers, found `{text}`"),
        });
    }
    let mut out = [0usize; K];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p.parse().map_err(|_| FormatError::Parse {
            line,
            message: format!("`{p}` is not a non-negative integer"),
        })?;
    }
    Ok(out)
}

/// Header `n` followed by one `u v` pair per line.
fn parse_counted_pairs(text: &str) -> Result<(usize, Vec<(usize, usize)>), FormatError> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or(FormatError::MissingHeader)?;
    let [count] = parse_ints::<1>(hl, header)?;
    let pairs = lines
        .map(|(l, s)| parse_ints::<2>(l, s).map(|[u, v]| (u, v)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((count, pairs))
}

pub fn write_tree(tree: &Tree) -> String {
    let mut s = format!("{}\n", tree.len());
    for &(u, v) in tree.edges() {
        writeln!(s, "{u} {v}").unwrap();
    }
    s
}

pub fn parse_tree(text: &str) -> Result<Tree, FormatError> {
    let (n, edges) = parse_counted_pairs(text)?;
    Ok(Tree::from_edges(n, &edges)?)
}

/// `vertex role index` per line. The index is 0 for the center,
/// `wing·α + depth - 1` for wing vertices and `position - 1` for tails.
pub fn write_roles(wings: &WingsTree) -> String {
    let mut s = String::new();
    for (v, role) in wings.roles() {
        let index = match role {
            WingsRole::Center => 0,
            WingsRole::Wing { wing, depth } => wing * wings.alpha() + depth - 1,
            WingsRole::Tail { index } => index - 1,
        };
        writeln!(s, "{v} {} {index}", role.name()).unwrap();
    }
    s
}

/// `label vertex` per line.
pub fn write_labeling(positions: &[VertexId]) -> String {
    let mut s = String::new();
    for (l, v) in positions.iter().enumerate() {
        writeln!(s, "{l} {v}").unwrap();
    }
    s
}

/// Reads `label vertex` lines into a position vector of length `n`;
/// every label must appear exactly once.
pub fn parse_positions(text: &str, n: usize) -> Result<Vec<VertexId>, FormatError> {
    let mut positions: Vec<Option<VertexId>> = vec![None; n];
    let mut found = 0;
    for (line, s) in content_lines(text) {
        let [l, v] = parse_ints::<2>(line, s)?;
        let slot = positions.get_mut(l).ok_or_else(|| FormatError::Parse {
            line,
            message: format!("label {l} out of range for {n} labels"),
        })?;
        if slot.is_some() {
            return Err(FormatError::Parse {
                line,
                message: format!("label {l} listed twice"),
            });
        }
        *slot = Some(VertexId::new(v));
        found += 1;
    }
    if found != n {
        return Err(FormatError::CountMismatch { declared: n, found });
    }
    Ok(positions.into_iter().map(|p| p.expect("all filled")).collect())
}

/// A true labeling must be a permutation of the vertices.
pub fn parse_true_labeling(text: &str, n: usize) -> Result<TrueLabeling, FormatError> {
    Ok(TrueLabeling::from_positions(parse_positions(text, n)?)?)
}

pub fn write_script(script: &SwapScript) -> String {
    let mut s = format!("{}\n", script.len());
    for &(u, v) in script.swaps() {
        writeln!(s, "{u} {v}").unwrap();
    }
    s
}

pub fn parse_script(text: &str) -> Result<SwapScript, FormatError> {
    let (m, pairs) = parse_counted_pairs(text)?;
    if m != pairs.len() {
        return Err(FormatError::CountMismatch {
            declared: m,
            found: pairs.len(),
        });
    }
    Ok(SwapScript::new(
        pairs.into_iter().map(|(u, v)| (VertexId::new(u), VertexId::new(v))).collect(),
    ))
}

/// Per-iteration CSV, preceded by a `# config: ...` echo line.
pub fn records_csv(config_echo: &str, records: &[IterationRecord]) -> String {
    let mut s = format!("# config: {config_echo}\n{RECORDS_HEADER}\n");
    for r in records {
        writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.j, r.d_start, r.moves, r.steps, r.evolver_steps, r.max_load, r.step_index
        )
        .unwrap();
    }
    s
}
