use super::{compact, MergeTree};
use crate::{Error, Result};

/// A simplification threshold, either absolute or relative to the scalar
/// range of the tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    Absolute(f64),
    Relative(f64),
}

impl Threshold {
    fn resolve(self, tree: &MergeTree) -> Result<f64> {
        match self {
            Threshold::Absolute(t) if t >= 0.0 => Ok(t),
            Threshold::Relative(f) if f >= 0.0 => {
                if !tree.has_scalars() {
                    return Err(Error::InvalidArgument(
                        "relative threshold needs node scalars".into(),
                    ));
                }
                let (lo, hi) = tree
                    .nodes()
                    .iter()
                    .filter_map(|n| n.scalar)
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
                        (lo.min(s), hi.max(s))
                    });
                Ok(f * (hi - lo))
            }
            _ => Err(Error::InvalidArgument("threshold must be nonnegative".into())),
        }
    }
}

/// Removes low-persistence features. The leaf with the shortest leaf edge is
/// cut while that length is below the threshold; ties go to the lower node
/// index. Removing a leaf may prune its saddle, which lengthens the sibling
/// branch. The last leaf always survives.
pub fn simplify_persistence(tree: &MergeTree, threshold: Threshold) -> Result<MergeTree> {
    tree.ensure_valid()?;
    let limit = threshold.resolve(tree)?;
    let mut t = tree.clone();
    loop {
        let leaves = t.leaves();
        if leaves.len() <= 1 {
            return Ok(t);
        }
        let weakest = leaves
            .iter()
            .copied()
            .min_by(|&a, &b| t.length(a).total_cmp(&t.length(b)).then(a.cmp(&b)))
            .unwrap();
        if t.length(weakest) >= limit {
            return Ok(t);
        }
        t = t.contract_edge(weakest)?;
    }
}

/// Merges saddles joined by short inner edges: every edge between two inner
/// nodes (excluding the root edge) shorter than `eps` is contracted, deepest
/// first, ties by node index. Children keep their edge lengths; if the tree
/// has scalars they are re-derived downward from the root scalar.
pub fn epsilon_preprocess(tree: &MergeTree, eps: Threshold) -> Result<MergeTree> {
    let normalized = tree.normalize()?;
    normalized.ensure_valid()?;
    let limit = eps.resolve(&normalized)?;
    if limit <= 0.0 {
        return Ok(normalized);
    }
    let mut work = normalized.nodes().to_vec();
    let root = normalized.root();
    let mut depth = vec![0usize; work.len()];
    for v in normalized.preorder() {
        if let Some(p) = work[v].parent {
            depth[v] = depth[p] + 1;
        }
    }
    let top = normalized.top();
    let mut targets: Vec<usize> = (0..work.len())
        .filter(|&v| {
            v != root
                && Some(v) != top
                && !work[v].children.is_empty()
                && work[v].length < limit
        })
        .collect();
    targets.sort_by(|&a, &b| depth[b].cmp(&depth[a]).then(a.cmp(&b)));

    let mut removed = vec![false; work.len()];
    for v in targets {
        let p = work[v].parent.expect("non-root");
        let moved = std::mem::take(&mut work[v].children);
        for &c in &moved {
            work[c].parent = Some(p);
        }
        work[p].children.retain(|&x| x != v);
        work[p].children.extend(moved);
        removed[v] = true;
    }
    let mut out = compact(&work, root, &removed);
    if out.has_scalars() {
        for v in out.preorder() {
            if let Some(p) = out.nodes[v].parent {
                out.nodes[v].scalar = Some(out.nodes[p].scalar.unwrap() + out.nodes[v].length);
            }
        }
    }
    out.normalize()
}
