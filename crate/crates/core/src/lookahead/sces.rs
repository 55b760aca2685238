//! Enumeration of collapsible edge sets below a node.
//!
//! A candidate is a connected set of edges hanging from an anchor node `v`
//! whose lower endpoints lie at most `h` levels below `v`. Contracting the set
//! lifts the subtrees just outside it (the candidate's leaves) up to `v`.

use crate::MergeTree;

/// An edge is named by its lower endpoint; edge `x` is `(x, parent(x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct CollapseCandidate {
    pub anchor: usize,
    /// Contracted edges, in discovery order.
    pub edges: Vec<usize>,
    /// Total length of the contracted edges.
    pub cost: f64,
    /// Root edges of the subtrees lifted to the anchor by the contraction,
    /// in left-to-right order.
    pub leaf_edges: Vec<usize>,
}

impl CollapseCandidate {
    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Enumerates every connected edge set within look-ahead `h` of `v`,
/// including the empty set (emitted last). The enumeration is a depth-first
/// include/exclude walk over the edges below `v` in left-to-right order,
/// trying "include" first.
///
/// With `leaf_drop`, edges to leaves of the tree are never contracted; the
/// matching step covers their deletion at the same cost.
pub fn generate_sces(tree: &MergeTree, v: usize, h: usize, leaf_drop: bool) -> Vec<CollapseCandidate> {
    struct Item {
        cost: f64,
        edges: Vec<usize>,
        leaves: Vec<usize>,
        next: Option<usize>,
    }

    let depth_below = |x: usize| {
        let mut d = 0;
        let mut u = x;
        while u != v {
            d += 1;
            u = tree.parent(u).expect("x lies below v");
        }
        d
    };
    // Next edge after finishing the subtree of `x`: the right sibling of the
    // lowest node on the path x..v that has one.
    let advance = |x: usize| -> Option<usize> {
        let mut u = x;
        while u != v {
            let p = tree.parent(u)?;
            let sibs = tree.children(p);
            let pos = sibs.iter().position(|&s| s == u).unwrap();
            if pos + 1 < sibs.len() {
                return Some(sibs[pos + 1]);
            }
            u = p;
        }
        None
    };

    let mut out = Vec::new();
    let mut stack = vec![Item {
        cost: 0.0,
        edges: Vec::new(),
        leaves: Vec::new(),
        next: tree.children(v).first().copied(),
    }];
    while let Some(item) = stack.pop() {
        let Some(x) = item.next else {
            out.push(CollapseCandidate {
                anchor: v,
                edges: item.edges,
                cost: item.cost,
                leaf_edges: item.leaves,
            });
            continue;
        };
        let contractible =
            depth_below(x) <= h && !(leaf_drop && tree.is_leaf(x));
        let mut leaves = item.leaves.clone();
        leaves.push(x);
        let keep = Item {
            cost: item.cost,
            edges: item.edges.clone(),
            leaves,
            next: advance(x),
        };
        stack.push(keep);
        if contractible {
            let mut edges = item.edges;
            edges.push(x);
            stack.push(Item {
                cost: item.cost + tree.length(x),
                edges,
                leaves: item.leaves,
                next: tree.children(x).first().copied().or_else(|| advance(x)),
            });
        }
    }
    out
}
