use super::sces::generate_sces;
use crate::{MergeTree, SubtreeRef};

/// A collapse candidate flattened for the engine: leaves are stored as
/// pair ids of their root edges `(x, parent(x))`.
#[derive(Debug, Clone)]
pub(crate) struct Candidate {
    pub cost: f64,
    pub leaves: Vec<usize>,
    pub leaf_weights: Vec<f64>,
    pub leaf_sum: f64,
    pub is_empty: bool,
}

/// Per-tree lookup tables shared by every tuple of the dynamic program.
///
/// Subtree references `(v, a)` with `a` a proper ancestor of `v` are numbered
/// densely: `offset[v] + k - 1` where `k = depth(v) - depth(a)`.
#[derive(Debug)]
pub(crate) struct TreeIndex<'a> {
    pub tree: &'a MergeTree,
    pub depth: Vec<usize>,
    /// Weight strictly below each node.
    pub below: Vec<f64>,
    pub offset: Vec<usize>,
    /// Path label per pair id.
    pub path: Vec<f64>,
    /// Non-root nodes, children first.
    pub postorder: Vec<usize>,
    /// Collapse candidates per inner node (empty vector for leaves).
    pub candidates: Vec<Vec<Candidate>>,
    weights: Vec<f64>,
    pairs: usize,
}

impl<'a> TreeIndex<'a> {
    pub fn new(tree: &'a MergeTree, lookahead: usize, leaf_drop: bool) -> Self {
        let n = tree.len();
        let pre = tree.preorder();
        let mut depth = vec![0usize; n];
        for &v in &pre {
            if let Some(p) = tree.parent(v) {
                depth[v] = depth[p] + 1;
            }
        }
        let postorder: Vec<usize> = tree
            .postorder()
            .into_iter()
            .filter(|&v| v != tree.root())
            .collect();
        let mut below = vec![0.0; n];
        for &v in &postorder {
            below[v] = tree.children(v).iter().map(|&c| below[c] + tree.length(c)).sum();
        }
        let mut offset = vec![0usize; n];
        let mut pairs = 0;
        for v in 0..n {
            offset[v] = pairs;
            pairs += depth[v];
        }
        let mut path = vec![0.0; pairs];
        for v in 0..n {
            let mut acc = 0.0;
            let mut u = v;
            for k in 1..=depth[v] {
                acc += tree.length(u);
                u = tree.parent(u).unwrap();
                path[offset[v] + k - 1] = acc;
            }
        }
        let mut index = TreeIndex {
            tree,
            depth,
            below,
            offset,
            path,
            postorder,
            candidates: Vec::new(),
            weights: Vec::new(),
            pairs,
        };
        index.weights = (0..pairs)
            .map(|id| index.below[index.node_of(id)] + index.path[id])
            .collect();
        index.candidates = (0..n)
            .map(|v| {
                if v == tree.root() || tree.is_leaf(v) {
                    return Vec::new();
                }
                generate_sces(tree, v, lookahead, leaf_drop)
                    .into_iter()
                    .map(|c| {
                        let leaves: Vec<usize> = c.leaf_edges.iter().map(|&x| index.offset[x]).collect();
                        let leaf_weights: Vec<f64> = leaves.iter().map(|&id| index.weight(id)).collect();
                        Candidate {
                            cost: c.cost,
                            leaf_sum: leaf_weights.iter().sum(),
                            leaves,
                            leaf_weights,
                            is_empty: c.edges.is_empty(),
                        }
                    })
                    .collect()
            })
            .collect();
        index
    }

    pub fn len(&self) -> usize {
        self.tree.len()
    }

    pub fn pair_count(&self) -> usize {
        self.pairs
    }

    #[inline]
    pub fn pair_id(&self, v: usize, k: usize) -> usize {
        debug_assert!(k >= 1 && k <= self.depth[v]);
        self.offset[v] + k - 1
    }

    /// Total weight of the subtree reference with the given pair id.
    #[inline]
    pub fn weight(&self, id: usize) -> f64 {
        self.weights[id]
    }

    /// Weight of the subtree rooted at edge `(v, parent(v))`.
    #[inline]
    pub fn edge_weight(&self, v: usize) -> f64 {
        self.below[v] + self.tree.length(v)
    }

    fn node_of(&self, id: usize) -> usize {
        // offsets are nondecreasing; the owning node is the last with offset <= id
        // among nodes with positive depth
        match self.offset.binary_search(&id) {
            Ok(mut i) => {
                while self.depth[i] == 0 {
                    i += 1;
                }
                i
            }
            Err(i) => i - 1,
        }
    }

    pub fn ref_weights(&self) -> Vec<f64> {
        self.weights.clone()
    }

    pub fn ref_id(&self, r: SubtreeRef) -> Option<usize> {
        let (c, a) = (r.child?, r.ancestor?);
        if c >= self.len() || a >= self.len() || !self.tree.is_ancestor(a, c) {
            return None;
        }
        Some(self.pair_id(c, self.depth[c] - self.depth[a]))
    }
}
