//! Merge tree data model.
//!
//! A [`MergeTree`] is a rooted, unordered tree with positive edge lengths.
//! Every non-root node stores the length of the edge to its parent; node
//! scalars are optional metadata retained when a tree is built from a field.
//! Children are kept in index order, which gives the candidate enumeration in
//! [`crate::lookahead`] a stable left-to-right sibling order.

mod build;
mod io;
mod simplify;

pub use build::{build_split_tree, Connectivity, ScalarGrid};
pub use io::{parse_grid, parse_tree, serialize_tree};
pub use simplify::{epsilon_preprocess, simplify_persistence, Threshold};

use crate::{Error, Result, TOLERANCE};

#[derive(Debug, Clone, PartialEq)]
pub struct NodeRecord {
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Length of the edge to the parent. Zero for the root.
    pub length: f64,
    pub scalar: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergeTree {
    nodes: Vec<NodeRecord>,
    root: usize,
}

/// Names the subtree `T[child...ancestor]`: the subtree rooted at `child`
/// extended by the path up to `ancestor`. Both fields `None` is the empty tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SubtreeRef {
    pub child: Option<usize>,
    pub ancestor: Option<usize>,
}

impl SubtreeRef {
    pub const EMPTY: SubtreeRef = SubtreeRef {
        child: None,
        ancestor: None,
    };

    pub fn new(child: usize, ancestor: usize) -> Self {
        SubtreeRef {
            child: Some(child),
            ancestor: Some(ancestor),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.child.is_none() && self.ancestor.is_none()
    }
}

impl MergeTree {
    /// Builds a tree from parent pointers. Checks structure only (one root,
    /// no cycles, every node reachable); merge tree invariants are reported
    /// by [`MergeTree::validate`].
    pub fn from_parents(
        parents: &[Option<usize>],
        lengths: &[f64],
        scalars: Option<&[f64]>,
    ) -> Result<Self> {
        let n = parents.len();
        if n == 0 {
            return Err(Error::Structure("tree has no nodes".into()));
        }
        if lengths.len() != n || scalars.is_some_and(|s| s.len() != n) {
            return Err(Error::Structure(
                "parents, lengths and scalars differ in size".into(),
            ));
        }
        let mut root = None;
        let mut nodes: Vec<NodeRecord> = (0..n)
            .map(|i| NodeRecord {
                parent: parents[i],
                children: Vec::new(),
                length: if parents[i].is_some() { lengths[i] } else { 0.0 },
                scalar: scalars.map(|s| s[i]),
            })
            .collect();
        for (i, p) in parents.iter().enumerate() {
            match p {
                None if root.is_some() => {
                    return Err(Error::Structure(format!(
                        "nodes {} and {} both lack a parent",
                        root.unwrap(),
                        i
                    )))
                }
                None => root = Some(i),
                Some(p) if *p >= n => {
                    return Err(Error::Structure(format!(
                        "node {i} has out-of-range parent {p}"
                    )))
                }
                Some(p) if *p == i => {
                    return Err(Error::Structure(format!("node {i} is its own parent")))
                }
                Some(p) => nodes[*p].children.push(i),
            }
        }
        let root = root.ok_or_else(|| Error::Structure("no root node (cycle)".into()))?;
        let tree = MergeTree { nodes, root };
        let reached = tree.preorder().len();
        if reached != n {
            return Err(Error::Structure(format!(
                "{} of {} nodes unreachable from the root (cycle or disconnected)",
                n - reached,
                n
            )));
        }
        Ok(tree)
    }

    /// The tree with a single node and no edges. Acts as the empty tree in
    /// distance computations.
    pub fn empty() -> Self {
        MergeTree {
            nodes: vec![NodeRecord {
                parent: None,
                children: Vec::new(),
                length: 0.0,
                scalar: None,
            }],
            root: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// True for the single-node tree, which has no edges.
    pub fn is_empty(&self) -> bool {
        self.nodes.len() == 1
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn nodes(&self) -> &[NodeRecord] {
        &self.nodes
    }

    pub fn node(&self, v: usize) -> &NodeRecord {
        &self.nodes[v]
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.nodes[v].parent
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.nodes[v].children
    }

    pub fn length(&self, v: usize) -> f64 {
        self.nodes[v].length
    }

    pub fn scalar(&self, v: usize) -> Option<f64> {
        self.nodes[v].scalar
    }

    pub fn has_scalars(&self) -> bool {
        self.nodes.iter().all(|n| n.scalar.is_some())
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.nodes[v].children.is_empty()
    }

    /// The unique child of the root, if any.
    pub fn top(&self) -> Option<usize> {
        self.nodes[self.root].children.first().copied()
    }

    /// Number of edges between `v` and the root.
    pub fn depth(&self, v: usize) -> usize {
        let mut d = 0;
        let mut u = v;
        while let Some(p) = self.nodes[u].parent {
            d += 1;
            u = p;
        }
        d
    }

    /// Maximum node depth.
    pub fn max_depth(&self) -> usize {
        let mut depth = vec![0usize; self.len()];
        let mut best = 0;
        for v in self.preorder() {
            if let Some(p) = self.nodes[v].parent {
                depth[v] = depth[p] + 1;
                best = best.max(depth[v]);
            }
        }
        best
    }

    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        let mut seen = vec![false; self.nodes.len()];
        while let Some(v) = stack.pop() {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            out.push(v);
            for &c in self.nodes[v].children.iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    /// Children before parents; siblings left to right.
    pub fn postorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, false)];
        while let Some((v, expanded)) = stack.pop() {
            if expanded {
                out.push(v);
                continue;
            }
            stack.push((v, true));
            for &c in self.nodes[v].children.iter().rev() {
                stack.push((c, false));
            }
        }
        out
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&v| v != self.root && self.is_leaf(v))
            .collect()
    }

    /// Sum of all edge lengths.
    pub fn total_weight(&self) -> f64 {
        self.nodes
            .iter()
            .filter(|n| n.parent.is_some())
            .map(|n| n.length)
            .sum()
    }

    pub fn is_ancestor(&self, ancestor: usize, v: usize) -> bool {
        let mut u = v;
        while let Some(p) = self.nodes[u].parent {
            if p == ancestor {
                return true;
            }
            u = p;
        }
        false
    }

    fn check_ref(&self, r: SubtreeRef) -> Result<(usize, usize)> {
        match (r.child, r.ancestor) {
            (Some(c), Some(a)) if c < self.len() && a < self.len() && self.is_ancestor(a, c) => {
                Ok((c, a))
            }
            _ => Err(Error::InvalidRef {
                child: r.child,
                ancestor: r.ancestor,
            }),
        }
    }

    /// Sum of edge lengths on the path from `r.ancestor` down to `r.child`.
    pub fn path_label(&self, r: SubtreeRef) -> Result<f64> {
        let (c, a) = self.check_ref(r)?;
        let mut sum = 0.0;
        let mut u = c;
        while u != a {
            sum += self.nodes[u].length;
            u = self.nodes[u].parent.expect("ancestor checked");
        }
        Ok(sum)
    }

    /// Total deletion cost of `T[child...ancestor]`; zero for the empty ref.
    pub fn subtree_weight(&self, r: SubtreeRef) -> Result<f64> {
        if r.is_empty() {
            return Ok(0.0);
        }
        let path = self.path_label(r)?;
        Ok(path + self.weight_below(r.child.unwrap()))
    }

    /// Sum of all edge lengths strictly inside the subtree rooted at `v`.
    pub fn weight_below(&self, v: usize) -> f64 {
        let mut sum = 0.0;
        let mut stack: Vec<usize> = self.nodes[v].children.clone();
        while let Some(u) = stack.pop() {
            sum += self.nodes[u].length;
            stack.extend_from_slice(&self.nodes[u].children);
        }
        sum
    }

    /// Lists every violated merge tree invariant. Empty iff the tree is valid.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        let root_deg = self.nodes[self.root].children.len();
        if root_deg != 1 {
            out.push(format!(
                "node {}: root degree ≠ 1 (has {} children)",
                self.root, root_deg
            ));
        }
        for (v, node) in self.nodes.iter().enumerate() {
            let Some(p) = node.parent else { continue };
            if node.children.len() == 1 {
                out.push(format!("node {v}: inner node degree 1"));
            }
            if !node.length.is_finite() || node.length <= 0.0 {
                out.push(format!(
                    "node {v}: edge length {} is not positive",
                    node.length
                ));
            }
            if let (Some(s), Some(ps)) = (node.scalar, self.nodes[p].scalar) {
                if s <= ps {
                    out.push(format!(
                        "node {v}: scalar {s} does not exceed parent scalar {ps}"
                    ));
                } else if ((s - ps) - node.length).abs() > TOLERANCE {
                    out.push(format!(
                        "node {v}: length {} differs from scalar difference {}",
                        node.length,
                        s - ps
                    ));
                }
            }
        }
        let scalar_count = self.nodes.iter().filter(|n| n.scalar.is_some()).count();
        if scalar_count != 0 && scalar_count != self.len() {
            out.push(format!(
                "scalars present on {} of {} nodes",
                scalar_count,
                self.len()
            ));
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Returns `Ok(())` or [`Error::InvalidTree`] carrying every violation.
    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidTree(v))
        }
    }

    /// Removes every non-root node with exactly one child, merging its two
    /// incident edges into one with the summed length.
    pub fn normalize(&self) -> Result<MergeTree> {
        let parents: Vec<Option<usize>> = self.nodes.iter().map(|n| n.parent).collect();
        let lengths: Vec<f64> = self.nodes.iter().map(|n| n.length).collect();
        let scalars: Option<Vec<f64>> = self.nodes.iter().map(|n| n.scalar).collect();
        // Re-derive children so that a hand-assembled tree is checked too.
        let checked = MergeTree::from_parents(&parents, &lengths, scalars.as_deref())?;
        let mut work = checked.nodes;
        let mut removed = vec![false; work.len()];
        for v in checked_postorder(&work, self.root) {
            if v == self.root || work[v].children.len() != 1 {
                continue;
            }
            let c = work[v].children[0];
            let p = work[v].parent.expect("non-root");
            work[c].length += work[v].length;
            work[c].parent = Some(p);
            let slot = work[p].children.iter().position(|&x| x == v).unwrap();
            work[p].children[slot] = c;
            removed[v] = true;
        }
        Ok(compact(&work, self.root, &removed))
    }

    /// Contracts the edge from `v` to its parent: `v` disappears and its
    /// children hang from the parent with unchanged lengths. A parent left
    /// with a single child is pruned.
    pub fn contract_edge(&self, v: usize) -> Result<MergeTree> {
        let Some(p) = self.nodes[v].parent else {
            return Err(Error::InvalidArgument(format!("node {v} is the root")));
        };
        let mut work = self.nodes.clone();
        let moved = std::mem::take(&mut work[v].children);
        for &c in &moved {
            work[c].parent = Some(p);
        }
        work[p].children.retain(|&x| x != v);
        work[p].children.extend(moved);
        work[p].children.sort_unstable();
        let mut removed = vec![false; work.len()];
        removed[v] = true;
        compact(&work, self.root, &removed).normalize()
    }

    /// Parses the subset of Newick used in tests and fixtures: nested
    /// parenthesised children with `:length` suffixes; labels are ignored.
    /// The outermost clause is the top node and its length is the root edge.
    pub fn from_newick(text: &str) -> Result<MergeTree> {
        io::parse_newick(text)
    }

    /// Newick rendering compatible with [`MergeTree::from_newick`].
    pub fn to_newick(&self) -> String {
        fn rec(t: &MergeTree, v: usize, out: &mut String) {
            let ch = t.children(v);
            if !ch.is_empty() {
                out.push('(');
                for (i, &c) in ch.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    rec(t, c, out);
                }
                out.push(')');
            }
            out.push_str(&format!("n{}:{}", v, t.length(v)));
        }
        let mut s = String::new();
        if let Some(top) = self.top() {
            rec(self, top, &mut s);
        }
        s.push(';');
        s
    }

    /// Same tree with all scalars dropped.
    pub fn without_scalars(&self) -> MergeTree {
        let mut t = self.clone();
        for n in &mut t.nodes {
            n.scalar = None;
        }
        t
    }

    pub(crate) fn from_raw(nodes: Vec<NodeRecord>, root: usize) -> MergeTree {
        MergeTree { nodes, root }
    }
}

fn checked_postorder(nodes: &[NodeRecord], root: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(nodes.len());
    let mut stack = vec![(root, false)];
    while let Some((v, expanded)) = stack.pop() {
        if expanded {
            out.push(v);
            continue;
        }
        stack.push((v, true));
        for &c in nodes[v].children.iter().rev() {
            stack.push((c, false));
        }
    }
    out
}

/// Drops removed nodes and renumbers the survivors in their original order.
pub(crate) fn compact(nodes: &[NodeRecord], root: usize, removed: &[bool]) -> MergeTree {
    let mut map = vec![usize::MAX; nodes.len()];
    let mut next = 0;
    for (i, r) in removed.iter().enumerate() {
        if !r {
            map[i] = next;
            next += 1;
        }
    }
    let mut out = Vec::with_capacity(next);
    for (i, n) in nodes.iter().enumerate() {
        if removed[i] {
            continue;
        }
        let mut children: Vec<usize> = n.children.iter().map(|&c| map[c]).collect();
        children.sort_unstable();
        out.push(NodeRecord {
            parent: n.parent.map(|p| map[p]),
            children,
            length: n.length,
            scalar: n.scalar,
        });
    }
    MergeTree {
        nodes: out,
        root: map[root],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(lengths: &[f64]) -> MergeTree {
        let n = lengths.len() + 1;
        let parents: Vec<Option<usize>> =
            (0..n).map(|i| if i == 0 { None } else { Some(i - 1) }).collect();
        let mut l = vec![0.0];
        l.extend_from_slice(lengths);
        MergeTree::from_parents(&parents, &l, None).unwrap()
    }

    #[test]
    fn single_edge_is_valid() {
        let t = chain(&[5.0]);
        assert!(t.validate().is_empty());
    }

    #[test]
    fn root_with_two_children_is_flagged() {
        let t = MergeTree::from_parents(&[None, Some(0), Some(0)], &[0.0, 1.0, 1.0], None)
            .unwrap();
        let v = t.validate();
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("root degree ≠ 1"));
    }

    #[test]
    fn degree_one_inner_node_is_flagged() {
        let t = chain(&[1.0, 2.0]);
        let v = t.validate();
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("inner node degree 1"), "{v:?}");
    }

    #[test]
    fn nonpositive_length_is_flagged() {
        let t = chain(&[0.0]);
        assert_eq!(t.validate().len(), 1);
    }

    #[test]
    fn cycles_and_forests_are_rejected() {
        assert!(MergeTree::from_parents(&[Some(1), Some(0)], &[1.0, 1.0], None).is_err());
        assert!(MergeTree::from_parents(&[None, None], &[0.0, 0.0], None).is_err());
        assert!(
            MergeTree::from_parents(&[None, Some(2), Some(1)], &[0.0, 1.0, 1.0], None).is_err()
        );
    }

    #[test]
    fn normalize_merges_chains() {
        let t = chain(&[1.0, 2.0, 3.0]).normalize().unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.length(1), 6.0);
        assert!(t.is_valid());
    }

    #[test]
    fn normalize_keeps_branching_node() {
        // root -> a(2) -> b(3) -> {x(1), y(4)}
        let t = MergeTree::from_parents(
            &[None, Some(0), Some(1), Some(2), Some(2)],
            &[0.0, 2.0, 3.0, 1.0, 4.0],
            None,
        )
        .unwrap();
        let n = t.normalize().unwrap();
        assert_eq!(n.len(), 4);
        let top = n.top().unwrap();
        assert_eq!(n.length(top), 5.0);
        assert_eq!(n.children(top).len(), 2);
        assert!(n.is_valid());
        assert_eq!(n.normalize().unwrap(), n);
    }

    #[test]
    fn path_label_and_weight() {
        // root -0- top(2) -> {a(3), b(1)}
        let t = MergeTree::from_newick("(a:3,b:1):2;").unwrap();
        let top = t.top().unwrap();
        let a = t.children(top)[0];
        assert_eq!(t.path_label(SubtreeRef::new(a, top)).unwrap(), 3.0);
        assert_eq!(t.path_label(SubtreeRef::new(a, t.root())).unwrap(), 5.0);
        assert!(t.path_label(SubtreeRef::new(a, a)).is_err());
        assert!(t.path_label(SubtreeRef::EMPTY).is_err());
        assert_eq!(t.subtree_weight(SubtreeRef::EMPTY).unwrap(), 0.0);
        assert_eq!(t.subtree_weight(SubtreeRef::new(a, top)).unwrap(), 3.0);
        assert_eq!(t.subtree_weight(SubtreeRef::new(top, t.root())).unwrap(), 6.0);
        assert_eq!(t.total_weight(), 6.0);
    }

    #[test]
    fn contract_edge_reparents_children() {
        let t = MergeTree::from_newick("((a:1,b:2):0.5,c:3):1;").unwrap();
        let top = t.top().unwrap();
        let inner = t.children(top).iter().copied().find(|&v| !t.is_leaf(v)).unwrap();
        let c = t.contract_edge(inner).unwrap();
        assert!(c.is_valid());
        assert_eq!(c.children(c.top().unwrap()).len(), 3);
        assert!((c.total_weight() - (t.total_weight() - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn contracting_a_leaf_edge_prunes_parent() {
        let t = MergeTree::from_newick("(a:1,b:2):4;").unwrap();
        let top = t.top().unwrap();
        let a = t.children(top)[0];
        let c = t.contract_edge(a).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.length(c.top().unwrap()), 6.0);
    }
}
