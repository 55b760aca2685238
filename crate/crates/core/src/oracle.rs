//! Brute-force reference implementations, usable on small trees only.
//!
//! Nothing here shares code with the engine beyond the tree type: partial
//! mappings are enumerated exhaustively, the path mapping recursion is
//! evaluated top-down over explicit subtree references, and the unconstrained
//! distance is reduced to contracting every subset of inner edges first.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use crate::{Error, MergeTree, Result, SubtreeRef};

/// Limits for the exhaustive searches.
#[derive(Debug, Clone, Copy)]
pub struct OracleBudget {
    pub max_nodes: usize,
    pub max_inner_edges: usize,
    pub time_cap: Duration,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_nodes: 12,
            max_inner_edges: 16,
            time_cap: Duration::from_secs(60),
        }
    }
}

/// Largest side accepted by [`brute_partial_mapping`].
pub const MAX_PARTIAL_MAPPING: usize = 6;

/// Minimum over all partial injective maps from rows to columns of matched
/// pair costs plus deletions of unmatched rows and insertions of unmatched
/// columns. `pair_costs` is row-major `k1 x k2`.
pub fn brute_partial_mapping(pair_costs: &[f64], delete: &[f64], insert: &[f64]) -> Result<f64> {
    let (k1, k2) = (delete.len(), insert.len());
    if k1 > MAX_PARTIAL_MAPPING || k2 > MAX_PARTIAL_MAPPING {
        return Err(Error::BudgetExceeded(format!(
            "partial mapping enumeration limited to {MAX_PARTIAL_MAPPING} items per side, got {k1}x{k2}"
        )));
    }
    if pair_costs.len() != k1 * k2 {
        return Err(Error::InvalidArgument("pair cost matrix has the wrong size".into()));
    }
    fn rec(row: usize, used: &mut [bool], p: &[f64], del: &[f64], ins: &[f64]) -> f64 {
        let k2 = ins.len();
        if row == del.len() {
            return (0..k2).filter(|&j| !used[j]).map(|j| ins[j]).sum();
        }
        let mut best = del[row] + rec(row + 1, used, p, del, ins);
        for j in 0..k2 {
            if !used[j] {
                used[j] = true;
                best = best.min(p[row * k2 + j] + rec(row + 1, used, p, del, ins));
                used[j] = false;
            }
        }
        best
    }
    Ok(rec(0, &mut vec![false; k2], pair_costs, delete, insert))
}

struct PathMapping<'a> {
    t1: &'a MergeTree,
    t2: &'a MergeTree,
    seen: HashMap<(usize, usize, usize, usize), f64>,
}

impl PathMapping<'_> {
    fn weight(t: &MergeTree, c: usize, a: usize) -> f64 {
        t.subtree_weight(SubtreeRef::new(c, a)).unwrap()
    }

    fn label(t: &MergeTree, c: usize, a: usize) -> f64 {
        t.path_label(SubtreeRef::new(c, a)).unwrap()
    }

    /// Distance between `T1[n1..p1]` and `T2[n2..p2]`.
    fn dist(&mut self, n1: usize, p1: usize, n2: usize, p2: usize) -> Result<f64> {
        if let Some(&v) = self.seen.get(&(n1, p1, n2, p2)) {
            return Ok(v);
        }
        let (t1, t2) = (self.t1, self.t2);
        let l1 = Self::label(t1, n1, p1);
        let l2 = Self::label(t2, n2, p2);
        let c1 = t1.children(n1).to_vec();
        let c2 = t2.children(n2).to_vec();
        let rest1: f64 = c1.iter().map(|&c| Self::weight(t1, c, n1)).sum();
        let rest2: f64 = c2.iter().map(|&c| Self::weight(t2, c, n2)).sum();
        let mut best = f64::INFINITY;
        if c1.is_empty() && c2.is_empty() {
            best = (l1 - l2).abs();
        }
        // keep one child of n2 on the path, insert the rest
        if !c2.is_empty() {
            for &k in &c2 {
                let d = self.dist(n1, p1, k, p2)? + rest2 - Self::weight(t2, k, n2);
                best = best.min(d);
            }
        }
        if !c1.is_empty() {
            for &k in &c1 {
                let d = self.dist(k, p1, n2, p2)? + rest1 - Self::weight(t1, k, n1);
                best = best.min(d);
            }
        }
        if !c1.is_empty() && !c2.is_empty() {
            let mut pairs = Vec::with_capacity(c1.len() * c2.len());
            for &a in &c1 {
                for &b in &c2 {
                    pairs.push(self.dist(a, n1, b, n2)?);
                }
            }
            let del: Vec<f64> = c1.iter().map(|&a| Self::weight(t1, a, n1)).collect();
            let ins: Vec<f64> = c2.iter().map(|&b| Self::weight(t2, b, n2)).collect();
            best = best.min(brute_partial_mapping(&pairs, &del, &ins)? + (l1 - l2).abs());
        }
        self.seen.insert((n1, p1, n2, p2), best);
        Ok(best)
    }
}

/// Path mapping distance by direct top-down evaluation of the recursion.
/// Repeated subproblems are looked up rather than re-expanded; trees are
/// capped at `max_nodes` of the default budget.
pub fn brute_delta_0(t1: &MergeTree, t2: &MergeTree) -> Result<f64> {
    let cap = OracleBudget::default().max_nodes;
    if t1.len() > cap || t2.len() > cap {
        return Err(Error::BudgetExceeded(format!(
            "brute path mapping limited to {cap} nodes per tree"
        )));
    }
    if t1.is_empty() || t2.is_empty() {
        return Ok(t1.total_weight() + t2.total_weight());
    }
    t1.ensure_valid()?;
    t2.ensure_valid()?;
    let (a, b) = (t1.top().unwrap(), t2.top().unwrap());
    PathMapping {
        t1,
        t2,
        seen: HashMap::new(),
    }
    .dist(a, t1.root(), b, t2.root())
}

/// Edges that may be contracted without changing the tree's root edge or
/// deleting a leaf: lower endpoints of inner edges.
pub fn inner_edges(t: &MergeTree) -> Vec<usize> {
    let top = t.top();
    (0..t.len())
        .filter(|&v| v != t.root() && Some(v) != top && !t.is_leaf(v))
        .collect()
}

/// The tree with every edge in `edges` contracted at once.
pub fn contract_edges(t: &MergeTree, edges: &[usize]) -> Result<MergeTree> {
    let n = t.len();
    let mut gone = vec![false; n];
    for &e in edges {
        if e == t.root() || Some(e) == t.top() {
            return Err(Error::InvalidArgument(format!("edge {e} cannot be contracted")));
        }
        gone[e] = true;
    }
    let mut new_id = vec![usize::MAX; n];
    let mut k = 0;
    for v in 0..n {
        if !gone[v] {
            new_id[v] = k;
            k += 1;
        }
    }
    let mut parents = Vec::with_capacity(k);
    let mut lengths = Vec::with_capacity(k);
    for v in (0..n).filter(|&v| !gone[v]) {
        let mut p = t.parent(v);
        while let Some(u) = p.filter(|&u| gone[u]) {
            p = t.parent(u);
        }
        parents.push(p.map(|u| new_id[u]));
        lengths.push(t.length(v));
    }
    MergeTree::from_parents(&parents, &lengths, None)?.normalize()
}

/// Unconstrained edit distance: the best total over all pairs of inner edge
/// subsets `(D1, D2)` of the contraction costs plus the path mapping
/// distance of the contracted trees.
pub fn brute_delta_e(t1: &MergeTree, t2: &MergeTree, budget: &OracleBudget) -> Result<f64> {
    if t1.len() > budget.max_nodes || t2.len() > budget.max_nodes {
        return Err(Error::BudgetExceeded(format!(
            "trees have {} and {} nodes, budget is {}",
            t1.len(),
            t2.len(),
            budget.max_nodes
        )));
    }
    let (e1, e2) = (inner_edges(t1), inner_edges(t2));
    if e1.len() + e2.len() > budget.max_inner_edges {
        return Err(Error::BudgetExceeded(format!(
            "2^{} edge subsets exceed the budget of 2^{}",
            e1.len() + e2.len(),
            budget.max_inner_edges
        )));
    }
    let started = Instant::now();
    let variants = |t: &MergeTree, e: &[usize]| -> Result<Vec<(f64, MergeTree)>> {
        (0u32..1 << e.len())
            .map(|mask| {
                let chosen: Vec<usize> = (0..e.len()).filter(|i| mask >> i & 1 == 1).map(|i| e[i]).collect();
                let cost = chosen.iter().map(|&v| t.length(v)).sum();
                Ok((cost, contract_edges(t, &chosen)?))
            })
            .collect()
    };
    let v1 = variants(t1, &e1)?;
    let v2 = variants(t2, &e2)?;
    let mut best = f64::INFINITY;
    for (c1, a) in &v1 {
        for (c2, b) in &v2 {
            if started.elapsed() > budget.time_cap {
                return Err(Error::BudgetExceeded("oracle time cap reached".into()));
            }
            if c1 + c2 >= best {
                continue;
            }
            best = best.min(c1 + c2 + brute_delta_0(a, b)?);
        }
    }
    Ok(best)
}

/// Unconstrained edit distance by exhaustive search over edit sequences in
/// deletions-then-relabel-then-insertions form, with arbitrary deletions
/// (leaf or inner) on both sides. Limited to ten edges in total.
pub fn edit_search(t1: &MergeTree, t2: &MergeTree) -> Result<f64> {
    let edges = |t: &MergeTree| t.len() - 1;
    if edges(t1) + edges(t2) > 10 {
        return Err(Error::BudgetExceeded("edit search limited to ten edges".into()));
    }
    let s1 = deletion_states(t1)?;
    let s2 = deletion_states(t2)?;
    let mut best = f64::INFINITY;
    for (c1, a) in &s1 {
        for (c2, b) in &s2 {
            if let Some(r) = relabel_cost(a, b) {
                best = best.min(c1 + c2 + r);
            }
        }
    }
    Ok(best)
}

/// Every tree reachable by sequences of edge deletions, with the cheapest
/// cost found for each visited sequence.
fn deletion_states(t: &MergeTree) -> Result<Vec<(f64, MergeTree)>> {
    let mut out = Vec::new();
    let mut queue = std::collections::VecDeque::from([(0.0, t.clone())]);
    while let Some((cost, tree)) = queue.pop_front() {
        for v in 0..tree.len() {
            if v == tree.root() {
                continue;
            }
            let top = Some(v) == tree.top();
            if top && !tree.is_leaf(v) {
                continue;
            }
            queue.push_back((cost + tree.length(v), tree.contract_edge(v)?));
        }
        out.push((cost, tree));
    }
    Ok(out)
}

/// Minimum relabel cost over isomorphisms, `None` if the shapes differ.
fn relabel_cost(a: &MergeTree, b: &MergeTree) -> Option<f64> {
    fn rec(a: &MergeTree, u: usize, b: &MergeTree, v: usize) -> Option<f64> {
        let (ca, cb) = (a.children(u), b.children(v));
        if ca.len() != cb.len() {
            return None;
        }
        let here = (a.length(u) - b.length(v)).abs();
        let n = ca.len();
        let table: Vec<Vec<Option<f64>>> =
            ca.iter().map(|&x| cb.iter().map(|&y| rec(a, x, b, y)).collect()).collect();
        fn perm(i: usize, used: &mut Vec<bool>, t: &[Vec<Option<f64>>]) -> Option<f64> {
            if i == t.len() {
                return Some(0.0);
            }
            let mut best: Option<f64> = None;
            for j in 0..t.len() {
                if used[j] {
                    continue;
                }
                if let Some(c) = t[i][j] {
                    used[j] = true;
                    if let Some(r) = perm(i + 1, used, t) {
                        best = Some(best.map_or(c + r, |b: f64| b.min(c + r)));
                    }
                    used[j] = false;
                }
            }
            best
        }
        perm(0, &mut vec![false; n], &table).map(|c| c + here)
    }
    match (a.top(), b.top()) {
        (None, None) => Some(0.0),
        (Some(x), Some(y)) => rec(a, x, b, y),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nw(s: &str) -> MergeTree {
        MergeTree::from_newick(s).unwrap()
    }

    #[test]
    fn partial_mapping_examples() {
        assert_eq!(brute_partial_mapping(&[], &[], &[]).unwrap(), 0.0);
        assert_eq!(brute_partial_mapping(&[1.0, 4.0], &[3.0, 2.0], &[6.0]).unwrap(), 3.0);
        let big = crate::assignment::LARGE;
        let v = brute_partial_mapping(&[big; 4], &[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(v, 10.0);
        assert!(brute_partial_mapping(&[0.0; 49], &[0.0; 7], &[0.0; 7]).is_err());
    }

    #[test]
    fn path_mapping_examples() {
        assert_eq!(brute_delta_0(&nw("a:5;"), &nw("a:3;")).unwrap(), 2.0);
        let d = brute_delta_0(&nw("a:5;"), &nw("(a:3,b:1):2;")).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn contraction_of_one_inner_edge() {
        let t1 = nw("((a:4,b:3):0.25,c:6):2;");
        let t2 = nw("(a:4,b:3,c:6):2;");
        let d = brute_delta_e(&t1, &t2, &OracleBudget::default()).unwrap();
        assert!((d - 0.25).abs() < 1e-12);
        assert_eq!(brute_delta_e(&t1, &t1, &OracleBudget::default()).unwrap(), 0.0);
    }

    #[test]
    fn subset_reduction_agrees_with_edit_search() {
        let cases = [
            ("((a:1,b:2):1,c:3):1;", "(a:1,(b:2,c:3):1):1;"),
            ("((a:1,b:2):0.5,c:3):1;", "(a:1,b:2):4;"),
            ("(a:2,b:2,c:1):1;", "((a:2,b:2):1,c:1):1;"),
            ("(a:3,b:1):2;", "a:5;"),
            ("((a:1,b:1):1,c:1):1;", "(x:1,y:3):1;"),
            ("((a:1,b:1):1,c:1):1;", "x:4;"),
        ];
        for (x, y) in cases {
            let (a, b) = (nw(x), nw(y));
            let reduced = brute_delta_e(&a, &b, &OracleBudget::default()).unwrap();
            let searched = edit_search(&a, &b).unwrap();
            assert!((reduced - searched).abs() < 1e-9, "{x} {y}: {reduced} vs {searched}");
        }
    }

    #[test]
    fn budget_is_enforced() {
        let t = nw("((a:1,b:1):1,(c:1,d:1):1):1;");
        let tight = OracleBudget {
            max_inner_edges: 2,
            ..OracleBudget::default()
        };
        assert!(matches!(brute_delta_e(&t, &t, &tight), Err(Error::BudgetExceeded(_))));
    }
}
