//! Seeded synthetic merge trees and ensembles.
//!
//! Random trees grow by recursive attachment: a random leaf is split into a
//! saddle with two new leaves, or a new leaf is attached to a saddle with
//! room for more children. Ensembles start from one base tree and apply
//! saddle swaps (exchanging a grandchild with its uncle) plus multiplicative
//! length jitter, mimicking the horizontal instability of nearby saddles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::MergeTree;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    /// Node count including the root; the generated tree has at most this
    /// many nodes.
    pub nodes: usize,
    pub max_children: usize,
    pub max_depth: usize,
    pub leaf_length: (f64, f64),
    pub inner_length: (f64, f64),
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            nodes: 9,
            max_children: 3,
            max_depth: 5,
            leaf_length: (0.1, 10.0),
            inner_length: (0.1, 10.0),
        }
    }
}

/// Grows a random valid tree with at most `p.nodes` nodes (one fewer when
/// the last step would overshoot, fewer still if the depth limit binds).
/// Requests below four nodes give a single edge.
pub fn random_tree<R: Rng>(rng: &mut R, p: &TreeParams) -> MergeTree {
    assert!(p.max_children >= 2, "saddles need at least two children");
    let mut parent: Vec<Option<usize>> = vec![None, Some(0)];
    let mut children: Vec<Vec<usize>> = vec![vec![1], vec![]];
    let mut depth = vec![0usize, 1];
    if p.nodes >= 4 && p.max_depth >= 2 {
        for _ in 0..2 {
            parent.push(Some(1));
            children.push(vec![]);
            depth.push(2);
            let id = parent.len() - 1;
            children[1].push(id);
        }
    }
    loop {
        let room = p.nodes.saturating_sub(parent.len());
        if room == 0 {
            break;
        }
        // (node, grows_by)
        let mut moves: Vec<(usize, usize)> = Vec::new();
        for v in 1..parent.len() {
            let ch = children[v].len();
            if ch == 0 && room >= 2 && depth[v] < p.max_depth && parent.len() >= 4 {
                moves.push((v, 2));
            } else if ch >= 2 && ch < p.max_children {
                moves.push((v, 1));
            }
        }
        if moves.is_empty() {
            break;
        }
        let (v, k) = moves[rng.gen_range(0..moves.len())];
        for _ in 0..k {
            parent.push(Some(v));
            children.push(vec![]);
            depth.push(depth[v] + 1);
            let id = parent.len() - 1;
            children[v].push(id);
        }
    }
    let lengths: Vec<f64> = (0..parent.len())
        .map(|v| {
            if v == 0 {
                0.0
            } else {
                let (lo, hi) = if children[v].is_empty() { p.leaf_length } else { p.inner_length };
                if hi > lo {
                    rng.gen_range(lo..hi)
                } else {
                    lo
                }
            }
        })
        .collect();
    MergeTree::from_parents(&parent, &lengths, None).expect("generator builds a connected tree")
}

/// Possible swap sites `(s, c, b)`: `s` is a saddle below `p`, `c` a child
/// of `s`, `b` a sibling of `s`.
fn swap_sites(t: &MergeTree) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for s in 0..t.len() {
        let Some(p) = t.parent(s) else { continue };
        if p == t.root() || t.is_leaf(s) {
            continue;
        }
        for &c in t.children(s) {
            for &b in t.children(p) {
                if b != s {
                    out.push((s, c, b));
                }
            }
        }
    }
    out
}

/// Exchanges child `c` of saddle `s` with the sibling `b` of `s`: afterwards
/// `c` hangs from `parent(s)` and `b` from `s`. Edge lengths move with their
/// lower endpoints.
pub fn saddle_swap(t: &MergeTree, s: usize, c: usize, b: usize) -> crate::Result<MergeTree> {
    let p = t
        .parent(s)
        .ok_or_else(|| crate::Error::InvalidArgument("swap saddle is the root".into()))?;
    if t.parent(c) != Some(s) || t.parent(b) != Some(p) || b == s {
        return Err(crate::Error::InvalidArgument(format!(
            "({s}, {c}, {b}) is not a swap site"
        )));
    }
    let mut parents: Vec<Option<usize>> = (0..t.len()).map(|v| t.parent(v)).collect();
    parents[c] = Some(p);
    parents[b] = Some(s);
    let lengths: Vec<f64> = (0..t.len()).map(|v| t.length(v)).collect();
    MergeTree::from_parents(&parents, &lengths, None)?.normalize()
}

/// Applies a uniformly chosen saddle swap, or returns the tree unchanged if
/// it has no swap site.
pub fn random_swap<R: Rng>(rng: &mut R, t: &MergeTree) -> MergeTree {
    let sites = swap_sites(t);
    if sites.is_empty() {
        return t.clone();
    }
    let (s, c, b) = sites[rng.gen_range(0..sites.len())];
    saddle_swap(t, s, c, b).expect("site was enumerated from the tree")
}

/// Multiplies every edge length by an independent factor in
/// `[1 - jitter, 1 + jitter]`.
pub fn jitter_lengths<R: Rng>(rng: &mut R, t: &MergeTree, jitter: f64) -> MergeTree {
    let parents: Vec<Option<usize>> = (0..t.len()).map(|v| t.parent(v)).collect();
    let lengths: Vec<f64> = (0..t.len())
        .map(|v| {
            if jitter > 0.0 && v != t.root() {
                t.length(v) * (1.0 + rng.gen_range(-jitter..=jitter))
            } else {
                t.length(v)
            }
        })
        .collect();
    MergeTree::from_parents(&parents, &lengths, None).expect("same structure")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleParams {
    pub members: usize,
    pub swaps: usize,
    pub jitter: f64,
    pub seed: u64,
    pub base: TreeParams,
}

impl Default for EnsembleParams {
    fn default() -> Self {
        EnsembleParams {
            members: 30,
            swaps: 1,
            jitter: 0.05,
            seed: 0,
            base: TreeParams {
                nodes: 9,
                leaf_length: (2.0, 10.0),
                inner_length: (0.2, 1.0),
                ..TreeParams::default()
            },
        }
    }
}

fn perturbed<R: Rng>(rng: &mut R, base: &MergeTree, p: &EnsembleParams) -> MergeTree {
    let mut t = base.clone();
    for _ in 0..p.swaps {
        t = random_swap(rng, &t);
    }
    jitter_lengths(rng, &t, p.jitter)
}

/// `members` perturbed copies of one random base tree. Deterministic per
/// seed.
pub fn swap_ensemble(p: &EnsembleParams) -> Vec<MergeTree> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let base = random_tree(&mut rng, &p.base);
    (0..p.members).map(|_| perturbed(&mut rng, &base, p)).collect()
}

/// `clusters` base trees with `p.members` perturbed copies each, plus the
/// cluster label of every member.
pub fn clustered_ensemble(clusters: usize, p: &EnsembleParams) -> (Vec<MergeTree>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let bases: Vec<MergeTree> = (0..clusters).map(|_| random_tree(&mut rng, &p.base)).collect();
    let mut trees = Vec::new();
    let mut labels = Vec::new();
    for (k, base) in bases.iter().enumerate() {
        for _ in 0..p.members {
            trees.push(perturbed(&mut rng, base, p));
            labels.push(k);
        }
    }
    (trees, labels)
}

/// Seeded stream of random tree pairs with node counts drawn uniformly from
/// `2..=max_nodes`.
pub fn random_pairs(seed: u64, count: usize, max_nodes: usize) -> Vec<(MergeTree, MergeTree)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| {
        let p = TreeParams {
            nodes: rng.gen_range(2..=max_nodes),
            ..TreeParams::default()
        };
        random_tree(rng, &p)
    };
    (0..count).map(|_| (draw(&mut rng), draw(&mut rng))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_trees_are_valid_and_sized() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 2..40 {
            let p = TreeParams {
                nodes: n,
                max_depth: 30,
                ..TreeParams::default()
            };
            let t = random_tree(&mut rng, &p);
            assert!(t.is_valid(), "{:?}", t.validate());
            // one short when every saddle is full and a split would overshoot
            let expect = if n < 4 { 2 } else { n };
            assert!(t.len() == expect || t.len() + 1 == expect);
        }
    }

    #[test]
    fn depth_and_degree_limits_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let t = random_tree(&mut rng, &TreeParams { nodes: 30, ..TreeParams::default() });
            assert!(t.max_depth() <= 5);
            assert!((0..t.len()).all(|v| t.children(v).len() <= 3));
            assert!(t.is_valid());
        }
    }

    #[test]
    fn swap_moves_grandchild_up() {
        let t = MergeTree::from_newick("((a:1,b:2):0.5,c:3):1;").unwrap();
        let top = t.top().unwrap();
        let s = t.children(top)[0];
        let (c, b) = (t.children(s)[0], t.children(top)[1]);
        let u = saddle_swap(&t, s, c, b).unwrap();
        assert!(u.is_valid());
        let lens = |t: &MergeTree| {
            let mut l: Vec<f64> = (1..t.len()).map(|v| t.length(v)).collect();
            l.sort_by(f64::total_cmp);
            l
        };
        assert_eq!(lens(&t), lens(&u));
        let top_u = u.top().unwrap();
        let leaf_under_top: Vec<f64> = u
            .children(top_u)
            .iter()
            .filter(|&&x| u.is_leaf(x))
            .map(|&x| u.length(x))
            .collect();
        assert_eq!(leaf_under_top, vec![1.0]);
    }

    #[test]
    fn ensembles_are_deterministic() {
        let p = EnsembleParams::default();
        let a: Vec<String> = swap_ensemble(&p).iter().map(|t| t.to_newick()).collect();
        let b: Vec<String> = swap_ensemble(&p).iter().map(|t| t.to_newick()).collect();
        assert_eq!(a, b);
        let zero = EnsembleParams {
            swaps: 0,
            jitter: 0.0,
            ..p
        };
        let e = swap_ensemble(&zero);
        assert!(e.iter().all(|t| t.to_newick() == e[0].to_newick()));
    }
}
