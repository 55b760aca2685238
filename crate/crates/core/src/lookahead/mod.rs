//! The distance engine.
//!
//! `delta` evaluates the look-ahead recursion bottom-up over all pairs of
//! subtree references `(node, ancestor)` of the two trees. With look-ahead
//! zero it is the path mapping distance; with larger look-ahead, connected
//! edge sets of bounded depth below matched saddles may additionally be
//! contracted before their subtrees are matched.

mod engine;
mod index;
mod memo;
mod sces;

pub use engine::{Engine, EngineStats};
pub use memo::MemoStore;
pub use sces::{generate_sces, CollapseCandidate};

use crate::{MergeTree, Result, Solver};

/// Engine configuration. The three flags toggle exact optimizations and
/// never change results when the Hungarian solver is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineOptions {
    pub lookahead: usize,
    pub solver: Solver,
    pub leaf_drop: bool,
    pub memoize_collapse: bool,
    pub upper_bound_prune: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            lookahead: 0,
            solver: Solver::Hungarian,
            leaf_drop: true,
            memoize_collapse: true,
            upper_bound_prune: true,
        }
    }
}

impl EngineOptions {
    pub fn with_lookahead(h: usize) -> Self {
        EngineOptions {
            lookahead: h,
            ..Self::default()
        }
    }

    /// Same look-ahead and solver with every optimization switched off.
    pub fn unoptimized(self) -> Self {
        EngineOptions {
            leaf_drop: false,
            memoize_collapse: false,
            upper_bound_prune: false,
            ..self
        }
    }
}

/// Distance between two merge trees with the configured look-ahead.
///
/// Either tree may be [`MergeTree::empty`], in which case the result is the
/// total weight of the other.
pub fn delta(t1: &MergeTree, t2: &MergeTree, opts: &EngineOptions) -> Result<f64> {
    if t1.is_empty() || t2.is_empty() {
        return Ok(t1.total_weight() + t2.total_weight());
    }
    t1.ensure_valid()?;
    t2.ensure_valid()?;
    let bound = if opts.upper_bound_prune && opts.lookahead > 0 {
        precompute_upper_bound(t1, t2, opts)?
    } else {
        f64::INFINITY
    };
    Engine::new(t1, t2, *opts, bound).run()
}

/// Path mapping distance of the pair, used as the pruning bound for
/// look-ahead runs.
pub fn precompute_upper_bound(t1: &MergeTree, t2: &MergeTree, opts: &EngineOptions) -> Result<f64> {
    if t1.is_empty() || t2.is_empty() {
        return Ok(t1.total_weight() + t2.total_weight());
    }
    let base = EngineOptions {
        lookahead: 0,
        upper_bound_prune: false,
        ..*opts
    };
    Engine::new(t1, t2, base, f64::INFINITY).run()
}

/// One entry of the evaluation order: subtree `T1[n1..p1]` against
/// `T2[n2..p2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduleEntry {
    pub n1: usize,
    pub p1: usize,
    pub n2: usize,
    pub p2: usize,
}

/// The order in which the engine fills its table: node pairs in postorder
/// of both trees, and for each node pair every combination of ancestors,
/// nearest first.
pub fn delta_matrix_entry_schedule(t1: &MergeTree, t2: &MergeTree) -> Vec<ScheduleEntry> {
    let ancestors = |t: &MergeTree, v: usize| {
        let mut out = Vec::new();
        let mut u = v;
        while let Some(p) = t.parent(u) {
            out.push(p);
            u = p;
        }
        out
    };
    let post = |t: &MergeTree| -> Vec<usize> {
        t.postorder().into_iter().filter(|&v| v != t.root()).collect()
    };
    let (post1, post2) = (post(t1), post(t2));
    let anc2: Vec<Vec<usize>> = (0..t2.len()).map(|v| ancestors(t2, v)).collect();
    let mut out = Vec::new();
    for &n1 in &post1 {
        let a1 = ancestors(t1, n1);
        for &n2 in &post2 {
            for &p1 in &a1 {
                for &p2 in &anc2[n2] {
                    out.push(ScheduleEntry { n1, p1, n2, p2 });
                }
            }
        }
    }
    out
}
