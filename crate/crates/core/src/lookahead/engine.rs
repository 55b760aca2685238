use super::index::TreeIndex;
use super::memo::MemoStore;
use super::EngineOptions;
use crate::assignment::PartialMapper;
use crate::{Result, SubtreeRef};

/// Counters describing the work done by one evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EngineStats {
    pub tuples: usize,
    pub tuples_pruned: usize,
    pub node_pairs_pruned: usize,
    pub candidate_pairs: usize,
    pub candidate_pairs_pruned: usize,
    pub assignments: usize,
}

/// One bottom-up evaluation of the look-ahead recursion over a fixed pair of
/// trees. Owns its memo store; independent engines may run concurrently.
pub struct Engine<'a> {
    t1: TreeIndex<'a>,
    t2: TreeIndex<'a>,
    opts: EngineOptions,
    memo: MemoStore,
    /// min(direct matching, collapse) per node pair, NaN until computed.
    matched: Vec<f64>,
    mapper: PartialMapper,
    pair_buf: Vec<f64>,
    del_buf: Vec<f64>,
    ins_buf: Vec<f64>,
    order_buf: Vec<(f64, usize, usize)>,
    stats: EngineStats,
    done: bool,
}

impl<'a> Engine<'a> {
    /// Prepares an evaluation. `upper_bound` enables pruning when finite; it
    /// must not be smaller than the distance being computed.
    pub fn new(
        t1: &'a crate::MergeTree,
        t2: &'a crate::MergeTree,
        opts: EngineOptions,
        upper_bound: f64,
    ) -> Self {
        let i1 = TreeIndex::new(t1, opts.lookahead, opts.leaf_drop);
        let i2 = TreeIndex::new(t2, opts.lookahead, opts.leaf_drop);
        let memo = MemoStore::new(&i1, &i2, upper_bound);
        let n2 = i2.len();
        Engine {
            matched: vec![f64::NAN; i1.len() * n2],
            t1: i1,
            t2: i2,
            opts,
            memo,
            mapper: PartialMapper::default(),
            pair_buf: Vec::new(),
            del_buf: Vec::new(),
            ins_buf: Vec::new(),
            order_buf: Vec::new(),
            stats: EngineStats::default(),
            done: false,
        }
    }

    pub fn memo(&self) -> &MemoStore {
        &self.memo
    }

    pub fn stats(&self) -> EngineStats {
        self.stats
    }

    /// Distance between two subtrees after [`Engine::run`]; empty refs give
    /// deletion/insertion costs.
    pub fn subtree_value(&self, r1: SubtreeRef, r2: SubtreeRef) -> Option<f64> {
        self.memo.subtree_value(&self.t1, &self.t2, r1, r2)
    }

    /// Runs the whole schedule and returns the distance between the trees.
    pub fn run(&mut self) -> Result<f64> {
        let post1 = self.t1.postorder.clone();
        let post2 = self.t2.postorder.clone();
        for &n1 in &post1 {
            for &n2 in &post2 {
                self.node_pair(n1, n2)?;
            }
        }
        self.done = true;
        let top1 = self.t1.tree.top().expect("nonempty tree");
        let top2 = self.t2.tree.top().expect("nonempty tree");
        Ok(self
            .memo
            .get(self.t1.pair_id(top1, 1), self.t2.pair_id(top2, 1)))
    }

    fn prune(&self) -> bool {
        self.opts.upper_bound_prune && self.memo.upper_bound.is_finite()
    }

    /// Fills all tuples `(n1, p1, n2, p2)` for the node pair.
    fn node_pair(&mut self, n1: usize, n2: usize) -> Result<()> {
        let d1max = self.t1.depth[n1];
        let d2max = self.t2.depth[n2];
        let leaf1 = self.t1.tree.is_leaf(n1);
        let leaf2 = self.t2.tree.is_leaf(n2);
        let bound = self.memo.upper_bound;
        let prune = self.prune();
        for k1 in 1..=d1max {
            let id1 = self.t1.pair_id(n1, k1);
            let len1 = self.t1.path[id1];
            for k2 in 1..=d2max {
                let id2 = self.t2.pair_id(n2, k2);
                self.stats.tuples += 1;
                let lower = (self.t1.weight(id1) - self.t2.weight(id2)).abs();
                if prune && lower > bound {
                    // Any value above the bound leaves the optimum untouched.
                    self.stats.tuples_pruned += 1;
                    self.memo.set(id1, id2, lower);
                    continue;
                }
                let len2 = self.t2.path[id2];
                let value = match (leaf1, leaf2) {
                    (true, true) => (len1 - len2).abs(),
                    (true, false) => self.keep_one_child_2(id1, n2, k2),
                    (false, true) => self.keep_one_child_1(n1, k1, id2),
                    (false, false) => {
                        let d1 = self.keep_one_child_2(id1, n2, k2);
                        let d2 = self.keep_one_child_1(n1, k1, id2);
                        let matched = self.matched_children(n1, n2)? + (len1 - len2).abs();
                        d1.min(d2).min(matched)
                    }
                };
                self.memo.set(id1, id2, value);
            }
        }
        Ok(())
    }

    /// T2's node `n2` keeps one child subtree on the path; the others are
    /// inserted.
    fn keep_one_child_2(&self, id1: usize, n2: usize, k2: usize) -> f64 {
        let mut best = f64::INFINITY;
        for &c2 in self.t2.tree.children(n2) {
            let v = self.memo.get(id1, self.t2.pair_id(c2, k2 + 1)) - self.t2.edge_weight(c2);
            if v < best {
                best = v;
            }
        }
        best + self.t2.below[n2]
    }

    fn keep_one_child_1(&self, n1: usize, k1: usize, id2: usize) -> f64 {
        let mut best = f64::INFINITY;
        for &c1 in self.t1.tree.children(n1) {
            let v = self.memo.get(self.t1.pair_id(c1, k1 + 1), id2) - self.t1.edge_weight(c1);
            if v < best {
                best = v;
            }
        }
        best + self.t1.below[n1]
    }

    /// min(direct child matching, collapse) for an inner node pair. The
    /// direct matching depends only on the node pair and is always cached;
    /// the collapse part is cached only with `memoize_collapse`.
    fn matched_children(&mut self, n1: usize, n2: usize) -> Result<f64> {
        let slot = n1 * self.t2.len() + n2;
        let direct = if self.matched[slot].is_nan() {
            let d3 = self.direct_matching(n1, n2)?;
            self.matched[slot] = d3;
            d3
        } else {
            self.matched[slot]
        };
        if self.opts.lookahead == 0 {
            return Ok(direct);
        }
        let collapse = if self.opts.memoize_collapse {
            match self.memo.collapse_value(n1, n2) {
                Some(v) => v,
                None => {
                    let v = self.opt_collapse_inner(n1, n2, direct)?;
                    self.memo.set_collapse(n1, n2, v);
                    v
                }
            }
        } else {
            self.opt_collapse_inner(n1, n2, direct)?
        };
        Ok(direct.min(collapse))
    }

    fn direct_matching(&mut self, n1: usize, n2: usize) -> Result<f64> {
        let c1 = self.t1.tree.children(n1);
        let c2 = self.t2.tree.children(n2);
        self.pair_buf.clear();
        for &a in c1 {
            let ia = self.t1.pair_id(a, 1);
            for &b in c2 {
                self.pair_buf.push(self.memo.get(ia, self.t2.pair_id(b, 1)));
            }
        }
        self.del_buf.clear();
        self.del_buf
            .extend(c1.iter().map(|&a| self.t1.edge_weight(a)));
        self.ins_buf.clear();
        self.ins_buf
            .extend(c2.iter().map(|&b| self.t2.edge_weight(b)));
        self.stats.assignments += 1;
        self.mapper.solve(
            c1.len(),
            c2.len(),
            &self.pair_buf,
            &self.del_buf,
            &self.ins_buf,
            self.opts.solver,
        )
    }

    /// Best collapse of edge sets below `n1` and `n2` followed by an optimal
    /// mapping of the lifted subtrees. Returns +inf when no candidate pair
    /// applies. The pair of two empty sets is the direct matching and is
    /// skipped. `incumbent` is a known achievable value used to cut
    /// candidate pairs whose lower bound cannot beat it.
    fn opt_collapse_inner(&mut self, n1: usize, n2: usize, incumbent: f64) -> Result<f64> {
        let bound = self.memo.upper_bound;
        let prune = self.prune();
        if prune && (self.t1.below[n1] - self.t2.below[n2]).abs() > bound {
            self.stats.node_pairs_pruned += 1;
            return Ok(f64::INFINITY);
        }
        let mut best = f64::INFINITY;
        let cands1 = std::mem::take(&mut self.t1.candidates[n1]);
        let cands2 = std::mem::take(&mut self.t2.candidates[n2]);
        // Cheapest lower bounds first, so the cut tightens early and the
        // remaining pairs can be dropped in one step.
        let mut order = std::mem::take(&mut self.order_buf);
        order.clear();
        for (i, e1) in cands1.iter().enumerate() {
            for (j, e2) in cands2.iter().enumerate() {
                if e1.is_empty && e2.is_empty {
                    continue;
                }
                self.stats.candidate_pairs += 1;
                let lower = e1.cost + e2.cost + (e1.leaf_sum - e2.leaf_sum).abs();
                if prune && lower > bound {
                    self.stats.candidate_pairs_pruned += 1;
                    continue;
                }
                order.push((lower, i, j));
            }
        }
        order.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut result = Ok(());
        'candidates: for (k, &(lower, i, j)) in order.iter().enumerate() {
            let (e1, e2) = (&cands1[i], &cands2[j]);
            if lower >= best.min(incumbent) {
                self.stats.candidate_pairs_pruned += order.len() - k;
                break;
            }
            let fixed = e1.cost + e2.cost;
            let cut = best.min(incumbent);
            // Every row is deleted or matched, and so is every column.
            self.pair_buf.clear();
            self.ins_buf.clear();
            self.ins_buf.extend_from_slice(&e2.leaf_weights);
            let mut rows = 0.0;
            for (&a, &del) in e1.leaves.iter().zip(&e1.leaf_weights) {
                let mut row_min = del;
                for (j, &b) in e2.leaves.iter().enumerate() {
                    let v = self.memo.get(a, b);
                    self.pair_buf.push(v);
                    row_min = row_min.min(v);
                    self.ins_buf[j] = self.ins_buf[j].min(v);
                }
                rows += row_min;
                let partial = fixed + rows;
                if (prune && partial > bound) || partial >= cut {
                    self.stats.candidate_pairs_pruned += 1;
                    continue 'candidates;
                }
            }
            let cols: f64 = self.ins_buf.iter().sum();
            let lower = fixed + rows.max(cols);
            if (prune && lower > bound) || lower >= cut {
                self.stats.candidate_pairs_pruned += 1;
                continue;
            }
            self.stats.assignments += 1;
            let mapped = match self.mapper.solve(
                e1.leaves.len(),
                e2.leaves.len(),
                &self.pair_buf,
                &e1.leaf_weights,
                &e2.leaf_weights,
                self.opts.solver,
            ) {
                Ok(v) => v,
                Err(e) => {
                    result = Err(e);
                    break;
                }
            };
            let d = fixed + mapped;
            if d < best {
                best = d;
            }
        }
        self.order_buf = order;
        self.t1.candidates[n1] = cands1;
        self.t2.candidates[n2] = cands2;
        result.map(|_| best)
    }

    /// Collapse result for an inner node pair, computed from the current
    /// tables (all subtree entries below the pair must be filled).
    pub fn opt_collapse(&mut self, n1: usize, n2: usize) -> Result<f64> {
        if self.t1.tree.is_leaf(n1) || self.t2.tree.is_leaf(n2) {
            return Ok(f64::INFINITY);
        }
        self.opt_collapse_inner(n1, n2, f64::INFINITY)
    }
}
