use super::index::TreeIndex;
use crate::SubtreeRef;

/// Dynamic programming state of one distance evaluation.
///
/// The subtree table is dense over `(node, ancestor)` pairs of both trees,
/// i.e. `sum(depth(T1)) x sum(depth(T2))` entries. Entries never visited hold
/// NaN. Values for the empty tree are not stored: they are subtree weights.
#[derive(Debug, Clone)]
pub struct MemoStore {
    pub(crate) subtree_table: Vec<f64>,
    pub(crate) stride: usize,
    pub(crate) collapse_table: Vec<f64>,
    pub(crate) collapse_stride: usize,
    pub(crate) upper_bound: f64,
    weights1: Vec<f64>,
    weights2: Vec<f64>,
}

impl MemoStore {
    pub(crate) fn new(t1: &TreeIndex, t2: &TreeIndex, upper_bound: f64) -> Self {
        MemoStore {
            subtree_table: vec![f64::NAN; t1.pair_count() * t2.pair_count()],
            stride: t2.pair_count(),
            collapse_table: vec![f64::NAN; t1.len() * t2.len()],
            collapse_stride: t2.len(),
            upper_bound,
            weights1: t1.ref_weights(),
            weights2: t2.ref_weights(),
        }
    }

    /// Upper bound used for pruning; infinite when pruning is off.
    pub fn upper_bound(&self) -> f64 {
        self.upper_bound
    }

    #[inline]
    pub(crate) fn get(&self, id1: usize, id2: usize) -> f64 {
        self.subtree_table[id1 * self.stride + id2]
    }

    #[inline]
    pub(crate) fn set(&mut self, id1: usize, id2: usize, value: f64) {
        self.subtree_table[id1 * self.stride + id2] = value;
    }

    #[inline]
    pub(crate) fn collapse(&self, n1: usize, n2: usize) -> f64 {
        self.collapse_table[n1 * self.collapse_stride + n2]
    }

    #[inline]
    pub(crate) fn set_collapse(&mut self, n1: usize, n2: usize, value: f64) {
        self.collapse_table[n1 * self.collapse_stride + n2] = value;
    }

    /// Stored distance between two subtrees, or the deletion/insertion cost
    /// when one side is empty. `None` if the entry was never computed.
    pub(crate) fn subtree_value(&self, t1: &TreeIndex, t2: &TreeIndex, r1: SubtreeRef, r2: SubtreeRef) -> Option<f64> {
        match (t1.ref_id(r1), t2.ref_id(r2)) {
            (None, None) if r1.is_empty() && r2.is_empty() => Some(0.0),
            (Some(a), None) if r2.is_empty() => Some(self.weights1[a]),
            (None, Some(b)) if r1.is_empty() => Some(self.weights2[b]),
            (Some(a), Some(b)) => {
                let v = self.get(a, b);
                (!v.is_nan()).then_some(v)
            }
            _ => None,
        }
    }

    /// Stored collapse result for a node pair, if computed and memoized.
    pub fn collapse_value(&self, n1: usize, n2: usize) -> Option<f64> {
        let v = self.collapse(n1, n2);
        (!v.is_nan()).then_some(v)
    }

    pub fn computed_entries(&self) -> usize {
        self.subtree_table.iter().filter(|v| !v.is_nan()).count()
    }
}
