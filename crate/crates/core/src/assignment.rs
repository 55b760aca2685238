//! Assignment solvers for the partial mapping subproblems.
//!
//! Every recursion case of the distance engine ends in an optimal partial
//! mapping between two sets of subtrees: each subtree is either matched to one
//! on the other side or deleted/inserted. [`solve_partial_mapping`] reduces
//! that problem to a square assignment problem which is solved either exactly
//! ([`solve_hungarian`]) or approximately ([`solve_auction`]).

use crate::{Error, Result};

/// Marks forbidden cells. Feasible totals stay far below it.
pub const LARGE: f64 = 1e18;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Solver {
    #[default]
    Hungarian,
    Auction,
}

impl std::str::FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hungarian" => Ok(Solver::Hungarian),
            "auction" => Ok(Solver::Auction),
            other => Err(Error::InvalidArgument(format!("unknown solver {other:?}"))),
        }
    }
}

/// Dense row-major cost matrix with nonnegative finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::InvalidArgument(format!(
                "{}x{} matrix needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                entries.len()
            )));
        }
        if entries.iter().any(|e| !e.is_finite() || *e < 0.0) {
            return Err(Error::InvalidArgument(
                "cost entries must be finite and nonnegative".into(),
            ));
        }
        Ok(CostMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidArgument("ragged cost matrix".into()));
        }
        CostMatrix::new(rows.len(), cols, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CostMatrix {
            rows,
            cols,
            entries: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.entries[r * self.cols + c]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    fn ensure_square(&self) -> Result<usize> {
        if self.rows != self.cols {
            return Err(Error::InvalidArgument(format!(
                "assignment needs a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(self.rows)
    }
}

/// A (partial) assignment of rows to columns with its total cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub row_to_col: Vec<Option<usize>>,
    pub total: f64,
}

/// Exact minimum-cost perfect assignment.
pub fn solve_hungarian(m: &CostMatrix) -> Result<Assignment> {
    let n = m.ensure_square()?;
    let mut h = Hungarian::default();
    let total = h.solve(n, &m.entries);
    Ok(Assignment {
        row_to_col: h.row_to_col[..n].iter().map(|&c| Some(c)).collect(),
        total,
    })
}

/// Reusable buffers for the O(n^3) shortest augmenting path method.
///
/// Rows are inserted in index order and the first column reaching the
/// minimum slack is taken, which makes the result deterministic.
#[derive(Debug, Default, Clone)]
pub(crate) struct Hungarian {
    u: Vec<f64>,
    v: Vec<f64>,
    col_owner: Vec<usize>,
    way: Vec<usize>,
    minv: Vec<f64>,
    used: Vec<bool>,
    pub(crate) row_to_col: Vec<usize>,
}

impl Hungarian {
    /// Solves the n x n row-major problem in `a`; returns the total cost.
    pub(crate) fn solve(&mut self, n: usize, a: &[f64]) -> f64 {
        self.solve_rect(n, n, a)
    }

    /// Assigns every row of the `rows x cols` problem (`rows <= cols`) to a
    /// distinct column; returns the total cost.
    pub(crate) fn solve_rect(&mut self, rows: usize, cols: usize, a: &[f64]) -> f64 {
        debug_assert!(rows <= cols);
        self.row_to_col.clear();
        if rows == 0 {
            return 0.0;
        }
        let (n, m) = (rows, cols);
        // 1-based internals: column 0 is the virtual start column.
        self.u.clear();
        self.u.resize(n + 1, 0.0);
        self.v.clear();
        self.v.resize(m + 1, 0.0);
        self.col_owner.clear();
        self.col_owner.resize(m + 1, 0);
        self.way.clear();
        self.way.resize(m + 1, 0);
        for i in 1..=n {
            self.col_owner[0] = i;
            let mut j0 = 0;
            self.minv.clear();
            self.minv.resize(m + 1, f64::INFINITY);
            self.used.clear();
            self.used.resize(m + 1, false);
            loop {
                self.used[j0] = true;
                let i0 = self.col_owner[j0];
                let row = &a[(i0 - 1) * m..i0 * m];
                let mut delta = f64::INFINITY;
                let mut j1 = 0;
                for j in 1..=m {
                    if self.used[j] {
                        continue;
                    }
                    let cur = row[j - 1] - self.u[i0] - self.v[j];
                    if cur < self.minv[j] {
                        self.minv[j] = cur;
                        self.way[j] = j0;
                    }
                    if self.minv[j] < delta {
                        delta = self.minv[j];
                        j1 = j;
                    }
                }
                for j in 0..=m {
                    if self.used[j] {
                        self.u[self.col_owner[j]] += delta;
                        self.v[j] -= delta;
                    } else {
                        self.minv[j] -= delta;
                    }
                }
                j0 = j1;
                if self.col_owner[j0] == 0 {
                    break;
                }
            }
            loop {
                let j1 = self.way[j0];
                self.col_owner[j0] = self.col_owner[j1];
                j0 = j1;
                if j0 == 0 {
                    break;
                }
            }
        }
        self.row_to_col.resize(n, 0);
        for j in 1..=m {
            if self.col_owner[j] != 0 {
                self.row_to_col[self.col_owner[j] - 1] = j - 1;
            }
        }
        self.row_to_col
            .iter()
            .enumerate()
            .map(|(r, &c)| a[r * m + c])
            .sum()
    }
}

/// Epsilon schedule for the auction solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuctionParams {
    pub eps_start: f64,
    pub eps_scaling: f64,
    pub eps_final: f64,
}

impl AuctionParams {
    /// Default schedule: start at a quarter of the largest finite entry,
    /// shrink by 4x per phase, and stop once `n * eps_final` is at most
    /// 1e-7 of the largest entry.
    pub fn for_matrix(m: &CostMatrix) -> Self {
        let max = m
            .entries
            .iter()
            .copied()
            .filter(|&e| e < LARGE)
            .fold(0.0, f64::max);
        let n = m.rows.max(1) as f64;
        let scale = if max > 0.0 { max } else { 1.0 };
        AuctionParams {
            eps_start: scale / 4.0,
            eps_scaling: 0.25,
            eps_final: 1e-7 * scale / n,
        }
    }
}

const AUCTION_BID_CAP: usize = 50_000_000;

/// Forward auction with epsilon scaling. The total is within
/// `n * eps_final` of the optimum. Unassigned rows bid in index order.
pub fn solve_auction(m: &CostMatrix, params: AuctionParams) -> Result<Assignment> {
    let n = m.ensure_square()?;
    let AuctionParams {
        eps_start,
        eps_scaling,
        eps_final,
    } = params;
    if !(eps_start > 0.0 && eps_final > 0.0 && eps_scaling > 0.0 && eps_scaling < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "bad auction schedule {params:?}"
        )));
    }
    if n == 0 {
        return Ok(Assignment {
            row_to_col: Vec::new(),
            total: 0.0,
        });
    }
    let feasible = |c: f64| c < LARGE;
    let (lo, hi) = m
        .entries
        .iter()
        .copied()
        .filter(|&c| feasible(c))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
            (lo.min(c), hi.max(c))
        });
    let spread = if hi >= lo { hi - lo } else { 0.0 };

    let mut price = vec![0.0f64; n];
    let mut owner: Vec<Option<usize>> = vec![None; n];
    let mut assigned: Vec<Option<usize>> = vec![None; n];
    let mut eps = eps_start.max(eps_final);
    let mut bids = 0usize;
    loop {
        owner.iter_mut().for_each(|o| *o = None);
        assigned.iter_mut().for_each(|a| *a = None);
        let mut queue: std::collections::VecDeque<usize> = (0..n).collect();
        while let Some(i) = queue.pop_front() {
            bids += 1;
            if bids > AUCTION_BID_CAP {
                return Err(Error::Solver(format!(
                    "auction did not converge within {AUCTION_BID_CAP} bids"
                )));
            }
            let row = &m.entries[i * n..(i + 1) * n];
            let mut best = f64::NEG_INFINITY;
            let mut second = f64::NEG_INFINITY;
            let mut best_j = usize::MAX;
            for (j, &c) in row.iter().enumerate() {
                if !feasible(c) {
                    continue;
                }
                let value = -c - price[j];
                if value > best {
                    second = best;
                    best = value;
                    best_j = j;
                } else if value > second {
                    second = value;
                }
            }
            if best_j == usize::MAX {
                return Err(Error::Solver(format!("row {i} has no feasible column")));
            }
            let increment = if second.is_finite() {
                best - second + eps
            } else {
                spread + eps
            };
            price[best_j] += increment;
            if let Some(prev) = owner[best_j].replace(i) {
                assigned[prev] = None;
                // keep index order among waiting bidders
                let pos = queue.partition_point(|&r| r < prev);
                queue.insert(pos, prev);
            }
            assigned[i] = Some(best_j);
        }
        if eps <= eps_final {
            break;
        }
        eps = (eps * eps_scaling).max(eps_final);
    }
    let total = assigned
        .iter()
        .enumerate()
        .map(|(r, c)| m.get(r, c.unwrap()))
        .sum();
    Ok(Assignment {
        row_to_col: assigned,
        total,
    })
}

/// Minimum cost partial injective mapping between `k1` left and `k2` right
/// items: unmatched left items pay `delete`, unmatched right items pay
/// `insert`, matched pairs pay `pair_costs`.
///
/// Solved through a square reduction of size `k1 + k2`: pair costs top-left,
/// deletions on the top-right diagonal, insertions on the bottom-left
/// diagonal, zeros bottom-right, and [`LARGE`] elsewhere.
pub fn solve_partial_mapping(
    pair_costs: &CostMatrix,
    delete: &[f64],
    insert: &[f64],
    solver: Solver,
) -> Result<Assignment> {
    let (k1, k2) = (pair_costs.rows, pair_costs.cols);
    if delete.len() != k1 || insert.len() != k2 {
        return Err(Error::InvalidArgument(
            "deletion/insertion cost vectors do not match the pair matrix".into(),
        ));
    }
    if delete.iter().chain(insert).any(|c| !c.is_finite() || *c < 0.0) {
        return Err(Error::InvalidArgument(
            "deletion/insertion costs must be finite and nonnegative".into(),
        ));
    }
    let mut mapper = PartialMapper::default();
    let total = mapper.solve_square_form(k1, k2, &pair_costs.entries, delete, insert, solver)?;
    Ok(Assignment {
        row_to_col: mapper.mapping[..k1].to_vec(),
        total,
    })
}

/// Partial mapping solver with reusable buffers, used on the engine's hot
/// path.
#[derive(Debug, Default, Clone)]
pub(crate) struct PartialMapper {
    square: Vec<f64>,
    hungarian: Hungarian,
    inserted: Vec<bool>,
    pub(crate) mapping: Vec<Option<usize>>,
}

impl PartialMapper {
    /// Engine entry point: the Hungarian solver runs on the compact
    /// rectangular form, the auction solver on the square reduction.
    pub(crate) fn solve(
        &mut self,
        k1: usize,
        k2: usize,
        pair: &[f64],
        delete: &[f64],
        insert: &[f64],
        solver: Solver,
    ) -> Result<f64> {
        self.run(k1, k2, pair, delete, insert, solver, solver == Solver::Hungarian)
    }

    /// Always uses the square reduction.
    pub(crate) fn solve_square_form(
        &mut self,
        k1: usize,
        k2: usize,
        pair: &[f64],
        delete: &[f64],
        insert: &[f64],
        solver: Solver,
    ) -> Result<f64> {
        self.run(k1, k2, pair, delete, insert, solver, false)
    }

    #[allow(clippy::too_many_arguments)]
    fn run(
        &mut self,
        k1: usize,
        k2: usize,
        pair: &[f64],
        delete: &[f64],
        insert: &[f64],
        solver: Solver,
        compact: bool,
    ) -> Result<f64> {
        self.mapping.clear();
        self.mapping.resize(k1, None);
        if k1 == 0 {
            return Ok(insert.iter().sum());
        }
        if k2 == 0 {
            return Ok(delete.iter().sum());
        }
        if k1 == 1 && k2 == 1 {
            let unmatched = delete[0] + insert[0];
            return Ok(if pair[0] <= unmatched {
                self.mapping[0] = Some(0);
                pair[0]
            } else {
                unmatched
            });
        }
        if compact {
            self.solve_compact(k1, k2, pair, delete, insert);
        } else {
            self.solve_square(k1, k2, pair, delete, insert, solver)?;
        }
        let mut total = 0.0;
        self.inserted.clear();
        self.inserted.resize(k2, true);
        for i in 0..k1 {
            match self.mapping[i] {
                Some(j) => {
                    total += pair[i * k2 + j];
                    self.inserted[j] = false;
                }
                None => total += delete[i],
            }
        }
        for (&open, &cost) in self.inserted.iter().zip(insert) {
            if open {
                total += cost;
            }
        }
        if total >= LARGE {
            return Err(Error::Solver("assignment used a forbidden cell".into()));
        }
        Ok(total)
    }

    /// Rectangular form: the smaller side's items are rows; columns are the
    /// other side's items, with pair costs reduced by that item's unmatched
    /// cost, followed by one private "unmatched" column per row.
    fn solve_compact(&mut self, k1: usize, k2: usize, pair: &[f64], delete: &[f64], insert: &[f64]) {
        let transposed = k1 > k2;
        let (rows, others) = if transposed { (k2, k1) } else { (k1, k2) };
        let (own, other_cost) = if transposed { (insert, delete) } else { (delete, insert) };
        let cols = others + rows;
        self.square.clear();
        self.square.resize(rows * cols, LARGE);
        for r in 0..rows {
            let row = &mut self.square[r * cols..(r + 1) * cols];
            for c in 0..others {
                let p = if transposed { pair[c * k2 + r] } else { pair[r * k2 + c] };
                row[c] = if p >= LARGE { LARGE } else { p - other_cost[c] };
            }
            row[others + r] = own[r];
        }
        self.hungarian.solve_rect(rows, cols, &self.square);
        for r in 0..rows {
            let c = self.hungarian.row_to_col[r];
            if c < others {
                if transposed {
                    self.mapping[c] = Some(r);
                } else {
                    self.mapping[r] = Some(c);
                }
            }
        }
    }

    /// Square reduction of size `k1 + k2`, see [`solve_partial_mapping`].
    fn solve_square(
        &mut self,
        k1: usize,
        k2: usize,
        pair: &[f64],
        delete: &[f64],
        insert: &[f64],
        solver: Solver,
    ) -> Result<()> {
        let n = k1 + k2;
        self.square.clear();
        self.square.resize(n * n, LARGE);
        for i in 0..k1 {
            let row = &mut self.square[i * n..(i + 1) * n];
            row[..k2].copy_from_slice(&pair[i * k2..(i + 1) * k2]);
            row[k2 + i] = delete[i];
        }
        for j in 0..k2 {
            let row = &mut self.square[(k1 + j) * n..(k1 + j + 1) * n];
            row[j] = insert[j];
            row[k2..].fill(0.0);
        }
        let (total, row_to_col) = match solver {
            Solver::Hungarian => {
                let total = self.hungarian.solve(n, &self.square);
                (total, self.hungarian.row_to_col.clone())
            }
            Solver::Auction => {
                let m = CostMatrix {
                    rows: n,
                    cols: n,
                    entries: std::mem::take(&mut self.square),
                };
                let a = solve_auction(&m, AuctionParams::for_matrix(&m));
                self.square = m.entries;
                let a = a?;
                (a.total, a.row_to_col.into_iter().map(|c| c.unwrap_or(usize::MAX)).collect())
            }
        };
        if total >= LARGE {
            return Err(Error::Solver("assignment used a forbidden cell".into()));
        }
        for (slot, &c) in self.mapping.iter_mut().zip(&row_to_col) {
            if c < k2 {
                *slot = Some(c);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> CostMatrix {
        CostMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn hungarian_two_by_two() {
        let a = solve_hungarian(&m(&[&[1.0, 2.0], &[3.0, 1.0]])).unwrap();
        assert_eq!(a.row_to_col, vec![Some(0), Some(1)]);
        assert_eq!(a.total, 2.0);
    }

    #[test]
    fn hungarian_trivial_sizes() {
        assert_eq!(solve_hungarian(&CostMatrix::zeros(4, 4)).unwrap().total, 0.0);
        assert_eq!(solve_hungarian(&m(&[&[7.0]])).unwrap().total, 7.0);
        assert_eq!(solve_hungarian(&CostMatrix::zeros(0, 0)).unwrap().total, 0.0);
        assert!(solve_hungarian(&CostMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn hungarian_prefers_lower_rows_on_ties() {
        let a = solve_hungarian(&CostMatrix::zeros(3, 3)).unwrap();
        let b = solve_hungarian(&CostMatrix::zeros(3, 3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn auction_matches_small_cases() {
        let mat = m(&[&[1.0, 2.0], &[3.0, 1.0]]);
        let p = AuctionParams {
            eps_start: 0.5,
            eps_scaling: 0.25,
            eps_final: 1e-6,
        };
        let a = solve_auction(&mat, p).unwrap();
        assert!((a.total - 2.0).abs() <= 2e-6);
        assert_eq!(solve_auction(&CostMatrix::zeros(3, 3), p).unwrap().total, 0.0);
    }

    #[test]
    fn auction_finds_permutation_structure() {
        let perm = [2usize, 0, 3, 1];
        let mut rows = vec![vec![10.0; 4]; 4];
        for (r, &c) in perm.iter().enumerate() {
            rows[r][c] = 0.0;
        }
        let mat = CostMatrix::from_rows(&rows).unwrap();
        let a = solve_auction(&mat, AuctionParams::for_matrix(&mat)).unwrap();
        assert_eq!(a.total, 0.0);
        assert_eq!(
            a.row_to_col,
            perm.iter().map(|&c| Some(c)).collect::<Vec<_>>()
        );
    }

    #[test]
    fn auction_rejects_bad_input() {
        let p = AuctionParams {
            eps_start: 1.0,
            eps_scaling: 1.5,
            eps_final: 1e-3,
        };
        assert!(solve_auction(&CostMatrix::zeros(2, 2), p).is_err());
        let ok = AuctionParams::for_matrix(&CostMatrix::zeros(2, 3));
        assert!(solve_auction(&CostMatrix::zeros(2, 3), ok).is_err());
    }

    #[test]
    fn partial_mapping_examples() {
        let one = |p: f64| CostMatrix::new(1, 1, vec![p]).unwrap();
        let a = solve_partial_mapping(&one(5.0), &[2.0], &[2.0], Solver::Hungarian).unwrap();
        assert_eq!((a.total, a.row_to_col.clone()), (4.0, vec![None]));
        let a = solve_partial_mapping(&one(1.0), &[2.0], &[2.0], Solver::Hungarian).unwrap();
        assert_eq!((a.total, a.row_to_col.clone()), (1.0, vec![Some(0)]));

        let pairs = m(&[&[1.0], &[4.0]]);
        for solver in [Solver::Hungarian, Solver::Auction] {
            let a = solve_partial_mapping(&pairs, &[3.0, 2.0], &[6.0], solver).unwrap();
            assert!((a.total - 3.0).abs() < 1e-6);
            assert_eq!(a.row_to_col, vec![Some(0), None]);
        }
    }

    #[test]
    fn partial_mapping_degenerate_sides() {
        let a = solve_partial_mapping(&CostMatrix::zeros(0, 2), &[], &[1.0, 2.0], Solver::Hungarian)
            .unwrap();
        assert_eq!(a.total, 3.0);
        let a = solve_partial_mapping(&CostMatrix::zeros(2, 0), &[1.5, 2.0], &[], Solver::Hungarian)
            .unwrap();
        assert_eq!(a.total, 3.5);
        assert!(solve_partial_mapping(&CostMatrix::zeros(2, 0), &[1.0], &[], Solver::Hungarian)
            .is_err());
    }

    #[test]
    fn compact_form_matches_square_form() {
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed % 1000) as f64 / 100.0
        };
        let mut mapper = PartialMapper::default();
        for k1 in 0..6 {
            for k2 in 0..6 {
                for _ in 0..30 {
                    let pair: Vec<f64> = (0..k1 * k2).map(|_| next()).collect();
                    let del: Vec<f64> = (0..k1).map(|_| next()).collect();
                    let ins: Vec<f64> = (0..k2).map(|_| next()).collect();
                    let a = mapper.solve(k1, k2, &pair, &del, &ins, Solver::Hungarian).unwrap();
                    let b = mapper.solve_square_form(k1, k2, &pair, &del, &ins, Solver::Hungarian).unwrap();
                    assert!((a - b).abs() < 1e-9, "k1={k1} k2={k2}: {a} vs {b}");
                }
            }
        }
    }
}
