//! Distance matrices over tree ensembles and their analysis.

mod heatmap;
mod mds;
mod silhouette;

pub use heatmap::{export_heatmap, render_heatmap, Palette};
pub use mds::{classical_mds, Embedding};
pub use silhouette::{parse_labels, silhouette};

use rayon::prelude::*;

use crate::lookahead::{delta, EngineOptions};
use crate::{Error, MergeTree, Result};

/// Symmetric matrix of pairwise distances with member names.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
    names: Vec<String>,
}

impl DistanceMatrix {
    /// Checks shape, symmetry (1e-9), zero diagonal, finiteness and
    /// nonnegativity.
    pub fn new(names: Vec<String>, entries: Vec<f64>) -> Result<Self> {
        let n = names.len();
        if entries.len() != n * n {
            return Err(Error::InvalidArgument(format!(
                "{} entries do not form a {n}x{n} matrix",
                entries.len()
            )));
        }
        for i in 0..n {
            if entries[i * n + i] != 0.0 {
                return Err(Error::InvalidArgument(format!("diagonal entry {i} is not zero")));
            }
            for j in 0..n {
                let v = entries[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidArgument(format!("entry ({i}, {j}) = {v}")));
                }
                if (v - entries[j * n + i]).abs() > 1e-9 {
                    return Err(Error::InvalidArgument(format!("entries ({i}, {j}) and ({j}, {i}) differ")));
                }
            }
        }
        for name in &names {
            if name.contains([',', '\n', '\r', '"']) {
                return Err(Error::InvalidArgument(format!("member name {name:?} cannot be written to CSV")));
            }
        }
        Ok(DistanceMatrix { n, entries, names })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Header row of member names, then one row per member. Values use the
    /// shortest representation that parses back to the same number.
    pub fn to_csv(&self) -> String {
        let mut out = self.names.join(",");
        out.push('\n');
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| format!("{}", self.get(i, j))).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))?;
        let names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        let n = names.len();
        let mut entries = Vec::with_capacity(n * n);
        for (i, line) in lines.enumerate() {
            let row: Vec<&str> = line.split(',').collect();
            if row.len() != n {
                return Err(Error::Parse(format!("row {} has {} values, expected {n}", i + 1, row.len())));
            }
            for cell in row {
                let v: f64 = cell
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("row {}: bad number {cell:?}", i + 1)))?;
                entries.push(v);
            }
        }
        if entries.len() != n * n {
            return Err(Error::Parse(format!("expected {n} rows, found {}", entries.len() / n.max(1))));
        }
        DistanceMatrix::new(names, entries)
    }
}

/// Pairwise distances of `trees` on a pool of `workers` threads, one pair
/// per task. Results do not depend on the worker count.
pub fn compute_matrix(
    trees: &[MergeTree],
    names: &[String],
    opts: &EngineOptions,
    workers: usize,
) -> Result<DistanceMatrix> {
    if names.len() != trees.len() {
        return Err(Error::InvalidArgument("one name per tree is required".into()));
    }
    if workers == 0 {
        return Err(Error::InvalidArgument("at least one worker is required".into()));
    }
    for (t, name) in trees.iter().zip(names) {
        if !t.is_empty() {
            t.ensure_valid().map_err(|e| Error::Member {
                name: name.clone(),
                source: Box::new(e),
            })?;
        }
    }
    let n = trees.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    let values: Vec<f64> = pool.install(|| {
        pairs
            .par_iter()
            .map(|&(i, j)| delta(&trees[i], &trees[j], opts))
            .collect::<Result<Vec<f64>>>()
    })?;
    let mut entries = vec![0.0; n * n];
    for (&(i, j), &v) in pairs.iter().zip(&values) {
        entries[i * n + j] = v;
        entries[j * n + i] = v;
    }
    DistanceMatrix::new(names.to_vec(), entries)
}

/// Names `m0`, `m1`, ... for anonymous ensembles.
pub fn default_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("m{i}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let m = DistanceMatrix::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![0.0, 0.1 + 0.2, 7.0, 0.1 + 0.2, 0.0, 1e-17, 7.0, 1e-17, 0.0],
        )
        .unwrap();
        assert_eq!(DistanceMatrix::from_csv(&m.to_csv()).unwrap(), m);
        let one = DistanceMatrix::new(vec!["x".into()], vec![0.0]).unwrap();
        assert_eq!(one.to_csv(), "x\n0\n");
    }

    #[test]
    fn rejects_asymmetry() {
        let r = DistanceMatrix::new(vec!["a".into(), "b".into()], vec![0.0, 1.0, 2.0, 0.0]);
        assert!(r.is_err());
    }

    #[test]
    fn copies_give_zero_matrix() {
        let t = MergeTree::from_newick("((a:1,b:2):1,c:3):1;").unwrap();
        let trees = vec![t.clone(), t.clone(), t];
        let m = compute_matrix(&trees, &default_names(3), &EngineOptions::with_lookahead(1), 2).unwrap();
        assert!(m.entries().iter().all(|&v| v == 0.0));
        let single = compute_matrix(&trees[..1], &default_names(1), &EngineOptions::default(), 1).unwrap();
        assert_eq!(single.entries(), &[0.0]);
    }

    #[test]
    fn invalid_member_is_named() {
        let bad = MergeTree::from_parents(&[None, Some(0), Some(1)], &[0.0, 1.0, 1.0], None).unwrap();
        let good = MergeTree::from_newick("a:1;").unwrap();
        let err = compute_matrix(&[good, bad], &["ok".into(), "broken".into()], &EngineOptions::default(), 1)
            .unwrap_err();
        assert!(err.to_string().contains("broken"));
    }
}
