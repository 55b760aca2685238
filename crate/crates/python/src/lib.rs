use pyo3::create_exception;
use pyo3::exceptions::{PyIndexError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use mtdist::mergetree::{self, Connectivity, Threshold};
use mtdist::{ensemble, oracle, synth, EngineOptions, Error, Solver};

create_exception!(pymtdist, BudgetExceeded, PyRuntimeError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::BudgetExceeded(_) => BudgetExceeded::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn threshold(value: f64, relative: bool) -> Threshold {
    if relative {
        Threshold::Relative(value)
    } else {
        Threshold::Absolute(value)
    }
}

/// A rooted merge tree with positive edge lengths and optional node scalars.
#[pyclass(name = "MergeTree", module = "pymtdist", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyMergeTree {
    inner: mtdist::MergeTree,
}

#[pymethods]
impl PyMergeTree {
    /// Builds and validates a tree from parent indices (None for the root),
    /// edge lengths (the root's entry is ignored) and optional scalars.
    #[new]
    #[pyo3(signature = (parents, lengths, scalars=None))]
    fn new(parents: Vec<Option<usize>>, lengths: Vec<f64>, scalars: Option<Vec<f64>>) -> PyResult<Self> {
        let inner = mtdist::MergeTree::from_parents(&parents, &lengths, scalars.as_deref()).map_err(to_py)?;
        inner.ensure_valid().map_err(to_py)?;
        Ok(PyMergeTree { inner })
    }

    #[staticmethod]
    fn from_newick(text: &str) -> PyResult<Self> {
        Ok(PyMergeTree {
            inner: mtdist::MergeTree::from_newick(text).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyMergeTree {
            inner: mergetree::parse_tree(text).map_err(to_py)?,
        })
    }

    fn to_json(&self) -> String {
        mergetree::serialize_tree(&self.inner)
    }

    fn to_newick(&self) -> String {
        self.inner.to_newick()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("MergeTree({:?})", self.inner.to_newick())
    }

    #[getter]
    fn root(&self) -> usize {
        self.inner.root()
    }

    fn parents(&self) -> Vec<Option<usize>> {
        (0..self.inner.len()).map(|v| self.inner.parent(v)).collect()
    }

    fn lengths(&self) -> Vec<f64> {
        (0..self.inner.len()).map(|v| self.inner.length(v)).collect()
    }

    fn scalars(&self) -> Option<Vec<f64>> {
        (0..self.inner.len()).map(|v| self.inner.scalar(v)).collect()
    }

    fn children(&self, v: usize) -> PyResult<Vec<usize>> {
        if v >= self.inner.len() {
            return Err(PyIndexError::new_err(format!("node {v} out of range")));
        }
        Ok(self.inner.children(v).to_vec())
    }

    fn leaves(&self) -> Vec<usize> {
        self.inner.leaves()
    }

    fn max_depth(&self) -> usize {
        self.inner.max_depth()
    }

    fn total_weight(&self) -> f64 {
        self.inner.total_weight()
    }

    fn is_valid(&self) -> bool {
        self.inner.is_valid()
    }

    /// Removes branches whose persistence is below the threshold.
    #[pyo3(signature = (threshold_value, relative=false))]
    fn simplify(&self, threshold_value: f64, relative: bool) -> PyResult<Self> {
        let inner = mergetree::simplify_persistence(&self.inner, threshold(threshold_value, relative)).map_err(to_py)?;
        Ok(PyMergeTree { inner })
    }

    /// Contracts inner edges shorter than `eps`.
    #[pyo3(signature = (eps, relative=false))]
    fn epsilon_preprocess(&self, eps: f64, relative: bool) -> PyResult<Self> {
        let inner = mergetree::epsilon_preprocess(&self.inner, threshold(eps, relative)).map_err(to_py)?;
        Ok(PyMergeTree { inner })
    }
}

/// Symmetric distance matrix with member names.
#[pyclass(name = "DistanceMatrix", module = "pymtdist", frozen)]
pub struct PyDistanceMatrix {
    inner: mtdist::DistanceMatrix,
}

#[pymethods]
impl PyDistanceMatrix {
    #[new]
    fn new(names: Vec<String>, rows: Vec<Vec<f64>>) -> PyResult<Self> {
        if rows.len() != names.len() || rows.iter().any(|r| r.len() != names.len()) {
            return Err(PyValueError::new_err("rows must form a square matrix matching the names"));
        }
        let inner = mtdist::DistanceMatrix::new(names, rows.concat()).map_err(to_py)?;
        Ok(PyDistanceMatrix { inner })
    }

    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        Ok(PyDistanceMatrix {
            inner: mtdist::DistanceMatrix::from_csv(text).map_err(to_py)?,
        })
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    #[getter]
    fn names(&self) -> Vec<String> {
        self.inner.names().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn get(&self, i: usize, j: usize) -> PyResult<f64> {
        let n = self.inner.len();
        if i >= n || j >= n {
            return Err(PyIndexError::new_err(format!("({i}, {j}) outside a {n}x{n} matrix")));
        }
        Ok(self.inner.get(i, j))
    }

    fn to_list(&self) -> Vec<Vec<f64>> {
        let n = self.inner.len();
        (0..n).map(|i| (0..n).map(|j| self.inner.get(i, j)).collect()).collect()
    }

    /// Writes a heatmap image (.png or .ppm).
    #[pyo3(signature = (path, palette="viridis", cell=8))]
    fn export_heatmap(&self, path: std::path::PathBuf, palette: &str, cell: u32) -> PyResult<()> {
        let palette: ensemble::Palette = palette.parse().map_err(to_py)?;
        ensemble::export_heatmap(&self.inner, &path, palette, cell).map_err(to_py)
    }
}

fn engine_options(
    lookahead: usize,
    solver: &str,
    leaf_drop: bool,
    memoize_collapse: bool,
    upper_bound_prune: bool,
) -> PyResult<EngineOptions> {
    let solver: Solver = solver.parse().map_err(to_py)?;
    Ok(EngineOptions {
        lookahead,
        solver,
        leaf_drop,
        memoize_collapse,
        upper_bound_prune,
    })
}

/// Path mapping distance with look-ahead `lookahead` (0 gives the plain path
/// mapping distance).
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (a, b, lookahead=0, solver="hungarian", leaf_drop=true, memoize_collapse=true, upper_bound_prune=true))]
fn delta(
    py: Python<'_>,
    a: &PyMergeTree,
    b: &PyMergeTree,
    lookahead: usize,
    solver: &str,
    leaf_drop: bool,
    memoize_collapse: bool,
    upper_bound_prune: bool,
) -> PyResult<f64> {
    let opts = engine_options(lookahead, solver, leaf_drop, memoize_collapse, upper_bound_prune)?;
    let (a, b) = (&a.inner, &b.inner);
    py.detach(|| mtdist::delta(a, b, &opts)).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (trees, names=None, lookahead=0, solver="hungarian", workers=1))]
fn compute_matrix(
    py: Python<'_>,
    trees: Vec<PyRef<'_, PyMergeTree>>,
    names: Option<Vec<String>>,
    lookahead: usize,
    solver: &str,
    workers: usize,
) -> PyResult<PyDistanceMatrix> {
    let opts = engine_options(lookahead, solver, true, true, true)?;
    let trees: Vec<mtdist::MergeTree> = trees.iter().map(|t| t.inner.clone()).collect();
    let names = names.unwrap_or_else(|| ensemble::default_names(trees.len()));
    let inner = py
        .detach(|| ensemble::compute_matrix(&trees, &names, &opts, workers))
        .map_err(to_py)?;
    Ok(PyDistanceMatrix { inner })
}

/// Classical MDS; returns (coordinates, stress).
#[pyfunction]
#[pyo3(signature = (matrix, dims=2))]
fn classical_mds(matrix: &PyDistanceMatrix, dims: usize) -> PyResult<(Vec<Vec<f64>>, f64)> {
    let e = ensemble::classical_mds(&matrix.inner, dims).map_err(to_py)?;
    let coords = (0..matrix.inner.len()).map(|i| e.point(i).to_vec()).collect();
    Ok((coords, e.stress))
}

#[pyfunction]
fn silhouette(matrix: &PyDistanceMatrix, labels: Vec<usize>) -> PyResult<f64> {
    ensemble::silhouette(&matrix.inner, &labels).map_err(to_py)
}

/// Split tree of a row-major grid of scalar values.
#[pyfunction]
#[pyo3(signature = (rows, connectivity=4))]
fn build_split_tree(rows: Vec<Vec<f64>>, connectivity: u8) -> PyResult<PyMergeTree> {
    let conn = match connectivity {
        4 => Connectivity::Four,
        8 => Connectivity::Eight,
        c => return Err(PyValueError::new_err(format!("connectivity must be 4 or 8, got {c}"))),
    };
    let width = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != width) {
        return Err(PyValueError::new_err("grid rows differ in length"));
    }
    let grid = mtdist::ScalarGrid::new(width, rows.len(), rows.concat()).map_err(to_py)?;
    Ok(PyMergeTree {
        inner: mergetree::build_split_tree(&grid, conn).map_err(to_py)?,
    })
}

/// Unconstrained edit distance by exhaustive search over contractions.
#[pyfunction]
#[pyo3(signature = (a, b, time_cap_secs=60.0))]
fn brute_delta_e(py: Python<'_>, a: &PyMergeTree, b: &PyMergeTree, time_cap_secs: f64) -> PyResult<f64> {
    if !time_cap_secs.is_finite() || time_cap_secs <= 0.0 {
        return Err(PyValueError::new_err("time_cap_secs must be positive"));
    }
    let budget = oracle::OracleBudget {
        time_cap: std::time::Duration::from_secs_f64(time_cap_secs),
        ..oracle::OracleBudget::default()
    };
    let (a, b) = (&a.inner, &b.inner);
    py.detach(|| oracle::brute_delta_e(a, b, &budget)).map_err(to_py)
}

/// Seeded ensemble of perturbed copies of random base trees; returns the
/// trees and the base tree index of each.
#[pyfunction]
#[pyo3(signature = (members, swaps=1, seed=0, jitter=0.05, nodes=9, clusters=1))]
fn synth_ensemble(
    members: usize,
    swaps: usize,
    seed: u64,
    jitter: f64,
    nodes: usize,
    clusters: usize,
) -> PyResult<(Vec<PyMergeTree>, Vec<usize>)> {
    if nodes < 2 || !(0.0..1.0).contains(&jitter) {
        return Err(PyValueError::new_err("need nodes >= 2 and 0 <= jitter < 1"));
    }
    let params = synth::EnsembleParams {
        members,
        swaps,
        jitter,
        seed,
        base: synth::TreeParams {
            nodes,
            max_depth: nodes,
            ..synth::EnsembleParams::default().base
        },
    };
    let (trees, labels) = synth::clustered_ensemble(clusters, &params);
    Ok((trees.into_iter().map(|inner| PyMergeTree { inner }).collect(), labels))
}

#[pymodule]
fn pymtdist(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMergeTree>()?;
    m.add_class::<PyDistanceMatrix>()?;
    m.add_function(wrap_pyfunction!(delta, m)?)?;
    m.add_function(wrap_pyfunction!(compute_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(classical_mds, m)?)?;
    m.add_function(wrap_pyfunction!(silhouette, m)?)?;
    m.add_function(wrap_pyfunction!(build_split_tree, m)?)?;
    m.add_function(wrap_pyfunction!(brute_delta_e, m)?)?;
    m.add_function(wrap_pyfunction!(synth_ensemble, m)?)?;
    m.add("BudgetExceeded", m.py().get_type::<BudgetExceeded>())?;
    Ok(())
}
