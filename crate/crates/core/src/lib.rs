//! Edit distances between merge trees.
//!
//! The crate computes the path mapping distance and its look-ahead extension,
//! a tunable family of distances that interpolates between the path mapping
//! distance (`lookahead = 0`) and the unconstrained deformation-based edit
//! distance (`lookahead >= depth`). Around the engine sit merge tree
//! construction from scalar grids, brute-force reference implementations,
//! and ensemble tooling (distance matrices, MDS, silhouette scores).
//!
//! ```
//! use mtdist::{delta, EngineOptions, MergeTree};
//!
//! let a = MergeTree::from_newick("(x:3,y:1):2;").unwrap();
//! let b = MergeTree::from_newick("x:5;").unwrap();
//! let d = delta(&a, &b, &EngineOptions::with_lookahead(0)).unwrap();
//! assert!((d - 1.0).abs() < 1e-12);
//! ```

pub mod assignment;
pub mod ensemble;
mod error;
pub mod lookahead;
pub mod mergetree;
pub mod oracle;
pub mod synth;

pub use assignment::{Assignment, CostMatrix, Solver};
pub use ensemble::{DistanceMatrix, Embedding};
pub use error::{Error, Result};
pub use lookahead::{delta, EngineOptions};
pub use mergetree::{MergeTree, NodeRecord, ScalarGrid, SubtreeRef};

/// Absolute tolerance used for floating point comparisons on tree labels.
pub const TOLERANCE: f64 = 1e-9;
