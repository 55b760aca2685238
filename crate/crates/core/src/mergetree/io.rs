use serde::{Deserialize, Serialize};

use super::{MergeTree, ScalarGrid};
use crate::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct TreeDoc {
    root: usize,
    nodes: Vec<NodeDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct NodeDoc {
    id: usize,
    parent: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scalar: Option<f64>,
}

/// Reads a tree document (JSON) and validates it.
///
/// Lengths may be omitted when every node carries a scalar; they are then
/// derived as child scalar minus parent scalar.
pub fn parse_tree(text: &str) -> Result<MergeTree> {
    let doc: TreeDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let n = doc.nodes.len();
    let mut slots: Vec<Option<&NodeDoc>> = vec![None; n];
    for node in &doc.nodes {
        if node.id >= n {
            return Err(Error::Parse(format!(
                "node id {} out of range 0..{}",
                node.id, n
            )));
        }
        if slots[node.id].replace(node).is_some() {
            return Err(Error::Parse(format!("duplicate node id {}", node.id)));
        }
    }
    let nodes: Vec<&NodeDoc> = slots.into_iter().map(|s| s.unwrap()).collect();
    if doc.root >= n || nodes[doc.root].parent.is_some() {
        return Err(Error::Parse(format!(
            "root {} is not a parentless node",
            doc.root
        )));
    }
    let all_lengths = nodes
        .iter()
        .all(|nd| nd.parent.is_none() || nd.length.is_some());
    let all_scalars = nodes.iter().all(|nd| nd.scalar.is_some());
    if !all_lengths && !all_scalars {
        return Err(Error::Parse(
            "need \"length\" on every non-root node or \"scalar\" on every node".into(),
        ));
    }
    let parents: Vec<Option<usize>> = nodes.iter().map(|nd| nd.parent).collect();
    let mut lengths = vec![0.0; n];
    for (i, nd) in nodes.iter().enumerate() {
        let Some(p) = nd.parent else { continue };
        let len = match nd.length {
            Some(l) => l,
            None => {
                if p >= n {
                    return Err(Error::Parse(format!("node {i}: parent {p} out of range")));
                }
                nd.scalar.unwrap() - nodes[p].scalar.unwrap()
            }
        };
        if !len.is_finite() || len <= 0.0 {
            return Err(Error::Parse(format!(
                "node {i}: edge length {len} is not positive"
            )));
        }
        lengths[i] = len;
    }
    let scalars: Option<Vec<f64>> = nodes.iter().map(|nd| nd.scalar).collect();
    let tree = MergeTree::from_parents(&parents, &lengths, scalars.as_deref())?;
    tree.ensure_valid()?;
    Ok(tree)
}

/// Writes the tree document. Node ids are the tree's node indices.
pub fn serialize_tree(tree: &MergeTree) -> String {
    let doc = TreeDoc {
        root: tree.root(),
        nodes: tree
            .nodes()
            .iter()
            .enumerate()
            .map(|(id, n)| NodeDoc {
                id,
                parent: n.parent,
                length: n.parent.map(|_| n.length),
                scalar: n.scalar,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("tree document serializes");
    s.push('\n');
    s
}

/// Reads a grid document: either a `<width> <height>` header followed by
/// whitespace separated row-major values, or CSV with one row per grid row.
pub fn parse_grid(text: &str) -> Result<ScalarGrid> {
    let first = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .ok_or_else(|| Error::Parse("empty grid document".into()))?;
    if first.contains(',') {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|c| {
                    c.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("line {}: {e}", ln + 1)))
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        let width = rows[0].len();
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::Parse("CSV grid rows differ in length".into()));
        }
        let height = rows.len();
        return ScalarGrid::new(width, height, rows.into_iter().flatten().collect());
    }
    let mut tokens = text.split_whitespace();
    let mut dim = |what: &str| -> Result<usize> {
        tokens
            .next()
            .ok_or_else(|| Error::Parse(format!("missing grid {what}")))?
            .parse::<usize>()
            .map_err(|e| Error::Parse(format!("grid {what}: {e}")))
    };
    let width = dim("width")?;
    let height = dim("height")?;
    let values = tokens
        .map(|t| {
            t.parse::<f64>()
                .map_err(|e| Error::Parse(format!("grid value {t:?}: {e}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    ScalarGrid::new(width, height, values)
}

pub(super) fn parse_newick(text: &str) -> Result<MergeTree> {
    struct P<'a> {
        s: &'a [u8],
        i: usize,
        parents: Vec<Option<usize>>,
        lengths: Vec<f64>,
    }
    impl P<'_> {
        fn skip_ws(&mut self) {
            while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
                self.i += 1;
            }
        }
        fn peek(&mut self) -> Option<u8> {
            self.skip_ws();
            self.s.get(self.i).copied()
        }
        fn clause(&mut self, parent: usize) -> Result<()> {
            let id = self.parents.len();
            self.parents.push(Some(parent));
            self.lengths.push(0.0);
            if self.peek() == Some(b'(') {
                self.i += 1;
                loop {
                    self.clause(id)?;
                    match self.peek() {
                        Some(b',') => self.i += 1,
                        Some(b')') => {
                            self.i += 1;
                            break;
                        }
                        other => {
                            return Err(Error::Parse(format!(
                                "newick: unexpected {:?} at {}",
                                other.map(char::from),
                                self.i
                            )))
                        }
                    }
                }
            }
            while self.i < self.s.len() && !b":,();".contains(&self.s[self.i]) {
                self.i += 1;
            }
            if self.peek() != Some(b':') {
                return Err(Error::Parse(format!("newick: missing length at {}", self.i)));
            }
            self.i += 1;
            let start = self.i;
            while self.i < self.s.len() && !b",();".contains(&self.s[self.i]) {
                self.i += 1;
            }
            let raw = std::str::from_utf8(&self.s[start..self.i]).unwrap().trim();
            self.lengths[id] = raw
                .parse()
                .map_err(|e| Error::Parse(format!("newick length {raw:?}: {e}")))?;
            Ok(())
        }
    }
    let mut p = P {
        s: text.as_bytes(),
        i: 0,
        parents: vec![None],
        lengths: vec![0.0],
    };
    p.clause(0)?;
    if p.peek() == Some(b';') {
        p.i += 1;
    }
    if p.peek().is_some() {
        return Err(Error::Parse(format!("newick: trailing input at {}", p.i)));
    }
    MergeTree::from_parents(&p.parents, &p.lengths, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = r#"{
  "root": 0,
  "nodes": [
    {"id": 0, "parent": null, "scalar": 0.0},
    {"id": 1, "parent": 0, "scalar": 2.0},
    {"id": 2, "parent": 1, "scalar": 5.0},
    {"id": 3, "parent": 1, "scalar": 6.0}
  ]
}"#;

    #[test]
    fn lengths_derive_from_scalars() {
        let t = parse_tree(FIXTURE).unwrap();
        assert_eq!(t.length(1), 2.0);
        assert_eq!(t.length(2), 3.0);
        assert_eq!(t.length(3), 4.0);
    }

    #[test]
    fn round_trip() {
        let t = parse_tree(FIXTURE).unwrap();
        let text = serialize_tree(&t);
        let back = parse_tree(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(serialize_tree(&back), text);
    }

    #[test]
    fn negative_length_names_node() {
        let doc = r#"{"root":0,"nodes":[{"id":0,"parent":null},{"id":1,"parent":0,"length":-2}]}"#;
        let err = parse_tree(doc).unwrap_err().to_string();
        assert!(err.contains("node 1"), "{err}");
    }

    #[test]
    fn malformed_documents() {
        assert!(parse_tree("{").is_err());
        assert!(parse_tree(r#"{"root":0,"nodes":[{"id":0,"parent":null},{"id":3,"parent":0,"length":1}]}"#).is_err());
        assert!(parse_tree(r#"{"root":0,"nodes":[{"id":0,"parent":null},{"id":1,"parent":0}]}"#).is_err());
        // root with two children parses structurally but fails validation
        let e = parse_tree(r#"{"root":0,"nodes":[{"id":0,"parent":null},{"id":1,"parent":0,"length":1},{"id":2,"parent":0,"length":1}]}"#);
        assert!(matches!(e, Err(Error::InvalidTree(_))));
    }

    #[test]
    fn grid_formats() {
        let g = parse_grid("5 1\n0 5 2 6 1\n").unwrap();
        assert_eq!((g.width(), g.height()), (5, 1));
        assert_eq!(g.values(), &[0.0, 5.0, 2.0, 6.0, 1.0]);
        let c = parse_grid("1,2\n3,4\n").unwrap();
        assert_eq!((c.width(), c.height()), (2, 2));
        assert_eq!(c.values(), &[1.0, 2.0, 3.0, 4.0]);
        assert!(parse_grid("2 2\n1 2 3\n").is_err());
        assert!(parse_grid("1,2\n3\n").is_err());
    }

    #[test]
    fn newick_shapes() {
        let t = parse_newick("((a:1,b:2):3,c:4):5;").unwrap();
        assert_eq!(t.len(), 6);
        assert!(t.is_valid());
        assert_eq!(t.total_weight(), 15.0);
        let again = parse_newick(&t.to_newick()).unwrap();
        assert_eq!(again, t);
        assert!(parse_newick("(a:1,b:2").is_err());
    }
}
