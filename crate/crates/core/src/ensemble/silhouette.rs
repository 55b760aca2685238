use super::DistanceMatrix;
use crate::{Error, Result};

/// Mean silhouette coefficient of a clustering under the matrix distances.
/// Members of singleton clusters contribute zero.
pub fn silhouette(m: &DistanceMatrix, labels: &[usize]) -> Result<f64> {
    let n = m.len();
    if labels.len() != n {
        return Err(Error::InvalidArgument(format!(
            "{} labels for {n} matrix members",
            labels.len()
        )));
    }
    let mut ids: Vec<usize> = labels.to_vec();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() < 2 {
        return Err(Error::InvalidArgument("silhouette needs at least two clusters".into()));
    }
    let k = ids.len();
    let slot = |l: usize| ids.binary_search(&l).unwrap();
    let sizes: Vec<usize> = (0..k).map(|c| labels.iter().filter(|&&l| slot(l) == c).count()).collect();
    let mut total = 0.0;
    for i in 0..n {
        let own = slot(labels[i]);
        if sizes[own] == 1 {
            continue;
        }
        let mut sums = vec![0.0; k];
        for j in 0..n {
            if j != i {
                sums[slot(labels[j])] += m.get(i, j);
            }
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    Ok(total / n as f64)
}

/// Reads cluster labels, one per line, either `label` or `name,label`.
/// Labels are arbitrary strings, numbered in order of first appearance.
pub fn parse_labels(text: &str) -> Result<Vec<usize>> {
    let mut seen: Vec<String> = Vec::new();
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let label = match line.split(',').collect::<Vec<_>>().as_slice() {
            [l] => l.trim(),
            [_, l] => l.trim(),
            _ => return Err(Error::Parse(format!("labels line {}: expected `label` or `name,label`", i + 1))),
        };
        let id = match seen.iter().position(|s| s == label) {
            Some(p) => p,
            None => {
                seen.push(label.to_string());
                seen.len() - 1
            }
        };
        out.push(id);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_rows(rows: &[&[f64]]) -> DistanceMatrix {
        let n = rows.len();
        DistanceMatrix::new(super::super::default_names(n), rows.concat()).unwrap()
    }

    #[test]
    fn separated_duplicates_score_one() {
        let m = from_rows(&[
            &[0.0, 0.0, 10.0, 10.0],
            &[0.0, 0.0, 10.0, 10.0],
            &[10.0, 10.0, 0.0, 0.0],
            &[10.0, 10.0, 0.0, 0.0],
        ]);
        assert_eq!(silhouette(&m, &[0, 0, 1, 1]).unwrap(), 1.0);
    }

    #[test]
    fn uniform_distances_score_zero() {
        let m = from_rows(&[&[0.0, 1.0, 1.0, 1.0], &[1.0, 0.0, 1.0, 1.0], &[1.0, 1.0, 0.0, 1.0], &[1.0, 1.0, 1.0, 0.0]]);
        assert_eq!(silhouette(&m, &[0, 0, 1, 1]).unwrap(), 0.0);
    }

    #[test]
    fn errors() {
        let m = from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert!(silhouette(&m, &[0, 0]).is_err());
        assert!(silhouette(&m, &[0]).is_err());
        assert_eq!(silhouette(&m, &[0, 1]).unwrap(), 0.0);
    }

    #[test]
    fn label_files() {
        assert_eq!(parse_labels("a\nb\na\n").unwrap(), vec![0, 1, 0]);
        assert_eq!(parse_labels("t1,x\nt2,y\n\nt3,y").unwrap(), vec![0, 1, 1]);
        assert!(parse_labels("a,b,c").is_err());
    }
}
