use super::DistanceMatrix;
use crate::{Error, Result};

/// Low-dimensional coordinates for the members of a distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub names: Vec<String>,
    /// Row-major `n x dims`.
    pub coords: Vec<f64>,
    pub dims: usize,
    /// Kruskal stress-1 of the embedding against the input distances.
    pub stress: f64,
}

impl Embedding {
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dims..(i + 1) * self.dims]
    }

    /// `name,x1,x2,...` rows after a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name");
        for k in 0..self.dims {
            out.push_str(&format!(",x{}", k + 1));
        }
        out.push('\n');
        for (i, name) in self.names.iter().enumerate() {
            out.push_str(name);
            for v in self.point(i) {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

const JACOBI_TOLERANCE: f64 = 1e-12;
const JACOBI_SWEEPS: usize = 100;

/// Eigenvalues and column eigenvectors of a symmetric matrix by cyclic
/// Jacobi rotations.
fn jacobi(mut a: Vec<f64>, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let norm: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = JACOBI_TOLERANCE * norm.max(1.0);
    for _ in 0..JACOBI_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i * n + i]).collect(), v)
}

/// Classical (Torgerson) multidimensional scaling into `dims` dimensions.
///
/// Negative eigenvalues of the double-centred matrix are clamped to zero.
/// Each axis is oriented so that its first nonzero coordinate is positive.
pub fn classical_mds(m: &DistanceMatrix, dims: usize) -> Result<Embedding> {
    let n = m.len();
    if dims > n {
        return Err(Error::InvalidArgument(format!("cannot embed {n} points in {dims} dimensions")));
    }
    let mut b = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            b[i * n + j] = m.get(i, j) * m.get(i, j);
        }
    }
    let row_mean: Vec<f64> = (0..n).map(|i| (0..n).map(|j| b[i * n + j]).sum::<f64>() / n as f64).collect();
    let all_mean = row_mean.iter().sum::<f64>() / n.max(1) as f64;
    for i in 0..n {
        for j in 0..n {
            b[i * n + j] = -0.5 * (b[i * n + j] - row_mean[i] - row_mean[j] + all_mean);
        }
    }
    let (values, vectors) = jacobi(b, n);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| values[y].total_cmp(&values[x]).then(x.cmp(&y)));
    let mut coords = vec![0.0; n * dims];
    for (k, &e) in order.iter().take(dims).enumerate() {
        let scale = values[e].max(0.0).sqrt();
        let column: Vec<f64> = (0..n).map(|i| vectors[i * n + e] * scale).collect();
        let flip = column.iter().find(|x| x.abs() > 1e-12).is_some_and(|&x| x < 0.0);
        for i in 0..n {
            let x = if flip { -column[i] } else { column[i] };
            coords[i * dims + k] = if x == 0.0 { 0.0 } else { x };
        }
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let d: f64 = (0..dims)
                .map(|k| (coords[i * dims + k] - coords[j * dims + k]).powi(2))
                .sum::<f64>()
                .sqrt();
            num += (m.get(i, j) - d).powi(2);
            den += m.get(i, j).powi(2);
        }
    }
    Ok(Embedding {
        names: m.names().to_vec(),
        coords,
        dims,
        stress: if den > 0.0 { (num / den).sqrt() } else { 0.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(n: usize, d: impl Fn(usize, usize) -> f64) -> DistanceMatrix {
        let mut e = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    e[i * n + j] = d(i.min(j), i.max(j));
                }
            }
        }
        DistanceMatrix::new(super::super::default_names(n), e).unwrap()
    }

    #[test]
    fn equilateral_triangle() {
        let m = matrix(3, |_, _| 1.0);
        let e = classical_mds(&m, 2).unwrap();
        for i in 0..3 {
            for j in i + 1..3 {
                let (a, b) = (e.point(i), e.point(j));
                let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
                assert!((d - 1.0).abs() < 1e-6);
            }
        }
        assert!(e.stress < 1e-6);
    }

    #[test]
    fn zero_matrix_embeds_at_origin() {
        let e = classical_mds(&matrix(4, |_, _| 0.0), 2).unwrap();
        assert!(e.coords.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn rejects_too_many_dims() {
        assert!(classical_mds(&matrix(2, |_, _| 1.0), 3).is_err());
    }

    #[test]
    fn axes_start_positive() {
        let pts = [(0.0, 0.0), (3.0, 1.0), (-1.0, 2.0), (4.0, -2.0)];
        let m = matrix(4, |i, j| {
            let (a, b): ((f64, f64), (f64, f64)) = (pts[i], pts[j]);
            ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
        });
        let e = classical_mds(&m, 2).unwrap();
        for k in 0..2 {
            let first = (0..4).map(|i| e.point(i)[k]).find(|x| x.abs() > 1e-12).unwrap();
            assert!(first > 0.0);
        }
    }
}
