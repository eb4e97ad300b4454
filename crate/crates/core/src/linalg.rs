//! Dense symmetric eigensolver for the small covariance matrices used by
//! the Saab transforms.

use alloc::vec;
use alloc::vec::Vec;

const MAX_SWEEPS: usize = 64;

/// Eigenpairs sorted by descending eigenvalue; `vectors[k]` pairs with
/// `values[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

/// Cyclic Jacobi rotation on a row-major `n`×`n` symmetric matrix.
///
/// Equal eigenvalues keep their input order, so a zero matrix yields the
/// canonical basis.
pub fn symmetric_eigen(matrix: &[f64], n: usize) -> SymmetricEigen {
    assert_eq!(matrix.len(), n * n);
    let mut a: Vec<f64> = matrix.to_vec();
    // symmetrise to guard against accumulation asymmetry
    for p in 0..n {
        for q in p + 1..n {
            let m = 0.5 * (a[p * n + q] + a[q * n + p]);
            a[p * n + q] = m;
            a[q * n + p] = m;
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>();
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off <= f64::EPSILON * f64::EPSILON * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if libm::fabs(theta) > 1e150 {
                    0.5 / theta
                } else {
                    let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sign / (libm::fabs(theta) + libm::sqrt(theta * theta + 1.0))
                };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
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

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));
    SymmetricEigen {
        values: order.iter().map(|&i| a[i * n + i]).collect(),
        vectors: order
            .iter()
            .map(|&i| (0..n).map(|k| v[k * n + i]).collect())
            .collect(),
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruct(e: &SymmetricEigen, n: usize) -> Vec<f64> {
        let mut m = vec![0.0; n * n];
        for (val, vec) in e.values.iter().zip(&e.vectors) {
            for i in 0..n {
                for j in 0..n {
                    m[i * n + j] += val * vec[i] * vec[j];
                }
            }
        }
        m
    }

    #[test]
    fn diagonalises_known_matrix() {
        let m = [4.0, 1.0, 0.5, 1.0, 3.0, 0.25, 0.5, 0.25, 2.0];
        let e = symmetric_eigen(&m, 3);
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        for (a, b) in reconstruct(&e, 3).iter().zip(&m) {
            assert!((a - b).abs() < 1e-12);
        }
        for i in 0..3 {
            for j in 0..3 {
                let d = dot(&e.vectors[i], &e.vectors[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((d - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_matrix_gives_identity() {
        let e = symmetric_eigen(&[0.0; 16], 4);
        assert_eq!(e.values, vec![0.0; 4]);
        for (k, v) in e.vectors.iter().enumerate() {
            for (i, &x) in v.iter().enumerate() {
                assert_eq!(x, if i == k { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn repeated_eigenvalues() {
        let e = symmetric_eigen(&[2.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 5.0], 3);
        assert_eq!(e.values, vec![5.0, 2.0, 2.0]);
    }
}
