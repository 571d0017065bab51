//! Householder least squares on a small dense design matrix.

/// Diagonal entries of R below this (columns are scaled to unit norm
/// first) mark a column as lying in the span of the earlier ones.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum QrError {
    /// Column `column` is a combination of `dependent_on` (empty when the
    /// column is identically zero).
    Dependent { column: usize, dependent_on: Vec<usize> },
}

/// Minimizes `||A x - y||` where `cols` holds the columns of `A`.
///
/// Columns are equilibrated to unit 2-norm before factorization and the
/// solution is scaled back, so features of very different magnitudes
/// (raw counts next to logs) do not hide rank problems.
pub(crate) fn lstsq(cols: &[Vec<f64>], y: &[f64]) -> Result<Vec<f64>, QrError> {
    let p = cols.len();
    let n = y.len();
    debug_assert!(cols.iter().all(|c| c.len() == n));

    let mut scale = Vec::with_capacity(p);
    let mut a: Vec<Vec<f64>> = Vec::with_capacity(p);
    for (j, c) in cols.iter().enumerate() {
        let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(QrError::Dependent {
                column: j,
                dependent_on: Vec::new(),
            });
        }
        scale.push(norm);
        a.push(c.iter().map(|v| v / norm).collect());
    }
    let mut b = y.to_vec();

    for k in 0..p {
        let alpha = a[k][k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if alpha <= RANK_TOL || k >= n {
            return Err(QrError::Dependent {
                column: k,
                dependent_on: dependencies(&a, k),
            });
        }
        // v = x + sign(x0) |x| e0, stored in place of the column tail
        let sign = if a[k][k] >= 0.0 { 1.0 } else { -1.0 };
        let mut v: Vec<f64> = a[k][k..].to_vec();
        v[0] += sign * alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        let reflect = |col: &mut [f64]| {
            let dot: f64 = v.iter().zip(col.iter()).map(|(x, c)| x * c).sum();
            let f = 2.0 * dot / vnorm2;
            for (c, x) in col.iter_mut().zip(&v) {
                *c -= f * x;
            }
        };
        for col in a.iter_mut().skip(k + 1) {
            reflect(&mut col[k..]);
        }
        reflect(&mut b[k..]);
        a[k][k] = -sign * alpha;
        for x in a[k][k + 1..].iter_mut() {
            *x = 0.0;
        }
    }

    let mut x = vec![0.0; p];
    for k in (0..p).rev() {
        let s: f64 = (k + 1..p).map(|j| a[j][k] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    Ok(x.iter().zip(&scale).map(|(v, s)| v / s).collect())
}

/// Expresses column `k` through columns `0..k` using the triangular factor
/// built so far, and returns the columns with a non-negligible weight.
fn dependencies(a: &[Vec<f64>], k: usize) -> Vec<usize> {
    let mut c = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = (i + 1..k).map(|j| a[j][i] * c[j]).sum();
        c[i] = (a[k][i] - s) / a[i][i];
    }
    let big = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (0..k).filter(|&i| c[i].abs() > 1e-8 * big).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_square_system() {
        // x + y = 3, x - y = 1
        let cols = vec![vec![1.0, 1.0], vec![1.0, -1.0]];
        let x = lstsq(&cols, &[3.0, 1.0]).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn least_squares_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 2.0, 5.0];
        let cols = vec![vec![1.0; 4], xs.to_vec()];
        let sol = lstsq(&cols, &ys).unwrap();
        // closed form: slope = cov/var = 1.1, intercept = 2.75 - 1.1*1.5
        assert!((sol[1] - 1.1).abs() < 1e-12);
        assert!((sol[0] - 1.1).abs() < 1e-12);
    }

    #[test]
    fn detects_dependent_columns() {
        let c0 = vec![1.0; 5];
        let c1 = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let c2: Vec<f64> = c1.iter().map(|v| 2.0 * v - 3.0).collect();
        let err = lstsq(&[c0, c1, c2], &[0.0; 5]).unwrap_err();
        assert_eq!(
            err,
            QrError::Dependent {
                column: 2,
                dependent_on: vec![0, 1]
            }
        );
        let err = lstsq(&[vec![0.0; 3]], &[1.0; 3]).unwrap_err();
        assert!(matches!(err, QrError::Dependent { column: 0, .. }));
    }
}
