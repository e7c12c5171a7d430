//! Small dense matrices for the per-node system solves (m ≤ 2 in practice).

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("singular matrix (pivot {pivot:.3e})")]
    Singular { pivot: f64 },
    #[error("eigenvalues only implemented for m <= 2, got m = {0}")]
    UnsupportedSize(usize),
    #[error("complex eigenvalues (discriminant {0:.3e})")]
    ComplexEigenvalues(f64),
}

/// Row-major `m x m` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    m: usize,
    a: Vec<f64>,
}

impl Mat {
    pub fn zeros(m: usize) -> Self {
        Self { m, a: vec![0.0; m * m] }
    }

    pub fn identity(m: usize) -> Self {
        let mut out = Self::zeros(m);
        for i in 0..m {
            out.set(i, i, 1.0);
        }
        out
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let m = rows.len();
        let mut a = Vec::with_capacity(m * m);
        for r in rows {
            assert_eq!(r.len(), m, "matrix must be square");
            a.extend_from_slice(r);
        }
        Self { m, a }
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.m + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.m + j] = v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let m = self.m;
        (0..m)
            .map(|i| (0..m).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    pub fn mul_mat(&self, other: &Mat) -> Mat {
        let m = self.m;
        let mut out = Mat::zeros(m);
        for i in 0..m {
            for j in 0..m {
                let mut s = 0.0;
                for k in 0..m {
                    s += self.get(i, k) * other.get(k, j);
                }
                out.set(i, j, s);
            }
        }
        out
    }

    pub fn scale(&self, c: f64) -> Mat {
        Mat { m: self.m, a: self.a.iter().map(|v| c * v).collect() }
    }

    pub fn add(&self, other: &Mat) -> Mat {
        Mat {
            m: self.m,
            a: self.a.iter().zip(&other.a).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        Mat {
            m: self.m,
            a: self.a.iter().zip(&other.a).map(|(x, y)| x - y).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Solve `A x = b` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let m = self.m;
        let mut a = self.a.clone();
        let mut x = b.to_vec();
        for col in 0..m {
            let mut piv = col;
            for r in col + 1..m {
                if a[r * m + col].abs() > a[piv * m + col].abs() {
                    piv = r;
                }
            }
            let p = a[piv * m + col];
            if p.abs() < 1e-300 {
                return Err(LinalgError::Singular { pivot: p });
            }
            if piv != col {
                for j in 0..m {
                    a.swap(col * m + j, piv * m + j);
                }
                x.swap(col, piv);
            }
            for r in col + 1..m {
                let factor = a[r * m + col] / a[col * m + col];
                if factor != 0.0 {
                    for j in col..m {
                        a[r * m + j] -= factor * a[col * m + j];
                    }
                    x[r] -= factor * x[col];
                }
            }
        }
        for col in (0..m).rev() {
            let mut s = x[col];
            for j in col + 1..m {
                s -= a[col * m + j] * x[j];
            }
            x[col] = s / a[col * m + col];
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<Mat, LinalgError> {
        let m = self.m;
        let mut out = Mat::zeros(m);
        for j in 0..m {
            let mut e = vec![0.0; m];
            e[j] = 1.0;
            let col = self.solve(&e)?;
            for i in 0..m {
                out.set(i, j, col[i]);
            }
        }
        Ok(out)
    }

    /// Real eigenvalues, closed form; m = 1 and m = 2 only.
    pub fn real_eigenvalues(&self) -> Result<Vec<f64>, LinalgError> {
        match self.m {
            1 => Ok(vec![self.get(0, 0)]),
            2 => {
                let tr = self.get(0, 0) + self.get(1, 1);
                let det = self.get(0, 0) * self.get(1, 1) - self.get(0, 1) * self.get(1, 0);
                let disc = tr * tr - 4.0 * det;
                if disc < -1e-12 * tr.abs().max(1.0) {
                    return Err(LinalgError::ComplexEigenvalues(disc));
                }
                let s = disc.max(0.0).sqrt();
                Ok(vec![(tr - s) / 2.0, (tr + s) / 2.0])
            }
            m => Err(LinalgError::UnsupportedSize(m)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_2x2() {
        let a = Mat::from_rows(&[&[2.0, 1.0], &[1.0, 3.0]]);
        let x = a.solve(&[5.0, 10.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14);
        assert!((x[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn inverse_roundtrip() {
        let a = Mat::from_rows(&[&[1.0, 1.0], &[0.9, -1.1]]);
        let inv = a.inverse().unwrap();
        let id = a.mul_mat(&inv);
        assert!(id.sub(&Mat::identity(2)).max_abs() < 1e-14);
    }

    #[test]
    fn eigenvalues_of_coupling_matrix() {
        // 0.5 * [[1.1, -0.9], [-0.9, 1.1]] has eigenvalues 0.1 and 1.
        let a = Mat::from_rows(&[&[0.55, -0.45], &[-0.45, 0.55]]);
        let ev = a.real_eigenvalues().unwrap();
        assert!((ev[0] - 0.1).abs() < 1e-14);
        assert!((ev[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn singular_rejected() {
        let a = Mat::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(matches!(a.solve(&[1.0, 1.0]), Err(LinalgError::Singular { .. })));
    }
}
