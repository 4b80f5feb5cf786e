use alloc::vec::Vec;

use num_traits::Zero;

use super::{c64, ComplexMatrix, ComplexVector};
use crate::error::{Error, Result};

/// `PA = LU` with partial pivoting, packed in one matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: ComplexMatrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn new(a: &ComplexMatrix) -> Result<Self> {
        let n = a.dim();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax <= f64::EPSILON * scale * 1e-3 {
                return Err(Error::NumericalFailure {
                    reason: "singular matrix in LU factorization".into(),
                    residual: pmax,
                });
            }
            lu.swap_rows(k, p);
            perm.swap(k, p);
            let piv = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / piv;
                lu[(i, k)] = f;
                if f.is_zero() {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve_vec(&self, b: &ComplexVector) -> ComplexVector {
        let n = self.lu.dim();
        let mut x: Vec<c64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.lu[(i, j)];
                x[i] = x[i] - l * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = self.lu[(i, j)];
                x[i] = x[i] - u * x[j];
            }
            x[i] /= self.lu[(i, i)];
        }
        ComplexVector::from_raw(x)
    }

    pub fn solve(&self, b: &ComplexMatrix) -> ComplexMatrix {
        let n = b.dim();
        let mut out = ComplexMatrix::zeros(n);
        for j in 0..n {
            let x = self.solve_vec(&b.column(j));
            for i in 0..n {
                out[(i, j)] = x[i];
            }
        }
        out
    }
}

pub fn solve(a: &ComplexMatrix, b: &ComplexVector) -> Result<ComplexVector> {
    if a.dim() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.len(),
        });
    }
    Ok(Lu::new(a)?.solve_vec(b))
}

pub fn inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(Lu::new(a)?.solve(&ComplexMatrix::identity(a.dim())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn inverse_of_known_matrix() {
        let a = ComplexMatrix::from_real_rows(&[vec![0.0, 2.0], vec![1.0, 1.0]]).unwrap();
        let inv = inverse(&a).unwrap();
        let id = &a * &inv;
        assert!((&id - &ComplexMatrix::identity(2)).max_abs() < 1e-15);
        assert!((inv[(0, 0)].re + 0.5).abs() < 1e-15);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = ComplexMatrix::from_real_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(Lu::new(&a), Err(Error::NumericalFailure { .. })));
    }
}
