//! Dense Hermitian eigensolvers (faer backend).

use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Pins the dense eigensolvers to one thread (`true`) or lets them use the
/// rayon pool (`false`). Blocked parallel reductions round differently for
/// different pool sizes, so reproducible batch runs pin them.
pub fn set_sequential(on: bool) {
    faer::set_global_parallelism(if on { faer::Par::Seq } else { faer::Par::rayon(0) });
}

/// Ascending eigenvalues with eigenvectors stored column-wise.
#[derive(Clone, Debug)]
pub struct Eigenpairs<T> {
    pub values: Vec<f64>,
    pub vectors: Mat<T>,
}

fn ascending_order(values: &[f64]) -> Option<Vec<usize>> {
    if values.windows(2).all(|w| w[0] <= w[1]) {
        return None;
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    Some(order)
}

/// Full spectrum of a complex Hermitian matrix (lower triangle is read).
pub fn hermitian_eigen(matrix: &Mat<C64>) -> Result<Eigenpairs<C64>> {
    if matrix.nrows() != matrix.ncols() {
        return Err(Error::Eigensolver(format!("non-square {}×{}", matrix.nrows(), matrix.ncols())));
    }
    let evd = matrix
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let s = evd.S();
    let diag = s.column_vector();
    let values: Vec<f64> = (0..matrix.nrows()).map(|i| diag[i].re).collect();
    let u = evd.U();
    Ok(match ascending_order(&values) {
        None => Eigenpairs { values, vectors: u.to_owned() },
        Some(order) => Eigenpairs {
            values: order.iter().map(|&i| values[i]).collect(),
            vectors: Mat::from_fn(u.nrows(), u.ncols(), |r, c| u[(r, order[c])]),
        },
    })
}

/// Full spectrum of a real symmetric matrix.
pub fn symmetric_eigen(matrix: &Mat<f64>) -> Result<Eigenpairs<f64>> {
    if matrix.nrows() != matrix.ncols() {
        return Err(Error::Eigensolver(format!("non-square {}×{}", matrix.nrows(), matrix.ncols())));
    }
    let evd = matrix
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let diag = evd.S().column_vector();
    let values: Vec<f64> = (0..matrix.nrows()).map(|i| diag[i]).collect();
    let u = evd.U();
    Ok(match ascending_order(&values) {
        None => Eigenpairs { values, vectors: u.to_owned() },
        Some(order) => Eigenpairs {
            values: order.iter().map(|&i| values[i]).collect(),
            vectors: Mat::from_fn(u.nrows(), u.ncols(), |r, c| u[(r, order[c])]),
        },
    })
}

/// Largest `|H_ij - conj(H_ji)|`.
pub fn hermiticity_defect(matrix: &Mat<C64>) -> f64 {
    let n = matrix.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..=i {
            worst = worst.max((matrix[(i, j)] - matrix[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Frobenius norm.
pub fn frobenius(matrix: &Mat<C64>) -> f64 {
    let mut s = 0.0;
    for j in 0..matrix.ncols() {
        for i in 0..matrix.nrows() {
            s += matrix[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

/// `‖H v - E v‖` for column `col` of `vectors`.
pub fn eigen_residual(matrix: &Mat<C64>, vectors: &Mat<C64>, col: usize, value: f64) -> f64 {
    let n = matrix.nrows();
    let mut s = 0.0;
    for i in 0..n {
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..n {
            acc += matrix[(i, j)] * vectors[(j, col)];
        }
        s += (acc - vectors[(i, col)] * value).norm_sqr();
    }
    s.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let m = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => C64::new(1.0, 0.0),
            (1, 1) => C64::new(-1.0, 0.0),
            (1, 0) => C64::new(0.0, 1.0),
            _ => C64::new(0.0, -1.0),
        });
        let e = hermitian_eigen(&m).unwrap();
        let r = 2f64.sqrt();
        assert!((e.values[0] + r).abs() < 1e-14 && (e.values[1] - r).abs() < 1e-14);
        for c in 0..2 {
            assert!(eigen_residual(&m, &e.vectors, c, e.values[c]) < 1e-13);
        }
        assert_eq!(hermiticity_defect(&m), 0.0);
    }

    #[test]
    fn symmetric_diagonal() {
        let m = Mat::from_fn(3, 3, |i, j| if i == j { [3.0, -1.0, 2.0][i] } else { 0.0 });
        let e = symmetric_eigen(&m).unwrap();
        assert_eq!(e.values, vec![-1.0, 2.0, 3.0]);
    }
}
