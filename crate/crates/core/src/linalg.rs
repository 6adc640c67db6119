//! Dense linear algebra helpers: exact rational elimination and the
//! floating-point generalized symmetric eigen-solver.

use nalgebra::{DMatrix, SymmetricEigen};
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

/// Square matrix stored row-major.
pub type RatMatrix = Vec<Vec<BigRational>>;

/// Indices of a maximal linearly independent subset of the columns of a
/// symmetric positive semidefinite Gram matrix, chosen greedily in order.
pub fn independent_columns(gram: &RatMatrix) -> Vec<usize> {
    let n = gram.len();
    let mut a = gram.clone();
    let mut chosen = Vec::new();
    for j in 0..n {
        if a[j][j].is_zero() {
            // PSD: zero diagonal forces a zero row in the Schur complement
            continue;
        }
        chosen.push(j);
        let piv = a[j][j].clone();
        for i in j + 1..n {
            if a[i][j].is_zero() {
                continue;
            }
            let f = &a[i][j] / &piv;
            for k in j + 1..n {
                let t = &f * &a[j][k];
                a[i][k] -= t;
            }
        }
    }
    chosen
}

pub fn submatrix(m: &RatMatrix, idx: &[usize]) -> RatMatrix {
    idx.iter()
        .map(|&i| idx.iter().map(|&j| m[i][j].clone()).collect())
        .collect()
}

/// Exact determinant by fraction Gaussian elimination with pivoting.
pub fn determinant(m: &RatMatrix) -> BigRational {
    let n = m.len();
    let mut a = m.clone();
    let mut det = BigRational::from_integer(1.into());
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !a[r][c].is_zero()) else {
            return BigRational::zero();
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        let piv = a[c][c].clone();
        det *= &piv;
        for r in c + 1..n {
            if a[r][c].is_zero() {
                continue;
            }
            let f = &a[r][c] / &piv;
            for k in c..n {
                let t = &f * &a[c][k];
                a[r][k] -= t;
            }
        }
    }
    det
}

/// Solve `m x = b` exactly; `m` must be nonsingular.
pub fn solve(m: &RatMatrix, b: &[BigRational]) -> Result<Vec<BigRational>> {
    let lu = ExactLu::new(m)?;
    Ok(lu.solve(b))
}

/// Exact LU factorisation with partial pivoting, reusable across right-hand sides.
#[derive(Debug, Clone)]
pub struct ExactLu {
    lu: RatMatrix,
    perm: Vec<usize>,
}

impl ExactLu {
    pub fn new(m: &RatMatrix) -> Result<Self> {
        let n = m.len();
        let mut a = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for c in 0..n {
            let p = (c..n)
                .find(|&r| !a[r][c].is_zero())
                .ok_or_else(|| Error::InvalidParam("singular matrix".into()))?;
            a.swap(p, c);
            perm.swap(p, c);
            let piv = a[c][c].clone();
            for r in c + 1..n {
                if a[r][c].is_zero() {
                    continue;
                }
                let f = &a[r][c] / &piv;
                for k in c + 1..n {
                    let t = &f * &a[c][k];
                    a[r][k] -= t;
                }
                a[r][c] = f;
            }
        }
        Ok(Self { lu: a, perm })
    }

    pub fn solve(&self, b: &[BigRational]) -> Vec<BigRational> {
        let n = self.lu.len();
        let mut y: Vec<BigRational> = self.perm.iter().map(|&p| b[p].clone()).collect();
        for i in 0..n {
            for k in 0..i {
                let t = &self.lu[i][k] * &y[k];
                y[i] -= t;
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let t = &self.lu[i][k] * &y[k];
                y[i] -= t;
            }
            y[i] = &y[i] / &self.lu[i][i];
        }
        y
    }
}

/// Inertia-style classification of a symmetric rational matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Definiteness {
    pub positive_semidefinite: bool,
    pub rank: usize,
}

/// Exact test for positive semidefiniteness by symmetric elimination with
/// diagonal pivoting. A PSD matrix with a zero diagonal entry has a zero
/// row there, so the search never needs off-diagonal pivots.
pub fn classify_symmetric(m: &RatMatrix) -> Definiteness {
    let n = m.len();
    let mut a = m.clone();
    let mut alive: Vec<usize> = (0..n).collect();
    let mut rank = 0;
    while !alive.is_empty() {
        if alive.iter().any(|&i| a[i][i].is_negative()) {
            return Definiteness { positive_semidefinite: false, rank };
        }
        let piv_pos = alive
            .iter()
            .position(|&i| !a[i][i].is_zero());
        let Some(pp) = piv_pos else {
            let zero = alive
                .iter()
                .all(|&i| alive.iter().all(|&j| a[i][j].is_zero()));
            return Definiteness { positive_semidefinite: zero, rank };
        };
        let p = alive.remove(pp);
        rank += 1;
        let piv = a[p][p].clone();
        for &i in &alive {
            if a[i][p].is_zero() {
                continue;
            }
            let f = &a[i][p] / &piv;
            for &j in &alive {
                let t = &f * &a[p][j];
                a[i][j] -= t;
            }
        }
    }
    Definiteness { positive_semidefinite: true, rank }
}

/// Generalized symmetric eigenvalues of `a x = λ g x` with `g` positive
/// definite, by Cholesky whitening. Returned ascending.
pub fn generalized_eigenvalues(a: &DMatrix<f64>, g: &DMatrix<f64>) -> Result<Vec<f64>> {
    Ok(generalized_eigen(a, g)?.0)
}

/// Eigenvalues (ascending) and g-orthonormal eigenvectors as columns.
pub fn generalized_eigen(a: &DMatrix<f64>, g: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    if g.nrows() != n || a.ncols() != n || g.ncols() != n {
        return Err(Error::EigenSolver("dimension mismatch".into()));
    }
    if n == 0 {
        return Ok((Vec::new(), DMatrix::zeros(0, 0)));
    }
    // unit diagonal first; it costs nothing and helps badly scaled bases
    let d: Vec<f64> = (0..n).map(|i| g[(i, i)]).collect();
    if d.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::NotPositiveDefinite);
    }
    let s = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, d.iter().map(|x| 1.0 / x.sqrt())));
    let gs = &s * ((g + g.transpose()) * 0.5) * &s;
    let as_ = &s * ((a + a.transpose()) * 0.5) * &s;
    let chol = gs.cholesky().ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::EigenSolver("singular Cholesky factor".into()))?;
    let c = &linv * as_ * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(c, 1e-15, 0)
        .ok_or_else(|| Error::EigenSolver("symmetric eigen iteration did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let back = &s * linv.transpose() * &eig.eigenvectors;
    let mut vecs = DMatrix::zeros(n, n);
    for (c_new, &c_old) in order.iter().enumerate() {
        vecs.set_column(c_new, &back.column(c_old));
    }
    Ok((vals, vecs))
}

pub fn to_f64_matrix(m: &RatMatrix) -> DMatrix<f64> {
    let n = m.len();
    DMatrix::from_fn(n, n, |i, j| crate::scalar::ratio_to_f64(&m[i][j]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    #[test]
    fn determinant_and_solve() {
        let m = vec![
            vec![int(2), int(1), int(0)],
            vec![int(1), int(3), int(1)],
            vec![int(0), int(1), int(4)],
        ];
        assert_eq!(determinant(&m), int(18));
        let x = solve(&m, &[int(1), int(2), int(3)]).unwrap();
        for i in 0..3 {
            let row: BigRational = (0..3).map(|j| &m[i][j] * &x[j]).sum();
            assert_eq!(row, [int(1), int(2), int(3)][i]);
        }
    }

    #[test]
    fn psd_classification() {
        let psd = vec![vec![int(1), int(1)], vec![int(1), int(1)]];
        assert_eq!(classify_symmetric(&psd), Definiteness { positive_semidefinite: true, rank: 1 });
        let indef = vec![vec![int(0), int(1)], vec![int(1), int(0)]];
        assert!(!classify_symmetric(&indef).positive_semidefinite);
        let neg = vec![vec![int(1), int(0)], vec![int(0), rat(-1, 3)]];
        assert!(!classify_symmetric(&neg).positive_semidefinite);
    }

    #[test]
    fn independent_subset_drops_dependent_column() {
        // columns: e1, e2, e1+e2
        let g = vec![
            vec![int(1), int(0), int(1)],
            vec![int(0), int(1), int(1)],
            vec![int(1), int(1), int(2)],
        ];
        assert_eq!(independent_columns(&g), vec![0, 1]);
    }

    #[test]
    fn generalized_eigen_diagonal() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 9.0]);
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 3.0]);
        let v = generalized_eigenvalues(&a, &g).unwrap();
        assert!((v[0] - 2.0).abs() < 1e-14 && (v[1] - 3.0).abs() < 1e-14);
    }
}
