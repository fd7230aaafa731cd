//! Dense LU decomposition with partial pivoting and back substitution.

use super::OdeError;
use crate::dense::DenseMatrix;

/// Combined L/U storage with the pivot row sequence: `P A = L U`.
#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: DenseMatrix,
    pivots: Vec<usize>,
}

/// Factor a dense matrix in place with partial (row) pivoting.
pub fn lu_factor(mut a: DenseMatrix) -> Result<LuFactors, OdeError> {
    let n = a.dim();
    let mut pivots = vec![0usize; n];
    for k in 0..n {
        let mut p = k;
        let mut best = a[(k, k)].abs();
        for i in k + 1..n {
            let v = a[(i, k)].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == 0.0 {
            return Err(OdeError::SingularMatrix { column: k });
        }
        pivots[k] = p;
        a.swap_rows(k, p);
        let pivot = a[(k, k)];
        for i in k + 1..n {
            let factor = a[(i, k)] / pivot;
            a[(i, k)] = factor;
            for j in k + 1..n {
                a[(i, j)] -= factor * a[(k, j)];
            }
        }
    }
    Ok(LuFactors { lu: a, pivots })
}

/// Solve `A x = b` given the factorization of `A`.
pub fn lu_solve(f: &LuFactors, b: &[f64]) -> Vec<f64> {
    let mut x = b.to_vec();
    lu_solve_in_place(f, &mut x);
    x
}

pub fn lu_solve_in_place(f: &LuFactors, x: &mut [f64]) {
    let n = f.lu.dim();
    assert_eq!(x.len(), n);
    // the factorization swaps whole rows, multipliers included, so all
    // pivot interchanges apply to b before the substitution starts
    for k in 0..n {
        x.swap(k, f.pivots[k]);
    }
    for k in 0..n {
        let xk = x[k];
        if xk != 0.0 {
            for i in k + 1..n {
                x[i] -= f.lu.row(i)[k] * xk;
            }
        }
    }
    for k in (0..n).rev() {
        let mut v = x[k];
        let row = f.lu.row(k);
        for j in k + 1..n {
            v -= row[j] * x[j];
        }
        x[k] = v / row[k];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_trivial() {
        let f = lu_factor(DenseMatrix::identity(4)).unwrap();
        let b = vec![1.0, -2.0, 3.0, 0.5];
        assert_eq!(lu_solve(&f, &b), b);
    }

    #[test]
    fn permutation_matrix_needs_pivoting() {
        let a = DenseMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let f = lu_factor(a).unwrap();
        let x = lu_solve(&f, &[3.0, 7.0]);
        assert_eq!(x, vec![7.0, 3.0]);
    }

    #[test]
    fn diagonal_solve() {
        let a = DenseMatrix::from_rows(&[&[2.0, 0.0], &[0.0, 4.0]]);
        let f = lu_factor(a).unwrap();
        assert_eq!(lu_solve(&f, &[2.0, 4.0]), vec![1.0, 1.0]);
    }

    #[test]
    fn singular_matrix_reports_column() {
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        match lu_factor(a) {
            Err(OdeError::SingularMatrix { column }) => assert_eq!(column, 1),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn random_50x50_residual() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let n = 50;
        let mut a = DenseMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = rng.gen_range(-1.0..1.0);
            }
        }
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = lu_factor(a.clone()).unwrap();
        let x = lu_solve(&f, &b);
        let ax = a.mul_vec(&x);
        let bnorm = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let res = ax.iter().zip(&b).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
        assert!(res < 1e-10 * bnorm, "residual {res}");
    }

    #[test]
    fn inverse_columns_reconstruct_identity() {
        // applying the solve to unit vectors yields A^-1; A * A^-1 = I.
        let a = DenseMatrix::from_rows(&[
            &[4.0, 1.0, 0.0],
            &[1.0, 3.0, -1.0],
            &[0.0, -1.0, 2.0],
        ]);
        let f = lu_factor(a.clone()).unwrap();
        for k in 0..3 {
            let mut e = vec![0.0; 3];
            e[k] = 1.0;
            let col = lu_solve(&f, &e);
            let back = a.mul_vec(&col);
            for i in 0..3 {
                let expect = if i == k { 1.0 } else { 0.0 };
                assert!((back[i] - expect).abs() < 1e-12);
            }
        }
    }
}
