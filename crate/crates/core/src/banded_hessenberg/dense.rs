use super::FiniteBandedMatrix;
use crate::error::{precondition, Error, Result};
use crate::scalar::Scalar;

const ORACLE_MAX_SIZE: usize = 64;

/// Entry `(i, j)` of `(zI - B)^{-1}` by dense elimination with partial pivoting.
///
/// Independent of the polynomial recurrences. Pivots are chosen by largest
/// modulus, ties going to the lowest row.
pub fn resolvent_entry_dense_oracle<S: Scalar>(b: &FiniteBandedMatrix<S>, z: &S, i: usize, j: usize) -> Result<S> {
    let n = b.size();
    if n > ORACLE_MAX_SIZE {
        return Err(precondition(format!("dense oracle limited to n <= {ORACLE_MAX_SIZE}")));
    }
    if i == 0 || j == 0 || i > n || j > n {
        return Err(precondition(format!("entry ({i}, {j}) outside a {n} x {n} matrix")));
    }
    let mut a: Vec<Vec<S>> = b
        .to_dense()
        .into_iter()
        .enumerate()
        .map(|(r, row)| {
            row.into_iter()
                .enumerate()
                .map(|(c, x)| if r == c { z.clone() - x } else { -x })
                .collect()
        })
        .collect();
    let mut rhs = vec![S::zero(); n];
    rhs[j - 1] = S::one();

    let scale = a.iter().flatten().map(|x| x.modulus()).fold(0.0, f64::max);
    let singular_tol = if S::EXACT { 0.0 } else { scale * n as f64 * 1e-14 };

    for col in 0..n {
        let mut piv = col;
        let mut best = a[col][col].modulus();
        for r in col + 1..n {
            let m = a[r][col].modulus();
            if m > best {
                best = m;
                piv = r;
            }
        }
        if a[piv][col].is_zero() || best <= singular_tol {
            return Err(Error::EigenvalueHit);
        }
        a.swap(col, piv);
        rhs.swap(col, piv);
        let inv = S::one() / a[col][col].clone();
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone() * inv.clone();
            for c in col..n {
                let t = f.clone() * a[col][c].clone();
                a[r][c] = a[r][c].clone() - t;
            }
            rhs[r] = rhs[r].clone() - f * rhs[col].clone();
        }
    }
    let mut x = vec![S::zero(); n];
    for r in (0..n).rev() {
        let mut acc = rhs[r].clone();
        for c in r + 1..n {
            acc = acc - a[r][c].clone() * x[c].clone();
        }
        x[r] = acc / a[r][r].clone();
    }
    Ok(x.swap_remove(i - 1))
}
