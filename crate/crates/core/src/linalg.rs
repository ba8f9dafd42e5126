//! Exact linear algebra over Q(i): row reduction, rank, and consistent
//! linear solving. Everything is dense; the matrices here are tiny.

use crate::rational::GaussRat;

pub type Matrix = Vec<Vec<GaussRat>>;

/// Reduced row echelon form. Returns the reduced matrix and the pivot
/// column indices, one per nonzero row.
pub fn rref(m: &Matrix) -> (Matrix, Vec<usize>) {
    let mut a = m.clone();
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].inv();
        for x in a[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..cols {
                    let s = &a[r][j] * &f;
                    a[i][j] = &a[i][j] - &s;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

pub fn rank(m: &Matrix) -> usize {
    rref(m).1.len()
}

/// One exact solution of A·x = b with free variables set to zero, or None
/// if the system is inconsistent.
pub fn solve(a: &Matrix, b: &[GaussRat]) -> Option<Vec<GaussRat>> {
    let rows = a.len();
    assert_eq!(rows, b.len());
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut aug: Matrix = Vec::with_capacity(rows);
    for i in 0..rows {
        let mut row = a[i].clone();
        row.push(b[i].clone());
        aug.push(row);
    }
    let (red, pivots) = rref(&aug);
    if pivots.contains(&cols) {
        return None;
    }
    let mut x = vec![GaussRat::zero(); cols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = red[r][cols].clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> GaussRat {
        GaussRat::from_int(n)
    }

    #[test]
    fn rank_of_identity_and_singular() {
        let id = vec![vec![q(1), q(0)], vec![q(0), q(1)]];
        assert_eq!(rank(&id), 2);
        let sing = vec![vec![q(1), q(2)], vec![q(2), q(4)]];
        assert_eq!(rank(&sing), 1);
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let a = vec![vec![q(1), q(1)], vec![q(0), q(1)]];
        let x = solve(&a, &[q(3), q(1)]).unwrap();
        assert_eq!(x, vec![q(2), q(1)]);
        let sing = vec![vec![q(1), q(1)], vec![q(2), q(2)]];
        assert!(solve(&sing, &[q(0), q(1)]).is_none());
        assert!(solve(&sing, &[q(1), q(2)]).is_some());
    }

    #[test]
    fn complex_entries_reduce_exactly() {
        let a = vec![vec![GaussRat::i(), q(1)], vec![q(1), GaussRat::i()]];
        // det = i*i - 1 = -2, invertible
        assert_eq!(rank(&a), 2);
    }
}
