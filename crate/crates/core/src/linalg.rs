//! Small exact linear algebra over `Z` and `Q`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::Rational;

/// Row-style Hermite normal form of the lattice spanned by `rows`.
///
/// Returns the nonzero rows, upper triangular with positive pivots and
/// entries above each pivot reduced into `[0, pivot)`.
pub fn hermite_normal_form(rows: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut pivot_row = 0;
    for col in 0..ncols {
        if pivot_row == m.len() {
            break;
        }
        // Euclid down the column until one nonzero entry remains at pivot_row.
        loop {
            let mut best: Option<usize> = None;
            for r in pivot_row..m.len() {
                if m[r][col] != 0 && best.is_none_or(|b| m[r][col].abs() < m[b][col].abs()) {
                    best = Some(r);
                }
            }
            let Some(b) = best else { break };
            m.swap(pivot_row, b);
            let mut done = true;
            for r in pivot_row + 1..m.len() {
                if m[r][col] != 0 {
                    let f = m[r][col].div_euclid(m[pivot_row][col]);
                    for c in col..ncols {
                        m[r][c] -= f * m[pivot_row][c];
                    }
                    if m[r][col] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if m[pivot_row][col] == 0 {
            continue;
        }
        if m[pivot_row][col] < 0 {
            for c in col..ncols {
                m[pivot_row][c] = -m[pivot_row][c];
            }
        }
        let p = m[pivot_row][col];
        for r in 0..pivot_row {
            let f = m[r][col].div_euclid(p);
            if f != 0 {
                for c in col..ncols {
                    m[r][c] -= f * m[pivot_row][c];
                }
            }
        }
        pivot_row += 1;
    }
    m.truncate(pivot_row);
    m.into_iter()
        .map(|r| r.into_iter().map(|x| i64::try_from(x).expect("HNF entry overflow")).collect())
        .collect()
}

/// Exact determinant of a square integer matrix (fraction-free Bareiss).
pub fn det_integer(m: &[Vec<i64>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(s) = (k + 1..n).find(|&r| !a[r][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, s);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// Inverse over `Q`, `None` when singular.
pub fn inverse_rational(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            row
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, p);
        let inv = Rational::one() / &a[col][col];
        for x in a[col].iter_mut() {
            *x *= &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in 0..2 * n {
                    let t = &f * &a[col][c];
                    a[r][c] -= t;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(rows: &mut Vec<Vec<Rational>>) -> Vec<usize> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = Rational::one() / &rows[r][col];
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let f = rows[i][col].clone();
                for c in col..ncols {
                    let t = &f * &rows[r][c];
                    rows[i][c] -= t;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

pub fn rank_rational(rows: &[Vec<Rational>]) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m).len()
}

/// Solves `x * basis = v` for an integral row vector `x`, where `basis` is
/// square with integer entries. `None` if `v` is outside the row lattice.
pub struct IntegralSolver {
    adj: Vec<Vec<i64>>,
    det: i64,
}

impl IntegralSolver {
    pub fn new(basis: &[Vec<i64>]) -> Self {
        let n = basis.len();
        let q: Vec<Vec<Rational>> =
            basis.iter().map(|r| r.iter().map(|&x| Rational::from_integer(x.into())).collect()).collect();
        let inv = inverse_rational(&q).expect("singular basis");
        let det = det_integer(basis);
        let det_i: i64 = det.clone().try_into().expect("basis determinant overflow");
        let detq = Rational::from_integer(det);
        let adj = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let v = &inv[i][j] * &detq;
                        assert!(v.is_integer());
                        i64::try_from(v.to_integer()).expect("adjugate overflow")
                    })
                    .collect()
            })
            .collect();
        IntegralSolver { adj, det: det_i }
    }

    pub fn solve(&self, v: &[i64]) -> Option<Vec<i64>> {
        let n = self.adj.len();
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            let s: i64 = (0..n).map(|i| v[i] * self.adj[i][j]).sum();
            if s % self.det != 0 {
                return None;
            }
            out.push(s / self.det);
        }
        Some(out)
    }

    pub fn det(&self) -> i64 {
        self.det
    }
}

/// Content of an integer vector, as a nonnegative `gcd`.
pub fn content_of(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |g, &x| g.gcd(&x)).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat_int;

    #[test]
    fn hnf_of_redundant_generators() {
        let rows = vec![vec![2, 0], vec![0, 2], vec![1, 1], vec![3, 3]];
        let h = hermite_normal_form(&rows);
        assert_eq!(h, vec![vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn bareiss_det() {
        let m = vec![vec![2, -1, 0], vec![-1, 2, -1], vec![0, -1, 2]];
        assert_eq!(det_integer(&m), BigInt::from(4));
        let s = vec![vec![1, 2], vec![2, 4]];
        assert_eq!(det_integer(&s), BigInt::zero());
        let p = vec![vec![0, 1], vec![1, 0]];
        assert_eq!(det_integer(&p), BigInt::from(-1));
    }

    #[test]
    fn rank_and_rref() {
        let rows = vec![
            vec![rat_int(1), rat_int(2), rat_int(3)],
            vec![rat_int(2), rat_int(4), rat_int(6)],
            vec![rat_int(0), rat_int(1), rat_int(1)],
        ];
        assert_eq!(rank_rational(&rows), 2);
        let mut m = rows.clone();
        assert_eq!(rref(&mut m), vec![0, 1]);
    }

    #[test]
    fn integral_solver() {
        let basis = vec![vec![2, 0], vec![1, 1]];
        let s = IntegralSolver::new(&basis);
        assert_eq!(s.solve(&[3, 1]), Some(vec![1, 1]));
        assert_eq!(s.solve(&[1, 0]), None);
    }
}
