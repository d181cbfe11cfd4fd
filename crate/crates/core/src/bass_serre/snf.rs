//! Smith normal form of integer matrices.
//!
//! Runs in `i128` with checked arithmetic and restarts over `BigInt` if an
//! intermediate entry would overflow.

use num_bigint::BigInt;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, One, Signed, Zero};

/// Nonzero invariant factors (positive, each dividing the next).
pub fn invariant_factors(rows: &[Vec<i64>], cols: usize) -> Vec<BigInt> {
    let mut rows: Vec<Vec<i64>> =
        rows.iter().filter(|r| r.iter().any(|&x| x != 0)).cloned().collect();
    rows.sort();
    rows.dedup();
    let small: Vec<Vec<i128>> =
        rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    if let Some(d) = diagonalize(small, cols) {
        return d.into_iter().map(BigInt::from).collect();
    }
    let big = rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    diagonalize(big, cols).expect("big integers do not overflow")
}

trait Ring: Clone + Zero + One + Signed + Ord + CheckedAdd + CheckedSub + CheckedMul {}
impl<T: Clone + Zero + One + Signed + Ord + CheckedAdd + CheckedSub + CheckedMul> Ring for T {}

/// `row_a -= q * row_b` over the columns from `from`.
fn axpy<T: Ring>(a: &mut [T], b: &[T], q: &T, from: usize) -> Option<()> {
    for j in from..a.len() {
        if !b[j].is_zero() {
            a[j] = a[j].checked_sub(&q.checked_mul(&b[j])?)?;
        }
    }
    Some(())
}

fn diagonalize<T: Ring>(mut m: Vec<Vec<T>>, cols: usize) -> Option<Vec<T>> {
    let mut diag = Vec::new();
    let mut t = 0;
    while t < cols && t < m.len() {
        // pivot: smallest nonzero absolute value in the remaining block
        let mut pivot: Option<(usize, usize)> = None;
        for (i, row) in m.iter().enumerate().skip(t) {
            for (j, x) in row.iter().enumerate().skip(t) {
                if !x.is_zero() && pivot.map_or(true, |(pi, pj)| x.abs() < m[pi][pj].abs()) {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        m.swap(t, pi);
        for row in m.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut clean = true;
            // clear column t
            for i in t + 1..m.len() {
                if m[i][t].is_zero() {
                    continue;
                }
                let q = m[i][t].clone() / m[t][t].clone();
                let (head, tail) = m.split_at_mut(i);
                axpy(&mut tail[0], &head[t], &q, t)?;
                if !m[i][t].is_zero() {
                    m.swap(t, i);
                    clean = false;
                }
            }
            // clear row t
            for j in t + 1..cols {
                if m[t][j].is_zero() {
                    continue;
                }
                let q = m[t][j].clone() / m[t][t].clone();
                for row in m.iter_mut() {
                    if !row[t].is_zero() {
                        let delta = q.checked_mul(&row[t])?;
                        row[j] = row[j].checked_sub(&delta)?;
                    }
                }
                if !m[t][j].is_zero() {
                    for row in m.iter_mut() {
                        row.swap(t, j);
                    }
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // divisibility: fold an offending row into row t and repeat
            let p = m[t][t].clone();
            let bad = (t + 1..m.len())
                .find(|&i| m[i][t + 1..].iter().any(|x| !(x.clone() % p.clone()).is_zero()));
            match bad {
                Some(i) => {
                    let (head, tail) = m.split_at_mut(i);
                    let minus_one = -T::one();
                    axpy(&mut head[t], &tail[0], &minus_one, t)?;
                }
                None => break,
            }
        }
        diag.push(m[t][t].abs());
        t += 1;
    }
    Some(diag)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factors(rows: &[Vec<i64>], cols: usize) -> Vec<i64> {
        invariant_factors(rows, cols).into_iter().map(|x| i64::try_from(x).unwrap()).collect()
    }

    #[test]
    fn small_matrices() {
        assert_eq!(factors(&[vec![2, 0], vec![0, 2]], 2), vec![2, 2]);
        assert_eq!(factors(&[vec![2, 0], vec![0, 3]], 2), vec![1, 6]);
        assert_eq!(
            factors(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]], 3),
            vec![2, 6, 12]
        );
        assert_eq!(factors(&[], 3), Vec::<i64>::new());
        assert_eq!(factors(&[vec![0, 0]], 2), Vec::<i64>::new());
        assert_eq!(factors(&[vec![1, -1], vec![1, -1]], 2), vec![1]);
    }

    #[test]
    fn overflow_falls_back_to_big_integers() {
        let big = i64::MAX / 3;
        let rows = vec![vec![big, big - 1, 7], vec![big - 5, big, 3], vec![11, big, big - 2]];
        let d = invariant_factors(&rows, 3);
        // the determinant is preserved up to sign
        let det = |r: &[Vec<i64>]| -> BigInt {
            let b = |i: usize, j: usize| BigInt::from(r[i][j]);
            b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1))
                - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
                + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0))
        };
        let prod: BigInt = d.iter().product();
        assert_eq!(prod, det(&rows).abs());
        for w in d.windows(2) {
            assert!((w[1].clone() % w[0].clone()).is_zero());
        }
    }
}
