//! Exact integer kernels: checked `i128` Bareiss elimination, cofactor
//! normals and gcd reduction.

use crate::{Error, Result};

fn mul(a: i128, b: i128) -> Result<i128> {
    a.checked_mul(b).ok_or(Error::ArithmeticOverflow)
}

fn sub(a: i128, b: i128) -> Result<i128> {
    a.checked_sub(b).ok_or(Error::ArithmeticOverflow)
}

/// Fraction-free Gaussian elimination. Returns the rank and, for square
/// input, the determinant (0 when singular).
fn bareiss(mut m: Vec<Vec<i128>>) -> Result<(usize, i128)> {
    let rows = m.len();
    if rows == 0 {
        return Ok((0, 1));
    }
    let cols = m[0].len();
    let mut rank = 0;
    let mut prev = 1i128;
    let mut sign = 1i128;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(piv) = (rank..rows).find(|&r| m[r][col] != 0) else {
            continue;
        };
        if piv != rank {
            m.swap(piv, rank);
            sign = -sign;
        }
        for r in rank + 1..rows {
            for c in col + 1..cols {
                let v = sub(mul(m[rank][col], m[r][c])?, mul(m[r][col], m[rank][c])?)?;
                m[r][c] = v / prev;
            }
            m[r][col] = 0;
        }
        prev = m[rank][col];
        rank += 1;
    }
    let det = if rows == cols && rank == rows {
        mul(sign, m[rows - 1][cols - 1])?
    } else {
        0
    };
    Ok((rank, det))
}

pub(crate) fn rank(rows: Vec<Vec<i128>>) -> Result<usize> {
    Ok(bareiss(rows)?.0)
}

pub(crate) fn det(rows: Vec<Vec<i128>>) -> Result<i128> {
    Ok(bareiss(rows)?.1)
}

pub(crate) fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// A primitive integer normal to the `n − 1` vectors in `rows` (each of
/// length `n`), or `None` if they are linearly dependent.
pub(crate) fn normal(rows: &[Vec<i128>]) -> Result<Option<Vec<i128>>> {
    let n = rows.len() + 1;
    let mut w = Vec::with_capacity(n);
    for j in 0..n {
        let minor: Vec<Vec<i128>> = rows
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|&(c, _)| c != j)
                    .map(|(_, &v)| v)
                    .collect()
            })
            .collect();
        let d = if minor.is_empty() { 1 } else { det(minor)? };
        w.push(if j % 2 == 0 { d } else { -d });
    }
    let g = w.iter().fold(0, |acc, &x| gcd(acc, x));
    if g == 0 {
        return Ok(None);
    }
    Ok(Some(w.into_iter().map(|x| x / g).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_and_rank() {
        assert_eq!(det(vec![vec![2, 1], vec![1, 3]]).unwrap(), 5);
        assert_eq!(det(vec![vec![0, 1], vec![1, 0]]).unwrap(), -1);
        assert_eq!(
            det(vec![vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 10]]).unwrap(),
            -3
        );
        assert_eq!(rank(vec![vec![1, 2, 3], vec![2, 4, 6]]).unwrap(), 1);
        assert_eq!(rank(vec![vec![0, 0], vec![0, 0]]).unwrap(), 0);
    }

    #[test]
    fn normals_are_orthogonal_and_primitive() {
        let rows = vec![vec![1, -1, 0], vec![0, 2, -2]];
        let w = normal(&rows).unwrap().unwrap();
        for r in &rows {
            assert_eq!(r.iter().zip(&w).map(|(a, b)| a * b).sum::<i128>(), 0);
        }
        assert_eq!(w.iter().fold(0, |g, &x| gcd(g, x)), 1);
        assert!(normal(&[vec![1, 2], ]).unwrap().is_some());
        assert!(normal(&[vec![1, 1, 0], vec![2, 2, 0]]).unwrap().is_none());
    }

    #[test]
    fn overflow_is_reported() {
        let big = i128::MAX / 2;
        assert_eq!(
            det(vec![vec![big, 1], vec![3, big]]),
            Err(Error::ArithmeticOverflow)
        );
    }
}
