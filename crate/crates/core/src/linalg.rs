//! Exact rational linear algebra on small integer matrices.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

fn to_rational(rows: &[Vec<i64>]) -> Vec<Vec<BigRational>> {
    rows.iter()
        .map(|r| r.iter().map(|&v| BigRational::from_integer(BigInt::from(v))).collect())
        .collect()
}

/// Reduced row echelon form in place; returns the pivot columns.
fn rref(m: &mut [Vec<BigRational>]) -> Vec<usize> {
    let nrows = m.len();
    let ncols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row == nrows {
            break;
        }
        let Some(p) = (row..nrows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for v in m[row].iter_mut() {
            *v = &*v * &inv;
        }
        for r in 0..nrows {
            if r != row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..ncols {
                    let delta = &f * &m[row][c];
                    m[r][c] = &m[r][c] - delta;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

/// Rank over the rationals.
pub fn rank(rows: &[Vec<i64>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let mut m = to_rational(rows);
    rref(&mut m).len()
}

/// Integer basis of the right null space `{v : M v = 0}`, each vector
/// scaled to coprime integer entries.
pub fn nullspace(rows: &[Vec<i64>], ncols: usize) -> Vec<Vec<i64>> {
    let mut m = to_rational(rows);
    let pivots = if m.is_empty() { Vec::new() } else { rref(&mut m) };
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    let mut basis = Vec::with_capacity(free.len());
    for &f in &free {
        let mut v = vec![BigRational::zero(); ncols];
        v[f] = BigRational::one();
        for (r, &p) in pivots.iter().enumerate() {
            v[p] = -m[r][f].clone();
        }
        basis.push(clear_denominators(&v));
    }
    basis
}

fn clear_denominators(v: &[BigRational]) -> Vec<i64> {
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * BigRational::from_integer(lcm.clone())).to_integer()).collect();
    let gcd = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    let gcd = if gcd.is_zero() { BigInt::one() } else { gcd.abs() };
    ints.iter()
        .map(|x| (x / &gcd).to_i64().expect("null space entry overflows i64"))
        .collect()
}

/// Integer basis of the left null space `{r : rᵀ M = 0}` of an `nrows × ncols` matrix.
pub fn left_nullspace(rows: &[Vec<i64>], nrows: usize) -> Vec<Vec<i64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    let transposed: Vec<Vec<i64>> = (0..ncols).map(|c| (0..nrows).map(|r| rows[r][c]).collect()).collect();
    nullspace(&transposed, nrows)
}

pub fn matmul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let inner = b.len();
    let ncols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..ncols)
                .map(|c| (0..inner).map(|k| row[k] * b[k][c]).sum())
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_small_matrices() {
        assert_eq!(rank(&[vec![1, -1]]), 1);
        assert_eq!(rank(&[vec![1, 2], vec![2, 4]]), 1);
        assert_eq!(rank(&[vec![1, 0, 1], vec![0, 1, 1], vec![1, 1, 2]]), 2);
        assert_eq!(rank(&[vec![0, 0]]), 0);
    }

    #[test]
    fn nullspace_is_annihilated() {
        let m = vec![vec![1, 2, 3], vec![2, 4, 7]];
        let ns = nullspace(&m, 3);
        assert_eq!(ns.len(), 1);
        for v in &ns {
            for row in &m {
                assert_eq!(row.iter().zip(v).map(|(a, b)| a * b).sum::<i64>(), 0);
            }
        }
        assert_eq!(ns[0], vec![-2, 1, 0]);
    }

    #[test]
    fn left_nullspace_of_gene_switch_stoichiometry() {
        // Two species interconverting plus an unconstrained birth of a third.
        let gamma = vec![vec![-1, 1, 0], vec![1, -1, 0], vec![0, 0, 1]];
        let ns = left_nullspace(&gamma, 3);
        assert_eq!(ns, vec![vec![1, 1, 0]]);
    }
}
