//! Exact linear algebra over interchangeable rational scalars.
//!
//! The hot paths (simplex pivoting, basis-rank checks, vertex enumeration)
//! run over machine-word rationals ([`Q128`]) with every operation checked;
//! the first overflow aborts the attempt and the caller retries with
//! arbitrary-precision [`Rat`].  Both scalars are exact, so the two routes
//! always produce identical results when the fast one completes.

use crate::rational::Rat;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, Zero};
use std::cmp::Ordering;

/// Fixed-width exact rational used on the fast path.
pub type Q128 = num_rational::Ratio<i128>;

/// Marker for "the fast scalar ran out of bits"; retry with [`Rat`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Overflow;

/// An exact field scalar with checked arithmetic.
pub trait Scalar: Clone + PartialEq + Zero + One + Sized {
    /// -1, 0, or 1.
    fn sign(&self) -> i8;
    fn try_add(&self, o: &Self) -> Result<Self, Overflow>;
    fn try_sub(&self, o: &Self) -> Result<Self, Overflow>;
    fn try_mul(&self, o: &Self) -> Result<Self, Overflow>;
    /// Caller must ensure `o != 0`.
    fn try_div(&self, o: &Self) -> Result<Self, Overflow>;
    /// Overflow-safe ordering (computed via subtraction, not cross products).
    fn cmp_exact(&self, o: &Self) -> Result<Ordering, Overflow> {
        Ok(match self.try_sub(o)?.sign() {
            -1 => Ordering::Less,
            0 => Ordering::Equal,
            _ => Ordering::Greater,
        })
    }
    fn from_rat(r: &Rat) -> Result<Self, Overflow>;
    fn to_rat(&self) -> Rat;
}

impl Scalar for Rat {
    fn sign(&self) -> i8 {
        if Zero::is_zero(self) {
            0
        } else if self.is_positive() {
            1
        } else {
            -1
        }
    }
    fn try_add(&self, o: &Self) -> Result<Self, Overflow> {
        Ok(self + o)
    }
    fn try_sub(&self, o: &Self) -> Result<Self, Overflow> {
        Ok(self - o)
    }
    fn try_mul(&self, o: &Self) -> Result<Self, Overflow> {
        Ok(self * o)
    }
    fn try_div(&self, o: &Self) -> Result<Self, Overflow> {
        Ok(self / o)
    }
    fn cmp_exact(&self, o: &Self) -> Result<Ordering, Overflow> {
        Ok(self.cmp(o))
    }
    fn from_rat(r: &Rat) -> Result<Self, Overflow> {
        Ok(r.clone())
    }
    fn to_rat(&self) -> Rat {
        self.clone()
    }
}

impl Scalar for Q128 {
    fn sign(&self) -> i8 {
        match self.numer().signum() {
            n if n > 0 => 1,
            0 => 0,
            _ => -1,
        }
    }
    fn try_add(&self, o: &Self) -> Result<Self, Overflow> {
        self.checked_add(o).ok_or(Overflow)
    }
    fn try_sub(&self, o: &Self) -> Result<Self, Overflow> {
        self.checked_sub(o).ok_or(Overflow)
    }
    fn try_mul(&self, o: &Self) -> Result<Self, Overflow> {
        self.checked_mul(o).ok_or(Overflow)
    }
    fn try_div(&self, o: &Self) -> Result<Self, Overflow> {
        self.checked_div(o).ok_or(Overflow)
    }
    fn from_rat(r: &Rat) -> Result<Self, Overflow> {
        let n = i128::try_from(r.numer()).map_err(|_| Overflow)?;
        let d = i128::try_from(r.denom()).map_err(|_| Overflow)?;
        Ok(Q128::new(n, d))
    }
    fn to_rat(&self) -> Rat {
        crate::rational::Rat::new((*self.numer()).into(), (*self.denom()).into())
    }
}

/// Rank of a dense matrix given as rows, by Gauss-Jordan elimination with
/// partial (first-nonzero) pivoting.
pub fn rank<S: Scalar>(mut rows: Vec<Vec<S>>) -> Result<usize, Overflow> {
    let nrows = rows.len();
    if nrows == 0 {
        return Ok(0);
    }
    let ncols = rows[0].len();
    let mut r = 0;
    for col in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(piv) = (r..nrows).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, piv);
        let pivot_row = rows[r].clone();
        let pivot = pivot_row[col].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let factor = row[col].try_div(&pivot)?;
            for (dst, src) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                if !src.is_zero() {
                    let delta = factor.try_mul(src)?;
                    *dst = dst.try_sub(&delta)?;
                }
            }
        }
        r += 1;
    }
    Ok(r)
}

/// Rank of a 0/1 incidence-style matrix supplied as rationals; convenience
/// wrapper that tries the fast scalar first.
pub fn rank_rat(rows: &[Vec<Rat>]) -> usize {
    if let Ok(fast) = convert_rows::<Q128>(rows) {
        if let Ok(r) = rank(fast) {
            return r;
        }
    }
    rank(rows.to_vec()).expect("big rationals cannot overflow")
}

/// Solves a square system `A x = b`.  Returns `Ok(None)` when `A` is singular.
pub fn solve_square<S: Scalar>(
    mut a: Vec<Vec<S>>,
    mut b: Vec<S>,
) -> Result<Option<Vec<S>>, Overflow> {
    let n = a.len();
    debug_assert!(a.iter().all(|row| row.len() == n));
    debug_assert_eq!(b.len(), n);
    // forward elimination to row-echelon form
    for col in 0..n {
        let Some(piv) = (col..n).find(|&i| !a[i][col].is_zero()) else {
            return Ok(None);
        };
        a.swap(col, piv);
        b.swap(col, piv);
        let pivot_row = a[col].clone();
        let pivot = pivot_row[col].clone();
        for i in (col + 1)..n {
            if a[i][col].is_zero() {
                continue;
            }
            let factor = a[i][col].try_div(&pivot)?;
            for (dst, src) in a[i][col..].iter_mut().zip(&pivot_row[col..]) {
                if !src.is_zero() {
                    let delta = factor.try_mul(src)?;
                    *dst = dst.try_sub(&delta)?;
                }
            }
            let delta = factor.try_mul(&b[col])?;
            b[i] = b[i].try_sub(&delta)?;
        }
    }
    // back substitution
    let mut x = vec![S::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row].clone();
        for j in (row + 1)..n {
            if !a[row][j].is_zero() && !x[j].is_zero() {
                let delta = a[row][j].try_mul(&x[j])?;
                acc = acc.try_sub(&delta)?;
            }
        }
        x[row] = acc.try_div(&a[row][row])?;
    }
    Ok(Some(x))
}

/// Converts a rational matrix to another scalar, failing on overflow.
pub fn convert_rows<S: Scalar>(rows: &[Vec<Rat>]) -> Result<Vec<Vec<S>>, Overflow> {
    rows.iter()
        .map(|row| row.iter().map(S::from_rat).collect())
        .collect()
}
