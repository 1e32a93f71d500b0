//! Small dense matrices over any numeric field.
//!
//! The same type holds exact rational coefficients, `f64` working copies and
//! complex stability matrices.

use std::fmt;

use num::{BigInt, BigRational, Num, Signed, ToPrimitive, Zero};

pub type Q = BigRational;

pub trait Scalar: Clone + Num {}
impl<T: Clone + Num> Scalar for T {}

/// Exact rational `n/d`.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parse `"n"`, `"-n/d"` into an exact rational.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Q::new(n, d))
        }
        None => s.parse::<BigInt>().ok().map(Q::from_integer),
    }
}

pub fn q_to_f64(x: &Q) -> f64 {
    // Direct conversion of huge numerators and denominators overflows, so scale first.
    if let Some(v) = x.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    let (n, d) = (x.numer(), x.denom());
    let shift = n.bits().max(d.bits()) as i64 - 1000;
    let shift = shift.max(0) as usize;
    let n = n >> shift;
    let d = d >> shift;
    n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN)
}

pub fn q_abs_f64(x: &Q) -> f64 {
    q_to_f64(&x.abs())
}

#[derive(Clone, PartialEq, Eq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: fmt::Debug> fmt::Debug for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.data.chunks(self.cols.max(1))).finish()
    }
}

impl<T: Clone> Mat<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    /// Builds a matrix from rows; all rows must have the same length.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Option<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return None;
        }
        Some(Mat { rows: n, cols: m, data: rows.into_iter().flatten().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn map<S>(&self, f: impl FnMut(&T) -> S) -> Mat<S> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat::from_fn(rows, cols, |_, _| T::zero())
    }

    pub fn identity(n: usize) -> Self {
        Mat::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn diag(v: &[T]) -> Self {
        let n = v.len();
        Mat::from_fn(n, n, |i, j| if i == j { v[i].clone() } else { T::zero() })
    }

    pub fn mul(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        Mat::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(T::zero(), |acc, k| {
                acc + self.get(i, k).clone() * other.get(k, j).clone()
            })
        })
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    pub fn add(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat::from_fn(self.rows, self.cols, |i, j| self.get(i, j).clone() + other.get(i, j).clone())
    }

    pub fn sub(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat::from_fn(self.rows, self.cols, |i, j| self.get(i, j).clone() - other.get(i, j).clone())
    }

    pub fn scale(&self, k: &T) -> Mat<T> {
        self.map(|x| x.clone() * k.clone())
    }

    pub fn row_sums(&self) -> Vec<T> {
        (0..self.rows)
            .map(|i| self.row(i).iter().fold(T::zero(), |acc, x| acc + x.clone()))
            .collect()
    }

    /// True when every entry on or above the diagonal is zero.
    pub fn is_strictly_lower(&self) -> bool {
        (0..self.rows).all(|i| (i..self.cols).all(|j| self.get(i, j).is_zero()))
    }

    /// Stacks blocks given as a grid of equally tall rows of matrices.
    pub fn block(grid: &[Vec<&Mat<T>>]) -> Mat<T> {
        let heights: Vec<usize> = grid.iter().map(|r| r[0].rows).collect();
        let widths: Vec<usize> = grid[0].iter().map(|m| m.cols).collect();
        let mut out = Mat::zeros(heights.iter().sum(), widths.iter().sum());
        let mut r0 = 0;
        for (bi, brow) in grid.iter().enumerate() {
            let mut c0 = 0;
            for (bj, m) in brow.iter().enumerate() {
                assert_eq!((m.rows, m.cols), (heights[bi], widths[bj]), "block shape mismatch");
                for i in 0..m.rows {
                    for j in 0..m.cols {
                        out.set(r0 + i, c0 + j, m.get(i, j).clone());
                    }
                }
                c0 += widths[bj];
            }
            r0 += heights[bi];
        }
        out
    }
}

impl Mat<Q> {
    pub fn to_f64(&self) -> Mat<f64> {
        self.map(q_to_f64)
    }

    /// Largest absolute entry, or zero for an empty matrix.
    pub fn max_abs(&self) -> Q {
        self.data.iter().map(|x| x.abs()).max().unwrap_or_else(Q::zero)
    }

    /// Largest absolute off-diagonal entry of a square matrix.
    pub fn max_off_diagonal(&self) -> Q {
        let mut m = Q::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j && self.get(i, j).abs() > m {
                    m = self.get(i, j).abs();
                }
            }
        }
        m
    }
}

/// Solves `M x = rhs` by Gaussian elimination with partial pivoting.
///
/// Returns `None` if a pivot vanishes. Pivot magnitude is measured by `mag`.
pub fn solve<T: Scalar>(m: &Mat<T>, rhs: &Mat<T>, mag: impl Fn(&T) -> f64) -> Option<Mat<T>> {
    let n = m.rows;
    assert_eq!(n, m.cols);
    assert_eq!(n, rhs.rows);
    let k = rhs.cols;
    let mut a = m.clone();
    let mut b = rhs.clone();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| {
            mag(a.get(x, col)).partial_cmp(&mag(a.get(y, col))).unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a.get(piv, col).is_zero() {
            return None;
        }
        if piv != col {
            for j in 0..n {
                let t = a.get(col, j).clone();
                a.set(col, j, a.get(piv, j).clone());
                a.set(piv, j, t);
            }
            for j in 0..k {
                let t = b.get(col, j).clone();
                b.set(col, j, b.get(piv, j).clone());
                b.set(piv, j, t);
            }
        }
        let p = a.get(col, col).clone();
        for i in col + 1..n {
            let f = a.get(i, col).clone() / p.clone();
            if f.is_zero() {
                continue;
            }
            for j in col..n {
                let v = a.get(i, j).clone() - f.clone() * a.get(col, j).clone();
                a.set(i, j, v);
            }
            for j in 0..k {
                let v = b.get(i, j).clone() - f.clone() * b.get(col, j).clone();
                b.set(i, j, v);
            }
        }
    }
    let mut x: Mat<T> = Mat::zeros(n, k);
    for j in 0..k {
        for i in (0..n).rev() {
            let mut acc = b.get(i, j).clone();
            for l in i + 1..n {
                acc = acc - a.get(i, l).clone() * x.get(l, j).clone();
            }
            x.set(i, j, acc / a.get(i, i).clone());
        }
    }
    Some(x)
}

pub fn ones<T: Scalar>(n: usize) -> Vec<T> {
    vec![T::one(); n]
}

/// Max-norm of a float vector.
pub fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_signed_fractions() {
        assert_eq!(parse_q("-3/6"), Some(q(-1, 2)));
        assert_eq!(parse_q(" 7 "), Some(q(7, 1)));
        assert_eq!(parse_q("1/0"), None);
        assert_eq!(parse_q("x"), None);
    }

    #[test]
    fn huge_fraction_converts_without_overflow() {
        let big = parse_q(&format!("{}/{}", "3".repeat(400), "1".repeat(400))).unwrap();
        assert!((q_to_f64(&big) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn solve_recovers_known_solution() {
        let m = Mat::from_rows(vec![vec![0.0, 2.0], vec![1.0, 1.0]]).unwrap();
        let rhs = Mat::from_rows(vec![vec![4.0], vec![3.0]]).unwrap();
        let x = solve(&m, &rhs, |v: &f64| v.abs()).unwrap();
        assert_eq!(x.to_rows(), vec![vec![1.0], vec![2.0]]);
    }

    #[test]
    fn block_layout() {
        let a = Mat::<i64>::identity(1);
        let z = Mat::<i64>::zeros(1, 2);
        let b = Mat::from_rows(vec![vec![5i64, 6]]).unwrap();
        let m = Mat::block(&[vec![&a, &z], vec![&a, &b]]);
        assert_eq!(m.to_rows(), vec![vec![1, 0, 0], vec![1, 5, 6]]);
    }
}
