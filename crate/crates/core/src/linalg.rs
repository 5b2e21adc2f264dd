//! Dense matrices over an exact field.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn diagonal(entries: Vec<T>) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, e) in entries.into_iter().enumerate() {
            m[[i, i]] = e;
        }
        m
    }

    /// `v vᵀ / (vᵀ v)`: the orthogonal projector onto the line spanned by `v`.
    pub fn line_projector(v: &[T]) -> Self {
        let norm = dot(v, v);
        Self::from_fn(v.len(), v.len(), |i, j| v[i].clone() * v[j].clone() / norm.clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[[i, j]].clone()).collect()
    }

    pub fn from_columns(rows: usize, columns: &[Vec<T>]) -> Self {
        Self::from_fn(rows, columns.len(), |i, j| columns[j][i].clone())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && *self == Self::identity(self.rows)
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (i + 1..self.cols).all(|j| self[[i, j]] == self[[j, i]]))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[[j, i]].clone())
    }

    pub fn scale(&self, s: &T) -> Self {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x.clone() * s.clone()).collect() }
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).fold(T::zero(), |acc, i| acc + self[[i, i]].clone())
    }

    /// Kronecker product with `self` as the outer factor.
    pub fn kron(&self, other: &Self) -> Self {
        let (r, c) = (other.rows, other.cols);
        Self::from_fn(self.rows * r, self.cols * c, |i, j| self[[i / r, j / c]].clone() * other[[i % r, j % c]].clone())
    }

    /// Block-diagonal sum.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let mut m = Self::zeros(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[[i, j]] = self[[i, j]].clone();
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                m[[self.rows + i, self.cols + j]] = other[[i, j]].clone();
            }
        }
        m
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[[i, k]];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[[k, j]];
                    if !b.is_zero() {
                        out[[i, j]] = out[[i, j]].clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        out
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&T, &T) -> T) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        }
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[[i, c]].is_zero()) else {
                continue;
            };
            m.swap_rows(p, r);
            let inv = T::one() / m[[r, c]].clone();
            for j in c..m.cols {
                m[[r, j]] = m[[r, j]].clone() * inv.clone();
            }
            for i in 0..m.rows {
                if i != r && !m[[i, c]].is_zero() {
                    let f = m[[i, c]].clone();
                    for j in c..m.cols {
                        let v = m[[r, j]].clone() * f.clone();
                        m[[i, j]] = m[[i, j]].clone() - v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// A basis of the column space made of columns of `self`.
    pub fn column_space(&self) -> Vec<Vec<T>> {
        self.rref().1.into_iter().map(|j| self.column(j)).collect()
    }
}

pub fn dot<T: Scalar>(u: &[T], v: &[T]) -> T {
    u.iter().zip(v).fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
}

/// Orthogonalizes a linearly independent list without normalizing.
pub fn gram_schmidt<T: Scalar>(vectors: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.clone();
        for u in &out {
            let coeff = dot(v, u) / dot(u, u);
            for (wi, ui) in w.iter_mut().zip(u) {
                *wi = wi.clone() - coeff.clone() * ui.clone();
            }
        }
        out.push(w);
    }
    out
}

/// Rescales so the first nonzero entry is one.
pub fn normalize_leading<T: Scalar>(v: &[T]) -> Vec<T> {
    match v.iter().find(|x| !x.is_zero()) {
        Some(lead) => v.iter().map(|x| x.clone() / lead.clone()).collect(),
        None => v.to_vec(),
    }
}

pub fn is_projector<T: Scalar>(m: &Matrix<T>) -> Result<bool> {
    if !m.is_square() {
        return Err(Error::InvalidArgument(format!("{}x{} matrix is not square", m.rows, m.cols)));
    }
    Ok(m.is_symmetric() && &(m * m) == m)
}

/// Checks that `projectors` are projectors summing to the identity.
pub fn is_pvm<T: Scalar>(projectors: &[Matrix<T>]) -> Result<bool> {
    let Some(first) = projectors.first() else {
        return Ok(false);
    };
    let d = first.rows;
    for p in projectors {
        if !p.is_square() || p.rows != d {
            return Err(Error::DimensionMismatch(format!("expected {d}x{d} projectors")));
        }
        if !is_projector(p)? {
            return Ok(false);
        }
    }
    let sum = projectors.iter().skip(1).fold(first.clone(), |acc, p| &acc + p);
    if !sum.is_identity() {
        return Ok(false);
    }
    let orthogonal = projectors.iter().enumerate().all(|(i, p)| projectors[i + 1..].iter().all(|q| (p * q).is_zero()));
    debug_assert!(orthogonal, "projectors summing to the identity must be orthogonal");
    Ok(orthogonal)
}

pub fn commutator<T: Scalar>(m: &Matrix<T>, n: &Matrix<T>) -> Result<Matrix<T>> {
    if !m.is_square() || m.rows != n.rows || m.cols != n.cols {
        return Err(Error::DimensionMismatch(format!("{}x{} vs {}x{}", m.rows, m.cols, n.rows, n.cols)));
    }
    Ok(&(m * n) - &(n * m))
}

impl<T> Index<[usize; 2]> for Matrix<T> {
    type Output = T;

    fn index(&self, [i, j]: [usize; 2]) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<[usize; 2]> for Matrix<T> {
    fn index_mut(&mut self, [i, j]: [usize; 2]) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// # Panics
/// On incompatible shapes; use [`Matrix::checked_mul`] for a fallible product.
impl<T: Scalar> Mul for &Matrix<T> {
    type Output = Matrix<T>;

    fn mul(self, rhs: Self) -> Matrix<T> {
        self.checked_mul(rhs).expect("matrix product shape")
    }
}

impl<T: Scalar> Add for &Matrix<T> {
    type Output = Matrix<T>;

    fn add(self, rhs: Self) -> Matrix<T> {
        self.same_shape(rhs).expect("matrix sum shape");
        self.zip_with(rhs, |a, b| a.clone() + b.clone())
    }
}

impl<T: Scalar> Sub for &Matrix<T> {
    type Output = Matrix<T>;

    fn sub(self, rhs: Self) -> Matrix<T> {
        self.same_shape(rhs).expect("matrix difference shape");
        self.zip_with(rhs, |a, b| a.clone() - b.clone())
    }
}

impl<T: Scalar> Neg for &Matrix<T> {
    type Output = Matrix<T>;

    fn neg(self) -> Matrix<T> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| -x.clone()).collect() }
    }
}

impl<T: fmt::Display> fmt::Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.data[i * self.cols + j].to_string()).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix{}x{}[", self.rows, self.cols)?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{:?}", self.data[i * self.cols + j])?;
            }
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::Zero;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn m(rows: &[&[(i64, i64)]]) -> Matrix<BigRational> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&(n, d)| q(n, d)).collect()).collect()).unwrap()
    }

    #[test]
    fn projector_examples() {
        let plus = m(&[&[(1, 2), (1, 2)], &[(1, 2), (1, 2)]]);
        assert!(is_projector(&plus).unwrap());
        assert!(is_projector(&Matrix::diagonal(vec![q(1, 1), q(0, 1)])).unwrap());
        assert!(!is_projector(&m(&[&[(0, 1), (1, 1)], &[(0, 1), (0, 1)]])).unwrap());
        assert!(is_projector(&Matrix::<BigRational>::zeros(2, 3)).is_err());
    }

    #[test]
    fn pvm_examples() {
        let plus = m(&[&[(1, 2), (1, 2)], &[(1, 2), (1, 2)]]);
        let minus = m(&[&[(1, 2), (-1, 2)], &[(-1, 2), (1, 2)]]);
        assert!(is_pvm(&[plus, minus]).unwrap());
        let id = Matrix::<BigRational>::identity(2);
        assert!(!is_pvm(&[id.clone(), id.clone()]).unwrap());
        assert!(is_pvm(&[id, Matrix::identity(3)]).is_err());
    }

    #[test]
    fn commutator_values() {
        let p = Matrix::diagonal(vec![q(1, 1), q(0, 1)]);
        let plus = m(&[&[(1, 2), (1, 2)], &[(1, 2), (1, 2)]]);
        let minus = m(&[&[(1, 2), (-1, 2)], &[(-1, 2), (1, 2)]]);
        assert_eq!(commutator(&p, &plus).unwrap(), m(&[&[(0, 1), (1, 2)], &[(-1, 2), (0, 1)]]));
        assert!(commutator(&p, &p).unwrap().is_zero());
        assert!(commutator(&plus, &minus).unwrap().is_zero());
    }

    #[test]
    fn kron_and_sum_shapes() {
        let a = Matrix::<BigRational>::identity(2);
        let b = Matrix::<BigRational>::identity(3);
        assert_eq!(a.kron(&b), Matrix::identity(6));
        assert_eq!(a.direct_sum(&b), Matrix::identity(5));
    }

    #[test]
    fn rank_and_column_space() {
        let plus = m(&[&[(1, 2), (1, 2)], &[(1, 2), (1, 2)]]);
        assert_eq!(plus.rank(), 1);
        assert_eq!(plus.column_space(), vec![vec![q(1, 2), q(1, 2)]]);
        assert_eq!(Matrix::<BigRational>::identity(4).rank(), 4);
    }

    #[test]
    fn gram_schmidt_orthogonalizes() {
        let vs = vec![vec![q(1, 1), q(1, 1), q(0, 1)], vec![q(1, 1), q(0, 1), q(1, 1)]];
        let o = gram_schmidt(&vs);
        assert!(dot(&o[0], &o[1]).is_zero());
    }
}
