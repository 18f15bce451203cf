//! Dense complex linear algebra over a generic real scalar.
//!
//! Everything here works on plain row-major matrices and `Vec` vectors; the
//! labeled layer in [`crate::registers`] is built on top of it.

use std::fmt::{Debug, Display};
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use num_traits::{Float, FromPrimitive, One, Zero};

/// Real scalar type underlying all complex arithmetic.
pub trait Real: Float + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {
    /// Tolerance used for rank and inclusion decisions when none is supplied.
    fn default_eps() -> Self;

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }
}

impl Real for f64 {
    fn default_eps() -> Self {
        1e-9
    }
}

impl Real for f32 {
    fn default_eps() -> Self {
        1e-4
    }
}

pub type C<T> = Complex<T>;

pub fn c<T: Real>(re: f64, im: f64) -> C<T> {
    Complex::new(T::lit(re), T::lit(im))
}

/// Hermitian inner product, conjugate-linear in the first argument.
pub fn dot<T: Real>(a: &[C<T>], b: &[C<T>]) -> C<T> {
    a.iter()
        .zip(b)
        .fold(C::zero(), |acc, (x, y)| acc + x.conj() * y)
}

pub fn norm<T: Real>(a: &[C<T>]) -> T {
    a.iter().fold(T::zero(), |acc, x| acc + x.norm_sqr()).sqrt()
}

pub fn scale<T: Real>(a: &[C<T>], s: C<T>) -> Vec<C<T>> {
    a.iter().map(|x| *x * s).collect()
}

pub fn sub<T: Real>(a: &[C<T>], b: &[C<T>]) -> Vec<C<T>> {
    a.iter().zip(b).map(|(x, y)| *x - *y).collect()
}

pub fn add<T: Real>(a: &[C<T>], b: &[C<T>]) -> Vec<C<T>> {
    a.iter().zip(b).map(|(x, y)| *x + *y).collect()
}

pub fn normalize<T: Real>(a: &[C<T>]) -> Option<Vec<C<T>>> {
    let n = norm(a);
    if n == T::zero() {
        None
    } else {
        Some(scale(a, C::new(T::one() / n, T::zero())))
    }
}

pub fn basis_vector<T: Real>(n: usize, i: usize) -> Vec<C<T>> {
    let mut v = vec![C::zero(); n];
    v[i] = C::one();
    v
}

pub fn kron_vec<T: Real>(a: &[C<T>], b: &[C<T>]) -> Vec<C<T>> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(*x * *y);
        }
    }
    out
}

/// Removes from `v` its components along the orthonormal vectors `basis`.
fn project_out<T: Real>(v: &mut [C<T>], basis: &[Vec<C<T>>]) {
    for q in basis {
        let p = dot(q, v);
        for (x, y) in v.iter_mut().zip(q) {
            *x = *x - p * *y;
        }
    }
}

/// Pivoted Gram-Schmidt. Repeatedly picks the candidate with the largest
/// residual; stops once every residual is at most `eps` or `limit` vectors
/// have been produced.
pub fn orthonormalize_with<T: Real>(
    start: &[Vec<C<T>>],
    vectors: &[Vec<C<T>>],
    eps: T,
    limit: usize,
) -> Vec<Vec<C<T>>> {
    let mut residual: Vec<Vec<C<T>>> = vectors
        .iter()
        .map(|v| {
            let mut w = v.clone();
            project_out(&mut w, start);
            project_out(&mut w, start);
            w
        })
        .collect();
    let mut out: Vec<Vec<C<T>>> = Vec::new();
    while out.len() < limit && !residual.is_empty() {
        let (best, best_norm) = residual.iter().enumerate().map(|(i, v)| (i, norm(v))).fold(
            (0, T::neg_infinity()),
            |acc, x| if x.1 > acc.1 { x } else { acc },
        );
        if best_norm <= eps {
            break;
        }
        let mut q = residual.swap_remove(best);
        project_out(&mut q, start);
        project_out(&mut q, &out);
        let n = norm(&q);
        if n <= eps {
            continue;
        }
        let q = scale(&q, C::new(T::one() / n, T::zero()));
        for r in residual.iter_mut() {
            let p = dot(&q, r);
            for (x, y) in r.iter_mut().zip(&q) {
                *x = *x - p * *y;
            }
        }
        out.push(q);
    }
    out
}

pub fn orthonormalize<T: Real>(vectors: &[Vec<C<T>>], eps: T) -> Vec<Vec<C<T>>> {
    orthonormalize_with(&[], vectors, eps, usize::MAX)
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// orthonormal family `basis` inside `C^n`.
pub fn complement<T: Real>(basis: &[Vec<C<T>>], n: usize) -> Vec<Vec<C<T>>> {
    let target = n.saturating_sub(basis.len());
    let candidates: Vec<Vec<C<T>>> = (0..n).map(|i| basis_vector(n, i)).collect();
    orthonormalize_with(
        basis,
        &candidates,
        T::lit(1e-3) / T::lit((n.max(1)) as f64),
        target,
    )
}

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T: Real> {
    rows: usize,
    cols: usize,
    data: Vec<C<T>>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![C::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> C<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<C<T>>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged matrix rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.concat(),
        }
    }

    pub fn from_columns(rows: usize, cols: &[Vec<C<T>>]) -> Self {
        Self::from_fn(rows, cols.len(), |r, c| cols[c][r])
    }

    pub fn column_vector(v: &[C<T>]) -> Self {
        Matrix {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    /// `|v⟩⟨w|`
    pub fn outer(v: &[C<T>], w: &[C<T>]) -> Self {
        Self::from_fn(v.len(), w.len(), |r, c| v[r] * w[c].conj())
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

    pub fn data(&self) -> &[C<T>] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[C<T>] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<C<T>> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn columns(&self) -> Vec<Vec<C<T>>> {
        (0..self.cols).map(|c| self.column(c)).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| *x * s).collect(),
        }
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.scale(C::new(s, T::zero()))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                let orow = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d = *d + a * *b;
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        (0..self.rows).map(|r| dot_plain(self.row(r), v)).collect()
    }

    /// `A ρ A†`
    pub fn conjugate(&self, rho: &Self) -> Self {
        self.matmul(rho).matmul(&self.adjoint())
    }

    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        Self::from_fn(rows, cols, |r, c| {
            self[(r / other.rows, c / other.cols)] * other[(r % other.rows, c % other.cols)]
        })
    }

    pub fn trace(&self) -> C<T> {
        (0..self.rows.min(self.cols)).fold(C::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn frobenius(&self) -> T {
        norm(&self.data)
    }

    pub fn dist(&self, other: &Self) -> T {
        if self.rows != other.rows || self.cols != other.cols {
            return T::infinity();
        }
        norm(&sub(&self.data, &other.data))
    }

    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        self.dist(other) <= tol
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.is_square() && self.dist(&self.adjoint()) <= tol
    }

    /// `‖A†A − I‖_F ≤ tol`
    pub fn is_isometry(&self, tol: T) -> bool {
        self.adjoint().matmul(self).dist(&Self::identity(self.cols)) <= tol
    }

    pub fn is_unitary(&self, tol: T) -> bool {
        self.is_square() && self.is_isometry(tol)
    }

    pub fn is_projector(&self, tol: T) -> bool {
        self.is_hermitian(tol) && self.matmul(self).dist(self) <= tol
    }

    pub fn map(&self, f: impl Fn(C<T>) -> C<T>) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| f(*x)).collect(),
        }
    }

    /// Converts the scalar type.
    pub fn cast<U: Real>(&self) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|x| {
                    Complex::new(
                        U::from(x.re).expect("castable"),
                        U::from(x.im).expect("castable"),
                    )
                })
                .collect(),
        }
    }

    /// Orthonormal basis of the column space.
    pub fn range(&self, eps: T) -> Vec<Vec<C<T>>> {
        orthonormalize(&self.columns(), eps)
    }

    /// Orthonormal basis of `{x : A x = 0}`.
    pub fn kernel(&self, eps: T) -> Vec<Vec<C<T>>> {
        let rows: Vec<Vec<C<T>>> = (0..self.rows)
            .map(|r| self.row(r).iter().map(|x| x.conj()).collect())
            .collect();
        let row_space = orthonormalize(&rows, eps);
        complement(&row_space, self.cols)
    }
}

fn dot_plain<T: Real>(a: &[C<T>], b: &[C<T>]) -> C<T> {
    a.iter().zip(b).fold(C::zero(), |acc, (x, y)| acc + *x * *y)
}

impl<T: Real> Index<(usize, usize)> for Matrix<T> {
    type Output = C<T>;
    fn index(&self, (r, c): (usize, usize)) -> &C<T> {
        &self.data[r * self.cols + c]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C<T> {
        &mut self.data[r * self.cols + c]
    }
}

impl<T: Real> Add for &Matrix<T> {
    type Output = Matrix<T>;
    fn add(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "add shape mismatch"
        );
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: add(&self.data, &rhs.data),
        }
    }
}

impl<T: Real> Sub for &Matrix<T> {
    type Output = Matrix<T>;
    fn sub(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "sub shape mismatch"
        );
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: sub(&self.data, &rhs.data),
        }
    }
}

impl<T: Real> Mul for &Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        self.matmul(rhs)
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations. Returns eigenvalues in ascending order and the matching
/// orthonormal eigenvectors.
pub fn eigh<T: Real>(m: &Matrix<T>) -> (Vec<T>, Vec<Vec<C<T>>>) {
    assert!(m.is_square(), "eigh needs a square matrix");
    let n = m.rows();
    let mut a = m.clone();
    // symmetrize to suppress rounding noise
    for i in 0..n {
        a[(i, i)] = C::new(a[(i, i)].re, T::zero());
        for j in i + 1..n {
            let v = (a[(i, j)] + a[(j, i)].conj()).scale(T::lit(0.5));
            a[(i, j)] = v;
            a[(j, i)] = v.conj();
        }
    }
    let mut v = Matrix::<T>::identity(n);
    let scale_ref = a.frobenius().max(T::min_positive_value());
    for _sweep in 0..100 {
        let mut off = T::zero();
        for i in 0..n {
            for j in i + 1..n {
                off = off + a[(i, j)].norm_sqr();
            }
        }
        if off.sqrt() <= scale_ref * T::epsilon() * T::lit(0.5) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= T::min_positive_value() {
                    continue;
                }
                let phase = apq.unscale(r);
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (T::lit(2.0) * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let t = if theta == T::zero() { T::one() } else { t };
                let cs = T::one() / (t * t + T::one()).sqrt();
                let sn = t * cs;
                let cc = C::new(cs, T::zero());
                let ss = C::new(sn, T::zero());
                let ph = phase.conj();
                // G = [[c, s], [-s e^{-iφ}, c e^{-iφ}]]
                let g = [[cc, ss], [-ss * ph, cc * ph]];
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * g[0][0] + akq * g[1][0];
                    a[(k, q)] = akp * g[0][1] + akq * g[1][1];
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = g[0][0].conj() * apk + g[1][0].conj() * aqk;
                    a[(q, k)] = g[0][1].conj() * apk + g[1][1].conj() * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * g[0][0] + vkq * g[1][0];
                    v[(k, q)] = vkp * g[0][1] + vkq * g[1][1];
                }
                a[(p, q)] = C::zero();
                a[(q, p)] = C::zero();
            }
        }
    }
    let mut pairs: Vec<(T, Vec<C<T>>)> = (0..n).map(|i| (a[(i, i)].re, v.column(i))).collect();
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));
    pairs.into_iter().unzip()
}

/// Singular value decomposition `A = Σ σᵢ uᵢ vᵢ†` keeping the terms with
/// `σᵢ > eps`, in descending order of `σᵢ`.
pub fn svd<T: Real>(m: &Matrix<T>, eps: T) -> Vec<(T, Vec<C<T>>, Vec<C<T>>)> {
    let (vals, vecs) = eigh(&m.matmul(&m.adjoint()));
    let mut out = Vec::new();
    for (lam, u) in vals.into_iter().zip(vecs).rev() {
        let sigma = lam.max(T::zero()).sqrt();
        if sigma <= eps {
            continue;
        }
        let w = m.adjoint().apply(&u);
        let v = scale(&w, C::new(T::one() / sigma, T::zero()));
        out.push((sigma, u, v));
    }
    out
}

impl<T: Real> Display for Matrix<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for r in 0..self.rows {
            let cells: Vec<String> = self.row(r).iter().map(|x| format!("{x:.4}")).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

pub fn one<T: Real>() -> C<T> {
    C::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigh_recovers_hermitian() {
        let m: Matrix<f64> = Matrix::from_rows(&[
            vec![c(2.0, 0.0), c(0.0, 1.0), c(1.0, -1.0)],
            vec![c(0.0, -1.0), c(3.0, 0.0), c(0.5, 0.0)],
            vec![c(1.0, 1.0), c(0.5, 0.0), c(-1.0, 0.0)],
        ]);
        let (vals, vecs) = eigh(&m);
        let mut rebuilt = Matrix::zeros(3, 3);
        for (l, v) in vals.iter().zip(&vecs) {
            rebuilt = &rebuilt + &Matrix::outer(v, v).scale_real(*l);
        }
        assert!(rebuilt.approx_eq(&m, 1e-10));
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn kernel_of_rank_one() {
        let m: Matrix<f64> = Matrix::from_rows(&[vec![c(1.0, 0.0), c(1.0, 0.0)]]);
        let k = m.kernel(1e-9);
        assert_eq!(k.len(), 1);
        assert!(norm(&m.apply(&k[0])) < 1e-12);
    }

    #[test]
    fn complement_dimension() {
        let v = vec![normalize(&[c::<f64>(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap()];
        let comp = complement(&v, 3);
        assert_eq!(comp.len(), 2);
        for w in &comp {
            assert!(dot(&v[0], w).norm() < 1e-12);
        }
    }

    #[test]
    fn svd_reconstructs() {
        let m: Matrix<f64> = Matrix::from_rows(&[
            vec![c(1.0, 0.0), c(2.0, 1.0)],
            vec![c(0.0, 3.0), c(1.0, 0.0)],
            vec![c(1.0, 1.0), c(0.0, 0.0)],
        ]);
        let parts = svd(&m, 1e-12);
        let mut rebuilt = Matrix::zeros(3, 2);
        for (s, u, v) in &parts {
            rebuilt = &rebuilt + &Matrix::outer(u, v).scale_real(*s);
        }
        assert!(rebuilt.approx_eq(&m, 1e-10));
    }

    #[test]
    fn single_precision_eigh() {
        let m: Matrix<f32> = Matrix::from_rows(&[
            vec![c(1.0, 0.0), c(0.0, 2.0)],
            vec![c(0.0, -2.0), c(1.0, 0.0)],
        ]);
        let (vals, _) = eigh(&m);
        assert!((vals[0] + 1.0).abs() < 1e-5 && (vals[1] - 3.0).abs() < 1e-5);
    }
}
