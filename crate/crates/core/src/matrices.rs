//! Dense matrices attached to a tree: the q-Laplacian, the oriented
//! q,t-Laplacian, and the exponential distance matrices.

use std::collections::VecDeque;
use std::fmt::Write as _;

use num_complex::{Complex64, ComplexFloat};
use num_traits::{Num, One, Zero};
use thiserror::Error;

use crate::trees::LabelledTree;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("cannot delete every row and column")]
    EmptyResult,
    #[error("matrix is not Hermitian at ({0}, {1})")]
    NotHermitian(usize, usize),
    #[error("matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("orientation has {got} flags for {expected} edges")]
    OrientationSize { expected: usize, got: usize },
}

/// Square dense matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Copy + Num> Matrix<T> {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Matrix { n, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn matmul(&self, other: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let n = self.n;
        Matrix::from_fn(n, |i, j| {
            (0..n).fold(T::zero(), |acc, k| acc + self.get(i, k) * other.get(k, j))
        })
    }

    pub fn scale(&self, s: T) -> Matrix<T> {
        Matrix {
            n: self.n,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn trace(&self) -> T {
        (0..self.n).fold(T::zero(), |acc, i| acc + self.get(i, i))
    }

    /// Principal submatrix on the complement of `deleted`, keeping the
    /// relative order of the surviving indices.
    pub fn delete_principal(&self, deleted: &[usize]) -> Result<Matrix<T>, MatrixError> {
        let keep = surviving_indices(self.n, deleted)?;
        Ok(Matrix::from_fn(keep.len(), |i, j| self.get(keep[i], keep[j])))
    }
}

impl<T: ComplexFloat + Num> Matrix<T> {
    /// Largest entry modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Matrix<T>) -> f64
    where
        T::Real: Into<f64>,
    {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).abs().into())
            .fold(0.0, f64::max)
    }

    /// Determinant by LU with partial pivoting.
    pub fn determinant(&self) -> T
    where
        T::Real: PartialOrd,
    {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = T::one();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r, &s| {
                    a[r * n + col]
                        .abs()
                        .partial_cmp(&a[s * n + col].abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap();
            if a[pivot * n + col] == T::zero() {
                return T::zero();
            }
            if pivot != col {
                for k in 0..n {
                    a.swap(pivot * n + k, col * n + k);
                }
                det = T::zero() - det;
            }
            let p = a[col * n + col];
            det = det * p;
            for r in col + 1..n {
                let factor = a[r * n + col] / p;
                if factor != T::zero() {
                    for k in col..n {
                        let v = a[col * n + k];
                        a[r * n + k] = a[r * n + k] - factor * v;
                    }
                }
            }
        }
        det
    }
}

impl Matrix<f64> {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n {
            let cells: Vec<String> = self.row(i).iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(out, "{}", cells.join(",")).unwrap();
        }
        out
    }
}

impl Matrix<Complex64> {
    pub fn from_real(m: &Matrix<f64>) -> Self {
        Matrix::from_fn(m.n, |i, j| Complex64::new(m.get(i, j), 0.0))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n {
            let cells: Vec<String> = self
                .row(i)
                .iter()
                .map(|v| format!("{:.16e}{:+.16e}i", v.re, v.im))
                .collect();
            writeln!(out, "{}", cells.join(",")).unwrap();
        }
        out
    }
}

fn surviving_indices(n: usize, deleted: &[usize]) -> Result<Vec<usize>, MatrixError> {
    let mut drop = vec![false; n];
    for &d in deleted {
        if d >= n {
            return Err(MatrixError::IndexOutOfRange { index: d, n });
        }
        drop[d] = true;
    }
    let keep: Vec<usize> = (0..n).filter(|&i| !drop[i]).collect();
    if keep.is_empty() {
        return Err(MatrixError::EmptyResult);
    }
    Ok(keep)
}

/// Real symmetric matrix. Symmetry holds exactly: entries are generated
/// once for `i <= j` and mirrored.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(Matrix<f64>);

impl SymMatrix {
    pub fn from_upper(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::from_fn(n, |_, _| 0.0);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m.data[i * n + j] = v;
                m.data[j * n + i] = v;
            }
        }
        SymMatrix(m)
    }

    /// Accepts a general matrix if it is exactly symmetric.
    pub fn try_from_matrix(m: Matrix<f64>) -> Result<Self, MatrixError> {
        for i in 0..m.n {
            for j in i + 1..m.n {
                if m.get(i, j) != m.get(j, i) {
                    return Err(MatrixError::NotSymmetric(i, j));
                }
            }
        }
        Ok(SymMatrix(m))
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    pub fn as_matrix(&self) -> &Matrix<f64> {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// Maximum absolute row sum; bounds the spectral radius.
    pub fn max_row_sum(&self) -> f64 {
        (0..self.n())
            .map(|i| self.0.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n())
            .map(|i| self.0.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn delete_principal(&self, deleted: &[usize]) -> Result<SymMatrix, MatrixError> {
        Ok(SymMatrix(self.0.delete_principal(deleted)?))
    }

    pub fn to_csv(&self) -> String {
        self.0.to_csv()
    }
}

/// Complex matrix with `m[j][i] == conj(m[i][j])` exactly and a real diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(Matrix<Complex64>);

impl HermitianMatrix {
    pub fn try_from_matrix(m: Matrix<Complex64>) -> Result<Self, MatrixError> {
        for i in 0..m.n {
            if m.get(i, i).im != 0.0 {
                return Err(MatrixError::NotHermitian(i, i));
            }
            for j in i + 1..m.n {
                if m.get(j, i) != m.get(i, j).conj() {
                    return Err(MatrixError::NotHermitian(i, j));
                }
            }
        }
        Ok(HermitianMatrix(m))
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0.get(i, j)
    }

    pub fn as_matrix(&self) -> &Matrix<Complex64> {
        &self.0
    }

    pub fn max_row_sum(&self) -> f64 {
        (0..self.n())
            .map(|i| self.0.row(i).iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// The real symmetric matrix `[[Re, -Im], [Im, Re]]` of twice the size.
    pub fn real_embedding(&self) -> SymMatrix {
        let n = self.n();
        SymMatrix::from_upper(2 * n, |i, j| {
            let (bi, ri) = (i / n, i % n);
            let (bj, rj) = (j / n, j % n);
            let z = self.get(ri, rj);
            match (bi, bj) {
                (0, 0) | (1, 1) => z.re,
                (0, 1) => -z.im,
                _ => z.im,
            }
        })
    }
}

/// Direction of every edge of a tree, indexed like [`LabelledTree::edges`].
/// `forward[e]` means the arc runs from `edges[e].0` to `edges[e].1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orientation {
    forward: Vec<bool>,
}

impl Orientation {
    pub fn new(t: &LabelledTree, forward: Vec<bool>) -> Result<Self, MatrixError> {
        if forward.len() != t.edges().len() {
            return Err(MatrixError::OrientationSize {
                expected: t.edges().len(),
                got: forward.len(),
            });
        }
        Ok(Orientation { forward })
    }

    /// Every edge directed away from `root`.
    pub fn away_from(t: &LabelledTree, root: usize) -> Self {
        let dist = t.distances_from(root);
        Orientation {
            forward: t.edges().iter().map(|&(a, b)| dist[a] < dist[b]).collect(),
        }
    }

    /// Orientation whose bit `e` of `mask` gives the direction of edge `e`.
    pub fn from_mask(t: &LabelledTree, mask: u64) -> Self {
        Orientation {
            forward: (0..t.edges().len()).map(|e| mask >> e & 1 == 1).collect(),
        }
    }

    /// All `2^(n-1)` orientations of `t`.
    pub fn all(t: &LabelledTree) -> impl Iterator<Item = Orientation> + '_ {
        (0..1u64 << t.edges().len()).map(move |mask| Orientation::from_mask(t, mask))
    }

    /// Arcs as `(tail, head)` pairs.
    pub fn arcs<'a>(&'a self, t: &'a LabelledTree) -> impl Iterator<Item = (usize, usize)> + 'a {
        t.edges()
            .iter()
            .zip(&self.forward)
            .map(|(&(a, b), &f)| if f { (a, b) } else { (b, a) })
    }
}

/// `I + q^2 (D - I) - q A`.
pub fn q_laplacian(t: &LabelledTree, q: f64) -> SymMatrix {
    SymMatrix::from_upper(t.n(), |i, j| {
        if i == j {
            1.0 + q * q * (t.degree(i) as f64 - 1.0)
        } else if t.are_adjacent(i, j) {
            -q
        } else {
            0.0
        }
    })
}

/// Oriented bivariate Laplacian: `-q` on each arc `(i, j)`, `-t` on its
/// reverse, `1 + q t (d_i - 1)` on the diagonal.
pub fn qt_laplacian(t: &LabelledTree, o: &Orientation, q: Complex64, tt: Complex64) -> Matrix<Complex64> {
    let n = t.n();
    let mut m = Matrix::from_fn(n, |i, j| {
        if i == j {
            Complex64::one() + q * tt * (t.degree(i) as f64 - 1.0)
        } else {
            Complex64::zero()
        }
    });
    for (i, j) in o.arcs(t) {
        m.data[i * n + j] = -q;
        m.data[j * n + i] = -tt;
    }
    m
}

/// [`qt_laplacian`] with `t = conj(q)`, which is Hermitian.
pub fn hermitian_qt_laplacian(t: &LabelledTree, o: &Orientation, q: Complex64) -> HermitianMatrix {
    HermitianMatrix::try_from_matrix(qt_laplacian(t, o, q, q.conj())).expect("conj(q) = t gives a Hermitian matrix")
}

/// Entry `q^dist(i, j)`, ones on the diagonal.
pub fn exp_distance(t: &LabelledTree, q: f64) -> SymMatrix {
    let dist: Vec<Vec<usize>> = (0..t.n()).map(|v| t.distances_from(v)).collect();
    SymMatrix::from_upper(t.n(), |i, j| if i == j { 1.0 } else { q.powi(dist[i][j] as i32) })
}

/// Entry `(i, j)` is the product of arc weights along the path from `i` to
/// `j`: `q` for every arc traversed forward, `t` for every arc traversed
/// against its direction.
pub fn exp_distance_qt(t: &LabelledTree, o: &Orientation, q: Complex64, tt: Complex64) -> Matrix<Complex64> {
    let n = t.n();
    let mut weight = vec![Complex64::zero(); n * n];
    let mut step = vec![Complex64::zero(); n * n];
    for (a, b) in o.arcs(t) {
        step[a * n + b] = q;
        step[b * n + a] = tt;
    }
    for source in 0..n {
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([source]);
        seen[source] = true;
        weight[source * n + source] = Complex64::one();
        while let Some(x) = queue.pop_front() {
            for &y in t.neighbors(x) {
                if !seen[y] {
                    seen[y] = true;
                    weight[source * n + y] = weight[source * n + x] * step[x * n + y];
                    queue.push_back(y);
                }
            }
        }
    }
    Matrix { n, data: weight }
}
