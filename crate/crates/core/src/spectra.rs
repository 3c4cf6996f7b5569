//! Dense eigensolvers and polynomial root finding.
//!
//! `sym_eigen` is Householder tridiagonalization followed by implicit QL with
//! Wilkinson shifts. `jacobi_eigen` is an independent cyclic Jacobi solver.
//! Hermitian matrices go through their real symmetric embedding.

use std::cmp::Ordering;

use num_complex::Complex64;
use thiserror::Error;

use crate::matrices::{HermitianMatrix, Matrix, SymMatrix};

pub const QL_ITERATION_CAP: usize = 50;
pub const JACOBI_SWEEP_CAP: usize = 100;
pub const ABERTH_SWEEP_CAP: usize = 200;
pub const CLUSTER_REL_TOL: f64 = 1e-7;
pub const PAIRING_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectraError {
    #[error("QL iteration did not converge for eigenvalue {index} within {cap} iterations")]
    QlNoConvergence { index: usize, cap: usize },
    #[error("Jacobi iteration did not converge within {0} sweeps")]
    JacobiNoConvergence(usize),
    #[error("root finder did not converge within {0} sweeps")]
    RootsNoConvergence(usize),
    #[error("Hermitian embedding eigenvalues failed to pair: gap {gap:e} at pair {pair}")]
    PairingFailure { pair: usize, gap: f64 },
    #[error("polynomial has degree 0 or a zero leading coefficient")]
    DegeneratePolynomial,
    #[error("{got} roots cannot be matched against {expected} eigenvalues")]
    CountMismatch { expected: usize, got: usize },
}

fn descending(a: &f64, b: &f64) -> Ordering {
    b.total_cmp(a)
}

/// Greedy gap clustering of values sorted in descending order. Adjacent
/// values share a cluster iff their gap is at most `1e-7 * (1 + scale)`.
pub fn cluster(values: &[f64], scale: f64) -> Vec<Vec<usize>> {
    let tol = CLUSTER_REL_TOL * (1.0 + scale.abs());
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match out.last_mut() {
            Some(last) if (values[i - 1] - v).abs() <= tol => last.push(i),
            _ => out.push(vec![i]),
        }
    }
    out
}

/// Real eigenvalues sorted descending, with multiplicity clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub cluster_tol: f64,
    pub clusters: Vec<Vec<usize>>,
}

impl Spectrum {
    /// Sorts `values` descending and clusters them relative to `scale`.
    pub fn from_values(mut values: Vec<f64>, scale: f64) -> Self {
        values.sort_by(descending);
        let clusters = cluster(&values, scale);
        Spectrum {
            values,
            cluster_tol: CLUSTER_REL_TOL * (1.0 + scale.abs()),
            clusters,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn lambda_max(&self) -> f64 {
        self.values[0]
    }

    pub fn lambda_min(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Second smallest eigenvalue; `None` for a 1×1 matrix.
    pub fn lambda_a(&self) -> Option<f64> {
        let n = self.values.len();
        (n >= 2).then(|| self.values[n - 2])
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn product(&self) -> f64 {
        self.values.iter().product()
    }

    /// Cluster id of each eigenvalue, in order.
    pub fn cluster_ids(&self) -> Vec<usize> {
        let mut ids = vec![0; self.values.len()];
        for (c, members) in self.clusters.iter().enumerate() {
            for &i in members {
                ids[i] = c;
            }
        }
        ids
    }

    /// Cluster holding the smallest eigenvalue.
    pub fn min_cluster_size(&self) -> usize {
        self.clusters.last().map_or(0, Vec::len)
    }

    /// `index,value,cluster` rows with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,value,cluster\n");
        for (i, (v, c)) in self.values.iter().zip(self.cluster_ids()).enumerate() {
            out.push_str(&format!("{i},{v:.16e},{c}\n"));
        }
        out
    }
}

/// Eigenvalues descending with unit eigenvectors; `vectors[k]` belongs to
/// `values[k]`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl EigenDecomposition {
    /// Largest `||M v - λ v||_2` over all pairs.
    pub fn max_residual(&self, m: &SymMatrix) -> f64 {
        self.values
            .iter()
            .zip(&self.vectors)
            .map(|(&lambda, v)| {
                let mv = m.mul_vec(v);
                mv.iter().zip(v).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt()
            })
            .fold(0.0, f64::max)
    }
}

/// Householder reduction of the symmetric matrix held in `v` to tridiagonal
/// form. On return `d` is the diagonal, `e[1..]` the subdiagonal and `v` the
/// accumulated orthogonal transform.
fn tridiagonalize(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[n - 1][j];
    }
    for i in (1..n).rev() {
        let scale: f64 = d[..i].iter().map(|x| x.abs()).sum();
        let mut h = 0.0;
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
                v[j][i] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for x in e[..i].iter_mut() {
                *x = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[j][i] = f;
                g = e[j] + v[j][j] * f;
                for k in j + 1..i {
                    g += v[k][j] * d[k];
                    e[k] += v[k][j] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k][j] -= f * e[k] + g * d[k];
                }
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[n - 1][i] = v[i][i];
        v[i][i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let g: f64 = (0..=i).map(|k| v[k][i + 1] * v[k][j]).sum();
                for k in 0..=i {
                    v[k][j] -= g * d[k];
                }
            }
        }
        for row in v[..=i].iter_mut() {
            row[i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = 0.0;
    }
    v[n - 1][n - 1] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL with Wilkinson shifts on the tridiagonal `(d, e)`, rotating
/// the columns of `z` along. `e[i]` couples `d[i-1]` and `d[i]` on entry.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], z: &mut [Vec<f64>]) -> Result<(), SpectraError> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd + f64::MIN_POSITIVE {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > QL_ITERATION_CAP {
                return Err(SpectraError::QlNoConvergence { index: l, cap: QL_ITERATION_CAP });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for row in z.iter_mut() {
                    f = row[i + 1];
                    row[i + 1] = s * row[i] + c * f;
                    row[i] = c * row[i] - s * f;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Full eigendecomposition of a real symmetric matrix.
pub fn sym_eigen_vectors(m: &SymMatrix) -> Result<EigenDecomposition, SpectraError> {
    let n = m.n();
    if n == 0 {
        return Ok(EigenDecomposition { values: vec![], vectors: vec![] });
    }
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m.get(i, j)).collect()).collect();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut v, &mut d, &mut e);
    tridiagonal_ql(&mut d, &mut e, &mut v)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| descending(&d[a], &d[b]));
    Ok(EigenDecomposition {
        values: order.iter().map(|&k| d[k]).collect(),
        vectors: order.iter().map(|&k| (0..n).map(|i| v[i][k]).collect()).collect(),
    })
}

pub fn sym_eigen(m: &SymMatrix) -> Result<Spectrum, SpectraError> {
    let dec = sym_eigen_vectors(m)?;
    Ok(Spectrum::from_values(dec.values, m.max_row_sum()))
}

/// Cyclic Jacobi rotations; eigenvalues only, sorted descending.
pub fn jacobi_eigen(m: &SymMatrix) -> Result<Vec<f64>, SpectraError> {
    let n = m.n();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m.get(i, j)).collect()).collect();
    let target = (f64::EPSILON * m.frobenius_norm()).powi(2);
    let off = |a: &[Vec<f64>]| -> f64 {
        (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum()
    };
    let mut sweeps = 0;
    while off(&a) > target {
        sweeps += 1;
        if sweeps > JACOBI_SWEEP_CAP {
            return Err(SpectraError::JacobiNoConvergence(JACOBI_SWEEP_CAP));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                for row in a.iter_mut() {
                    let (x, y) = (row[p], row[q]);
                    row[p] = c * x - s * y;
                    row[q] = s * x + c * y;
                }
                for k in 0..n {
                    let (x, y) = (a[p][k], a[q][k]);
                    a[p][k] = c * x - s * y;
                    a[q][k] = s * x + c * y;
                }
                a[p][q] = 0.0;
                a[q][p] = 0.0;
            }
        }
    }
    let mut values: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    values.sort_by(descending);
    Ok(values)
}

/// Spectrum of a Hermitian matrix through its real embedding of size `2n`,
/// whose eigenvalues come in equal pairs.
pub fn herm_eigen(m: &HermitianMatrix) -> Result<Spectrum, SpectraError> {
    let embedded = m.real_embedding();
    let doubled = sym_eigen(&embedded)?.values;
    let scale = m.max_row_sum();
    let tol = PAIRING_TOL * (1.0 + scale);
    let mut values = Vec::with_capacity(m.n());
    for (pair, w) in doubled.chunks(2).enumerate() {
        let gap = (w[0] - w[1]).abs();
        if gap > tol {
            return Err(SpectraError::PairingFailure { pair, gap });
        }
        values.push(0.5 * (w[0] + w[1]));
    }
    Ok(Spectrum::from_values(values, scale))
}

/// Complex roots of a polynomial with their residuals `|p(r)|`.
#[derive(Debug, Clone)]
pub struct RootSet {
    pub roots: Vec<Complex64>,
    pub residuals: Vec<f64>,
}

impl RootSet {
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn max_imag(&self) -> f64 {
        self.roots.iter().map(|r| r.im.abs()).fold(0.0, f64::max)
    }

    /// Roots sorted by descending real part.
    pub fn sorted_by_real(&self) -> Vec<Complex64> {
        let mut r = self.roots.clone();
        r.sort_by(|a, b| b.re.total_cmp(&a.re));
        r
    }
}

fn horner_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

fn abs_scale(coeffs: &[Complex64], z: Complex64) -> f64 {
    let r = z.norm();
    coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
}

/// Roots of a complex polynomial given lowest degree first, by Aberth–Ehrlich
/// iteration from a perturbed circle of the Cauchy bound. Exact zero roots
/// are split off first.
pub fn poly_roots_complex(coeffs: &[Complex64]) -> Result<RootSet, SpectraError> {
    let degree = coeffs.len().checked_sub(1).ok_or(SpectraError::DegeneratePolynomial)?;
    if degree == 0 || coeffs[degree] == Complex64::new(0.0, 0.0) {
        return Err(SpectraError::DegeneratePolynomial);
    }
    let zeros = coeffs.iter().take_while(|c| c.norm() == 0.0).count();
    let reduced = &coeffs[zeros..];
    let d = reduced.len() - 1;
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
    if d > 0 {
        let lead = reduced[d];
        let bound = 1.0 + reduced[..d].iter().map(|c| (c / lead).norm()).fold(0.0, f64::max);
        let mut z: Vec<Complex64> = (0..d)
            .map(|k| {
                let angle = std::f64::consts::TAU * k as f64 / d as f64 + 0.4;
                let radius = bound * (0.5 + 0.5 * (k as f64 + 1.0) / d as f64);
                Complex64::from_polar(radius, angle)
            })
            .collect();
        let mut converged = vec![false; d];
        let mut sweeps = 0;
        while converged.iter().any(|c| !c) {
            sweeps += 1;
            if sweeps > ABERTH_SWEEP_CAP {
                return Err(SpectraError::RootsNoConvergence(ABERTH_SWEEP_CAP));
            }
            for k in 0..d {
                if converged[k] {
                    continue;
                }
                let (p, dp) = horner_with_derivative(reduced, z[k]);
                if p.norm() <= 4.0 * f64::EPSILON * abs_scale(reduced, z[k]) {
                    converged[k] = true;
                    continue;
                }
                let ratio = p / dp;
                let repulsion: Complex64 = (0..d).filter(|&j| j != k).map(|j| (z[k] - z[j]).inv()).sum();
                let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
                if !step.is_finite() {
                    continue;
                }
                z[k] -= step;
                if step.norm() <= f64::EPSILON * z[k].norm() {
                    converged[k] = true;
                }
            }
        }
        roots.extend(z);
    }
    let residuals = roots.iter().map(|&r| horner_with_derivative(coeffs, r).0.norm()).collect();
    Ok(RootSet { roots, residuals })
}

/// Roots of a real polynomial given lowest degree first.
pub fn poly_roots(coeffs: &[f64]) -> Result<RootSet, SpectraError> {
    let c: Vec<Complex64> = coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    poly_roots_complex(&c)
}

/// Characteristic polynomial `det(xI - M)` of a general complex matrix,
/// lowest degree first, via stabilized elimination to Hessenberg form and
/// Hyman's recurrence.
pub fn charpoly_numeric(m: &Matrix<Complex64>) -> Vec<Complex64> {
    let n = m.n();
    let zero = Complex64::new(0.0, 0.0);
    let mut a: Vec<Vec<Complex64>> = (0..n).map(|i| m.row(i).to_vec()).collect();
    for c in 0..n.saturating_sub(2) {
        let pivot = (c + 1..n).max_by(|&x, &y| a[x][c].norm().total_cmp(&a[y][c].norm())).unwrap();
        if pivot != c + 1 {
            a.swap(pivot, c + 1);
            for row in a.iter_mut() {
                row.swap(pivot, c + 1);
            }
        }
        let piv = a[c + 1][c];
        if piv == zero {
            continue;
        }
        for i in c + 2..n {
            let y = a[i][c] / piv;
            if y == zero {
                continue;
            }
            for j in c..n {
                let t = a[c + 1][j];
                a[i][j] -= y * t;
            }
            for row in a.iter_mut() {
                let t = row[i];
                row[c + 1] += y * t;
            }
        }
    }
    // p[k] is the characteristic polynomial of the leading k×k block
    let mut p: Vec<Vec<Complex64>> = vec![vec![Complex64::new(1.0, 0.0)]];
    for k in 0..n {
        let prev = &p[k];
        let mut next = vec![zero; k + 2];
        for (i, &c) in prev.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= a[k][k] * c;
        }
        let mut sub = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            sub *= a[i + 1][i];
            let coef = a[i][k] * sub;
            for (j, &c) in p[i].iter().enumerate() {
                next[j] -= coef * c;
            }
        }
        p.push(next);
    }
    p.pop().unwrap()
}

/// Eigenvalues of a general complex matrix as roots of its characteristic
/// polynomial.
pub fn general_eigenvalues(m: &Matrix<Complex64>) -> Result<RootSet, SpectraError> {
    poly_roots_complex(&charpoly_numeric(m))
}

fn derivative(coeffs: &[Complex64]) -> Vec<Complex64> {
    coeffs.iter().enumerate().skip(1).map(|(k, &c)| c * k as f64).collect()
}

fn nth_derivative(coeffs: &[Complex64], k: usize) -> Vec<Complex64> {
    (0..k).fold(coeffs.to_vec(), |p, _| derivative(&p))
}

/// Locates the multiple root approximated by `members` as the simple root of
/// the `(m-1)`-th derivative near their centroid. The individual roots of an
/// `m`-fold root scatter by about `eps^(1/m)`; this estimate does not.
pub fn refine_cluster(coeffs: &[Complex64], members: &[Complex64]) -> Complex64 {
    let m = members.len();
    let mut z: Complex64 = members.iter().sum::<Complex64>() / m as f64;
    if m == 1 {
        return z;
    }
    let poly = nth_derivative(coeffs, m - 1);
    for _ in 0..50 {
        let (p, dp) = horner_with_derivative(&poly, z);
        if dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        z -= step;
        if step.norm() <= f64::EPSILON * (1.0 + z.norm()) {
            break;
        }
    }
    z
}

/// Groups roots lying within `radius * (1 + |r|)` of each other (single
/// linkage) and refines every group with [`refine_cluster`]. Returns
/// `(location, multiplicity)` pairs.
pub fn refined_root_clusters(coeffs: &[Complex64], roots: &[Complex64], radius: f64) -> Vec<(Complex64, usize)> {
    let n = roots.len();
    let mut group: Vec<usize> = (0..n).collect();
    fn find(g: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while g[r] != r {
            r = g[r];
        }
        g[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (roots[i] - roots[j]).norm() <= radius * (1.0 + roots[i].norm()) {
                let (a, b) = (find(&mut group, i), find(&mut group, j));
                group[a.max(b)] = a.min(b);
            }
        }
    }
    let mut members: std::collections::BTreeMap<usize, Vec<Complex64>> = std::collections::BTreeMap::new();
    for i in 0..n {
        let g = find(&mut group, i);
        members.entry(g).or_default().push(roots[i]);
    }
    members.values().map(|m| (refine_cluster(coeffs, m), m.len())).collect()
}

/// Compares the roots of `coeffs` against a reference spectrum cluster by
/// cluster and returns the largest deviation. Roots are sorted by real part,
/// grouped like the reference clusters and refined with [`refine_cluster`].
pub fn cluster_root_distance(coeffs: &[Complex64], roots: &[Complex64], reference: &Spectrum) -> Result<f64, SpectraError> {
    if roots.len() != reference.len() {
        return Err(SpectraError::CountMismatch { expected: reference.len(), got: roots.len() });
    }
    let mut sorted = roots.to_vec();
    sorted.sort_by(|a, b| b.re.total_cmp(&a.re));
    let worst = reference
        .clusters
        .iter()
        .map(|members| {
            let group: Vec<Complex64> = members.iter().map(|&i| sorted[i]).collect();
            let z = refine_cluster(coeffs, &group);
            let target: f64 = members.iter().map(|&i| reference.values[i]).sum::<f64>() / members.len() as f64;
            (z - target).norm()
        })
        .fold(0.0, f64::max);
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrices::{q_laplacian, HermitianMatrix};
    use crate::trees::LabelledTree;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn star_laplacian_spectrum() {
        let s6 = LabelledTree::star(6).unwrap();
        let spec = sym_eigen(&q_laplacian(&s6, 1.0)).unwrap();
        assert!(close(&spec.values, &[6.0, 1.0, 1.0, 1.0, 1.0, 0.0], 1e-12));
        let sizes: Vec<usize> = spec.clusters.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![1, 4, 1]);
    }

    #[test]
    fn k2_spectrum() {
        let k2 = LabelledTree::path(2).unwrap();
        for q in [0.3, -0.7, 2.0] {
            let spec = sym_eigen(&q_laplacian(&k2, q)).unwrap();
            assert!(close(&spec.values, &[1.0 + f64::abs(q), 1.0 - f64::abs(q)], 1e-14));
        }
    }

    #[test]
    fn one_by_one_and_diagonal() {
        let m = SymMatrix::from_upper(1, |_, _| 3.5);
        assert_eq!(sym_eigen(&m).unwrap().values, vec![3.5]);
        let d = SymMatrix::from_upper(3, |i, j| if i == j { [2.0, -1.0, 5.0][i] } else { 0.0 });
        assert_eq!(sym_eigen(&d).unwrap().values, vec![5.0, 2.0, -1.0]);
        assert_eq!(jacobi_eigen(&d).unwrap(), vec![5.0, 2.0, -1.0]);
    }

    #[test]
    fn ql_matches_jacobi_and_residuals() {
        let m = SymMatrix::from_upper(7, |i, j| ((i * 7 + j * 3) % 11) as f64 - 5.0 + if i == j { 0.25 } else { 0.0 });
        let dec = sym_eigen_vectors(&m).unwrap();
        let jac = jacobi_eigen(&m).unwrap();
        assert!(close(&dec.values, &jac, 1e-10));
        assert!(dec.max_residual(&m) <= 1e-10 * m.frobenius_norm());
        let trace: f64 = dec.values.iter().sum();
        assert!((trace - m.trace()).abs() < 1e-10);
    }

    #[test]
    fn hermitian_k2_at_i() {
        let i = Complex64::new(0.0, 1.0);
        let m = Matrix::from_fn(2, |r, c| if r == c { Complex64::new(2.0, 0.0) } else if r == 0 { -i } else { i });
        let h = HermitianMatrix::try_from_matrix(m).unwrap();
        let spec = herm_eigen(&h).unwrap();
        assert!(close(&spec.values, &[3.0, 1.0], 1e-12));
    }

    #[test]
    fn roots_of_shifted_squares() {
        // (x - 1)^2 - 0.09
        let roots = poly_roots(&[0.91, -2.0, 1.0]).unwrap();
        let mut re: Vec<f64> = roots.sorted_by_real().iter().map(|z| z.re).collect();
        re.reverse();
        assert!(close(&re, &[0.7, 1.3], 1e-14));
        assert!(roots.max_imag() < 1e-14);
    }

    #[test]
    fn single_zero_root() {
        let roots = poly_roots(&[0.0, -0.25]).unwrap();
        assert_eq!(roots.roots, vec![Complex64::new(0.0, 0.0)]);
        assert_eq!(poly_roots(&[1.0, 0.0]).unwrap_err(), SpectraError::DegeneratePolynomial);
        assert_eq!(poly_roots(&[1.0]).unwrap_err(), SpectraError::DegeneratePolynomial);
    }

    #[test]
    fn multiple_root_centroid() {
        // (x - 1)^4 (x - 3)
        let coeffs = [-3.0, 13.0, -22.0, 18.0, -7.0, 1.0];
        let roots = poly_roots(&coeffs).unwrap();
        let reference = Spectrum::from_values(vec![3.0, 1.0, 1.0, 1.0, 1.0], 3.0);
        let c: Vec<Complex64> = coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let dist = cluster_root_distance(&c, &roots.roots, &reference).unwrap();
        assert!(dist < 1e-12, "{dist:e}");
        let groups = refined_root_clusters(&c, &roots.roots, 1e-2);
        assert_eq!(groups.len(), 2);
        assert!(groups.iter().any(|&(z, m)| m == 4 && (z - 1.0).norm() < 1e-12));
    }

    #[test]
    fn numeric_charpoly_of_companion_like_matrix() {
        let m = Matrix::from_fn(3, |i, j| Complex64::new([[2.0, 1.0, 0.0], [4.0, -1.0, 3.0], [1.0, 5.0, 0.5]][i][j], 0.0));
        let p = charpoly_numeric(&m);
        assert_eq!(p.len(), 4);
        assert!((p[3] - 1.0).norm() < 1e-14);
        assert!((p[2] + m.trace()).norm() < 1e-12);
        assert!((p[0] + m.determinant()).norm() < 1e-10);
    }

    #[test]
    fn clustering() {
        assert_eq!(cluster(&[3.0, 2.0, 1.0], 3.0), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(cluster(&[1.0, 1.0 + 1e-12, 0.5], 1.0).len(), 2);
        let spec = Spectrum::from_values(vec![0.0, 6.0, 1.0, 1.0], 6.0);
        assert_eq!(spec.cluster_ids(), vec![0, 1, 1, 2]);
        assert!(spec.to_csv().starts_with("index,value,cluster\n0,6.0000000000000000e0,0\n"));
    }
}
