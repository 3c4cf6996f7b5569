//! Exact polynomials in `Z[q, x]` and the characteristic polynomials of
//! q-Laplacians.
//!
//! Determinants are taken by fraction-free (Bareiss) elimination directly
//! over `Z[q, x]`; every division performed there is exact and is checked.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;
use thiserror::Error;

use crate::gts::{apply_shift, decompose_cover, ShiftError, ShiftSite};
use crate::matrices::MatrixError;
use crate::trees::{LabelledTree, TreeError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("division is not exact in Z[q, x]")]
    InexactDivision,
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("the auxiliary polynomial needs at least two vertices")]
    SingleVertex,
    #[error("vertex {vertex} out of range for a tree on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("malformed term list: {0}")]
    MalformedTerms(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Shift(#[from] ShiftError),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Bivariate polynomial with big-integer coefficients. Zero coefficients
/// are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BiPoly {
    // keyed by (x-degree, q-degree) so iteration runs in x-major order
    terms: BTreeMap<(u32, u32), BigInt>,
}

impl BiPoly {
    pub fn zero() -> Self {
        BiPoly::default()
    }

    pub fn one() -> Self {
        Self::constant(1)
    }

    pub fn constant(c: i64) -> Self {
        Self::monomial(0, 0, BigInt::from(c))
    }

    pub fn q() -> Self {
        Self::monomial(1, 0, BigInt::one())
    }

    pub fn x() -> Self {
        Self::monomial(0, 1, BigInt::one())
    }

    /// `coeff * q^dq * x^dx`.
    pub fn monomial(dq: u32, dx: u32, coeff: BigInt) -> Self {
        let mut p = BiPoly::zero();
        p.add_term(dq, dx, coeff);
        p
    }

    fn add_term(&mut self, dq: u32, dx: u32, coeff: BigInt) {
        if coeff.is_zero() {
            return;
        }
        let key = (dx, dq);
        let entry = self.terms.entry(key).or_insert_with(BigInt::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms as `(q-degree, x-degree, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, &BigInt)> {
        self.terms.iter().map(|(&(dx, dq), c)| (dq, dx, c))
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, dq: u32, dx: u32) -> BigInt {
        self.terms.get(&(dx, dq)).cloned().unwrap_or_default()
    }

    /// Degree in `x`; `None` for the zero polynomial.
    pub fn x_degree(&self) -> Option<u32> {
        self.terms.keys().map(|&(dx, _)| dx).max()
    }

    pub fn q_degree(&self) -> Option<u32> {
        self.terms.keys().map(|&(_, dq)| dq).max()
    }

    /// Coefficient of `x^dx`, as a polynomial in `q` alone.
    pub fn x_coefficient(&self, dx: u32) -> BiPoly {
        let mut p = BiPoly::zero();
        for (&(ex, dq), c) in &self.terms {
            if ex == dx {
                p.add_term(dq, 0, c.clone());
            }
        }
        p
    }

    /// True when only even powers of `q` occur.
    pub fn is_even_in_q(&self) -> bool {
        self.terms.keys().all(|&(_, dq)| dq % 2 == 0)
    }

    /// Multiplicity of `x = 0` as a root (the smallest `x` exponent).
    pub fn x_valuation(&self) -> Option<u32> {
        self.terms.keys().map(|&(dx, _)| dx).min()
    }

    /// Divides by `x^k`, failing unless every term carries that factor.
    pub fn div_x_pow(&self, k: u32) -> Result<BiPoly, PolyError> {
        let mut out = BiPoly::zero();
        for (&(dx, dq), c) in &self.terms {
            if dx < k {
                return Err(PolyError::InexactDivision);
            }
            out.add_term(dq, dx - k, c.clone());
        }
        Ok(out)
    }

    fn leading(&self) -> Option<((u32, u32), &BigInt)> {
        self.terms.iter().next_back().map(|(&k, c)| (k, c))
    }

    /// Exact quotient `self / divisor`, by repeated division of leading terms
    /// in x-major lexicographic order.
    pub fn exact_div(&self, divisor: &BiPoly) -> Result<BiPoly, PolyError> {
        let ((ldx, ldq), lc) = divisor.leading().ok_or(PolyError::DivisionByZero)?;
        let lc = lc.clone();
        let mut rem = self.clone();
        let mut quotient = BiPoly::zero();
        while let Some(((rdx, rdq), rc)) = rem.leading() {
            if rdx < ldx || rdq < ldq {
                return Err(PolyError::InexactDivision);
            }
            let (c, r) = rc.div_rem(&lc);
            if !r.is_zero() {
                return Err(PolyError::InexactDivision);
            }
            let term = BiPoly::monomial(rdq - ldq, rdx - ldx, c);
            rem = &rem - &(&term * divisor);
            quotient = &quotient + &term;
        }
        Ok(quotient)
    }

    /// Nested Horner evaluation: in `q` for every x-coefficient, then in `x`.
    fn horner<T>(&self, q: &T, x: &T, lift: impl Fn(&BigInt) -> T) -> T
    where
        T: Clone + Zero + Add<Output = T> + Mul<Output = T>,
    {
        let Some(top) = self.x_degree() else {
            return T::zero();
        };
        let mut by_x: Vec<Vec<(u32, &BigInt)>> = vec![Vec::new(); top as usize + 1];
        for (&(dx, dq), c) in &self.terms {
            by_x[dx as usize].push((dq, c));
        }
        let eval_q = |row: &[(u32, &BigInt)]| {
            let Some(&(deg, _)) = row.last() else {
                return T::zero();
            };
            let mut coeffs = vec![None; deg as usize + 1];
            for &(dq, c) in row {
                coeffs[dq as usize] = Some(c);
            }
            coeffs.iter().rev().fold(T::zero(), |acc, c| {
                let c = c.map(&lift).unwrap_or_else(T::zero);
                acc * q.clone() + c
            })
        };
        by_x.iter().rev().fold(T::zero(), |acc, row| acc * x.clone() + eval_q(row))
    }

    pub fn eval_f64(&self, q: f64, x: f64) -> f64 {
        self.horner(&q, &x, |c| c.to_f64().expect("coefficient fits in f64"))
    }

    pub fn eval_rational(&self, q: &BigRational, x: &BigRational) -> BigRational {
        self.horner(q, x, |c| BigRational::from_integer(c.clone()))
    }

    /// Exact sign at a real point. The floating value is trusted when it
    /// clears its rounding bound; otherwise the point is evaluated over the
    /// rationals.
    pub fn sign_at(&self, q: f64, x: f64) -> std::cmp::Ordering {
        let value = self.eval_f64(q, x);
        let bound = self.horner(&q.abs(), &x.abs(), |c| c.abs().to_f64().unwrap_or(f64::INFINITY));
        let steps = (self.x_degree().unwrap_or(0) + self.q_degree().unwrap_or(0)) as f64 + 2.0;
        if value.is_finite() && bound.is_finite() && value.abs() > 4.0 * steps * f64::EPSILON * bound {
            return value.total_cmp(&0.0);
        }
        let exact = |v: f64| BigRational::from_float(v).expect("finite evaluation point");
        self.eval_rational(&exact(q), &exact(x)).cmp(&BigRational::zero())
    }

    /// Fixes `q` and returns the coefficients in `x`, lowest degree first.
    pub fn specialize_q(&self, q: f64) -> Vec<f64> {
        let Some(top) = self.x_degree() else {
            return Vec::new();
        };
        (0..=top)
            .map(|dx| self.x_coefficient(dx).eval_f64(q, 0.0))
            .collect()
    }

    /// `x = 0` substituted; a polynomial in `q`.
    pub fn at_x_zero(&self) -> BiPoly {
        self.x_coefficient(0)
    }

    /// JSON term list `[[dq, dx, coeff], ...]`; coefficients outside the
    /// `i64` range are written as decimal strings.
    pub fn to_json_terms(&self) -> Value {
        Value::Array(
            self.terms()
                .map(|(dq, dx, c)| {
                    let coeff = match c.to_i64() {
                        Some(v) => Value::from(v),
                        None => Value::from(c.to_string()),
                    };
                    Value::Array(vec![Value::from(dq), Value::from(dx), coeff])
                })
                .collect(),
        )
    }

    pub fn from_json_terms(value: &Value) -> Result<Self, PolyError> {
        let bad = |msg: &str| PolyError::MalformedTerms(msg.to_string());
        let mut p = BiPoly::zero();
        for term in value.as_array().ok_or_else(|| bad("expected an array"))? {
            let parts = term.as_array().filter(|a| a.len() == 3).ok_or_else(|| bad("expected [dq, dx, coeff]"))?;
            let deg = |v: &Value| v.as_u64().and_then(|d| u32::try_from(d).ok()).ok_or_else(|| bad("bad degree"));
            let coeff = match &parts[2] {
                Value::Number(n) => n.as_i64().map(BigInt::from).ok_or_else(|| bad("bad coefficient"))?,
                Value::String(s) => s.parse::<BigInt>().map_err(|_| bad("bad coefficient"))?,
                _ => return Err(bad("bad coefficient")),
            };
            p.add_term(deg(&parts[0])?, deg(&parts[1])?, coeff);
        }
        Ok(p)
    }
}

impl fmt::Display for BiPoly {
    /// Descending `x` degree, then descending `q` degree,
    /// e.g. `x^2 - 2*x - q^2 + 1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let power = |var: &str, d: u32| match d {
            0 => None,
            1 => Some(var.to_string()),
            _ => Some(format!("{var}^{d}")),
        };
        for (i, (&(dx, dq), c)) in self.terms.iter().rev().enumerate() {
            let sign = if c.is_negative() { "-" } else { "+" };
            match (i, sign) {
                (0, "-") => f.write_str("-")?,
                (0, _) => {}
                _ => write!(f, " {sign} ")?,
            }
            let mut factors = Vec::new();
            let mag = c.abs();
            let vars: Vec<String> = [power("q", dq), power("x", dx)].into_iter().flatten().collect();
            if !mag.is_one() || vars.is_empty() {
                factors.push(mag.to_string());
            }
            factors.extend(vars);
            f.write_str(&factors.join("*"))?;
        }
        Ok(())
    }
}

impl<'a> Add<&'a BiPoly> for &'a BiPoly {
    type Output = BiPoly;
    fn add(self, rhs: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        for (&(dx, dq), c) in &rhs.terms {
            out.add_term(dq, dx, c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a BiPoly> for &'a BiPoly {
    type Output = BiPoly;
    fn sub(self, rhs: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        for (&(dx, dq), c) in &rhs.terms {
            out.add_term(dq, dx, -c);
        }
        out
    }
}

impl<'a> Mul<&'a BiPoly> for &'a BiPoly {
    type Output = BiPoly;
    fn mul(self, rhs: &BiPoly) -> BiPoly {
        let mut out = BiPoly::zero();
        for (&(ax, aq), a) in &self.terms {
            for (&(bx, bq), b) in &rhs.terms {
                out.add_term(aq + bq, ax + bx, a * b);
            }
        }
        out
    }
}

impl Neg for &BiPoly {
    type Output = BiPoly;
    fn neg(self) -> BiPoly {
        BiPoly {
            terms: self.terms.iter().map(|(&k, c)| (k, -c)).collect(),
        }
    }
}

impl Add for BiPoly {
    type Output = BiPoly;
    fn add(self, rhs: BiPoly) -> BiPoly {
        &self + &rhs
    }
}

impl Sub for BiPoly {
    type Output = BiPoly;
    fn sub(self, rhs: BiPoly) -> BiPoly {
        &self - &rhs
    }
}

impl Mul for BiPoly {
    type Output = BiPoly;
    fn mul(self, rhs: BiPoly) -> BiPoly {
        &self * &rhs
    }
}

impl Neg for BiPoly {
    type Output = BiPoly;
    fn neg(self) -> BiPoly {
        -&self
    }
}

/// Determinant of a square matrix over `Z[q, x]` by Bareiss elimination.
pub fn bareiss_determinant(mut m: Vec<Vec<BiPoly>>) -> Result<BiPoly, PolyError> {
    let size = m.len();
    if size == 0 {
        return Ok(BiPoly::one());
    }
    let mut negate = false;
    let mut prev = BiPoly::one();
    for k in 0..size - 1 {
        if m[k][k].is_zero() {
            match (k + 1..size).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    negate = !negate;
                }
                None => return Ok(BiPoly::zero()),
            }
        }
        for i in k + 1..size {
            for j in k + 1..size {
                let num = &(&m[i][j] * &m[k][k]) - &(&m[i][k] * &m[k][j]);
                m[i][j] = num.exact_div(&prev)?;
            }
        }
        prev = m[k][k].clone();
    }
    let det = m[size - 1][size - 1].clone();
    Ok(if negate { -det } else { det })
}

/// `det(x I - L^q)` with the rows and columns in `deleted` removed.
pub fn charpoly(t: &LabelledTree, deleted: &[usize]) -> Result<BiPoly, PolyError> {
    let n = t.n();
    let mut drop = vec![false; n];
    for &d in deleted {
        if d >= n {
            return Err(MatrixError::IndexOutOfRange { index: d, n }.into());
        }
        drop[d] = true;
    }
    let keep: Vec<usize> = (0..n).filter(|&v| !drop[v]).collect();
    if keep.is_empty() {
        return Err(MatrixError::EmptyResult.into());
    }
    let matrix = keep
        .iter()
        .map(|&i| {
            keep.iter()
                .map(|&j| {
                    if i == j {
                        // x - 1 - (d - 1) q^2
                        let mut p = &BiPoly::x() - &BiPoly::one();
                        p.add_term(2, 0, -BigInt::from(t.degree(i) as i64 - 1));
                        p
                    } else if t.are_adjacent(i, j) {
                        BiPoly::q()
                    } else {
                        BiPoly::zero()
                    }
                })
                .collect()
        })
        .collect();
    bareiss_determinant(matrix)
}

/// `x + q^2 - 1`.
fn shifted_x() -> BiPoly {
    let mut p = BiPoly::x();
    p.add_term(2, 0, BigInt::one());
    p.add_term(0, 0, -BigInt::one());
    p
}

/// `F(q, x) = f(q, x) - (x + q^2 - 1) f_v(q, x)` where `f_v` is the
/// characteristic polynomial with vertex `v` deleted.
pub fn aux_poly(t: &LabelledTree, v: usize) -> Result<BiPoly, PolyError> {
    if t.n() < 2 {
        return Err(PolyError::SingleVertex);
    }
    if v >= t.n() {
        return Err(PolyError::VertexOutOfRange { vertex: v, n: t.n() });
    }
    let whole = charpoly(t, &[])?;
    let minor = charpoly(t, &[v])?;
    Ok(&whole - &(&shifted_x() * &minor))
}

/// Glues `q2` onto `q1` by identifying `v2` with `v1`. Vertices of `q1` keep
/// their labels; the rest of `q2` follows in order.
pub fn join(q1: &LabelledTree, v1: usize, q2: &LabelledTree, v2: usize) -> Result<LabelledTree, PolyError> {
    for (t, v) in [(q1, v1), (q2, v2)] {
        if v >= t.n() {
            return Err(PolyError::VertexOutOfRange { vertex: v, n: t.n() });
        }
    }
    let offset = q1.n();
    let map = |w: usize| {
        if w == v2 {
            v1
        } else if w < v2 {
            offset + w
        } else {
            offset + w - 1
        }
    };
    let mut edges = q1.edges().to_vec();
    edges.extend(q2.edges().iter().map(|&(a, b)| (map(a), map(b))));
    Ok(LabelledTree::from_edges(q1.n() + q2.n() - 1, &edges)?)
}

/// Checks `f_T = f_{Q1} f_{Q2|v2} + f_{Q2} f_{Q1|v1} - (x - 1 + q^2) f_{Q1|v1} f_{Q2|v2}`
/// exactly for the join `T` of `q1` at `v1` and `q2` at `v2`.
pub fn join_identity_check(q1: &LabelledTree, v1: usize, q2: &LabelledTree, v2: usize) -> Result<bool, PolyError> {
    let glued = join(q1, v1, q2, v2)?;
    let lhs = charpoly(&glued, &[])?;
    let minor_or_one = |t: &LabelledTree, v: usize| {
        if t.n() == 1 {
            Ok(BiPoly::one())
        } else {
            charpoly(t, &[v])
        }
    };
    let (f1, f1v) = (charpoly(q1, &[])?, minor_or_one(q1, v1)?);
    let (f2, f2v) = (charpoly(q2, &[])?, minor_or_one(q2, v2)?);
    let rhs = &(&(&f1 * &f2v) + &(&f2 * &f1v)) - &(&shifted_x() * &(&f1v * &f2v));
    Ok(lhs == rhs)
}

/// `q^2 x (f_{T1} - f_{T2}) + F_{P} F_{H1} F_{H2}` for the cover given by
/// `s`; zero exactly when the factorization identity holds.
pub fn difference_factorization_residual(t1: &LabelledTree, s: &ShiftSite) -> Result<BiPoly, PolyError> {
    let parts = decompose_cover(t1, s)?;
    let t2 = apply_shift(t1, s)?;
    let diff = &charpoly(t1, &[])? - &charpoly(&t2, &[])?;
    let q2x = BiPoly::monomial(2, 1, BigInt::one());
    let mut product = BiPoly::one();
    for part in parts.parts() {
        product = &product * &aux_poly(&part.tree, part.join)?;
    }
    Ok(&(&q2x * &diff) + &product)
}

pub fn difference_factorization_check(t1: &LabelledTree, s: &ShiftSite) -> Result<bool, PolyError> {
    Ok(difference_factorization_residual(t1, s)?.is_zero())
}
