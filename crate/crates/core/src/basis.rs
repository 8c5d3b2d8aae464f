//! Polynomial bases, their evaluation, and the multiplication operator
//! `Q_j Q_k = sum_m c_m^{jk} Q_m`.
//!
//! Every basis here has `Q_0 == 1`; the rest of the crate relies on that to
//! read plain moments `<Q_k>` off the first row of a Gram matrix.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Three-term recurrence coefficients `(a_k, b_k)` defining
/// `x p_k = a_{k+1} p_{k+1} + b_k p_k + a_k p_{k-1}` with `p_0 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Recurrence {
    pairs: Vec<(f64, f64)>,
}

impl Recurrence {
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::invalid("recurrence needs at least one (a, b) pair"));
        }
        for (k, &(a, b)) in pairs.iter().enumerate() {
            if !(a.is_finite() && b.is_finite()) {
                return Err(Error::invalid(format!("recurrence pair {k} is not finite")));
            }
            if a <= 0.0 {
                return Err(Error::invalid(format!(
                    "recurrence coefficient a_{k} = {a} must be positive"
                )));
            }
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    fn a(&self, k: usize) -> f64 {
        self.pairs[k].0
    }

    fn b(&self, k: usize) -> f64 {
        self.pairs[k].1
    }
}

/// A polynomial basis `Q_k`.
///
/// HermiteE is the probabilists' convention (`x He_k = He_{k+1} + k He_{k-1}`).
/// ShiftedLegendre lives on `[0, 1]`, Laguerre on `[0, inf)`, the rest on
/// `[-1, 1]`; none of these domains is enforced.
#[derive(Debug, Clone, PartialEq)]
pub enum BasisSpec {
    Chebyshev,
    Legendre,
    ShiftedLegendre,
    HermiteE,
    Laguerre,
    Monomial,
    CustomRecurrence(Recurrence),
}

impl BasisSpec {
    pub fn name(&self) -> &'static str {
        match self {
            BasisSpec::Chebyshev => "chebyshev",
            BasisSpec::Legendre => "legendre",
            BasisSpec::ShiftedLegendre => "legendreshifted",
            BasisSpec::HermiteE => "hermitee",
            BasisSpec::Laguerre => "laguerre",
            BasisSpec::Monomial => "monomial",
            BasisSpec::CustomRecurrence(_) => "custom",
        }
    }

    /// Highest degree that can be evaluated, `None` when unbounded.
    pub fn max_degree(&self) -> Option<usize> {
        match self {
            BasisSpec::CustomRecurrence(r) => Some(r.len() - 1),
            _ => None,
        }
    }

    pub(crate) fn check_degree(&self, degree: usize) -> Result<()> {
        match self.max_degree() {
            Some(max) if degree > max => Err(Error::InsufficientRecurrence {
                needed: degree + 1,
                available: max + 1,
            }),
            _ => Ok(()),
        }
    }

    /// The interval data is mapped onto by [`AffineMap::fit`]; `None` means
    /// the basis is used on raw data.
    pub fn natural_interval(&self) -> Option<(f64, f64)> {
        match self {
            BasisSpec::Chebyshev
            | BasisSpec::Legendre
            | BasisSpec::HermiteE
            | BasisSpec::Monomial => Some((-1.0, 1.0)),
            BasisSpec::ShiftedLegendre | BasisSpec::Laguerre => Some((0.0, 1.0)),
            BasisSpec::CustomRecurrence(_) => None,
        }
    }

    /// Sign of the leading power-of-x coefficient of `Q_k`.
    pub fn leading_sign(&self, k: usize) -> f64 {
        match self {
            BasisSpec::Laguerre if k % 2 == 1 => -1.0,
            _ => 1.0,
        }
    }

    /// Fills `out[k] = Q_k(x)` for `k < out.len()` by upward recurrence.
    ///
    /// The caller guarantees `x` is finite and the basis supports degree
    /// `out.len() - 1`.
    pub fn fill_values(&self, x: f64, out: &mut [f64]) {
        let len = out.len();
        if len == 0 {
            return;
        }
        out[0] = 1.0;
        if len == 1 {
            return;
        }
        match self {
            BasisSpec::Chebyshev => {
                out[1] = x;
                for k in 1..len - 1 {
                    out[k + 1] = 2.0 * x * out[k] - out[k - 1];
                }
            }
            BasisSpec::Legendre => legendre_values(x, out),
            BasisSpec::ShiftedLegendre => legendre_values(2.0 * x - 1.0, out),
            BasisSpec::HermiteE => {
                out[1] = x;
                for k in 1..len - 1 {
                    out[k + 1] = x * out[k] - k as f64 * out[k - 1];
                }
            }
            BasisSpec::Laguerre => {
                out[1] = 1.0 - x;
                for k in 1..len - 1 {
                    let kf = k as f64;
                    out[k + 1] = ((2.0 * kf + 1.0 - x) * out[k] - kf * out[k - 1]) / (kf + 1.0);
                }
            }
            BasisSpec::Monomial => {
                for k in 1..len {
                    out[k] = x * out[k - 1];
                }
            }
            BasisSpec::CustomRecurrence(r) => {
                out[1] = (x - r.b(0)) / r.a(1);
                for k in 1..len - 1 {
                    out[k + 1] = ((x - r.b(k)) * out[k] - r.a(k) * out[k - 1]) / r.a(k + 1);
                }
            }
        }
    }

    /// Expansion of `x Q_m` in the basis, at most three terms.
    pub fn times_x(&self, m: usize) -> Vec<(usize, f64)> {
        let mf = m as f64;
        let mut terms = Vec::with_capacity(3);
        match self {
            BasisSpec::Chebyshev => {
                if m == 0 {
                    terms.push((1, 1.0));
                } else {
                    terms.push((m - 1, 0.5));
                    terms.push((m + 1, 0.5));
                }
            }
            BasisSpec::Legendre => {
                if m > 0 {
                    terms.push((m - 1, mf / (2.0 * mf + 1.0)));
                }
                terms.push((m + 1, (mf + 1.0) / (2.0 * mf + 1.0)));
            }
            BasisSpec::ShiftedLegendre => {
                if m > 0 {
                    terms.push((m - 1, mf / (2.0 * (2.0 * mf + 1.0))));
                }
                terms.push((m, 0.5));
                terms.push((m + 1, (mf + 1.0) / (2.0 * (2.0 * mf + 1.0))));
            }
            BasisSpec::HermiteE => {
                if m > 0 {
                    terms.push((m - 1, mf));
                }
                terms.push((m + 1, 1.0));
            }
            BasisSpec::Laguerre => {
                if m > 0 {
                    terms.push((m - 1, -mf));
                }
                terms.push((m, 2.0 * mf + 1.0));
                terms.push((m + 1, -(mf + 1.0)));
            }
            BasisSpec::Monomial => terms.push((m + 1, 1.0)),
            BasisSpec::CustomRecurrence(r) => {
                if m > 0 {
                    terms.push((m - 1, r.a(m)));
                }
                terms.push((m, r.b(m)));
                terms.push((m + 1, r.a(m + 1)));
            }
        }
        terms
    }

    /// `(alpha, beta, gamma)` in `x Q_m = alpha Q_{m+1} + beta Q_m + gamma Q_{m-1}`.
    fn jacobi_row(&self, m: usize) -> (f64, f64, f64) {
        let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
        for (idx, c) in self.times_x(m) {
            if idx == m + 1 {
                alpha = c;
            } else if idx == m {
                beta = c;
            } else {
                gamma = c;
            }
        }
        (alpha, beta, gamma)
    }

    /// Applies multiplication by x to a coefficient vector in this basis.
    /// `out` must be one longer than the highest nonzero index of `coeffs`.
    fn apply_x(&self, coeffs: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (m, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            for (idx, t) in self.times_x(m) {
                out[idx] += c * t;
            }
        }
    }

    /// Dense coefficients `c_m^{jk}`, `m = 0..=j+k`.
    fn product_dense(&self, j: usize, k: usize) -> Vec<f64> {
        let (lo, hi) = if j <= k { (j, k) } else { (k, j) };
        let len = lo + hi + 1;
        match self {
            BasisSpec::Monomial => {
                let mut v = vec![0.0; len];
                v[lo + hi] = 1.0;
                v
            }
            BasisSpec::Chebyshev => {
                let mut v = vec![0.0; len];
                v[lo + hi] += 0.5;
                v[hi - lo] += 0.5;
                v
            }
            _ => {
                // Build Q_i * Q_hi for i = 0..=lo with the recurrence of the
                // lower-degree factor, multiplication by x acting on the other.
                let mut prev = vec![0.0; len];
                let mut cur = vec![0.0; len];
                cur[hi] = 1.0;
                let mut shifted = vec![0.0; len];
                for i in 0..lo {
                    let (alpha, beta, gamma) = self.jacobi_row(i);
                    self.apply_x(&cur[..hi + i + 1], &mut shifted[..hi + i + 2]);
                    let mut next = vec![0.0; len];
                    for m in 0..hi + i + 2 {
                        next[m] = (shifted[m] - beta * cur[m] - gamma * prev[m]) / alpha;
                    }
                    prev = std::mem::replace(&mut cur, next);
                }
                cur
            }
        }
    }
}

fn legendre_values(x: f64, out: &mut [f64]) {
    out[1] = x;
    for k in 1..out.len() - 1 {
        let kf = k as f64;
        out[k + 1] = ((2.0 * kf + 1.0) * x * out[k] - kf * out[k - 1]) / (kf + 1.0);
    }
}

impl fmt::Display for BasisSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BasisSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chebyshev" => Ok(BasisSpec::Chebyshev),
            "legendre" => Ok(BasisSpec::Legendre),
            "legendreshifted" => Ok(BasisSpec::ShiftedLegendre),
            "hermitee" => Ok(BasisSpec::HermiteE),
            "laguerre" => Ok(BasisSpec::Laguerre),
            "monomial" => Ok(BasisSpec::Monomial),
            other => Err(Error::invalid(format!("unknown basis '{other}'"))),
        }
    }
}

/// `Q_k(x)`.
pub fn evaluate_basis(basis: &BasisSpec, k: usize, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::invalid(format!("non-finite argument {x}")));
    }
    basis.check_degree(k)?;
    let mut values = vec![0.0; k + 1];
    basis.fill_values(x, &mut values);
    Ok(values[k])
}

/// Nonzero `(m, c_m^{jk})` with `Q_j Q_k = sum_m c_m^{jk} Q_m`.
///
/// Closed forms for Chebyshev and monomials; every other basis goes through
/// its Jacobi operator. The result does not depend on the order of `j`, `k`.
pub fn multiplication_coefficients(
    basis: &BasisSpec,
    j: usize,
    k: usize,
) -> Result<Vec<(usize, f64)>> {
    basis.check_degree(j + k)?;
    Ok(sparse(basis.product_dense(j, k)))
}

fn sparse(dense: Vec<f64>) -> Vec<(usize, f64)> {
    dense
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c != 0.0)
        .collect()
}

/// Multiplication table `c_m^{jk}` for `j, k < n`, stored for `j <= k`.
#[derive(Debug, Clone)]
pub struct ProductTable {
    n: usize,
    entries: Vec<Vec<(usize, f64)>>,
}

impl ProductTable {
    pub fn new(basis: &BasisSpec, n: usize) -> Result<Self> {
        if n > 0 {
            basis.check_degree(2 * n - 2)?;
        }
        let mut entries = Vec::with_capacity(n * (n + 1) / 2);
        for j in 0..n {
            for k in j..n {
                entries.push(sparse(basis.product_dense(j, k)));
            }
        }
        Ok(Self { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, j: usize, k: usize) -> &[(usize, f64)] {
        let (lo, hi) = if j <= k { (j, k) } else { (k, j) };
        // Row r holds n - r entries.
        let start = lo * self.n - lo * (lo.saturating_sub(1)) / 2;
        &self.entries[start + hi - lo]
    }

    /// Symmetric matrix `sum_m c_m^{jk} moments[m]`.
    pub fn contract(&self, moments: &[f64]) -> nalgebra::DMatrix<f64> {
        let n = self.n;
        let mut out = nalgebra::DMatrix::zeros(n, n);
        for j in 0..n {
            for k in j..n {
                let v: f64 = self.get(j, k).iter().map(|&(m, c)| c * moments[m]).sum();
                out[(j, k)] = v;
                out[(k, j)] = v;
            }
        }
        out
    }
}

/// A polynomial `sum_m gamma_m Q_m(x)` stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialInBasis {
    basis: BasisSpec,
    coefficients: Vec<f64>,
}

impl PolynomialInBasis {
    pub fn new(basis: BasisSpec, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::invalid("polynomial needs at least one coefficient"));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("polynomial coefficients must be finite"));
        }
        basis.check_degree(coefficients.len() - 1)?;
        Ok(Self {
            basis,
            coefficients,
        })
    }

    pub fn constant(basis: BasisSpec, value: f64) -> Result<Self> {
        Self::new(basis, vec![value])
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Index of the last stored coefficient, trailing zeros included.
    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        let mut values = vec![0.0; self.coefficients.len()];
        self.basis.fill_values(x, &mut values);
        self.coefficients
            .iter()
            .zip(&values)
            .map(|(c, q)| c * q)
            .sum()
    }

    /// Re-expands the polynomial in another basis.
    pub fn convert_to(&self, target: &BasisSpec) -> Result<PolynomialInBasis> {
        let deg = self.degree();
        target.check_degree(deg + 1)?;
        let len = deg + 1;
        let mut out = vec![0.0; len];
        // Expansion of the source Q_i in the target basis.
        let mut prev = vec![0.0; len + 1];
        let mut cur = vec![0.0; len + 1];
        cur[0] = 1.0;
        let mut shifted = vec![0.0; len + 1];
        for i in 0..len {
            for m in 0..len {
                out[m] += self.coefficients[i] * cur[m];
            }
            if i + 1 == len {
                break;
            }
            let (alpha, beta, gamma) = self.basis.jacobi_row(i);
            target.apply_x(&cur[..i + 1], &mut shifted[..i + 2]);
            let mut next = vec![0.0; len + 1];
            for m in 0..i + 2 {
                next[m] = (shifted[m] - beta * cur[m] - gamma * prev[m]) / alpha;
            }
            prev = std::mem::replace(&mut cur, next);
        }
        PolynomialInBasis::new(target.clone(), out)
    }
}

/// Product of two polynomials in the same basis; the result has degree
/// `deg p + deg q`.
pub fn multiply_polynomials(p: &PolynomialInBasis, q: &PolynomialInBasis) -> Result<PolynomialInBasis> {
    if p.basis != q.basis {
        return Err(Error::invalid(format!(
            "basis mismatch: {} vs {}",
            p.basis, q.basis
        )));
    }
    let degree = p.degree() + q.degree();
    p.basis.check_degree(degree)?;
    let mut out = vec![0.0; degree + 1];
    for (j, &a) in p.coefficients.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        for (k, &b) in q.coefficients.iter().enumerate() {
            if b == 0.0 {
                continue;
            }
            for (m, c) in p.basis.product_dense(j, k).into_iter().enumerate() {
                out[m] += a * b * c;
            }
        }
    }
    PolynomialInBasis::new(p.basis.clone(), out)
}

/// Affine change of variable `t = (x - shift) / scale` from data `x` to the
/// basis argument `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    shift: f64,
    scale: f64,
}

impl Default for AffineMap {
    fn default() -> Self {
        Self::identity()
    }
}

impl AffineMap {
    pub fn identity() -> Self {
        Self {
            shift: 0.0,
            scale: 1.0,
        }
    }

    pub fn new(shift: f64, scale: f64) -> Result<Self> {
        if !(shift.is_finite() && scale.is_finite()) || scale == 0.0 {
            return Err(Error::invalid(format!(
                "affine map needs finite shift and nonzero scale, got ({shift}, {scale})"
            )));
        }
        Ok(Self { shift, scale })
    }

    /// Map sending `[min, max]` onto `[lo, hi]`. A degenerate data range
    /// gets unit scale.
    pub fn fit(min: f64, max: f64, lo: f64, hi: f64) -> Result<Self> {
        let width = max - min;
        if width > 0.0 {
            let scale = width / (hi - lo);
            Self::new(min - lo * scale, scale)
        } else {
            Self::new(min - 0.5 * (lo + hi), 1.0)
        }
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn to_basis(&self, x: f64) -> f64 {
        (x - self.shift) / self.scale
    }

    pub fn to_data(&self, t: f64) -> f64 {
        self.shift + self.scale * t
    }
}

/// A basis together with the affine map from data to its argument.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisFrame {
    basis: BasisSpec,
    map: AffineMap,
}

impl BasisFrame {
    pub fn new(basis: BasisSpec, map: AffineMap) -> Self {
        Self { basis, map }
    }

    pub fn raw(basis: BasisSpec) -> Self {
        Self::new(basis, AffineMap::identity())
    }

    /// Frame whose map sends `[min, max]` of the data onto the basis's
    /// natural interval.
    pub fn fitted(basis: BasisSpec, min: f64, max: f64) -> Result<Self> {
        let map = match basis.natural_interval() {
            Some((lo, hi)) => AffineMap::fit(min, max, lo, hi)?,
            None => AffineMap::identity(),
        };
        Ok(Self::new(basis, map))
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    pub fn map(&self) -> &AffineMap {
        &self.map
    }

    /// `out[k] = Q_k(t(x))`.
    pub fn fill_values(&self, x: f64, out: &mut [f64]) {
        self.basis.fill_values(self.map.to_basis(x), out);
    }

    pub fn values(&self, x: f64, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        self.fill_values(x, &mut out);
        out
    }
}
