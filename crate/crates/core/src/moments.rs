//! Moment accumulation over sampled measures and assembly of the operator
//! matrices `<Q_j|f|Q_k>` and `<Q_j|Q_k>`.

use nalgebra::DMatrix;

use crate::basis::{BasisFrame, BasisSpec, ProductTable};
use crate::error::{Error, Result};
use crate::gev::Cholesky;

/// One observation: argument `x`, observable `f` and measure element `weight`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub x: f64,
    pub f: f64,
    pub weight: f64,
}

impl Sample {
    pub fn new(x: f64, f: f64, weight: f64) -> Result<Self> {
        let s = Self { x, f, weight };
        s.validate()?;
        Ok(s)
    }

    pub fn unit(x: f64, f: f64) -> Result<Self> {
        Self::new(x, f, 1.0)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.x.is_finite() && self.f.is_finite() && self.weight.is_finite()) {
            return Err(Error::invalid(format!("non-finite sample {self:?}")));
        }
        if self.weight < 0.0 {
            return Err(Error::invalid(format!("negative weight {}", self.weight)));
        }
        Ok(())
    }
}

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.carry);
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Raw moments `<Q_m>` and `<Q_m f>` for `m = 0..=2n-2`.
///
/// `mu_top` carries `<Q_{2n-1}>` when known; it is what multiplication by
/// `x` needs to reach one degree past the Gram matrix (Gaussian nodes,
/// recurrence coefficients, `<psi|x|psi>`).
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSet {
    frame: BasisFrame,
    n: usize,
    mu_moments: Vec<f64>,
    f_moments: Vec<f64>,
    mu_top: Option<f64>,
    f_squared: Option<f64>,
}

impl MomentSet {
    /// Builds a moment set from known moments. `mu_moments` may have length
    /// `2n - 1` or `2n`; the optional last entry becomes `<Q_{2n-1}>`.
    pub fn from_moments(
        frame: BasisFrame,
        n: usize,
        mu_moments: Vec<f64>,
        f_moments: Vec<f64>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("order n must be at least 1"));
        }
        let len = 2 * n - 1;
        let mut mu_moments = mu_moments;
        let mu_top = match mu_moments.len() {
            l if l == len => None,
            l if l == len + 1 => mu_moments.pop(),
            l => {
                return Err(Error::invalid(format!(
                    "expected {len} or {} measure moments, got {l}",
                    len + 1
                )))
            }
        };
        if f_moments.len() != len {
            return Err(Error::invalid(format!(
                "expected {len} f-moments, got {}",
                f_moments.len()
            )));
        }
        frame.basis().check_degree(if mu_top.is_some() { len } else { len - 1 })?;
        Ok(Self {
            frame,
            n,
            mu_moments,
            f_moments,
            mu_top,
            f_squared: None,
        })
    }

    pub fn frame(&self) -> &BasisFrame {
        &self.frame
    }

    pub fn basis(&self) -> &BasisSpec {
        self.frame.basis()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mu_moments(&self) -> &[f64] {
        &self.mu_moments
    }

    pub fn f_moments(&self) -> &[f64] {
        &self.f_moments
    }

    pub fn mu_top(&self) -> Option<f64> {
        self.mu_top
    }

    /// `<f^2>` when it was accumulated alongside the moments.
    pub fn f_squared(&self) -> Option<f64> {
        self.f_squared
    }

    pub fn with_f_squared(mut self, f2: f64) -> Self {
        self.f_squared = Some(f2);
        self
    }

    /// Total measure `<1>`.
    pub fn total_measure(&self) -> f64 {
        self.mu_moments[0]
    }

    /// Elementwise sum of two moment sets over disjoint samples.
    pub fn merge(&self, other: &MomentSet) -> Result<MomentSet> {
        if self.frame != other.frame || self.n != other.n {
            return Err(Error::invalid("cannot merge moments of different frames or orders"));
        }
        let add = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + y).collect::<Vec<_>>();
        Ok(MomentSet {
            frame: self.frame.clone(),
            n: self.n,
            mu_moments: add(&self.mu_moments, &other.mu_moments),
            f_moments: add(&self.f_moments, &other.f_moments),
            mu_top: self.mu_top.zip(other.mu_top).map(|(a, b)| a + b),
            f_squared: self.f_squared.zip(other.f_squared).map(|(a, b)| a + b),
        })
    }

    /// Moments `<Q_m x>` in data coordinates, `m = 0..=2n-2`.
    pub fn x_moments(&self) -> Result<Vec<f64>> {
        let top = self.mu_top.ok_or_else(|| {
            Error::invalid("moment <Q_{2n-1}> is required for multiplication by x")
        })?;
        let len = self.mu_moments.len();
        let moment = |m: usize| if m < len { self.mu_moments[m] } else { top };
        let map = self.frame.map();
        Ok((0..len)
            .map(|m| {
                let t: f64 = self
                    .basis()
                    .times_x(m)
                    .into_iter()
                    .map(|(idx, c)| c * moment(idx))
                    .sum();
                map.shift() * self.mu_moments[m] + map.scale() * t
            })
            .collect())
    }
}

/// Single-pass accumulator; partial accumulators over disjoint chunks can be
/// merged.
#[derive(Debug, Clone)]
pub struct MomentAccumulator {
    frame: BasisFrame,
    n: usize,
    mu: Vec<CompensatedSum>,
    fm: Vec<CompensatedSum>,
    f2: CompensatedSum,
    values: Vec<f64>,
    count: usize,
}

impl MomentAccumulator {
    pub fn new(frame: BasisFrame, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("order n must be at least 1"));
        }
        frame.basis().check_degree(2 * n - 1)?;
        Ok(Self {
            frame,
            n,
            mu: vec![CompensatedSum::default(); 2 * n],
            fm: vec![CompensatedSum::default(); 2 * n - 1],
            f2: CompensatedSum::default(),
            values: vec![0.0; 2 * n],
            count: 0,
        })
    }

    pub fn push(&mut self, s: Sample) -> Result<()> {
        s.validate()?;
        self.frame.fill_values(s.x, &mut self.values);
        let wf = s.weight * s.f;
        for (m, q) in self.values.iter().enumerate() {
            self.mu[m].add(s.weight * q);
            if m < self.fm.len() {
                self.fm[m].add(wf * q);
            }
        }
        self.f2.add(wf * s.f);
        self.count += 1;
        Ok(())
    }

    pub fn merge(&mut self, other: &MomentAccumulator) -> Result<()> {
        if self.frame != other.frame || self.n != other.n {
            return Err(Error::invalid("cannot merge accumulators of different frames or orders"));
        }
        for (a, b) in self.mu.iter_mut().zip(&other.mu) {
            a.merge(b);
        }
        for (a, b) in self.fm.iter_mut().zip(&other.fm) {
            a.merge(b);
        }
        self.f2.merge(&other.f2);
        self.count += other.count;
        Ok(())
    }

    pub fn finish(self) -> Result<MomentSet> {
        if self.count == 0 {
            return Err(Error::EmptyMeasure);
        }
        let mut mu: Vec<f64> = self.mu.iter().map(CompensatedSum::value).collect();
        if mu[0] <= 0.0 {
            return Err(Error::EmptyMeasure);
        }
        let top = mu.pop();
        Ok(MomentSet {
            frame: self.frame,
            n: self.n,
            mu_moments: mu,
            f_moments: self.fm.iter().map(CompensatedSum::value).collect(),
            mu_top: top,
            f_squared: Some(self.f2.value()),
        })
    }
}

/// Accumulates moments with the basis evaluated directly at the sample `x`.
pub fn accumulate_moments<I>(samples: I, basis: &BasisSpec, n: usize) -> Result<MomentSet>
where
    I: IntoIterator<Item = Sample>,
{
    accumulate_in_frame(samples, &BasisFrame::raw(basis.clone()), n)
}

/// Accumulates moments in a frame, i.e. with the basis evaluated at the
/// mapped argument `t(x)`.
pub fn accumulate_in_frame<I>(samples: I, frame: &BasisFrame, n: usize) -> Result<MomentSet>
where
    I: IntoIterator<Item = Sample>,
{
    let mut acc = MomentAccumulator::new(frame.clone(), n)?;
    for s in samples {
        acc.push(s)?;
    }
    acc.finish()
}

/// Pair of symmetric matrices `(left, right) = (<Q_j|f|Q_k>, <Q_j|Q_k>)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorPair {
    frame: BasisFrame,
    left: DMatrix<f64>,
    right: DMatrix<f64>,
}

impl OperatorPair {
    pub fn new(frame: BasisFrame, left: DMatrix<f64>, right: DMatrix<f64>) -> Result<Self> {
        let n = right.nrows();
        if n == 0 || !right.is_square() || left.shape() != right.shape() {
            return Err(Error::InvalidMatrix(format!(
                "pencil matrices must be square of equal size, got {:?} and {:?}",
                left.shape(),
                right.shape()
            )));
        }
        Ok(Self { frame, left, right })
    }

    pub fn frame(&self) -> &BasisFrame {
        &self.frame
    }

    pub fn left(&self) -> &DMatrix<f64> {
        &self.left
    }

    pub fn right(&self) -> &DMatrix<f64> {
        &self.right
    }

    pub fn n(&self) -> usize {
        self.right.nrows()
    }

    /// Same Gram matrix with a different left-hand operator.
    pub fn with_left(&self, left: DMatrix<f64>) -> Result<Self> {
        Self::new(self.frame.clone(), left, self.right.clone())
    }
}

/// Assembles `<Q_j|f|Q_k>` and `<Q_j|Q_k>` through the multiplication
/// operator.
pub fn matrices_from_moments(moments: &MomentSet) -> Result<OperatorPair> {
    let table = ProductTable::new(moments.basis(), moments.n())?;
    OperatorPair::new(
        moments.frame().clone(),
        table.contract(moments.f_moments()),
        table.contract(moments.mu_moments()),
    )
}

/// The pencil with `f = x`: `(<Q_j|x|Q_k>, <Q_j|Q_k>)`, `x` in data
/// coordinates.
pub fn x_pencil(moments: &MomentSet) -> Result<OperatorPair> {
    let table = ProductTable::new(moments.basis(), moments.n())?;
    let xm = moments.x_moments()?;
    OperatorPair::new(
        moments.frame().clone(),
        table.contract(&xm),
        table.contract(moments.mu_moments()),
    )
}

/// `<Q_j|g(x)|Q_k>` accumulated directly per observation.
pub fn second_pass_matrix<I, G>(samples: I, frame: &BasisFrame, n: usize, mut g: G) -> Result<DMatrix<f64>>
where
    I: IntoIterator<Item = Sample>,
    G: FnMut(f64) -> f64,
{
    if n == 0 {
        return Err(Error::invalid("order n must be at least 1"));
    }
    frame.basis().check_degree(n - 1)?;
    let mut sums = vec![CompensatedSum::default(); n * (n + 1) / 2];
    let mut q = vec![0.0; n];
    let mut count = 0usize;
    for s in samples {
        s.validate()?;
        frame.fill_values(s.x, &mut q);
        let wg = s.weight * g(s.x);
        let mut idx = 0;
        for j in 0..n {
            let wq = wg * q[j];
            for k in j..n {
                sums[idx].add(wq * q[k]);
                idx += 1;
            }
        }
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptyMeasure);
    }
    let mut out = DMatrix::zeros(n, n);
    let mut idx = 0;
    for j in 0..n {
        for k in j..n {
            let v = sums[idx].value();
            out[(j, k)] = v;
            out[(k, j)] = v;
            idx += 1;
        }
    }
    Ok(out)
}

/// Recurrence coefficients `(a_k, b_k)`, `k = 0..n`, of the measure's
/// orthonormal polynomials in data coordinates:
/// `x p_k = a_{k+1} p_{k+1} + b_k p_k + a_k p_{k-1}`.
///
/// `a_0` is reported as `sqrt(<1>)`, the norm of the constant.
pub fn three_term_recurrence(moments: &MomentSet) -> Result<Vec<(f64, f64)>> {
    let pair = x_pencil(moments)?;
    let n = moments.n();
    let chol = Cholesky::factor(pair.right()).map_err(|e| match e {
        Error::GramNotPositiveDefinite { pivot } => Error::DegenerateMeasure { minor: pivot + 1 },
        other => other,
    })?;
    // Rows of L^{-1} are the orthonormal polynomials in the Q basis.
    let mut ortho = chol.lower_inverse();
    for k in 0..n {
        if moments.basis().leading_sign(k) < 0.0 {
            ortho.row_mut(k).neg_mut();
        }
    }
    let xm = pair.left();
    let form = |i: usize, j: usize| -> f64 {
        let ri = ortho.row(i);
        let rj = ortho.row(j);
        (ri * xm * rj.transpose())[(0, 0)]
    };
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let a = if k == 0 {
            moments.total_measure().sqrt()
        } else {
            form(k, k - 1)
        };
        out.push((a, form(k, k)));
    }
    Ok(out)
}
