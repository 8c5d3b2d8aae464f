//! Density matrices `||rho||` given by their operator matrix
//! `<Q_j|rho|Q_k>` and its spectral decomposition against the Gram matrix.

use nalgebra::{DMatrix, DVector};

use crate::basis::{BasisFrame, PolynomialInBasis, ProductTable};
use crate::error::{Error, Result};
use crate::gev::{solve_pencil, symmetrize, Cholesky, SpectralDecomposition};
use crate::moments::OperatorPair;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensitySource {
    FromPolynomial,
    FromChristoffel,
    PureAverage,
}

#[derive(Debug, Clone)]
pub struct DensityMatrix {
    decomposition: SpectralDecomposition,
    operator: DMatrix<f64>,
    source: DensitySource,
}

impl DensityMatrix {
    /// Decomposes `operator` against `gram`.
    pub fn from_operator(
        frame: &BasisFrame,
        operator: DMatrix<f64>,
        gram: &DMatrix<f64>,
        source: DensitySource,
    ) -> Result<Self> {
        let pair = OperatorPair::new(frame.clone(), operator.clone(), gram.clone())?;
        Ok(Self {
            decomposition: solve_pencil(&pair)?,
            operator,
            source,
        })
    }

    pub fn decomposition(&self) -> &SpectralDecomposition {
        &self.decomposition
    }

    /// `<Q_j|rho|Q_k>`.
    pub fn operator(&self) -> &DMatrix<f64> {
        &self.operator
    }

    pub fn source(&self) -> DensitySource {
        self.source
    }

    pub fn eigenvalues(&self) -> &[f64] {
        self.decomposition.eigenvalues()
    }

    pub fn n(&self) -> usize {
        self.decomposition.n()
    }

    /// `<psi_i|rho|psi_i>` for the states of another decomposition.
    pub fn state_weights(&self, states: &SpectralDecomposition) -> Result<Vec<f64>> {
        self.check_compatible(states.n(), states.frame())?;
        Ok(states.expectations(&self.operator))
    }

    /// `<psi_i|rho|psi_j>` for the states of another decomposition.
    pub fn in_states(&self, states: &SpectralDecomposition) -> Result<DMatrix<f64>> {
        self.check_compatible(states.n(), states.frame())?;
        Ok(states.in_eigenbasis(&self.operator))
    }

    fn check_compatible(&self, n: usize, frame: &BasisFrame) -> Result<()> {
        if n != self.n() || frame != self.decomposition.frame() {
            return Err(Error::invalid(format!(
                "density matrix ({}, n = {}) and states ({}, n = {n}) use different bases",
                self.decomposition.frame().basis(),
                self.n(),
                frame.basis()
            )));
        }
        Ok(())
    }
}

/// Moments `<Q_l>_P`, `l = 0..=2n-2`, of the measure whose density matrix
/// has diagonal `P(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureMomentsOfP {
    moments: Vec<f64>,
}

impl MeasureMomentsOfP {
    pub fn moments(&self) -> &[f64] {
        &self.moments
    }
}

/// Solves `sum_jk c_m^{jk} M_jk = gamma_m` with
/// `M = G^{-1} <QQ>_P G^{-1}` and `<Q_s Q_t>_P = sum_l c_l^{st} <Q_l>_P`.
pub fn moments_producing_polynomial(
    p: &PolynomialInBasis,
    gram: &DMatrix<f64>,
    n: usize,
) -> Result<MeasureMomentsOfP> {
    if n == 0 || gram.nrows() != n || gram.ncols() != n {
        return Err(Error::invalid(format!("Gram matrix must be {n}x{n}")));
    }
    let len = 2 * n - 1;
    if p.degree() > len - 1 {
        return Err(Error::DegreeTooHigh {
            degree: p.degree(),
            max: len - 1,
        });
    }
    let table = ProductTable::new(p.basis(), n)?;
    let ginv = Cholesky::factor(gram)?.inverse();

    // c_l as n x n matrices, then B_l = G^{-1} C_l G^{-1}.
    let mut c = vec![DMatrix::<f64>::zeros(n, n); len];
    for s in 0..n {
        for t in 0..n {
            for &(l, v) in table.get(s, t) {
                c[l][(s, t)] = v;
            }
        }
    }
    let b: Vec<DMatrix<f64>> = c.iter().map(|cl| &ginv * cl * &ginv).collect();

    let mut a = DMatrix::<f64>::zeros(len, len);
    for j in 0..n {
        for k in 0..n {
            for &(m, v) in table.get(j, k) {
                for (l, bl) in b.iter().enumerate() {
                    a[(m, l)] += v * bl[(j, k)];
                }
            }
        }
    }
    let mut gamma = DVector::<f64>::zeros(len);
    for (m, v) in p.coefficients().iter().enumerate() {
        gamma[m] = *v;
    }
    let lu = a.clone().lu();
    let x = lu
        .solve(&gamma)
        .ok_or_else(|| Error::DegenerateConstruction("singular moment system".into()))?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateConstruction("non-finite moments".into()));
    }
    let residual = (&a * &x - &gamma).norm();
    let scale = gamma.norm().max(a.norm() * x.norm() * f64::EPSILON);
    if residual > 1e-9 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateConstruction(format!(
            "moment system residual {residual:e} exceeds tolerance"
        )));
    }
    Ok(MeasureMomentsOfP {
        moments: x.iter().copied().collect(),
    })
}

/// `||rho_P||` with `rho_P(x, x) = P(x)`; `P` is expressed in the basis
/// variable of `frame`.
pub fn density_matrix_from_polynomial(
    p: &PolynomialInBasis,
    frame: &BasisFrame,
    gram: &DMatrix<f64>,
) -> Result<DensityMatrix> {
    if p.basis() != frame.basis() {
        return Err(Error::invalid(format!(
            "polynomial basis {} differs from frame basis {}",
            p.basis(),
            frame.basis()
        )));
    }
    let n = gram.nrows();
    let moments = moments_producing_polynomial(p, gram, n)?;
    let table = ProductTable::new(p.basis(), n)?;
    let operator = table.contract(moments.moments());
    DensityMatrix::from_operator(frame, operator, gram, DensitySource::FromPolynomial)
}

/// `||1><1||`: operator `<Q_j><Q_k>`, read from the first Gram row.
pub fn pure_average(frame: &BasisFrame, gram: &DMatrix<f64>) -> Result<DensityMatrix> {
    let g = gram.column(0).into_owned();
    let mut operator = &g * g.transpose();
    symmetrize(&mut operator);
    DensityMatrix::from_operator(frame, operator, gram, DensitySource::PureAverage)
}

/// `rho(x, x) = sum_i lambda_i psi_i(x)^2`.
pub fn reconstruct_diagonal(rho: &DensityMatrix, x: f64) -> f64 {
    rho.decomposition
        .psi_values(x)
        .iter()
        .zip(rho.eigenvalues())
        .map(|(p, l)| l * p * p)
        .sum()
}

/// `sum_i lambda_i`.
pub fn spur(rho: &DensityMatrix) -> f64 {
    rho.eigenvalues().iter().sum()
}

/// `Spur ||f|rho|| = sum_i lambda_i <psi_i|f|psi_i>`.
pub fn spur_product(rho: &DensityMatrix, pair: &OperatorPair) -> Result<f64> {
    rho.check_compatible(pair.n(), pair.frame())?;
    let f = rho.decomposition.expectations(pair.left());
    Ok(f.iter().zip(rho.eigenvalues()).map(|(a, l)| a * l).sum())
}
