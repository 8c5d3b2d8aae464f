//! Radon-Nikodym derivative estimators over a spectral decomposition.

use crate::basis::BasisFrame;
use crate::error::{Error, Result};
use crate::gev::SpectralDecomposition;

/// Moments `q_k` of a distribution in the `Q_k` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateMoments {
    q: Vec<f64>,
}

impl StateMoments {
    pub fn new(q: Vec<f64>) -> Result<Self> {
        if q.is_empty() || q.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("state moments must be finite and non-empty"));
        }
        Ok(Self { q })
    }

    /// `q_k = Q_k(x)`.
    pub fn point_mass(frame: &BasisFrame, x: f64, n: usize) -> Result<Self> {
        finite(x)?;
        Self::new(frame.values(x, n))
    }

    /// `q_k = mean of Q_k(x)` over the points.
    pub fn average(frame: &BasisFrame, xs: &[f64], n: usize) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut q = vec![0.0; n];
        for &x in xs {
            finite(x)?;
            for (acc, v) in q.iter_mut().zip(frame.values(x, n)) {
                *acc += v;
            }
        }
        q.iter_mut().for_each(|v| *v /= xs.len() as f64);
        Self::new(q)
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }
}

fn finite(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("non-finite x {x}")))
    }
}

fn spectrum_bounds(decomp: &SpectralDecomposition) -> (f64, f64) {
    let l = decomp.eigenvalues();
    (l[0], l[l.len() - 1])
}

fn weighted_ratio(decomp: &SpectralDecomposition, amplitudes: &[f64]) -> Option<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for (l, a) in decomp.eigenvalues().iter().zip(amplitudes) {
        let p = a * a;
        num += l * p;
        den += p;
    }
    if den > 0.0 {
        let (lo, hi) = spectrum_bounds(decomp);
        Some((num / den).clamp(lo, hi))
    } else {
        None
    }
}

/// `sum_i lambda_i psi_i(x)^2 / sum_i psi_i(x)^2`.
pub fn rn_nevai(decomp: &SpectralDecomposition, x: f64) -> Result<f64> {
    finite(x)?;
    weighted_ratio(decomp, &decomp.psi_values(x)).ok_or(Error::DegeneratePoint { x })
}

/// `sum_i lambda_i^g psi_i^2 / sum_i lambda_i^(g-1) psi_i^2`, `-1 <= g <= 1`.
///
/// A zero eigenvalue contributes nothing where its power vanishes; where
/// the power diverges the term must carry negligible `psi^2`.
pub fn rn_gamma(decomp: &SpectralDecomposition, x: f64, gamma: f64) -> Result<f64> {
    finite(x)?;
    if !(-1.0..=1.0).contains(&gamma) {
        return Err(Error::invalid(format!("gamma {gamma} outside [-1, 1]")));
    }
    let integer = gamma.fract() == 0.0;
    let pow = |l: f64, e: f64| if integer { l.powi(e as i32) } else { l.powf(e) };
    let psi = decomp.psi_values(x);
    let mut num = 0.0;
    let mut den = 0.0;
    for (&l, p) in decomp.eigenvalues().iter().zip(&psi) {
        let p2 = p * p;
        if l < 0.0 && !integer {
            return Err(Error::PositiveSpectrumRequired { eigenvalue: l });
        }
        if l == 0.0 {
            if gamma < 1.0 {
                // lambda^(gamma-1) diverges.
                if p2 >= 1e-300 {
                    return Err(Error::PositiveSpectrumRequired { eigenvalue: l });
                }
                continue;
            }
            den += p2;
            continue;
        }
        num += pow(l, gamma) * p2;
        den += pow(l, gamma - 1.0) * p2;
    }
    let r = num / den;
    if !r.is_finite() {
        return Err(Error::DegeneratePoint { x });
    }
    let (lo, hi) = spectrum_bounds(decomp);
    if decomp.eigenvalues().iter().all(|l| *l >= 0.0) || decomp.eigenvalues().iter().all(|l| *l <= 0.0) {
        Ok(r.clamp(lo, hi))
    } else {
        Ok(r)
    }
}

/// `sum_i lambda_i c_i^2 / sum_i c_i^2` with `c_i = sum_k a_ik q_k`.
pub fn rn_distributed(decomp: &SpectralDecomposition, state: &StateMoments) -> Result<f64> {
    if state.q.len() != decomp.n() {
        return Err(Error::invalid(format!(
            "state has {} moments, decomposition has {} states",
            state.q.len(),
            decomp.n()
        )));
    }
    let c: Vec<f64> = (0..decomp.n())
        .map(|i| decomp.coefficients(i).iter().zip(&state.q).map(|(a, q)| a * q).sum())
        .collect();
    weighted_ratio(decomp, &c).ok_or(Error::DegenerateState)
}
