//! D-point clustering: a Gaussian quadrature in `f`-space over the discrete
//! measure `{(f_i, w_i)}`, mapped back to `x`-space weights `p_m(x)`.

use nalgebra::DMatrix;

use crate::basis::{BasisFrame, BasisSpec};
use crate::density_matrix::DensityMatrix;
use crate::error::{Error, Result};
use crate::gev::SpectralDecomposition;
use crate::moments::{accumulate_in_frame, Sample};
use crate::quadrature::{gaussian_quadrature, GaussianQuadrature};

/// How `p_m(x)` is formed from the `x`-space states.
#[derive(Debug, Clone)]
enum Weighting {
    /// `p_m(x) = [sum_i psi_i(x) psi_G_m(f_i) <psi_i>]^2`.
    Pure(Vec<f64>),
    /// `p_m(x) = sum_ij psi_i(x) psi_j(x) psi_G_m(f_i) psi_G_m(f_j) <psi_i|rho|psi_j>`.
    Density(DMatrix<f64>),
}

#[derive(Debug, Clone)]
pub struct ClusterModel {
    quadrature: GaussianQuadrature,
    source: SpectralDecomposition,
    node_weights: Vec<f64>,
    weighting: Weighting,
    // psi_G_m(f_i), row m.
    psi_g_at_nodes: DMatrix<f64>,
}

impl ClusterModel {
    #[allow(non_snake_case)]
    pub fn D(&self) -> usize {
        self.quadrature.n()
    }

    /// `lambda_G`.
    pub fn cluster_values(&self) -> &[f64] {
        self.quadrature.nodes()
    }

    /// `w_G`.
    pub fn cluster_weights(&self) -> &[f64] {
        self.quadrature.weights()
    }

    /// The `f`-space quadrature; its eigenvectors are `psi_G_m(f)`.
    pub fn f_quadrature(&self) -> &GaussianQuadrature {
        &self.quadrature
    }

    pub fn source_decomposition(&self) -> &SpectralDecomposition {
        &self.source
    }

    /// The weights `w_i` of the `f`-space measure.
    pub fn node_weights(&self) -> &[f64] {
        &self.node_weights
    }

    /// `psi_G_m(f)`.
    pub fn psi_g(&self, m: usize, f: f64) -> f64 {
        self.quadrature.decomposition().psi(m, f)
    }

    /// `<psi_G_m|psi_G_s>_L`, `<psi_G_m|f|psi_G_s>_L` and `<psi_G_m>_L`.
    pub fn f_space_relations(&self) -> (DMatrix<f64>, DMatrix<f64>, Vec<f64>) {
        let d = self.D();
        let f = self.source.eigenvalues();
        let p = &self.psi_g_at_nodes;
        let mut overlap = DMatrix::zeros(d, d);
        let mut fmat = DMatrix::zeros(d, d);
        let mut means = vec![0.0; d];
        for (i, w) in self.node_weights.iter().enumerate() {
            for m in 0..d {
                means[m] += p[(m, i)] * w;
                for s in 0..d {
                    let v = p[(m, i)] * p[(s, i)] * w;
                    overlap[(m, s)] += v;
                    fmat[(m, s)] += v * f[i];
                }
            }
        }
        (overlap, fmat, means)
    }
}

/// Clusters with the Lebesgue weights of `decomp` (pure-state `||1><1||`).
pub fn build_clusters(decomp: &SpectralDecomposition, weights: &[f64], d: usize) -> Result<ClusterModel> {
    build(decomp, weights.to_vec(), d, Weighting::Pure(decomp.state_means()))
}

/// Clusters with generalized weights `<psi_i|rho|psi_i>`.
pub fn build_clusters_with_density(
    decomp: &SpectralDecomposition,
    rho: &DensityMatrix,
    d: usize,
) -> Result<ClusterModel> {
    let r = rho.in_states(decomp)?;
    let weights = (0..decomp.n()).map(|i| r[(i, i)]).collect();
    build(decomp, weights, d, Weighting::Density(r))
}

fn build(decomp: &SpectralDecomposition, weights: Vec<f64>, d: usize, weighting: Weighting) -> Result<ClusterModel> {
    let n = decomp.n();
    if weights.len() != n {
        return Err(Error::invalid(format!("{} weights for {n} states", weights.len())));
    }
    if d == 0 {
        return Err(Error::invalid("cluster count D must be at least 1"));
    }
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::InvalidMeasure("non-finite weight".into()));
    }
    let total: f64 = weights.iter().map(|w| w.abs()).sum();
    if let Some(w) = weights.iter().find(|w| **w < -1e-12 * total) {
        return Err(Error::InvalidMeasure(format!("negative weight {w:e}")));
    }
    let weights: Vec<f64> = weights.into_iter().map(|w| w.max(0.0)).collect();
    let f = decomp.eigenvalues();
    let mut support: Vec<f64> = f
        .iter()
        .zip(&weights)
        .filter(|(_, w)| **w > 1e-14 * total)
        .map(|(f, _)| *f)
        .collect();
    support.dedup();
    if d > support.len() {
        return Err(Error::RankDeficientMeasure {
            requested: d,
            support: support.len(),
        });
    }
    let lo = support[0];
    let hi = support[support.len() - 1];
    let frame = if hi > lo {
        BasisFrame::fitted(BasisSpec::Monomial, lo, hi)?
    } else {
        BasisFrame::new(BasisSpec::Monomial, crate::basis::AffineMap::new(lo, 1.0)?)
    };
    let samples = f
        .iter()
        .zip(&weights)
        .filter(|(_, w)| **w > 1e-14 * total)
        .map(|(f, w)| Sample::new(*f, 0.0, *w))
        .collect::<Result<Vec<_>>>()?;
    let moments = accumulate_in_frame(samples, &frame, d)?;
    let quadrature = gaussian_quadrature(&moments).map_err(|e| match e {
        Error::GramNotPositiveDefinite { .. } | Error::SelfCheck(_) => Error::RankDeficientMeasure {
            requested: d,
            support: support.len(),
        },
        e => e,
    })?;
    let psi_g_at_nodes = DMatrix::from_fn(d, n, |m, i| quadrature.decomposition().psi(m, f[i]));
    Ok(ClusterModel {
        quadrature,
        source: decomp.clone(),
        node_weights: weights,
        weighting,
        psi_g_at_nodes,
    })
}

/// `p_m(x)`.
pub fn cluster_weight_at(model: &ClusterModel, m: usize, x: f64) -> f64 {
    let psi = model.source.psi_values(x);
    weight_from_psi(model, m, &psi)
}

fn weight_from_psi(model: &ClusterModel, m: usize, psi: &[f64]) -> f64 {
    let g = model.psi_g_at_nodes.row(m);
    match &model.weighting {
        Weighting::Pure(means) => {
            let amp: f64 = psi.iter().zip(g.iter()).zip(means).map(|((p, g), a)| p * g * a).sum();
            amp * amp
        }
        Weighting::Density(r) => {
            let v: Vec<f64> = psi.iter().zip(g.iter()).map(|(p, g)| p * g).collect();
            let n = v.len();
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += v[i] * v[j] * r[(i, j)];
                }
            }
            s
        }
    }
}

fn ratio(model: &ClusterModel, x: f64, weighted: bool) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::invalid(format!("non-finite x {x}")));
    }
    let psi = model.source.psi_values(x);
    let mut num = 0.0;
    let mut den = 0.0;
    for m in 0..model.D() {
        let mut p = weight_from_psi(model, m, &psi).max(0.0);
        if weighted {
            p *= model.cluster_weights()[m];
        }
        num += model.cluster_values()[m] * p;
        den += p;
    }
    if !(den > 0.0) {
        return Err(Error::DegeneratePoint { x });
    }
    let v = model.cluster_values();
    Ok((num / den).clamp(v[0], v[v.len() - 1]))
}

/// `sum_m lambda_G_m p_m(x) / sum_m p_m(x)`.
pub fn rn_interpolate(model: &ClusterModel, x: f64) -> Result<f64> {
    ratio(model, x, false)
}

/// As [`rn_interpolate`] with each `p_m` multiplied by `w_G_m`.
pub fn rn_classify(model: &ClusterModel, x: f64) -> Result<f64> {
    ratio(model, x, true)
}
