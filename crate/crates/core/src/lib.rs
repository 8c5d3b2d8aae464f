//! Gaussian and Lebesgue quadratures from sampled measures.
//!
//! A measure is given by samples `(x, f, weight)`. Moments in an
//! orthogonal-polynomial basis give the pencil `<Q_j|f|Q_k> a = lambda <Q_j|Q_k> a`;
//! its eigenvalues are the Lebesgue value-nodes, `<psi_i>^2` their weights.
//! With `f = x` the same pencil yields the Gaussian quadrature.

pub mod basis;
pub mod christoffel;
pub mod cli;
pub mod clustering;
pub mod density_matrix;
pub mod error;
pub mod gev;
pub mod io;
pub mod moments;
pub mod quadrature;
pub mod radon_nikodym;

pub use basis::{AffineMap, BasisFrame, BasisSpec, PolynomialInBasis, Recurrence};
pub use christoffel::{christoffel_pencil, christoffel_weights, ChristoffelSpectrum};
pub use clustering::{build_clusters, build_clusters_with_density, cluster_weight_at, rn_classify, rn_interpolate, ClusterModel};
pub use density_matrix::{
    density_matrix_from_polynomial, moments_producing_polynomial, pure_average, reconstruct_diagonal, spur,
    spur_product, DensityMatrix, DensitySource,
};
pub use error::{Error, Result};
pub use gev::{solve_pencil, SpectralDecomposition};
pub use moments::{
    accumulate_in_frame, accumulate_moments, matrices_from_moments, three_term_recurrence, x_pencil, MomentSet,
    OperatorPair, Sample,
};
pub use quadrature::{
    christoffel_function, gaussian_quadrature, lebesgue_quadrature, pca_variance_decomposition,
    weights_for_polynomial, GaussianQuadrature, LebesgueQuadrature,
};
pub use radon_nikodym::{rn_distributed, rn_gamma, rn_nevai, StateMoments};
