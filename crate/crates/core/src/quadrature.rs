//! Gaussian and Lebesgue quadratures built from spectral decompositions.

use nalgebra::DMatrix;

use crate::basis::{BasisFrame, PolynomialInBasis, ProductTable};
use crate::density_matrix::moments_producing_polynomial;
use crate::error::{Error, Result};
use crate::gev::{mean_of_state, solve_pencil, Cholesky, SpectralDecomposition};
use crate::moments::{x_pencil, MomentSet, OperatorPair};

/// Value-nodes `f_i` with weights `w_i = <psi_i>^2`.
///
/// The decomposition is kept: weights for `<f P>` need the eigenvectors.
/// Zero-weight nodes are retained.
#[derive(Debug, Clone)]
pub struct LebesgueQuadrature {
    value_nodes: Vec<f64>,
    weights: Vec<f64>,
    decomposition: SpectralDecomposition,
    total_measure: f64,
}

impl LebesgueQuadrature {
    pub fn value_nodes(&self) -> &[f64] {
        &self.value_nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn decomposition(&self) -> &SpectralDecomposition {
        &self.decomposition
    }

    pub fn total_measure(&self) -> f64 {
        self.total_measure
    }

    pub fn n(&self) -> usize {
        self.value_nodes.len()
    }

    pub fn integrate(&self) -> f64 {
        integrate(self)
    }
}

/// Solves the pencil and attaches Lebesgue weights.
pub fn lebesgue_quadrature(pair: &OperatorPair, mu_moments: &[f64]) -> Result<LebesgueQuadrature> {
    if mu_moments.len() < pair.n() {
        return Err(Error::invalid(format!(
            "need at least {} measure moments, got {}",
            pair.n(),
            mu_moments.len()
        )));
    }
    let decomposition = solve_pencil(pair)?;
    let weights = (0..decomposition.n())
        .map(|i| mean_of_state(&decomposition, i, mu_moments).powi(2))
        .collect();
    Ok(LebesgueQuadrature {
        value_nodes: decomposition.eigenvalues().to_vec(),
        weights,
        total_measure: mu_moments[0],
        decomposition,
    })
}

/// `sum_i f_i w_i`.
pub fn integrate(quad: &LebesgueQuadrature) -> f64 {
    quad.value_nodes.iter().zip(&quad.weights).map(|(f, w)| f * w).sum()
}

/// Nodes `x_i` and weights `w_i` of the `n`-point Gaussian quadrature.
#[derive(Debug, Clone)]
pub struct GaussianQuadrature {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    decomposition: SpectralDecomposition,
}

impl GaussianQuadrature {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn decomposition(&self) -> &SpectralDecomposition {
        &self.decomposition
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn apply<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| f(*x) * w).sum()
    }
}

/// Gaussian quadrature from the `f = x` pencil. Weights are computed both
/// as `<psi_i>^2` and as `1 / psi_i(x_i)^2` and must agree to `1e-8`.
pub fn gaussian_quadrature(moments: &MomentSet) -> Result<GaussianQuadrature> {
    let pair = x_pencil(moments)?;
    let decomposition = solve_pencil(&pair)?;
    let nodes = decomposition.eigenvalues().to_vec();
    let weights: Vec<f64> = decomposition.state_means().iter().map(|m| m * m).collect();
    for (i, (&x, &w)) in nodes.iter().zip(&weights).enumerate() {
        let psi = decomposition.psi(i, x);
        let alt = 1.0 / (psi * psi);
        if !((w - alt).abs() <= 1e-8 * w.abs().max(alt.abs())) {
            return Err(Error::SelfCheck(format!(
                "Gaussian weight {i}: <psi>^2 = {w:e}, 1/psi(x)^2 = {alt:e}"
            )));
        }
    }
    if nodes.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::SelfCheck("Gaussian nodes are not strictly increasing".into()));
    }
    Ok(GaussianQuadrature {
        nodes,
        weights,
        decomposition,
    })
}

/// Weights `w_(P)_i = <psi_i|P|psi_i>` such that
/// `sum_i f_i w_(P)_i = <f P>` for `deg P <= 2n - 2`.
///
/// For `deg P < n` the weights are `<P|psi_i> <psi_i>`; above that the
/// measure-generated density matrix of `P` supplies `<Q_j Q_k>_P`.
pub fn weights_for_polynomial(quad: &LebesgueQuadrature, p: &PolynomialInBasis) -> Result<Vec<f64>> {
    let decomp = quad.decomposition();
    let n = decomp.n();
    if p.degree() > 2 * n - 2 {
        return Err(Error::DegreeTooHigh {
            degree: p.degree(),
            max: 2 * n - 2,
        });
    }
    if p.basis() != decomp.frame().basis() {
        return Err(Error::invalid(format!(
            "polynomial basis {} differs from quadrature basis {}",
            p.basis(),
            decomp.frame().basis()
        )));
    }
    if p.degree() < n {
        // <P|psi_i> <psi_i>, P = sum_k gamma_k Q_k.
        let means = decomp.state_means();
        let gamma = nalgebra::DVector::from_column_slice(p.coefficients());
        let gp = decomp.gram().columns(0, p.degree() + 1) * gamma;
        return Ok((0..n)
            .map(|i| {
                let proj: f64 = decomp.coefficients(i).iter().zip(gp.iter()).map(|(a, g)| a * g).sum();
                proj * means[i]
            })
            .collect());
    }
    let moments_p = moments_producing_polynomial(p, decomp.gram(), n)?;
    let table = ProductTable::new(p.basis(), n)?;
    let qq_p = table.contract(moments_p.moments());
    Ok(decomp.expectations(&qq_p))
}

/// PCA split of `<f^2>` over the value-nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaDecomposition {
    pub mean: f64,
    pub per_component: Vec<f64>,
    pub residual: f64,
}

/// `residual = <f^2> - sum_i f_i^2 w_i`; components `(f_i - mean)^2 w_i`.
pub fn pca_variance_decomposition(quad: &LebesgueQuadrature, f_second_moment: f64) -> PcaDecomposition {
    let total: f64 = quad.weights.iter().sum();
    let mean = integrate(quad) / total;
    let per_component = quad
        .value_nodes
        .iter()
        .zip(&quad.weights)
        .map(|(f, w)| (f - mean).powi(2) * w)
        .collect();
    let explained: f64 = quad.value_nodes.iter().zip(&quad.weights).map(|(f, w)| f * f * w).sum();
    PcaDecomposition {
        mean,
        per_component,
        residual: f_second_moment - explained,
    }
}

/// `K(x) = 1 / sum_jk Q_j(x) G^{-1}_jk Q_k(x)` against a factored Gram matrix.
#[derive(Debug, Clone)]
pub struct ChristoffelFunction {
    frame: BasisFrame,
    cholesky: Cholesky,
}

impl ChristoffelFunction {
    pub fn new(gram: &DMatrix<f64>, frame: &BasisFrame) -> Result<Self> {
        let n = gram.nrows();
        if n == 0 {
            return Err(Error::invalid("empty Gram matrix"));
        }
        frame.basis().check_degree(n - 1)?;
        Ok(Self {
            frame: frame.clone(),
            cholesky: Cholesky::factor(gram)?,
        })
    }

    pub fn n(&self) -> usize {
        self.cholesky.n()
    }

    pub fn frame(&self) -> &BasisFrame {
        &self.frame
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        let q = self.frame.values(x, self.n());
        1.0 / self.cholesky.inverse_quadratic_form(&q)
    }
}

pub fn christoffel_function(gram: &DMatrix<f64>, frame: &BasisFrame, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::invalid(format!("non-finite x {x}")));
    }
    Ok(ChristoffelFunction::new(gram, frame)?.evaluate(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisSpec;
    use crate::moments::{accumulate_moments, matrices_from_moments, Sample};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn legendre_exact(n: usize) -> MomentSet {
        let mu: Vec<f64> = (0..2 * n).map(|m| if m % 2 == 0 { 2.0 / (m as f64 + 1.0) } else { 0.0 }).collect();
        MomentSet::from_moments(BasisFrame::raw(BasisSpec::Monomial), n, mu, vec![0.0; 2 * n - 1]).unwrap()
    }

    fn random_measure(rng: &mut impl Rng, m: usize) -> Vec<Sample> {
        (0..m)
            .map(|_| {
                let x = rng.random_range(-1.0..1.0);
                Sample::new(x, (3.0 * x).sin() + rng.random_range(-0.2..0.2), rng.random_range(0.1..1.0)).unwrap()
            })
            .collect()
    }

    fn grid(m: usize, f: impl Fn(f64) -> f64) -> Vec<Sample> {
        (0..m)
            .map(|l| {
                let x = -1.0 + 2.0 * l as f64 / (m - 1) as f64;
                let w = if l == 0 || l == m - 1 { 1.0 } else { 2.0 } / (m - 1) as f64;
                Sample::new(x, f(x), w).unwrap()
            })
            .collect()
    }

    fn runge(x: f64) -> f64 {
        1.0 / (1.0 + 25.0 * x * x)
    }

    #[test]
    fn one_point_rules() {
        let g = gaussian_quadrature(&legendre_exact(1)).unwrap();
        assert_eq!(g.nodes(), &[0.0]);
        assert_relative_eq!(g.weights()[0], 2.0, max_relative = 1e-15);
        let samples = grid(11, |x| x * x);
        let mom = accumulate_moments(samples.clone(), &BasisSpec::Legendre, 1).unwrap();
        let q = lebesgue_quadrature(&matrices_from_moments(&mom).unwrap(), mom.mu_moments()).unwrap();
        assert_relative_eq!(q.value_nodes()[0], mom.f_moments()[0] / mom.mu_moments()[0], max_relative = 1e-14);
        assert_relative_eq!(q.weights()[0], mom.total_measure(), max_relative = 1e-14);
    }

    #[test]
    fn constant_observable() {
        let mom = accumulate_moments(grid(101, |_| 2.5), &BasisSpec::Chebyshev, 5).unwrap();
        let q = lebesgue_quadrature(&matrices_from_moments(&mom).unwrap(), mom.mu_moments()).unwrap();
        for f in q.value_nodes() {
            assert!((f - 2.5).abs() < 1e-12);
        }
        assert_relative_eq!(q.weights().iter().sum::<f64>(), 2.0, max_relative = 1e-9);
        assert_relative_eq!(q.integrate(), 5.0, max_relative = 1e-9);
        let pca = pca_variance_decomposition(&q, 6.25 * 2.0);
        assert!(pca.residual.abs() < 1e-9 * 12.5);
    }

    // Gauss-Legendre nodes by Newton iteration on P_7 from Chebyshev guesses.
    fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes.push(x);
            weights.push(2.0 / ((1.0 - x * x) * dp * dp));
        }
        let mut pairs: Vec<_> = nodes.into_iter().zip(weights).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs.into_iter().unzip()
    }

    #[test]
    fn exact_moments_match_gauss_legendre() {
        let g = gaussian_quadrature(&legendre_exact(7)).unwrap();
        let (x, w) = gauss_legendre(7);
        for i in 0..7 {
            assert!((g.nodes()[i] - x[i]).abs() < 1e-12);
            assert!((g.weights()[i] - w[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn sampled_gauss_rule() {
        let mom = accumulate_moments(grid(10001, |x| x), &BasisSpec::Chebyshev, 7).unwrap();
        let g = gaussian_quadrature(&mom).unwrap();
        let nodes = [-0.9491080257, -0.7415313130, -0.4058452239, 0.0, 0.4058452239, 0.7415313130, 0.9491080257];
        let weights = [0.1294848, 0.2797054, 0.3818301, 0.4179593, 0.3818301, 0.2797054, 0.1294848];
        for i in 0..7 {
            assert!((g.nodes()[i] - nodes[i]).abs() < 1e-6);
            assert!((g.weights()[i] - weights[i]).abs() < 1e-6);
        }
        // Gaussian-as-Lebesgue: same pencil, same nodes.
        let q = lebesgue_quadrature(&matrices_from_moments(&mom).unwrap(), mom.mu_moments()).unwrap();
        for (a, b) in q.value_nodes().iter().zip(g.nodes()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_exactness() {
        let n = 6;
        let g = gaussian_quadrature(&legendre_exact(n)).unwrap();
        for d in 0..2 * n {
            let exact = if d % 2 == 0 { 2.0 / (d as f64 + 1.0) } else { 0.0 };
            let got = g.apply(|x| x.powi(d as i32));
            assert!((got - exact).abs() <= 1e-10 * exact.abs().max(1.0));
        }
    }

    #[test]
    fn runge_integral_and_pca() {
        let samples = grid(10001, runge);
        let n = 7;
        let mom = accumulate_moments(samples.clone(), &BasisSpec::Legendre, n).unwrap();
        let f2: f64 = samples.iter().map(|s| s.weight * s.f * s.f).sum();
        let q = lebesgue_quadrature(&matrices_from_moments(&mom).unwrap(), mom.mu_moments()).unwrap();
        let direct: f64 = samples.iter().map(|s| s.weight * s.f).sum();
        assert_relative_eq!(q.integrate(), direct, max_relative = 1e-9);

        // Normal-equations least squares in the Legendre basis.
        let frame = BasisFrame::raw(BasisSpec::Legendre);
        let mut a = DMatrix::<f64>::zeros(n, n);
        let mut b = nalgebra::DVector::<f64>::zeros(n);
        for s in &samples {
            let qv = frame.values(s.x, n);
            for j in 0..n {
                b[j] += s.weight * s.f * qv[j];
                for k in 0..n {
                    a[(j, k)] += s.weight * qv[j] * qv[k];
                }
            }
        }
        let c = a.clone().cholesky().unwrap().solve(&b);
        let lsq = f2 - b.dot(&c);
        let pca = pca_variance_decomposition(&q, f2);
        assert_relative_eq!(pca.residual, lsq, max_relative = 1e-6);
        let centred: f64 = samples.iter().map(|s| s.weight * (s.f - pca.mean).powi(2)).sum();
        let alt = centred - pca.per_component.iter().sum::<f64>();
        assert!((alt - pca.residual).abs() <= 1e-9 * f2);
    }

    #[test]
    fn pca_of_low_degree_polynomial() {
        let samples = grid(501, |x| 1.0 - 2.0 * x + 0.5 * x * x * x);
        let mom = accumulate_moments(samples.clone(), &BasisSpec::Chebyshev, 5).unwrap();
        let f2: f64 = samples.iter().map(|s| s.weight * s.f * s.f).sum();
        let q = lebesgue_quadrature(&matrices_from_moments(&mom).unwrap(), mom.mu_moments()).unwrap();
        let pca = pca_variance_decomposition(&q, f2);
        assert!(pca.residual.abs() <= 1e-9 * f2);
    }

    #[test]
    fn christoffel_function_cases() {
        let mom = accumulate_moments(grid(10001, |x| x), &BasisSpec::Legendre, 1).unwrap();
        let frame = BasisFrame::raw(BasisSpec::Monomial);
        let gram = DMatrix::from_element(1, 1, mom.total_measure());
        for x in [-3.0, 0.0, 0.7] {
            assert_relative_eq!(christoffel_function(&gram, &frame, x).unwrap(), mom.total_measure(), max_relative = 1e-15);
        }
        assert!(christoffel_function(&gram, &frame, f64::NAN).is_err());

        let mom = accumulate_moments(grid(10001, |x| x), &BasisSpec::Legendre, 7).unwrap();
        let g = gaussian_quadrature(&mom).unwrap();
        let pair = x_pencil(&mom).unwrap();
        let k = ChristoffelFunction::new(pair.right(), pair.frame()).unwrap();
        for (x, w) in g.nodes().iter().zip(g.weights()) {
            assert_relative_eq!(k.evaluate(*x), *w, max_relative = 1e-8);
        }
        for x in [-0.95, -0.3, 0.1, 0.8, 1.5] {
            let s: f64 = g.decomposition().psi_values(x).iter().map(|p| p * p).sum();
            assert_relative_eq!(1.0 / k.evaluate(x), s, max_relative = 1e-10);
        }
    }

    #[test]
    fn polynomial_weights_special_cases() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let samples = random_measure(&mut rng, 200);
        let n = 5;
        let basis = BasisSpec::Legendre;
        let mom = accumulate_moments(samples.clone(), &basis, n).unwrap();
        let q = lebesgue_quadrature(&matrices_from_moments(&mom).unwrap(), mom.mu_moments()).unwrap();
        let one = PolynomialInBasis::constant(basis.clone(), 1.0).unwrap();
        for (a, b) in weights_for_polynomial(&q, &one).unwrap().iter().zip(q.weights()) {
            assert!((a - b).abs() < 1e-10 * q.total_measure());
        }
        // Degree <= n-1: w_(P) = <P|psi> <psi>.
        let coeffs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let p = PolynomialInBasis::new(basis.clone(), coeffs.clone()).unwrap();
        let wp = weights_for_polynomial(&q, &p).unwrap();
        let d = q.decomposition();
        let means = d.state_means();
        for i in 0..n {
            let a = d.coefficients(i);
            let proj: f64 = (0..n)
                .map(|j| a[j] * (0..n).map(|k| d.gram()[(j, k)] * coeffs[k]).sum::<f64>())
                .sum();
            assert!((wp[i] - proj * means[i]).abs() < 1e-10 * q.total_measure());
        }
        let too_high = PolynomialInBasis::new(basis, vec![1.0; 2 * n]).unwrap();
        assert!(matches!(weights_for_polynomial(&q, &too_high), Err(Error::DegreeTooHigh { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn polynomial_weight_exactness(seed in any::<u64>(), n in 2usize..9) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let samples = random_measure(&mut rng, 200);
            let basis = BasisSpec::Chebyshev;
            let mom = accumulate_moments(samples.clone(), &basis, n).unwrap();
            let q = lebesgue_quadrature(&matrices_from_moments(&mom).unwrap(), mom.mu_moments()).unwrap();
            let coeffs: Vec<f64> = (0..2 * n - 1).map(|_| rng.random_range(-1.0..1.0)).collect();
            let p = PolynomialInBasis::new(basis, coeffs).unwrap();
            let wp = weights_for_polynomial(&q, &p).unwrap();
            let got: f64 = q.value_nodes().iter().zip(&wp).map(|(f, w)| f * w).sum();
            let terms: Vec<f64> = samples.iter().map(|s| s.weight * s.f * p.evaluate(s.x)).collect();
            let brute: f64 = terms.iter().sum();
            let scale = terms.iter().map(|t| t.abs()).sum::<f64>();
            prop_assert!((got - brute).abs() <= 1e-9 * brute.abs().max(scale));
            let psum: f64 = samples.iter().map(|s| s.weight * p.evaluate(s.x)).sum();
            let wsum: f64 = wp.iter().sum();
            let pscale: f64 = samples.iter().map(|s| (s.weight * p.evaluate(s.x)).abs()).sum();
            prop_assert!((wsum - psum).abs() <= 1e-9 * psum.abs().max(pscale));
        }

        #[test]
        fn weight_sums_and_bounds(seed in any::<u64>(), n in 1usize..9) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let samples = random_measure(&mut rng, 100);
            let mom = accumulate_moments(samples.clone(), &BasisSpec::Legendre, n).unwrap();
            let q = lebesgue_quadrature(&matrices_from_moments(&mom).unwrap(), mom.mu_moments()).unwrap();
            let total = mom.total_measure();
            prop_assert!((q.weights().iter().sum::<f64>() - total).abs() <= 1e-9 * total);
            let fmean: f64 = samples.iter().map(|s| s.weight * s.f).sum();
            let fscale: f64 = samples.iter().map(|s| (s.weight * s.f).abs()).sum();
            prop_assert!((q.integrate() - fmean).abs() <= 1e-9 * fscale);
            let fmin = samples.iter().map(|s| s.f).fold(f64::INFINITY, f64::min);
            let fmax = samples.iter().map(|s| s.f).fold(f64::NEG_INFINITY, f64::max);
            let tol = 1e-10 * (fmax - fmin).max(1.0);
            for f in q.value_nodes() {
                prop_assert!(*f >= fmin - tol && *f <= fmax + tol);
            }
            prop_assert!(q.weights().iter().all(|w| *w >= 0.0));
        }
    }
}
