//! The pencil with `f(x) = K(x)`, its density matrix `||rho_K||` and
//! Christoffel weights `<psi_i|K|psi_i>`.

use nalgebra::DMatrix;

use crate::basis::BasisFrame;
use crate::density_matrix::{DensityMatrix, DensitySource};
use crate::error::Result;
use crate::gev::SpectralDecomposition;
use crate::moments::{second_pass_matrix, Sample};
use crate::quadrature::ChristoffelFunction;

#[derive(Debug, Clone)]
pub struct ChristoffelSpectrum {
    rho_k: DensityMatrix,
}

impl ChristoffelSpectrum {
    pub fn decomposition(&self) -> &SpectralDecomposition {
        self.rho_k.decomposition()
    }

    pub fn rho_k(&self) -> &DensityMatrix {
        &self.rho_k
    }

    /// `lambda_K`.
    pub fn eigenvalues(&self) -> &[f64] {
        self.rho_k.eigenvalues()
    }

    /// `<Q_j|K|Q_k>`.
    pub fn k_matrix(&self) -> &DMatrix<f64> {
        self.rho_k.operator()
    }

    /// Lebesgue weights `<psi_K>^2` of the K-pencil.
    pub fn lebesgue_weights(&self) -> Vec<f64> {
        self.decomposition().state_means().iter().map(|m| m * m).collect()
    }
}

/// Second pass over the samples: `<Q_j|K(x)|Q_k>` with `K` from the
/// first-pass Gram matrix.
pub fn christoffel_pencil<I>(samples: I, gram: &DMatrix<f64>, frame: &BasisFrame) -> Result<ChristoffelSpectrum>
where
    I: IntoIterator<Item = Sample>,
{
    let k = ChristoffelFunction::new(gram, frame)?;
    let fk = second_pass_matrix(samples, frame, gram.nrows(), |x| k.evaluate(x))?;
    Ok(ChristoffelSpectrum {
        rho_k: DensityMatrix::from_operator(frame, fk, gram, DensitySource::FromChristoffel)?,
    })
}

/// `w_K_i = <psi_i|K|psi_i>` for the states of `target`.
pub fn christoffel_weights(target: &SpectralDecomposition, spectrum: &ChristoffelSpectrum) -> Result<Vec<f64>> {
    spectrum.rho_k.state_weights(target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisSpec;
    use crate::gev::solve_pencil;
    use crate::moments::{accumulate_moments, matrices_from_moments, x_pencil};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn runge_grid() -> Vec<Sample> {
        let m = 10001;
        (0..m)
            .map(|l| {
                let x = -1.0 + 2.0 * l as f64 / (m - 1) as f64;
                let w = if l == 0 || l == m - 1 { 1.0 } else { 2.0 } / (m - 1) as f64;
                Sample::new(x, 1.0 / (1.0 + 25.0 * x * x), w).unwrap()
            })
            .collect()
    }

    #[test]
    fn runge_tables() {
        let samples = runge_grid();
        let mom = accumulate_moments(samples.clone(), &BasisSpec::Monomial, 7).unwrap();
        let pair = x_pencil(&mom).unwrap();
        let spec = christoffel_pencil(samples, pair.right(), pair.frame()).unwrap();
        let lambda_k = [0.10226835, 0.12057295, 0.25910243, 0.29247790, 0.37696957, 0.40799887, 0.44060993];
        let weights = [0.16153574, 0.0, 0.44764182, 0.0, 0.63885077, 0.0, 0.75197166];
        for i in 0..7 {
            assert!((spec.eigenvalues()[i] - lambda_k[i]).abs() < 1e-6);
            assert!((spec.lebesgue_weights()[i] - weights[i]).abs() < 1e-6);
        }
        assert!((spec.eigenvalues().iter().sum::<f64>() - 2.0).abs() < 1e-3);

        let gauss = solve_pencil(&pair).unwrap();
        let wk = christoffel_weights(&gauss, &spec).unwrap();
        let want = [0.117461, 0.279480, 0.389120, 0.427878, 0.389120, 0.279480, 0.117461];
        for i in 0..7 {
            assert!((wk[i] - want[i]).abs() < 1e-6);
        }
        let own = christoffel_weights(spec.decomposition(), &spec).unwrap();
        for (a, b) in own.iter().zip(spec.eigenvalues()) {
            assert_relative_eq!(*a, *b, max_relative = 1e-9);
        }
    }

    #[test]
    fn single_state() {
        let samples: Vec<Sample> = (0..20).map(|l| Sample::new(l as f64 * 0.1, 0.0, 0.5).unwrap()).collect();
        let mom = accumulate_moments(samples.clone(), &BasisSpec::Monomial, 1).unwrap();
        let pair = matrices_from_moments(&mom).unwrap();
        let spec = christoffel_pencil(samples, pair.right(), pair.frame()).unwrap();
        assert_relative_eq!(spec.eigenvalues()[0], 10.0, max_relative = 1e-13);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(30))]
        #[test]
        fn spur_and_positivity(seed in any::<u64>(), n in 1usize..8) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let samples: Vec<Sample> = (0..200)
                .map(|_| {
                    let x: f64 = rng.random_range(-1.0..1.0);
                    Sample::new(x, x.sin(), rng.random_range(0.1..1.0)).unwrap()
                })
                .collect();
            let mom = accumulate_moments(samples.clone(), &BasisSpec::Chebyshev, n).unwrap();
            let pair = matrices_from_moments(&mom).unwrap();
            let spec = christoffel_pencil(samples, pair.right(), pair.frame()).unwrap();
            let total = mom.total_measure();
            prop_assert!(spec.eigenvalues().iter().all(|l| *l > 0.0));
            // Discrete measures satisfy the spur identity exactly.
            prop_assert!((spec.eigenvalues().iter().sum::<f64>() - total).abs() <= 1e-9 * total);
            let f = solve_pencil(&pair).unwrap();
            let wk = christoffel_weights(&f, &spec).unwrap();
            prop_assert!(wk.iter().all(|w| *w > 0.0));
            prop_assert!((wk.iter().sum::<f64>() - total).abs() <= 1e-9 * total);
            prop_assert!((spec.lebesgue_weights().iter().sum::<f64>() - total).abs() <= 1e-9 * total);
        }
    }
}
