//! Symmetric-definite generalized eigenproblem `F a = lambda G a`.
//!
//! `G = L L^T` is factored, the standard symmetric problem for
//! `L^{-1} F L^{-T}` is solved, and eigenvectors are back-transformed so
//! that `a_i^T G a_j = delta_ij`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::basis::BasisFrame;
use crate::error::{Error, Result};
use crate::moments::OperatorPair;

/// Relative pivot size below which a Gram matrix counts as singular.
const PIVOT_TOLERANCE: f64 = 100.0 * f64::EPSILON;

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    l: DMatrix<f64>,
}

impl Cholesky {
    /// Fails with the index of the first pivot that is not safely positive.
    pub fn factor(g: &DMatrix<f64>) -> Result<Self> {
        let n = g.nrows();
        if !g.is_square() {
            return Err(Error::InvalidMatrix(format!("Gram matrix is {:?}", g.shape())));
        }
        let mut l = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let mut d = g[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !d.is_finite() || d <= PIVOT_TOLERANCE * g[(j, j)].abs() || d <= 0.0 {
                return Err(Error::GramNotPositiveDefinite { pivot: j });
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in j + 1..n {
                let mut s = g[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(Self { l })
    }

    pub fn n(&self) -> usize {
        self.l.nrows()
    }

    pub fn lower(&self) -> &DMatrix<f64> {
        &self.l
    }

    /// Solves `L y = b` in place.
    pub fn solve_lower_in_place(&self, b: &mut [f64]) {
        let n = self.n();
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l[(i, k)] * b[k];
            }
            b[i] = s / self.l[(i, i)];
        }
    }

    /// Solves `L^T y = b` in place.
    pub fn solve_upper_in_place(&self, b: &mut [f64]) {
        let n = self.n();
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n {
                s -= self.l[(k, i)] * b[k];
            }
            b[i] = s / self.l[(i, i)];
        }
    }

    /// `v^T G^{-1} v`, through one triangular solve.
    pub fn inverse_quadratic_form(&self, v: &[f64]) -> f64 {
        let mut y = v.to_vec();
        self.solve_lower_in_place(&mut y);
        y.iter().map(|t| t * t).sum()
    }

    /// `L^{-1}`.
    pub fn lower_inverse(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut inv = DMatrix::zeros(n, n);
        let mut col = vec![0.0; n];
        for j in 0..n {
            col.iter_mut().for_each(|v| *v = 0.0);
            col[j] = 1.0;
            self.solve_lower_in_place(&mut col);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv
    }

    /// `G^{-1}`, exactly symmetric.
    pub fn inverse(&self) -> DMatrix<f64> {
        let li = self.lower_inverse();
        let mut inv = li.transpose() * &li;
        symmetrize(&mut inv);
        inv
    }
}

pub(crate) fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

fn check_symmetric(m: &DMatrix<f64>, what: &str) -> Result<()> {
    let scale = m.amax();
    let n = m.nrows();
    for i in 0..n {
        for j in i + 1..n {
            let d = (m[(i, j)] - m[(j, i)]).abs();
            if !(d <= 1e-10 * scale) {
                return Err(Error::InvalidMatrix(format!(
                    "{what} matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

/// Eigenpairs `(lambda_i, psi_i)` of a pencil, ascending in `lambda`.
///
/// Row `i` of `eigenvectors` holds the coefficients `a_k` of
/// `psi_i(x) = sum_k a_k Q_k(t(x))`. Inside a degenerate eigenvalue cluster
/// the individual vectors are not canonical; only sums over the cluster are.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    frame: BasisFrame,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
    gram: DMatrix<f64>,
    cholesky: Cholesky,
}

impl SpectralDecomposition {
    pub fn frame(&self) -> &BasisFrame {
        &self.frame
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn coefficients(&self, i: usize) -> Vec<f64> {
        self.eigenvectors.row(i).iter().copied().collect()
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn cholesky(&self) -> &Cholesky {
        &self.cholesky
    }

    /// `psi_i(x)` for every `i`.
    pub fn psi_values(&self, x: f64) -> Vec<f64> {
        let q = DVector::from_vec(self.frame.values(x, self.n()));
        (&self.eigenvectors * q).iter().copied().collect()
    }

    pub fn psi(&self, i: usize, x: f64) -> f64 {
        let q = self.frame.values(x, self.n());
        self.eigenvectors.row(i).iter().zip(&q).map(|(a, b)| a * b).sum()
    }

    /// `a_i^T M a_j`.
    pub fn bilinear(&self, i: usize, j: usize, m: &DMatrix<f64>) -> f64 {
        (self.eigenvectors.row(i) * m * self.eigenvectors.row(j).transpose())[(0, 0)]
    }

    /// `<psi_i|M|psi_i>` for every `i`.
    pub fn expectations(&self, m: &DMatrix<f64>) -> Vec<f64> {
        (0..self.n()).map(|i| self.bilinear(i, i, m)).collect()
    }

    /// Matrix `<psi_i|M|psi_j>`.
    pub fn in_eigenbasis(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        &self.eigenvectors * m * self.eigenvectors.transpose()
    }

    /// `<psi_i>` for every `i`, read from the Gram matrix (`Q_0 == 1`).
    pub fn state_means(&self) -> Vec<f64> {
        let g0 = self.gram.row(0);
        (0..self.n())
            .map(|i| self.eigenvectors.row(i).iter().zip(g0.iter()).map(|(a, g)| a * g).sum())
            .collect()
    }
}

/// Solves `left a = lambda right a`.
///
/// Each eigenvector is signed so that `<psi_i> >= 0`; when `<psi_i>`
/// vanishes, its first non-negligible coefficient is made positive.
pub fn solve_pencil(pair: &OperatorPair) -> Result<SpectralDecomposition> {
    check_symmetric(pair.left(), "left")?;
    check_symmetric(pair.right(), "right")?;
    let mut gram = pair.right().clone();
    symmetrize(&mut gram);
    let mut f = pair.left().clone();
    symmetrize(&mut f);
    let chol = Cholesky::factor(&gram)?;
    let n = gram.nrows();
    let li = chol.lower_inverse();
    let mut reduced = &li * &f * li.transpose();
    symmetrize(&mut reduced);
    let eig = SymmetricEigen::new(reduced);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let lit = li.transpose();
    let mut vectors = DMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    let g0: Vec<f64> = gram.row(0).iter().copied().collect();
    let g0_scale = g0.iter().map(|v| v.abs()).fold(0.0, f64::max);
    for (row, &idx) in order.iter().enumerate() {
        values.push(eig.eigenvalues[idx]);
        let y = eig.eigenvectors.column(idx);
        let mut a: Vec<f64> = (&lit * y).iter().copied().collect();
        let mean: f64 = a.iter().zip(&g0).map(|(x, g)| x * g).sum();
        let amax = a.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let sign = if mean.abs() > 1e-12 * g0_scale.max(f64::MIN_POSITIVE) * amax {
            mean.signum()
        } else {
            a.iter()
                .find(|v| v.abs() > 1e-12 * amax)
                .map(|v| v.signum())
                .unwrap_or(1.0)
        };
        if sign < 0.0 {
            a.iter_mut().for_each(|v| *v = -*v);
        }
        for (k, v) in a.into_iter().enumerate() {
            vectors[(row, k)] = v;
        }
    }
    Ok(SpectralDecomposition {
        frame: pair.frame().clone(),
        eigenvalues: values,
        eigenvectors: vectors,
        gram,
        cholesky: chol,
    })
}

/// `<psi_i> = sum_k a_ik <Q_k>`.
pub fn mean_of_state(decomp: &SpectralDecomposition, i: usize, mu_moments: &[f64]) -> f64 {
    decomp
        .eigenvectors
        .row(i)
        .iter()
        .zip(mu_moments)
        .map(|(a, m)| a * m)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisSpec;
    use crate::moments::{accumulate_moments, matrices_from_moments, Sample};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn frame() -> BasisFrame {
        BasisFrame::raw(BasisSpec::Monomial)
    }

    fn random_pencil(rng: &mut impl Rng, n: usize) -> OperatorPair {
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let g = &a * a.transpose() + DMatrix::identity(n, n) * 0.5;
        let mut f = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        f = (&f + f.transpose()) * 0.5;
        OperatorPair::new(frame(), f, g).unwrap()
    }

    #[test]
    fn identity_observable() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let p = random_pencil(&mut rng, 5);
        let same = p.with_left(p.right().clone()).unwrap();
        let d = solve_pencil(&same).unwrap();
        for l in d.eigenvalues() {
            assert!((l - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn scalar_pencil() {
        let mom = accumulate_moments(
            [Sample::new(0.2, 3.0, 2.0).unwrap(), Sample::new(0.7, 1.0, 1.0).unwrap()],
            &BasisSpec::Monomial,
            1,
        )
        .unwrap();
        let d = solve_pencil(&matrices_from_moments(&mom).unwrap()).unwrap();
        assert_relative_eq!(d.eigenvalues()[0], 7.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(d.eigenvectors()[(0, 0)], 1.0 / 3f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(mean_of_state(&d, 0, mom.mu_moments()), 3f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn residuals_of_random_pencils() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let p = random_pencil(&mut rng, 6);
            let d = solve_pencil(&p).unwrap();
            let fnorm = p.left().norm();
            let gnorm = p.right().norm();
            for i in 0..6 {
                let a = DVector::from_vec(d.coefficients(i));
                let l = d.eigenvalues()[i];
                let r = p.left() * &a - p.right() * &a * l;
                assert!(r.norm() <= 1e-10 * (fnorm + l.abs() * gnorm) * a.norm().max(1.0));
            }
        }
    }

    #[test]
    fn rejects_indefinite_and_asymmetric() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let f = DMatrix::identity(2, 2);
        let p = OperatorPair::new(frame(), f.clone(), g).unwrap();
        assert!(matches!(solve_pencil(&p), Err(Error::GramNotPositiveDefinite { pivot: 1 })));
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        let p = OperatorPair::new(frame(), asym, DMatrix::identity(2, 2)).unwrap();
        assert!(matches!(solve_pencil(&p), Err(Error::InvalidMatrix(_))));
    }

    #[test]
    fn cholesky_helpers() {
        let g = DMatrix::from_row_slice(3, 3, &[4.0, 2.0, 0.4, 2.0, 3.0, 0.5, 0.4, 0.5, 2.0]);
        let c = Cholesky::factor(&g).unwrap();
        let inv = c.inverse();
        let prod = &g * &inv;
        assert!((prod - DMatrix::<f64>::identity(3, 3)).amax() < 1e-14);
        let v = [0.3, -1.0, 2.0];
        let direct = (DVector::from_row_slice(&v).transpose() * &inv * DVector::from_row_slice(&v))[(0, 0)];
        assert_relative_eq!(c.inverse_quadratic_form(&v), direct, max_relative = 1e-14);
        let mut b = v.to_vec();
        c.solve_lower_in_place(&mut b);
        c.solve_upper_in_place(&mut b);
        let x = DVector::from_vec(b);
        assert!((&g * x - DVector::from_row_slice(&v)).amax() < 1e-14);
    }

    proptest! {
        #[test]
        fn orthonormality_trace_and_order(seed in any::<u64>(), n in 1usize..8) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let p = random_pencil(&mut rng, n);
            let d = solve_pencil(&p).unwrap();
            let a = d.eigenvectors();
            let gram = a * p.right() * a.transpose();
            let fmat = a * p.left() * a.transpose();
            let lmax = d.eigenvalues().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
            for i in 0..n {
                for j in 0..n {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((gram[(i, j)] - delta).abs() < 1e-10);
                    prop_assert!((fmat[(i, j)] - delta * d.eigenvalues()[i]).abs() < 1e-9 * lmax);
                }
            }
            prop_assert!(d.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
            let trace = (p.right().clone().try_inverse().unwrap() * p.left()).trace();
            let sum: f64 = d.eigenvalues().iter().sum();
            prop_assert!((sum - trace).abs() <= 1e-9 * trace.abs().max(lmax));
            for m in d.state_means() {
                prop_assert!(m >= -1e-12);
            }
        }

        #[test]
        fn invariant_under_basis_change(seed in any::<u64>(), n in 2usize..7) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let p = random_pencil(&mut rng, n);
            let t = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 + rng.random_range(0.0..1.0) } else { rng.random_range(-0.5..0.5) });
            let q = OperatorPair::new(frame(), t.transpose() * p.left() * &t, t.transpose() * p.right() * &t).unwrap();
            let a = solve_pencil(&p).unwrap();
            let b = solve_pencil(&q).unwrap();
            for (x, y) in a.eigenvalues().iter().zip(b.eigenvalues()) {
                prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
            }
        }
    }
}
