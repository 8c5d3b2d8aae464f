// `<f P>` from the value-nodes of one quadrature: only the weights change.

use lebesgue_quadrature::{
    accumulate_moments, lebesgue_quadrature, matrices_from_moments, weights_for_polynomial, BasisSpec,
    PolynomialInBasis, Sample,
};
use rand::{Rng, SeedableRng};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let samples = (0..200)
        .map(|_| {
            let x: f64 = rng.random_range(-1.0..1.0);
            Sample::new(x, (3.0 * x).sin(), rng.random_range(0.1..1.0))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let n = 5;
    let basis = BasisSpec::Legendre;
    let mom = accumulate_moments(samples.iter().copied(), &basis, n)?;
    let q = lebesgue_quadrature(&matrices_from_moments(&mom)?, mom.mu_moments())?;
    let p = PolynomialInBasis::new(basis, vec![0.5, -1.0, 0.3, 0.8, -0.2, 0.1, 0.4, -0.7, 0.25])?;
    let wp = weights_for_polynomial(&q, &p)?;
    let via_nodes: f64 = q.value_nodes().iter().zip(&wp).map(|(f, w)| f * w).sum();
    let brute: f64 = samples.iter().map(|s| s.weight * s.f * p.evaluate(s.x)).sum();
    println!("<fP> from value-nodes {via_nodes:.12}, by summation {brute:.12}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
