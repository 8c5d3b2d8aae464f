// Density matrix whose diagonal is a given polynomial, and the 1/K(x)
// case with unit spectrum.

use lebesgue_quadrature::basis::ProductTable;
use lebesgue_quadrature::gev::Cholesky;
use lebesgue_quadrature::{
    accumulate_moments, density_matrix_from_polynomial, matrices_from_moments, reconstruct_diagonal, spur,
    spur_product, BasisSpec, PolynomialInBasis, Sample,
};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let basis = BasisSpec::Legendre;
    let samples = (0..101)
        .map(|l| {
            let x = -1.0 + 0.02 * l as f64;
            Sample::new(x, x.exp(), 0.02)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let n = 4;
    let pair = matrices_from_moments(&accumulate_moments(samples.iter().copied(), &basis, n)?)?;

    let p = PolynomialInBasis::new(basis.clone(), vec![1.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.3])?;
    let rho = density_matrix_from_polynomial(&p, pair.frame(), pair.right())?;
    println!("rho(0.3, 0.3) = {:.10}, P(0.3) = {:.10}", reconstruct_diagonal(&rho, 0.3), p.evaluate(0.3));
    println!("Spur rho = {:.10}", spur(&rho));
    let fp: f64 = samples.iter().map(|s| s.weight * s.f * p.evaluate(s.x)).sum();
    println!("Spur |f|rho| = {:.10}, <fP> = {fp:.10}", spur_product(&rho, &pair)?);

    let ginv = Cholesky::factor(pair.right())?.inverse();
    let table = ProductTable::new(&basis, n)?;
    let mut gamma = vec![0.0; 2 * n - 1];
    for j in 0..n {
        for k in 0..n {
            for &(m, c) in table.get(j, k) {
                gamma[m] += c * ginv[(j, k)];
            }
        }
    }
    let inv_k = density_matrix_from_polynomial(&PolynomialInBasis::new(basis, gamma)?, pair.frame(), pair.right())?;
    println!("1/K(x) spectrum: {:?}", inv_k.eigenvalues());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
