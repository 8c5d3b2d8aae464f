// Products and conversions of polynomials in orthogonal bases.

use lebesgue_quadrature::basis::{evaluate_basis, multiplication_coefficients, multiply_polynomials};
use lebesgue_quadrature::{BasisSpec, PolynomialInBasis};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    for basis in [BasisSpec::Chebyshev, BasisSpec::Legendre, BasisSpec::HermiteE, BasisSpec::Laguerre] {
        println!("{basis}: Q_2 Q_3 = {:?}", multiplication_coefficients(&basis, 2, 3)?);
    }
    println!("T_5(0.3) = {}", evaluate_basis(&BasisSpec::Chebyshev, 5, 0.3)?);
    let p = PolynomialInBasis::new(BasisSpec::Monomial, vec![1.0, 0.0, -2.0, 0.0, 1.0])?;
    let c = p.convert_to(&BasisSpec::Chebyshev)?;
    println!("1 - 2x^2 + x^4 in Chebyshev: {:?}", c.coefficients());
    let sq = multiply_polynomials(&c, &c)?;
    println!("its square at 0.5: {} (direct {})", sq.evaluate(0.5), p.evaluate(0.5).powi(2));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
