// Two passes over the Runge grid: Gram matrix, then `<Q|K(x)|Q>`.

use lebesgue_quadrature::{
    accumulate_moments, christoffel_pencil, christoffel_weights, solve_pencil, x_pencil, BasisSpec, Sample,
};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let m = 10001;
    let samples = (0..m)
        .map(|l| {
            let x = -1.0 + 2.0 * l as f64 / (m - 1) as f64;
            let w = if l == 0 || l == m - 1 { 1.0 } else { 2.0 } / (m - 1) as f64;
            Sample::new(x, x, w)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mom = accumulate_moments(samples.iter().copied(), &BasisSpec::Monomial, 7)?;
    let pair = x_pencil(&mom)?;
    let spec = christoffel_pencil(samples, pair.right(), pair.frame())?;
    let gauss = solve_pencil(&pair)?;
    let wk = christoffel_weights(&gauss, &spec)?;
    println!("lambda_K       w(K pencil)    x_i of f=x     w_K");
    for i in 0..7 {
        println!(
            "{:.8}     {:.8}     {:+.8}    {:.6}",
            spec.eigenvalues()[i],
            spec.lebesgue_weights()[i],
            gauss.eigenvalues()[i],
            wk[i]
        );
    }
    println!("sum lambda_K = {:.6}", spec.eigenvalues().iter().sum::<f64>());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
