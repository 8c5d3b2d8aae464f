// Lebesgue quadrature of the Runge function on dx, with the PCA split of
// its variance.

use lebesgue_quadrature::{
    accumulate_moments, lebesgue_quadrature, matrices_from_moments, pca_variance_decomposition, BasisSpec, Sample,
};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let m = 10001;
    let samples = (0..m)
        .map(|l| {
            let x = -1.0 + 2.0 * l as f64 / (m - 1) as f64;
            let w = if l == 0 || l == m - 1 { 1.0 } else { 2.0 } / (m - 1) as f64;
            Sample::new(x, 1.0 / (1.0 + 25.0 * x * x), w)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mom = accumulate_moments(samples.iter().copied(), &BasisSpec::Legendre, 7)?;
    let q = lebesgue_quadrature(&matrices_from_moments(&mom)?, mom.mu_moments())?;
    for (f, w) in q.value_nodes().iter().zip(q.weights()) {
        println!("f = {f:.8}  w = {w:.8}");
    }
    let direct: f64 = samples.iter().map(|s| s.weight * s.f).sum();
    println!("integral {:.12} (direct {direct:.12})", q.integrate());
    let pca = pca_variance_decomposition(&q, mom.f_squared().unwrap_or(f64::NAN));
    println!("mean {:.8}, unexplained {:.3e}", pca.mean, pca.residual);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
