// Gaussian quadrature from moments: exact Legendre moments, then a sampled
// grid over [-1, 1].

use lebesgue_quadrature::{accumulate_moments, gaussian_quadrature, BasisFrame, BasisSpec, MomentSet, Sample};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let n = 7;
    let mu: Vec<f64> = (0..2 * n).map(|m| if m % 2 == 0 { 2.0 / (m as f64 + 1.0) } else { 0.0 }).collect();
    let exact = MomentSet::from_moments(BasisFrame::raw(BasisSpec::Monomial), n, mu, vec![0.0; 2 * n - 1])?;
    let g = gaussian_quadrature(&exact)?;
    println!("exact moments:");
    for (x, w) in g.nodes().iter().zip(g.weights()) {
        println!("  x = {x:+.12}  w = {w:.12}");
    }

    let m = 10001;
    let samples = (0..m).map(|l| {
        let x = -1.0 + 2.0 * l as f64 / (m - 1) as f64;
        let w = if l == 0 || l == m - 1 { 1.0 } else { 2.0 } / (m - 1) as f64;
        Sample::new(x, x, w)
    });
    let samples = samples.collect::<Result<Vec<_>, _>>()?;
    let g = gaussian_quadrature(&accumulate_moments(samples, &BasisSpec::Chebyshev, n)?)?;
    println!("sampled grid: integral of x^6 = {:.10}", g.apply(|x| x.powi(6)));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
