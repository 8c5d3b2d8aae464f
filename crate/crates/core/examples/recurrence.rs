// Recurrence coefficients of the orthonormal polynomials of a sampled
// measure; Chebyshev weight gives a_k -> 1/2, b_k = 0.

use lebesgue_quadrature::{accumulate_moments, three_term_recurrence, BasisSpec, Sample};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let m = 400;
    let samples = (0..m)
        .map(|l| {
            let x = (std::f64::consts::PI * (l as f64 + 0.5) / m as f64).cos();
            Sample::new(x, 0.0, std::f64::consts::PI / m as f64)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mom = accumulate_moments(samples, &BasisSpec::Chebyshev, 8)?;
    for (k, (a, b)) in three_term_recurrence(&mom)?.iter().enumerate() {
        println!("k = {k}: a = {a:.10}, b = {b:+.3e}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
