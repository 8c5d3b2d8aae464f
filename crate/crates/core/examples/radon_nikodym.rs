// Radon-Nikodym estimates of a density `f` sampled on dx.

use lebesgue_quadrature::{
    accumulate_moments, matrices_from_moments, rn_distributed, rn_gamma, rn_nevai, solve_pencil, BasisSpec, Sample,
    StateMoments,
};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let m = 2001;
    let samples = (0..m)
        .map(|l| {
            let x = -1.0 + 2.0 * l as f64 / (m - 1) as f64;
            Sample::new(x, 1.0 / (1.0 + 25.0 * x * x), 2.0 / (m - 1) as f64)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mom = accumulate_moments(samples, &BasisSpec::Legendre, 12)?;
    let d = solve_pencil(&matrices_from_moments(&mom)?)?;
    println!("     x    exact    nevai  gamma=0");
    for x in [-0.8, -0.4, 0.0, 0.4, 0.8] {
        let exact = 1.0 / (1.0 + 25.0 * x * x);
        println!("{x:6.2} {exact:8.4} {:8.4} {:8.4}", rn_nevai(&d, x)?, rn_gamma(&d, x, 0.0)?);
    }
    let bag = StateMoments::average(d.frame(), &[-0.1, 0.0, 0.1], d.n())?;
    println!("state averaged over three points: {:.4}", rn_distributed(&d, &bag)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
