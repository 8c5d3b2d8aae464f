// Two-stage degradation: dC/dN takes two values; a D = 2 clustering of the
// Lebesgue value-nodes recovers both levels and their lengths.

use lebesgue_quadrature::io::{derivative_dx, two_stage_rows, TwoStageParams};
use lebesgue_quadrature::{
    accumulate_in_frame, build_clusters, lebesgue_quadrature, matrices_from_moments, rn_interpolate, BasisFrame,
    BasisSpec, Sample,
};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let rows = two_stage_rows(&TwoStageParams::default())?;
    let samples = rows.iter().map(|&(n, c)| Sample::unit(n, c)).collect::<Result<Vec<_>, _>>()?;
    let deriv = derivative_dx(&samples)?;
    let frame = BasisFrame::fitted(BasisSpec::Chebyshev, 0.0, 1000.0)?;
    let mom = accumulate_in_frame(deriv, &frame, 50)?;
    let q = lebesgue_quadrature(&matrices_from_moments(&mom)?, mom.mu_moments())?;
    let model = build_clusters(q.decomposition(), q.weights(), 2)?;
    for (v, w) in model.cluster_values().iter().zip(model.cluster_weights()) {
        println!("level {v:.4e}  length {w:.2}");
    }
    for n in [100.0, 500.0, 900.0] {
        println!("f_RN({n}) = {:.4e}", rn_interpolate(&model, n)?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
