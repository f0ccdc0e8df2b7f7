//! Capacity under optimal selection, α_VS(ρ), next to the Cover–Gardner line 2ρ.
//!
//! `cargo run --release --example capacity_curve -- 0.3 0.5 0.7`

use std::time::Instant;

use capacity_lab::gaussian::QuadratureGrid;
use capacity_lab::supercritical::capacity_vs;
use capacity_lab::SolverOptions;

fn main() -> capacity_lab::Result<()> {
    let grid = QuadratureGrid::default();
    let opts = SolverOptions::default();
    let mut rhos: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    if rhos.is_empty() {
        rhos = vec![0.1, 0.3, 0.5, 0.7, 0.9];
    }
    println!("{:>6} {:>8} {:>12} {:>12} {:>10}", "rho", "2rho", "alpha_VS", "Sigma", "seconds");
    for rho in rhos {
        let t = Instant::now();
        match capacity_vs(rho, &grid, &opts) {
            Ok(c) => println!(
                "{rho:>6} {:>8} {:>12.6} {:>12.2e} {:>10.2}",
                c.alpha_cg,
                c.alpha_vs,
                c.sigma_residual,
                t.elapsed().as_secs_f64()
            ),
            Err(e) => println!("{rho:>6} failed: {e}"),
        }
    }
    Ok(())
}
