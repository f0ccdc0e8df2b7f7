//! Below the Cover–Gardner load the overlap q1 approaches ρ and the entropy
//! stays at the binary entropy of ρ.

use capacity_lab::gaussian::QuadratureGrid;
use capacity_lab::stability::at_margin_subcritical;
use capacity_lab::subcritical::solve_subcritical;
use capacity_lab::{ModelPoint, SolverOptions};

fn main() -> capacity_lab::Result<()> {
    let grid = QuadratureGrid::default();
    let opts = SolverOptions::default();
    let rho = 0.5;
    println!("{:>6} {:>14} {:>14} {:>12} {:>10} {:>10}", "alpha", "q1", "q0", "rho-q1", "Sigma", "AT");
    for alpha in [0.1, 0.3, 0.5, 0.7, 0.9, 0.95, 0.98, 0.99] {
        let p = ModelPoint::new(rho, alpha)?;
        let s = solve_subcritical(p, &grid, &opts)?;
        let at = at_margin_subcritical(&s, p)?;
        println!(
            "{alpha:>6} {:>14.10} {:>14.10} {:>12.4e} {:>10.6} {:>10.4}",
            s.q1,
            s.q0,
            rho - s.q1,
            s.sigma,
            at.margin
        );
    }
    Ok(())
}
