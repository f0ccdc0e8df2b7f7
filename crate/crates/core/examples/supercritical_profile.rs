//! Entropy and AT margin above α_CG, followed by continuation in α.

use capacity_lab::gaussian::QuadratureGrid;
use capacity_lab::runs::commands::rs_profile;
use capacity_lab::SolverOptions;

fn main() {
    let grid = QuadratureGrid::default();
    let opts = SolverOptions::default();
    let alphas: Vec<f64> = (1..=18).map(|i| 0.1 * i as f64).collect();
    println!("{:>5} {:>13} {:>10} {:>10} {:>12} {:>10}  status", "alpha", "regime", "q0", "chi", "Sigma", "AT");
    for r in rs_profile(0.5, &alphas, &grid, &opts) {
        let f = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_else(|| "-".into());
        println!(
            "{:>5.2} {:>13} {:>10} {:>10} {:>12} {:>10}  {}",
            r.alpha,
            r.regime,
            f(r.q0),
            f(r.chi),
            f(r.sigma),
            f(r.at_margin),
            r.status
        );
    }
}
