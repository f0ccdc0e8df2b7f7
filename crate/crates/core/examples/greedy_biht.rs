//! Greedy BIHT on random ±1 patterns beyond the Cover–Gardner load of the
//! variables it ends up using.

use capacity_lab::biht::{run_trial, BIHTConfig, Ensemble};

fn main() -> capacity_lab::Result<()> {
    let (n, alpha, trials) = (64, 1.2, 20);
    let p = (alpha * n as f64).round() as usize;
    let cfg = BIHTConfig::default();
    let mut used = Vec::new();
    for t in 0..trials {
        let (_, r) = run_trial(n, p, Ensemble::Binary, &cfg, 2024, t)?;
        println!(
            "trial {t:>2}: success {:<5} K = {:>2}  rho_used = {:.3}  iterations = {:>5}",
            r.success, r.k_final, r.rho_used, r.iterations_total
        );
        if r.success {
            used.push(r.rho_used);
        }
    }
    used.sort_by(f64::total_cmp);
    if let Some(m) = used.get(used.len() / 2) {
        println!("alpha = {alpha}, median rho_used = {m:.3}, 2 * median = {:.3}", 2.0 * m);
    }
    Ok(())
}
