//! Exact finite-size selection advantage: the probability that some size-M
//! support separates P random patterns, against a fixed support.

use capacity_lab::biht::oracle::{crossing_point, exhaustive_capacity_curve};
use capacity_lab::biht::Ensemble;

fn main() -> capacity_lab::Result<()> {
    let (n, m, trials) = (10, 5, 100);
    let p_grid: Vec<usize> = (4..=20).collect();
    let rows = exhaustive_capacity_curve(n, m, &p_grid, trials, Ensemble::Binary, 1)?;
    println!("{:>3} {:>8} {:>8}", "P", "any", "fixed");
    for r in &rows {
        println!("{:>3} {:>8.3} {:>8.3}", r.p, r.prob_any_subset, r.prob_fixed_subset);
    }
    let any: Vec<_> = rows.iter().map(|r| (r.p, r.prob_any_subset)).collect();
    let fixed: Vec<_> = rows.iter().map(|r| (r.p, r.prob_fixed_subset)).collect();
    println!("half-probability crossings: any {:?}, fixed {:?}", crossing_point(&any, 0.5), crossing_point(&fixed, 0.5));
    Ok(())
}
