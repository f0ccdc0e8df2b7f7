//! Greedy BIHT and the separability oracle on small random instances.

use capacity_lab::biht::greedy::{mismatches, objective};
use capacity_lab::biht::oracle::{lp_separable, perceptron_separates};
use capacity_lab::biht::{
    biht_run, exhaustive_capacity, exhaustive_capacity_curve, generate_dataset, hard_threshold,
    hard_threshold_with_support, run_trial, separability_oracle, trial_rng, BIHTConfig, Ensemble,
};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

fn gaussian_start(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = trial_rng(seed, 99);
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal) / (n as f64).sqrt()).collect()
}

#[test]
fn dense_biht_separates_easy_instances() {
    let cfg = BIHTConfig::default();
    let mut ok = 0;
    for seed in 0..200 {
        let data = generate_dataset(8, 4, Ensemble::Binary, seed).unwrap();
        let run = biht_run(&data, 8, &gaussian_start(8, seed), &[], &cfg).unwrap();
        if mismatches(&data, &run.w) == 0 {
            ok += 1;
        }
    }
    assert!(ok >= 190, "{ok}/200");
}

#[test]
fn early_steps_do_not_increase_objective() {
    let cfg = BIHTConfig { max_iter: 1, ..Default::default() };
    let mut deltas = Vec::new();
    for seed in 0..20 {
        let data = generate_dataset(32, 24, Ensemble::Binary, seed).unwrap();
        let mut w = gaussian_start(32, seed);
        for _ in 0..10 {
            let before = objective(&data, &w);
            w = biht_run(&data, 32, &w, &[], &cfg).unwrap().w_raw;
            deltas.push(objective(&data, &w) - before);
        }
    }
    deltas.sort_by(f64::total_cmp);
    assert!(deltas[deltas.len() / 2] <= 0.0);
}

#[test]
fn greedy_support_is_separable_and_reproducible() {
    let cfg = BIHTConfig::default();
    for seed in 0..30 {
        let (data, r) = run_trial(16, 20, Ensemble::Binary, &cfg, seed, 0).unwrap();
        assert!(r.rho_used <= 1.0 && r.k_final == r.support.len());
        assert!(r.success || r.k_final == 16);
        if r.success {
            // sign(0) = +1 lets a pattern sitting on the hyperplane count as
            // classified; only strict margins certify separability
            let on_plane = data.margins(&r.w).iter().any(|m| m.abs() < 1e-12);
            assert!(on_plane || separability_oracle(&data, &r.support).unwrap(), "seed {seed}");
        }
        let (_, again) = run_trial(16, 20, Ensemble::Binary, &cfg, seed, 0).unwrap();
        assert_eq!(r, again);
    }
}

#[test]
fn oracle_agrees_with_perceptron_on_separable_fixtures() {
    let support: Vec<usize> = (0..6).collect();
    let mut checked = 0;
    let mut seed = 0;
    while checked < 100 {
        let data = generate_dataset(12, 10, Ensemble::Spherical, seed).unwrap();
        seed += 1;
        // the perceptron converges on every separable fixture; keep those it certifies
        if perceptron_separates(&data, &support, 100_000).is_some() {
            assert!(separability_oracle(&data, &support).unwrap());
            assert!(lp_separable(&data, &support).unwrap());
            checked += 1;
        }
    }
}

fn cover_probability(p: u64, n: u64) -> f64 {
    let mut binom = 1.0;
    let mut count = 0.0;
    for k in 0..n.min(p) {
        count += binom;
        binom *= (p - 1 - k) as f64 / (k + 1) as f64;
    }
    count / 2f64.powi(p as i32 - 1)
}

/// `M = N` is plain separability, which for points in general position
/// follows Cover's count.
#[test]
fn full_support_matches_cover_count() {
    for n in [8usize, 12, 16] {
        let rows = exhaustive_capacity_curve(n, n, &[n, 2 * n, 3 * n], 200, Ensemble::Spherical, 11).unwrap();
        assert!(rows[0].prob_any_subset >= 0.9);
        for r in &rows {
            let want = cover_probability(r.p as u64, n as u64);
            // binomial sampling error of 200 trials is at most 0.035
            assert!((r.prob_any_subset - want).abs() < 0.15, "N = {n}, P = {}: {} vs {want}", r.p, r.prob_any_subset);
        }
    }
    assert_eq!(exhaustive_capacity(10, 3, 1, 20, 0).unwrap(), 1.0);
}

#[test]
fn selection_beats_a_fixed_support() {
    let rows = exhaustive_capacity_curve(12, 6, &[16], 200, Ensemble::Binary, 2).unwrap();
    assert!(rows[0].prob_any_subset > rows[0].prob_fixed_subset);
}

proptest! {
    #[test]
    fn hard_threshold_keeps_largest(v in prop::collection::vec(-10.0f64..10.0, 1..30), k_frac in 0.0f64..1.0) {
        let n = v.len();
        let k = 1 + ((n - 1) as f64 * k_frac) as usize;
        let w = hard_threshold(&v, k).unwrap();
        prop_assert!(w.iter().filter(|x| **x != 0.0).count() <= k);
        let min_kept = w.iter().filter(|x| **x != 0.0).map(|x| x.abs()).fold(f64::INFINITY, f64::min);
        for i in 0..n {
            prop_assert!(w[i] == 0.0 || w[i] == v[i]);
            if w[i] == 0.0 {
                prop_assert!(v[i].abs() <= min_kept);
            }
        }
    }

    #[test]
    fn fixed_indices_survive(v in prop::collection::vec(-10.0f64..10.0, 2..30), seed in 0u64..1000) {
        let n = v.len();
        let mut rng = trial_rng(seed, 0);
        let k = rng.random_range(1..=n);
        let f = rng.random_range(0..=k);
        let fixed: Vec<usize> = rand::seq::index::sample(&mut rng, n, f).into_iter().collect();
        let (w, support) = hard_threshold_with_support(&v, k, &fixed).unwrap();
        prop_assert_eq!(support.len(), k);
        prop_assert!(support.windows(2).all(|s| s[0] < s[1]));
        for &i in &fixed {
            prop_assert!(support.contains(&i));
            prop_assert_eq!(w[i], v[i]);
        }
        let free_min = support.iter().filter(|i| !fixed.contains(i)).map(|&i| v[i].abs()).fold(f64::INFINITY, f64::min);
        for i in (0..n).filter(|i| !support.contains(i)) {
            prop_assert_eq!(w[i], 0.0);
            prop_assert!(v[i].abs() <= free_min);
        }
    }
}
